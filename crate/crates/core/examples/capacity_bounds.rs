//! Secrecy capacities and sufficient field sizes for a range of budgets.

use partial_repair::secrecy::capacity_report;

fn main() {
    println!(
        "{:>3} {:>3} {:>5} {:>5} {:>12} {:>8}",
        "M", "Γ", "C_ss", "C_ws", "q strong", "q weak"
    );
    for (m, gamma) in [
        (4, 0),
        (4, 2),
        (4, 3),
        (4, 4),
        (6, 3),
        (9, 6),
        (12, 4),
        (20, 10),
    ] {
        let r = capacity_report(m, gamma, gamma);
        let show = |q: Option<u64>| q.map_or("-".to_string(), |q| q.to_string());
        println!(
            "{:>3} {:>3} {:>5} {:>5} {:>12} {:>8}",
            m,
            gamma,
            r.c_ss,
            r.c_ws,
            show(r.q_min_strong),
            show(r.q_min_weak)
        );
    }
}
