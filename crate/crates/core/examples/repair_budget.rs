//! Compares the closed-form minimum budget with exhaustive search and prints
//! the cut-set table of the chosen allocation.

use partial_repair::harness::cmd_plan;
use partial_repair::{CachingSystem, ErasurePattern, SystemConfig};

fn main() -> partial_repair::Result<()> {
    let cases: [(usize, usize, usize, &[usize]); 5] = [
        (4, 2, 2, &[2, 2, 1, 1]),
        (4, 2, 2, &[2, 2, 2, 0]),
        (4, 2, 2, &[2, 2, 1, 0]),
        (5, 3, 2, &[2, 2, 2, 1, 0]),
        (5, 2, 3, &[3, 3, 3, 1, 1]),
    ];
    for (n, k, t, counts) in cases {
        let sys = CachingSystem::systematic(SystemConfig::new(n, k, t, 257)?)?;
        let pattern = ErasurePattern::from_counts(k, t, counts)?;
        let (report, _) = cmd_plan(&sys, &pattern)?;
        println!(
            "n={n} k={k} t={t} |P|={counts:?}: closed form {} (ceil {}), exhaustive {:?}, r = {:?}",
            report.gamma_min_formula,
            report.gamma_min_formula_ceil,
            report.gamma_min_oracle,
            report.r
        );
        for row in report
            .feasibility
            .iter()
            .filter(|r| r.stored + r.received == r.required)
        {
            println!(
                "    tight cut {:?}: {} stored + {} received = {}",
                row.nodes, row.stored, row.received, row.required
            );
        }
    }
    Ok(())
}
