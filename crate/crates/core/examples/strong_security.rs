//! Same code and broadcasts as the partial repair example, but the `b`
//! symbols now carry uniform keys. The eavesdropper learns nothing.

use partial_repair::fixtures;
use partial_repair::secrecy::oracle::leakage_bruteforce;
use partial_repair::secrecy::{audit, capacity_strong, eavesdropper_view};

fn main() -> partial_repair::Result<()> {
    let sys = fixtures::four_two_system();
    let plan = fixtures::two_broadcast_plan();
    let view = eavesdropper_view(&sys, &plan, None)?;
    println!("eavesdropper view W = {:?}", view.matrix().to_rows());

    for (label, part) in [
        ("secrets a1,a2 / keys z1,z2", fixtures::two_key_partition()),
        ("no keys", fixtures::all_secret_partition(4)),
    ] {
        let a = audit(&view, &part)?;
        let e = leakage_bruteforce(&view, &part)?;
        println!("\n{label}");
        println!(
            "  rank(W) - rank(B) = {} - {} = {}",
            a.view_rank, a.key_rank, a.leakage_qary
        );
        println!(
            "  enumeration: H(S) = {:.3}, H(S|E) = {:.3}, I = {:.3}",
            e.h_secrets,
            e.h_secrets_given_view,
            e.mutual_information()
        );
        println!(
            "  strong: {}, weak flags: {:?}",
            a.strong_secure, a.weak_flags
        );
    }
    println!(
        "\nstrong capacity with Γ_min = 2, M = 4: {}",
        capacity_strong(4, 2)
    );
    Ok(())
}
