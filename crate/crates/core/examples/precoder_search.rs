//! Randomized search for security precoders on the (4, 2) code.
//!
//! Weak security for all four symbols already works over GF(3); strong
//! security against any two overheard source symbols is searched over GF(7).

use partial_repair::fixtures;
use partial_repair::secrecy::{construct_precoder, Scope, SecurityMode, Universe};
use partial_repair::RepairPlan;

fn main() -> partial_repair::Result<()> {
    let plan = RepairPlan::from_counts(vec![1, 1, 0, 0]);
    let scope = Scope::Universal(Universe::SourceSymbols);

    let weak = construct_precoder(
        &fixtures::four_two_system_over(3),
        &plan,
        SecurityMode::Weak,
        scope,
        &fixtures::all_secret_partition(4),
        1,
    )?;
    println!("weak, GF(3): found after {} draw(s)", weak.attempts);
    println!("  T = {:?}", weak.precoder.matrix().to_rows());
    println!(
        "  subsets audited: {}, flags {:?}",
        weak.audit.views_audited, weak.audit.weak_flags
    );

    let strong = construct_precoder(
        &fixtures::four_two_system_over(7),
        &plan,
        SecurityMode::Strong,
        scope,
        &fixtures::two_key_partition(),
        1,
    )?;
    println!("strong, GF(7): found after {} draw(s)", strong.attempts);
    println!("  T = {:?}", strong.precoder.matrix().to_rows());
    println!(
        "  worst leakage over {} subsets: {}",
        strong.audit.views_audited, strong.audit.leakage_qary
    );

    // The stored-packet universe is much harder to protect at GF(3).
    match construct_precoder(
        &fixtures::four_two_system_over(3),
        &plan,
        SecurityMode::Weak,
        Scope::Universal(Universe::StoredPackets),
        &fixtures::all_secret_partition(4),
        1,
    ) {
        Ok(s) => println!("weak over stored packets, GF(3): {} draw(s)", s.attempts),
        Err(e) => println!("weak over stored packets, GF(3): {e}"),
    }
    Ok(())
}
