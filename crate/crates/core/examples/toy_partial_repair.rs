//! Four nodes, a (4, 2) code over GF(3), two packets lost, two broadcasts.
//!
//! Run with `cargo run --example toy_partial_repair`.

use partial_repair::fixtures;
use partial_repair::repair::{
    allocate_transmissions, gamma_min_bruteforce, gamma_min_formula, repair_with_broadcasts,
};

fn main() -> partial_repair::Result<()> {
    // a1 = 2, a2 = 1, b1 = 0, b2 = 2
    let sys = fixtures::four_two_system().with_payload(vec![2, 1, 0, 2])?;
    let pattern = fixtures::two_partial_pattern();
    let packets = sys.packets().expect("payload attached");

    for (node, stored) in packets.iter().enumerate() {
        println!(
            "node {}: stores {:?}, keeps {:?}",
            node + 1,
            stored,
            pattern.surviving(node)
        );
    }

    println!(
        "\nminimum budget (closed form): {}",
        gamma_min_formula(&pattern)
    );
    println!(
        "minimum budget (exhaustive):  {}",
        gamma_min_bruteforce(&pattern)?
    );
    println!(
        "allocation:                   {:?}",
        allocate_transmissions(&pattern)?.counts()
    );

    let plan = fixtures::two_broadcast_plan();
    let payload = sys.payload().unwrap();
    for b in plan.broadcasts() {
        let value = sys.field().dot(&b.vector, payload);
        println!(
            "node {} broadcasts {:?} . x = {value}",
            b.sender + 1,
            b.vector
        );
    }

    for r in repair_with_broadcasts(&sys, &pattern, &plan)? {
        println!(
            "node {} rebuilds packet {} = {:?} (was {}), coefficients {:?}",
            r.node + 1,
            r.packet,
            r.value.unwrap(),
            packets[r.node][r.packet],
            r.coefficients
        );
    }
    println!("\nstill MDS: {}", sys.verify_caching_mds());
    Ok(())
}
