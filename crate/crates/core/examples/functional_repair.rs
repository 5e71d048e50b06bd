//! Random (5, 3) code over GF(65537): erase, repair by random broadcasts,
//! then decode the file from three repaired nodes.

use partial_repair::repair::{allocate_transmissions, functional_repair};
use partial_repair::{seeded_rng, CachingSystem, ErasurePattern, SystemConfig};

fn main() -> partial_repair::Result<()> {
    let cfg = SystemConfig::new(5, 3, 2, 65537)?;
    let source: Vec<u64> = vec![11, 22, 33, 44, 55, 66];
    let sys = CachingSystem::build(cfg, 7)?.with_payload(source.clone())?;

    let mut rng = seeded_rng(3);
    let pattern = ErasurePattern::random(5, 3, 2, 0.4, &mut rng)?;
    let plan = allocate_transmissions(&pattern)?;
    println!(
        "surviving counts {:?}, broadcasts {:?}",
        pattern.counts(),
        plan.counts()
    );

    let out = functional_repair(&sys, &pattern, &plan, 99)?;
    println!(
        "repaired after {} draw(s), MDS: {}",
        out.attempts,
        out.system.verify_caching_mds()
    );

    let sick: Vec<usize> = (0..5).filter(|&i| !pattern.is_healthy(i)).collect();
    let mut nodes = sick.clone();
    nodes.extend((0..5).filter(|i| !sick.contains(i)));
    nodes.truncate(3);
    let decoded = out.system.collect(&nodes)?;
    println!("decoded from nodes {nodes:?}: {decoded:?}");
    assert_eq!(decoded, source);
    Ok(())
}
