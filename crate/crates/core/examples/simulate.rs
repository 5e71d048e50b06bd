//! Parallel episode sweep with a per-episode CSV.

use partial_repair::harness::{cmd_simulate, simulate_csv, RunConfig};

fn main() -> partial_repair::Result<()> {
    let mut cfg = RunConfig::new(5, 2, 2, 65537);
    cfg.erase_prob = 0.3;
    cfg.keys = 2;
    cfg.search_precoder = true;
    let sim = cmd_simulate(&cfg, 7, 200)?;
    println!("{:#?}", sim.summary);
    for line in simulate_csv(&sim).lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
