//! Simulates one factorization on a 4x4x2 grid and prints the
//! per-phase critical-path communication costs next to the residual.

use lu25d::engine::{self, phase_costs, EngineConfig};
use lu25d::fabric::Phase;
use lu25d::grid::GridConfig;
use lu25d::matrix::{random_matrix, residual_norm};

fn main() -> lu25d::Result<()> {
    let grid = GridConfig::new(4, 4, 2)?;
    let cfg = EngineConfig::new(128, 4, grid, 42);
    let a = random_matrix(cfg.n, cfg.seed)?;

    let run = engine::run(&cfg, &a)?;
    let residual = residual_norm(&a, &run.factors)?;

    println!("n={} v={} grid={} seed={}", cfg.n, cfg.v, grid, cfg.seed);
    println!("residual ||PA - LU|| / ||A|| = {residual:.3e}\n");

    println!("critical-path words by phase:");
    for phase in Phase::ALL {
        let words = run.ledger.critical_path_cost(Some(&[phase]));
        println!("  {:18} {:>8}", phase.label(), words);
    }
    println!("  {:18} {:>8}", "total", run.ledger.critical_path_cost(None));

    // The same numbers broken down by iteration, first three iterations.
    println!("\nfirst iterations in detail:");
    for pc in phase_costs(&run).iter().filter(|pc| pc.iteration < 3) {
        println!("  t={} {:18} {:>6}", pc.iteration, pc.phase.label(), pc.words);
    }
    Ok(())
}
