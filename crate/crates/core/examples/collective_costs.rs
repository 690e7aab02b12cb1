//! Compares the two cross-layer reduction collectives. The
//! scatter-reduce/all-gather variant keeps the per-processor cost flat
//! in the layer count c; the binomial tree pays a log2(c) factor that
//! visibly distorts the scaling exponent on cube grids.

use lu25d::engine::{self, Collective, EngineConfig};
use lu25d::fabric::Phase;
use lu25d::grid::GridConfig;
use lu25d::matrix::random_matrix;

fn panel_words(n: usize, grid: GridConfig, collective: Collective) -> lu25d::Result<u64> {
    let mut cfg = EngineConfig::new(n, 4, grid, 1);
    cfg.collective = collective;
    let a = random_matrix(n, 1)?;
    let run = engine::run(&cfg, &a)?;
    Ok(run
        .ledger
        .critical_path_cost(Some(&[Phase::PanelReduceA10, Phase::PanelReduceA01])))
}

fn main() -> lu25d::Result<()> {
    println!("panel-reduction words by collective, n=192 v=4:\n");
    println!("{:10} {:>12} {:>12} {:>8}", "grid", "rsag", "binomial", "ratio");
    for dims in [(2, 2, 1), (2, 2, 2), (2, 2, 4), (2, 2, 8), (4, 4, 4)] {
        let grid = GridConfig::new(dims.0, dims.1, dims.2)?;
        let rsag = panel_words(192, grid, Collective::Rsag)?;
        let bino = panel_words(192, grid, Collective::Binomial)?;
        println!(
            "{:10} {:>12} {:>12} {:>8.2}",
            grid.to_string(),
            rsag,
            bino,
            bino as f64 / rsag as f64
        );
    }
    println!("\nAt c=1 the two coincide; the binomial gap grows like log2(c).");
    Ok(())
}
