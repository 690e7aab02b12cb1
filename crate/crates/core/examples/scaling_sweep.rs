//! The central experiment: measures panel-reduction cost across
//! processor counts on flat and cube grids, fits the scaling exponent,
//! and compares it against what the original and corrected formulas
//! predict (p^-1 vs p^(-1/2) flat, p^(-1/3) cube).

use lu25d::harness::{fit_exponent, run_sweep, SweepSpec};

fn sweep(n: usize, v: usize, grids: &[&str]) -> lu25d::Result<Vec<(f64, f64, f64)>> {
    let spec = SweepSpec {
        n,
        v,
        grids: grids.iter().map(|s| s.to_string()).collect(),
        seeds: vec![1],
        phases: None,
        collective: None,
    };
    let out = run_sweep(&spec)?;
    for (g, why) in &out.skipped {
        eprintln!("skipped {g}: {why}");
    }
    Ok(out
        .reports
        .iter()
        .map(|r| {
            let g: lu25d::grid::GridConfig = r.grid.parse().unwrap();
            (
                g.p() as f64,
                r.panel_reduction_total as f64,
                r.ratio_measured_over_eq1,
            )
        })
        .collect())
}

fn main() -> lu25d::Result<()> {
    let n = 384;
    println!("panel-reduction critical-path words, n={n} v=4:\n");

    for (family, grids, predicted) in [
        ("flat sqrt(p) x sqrt(p) x 1", vec!["2x2x1", "4x4x1", "8x8x1"], -0.5),
        ("cube p^(1/3) each way", vec!["2x2x2", "3x3x3", "4x4x4"], -1.0 / 3.0),
    ] {
        let pts = sweep(n, 4, &grids)?;
        println!("{family}:");
        for &(p, words, ratio) in &pts {
            println!("  p={p:3} measured {words:9} (measured/original = {ratio:.2})");
        }
        let fit = fit_exponent(
            &pts.iter().map(|&(p, w, _)| (p, w)).collect::<Vec<_>>(),
        )?;
        println!(
            "  fitted exponent {:.3} (corrected predicts {predicted:.3}, original predicts -1.000), r2 = {:.4}\n",
            fit.slope, fit.r2
        );
    }
    Ok(())
}
