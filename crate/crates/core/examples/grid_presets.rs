//! Shows the three grid presets, which processor counts they admit,
//! and the block ownership / active-set machinery on a small grid.

use lu25d::grid::{BlockCoord, GridConfig, GridPreset};

fn main() -> lu25d::Result<()> {
    println!("preset admissibility for p = 1..=64:");
    for (name, preset) in [
        ("square-flat", GridPreset::SquareFlat),
        ("square-two-layer", GridPreset::SquareTwoLayer),
        ("cube", GridPreset::Cube),
    ] {
        let admitted: Vec<String> = (1..=64)
            .filter_map(|p| GridConfig::make_grid(p, preset).ok().map(|g| format!("{p}->{g}")))
            .collect();
        println!("  {name:18} {}", admitted.join("  "));
    }

    let g = GridConfig::make_grid(8, GridPreset::SquareTwoLayer)?;
    println!("\nblock-cyclic ownership on {g} (block row x column -> owner):");
    for bi in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|bj| g.owner_of_block(BlockCoord { bi, bj }).to_string())
            .collect();
        println!("  {}", row.join("  "));
    }

    println!("\npanel-phase active set per iteration (px*pz of {} processors):", g.p());
    for t in 0..3 {
        let set: Vec<String> = g.panel_active_set(t).iter().map(|p| p.to_string()).collect();
        println!("  t={t}: {}", set.join(" "));
    }
    Ok(())
}
