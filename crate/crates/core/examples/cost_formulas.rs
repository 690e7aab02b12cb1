//! Evaluates the analytical cost formulas side by side for one
//! configuration: the original per-step and claimed-total expressions,
//! the corrected per-step and cumulative forms, the remaining-steps
//! bound, the I/O lower bound, and the memory-regime flags.

use lu25d::model::{model_table, BoundComparison, CostModelParams};

fn main() -> lu25d::Result<()> {
    let params = CostModelParams::new(256, 8, 4, 16).with_rho(2.0); // p = 64

    println!("full formula table (n=256 v=8 c=4 p1=16):\n");
    for row in model_table(&params, 1.0) {
        println!("  {:32} {:>14.3}   {}", row.formula, row.value, row.annotation);
    }

    let cmp = BoundComparison::compute(&params, 1.0)?;
    println!("\ntotals side by side:");
    println!("  original (summed per-step)   {:>12.1}", cmp.original_total);
    println!("  corrected, flat p1 = p       {:>12.1}", cmp.corrected_total_flat);
    println!("  corrected, cube p1 = p^(2/3) {:>12.1}", cmp.corrected_total_cube);
    println!("  claimed total                {:>12.1}", cmp.lemma8_claim);
    println!(
        "  I/O lower bound              {:>12.1}",
        cmp.lower_bound_q.unwrap()
    );

    let f = cmp.dominance_flags;
    println!("\nmemory-regime flags at m = {}:", f.m_value);
    println!(
        "  per-step O(m) term exceeds n^2/p = {}: {}",
        f.n2_over_p, f.m_term_exceeds_n2_over_p
    );
    println!(
        "  n^2 = {} below p^(2/3)*sqrt(m) = {:.1}: {}",
        f.n2, f.first_term_threshold, f.m_term_exceeds_first_term
    );
    Ok(())
}
