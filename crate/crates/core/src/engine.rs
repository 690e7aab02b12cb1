//! 2.5D LU factorization with tournament pivoting over the virtual fabric.
//!
//! Per outer iteration t the engine reduces the layered partial sums of
//! the A10 column panel onto a 1D layout over the active processors,
//! selects v pivot rows by a tournament, factors the panel redundantly,
//! mirrors the reduction for the A01 row panel, applies the TRSM, and
//! performs a layer-partitioned Schur update. Every hop is counted in a
//! phase-labeled ledger; the numerical factors are computed alongside.
//!
//! Layout model: lower-and-diagonal blocks are 2D block-cyclic on layer 0
//! (pi = bi mod px, pj = bj mod py). Upper-triangle blocks are stored
//! column-transposed (pi = bj mod px, pj = bi mod py) so that every row
//! panel lives in the processor column that is active when it is factored.
//! Layers 1..c-1 hold partial-sum accumulators under the same maps.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabric::{CommFabric, CommLedger, Phase};
use crate::grid::{GridConfig, ProcId};
use crate::matrix::{
    split_factors, swap_rows, DenseMatrix, LUFactors, SINGULARITY_THRESHOLD,
};

/// Collective algorithm used for the cross-layer panel reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Collective {
    /// Reduce-scatter across layers followed by a gather onto the 1D
    /// panel layout; critical path stays at the per-processor share.
    #[default]
    Rsag,
    /// Binomial reduce-to-root per processor row, then redistribution.
    /// Concentrates ceil(log2 c) times the share at the roots.
    Binomial,
}

impl Collective {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rsag" => Some(Collective::Rsag),
            "binomial" => Some(Collective::Binomial),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Collective::Rsag => "rsag",
            Collective::Binomial => "binomial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub n: usize,
    pub v: usize,
    pub grid: GridConfig,
    pub seed: u64,
    pub collective: Collective,
}

impl EngineConfig {
    pub fn new(n: usize, v: usize, grid: GridConfig, seed: u64) -> Self {
        Self {
            n,
            v,
            grid,
            seed,
            collective: Collective::default(),
        }
    }

    /// Largest v <= 8 satisfying the divisibility requirements, if any.
    pub fn default_panel_width(n: usize, grid: GridConfig) -> Option<usize> {
        (1..=8.min(n))
            .rev()
            .find(|&v| n % v == 0 && n % (v * grid.px()) == 0 && n % (v * grid.py()) == 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.v == 0 {
            return Err(Error::InvalidConfig("n and v must be positive".into()));
        }
        if self.n % self.v != 0 {
            return Err(Error::InvalidConfig(format!(
                "v={} must divide n={}",
                self.v, self.n
            )));
        }
        if self.n % (self.v * self.grid.px()) != 0 || self.n % (self.v * self.grid.py()) != 0 {
            return Err(Error::InvalidConfig(format!(
                "n={} must be divisible by v*px={} and v*py={} for clean block ownership",
                self.n,
                self.v * self.grid.px(),
                self.v * self.grid.py()
            )));
        }
        Ok(())
    }
}

/// Everything a finished engine run produces.
#[derive(Debug, Clone)]
pub struct FactorizationRun {
    pub factors: LUFactors,
    pub ledger: CommLedger,
    /// How many selected pivot rows each processor held at selection time.
    pub pivot_owner_counts: BTreeMap<ProcId, u64>,
    pub n: usize,
    pub v: usize,
    pub grid: GridConfig,
}

/// Critical-path words of one (iteration, phase) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCost {
    pub iteration: usize,
    pub phase: Phase,
    pub words: u64,
}

/// Projects the ledger onto a per-iteration, per-phase table whose sum
/// equals the total critical-path cost.
pub fn phase_costs(run: &FactorizationRun) -> Vec<PhaseCost> {
    let mut table: BTreeMap<(usize, Phase), u64> = BTreeMap::new();
    for s in run.ledger.supersteps() {
        let t = s.iteration.unwrap_or(0);
        *table.entry((t, s.phase)).or_insert(0) += s.critical_words();
    }
    table
        .into_iter()
        .map(|((iteration, phase), words)| PhaseCost {
            iteration,
            phase,
            words,
        })
        .collect()
}

/// One candidate pivot row: its current global position, its original
/// row index (the tie-break key), and its v panel values.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub pos: usize,
    pub orig: usize,
    pub values: Vec<f64>,
}

/// A tournament participant and the candidate rows it holds locally.
#[derive(Debug, Clone)]
pub struct PanelCandidates {
    pub proc: ProcId,
    pub rows: Vec<PanelRow>,
}

/// Picks up to v pivot rows from `rows` by partial-pivoted elimination
/// on a scratch copy: the pivot for step j is the maximum-magnitude
/// entry of (eliminated) column j, ties to the smallest original row
/// index. Winners keep their original, uneliminated values.
pub fn select_pivot_rows(rows: &[PanelRow], v: usize) -> Vec<PanelRow> {
    let mut work: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
    let mut avail: Vec<usize> = (0..rows.len()).collect();
    let steps = v.min(rows.len());
    let mut selected = Vec::with_capacity(steps);
    for j in 0..steps {
        let mut best_slot = 0;
        for slot in 1..avail.len() {
            let (cand, best) = (avail[slot], avail[best_slot]);
            let (cm, bm) = (work[cand][j].abs(), work[best][j].abs());
            if cm > bm || (cm == bm && rows[cand].orig < rows[best].orig) {
                best_slot = slot;
            }
        }
        let winner = avail.remove(best_slot);
        let piv = work[winner][j];
        if piv.abs() >= SINGULARITY_THRESHOLD {
            for &i in &avail {
                let l = work[i][j] / piv;
                for k in j + 1..v {
                    work[i][k] -= l * work[winner][k];
                }
            }
        }
        selected.push(rows[winner].clone());
    }
    selected
}

/// Tournament pivot selection over the participants' candidate rows.
///
/// Binary reduction tree over participants in rank order; each merge
/// ships one side's candidate block (rows * v values plus rows indices)
/// and re-selects from the stacked candidates. Requires an open
/// superstep on the fabric; every hop is counted.
pub fn tournament_pivot(
    fabric: &mut CommFabric,
    participants: &[PanelCandidates],
    v: usize,
) -> Result<Vec<PanelRow>> {
    assert!(!participants.is_empty(), "tournament needs a participant");
    let mut sets: Vec<(ProcId, Vec<PanelRow>)> = participants
        .iter()
        .map(|p| (p.proc, select_pivot_rows(&p.rows, v)))
        .collect();
    let mut m = sets.len();
    while m > 1 {
        let half = m.div_ceil(2);
        for i in half..m {
            let (lo, hi) = sets.split_at_mut(i);
            let dst = &mut lo[i - half];
            let src = &hi[0];
            let words = (src.1.len() * v + src.1.len()) as u64;
            fabric.send(src.0, dst.0, words)?;
            let mut stacked = dst.1.clone();
            stacked.extend(src.1.iter().cloned());
            dst.1 = select_pivot_rows(&stacked, v);
        }
        m = half;
    }
    Ok(sets.swap_remove(0).1)
}

fn ceil_log2(x: usize) -> u32 {
    debug_assert!(x >= 1);
    usize::BITS - (x - 1).leading_zeros()
}

/// Splits v panel columns into c contiguous chunks differing by at most one.
pub(crate) fn chunk_ranges(v: usize, c: usize) -> Vec<Range<usize>> {
    let base = v / c;
    let extra = v % c;
    let mut out = Vec::with_capacity(c);
    let mut start = 0;
    for k in 0..c {
        let len = base + usize::from(k < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Resident owner of block (bi, bj) on layer pk. Lower and diagonal
/// blocks are row-cyclic; upper blocks are column-transposed so future
/// row panels already live in their active processor column.
fn resident_owner(g: GridConfig, bi: usize, bj: usize, pk: usize) -> ProcId {
    if bi >= bj {
        ProcId {
            pi: bi % g.px(),
            pj: bj % g.py(),
            pk,
        }
    } else {
        ProcId {
            pi: bj % g.px(),
            pj: bi % g.py(),
            pk,
        }
    }
}

/// Active-set processor holding 1D slice `rank` at iteration t0.
fn proc_of_rank(g: GridConfig, t0: usize, rank: usize) -> ProcId {
    ProcId {
        pi: rank % g.px(),
        pj: t0 % g.py(),
        pk: rank / g.px(),
    }
}

/// 1D panel-layout rank of a region block. The +1 shift keeps the 1D
/// layout disjoint from the resident row-cyclic map, so the
/// redistribution moves the per-processor share the cost model counts.
fn one_d_rank(g: GridConfig, b: usize) -> usize {
    (b + 1) % (g.px() * g.pz())
}

fn one_d_owner(g: GridConfig, t0: usize, b: usize) -> ProcId {
    proc_of_rank(g, t0, one_d_rank(g, b))
}

/// Reduces a panel region's layered partial sums and lands it on the 1D
/// layout over the active set. `blocks` are the region's block indices;
/// the resident pi of block b is b mod px for both panels (A01 via the
/// transposed upper map).
fn panel_reduce(
    fabric: &mut CommFabric,
    cfg: &EngineConfig,
    phase: Phase,
    t0: usize,
    blocks: &[usize],
) -> Result<()> {
    let g = cfg.grid;
    let c = g.pz();
    let colj = t0 % g.py();
    let words = (cfg.v * cfg.v) as u64;
    let proc_at = |pi: usize, pk: usize| ProcId { pi, pj: colj, pk };

    // Which layer reduces each block: round-robin within each pi group.
    let mut per_pi_count = vec![0usize; g.px()];
    let reducer_layer: Vec<usize> = blocks
        .iter()
        .map(|&b| {
            let pi = b % g.px();
            let k = per_pi_count[pi] % c;
            per_pi_count[pi] += 1;
            k
        })
        .collect();

    if c > 1 {
        match cfg.collective {
            Collective::Rsag => {
                // Scatter-reduce: every other layer ships its partial of a
                // block to that block's reducer layer.
                fabric.begin_superstep(phase, Some(t0))?;
                for (&b, &kb) in blocks.iter().zip(&reducer_layer) {
                    let pi = b % g.px();
                    for k in 0..c {
                        if k != kb {
                            fabric.send(proc_at(pi, k), proc_at(pi, kb), words)?;
                        }
                    }
                }
                fabric.end_superstep()?;
                // Gather the reduced blocks onto the 1D layout.
                fabric.begin_superstep(phase, Some(t0))?;
                for (&b, &kb) in blocks.iter().zip(&reducer_layer) {
                    let pi = b % g.px();
                    fabric.send(proc_at(pi, kb), one_d_owner(g, t0, b), words)?;
                }
                fabric.end_superstep()?;
            }
            Collective::Binomial => {
                fabric.begin_superstep(phase, Some(t0))?;
                for pi in 0..g.px() {
                    let cnt = per_pi_count[pi] as u64;
                    if cnt == 0 {
                        continue;
                    }
                    let group: Vec<ProcId> = (0..c).map(|k| proc_at(pi, k)).collect();
                    fabric.reduce(&group, proc_at(pi, 0), cnt * words)?;
                }
                fabric.end_superstep()?;
                fabric.begin_superstep(phase, Some(t0))?;
                for &b in blocks {
                    fabric.send(proc_at(b % g.px(), 0), one_d_owner(g, t0, b), words)?;
                }
                fabric.end_superstep()?;
            }
        }
    } else {
        fabric.begin_superstep(phase, Some(t0))?;
        for &b in blocks {
            fabric.send(proc_at(b % g.px(), 0), one_d_owner(g, t0, b), words)?;
        }
        fabric.end_superstep()?;
    }
    Ok(())
}

/// Counts the lazy pivot-row exchange between the resident owners of
/// block rows b1 and b2 across every column block.
fn count_swap_traffic(
    fabric: &mut CommFabric,
    g: GridConfig,
    nb: usize,
    v: usize,
    b1: usize,
    b2: usize,
) -> Result<()> {
    if b1 == b2 {
        return Ok(());
    }
    for bj in 0..nb {
        let o1 = resident_owner(g, b1, bj, 0);
        let o2 = resident_owner(g, b2, bj, 0);
        if o1 != o2 {
            fabric.send(o1, o2, v as u64)?;
            fabric.send(o2, o1, v as u64)?;
        }
    }
    Ok(())
}

/// Fiber broadcasts of the factored panel chunks to the trailing-block
/// owners of every layer.
fn schur_comm(fabric: &mut CommFabric, g: GridConfig, nb: usize, v: usize, t0: usize) -> Result<()> {
    let m0 = t0 + 1;
    if m0 >= nb {
        return Ok(());
    }
    for (k, range) in chunk_ranges(v, g.pz()).into_iter().enumerate() {
        if range.is_empty() {
            continue;
        }
        let chunk_words = (v * range.len()) as u64;
        // L10 chunks, one broadcast per trailing block row.
        for bi in m0..nb {
            let root = one_d_owner(g, t0, bi);
            let mut group: BTreeSet<ProcId> = BTreeSet::new();
            group.insert(root);
            for bj in m0..nb {
                group.insert(resident_owner(g, bi, bj, k));
            }
            let group: Vec<ProcId> = group.into_iter().collect();
            fabric.broadcast(&group, root, chunk_words)?;
        }
        // U01 chunks, one broadcast per trailing block column.
        for bj in m0..nb {
            let root = one_d_owner(g, t0, bj);
            let mut group: BTreeSet<ProcId> = BTreeSet::new();
            group.insert(root);
            for bi in m0..nb {
                group.insert(resident_owner(g, bi, bj, k));
            }
            let group: Vec<ProcId> = group.into_iter().collect();
            fabric.broadcast(&group, root, chunk_words)?;
        }
    }
    Ok(())
}

/// Runs the factorization, producing numerical factors and the ledger.
pub fn run(cfg: &EngineConfig, a: &DenseMatrix) -> Result<FactorizationRun> {
    cfg.validate()?;
    if a.rows() != cfg.n || a.cols() != cfg.n {
        return Err(Error::DimensionMismatch(format!(
            "engine: expected {0}x{0} input, got {1}x{2}",
            cfg.n,
            a.rows(),
            a.cols()
        )));
    }
    let (n, v, g) = (cfg.n, cfg.v, cfg.grid);
    let nb = n / v;
    let slots = g.px() * g.pz();

    let mut w = a.clone();
    let mut orig: Vec<usize> = (0..n).collect();
    let mut fabric = CommFabric::new(g);
    let mut pivot_owner_counts: BTreeMap<ProcId, u64> = BTreeMap::new();

    for t0 in 0..nb {
        let col0 = t0 * v;

        // Step 1: reduce A10 partial sums and land the column panel on
        // its 1D factorization layout.
        let a10_blocks: Vec<usize> = (t0..nb).collect();
        panel_reduce(&mut fabric, cfg, Phase::PanelReduceA10, t0, &a10_blocks)?;

        // Tournament pivot selection over the 1D slice holders.
        let mut slices: Vec<Vec<usize>> = vec![Vec::new(); slots];
        for &b in &a10_blocks {
            slices[one_d_rank(g, b)].push(b);
        }
        let participants: Vec<PanelCandidates> = slices
            .iter()
            .enumerate()
            .filter(|(_, blocks)| !blocks.is_empty())
            .map(|(rank, blocks)| PanelCandidates {
                proc: proc_of_rank(g, t0, rank),
                rows: blocks
                    .iter()
                    .flat_map(|&b| b * v..(b + 1) * v)
                    .map(|r| PanelRow {
                        pos: r,
                        orig: orig[r],
                        values: w.row(r)[col0..col0 + v].to_vec(),
                    })
                    .collect(),
            })
            .collect();
        fabric.begin_superstep(Phase::PivotTournament, Some(t0))?;
        let winners = tournament_pivot(&mut fabric, &participants, v)?;
        fabric.end_superstep()?;
        debug_assert_eq!(winners.len(), v);

        for row in &winners {
            let owner = one_d_owner(g, t0, row.pos / v);
            *pivot_owner_counts.entry(owner).or_insert(0) += 1;
        }

        // Winners (values + indices) go back to every participant; the
        // panel elimination itself is then redundant and communication-free.
        let participant_procs: Vec<ProcId> = participants.iter().map(|p| p.proc).collect();
        let root = participant_procs[0];
        fabric.begin_superstep(Phase::PanelFactor, Some(t0))?;
        fabric.broadcast(&participant_procs, root, (v * v + v) as u64)?;
        fabric.end_superstep()?;

        // Lazy pivot-row swaps on the resident copy.
        let mut cur_pos: Vec<usize> = winners.iter().map(|r| r.pos).collect();
        fabric.begin_superstep(Phase::Bcast, Some(t0))?;
        for j in 0..v {
            let dst = col0 + j;
            let src = cur_pos[j];
            if src != dst {
                count_swap_traffic(&mut fabric, g, nb, v, dst / v, src / v)?;
                swap_rows(&mut w, dst, src);
                orig.swap(dst, src);
                for p in cur_pos.iter_mut().skip(j + 1) {
                    if *p == dst {
                        *p = src;
                    }
                }
            }
        }
        fabric.end_superstep()?;

        // Panel elimination in pivot order.
        for j in 0..v {
            let cpos = col0 + j;
            let piv = w.get(cpos, cpos);
            if piv.abs() < SINGULARITY_THRESHOLD {
                return Err(Error::SingularPanel {
                    iteration: t0,
                    column: cpos,
                });
            }
            for i in cpos + 1..n {
                let l = w.get(i, cpos) / piv;
                w.set(i, cpos, l);
                for k in cpos + 1..col0 + v {
                    let x = w.get(i, k) - l * w.get(cpos, k);
                    w.set(i, k, x);
                }
            }
        }

        // Step 5: reduce A01 partial sums onto its 1D layout.
        let a01_blocks: Vec<usize> = (t0 + 1..nb).collect();
        if !a01_blocks.is_empty() {
            panel_reduce(&mut fabric, cfg, Phase::PanelReduceA01, t0, &a01_blocks)?;
        }

        // TRSM: the A01 slice holders need the factored pivot block.
        fabric.begin_superstep(Phase::Trsm, Some(t0))?;
        if !a01_blocks.is_empty() {
            let mut group: BTreeSet<ProcId> = BTreeSet::new();
            group.insert(root);
            for &b in &a01_blocks {
                group.insert(one_d_owner(g, t0, b));
            }
            let group: Vec<ProcId> = group.into_iter().collect();
            fabric.broadcast(&group, root, (v * v) as u64)?;
        }
        fabric.end_superstep()?;
        for j in 0..v {
            for i in j + 1..v {
                let l = w.get(col0 + i, col0 + j);
                for jj in col0 + v..n {
                    let x = w.get(col0 + i, jj) - l * w.get(col0 + j, jj);
                    w.set(col0 + i, jj, x);
                }
            }
        }

        // Layer-partitioned Schur update.
        fabric.begin_superstep(Phase::SchurUpdate, Some(t0))?;
        schur_comm(&mut fabric, g, nb, v, t0)?;
        fabric.end_superstep()?;
        for range in chunk_ranges(v, g.pz()) {
            for kk in range {
                let pr = col0 + kk;
                for i in col0 + v..n {
                    let l = w.get(i, pr);
                    for jj in col0 + v..n {
                        let x = w.get(i, jj) - l * w.get(pr, jj);
                        w.set(i, jj, x);
                    }
                }
            }
        }
    }

    let ledger = fabric.finalize()?;
    Ok(FactorizationRun {
        factors: split_factors(&w, orig),
        ledger,
        pivot_owner_counts,
        n,
        v,
        grid: g,
    })
}

/// Verifies that only active-set processors communicate in the panel
/// phases of every iteration.
pub fn check_active_set_confinement(run: &FactorizationRun) -> std::result::Result<(), String> {
    const CONFINED: [Phase; 5] = [
        Phase::PanelReduceA10,
        Phase::PivotTournament,
        Phase::PanelFactor,
        Phase::PanelReduceA01,
        Phase::Trsm,
    ];
    for s in run.ledger.supersteps() {
        if !CONFINED.contains(&s.phase) {
            continue;
        }
        let t = s
            .iteration
            .ok_or_else(|| format!("superstep {} has no iteration label", s.id))?;
        for id in s.sent.keys().chain(s.recv.keys()) {
            if !run.grid.is_panel_active(*id, t) {
                return Err(format!(
                    "superstep {} ({}, t={}): processor {} outside the active set has traffic",
                    s.id, s.phase, t, id
                ));
            }
        }
    }
    Ok(())
}

/// Checks each iteration's panel-reduce phases against the corrected
/// per-step model: measured in [0.5*E2, (2*ceil(log2 c)+1)*E2 +
/// 2*v^2*ceil(log2(px*pz))] with E2 = (n - t*v)*v / sqrt(p1). Applies to
/// square grids with more than one processor per layer.
pub fn check_reduce_band(run: &FactorizationRun) -> std::result::Result<(), String> {
    let g = run.grid;
    if g.px() != g.py() || g.p1() == 1 {
        return Ok(());
    }
    let (n, v) = (run.n, run.v);
    let nb = n / v;
    let sqrt_p1 = g.px() as f64;
    let slack = 2.0 * (v * v) as f64 * f64::from(ceil_log2(g.px() * g.pz()));
    let factor = 2.0 * f64::from(ceil_log2(g.pz())) + 1.0;

    let mut by_cell: BTreeMap<(usize, Phase), u64> = BTreeMap::new();
    for pc in phase_costs(run) {
        by_cell.insert((pc.iteration, pc.phase), pc.words);
    }
    for t0 in 0..nb {
        let t = t0 + 1;
        let e2 = (n - t * v) as f64 * v as f64 / sqrt_p1;
        for phase in [Phase::PanelReduceA10, Phase::PanelReduceA01] {
            let measured = by_cell.get(&(t0, phase)).copied().unwrap_or(0) as f64;
            let lo = 0.5 * e2;
            let hi = factor * e2 + slack;
            if measured < lo || measured > hi {
                return Err(format!(
                    "t={t} {phase}: measured {measured} outside [{lo}, {hi}] (E2={e2})"
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{blocked_lu_oracle, random_matrix, residual_norm};

    fn grid(px: usize, py: usize, pz: usize) -> GridConfig {
        GridConfig::new(px, py, pz).unwrap()
    }

    #[test]
    fn identity_on_one_proc_moves_nothing() {
        let a = DenseMatrix::identity(8).unwrap();
        let cfg = EngineConfig::new(8, 2, grid(1, 1, 1), 0);
        let run = run(&cfg, &a).unwrap();
        assert_eq!(run.ledger.critical_path_cost(None), 0);
        assert_eq!(run.factors.l, DenseMatrix::identity(8).unwrap());
        assert_eq!(run.factors.u, DenseMatrix::identity(8).unwrap());
    }

    #[test]
    fn matches_oracle_on_single_proc() {
        for (n, v) in [(32, 2), (32, 4), (64, 4)] {
            let a = random_matrix(n, 11).unwrap();
            let cfg = EngineConfig::new(n, v, grid(1, 1, 1), 0);
            let engine = run(&cfg, &a).unwrap();
            let oracle = blocked_lu_oracle(&a, v).unwrap();
            assert_eq!(engine.factors.perm, oracle.perm, "pivot sequence n={n} v={v}");
            assert_eq!(engine.factors.l, oracle.l, "L n={n} v={v}");
            assert_eq!(engine.factors.u, oracle.u, "U n={n} v={v}");
        }
    }

    #[test]
    fn residual_small_on_distributed_grids() {
        for g in [grid(2, 2, 1), grid(2, 2, 2), grid(4, 4, 1)] {
            let a = random_matrix(64, 3).unwrap();
            let cfg = EngineConfig::new(64, 4, g, 3);
            let r = run(&cfg, &a).unwrap();
            let res = residual_norm(&a, &r.factors).unwrap();
            assert!(res <= 1e-10, "residual {res} on {g}");
        }
    }

    #[test]
    fn pivot_counts_sum_to_n() {
        let a = random_matrix(32, 3).unwrap();
        let cfg = EngineConfig::new(32, 4, grid(2, 2, 1), 3);
        let r = run(&cfg, &a).unwrap();
        let total: u64 = r.pivot_owner_counts.values().sum();
        assert_eq!(total, 32);
    }

    #[test]
    fn deterministic_runs() {
        let a = random_matrix(32, 9).unwrap();
        let cfg = EngineConfig::new(32, 4, grid(2, 2, 2), 9);
        let r1 = run(&cfg, &a).unwrap();
        let r2 = run(&cfg, &a).unwrap();
        assert_eq!(r1.ledger, r2.ledger);
        assert_eq!(r1.factors, r2.factors);
        assert_eq!(r1.pivot_owner_counts, r2.pivot_owner_counts);
    }

    #[test]
    fn phase_costs_partition_total() {
        let a = random_matrix(32, 4).unwrap();
        let cfg = EngineConfig::new(32, 4, grid(2, 2, 2), 4);
        let r = run(&cfg, &a).unwrap();
        let total: u64 = phase_costs(&r).iter().map(|c| c.words).sum();
        assert_eq!(total, r.ledger.critical_path_cost(None));
    }

    #[test]
    fn panel_reduce_nonincreasing_in_t() {
        let a = random_matrix(64, 6).unwrap();
        let cfg = EngineConfig::new(64, 4, grid(2, 2, 2), 6);
        let r = run(&cfg, &a).unwrap();
        let mut prev = u64::MAX;
        for pc in phase_costs(&r) {
            if pc.phase == Phase::PanelReduceA10 {
                assert!(pc.words <= prev, "t={} rose to {}", pc.iteration, pc.words);
                prev = pc.words;
            }
        }
    }

    #[test]
    fn reduce_band_holds() {
        for g in [grid(2, 2, 1), grid(2, 2, 2), grid(3, 3, 3), grid(4, 4, 2)] {
            if 64 % (4 * g.px()) != 0 {
                continue;
            }
            let a = random_matrix(64, 2).unwrap();
            let cfg = EngineConfig::new(64, 4, g, 2);
            let r = run(&cfg, &a).unwrap();
            check_reduce_band(&r).unwrap_or_else(|e| panic!("{g}: {e}"));
        }
    }

    #[test]
    fn confinement_holds() {
        let a = random_matrix(64, 2).unwrap();
        let cfg = EngineConfig::new(64, 4, grid(2, 2, 2), 2);
        let r = run(&cfg, &a).unwrap();
        check_active_set_confinement(&r).unwrap();
    }

    #[test]
    fn tournament_two_candidates() {
        // v=1, |3| vs |-5|: the row holding -5 wins.
        let g = grid(2, 1, 1);
        let mut fabric = CommFabric::new(g);
        fabric.begin_superstep(Phase::PivotTournament, None).unwrap();
        let parts = vec![
            PanelCandidates {
                proc: ProcId { pi: 0, pj: 0, pk: 0 },
                rows: vec![PanelRow { pos: 0, orig: 0, values: vec![3.0] }],
            },
            PanelCandidates {
                proc: ProcId { pi: 1, pj: 0, pk: 0 },
                rows: vec![PanelRow { pos: 1, orig: 1, values: vec![-5.0] }],
            },
        ];
        let winners = tournament_pivot(&mut fabric, &parts, 1).unwrap();
        fabric.end_superstep().unwrap();
        assert_eq!(winners.len(), 1);
        assert_eq!(winners[0].orig, 1);
    }

    #[test]
    fn tournament_four_candidates_finds_global_max() {
        // v=1, four participants, winner must be the max-magnitude value,
        // reached in exactly 2 tree rounds.
        let g = grid(4, 1, 1);
        let vals = [0.25, -0.9, 0.4, 0.7];
        let mut fabric = CommFabric::new(g);
        fabric.begin_superstep(Phase::PivotTournament, None).unwrap();
        let parts: Vec<PanelCandidates> = vals
            .iter()
            .enumerate()
            .map(|(i, &x)| PanelCandidates {
                proc: ProcId { pi: i, pj: 0, pk: 0 },
                rows: vec![PanelRow { pos: i, orig: i, values: vec![x] }],
            })
            .collect();
        let winners = tournament_pivot(&mut fabric, &parts, 1).unwrap();
        fabric.end_superstep().unwrap();
        // Brute force.
        let best = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(winners[0].orig, best);
    }

    #[test]
    fn tournament_single_participant_no_traffic() {
        let g = grid(1, 1, 1);
        let mut fabric = CommFabric::new(g);
        fabric.begin_superstep(Phase::PivotTournament, None).unwrap();
        let parts = vec![PanelCandidates {
            proc: ProcId { pi: 0, pj: 0, pk: 0 },
            rows: vec![
                PanelRow { pos: 0, orig: 0, values: vec![0.1, 0.2] },
                PanelRow { pos: 1, orig: 1, values: vec![0.8, 0.3] },
                PanelRow { pos: 2, orig: 2, values: vec![-0.4, 0.9] },
            ],
        }];
        let winners = tournament_pivot(&mut fabric, &parts, 2).unwrap();
        fabric.end_superstep().unwrap();
        assert_eq!(winners[0].orig, 1);
        assert_eq!(winners.len(), 2);
        let ledger = fabric.finalize().unwrap();
        assert_eq!(ledger.critical_path_cost(None), 0);
    }

    #[test]
    fn chunk_ranges_cover_v() {
        for (v, c) in [(4, 1), (4, 2), (4, 3), (4, 4), (8, 3), (2, 4)] {
            let ranges = chunk_ranges(v, c);
            assert_eq!(ranges.len(), c);
            let total: usize = ranges.iter().map(|r| r.len()).sum();
            assert_eq!(total, v);
            let max = ranges.iter().map(|r| r.len()).max().unwrap();
            let min = ranges.iter().map(|r| r.len()).min().unwrap();
            assert!(max - min <= 1);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = EngineConfig::new(10, 3, grid(1, 1, 1), 0);
        assert!(cfg.validate().is_err());
        let cfg = EngineConfig::new(12, 4, grid(2, 2, 1), 0);
        // 12 % (4*2) != 0
        assert!(cfg.validate().is_err());
    }
}
