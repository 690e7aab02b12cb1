//! Deterministic virtual message-passing layer.
//!
//! Point-to-point sends between virtual processors are grouped into
//! supersteps; collectives are built from counted point-to-point hops.
//! The resulting ledger is the single source of every measured cost:
//! the critical-path bandwidth of a run is the sum over supersteps of
//! the maximum per-processor words received.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridConfig, ProcId};

/// Algorithm phase a superstep is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    PanelReduceA10,
    PivotTournament,
    PanelFactor,
    PanelReduceA01,
    Trsm,
    Bcast,
    SchurUpdate,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::PanelReduceA10,
        Phase::PivotTournament,
        Phase::PanelFactor,
        Phase::PanelReduceA01,
        Phase::Trsm,
        Phase::Bcast,
        Phase::SchurUpdate,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Phase::PanelReduceA10 => "panel-reduce-A10",
            Phase::PivotTournament => "pivot-tournament",
            Phase::PanelFactor => "panel-factor",
            Phase::PanelReduceA01 => "panel-reduce-A01",
            Phase::Trsm => "trsm",
            Phase::Bcast => "bcast",
            Phase::SchurUpdate => "schur-update",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Word counters of one superstep. Units: matrix elements (1 word = 8 bytes).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperstepRecord {
    pub id: usize,
    pub phase: Phase,
    /// Outer iteration the superstep belongs to, if attributable.
    pub iteration: Option<usize>,
    pub sent: BTreeMap<ProcId, u64>,
    pub recv: BTreeMap<ProcId, u64>,
}

impl SuperstepRecord {
    pub fn total_sent(&self) -> u64 {
        self.sent.values().sum()
    }

    pub fn total_received(&self) -> u64 {
        self.recv.values().sum()
    }

    /// Critical words of this superstep: max over processors of words received.
    pub fn critical_words(&self) -> u64 {
        self.recv.values().copied().max().unwrap_or(0)
    }
}

/// Critical-path cost contribution of a single superstep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperstepCost {
    pub superstep: usize,
    pub critical_words: u64,
}

/// Finalized per-superstep communication record of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommLedger {
    supersteps: Vec<SuperstepRecord>,
}

impl CommLedger {
    pub fn supersteps(&self) -> &[SuperstepRecord] {
        &self.supersteps
    }

    /// Sum over supersteps (optionally filtered by phase) of the maximum
    /// per-processor words received.
    pub fn critical_path_cost(&self, phases: Option<&[Phase]>) -> u64 {
        self.supersteps
            .iter()
            .filter(|s| phases.map_or(true, |ps| ps.contains(&s.phase)))
            .map(|s| s.critical_words())
            .sum()
    }

    pub fn superstep_costs(&self) -> Vec<SuperstepCost> {
        self.supersteps
            .iter()
            .map(|s| SuperstepCost {
                superstep: s.id,
                critical_words: s.critical_words(),
            })
            .collect()
    }

    /// Verifies per-superstep conservation: total sent = total received.
    pub fn check_conservation(&self) -> Result<()> {
        for s in &self.supersteps {
            let sent = s.total_sent();
            let received = s.total_received();
            if sent != received {
                return Err(Error::ConservationViolation {
                    superstep: s.id,
                    sent,
                    received,
                });
            }
        }
        Ok(())
    }

    /// CSV export: superstep, phase, proc_pi, proc_pj, proc_pk, sent_words, recv_words.
    ///
    /// Processors with no traffic in a superstep are omitted.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "superstep,phase,proc_pi,proc_pj,proc_pk,sent_words,recv_words"
        )?;
        for s in &self.supersteps {
            let mut procs: Vec<ProcId> = s.sent.keys().chain(s.recv.keys()).copied().collect();
            procs.sort_unstable();
            procs.dedup();
            for id in procs {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    s.id,
                    s.phase,
                    id.pi,
                    id.pj,
                    id.pk,
                    s.sent.get(&id).copied().unwrap_or(0),
                    s.recv.get(&id).copied().unwrap_or(0)
                )?;
            }
        }
        Ok(())
    }
}

/// The live fabric an engine run drives. Single-threaded by design:
/// virtual processors are simulated by sequential execution inside
/// explicitly opened supersteps.
#[derive(Debug)]
pub struct CommFabric {
    grid: GridConfig,
    supersteps: Vec<SuperstepRecord>,
    open: bool,
}

impl CommFabric {
    pub fn new(grid: GridConfig) -> Self {
        Self {
            grid,
            supersteps: Vec::new(),
            open: false,
        }
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn begin_superstep(&mut self, phase: Phase, iteration: Option<usize>) -> Result<()> {
        if self.open {
            return Err(Error::SuperstepAlreadyOpen);
        }
        let id = self.supersteps.len();
        self.supersteps.push(SuperstepRecord {
            id,
            phase,
            iteration,
            sent: BTreeMap::new(),
            recv: BTreeMap::new(),
        });
        self.open = true;
        Ok(())
    }

    pub fn end_superstep(&mut self) -> Result<()> {
        if !self.open {
            return Err(Error::NoOpenSuperstep);
        }
        self.open = false;
        Ok(())
    }

    /// Counts `words` from `from` to `to` in the open superstep.
    /// Self-sends count zero by convention.
    pub fn send(&mut self, from: ProcId, to: ProcId, words: u64) -> Result<()> {
        if !self.grid.contains(from) {
            return Err(Error::InvalidProc(from));
        }
        if !self.grid.contains(to) {
            return Err(Error::InvalidProc(to));
        }
        let step = match (self.open, self.supersteps.last_mut()) {
            (true, Some(s)) => s,
            _ => return Err(Error::NoOpenSuperstep),
        };
        if from == to || words == 0 {
            return Ok(());
        }
        *step.sent.entry(from).or_insert(0) += words;
        *step.recv.entry(to).or_insert(0) += words;
        Ok(())
    }

    /// Binomial-tree reduction of `words_per_proc` words from every group
    /// member to `root`. ceil(log2 g) rounds; every hop is counted.
    pub fn reduce(&mut self, group: &[ProcId], root: ProcId, words_per_proc: u64) -> Result<()> {
        let order = tree_order(group, root)?;
        for (from, to) in halving_hops(&order) {
            self.send(from, to, words_per_proc)?;
        }
        Ok(())
    }

    /// Binomial-tree broadcast of `words` from `root` to every group
    /// member; the mirror of `reduce` (same tree, hops reversed).
    pub fn broadcast(&mut self, group: &[ProcId], root: ProcId, words: u64) -> Result<()> {
        let order = tree_order(group, root)?;
        let mut hops = halving_hops(&order);
        hops.reverse();
        for (child, parent) in hops {
            self.send(parent, child, words)?;
        }
        Ok(())
    }

    /// Closes the fabric, verifying conservation.
    pub fn finalize(self) -> Result<CommLedger> {
        let ledger = CommLedger {
            supersteps: self.supersteps,
        };
        ledger.check_conservation()?;
        Ok(ledger)
    }
}

/// Deduplicated group with root first, remaining members in sorted order.
fn tree_order(group: &[ProcId], root: ProcId) -> Result<Vec<ProcId>> {
    let mut members: Vec<ProcId> = group.to_vec();
    members.sort_unstable();
    members.dedup();
    if !members.contains(&root) {
        return Err(Error::RootNotInGroup(root));
    }
    members.retain(|&m| m != root);
    let mut order = Vec::with_capacity(members.len() + 1);
    order.push(root);
    order.extend(members);
    Ok(order)
}

/// Hops of a binomial tree over `order` (root at index 0), reduce
/// direction: in each round the upper half sends to the lower half.
fn halving_hops(order: &[ProcId]) -> Vec<(ProcId, ProcId)> {
    let mut hops = Vec::new();
    let mut m = order.len();
    while m > 1 {
        let half = m.div_ceil(2);
        for i in half..m {
            hops.push((order[i], order[i - half]));
        }
        m = half;
    }
    hops
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_grid(k: usize) -> GridConfig {
        GridConfig::new(k, 1, 1).unwrap()
    }

    fn pid(i: usize) -> ProcId {
        ProcId { pi: i, pj: 0, pk: 0 }
    }

    fn procs(k: usize) -> Vec<ProcId> {
        (0..k).map(pid).collect()
    }

    #[test]
    fn send_counts_both_sides() {
        let mut f = CommFabric::new(flat_grid(2));
        f.begin_superstep(Phase::Bcast, None).unwrap();
        f.send(pid(0), pid(1), 100).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        let s = &ledger.supersteps()[0];
        assert_eq!(s.sent[&pid(0)], 100);
        assert_eq!(s.recv[&pid(1)], 100);
    }

    #[test]
    fn self_send_counts_zero() {
        let mut f = CommFabric::new(flat_grid(2));
        f.begin_superstep(Phase::Bcast, None).unwrap();
        f.send(pid(0), pid(0), 100).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        assert_eq!(ledger.critical_path_cost(None), 0);
    }

    #[test]
    fn sends_accumulate() {
        let mut f = CommFabric::new(flat_grid(3));
        f.begin_superstep(Phase::Bcast, None).unwrap();
        f.send(pid(0), pid(2), 50).unwrap();
        f.send(pid(1), pid(2), 50).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        assert_eq!(ledger.supersteps()[0].recv[&pid(2)], 100);
    }

    #[test]
    fn send_outside_superstep_rejected() {
        let mut f = CommFabric::new(flat_grid(2));
        assert!(matches!(
            f.send(pid(0), pid(1), 1),
            Err(Error::NoOpenSuperstep)
        ));
    }

    #[test]
    fn invalid_proc_rejected() {
        let mut f = CommFabric::new(flat_grid(2));
        f.begin_superstep(Phase::Bcast, None).unwrap();
        assert!(f.send(pid(0), pid(5), 1).is_err());
    }

    #[test]
    fn reduce_group_sizes() {
        // Group of 1: nothing moves.
        let mut f = CommFabric::new(flat_grid(8));
        f.begin_superstep(Phase::PanelReduceA10, None).unwrap();
        f.reduce(&procs(1), pid(0), 10).unwrap();
        f.end_superstep().unwrap();
        assert_eq!(f.finalize().unwrap().critical_path_cost(None), 0);

        // Group of 2: exactly W received by root.
        let mut f = CommFabric::new(flat_grid(8));
        f.begin_superstep(Phase::PanelReduceA10, None).unwrap();
        f.reduce(&procs(2), pid(0), 10).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        assert_eq!(ledger.supersteps()[0].recv[&pid(0)], 10);

        // Group of 8: root receives 3W over 3 rounds.
        let mut f = CommFabric::new(flat_grid(8));
        f.begin_superstep(Phase::PanelReduceA10, None).unwrap();
        f.reduce(&procs(8), pid(0), 7).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        assert_eq!(ledger.supersteps()[0].recv[&pid(0)], 21);
        // Total moved is (g-1) * W.
        assert_eq!(ledger.supersteps()[0].total_received(), 7 * 7);
    }

    #[test]
    fn reduce_root_not_in_group() {
        let mut f = CommFabric::new(flat_grid(8));
        f.begin_superstep(Phase::PanelReduceA10, None).unwrap();
        assert!(f.reduce(&procs(2), pid(5), 10).is_err());
    }

    #[test]
    fn broadcast_group_sizes() {
        let mut f = CommFabric::new(flat_grid(4));
        f.begin_superstep(Phase::Bcast, None).unwrap();
        f.broadcast(&procs(1), pid(0), 9).unwrap();
        f.end_superstep().unwrap();
        assert_eq!(f.finalize().unwrap().critical_path_cost(None), 0);

        let mut f = CommFabric::new(flat_grid(4));
        f.begin_superstep(Phase::Bcast, None).unwrap();
        f.broadcast(&procs(2), pid(0), 9).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        assert_eq!(ledger.supersteps()[0].recv[&pid(1)], 9);

        // Group of 4: every non-root receives exactly W; critical = W.
        let mut f = CommFabric::new(flat_grid(4));
        f.begin_superstep(Phase::Bcast, None).unwrap();
        f.broadcast(&procs(4), pid(0), 9).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        let s = &ledger.supersteps()[0];
        for i in 1..4 {
            assert_eq!(s.recv[&pid(i)], 9);
        }
        assert_eq!(s.critical_words(), 9);
    }

    #[test]
    fn critical_path_cost_examples() {
        let g = flat_grid(3);

        let f = CommFabric::new(g);
        assert_eq!(f.finalize().unwrap().critical_path_cost(None), 0);

        let mut f = CommFabric::new(g);
        f.begin_superstep(Phase::Trsm, None).unwrap();
        f.send(pid(1), pid(0), 10).unwrap();
        f.send(pid(0), pid(2), 4).unwrap();
        f.end_superstep().unwrap();
        f.begin_superstep(Phase::SchurUpdate, None).unwrap();
        f.send(pid(1), pid(2), 7).unwrap();
        f.end_superstep().unwrap();
        let ledger = f.finalize().unwrap();
        assert_eq!(ledger.critical_path_cost(None), 17);
        assert_eq!(ledger.critical_path_cost(Some(&[Phase::Trsm])), 10);
        ledger.check_conservation().unwrap();
    }
}
