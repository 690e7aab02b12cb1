//! Processor grids, rank mappings, block ownership under a 2.5D
//! block-cyclic layout, and the active-processor set for panel phases.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A px x py x pz processor grid. pz is the layer count c; p1 = px * py.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridConfig {
    px: usize,
    py: usize,
    pz: usize,
}

/// The three grid families under study: the two shapes found in the
/// reference code base and the communication-optimal cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridPreset {
    /// sqrt(p) x sqrt(p) x 1
    SquareFlat,
    /// sqrt(p/2) x sqrt(p/2) x 2
    SquareTwoLayer,
    /// p^(1/3) x p^(1/3) x p^(1/3)
    Cube,
}

/// One virtual processor, addressed by its grid coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProcId {
    pub pi: usize,
    pub pj: usize,
    pub pk: usize,
}

impl fmt::Display for ProcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.pi, self.pj, self.pk)
    }
}

/// Coordinates of one v x v block of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockCoord {
    pub bi: usize,
    pub bj: usize,
}

fn exact_root(p: usize, k: u32) -> Option<usize> {
    let mut r = (p as f64).powf(1.0 / k as f64).round() as usize;
    // Guard against float rounding on either side.
    while r.pow(k) > p && r > 0 {
        r -= 1;
    }
    while (r + 1).pow(k) <= p {
        r += 1;
    }
    (r.pow(k) == p).then_some(r)
}

impl GridConfig {
    /// Raw constructor for exploratory sweeps beyond the three presets.
    pub fn new(px: usize, py: usize, pz: usize) -> Result<Self> {
        if px == 0 || py == 0 || pz == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { px, py, pz })
    }

    /// Builds one of the three named configurations from a total
    /// processor count, rejecting counts that do not fit exactly.
    pub fn make_grid(p: usize, preset: GridPreset) -> Result<Self> {
        match preset {
            GridPreset::SquareFlat => {
                let s = exact_root(p, 2).ok_or(Error::GridShape {
                    p,
                    preset: "square-flat",
                    required: "a perfect square",
                })?;
                Self::new(s, s, 1)
            }
            GridPreset::SquareTwoLayer => {
                let half = (p % 2 == 0).then(|| p / 2).ok_or(Error::GridShape {
                    p,
                    preset: "square-two-layer",
                    required: "twice a perfect square",
                })?;
                let s = exact_root(half, 2).ok_or(Error::GridShape {
                    p,
                    preset: "square-two-layer",
                    required: "twice a perfect square",
                })?;
                Self::new(s, s, 2)
            }
            GridPreset::Cube => {
                let s = exact_root(p, 3).ok_or(Error::GridShape {
                    p,
                    preset: "cube",
                    required: "a perfect cube",
                })?;
                Self::new(s, s, s)
            }
        }
    }

    pub fn px(&self) -> usize {
        self.px
    }

    pub fn py(&self) -> usize {
        self.py
    }

    /// Layer count c.
    pub fn pz(&self) -> usize {
        self.pz
    }

    /// Total processor count p = px * py * pz.
    pub fn p(&self) -> usize {
        self.px * self.py * self.pz
    }

    /// p1 = px * py, the per-layer processor count.
    pub fn p1(&self) -> usize {
        self.px * self.py
    }

    pub fn contains(&self, id: ProcId) -> bool {
        id.pi < self.px && id.pj < self.py && id.pk < self.pz
    }

    /// Owner of the resident copy of a block: 2D block-cyclic over the
    /// px x py face of layer 0.
    pub fn owner_of_block(&self, b: BlockCoord) -> ProcId {
        ProcId {
            pi: b.bi % self.px,
            pj: b.bj % self.py,
            pk: 0,
        }
    }

    /// Processors active in the panel phases of iteration t:
    /// {(pi, t mod py, pk)} for all pi, pk.
    pub fn panel_active_set(&self, t: usize) -> Vec<ProcId> {
        let pj = t % self.py;
        let mut set = Vec::with_capacity(self.px * self.pz);
        for pk in 0..self.pz {
            for pi in 0..self.px {
                set.push(ProcId { pi, pj, pk });
            }
        }
        set
    }

    pub fn is_panel_active(&self, id: ProcId, t: usize) -> bool {
        id.pj == t % self.py
    }

    /// All processors in deterministic order.
    pub fn all_procs(&self) -> Vec<ProcId> {
        let mut out = Vec::with_capacity(self.p());
        for pk in 0..self.pz {
            for pj in 0..self.py {
                for pi in 0..self.px {
                    out.push(ProcId { pi, pj, pk });
                }
            }
        }
        out
    }
}

impl fmt::Display for GridConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.px, self.py, self.pz)
    }
}

impl FromStr for GridConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('x').collect();
        if parts.len() != 3 {
            return Err(Error::GridParse(s.to_string()));
        }
        let dims: Vec<usize> = parts
            .iter()
            .map(|q| q.parse().map_err(|_| Error::GridParse(s.to_string())))
            .collect::<Result<_>>()?;
        GridConfig::new(dims[0], dims[1], dims[2]).map_err(|_| Error::GridParse(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let g = GridConfig::make_grid(16, GridPreset::SquareFlat).unwrap();
        assert_eq!((g.px(), g.py(), g.pz()), (4, 4, 1));

        let g = GridConfig::make_grid(8, GridPreset::SquareTwoLayer).unwrap();
        assert_eq!((g.px(), g.py(), g.pz()), (2, 2, 2));

        let g = GridConfig::make_grid(27, GridPreset::Cube).unwrap();
        assert_eq!((g.px(), g.py(), g.pz()), (3, 3, 3));
    }

    #[test]
    fn preset_shape_errors() {
        assert!(GridConfig::make_grid(15, GridPreset::SquareFlat).is_err());
        assert!(GridConfig::make_grid(12, GridPreset::SquareTwoLayer).is_err());
        assert!(GridConfig::make_grid(28, GridPreset::Cube).is_err());
    }

    #[test]
    fn preset_product_exact() {
        for p in 1..200 {
            for preset in [
                GridPreset::SquareFlat,
                GridPreset::SquareTwoLayer,
                GridPreset::Cube,
            ] {
                if let Ok(g) = GridConfig::make_grid(p, preset) {
                    assert_eq!(g.p(), p, "{g} for p={p}");
                    assert_eq!(g.px(), g.py());
                }
            }
        }
    }

    #[test]
    fn block_owner() {
        let g = GridConfig::new(2, 2, 1).unwrap();
        assert_eq!(
            g.owner_of_block(BlockCoord { bi: 0, bj: 0 }),
            ProcId { pi: 0, pj: 0, pk: 0 }
        );
        assert_eq!(
            g.owner_of_block(BlockCoord { bi: 3, bj: 2 }),
            ProcId { pi: 1, pj: 0, pk: 0 }
        );

        let g = GridConfig::new(3, 3, 3).unwrap();
        assert_eq!(
            g.owner_of_block(BlockCoord { bi: 4, bj: 7 }),
            ProcId { pi: 1, pj: 1, pk: 0 }
        );
    }

    #[test]
    fn active_set() {
        let g = GridConfig::new(2, 2, 2).unwrap();
        let s = g.panel_active_set(0);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|id| id.pj == 0));

        let g = GridConfig::new(4, 4, 1).unwrap();
        let s = g.panel_active_set(5);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|id| id.pj == 1));

        let g = GridConfig::new(1, 1, 1).unwrap();
        for t in [0, 3, 17] {
            assert_eq!(g.panel_active_set(t), vec![ProcId { pi: 0, pj: 0, pk: 0 }]);
        }
    }

    #[test]
    fn active_set_size_invariant() {
        for (px, py, pz) in [(2, 2, 1), (4, 4, 1), (3, 3, 3), (4, 4, 2)] {
            let g = GridConfig::new(px, py, pz).unwrap();
            for t in 0..10 {
                assert_eq!(g.panel_active_set(t).len(), px * pz);
            }
        }
    }

    #[test]
    fn grid_parse_roundtrip() {
        let g: GridConfig = "4x4x1".parse().unwrap();
        assert_eq!((g.px(), g.py(), g.pz()), (4, 4, 1));
        assert_eq!(g.to_string(), "4x4x1");
        assert!("4x4".parse::<GridConfig>().is_err());
        assert!("4x0x1".parse::<GridConfig>().is_err());
        assert!("axbxc".parse::<GridConfig>().is_err());
    }
}
