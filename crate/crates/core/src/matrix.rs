//! Dense matrix storage, row permutations, and a sequential blocked-LU
//! reference factorization with partial pivoting.
//!
//! The blocked factorization here is the ground truth the simulator is
//! checked against: on a 1x1x1 grid the engine must reproduce its pivot
//! sequence and factors element-exactly.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute threshold below which a pivot candidate is considered zero.
///
/// Random dense inputs never get near this; it exists to fail loudly on
/// genuinely rank-deficient panels rather than dividing by zero.
pub const SINGULARITY_THRESHOLD: f64 = 1e-300;

/// Row-major dense matrix of f64, the factorization subject.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::DataLengthMismatch {
                rows,
                cols,
                got: data.len(),
            });
        }
        for (idx, x) in data.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `self * other`, plain triple loop.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + a * other.get(k, j));
                }
            }
        }
        Ok(out)
    }
}

/// A bijection on row indices; `map[i]` is the input row that lands at
/// output row `i` (so applying it computes P*A).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPermutation {
    map: Vec<usize>,
}

impl RowPermutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n || seen[i] {
                return Err(Error::InvalidPermutation {
                    expected: n,
                    got: map.len(),
                });
            }
            seen[i] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Self { map: inv }
    }
}

/// The outcome of a factorization: P*A = L*U.
#[derive(Debug, Clone, PartialEq)]
pub struct LUFactors {
    pub l: DenseMatrix,
    pub u: DenseMatrix,
    pub perm: RowPermutation,
}

/// Deterministic random n x n matrix with entries uniform in [-1, 1].
pub fn random_matrix(n: usize, seed: u64) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-1.0_f64, 1.0_f64);
    let data: Vec<f64> = (0..n * n).map(|_| dist.sample(&mut rng)).collect();
    DenseMatrix::new(n, n, data)
}

/// `row i of output = row p.map[i] of input`, i.e. P*A.
pub fn apply_permutation(a: &DenseMatrix, p: &RowPermutation) -> Result<DenseMatrix> {
    if p.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "permutation length {} vs {} rows",
            p.len(),
            a.rows()
        )));
    }
    let mut out = DenseMatrix::zeros(a.rows(), a.cols())?;
    for i in 0..a.rows() {
        let src = p.map()[i];
        for j in 0..a.cols() {
            out.set(i, j, a.get(src, j));
        }
    }
    Ok(out)
}

/// ||P*A - L*U||_F / ||A||_F.
pub fn residual_norm(a: &DenseMatrix, f: &LUFactors) -> Result<f64> {
    if f.l.rows() != a.rows() || f.u.cols() != a.cols() || f.perm.len() != a.rows() {
        return Err(Error::DimensionMismatch(
            "residual_norm: factor shapes do not match input".into(),
        ));
    }
    let pa = apply_permutation(a, &f.perm)?;
    let lu = f.l.matmul(&f.u)?;
    let mut sq = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let d = pa.get(i, j) - lu.get(i, j);
            sq += d * d;
        }
    }
    Ok(sq.sqrt() / a.frobenius_norm())
}

/// Sequential blocked LU with partial pivoting over v-wide panels.
///
/// Pivot for column j is the maximum-magnitude entry in the trailing
/// column; ties break to the smallest original row index. The loop
/// structure (panel elimination, then TRSM, then a rank-v Schur update
/// with the rank dimension outermost) is the canonical order the engine
/// mirrors, so that matching pivot sequences imply element-exact factors.
pub fn blocked_lu_oracle(a: &DenseMatrix, v: usize) -> Result<LUFactors> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "blocked_lu_oracle: expected square matrix, got {}x{}",
            n,
            a.cols()
        )));
    }
    if v == 0 || n % v != 0 {
        return Err(Error::Divisibility { n, v });
    }
    let nb = n / v;
    let mut w = a.clone();
    // orig[i] = original row index currently stored at position i.
    let mut orig: Vec<usize> = (0..n).collect();

    for t0 in 0..nb {
        let col0 = t0 * v;
        // Panel factorization with partial pivoting over the full trailing panel.
        for j in 0..v {
            let cpos = col0 + j;
            let mut best = cpos;
            let mut best_mag = w.get(cpos, cpos).abs();
            let mut best_orig = orig[cpos];
            for i in cpos + 1..n {
                let mag = w.get(i, cpos).abs();
                if mag > best_mag || (mag == best_mag && orig[i] < best_orig) {
                    best = i;
                    best_mag = mag;
                    best_orig = orig[i];
                }
            }
            if best_mag < SINGULARITY_THRESHOLD {
                return Err(Error::SingularPanel {
                    iteration: t0,
                    column: cpos,
                });
            }
            if best != cpos {
                swap_rows(&mut w, cpos, best);
                orig.swap(cpos, best);
            }
            let piv = w.get(cpos, cpos);
            for i in cpos + 1..n {
                let l = w.get(i, cpos) / piv;
                w.set(i, cpos, l);
                for k in cpos + 1..col0 + v {
                    let x = w.get(i, k) - l * w.get(cpos, k);
                    w.set(i, k, x);
                }
            }
        }
        // TRSM: U01 = L11^{-1} * A01.
        for j in 0..v {
            for i in j + 1..v {
                let l = w.get(col0 + i, col0 + j);
                for jj in col0 + v..n {
                    let x = w.get(col0 + i, jj) - l * w.get(col0 + j, jj);
                    w.set(col0 + i, jj, x);
                }
            }
        }
        // Schur update: A11 -= L10 * U01, rank dimension outermost.
        for kk in 0..v {
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

    Ok(split_factors(&w, orig))
}

pub(crate) fn swap_rows(w: &mut DenseMatrix, a: usize, b: usize) {
    for j in 0..w.cols() {
        let x = w.get(a, j);
        let y = w.get(b, j);
        w.set(a, j, y);
        w.set(b, j, x);
    }
}

/// Splits an in-place factorization (L below diagonal, U on and above)
/// into explicit unit-lower L, upper U and the row permutation.
pub(crate) fn split_factors(w: &DenseMatrix, orig: Vec<usize>) -> LUFactors {
    let n = w.rows();
    let mut l = DenseMatrix::zeros(n, n).expect("n >= 1");
    let mut u = DenseMatrix::zeros(n, n).expect("n >= 1");
    for i in 0..n {
        l.set(i, i, 1.0);
        for j in 0..i {
            l.set(i, j, w.get(i, j));
        }
        for j in i..n {
            u.set(i, j, w.get(i, j));
        }
    }
    let perm = RowPermutation::new(orig).expect("orig tracks a bijection");
    LUFactors { l, u, perm }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_matrix_range_and_determinism() {
        let m = random_matrix(1, 7).unwrap();
        assert!(m.get(0, 0) >= -1.0 && m.get(0, 0) <= 1.0);

        let a = random_matrix(4, 1).unwrap();
        let b = random_matrix(4, 1).unwrap();
        assert_eq!(a, b);

        let c = random_matrix(4, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_matrix_rejects_zero() {
        assert!(matches!(random_matrix(0, 1), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn oracle_identity() {
        let a = DenseMatrix::identity(4).unwrap();
        let f = blocked_lu_oracle(&a, 2).unwrap();
        assert_eq!(f.l, DenseMatrix::identity(4).unwrap());
        assert_eq!(f.u, DenseMatrix::identity(4).unwrap());
        assert_eq!(f.perm.map(), &[0, 1, 2, 3]);
    }

    #[test]
    fn oracle_swap_matrix() {
        // [[0,1],[1,0]], v=1: pivot rule swaps rows 0 and 1, leaving L=U=I.
        let a = DenseMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = blocked_lu_oracle(&a, 1).unwrap();
        assert_eq!(f.perm.map(), &[1, 0]);
        assert_eq!(f.l, DenseMatrix::identity(2).unwrap());
        assert_eq!(f.u, DenseMatrix::identity(2).unwrap());
    }

    #[test]
    fn oracle_residual_small() {
        let a = random_matrix(32, 5).unwrap();
        let f = blocked_lu_oracle(&a, 4).unwrap();
        assert!(residual_norm(&a, &f).unwrap() <= 1e-10);

        let a = random_matrix(64, 9).unwrap();
        let f = blocked_lu_oracle(&a, 4).unwrap();
        assert!(residual_norm(&a, &f).unwrap() <= 1e-10);
    }

    #[test]
    fn residual_exact_cases() {
        let a = DenseMatrix::identity(3).unwrap();
        let f = LUFactors {
            l: DenseMatrix::identity(3).unwrap(),
            u: DenseMatrix::identity(3).unwrap(),
            perm: RowPermutation::identity(3),
        };
        assert_eq!(residual_norm(&a, &f).unwrap(), 0.0);

        // A = 2I, L = U = I: ||2I - I||_F / ||2I||_F = 0.5.
        let mut a2 = DenseMatrix::zeros(3, 3).unwrap();
        for i in 0..3 {
            a2.set(i, i, 2.0);
        }
        assert_eq!(residual_norm(&a2, &f).unwrap(), 0.5);
    }

    #[test]
    fn residual_dimension_mismatch() {
        let a = DenseMatrix::identity(3).unwrap();
        let f = LUFactors {
            l: DenseMatrix::identity(2).unwrap(),
            u: DenseMatrix::identity(2).unwrap(),
            perm: RowPermutation::identity(2),
        };
        assert!(residual_norm(&a, &f).is_err());
    }

    #[test]
    fn apply_permutation_laws() {
        let a = random_matrix(4, 3).unwrap();
        let id = RowPermutation::identity(4);
        assert_eq!(apply_permutation(&a, &id).unwrap(), a);

        let rev = RowPermutation::new(vec![1, 0]).unwrap();
        let b = DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let swapped = apply_permutation(&b, &rev).unwrap();
        assert_eq!(swapped.row(0), &[3.0, 4.0]);
        assert_eq!(swapped.row(1), &[1.0, 2.0]);

        let p = RowPermutation::new(vec![2, 0, 3, 1]).unwrap();
        let pa = apply_permutation(&a, &p).unwrap();
        let back = apply_permutation(&pa, &p.inverse()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn permutation_length_mismatch() {
        let a = random_matrix(4, 3).unwrap();
        let p = RowPermutation::identity(3);
        assert!(apply_permutation(&a, &p).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![f64::INFINITY, 0.0]).is_err());
    }
}
