//! Dense matrix storage and a rank-revealing least-squares solver.
//!
//! The solver is Householder QR with column pivoting followed, when the
//! numerical rank is short, by a complete orthogonal decomposition so the
//! returned solution is the minimum-norm minimizer of `||A x - b||_2`.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows. An empty iterator yields a 0x`cols` matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Row {
                    row: i,
                    source: Box::new(Error::DimensionMismatch {
                        expected: cols,
                        found: r.len(),
                    }),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact panics on 0, and a 0-column matrix still has rows
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Rows `range` as a new matrix.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Matrix {
        Matrix {
            rows: range.len(),
            cols: self.cols,
            data: self.data[range.start * self.cols..range.end * self.cols].to_vec(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self.iter_rows().map(|r| dot(r, v)).collect())
    }

    /// `self^T v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (r, &s) in self.iter_rows().zip(v) {
            for (o, &a) in out.iter_mut().zip(r) {
                *o += a * s;
            }
        }
        Ok(out)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large columns
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ss: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * ss.sqrt()
}

/// Result of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x: Vec<f64>,
    /// Numerical rank of the design matrix.
    pub rank: usize,
}

/// Relative threshold on `|R_kk| / |R_00|` below which a pivot is treated as zero.
pub fn default_rcond(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Minimum-norm least-squares solution of `a x ~= b`.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<LstsqSolution> {
    lstsq_with_rcond(a, b, default_rcond(a.rows(), a.cols()))
}

pub fn lstsq_with_rcond(a: &Matrix, b: &[f64], rcond: f64) -> Result<LstsqSolution> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    if m == 0 {
        return Err(Error::invalid("least squares needs at least one row"));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix"));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    if n == 0 {
        return Ok(LstsqSolution {
            x: Vec::new(),
            rank: 0,
        });
    }

    let mut qr = PivotedQr::factor(a);
    let mut rhs = b.to_vec();
    qr.apply_qt(&mut rhs);
    let rank = qr.rank(rcond);
    let x = qr.min_norm_solve(&rhs, rank);
    Ok(LstsqSolution { x, rank })
}

/// Column-major Householder QR with column pivoting: `A P = Q R`.
struct PivotedQr {
    m: usize,
    n: usize,
    /// column-major; R in the upper triangle, reflector tails below the diagonal
    qr: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

/// Below this many rows the trailing update runs on one thread.
const PAR_ROWS: usize = 512;

impl PivotedQr {
    fn factor(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut qr = vec![0.0; m * n];
        for i in 0..m {
            let row = a.row(i);
            for j in 0..n {
                qr[j * m + i] = row[j];
            }
        }
        let kmax = m.min(n);
        let mut tau = vec![0.0; kmax];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = (0..n).map(|j| norm2(&qr[j * m..(j + 1) * m])).collect();
        let mut norms_ref = norms.clone();

        for k in 0..kmax {
            // pivot: largest remaining column norm, first index on ties
            let mut p = k;
            for j in k + 1..n {
                if norms[j] > norms[p] {
                    p = j;
                }
            }
            if p != k {
                let (lo, hi) = qr.split_at_mut(p * m);
                lo[k * m..(k + 1) * m].swap_with_slice(&mut hi[..m]);
                perm.swap(k, p);
                norms.swap(k, p);
                norms_ref.swap(k, p);
            }

            let col = &mut qr[k * m..(k + 1) * m];
            let t = householder(&mut col[k..]);
            tau[k] = t;

            let (head, tail) = qr.split_at_mut((k + 1) * m);
            let v = &head[k * m + k..(k + 1) * m];
            let apply = |c: &mut [f64]| {
                if t != 0.0 {
                    let seg = &mut c[k..];
                    let s = t * (seg[0] + dot(&v[1..], &seg[1..]));
                    seg[0] -= s;
                    for (ci, vi) in seg[1..].iter_mut().zip(&v[1..]) {
                        *ci -= s * vi;
                    }
                }
            };
            if m - k >= PAR_ROWS {
                tail.par_chunks_mut(m).for_each(apply);
            } else {
                tail.chunks_mut(m).for_each(apply);
            }

            // downdate trailing column norms (LAPACK xLAQP2 safeguard)
            for j in k + 1..n {
                if norms[j] == 0.0 {
                    continue;
                }
                let r = qr[j * m + k].abs() / norms[j];
                let temp = (1.0 - r * r).max(0.0);
                let ratio = norms[j] / norms_ref[j];
                if temp * ratio * ratio <= f64::EPSILON.sqrt() {
                    let fresh = norm2(&qr[j * m + k + 1..(j + 1) * m]);
                    norms[j] = fresh;
                    norms_ref[j] = fresh;
                } else {
                    norms[j] *= temp.sqrt();
                }
            }
        }

        Self {
            m,
            n,
            qr,
            tau,
            perm,
        }
    }

    #[inline]
    fn r(&self, i: usize, j: usize) -> f64 {
        self.qr[j * self.m + i]
    }

    fn rank(&self, rcond: f64) -> usize {
        let kmax = self.m.min(self.n);
        let r00 = self.r(0, 0).abs();
        if r00 == 0.0 {
            return 0;
        }
        (0..kmax)
            .take_while(|&k| self.r(k, k).abs() > rcond * r00)
            .count()
    }

    /// `b <- Q^T b`
    fn apply_qt(&self, b: &mut [f64]) {
        let m = self.m;
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let v = &self.qr[k * m + k..(k + 1) * m];
            let seg = &mut b[k..];
            let s = t * (seg[0] + dot(&v[1..], &seg[1..]));
            seg[0] -= s;
            for (bi, vi) in seg[1..].iter_mut().zip(&v[1..]) {
                *bi -= s * vi;
            }
        }
    }

    /// Solves `R[..rank, ..] y = c[..rank]` for the minimum-norm `y`, then undoes the pivoting.
    fn min_norm_solve(&mut self, c: &[f64], rank: usize) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        if rank == 0 {
            return y;
        }

        // Row-major copy of the leading `rank` rows of R: [R11 R12].
        let mut r = vec![0.0; rank * n];
        for i in 0..rank {
            for j in i..n {
                r[i * n + j] = self.r(i, j);
            }
        }

        // Right-side reflectors annihilate R12, leaving [T 0] = [R11 R12] Z.
        let mut zvecs: Vec<(Vec<f64>, f64)> = Vec::new();
        if rank < n {
            zvecs.reserve(rank);
            for k in (0..rank).rev() {
                // x = (R[k,k], R[k, rank..n])
                let mut x = Vec::with_capacity(1 + n - rank);
                x.push(r[k * n + k]);
                x.extend_from_slice(&r[k * n + rank..(k + 1) * n]);
                let t = householder(&mut x);
                // apply H to rows 0..=k on columns {k} ∪ rank..n
                for i in 0..=k {
                    let row = &mut r[i * n..(i + 1) * n];
                    if i == k {
                        row[k] = x[0];
                        row[rank..].iter_mut().for_each(|v| *v = 0.0);
                        continue;
                    }
                    if t == 0.0 {
                        continue;
                    }
                    let s = t * (row[k] + dot(&x[1..], &row[rank..]));
                    row[k] -= s;
                    for (ri, vi) in row[rank..].iter_mut().zip(&x[1..]) {
                        *ri -= s * vi;
                    }
                }
                x[0] = 1.0;
                zvecs.push((x, t));
            }
        }

        // back substitution with T
        for i in (0..rank).rev() {
            let row = &r[i * n..(i + 1) * n];
            let s: f64 = (i + 1..rank).map(|j| row[j] * y[j]).sum();
            y[i] = (c[i] - s) / row[i];
        }

        // y <- Z [u; 0], applying H_0 first. zvecs holds H_{rank-1} .. H_0.
        for (idx, (v, t)) in zvecs.iter().enumerate().rev() {
            let k = rank - 1 - idx;
            if *t == 0.0 {
                continue;
            }
            let s = t * (y[k] + dot(&v[1..], &y[rank..]));
            y[k] -= s;
            for (yi, vi) in y[rank..].iter_mut().zip(&v[1..]) {
                *yi -= s * vi;
            }
        }

        let mut x = vec![0.0; n];
        for (j, &p) in self.perm.iter().enumerate() {
            x[p] = y[j];
        }
        x
    }
}

/// In-place Householder reflector for `x`: on return `x[0] = beta` and
/// `x[1..]` holds the reflector tail `v[1..]` (with implicit `v[0] = 1`).
/// Returns `tau` such that `(I - tau v v^T) x_orig = beta e_1`.
fn householder(x: &mut [f64]) -> f64 {
    if x.len() <= 1 {
        return 0.0;
    }
    let alpha = x[0];
    let tail_norm = norm2(&x[1..]);
    if tail_norm == 0.0 {
        return 0.0;
    }
    let norm = alpha.hypot(tail_norm);
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = beta;
    (beta - alpha) / beta
}
