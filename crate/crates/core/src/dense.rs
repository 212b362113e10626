//! Small dense complex matrices and Householder QR with column pivoting.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Column-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn col(&self, c: usize) -> &[C64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [C64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            for (yr, &a) in y.iter_mut().zip(self.col(c)) {
                *yr += a * xc;
            }
        }
        y
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for c in 0..other.cols {
            let y = self.mul_vec(other.col(c));
            out.col_mut(c).copy_from_slice(&y);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v.norm_sqr()).sum::<f64>())
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[c * self.rows + r]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[c * self.rows + r]
    }
}

/// `A P = Q R` with Householder reflectors `I - beta v v^H`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    /// `R` in the upper triangle, reflector tails below the diagonal.
    qr: CMatrix,
    /// Reflector heads and scales.
    heads: Vec<(C64, f64)>,
    perm: Vec<usize>,
    rank: usize,
}

fn norm(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|c| c.norm_sqr()).sum())
}

impl PivotedQr {
    /// Factors `a`; diagonal entries of `R` below `rank_tol * |R_00|` end the rank.
    pub fn new(a: &CMatrix, rank_tol: f64) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut qr = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut heads = Vec::new();
        let steps = m.min(n);
        for k in 0..steps {
            let (mut best, mut best_norm) = (k, -1.0);
            for c in k..n {
                let nc = norm(&qr.col(c)[k..]);
                if nc > best_norm {
                    best = c;
                    best_norm = nc;
                }
            }
            if best != k {
                for r in 0..m {
                    qr.data.swap(k * m + r, best * m + r);
                }
                perm.swap(k, best);
            }
            let x0 = qr[(k, k)];
            let alpha = best_norm;
            if alpha == 0.0 {
                heads.push((C64::new(0.0, 0.0), 0.0));
                continue;
            }
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
            let diag = -phase * alpha;
            let head = x0 - diag;
            let vnorm2 = head.norm_sqr() + qr.col(k)[k + 1..].iter().map(|c| c.norm_sqr()).sum::<f64>();
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
            for c in k + 1..n {
                let mut dot = head.conj() * qr[(k, c)];
                for r in k + 1..m {
                    dot += qr[(r, k)].conj() * qr[(r, c)];
                }
                let s = dot * beta;
                qr[(k, c)] -= head * s;
                for r in k + 1..m {
                    let v = qr[(r, k)];
                    qr[(r, c)] -= v * s;
                }
            }
            qr[(k, k)] = diag;
            heads.push((head, beta));
        }
        let r00 = if steps > 0 { qr[(0, 0)].norm() } else { 0.0 };
        let rank = (0..steps).take_while(|&k| r00 > 0.0 && qr[(k, k)].norm() > rank_tol * r00).count();
        Self { rows: m, cols: n, qr, heads, perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `|R_00| / |R_rr|` over the numerical rank, a cheap condition estimate.
    pub fn condition_estimate(&self) -> f64 {
        if self.rank == 0 {
            return f64::INFINITY;
        }
        self.qr[(0, 0)].norm() / self.qr[(self.rank - 1, self.rank - 1)].norm()
    }

    /// Applies `Q^H` in place.
    pub fn apply_qh(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.rows);
        for (k, &(head, beta)) in self.heads.iter().enumerate() {
            if beta == 0.0 {
                continue;
            }
            let mut dot = head.conj() * b[k];
            for r in k + 1..self.rows {
                dot += self.qr[(r, k)].conj() * b[r];
            }
            let s = dot * beta;
            b[k] -= head * s;
            for r in k + 1..self.rows {
                b[r] -= self.qr[(r, k)] * s;
            }
        }
    }

    /// Basic least-squares solution over the numerical rank (free variables set to zero).
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut y = b.to_vec();
        self.apply_qh(&mut y);
        let r = self.rank;
        let mut z = vec![C64::new(0.0, 0.0); r];
        for i in (0..r).rev() {
            let mut s = y[i];
            for j in i + 1..r {
                s -= self.qr[(i, j)] * z[j];
            }
            z[i] = s / self.qr[(i, i)];
        }
        let mut x = vec![C64::new(0.0, 0.0); self.cols];
        for (j, zj) in z.into_iter().enumerate() {
            x[self.perm[j]] = zj;
        }
        x
    }

    /// Least-squares solution for every column of `b`.
    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, b.cols);
        for c in 0..b.cols {
            let x = self.solve(b.col(c));
            out.col_mut(c).copy_from_slice(&x);
        }
        out
    }
}
