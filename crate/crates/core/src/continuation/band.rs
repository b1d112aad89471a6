//! Banded LU factorization with partial pivoting, band storage in the
//! LAPACK `dgbtrf` layout: entry (i, j) of the matrix lives at
//! `ab[kl + ku + i - j][j]`, with `kl` extra rows on top for pivot
//! fill-in. The solver is fully deterministic: no heuristics, fixed
//! traversal order.

use crate::error::{Error, Result};

pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    /// Column-major: `ab[r + c * ldab]`.
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j <= i + self.ku && i <= j + self.kl, "({i},{j}) outside band");
        self.kl + self.ku + i - j + j * self.ldab
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    /// In-place LU with row partial pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku; // superdiagonals of U after fill-in
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize; // rightmost column touched so far
        for j in 0..n {
            let km = kl.min(n - 1 - j); // subdiagonal count in column j
            // Pivot search in column j, rows j..=j+km.
            let mut jp = 0usize;
            let mut best = 0.0f64;
            for p in 0..=km {
                let v = self.ab[kv + p + j * ldab].abs();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            if best == 0.0 {
                return Err(Error::SolverFailure(format!(
                    "exactly singular at column {j}"
                )));
            }
            ipiv[j] = j + jp;
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                // Swap rows j and j+jp across columns j..=ju.
                for c in j..=ju {
                    let s1 = kv + j + jp - c + c * ldab;
                    let s0 = kv + j - c + c * ldab;
                    self.ab.swap(s0, s1);
                }
            }
            let pivot = self.ab[kv + j * ldab];
            for p in 1..=km {
                let m = self.ab[kv + p + j * ldab] / pivot;
                self.ab[kv + p + j * ldab] = m;
                if m != 0.0 {
                    for c in (j + 1)..=ju {
                        let upper = self.ab[kv + j - c + c * ldab];
                        if upper != 0.0 {
                            self.ab[kv + j + p - c + c * ldab] -= m * upper;
                        }
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            ldab,
            ab: self.ab,
            ipiv,
        })
    }
}

pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut x = b.to_vec();
        // Forward: apply pivots and L (unit lower, multipliers stored).
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != 0.0 {
                let km = kl.min(n - 1 - j);
                for q in 1..=km {
                    x[j + q] -= self.ab[kv + q + j * ldab] * xj;
                }
            }
        }
        // Back substitution with U of bandwidth kv.
        for i in (0..n).rev() {
            let cmax = (i + kv).min(n - 1);
            let mut s = x[i];
            for c in (i + 1)..=cmax {
                s -= self.ab[kv + i - c + c * ldab] * x[c];
            }
            x[i] = s / self.ab[kv + i * ldab];
        }
        x
    }
}
