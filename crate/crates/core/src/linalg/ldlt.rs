//! Bunch–Kaufman diagonal pivoting: P M Pᵀ = L D Lᵀ with D block diagonal
//! (1×1 and 2×2 blocks) and L unit lower triangular.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

// (1 + √17) / 8
const ALPHA: f64 = 0.640_388_203_202_208_4;

#[derive(Clone, Debug)]
enum Pivot {
    One,
    Two,
}

#[derive(Clone, Debug)]
pub struct SymmetricFactorization {
    n: usize,
    /// Column-major; strictly lower part holds L, the diagonal blocks hold D.
    factor: Vec<f64>,
    /// Row i of P M Pᵀ is row `perm[i]` of M.
    perm: Vec<usize>,
    pivots: Vec<Pivot>,
    norm1: f64,
}

impl SymmetricFactorization {
    /// Factors the symmetric matrix `m`; only its lower triangle is read.
    pub fn factor(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        let mut a = m.as_slice().to_vec();
        let norm1 = symmetric_norm1(&a, n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::with_capacity(n);
        let at = |i: usize, j: usize| i + j * n;

        let mut k = 0;
        while k < n {
            let absakk = a[at(k, k)].abs();
            let (imax, colmax) = if k + 1 < n {
                (k + 1..n)
                    .map(|i| (i, a[at(i, k)].abs()))
                    .fold((k + 1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            } else {
                (k, 0.0)
            };
            if absakk.max(colmax) == 0.0 {
                return Err(Error::Singular(format!("zero pivot column at step {k}")));
            }
            let (kp, kstep) = if absakk >= ALPHA * colmax {
                (k, 1)
            } else {
                let mut rowmax = (k..imax).map(|j| a[at(imax, j)].abs()).fold(0.0, f64::max);
                rowmax = (imax + 1..n).map(|j| a[at(j, imax)].abs()).fold(rowmax, f64::max);
                if absakk >= ALPHA * colmax * (colmax / rowmax) {
                    (k, 1)
                } else if a[at(imax, imax)].abs() >= ALPHA * rowmax {
                    (imax, 1)
                } else {
                    (imax, 2)
                }
            };
            let kk = k + kstep - 1;
            if kp != kk {
                // symmetric interchange of rows/columns kk and kp in the trailing block
                for i in kp + 1..n {
                    a.swap(at(i, kk), at(i, kp));
                }
                for j in kk + 1..kp {
                    a.swap(at(j, kk), at(kp, j));
                }
                a.swap(at(kk, kk), at(kp, kp));
                if kstep == 2 {
                    a.swap(at(k + 1, k), at(kp, k));
                }
                // rows of the already computed part of L
                for j in 0..k {
                    a.swap(at(kk, j), at(kp, j));
                }
                perm.swap(kk, kp);
            }

            if kstep == 1 {
                let d11 = 1.0 / a[at(k, k)];
                for j in k + 1..n {
                    let factor = a[at(j, k)] * d11;
                    if factor != 0.0 {
                        let (head, tail) = a.split_at_mut(j * n);
                        let col_k = &head[k * n..k * n + n];
                        let col_j = &mut tail[..n];
                        for i in j..n {
                            col_j[i] -= col_k[i] * factor;
                        }
                    }
                }
                for i in k + 1..n {
                    a[at(i, k)] *= d11;
                }
                pivots.push(Pivot::One);
            } else {
                let mut d21 = a[at(k + 1, k)];
                let d11 = a[at(k + 1, k + 1)] / d21;
                let d22 = a[at(k, k)] / d21;
                let t = 1.0 / (d11 * d22 - 1.0);
                d21 = t / d21;
                for j in k + 2..n {
                    let wk = d21 * (d11 * a[at(j, k)] - a[at(j, k + 1)]);
                    let wkp1 = d21 * (d22 * a[at(j, k + 1)] - a[at(j, k)]);
                    let (head, tail) = a.split_at_mut(j * n);
                    let col_k = &head[k * n..k * n + n];
                    let col_k1 = &head[(k + 1) * n..(k + 1) * n + n];
                    let col_j = &mut tail[..n];
                    for i in j..n {
                        col_j[i] -= col_k[i] * wk + col_k1[i] * wkp1;
                    }
                    a[at(j, k)] = wk;
                    a[at(j, k + 1)] = wkp1;
                }
                pivots.push(Pivot::Two);
                pivots.push(Pivot::Two);
            }
            k += kstep;
        }
        Ok(SymmetricFactorization {
            n,
            factor: a,
            perm,
            pivots,
            norm1,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// ‖M‖₁ of the factored matrix.
    pub fn norm1(&self) -> f64 {
        self.norm1
    }

    /// Solves M x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let at = |i: usize, j: usize| i + j * n;
        let f = &self.factor;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // L z = y
        let mut k = 0;
        while k < n {
            let step = match self.pivots[k] {
                Pivot::One => 1,
                Pivot::Two => 2,
            };
            for c in k..k + step {
                let yc = y[c];
                if yc != 0.0 {
                    for i in k + step..n {
                        y[i] -= f[at(i, c)] * yc;
                    }
                }
            }
            k += step;
        }
        // D w = z
        let mut k = 0;
        while k < n {
            match self.pivots[k] {
                Pivot::One => {
                    y[k] /= f[at(k, k)];
                    k += 1;
                }
                Pivot::Two => {
                    let (a, b2, c) = (f[at(k, k)], f[at(k + 1, k)], f[at(k + 1, k + 1)]);
                    // scaled 2×2 inverse, as in the factorization
                    let akm1 = a / b2;
                    let ak = c / b2;
                    let denom = akm1 * ak - 1.0;
                    let bkm1 = y[k] / b2;
                    let bk = y[k + 1] / b2;
                    y[k] = (ak * bkm1 - bk) / denom;
                    y[k + 1] = (akm1 * bk - bkm1) / denom;
                    k += 2;
                }
            }
        }
        // Lᵀ u = w
        let mut k = n;
        while k > 0 {
            let step = match self.pivots[k - 1] {
                Pivot::One => 1,
                Pivot::Two => 2,
            };
            let start = k - step;
            for c in start..k {
                let mut s = 0.0;
                for i in k..n {
                    s += f[at(i, c)] * y[i];
                }
                y[c] -= s;
            }
            k = start;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = y[i];
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        x
    }

    /// Solves for every column of `b`; columns are independent and solved in parallel.
    pub fn solve_columns(&self, b: &mut DMatrix<f64>) {
        assert_eq!(b.nrows(), self.n);
        let n = self.n;
        if n == 0 {
            return;
        }
        b.as_mut_slice()
            .par_chunks_mut(n)
            .for_each(|col| self.solve_in_place(col));
    }

    /// Hager–Higham estimate of ‖M⁻¹‖₁ (M is symmetric, so no transposed solves).
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        let mut last_index = usize::MAX;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            estimate = y.iter().map(|v| v.abs()).sum();
            let mut z: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            self.solve_in_place(&mut z);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_index {
                break;
            }
            last_index = j;
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        // alternative lower bound on a sign-alternating vector
        let mut alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        self.solve_in_place(&mut alt);
        let alt_est = 2.0 * alt.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        estimate.max(alt_est)
    }

    /// Estimated 1-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        self.norm1 * self.inverse_norm1_estimate()
    }
}

fn symmetric_norm1(a: &[f64], n: usize) -> f64 {
    let mut sums = vec![0.0; n];
    for j in 0..n {
        for i in j..n {
            let v = a[i + j * n].abs();
            sums[j] += v;
            if i != j {
                sums[i] += v;
            }
        }
    }
    sums.into_iter().fold(0.0, f64::max)
}
