#![allow(clippy::needless_range_loop)]
//! Dense LU in double-double and the symmetric tridiagonal eigensolver used
//! for Gaussian rules.

use crate::dd::Dd;
use crate::error::{Error, Result};

/// LU factorisation with partial pivoting of a square matrix stored row-major.
pub(crate) struct DdLu {
    n: usize,
    lu: Vec<Dd>,
    perm: Vec<usize>,
}

impl DdLu {
    pub fn factor(n: usize, mut a: Vec<Dd>) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[i * n + k].hi().abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("non-empty pivot column");
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Singular(k));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / d;
                a[i * n + k] = l;
                if l.hi() != 0.0 {
                    for j in k + 1..n {
                        let u = a[k * n + j];
                        a[i * n + j] -= l * u;
                    }
                }
            }
        }
        Ok(DdLu { n, lu: a, perm })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Dd]) -> Vec<Dd> {
        let n = self.n;
        let mut y: Vec<Dd> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        y
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[Dd]) -> Vec<Dd> {
        let n = self.n;
        // A = P^T L U, so A^T = U^T L^T P.
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * z[j];
            }
            z[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * z[j];
            }
            z[i] = s;
        }
        let mut x = vec![Dd::ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// Hager–Higham estimate of `||A^{-1}||_1`.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![Dd::from_f64(1.0 / n as f64); n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let norm: f64 = y.iter().map(|v| v.hi().abs()).sum();
            if norm <= estimate {
                break;
            }
            estimate = norm;
            let xi: Vec<Dd> = y
                .iter()
                .map(|v| Dd::from_f64(if v.hi() >= 0.0 { 1.0 } else { -1.0 }))
                .collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.hi().abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("n >= 1");
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a.hi() * b.hi()).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![Dd::ZERO; n];
            x[j] = Dd::ONE;
        }
        estimate
    }
}

pub(crate) fn norm1(n: usize, a: &[Dd]) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].hi().abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() == diag.len() - 1`), together with the first
/// component of each normalised eigenvector. Implicit-shift QL; eigenvalues
/// are returned in ascending order.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n);
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > 50 {
                return Err(Error::EigenNoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok((
        order.iter().map(|&i| d[i]).collect(),
        order.iter().map(|&i| z[i]).collect(),
    ))
}
