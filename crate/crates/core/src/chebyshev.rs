//! Chebyshev polynomials of the first kind.
//!
//! The `lambda_0` moments of `T_k` are `delta_{k0}`, which makes this the
//! natural basis for moment conditions on rules for the arcsine measure.

use crate::dd::Dd;

/// Evaluates `sum_k coeffs[k] T_k(x)` by Clenshaw's recurrence.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(&c0) => x * b1 - b2 + c0,
        None => 0.0,
    }
}

/// `T_0(x), ..., T_{kmax}(x)`.
pub fn chebyshev_t_table(x: f64, kmax: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(kmax + 1);
    t.push(1.0);
    if kmax >= 1 {
        t.push(x);
    }
    for k in 2..=kmax {
        let next = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(next);
    }
    t
}

pub(crate) fn chebyshev_t_table_dd(x: Dd, kmax: usize) -> Vec<Dd> {
    let mut t = Vec::with_capacity(kmax + 1);
    t.push(Dd::ONE);
    if kmax >= 1 {
        t.push(x);
    }
    let two_x = x * 2.0;
    for k in 2..=kmax {
        let next = two_x * t[k - 1] - t[k - 2];
        t.push(next);
    }
    t
}
