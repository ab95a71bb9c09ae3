//! Orthogonal polynomials for the varying measure `dmu_n = dlambda_0 / q`.
//!
//! Recurrence coefficients come from a discretized Stieltjes procedure on a
//! Gauss–Chebyshev grid (exact for the `lambda_0` factor), refined by doubling
//! the grid. Gaussian nodes and weights are read off the Jacobi matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_vec};
use crate::integrate::{gauss_chebyshev_nodes, KahanSum};
use crate::linalg::symmetric_tridiagonal_eigen;
use crate::measures::EquilibriumMeasure;
use crate::nodes::{phase_nodes, PhaseFunction};
use crate::quadrature::PositivePolynomial;

/// Environment variable overriding the discretization floor `max(200, 8n)`.
pub const DISC_POINTS_ENV: &str = "QUADGEN_DISC_POINTS";

/// Monic three-term recurrence `q_{k+1} = (x - alpha_k) q_k - beta_k q_{k-1}`.
///
/// `beta_0` is the total mass of the measure divided by `exp(log_mass_scale)`.
#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceCoefficients {
    #[serde(serialize_with = "ser_vec")]
    pub alpha: Vec<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub beta: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub log_mass_scale: f64,
    pub discretization_points: usize,
}

impl RecurrenceCoefficients {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.beta[0] * self.log_mass_scale.exp()
    }

    /// `log|q_k(x)|` and the sign of the monic `q_k(x)`, `k <= len()`.
    pub fn monic_log_abs(&self, k: usize, x: f64) -> (f64, f64) {
        assert!(k <= self.len());
        let (mut prev, mut cur) = (0.0f64, 1.0f64);
        let mut log_scale = 0.0;
        for i in 0..k {
            let b = if i == 0 { 0.0 } else { self.beta[i] };
            let next = (x - self.alpha[i]) * cur - b * prev;
            prev = cur;
            cur = next;
            let m = cur.abs().max(prev.abs());
            if m > 1e100 || (m < 1e-100 && m > 0.0) {
                cur /= m;
                prev /= m;
                log_scale += m.ln();
            }
        }
        (cur.abs().ln() + log_scale, cur.signum())
    }

    /// Monic `q_k(x)`.
    pub fn eval_monic(&self, k: usize, x: f64) -> f64 {
        let (l, s) = self.monic_log_abs(k, x);
        s * l.exp()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StieltjesOptions {
    /// Smallest grid size; `None` means `max(200, 8n)`.
    pub min_points: Option<usize>,
    pub tolerance: f64,
    pub max_points: usize,
}

impl Default for StieltjesOptions {
    fn default() -> Self {
        StieltjesOptions {
            min_points: None,
            tolerance: 1e-12,
            max_points: 1 << 20,
        }
    }
}

impl StieltjesOptions {
    /// Defaults, with the floor taken from `QUADGEN_DISC_POINTS` when set.
    pub fn from_env() -> Result<Self> {
        let mut opts = Self::default();
        if let Ok(v) = std::env::var(DISC_POINTS_ENV) {
            let m: usize = v.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("{DISC_POINTS_ENV}={v:?} is not a count"))
            })?;
            opts.min_points = Some(m);
        }
        Ok(opts)
    }

    fn floor(&self, n: usize) -> usize {
        self.min_points
            .unwrap_or_else(|| (8 * n).max(200))
            .max(n + 1)
    }
}

/// One Stieltjes pass on an `points`-node Gauss–Chebyshev discretization of
/// `dlambda_0 / q`, producing `n + 1` coefficient pairs.
pub fn discretized_stieltjes(
    pp: &PositivePolynomial,
    n: usize,
    points: usize,
) -> Result<RecurrenceCoefficients> {
    if points <= n {
        return Err(Error::InvalidParameter(format!(
            "{points} discretization points cannot resolve degree {n}"
        )));
    }
    let t = gauss_chebyshev_nodes(points);
    let log_w: Vec<f64> = t
        .iter()
        .map(|&x| -(points as f64).ln() - pp.log_value(x))
        .collect();
    let scale = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - scale).exp()).collect();

    let beta0: f64 = w.iter().copied().collect::<KahanSum>().total();
    let mut alpha = Vec::with_capacity(n + 1);
    let mut beta = Vec::with_capacity(n + 1);
    beta.push(beta0);
    // Orthonormal vectors of the recurrence sampled on the grid.
    let mut prev = vec![0.0; points];
    let mut cur = vec![1.0 / beta0.sqrt(); points];
    for k in 0..=n {
        let a: KahanSum = (0..points).map(|i| w[i] * t[i] * cur[i] * cur[i]).collect();
        let a = a.total();
        alpha.push(a);
        if k == n {
            break;
        }
        let sb = if k == 0 { 0.0 } else { beta[k].sqrt() };
        let next: Vec<f64> = (0..points)
            .map(|i| (t[i] - a) * cur[i] - sb * prev[i])
            .collect();
        let nrm: KahanSum = (0..points).map(|i| w[i] * next[i] * next[i]).collect();
        let b = nrm.total();
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::MomentDegeneracy {
                index: k + 1,
                value: b,
            });
        }
        beta.push(b);
        let inv = 1.0 / b.sqrt();
        prev = cur;
        cur = next.into_iter().map(|v| v * inv).collect();
    }
    Ok(RecurrenceCoefficients {
        alpha,
        beta,
        log_mass_scale: scale,
        discretization_points: points,
    })
}

fn coefficient_change(a: &RecurrenceCoefficients, b: &RecurrenceCoefficients) -> f64 {
    let da = a
        .alpha
        .iter()
        .zip(&b.alpha)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let db = a
        .beta
        .iter()
        .zip(&b.beta)
        .skip(1)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let dm = (a.mass() / b.mass() - 1.0).abs();
    da.max(db).max(dm)
}

/// Stieltjes recurrence for `dlambda_0 / q` with `n + 1` coefficient pairs,
/// doubling the grid until the coefficients settle.
pub fn stieltjes_recurrence(
    pp: &PositivePolynomial,
    n: usize,
    opts: &StieltjesOptions,
) -> Result<RecurrenceCoefficients> {
    let mut points = opts.floor(n);
    let mut current = discretized_stieltjes(pp, n, points)?;
    loop {
        let next_points = points * 2;
        if next_points > opts.max_points {
            return Err(Error::DiscretizationNotConverged {
                points,
                change: f64::NAN,
            });
        }
        let refined = discretized_stieltjes(pp, n, next_points)?;
        let change = coefficient_change(&current, &refined);
        if change < opts.tolerance {
            return Ok(refined);
        }
        if next_points * 2 > opts.max_points {
            return Err(Error::DiscretizationNotConverged {
                points: next_points,
                change,
            });
        }
        points = next_points;
        current = refined;
    }
}

/// Nodes and weights of an `n`-point Gaussian rule.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `log` of each weight; weights may underflow for heavily scaled measures.
    pub log_weights: Vec<f64>,
}

/// Golub–Welsch: eigenvalues of the Jacobi matrix and `beta_0 v_1^2`.
pub fn gauss_rule_from_recurrence(rc: &RecurrenceCoefficients, n: usize) -> Result<GaussRule> {
    if n == 0 || rc.len() < n {
        return Err(Error::InvalidParameter(format!(
            "need {n} recurrence pairs, have {}",
            rc.len()
        )));
    }
    let off: Vec<f64> = rc.beta[1..n].iter().map(|b| b.sqrt()).collect();
    let (nodes, first) = symmetric_tridiagonal_eigen(&rc.alpha[..n], &off)?;
    let log_b0 = rc.beta[0].ln() + rc.log_mass_scale;
    let log_weights: Vec<f64> = first.iter().map(|v| log_b0 + 2.0 * v.abs().ln()).collect();
    let weights = log_weights.iter().map(|l| l.exp()).collect();
    Ok(GaussRule {
        nodes,
        weights,
        log_weights,
    })
}

/// Predicted strong asymptotics of `q_{mu_n, n}` on `(-1, 1)`.
#[derive(Clone, Debug)]
pub struct AsymptoticEnvelope {
    phase: PhaseFunction,
    n: usize,
}

impl AsymptoticEnvelope {
    pub fn new(em: EquilibriumMeasure, n: usize) -> Self {
        AsymptoticEnvelope {
            phase: PhaseFunction::new(em),
            n,
        }
    }

    /// `K_1(x) = 2 cos(n Phi(x))`.
    pub fn k1(&self, x: f64) -> Result<f64> {
        Ok(2.0 * (self.n as f64 * self.phase.value(x)?).cos())
    }

    /// `K_2(x) = cos(n Phi(x) - arccos x)`.
    pub fn k2(&self, x: f64) -> Result<f64> {
        Ok((self.n as f64 * self.phase.value(x)? - x.acos()).cos())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRecord {
    pub n: usize,
    /// `max_j |x_j - y_j|` between orthogonal-polynomial zeros and phase nodes.
    #[serde(serialize_with = "ser_f64")]
    pub d_n: f64,
    /// `sup |q_n e^{n V} / K_1 - 1|` over grid points with `|K_1| > 0.5`.
    #[serde(serialize_with = "ser_f64")]
    pub sup_dev: f64,
    #[serde(serialize_with = "ser_f64")]
    pub min_ratio: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub records: Vec<DecayRecord>,
    /// Values of `n` dropped because `2(1-a)n/kappa` is not an integer.
    pub skipped: Vec<usize>,
    /// Least-squares slope of `log d_n` against `n`.
    #[serde(serialize_with = "ser_f64")]
    pub fitted_slope: f64,
}

impl DecayReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].d_n < w[0].d_n)
    }
}

const ENVELOPE_GRID: usize = 512;
const ENVELOPE_EDGE: f64 = 0.95;

/// Compares zeros of `q_{mu_n, n}` with the phase nodes and `q_{mu_n, n}` with
/// the envelope `K_1 e^{-n V^nu}` for each `n` on the integrality lattice.
pub fn compare_asymptotics(
    em: &EquilibriumMeasure,
    n_list: &[usize],
    opts: &StieltjesOptions,
) -> Result<DecayReport> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let pf = PhaseFunction::new(em.clone());
    for &n in n_list {
        let pp = match PositivePolynomial::for_degree(em, n) {
            Ok(pp) => pp,
            Err(Error::NotInLattice { .. }) => {
                skipped.push(n);
                continue;
            }
            Err(e) => return Err(e),
        };
        let rc = stieltjes_recurrence(&pp, n, opts)?;
        let gauss = gauss_rule_from_recurrence(&rc, n)?;
        let phase = phase_nodes(&pf, n)?;
        let d_n = gauss
            .nodes
            .iter()
            .zip(phase.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);

        let env = AsymptoticEnvelope::new(em.clone(), n);
        let mut ratios = Vec::new();
        for i in 0..ENVELOPE_GRID {
            let x = -ENVELOPE_EDGE + 2.0 * ENVELOPE_EDGE * i as f64 / (ENVELOPE_GRID - 1) as f64;
            let k1 = env.k1(x)?;
            if k1.abs() <= 0.5 {
                continue;
            }
            let (lq, sign) = rc.monic_log_abs(n, x);
            let v = em.potential_on_interval(x)?;
            ratios.push(sign * (lq + n as f64 * v).exp() / k1);
        }
        let sup_dev = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
        records.push(DecayRecord {
            n,
            d_n,
            sup_dev,
            min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    if records.len() < 3 {
        return Err(Error::InsufficientData(records.len()));
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.n as f64, r.d_n.max(1e-300).ln()))
        .collect();
    Ok(DecayReport {
        records,
        skipped,
        fitted_slope: least_squares_slope(&pts),
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DiscreteMeasure;
    use num_complex::Complex64;
    use num_rational::Rational64;
    use std::f64::consts::PI;

    fn em(a: Rational64, zeta: f64) -> EquilibriumMeasure {
        EquilibriumMeasure::new(a, DiscreteMeasure::point_mass(zeta).unwrap()).unwrap()
    }

    #[test]
    fn chebyshev_recurrence() {
        let rc =
            stieltjes_recurrence(&PositivePolynomial::constant(), 8, &Default::default()).unwrap();
        assert_eq!(rc.len(), 9);
        assert!((rc.mass() - 1.0).abs() < 1e-14);
        assert!(rc.alpha.iter().all(|a| a.abs() < 1e-13));
        assert!((rc.beta[1] - 0.5).abs() < 1e-12);
        assert!(rc.beta[2..].iter().all(|b| (b - 0.25).abs() < 1e-12));
    }

    #[test]
    fn coefficients_stable_under_doubling() {
        let sigma = DiscreteMeasure::point_mass(3.0).unwrap();
        let pp = PositivePolynomial::new(&sigma, 2);
        let a = discretized_stieltjes(&pp, 4, 200).unwrap();
        let b = discretized_stieltjes(&pp, 4, 400).unwrap();
        assert!(coefficient_change(&a, &b) < 1e-12);
    }

    #[test]
    fn even_measure_has_zero_alpha() {
        let sigma = DiscreteMeasure::new(vec![Complex64::new(3.0, 0.0), Complex64::new(-3.0, 0.0)])
            .unwrap();
        let pp = PositivePolynomial::new(&sigma, 3);
        let rc = stieltjes_recurrence(&pp, 12, &Default::default()).unwrap();
        assert!(rc.alpha.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn gauss_chebyshev_from_recurrence() {
        let rc =
            stieltjes_recurrence(&PositivePolynomial::constant(), 3, &Default::default()).unwrap();
        let g = gauss_rule_from_recurrence(&rc, 3).unwrap();
        let s = 3f64.sqrt() / 2.0;
        for (x, e) in g.nodes.iter().zip([-s, 0.0, s]) {
            assert!((x - e).abs() < 1e-14);
        }
        assert!(g.weights.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-14));
        let g1 = gauss_rule_from_recurrence(&rc, 1).unwrap();
        assert_eq!(g1.nodes, vec![rc.alpha[0]]);
        assert!((g1.weights[0] - rc.mass()).abs() < 1e-15);
        assert!(gauss_rule_from_recurrence(&rc, 5).is_err());
    }

    #[test]
    fn zeros_interlace_and_stay_inside() {
        let e = em(Rational64::new(1, 2), 3.0);
        let pp = PositivePolynomial::for_degree(&e, 16).unwrap();
        let rc = stieltjes_recurrence(&pp, 16, &Default::default()).unwrap();
        let mut prev = gauss_rule_from_recurrence(&rc, 1).unwrap().nodes;
        for k in 2..=16 {
            let cur = gauss_rule_from_recurrence(&rc, k).unwrap().nodes;
            assert!(cur.iter().all(|x| x.abs() < 1.0));
            for i in 0..k - 1 {
                assert!(cur[i] < prev[i] && prev[i] < cur[i + 1]);
            }
            prev = cur;
        }
    }

    #[test]
    fn orthogonality_residuals() {
        let e = em(Rational64::new(1, 4), 3.0);
        for n in [2usize, 4, 8, 12, 16] {
            let pp = PositivePolynomial::for_degree(&e, n).unwrap();
            let rc = stieltjes_recurrence(&pp, n, &Default::default()).unwrap();
            // Independent discretization: 3000-point Gauss–Chebyshev, weights 1/q.
            let t = gauss_chebyshev_nodes(3000);
            let w: Vec<f64> = t.iter().map(|&x| 1.0 / pp.value(x)).collect();
            let qn: Vec<f64> = t.iter().map(|&x| rc.eval_monic(n, x)).collect();
            let norm: f64 = (0..t.len()).map(|i| w[i] * qn[i] * qn[i]).sum();
            for nu in 0..n {
                let ip: f64 = (0..t.len())
                    .map(|i| w[i] * qn[i] * t[i].powi(nu as i32))
                    .sum();
                assert!((ip / norm).abs() < 1e-8, "n={n} nu={nu}: {}", ip / norm);
            }
        }
    }

    #[test]
    fn envelope_values() {
        let env = AsymptoticEnvelope::new(EquilibriumMeasure::chebyshev(), 7);
        assert!((env.k1(1.0).unwrap() - 2.0).abs() < 1e-15);
        let x = ((PI) / 14.0).cos();
        assert!(env.k1(x).unwrap().abs() < 1e-13);
        assert!(env.k2(0.3).unwrap().abs() <= 1.0);

        let e = em(Rational64::new(1, 2), 3.0);
        let env = AsymptoticEnvelope::new(e, 16);
        let k: Vec<f64> = (0..512)
            .map(|i| -1.0 + 2.0 * i as f64 / 511.0)
            .map(|x| env.k1(x).unwrap())
            .collect();
        assert!(k.iter().all(|v| v.abs() <= 2.0));
        let changes = k
            .windows(2)
            .filter(|w| w[0].signum() != w[1].signum())
            .count();
        assert_eq!(changes, 16);
    }

    #[test]
    fn chebyshev_case_has_no_gap() {
        let rep = compare_asymptotics(
            &EquilibriumMeasure::chebyshev(),
            &[3, 5, 8, 13],
            &Default::default(),
        )
        .unwrap();
        assert!(rep.records.iter().all(|r| r.d_n < 1e-12));
        assert!(rep.records.iter().all(|r| r.sup_dev < 1e-10));
    }

    #[test]
    fn zeros_coincide_with_phase_nodes_for_finite_mass() {
        // dlambda_0 / q with deg q <= 2n is a Bernstein–Szegő measure: the
        // zeros of q_{mu_n, n} are exactly the phase nodes.
        let e = em(Rational64::new(1, 2), 3.0);
        let rep = compare_asymptotics(&e, &[4, 8, 12, 16, 20], &Default::default()).unwrap();
        for r in &rep.records {
            assert!(r.d_n < 1e-13, "n={} d_n={}", r.n, r.d_n);
            assert!(r.sup_dev < 1e-9, "n={} sup_dev={}", r.n, r.sup_dev);
            assert!(r.min_ratio > 0.5 && r.max_ratio < 2.0);
        }
    }

    #[test]
    fn lattice_filter_and_insufficient_data() {
        // a = 1/3, kappa = 1: 2(2/3)n integral only for n divisible by 3.
        let e = em(Rational64::new(1, 3), 3.0);
        let rep = compare_asymptotics(&e, &[3, 4, 6, 9], &Default::default()).unwrap();
        assert_eq!(rep.skipped, vec![4]);
        assert!(matches!(
            compare_asymptotics(&e, &[3, 4, 5], &Default::default()),
            Err(Error::InsufficientData(1))
        ));
    }

    #[test]
    fn slope_of_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        assert!((least_squares_slope(&pts) + 0.5).abs() < 1e-15);
    }
}
