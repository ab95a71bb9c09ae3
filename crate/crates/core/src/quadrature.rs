//! Quadrature rules for `lambda_0`: interpolatory weights on arbitrary nodes,
//! the positive rules `w_j = q(x_j) w~_j` built from the varying measure
//! `dlambda_0 / q`, exactness measurement and rule application.

use std::io::{Read, Write};

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{chebyshev_t_table, chebyshev_t_table_dd};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::format::{ser_opt, ser_vec, sig17};
use crate::integrate::KahanSum;
use crate::linalg::{norm1, DdLu};
use crate::measures::{DiscreteMeasure, EquilibriumMeasure};
use crate::nodes::NodeSet;
use crate::orthopoly::{gauss_rule_from_recurrence, stieltjes_recurrence, StieltjesOptions};

/// Condition estimates above this attach a warning to interpolatory weights.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleMeta {
    /// Exact `p/q`.
    pub a: Option<String>,
    /// Single real mass, when the source is one point.
    #[serde(serialize_with = "ser_opt", default)]
    pub zeta: Option<f64>,
    pub kind: String,
}

impl RuleMeta {
    pub fn new(kind: impl Into<String>) -> Self {
        RuleMeta {
            a: None,
            zeta: None,
            kind: kind.into(),
        }
    }

    pub fn for_measure(kind: impl Into<String>, em: &EquilibriumMeasure) -> Self {
        let zeta = match em.source().map(|s| s.points()) {
            Some([z]) if z.im == 0.0 => Some(z.re),
            _ => None,
        };
        RuleMeta {
            a: Some(em.a().to_string()),
            zeta,
            kind: kind.into(),
        }
    }
}

/// Nodes, weights and nominal degree of exactness `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    #[serde(serialize_with = "ser_vec")]
    nodes: Vec<f64>,
    #[serde(serialize_with = "ser_vec")]
    weights: Vec<f64>,
    m: i64,
    meta: RuleMeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolyaStatistics {
    pub sum_abs: f64,
    pub min_weight: f64,
    pub num_negative: usize,
}

impl QuadratureRule {
    /// Nodes must be finite, strictly increasing and inside `(-1, 1)`.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, m: i64, meta: RuleMeta) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if let Some(x) = nodes.iter().find(|x| !(x.abs() < 1.0)) {
            return Err(Error::Domain {
                value: *x,
                domain: "(-1, 1)",
            });
        }
        if let Some(i) = nodes.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::DuplicateNodes(i + 1));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite weight {w}")));
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            m,
            meta,
        })
    }

    /// The `n`-point Gauss–Chebyshev rule, weights `1/n`.
    pub fn gauss_chebyshev(n: usize) -> Self {
        let nodes = crate::integrate::gauss_chebyshev_nodes(n);
        QuadratureRule {
            nodes,
            weights: vec![1.0 / n as f64; n],
            m: 2 * n as i64 - 1,
            meta: RuleMeta {
                a: Some("1".into()),
                zeta: None,
                kind: "gauss-chebyshev".into(),
            },
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nominal_exactness(&self) -> i64 {
        self.m
    }

    pub fn meta(&self) -> &RuleMeta {
        &self.meta
    }

    /// `sum_j w_j f(x_j)`, compensated.
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let s: KahanSum = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        s.total()
    }

    /// Like [`apply`](Self::apply) for fallible integrands; the first error is returned.
    pub fn try_apply<E, F: FnMut(f64) -> std::result::Result<f64, E>>(
        &self,
        mut f: F,
    ) -> std::result::Result<f64, E> {
        let mut s = KahanSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(x)?);
        }
        Ok(s.total())
    }

    pub fn polya_statistics(&self) -> PolyaStatistics {
        PolyaStatistics {
            sum_abs: self
                .weights
                .iter()
                .map(|w| w.abs())
                .collect::<KahanSum>()
                .total(),
            min_weight: self.weights.iter().copied().fold(f64::INFINITY, f64::min),
            num_negative: self.weights.iter().filter(|w| **w < 0.0).count(),
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().copied().collect::<KahanSum>().total()
    }

    /// `|sum_j w_j T_k(x_j) - delta_{k0}|` for `k = 0..=kmax`.
    pub fn moment_residuals(&self, kmax: usize) -> Vec<f64> {
        let mut moments = vec![KahanSum::default(); kmax + 1];
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            for (acc, t) in moments.iter_mut().zip(chebyshev_t_table(x, kmax)) {
                acc.add(w * t);
            }
        }
        moments
            .iter()
            .enumerate()
            .map(|(k, m)| (m.total() - if k == 0 { 1.0 } else { 0.0 }).abs())
            .collect()
    }

    /// `1e-9 * sum_j |w_j|`.
    pub fn default_exactness_tol(&self) -> f64 {
        1e-9 * self.polya_statistics().sum_abs
    }

    /// Largest `m <= 2n - 1` with every moment residual up to degree `m` within
    /// `tol` (default [`default_exactness_tol`](Self::default_exactness_tol));
    /// `-1` if even the mass is off.
    pub fn exactness_degree(&self, tol: Option<f64>) -> i64 {
        let tol = tol.unwrap_or_else(|| self.default_exactness_tol());
        let kmax = 2 * self.len() - 1;
        self.moment_residuals(kmax)
            .iter()
            .position(|r| !(*r <= tol))
            .map_or(kmax as i64, |k| k as i64 - 1)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: QuadratureRule = serde_json::from_str(text)?;
        Self::new(raw.nodes, raw.weights, raw.m, raw.meta)
    }

    /// CSV with columns `j, x_j, w_j`, `j` starting at 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "x_j", "w_j"])?;
        for (j, (x, wt)) in self.nodes.iter().zip(&self.weights).enumerate() {
            w.write_record([(j + 1).to_string(), sig17(*x), sig17(*wt)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(input: R, m: i64, meta: RuleMeta) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad CSV row {rec:?}")))
            };
            nodes.push(parse(1)?);
            weights.push(parse(2)?);
        }
        Self::new(nodes, weights, m, meta)
    }
}

/// Interpolatory weights with the condition estimate of the moment system.
#[derive(Clone, Debug)]
pub struct InterpolatoryWeights {
    pub weights: Vec<f64>,
    /// The same weights before rounding to `f64`.
    pub extended: Vec<Dd>,
    /// 1-norm condition estimate of the Chebyshev–Vandermonde matrix.
    pub condition_estimate: f64,
}

impl InterpolatoryWeights {
    pub fn warning(&self) -> Option<String> {
        (self.condition_estimate > CONDITION_WARNING).then(|| {
            format!(
                "moment system is ill-conditioned (estimate {:e})",
                self.condition_estimate
            )
        })
    }
}

/// Solves `sum_j w_j T_k(x_j) = delta_{k0}`, `k < n`, in double-double with
/// partial pivoting, using the extended node values.
pub fn interpolatory_weights(nodes: &NodeSet) -> Result<InterpolatoryWeights> {
    nodes.validate()?;
    let n = nodes.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no nodes".into()));
    }
    let mut a = vec![Dd::ZERO; n * n];
    for (j, &x) in nodes.extended().iter().enumerate() {
        for (k, t) in chebyshev_t_table_dd(x, n - 1).into_iter().enumerate() {
            a[k * n + j] = t;
        }
    }
    let anorm = norm1(n, &a);
    let lu = DdLu::factor(n, a)?;
    let mut rhs = vec![Dd::ZERO; n];
    rhs[0] = Dd::ONE;
    let w = lu.solve(&rhs);
    Ok(InterpolatoryWeights {
        weights: w.iter().map(|v| v.to_f64()).collect(),
        extended: w,
        condition_estimate: anorm * lu.inverse_norm1_estimate(),
    })
}

/// Interpolatory rule on `nodes` (nominal exactness `n - 1`).
pub fn interpolatory_rule(nodes: &NodeSet, meta: RuleMeta) -> Result<(QuadratureRule, f64)> {
    let iw = interpolatory_weights(nodes)?;
    let rule = QuadratureRule::new(nodes.to_vec(), iw.weights, nodes.len() as i64 - 1, meta)?;
    Ok((rule, iw.condition_estimate))
}

/// `q(x) = prod_k |x - zeta_k|^e`, positive on `[-1, 1]`, evaluated in log space.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivePolynomial {
    roots: Vec<Complex64>,
    exponent: u32,
}

impl PositivePolynomial {
    pub fn new(sigma: &DiscreteMeasure, exponent: u32) -> Self {
        PositivePolynomial {
            roots: sigma.points().to_vec(),
            exponent,
        }
    }

    /// `q = 1`.
    pub fn constant() -> Self {
        PositivePolynomial {
            roots: Vec::new(),
            exponent: 0,
        }
    }

    /// The polynomial of degree `2(1-a)n` for `em`; errors unless the exponent
    /// `2(1-a)n/kappa` is an integer.
    pub fn for_degree(em: &EquilibriumMeasure, n: usize) -> Result<Self> {
        let one_minus_a = Rational64::from_integer(1) - em.a();
        let Some(sigma) = em.source() else {
            return Ok(Self::constant());
        };
        let e = Rational64::from_integer(2 * n as i64) * one_minus_a
            / Rational64::from_integer(sigma.kappa() as i64);
        if !e.is_integer() {
            return Err(Error::NotInLattice {
                n,
                numer: *e.numer(),
                denom: *e.denom(),
            });
        }
        let e = u32::try_from(e.to_integer())
            .map_err(|_| Error::InvalidParameter(format!("exponent {e} too large")))?;
        Ok(Self::new(sigma, e))
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn degree(&self) -> usize {
        if self.exponent == 0 {
            0
        } else {
            self.roots.len() * self.exponent as usize
        }
    }

    /// `m(n) = 2n - 1 - deg q`.
    pub fn nominal_exactness(&self, n: usize) -> i64 {
        2 * n as i64 - 1 - self.degree() as i64
    }

    pub fn log_value(&self, x: f64) -> f64 {
        if self.exponent == 0 {
            return 0.0;
        }
        let s: f64 = self.roots.iter().map(|z| (x - z).norm().ln()).sum();
        self.exponent as f64 * s
    }

    pub fn value(&self, x: f64) -> f64 {
        self.log_value(x).exp()
    }

    /// Samples 1000 points of `[-1, 1]` and checks `q > 0` there.
    pub fn is_positive_on_interval(&self) -> bool {
        (0..1000)
            .map(|i| -1.0 + 2.0 * i as f64 / 999.0)
            .all(|x| self.log_value(x).is_finite())
    }
}

/// The rule `w_j = q(x_j) w~_j` on the Gaussian nodes of `dlambda_0 / q`.
pub fn varying_measure_weights(
    pp: &PositivePolynomial,
    n: usize,
    opts: &StieltjesOptions,
) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let rc = stieltjes_recurrence(pp, n, opts)?;
    let g = gauss_rule_from_recurrence(&rc, n)?;
    let weights = g
        .nodes
        .iter()
        .zip(&g.log_weights)
        .map(|(&x, lw)| (pp.log_value(x) + lw).exp())
        .collect();
    QuadratureRule::new(
        g.nodes,
        weights,
        pp.nominal_exactness(n),
        RuleMeta::new("varying-measure"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::{chebyshev_nodes, phase_nodes, PhaseFunction};

    fn em(a: Rational64, zeta: f64) -> EquilibriumMeasure {
        EquilibriumMeasure::new(a, DiscreteMeasure::point_mass(zeta).unwrap()).unwrap()
    }

    // Oracle: integrate each Lagrange basis polynomial with a 2000-point
    // Gauss–Chebyshev rule.
    fn lagrange_weights(x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                crate::integrate::gauss_chebyshev(
                    |t| {
                        x.iter()
                            .enumerate()
                            .filter(|(i, _)| *i != j)
                            .map(|(_, &xi)| (t - xi) / (x[j] - xi))
                            .product()
                    },
                    2000,
                )
            })
            .collect()
    }

    #[test]
    fn chebyshev_nodes_give_equal_weights() {
        let x = chebyshev_nodes(4);
        let iw = interpolatory_weights(&x).unwrap();
        assert!(iw.weights.iter().all(|w| (w - 0.25).abs() < 1e-15));
        assert!(iw.warning().is_none());
        for (a, b) in iw.weights.iter().zip(lagrange_weights(&x)) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn single_node_and_palindromes() {
        let iw = interpolatory_weights(&NodeSet::from_f64(vec![0.0])).unwrap();
        assert_eq!(iw.weights, vec![1.0]);
        let x = NodeSet::from_f64(vec![-0.9, -0.4, 0.0, 0.4, 0.9]);
        let w = interpolatory_weights(&x).unwrap().weights;
        for i in 0..5 {
            assert!((w[i] - w[4 - i]).abs() < 1e-15);
        }
        for (a, b) in w.iter().zip(lagrange_weights(&x)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let x = NodeSet::from_f64(vec![-0.5, 0.1, 0.1]);
        assert!(matches!(
            interpolatory_weights(&x),
            Err(Error::DuplicateNodes(2))
        ));
        let x = NodeSet::from_f64(vec![-1.0, 0.1]);
        assert!(interpolatory_weights(&x).is_err());
    }

    #[test]
    fn ill_conditioned_nodes_carry_a_warning() {
        // Clustered nodes make the moment system nearly singular.
        let x = NodeSet::from_f64((0..40).map(|i| 0.5 + 1e-3 * i as f64).collect());
        let iw = interpolatory_weights(&x).unwrap();
        assert!(iw.warning().is_some());
    }

    #[test]
    fn gauss_chebyshev_exactness_and_corruption() {
        let r = QuadratureRule::gauss_chebyshev(4);
        assert_eq!(r.exactness_degree(Some(1e-10)), 7);
        let brute = r.moment_residuals(8);
        assert!(brute[..8].iter().all(|v| *v < 1e-15));
        assert!(brute[8] > 0.5);
        let mut w = r.weights().to_vec();
        w[1] += 1e-3;
        let bad = QuadratureRule::new(r.nodes().to_vec(), w, 7, RuleMeta::new("corrupt")).unwrap();
        assert_eq!(bad.exactness_degree(Some(1e-10)), -1);
    }

    #[test]
    fn apply_examples() {
        let r = QuadratureRule::gauss_chebyshev(6);
        assert!((r.apply(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!(r.apply(|x| x).abs() < 1e-16);
        assert!(r.apply(|x| 2.0 * x * x - 1.0).abs() < 1e-15);
        let e: std::result::Result<f64, &str> =
            r.try_apply(|x| if x > 0.5 { Err("boom") } else { Ok(x) });
        assert_eq!(e, Err("boom"));
    }

    #[test]
    fn polya_examples() {
        let r =
            QuadratureRule::new(vec![-0.5, 0.5], vec![1.5, -0.5], 0, RuleMeta::new("t")).unwrap();
        let p = r.polya_statistics();
        assert_eq!(p.sum_abs, 2.0);
        assert_eq!(p.num_negative, 1);
        assert_eq!(p.min_weight, -0.5);
        let p = QuadratureRule::gauss_chebyshev(5).polya_statistics();
        assert!((p.sum_abs - 1.0).abs() < 1e-15 && p.num_negative == 0);
    }

    #[test]
    fn half_family_phase_nodes_have_positive_weights() {
        let pf = PhaseFunction::new(em(Rational64::new(1, 2), 3.0));
        for n in [8, 16, 32, 64] {
            let x = phase_nodes(&pf, n).unwrap();
            let w = interpolatory_weights(&x).unwrap().weights;
            assert!(w.iter().all(|v| *v > 0.0), "n={n}");
        }
    }

    #[test]
    fn varying_rule_with_constant_q_is_gauss_chebyshev() {
        let r = varying_measure_weights(&PositivePolynomial::constant(), 6, &Default::default())
            .unwrap();
        let gc = QuadratureRule::gauss_chebyshev(6);
        for i in 0..6 {
            assert!((r.nodes()[i] - gc.nodes()[i]).abs() < 1e-14);
            assert!((r.weights()[i] - 1.0 / 6.0).abs() < 1e-14);
        }
        assert_eq!(r.nominal_exactness(), 11);
    }

    #[test]
    fn varying_rule_half_zeta3_n4() {
        let pp = PositivePolynomial::for_degree(&em(Rational64::new(1, 2), 3.0), 4).unwrap();
        assert_eq!(pp.exponent(), 4);
        assert!(pp.is_positive_on_interval());
        let r = varying_measure_weights(&pp, 4, &Default::default()).unwrap();
        assert!(r.weights().iter().all(|w| *w > 0.0));
        assert!((r.weight_sum() - 1.0).abs() < 1e-10);
        assert_eq!(r.nominal_exactness(), 3);
        assert!(r.exactness_degree(Some(1e-9)) >= 3);
    }

    #[test]
    fn duality_of_constructions() {
        for a in [Rational64::new(1, 2), Rational64::new(3, 4)] {
            let e = em(a, 3.0);
            for n in (4..=24).step_by(4) {
                let pp = PositivePolynomial::for_degree(&e, n).unwrap();
                let r = varying_measure_weights(&pp, n, &Default::default()).unwrap();
                let iw = interpolatory_weights(&NodeSet::from_f64(r.nodes().to_vec())).unwrap();
                for (u, v) in r.weights().iter().zip(&iw.weights) {
                    assert!((u - v).abs() < 1e-8, "a={a} n={n}");
                }
            }
        }
    }

    #[test]
    fn lattice_condition() {
        let e = em(Rational64::new(1, 3), 3.0);
        assert!(matches!(
            PositivePolynomial::for_degree(&e, 4),
            Err(Error::NotInLattice {
                n: 4,
                numer: 16,
                denom: 3
            })
        ));
        let pp = PositivePolynomial::for_degree(&e, 6).unwrap();
        assert_eq!(pp.exponent(), 8);
        assert_eq!(pp.nominal_exactness(6), 3);
        let pp = PositivePolynomial::for_degree(&EquilibriumMeasure::chebyshev(), 5).unwrap();
        assert_eq!(pp.degree(), 0);
    }

    #[test]
    fn reversed_nodes_give_reversed_weights() {
        let vals = vec![-0.7, -0.2, 0.1, 0.5, 0.8];
        let w1 = interpolatory_weights(&NodeSet::from_f64(vals.clone()))
            .unwrap()
            .weights;
        let rev: Vec<f64> = vals.iter().rev().copied().collect();
        let w2 = interpolatory_weights(&NodeSet::from_f64(rev))
            .unwrap()
            .weights;
        assert_eq!(w1, w2);
    }

    #[test]
    fn json_and_csv_round_trip() {
        let pf = PhaseFunction::new(em(Rational64::new(1, 2), 3.0));
        let x = phase_nodes(&pf, 7).unwrap();
        let (rule, _) =
            interpolatory_rule(&x, RuleMeta::for_measure("phase-generic", pf.measure())).unwrap();
        let json = rule.to_json().unwrap();
        assert!(json.contains("\"zeta\": 3.0000000000000000e"), "{json}");
        let back = QuadratureRule::from_json(&json).unwrap();
        assert_eq!(back, rule);
        let mut buf = Vec::new();
        rule.write_csv(&mut buf).unwrap();
        let back = QuadratureRule::read_csv(
            buf.as_slice(),
            rule.nominal_exactness(),
            rule.meta().clone(),
        )
        .unwrap();
        assert_eq!(back, rule);
    }
}
