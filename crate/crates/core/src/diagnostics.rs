//! Convergence studies over `n`: Pólya statistics, measured exactness,
//! integration errors against a reference rule, and the distance between the
//! node counting measure and the equilibrium measure.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::format::{ser_f64, sig17};
use crate::integrate::gauss_chebyshev;
use crate::measures::EquilibriumMeasure;
use crate::nodes::NodeScheme;
use crate::quadrature::{interpolatory_rule, PositivePolynomial, RuleMeta};

/// Points of the Gauss–Chebyshev rule used for reference integrals.
pub const REFERENCE_POINTS: usize = 10_000;
/// Grid size for [`weak_star_distance`].
pub const WEAK_STAR_GRID: usize = 2048;
/// `sum |w|` above `1 + POLYA_SLACK` counts as a Pólya violation.
pub const POLYA_SLACK: f64 = 1e-6;
/// Errors at or below this level count as converged.
pub const ERROR_FLOOR: f64 = 1e-12;

/// A named continuous function on `[-1, 1]`.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Integrand {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Integrand {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// `exp(x)`, `1/(1 + 25x^2)` and `|x|`.
    pub fn standard_set() -> Vec<Integrand> {
        vec![
            Integrand::new("exp", f64::exp),
            Integrand::new("runge", |x| 1.0 / (1.0 + 25.0 * x * x)),
            Integrand::new("abs", f64::abs),
        ]
    }

    /// `int f dlambda_0` by the reference rule.
    pub fn reference(&self) -> f64 {
        gauss_chebyshev(|x| self.eval(x), REFERENCE_POINTS)
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegrandError {
    pub name: String,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub reference: f64,
    #[serde(serialize_with = "ser_f64")]
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyRecord {
    pub n: usize,
    #[serde(serialize_with = "ser_f64")]
    pub sum_abs_weights: f64,
    #[serde(serialize_with = "ser_f64")]
    pub weight_sum: f64,
    #[serde(serialize_with = "ser_f64")]
    pub min_weight: f64,
    pub num_negative: usize,
    pub measured_exactness: i64,
    /// `n - 1`, the exactness of any interpolatory rule.
    pub nominal_exactness: i64,
    /// `2an - 1` when `n` is on the integrality lattice of the scheme's measure.
    pub varying_exactness: Option<i64>,
    pub errors: Vec<IntegrandError>,
    #[serde(serialize_with = "ser_f64")]
    pub cdf_distance: f64,
    #[serde(serialize_with = "ser_f64")]
    pub phase_deviation: f64,
    #[serde(serialize_with = "ser_f64")]
    pub condition_estimate: f64,
}

impl StudyRecord {
    pub fn error_for(&self, name: &str) -> Option<f64> {
        self.errors.iter().find(|e| e.name == name).map(|e| e.error)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyFailure {
    pub n: usize,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    /// `max_n sum |w| <= 1 + POLYA_SLACK`.
    pub polya_bounded: bool,
    #[serde(serialize_with = "ser_f64")]
    pub max_sum_abs: f64,
    /// Smallest `n` from which every record has only positive weights.
    pub positive_from: Option<usize>,
    pub all_positive_beyond_n: bool,
    /// For every integrand, the error at the largest `n` is below the error at
    /// the smallest `n` or at the floor [`ERROR_FLOOR`].
    pub errors_decreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub records: Vec<StudyRecord>,
    pub failures: Vec<StudyFailure>,
    pub verdicts: Verdicts,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.verdicts.polya_bounded
            && self.verdicts.all_positive_beyond_n
            && self.verdicts.errors_decreasing
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per `(n, integrand)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "integrand",
            "value",
            "reference",
            "error",
            "sum_abs_weights",
            "min_weight",
            "num_negative",
            "measured_exactness",
            "nominal_exactness",
            "cdf_distance",
            "phase_deviation",
            "condition_estimate",
        ])?;
        for r in &self.records {
            for e in &r.errors {
                w.write_record([
                    r.n.to_string(),
                    e.name.clone(),
                    sig17(e.value),
                    sig17(e.reference),
                    sig17(e.error),
                    sig17(r.sum_abs_weights),
                    sig17(r.min_weight),
                    r.num_negative.to_string(),
                    r.measured_exactness.to_string(),
                    r.nominal_exactness.to_string(),
                    sig17(r.cdf_distance),
                    sig17(r.phase_deviation),
                    sig17(r.condition_estimate),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `sup_x |#{j : x_j >= x}/n - nu([x, 1])|` over a uniform grid of
/// [`WEAK_STAR_GRID`] points of `[-1, 1]`.
pub fn weak_star_distance(nodes: &[f64], em: &EquilibriumMeasure) -> Result<f64> {
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for i in 0..WEAK_STAR_GRID {
        let x = -1.0 + 2.0 * i as f64 / (WEAK_STAR_GRID - 1) as f64;
        let below = sorted.partition_point(|&t| t < x);
        let empirical = (sorted.len() - below) as f64 / n;
        sup = sup.max((empirical - em.cdf(x)?).abs());
    }
    Ok(sup)
}

fn study_one(
    scheme: &NodeScheme,
    n: usize,
    integrands: &[(Integrand, f64)],
) -> Result<StudyRecord> {
    let nodes = scheme.generate(n)?;
    let em = scheme.measure();
    let (rule, condition) =
        interpolatory_rule(&nodes, RuleMeta::for_measure(scheme.kind().to_string(), em))?;
    let polya = rule.polya_statistics();
    let errors = integrands
        .iter()
        .map(|(f, reference)| {
            let value = rule.apply(|x| f.eval(x));
            IntegrandError {
                name: f.name().to_string(),
                value,
                reference: *reference,
                error: (value - reference).abs(),
            }
        })
        .collect();
    let varying_exactness = PositivePolynomial::for_degree(em, n)
        .ok()
        .map(|pp| pp.nominal_exactness(n));
    Ok(StudyRecord {
        n,
        sum_abs_weights: polya.sum_abs,
        weight_sum: rule.weight_sum(),
        min_weight: polya.min_weight,
        num_negative: polya.num_negative,
        measured_exactness: rule.exactness_degree(None),
        nominal_exactness: rule.nominal_exactness(),
        varying_exactness,
        errors,
        cdf_distance: weak_star_distance(&nodes, em)?,
        phase_deviation: scheme.admissibility(&nodes)?.max_deviation,
        condition_estimate: condition,
    })
}

fn verdicts(records: &[StudyRecord]) -> Verdicts {
    let max_sum_abs = records
        .iter()
        .map(|r| r.sum_abs_weights)
        .fold(0.0, f64::max);
    let positive_from = records
        .iter()
        .rposition(|r| r.num_negative > 0)
        .map_or(records.first().map(|r| r.n), |i| {
            records.get(i + 1).map(|r| r.n)
        });
    let errors_decreasing = match (records.first(), records.last()) {
        (Some(first), Some(last)) if records.len() >= 2 => first.errors.iter().all(|e0| {
            last.error_for(&e0.name)
                .is_some_and(|e1| e1 < e0.error || e1 <= ERROR_FLOOR)
        }),
        _ => false,
    };
    Verdicts {
        polya_bounded: !records.is_empty() && max_sum_abs <= 1.0 + POLYA_SLACK,
        max_sum_abs,
        positive_from,
        all_positive_beyond_n: positive_from.is_some(),
        errors_decreasing,
    }
}

/// Runs `scheme` for every `n`, in parallel. Errors at a given `n` are
/// recorded in [`ConvergenceReport::failures`] and the study continues.
pub fn run_study(
    scheme: &NodeScheme,
    n_values: &[usize],
    integrands: &[Integrand],
) -> ConvergenceReport {
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let with_refs: Vec<(Integrand, f64)> = integrands
        .iter()
        .map(|f| (f.clone(), f.reference()))
        .collect();
    let outcomes: Vec<(usize, Result<StudyRecord>)> = ns
        .par_iter()
        .map(|&n| (n, study_one(scheme, n, &with_refs)))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (n, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(StudyFailure {
                n,
                message: e.to_string(),
            }),
        }
    }
    let verdicts = verdicts(&records);
    ConvergenceReport {
        scheme: scheme.label(),
        records,
        failures,
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DiscreteMeasure;
    use crate::nodes::{chebyshev_nodes, phase_nodes, ClosedFormFamily, PhaseFunction};
    use num_rational::Rational64;

    fn em(a: Rational64, zeta: f64) -> EquilibriumMeasure {
        EquilibriumMeasure::new(a, DiscreteMeasure::point_mass(zeta).unwrap()).unwrap()
    }

    #[test]
    fn chebyshev_scheme_converges_fast_on_exp() {
        let s = NodeScheme::closed_form(ClosedFormFamily::One, 3.0).unwrap();
        let f = vec![
            Integrand::new("exp", f64::exp),
            Integrand::new("one", |_| 1.0),
        ];
        let rep = run_study(&s, &[16, 4, 8], &f);
        assert_eq!(
            rep.records.iter().map(|r| r.n).collect::<Vec<_>>(),
            vec![4, 8, 16]
        );
        let e: Vec<f64> = rep
            .records
            .iter()
            .map(|r| r.error_for("exp").unwrap())
            .collect();
        assert!(e[0] > e[1] && e[2] < 1e-12);
        assert!(rep
            .records
            .iter()
            .all(|r| r.error_for("one").unwrap() <= 1e-10));
        // I_0(1) from the reference rule.
        assert!((rep.records[0].errors[0].reference - 1.2660658777520082).abs() < 1e-14);
        assert!(rep.passed());
    }

    #[test]
    fn half_family_runge_study() {
        let s = NodeScheme::closed_form(ClosedFormFamily::Half, 3.0).unwrap();
        let rep = run_study(
            &s,
            &[8, 16, 32, 64],
            &[Integrand::standard_set()[1].clone()],
        );
        assert!(rep.records.iter().all(|r| r.num_negative == 0));
        let first = rep.records[0].error_for("runge").unwrap();
        let last = rep.records[3].error_for("runge").unwrap();
        assert!(last < first);
        assert_eq!(rep.verdicts.positive_from, Some(8));
        assert!(rep
            .records
            .iter()
            .all(|r| r.varying_exactness == Some(r.n as i64 - 1)));
    }

    #[test]
    fn weak_star_examples() {
        for n in [5, 17, 40] {
            let d =
                weak_star_distance(&chebyshev_nodes(n), &EquilibriumMeasure::chebyshev()).unwrap();
            assert!(d <= 0.5 / n as f64 + 1e-12, "n={n} d={d}");
            let e = em(Rational64::new(1, 3), 3.0);
            let x = phase_nodes(&PhaseFunction::new(e.clone()), n).unwrap();
            assert!(weak_star_distance(&x, &e).unwrap() <= 0.5 / n as f64 + 1e-12);
        }
        let wrong = weak_star_distance(&chebyshev_nodes(64), &em(Rational64::from_integer(0), 3.0))
            .unwrap();
        assert!(wrong > 0.1, "{wrong}");
    }

    // Oracle for the weak-* distance: exact supremum over the jump points.
    #[test]
    fn weak_star_matches_brute_force_on_fine_grid() {
        let e = em(Rational64::new(1, 2), 3.0);
        let x = chebyshev_nodes(9);
        let d = weak_star_distance(&x, &e).unwrap();
        let mut brute: f64 = 0.0;
        for i in 0..WEAK_STAR_GRID {
            let t = -1.0 + 2.0 * i as f64 / (WEAK_STAR_GRID - 1) as f64;
            let count = x.iter().filter(|&&v| v >= t).count() as f64 / 9.0;
            brute = brute.max((count - e.cdf(t).unwrap()).abs());
        }
        assert_eq!(d, brute);
    }

    #[test]
    fn equally_spaced_control_is_flagged() {
        let s = NodeScheme::equally_spaced(EquilibriumMeasure::chebyshev());
        let rep = run_study(&s, &[8, 16, 32, 64], &Integrand::standard_set());
        assert!(rep
            .records
            .iter()
            .any(|r| r.num_negative > 0 || r.sum_abs_weights > 1.0 + POLYA_SLACK));
        assert!(!rep.passed());
        assert!(rep.records.iter().all(|r| r.phase_deviation > 1e-3));
    }

    #[test]
    fn stage_errors_are_recorded_and_study_continues() {
        // Perturbation budget too large at small n only.
        let s = NodeScheme::phase(em(Rational64::new(1, 2), 3.0))
            .with_perturbation(1.0, 0.5, 1)
            .unwrap();
        let rep = run_study(&s, &[2, 30], &Integrand::standard_set());
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(rep.failures[0].n, 2);
        assert_eq!(rep.records.len(), 1);
        assert!(!rep.passed());
    }

    #[test]
    fn report_serializations() {
        let s = NodeScheme::closed_form(ClosedFormFamily::Zero, 3.0).unwrap();
        let rep = run_study(&s, &[4, 8], &Integrand::standard_set());
        let json = rep.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 2);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 3);
    }
}
