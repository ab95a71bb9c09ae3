//! Node systems satisfying the phase condition
//! `|Phi(x_j) - (2(n-j)+1) pi/(2n)| <= A e^{-l n}`, where `Phi = pi nu([x, 1])`.
//!
//! Nodes are generated either by solving the phase equation for an arbitrary
//! equilibrium measure, or from the closed forms available for one real mass
//! `zeta > 2` and `a in {0, 1/2, 1}`. Both routes return a [`NodeSet`] that
//! carries double-double values alongside the `f64` nodes.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, EquilibriumMeasure};

/// Slack added to the budget `A e^{-l n}` in [`admissibility_check`] to absorb
/// rounding in the phase evaluation.
pub const PHASE_SLACK: f64 = 1e-12;

const SOLVER_TOL: f64 = 1e-13;
const SOLVER_MAX_ITER: usize = 200;

/// Ordered nodes with a double-double shadow of each value.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    values: Vec<f64>,
    extended: Vec<Dd>,
}

impl NodeSet {
    /// Sorts ascending. The values must be finite.
    pub fn from_extended(mut extended: Vec<Dd>) -> Self {
        extended.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
        let values = extended.iter().map(|x| x.to_f64()).collect();
        NodeSet { values, extended }
    }

    pub fn from_f64(values: Vec<f64>) -> Self {
        Self::from_extended(values.into_iter().map(Dd::from_f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn extended(&self) -> &[Dd] {
        &self.extended
    }

    /// Checks strict increase and containment in `(-1, 1)`.
    pub fn validate(&self) -> Result<()> {
        if let Some(x) = self.values.iter().find(|x| !(x.abs() < 1.0)) {
            return Err(Error::Domain {
                value: *x,
                domain: "(-1, 1)",
            });
        }
        if let Some(i) = self.extended.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::DuplicateNodes(i + 1));
        }
        Ok(())
    }

    /// Strict interlacing `y_1 < x_1 < y_2 < ... < x_{n-1} < y_n` of `self`
    /// (`n - 1` nodes) with `other` (`n` nodes).
    pub fn interlaces(&self, other: &NodeSet) -> bool {
        other.len() == self.len() + 1
            && self
                .values
                .iter()
                .enumerate()
                .all(|(i, &x)| other.values[i] < x && x < other.values[i + 1])
    }
}

impl Deref for NodeSet {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// `Phi(x) = pi nu([x, 1])`, strictly decreasing from `pi` at `-1` to `0` at `1`.
#[derive(Clone, Debug)]
pub struct PhaseFunction {
    em: EquilibriumMeasure,
    a_dd: Dd,
}

impl PhaseFunction {
    pub fn new(em: EquilibriumMeasure) -> Self {
        let a = em.a();
        let a_dd = Dd::from_f64(*a.numer() as f64) / Dd::from_f64(*a.denom() as f64);
        PhaseFunction { em, a_dd }
    }

    pub fn measure(&self) -> &EquilibriumMeasure {
        &self.em
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(PI * self.em.cdf(x)?)
    }

    /// `Phi'(x) = -pi nu'(x)` on `(-1, 1)`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(-PI * self.em.density(x)?)
    }

    /// `Phi(cos theta)`, increasing in `theta`.
    pub fn value_at_angle(&self, theta: f64) -> f64 {
        PI * self.em.cdf_at_angle(theta)
    }

    pub fn derivative_at_angle(&self, theta: f64) -> f64 {
        PI * self.em.angular_density(theta)
    }

    fn value_and_derivative_dd(&self, theta: Dd) -> (Dd, Dd) {
        let arcsine = (theta * self.a_dd, self.a_dd);
        match self.em.balayage() {
            Some(b) => {
                let w = Dd::ONE - self.a_dd;
                let (p, dp) = b.series().phase_and_derivative(theta);
                (arcsine.0 + w * p, arcsine.1 + w * dp)
            }
            None => arcsine,
        }
    }

    /// Target phase `(2(n-j)+1) pi/(2n)` of the `j`-th smallest node, `1 <= j <= n`.
    pub fn target(n: usize, j: usize) -> f64 {
        Self::target_dd(n, j).to_f64()
    }

    fn target_dd(n: usize, j: usize) -> Dd {
        Dd::PI * ((2 * (n - j) + 1) as f64) / ((2 * n) as f64)
    }

    /// Solves `Phi(cos theta) = target` for `theta`.
    fn solve_angle(&self, target: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, PI);
        let mut theta = target;
        for _ in 0..SOLVER_MAX_ITER {
            let f = self.value_at_angle(theta) - target;
            if f.abs() < SOLVER_TOL {
                break;
            }
            if f > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            let step = f / self.derivative_at_angle(theta);
            let newton = theta - step;
            theta = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if step.abs() < 1e-16 || hi - lo < 1e-16 {
                break;
            }
        }
        theta
    }
}

/// Solves `Phi(x_j) = (2(n-j)+1) pi/(2n)`, `j = 1..=n`; nodes ascending.
///
/// A safeguarded Newton iteration in `theta = arccos x` brings each node to the
/// solver tolerance in `f64`; two further Newton steps on the Fourier form of
/// the phase refine it to double-double.
pub fn phase_nodes(pf: &PhaseFunction, n: usize) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let exact = pf.em.balayage().is_none() || pf.em.a() == Rational64::from_integer(1);
    let nodes = (1..=n)
        .map(|j| {
            let target = PhaseFunction::target_dd(n, j);
            let theta = if exact {
                target
            } else {
                let mut th = Dd::from_f64(pf.solve_angle(target.to_f64()));
                for _ in 0..2 {
                    let (v, d) = pf.value_and_derivative_dd(th);
                    th -= (v - target) / d;
                }
                th
            };
            theta.cos()
        })
        .collect();
    Ok(NodeSet::from_extended(nodes))
}

/// Closed-form families for a single real mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedFormFamily {
    /// `a = 0`
    Zero,
    /// `a = 1/2`
    Half,
    /// `a = 1` (Chebyshev nodes)
    One,
}

impl ClosedFormFamily {
    pub fn from_a(a: Rational64) -> Result<Self> {
        if a == Rational64::from_integer(0) {
            Ok(ClosedFormFamily::Zero)
        } else if a == Rational64::new(1, 2) {
            Ok(ClosedFormFamily::Half)
        } else if a == Rational64::from_integer(1) {
            Ok(ClosedFormFamily::One)
        } else {
            Err(Error::InvalidParameter(format!(
                "no closed form for a = {a}; supported: 0, 1/2, 1"
            )))
        }
    }

    pub fn a(self) -> Rational64 {
        match self {
            ClosedFormFamily::Zero => Rational64::from_integer(0),
            ClosedFormFamily::Half => Rational64::new(1, 2),
            ClosedFormFamily::One => Rational64::from_integer(1),
        }
    }
}

fn check_budget(amplitude: f64, rate: f64) -> Result<()> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "A = {amplitude} must be >= 0"
        )));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("ell = {rate} must be > 0")));
    }
    Ok(())
}

/// `A e^{-l n}`.
pub fn phase_budget(amplitude: f64, rate: f64, n: usize) -> f64 {
    amplitude * (-rate * n as f64).exp()
}

/// Nodes from the closed forms with `kappa_j = (2j-1) pi/(2n) + A e^{-l n}`:
///
/// * `a = 1`: `x = cos kappa`;
/// * `a = 1/2`: `x = (sin^2 kappa + cos kappa sqrt(phi^2 - sin^2 kappa)) / phi`;
/// * `a = 0`: `x = (1 + zeta cos kappa) / (zeta + cos kappa)`;
///
/// with `phi = zeta + sqrt(zeta^2 - 1)`. The angle shift must stay below
/// `pi/(2n)` so that the angles remain in `(0, pi)`.
pub fn closed_form_nodes(
    family: ClosedFormFamily,
    zeta: f64,
    n: usize,
    amplitude: f64,
    rate: f64,
) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(zeta > 2.0) || (family != ClosedFormFamily::One && !zeta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "closed forms need a real mass zeta > 2, got {zeta}"
        )));
    }
    check_budget(amplitude, rate)?;
    let shift = phase_budget(amplitude, rate, n);
    if shift >= PI / (2 * n) as f64 {
        return Err(Error::InvalidParameter(format!(
            "angle shift {shift:e} must be below pi/(2n) = {:e}",
            PI / (2 * n) as f64
        )));
    }
    let z = Dd::from_f64(zeta);
    let phi = if zeta.is_finite() {
        z + (z.sqr() - 1.0).sqrt()
    } else {
        Dd::ZERO
    };
    let nodes = (1..=n)
        .map(|j| {
            let kappa = Dd::PI * ((2 * j - 1) as f64) / ((2 * n) as f64) + shift;
            let (s, c) = kappa.sin_cos();
            match family {
                ClosedFormFamily::One => c,
                ClosedFormFamily::Half => {
                    let s2 = s.sqr();
                    (s2 + c * (phi.sqr() - s2).sqrt()) / phi
                }
                ClosedFormFamily::Zero => (z * c + 1.0) / (z + c),
            }
        })
        .collect();
    Ok(NodeSet::from_extended(nodes))
}

/// Adds independent uniform offsets in `[-A e^{-l n}, A e^{-l n}]`, seeded.
///
/// The budget must be below half the smallest gap between nodes and below the
/// distance of the outermost nodes to `+-1`.
pub fn perturb_nodes(
    nodes: &NodeSet,
    n: usize,
    amplitude: f64,
    rate: f64,
    seed: u64,
) -> Result<NodeSet> {
    check_budget(amplitude, rate)?;
    let budget = phase_budget(amplitude, rate, n);
    if budget == 0.0 {
        return Ok(nodes.clone());
    }
    let min_gap = nodes
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if budget >= 0.5 * min_gap {
        return Err(Error::InvalidParameter(format!(
            "perturbation budget {budget:e} exceeds half the minimal node gap {:e}",
            0.5 * min_gap
        )));
    }
    let margin = nodes
        .iter()
        .map(|x| 1.0 - x.abs())
        .fold(f64::INFINITY, f64::min);
    if budget >= margin {
        return Err(Error::InvalidParameter(format!(
            "perturbation budget {budget:e} would push a node out of (-1, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved = nodes
        .extended()
        .iter()
        .map(|&x| x + rng.random_range(-budget..=budget))
        .collect();
    Ok(NodeSet::from_extended(moved))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub max_deviation: f64,
    pub budget: f64,
    pub admissible: bool,
    /// `Phi(x_j) - target_j`, signed.
    pub deviations: Vec<f64>,
}

/// Measures `max_j |Phi(x_j) - (2(n-j)+1) pi/(2n)|` against `A e^{-l n}`.
pub fn admissibility_check(
    nodes: &[f64],
    pf: &PhaseFunction,
    amplitude: f64,
    rate: f64,
    n: usize,
) -> Result<AdmissibilityReport> {
    if nodes.len() != n {
        return Err(Error::InvalidParameter(format!(
            "expected {n} nodes, got {}",
            nodes.len()
        )));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let deviations = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| Ok(pf.value(x)? - PhaseFunction::target(n, i + 1)))
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = deviations.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let budget = phase_budget(amplitude, rate, n);
    Ok(AdmissibilityReport {
        max_deviation,
        budget,
        admissible: max_deviation <= budget + PHASE_SLACK,
        deviations,
    })
}

/// Open Newton–Cotes abscissas `-1 + 2j/(n+1)`.
pub fn equally_spaced_nodes(n: usize) -> NodeSet {
    NodeSet::from_extended(
        (1..=n)
            .map(|j| Dd::from_f64((2 * j) as f64) / ((n + 1) as f64) - 1.0)
            .collect(),
    )
}

/// Chebyshev nodes `cos((2j-1) pi/(2n))`.
pub fn chebyshev_nodes(n: usize) -> NodeSet {
    NodeSet::from_extended(
        (1..=n)
            .map(|j| (Dd::PI * ((2 * j - 1) as f64) / ((2 * n) as f64)).cos())
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    PhaseGeneric,
    ClosedFormA0,
    ClosedFormAHalf,
    ClosedFormA1,
    /// Negative control: equally spaced nodes, not admissible for any measure.
    EquallySpaced,
}

impl NodeKind {
    fn family(self) -> Option<ClosedFormFamily> {
        match self {
            NodeKind::ClosedFormA0 => Some(ClosedFormFamily::Zero),
            NodeKind::ClosedFormAHalf => Some(ClosedFormFamily::Half),
            NodeKind::ClosedFormA1 => Some(ClosedFormFamily::One),
            _ => None,
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::PhaseGeneric => "phase-generic",
            NodeKind::ClosedFormA0 => "closed-form-a0",
            NodeKind::ClosedFormAHalf => "closed-form-a-half",
            NodeKind::ClosedFormA1 => "closed-form-a1",
            NodeKind::EquallySpaced => "equally-spaced",
        })
    }
}

impl FromStr for NodeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase-generic" => Ok(NodeKind::PhaseGeneric),
            "closed-form-a0" => Ok(NodeKind::ClosedFormA0),
            "closed-form-a-half" => Ok(NodeKind::ClosedFormAHalf),
            "closed-form-a1" => Ok(NodeKind::ClosedFormA1),
            "equally-spaced" => Ok(NodeKind::EquallySpaced),
            _ => Err(Error::InvalidParameter(format!("unknown node kind {s:?}"))),
        }
    }
}

/// A node generator together with its measure and perturbation parameters.
#[derive(Clone, Debug)]
pub struct NodeScheme {
    kind: NodeKind,
    phase: PhaseFunction,
    zeta: Option<f64>,
    amplitude: f64,
    rate: f64,
    seed: u64,
}

impl NodeScheme {
    /// Phase-equation nodes for an arbitrary equilibrium measure.
    pub fn phase(em: EquilibriumMeasure) -> Self {
        let zeta = single_real_mass(&em);
        NodeScheme {
            kind: NodeKind::PhaseGeneric,
            phase: PhaseFunction::new(em),
            zeta,
            amplitude: 0.0,
            rate: 1.0,
            seed: 0,
        }
    }

    /// Closed-form nodes for one real mass `zeta > 2`.
    pub fn closed_form(family: ClosedFormFamily, zeta: f64) -> Result<Self> {
        // Validates zeta.
        closed_form_nodes(family, zeta, 1, 0.0, 1.0)?;
        let em = if zeta.is_finite() {
            EquilibriumMeasure::new(family.a(), DiscreteMeasure::point_mass(zeta)?)?
        } else {
            EquilibriumMeasure::chebyshev()
        };
        let kind = match family {
            ClosedFormFamily::Zero => NodeKind::ClosedFormA0,
            ClosedFormFamily::Half => NodeKind::ClosedFormAHalf,
            ClosedFormFamily::One => NodeKind::ClosedFormA1,
        };
        Ok(NodeScheme {
            kind,
            phase: PhaseFunction::new(em),
            zeta: Some(zeta),
            amplitude: 0.0,
            rate: 1.0,
            seed: 0,
        })
    }

    /// Equally spaced nodes judged against `em`.
    pub fn equally_spaced(em: EquilibriumMeasure) -> Self {
        NodeScheme {
            kind: NodeKind::EquallySpaced,
            ..Self::phase(em)
        }
    }

    pub fn with_perturbation(mut self, amplitude: f64, rate: f64, seed: u64) -> Result<Self> {
        check_budget(amplitude, rate)?;
        self.amplitude = amplitude;
        self.rate = rate;
        self.seed = seed;
        Ok(self)
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn phase_function(&self) -> &PhaseFunction {
        &self.phase
    }

    pub fn measure(&self) -> &EquilibriumMeasure {
        &self.phase.em
    }

    pub fn zeta(&self) -> Option<f64> {
        self.zeta
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn generate(&self, n: usize) -> Result<NodeSet> {
        match self.kind {
            NodeKind::PhaseGeneric => {
                let nodes = phase_nodes(&self.phase, n)?;
                perturb_nodes(&nodes, n, self.amplitude, self.rate, self.seed)
            }
            NodeKind::EquallySpaced => Ok(equally_spaced_nodes(n)),
            kind => closed_form_nodes(
                kind.family().expect("closed-form kind"),
                self.zeta.expect("closed-form schemes carry zeta"),
                n,
                self.amplitude,
                self.rate,
            ),
        }
    }

    pub fn admissibility(&self, nodes: &[f64]) -> Result<AdmissibilityReport> {
        admissibility_check(nodes, &self.phase, self.amplitude, self.rate, nodes.len())
    }

    pub fn label(&self) -> String {
        let a = self.measure().a();
        match self.zeta {
            Some(z) => format!("{} (a={a}, zeta={z})", self.kind),
            None => format!("{} (a={a})", self.kind),
        }
    }
}

fn single_real_mass(em: &EquilibriumMeasure) -> Option<f64> {
    match em.source().map(|s| s.points()) {
        Some([z]) if z.im == 0.0 => Some(z.re),
        _ => None,
    }
}
