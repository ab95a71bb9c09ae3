//! Convergent non-complete interpolatory quadrature for the Chebyshev measure
//! `dlambda_0 = dx / (pi sqrt(1 - x^2))` on `[-1, 1]`.
//!
//! A rule is built from nodes whose counting measure follows the equilibrium
//! measure `nu = (1 - a) sigma~ + a lambda_0`, where `sigma~` is the balayage
//! onto `[-1, 1]` of a discrete measure `sigma` placed off the interval and
//! `a in [0, 1]` is rational. Nodes solve the phase equation
//! `pi nu([x_j, 1]) = (2(n-j)+1) pi/(2n)`; weights are interpolatory.
//!
//! | module | contents |
//! |---|---|
//! | [`measures`] | `sigma`, its balayage, potentials, `nu` |
//! | [`nodes`] | phase-equation and closed-form node generators, admissibility |
//! | [`quadrature`] | interpolatory weights, varying-measure rules, exactness |
//! | [`orthopoly`] | Stieltjes recurrence, Gaussian rules, asymptotic envelopes |
//! | [`diagnostics`] | convergence studies over `n` |
//!
//! ```
//! use num_rational::Rational64;
//! use quadgen::{interpolatory_weights, phase_nodes, DiscreteMeasure, EquilibriumMeasure, PhaseFunction};
//!
//! let sigma = DiscreteMeasure::point_mass(3.0).unwrap();
//! let em = EquilibriumMeasure::new(Rational64::new(1, 2), sigma).unwrap();
//! let nodes = phase_nodes(&PhaseFunction::new(em), 16).unwrap();
//! let w = interpolatory_weights(&nodes).unwrap().weights;
//! assert!(w.iter().all(|&v| v > 0.0));
//! assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebyshev;
pub mod dd;
pub mod diagnostics;
pub mod error;
pub mod format;
pub mod integrate;
mod linalg;
pub mod measures;
pub mod nodes;
pub mod orthopoly;
pub mod quadrature;

pub use diagnostics::{run_study, weak_star_distance, ConvergenceReport, Integrand, StudyRecord};
pub use error::{Error, Result};
pub use linalg::symmetric_tridiagonal_eigen;
pub use measures::{
    parse_fraction, BalayageMeasure, DiscreteMeasure, EquilibriumMeasure, MeasureSpec,
};
pub use nodes::{
    admissibility_check, closed_form_nodes, perturb_nodes, phase_nodes, AdmissibilityReport,
    ClosedFormFamily, NodeKind, NodeScheme, NodeSet, PhaseFunction,
};
pub use orthopoly::{
    compare_asymptotics, gauss_rule_from_recurrence, stieltjes_recurrence, AsymptoticEnvelope,
    DecayReport, RecurrenceCoefficients, StieltjesOptions,
};
pub use quadrature::{
    interpolatory_rule, interpolatory_weights, varying_measure_weights, PolyaStatistics,
    PositivePolynomial, QuadratureRule, RuleMeta,
};
