use thiserror::Error;

/// Errors produced by measure construction, node generation and rule assembly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n = {n} is not on the integrality lattice: 2(1-a)n/kappa = {numer}/{denom}")]
    NotInLattice { n: usize, numer: i64, denom: i64 },

    #[error("duplicate nodes at index {0}")]
    DuplicateNodes(usize),

    #[error("moment degeneracy: beta[{index}] = {value:e}")]
    MomentDegeneracy { index: usize, value: f64 },

    #[error("discretization did not converge after {points} points (change {change:e})")]
    DiscretizationNotConverged { points: usize, change: f64 },

    #[error("eigensolver did not converge for eigenvalue {0}")]
    EigenNoConvergence(usize),

    #[error("singular linear system at column {0}")]
    Singular(usize),

    #[error("insufficient data for rate fit: {0} usable values of n")]
    InsufficientData(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_open_interval(t: f64) -> Result<()> {
    if t > -1.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            value: t,
            domain: "(-1, 1)",
        })
    }
}

pub(crate) fn check_closed_interval(x: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: x,
            domain: "[-1, 1]",
        })
    }
}
