use std::fmt;
use std::fs;
use std::io::{self, Write};

use quadgen::{
    parse_fraction, ClosedFormFamily, DiscreteMeasure, EquilibriumMeasure, Error, MeasureSpec,
    NodeScheme, StieltjesOptions,
};

use crate::{MeasureArgs, OutputArgs, RangeArgs, SchemeArgs};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Inadmissible(String),
    Verdict(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Numerical(_) => 1,
            Failure::Config(_) => 2,
            Failure::Inadmissible(_) => 3,
            Failure::Verdict(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Numerical(m) => write!(f, "{m}"),
            Failure::Inadmissible(m) => write!(f, "admissibility check failed: {m}"),
            Failure::Verdict(m) => write!(f, "study verdict failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. }
            | Error::InvalidMeasure(_)
            | Error::InvalidParameter(_)
            | Error::NotInLattice { .. }
            | Error::InsufficientData(_)
            | Error::Json(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Builds the equilibrium measure from `--masses`, `--zeta` and `--a`; an
/// explicit `--a` overrides the one in the masses file.
pub fn equilibrium(args: &MeasureArgs) -> CliResult<EquilibriumMeasure> {
    if let Some(path) = &args.masses {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut spec = MeasureSpec::from_json(&text)?;
        if let Some(a) = &args.a {
            spec.a = a.clone();
        }
        return Ok(spec.to_equilibrium()?);
    }
    let a = parse_fraction(args.a.as_deref().unwrap_or("1"))?;
    let sigma = args.zeta.map(DiscreteMeasure::point_mass).transpose()?;
    Ok(EquilibriumMeasure::from_parts(a, sigma)?)
}

pub fn scheme(measure: &MeasureArgs, s: &SchemeArgs) -> CliResult<NodeScheme> {
    let base = if s.closed_form {
        if measure.masses.is_some() {
            return Err(Failure::Config(
                "--closed-form takes --zeta, not --masses".into(),
            ));
        }
        let family =
            ClosedFormFamily::from_a(parse_fraction(measure.a.as_deref().unwrap_or("1"))?)?;
        let zeta = match (family, measure.zeta) {
            (_, Some(z)) => z,
            (ClosedFormFamily::One, None) => f64::INFINITY,
            _ => return Err(Failure::Config("--closed-form needs --zeta".into())),
        };
        NodeScheme::closed_form(family, zeta)?
    } else {
        NodeScheme::phase(equilibrium(measure)?)
    };
    if s.amplitude == 0.0 {
        return Ok(base);
    }
    Ok(base.with_perturbation(s.amplitude, s.ell, s.seed)?)
}

pub fn n_values(r: &RangeArgs) -> CliResult<Vec<usize>> {
    match (r.n, &r.n_range) {
        (Some(n), None) if n >= 1 => Ok(vec![n]),
        (None, Some(spec)) => parse_range(spec),
        (Some(_), None) => Err(Failure::Config("n must be at least 1".into())),
        _ => Err(Failure::Config(
            "one of --n or --n-range is required".into(),
        )),
    }
}

fn parse_range(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || Failure::Config(format!("--n-range expects start:stop:step, got {spec:?}"));
    let parts: Vec<usize> = spec
        .split(':')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    let (start, stop, step) = match parts[..] {
        [a, b] => (a, b, 1),
        [a, b, s] => (a, b, s),
        _ => return Err(bad()),
    };
    if start == 0 || step == 0 || stop < start {
        return Err(bad());
    }
    Ok((start..=stop).step_by(step).collect())
}

pub fn stieltjes_options(tol: Option<f64>) -> CliResult<StieltjesOptions> {
    let mut opts = StieltjesOptions::from_env()?;
    if let Some(t) = tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Failure::Config(format!("--tol must be positive, got {t}")));
        }
        opts.tolerance = t;
    }
    Ok(opts)
}

pub fn write_output(out: &OutputArgs, body: &[u8]) -> CliResult<()> {
    let res = match &out.out {
        Some(path) => fs::write(path, body),
        None => io::stdout().lock().write_all(body),
    };
    res.map_err(|e| Failure::Numerical(format!("cannot write output: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("4:16:4").unwrap(), vec![4, 8, 12, 16]);
        assert_eq!(parse_range("2:4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("8:64:20").unwrap(), vec![8, 28, 48]);
        for bad in ["0:4:1", "4:2:1", "1:4:0", "x", "1:2:3:4"] {
            assert_eq!(parse_range(bad).unwrap_err().code(), 2, "{bad}");
        }
    }

    #[test]
    fn measure_needs_a_mass_below_a_one() {
        let args = MeasureArgs {
            a: Some("1/2".into()),
            zeta: None,
            masses: None,
        };
        assert_eq!(equilibrium(&args).unwrap_err().code(), 2);
        let args = MeasureArgs {
            a: None,
            zeta: None,
            masses: None,
        };
        assert!(equilibrium(&args).is_ok());
    }
}
