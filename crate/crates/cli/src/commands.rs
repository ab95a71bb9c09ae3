use quadgen::format::{sig17, Sig17};
use quadgen::{
    compare_asymptotics, interpolatory_rule, run_study, varying_measure_weights, Integrand,
    NodeScheme, PhaseFunction, PositivePolynomial, RuleMeta,
};
use serde::Serialize;

use crate::config::{self, CliResult, Failure};
use crate::{Format, MeasureArgs, Method, OutputArgs, RangeArgs, SchemeArgs};

#[derive(Serialize)]
struct NodeRow {
    j: usize,
    x: Sig17,
    phi: Sig17,
    target: Sig17,
    deviation: Sig17,
}

#[derive(Serialize)]
struct NodeTable {
    scheme: String,
    n: usize,
    amplitude: Sig17,
    ell: Sig17,
    budget: Sig17,
    max_deviation: Sig17,
    admissible: bool,
    nodes: Vec<NodeRow>,
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Numerical(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| Failure::Numerical(e.to_string()))
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub fn nodes(measure: &MeasureArgs, s: &SchemeArgs, n: usize, out: &OutputArgs) -> CliResult<()> {
    if n == 0 {
        return Err(Failure::Config("n must be at least 1".into()));
    }
    let scheme = config::scheme(measure, s)?;
    let x = scheme.generate(n)?;
    let report = scheme.admissibility(&x)?;
    let pf = scheme.phase_function();
    let rows = x
        .iter()
        .zip(&report.deviations)
        .enumerate()
        .map(|(i, (&xj, &dev))| {
            Ok(NodeRow {
                j: i + 1,
                x: Sig17(xj),
                phi: Sig17(pf.value(xj)?),
                target: Sig17(PhaseFunction::target(n, i + 1)),
                deviation: Sig17(dev),
            })
        })
        .collect::<quadgen::Result<Vec<_>>>()?;
    let body = match out.format {
        Format::Json => json_bytes(&NodeTable {
            scheme: scheme.label(),
            n,
            amplitude: Sig17(scheme.amplitude()),
            ell: Sig17(scheme.rate()),
            budget: Sig17(report.budget),
            max_deviation: Sig17(report.max_deviation),
            admissible: report.admissible,
            nodes: rows,
        })?,
        Format::Csv => csv_bytes(
            &["j", "x_j", "phi", "target", "deviation"],
            rows.iter().map(|r| {
                vec![
                    r.j.to_string(),
                    sig17(r.x.0),
                    sig17(r.phi.0),
                    sig17(r.target.0),
                    sig17(r.deviation.0),
                ]
            }),
        )?,
    };
    config::write_output(out, &body)?;
    if !report.admissible {
        return Err(Failure::Inadmissible(format!(
            "max phase deviation {:e} exceeds budget {:e}",
            report.max_deviation, report.budget
        )));
    }
    Ok(())
}

pub fn weights(
    measure: &MeasureArgs,
    s: &SchemeArgs,
    n: usize,
    method: Method,
    tol: Option<f64>,
    out: &OutputArgs,
) -> CliResult<()> {
    if n == 0 {
        return Err(Failure::Config("n must be at least 1".into()));
    }
    let rule = match method {
        Method::Interpolatory => {
            let scheme = config::scheme(measure, s)?;
            let x = scheme.generate(n)?;
            let meta = RuleMeta::for_measure(scheme.kind().to_string(), scheme.measure());
            let iw = quadgen::interpolatory_weights(&x)?;
            if let Some(w) = iw.warning() {
                eprintln!("quadgen: warning: {w}");
            }
            interpolatory_rule(&x, meta)?.0
        }
        Method::Varying => {
            if s.closed_form || s.amplitude != 0.0 {
                return Err(Failure::Config(
                    "--closed-form and --A apply to the interpolatory method only".into(),
                ));
            }
            let em = config::equilibrium(measure)?;
            let pp = PositivePolynomial::for_degree(&em, n)?;
            let rule = varying_measure_weights(&pp, n, &config::stieltjes_options(tol)?)?;
            // Tag the rule with the full measure rather than the polynomial alone.
            quadgen::QuadratureRule::new(
                rule.nodes().to_vec(),
                rule.weights().to_vec(),
                rule.nominal_exactness(),
                RuleMeta::for_measure("varying", &em),
            )?
        }
    };
    let body = match out.format {
        Format::Json => {
            let mut s = rule.to_json()?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut buf = Vec::new();
            rule.write_csv(&mut buf)?;
            buf
        }
    };
    config::write_output(out, &body)
}

pub fn study(
    measure: &MeasureArgs,
    s: &SchemeArgs,
    range: &RangeArgs,
    equally_spaced: bool,
    out: &OutputArgs,
) -> CliResult<()> {
    let ns = config::n_values(range)?;
    let scheme = if equally_spaced {
        NodeScheme::equally_spaced(config::equilibrium(measure)?)
    } else {
        config::scheme(measure, s)?
    };
    let report = run_study(&scheme, &ns, &Integrand::standard_set());
    for r in &report.records {
        let errs: Vec<String> = r
            .errors
            .iter()
            .map(|e| format!("{}={:.3e}", e.name, e.error))
            .collect();
        eprintln!(
            "n={:<4} sum|w|={:.12} negative={} exactness={} {}",
            r.n,
            r.sum_abs_weights,
            r.num_negative,
            r.measured_exactness,
            errs.join(" ")
        );
    }
    for f in &report.failures {
        eprintln!("n={:<4} failed: {}", f.n, f.message);
    }
    let body = match out.format {
        Format::Json => {
            let mut s = report.to_json()?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            buf
        }
    };
    config::write_output(out, &body)?;
    if report.passed() {
        Ok(())
    } else {
        let v = &report.verdicts;
        Err(Failure::Verdict(format!(
            "polya_bounded={} all_positive_beyond_n={} errors_decreasing={} failures={}",
            v.polya_bounded,
            v.all_positive_beyond_n,
            v.errors_decreasing,
            report.failures.len()
        )))
    }
}

pub fn asym(
    measure: &MeasureArgs,
    range: &RangeArgs,
    tol: Option<f64>,
    out: &OutputArgs,
) -> CliResult<()> {
    let ns = config::n_values(range)?;
    let em = config::equilibrium(measure)?;
    let report = compare_asymptotics(&em, &ns, &config::stieltjes_options(tol)?)?;
    if !report.skipped.is_empty() {
        eprintln!(
            "quadgen: skipped n off the integrality lattice: {:?}",
            report.skipped
        );
    }
    let body = match out.format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => csv_bytes(
            &["n", "d_n", "sup_dev", "min_ratio", "max_ratio"],
            report.records.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    sig17(r.d_n),
                    sig17(r.sup_dev),
                    sig17(r.min_ratio),
                    sig17(r.max_ratio),
                ]
            }),
        )?,
    };
    config::write_output(out, &body)
}

#[derive(Serialize)]
struct BalayageTable {
    x: Vec<Sig17>,
    balayage_density: Vec<Sig17>,
    balayage_tail: Vec<Sig17>,
    equilibrium_density: Vec<Sig17>,
    equilibrium_tail: Vec<Sig17>,
}

pub fn balayage(measure: &MeasureArgs, points: usize, out: &OutputArgs) -> CliResult<()> {
    if points == 0 {
        return Err(Failure::Config("--points must be at least 1".into()));
    }
    let em = config::equilibrium(measure)?;
    let b = em
        .balayage()
        .ok_or_else(|| Failure::Config("balayage needs --zeta or --masses".into()))?;
    let xs: Vec<f64> = (1..=points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points + 1) as f64)
        .collect();
    let mut cols: [Vec<f64>; 4] = Default::default();
    for &x in &xs {
        cols[0].push(b.density(x)?);
        cols[1].push(b.tail(x)?);
        cols[2].push(em.density(x)?);
        cols[3].push(em.cdf(x)?);
    }
    let body = match out.format {
        Format::Json => {
            let v = |c: &[f64]| c.iter().map(|&x| Sig17(x)).collect();
            json_bytes(&BalayageTable {
                x: v(&xs),
                balayage_density: v(&cols[0]),
                balayage_tail: v(&cols[1]),
                equilibrium_density: v(&cols[2]),
                equilibrium_tail: v(&cols[3]),
            })?
        }
        Format::Csv => csv_bytes(
            &[
                "x",
                "balayage_density",
                "balayage_tail",
                "equilibrium_density",
                "equilibrium_tail",
            ],
            xs.iter().enumerate().map(|(i, &x)| {
                std::iter::once(x)
                    .chain(cols.iter().map(|c| c[i]))
                    .map(sig17)
                    .collect()
            }),
        )?,
    };
    config::write_output(out, &body)
}
