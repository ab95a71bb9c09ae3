//! Discrete source measures off `[-1, 1]`, their balayage onto the interval,
//! logarithmic potentials and the equilibrium measure
//! `nu = (1 - a) sigma~ + a lambda_0`.
//!
//! Work on the interval is done in the angle `theta = arccos t`, where the
//! balayage of a point mass has the Poisson-kernel density
//!
//! ```text
//! g(theta) = (1/pi) Re[ sqrt(zeta^2 - 1) / (zeta - cos theta) ]
//!          = (1/pi) (1 + 2 sum_k Re(rho^k) cos(k theta)),   rho = 1/phi(zeta).
//! ```

use std::f64::consts::{LN_2, PI};
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::dd::{Dd, DdComplex};
use crate::error::{check_closed_interval, check_open_interval, Error, Result};
use crate::integrate::{adaptive, AdaptiveOptions};

const SYMMETRY_TOL: f64 = 1e-12;

/// `sqrt(z^2 - 1)` on the branch that is analytic off `[-1, 1]` and positive for
/// real `z > 1`.
pub fn sqrt_z2_minus_1(z: Complex64) -> Complex64 {
    (((z - 1.0).ln() + (z + 1.0).ln()) * 0.5).exp()
}

/// Inverse Joukowski map `phi(z) = z + sqrt(z^2 - 1)`, `|phi(z)| > 1` off `[-1, 1]`.
pub fn joukowski_inverse(z: Complex64) -> Complex64 {
    z + sqrt_z2_minus_1(z)
}

/// Euclidean distance from `z` to the segment `[-1, 1]`.
pub fn distance_to_interval(z: Complex64) -> f64 {
    Complex64::new(z.re - z.re.clamp(-1.0, 1.0), z.im).norm()
}

/// `sigma = (1/kappa) sum_k delta_{zeta_k}`, conjugate-symmetric and at distance
/// greater than one from `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<Complex64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("no mass points".into()));
        }
        if let Some(z) = points
            .iter()
            .find(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidMeasure(format!("non-finite point {z}")));
        }
        let mut paired = vec![false; points.len()];
        for i in 0..points.len() {
            if paired[i] {
                continue;
            }
            let z = points[i];
            let tol = SYMMETRY_TOL * (1.0 + z.norm());
            if z.im.abs() <= tol {
                paired[i] = true;
                continue;
            }
            let partner = (0..points.len())
                .find(|&j| j != i && !paired[j] && (points[j] - z.conj()).norm() <= tol);
            match partner {
                Some(j) => {
                    paired[i] = true;
                    paired[j] = true;
                }
                None => {
                    return Err(Error::InvalidMeasure(format!(
                        "point {z} has no conjugate partner"
                    )))
                }
            }
        }
        if let Some(z) = points.iter().find(|z| distance_to_interval(**z) <= 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "point {z} lies within distance 1 of [-1, 1]"
            )));
        }
        Ok(DiscreteMeasure { points })
    }

    pub fn point_mass(zeta: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(zeta, 0.0)])
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Number of mass points `kappa`.
    pub fn kappa(&self) -> usize {
        self.points.len()
    }

    /// `V^sigma(x) = (1/kappa) sum_k log(1/|x - zeta_k|)`.
    pub fn potential(&self, x: f64) -> f64 {
        let s: f64 = self.points.iter().map(|z| (x - z).norm().ln()).sum();
        -s / self.kappa() as f64
    }

    /// `int log|phi(zeta)| dsigma`, the Green function of the exterior of the
    /// interval at infinity averaged over `sigma`. On `[-1, 1]` the balayage
    /// potential exceeds `V^sigma` by exactly this constant.
    pub fn green_constant(&self) -> f64 {
        let s: f64 = self
            .points
            .iter()
            .map(|&z| joukowski_inverse(z).norm().ln())
            .sum();
        s / self.kappa() as f64
    }

    pub fn to_spec(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|z| [z.re, z.im]).collect()
    }

    fn dd_rhos(&self) -> Vec<DdComplex> {
        self.points
            .iter()
            .map(|z| {
                let zr = Dd::from_f64(z.re);
                let zi = Dd::from_f64(z.im);
                // z^2 - 1
                let w = DdComplex::new(zr.sqr() - zi.sqr() - 1.0, zr * zi * 2.0);
                let mut s = w.sqrt();
                // Pick the branch with |z + s| > 1.
                if (s.re * zr + s.im * zi).hi() < 0.0 {
                    s = DdComplex::new(-s.re, -s.im);
                }
                DdComplex::new(zr + s.re, zi + s.im).recip()
            })
            .collect()
    }
}

/// Balayage `sigma~` of a [`DiscreteMeasure`] onto `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct BalayageMeasure {
    source: DiscreteMeasure,
    roots: Vec<Complex64>,
    series: PoissonSeries,
}

impl BalayageMeasure {
    pub fn new(source: DiscreteMeasure) -> Self {
        let roots = source.points.iter().map(|&z| sqrt_z2_minus_1(z)).collect();
        let series = PoissonSeries::new(&source);
        BalayageMeasure {
            source,
            roots,
            series,
        }
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    /// Density with respect to `dtheta` at `theta in [0, pi]`, where `t = cos theta`.
    pub fn angular_density(&self, theta: f64) -> f64 {
        let c = theta.cos();
        let s: f64 = self
            .source
            .points
            .iter()
            .zip(&self.roots)
            .map(|(&z, &r)| (r / (z - c)).re)
            .sum();
        s / (PI * self.source.kappa() as f64)
    }

    /// Density with respect to Lebesgue measure, `t in (-1, 1)`.
    pub fn density(&self, t: f64) -> Result<f64> {
        check_open_interval(t)?;
        let s: f64 = self
            .source
            .points
            .iter()
            .zip(&self.roots)
            .map(|(&z, &r)| (r / (z - t)).re)
            .sum();
        Ok(s / (PI * self.source.kappa() as f64 * (1.0 - t * t).sqrt()))
    }

    /// `sigma~([x, 1])`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        check_closed_interval(x)?;
        Ok(self.tail_at_angle(x.acos()))
    }

    pub(crate) fn tail_at_angle(&self, theta: f64) -> f64 {
        let r = adaptive(
            |th| self.angular_density(th),
            0.0,
            theta,
            &AdaptiveOptions::default(),
        );
        r.value.clamp(0.0, 1.0)
    }

    /// `V^{sigma~}(x)` by adaptive quadrature, split at the logarithmic singularity.
    pub fn potential(&self, x: f64) -> Result<f64> {
        check_closed_interval(x)?;
        let tx = x.acos();
        let opts = AdaptiveOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-14,
            max_intervals: 8000,
        };
        // cos(tx) - cos(th) in product form keeps relative accuracy near th = tx.
        let f = |th: f64| {
            let d = (2.0 * (0.5 * (tx + th)).sin() * (0.5 * (tx - th)).sin()).abs();
            if d == 0.0 {
                0.0
            } else {
                -d.ln() * self.angular_density(th)
            }
        };
        let left = adaptive(f, 0.0, tx, &opts);
        let right = adaptive(f, tx, PI, &opts);
        Ok(left.value + right.value)
    }

    pub fn series(&self) -> &PoissonSeries {
        &self.series
    }
}

/// Fourier cosine coefficients `c_k = (1/kappa) sum_m Re(rho_m^k)` of the
/// angular balayage density, in double-double.
#[derive(Clone, Debug)]
pub struct PoissonSeries {
    coeffs: Vec<Dd>,
}

impl PoissonSeries {
    const CUTOFF: f64 = 1e-34;
    const MAX_TERMS: usize = 2000;

    fn new(source: &DiscreteMeasure) -> Self {
        let rhos = source.dd_rhos();
        let kappa = source.kappa() as f64;
        let rmax = rhos.iter().map(|r| r.norm().hi()).fold(0.0, f64::max);
        let mut powers = rhos.clone();
        let mut coeffs = Vec::new();
        let mut bound = rmax;
        while bound > Self::CUTOFF && coeffs.len() < Self::MAX_TERMS {
            let mut c = Dd::ZERO;
            for p in &powers {
                c += p.re;
            }
            coeffs.push(c / kappa);
            for (p, r) in powers.iter_mut().zip(&rhos) {
                *p = *p * *r;
            }
            bound *= rmax;
        }
        PoissonSeries { coeffs }
    }

    /// `c_1, c_2, ...`
    pub fn coefficients(&self) -> &[Dd] {
        &self.coeffs
    }

    /// `pi * sigma~([cos theta, 1]) = theta + 2 sum_k c_k sin(k theta)/k`, together
    /// with its derivative `1 + 2 sum_k c_k cos(k theta)`.
    pub fn phase_and_derivative(&self, theta: Dd) -> (Dd, Dd) {
        let (s1, c1) = theta.sin_cos();
        let two_c1 = c1 * 2.0;
        let (mut s_prev, mut s_cur) = (Dd::ZERO, s1);
        let (mut c_prev, mut c_cur) = (Dd::ONE, c1);
        let mut value = Dd::ZERO;
        let mut deriv = Dd::ZERO;
        for (k, &ck) in self.coeffs.iter().enumerate() {
            let kf = (k + 1) as f64;
            value += ck * s_cur / kf;
            deriv += ck * c_cur;
            let s_next = two_c1 * s_cur - s_prev;
            let c_next = two_c1 * c_cur - c_prev;
            s_prev = s_cur;
            s_cur = s_next;
            c_prev = c_cur;
            c_cur = c_next;
        }
        (theta + value * 2.0, deriv * 2.0 + 1.0)
    }
}

/// `nu = (1 - a) sigma~ + a lambda_0` with rational `a in [0, 1]`.
#[derive(Clone, Debug)]
pub struct EquilibriumMeasure {
    a: Rational64,
    balayage: Option<BalayageMeasure>,
}

impl EquilibriumMeasure {
    pub fn new(a: Rational64, sigma: DiscreteMeasure) -> Result<Self> {
        check_weight(a)?;
        Ok(EquilibriumMeasure {
            a,
            balayage: Some(BalayageMeasure::new(sigma)),
        })
    }

    /// The arcsine measure itself (`a = 1`, no source).
    pub fn chebyshev() -> Self {
        EquilibriumMeasure {
            a: Rational64::from_integer(1),
            balayage: None,
        }
    }

    /// Builds from an optional source; a source is mandatory when `a < 1`.
    pub fn from_parts(a: Rational64, sigma: Option<DiscreteMeasure>) -> Result<Self> {
        match sigma {
            Some(s) => Self::new(a, s),
            None if a == Rational64::from_integer(1) => Ok(Self::chebyshev()),
            None => Err(Error::InvalidMeasure(
                "a source measure is required when a < 1".into(),
            )),
        }
    }

    pub fn a(&self) -> Rational64 {
        self.a
    }

    pub fn a_f64(&self) -> f64 {
        *self.a.numer() as f64 / *self.a.denom() as f64
    }

    pub fn balayage(&self) -> Option<&BalayageMeasure> {
        self.balayage.as_ref()
    }

    pub fn source(&self) -> Option<&DiscreteMeasure> {
        self.balayage.as_ref().map(|b| &b.source)
    }

    fn sigma_weight(&self) -> f64 {
        match self.balayage {
            Some(_) => 1.0 - self.a_f64(),
            None => 0.0,
        }
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        check_open_interval(t)?;
        let arcsine = self.a_f64() / (PI * (1.0 - t * t).sqrt());
        match &self.balayage {
            Some(b) => Ok(self.sigma_weight() * b.density(t)? + arcsine),
            None => Ok(arcsine),
        }
    }

    /// Density with respect to `dtheta`, `t = cos theta`.
    pub fn angular_density(&self, theta: f64) -> f64 {
        let arcsine = self.a_f64() / PI;
        match &self.balayage {
            Some(b) => self.sigma_weight() * b.angular_density(theta) + arcsine,
            None => arcsine,
        }
    }

    /// `nu([x, 1])`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_closed_interval(x)?;
        Ok(self.cdf_at_angle(x.acos()))
    }

    pub(crate) fn cdf_at_angle(&self, theta: f64) -> f64 {
        let arcsine = self.a_f64() * theta / PI;
        let v = match &self.balayage {
            Some(b) if self.sigma_weight() > 0.0 => {
                self.sigma_weight() * b.tail_at_angle(theta) + arcsine
            }
            _ => arcsine,
        };
        v.clamp(0.0, 1.0)
    }

    /// `F = V^nu - (1 - a) V^sigma` on `[-1, 1]`, i.e. `(1 - a) G + a log 2`.
    pub fn equilibrium_constant(&self) -> f64 {
        let g = self.source().map_or(0.0, |s| s.green_constant());
        self.sigma_weight() * g + self.a_f64() * LN_2
    }

    /// `V^nu(x)` for `x in [-1, 1]` in closed form.
    pub fn potential_on_interval(&self, x: f64) -> Result<f64> {
        check_closed_interval(x)?;
        let vs = self.source().map_or(0.0, |s| s.potential(x));
        Ok(self.sigma_weight() * vs + self.equilibrium_constant())
    }
}

fn check_weight(a: Rational64) -> Result<()> {
    if a < Rational64::from_integer(0) || a > Rational64::from_integer(1) {
        return Err(Error::InvalidParameter(format!("a = {a} outside [0, 1]")));
    }
    Ok(())
}

/// Parses an exact rational `"p/q"` (or an integer `"p"`).
pub fn parse_fraction(s: &str) -> Result<Rational64> {
    let bad = || Error::InvalidParameter(format!("cannot parse {s:?} as p/q"));
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((p, q)) => {
            let p = i64::from_str(p.trim()).map_err(|_| bad())?;
            let q = i64::from_str(q.trim()).map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Rational64::new(p, q)
        }
        None => Rational64::from_integer(i64::from_str(s).map_err(|_| bad())?),
    };
    Ok(r)
}

/// JSON measure configuration `{"masses": [[re, im], ...], "a": "p/q"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeasureSpec {
    #[serde(default)]
    pub masses: Vec<[f64; 2]>,
    pub a: String,
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_equilibrium(&self) -> Result<EquilibriumMeasure> {
        let a = parse_fraction(&self.a)?;
        let sigma = if self.masses.is_empty() {
            None
        } else {
            Some(DiscreteMeasure::new(
                self.masses
                    .iter()
                    .map(|m| Complex64::new(m[0], m[1]))
                    .collect(),
            )?)
        };
        EquilibriumMeasure::from_parts(a, sigma)
    }
}
