#![allow(clippy::excessive_precision)]
//! One-dimensional integration: globally adaptive Gauss–Kronrod (7/15) for the
//! balayage tails and potentials, and the Gauss–Chebyshev rule used for
//! reference integrals against the arcsine measure.

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the summed estimate meets the tolerance. Endpoint
/// singularities of logarithmic or inverse-square-root type are handled by
/// the bisection; split the interval at interior singularities beforehand.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &AdaptiveOptions) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        };
    }
    let first = kronrod_panel(&f, a, b);
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut error = first.error;
    heap.push(first);

    while error > opts.abs_tol.max(opts.rel_tol * total.abs()) && heap.len() < opts.max_intervals {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in f64.
            heap.push(worst);
            break;
        }
        let left = kronrod_panel(&f, worst.a, mid);
        let right = kronrod_panel(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running updates.
    let mut acc = KahanSum::default();
    let mut err = 0.0;
    for p in heap.iter() {
        acc.add(p.value);
        err += p.error;
    }
    Integral {
        value: acc.total(),
        error: err,
        intervals: heap.len(),
    }
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Abscissas `cos((2j-1)pi/(2n))`, `j = 1..=n`, in ascending order.
pub fn gauss_chebyshev_nodes(n: usize) -> Vec<f64> {
    (1..=n)
        .rev()
        .map(|j| ((2 * j - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

/// `int f dlambda_0` by the `n`-point Gauss–Chebyshev rule (all weights `1/n`).
pub fn gauss_chebyshev<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let s: KahanSum = gauss_chebyshev_nodes(n).into_iter().map(f).collect();
    s.total() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let r = adaptive(
            |x| x.powi(10) - 3.0 * x,
            0.0,
            2.0,
            &AdaptiveOptions::default(),
        );
        assert!((r.value - (2f64.powi(11) / 11.0 - 6.0)).abs() < 1e-11);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn endpoint_log_singularity() {
        // int_0^1 -ln x dx = 1
        let r = adaptive(|x| -x.ln(), 0.0, 1.0, &AdaptiveOptions::default());
        assert!((r.value - 1.0).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        // int_0^1 x^{-1/2} dx = 2
        let opts = AdaptiveOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        };
        let r = adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, &opts);
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn gauss_chebyshev_integrates_even_moments() {
        // int x^2 dlambda_0 = 1/2, int x^4 dlambda_0 = 3/8
        assert!((gauss_chebyshev(|x| x * x, 5) - 0.5).abs() < 1e-15);
        assert!((gauss_chebyshev(|x| x.powi(4), 5) - 0.375).abs() < 1e-15);
        let nodes = gauss_chebyshev_nodes(4);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        assert!((nodes[3] - (PI / 8.0).cos()).abs() < 1e-16);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: KahanSum = [1.0, 1e-16, 1e-16, -1.0].into_iter().collect();
        assert!((s.total() - 2e-16).abs() < 1e-30);
    }
}
