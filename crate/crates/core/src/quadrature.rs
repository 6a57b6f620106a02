//! Gauss–Legendre panels and globally adaptive Gauss–Kronrod (7/15)
//! integration.
//!
//! Oscillatory integrands are pre-partitioned into panels that each see
//! at most one oscillation; the adaptive driver then bisects whichever
//! panel carries the largest error estimate until the global tolerance
//! is met.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev initial guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Composite rule over `panels` equal panels.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                self.integrate(&f, lo, lo + h)
            })
            .sum()
    }

    /// Absolute nodes and weights of the composite rule.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.order());
        let mut ws = Vec::with_capacity(panels * self.order());
        for i in 0..panels {
            let lo = a + i as f64 * h;
            let c = lo + 0.5 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(c + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 16-point rule used by all panel quadratures.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Number of panels on an interval of length `len` such that a phase
/// growing at rate `max_rate` advances by at most pi per panel.
pub fn panels_for(len: f64, max_rate: f64) -> usize {
    let rate = max_rate.abs().max(1.0);
    ((len.abs() * rate / PI).ceil() as usize).max(1)
}

// Kronrod abscissae (descending) and weights; Gauss-7 weights for the
// odd-indexed abscissae and the centre.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(centre - x);
        let f2 = f(centre + x);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let scale = half.abs();
    let value = resk * half;
    let resabs = resabs * scale;
    let resasc = resasc * scale;
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment {
        a,
        b,
        value,
        error,
        resabs,
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod integrator.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 20_000,
        }
    }
}

impl Adaptive {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        self.integrate_panels(f, a, b, 1)
    }

    /// Seeds the work list with `panels` equal sub-intervals before
    /// adapting.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> Result<Integral> {
        if a == b {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            });
        }
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut heap = BinaryHeap::with_capacity(2 * panels);
        for i in 0..panels {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            heap.push(gk15(&f, lo, hi));
        }
        let min_width = 1e-13 * (b - a).abs();
        let totals = |heap: &BinaryHeap<Segment>| {
            heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
                (acc.0 + s.value, acc.1 + s.error, acc.2 + s.resabs)
            })
        };
        let (mut value, mut error, mut resabs) = totals(&heap);
        loop {
            let target = self
                .abs_tol
                .max(self.rel_tol * value.abs())
                .max(100.0 * f64::EPSILON * resabs);
            if error <= target {
                // running sums drift; report the exact totals
                let (value, error, _) = totals(&heap);
                return Ok(Integral {
                    value,
                    error,
                    intervals: heap.len(),
                });
            }
            let worst = heap.pop().expect("non-empty work list");
            let mid = 0.5 * (worst.a + worst.b);
            if heap.len() + 2 > self.max_intervals || (worst.b - worst.a).abs() < min_width {
                heap.push(worst);
                return Err(Error::Quadrature {
                    a,
                    b,
                    value,
                    error,
                    intervals: heap.len(),
                });
            }
            let left = gk15(&f, worst.a, mid);
            let right = gk15(&f, mid, worst.b);
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            resabs += left.resabs + right.resabs - worst.resabs;
            heap.push(left);
            heap.push(right);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two_and_nodes_are_symmetric() {
        for order in [1, 2, 5, 16, 31] {
            let rule = GaussLegendre::new(order);
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "order {order}: {sum}");
            for i in 0..order {
                assert!((rule.nodes[i] + rule.nodes[order - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gl16_is_exact_for_degree_31() {
        let rule = gl16();
        for d in 0..=31 {
            let got = rule.integrate(|x| x.powi(d), 0.0, 1.0);
            let want = 1.0 / (d as f64 + 1.0);
            assert!((got - want).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn kronrod_is_exact_for_degree_22() {
        for d in 0..=22 {
            let s = gk15(&|x: f64| x.powi(d), -1.0, 1.0);
            let want = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
            assert!((s.value - want).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = Adaptive::new(1e-10, 1e-10)
            .integrate(|x: f64| x.sqrt(), 0.0, 1.0)
            .unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_oscillatory_with_panels() {
        let n = 200.0;
        let r = Adaptive::default()
            .integrate_panels(|x: f64| (n * x).cos(), 0.0, 1.0, panels_for(1.0, n))
            .unwrap();
        assert!((r.value - (n.sin() / n)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let tight = Adaptive {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 4,
        };
        let err = tight.integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
