//! Bessel functions of the first kind of integer order, their running
//! integrals `G_n(t) = int_0^t J_n(s) ds`, and the even-sum identity.
//!
//! The fast path is Miller's backward recurrence normalized by
//! `J_0 + 2 sum_k J_{2k} = 1`, which yields every order up to `n` in one
//! sweep. The integral representation
//! `J_n(t) = (1/pi) int_0^pi cos(n x - t sin x) dx` is kept as the
//! independent reference.

use std::f64::consts::PI;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gl16, panels_for, Adaptive};

/// Evaluation route for `J_n(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum BesselMethod {
    IntegralDefinition,
    BackwardRecurrence,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BesselEvaluator {
    pub method: BesselMethod,
    /// Minimum number of Gauss–Legendre panels for the integral route.
    pub quad_panels: usize,
}

impl Default for BesselEvaluator {
    fn default() -> Self {
        Self {
            method: BesselMethod::BackwardRecurrence,
            quad_panels: 64,
        }
    }
}

impl BesselEvaluator {
    pub fn new(method: BesselMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    /// Builds the evaluator after checking both routes agree to 1e-12
    /// on a grid covering `n <= 50`, `t <= 100`.
    pub fn checked(method: BesselMethod, quad_panels: usize) -> Result<Self> {
        let ev = Self { method, quad_panels };
        let diff = ev.cross_check(50, 100.0, 5.0)?;
        if diff > 1e-12 {
            return Err(Error::Consistency {
                what: "Bessel routes disagree",
                diff,
                tol: 1e-12,
            });
        }
        Ok(ev)
    }

    /// Largest `|J_recurrence - J_integral|` over `0..=n_max` and
    /// `t in {0, dt, ..., t_max}`.
    pub fn cross_check(&self, n_max: usize, t_max: f64, dt: f64) -> Result<f64> {
        if dt <= 0.0 {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        let steps = (t_max / dt).round() as usize;
        let mut worst: f64 = 0.0;
        for i in 0..=steps {
            let t = i as f64 * dt;
            let fast = bessel_j_orders(n_max, t);
            for (n, f) in fast.iter().enumerate() {
                let slow = bessel_j_integral(n as u32, t, self.quad_panels);
                worst = worst.max((f - slow).abs());
            }
        }
        Ok(worst)
    }

    pub fn j(&self, n: u32, t: f64) -> f64 {
        match self.method {
            BesselMethod::IntegralDefinition => bessel_j_integral(n, t, self.quad_panels),
            BesselMethod::BackwardRecurrence => bessel_j(n, t),
        }
    }
}

/// `J_n(t)` for `t >= 0` by backward recurrence.
pub fn bessel_j(n: u32, t: f64) -> f64 {
    bessel_j_orders(n as usize, t)[n as usize]
}

/// `J_{-n}(t) = (-1)^n J_n(t)` extension to all integer orders.
pub fn bessel_j_signed(n: i64, t: f64) -> f64 {
    let v = bessel_j(n.unsigned_abs() as u32, t);
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `[J_0(t), ..., J_{n_max}(t)]` for `t >= 0` by Miller's algorithm.
pub fn bessel_j_orders(n_max: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if t == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let x = t.abs();
    let reach = (n_max as f64).max(x);
    // Start well past the turning point so the minimal solution dominates.
    let mut start = (reach + 20.0 + 10.0 * reach.cbrt()).ceil() as usize;
    start += start % 2;
    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{k+1}
    let mut here = 1e-300; // J_k, arbitrary seed
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = here;
        }
        if k % 2 == 0 {
            norm += 2.0 * here;
        }
        let below = k as f64 * two_over_x * here - above;
        above = here;
        here = below;
        if here.abs() > 1e250 {
            let s = 1e-250;
            here *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = here;
    norm += here;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Reference route: `(1/pi) int_0^pi cos(n x - t sin x) dx` on at least
/// `min_panels` Gauss–Legendre panels, refined so each panel spans at
/// most half a period of the phase.
pub fn bessel_j_integral(n: u32, t: f64, min_panels: usize) -> f64 {
    if t == 0.0 {
        // int_0^pi cos(n x) dx, exactly
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let panels = min_panels.max(panels_for(PI, nf + t.abs()));
    gl16().integrate_panels(|x| (nf * x - t * x.sin()).cos(), 0.0, PI, panels) / PI
}

/// `sum_{k=lo}^{hi} J_{2k}(t)` from the integral definition, with the
/// sum taken under the integral sign: one set of nodes serves every order.
pub fn bessel_even_sum_integral(lo: usize, hi: usize, t: f64) -> f64 {
    if hi < lo {
        return 0.0;
    }
    if t == 0.0 {
        return if lo == 0 { 1.0 } else { 0.0 };
    }
    let panels = panels_for(PI, 2.0 * hi as f64 + t.abs()).max(16);
    let (xs, ws) = gl16().composite(0.0, PI, panels);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        // Re sum_k exp(i (2k x - t sin x))
        let (ps, pc) = (t * x.sin()).sin_cos();
        let (s2, c2) = (2.0 * x).sin_cos();
        let (sl, cl) = (2.0 * lo as f64 * x).sin_cos();
        let (mut zr, mut zi) = (cl, sl);
        let mut sum_r = 0.0;
        let mut sum_i = 0.0;
        for _ in lo..=hi {
            sum_r += zr;
            sum_i += zi;
            (zr, zi) = (zr * c2 - zi * s2, zr * s2 + zi * c2);
        }
        acc += w * (sum_r * pc + sum_i * ps);
    }
    acc / PI
}

/// `|J_0(t) + 2 sum_{k=1}^K J_{2k}(t) - 1|` with `J` from the integral
/// route (the recurrence is normalized by this identity, so it would be
/// circular here).
pub fn identity_residual(t: f64, k_terms: usize) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidArgument("t must be nonnegative".into()));
    }
    let panels = 64;
    if t > 0.0 {
        // quadrature noise sits near 1e-16, so the tail size comes from the recurrence
        let tail = bessel_j(2 * k_terms as u32, t).abs();
        if (2 * k_terms) as f64 <= t || tail >= 1e-16 {
            return Err(Error::TruncationGuard { k: k_terms, t });
        }
    }
    let mut sum = bessel_j_integral(0, t, panels);
    for k in 1..=k_terms {
        sum += 2.0 * bessel_j_integral(2 * k as u32, t, panels);
    }
    Ok((sum - 1.0).abs())
}

/// `G_n(t) = int_0^t J_n(s) ds` by adaptive quadrature. For even `n`
/// the value is also checked against `G_0(t) - 2 sum_{k<n/2} J_{2k+1}(t)`,
/// which follows from `2 J_n' = J_{n-1} - J_{n+1}`.
pub fn integral_g(n: u32, t: f64) -> Result<f64> {
    let direct = integral_g_quadrature(n, t)?;
    if n.is_multiple_of(2) && n > 0 {
        let reduced = integral_g_even_reduction(n / 2, t)?;
        let diff = (direct - reduced).abs();
        if diff > 1e-8 {
            return Err(Error::Consistency {
                what: "G_2m reduction",
                diff,
                tol: 1e-8,
            });
        }
    }
    Ok(direct)
}

fn integral_g_quadrature(n: u32, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let b = t.abs();
    let r = Adaptive::new(1e-13, 1e-12).integrate_panels(|s| bessel_j(n, s), 0.0, b, panels_for(b, 1.0))?;
    // G_n(-t) = -(-1)^n G_n(t)
    Ok(if t < 0.0 && n.is_multiple_of(2) {
        -r.value
    } else {
        r.value
    })
}

/// `G_{2m}(t) = G_0(t) - 2 sum_{k=0}^{m-1} J_{2k+1}(t)`.
pub fn integral_g_even_reduction(m: u32, t: f64) -> Result<f64> {
    let g0 = integral_g_quadrature(0, t)?;
    let j = bessel_j_orders(2 * m as usize, t.abs());
    let odd: f64 = (0..m as usize).map(|k| j[2 * k + 1]).sum();
    let odd = if t < 0.0 { -odd } else { odd };
    Ok(g0 - 2.0 * odd)
}

/// `(sum_{k=0}^{n-1} (-1)^k J_{2k+1}(t), sum_{k=1}^{n} (-1)^k J_{2k}(t))`.
pub fn alternating_sums(n: usize, t: f64) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::InvalidArgument("alternating sums need n >= 1".into()));
    }
    let j = bessel_j_orders(2 * n, t.abs());
    let (odd, even) = alternating_sums_from(&j, n);
    // odd orders flip sign under t -> -t
    Ok((if t < 0.0 { -odd } else { odd }, even))
}

fn alternating_sums_from(j: &[f64], n: usize) -> (f64, f64) {
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 0..n {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        odd += s * j[2 * k + 1];
        even -= s * j[2 * k + 2];
    }
    (odd, even)
}

/// Table of `G_n(t)` for `n in 0..=n_max` at the sorted nonnegative
/// times `ts`, by cumulative Gauss–Legendre integration over sub-panels
/// of width at most 1/2 (all orders come out of each recurrence sweep).
/// Row `i` holds `G_0(ts[i]) ..= G_{n_max}(ts[i])`.
pub fn g_table(n_max: usize, ts: &[f64]) -> Result<Vec<Vec<f64>>> {
    if ts.windows(2).any(|w| w[1] < w[0]) || ts.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("times must be sorted and nonnegative".into()));
    }
    let rule = gl16();
    let mut acc = vec![0.0; n_max + 1];
    let mut prev = 0.0;
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        if t > prev {
            let panels = ((t - prev) / 0.5).ceil() as usize;
            let (xs, ws) = rule.composite(prev, t, panels.max(1));
            for (x, w) in xs.iter().zip(&ws) {
                let j = bessel_j_orders(n_max, *x);
                for (a, v) in acc.iter_mut().zip(&j) {
                    *a += w * v;
                }
            }
            prev = t;
        }
        rows.push(acc.clone());
    }
    Ok(rows)
}

/// Alternating odd/even sums for every `n in 1..=n_max` at each time.
/// Returns `(odd, even)` tables indexed `[time][n-1]`.
pub fn alternating_sum_table(n_max: usize, ts: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut odd_rows = Vec::with_capacity(ts.len());
    let mut even_rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let j = bessel_j_orders(2 * n_max, t.abs());
        let mut odd = Vec::with_capacity(n_max);
        let mut even = Vec::with_capacity(n_max);
        let (mut so, mut se) = (0.0, 0.0);
        for k in 0..n_max {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            so += s * j[2 * k + 1];
            se -= s * j[2 * k + 2];
            odd.push(so);
            even.push(se);
        }
        odd_rows.push(odd);
        even_rows.push(even);
    }
    (odd_rows, even_rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power series oracle, fine for small t.
    fn j_series(n: u32, t: f64) -> f64 {
        let mut term = (0.5 * t).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for m in 1..80 {
            term *= -(0.25 * t * t) / (m as f64 * (m as f64 + n as f64));
            sum += term;
        }
        sum
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        for n in 1..10 {
            assert_eq!(bessel_j(n, 0.0), 0.0);
            assert_eq!(bessel_j_integral(n, 0.0, 64), 0.0);
            assert!(bessel_j_integral(n, 1e-9, 64).abs() < 1e-9);
        }
        assert_eq!(bessel_j_integral(0, 0.0, 64), 1.0);
    }

    #[test]
    fn recurrence_matches_power_series() {
        for n in 0..8 {
            for &t in &[0.1, 0.5, 1.0, 2.5, 5.0] {
                let d = (bessel_j(n, t) - j_series(n, t)).abs();
                assert!(d < 1e-14, "n={n} t={t}: {d}");
            }
        }
    }

    #[test]
    fn routes_agree_on_construction_grid() {
        let ev = BesselEvaluator::checked(BesselMethod::BackwardRecurrence, 64).unwrap();
        assert_eq!(ev.method, BesselMethod::BackwardRecurrence);
        let d = ev.cross_check(50, 100.0, 0.7).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn first_zero_of_j0() {
        // Bisection on the integral route.
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bessel_j_integral(0, lo, 64) * bessel_j_integral(0, mid, 64) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 2.404826).abs() < 1e-6);
        assert!(bessel_j(0, 2.404826).abs() < 1e-6);
    }

    #[test]
    fn magnitude_bounded_by_one() {
        for n in [0u32, 1, 5, 30, 200] {
            for i in 0..200 {
                let t = i as f64 * 2.1;
                assert!(bessel_j(n, t).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn large_order_small_argument_underflows_gracefully() {
        let v = bessel_j(300, 1e-3);
        assert!(v.abs() < 1e-300 && v.is_finite());
        let w = bessel_j_orders(5, 1e-12);
        assert!((w[1] - 5e-13).abs() < 1e-25);
    }

    #[test]
    fn derivative_and_three_term_identities() {
        let h = 1e-5;
        for n in 1..12u32 {
            for &t in &[0.7, 3.0, 9.5, 21.0] {
                let deriv = (bessel_j(n, t + h) - bessel_j(n, t - h)) / (2.0 * h);
                let lhs = bessel_j(n - 1, t) - bessel_j(n + 1, t);
                assert!((lhs - 2.0 * deriv).abs() < 1e-7, "derivative n={n} t={t}");
                let sum = bessel_j(n - 1, t) + bessel_j(n + 1, t);
                assert!((sum - 2.0 * n as f64 / t * bessel_j(n, t)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn identity_residual_examples_and_guard() {
        assert_eq!(identity_residual(0.0, 1).unwrap(), 0.0);
        assert!(identity_residual(10.0, 60).unwrap() < 1e-10);
        assert!(identity_residual(50.0, 100).unwrap() < 1e-10);
        assert!(matches!(
            identity_residual(50.0, 10),
            Err(Error::TruncationGuard { .. })
        ));
    }

    #[test]
    fn integral_g_examples() {
        assert_eq!(integral_g(3, 0.0).unwrap(), 0.0);
        // G_2(30) passes the internal reduction check.
        let g2 = integral_g(2, 30.0).unwrap();
        let red = integral_g_even_reduction(1, 30.0).unwrap();
        assert!((g2 - red).abs() < 1e-8);
        // Independent oracle: Simpson on the integral route.
        let m = 6000;
        let h = 30.0 / m as f64;
        let mut s = bessel_j_integral(2, 0.0, 64) + bessel_j_integral(2, 30.0, 64);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * bessel_j_integral(2, i as f64 * h, 64);
        }
        assert!((g2 - s * h / 3.0).abs() < 1e-9);
    }

    #[test]
    fn g_table_matches_adaptive_quadrature() {
        let ts: Vec<f64> = (0..=20).map(|i| i as f64 * 3.7).collect();
        let table = g_table(12, &ts).unwrap();
        for (i, &t) in ts.iter().enumerate().step_by(4) {
            for n in [0u32, 1, 5, 12] {
                let g = integral_g_quadrature(n, t).unwrap();
                assert!((table[i][n as usize] - g).abs() < 1e-11, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn even_sum_under_the_integral_matches_termwise() {
        for &(lo, hi, t) in &[(0usize, 30usize, 7.5f64), (3, 40, 25.0), (12, 90, 120.0)] {
            let termwise: f64 = (lo..=hi).map(|k| bessel_j_integral(2 * k as u32, t, 16)).sum();
            assert!((bessel_even_sum_integral(lo, hi, t) - termwise).abs() < 1e-12);
        }
        assert_eq!(bessel_even_sum_integral(0, 5, 0.0), 1.0);
        assert_eq!(bessel_even_sum_integral(5, 4, 3.0), 0.0);
    }

    #[test]
    fn alternating_sums_examples() {
        assert_eq!(alternating_sums(1, 0.0).unwrap(), (0.0, 0.0));
        let (o, e) = alternating_sums(5, 10.0).unwrap();
        assert!(o.abs() < 2.0 && e.abs() < 2.0);
        assert!(alternating_sums(0, 1.0).is_err());
        // Jacobi–Anger limits once all orders are included.
        let t = 17.0;
        let (o, e) = alternating_sums(60, t).unwrap();
        assert!((o - 0.5 * t.sin()).abs() < 1e-13);
        assert!((e - 0.5 * (t.cos() - bessel_j(0, t))).abs() < 1e-13);
        let (odd, even) = alternating_sum_table(60, &[t]);
        assert_eq!(odd[0][59], o);
        assert_eq!(even[0][59], e);
    }
}
