//! Fourier data of `q^Delta`, the constant `A`, the densities
//! `phi^+`/`phi^-`, membership classification and the limits `L+-`, `nu`.
//!
//! Everything is computed from `q^Delta`, which is summable for the
//! sequences of interest; the transform of `q` itself is never formed.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::lattice::{DeltaSupport, InitialCondition, LatticeSlice};
use crate::output::write_csv_row;
use crate::quadrature::{gl16, panels_for, Adaptive};
use crate::special::{sin_minus_chord, sin_minus_linear};
use crate::{Error, Result};

/// Lower end of the default lambda grid.
pub const DEFAULT_DELTA: f64 = 1e-6;
pub const DEFAULT_PROBES: [i64; 6] = [-64, -48, -32, 32, 48, 64];
pub const PROBE_TOLERANCE: f64 = 1e-3;
/// Relative change of `A` allowed when the outer eighth of the window is dropped.
pub const EDGE_TOLERANCE: f64 = 1e-9;
pub const TRACE_DELTAS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// `Q^Delta(lambda) = sum_k e^{i k lambda} q^Delta_k` on a grid.
pub fn q_delta_fourier(q_delta: &LatticeSlice, lambda_grid: &[f64]) -> Result<Vec<Complex64>> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let eval = |&lam: &f64| {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, v) in q_delta.iter() {
            if v != 0.0 {
                let (s, c) = (k as f64 * lam).sin_cos();
                re += v * c;
                im += v * s;
            }
        }
        Complex64::new(re, im)
    };
    if lambda_grid.len() * q_delta.len() > 1 << 16 {
        Ok(lambda_grid.par_iter().map(eval).collect())
    } else {
        Ok(lambda_grid.iter().map(eval).collect())
    }
}

/// `sum_{k >= 1} k (q_k - q_{-k})` restricted to `|k| <= half`. Pairing
/// the terms makes the value exactly zero for symmetric data.
fn paired_moment(q_delta: &LatticeSlice, half: i64) -> f64 {
    (1..=half)
        .map(|k| k as f64 * (q_delta.get_or_zero(k) - q_delta.get_or_zero(-k)))
        .sum()
}

/// `A = 2 sum_k k q^Delta_k` without the edge check.
pub fn moment_a(q_delta: &LatticeSlice) -> f64 {
    let half = q_delta.offset().unsigned_abs().max(q_delta.last().unsigned_abs()) as i64;
    2.0 * paired_moment(q_delta, half)
}

/// `A = 2 sum_k k q^Delta_k`. Fails when dropping the outer eighth of the
/// window moves the value by more than [`EDGE_TOLERANCE`] relative.
pub fn compute_a(q_delta: &LatticeSlice) -> Result<f64> {
    let half = q_delta.offset().unsigned_abs().max(q_delta.last().unsigned_abs()) as i64;
    let full = 2.0 * paired_moment(q_delta, half);
    let inner = 2.0 * paired_moment(q_delta, half - half / 8);
    let ratio = (full - inner).abs() / full.abs().max(1.0);
    if !full.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    if ratio > EDGE_TOLERANCE {
        return Err(Error::EdgeMass {
            ratio,
            tol: EDGE_TOLERANCE,
        });
    }
    Ok(full)
}

/// `phi^+(lambda)` and `phi^-(lambda)` straight from the coefficients, in
/// a form that stays accurate as `lambda -> 0`.
pub fn phi_at(q_delta: &LatticeSlice, a: f64, lambda: f64) -> (f64, f64) {
    let s = (0.5 * lambda).sin();
    let mut q0 = 0.0;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut moment = 0.0;
    for (k, v) in q_delta.iter() {
        if v == 0.0 {
            continue;
        }
        let kf = k as f64;
        let h = (0.5 * kf * lambda).sin();
        q0 += v;
        even += v * h * h;
        odd += v * sin_minus_chord(kf, lambda);
        moment += kf * v;
    }
    let plus = (q0 - 2.0 * even) / (s * s);
    let minus = odd / (s * s) + (2.0 * moment - a) / s;
    (plus, minus)
}

/// `h(lambda) = (Q^Delta(lambda)/lambda - i A_h)/lambda` with
/// `A_h = sum_k k q^Delta_k`, as (real, imaginary).
pub fn h_at(q_delta: &LatticeSlice, a_h: f64, lambda: f64) -> (f64, f64) {
    let mut q0 = 0.0;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut moment = 0.0;
    for (k, v) in q_delta.iter() {
        if v == 0.0 {
            continue;
        }
        let kf = k as f64;
        let h = (0.5 * kf * lambda).sin();
        q0 += v;
        even += v * h * h;
        odd += v * sin_minus_linear(kf * lambda);
        moment += kf * v;
    }
    let l2 = lambda * lambda;
    ((q0 - 2.0 * even) / l2, odd / l2 + (moment - a_h) / lambda)
}

/// Densities on a grid that must exclude `lambda = 0`.
pub fn phi_decompose(q_delta: &LatticeSlice, a: f64, lambda_grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if lambda_grid.contains(&0.0) {
        return Err(Error::GridContainsZero);
    }
    let pairs: Vec<(f64, f64)> = lambda_grid.par_iter().map(|&l| phi_at(q_delta, a, l)).collect();
    Ok(pairs.into_iter().unzip())
}

/// Fourier data on composite Gauss–Legendre panels over `[delta, pi]`.
/// `weights` integrate over that interval; the piece `[0, delta]` is
/// carried by the densities at `delta/2`.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct SpectralProfile {
    pub lambda_grid: Vec<f64>,
    pub weights: Vec<f64>,
    /// `[re, im]` pairs.
    #[schemars(with = "Vec<[f64; 2]>")]
    pub q_delta_ft: Vec<Complex64>,
    #[serde(rename = "A")]
    pub a: f64,
    pub phi_plus: Vec<f64>,
    pub phi_minus: Vec<f64>,
    pub delta: f64,
    /// `(phi^+, phi^-)` at `delta/2`.
    pub small_lambda: (f64, f64),
    /// Index range of the `q^Delta` coefficients used.
    pub support: (i64, i64),
}

impl SpectralProfile {
    /// Builds the profile resolving frequencies up to `max_rate`.
    pub fn new(q_delta: &LatticeSlice, delta: f64, max_rate: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < PI) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, pi), got {delta}"
            )));
        }
        let a = compute_a(q_delta)?;
        let extent = q_delta.offset().unsigned_abs().max(q_delta.last().unsigned_abs()) as f64;
        let panels = 2 * panels_for(PI - delta, max_rate.max(extent)).max(32);
        let (lambda_grid, weights) = gl16().composite(delta, PI, panels);
        let q_delta_ft = q_delta_fourier(q_delta, &lambda_grid)?;
        let (phi_plus, phi_minus) = phi_decompose(q_delta, a, &lambda_grid)?;
        Ok(Self {
            lambda_grid,
            weights,
            q_delta_ft,
            a,
            phi_plus,
            phi_minus,
            delta,
            small_lambda: phi_at(q_delta, a, 0.5 * delta),
            support: (q_delta.offset(), q_delta.last()),
        })
    }

    /// Profile of an initial condition: exact support when the rule has
    /// one, otherwise the evaluation window.
    pub fn from_ic(ic: &InitialCondition) -> Result<Self> {
        Self::new(&delta_slice(ic), DEFAULT_DELTA, 64.0)
    }

    /// `q~_n = (1/4pi) int phi^+ cos(n l) + (1/4pi) int phi^- sin(n l) + A D(n)/(4pi)`,
    /// where `D(n) = int_0^pi sin(n l)/sin(l/2) dl`.
    pub fn q_tilde(&self, n: i64) -> f64 {
        let nf = n as f64;
        let mut acc = 0.0;
        for i in 0..self.lambda_grid.len() {
            let (s, c) = (nf * self.lambda_grid[i]).sin_cos();
            acc += self.weights[i] * (self.phi_plus[i] * c + self.phi_minus[i] * s);
        }
        let (s, c) = (0.5 * nf * self.delta).sin_cos();
        acc += self.delta * (self.small_lambda.0 * c + self.small_lambda.1 * s);
        (acc + self.a * dirichlet_closed_form(n)) / (4.0 * PI)
    }

    /// Rows `lambda, Re Q, Im Q, phi+, phi-`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "lambda,re_q_delta,im_q_delta,phi_plus,phi_minus")?;
        for i in 0..self.lambda_grid.len() {
            write_csv_row(
                w,
                &[
                    self.lambda_grid[i],
                    self.q_delta_ft[i].re,
                    self.q_delta_ft[i].im,
                    self.phi_plus[i],
                    self.phi_minus[i],
                ],
            )?;
        }
        Ok(())
    }
}

/// `q^Delta` over the rule's support when finite, else over the window.
pub fn delta_slice(ic: &InitialCondition) -> LatticeSlice {
    match ic.delta_support() {
        DeltaSupport::Empty => LatticeSlice::zeros(-1, 1),
        DeltaSupport::Finite { lo, hi } => {
            let half = lo.unsigned_abs().max(hi.unsigned_abs()).max(1) as i64;
            ic.q_delta(half)
        }
        DeltaSupport::Unbounded => clamped_q_delta(ic, ic.window),
    }
}

/// `q^Delta` of the sequence that equals `q` on `-half..=half` and is
/// held constant beyond. Its transform vanishes at the origin and its
/// moment is `2 (q_half - q_-half)`, so window effects do not show up
/// as a spurious `1/lambda^2` singularity.
pub fn clamped_q_delta(ic: &InitialCondition, half: i64) -> LatticeSlice {
    let mut q = ic.slice(-half - 1, half + 1);
    let n = q.len();
    let mut v = q.values().to_vec();
    v[0] = v[1];
    v[n - 1] = v[n - 2];
    q = LatticeSlice::new(-half - 1, v).expect("finite values");
    crate::lattice::discrete_laplacian(&q).expect("slice has >= 3 entries")
}

/// `4 sum_{k<n} (-1)^k/(2k+1)`, extended oddly to `n <= 0`.
pub fn dirichlet_closed_form(n: i64) -> f64 {
    let m = n.unsigned_abs();
    let mut s = 0.0;
    // smallest terms first
    for k in (0..m).rev() {
        let term = 1.0 / (2 * k + 1) as f64;
        s += if k % 2 == 0 { term } else { -term };
    }
    4.0 * s * n.signum() as f64
}

/// `int_0^pi sin(n l)/sin(l/2) dl` by Gauss–Legendre panels.
pub fn dirichlet_kernel_integral(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let nf = n as f64;
    let f = |l: f64| {
        let s = (0.5 * l).sin();
        if s == 0.0 {
            2.0 * nf
        } else {
            (nf * l).sin() / s
        }
    };
    Ok(gl16().integrate_panels(f, 0.0, PI, 2 * panels_for(PI, nf)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum Verdict {
    MemberByFiniteSupport,
    MemberBySufficientCondition,
    NonMember,
    Inconclusive,
}

impl Verdict {
    pub fn is_member(self) -> bool {
        matches!(
            self,
            Verdict::MemberByFiniteSupport | Verdict::MemberBySufficientCondition
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum InfinityMarker {
    #[serde(rename = "+inf")]
    PlusInfinity,
}

/// A finite number or the string `"+inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum SumValue {
    Finite(f64),
    Infinite(InfinityMarker),
}

impl SumValue {
    pub fn as_f64(self) -> f64 {
        match self {
            SumValue::Finite(x) => x,
            SumValue::Infinite(_) => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// `sum_{k != 0} |q^Delta_k| |k| ln|k|`.
    pub sufficient_sum: SumValue,
    /// `(K, partial sum over |k| <= K)` for doubling K.
    pub sufficient_sum_trace: Vec<(i64, f64)>,
    /// Fitted `p` in `increment ~ (ln K)^-p`; present for unbounded support.
    pub decay_exponent: Option<f64>,
    /// `||q^Delta||_2` over the evaluation window.
    pub l2_norm_qdelta: f64,
    /// `(K, ||q^Delta||_2 over |k| <= K)`.
    pub l2_trace: Vec<(i64, f64)>,
    /// `Q^Delta(0) = sum_k q^Delta_k`.
    pub q_delta_at_zero: f64,
    /// `A`, when the edge check passes.
    #[serde(rename = "A")]
    pub a: Option<f64>,
    /// `(delta, int_delta^pi |phi|)` for decreasing delta.
    pub integrability_trace: Vec<(f64, f64)>,
    /// `(delta, int_delta^pi |h|)`.
    pub h_integrability_trace: Vec<(f64, f64)>,
    /// Whether the two traces both settle or both keep growing.
    pub traces_agree: bool,
    pub window: i64,
    pub evidence: String,
}

/// Largest window of the doubling sequence used by [`classify`].
pub const MAX_LOG2_WINDOW: u32 = 20;
const MIN_LOG2_WINDOW: u32 = 1;
/// Minimum fitted exponent accepted as convergence of the sufficient sum.
pub const CONVERGENCE_EXPONENT: f64 = 1.5;
/// Per-doubling growth of `||q^Delta||_2^2` taken as a non-decay witness.
pub const L2_GROWTH_RATIO: f64 = 1.5;

struct DoublingData {
    sums: Vec<(i64, f64)>,
    l2sq: Vec<(i64, f64)>,
    /// Window at which second differences sank into rounding noise.
    floor: Option<i64>,
}

/// Partial sums over `|k| <= 2^j` computed in one streaming pass. Stops
/// once a whole doubling block of `q^Delta` is indistinguishable from
/// the rounding error of the differences.
fn doubling_data(ic: &InitialCondition) -> DoublingData {
    let kmax = 1i64 << MAX_LOG2_WINDOW;
    let q = |k: i64| ic.evaluate(k);
    let q0d = 2.0 * q(0) - q(1) - q(-1);
    let mut sum = 0.0;
    let mut l2 = q0d * q0d;
    let mut sums = Vec::new();
    let mut l2sq = Vec::new();
    let mut floor = None;
    let mut next = 1i64 << MIN_LOG2_WINDOW;
    let (mut block_signal, mut block_noise) = (0.0, 0.0);
    let (mut qm1, mut q0, mut qp1) = (q(0), q(1), q(2));
    let (mut rm1, mut r0, mut rp1) = (q(0), q(-1), q(-2));
    for k in 1..=kmax {
        let dp = 2.0 * q0 - qp1 - qm1;
        let dm = 2.0 * r0 - rp1 - rm1;
        let w = k as f64 * (k as f64).ln();
        sum += (dp.abs() + dm.abs()) * w;
        l2 += dp * dp + dm * dm;
        block_signal += dp.abs() + dm.abs();
        block_noise += f64::EPSILON * (qm1.abs() + 2.0 * q0.abs() + qp1.abs() + rm1.abs() + 2.0 * r0.abs() + rp1.abs());
        if k == next {
            if block_noise > 0.0 && block_signal <= 16.0 * block_noise && k > 1i64 << (MIN_LOG2_WINDOW + 2) {
                floor = Some(k);
                break;
            }
            sums.push((k, sum));
            l2sq.push((k, l2));
            next *= 2;
            block_signal = 0.0;
            block_noise = 0.0;
        }
        (qm1, q0, qp1) = (q0, qp1, q(k + 2));
        (rm1, r0, rp1) = (r0, rp1, q(-k - 2));
    }
    DoublingData { sums, l2sq, floor }
}

/// Least-squares slope of `ln d` against `ln ln K`, negated.
fn decay_exponent(points: &[(i64, f64)]) -> Option<f64> {
    let xs: Vec<f64> = points.iter().map(|(k, _)| (*k as f64).ln().ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, d)| d.ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(-sxy / sxx)
}

/// Cumulative `int_delta^pi |f|` for the deltas of [`TRACE_DELTAS`].
fn integrability_trace<F: Fn(f64) -> f64 + Sync>(f: F, rate: f64) -> Vec<(f64, f64)> {
    let rule = gl16();
    let bulk_panels = 2 * panels_for(PI, rate).max(32);
    let mut total = rule.integrate_panels(&f, TRACE_DELTAS[0], PI, bulk_panels);
    let mut trace = vec![(TRACE_DELTAS[0], total)];
    for w in TRACE_DELTAS.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        let panels = panels_for(hi - lo, rate).max(8);
        total += rule.integrate_panels(&f, lo, hi, panels);
        trace.push((lo, total));
    }
    trace
}

fn trace_settles(trace: &[(f64, f64)]) -> bool {
    match trace {
        [.., (_, prev), (_, last)] => last - prev <= 1e-3 * last.abs() + 1e-12,
        _ => true,
    }
}

/// Membership verdict with numerical evidence.
///
/// Order of tests: finite support with `Q^Delta(0) = 0`; convergence of
/// `sum |q^Delta_k| |k| ln|k|` over doubling windows; growth of
/// `||q^Delta||_2`; otherwise inconclusive.
pub fn classify(ic: &InitialCondition) -> ClassificationReport {
    let window = ic.window;
    let window_qd = ic.window_q_delta();
    let support = ic.delta_support();
    let qd = delta_slice(ic);
    let q_delta_at_zero: f64 = qd.values().iter().sum();
    let a_checked = compute_a(&qd).ok();
    let a_raw = moment_a(&qd);
    let a_used = a_checked.unwrap_or(a_raw);
    let extent = qd.offset().unsigned_abs().max(qd.last().unsigned_abs()) as f64;
    let trace = integrability_trace(
        |l| {
            let (p, m) = phi_at(&qd, a_used, l);
            p.hypot(m)
        },
        extent,
    );
    let h_trace = integrability_trace(
        |l| {
            let (p, m) = h_at(&qd, 0.5 * a_used, l);
            p.hypot(m)
        },
        extent,
    );
    let traces_agree = trace_settles(&trace) == trace_settles(&h_trace);
    let mut report = ClassificationReport {
        verdict: Verdict::Inconclusive,
        sufficient_sum: SumValue::Infinite(InfinityMarker::PlusInfinity),
        sufficient_sum_trace: Vec::new(),
        decay_exponent: None,
        l2_norm_qdelta: window_qd.l2_norm(),
        l2_trace: Vec::new(),
        q_delta_at_zero,
        a: a_checked,
        integrability_trace: trace,
        h_integrability_trace: h_trace,
        traces_agree,
        window,
        evidence: String::new(),
    };

    if !matches!(support, DeltaSupport::Unbounded) {
        let s: f64 = qd
            .iter()
            .filter(|(k, _)| *k != 0)
            .map(|(k, v)| {
                let a = k.unsigned_abs() as f64;
                v.abs() * a * a.ln()
            })
            .sum();
        let half = extent as i64;
        report.sufficient_sum = SumValue::Finite(s);
        report.sufficient_sum_trace = vec![(half, s)];
        report.l2_trace = vec![(half, qd.l2_norm())];
        let scale = qd.values().iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if q_delta_at_zero.abs() <= 1e-12 * scale {
            report.verdict = Verdict::MemberByFiniteSupport;
            report.evidence = format!(
                "q^Delta supported on {}..={} with Q^Delta(0) = 0",
                qd.offset(),
                qd.last()
            );
        } else {
            report.verdict = Verdict::NonMember;
            report.evidence = format!(
                "Q^Delta(0) = {q_delta_at_zero:e} != 0, so phi^+ ~ Q^Delta(0)/sin^2(lambda/2) is not integrable"
            );
        }
        return report;
    }

    let data = doubling_data(ic);
    report.sufficient_sum_trace = data.sums.clone();
    report.l2_trace = data.l2sq.iter().map(|(k, v)| (*k, v.sqrt())).collect();
    let floor_note = data.floor.map_or(String::new(), |k| {
        format!("; second differences reach rounding level at K = {k}")
    });
    let increments: Vec<(i64, f64)> = data.sums.windows(2).map(|w| (w[1].0, w[1].1 - w[0].1)).collect();
    let last_sum = data.sums.last().map(|p| p.1).unwrap_or(0.0);
    let tail = &increments[increments.len().saturating_sub(6)..];
    let negligible = tail.last().map(|p| p.1 <= 1e-15 * last_sum.max(1e-300)).unwrap_or(true);
    let decreasing = tail.len() >= 3 && tail.windows(2).all(|w| w[1].1 <= w[0].1);
    let exponent = decay_exponent(tail);
    report.decay_exponent = exponent;
    if negligible || (decreasing && exponent.is_some_and(|p| p >= CONVERGENCE_EXPONENT)) {
        let tail_estimate = match exponent {
            Some(p) if !negligible && p > 1.0 => {
                let (k, d) = *tail.last().expect("nonempty");
                d * (k as f64).ln() / ((p - 1.0) * 2f64.ln())
            }
            _ => 0.0,
        };
        report.sufficient_sum = SumValue::Finite(last_sum);
        report.verdict = Verdict::MemberBySufficientCondition;
        report.evidence = format!(
            "partial sums settle over K = 2..{}: increments decrease with fitted exponent {} in (ln K)^-p; estimated remaining tail {tail_estimate:e}{floor_note}",
            data.sums.last().map_or(0, |p| p.0),
            exponent.map_or("n/a".to_string(), |p| format!("{p:.3}")),
        );
        return report;
    }
    let ratios: Vec<f64> = data.l2sq.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let last_ratios = &ratios[ratios.len().saturating_sub(3)..];
    if last_ratios.iter().all(|r| *r >= L2_GROWTH_RATIO) {
        report.verdict = Verdict::NonMember;
        report.evidence = format!(
            "||q^Delta||_2^2 grows by factors {:?} per window doubling, so q^Delta is not in l_2",
            last_ratios
                .iter()
                .map(|r| (r * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        );
        return report;
    }
    report.evidence =
        format!("sufficient sum does not settle and ||q^Delta||_2 does not grow; see integrability traces{floor_note}");
    report
}

/// Offset `c = q_n(0) - q~_n` at one probe index.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema)]
pub struct ProbeOffset {
    pub n: i64,
    pub q0: f64,
    pub q_tilde: f64,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct Limits {
    pub l_plus: f64,
    pub l_minus: f64,
    pub nu: f64,
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub probes: Vec<ProbeOffset>,
    /// `max c - min c` over the probes.
    pub spread: f64,
}

/// `c_n = q_n(0) - q~_n` for each `n`.
pub fn reconstruction_offsets(profile: &SpectralProfile, q0: &LatticeSlice, ns: &[i64]) -> Result<Vec<ProbeOffset>> {
    ns.par_iter()
        .map(|&n| {
            let q = q0.get(n).ok_or(Error::InsufficientSupport {
                op: "limits_and_nu",
                len: q0.len(),
                need: n.unsigned_abs() as usize,
            })?;
            let qt = profile.q_tilde(n);
            Ok(ProbeOffset {
                n,
                q0: q,
                q_tilde: qt,
                c: q - qt,
            })
        })
        .collect()
}

/// `L+- = c +- A/4` and `nu = c` from probes far from the origin.
pub fn limits_and_nu(profile: &SpectralProfile, q0: &LatticeSlice, probes: &[i64]) -> Result<Limits> {
    if probes.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let offsets = reconstruction_offsets(profile, q0, probes)?;
    let (lo, hi) = offsets.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.c), hi.max(p.c))
    });
    let spread = hi - lo;
    if spread > PROBE_TOLERANCE {
        return Err(Error::InconsistentLimit {
            spread,
            tol: PROBE_TOLERANCE,
        });
    }
    let c = offsets.iter().map(|p| p.c).sum::<f64>() / offsets.len() as f64;
    Ok(Limits {
        l_plus: c + 0.25 * profile.a,
        l_minus: c - 0.25 * profile.a,
        nu: c,
        c,
        a: profile.a,
        probes: offsets,
        spread,
    })
}

/// Classifies, builds the profile and evaluates the limits.
pub fn limits_for(ic: &InitialCondition) -> Result<Limits> {
    let report = classify(ic);
    if !report.verdict.is_member() {
        return Err(Error::NotApplicable {
            solver: "limits".into(),
            reason: format!("initial condition is {:?}", report.verdict),
        });
    }
    let profile = SpectralProfile::from_ic(ic)?;
    let reach = DEFAULT_PROBES.iter().map(|n| n.abs()).max().unwrap_or(0);
    let q0 = ic.slice(-reach, reach);
    limits_and_nu(&profile, &q0, &DEFAULT_PROBES)
}

/// `int_{-W}^{W} |f''(x)| |x| ln(1+|x|) dx` together with the values on
/// `[-2^j W, 2^j W]`, `j = 0..=3`.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct C2Report {
    pub value: f64,
    pub trace: Vec<(f64, f64)>,
    pub converged: bool,
}

pub const C2_FD_STEP: f64 = 1e-4;

/// Second derivative by central differences.
pub fn central_second_difference<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

pub fn c2_criterion<F, G>(f: F, f2: Option<G>, window: f64) -> Result<C2Report>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidArgument(format!("window must be positive, got {window}")));
    }
    let second = |x: f64| match &f2 {
        Some(g) => g(x),
        None => central_second_difference(&f, x, C2_FD_STEP),
    };
    let integrand = |x: f64| second(x).abs() * x.abs() * x.abs().ln_1p();
    // difference quotients carry noise near eps/h^2
    let quad = if f2.is_some() {
        Adaptive {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 50_000,
        }
    } else {
        Adaptive {
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            max_intervals: 50_000,
        }
    };
    let piece = |a: f64, b: f64| -> Result<f64> {
        let panels = ((b - a) / 0.5).ceil().max(1.0) as usize;
        Ok(quad.integrate_panels(integrand, a, b, panels)?.value)
    };
    let mut total = piece(-window, 0.0)? + piece(0.0, window)?;
    let mut trace = vec![(window, total)];
    let mut w = window;
    for _ in 0..3 {
        total += piece(-2.0 * w, -w)? + piece(w, 2.0 * w)?;
        w *= 2.0;
        trace.push((w, total));
    }
    let inc: Vec<f64> = trace.windows(2).map(|p| p[1].1 - p[0].1).collect();
    let value = trace[0].1;
    let last = total;
    let tiny = inc.last().is_some_and(|d| *d <= 1e-9 * last.abs() || *d == 0.0);
    let shrinking = inc.len() >= 3
        && inc[inc.len() - 2] > 0.0
        && inc[inc.len() - 1] <= 0.6 * inc[inc.len() - 2]
        && inc[inc.len() - 2] <= 0.6 * inc[inc.len() - 3].max(f64::MIN_POSITIVE);
    Ok(C2Report {
        value,
        trace,
        converged: tiny || shrinking,
    })
}
