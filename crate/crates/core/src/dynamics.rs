//! Trajectories of the chain by four routes: a truncated symplectic ODE
//! integration, the spectral quadrature formula, the Bessel series and,
//! where one exists, a closed form.

use std::f64::consts::PI;

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_even_sum_integral, bessel_j_integral, bessel_j_orders};
use crate::lattice::{DeltaSupport, InitialCondition, Rule};
use crate::quadrature::{gl16, panels_for};
use crate::special::sinc;
use crate::spectral::{classify, delta_slice, q_delta_fourier};
use crate::sweep::{BoundSweepReport, SweepVerdict, Target};
use crate::{Error, Result};

pub const DEFAULT_MARGIN: i64 = 32;
pub const DEFAULT_REPORT_STEP: f64 = 0.1;
pub const CROSS_TOLERANCE: f64 = 1e-5;
const BESSEL_FORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub enum Solver {
    OdeTruncated,
    SpectralFormula,
    BesselSeries,
    ClosedForm,
}

impl std::str::FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ode" | "odetruncated" | "verlet" => Ok(Solver::OdeTruncated),
            "spectral" | "spectralformula" => Ok(Solver::SpectralFormula),
            "bessel" | "besselseries" => Ok(Solver::BesselSeries),
            "closedform" | "closed" | "exact" => Ok(Solver::ClosedForm),
            _ => Err(format!("unknown solver `{s}` (ode, spectral, bessel, closed-form)")),
        }
    }
}

/// Time stepper for the truncated lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Kick–drift–kick, second order.
    Verlet,
    /// Fourth-order symmetric composition of three Verlet steps.
    Yoshida4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct OdeOptions {
    pub integrator: Integrator,
    pub margin: i64,
    /// Overrides the computed truncation half-width; rejected if too small.
    pub half_width: Option<i64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Yoshida4,
            margin: DEFAULT_MARGIN,
            half_width: None,
        }
    }
}

/// Run parameters recorded with a trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TrajectoryMeta {
    pub dt: Option<f64>,
    pub integrator: Option<Integrator>,
    pub half_width: Option<i64>,
    pub margin: Option<i64>,
    /// `max_t |E(t) - E(0)| / |E(0)|` (absolute when `E(0) = 0`).
    pub energy_drift: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct Trajectory {
    pub solver: Solver,
    pub omega: f64,
    pub indices: Vec<i64>,
    pub time_grid: Vec<f64>,
    /// `q[time][index]`
    pub q: Vec<Vec<f64>>,
    /// Velocities, ODE route only.
    pub p: Option<Vec<Vec<f64>>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// `(min k, max k)` of the reported indices.
    pub fn index_window(&self) -> (i64, i64) {
        let lo = self.indices.iter().copied().min().unwrap_or(0);
        let hi = self.indices.iter().copied().max().unwrap_or(0);
        (lo, hi)
    }

    pub fn column(&self, k: i64) -> Option<Vec<f64>> {
        let j = self.indices.iter().position(|&i| i == k)?;
        Some(self.q.iter().map(|row| row[j]).collect())
    }

    pub fn sup_abs(&self) -> f64 {
        self.q.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `t,k,q` rows.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        use crate::output::fmt_f64;
        writeln!(w, "t,k,q")?;
        for (i, t) in self.time_grid.iter().enumerate() {
            for (j, k) in self.indices.iter().enumerate() {
                writeln!(w, "{},{},{}", fmt_f64(*t), k, fmt_f64(self.q[i][j]))?;
            }
        }
        Ok(())
    }

    /// Two whitespace-separated columns `t q_k`.
    pub fn write_plot<W: std::io::Write>(&self, k: i64, w: &mut W) -> std::io::Result<()> {
        use crate::output::fmt_f64;
        let col = self
            .column(k)
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, format!("index {k} not reported")))?;
        for (t, q) in self.time_grid.iter().zip(col) {
            writeln!(w, "{} {}", fmt_f64(*t), fmt_f64(q))?;
        }
        Ok(())
    }
}

/// Uniform report grid `0, step, ..., T` (T included).
pub fn time_grid(t_end: f64, step: f64) -> Vec<f64> {
    let n = (t_end / step).round() as usize;
    let mut v: Vec<f64> = (0..=n)
        .map(|i| i as f64 * step)
        .filter(|t| *t <= t_end * (1.0 + 1e-12))
        .collect();
    if v.last().is_none_or(|t| (t - t_end).abs() > 1e-12 * t_end.max(1.0)) {
        v.push(t_end);
    }
    v
}

/// `min(0.01/omega, 0.01)`
pub fn default_dt(omega: f64) -> f64 {
    (0.01 / omega).min(0.01)
}

/// Half-width `max|k| + ceil(omega T) + margin`.
pub fn required_half_width(indices: &[i64], omega: f64, t_end: f64, margin: i64) -> i64 {
    let kmax = indices.iter().map(|k| k.abs()).max().unwrap_or(0);
    kmax + (omega * t_end).ceil() as i64 + margin
}

/// Lattice `-N..=N` with frozen end cells.
#[derive(Clone, Debug)]
pub struct TruncatedChain {
    omega2: f64,
    half: i64,
    q: Vec<f64>,
    p: Vec<f64>,
    acc: Vec<f64>,
}

const Y_W1: f64 = 1.351_207_191_959_657_6; // 1/(2 - 2^(1/3))
const Y_W0: f64 = -1.702_414_383_919_315_3; // -2^(1/3)/(2 - 2^(1/3))

impl TruncatedChain {
    pub fn new(ic: &InitialCondition, omega: f64, half: i64) -> Self {
        let q = ic.slice(-half, half).values().to_vec();
        let n = q.len();
        let mut chain = Self {
            omega2: omega * omega,
            half,
            q,
            p: vec![0.0; n],
            acc: vec![0.0; n],
        };
        chain.update_acc();
        chain
    }

    pub fn half_width(&self) -> i64 {
        self.half
    }

    pub fn q(&self, k: i64) -> f64 {
        self.q[(k + self.half) as usize]
    }

    pub fn p(&self, k: i64) -> f64 {
        self.p[(k + self.half) as usize]
    }

    fn update_acc(&mut self) {
        let n = self.q.len();
        for i in 1..n - 1 {
            self.acc[i] = self.omega2 * (self.q[i + 1] - 2.0 * self.q[i] + self.q[i - 1]);
        }
    }

    fn verlet(&mut self, h: f64) {
        let n = self.q.len();
        for i in 1..n - 1 {
            self.p[i] += 0.5 * h * self.acc[i];
            self.q[i] += h * self.p[i];
        }
        self.update_acc();
        for i in 1..n - 1 {
            self.p[i] += 0.5 * h * self.acc[i];
        }
    }

    pub fn step(&mut self, h: f64, integrator: Integrator) {
        match integrator {
            Integrator::Verlet => self.verlet(h),
            Integrator::Yoshida4 => {
                self.verlet(Y_W1 * h);
                self.verlet(Y_W0 * h);
                self.verlet(Y_W1 * h);
            }
        }
    }

    /// Advances by `duration` in equal steps no longer than `dt`.
    pub fn advance(&mut self, duration: f64, dt: f64, integrator: Integrator) {
        if duration <= 0.0 {
            return;
        }
        let steps = (duration / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        for _ in 0..steps {
            self.step(h, integrator);
        }
    }

    /// `1/2 sum p^2 + omega^2/2 sum (q_{k+1} - q_k)^2`
    pub fn energy(&self) -> f64 {
        let kinetic: f64 = self.p.iter().map(|p| p * p).sum();
        let potential: f64 = self.q.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        0.5 * kinetic + 0.5 * self.omega2 * potential
    }

    pub fn flip_velocities(&mut self) {
        for p in &mut self.p {
            *p = -*p;
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.q
    }
}

fn check_common(omega: f64, times: &[f64], indices: &[i64]) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    if indices.is_empty() {
        return Err(Error::InvalidArgument("no indices requested".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "times must be finite, nonnegative and nondecreasing".into(),
        ));
    }
    Ok(())
}

/// ODE route on `-N..=N` reporting at the given times.
pub fn solve_ode_at(
    ic: &InitialCondition,
    omega: f64,
    times: &[f64],
    dt: f64,
    indices: &[i64],
    opts: OdeOptions,
) -> Result<Trajectory> {
    check_common(omega, times, indices)?;
    if !(dt > 0.0 && dt <= 0.1 / omega) {
        return Err(Error::InvalidArgument(format!(
            "dt must lie in (0, 0.1/omega] = (0, {}], got {dt}",
            0.1 / omega
        )));
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    let required = required_half_width(indices, omega, t_end, opts.margin);
    let half = match opts.half_width {
        Some(n) if n < required => return Err(Error::WindowTooSmall { got: n, required }),
        Some(n) => n,
        None => required,
    };
    let mut chain = TruncatedChain::new(ic, omega, half);
    let e0 = chain.energy();
    let mut drift: f64 = 0.0;
    let mut now = 0.0;
    let mut q = Vec::with_capacity(times.len());
    let mut p = Vec::with_capacity(times.len());
    for &t in times {
        chain.advance(t - now, dt, opts.integrator);
        now = t;
        let e = chain.energy();
        drift = drift.max(if e0 != 0.0 { ((e - e0) / e0).abs() } else { e.abs() });
        q.push(indices.iter().map(|&k| chain.q(k)).collect());
        p.push(indices.iter().map(|&k| chain.p(k)).collect());
    }
    Ok(Trajectory {
        solver: Solver::OdeTruncated,
        omega,
        indices: indices.to_vec(),
        time_grid: times.to_vec(),
        q,
        p: Some(p),
        meta: TrajectoryMeta {
            dt: Some(dt),
            integrator: Some(opts.integrator),
            half_width: Some(half),
            margin: Some(opts.margin),
            energy_drift: Some(drift),
        },
    })
}

/// ODE route on the report grid `0, 0.1, ..., T`.
pub fn solve_ode(ic: &InitialCondition, omega: f64, t_end: f64, dt: f64, indices: &[i64]) -> Result<Trajectory> {
    solve_ode_at(
        ic,
        omega,
        &time_grid(t_end, DEFAULT_REPORT_STEP),
        dt,
        indices,
        OdeOptions::default(),
    )
}

/// Whether the spectral route applies: finite `q^Delta` support or a
/// member verdict.
pub fn spectral_applicable(ic: &InitialCondition) -> std::result::Result<(), String> {
    match ic.delta_support() {
        DeltaSupport::Empty | DeltaSupport::Finite { .. } => Ok(()),
        DeltaSupport::Unbounded => {
            let v = classify(ic).verdict;
            if v.is_member() {
                Ok(())
            } else {
                Err(format!("classification verdict is {v:?}; use the ODE solver"))
            }
        }
    }
}

/// `q_n(t) = q_n(0) - (1/pi) int_0^pi K (Q+ cos(n l) + Q- sin(n l)) dl`
/// with `K = (1 - cos(2 omega t sin(l/2)))/(4 sin^2(l/2)) = (omega t)^2/2 sinc^2(omega t sin(l/2))`,
/// which is smooth on the closed interval.
pub fn solve_spectral(ic: &InitialCondition, omega: f64, times: &[f64], indices: &[i64]) -> Result<Trajectory> {
    check_common(omega, times, indices)?;
    spectral_applicable(ic).map_err(|reason| Error::NotApplicable {
        solver: "spectral".into(),
        reason,
    })?;
    let qd = delta_slice(ic);
    let extent = qd.offset().abs().max(qd.last().abs()) as f64;
    let nmax = indices.iter().map(|k| k.abs()).max().unwrap_or(0) as f64;
    let q0: Vec<f64> = indices.iter().map(|&k| ic.evaluate(k)).collect();
    let rows: Result<Vec<Vec<f64>>> = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(q0.clone());
            }
            let wt = omega * t;
            let panels = 2 * panels_for(PI, nmax.max(wt).max(extent)).max(16);
            let (xs, ws) = gl16().composite(0.0, PI, panels);
            let qf = q_delta_fourier(&qd, &xs)?;
            let kern: Vec<f64> = xs
                .iter()
                .zip(&ws)
                .map(|(l, w)| w * 0.5 * wt * wt * sinc(wt * (0.5 * l).sin()).powi(2))
                .collect();
            Ok(indices
                .iter()
                .zip(&q0)
                .map(|(&n, &q)| {
                    let nf = n as f64;
                    let mut acc = 0.0;
                    for i in 0..xs.len() {
                        let (s, c) = (nf * xs[i]).sin_cos();
                        acc += kern[i] * (qf[i].re * c + qf[i].im * s);
                    }
                    q - acc / PI
                })
                .collect())
        })
        .collect();
    Ok(Trajectory {
        solver: Solver::SpectralFormula,
        omega,
        indices: indices.to_vec(),
        time_grid: times.to_vec(),
        q: rows?,
        p: None,
        meta: TrajectoryMeta::default(),
    })
}

/// Number of even orders needed before `J_{2k}(x)` drops below 1e-17.
fn bessel_reach(x: f64) -> usize {
    (x.abs() + 10.0 * x.abs().cbrt() + 40.0) as usize
}

/// Sign initial data at `n >= 1` from the recurrence:
/// `J_0(x) + 2 sum_{k=1}^{n-1} J_{2k}(x) + J_{2n}(x)`, `x = 2 omega t`.
pub fn bessel_sign_series(omega: f64, n: u32, t: f64) -> f64 {
    let x = 2.0 * omega * t;
    let n = n as usize;
    let j = bessel_j_orders(2 * n, x);
    j[0] + 2.0 * j[2..2 * n].iter().step_by(2).sum::<f64>() + j[2 * n]
}

/// [`bessel_sign_series`] after checking it against the tail form
/// `1 - J_{2n}(x) - 2 sum_{k>n} J_{2k}(x)`, evaluated from the integral
/// definition; the two must agree to 1e-10.
pub fn solve_bessel_sign(omega: f64, n: u32, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let x = 2.0 * omega * t;
    let finite = bessel_sign_series(omega, n, t);
    let nu = n as usize;
    let kmax = nu + bessel_reach(x) / 2 + 1;
    let tail = bessel_even_sum_integral(nu + 1, kmax, x);
    let tail_form = 1.0 - bessel_j_integral(2 * n, x, 16) - 2.0 * tail;
    let diff = (finite - tail_form).abs();
    if diff > BESSEL_FORM_TOLERANCE {
        return Err(Error::Consistency {
            what: "Bessel series forms",
            diff,
            tol: BESSEL_FORM_TOLERANCE,
        });
    }
    Ok(finite)
}

/// Whether the Bessel-series route applies: sign data, or data that is
/// constant outside a finite table.
pub fn bessel_applicable(ic: &InitialCondition) -> bool {
    matches!(
        ic.rule,
        Rule::Sign | Rule::Spike { .. } | Rule::Constant { .. } | Rule::Custom(_)
    )
}

/// Green's function route `q_n(t) = sum_k J_{2(n-k)}(2 omega t) q_k(0)`,
/// summed in closed form for the constant part of the data.
pub fn solve_bessel(ic: &InitialCondition, omega: f64, times: &[f64], indices: &[i64]) -> Result<Trajectory> {
    check_common(omega, times, indices)?;
    if !bessel_applicable(ic) {
        return Err(Error::NotApplicable {
            solver: "bessel".into(),
            reason: format!("no Bessel series for `{}` data; use ode or spectral", ic.name()),
        });
    }
    let rows: Result<Vec<Vec<f64>>> = times
        .par_iter()
        .map(|&t| {
            let x = 2.0 * omega * t;
            indices
                .iter()
                .map(|&n| -> Result<f64> {
                    Ok(match &ic.rule {
                        Rule::Sign => match n {
                            0 => 0.0,
                            n if n > 0 => solve_bessel_sign(omega, n as u32, t)?,
                            n => -solve_bessel_sign(omega, (-n) as u32, t)?,
                        },
                        Rule::Spike { b } => {
                            let j = bessel_j_orders(2 * n.unsigned_abs() as usize, x);
                            1.0 + (b - 1.0) * j[2 * n.unsigned_abs() as usize]
                        }
                        Rule::Constant { value } => *value,
                        Rule::Custom(table) => {
                            let reach = table.keys().map(|k| (n - k).unsigned_abs() as usize).max().unwrap_or(0);
                            let j = bessel_j_orders(2 * reach, x);
                            table
                                .iter()
                                .map(|(k, v)| v * j[2 * (n - k).unsigned_abs() as usize])
                                .sum()
                        }
                        _ => unreachable!("checked by bessel_applicable"),
                    })
                })
                .collect()
        })
        .collect();
    Ok(Trajectory {
        solver: Solver::BesselSeries,
        omega,
        indices: indices.to_vec(),
        time_grid: times.to_vec(),
        q: rows?,
        p: None,
        meta: TrajectoryMeta::default(),
    })
}

/// Alternating data `(-1)^k cos(2 omega t)` and constant data.
pub fn closed_form(ic: &InitialCondition, omega: f64, times: &[f64], indices: &[i64]) -> Result<Trajectory> {
    check_common(omega, times, indices)?;
    let q = match &ic.rule {
        Rule::Alternating => times
            .iter()
            .map(|t| {
                let c = (2.0 * omega * t).cos();
                indices
                    .iter()
                    .map(|&k| if k.rem_euclid(2) == 0 { c } else { -c })
                    .collect()
            })
            .collect(),
        Rule::Constant { value } => vec![vec![*value; indices.len()]; times.len()],
        _ => {
            return Err(Error::NotApplicable {
                solver: "closed-form".into(),
                reason: format!("no closed form for `{}` data; use ode, spectral or bessel", ic.name()),
            })
        }
    };
    Ok(Trajectory {
        solver: Solver::ClosedForm,
        omega,
        indices: indices.to_vec(),
        time_grid: times.to_vec(),
        q,
        p: None,
        meta: TrajectoryMeta::default(),
    })
}

/// Dispatches to one route; the ODE route uses `dt` (or the default).
pub fn simulate(
    ic: &InitialCondition,
    omega: f64,
    times: &[f64],
    indices: &[i64],
    solver: Solver,
    dt: Option<f64>,
) -> Result<Trajectory> {
    match solver {
        Solver::OdeTruncated => solve_ode_at(
            ic,
            omega,
            times,
            dt.unwrap_or_else(|| default_dt(omega)),
            indices,
            OdeOptions::default(),
        ),
        Solver::SpectralFormula => solve_spectral(ic, omega, times, indices),
        Solver::BesselSeries => solve_bessel(ic, omega, times, indices),
        Solver::ClosedForm => closed_form(ic, omega, times, indices),
    }
}

/// Routes that apply to the initial condition, ODE first.
pub fn applicable_solvers(ic: &InitialCondition) -> Vec<Solver> {
    let mut v = vec![Solver::OdeTruncated];
    if spectral_applicable(ic).is_ok() {
        v.push(Solver::SpectralFormula);
    }
    if bessel_applicable(ic) {
        v.push(Solver::BesselSeries);
    }
    if matches!(ic.rule, Rule::Alternating | Rule::Constant { .. }) {
        v.push(Solver::ClosedForm);
    }
    v
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct PairDifference {
    pub a: Solver,
    pub b: Solver,
    pub max_diff: f64,
    /// `(t, k)` of the largest difference.
    pub at: (f64, i64),
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct CrossValidationReport {
    pub solvers: Vec<Solver>,
    pub tolerance: f64,
    pub pairs: Vec<PairDifference>,
    /// Routes that failed to run, with the reason.
    pub failures: Vec<(Solver, String)>,
    pub pass: bool,
}

pub fn max_difference(a: &Trajectory, b: &Trajectory) -> (f64, (f64, i64)) {
    let mut best = (0.0, (0.0, 0));
    for (i, t) in a.time_grid.iter().enumerate() {
        for (j, k) in a.indices.iter().enumerate() {
            let d = (a.q[i][j] - b.q[i][j]).abs();
            if d > best.0 || d.is_nan() {
                best = (d, (*t, *k));
            }
        }
    }
    best
}

/// Pairwise sup differences of every applicable route.
pub fn cross_validate(
    ic: &InitialCondition,
    omega: f64,
    times: &[f64],
    indices: &[i64],
) -> Result<CrossValidationReport> {
    check_common(omega, times, indices)?;
    let solvers = applicable_solvers(ic);
    let runs: Vec<(Solver, Result<Trajectory>)> = solvers
        .par_iter()
        .map(|&s| (s, simulate(ic, omega, times, indices, s, None)))
        .collect();
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (s, r) in runs {
        match r {
            Ok(tr) => ok.push(tr),
            Err(e) => failures.push((s, e.to_string())),
        }
    }
    let mut pairs = Vec::new();
    for i in 0..ok.len() {
        for j in i + 1..ok.len() {
            let (d, at) = max_difference(&ok[i], &ok[j]);
            pairs.push(PairDifference {
                a: ok[i].solver,
                b: ok[j].solver,
                max_diff: d,
                at,
                pass: d < CROSS_TOLERANCE,
            });
        }
    }
    let pass = failures.is_empty() && !pairs.is_empty() && pairs.iter().all(|p| p.pass);
    Ok(CrossValidationReport {
        solvers,
        tolerance: CROSS_TOLERANCE,
        pairs,
        failures,
        pass,
    })
}

/// Relative growth per doubling of T below which the sup counts as settled.
pub const SUP_GROWTH_TOLERANCE: f64 = 0.01;

/// `sup |q_k(t)|` over the indices and `t <= T` on the 0.1 report grid,
/// with the running sup over `T/8, T/4, T/2, T`.
pub fn boundedness_sweep(ic: &InitialCondition, omega: f64, t_end: f64, indices: &[i64]) -> Result<BoundSweepReport> {
    let times = time_grid(t_end, DEFAULT_REPORT_STEP);
    let solver = if bessel_applicable(ic) {
        Solver::BesselSeries
    } else if matches!(ic.rule, Rule::Alternating) {
        Solver::ClosedForm
    } else {
        Solver::OdeTruncated
    };
    let tr = simulate(ic, omega, &times, indices, solver, None)?;
    let mut grid = Vec::with_capacity(times.len() * indices.len());
    let mut values = Vec::with_capacity(grid.capacity());
    for (i, t) in times.iter().enumerate() {
        for (j, k) in indices.iter().enumerate() {
            grid.push([*k as f64, *t]);
            values.push(tr.q[i][j].abs());
        }
    }
    let mut report = BoundSweepReport::new(Target::Trajectory, ["k", "t"], grid, values, None);
    let trace: Vec<(f64, f64)> = [8.0, 4.0, 2.0, 1.0]
        .iter()
        .map(|d| {
            let cut = t_end / d;
            let sup = report
                .grid
                .iter()
                .zip(&report.values)
                .filter(|(g, _)| g[1] <= cut * (1.0 + 1e-12))
                .fold(0.0f64, |m, (_, v)| m.max(*v));
            (cut, sup)
        })
        .collect();
    let growth = match trace.as_slice() {
        [.., (_, a), (_, b)] => (b - a) / a.max(f64::MIN_POSITIVE),
        _ => 0.0,
    };
    report.verdict = if report.empirical_sup.is_finite() && growth < SUP_GROWTH_TOLERANCE {
        SweepVerdict::Pass
    } else {
        SweepVerdict::Fail
    };
    report.notes = format!(
        "solver {solver:?}; running sup grows by {:.3e} relative over the last doubling of T",
        growth
    );
    report.doubling_trace = trace;
    Ok(report)
}

/// `|q_n(T) - nu|` together with `sup_{T <= t <= 2T} |q_n(t) - nu|`.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
pub struct LimitApproach {
    pub n: i64,
    pub nu: f64,
    /// `(T, |q_n(T) - nu|, sup over [T, 2T])`
    pub points: Vec<(f64, f64, f64)>,
    pub pointwise_decreasing: bool,
    pub envelope_decreasing: bool,
}

pub fn limit_approach(ic: &InitialCondition, omega: f64, n: i64, nu: f64, horizons: &[f64]) -> Result<LimitApproach> {
    let solver = if bessel_applicable(ic) {
        Solver::BesselSeries
    } else {
        Solver::OdeTruncated
    };
    let points: Result<Vec<(f64, f64, f64)>> = horizons
        .par_iter()
        .map(|&t_end| {
            let times: Vec<f64> = time_grid(t_end, 0.25 / omega.max(1.0))
                .into_iter()
                .map(|s| t_end + s)
                .collect();
            let qs: Vec<f64> = match ic.rule {
                // the checked evaluation is costly at large 2 omega t
                Rule::Sign if n != 0 => times
                    .iter()
                    .map(|&t| n.signum() as f64 * bessel_sign_series(omega, n.unsigned_abs() as u32, t))
                    .collect(),
                _ => {
                    let tr = simulate(ic, omega, &times, &[n], solver, None)?;
                    tr.q.iter().map(|r| r[0]).collect()
                }
            };
            let at_t = (qs[0] - nu).abs();
            let env = qs.iter().fold(0.0f64, |m, q| m.max((q - nu).abs()));
            Ok((t_end, at_t, env))
        })
        .collect();
    let points = points?;
    let pointwise_decreasing = points.windows(2).all(|w| w[1].1 < w[0].1);
    let envelope_decreasing = points.windows(2).all(|w| w[1].2 < w[0].2);
    Ok(LimitApproach {
        n,
        nu,
        points,
        pointwise_decreasing,
        envelope_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_matches_cosine() {
        let ic = InitialCondition::alternating();
        let idx: Vec<i64> = (-5..=5).collect();
        let times = time_grid(5.0, 0.5);
        let tr = solve_ode_at(&ic, 1.0, &times, 1e-3, &idx, OdeOptions::default()).unwrap();
        let ex = closed_form(&ic, 1.0, &times, &idx).unwrap();
        assert!(max_difference(&tr, &ex).0 < 1e-9);
    }

    #[test]
    fn constant_stays_put() {
        let ic = InitialCondition::constant(2.0);
        let tr = solve_ode(&ic, 1.3, 3.0, 0.01, &[0, 5]).unwrap();
        assert!(tr.q.iter().flatten().all(|v| *v == 2.0));
    }

    #[test]
    fn bessel_sign_examples() {
        assert_eq!(solve_bessel_sign(0.5, 1, 0.0).unwrap(), 1.0);
        for n in 1..6 {
            assert!((solve_bessel_sign(0.5, n, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(solve_bessel_sign(0.5, 1, 400.0).unwrap().abs() < 0.1);
        assert!(solve_bessel_sign(0.5, 0, 1.0).is_err());
    }

    #[test]
    fn spectral_at_zero_and_sign_point() {
        let ic = InitialCondition::sign();
        let tr = solve_spectral(&ic, 0.5, &[0.0, 10.0], &[-3, 0, 5]).unwrap();
        assert_eq!(tr.q[0], vec![-1.0, 0.0, 1.0]);
        let b = solve_bessel_sign(0.5, 5, 10.0).unwrap();
        assert!((tr.q[1][2] - b).abs() < 1e-8);
        assert!(matches!(
            solve_spectral(&InitialCondition::alternating(), 1.0, &[1.0], &[0]),
            Err(Error::NotApplicable { .. })
        ));
    }

    #[test]
    fn spike_routes_agree() {
        let ic = InitialCondition::spike(3.0);
        let times = time_grid(12.0, 1.5);
        let idx = [-4, 0, 1, 7];
        let a = solve_spectral(&ic, 0.7, &times, &idx).unwrap();
        let b = solve_bessel(&ic, 0.7, &times, &idx).unwrap();
        let c = solve_ode_at(&ic, 0.7, &times, 0.01, &idx, OdeOptions::default()).unwrap();
        assert!(max_difference(&a, &b).0 < 1e-10);
        assert!(max_difference(&b, &c).0 < 1e-6);
    }

    #[test]
    fn window_guard() {
        let opts = OdeOptions {
            half_width: Some(10),
            ..OdeOptions::default()
        };
        let r = solve_ode_at(&InitialCondition::sign(), 1.0, &[5.0], 0.01, &[3], opts);
        assert!(matches!(r, Err(Error::WindowTooSmall { got: 10, required: 40 })));
        assert!(solve_ode(&InitialCondition::sign(), 1.0, 1.0, 0.5, &[0]).is_err());
    }

    #[test]
    fn solver_names() {
        assert_eq!("closed-form".parse::<Solver>().unwrap(), Solver::ClosedForm);
        assert!("rk4".parse::<Solver>().is_err());
    }

    #[test]
    fn boundedness_examples() {
        let r = boundedness_sweep(&InitialCondition::alternating(), 1.0, 20.0, &[0, 1]).unwrap();
        assert!((r.empirical_sup - 1.0).abs() < 1e-15);
        let r = boundedness_sweep(&InitialCondition::constant(-3.0), 1.0, 10.0, &[0, 4]).unwrap();
        assert_eq!(r.empirical_sup, 3.0);
        assert_eq!(r.verdict, SweepVerdict::Pass);
    }

    #[test]
    fn grid_includes_end() {
        let g = time_grid(1.0, 0.3);
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert_eq!(time_grid(40.0, 0.5).len(), 81);
    }
}
