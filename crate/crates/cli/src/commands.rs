use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use harmonic_core::acceptance;
use harmonic_core::bessel::identity_residual;
use harmonic_core::dynamics::{
    applicable_solvers, boundedness_sweep, cross_validate, simulate, time_grid, Solver, Trajectory, DEFAULT_REPORT_STEP,
};
use harmonic_core::lattice::InitialCondition;
use harmonic_core::oscillatory::{range_inclusive, run_sweep, RegimeQuantity, SweepSpec};
use harmonic_core::output::{csv_header_line, envelope, write_csv_row};
use harmonic_core::spectral::{classify, limits_for, SpectralProfile, Verdict};
use harmonic_core::sweep::{BoundSweepReport, Regime, SweepVerdict, Target};
use schemas::IdentityReport;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Format;
use crate::{exit, CliError, RunConfig};

type CmdResult = Result<i32, CliError>;

fn parse_ic(cfg: &mut RunConfig) -> Result<InitialCondition, CliError> {
    let raw = cfg.ic.clone().ok_or_else(|| CliError::usage("--ic is required"))?;
    let ic = match &raw {
        Value::String(s) => s.parse::<InitialCondition>()?,
        other => InitialCondition::from_json(other)?,
    };
    cfg.ic = Some(ic.to_json());
    Ok(ic)
}

fn format_of(cfg: &mut RunConfig, default: Format) -> Format {
    *cfg.format.get_or_insert(default)
}

fn writer(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(cfg: &RunConfig, report: &T) -> Result<(), CliError> {
    let text = envelope(&cfg.to_value(), report)?;
    let mut w = writer(cfg.out.as_deref())?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn json_only(cfg: &mut RunConfig, what: &str) -> Result<(), CliError> {
    match format_of(cfg, Format::Json) {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::usage(format!("{what} reports are JSON only"))),
    }
}

pub fn classify_cmd(cfg: &mut RunConfig) -> CmdResult {
    let ic = parse_ic(cfg)?;
    json_only(cfg, "classify")?;
    let report = classify(&ic);
    emit_json(cfg, &report)?;
    Ok(match report.verdict {
        Verdict::MemberByFiniteSupport | Verdict::MemberBySufficientCondition => exit::OK,
        Verdict::NonMember => exit::NON_MEMBER,
        Verdict::Inconclusive => exit::INCONCLUSIVE,
    })
}

/// Plot file for index `k`: `<stem>.k<k>.dat` next to `out`.
pub fn plot_path(out: &Path, k: i64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    out.with_file_name(format!("{stem}.k{k}.dat"))
}

fn write_trajectory_csv(header: &Value, tr: &Trajectory, out: Option<&Path>) -> io::Result<()> {
    let mut w = writer(out)?;
    w.write_all(csv_header_line(header).as_bytes())?;
    tr.write_csv(&mut w)?;
    w.flush()
}

pub fn simulate_cmd(cfg: &mut RunConfig) -> CmdResult {
    let ic = parse_ic(cfg)?;
    let omega = *cfg.omega.get_or_insert(1.0);
    let t_end = *cfg.t_end.get_or_insert(10.0);
    let step = *cfg.report_step.get_or_insert(DEFAULT_REPORT_STEP);
    let indices = cfg.indices.get_or_insert_with(|| vec![0]).clone();
    let solver_name = cfg.solver.get_or_insert_with(|| "ode".into()).clone();
    let format = format_of(cfg, Format::Csv);
    if !(t_end >= 0.0 && step > 0.0) {
        return Err(CliError::usage("need T >= 0 and report_step > 0"));
    }
    let times = time_grid(t_end, step);
    let applicable = applicable_solvers(&ic);
    let names = || {
        applicable
            .iter()
            .map(|s| format!("{s:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };

    if solver_name.eq_ignore_ascii_case("all") {
        if format == Format::Csv {
            return Err(CliError::usage("--solver all produces a JSON cross-validation report"));
        }
        let report = cross_validate(&ic, omega, &times, &indices)?;
        emit_json(cfg, &report)?;
        return Ok(if report.pass { exit::OK } else { exit::FAILED });
    }

    let solver: Solver = solver_name.parse().map_err(CliError::usage)?;
    if !applicable.contains(&solver) {
        return Err(CliError {
            code: exit::NOT_APPLICABLE,
            message: format!(
                "solver {solver:?} does not apply to {}; applicable: {}",
                ic.name(),
                names()
            ),
        });
    }
    let tr = simulate(&ic, omega, &times, &indices, solver, cfg.dt).map_err(|e| {
        let mut err = CliError::from(e);
        if err.code == exit::NOT_APPLICABLE {
            err.message.push_str(&format!("; applicable: {}", names()));
        }
        err
    })?;
    if solver == Solver::OdeTruncated {
        cfg.dt = tr.meta.dt;
    }
    let header = json!({ "config": cfg.to_value(), "meta": tr.meta, "solver": tr.solver, "omega": omega });
    match format {
        Format::Csv => write_trajectory_csv(&header, &tr, cfg.out.as_deref())?,
        Format::Json => emit_json(cfg, &tr)?,
    }
    if let Some(out) = cfg.out.as_deref() {
        for &k in &indices {
            let mut w = writer(Some(&plot_path(out, k)))?;
            w.write_all(csv_header_line(&header).as_bytes())?;
            tr.write_plot(k, &mut w)?;
            w.flush()?;
        }
    }
    Ok(exit::OK)
}

pub fn limits_cmd(cfg: &mut RunConfig) -> CmdResult {
    let ic = parse_ic(cfg)?;
    json_only(cfg, "limits")?;
    emit_json(cfg, &limits_for(&ic)?)?;
    Ok(exit::OK)
}

pub fn profile_cmd(cfg: &mut RunConfig) -> CmdResult {
    let ic = parse_ic(cfg)?;
    let profile = SpectralProfile::from_ic(&ic)?;
    match format_of(cfg, Format::Csv) {
        Format::Json => emit_json(cfg, &profile)?,
        Format::Csv => {
            let mut w = writer(cfg.out.as_deref())?;
            let header = json!({ "config": cfg.to_value(), "A": profile.a, "delta": profile.delta });
            w.write_all(csv_header_line(&header).as_bytes())?;
            profile.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(exit::OK)
}

fn emit_sweep(cfg: &mut RunConfig, report: &BoundSweepReport) -> CmdResult {
    match format_of(cfg, Format::Json) {
        Format::Json => emit_json(cfg, report)?,
        Format::Csv => {
            let mut w = writer(cfg.out.as_deref())?;
            let header = json!({
                "config": cfg.to_value(),
                "empirical_sup": report.empirical_sup,
                "argmax": report.argmax,
                "verdict": report.verdict,
            });
            w.write_all(csv_header_line(&header).as_bytes())?;
            writeln!(w, "{},{},value", report.axes[0], report.axes[1])?;
            for (p, v) in report.grid.iter().zip(&report.values) {
                write_csv_row(&mut w, &[p[0], p[1], *v])?;
            }
            w.flush()?;
        }
    }
    Ok(match report.verdict {
        SweepVerdict::Fail => exit::FAILED,
        _ => exit::OK,
    })
}

fn sweep_spec(cfg: &mut RunConfig, target: Target) -> Result<SweepSpec, CliError> {
    let regime_sweep = target == Target::RegimeC;
    let n_range = *cfg
        .n_range
        .get_or_insert(if regime_sweep { [10.0, 200.0] } else { [0.0, 200.0] });
    let step = *cfg
        .step
        .get_or_insert(if regime_sweep { [10.0, 0.0] } else { [1.0, 0.5] });
    let t_range = if regime_sweep || target == Target::V {
        cfg.t_range
    } else {
        Some(*cfg.t_range.get_or_insert([0.0, 400.0]))
    };
    let regime = cfg
        .regime
        .as_deref()
        .map(str::parse::<Regime>)
        .transpose()
        .map_err(CliError::usage)?;
    let quantity = match cfg.quantity.as_deref() {
        None => None,
        Some(q) if q.eq_ignore_ascii_case("c") => Some(RegimeQuantity::C),
        Some(q) if q.eq_ignore_ascii_case("l") => Some(RegimeQuantity::L),
        Some(q) => return Err(CliError::usage(format!("unknown quantity `{q}` (C or L)"))),
    };
    if regime_sweep && cfg.gamma.is_none() {
        return Err(CliError::usage("regime sweeps need --gamma"));
    }
    Ok(SweepSpec {
        target,
        n_range,
        t_range,
        gamma_list: cfg.gamma.clone(),
        step,
        regime,
        quantity,
        refine: *cfg.refine.get_or_insert(false),
    })
}

pub fn bounds_cmd(cfg: &mut RunConfig) -> CmdResult {
    let target: Target = cfg
        .target
        .get_or_insert_with(|| "G_n".into())
        .parse()
        .map_err(CliError::usage)?;
    if target == Target::Trajectory {
        let ic = parse_ic(cfg)?;
        let omega = *cfg.omega.get_or_insert(1.0);
        let t_end = *cfg.t_end.get_or_insert(100.0);
        let indices = cfg.indices.get_or_insert_with(|| vec![0]).clone();
        let report = boundedness_sweep(&ic, omega, t_end, &indices)?;
        return emit_sweep(cfg, &report);
    }
    let spec = sweep_spec(cfg, target)?;
    let report = run_sweep(&spec)?;
    emit_sweep(cfg, &report)
}

pub fn bessel_cmd(cfg: &mut RunConfig) -> CmdResult {
    let name = cfg.target.get_or_insert_with(|| "G_n".into()).clone();
    if name.eq_ignore_ascii_case("identity") {
        json_only(cfg, "identity")?;
        let [lo, hi] = *cfg.t_range.get_or_insert([0.0, 50.0]);
        let step = cfg.step.get_or_insert([0.0, 1.0])[1];
        let mut report = IdentityReport::default();
        for t in range_inclusive(lo, hi, step) {
            let k = (t / 2.0).ceil() as usize + 60;
            let r = identity_residual(t, k)?;
            report.points.push((t, k, r));
            report.max_residual = report.max_residual.max(r);
        }
        report.tolerance = 1e-10;
        report.pass = report.max_residual < report.tolerance;
        emit_json(cfg, &report)?;
        return Ok(if report.pass { exit::OK } else { exit::FAILED });
    }
    let target: Target = name.parse().map_err(CliError::usage)?;
    if !matches!(target, Target::G | Target::AltSumsOdd | Target::AltSumsEven) {
        return Err(CliError::usage(format!(
            "bessel targets are G_n, alt-sums-odd, alt-sums-even, identity; got `{name}`"
        )));
    }
    if target != Target::G && cfg.n_range.is_none() {
        cfg.n_range = Some([1.0, 200.0]);
    }
    let spec = sweep_spec(cfg, target)?;
    let report = run_sweep(&spec)?;
    emit_sweep(cfg, &report)
}

pub fn verify_cmd(cfg: &mut RunConfig) -> CmdResult {
    json_only(cfg, "verify")?;
    let ids = cfg
        .criteria
        .get_or_insert_with(|| acceptance::CRITERIA.iter().map(|c| c.0).collect())
        .clone();
    let mut outcomes = Vec::with_capacity(ids.len());
    for id in ids {
        let o = acceptance::run(id).ok_or_else(|| CliError::usage(format!("no criterion {id}")))?;
        eprintln!("{}", o.line());
        outcomes.push(o);
    }
    let all = outcomes.iter().all(|o| o.pass);
    eprintln!("{}", if all { "all criteria PASS" } else { "some criteria FAIL" });
    if cfg.out.is_some() {
        emit_json(cfg, &outcomes)?;
    }
    Ok(if all { exit::OK } else { exit::FAILED })
}

pub mod schemas {
    use schemars::JsonSchema;
    use serde::{Deserialize, Serialize};

    /// Residual of `J_0 + 2 sum_{k=1}^K J_2k = 1` over a `t` grid.
    #[derive(Clone, Debug, Default, Serialize, Deserialize, JsonSchema)]
    pub struct IdentityReport {
        /// `(t, K, residual)`
        pub points: Vec<(f64, usize, f64)>,
        pub max_residual: f64,
        pub tolerance: f64,
        pub pass: bool,
    }
}
