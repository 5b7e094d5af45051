//! The commands behind the `peskin` binary. Each writes human-readable lines
//! to the given sink and returns the checks it ran; [`exit_code`] maps the
//! outcome to the process status.

use std::io::Write;
use std::path::Path;

use crate::error::{PeskinError, Result};
use crate::geometry::diagnostics;
use crate::io::{load_checkpoint, make_initial, write_checkpoint, write_series, Elasticity, InitialSpec, SimConfig};
use crate::stepper::{advance, estimate_dt, TimeStep, Trajectory};
use crate::tangential::TangentialState;
use crate::verify::{
    area_conservation_check, check_monotone, check_monotone_from, compare_with_tangential, consistency_residuals,
    convergence_study, curvature_envelope_check, equilibrium_convergence_check, geometry_inequality_suite,
    phi_decay_check, report_values, z_norm_checks, CheckResult, ConsistencyOptions, ConvergenceSpec, Direction,
    GeometryTolerances, MonitorSeries, TangentialTolerances, SERIES_COLUMNS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Slack of every monotonicity monitor, relative to the field's scale.
pub const MONOTONE_SLACK: f64 = 1e-6;
/// Lower stretch bounds are monitored only after this initial layer.
pub const STRETCH_SETTLE_TIME: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Monotone,
    Decay,
    Geometry,
    Consistency,
    All,
}

/// `0` when every judged check passed, `1` on a failed check, `2` for bad
/// input, `3` when the evolution itself broke down.
pub fn exit_code(outcome: &Result<Vec<CheckResult>>) -> i32 {
    match outcome {
        Ok(checks) if checks.iter().any(CheckResult::failed) => EXIT_CHECK_FAILED,
        Ok(_) => EXIT_OK,
        Err(e) if e.is_runtime_failure() => EXIT_RUNTIME,
        Err(_) => EXIT_CONFIG,
    }
}

fn describe(config: &SimConfig) -> String {
    serde_json::to_string(&config.initial).unwrap_or_default()
}

fn sink_error(e: std::io::Error) -> PeskinError {
    PeskinError::Io { path: "<output>".into(), source: e }
}

/// Integrates the configured run. A breakdown mid-run comes back as the
/// trajectory up to that point plus its error.
pub fn run(config: &SimConfig) -> Result<(Trajectory<f64>, Option<PeskinError>)> {
    let x0 = config.initial_state()?;
    let velocity = config.velocity()?;
    let mut traj = advance(&x0, &config.stepper(), velocity, |_, _| {})?;
    let failure = traj.failure.take();
    Ok((traj, failure))
}

fn series_of(config: &SimConfig, traj: &Trajectory<f64>) -> Result<MonitorSeries> {
    MonitorSeries::from_trajectory(traj, config.scheme, describe(config))
}

/// Runs the config and writes the series, the final checkpoint and any
/// periodic checkpoints under `out` (default: the config's output directory).
pub fn cmd_simulate(config: &SimConfig, out: Option<&Path>, w: &mut impl Write) -> Result<Vec<CheckResult>> {
    let dir = out.unwrap_or(&config.output.dir);
    let (traj, failure) = run(config)?;
    let series = series_of(config, &traj)?;
    write_series(&series, &dir.join(&config.output.series))?;
    write_checkpoint(traj.last(), &dir.join(&config.output.checkpoint))?;
    if config.output.checkpoint_every > 0 {
        for (k, snap) in traj.snapshots.iter().enumerate().step_by(config.output.checkpoint_every) {
            write_checkpoint(snap, &dir.join(format!("checkpoint_{k:05}.csv")))?;
        }
    }
    let last = series.last();
    writeln!(
        w,
        "simulated to t = {} with dt = {:.6e}: {} observations, R_X = {:.12}, phi_star = {:.6e}",
        last.time,
        traj.dt,
        series.len(),
        last.r_x,
        last.phi_star
    )
    .map_err(sink_error)?;
    writeln!(w, "wrote {}", dir.display()).map_err(sink_error)?;
    match failure {
        Some(e) => {
            writeln!(w, "run stopped early: {e}").map_err(sink_error)?;
            Err(e)
        }
        None => Ok(Vec::new()),
    }
}

/// Prints the diagnostics of a checkpoint as one JSON object.
pub fn cmd_diagnose(curve: &Path, w: &mut impl Write) -> Result<Vec<CheckResult>> {
    let state = load_checkpoint(curve)?;
    let report = diagnostics(&state)?;
    let map: serde_json::Map<String, serde_json::Value> = SERIES_COLUMNS
        .iter()
        .zip(report_values(&report))
        .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
        .collect();
    writeln!(w, "{}", serde_json::Value::Object(map)).map_err(sink_error)?;
    Ok(Vec::new())
}

fn skip_unless_hypothesis(series: &MonitorSeries, check: Result<CheckResult>) -> Result<CheckResult> {
    let phi0 = series.first().phi_star;
    let check = check?;
    if phi0 < std::f64::consts::FRAC_PI_4 {
        Ok(check)
    } else {
        Ok(CheckResult::skipped(check.name, format!("hypothesis unmet: Φ*(0) = {phi0:.6} is not below π/4")))
    }
}

/// Every monotonicity principle of the run.
pub fn monotone_suite(series: &MonitorSeries) -> Result<Vec<CheckResult>> {
    use Direction::*;
    let mut out = vec![skip_unless_hypothesis(series, check_monotone(series, "phi_star", NonIncreasing, MONOTONE_SLACK))?];
    out.extend(curvature_envelope_check(series, MONOTONE_SLACK, 1e-9)?);
    for field in ["length", "energy", "stretch_max"] {
        out.push(check_monotone(series, field, NonIncreasing, MONOTONE_SLACK)?);
    }
    let settled = series.rows.iter().filter(|r| r.time >= STRETCH_SETTLE_TIME).count() >= 2;
    for field in ["stretch_min", "well_stretched"] {
        let check = if settled {
            skip_unless_hypothesis(
                series,
                check_monotone_from(series, field, NonDecreasing, MONOTONE_SLACK, STRETCH_SETTLE_TIME),
            )?
        } else {
            CheckResult::skipped(format!("{field} non-decreasing"), "run ends before the settling time")
        };
        out.push(check);
    }
    Ok(out)
}

/// Conservation, decay envelopes and relaxation to equilibrium.
pub fn decay_suite(series: &MonitorSeries) -> Result<Vec<CheckResult>> {
    let mut out = vec![area_conservation_check(series, 1e-6), phi_decay_check(series, 1e-3), z_norm_checks(series)];
    let t_end = series.last().time;
    if t_end >= 10.0 {
        out.extend(equilibrium_convergence_check(series, t_end / 4.0, 1e-3)?);
    }
    Ok(out)
}

/// The inequality suite on the first, middle and last snapshots.
pub fn geometry_suite(traj: &Trajectory<f64>) -> Result<Vec<CheckResult>> {
    let k = traj.snapshots.len();
    let mut picks = vec![0, k / 2, k - 1];
    picks.dedup();
    let mut out = Vec::new();
    for j in picks {
        let snap = &traj.snapshots[j];
        for mut c in geometry_inequality_suite(snap, &GeometryTolerances::default())? {
            c.name = format!("t = {:.4}: {}", snap.time, c.name);
            out.push(c);
        }
    }
    Ok(out)
}

fn print_checks(checks: &[CheckResult], w: &mut impl Write) -> Result<()> {
    for c in checks {
        writeln!(w, "{}", c.summary()).map_err(sink_error)?;
        for n in &c.notes {
            writeln!(w, "    {n}").map_err(sink_error)?;
        }
    }
    let failed = checks.iter().filter(|c| c.failed()).count();
    let skipped = checks.iter().filter(|c| !c.passed() && !c.failed()).count();
    writeln!(w, "{} checks: {} passed, {failed} failed, {skipped} skipped", checks.len(), checks.len() - failed - skipped)
        .map_err(sink_error)
}

/// Runs the config and the named suite; `report` receives the checks as JSON.
pub fn cmd_verify(config: &SimConfig, suite: Suite, report: Option<&Path>, w: &mut impl Write) -> Result<Vec<CheckResult>> {
    let (traj, failure) = run(config)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let series = series_of(config, &traj)?;
    let mut checks = Vec::new();
    if matches!(suite, Suite::Monotone | Suite::All) {
        checks.extend(monotone_suite(&series)?);
    }
    if matches!(suite, Suite::Decay | Suite::All) {
        checks.extend(decay_suite(&series)?);
    }
    if matches!(suite, Suite::Geometry | Suite::All) {
        checks.extend(geometry_suite(&traj)?);
    }
    if matches!(suite, Suite::Consistency | Suite::All) {
        if config.elasticity != Elasticity::default() {
            checks.push(CheckResult::skipped("consistency", "the derived equations are for Hookean k0 = 1"));
        } else {
            checks.extend(consistency_residuals(&traj, &ConsistencyOptions::default())?);
        }
    }
    print_checks(&checks, w)?;
    if let Some(path) = report {
        let text = serde_json::to_string_pretty(&checks).expect("checks serialize");
        std::fs::write(path, text).map_err(|source| PeskinError::Io { path: path.into(), source })?;
    }
    Ok(checks)
}

/// The tangential model's data `θ₀ - s` for circular initial data.
fn tangential_initial(config: &SimConfig) -> Result<TangentialState<f64>> {
    let bad = |m: &str| PeskinError::Config { path: "initial".into(), message: m.into() };
    if config.elasticity != Elasticity::default() {
        return Err(PeskinError::Config {
            path: "elasticity".into(),
            message: "the tangential model is for Hookean k0 = 1".into(),
        });
    }
    let (radius, center, a, b) = match &config.initial {
        InitialSpec::UniformCircle { radius, center } => (*radius, *center, Vec::new(), Vec::new()),
        InitialSpec::ReparamCircle { radius, center, a, b } => (*radius, *center, a.clone(), b.clone()),
        _ => return Err(bad("compare-tangential needs uniform_circle or reparam_circle data")),
    };
    make_initial(&config.initial, config.n, config.seed)?;
    TangentialState::from_fn(config.n, radius, num_complex::Complex::new(center[0], center[1]), |s| {
        let mut phi = 0.0;
        for (k, v) in a.iter().enumerate() {
            phi += v * ((k + 1) as f64 * s).sin();
        }
        for (k, v) in b.iter().enumerate() {
            phi += v * ((k + 1) as f64 * s).cos();
        }
        phi
    })
}

pub fn cmd_compare_tangential(config: &SimConfig, w: &mut impl Write) -> Result<Vec<CheckResult>> {
    let initial = tangential_initial(config)?;
    let cmp = compare_with_tangential(&initial, &config.stepper(), &TangentialTolerances::default())?;
    writeln!(w, "matched dt = {:.6e}", cmp.dt).map_err(sink_error)?;
    for (t, d) in &cmp.deviation {
        writeln!(w, "t = {t:.6}  deviation = {d:.6e}").map_err(sink_error)?;
    }
    print_checks(&cmp.checks, w)?;
    Ok(cmp.checks)
}

/// Temporal levels from the configured step down by factors of two, and
/// spatial sizes from `n/16` to `2n`.
pub fn cmd_converge(config: &SimConfig, w: &mut impl Write) -> Result<Vec<CheckResult>> {
    let x0 = config.initial_state()?;
    let dt0 = match config.time_step() {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Cfl(c) => estimate_dt(&x0, c)?,
    };
    let sizes: Vec<usize> = [16, 8, 4, 2, 1]
        .iter()
        .map(|d| config.n / d)
        .filter(|&m| m >= crate::grid::MIN_NODES && m % 2 == 0)
        .chain([2 * config.n])
        .collect();
    let spec = ConvergenceSpec { scheme: config.scheme, t_end: config.t_end, dt0, time_levels: 4, sizes, spatial_floor: 1e-11 };
    let mut initial = config.initial.clone();
    if let InitialSpec::FromFile { resample, .. } = &mut initial {
        *resample = true;
    }
    let report = convergence_study(&x0, |m| make_initial(&initial, m, config.seed), &spec)?;
    writeln!(w, "temporal ({:?}, t_end = {}):", config.scheme, config.t_end).map_err(sink_error)?;
    for l in &report.temporal {
        writeln!(w, "  dt = {:.6e}  error = {:?}  order = {:?}", l.dt, l.error, l.order).map_err(sink_error)?;
    }
    writeln!(w, "spatial (velocity against n = {}):", 2 * config.n).map_err(sink_error)?;
    for l in &report.spatial {
        writeln!(w, "  n = {}  residual = {:.3e}  ratio = {:?}", l.n, l.residual, l.ratio).map_err(sink_error)?;
    }
    let checks = report.checks(0.5, 10.0, spec.spatial_floor);
    print_checks(&checks, w)?;
    Ok(checks)
}
