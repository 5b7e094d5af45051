//! Explicit time integration of `∂_t X = rhs(X)` with admissibility and
//! quadrature-health monitoring.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{PeskinError, Result};
use crate::geometry::{diagnostics, DiagnosticsReport, Geometry};
use crate::grid::CurveState;
use crate::quadrature::cauchy_identity_residual;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
    Ssprk3,
}

impl Scheme {
    /// Formal order of accuracy.
    pub fn order(self) -> u32 {
        match self {
            Scheme::Rk4 => 4,
            Scheme::Ssprk3 => 3,
        }
    }
}

/// Either a fixed step or a Courant factor resolved by [`estimate_dt`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep<T> {
    Fixed(T),
    Cfl(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig<T> {
    pub scheme: Scheme,
    pub step: TimeStep<T>,
    pub t_end: T,
    /// Relative Fourier filter level; `None` disables filtering.
    pub filter_threshold: Option<T>,
    pub observe_every: usize,
    /// Steps between O(n²) injectivity scans.
    pub injectivity_every: usize,
    /// Steps between Cauchy-identity health checks.
    pub health_every: usize,
    pub health_limit: T,
}

impl<T: Real> StepperConfig<T> {
    pub fn new(scheme: Scheme, step: TimeStep<T>, t_end: T) -> Self {
        Self {
            scheme,
            step,
            t_end,
            filter_threshold: None,
            observe_every: 1,
            injectivity_every: 10,
            health_every: 50,
            health_limit: T::lit(1e-4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.step {
            TimeStep::Fixed(dt) if !(dt > T::zero() && dt.is_finite()) => {
                return Err(PeskinError::InvalidInput(format!("dt must be positive, got {dt}")));
            }
            TimeStep::Cfl(c) if !(c > T::zero() && c <= T::one()) => {
                return Err(PeskinError::InvalidInput(format!("cfl must lie in (0, 1], got {c}")));
            }
            _ => {}
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return Err(PeskinError::InvalidInput(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if let Some(f) = self.filter_threshold {
            if !(f >= T::zero() && f < T::one()) {
                return Err(PeskinError::InvalidInput(format!("filter threshold must lie in [0, 1), got {f}")));
            }
        }
        if self.observe_every == 0 || self.injectivity_every == 0 || self.health_every == 0 {
            return Err(PeskinError::InvalidInput("observation and check intervals must be at least 1".into()));
        }
        if !(self.health_limit > T::zero()) {
            return Err(PeskinError::InvalidInput("health limit must be positive".into()));
        }
        Ok(())
    }
}

/// A vector that Runge–Kutta stages can combine.
pub trait StageVector<T: Real>: Sized {
    /// `a·self + b·other`.
    fn combine(&self, a: T, other: &Self, b: T) -> Self;
}

impl<T: Real> StageVector<T> for Vec<Complex<T>> {
    fn combine(&self, a: T, other: &Self, b: T) -> Self {
        self.iter().zip(other).map(|(x, y)| x * a + y * b).collect()
    }
}

impl<T: Real> StageVector<T> for Vec<T> {
    fn combine(&self, a: T, other: &Self, b: T) -> Self {
        self.iter().zip(other).map(|(&x, &y)| x * a + y * b).collect()
    }
}

/// One step of `scheme` for the autonomous system `y' = f(y)`.
pub fn rk_step<T: Real, S: StageVector<T>>(
    scheme: Scheme,
    y: &S,
    dt: T,
    f: impl Fn(&S) -> Result<S>,
) -> Result<S> {
    let one = T::one();
    match scheme {
        Scheme::Rk4 => {
            let half = dt * T::lit(0.5);
            let k1 = f(y)?;
            let k2 = f(&y.combine(one, &k1, half))?;
            let k3 = f(&y.combine(one, &k2, half))?;
            let k4 = f(&y.combine(one, &k3, dt))?;
            let sixth = dt / T::lit(6.0);
            let third = dt / T::lit(3.0);
            Ok(y.combine(one, &k1, sixth).combine(one, &k2, third).combine(one, &k3, third).combine(one, &k4, sixth))
        }
        Scheme::Ssprk3 => {
            let u1 = y.combine(one, &f(y)?, dt);
            let u1 = u1.combine(one, &f(&u1)?, dt);
            let u2 = y.combine(T::lit(0.75), &u1, T::lit(0.25));
            let u2s = u2.combine(one, &f(&u2)?, dt);
            Ok(y.combine(T::one() / T::lit(3.0), &u2s, T::lit(2.0) / T::lit(3.0)))
        }
    }
}

/// Courant-limited step `cfl·h·R_X / max(max|X'|, 10⁻⁶R_X)`.
pub fn estimate_dt<T: Real>(state: &CurveState<T>, cfl: T) -> Result<T> {
    let g = Geometry::new(state)?;
    let r = g.effective_radius()?;
    let top = g.stretch().iter().copied().fold(T::zero(), T::max);
    Ok(cfl * state.grid.spacing() * r / top.max(r * T::lit(1e-6)))
}

fn reject<T: Real>(time: T, err: PeskinError) -> PeskinError {
    match err {
        e @ PeskinError::StepRejected { .. } => e,
        e @ PeskinError::QuadratureHealth { .. } => e,
        e => PeskinError::StepRejected { time: time.as_f64(), reason: e.to_string() },
    }
}

fn advance_one<T: Real, F>(
    state: &CurveState<T>,
    rhs: &F,
    dt: T,
    config: &StepperConfig<T>,
    scan_pairs: bool,
) -> Result<CurveState<T>>
where
    F: Fn(&CurveState<T>) -> Result<Vec<Complex<T>>>,
{
    let grid = state.grid.clone();
    let t0 = state.time;
    let x = rk_step(config.scheme, &state.x, dt, |y: &Vec<Complex<T>>| {
        let stage = CurveState::new(grid.clone(), y.clone(), t0)?;
        rhs(&stage)
    })
    .map_err(|e| reject(t0, e))?;
    let t1 = t0 + dt;
    let x = match config.filter_threshold {
        Some(f) => grid.filter(&x, f).map_err(|e| reject(t1, e))?,
        None => x,
    };
    let next = CurveState::new(grid, x, t1).map_err(|e| reject(t1, e))?;
    let dx = next.tangent().map_err(|e| reject(t1, e))?;
    next.check_stretch(&dx).map_err(|e| reject(t1, e))?;
    if scan_pairs {
        next.check_injective().map_err(|e| reject(t1, e))?;
    }
    Ok(next)
}

/// One step with full admissibility re-validation.
pub fn step<T: Real, F>(state: &CurveState<T>, rhs: &F, dt: T, config: &StepperConfig<T>) -> Result<CurveState<T>>
where
    F: Fn(&CurveState<T>) -> Result<Vec<Complex<T>>>,
{
    advance_one(state, rhs, dt, config, true)
}

/// Observed snapshots with their diagnostics. `failure` is set when the run
/// stopped early; the snapshots up to that point are kept.
#[derive(Debug)]
pub struct Trajectory<T: Real> {
    pub snapshots: Vec<CurveState<T>>,
    pub reports: Vec<DiagnosticsReport<T>>,
    pub dt: T,
    pub failure: Option<PeskinError>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &CurveState<T> {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// The failure, if any, as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// Integrates from `state.time` to `config.t_end`, observing every
/// `observe_every` steps and at the final time. The last step is shortened so
/// the run ends exactly at `t_end`.
pub fn advance<T: Real, F>(
    state: &CurveState<T>,
    config: &StepperConfig<T>,
    rhs: F,
    mut observer: impl FnMut(&CurveState<T>, &DiagnosticsReport<T>),
) -> Result<Trajectory<T>>
where
    F: Fn(&CurveState<T>) -> Result<Vec<Complex<T>>>,
{
    config.validate()?;
    state.check_admissible()?;
    let dt = match config.step {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Cfl(c) => estimate_dt(state, c)?,
    };
    let t_start = state.time;
    if config.t_end < t_start {
        return Err(PeskinError::InvalidInput(format!(
            "t_end = {} precedes the initial time {t_start}",
            config.t_end
        )));
    }
    let report = diagnostics(state)?;
    observer(state, &report);
    let mut traj = Trajectory { snapshots: vec![state.clone()], reports: vec![report], dt, failure: None };

    let span = config.t_end - t_start;
    let full = (span / dt).floor();
    let tail = span - full * dt;
    let mut steps = full.to_usize().unwrap_or(0);
    // a sliver below roundoff is absorbed into the last full step
    let has_tail = tail > dt * T::lit(1e-9);
    if has_tail {
        steps += 1;
    }
    let mut current = state.clone();
    for k in 1..=steps {
        let last = k == steps;
        let target = if last { config.t_end } else { t_start + T::from_index(k) * dt };
        let h = target - current.time;
        let scan = last || k % config.injectivity_every == 0;
        let mut next = match advance_one(&current, &rhs, h, config, scan) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("run stopped at t = {}: {e}", current.time);
                traj.failure = Some(e);
                return Ok(traj);
            }
        };
        next.time = target;
        if k % config.health_every == 0 {
            let residual = cauchy_identity_residual(&next, 0).map(|z| z.norm());
            match residual {
                Ok(r) if r <= config.health_limit => {}
                Ok(r) => {
                    traj.failure = Some(PeskinError::QuadratureHealth {
                        time: target.as_f64(),
                        residual: r.as_f64(),
                        limit: config.health_limit.as_f64(),
                    });
                    return Ok(traj);
                }
                Err(e) => {
                    traj.failure = Some(reject(target, e));
                    return Ok(traj);
                }
            }
        }
        if last || k % config.observe_every == 0 {
            match diagnostics(&next) {
                Ok(report) => {
                    observer(&next, &report);
                    traj.snapshots.push(next.clone());
                    traj.reports.push(report);
                }
                Err(e) => {
                    traj.failure = Some(reject(target, e));
                    return Ok(traj);
                }
            }
        }
        current = next;
    }
    Ok(traj)
}
