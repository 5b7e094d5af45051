//! Evolution of circle-shaped data `X = x(t) + R e^{iθ(s,t)}`, where only
//! the parameterization `θ` and the center `x` move.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{PeskinError, Result};
use crate::geometry::Geometry;
use crate::grid::{CurveState, PeriodicGrid};
use crate::quadrature::periodic_trapezoid_complex;
use crate::scalar::Real;
use crate::stepper::{rk_step, StageVector, StepperConfig, TimeStep};

/// Smallest admissible `θ'` at a node.
pub const MONOTONICITY_MARGIN: f64 = 1e-8;

/// `θ(s) = s + φ(s)` with periodic `φ`, plus the center and radius.
#[derive(Clone, Debug)]
pub struct TangentialState<T: Real> {
    pub grid: PeriodicGrid<T>,
    pub phi_dev: Vec<T>,
    pub time: T,
    pub r_x: T,
    pub center: Complex<T>,
}

impl<T: Real> TangentialState<T> {
    pub fn new(grid: PeriodicGrid<T>, phi_dev: Vec<T>, r_x: T, center: Complex<T>) -> Result<Self> {
        if phi_dev.len() != grid.n() {
            return Err(PeskinError::InvalidInput(format!(
                "{} angle samples for {} nodes",
                phi_dev.len(),
                grid.n()
            )));
        }
        if !(r_x > T::zero() && r_x.is_finite()) {
            return Err(PeskinError::InvalidInput(format!("radius must be positive, got {r_x}")));
        }
        let s = Self { grid, phi_dev, time: T::zero(), r_x, center };
        s.theta_prime()?;
        Ok(s)
    }

    /// Samples `θ(s) = s + φ(s)` given `φ`.
    pub fn from_fn(n: usize, r_x: T, center: Complex<T>, phi: impl Fn(T) -> T) -> Result<Self> {
        let grid = PeriodicGrid::new(n)?;
        let p = grid.nodes().into_iter().map(phi).collect();
        Self::new(grid, p, r_x, center)
    }

    /// Reads `θ` off a curve whose image is a circle: `R = R_X`, the center
    /// is the area centroid, and `θ` is the unwrapped polar angle.
    pub fn from_curve(state: &CurveState<T>) -> Result<Self> {
        let g = Geometry::new(state)?;
        let r_x = g.effective_radius()?;
        let (center, _, _) = g.circle_deviation()?;
        let nodes = state.grid.nodes();
        let tau = T::TAU();
        let mut phi = Vec::with_capacity(state.n());
        let mut prev = T::zero();
        for (&z, &s) in state.x.iter().zip(&nodes) {
            let raw = (z - center).arg() - s;
            // nearest branch to the previous sample (to 0 for the first)
            let v = raw - tau * ((raw - prev) / tau).round();
            phi.push(v);
            prev = v;
        }
        let mut out = Self::new(state.grid.clone(), phi, r_x, center)?;
        out.time = state.time;
        Ok(out)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn theta(&self) -> Vec<T> {
        self.grid.nodes().iter().zip(&self.phi_dev).map(|(&s, &p)| s + p).collect()
    }

    /// `θ' = 1 + φ'`, rejecting non-monotone `θ`.
    pub fn theta_prime(&self) -> Result<Vec<T>> {
        let d: Vec<T> = self.grid.derivative_real(&self.phi_dev)?.into_iter().map(|v| v + T::one()).collect();
        let margin = T::lit(MONOTONICITY_MARGIN);
        if let Some((j, v)) = d.iter().enumerate().find(|(_, v)| !(**v >= margin)) {
            return Err(PeskinError::Degenerate(format!("θ' = {v} at node {j} (θ must increase)")));
        }
        Ok(d)
    }

    /// `‖θ'‖_{L²}`, the homogeneous `H¹` size of `θ`.
    pub fn h1_seminorm(&self) -> Result<T> {
        let d = self.theta_prime()?;
        let h = self.grid.spacing();
        Ok((d.iter().map(|&v| v * v).sum::<T>() * h).sqrt())
    }

    /// `‖θ' - 1‖_{L²}`.
    pub fn deviation_norm(&self) -> Result<T> {
        let d = self.theta_prime()?;
        let h = self.grid.spacing();
        Ok((d.iter().map(|&v| (v - T::one()) * (v - T::one())).sum::<T>() * h).sqrt())
    }
}

/// `θ_t(s) = (1/8π) pv ∫ θ'(s')² cot((θ(s') - θ(s))/2) ds'`.
pub fn tangential_rhs<T: Real>(state: &TangentialState<T>) -> Result<Vec<T>> {
    let d = state.theta_prime()?;
    let dd = state.grid.derivative_real(&d)?;
    let n = state.n();
    let h = state.grid.spacing();
    let p = &state.phi_dev;
    let half = T::lit(0.5);
    let scale = T::one() / (T::lit(8.0) * T::PI());
    let out: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..n {
                if j != i {
                    let gap = T::from_index(j) * h - T::from_index(i) * h + (p[j] - p[i]);
                    acc = acc + d[j] * d[j] / (gap * half).tan();
                }
            }
            // regular part at s' = s
            (acc + T::lit(3.0) * dd[i]) * h * scale
        })
        .collect();
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(PeskinError::Degenerate(format!("θ_t not finite at node {i}")));
    }
    Ok(out)
}

/// `v = -(R/8π) ∫ e^{iθ} θ'² ds`.
pub fn center_velocity<T: Real>(state: &TangentialState<T>) -> Result<Complex<T>> {
    let d = state.theta_prime()?;
    let f: Vec<Complex<T>> =
        state.theta().iter().zip(&d).map(|(&th, &dv)| Complex::from_polar(dv * dv, th)).collect();
    Ok(periodic_trapezoid_complex(&f) * (-state.r_x / (T::lit(8.0) * T::PI())))
}

/// `X = x + R e^{iθ}` on the same grid.
pub fn reconstruct<T: Real>(state: &TangentialState<T>) -> Result<CurveState<T>> {
    let x = state.theta().into_iter().map(|th| state.center + Complex::from_polar(state.r_x, th)).collect();
    CurveState::new(state.grid.clone(), x, state.time)
}

/// `φ` samples followed by the center, for the Runge–Kutta stages.
#[derive(Clone)]
struct Packed<T: Real> {
    phi: Vec<T>,
    center: Complex<T>,
}

impl<T: Real> StageVector<T> for Packed<T> {
    fn combine(&self, a: T, other: &Self, b: T) -> Self {
        Packed { phi: self.phi.combine(a, &other.phi, b), center: self.center * a + other.center * b }
    }
}

/// Co-integrates `θ` and `x(t)` to `config.t_end`, returning the states at
/// every `observe_every` steps and at the final time. A Courant factor uses
/// `dt = cfl·h/max θ'`, the same step the full solver picks for `X`.
pub fn advance_tangential<T: Real>(
    state: &TangentialState<T>,
    config: &StepperConfig<T>,
) -> Result<Vec<TangentialState<T>>> {
    config.validate()?;
    let dt = match config.step {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Cfl(c) => {
            let top = state.theta_prime()?.into_iter().fold(T::zero(), T::max);
            c * state.grid.spacing() / top
        }
    };
    let t0 = state.time;
    if config.t_end < t0 {
        return Err(PeskinError::InvalidInput("t_end precedes the initial time".into()));
    }
    let span = config.t_end - t0;
    let full = (span / dt).floor();
    let mut steps = full.to_usize().unwrap_or(0);
    if span - full * dt > dt * T::lit(1e-9) {
        steps += 1;
    }
    let mut out = vec![state.clone()];
    let mut cur = state.clone();
    for k in 1..=steps {
        let last = k == steps;
        let target = if last { config.t_end } else { t0 + T::from_index(k) * dt };
        let h = target - cur.time;
        let base = cur.clone();
        let y = Packed { phi: cur.phi_dev.clone(), center: cur.center };
        let next = rk_step(config.scheme, &y, h, |p: &Packed<T>| {
            let mut stage = base.clone();
            stage.phi_dev = p.phi.clone();
            Ok(Packed { phi: tangential_rhs(&stage)?, center: center_velocity(&stage)? })
        })
        .map_err(|e| PeskinError::StepRejected { time: cur.time.as_f64(), reason: e.to_string() })?;
        cur.phi_dev = match config.filter_threshold {
            Some(f) => {
                let z: Vec<Complex<T>> = next.phi.iter().map(|&v| Complex::new(v, T::zero())).collect();
                cur.grid.filter(&z, f)?.into_iter().map(|z| z.re).collect()
            }
            None => next.phi,
        };
        cur.center = next.center;
        cur.time = target;
        cur.theta_prime()
            .map_err(|e| PeskinError::StepRejected { time: target.as_f64(), reason: e.to_string() })?;
        if last || k % config.observe_every == 0 {
            out.push(cur.clone());
        }
    }
    Ok(out)
}
