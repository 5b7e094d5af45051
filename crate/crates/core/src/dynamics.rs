//! Velocity of the elastic string and the evolution laws of its derived
//! quantities (stretch, tangent angle, `Φ`, curvature, `Z`).
//!
//! The derived laws are not evolved; they exist so that a trajectory of the
//! contour equation can be checked against them.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{PeskinError, Result};
use crate::grid::{eval_series, CurveState, PeriodicGrid};
use crate::quadrature::{periodic_trapezoid, CurvePoint, CurveSampler};
use crate::scalar::Real;

/// Velocity samples `∂_t X(s_j)`.
pub type VelocityField<T> = Vec<Complex<T>>;

/// Elastic tension law: `k₀|X'|` (Hookean) or `q(s)|X'|`.
#[derive(Clone, Debug, PartialEq)]
pub enum TensionProfile<T: Real> {
    Hookean { k0: T },
    General { q: Vec<T> },
}

impl<T: Real> TensionProfile<T> {
    /// Tension density at every node of an `n`-grid.
    pub fn samples(&self, n: usize) -> Result<Vec<T>> {
        let q = match self {
            TensionProfile::Hookean { k0 } => vec![*k0; n],
            TensionProfile::General { q } => {
                if q.len() != n {
                    return Err(PeskinError::InvalidTension(format!(
                        "{} tension samples for {n} nodes",
                        q.len()
                    )));
                }
                q.clone()
            }
        };
        if let Some((j, v)) = q.iter().enumerate().find(|(_, v)| !(**v > T::zero() && v.is_finite())) {
            return Err(PeskinError::InvalidTension(format!("q = {v} at node {j} is not positive")));
        }
        Ok(q)
    }
}

/// `u(s_i) = (1/4π) pv ∫ w(s') Re[X'(s')²/ΔX²] ΔX ds'`, `ΔX = X(s') - X(s_i)`.
fn weighted_velocity<T: Real>(
    x: &[Complex<T>],
    dx: &[Complex<T>],
    w: &[T],
    limit: &[Complex<T>],
    h: T,
) -> Result<VelocityField<T>> {
    let n = x.len();
    let scale = T::one() / (T::lit(4.0) * T::PI());
    let u: VelocityField<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                if j != i {
                    let d = x[j] - x[i];
                    let k = (dx[j] * dx[j] / (d * d)).re * w[j];
                    acc = acc + d * k;
                }
            }
            (acc + limit[i]) * h * scale
        })
        .collect();
    if let Some(i) = u.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(PeskinError::Geometry(format!("velocity is not finite at node {i} (coincident nodes)")));
    }
    Ok(u)
}

/// Hookean velocity with `k₀ = 1`.
pub fn hookean_rhs<T: Real>(state: &CurveState<T>) -> Result<VelocityField<T>> {
    let (dx, ddx) = state.derivatives()?;
    state.check_stretch(&dx)?;
    let half = T::lit(0.5);
    // regular part at s' = s: X''/2 + X' Re(X''/X')
    let limit: Vec<Complex<T>> =
        dx.iter().zip(&ddx).map(|(&d1, &d2)| d2 * half + d1 * (d2 / d1).re).collect();
    let w = vec![T::one(); state.n()];
    weighted_velocity(&state.x, &dx, &w, &limit, state.grid.spacing())
}

/// Velocity under tension density `q`.
pub fn general_rhs<T: Real>(state: &CurveState<T>, tension: &TensionProfile<T>) -> Result<VelocityField<T>> {
    let q = tension.samples(state.n())?;
    let (dx, ddx) = state.derivatives()?;
    state.check_stretch(&dx)?;
    let dq = state.grid.derivative_real(&q)?;
    let half = T::lit(0.5);
    let limit: Vec<Complex<T>> = (0..state.n())
        .map(|j| (ddx[j] * half + dx[j] * (ddx[j] / dx[j]).re) * q[j] + dx[j] * dq[j])
        .collect();
    weighted_velocity(&state.x, &dx, &q, &limit, state.grid.spacing())
}

/// Result of mapping a general-tension curve to its Hookean counterpart.
#[derive(Clone, Debug)]
pub struct HookeanReparam<T: Real> {
    pub k0: T,
    /// `ξ(s_j) = ∫_0^{s_j} k₀/q`.
    pub xi: Vec<T>,
    /// `Y` on the uniform grid, with `Y(ξ(s)) = X(s)`.
    pub y: CurveState<T>,
}

/// Evaluates `ξ(s)` and `ξ'(s)` off-grid from the spectral data of `ξ - s` and `q`.
struct XiMap<T: Real> {
    periodic: Vec<Complex<T>>,
    inv_q: Vec<Complex<T>>,
    k0: T,
}

impl<T: Real> XiMap<T> {
    fn value(&self, s: T) -> T {
        s + eval_series(&self.periodic, s).re
    }

    fn slope(&self, s: T) -> T {
        self.k0 * eval_series(&self.inv_q, s).re
    }

    /// Newton iteration for `ξ(s) = τ`, safeguarded by bisection.
    fn invert(&self, tau: T) -> T {
        let mut lo = tau - T::TAU();
        let mut hi = tau + T::TAU();
        let mut s = tau;
        for _ in 0..100 {
            let f = self.value(s) - tau;
            if f.abs() <= T::epsilon() * T::lit(8.0) * (T::one() + tau.abs()) {
                break;
            }
            if f > T::zero() {
                hi = hi.min(s);
            } else {
                lo = lo.max(s);
            }
            let next = s - f / self.slope(s);
            s = if next > lo && next < hi { next } else { (lo + hi) * T::lit(0.5) };
        }
        s
    }
}

fn xi_map<T: Real>(grid: &PeriodicGrid<T>, q: &[T]) -> Result<(XiMap<T>, Vec<T>)> {
    let inv: Vec<T> = q.iter().map(|&v| T::one() / v).collect();
    let (cum, total) = grid.cumulative_integral(&inv)?;
    let k0 = T::TAU() / total;
    let xi: Vec<T> = cum.iter().map(|&c| c * k0).collect();
    if xi.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PeskinError::InvalidTension("ξ is not strictly increasing".into()));
    }
    let nodes = grid.nodes();
    let periodic: Vec<Complex<T>> =
        xi.iter().zip(&nodes).map(|(&v, &s)| Complex::new(v - s, T::zero())).collect();
    let inv_c: Vec<Complex<T>> = inv.iter().map(|&v| Complex::new(v, T::zero())).collect();
    let map = XiMap { periodic: grid.coefficients(&periodic)?, inv_q: grid.coefficients(&inv_c)?, k0 };
    Ok((map, xi))
}

/// `k₀ = 2π/∫q⁻¹`, `ξ`, and `Y = X∘ξ⁻¹` resampled on the uniform grid.
/// `Y'(ξ(s)) = q(s)X'(s)/k₀`.
pub fn reparameterize_to_hookean<T: Real>(
    state: &CurveState<T>,
    tension: &TensionProfile<T>,
) -> Result<HookeanReparam<T>> {
    let q = tension.samples(state.n())?;
    let grid = &state.grid;
    let (map, xi) = xi_map(grid, &q)?;
    let cx = grid.coefficients(&state.x)?;
    let y: Vec<Complex<T>> = grid.nodes().into_iter().map(|tau| eval_series(&cx, map.invert(tau))).collect();
    let y = CurveState::new(grid.clone(), y, state.time)?;
    Ok(HookeanReparam { k0: map.k0, xi, y })
}

/// `‖general_rhs(X, q) - k₀ hookean_rhs(Y)∘ξ‖_∞ / ‖general_rhs(X, q)‖_∞`.
pub fn reparam_consistency_residual<T: Real>(state: &CurveState<T>, tension: &TensionProfile<T>) -> Result<T> {
    let u = general_rhs(state, tension)?;
    let rep = reparameterize_to_hookean(state, tension)?;
    let v = hookean_rhs(&rep.y)?;
    let cv = state.grid.coefficients(&v)?;
    let mut num = T::zero();
    let mut den = T::zero();
    for (j, uj) in u.iter().enumerate() {
        let vj = eval_series(&cv, rep.xi[j]) * rep.k0;
        num = num.max((uj - vj).norm());
        den = den.max(uj.norm());
    }
    if den > T::zero() {
        Ok(num / den)
    } else {
        Ok(num)
    }
}

#[inline]
fn phi_at<T: Real>(a: &CurvePoint<T>, b: &CurvePoint<T>) -> T {
    let d = a.x - b.x;
    (a.dx * b.dx / (d * d)).arg()
}

fn rows<T: Real>(state: &CurveState<T>, f: impl Fn(&CurveSampler<T>, usize) -> T + Sync) -> Result<Vec<T>> {
    state.check_admissible()?;
    let sampler = CurveSampler::new(state)?;
    let out: Vec<T> = (0..state.n()).into_par_iter().map(|i| f(&sampler, i)).collect();
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(PeskinError::Geometry(format!("rate is not finite at node {i}")));
    }
    Ok(out)
}

/// `∂_t|X'|` at each node.
pub fn rhs_stretch<T: Real>(state: &CurveState<T>) -> Result<Vec<T>> {
    let c = T::one() / (T::lit(4.0) * T::PI());
    rows(state, |sp, i| {
        let p = sp.origin(i);
        let a = p.stretch();
        let pv = sp.pv_row(i, |q| {
            let phi = phi_at(q, &p);
            let b = q.stretch();
            b / (q.x - p.x).norm_sqr() * (b * (phi + phi).cos() - a * phi.cos())
        });
        a * c * pv
    })
}

/// `∂_t α` where `X' = |X'| e^{iα}`.
pub fn rhs_alpha<T: Real>(state: &CurveState<T>) -> Result<Vec<T>> {
    let c = T::one() / T::TAU();
    rows(state, |sp, i| {
        let p = sp.origin(i);
        c * sp.pv_row(i, |q| {
            let d = q.x;
            (q.dx * q.dx * p.dx / (d * d * d)).re * (d / p.dx).im
        })
    })
}

/// `∂_t Φ(s_i, s_j)`.
pub fn rhs_phi<T: Real>(state: &CurveState<T>, i: usize, j: usize) -> Result<T> {
    if i == j || i >= state.n() || j >= state.n() {
        return Err(PeskinError::InvalidInput(format!("rhs_phi needs distinct nodes, got ({i}, {j})")));
    }
    state.check_admissible()?;
    rhs_phi_with(&CurveSampler::new(state)?, i, j)
}

/// As [`rhs_phi`] with a prebuilt sampler.
pub fn rhs_phi_with<T: Real>(sp: &CurveSampler<T>, i: usize, j: usize) -> Result<T> {
    let v = (phi_half(sp, i, j) + phi_half(sp, j, i)) / (T::lit(4.0) * T::PI());
    if v.is_finite() {
        Ok(v)
    } else {
        Err(PeskinError::Geometry(format!("∂_tΦ is not finite at ({i}, {j})")))
    }
}

/// `pv ∫ |X'|²(sin θ - sin 2Φ(s', s_a))/|X(s') - X(s_a)|² ds'`, the part of
/// the `Φ` drift singular at `s_a` only.
fn phi_half<T: Real>(sp: &CurveSampler<T>, a: usize, b: usize) -> T {
    let pa = sp.origin(a);
    let pb = sp.relative(b, a);
    let phi_ab = phi_at(&pa, &pb);
    let term = |q: &CurvePoint<T>, phi_qb: T| {
        let phi_qa = phi_at(q, &pa);
        let theta = phi_qa + phi_qb - phi_ab;
        q.dx.norm_sqr() * (theta.sin() - (phi_qa + phi_qa).sin()) / q.x.norm_sqr()
    };
    let mut acc = T::zero();
    for k in 0..sp.n() {
        if k == a {
            continue;
        }
        let q = sp.relative(k, a);
        // Φ(s_b, s_b) = 0 removes the apparent singularity at s_b
        let phi_qb = if k == b { T::zero() } else { phi_at(&q, &pb) };
        acc = acc + term(&q, phi_qb);
    }
    // offsets of 3h/4 stay clear of node b
    let eps0 = sp.spacing() * T::lit(0.75);
    let zero = T::zero();
    let limit = sp.regular_limit_from(a, eps0, |q| Complex::new(term(q, phi_at(q, &pb)), zero)).re;
    (acc + limit) * sp.spacing()
}

/// `Im I(s, s') = Im[X'(s)/(X(s) - X(s'))]`.
#[inline]
fn im_i<T: Real>(p: &CurvePoint<T>, q: &CurvePoint<T>) -> T {
    (p.dx / (p.x - q.x)).im
}

/// `∂_t κ` at each node.
pub fn rhs_curvature<T: Real>(state: &CurveState<T>) -> Result<Vec<T>> {
    let c = T::lit(3.0) / T::TAU();
    let half = T::lit(0.5);
    rows(state, |sp, i| {
        let p = sp.origin(i);
        let kappa = p.curvature();
        let a = p.stretch();
        c * sp.pv_row(i, |q| {
            let phi = phi_at(&p, q);
            q.dx.norm_sqr() * (phi + phi).cos() / (q.x - p.x).norm_sqr() * (im_i(&p, q) / a - kappa * half)
        })
    })
}

/// `∂_t Z` with `Z = Re(X''/X') = ∂_s|X'|/|X'|`.
pub fn rhs_z<T: Real>(state: &CurveState<T>) -> Result<Vec<T>> {
    let c1 = T::one() / (T::lit(4.0) * T::PI());
    let c2 = T::one() / T::TAU();
    let three = T::lit(3.0);
    rows(state, |sp, i| {
        let p = sp.origin(i);
        let lp = p.log_derivative();
        let kappa_stretch = lp.im;
        sp.pv_row(i, |q| {
            let d = p.x - q.x;
            let jk = p.dx * q.dx / (d * d);
            let lq = q.log_derivative();
            let phi = jk.arg();
            let first = jk.re * (lq.re - lp.re) - jk.im * (lq.im - lp.im);
            let second = q.dx.norm_sqr() * (phi + phi).sin() / d.norm_sqr() * (three * im_i(&p, q) - kappa_stretch);
            c1 * first + c2 * second
        })
    })
}

/// `∫ Im J(s_i, s') (3 Im I(s_i, s') - κ(s_i)|X'(s_i)|) ds'`, zero in the continuum.
pub fn z_identity_residual<T: Real>(state: &CurveState<T>, i: usize) -> Result<T> {
    if i >= state.n() {
        return Err(PeskinError::InvalidInput(format!("node index {i} out of range")));
    }
    state.check_admissible()?;
    let sp = CurveSampler::new(state)?;
    let p = sp.origin(i);
    let w = p.log_derivative().im;
    Ok(sp.pv_row(i, |q| {
        let d = p.x - q.x;
        (p.dx * q.dx / (d * d)).im * (T::lit(3.0) * im_i(&p, q) - w)
    }))
}

/// `∫ |X'| Z ds`, which vanishes because `|X'| Z = ∂_s|X'|`.
pub fn stretch_weighted_z<T: Real>(state: &CurveState<T>) -> Result<T> {
    let (dx, ddx) = state.derivatives()?;
    state.check_stretch(&dx)?;
    let v: Vec<T> = dx.iter().zip(&ddx).map(|(d1, d2)| d1.norm() * (d2 / d1).re).collect();
    Ok(periodic_trapezoid(&v))
}
