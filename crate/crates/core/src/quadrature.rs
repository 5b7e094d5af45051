//! Periodic trapezoidal quadrature and principal-value rules for kernels
//! with a simple (odd) singularity on the diagonal.
//!
//! A kernel `f(s')` singular at a node `s_i` is assumed to have the local
//! form `A/(s' - s_i) + g(s')` with `g` smooth. On a uniform periodic grid
//! the odd part sums to zero exactly, so the spectrally accurate rule is
//!
//! ```text
//! pv ∫ f ds' ≈ h · ( Σ_{j ≠ i} f(s_j) + g(s_i) )
//! ```
//!
//! where `g(s_i)` (the regular limit) is the limit of the even part
//! `(f(s_i + ε) + f(s_i - ε)) / 2`. Callers supply it either in closed form
//! or through [`CurveSampler::regular_limit`], which extrapolates the even
//! part from off-grid spectral evaluations.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{PeskinError, Result};
use crate::grid::{eval_series, eval_series_increment, CurveState, PeriodicGrid};
use crate::scalar::Real;

/// `(2π/n) Σ_j values_j`.
pub fn periodic_trapezoid<T: Real>(values: &[T]) -> T {
    let n = values.len();
    let h = T::TAU() / T::from_index(n);
    values.iter().copied().sum::<T>() * h
}

pub fn periodic_trapezoid_complex<T: Real>(values: &[Complex<T>]) -> Complex<T> {
    let n = values.len();
    let h = T::TAU() / T::from_index(n);
    let mut acc = Complex::new(T::zero(), T::zero());
    for v in values {
        acc = acc + *v;
    }
    acc * h
}

/// Skip-diagonal trapezoid `h (Σ_{j≠j0} f_j + regular_limit)`.
///
/// With `regular_limit = 0` this is the bare punctured rule, which is exact
/// for purely odd kernels but only first-order accurate otherwise.
pub fn pv_skip_diagonal<T: Real>(f: &[T], j0: usize, regular_limit: T) -> T {
    let n = f.len();
    let h = T::TAU() / T::from_index(n);
    let mut acc = T::zero();
    for (j, &v) in f.iter().enumerate() {
        if j != j0 {
            acc = acc + v;
        }
    }
    (acc + regular_limit) * h
}

/// Richardson extrapolation of even-in-ε samples taken at ε, ε/2, ε/4, ...
pub fn richardson_even<T: Real>(samples: &[Complex<T>]) -> Complex<T> {
    let mut table = samples.to_vec();
    let mut factor = T::one();
    for level in 1..samples.len() {
        factor = factor * T::lit(4.0);
        for k in (level..samples.len()).rev() {
            table[k] = table[k] + (table[k] - table[k - 1]) / (factor - T::one());
        }
    }
    table[samples.len() - 1]
}

/// Position and first two derivatives of the curve at one label `s`.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint<T: Real> {
    pub s: T,
    pub x: Complex<T>,
    pub dx: Complex<T>,
    pub ddx: Complex<T>,
}

impl<T: Real> CurvePoint<T> {
    #[inline]
    pub fn stretch(&self) -> T {
        self.dx.norm()
    }

    /// `X''/X' = Z + iW`.
    #[inline]
    pub fn log_derivative(&self) -> Complex<T> {
        self.ddx / self.dx
    }

    #[inline]
    pub fn curvature(&self) -> T {
        self.log_derivative().im / self.stretch()
    }
}

/// Number of halvings used by [`CurveSampler::regular_limit`].
const LIMIT_LEVELS: usize = 4;

/// Spectral evaluator of `X, X', X''` at nodes and at arbitrary labels.
#[derive(Clone, Debug)]
pub struct CurveSampler<T: Real> {
    grid: PeriodicGrid<T>,
    x: Vec<Complex<T>>,
    dx: Vec<Complex<T>>,
    ddx: Vec<Complex<T>>,
    cx: Vec<Complex<T>>,
    cdx: Vec<Complex<T>>,
    cddx: Vec<Complex<T>>,
}

impl<T: Real> CurveSampler<T> {
    pub fn new(state: &CurveState<T>) -> Result<Self> {
        let grid = state.grid.clone();
        let cx = grid.coefficients(&state.x)?;
        let (dx, ddx) = state.derivatives()?;
        let cdx = grid.coefficients(&dx)?;
        let cddx = grid.coefficients(&ddx)?;
        Ok(Self { grid, x: state.x.clone(), dx, ddx, cx, cdx, cddx })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.grid.spacing()
    }

    #[inline]
    pub fn node(&self, j: usize) -> CurvePoint<T> {
        CurvePoint { s: self.grid.node(j), x: self.x[j], dx: self.dx[j], ddx: self.ddx[j] }
    }

    pub fn at(&self, s: T) -> CurvePoint<T> {
        CurvePoint {
            s,
            x: eval_series(&self.cx, s),
            dx: eval_series(&self.cdx, s),
            ddx: eval_series(&self.cddx, s),
        }
    }

    /// Node `j` in the frame where `X(s_origin) = 0`.
    #[inline]
    pub fn relative(&self, j: usize, origin: usize) -> CurvePoint<T> {
        let mut p = self.node(j);
        p.x = p.x - self.x[origin];
        p
    }

    /// The point `s_i + ε` in the frame where `X(s_i) = 0`, with the
    /// position increment evaluated free of cancellation.
    pub fn offset(&self, i: usize, eps: T) -> CurvePoint<T> {
        let s0 = self.grid.node(i);
        let s = s0 + eps;
        CurvePoint {
            s,
            x: eval_series_increment(&self.cx, s0, eps),
            dx: eval_series(&self.cdx, s),
            ddx: eval_series(&self.cddx, s),
        }
    }

    /// Limit at node `i` of the even part of `f`, by Richardson extrapolation
    /// over `ε = h, h/2, h/4, h/8`. Points passed to `f` are in the frame of
    /// [`CurveSampler::offset`].
    pub fn regular_limit_complex(&self, i: usize, f: impl Fn(&CurvePoint<T>) -> Complex<T>) -> Complex<T> {
        self.regular_limit_from(i, self.spacing(), f)
    }

    /// As [`CurveSampler::regular_limit_complex`] with the first offset `eps0`.
    pub fn regular_limit_from(&self, i: usize, eps0: T, f: impl Fn(&CurvePoint<T>) -> Complex<T>) -> Complex<T> {
        let half = T::lit(0.5);
        let mut eps = eps0;
        let mut samples = [Complex::new(T::zero(), T::zero()); LIMIT_LEVELS];
        for sample in samples.iter_mut() {
            *sample = (f(&self.offset(i, eps)) + f(&self.offset(i, -eps))) * half;
            eps = eps * half;
        }
        richardson_even(&samples)
    }

    pub fn regular_limit(&self, i: usize, f: impl Fn(&CurvePoint<T>) -> T) -> T {
        self.regular_limit_complex(i, |p| Complex::new(f(p), T::zero())).re
    }

    /// Principal value `pv ∫ f(s') ds'` for a kernel singular at node `i`,
    /// summed in index-ascending order. Points passed to `f` are in the frame
    /// where `X(s_i) = 0`; use [`CurveSampler::origin`] for the base point.
    pub fn pv_row(&self, i: usize, f: impl Fn(&CurvePoint<T>) -> T) -> T {
        let mut acc = T::zero();
        for j in 0..self.n() {
            if j != i {
                acc = acc + f(&self.relative(j, i));
            }
        }
        (acc + self.regular_limit(i, &f)) * self.spacing()
    }

    pub fn pv_row_complex(&self, i: usize, f: impl Fn(&CurvePoint<T>) -> Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..self.n() {
            if j != i {
                acc = acc + f(&self.relative(j, i));
            }
        }
        (acc + self.regular_limit_complex(i, &f)) * self.spacing()
    }

    /// Node `i` translated to the origin.
    #[inline]
    pub fn origin(&self, i: usize) -> CurvePoint<T> {
        self.relative(i, i)
    }
}

/// The pair kernels `I_ij = X'_i/(X_i - X_j)` and
/// `J_ij = X'_i X'_j/(X_i - X_j)^2` (diagonal entries are zero).
#[derive(Clone, Debug)]
pub struct PairKernel<T: Real> {
    pub n: usize,
    pub i_kernel: Vec<Complex<T>>,
    pub j_kernel: Vec<Complex<T>>,
}

impl<T: Real> PairKernel<T> {
    pub fn assemble(state: &CurveState<T>) -> Result<Self> {
        let n = state.n();
        let dx = state.tangent()?;
        let x = &state.x;
        let zero = Complex::new(T::zero(), T::zero());
        let rows: Vec<(Vec<Complex<T>>, Vec<Complex<T>>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut ri = vec![zero; n];
                let mut rj = vec![zero; n];
                for j in 0..n {
                    if i != j {
                        let d = x[i] - x[j];
                        ri[j] = dx[i] / d;
                        rj[j] = dx[i] * dx[j] / (d * d);
                    }
                }
                (ri, rj)
            })
            .collect();
        let mut i_kernel = Vec::with_capacity(n * n);
        let mut j_kernel = Vec::with_capacity(n * n);
        for (ri, rj) in rows {
            i_kernel.extend(ri);
            j_kernel.extend(rj);
        }
        if let Some(k) = j_kernel.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(PeskinError::Geometry(format!(
                "pair kernel not finite at ({}, {})",
                k / n,
                k % n
            )));
        }
        Ok(Self { n, i_kernel, j_kernel })
    }

    #[inline]
    pub fn i(&self, a: usize, b: usize) -> Complex<T> {
        self.i_kernel[a * self.n + b]
    }

    #[inline]
    pub fn j(&self, a: usize, b: usize) -> Complex<T> {
        self.j_kernel[a * self.n + b]
    }
}

fn check_separated<T: Real>(x: &[Complex<T>], i: usize) -> Result<()> {
    let scale = x.iter().map(|z| (*z - x[i]).norm()).fold(T::zero(), T::max);
    for (j, z) in x.iter().enumerate() {
        if j != i && !((*z - x[i]).norm() > T::tiny() * scale) {
            return Err(PeskinError::Geometry(format!("nodes {i} and {j} coincide")));
        }
    }
    Ok(())
}

/// `pv ∫ X'(s')/(X(s') - X(s_i)) ds' - πi`; zero in the continuum for a
/// counter-clockwise simple closed curve.
pub fn cauchy_identity_residual<T: Real>(state: &CurveState<T>, i: usize) -> Result<Complex<T>> {
    let (dx, ddx) = state.derivatives()?;
    cauchy_residual_with(state, &dx, &ddx, i)
}

pub(crate) fn cauchy_residual_with<T: Real>(
    state: &CurveState<T>,
    dx: &[Complex<T>],
    ddx: &[Complex<T>],
    i: usize,
) -> Result<Complex<T>> {
    check_index(state, i)?;
    check_separated(&state.x, i)?;
    let x = &state.x;
    let mut acc = Complex::new(T::zero(), T::zero());
    for j in 0..state.n() {
        if j != i {
            acc = acc + dx[j] / (x[j] - x[i]);
        }
    }
    // regular part of X'(s')/(X(s') - X(s)) at s' = s
    acc = acc + ddx[i] / (dx[i] * T::lit(2.0));
    Ok(acc * state.grid.spacing() - Complex::new(T::zero(), T::PI()))
}

/// `∫ Im J(s', s_i) ds'`, zero in the continuum.
pub fn imag_j_identity_residual<T: Real>(state: &CurveState<T>, i: usize) -> Result<T> {
    check_index(state, i)?;
    check_separated(&state.x, i)?;
    let (dx, ddx) = state.derivatives()?;
    let dddx = state.grid.nth_derivative(&state.x, 3)?;
    let x = &state.x;
    let mut acc = T::zero();
    for j in 0..state.n() {
        if j != i {
            let d = x[j] - x[i];
            acc = acc + (dx[j] * dx[i] / (d * d)).im;
        }
    }
    // J(s, s+δ) = δ^{-2} + (X'''/(6X') - (X''/X')^2/4) + O(δ)
    let p = ddx[i] / dx[i];
    let q = dddx[i] / dx[i];
    let limit = q / T::lit(6.0) - p * p / T::lit(4.0);
    Ok((acc + limit.im) * state.grid.spacing())
}

fn check_index<T: Real>(state: &CurveState<T>, i: usize) -> Result<()> {
    if i >= state.n() {
        return Err(PeskinError::InvalidInput(format!("node index {i} out of range")));
    }
    Ok(())
}
