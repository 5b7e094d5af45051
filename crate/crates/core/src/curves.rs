//! Analytic reference curves sampled on a uniform grid.

use num_complex::Complex;

use crate::error::Result;
use crate::grid::CurveState;
use crate::scalar::Real;

/// `center + radius · e^{is}`, the evenly parameterized equilibrium.
pub fn circle<T: Real>(n: usize, radius: T, center: Complex<T>) -> Result<CurveState<T>> {
    CurveState::from_fn(n, |s: T| center + Complex::from_polar(radius, s))
}

/// `(a cos s, b sin s)`.
pub fn ellipse<T: Real>(n: usize, a: T, b: T) -> Result<CurveState<T>> {
    CurveState::from_fn(n, |s: T| Complex::new(a * s.cos(), b * s.sin()))
}

/// `center + radius · e^{iθ(s)}` with `θ` supplied as a function of `s`.
pub fn reparam_circle<T: Real>(
    n: usize,
    radius: T,
    center: Complex<T>,
    theta: impl Fn(T) -> T,
) -> Result<CurveState<T>> {
    CurveState::from_fn(n, |s: T| center + Complex::from_polar(radius, theta(s)))
}

/// `radius · e^{is} + Σ_k c_k e^{iks}` over `(k, c_k)` pairs.
pub fn fourier_perturbed<T: Real>(
    n: usize,
    radius: T,
    modes: &[(i64, Complex<T>)],
) -> Result<CurveState<T>> {
    CurveState::from_fn(n, |s: T| {
        let mut z = Complex::from_polar(radius, s);
        for &(k, c) in modes {
            z = z + c * Complex::from_polar(T::one(), T::lit(k as f64) * s);
        }
        z
    })
}
