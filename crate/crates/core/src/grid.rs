//! Uniform periodic grids on the torus `[0, 2π)` and the spectral toolkit
//! built on them: differentiation, trigonometric interpolation, filtering
//! and resampling.
//!
//! Fourier coefficients are stored in FFT order and normalized so that
//! `values[j] = Σ_k c_k e^{i k s_j}`. For even `n` the Nyquist mode is
//! interpreted as `c_{n/2} cos(n s / 2)`, which keeps the interpolant real
//! for real data and exact at the nodes.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{PeskinError, Result};
use crate::scalar::Real;

/// Smallest admissible node count.
pub const MIN_NODES: usize = 8;

#[derive(Clone)]
pub struct PeriodicGrid<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for PeriodicGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

impl<T: Real> PartialEq for PeriodicGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl<T: Real> PeriodicGrid<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES || n % 2 != 0 {
            return Err(PeskinError::InvalidInput(format!(
                "grid size must be an even integer >= {MIN_NODES}, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing `h = 2π / n`.
    #[inline]
    pub fn spacing(&self) -> T {
        T::TAU() / T::from_index(self.n)
    }

    #[inline]
    pub fn node(&self, j: usize) -> T {
        T::TAU() * T::from_index(j) / T::from_index(self.n)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber of FFT slot `idx`; the Nyquist slot maps to `n/2`.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let k = idx as i64;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Normalized Fourier coefficients of `values`.
    pub fn coefficients(&self, values: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_len(values.len())?;
        check_finite(values)?;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = T::one() / T::from_index(self.n);
        for c in &mut buf {
            *c = *c * scale;
        }
        Ok(buf)
    }

    /// Inverse of [`coefficients`](Self::coefficients).
    pub fn synthesize(&self, coeffs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_len(coeffs.len())?;
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    /// Derivative of the trigonometric interpolant, sampled at the nodes.
    /// The Nyquist mode's derivative is set to zero.
    pub fn derivative(&self, values: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let mut c = self.coefficients(values)?;
        self.apply_derivative(&mut c, 1);
        self.synthesize(&c)
    }

    /// `order`-th derivative (order ≥ 1); Nyquist zeroed.
    pub fn nth_derivative(&self, values: &[Complex<T>], order: u32) -> Result<Vec<Complex<T>>> {
        let mut c = self.coefficients(values)?;
        self.apply_derivative(&mut c, order);
        self.synthesize(&c)
    }

    pub fn derivative_real(&self, values: &[T]) -> Result<Vec<T>> {
        let z: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        Ok(self.derivative(&z)?.into_iter().map(|c| c.re).collect())
    }

    fn apply_derivative(&self, coeffs: &mut [Complex<T>], order: u32) {
        let half = self.n / 2;
        for (idx, c) in coeffs.iter_mut().enumerate() {
            if idx == half {
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            let ik = Complex::new(T::zero(), T::lit(self.wavenumber(idx) as f64));
            let mut factor = Complex::new(T::one(), T::zero());
            for _ in 0..order {
                factor = factor * ik;
            }
            *c = *c * factor;
        }
    }

    /// Value of the trigonometric interpolant at an arbitrary `s`.
    pub fn interpolate(&self, values: &[Complex<T>], s: T) -> Result<Complex<T>> {
        if !s.is_finite() {
            return Err(PeskinError::InvalidInput("interpolation point is not finite".into()));
        }
        let c = self.coefficients(values)?;
        Ok(eval_series(&c, s))
    }

    /// Zeroes every coefficient whose magnitude is below
    /// `threshold · max_k |c_k|`. A zero threshold is the identity.
    pub fn filter(&self, values: &[Complex<T>], threshold: T) -> Result<Vec<Complex<T>>> {
        if !(threshold >= T::zero() && threshold < T::one()) {
            return Err(PeskinError::InvalidInput(format!(
                "filter threshold must lie in [0, 1), got {threshold}"
            )));
        }
        if threshold == T::zero() {
            self.check_len(values.len())?;
            check_finite(values)?;
            return Ok(values.to_vec());
        }
        let mut c = self.coefficients(values)?;
        let peak = c.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let cut = threshold * peak;
        for z in &mut c {
            if z.norm() < cut {
                *z = Complex::new(T::zero(), T::zero());
            }
        }
        self.synthesize(&c)
    }

    /// Cumulative integral `S(s_j) = ∫_0^{s_j} f ds` of real periodic samples,
    /// computed spectrally. Returns `(S, total)` with `total = ∫_𝕋 f ds`.
    pub fn cumulative_integral(&self, values: &[T]) -> Result<(Vec<T>, T)> {
        let z: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        let mut c = self.coefficients(&z)?;
        let mean = c[0].re;
        c[0] = Complex::new(T::zero(), T::zero());
        c[self.n / 2] = Complex::new(T::zero(), T::zero());
        for (idx, coeff) in c.iter_mut().enumerate() {
            let k = self.wavenumber(idx);
            if k != 0 && idx != self.n / 2 {
                *coeff = *coeff / Complex::new(T::zero(), T::lit(k as f64));
            }
        }
        let periodic = self.synthesize(&c)?;
        let base = periodic[0].re;
        let cumulative = (0..self.n)
            .map(|j| mean * self.node(j) + periodic[j].re - base)
            .collect();
        Ok((cumulative, mean * T::TAU()))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(PeskinError::InvalidInput(format!(
                "expected {} samples, got {len}",
                self.n
            )));
        }
        Ok(())
    }
}

/// `f(s0 + ε) - f(s0)` from the coefficients without cancellation, using
/// `e^{ikε} - 1 = 2i sin(kε/2) e^{ikε/2}`.
pub fn eval_series_increment<T: Real>(coeffs: &[Complex<T>], s0: T, eps: T) -> Complex<T> {
    let n = coeffs.len();
    let half = n / 2;
    let two = T::lit(2.0);
    let mid = s0 + eps / two;
    let mut acc = Complex::new(T::zero(), T::zero());
    for k in 1..half {
        let kf = T::from_index(k);
        let amp = two * (kf * eps / two).sin();
        let rot = Complex::new(T::zero(), amp) * Complex::new((kf * mid).cos(), (kf * mid).sin());
        acc = acc + coeffs[k] * rot + coeffs[n - k] * rot.conj();
    }
    let hf = T::from_index(half);
    acc - coeffs[half] * (two * (hf * mid).sin() * (hf * eps / two).sin())
}

/// Evaluates a coefficient vector (FFT order, normalized) at `s`.
pub fn eval_series<T: Real>(coeffs: &[Complex<T>], s: T) -> Complex<T> {
    let n = coeffs.len();
    let half = n / 2;
    let step = Complex::new(s.cos(), s.sin());
    let mut pos = Complex::new(T::one(), T::zero());
    let mut acc = coeffs[0];
    for k in 1..half {
        pos = pos * step;
        acc = acc + coeffs[k] * pos + coeffs[n - k] * pos.conj();
    }
    let nyq = T::from_index(half) * s;
    acc + coeffs[half] * nyq.cos()
}

pub(crate) fn check_finite<T: Real>(values: &[Complex<T>]) -> Result<()> {
    if let Some(j) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(PeskinError::InvalidInput(format!("non-finite sample at index {j}")));
    }
    Ok(())
}

/// Samples of the curve `X(s_j, t)` on a uniform periodic grid.
#[derive(Clone, Debug)]
pub struct CurveState<T: Real> {
    pub grid: PeriodicGrid<T>,
    pub x: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Real> CurveState<T> {
    pub fn new(grid: PeriodicGrid<T>, x: Vec<Complex<T>>, time: T) -> Result<Self> {
        if x.len() != grid.n() {
            return Err(PeskinError::InvalidInput(format!(
                "curve has {} samples but the grid has {} nodes",
                x.len(),
                grid.n()
            )));
        }
        check_finite(&x)?;
        if !(time.is_finite() && time >= T::zero()) {
            return Err(PeskinError::InvalidInput(format!("time must be finite and >= 0, got {time}")));
        }
        Ok(Self { grid, x, time })
    }

    /// Samples `f(s_j)` on a fresh grid of size `n`.
    pub fn from_fn(n: usize, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let grid = PeriodicGrid::new(n)?;
        let x = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, x, T::zero())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Spectral `X'` at the nodes.
    pub fn tangent(&self) -> Result<Vec<Complex<T>>> {
        self.grid.derivative(&self.x)
    }

    /// `(X', X'')` at the nodes.
    pub fn derivatives(&self) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
        let mut c = self.grid.coefficients(&self.x)?;
        self.grid.apply_derivative(&mut c, 1);
        let d1 = self.grid.synthesize(&c)?;
        self.grid.apply_derivative(&mut c, 1);
        let d2 = self.grid.synthesize(&c)?;
        Ok((d1, d2))
    }

    /// Trigonometric interpolation onto a grid of `new_n` nodes.
    pub fn resample(&self, new_n: usize) -> Result<Self> {
        let new_grid = PeriodicGrid::new(new_n)?;
        let c = self.grid.coefficients(&self.x)?;
        let c_new = transfer_coefficients(&c, new_n);
        let x = new_grid.synthesize(&c_new)?;
        Self::new(new_grid, x, self.time)
    }

    /// Admissibility: finite samples, non-vanishing `|X'|` and distinct nodes.
    pub fn check_admissible(&self) -> Result<()> {
        check_finite(&self.x)?;
        let dx = self.tangent()?;
        self.check_stretch(&dx)?;
        self.check_injective()
    }

    pub(crate) fn check_stretch(&self, dx: &[Complex<T>]) -> Result<()> {
        let scale = dx.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        if let Some((j, z)) = dx
            .iter()
            .enumerate()
            .find(|(_, z)| !(z.norm() > T::tiny() * scale) || !z.norm().is_finite())
        {
            return Err(PeskinError::Degenerate(format!(
                "|X'| = {:e} vanishes at node {j}",
                z.norm().as_f64()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_injective(&self) -> Result<()> {
        let n = self.n();
        let scale = self.x.iter().map(|z| (*z - self.x[0]).norm()).fold(T::zero(), T::max);
        let floor = T::tiny() * scale;
        for i in 0..n {
            for j in (i + 1)..n {
                if !((self.x[i] - self.x[j]).norm() > floor) {
                    return Err(PeskinError::Geometry(format!(
                        "nodes {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Maps normalized coefficients of an `n`-grid onto an `m`-grid.
fn transfer_coefficients<T: Real>(c: &[Complex<T>], m: usize) -> Vec<Complex<T>> {
    let n = c.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; m];
    let half_n = n / 2;
    let half_m = m / 2;
    let two = T::lit(2.0);
    if m >= n {
        out[0] = c[0];
        for k in 1..half_n {
            out[k] = c[k];
            out[m - k] = c[n - k];
        }
        if m == n {
            out[half_m] = c[half_n];
        } else {
            // c_{n/2} cos(n s/2) splits evenly between ±n/2.
            out[half_n] = c[half_n] / two;
            out[m - half_n] = c[half_n] / two;
        }
    } else {
        out[0] = c[0];
        for k in 1..half_m {
            out[k] = c[k];
            out[m - k] = c[n - k];
        }
        out[half_m] = c[half_m] + c[n - half_m];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mode(n: usize, k: i64) -> Vec<Complex<f64>> {
        let g = PeriodicGrid::<f64>::new(n).unwrap();
        g.nodes().iter().map(|&s| Complex::from_polar(1.0, k as f64 * s)).collect()
    }

    fn max_err(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(PeriodicGrid::<f64>::new(6).is_err());
        assert!(PeriodicGrid::<f64>::new(9).is_err());
        assert!(PeriodicGrid::<f64>::new(8).is_ok());
    }

    #[test]
    fn derivative_of_single_modes() {
        let g = PeriodicGrid::<f64>::new(32).unwrap();
        for k in [1i64, 3, -5] {
            let v = mode(32, k);
            let d = g.derivative(&v).unwrap();
            let expect: Vec<_> = v.iter().map(|z| z * Complex::new(0.0, k as f64)).collect();
            assert!(max_err(&d, &expect) < 1e-12);
        }
        let constant = vec![Complex::new(1.0, 2.0); 32];
        assert!(g.derivative(&constant).unwrap().iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn derivative_rejects_non_finite() {
        let g = PeriodicGrid::<f64>::new(8).unwrap();
        let mut v = mode(8, 1);
        v[3] = Complex::new(f64::NAN, 0.0);
        assert!(matches!(g.derivative(&v), Err(PeskinError::InvalidInput(_))));
    }

    #[test]
    fn nyquist_derivative_is_zeroed() {
        let g = PeriodicGrid::<f64>::new(16).unwrap();
        let v = mode(16, 8);
        assert!(g.derivative(&v).unwrap().iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn increment_matches_difference_of_values() {
        let g = PeriodicGrid::<f64>::new(16).unwrap();
        let v: Vec<_> = g.nodes().iter().map(|&s| Complex::new((3.0 * s).cos() + (8.0 * s).cos(), s.sin())).collect();
        let c = g.coefficients(&v).unwrap();
        for (s0, eps) in [(0.3, 0.1), (2.0, -0.7), (5.0, 1e-3)] {
            let direct = eval_series(&c, s0 + eps) - eval_series(&c, s0);
            assert!((eval_series_increment(&c, s0, eps) - direct).norm() < 1e-13);
        }
        let tiny = eval_series_increment(&c, 0.3, 1e-9);
        let exact = Complex::new(-3e-9 * (0.9f64).sin() - 8e-9 * (2.4f64).sin(), 1e-9 * (0.3f64).cos());
        assert!((tiny - exact).norm() < 1e-16);
    }

    #[test]
    fn interpolation_is_exact_for_resolved_modes() {
        let n = 64;
        let g = PeriodicGrid::<f64>::new(n).unwrap();
        let v = mode(n, 1);
        let s = PI / 7.0;
        assert!((g.interpolate(&v, s).unwrap() - Complex::from_polar(1.0, s)).norm() < 1e-14);
        assert!((g.interpolate(&v, g.node(3)).unwrap() - v[3]).norm() < 1e-14);
        let k = (n / 2 - 1) as f64;
        let hi = mode(n, n as i64 / 2 - 1);
        let mid = 0.5 * (g.node(10) + g.node(11));
        assert!((g.interpolate(&hi, mid).unwrap() - Complex::from_polar(1.0, k * mid)).norm() < 1e-12);
    }

    #[test]
    fn filter_removes_roundoff_modes() {
        let n = 32;
        let g = PeriodicGrid::<f64>::new(n).unwrap();
        let clean = mode(n, 1);
        let noisy: Vec<_> = clean.iter().zip(mode(n, 7)).map(|(a, b)| a + b * 1e-15).collect();
        let out = g.filter(&noisy, 1e-13).unwrap();
        assert!(max_err(&out, &clean) < 1e-15);
        assert_eq!(g.filter(&noisy, 0.0).unwrap(), noisy);
        let two: Vec<_> = clean.iter().zip(mode(n, 3)).map(|(a, b)| a + b * 0.5).collect();
        assert!(max_err(&g.filter(&two, 1e-13).unwrap(), &two) < 1e-14);
        assert!(g.filter(&two, 1.0).is_err());
    }

    #[test]
    fn resample_up_and_down() {
        let circle = CurveState::<f64>::from_fn(64, |s| Complex::from_polar(1.0, s)).unwrap();
        let up = circle.resample(128).unwrap();
        let g = PeriodicGrid::<f64>::new(128).unwrap();
        for j in 0..128 {
            assert!((up.x[j] - Complex::from_polar(1.0, g.node(j))).norm() < 1e-14);
        }
        assert!(circle.resample(63).is_err());

        let ellipse = CurveState::<f64>::from_fn(64, |s| Complex::new(2.0 * s.cos(), s.sin())).unwrap();
        let back = ellipse.resample(128).unwrap().resample(64).unwrap();
        assert!(max_err(&back.x, &ellipse.x) < 1e-12);
    }

    #[test]
    fn cumulative_integral_of_constant_plus_cosine() {
        let g = PeriodicGrid::<f64>::new(32).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|s| 1.0 + 0.3 * s.cos()).collect();
        let (cum, total) = g.cumulative_integral(&f).unwrap();
        assert!((total - 2.0 * PI).abs() < 1e-13);
        for (j, s) in g.nodes().iter().enumerate() {
            assert!((cum[j] - (s + 0.3 * s.sin())).abs() < 1e-13);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let g = PeriodicGrid::<f32>::new(16).unwrap();
        let v: Vec<Complex<f32>> = g.nodes().iter().map(|&s| Complex::from_polar(1.0, s)).collect();
        let d = g.derivative(&v).unwrap();
        for (a, b) in d.iter().zip(&v) {
            assert!((a - b * Complex::new(0.0, 1.0)).norm() < 1e-5);
        }
    }
}
