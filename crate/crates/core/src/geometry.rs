//! Static diagnostics of a curve snapshot.
//!
//! Every pairwise quantity (`Φ*`, `d*`, chord-arc, well-stretched) is an exact
//! scan over grid nodes; sub-grid extrema are not searched.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{PeskinError, Result};
use crate::grid::CurveState;
use crate::quadrature::{periodic_trapezoid, periodic_trapezoid_complex};
use crate::scalar::Real;

/// Every monitored scalar of one snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsReport<T: Real> {
    pub time: T,
    pub r_x: T,
    pub total_length: T,
    pub energy: T,
    pub phi_star: T,
    pub kappa_plus: T,
    pub kappa_minus: T,
    pub kappa_star: T,
    pub stretch_min: T,
    pub stretch_max: T,
    pub diameter: T,
    pub chord_arc_const: T,
    pub well_stretched_const: T,
    pub z_norm: T,
    pub circle_dev: T,
}

/// The curve written as `z* + ρ(ω) e^{iω}`, sampled at the nodes.
#[derive(Clone, Debug)]
pub struct PolarForm<T: Real> {
    pub z_star: Complex<T>,
    /// Unwrapped `ω(s_j)`, strictly increasing.
    pub omega: Vec<T>,
    pub rho: Vec<T>,
    /// `max |ρ'(ω)/ρ(ω)|`.
    pub max_log_slope: T,
}

/// Node samples of `X`, `X'`, `X''` and the arc-length table, computed once.
#[derive(Clone, Debug)]
pub struct Geometry<'a, T: Real> {
    state: &'a CurveState<T>,
    dx: Vec<Complex<T>>,
    ddx: Vec<Complex<T>>,
    stretch: Vec<T>,
    arc: Vec<T>,
    length: T,
}

/// Extremum of a symmetric pair function and where it is attained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairExtreme<T> {
    pub value: T,
    pub pair: (usize, usize),
}

impl<'a, T: Real> Geometry<'a, T> {
    pub fn new(state: &'a CurveState<T>) -> Result<Self> {
        let (dx, ddx) = state.derivatives()?;
        state.check_stretch(&dx)?;
        let stretch: Vec<T> = dx.iter().map(|z| z.norm()).collect();
        let (arc, length) = state.grid.cumulative_integral(&stretch)?;
        Ok(Self { state, dx, ddx, stretch, arc, length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.state.n()
    }

    pub fn tangent(&self) -> &[Complex<T>] {
        &self.dx
    }

    pub fn stretch(&self) -> &[T] {
        &self.stretch
    }

    pub fn effective_radius(&self) -> Result<T> {
        let integrand: Vec<T> =
            self.state.x.iter().zip(&self.dx).map(|(x, dx)| (x.conj() * dx).im).collect();
        let twice_area = periodic_trapezoid(&integrand);
        if !(twice_area > T::zero()) {
            return Err(PeskinError::Orientation { area: (twice_area / T::lit(2.0)).as_f64() });
        }
        Ok((twice_area / T::TAU()).sqrt())
    }

    pub fn total_length(&self) -> T {
        self.length
    }

    pub fn elastic_energy(&self) -> T {
        let sq: Vec<T> = self.stretch.iter().map(|&v| v * v).collect();
        periodic_trapezoid(&sq) / T::lit(2.0)
    }

    /// `Φ(s_i, s_j)`, zero on the diagonal.
    pub fn phi(&self, i: usize, j: usize) -> Result<T> {
        if i == j {
            return Ok(T::zero());
        }
        let v = phi_value(self.state.x[i], self.dx[i], self.state.x[j], self.dx[j]);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(PeskinError::Geometry(format!("nodes {i} and {j} coincide")))
        }
    }

    pub fn phi_star(&self) -> Result<PairExtreme<T>> {
        let x = &self.state.x;
        let dx = &self.dx;
        let best = scan_pairs(self.n(), true, |i, j| phi_value(x[i], dx[i], x[j], dx[j]).abs());
        if !best.value.is_finite() {
            return Err(PeskinError::Geometry(format!(
                "Φ undefined at pair {:?}",
                best.pair
            )));
        }
        Ok(best)
    }

    pub fn curvature(&self) -> Vec<T> {
        self.ddx.iter().zip(&self.dx).map(|(d2, d1)| (d2 / d1).im / d1.norm()).collect()
    }

    /// `(Z, W)` with `X''/X' = Z + iW`.
    pub fn stretch_log_derivative(&self) -> (Vec<T>, Vec<T>) {
        self.ddx.iter().zip(&self.dx).map(|(d2, d1)| {
            let q = d2 / d1;
            (q.re, q.im)
        }).unzip()
    }

    pub fn diameter(&self) -> PairExtreme<T> {
        let x = &self.state.x;
        scan_pairs(self.n(), true, |i, j| (x[i] - x[j]).norm())
    }

    pub fn point_diameter(&self, i: usize) -> T {
        let xi = self.state.x[i];
        self.state.x.iter().map(|&xj| (xi - xj).norm()).fold(T::zero(), T::max)
    }

    /// Shorter of the two arcs between nodes `i` and `j`.
    pub fn arc_distance(&self, i: usize, j: usize) -> T {
        let d = (self.arc[j] - self.arc[i]).abs();
        d.min(self.length - d)
    }

    pub fn chord_arc_constant(&self) -> PairExtreme<T> {
        let x = &self.state.x;
        scan_pairs(self.n(), false, |i, j| (x[i] - x[j]).norm() / self.arc_distance(i, j))
    }

    pub fn well_stretched_constant(&self) -> PairExtreme<T> {
        let x = &self.state.x;
        let n = self.n();
        let h = self.state.grid.spacing();
        scan_pairs(n, false, |i, j| {
            let k = j - i;
            let sep = T::from_index(k.min(n - k)) * h;
            (x[i] - x[j]).norm() / sep
        })
    }

    pub fn polar_form(&self) -> Result<PolarForm<T>> {
        let phi_star = self.phi_star()?.value;
        if !(phi_star < T::FRAC_PI_2()) {
            return Err(PeskinError::Precondition(format!(
                "polar form needs Φ* < π/2, got {phi_star}"
            )));
        }
        let n = self.n();
        let x = &self.state.x;
        let (a, b) = self.diameter().pair;
        let z_star = (x[a] + x[b]) / T::lit(2.0);
        let rho: Vec<T> = x.iter().map(|&z| (z - z_star).norm()).collect();
        if let Some(j) = rho.iter().position(|&r| !(r > T::zero())) {
            return Err(PeskinError::PolarParameterization(format!("node {j} sits on the center")));
        }

        let pi = T::PI();
        let tau = T::TAU();
        let wrap = |d: T| {
            let mut d = d;
            while d > pi {
                d = d - tau;
            }
            while d <= -pi {
                d = d + tau;
            }
            d
        };
        let mut omega = Vec::with_capacity(n);
        omega.push((x[0] - z_star).arg());
        for j in 1..n {
            let prev = omega[j - 1];
            let step = wrap((x[j] - z_star).arg() - prev);
            if !(step > T::zero()) {
                return Err(PeskinError::PolarParameterization(format!(
                    "ω is not increasing between nodes {} and {j}",
                    j - 1
                )));
            }
            omega.push(prev + step);
        }
        let closing = wrap(omega[0] - omega[n - 1]);
        let winding = omega[n - 1] + closing - omega[0];
        if !(closing > T::zero()) || (winding - tau).abs() > T::lit(1e-6) {
            return Err(PeskinError::PolarParameterization(format!(
                "ω winds by {winding} instead of 2π"
            )));
        }

        let grid = &self.state.grid;
        let nodes = grid.nodes();
        let periodic: Vec<T> = omega.iter().zip(&nodes).map(|(&w, &s)| w - s).collect();
        let omega_s: Vec<T> = grid.derivative_real(&periodic)?.into_iter().map(|v| v + T::one()).collect();
        let log_rho: Vec<T> = rho.iter().map(|r| r.ln()).collect();
        let log_rho_s = grid.derivative_real(&log_rho)?;
        let mut max_log_slope = T::zero();
        for (j, (&lr, &ws)) in log_rho_s.iter().zip(&omega_s).enumerate() {
            if !(ws > T::zero()) {
                return Err(PeskinError::PolarParameterization(format!(
                    "ω'(s) = {ws} is not positive at node {j}"
                )));
            }
            max_log_slope = max_log_slope.max((lr / ws).abs());
        }
        Ok(PolarForm { z_star, omega, rho, max_log_slope })
    }

    /// Area centroid, mean distance to it, and the largest radial misfit.
    pub fn circle_deviation(&self) -> Result<(Complex<T>, T, T)> {
        let x = &self.state.x;
        let r = self.effective_radius()?;
        let area = T::PI() * r * r;
        let moment: Vec<Complex<T>> =
            x.iter().zip(&self.dx).map(|(z, d)| d * z.norm_sqr()).collect();
        let center = periodic_trapezoid_complex(&moment) / Complex::new(T::zero(), T::lit(2.0) * area);
        let dist: Vec<T> = x.iter().map(|&z| (z - center).norm()).collect();
        let radius = dist.iter().copied().sum::<T>() / T::from_index(dist.len());
        let sup = dist.iter().map(|&d| (d - radius).abs()).fold(T::zero(), T::max);
        Ok((center, radius, sup))
    }

    pub fn z_norm(&self) -> T {
        let (z, _) = self.stretch_log_derivative();
        let sq: Vec<T> = z.iter().map(|&v| v * v).collect();
        periodic_trapezoid(&sq).sqrt()
    }

    pub fn diagnostics(&self) -> Result<DiagnosticsReport<T>> {
        let kappa = self.curvature();
        let kappa_plus = kappa.iter().copied().fold(T::neg_infinity(), T::max);
        let kappa_minus = kappa.iter().copied().fold(T::infinity(), T::min);
        let stretch_min = self.stretch.iter().copied().fold(T::infinity(), T::min);
        let stretch_max = self.stretch.iter().copied().fold(T::zero(), T::max);
        Ok(DiagnosticsReport {
            time: self.state.time,
            r_x: self.effective_radius()?,
            total_length: self.total_length(),
            energy: self.elastic_energy(),
            phi_star: self.phi_star()?.value,
            kappa_plus,
            kappa_minus,
            kappa_star: kappa_plus.abs().max(kappa_minus.abs()),
            stretch_min,
            stretch_max,
            diameter: self.diameter().value,
            chord_arc_const: self.chord_arc_constant().value,
            well_stretched_const: self.well_stretched_constant().value,
            z_norm: self.z_norm(),
            circle_dev: self.circle_deviation()?.2,
        })
    }
}

/// `arg[X'_1 X'_2 / (X_1 - X_2)^2]` in `(-π, π]`.
#[inline]
pub(crate) fn phi_value<T: Real>(x1: Complex<T>, dx1: Complex<T>, x2: Complex<T>, dx2: Complex<T>) -> T {
    let d = x1 - x2;
    (dx1 * dx2 / (d * d)).arg()
}

/// Extremum of `f(i, j)` over `i < j`, scanned row-parallel. Ties resolve to
/// the lexicographically smallest pair so the result is deterministic.
pub(crate) fn scan_pairs<T: Real>(n: usize, maximize: bool, f: impl Fn(usize, usize) -> T + Sync) -> PairExtreme<T> {
    let better = |a: T, b: T| if maximize { a > b } else { a < b };
    let init = if maximize { T::neg_infinity() } else { T::infinity() };
    let rows: Vec<PairExtreme<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = PairExtreme { value: init, pair: (i, i) };
            for j in (i + 1)..n {
                let v = f(i, j);
                if v.is_nan() {
                    return PairExtreme { value: v, pair: (i, j) };
                }
                if better(v, best.value) {
                    best = PairExtreme { value: v, pair: (i, j) };
                }
            }
            best
        })
        .collect();
    let mut best = PairExtreme { value: init, pair: (0, 0) };
    for row in rows {
        if row.value.is_nan() {
            return row;
        }
        if better(row.value, best.value) {
            best = row;
        }
    }
    best
}

pub fn effective_radius<T: Real>(state: &CurveState<T>) -> Result<T> {
    Geometry::new(state)?.effective_radius()
}

pub fn total_length<T: Real>(state: &CurveState<T>) -> Result<T> {
    Ok(Geometry::new(state)?.total_length())
}

pub fn elastic_energy<T: Real>(state: &CurveState<T>) -> Result<T> {
    Ok(Geometry::new(state)?.elastic_energy())
}

pub fn phi<T: Real>(state: &CurveState<T>, i: usize, j: usize) -> Result<T> {
    Geometry::new(state)?.phi(i, j)
}

pub fn phi_star<T: Real>(state: &CurveState<T>) -> Result<T> {
    Ok(Geometry::new(state)?.phi_star()?.value)
}

pub fn curvature<T: Real>(state: &CurveState<T>) -> Result<Vec<T>> {
    Ok(Geometry::new(state)?.curvature())
}

pub fn stretch_log_derivative<T: Real>(state: &CurveState<T>) -> Result<(Vec<T>, Vec<T>)> {
    Ok(Geometry::new(state)?.stretch_log_derivative())
}

pub fn diameter<T: Real>(state: &CurveState<T>) -> Result<(T, (usize, usize))> {
    let d = Geometry::new(state)?.diameter();
    Ok((d.value, d.pair))
}

pub fn point_diameter<T: Real>(state: &CurveState<T>, i: usize) -> Result<T> {
    Ok(Geometry::new(state)?.point_diameter(i))
}

pub fn arc_distance<T: Real>(state: &CurveState<T>, i: usize, j: usize) -> Result<T> {
    Ok(Geometry::new(state)?.arc_distance(i, j))
}

pub fn chord_arc_constant<T: Real>(state: &CurveState<T>) -> Result<T> {
    Ok(Geometry::new(state)?.chord_arc_constant().value)
}

pub fn well_stretched_constant<T: Real>(state: &CurveState<T>) -> Result<T> {
    Ok(Geometry::new(state)?.well_stretched_constant().value)
}

pub fn polar_form<T: Real>(state: &CurveState<T>) -> Result<PolarForm<T>> {
    Geometry::new(state)?.polar_form()
}

pub fn circle_deviation<T: Real>(state: &CurveState<T>) -> Result<(Complex<T>, T, T)> {
    Geometry::new(state)?.circle_deviation()
}

pub fn diagnostics<T: Real>(state: &CurveState<T>) -> Result<DiagnosticsReport<T>> {
    Geometry::new(state)?.diagnostics()
}
