//! Run configuration, initial data, and the on-disk formats.
//!
//! Configs are strict JSON: unknown keys are rejected and every error names
//! the path of the offending key. Series files are CSV with the columns of
//! [`SERIES_COLUMNS`]; checkpoints are a JSON metadata line followed by
//! `s,re_x,im_x` rows. Numbers are written with 17 significant digits.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{general_rhs, hookean_rhs, TensionProfile, VelocityField};
use crate::error::{PeskinError, Result};
use crate::grid::{CurveState, PeriodicGrid};
use crate::stepper::{Scheme, StepperConfig, TimeStep};
use crate::verify::{report_from_values, report_values, MonitorSeries, RunMeta, SERIES_COLUMNS};

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    #[serde(default)]
    pub scheme: Scheme,
    /// Fixed step; exclusive with `cfl`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Courant factor, 0.5 when neither `dt` nor `cfl` is given.
    #[serde(default)]
    pub cfl: Option<f64>,
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub observe_every: usize,
    #[serde(default)]
    pub filter_threshold: Option<f64>,
    #[serde(default)]
    pub elasticity: Elasticity,
    pub initial: InitialSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Seed for randomized initial data.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Elasticity {
    Hookean {
        #[serde(default = "one")]
        k0: f64,
    },
    /// `q(s) = value`.
    Constant { value: f64 },
    /// `q(s) = a0 + Σ_k cos[k-1] cos(ks)`.
    CosineSeries {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
    },
    /// CSV with header `s,q` and one row per node.
    SampleFile { path: PathBuf },
}

impl Default for Elasticity {
    fn default() -> Self {
        Elasticity::Hookean { k0: 1.0 }
    }
}

/// One Fourier mode `c e^{iks}` with `c = re + i·im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `center + radius e^{is}`.
    UniformCircle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `center + radius e^{iθ(s)}`, `θ = s + Σ_k a[k-1] sin(ks) + b[k-1] cos(ks)`.
    ReparamCircle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        a: Vec<f64>,
        #[serde(default)]
        b: Vec<f64>,
    },
    /// `radius e^{is} + Σ c_k e^{iks}`.
    FourierPerturbed {
        #[serde(default = "one")]
        radius: f64,
        modes: Vec<Mode>,
    },
    /// `(a cos s, b sin s)`.
    Ellipse { a: f64, b: f64 },
    /// A checkpoint file. A different grid size is an error unless
    /// `resample` is set.
    FromFile {
        path: PathBuf,
        #[serde(default)]
        resample: bool,
    },
    /// `radius e^{is} + Σ_{2<=|k|<=max_mode} c_k e^{iks}` with `|c_k| <=
    /// amplitude/k²` drawn from `seed`.
    RandomFourier {
        #[serde(default = "one")]
        radius: f64,
        max_mode: usize,
        amplitude: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_series")]
    pub series: String,
    #[serde(default = "default_checkpoint")]
    pub checkpoint: String,
    /// Write a checkpoint at every `checkpoint_every`-th observation; 0 keeps
    /// only the final one.
    #[serde(default)]
    pub checkpoint_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_series() -> String {
    "series.csv".into()
}

fn default_checkpoint() -> String {
    "final.csv".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), series: default_series(), checkpoint: default_checkpoint(), checkpoint_every: 0 }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> PeskinError {
    PeskinError::Config { path: path.into(), message: message.into() }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_error(if path.is_empty() { "." } else { &path }, e.inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|source| PeskinError::Io { path: path.into(), source })?;
    parse_config(&text)
}

fn finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(config_error(path, format!("{v} is not finite")))
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_error(path, format!("must be positive and finite, got {v}")))
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        PeriodicGrid::<f64>::new(self.n).map_err(|e| config_error("n", e.to_string()))?;
        match (self.dt, self.cfl) {
            (Some(_), Some(_)) => return Err(config_error("dt", "give either dt or cfl, not both")),
            (Some(dt), None) => positive("dt", dt)?,
            (None, Some(c)) if !(c > 0.0 && c <= 1.0) => {
                return Err(config_error("cfl", format!("must lie in (0, 1], got {c}")));
            }
            _ => {}
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(config_error("t_end", format!("must be finite and >= 0, got {}", self.t_end)));
        }
        if self.observe_every == 0 {
            return Err(config_error("observe_every", "must be at least 1"));
        }
        if let Some(f) = self.filter_threshold {
            if !(0.0..1.0).contains(&f) {
                return Err(config_error("filter_threshold", format!("must lie in [0, 1), got {f}")));
            }
        }
        match &self.elasticity {
            Elasticity::Hookean { k0 } => positive("elasticity.k0", *k0)?,
            Elasticity::Constant { value } => positive("elasticity.value", *value)?,
            Elasticity::CosineSeries { a0, cos } => {
                finite("elasticity.a0", *a0)?;
                for (k, c) in cos.iter().enumerate() {
                    finite(&format!("elasticity.cos[{k}]"), *c)?;
                }
                // sup of the oscillation bounds the minimum from below
                let swing: f64 = cos.iter().map(|c| c.abs()).sum();
                if !(a0 - swing > 0.0) {
                    let q = self.tension_profile(self.n.max(64) * 8)?;
                    if let TensionProfile::General { q } = q {
                        if q.iter().any(|&v| !(v > 0.0)) {
                            return Err(config_error("elasticity", "tension q(s) must stay positive"));
                        }
                    }
                }
            }
            Elasticity::SampleFile { .. } => {}
        }
        match &self.initial {
            InitialSpec::UniformCircle { radius, center } | InitialSpec::ReparamCircle { radius, center, .. } => {
                positive("initial.radius", *radius)?;
                finite("initial.center[0]", center[0])?;
                finite("initial.center[1]", center[1])?;
            }
            InitialSpec::FourierPerturbed { radius, modes } => {
                positive("initial.radius", *radius)?;
                for (j, m) in modes.iter().enumerate() {
                    finite(&format!("initial.modes[{j}].re"), m.re)?;
                    finite(&format!("initial.modes[{j}].im"), m.im)?;
                }
            }
            InitialSpec::Ellipse { a, b } => {
                positive("initial.a", *a)?;
                positive("initial.b", *b)?;
            }
            InitialSpec::RandomFourier { radius, max_mode, amplitude } => {
                positive("initial.radius", *radius)?;
                if *max_mode < 2 || *max_mode >= self.n / 2 {
                    return Err(config_error("initial.max_mode", format!("must lie in [2, n/2), got {max_mode}")));
                }
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(config_error("initial.amplitude", "must be finite and >= 0"));
                }
            }
            InitialSpec::FromFile { .. } => {}
        }
        if let InitialSpec::ReparamCircle { a, b, .. } = &self.initial {
            for (j, v) in a.iter().chain(b).enumerate() {
                finite(&format!("initial.coefficients[{j}]"), *v)?;
            }
        }
        Ok(())
    }

    pub fn time_step(&self) -> TimeStep<f64> {
        match (self.dt, self.cfl) {
            (Some(dt), _) => TimeStep::Fixed(dt),
            (None, Some(c)) => TimeStep::Cfl(c),
            (None, None) => TimeStep::Cfl(0.5),
        }
    }

    pub fn stepper(&self) -> StepperConfig<f64> {
        let mut c = StepperConfig::new(self.scheme, self.time_step(), self.t_end);
        c.filter_threshold = self.filter_threshold;
        c.observe_every = self.observe_every;
        c
    }

    /// Tension samples on an `n`-grid.
    pub fn tension_profile(&self, n: usize) -> Result<TensionProfile<f64>> {
        let grid = PeriodicGrid::<f64>::new(n)?;
        Ok(match &self.elasticity {
            Elasticity::Hookean { k0 } => TensionProfile::Hookean { k0: *k0 },
            Elasticity::Constant { value } => TensionProfile::General { q: vec![*value; n] },
            Elasticity::CosineSeries { a0, cos } => TensionProfile::General {
                q: grid
                    .nodes()
                    .iter()
                    .map(|&s| a0 + cos.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * s).cos()).sum::<f64>())
                    .collect(),
            },
            Elasticity::SampleFile { path } => {
                let q = read_tension(path)?;
                if q.len() != n {
                    return Err(PeskinError::GridMismatch { expected: n, found: q.len() });
                }
                TensionProfile::General { q }
            }
        })
    }

    /// The velocity field the configured elasticity induces.
    pub fn velocity(&self) -> Result<impl Fn(&CurveState<f64>) -> Result<VelocityField<f64>>> {
        let profile = self.tension_profile(self.n)?;
        profile.samples(self.n)?;
        let unit = profile == TensionProfile::Hookean { k0: 1.0 };
        Ok(move |s: &CurveState<f64>| if unit { hookean_rhs(s) } else { general_rhs(s, &profile) })
    }

    /// The initial curve on this config's grid.
    pub fn initial_state(&self) -> Result<CurveState<f64>> {
        make_initial(&self.initial, self.n, self.seed)
    }
}

/// `θ₀'(s) = 1 + Σ k a_k cos(ks) - k b_k sin(ks)`, minimized on a fine grid.
fn min_theta_slope(a: &[f64], b: &[f64], n: usize) -> f64 {
    let m = 16 * n.max(64);
    (0..m)
        .map(|j| {
            let s = std::f64::consts::TAU * j as f64 / m as f64;
            let mut d = 1.0;
            for (k, c) in a.iter().enumerate() {
                d += (k + 1) as f64 * c * ((k + 1) as f64 * s).cos();
            }
            for (k, c) in b.iter().enumerate() {
                d -= (k + 1) as f64 * c * ((k + 1) as f64 * s).sin();
            }
            d
        })
        .fold(f64::INFINITY, f64::min)
}

/// Samples `spec` on an `n`-node grid and checks admissibility.
pub fn make_initial(spec: &InitialSpec, n: usize, seed: u64) -> Result<CurveState<f64>> {
    let state = match spec {
        InitialSpec::UniformCircle { radius, center } => {
            let c = Complex::new(center[0], center[1]);
            CurveState::from_fn(n, |s: f64| c + Complex::from_polar(*radius, s))?
        }
        InitialSpec::ReparamCircle { radius, center, a, b } => {
            let slope = min_theta_slope(a, b, n);
            if !(slope > 0.0) {
                return Err(PeskinError::InvalidInput(format!(
                    "reparam_circle: θ₀ is not increasing (min θ₀' = {slope:.6})"
                )));
            }
            let c = Complex::new(center[0], center[1]);
            CurveState::from_fn(n, |s: f64| {
                let mut th = s;
                for (k, v) in a.iter().enumerate() {
                    th += v * ((k + 1) as f64 * s).sin();
                }
                for (k, v) in b.iter().enumerate() {
                    th += v * ((k + 1) as f64 * s).cos();
                }
                c + Complex::from_polar(*radius, th)
            })?
        }
        InitialSpec::FourierPerturbed { radius, modes } => {
            let modes: Vec<(i64, Complex<f64>)> = modes.iter().map(|m| (m.k, Complex::new(m.re, m.im))).collect();
            crate::curves::fourier_perturbed(n, *radius, &modes)?
        }
        InitialSpec::Ellipse { a, b } => crate::curves::ellipse(n, *a, *b)?,
        InitialSpec::FromFile { path, resample } => fit_grid(load_checkpoint(path)?, n, *resample)?,
        InitialSpec::RandomFourier { radius, max_mode, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut modes = Vec::new();
            for k in 2..=*max_mode as i64 {
                for kk in [k, -k] {
                    let size = amplitude / (k * k) as f64 * rng.gen::<f64>();
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    modes.push((kk, Complex::from_polar(size, phase)));
                }
            }
            crate::curves::fourier_perturbed(n, *radius, &modes)?
        }
    };
    state.check_admissible()?;
    crate::geometry::effective_radius(&state)?;
    Ok(state)
}

/// `state` on an `n`-grid: unchanged if sizes agree, interpolated when
/// `resample` is set, an error otherwise.
pub fn fit_grid(state: CurveState<f64>, n: usize, resample: bool) -> Result<CurveState<f64>> {
    if state.n() == n {
        Ok(state)
    } else if resample {
        state.resample(n)
    } else {
        Err(PeskinError::GridMismatch { expected: n, found: state.n() })
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PeskinError + '_ {
    move |source| PeskinError::Io { path: path.into(), source }
}

fn format_error(path: &Path, message: impl Into<String>) -> PeskinError {
    PeskinError::Format { path: path.into(), message: message.into() }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(io_error(path))?))
}

fn parse_row(path: &Path, line_no: usize, line: &str, width: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format_error(path, format!("line {line_no}: {e}")))?;
    if vals.len() != width {
        return Err(format_error(path, format!("line {line_no}: expected {width} fields, found {}", vals.len())));
    }
    Ok(vals)
}

pub fn write_series(series: &MonitorSeries, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let mut body = SERIES_COLUMNS.join(",");
    body.push('\n');
    for r in &series.rows {
        let row: Vec<String> = report_values(r).iter().map(|v| format!("{v:.16e}")).collect();
        body.push_str(&row.join(","));
        body.push('\n');
    }
    w.write_all(body.as_bytes()).map_err(io_error(path))?;
    w.flush().map_err(io_error(path))
}

/// Reads a series file; run metadata is not stored there and comes back empty.
pub fn read_series(path: &Path) -> Result<MonitorSeries> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| format_error(path, "empty file"))?;
    if header.trim() != SERIES_COLUMNS.join(",") {
        return Err(format_error(path, format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v = parse_row(path, k + 2, line, SERIES_COLUMNS.len())?;
        let arr: [f64; 15] = v.try_into().expect("width checked");
        rows.push(report_from_values(&arr));
    }
    MonitorSeries::new(rows, RunMeta::default()).map_err(|e| format_error(path, e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub n: usize,
    pub time: f64,
}

pub fn write_checkpoint(state: &CurveState<f64>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let meta = CheckpointMeta { n: state.n(), time: state.time };
    let mut body = serde_json::to_string(&meta).expect("plain struct serializes");
    body.push_str("\ns,re_x,im_x\n");
    for (s, z) in state.grid.nodes().iter().zip(&state.x) {
        body.push_str(&format!("{s:.16e},{:.16e},{:.16e}\n", z.re, z.im));
    }
    w.write_all(body.as_bytes()).map_err(io_error(path))?;
    w.flush().map_err(io_error(path))
}

pub fn load_checkpoint(path: &Path) -> Result<CurveState<f64>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let mut lines = text.lines();
    let meta: CheckpointMeta = serde_json::from_str(lines.next().ok_or_else(|| format_error(path, "empty file"))?)
        .map_err(|e| format_error(path, format!("metadata line: {e}")))?;
    if lines.next().map(str::trim) != Some("s,re_x,im_x") {
        return Err(format_error(path, "missing `s,re_x,im_x` header"));
    }
    let grid = PeriodicGrid::<f64>::new(meta.n).map_err(|e| format_error(path, e.to_string()))?;
    let nodes = grid.nodes();
    let mut x = Vec::with_capacity(meta.n);
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v = parse_row(path, k + 3, line, 3)?;
        let j = x.len();
        if j >= meta.n {
            return Err(format_error(path, format!("more than n = {} rows", meta.n)));
        }
        if (v[0] - nodes[j]).abs() > 1e-12 {
            return Err(format_error(path, format!("row {j}: s = {} is not the grid node {}", v[0], nodes[j])));
        }
        x.push(Complex::new(v[1], v[2]));
    }
    if x.len() != meta.n {
        return Err(format_error(path, format!("{} rows for n = {}", x.len(), meta.n)));
    }
    CurveState::new(grid, x, meta.time).map_err(|e| format_error(path, e.to_string()))
}

/// Tension samples from a CSV with header `s,q`.
pub fn read_tension(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("s,q") {
        return Err(format_error(path, "missing `s,q` header"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| parse_row(path, k + 2, l, 2).map(|v| v[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"n": 64, "t_end": 1.0, "initial": {"uniform_circle": {}}}"#;

    fn config_path(text: &str) -> String {
        match parse_config(text) {
            Err(PeskinError::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.scheme, Scheme::Rk4);
        assert_eq!(c.time_step(), TimeStep::Cfl(0.5));
        assert_eq!(c.filter_threshold, None);
        assert_eq!(c.observe_every, 1);
        assert_eq!(c.elasticity, Elasticity::Hookean { k0: 1.0 });
        assert_eq!(c.output, OutputSpec::default());
    }

    #[test]
    fn errors_name_the_offending_key() {
        assert_eq!(config_path(r#"{"n": -4, "t_end": 1.0, "initial": {"uniform_circle": {}}}"#), "n");
        assert_eq!(config_path(r#"{"n": 63, "t_end": 1.0, "initial": {"uniform_circle": {}}}"#), "n");
        assert_eq!(config_path(r#"{"n": 64, "t_end": 1.0, "colour": 3, "initial": {"uniform_circle": {}}}"#), "colour");
        assert_eq!(
            config_path(r#"{"n": 64, "t_end": 1.0, "initial": {"ellipse": {"a": 1, "b": 1, "c": 2}}}"#),
            "initial.ellipse.c"
        );
        assert_eq!(
            config_path(r#"{"n": 64, "t_end": 1.0, "initial": {"fourier_perturbed": {"modes": [{"k": 2, "re": "x"}]}}}"#),
            "initial.fourier_perturbed.modes[0].re"
        );
        assert_eq!(config_path(r#"{"n": 64, "t_end": 1.0, "cfl": 2.0, "initial": {"uniform_circle": {}}}"#), "cfl");
        assert_eq!(
            config_path(r#"{"n": 64, "t_end": 1.0, "dt": 0.1, "cfl": 0.5, "initial": {"uniform_circle": {}}}"#),
            "dt"
        );
        assert_eq!(config_path(r#"{"n": 64, "initial": {"uniform_circle": {}}}"#), ".");
        assert_eq!(config_path("not json"), ".");
    }

    #[test]
    fn unknown_key_message_mentions_the_key() {
        match parse_config(r#"{"n": 64, "t_end": 1.0, "colour": 3, "initial": {"uniform_circle": {}}}"#) {
            Err(e) => assert!(e.to_string().contains("colour"), "{e}"),
            Ok(_) => panic!("accepted an unknown key"),
        }
    }

    #[test]
    fn generated_curves_match_formulas() {
        let h = std::f64::consts::TAU / 32.0;
        let circle = make_initial(&InitialSpec::UniformCircle { radius: 1.0, center: [0.0, 0.0] }, 32, 0).unwrap();
        let ellipse = make_initial(&InitialSpec::Ellipse { a: 2.0, b: 1.0 }, 32, 0).unwrap();
        let pert = make_initial(
            &InitialSpec::FourierPerturbed { radius: 1.0, modes: vec![Mode { k: 2, re: 0.1, im: 0.0 }] },
            32,
            0,
        )
        .unwrap();
        for j in 0..32 {
            let s = h * j as f64;
            assert!((circle.x[j] - Complex::from_polar(1.0, s)).norm() < 1e-15);
            assert!((ellipse.x[j] - Complex::new(2.0 * s.cos(), s.sin())).norm() < 1e-15);
            assert!((pert.x[j] - Complex::from_polar(1.0, s) - Complex::from_polar(0.1, 2.0 * s)).norm() < 1e-15);
        }
    }

    #[test]
    fn non_monotone_reparameterization_is_rejected() {
        let spec = InitialSpec::ReparamCircle { radius: 1.0, center: [0.0, 0.0], a: vec![1.5], b: vec![] };
        assert!(matches!(make_initial(&spec, 64, 0), Err(PeskinError::InvalidInput(_))));
        let ok = InitialSpec::ReparamCircle { radius: 1.0, center: [0.0, 0.0], a: vec![0.3], b: vec![] };
        assert!(make_initial(&ok, 64, 0).is_ok());
    }

    #[test]
    fn random_fourier_is_seeded() {
        let spec = InitialSpec::RandomFourier { radius: 1.0, max_mode: 6, amplitude: 0.1 };
        let a = make_initial(&spec, 64, 7).unwrap();
        let b = make_initial(&spec, 64, 7).unwrap();
        let c = make_initial(&spec, 64, 8).unwrap();
        assert_eq!(a.x, b.x);
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn cosine_tension_must_stay_positive() {
        let bad = r#"{"n": 64, "t_end": 1.0, "elasticity": {"cosine_series": {"a0": 1.0, "cos": [1.5]}},
                      "initial": {"uniform_circle": {}}}"#;
        assert_eq!(config_path(bad), "elasticity");
        let good = r#"{"n": 64, "t_end": 1.0, "elasticity": {"cosine_series": {"a0": 1.0, "cos": [0.2]}},
                       "initial": {"uniform_circle": {}}}"#;
        let c = parse_config(good).unwrap();
        let TensionProfile::General { q } = c.tension_profile(64).unwrap() else { panic!() };
        assert!((q[0] - 1.2).abs() < 1e-15 && (q[32] - 0.8).abs() < 1e-15);
    }
}
