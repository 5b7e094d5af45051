//! Acceptance criteria. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; the process fails if any criterion does.

use std::time::{Duration, Instant};

use num_complex::Complex;
use peskin_core::curves;
use peskin_core::dynamics::{hookean_rhs, reparam_consistency_residual, reparameterize_to_hookean, TensionProfile};
use peskin_core::quadrature::{cauchy_identity_residual, imag_j_identity_residual};
use peskin_core::stepper::{advance, Scheme, StepperConfig, TimeStep, Trajectory};
use peskin_core::tangential::TangentialState;
use peskin_core::verify::*;
use peskin_core::Curve;

const N: usize = 256;
const SLACK: f64 = 1e-6;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn perturbed() -> Curve {
    curves::fourier_perturbed(N, 1.0, &[(2, c(0.1, 0.0))]).unwrap()
}

fn run(x0: &Curve, cfl: f64, t_end: f64) -> Trajectory<f64> {
    let config = StepperConfig::new(Scheme::Rk4, TimeStep::Cfl(cfl), t_end);
    advance(x0, &config, hookean_rhs, |_, _| {}).unwrap().into_result().unwrap()
}

fn series(traj: &Trajectory<f64>, label: &str) -> MonitorSeries {
    MonitorSeries::from_trajectory(traj, Scheme::Rk4, label).unwrap()
}

/// Verdict of one criterion with the checks behind it.
struct Verdict {
    checks: Vec<CheckResult>,
    detail: String,
}

impl Verdict {
    fn of(checks: Vec<CheckResult>) -> Self {
        Self { checks, detail: String::new() }
    }

    fn with(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

fn quadrature_identity() -> Verdict {
    let shapes = [
        ("circle", curves::circle(N, 1.0, c(0.0, 0.0)).unwrap()),
        ("ellipse(2,1)", curves::ellipse(N, 2.0, 1.0).unwrap()),
        ("reparam circle", curves::reparam_circle(N, 1.0, c(0.0, 0.0), |s| s + 0.3 * s.sin()).unwrap()),
    ];
    let mut checks = Vec::new();
    for (name, x) in &shapes {
        let cauchy = (0..N).map(|i| cauchy_identity_residual(x, i).unwrap().norm()).fold(0.0, f64::max);
        let imag = (0..N).map(|i| imag_j_identity_residual(x, i).unwrap().abs()).fold(0.0, f64::max);
        checks.push(CheckResult::judged(format!("{name}: Cauchy identity"), cauchy, 1e-8, None));
        checks.push(CheckResult::judged(format!("{name}: Im J identity"), imag, 1e-8, None));
    }
    Verdict::of(checks)
}

fn equilibrium() -> Verdict {
    let mut checks = Vec::new();
    for (a, b) in [(c(0.0, 0.0), c(1.0, 0.0)), (c(1.0, -2.0), Complex::from_polar(2.0, 0.7)), (c(3.0, 0.5), c(0.0, 0.5))] {
        let x = Curve::from_fn(N, |s: f64| a + b * Complex::from_polar(1.0, s)).unwrap();
        let u = hookean_rhs(&x).unwrap().iter().map(|v| v.norm()).fold(0.0, f64::max);
        checks.push(CheckResult::judged(format!("|rhs| on {a} + {b} e^(is)"), u, 1e-10, None));
    }
    let x0 = Curve::from_fn(N, |s: f64| c(1.0, -2.0) + Complex::from_polar(2.0, 0.7 + s)).unwrap();
    let s = series(&run(&x0, 0.5, 10.0), "circle");
    let mut drift = 0.0f64;
    let mut worst = "";
    for name in SERIES_COLUMNS.iter().skip(1) {
        let v = s.field(name).unwrap();
        let d = v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max);
        if d > drift {
            drift = d;
            worst = name;
        }
    }
    checks.push(CheckResult::judged("diagnostics constant over t in [0, 10]", drift, 1e-9, None).note(format!("largest drift in {worst}")));
    Verdict::of(checks)
}

fn area_conservation(reference: &MonitorSeries) -> Verdict {
    let halved = series(&run(&perturbed(), 0.25, 5.0), "perturbed c2 = 0.1, cfl 0.25");
    let coarse = area_conservation_check(reference, 1e-6);
    let fine = area_conservation_check(&halved, 1e-6);
    let ratio = coarse.worst_violation / fine.worst_violation;
    let improve = CheckResult::judged("halving dt improves drift 8x", 8.0 / ratio, 1.0, None)
        .note(format!("drift {:.3e} -> {:.3e}, ratio {ratio:.2}", coarse.worst_violation, fine.worst_violation));
    let detail = format!("drift {:.2e}, ratio {ratio:.2}", coarse.worst_violation);
    Verdict::of(vec![coarse, improve]).with(detail)
}

fn phi_principle(s: &MonitorSeries) -> Verdict {
    let mono = check_monotone(s, "phi_star", Direction::NonIncreasing, SLACK).unwrap();
    let env = phi_decay_check(s, 1e-3);
    let fit = fit_exponential_rate(s, "phi_star", 0.0).unwrap();
    let detail = format!("Φ* {:.3e} -> {:.3e}, fitted rate {:.3} (μ = {PHI_DECAY_RATE:.4})", s.first().phi_star, s.last().phi_star, fit.rate);
    Verdict::of(vec![mono, env]).with(detail)
}

fn curvature_principles(s: &MonitorSeries) -> Verdict {
    let checks = curvature_envelope_check(s, SLACK, 1e-9).unwrap();
    let lo = s.field("kappa_star_scaled").unwrap().into_iter().fold(f64::INFINITY, f64::min);
    Verdict::of(checks).with(format!("min κ*R_X = {lo:.9}"))
}

fn stretch_principles(s: &MonitorSeries) -> Verdict {
    let mut checks = Vec::new();
    for f in ["length", "energy", "stretch_max"] {
        checks.push(check_monotone(s, f, Direction::NonIncreasing, SLACK).unwrap());
    }
    for f in ["stretch_min", "well_stretched"] {
        checks.push(check_monotone_from(s, f, Direction::NonDecreasing, SLACK, 0.1).unwrap());
    }
    Verdict::of(checks)
}

fn circle_reduction() -> Verdict {
    let initial = TangentialState::from_fn(N, 1.0, c(0.0, 0.0), |s| 0.3 * s.sin()).unwrap();
    let config = StepperConfig::new(Scheme::Rk4, TimeStep::Cfl(0.5), 1.0);
    let cmp = compare_with_tangential(&initial, &config, &TangentialTolerances::default()).unwrap();
    let last = cmp.deviation.last().copied().unwrap();
    Verdict::of(cmp.checks).with(format!("deviation at t = {} is {:.2e}, dt = {:.4e}", last.0, last.1, cmp.dt))
}

fn general_elasticity() -> Verdict {
    let x = perturbed();
    let q: Vec<f64> = x.grid.nodes().iter().map(|s| 1.0 + 0.2 * s.cos()).collect();
    let tension = TensionProfile::General { q };
    let residual = reparam_consistency_residual(&x, &tension).unwrap();
    let k0 = reparameterize_to_hookean(&x, &tension).unwrap().k0;
    Verdict::of(vec![
        CheckResult::judged("reparameterization residual", residual, 1e-6, None),
        CheckResult::judged("k0 = √0.96", (k0 - 0.96f64.sqrt()).abs(), 1e-10, None),
    ])
    .with(format!("residual {residual:.2e}, k0 = {k0:.15}"))
}

fn derived_consistency(traj: &Trajectory<f64>) -> Verdict {
    let checks = consistency_residuals(traj, &ConsistencyOptions::default()).unwrap();
    let orders: Vec<String> = checks
        .iter()
        .filter(|c| c.name.ends_with("order"))
        .map(|c| c.notes[0].trim_start_matches("observed order ").to_string())
        .collect();
    Verdict::of(checks).with(format!("orders [{}]", orders.join(", ")))
}

fn geometry_suite() -> Verdict {
    let shapes = [
        ("circle", curves::circle(N, 1.0, c(0.0, 0.0)).unwrap()),
        ("reparam circle", curves::reparam_circle(N, 1.0, c(0.0, 0.0), |s| s + 0.3 * s.sin()).unwrap()),
        ("ellipse(1.2,1)", curves::ellipse(N, 1.2, 1.0).unwrap()),
        ("perturbed c2", perturbed()),
        ("perturbed c3", curves::fourier_perturbed(N, 1.0, &[(3, c(0.02, 0.0))]).unwrap()),
    ];
    let mut checks = Vec::new();
    for (name, x) in &shapes {
        for mut r in geometry_inequality_suite(x, &GeometryTolerances::default()).unwrap() {
            r.name = format!("{name}: {}", r.name);
            checks.push(r);
        }
    }
    let count = checks.len();
    Verdict::of(checks).with(format!("{count} inequalities"))
}

fn equilibrium_convergence() -> Verdict {
    let s = series(&run(&perturbed(), 0.5, 20.0), "perturbed c2 = 0.1");
    let checks = equilibrium_convergence_check(&s, 5.0, 1e-3).unwrap();
    let rates: Vec<String> = checks.iter().take(3).map(|c| c.notes[0].split(" over").next().unwrap_or("").to_string()).collect();
    Verdict::of(checks).with(rates.join("; "))
}

fn self_convergence() -> Verdict {
    let x0 = curves::fourier_perturbed(N, 1.0, &[(2, c(0.1, 0.0)), (8, c(0.01, 0.0))]).unwrap();
    let spec = ConvergenceSpec {
        scheme: Scheme::Rk4,
        t_end: 0.5,
        dt0: 0.04,
        time_levels: 4,
        sizes: vec![16, 32, 64, 128, 256, 512],
        spatial_floor: 1e-11,
    };
    let report = convergence_study(&x0, |n| curves::ellipse(n, 4.0, 1.0), &spec).unwrap();
    let orders: Vec<String> = report.orders().iter().map(|o| format!("{o:.3}")).collect();
    let ratios: Vec<String> = report.spatial.iter().filter_map(|l| l.ratio).map(|r| format!("{r:.1}")).collect();
    let detail = format!("RK4 orders [{}], spatial ratios [{}]", orders.join(", "), ratios.join(", "));
    Verdict::of(report.checks(0.5, 10.0, spec.spatial_floor)).with(detail)
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, title: &str, budget: Duration, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let bad: Vec<&CheckResult> = v.checks.iter().filter(|c| !c.passed()).collect();
        let in_time = took <= budget;
        let ok = bad.is_empty() && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "{} {id:>2} {title}: {} checks, {:.1} s{}{}",
            if ok { "PASS" } else { "FAIL" },
            v.checks.len(),
            took.as_secs_f64(),
            if v.detail.is_empty() { String::new() } else { format!("; {}", v.detail) },
            if in_time { String::new() } else { format!("; over the {} s budget", budget.as_secs()) },
        );
        for c in bad {
            println!("       {}", c.summary());
        }
    };
    let secs = Duration::from_secs;

    report(1, "quadrature identity", secs(1), &mut quadrature_identity);
    report(2, "equilibrium fixed points", secs(5), &mut equilibrium);

    let start = Instant::now();
    let reference = run(&perturbed(), 0.5, 5.0);
    let reference_time = start.elapsed();
    let perturbed_series = series(&reference, "perturbed c2 = 0.1");
    report(3, "area conservation", secs(60).saturating_sub(reference_time), &mut || area_conservation(&perturbed_series));

    let start = Instant::now();
    let ellipse = series(&run(&curves::ellipse(N, 1.2, 1.0).unwrap(), 0.5, 20.0), "ellipse(1.2, 1)");
    let ellipse_time = start.elapsed();
    report(4, "phi maximum principle and decay", secs(180).saturating_sub(ellipse_time), &mut || phi_principle(&ellipse));
    report(5, "curvature extremum principles", secs(180), &mut || curvature_principles(&ellipse));
    report(6, "stretch principles", secs(180), &mut || stretch_principles(&ellipse));
    report(7, "circle-shape reduction", secs(120), &mut circle_reduction);
    report(8, "general-elasticity reparameterization", secs(5), &mut general_elasticity);
    report(9, "derived-equation consistency", secs(120), &mut || derived_consistency(&reference));
    report(10, "geometry inequality suite", secs(10), &mut geometry_suite);
    report(11, "convergence to equilibrium", secs(180), &mut equilibrium_convergence);
    report(12, "self-convergence", secs(180), &mut self_convergence);

    if failed > 0 {
        println!("{failed} of 12 acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 12 acceptance criteria passed");
}
