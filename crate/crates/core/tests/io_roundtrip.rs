use num_complex::Complex;
use peskin_core::curves;
use peskin_core::dynamics::hookean_rhs;
use peskin_core::io::{fit_grid, load_checkpoint, make_initial, read_series, write_checkpoint, write_series, InitialSpec};
use peskin_core::stepper::{advance, Scheme, StepperConfig, TimeStep};
use peskin_core::verify::{MonitorSeries, SERIES_COLUMNS};
use peskin_core::PeskinError;

fn sample() -> peskin_core::Curve {
    let mut x = curves::fourier_perturbed(64, 1.0, &[(2, Complex::new(0.1, 0.03)), (-3, Complex::new(0.0, 0.02))]).unwrap();
    x.time = 0.123456789;
    x
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/state.csv");
    let x = sample();
    write_checkpoint(&x, &path).unwrap();
    let y = load_checkpoint(&path).unwrap();
    assert_eq!(y.n(), x.n());
    assert_eq!(y.time.to_bits(), x.time.to_bits());
    for (a, b) in x.x.iter().zip(&y.x) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('{'));
    assert_eq!(lines.next().unwrap(), "s,re_x,im_x");
}

#[test]
fn series_round_trip_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let mut config = StepperConfig::new(Scheme::Rk4, TimeStep::Cfl(0.5), 0.2);
    config.observe_every = 3;
    let traj = advance(&sample(), &config, hookean_rhs, |_, _| {}).unwrap();
    let series = MonitorSeries::from_trajectory(&traj, Scheme::Rk4, "sample").unwrap();
    write_series(&series, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "time,R_X,length,energy,phi_star,kappa_plus,kappa_minus,kappa_star,stretch_min,stretch_max,diameter,chord_arc,well_stretched,z_norm,circle_dev"
    );
    assert_eq!(text.lines().next().unwrap(), SERIES_COLUMNS.join(","));
    let back = read_series(&path).unwrap();
    assert_eq!(back.rows, series.rows);
}

#[test]
fn mismatched_grid_needs_explicit_resampling() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.csv");
    write_checkpoint(&sample(), &path).unwrap();
    let strict = InitialSpec::FromFile { path: path.clone(), resample: false };
    assert!(matches!(make_initial(&strict, 128, 0), Err(PeskinError::GridMismatch { expected: 128, found: 64 })));
    assert_eq!(make_initial(&strict, 64, 0).unwrap().n(), 64);
    let loose = InitialSpec::FromFile { path, resample: true };
    let fine = make_initial(&loose, 128, 0).unwrap();
    assert_eq!(fine.n(), 128);
    // the sample is band-limited, so interpolation reproduces it at shared nodes
    let x = sample();
    for j in 0..64 {
        assert!((fine.x[2 * j] - x.x[j]).norm() < 1e-14);
    }
    assert!(matches!(fit_grid(x, 32, false), Err(PeskinError::GridMismatch { .. })));
}

#[test]
fn malformed_files_are_reported_with_their_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "{\"n\": 8, \"time\": 0.0}\ns,re_x,im_x\n0,1,0\n").unwrap();
    match load_checkpoint(&bad) {
        Err(e @ PeskinError::Format { .. }) => assert!(e.to_string().contains("bad.csv"), "{e}"),
        other => panic!("expected a format error, got {other:?}"),
    }
    std::fs::write(&bad, "time,R_X\n0,1\n").unwrap();
    assert!(matches!(read_series(&bad), Err(PeskinError::Format { .. })));
    let missing = dir.path().join("missing.csv");
    match load_checkpoint(&missing) {
        Err(e @ PeskinError::Io { .. }) => assert!(e.to_string().contains("missing.csv")),
        other => panic!("expected an i/o error, got {other:?}"),
    }
}
