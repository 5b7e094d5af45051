use std::f64::consts::TAU;

use num_complex::Complex;
use peskin_core::curves;
use peskin_core::dynamics::{hookean_rhs, stretch_weighted_z};
use peskin_core::geometry::Geometry;
use peskin_core::io::{load_checkpoint, write_checkpoint};
use peskin_core::quadrature::periodic_trapezoid;
use peskin_core::Curve;
use proptest::prelude::*;

/// Unit circle plus small modes `2..=5` in both directions, sampled on `n` nodes.
fn perturbed_circle_on(n: usize) -> impl Strategy<Value = Curve> {
    prop::collection::vec((-0.04f64..0.04, -0.04f64..0.04), 8).prop_map(move |c| {
        let modes: Vec<(i64, Complex<f64>)> = c
            .iter()
            .enumerate()
            .map(|(j, &(re, im))| {
                let k = (j / 2 + 2) as i64;
                (if j % 2 == 0 { k } else { -k }, Complex::new(re, im))
            })
            .collect();
        curves::fourier_perturbed(n, 1.0, &modes).unwrap()
    })
}

fn perturbed_circle() -> impl Strategy<Value = Curve> {
    perturbed_circle_on(64)
}

fn affine() -> impl Strategy<Value = (Complex<f64>, Complex<f64>)> {
    (-3.0f64..3.0, -3.0f64..3.0, 0.2f64..5.0, 0.0f64..TAU)
        .prop_map(|(ar, ai, r, th)| (Complex::new(ar, ai), Complex::from_polar(r, th)))
}

fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phi_is_symmetric_and_similarity_invariant(x in perturbed_circle(), (a, b) in affine()) {
        let g = Geometry::new(&x).unwrap();
        let y = Curve::new(x.grid.clone(), x.x.iter().map(|z| b * z + a).collect(), 0.0).unwrap();
        let gy = Geometry::new(&y).unwrap();
        for i in (0..64).step_by(3) {
            for j in (0..64).step_by(5) {
                if i == j {
                    continue;
                }
                let p = g.phi(i, j).unwrap();
                prop_assert!((p - g.phi(j, i).unwrap()).abs() <= 1e-12);
                prop_assert!(wrap(p - gy.phi(i, j).unwrap()).abs() <= 1e-10);
            }
        }
    }

    // |X'| is not band-limited; 64 nodes leave ~1e-4 of aliasing in ∫|X'|Z
    #[test]
    fn isoperimetric_and_integral_identities(x in perturbed_circle_on(256)) {
        let g = Geometry::new(&x).unwrap();
        let r = g.effective_radius().unwrap();
        prop_assert!(g.total_length() >= TAU * r * (1.0 - 1e-10));
        let w: Vec<f64> = g.curvature().iter().zip(g.stretch()).map(|(k, s)| k * s).collect();
        prop_assert!((periodic_trapezoid(&w) - TAU).abs() <= 1e-8);
        prop_assert!(stretch_weighted_z(&x).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn velocity_is_similarity_equivariant(x in perturbed_circle(), (a, b) in affine()) {
        let y = Curve::new(x.grid.clone(), x.x.iter().map(|z| b * z + a).collect(), 0.0).unwrap();
        let u = hookean_rhs(&x).unwrap();
        let v = hookean_rhs(&y).unwrap();
        let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-3) * b.norm();
        for (p, q) in u.iter().zip(&v) {
            prop_assert!((b * p - q).norm() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn checkpoints_round_trip(x in perturbed_circle(), t in 0.0f64..100.0) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let mut x = x;
        x.time = t;
        write_checkpoint(&x, &path).unwrap();
        let y = load_checkpoint(&path).unwrap();
        prop_assert_eq!(y.time, x.time);
        prop_assert_eq!(y.x, x.x);
    }
}
