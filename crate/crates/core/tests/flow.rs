use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symplab::flow::{bump, field, gradient, hamiltonian, integrate, time_t_map, SpherePendulum};
use symplab::linalg::{Eigenvalues, Mat2};
use symplab::{PhasePoint, PlanarMap};

fn seeded_points(count: usize, seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| PhasePoint::new(rng.gen_range(0.0..2.0 * PI), rng.gen_range(-0.95..0.95)))
        .collect()
}

/// Taylor series with scaling and squaring.
fn expm(m: Mat2) -> Mat2 {
    let mut s = 0;
    let mut a = m;
    while a.max_abs() > 0.1 {
        a = a.scale(0.5);
        s += 1;
    }
    let mut term = Mat2::IDENTITY;
    let mut sum = Mat2::IDENTITY;
    for k in 1..25 {
        term = (term * a).scale(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

fn real_eigs(m: Mat2) -> (f64, f64) {
    match m.eigenvalues() {
        Eigenvalues::Real(a, b) => (a, b),
        other => panic!("complex eigenvalues {other:?}"),
    }
}

#[test]
fn bump_matches_high_precision_value() {
    // S(0.7) = 1 / (1 + exp(1/0.7 - 1/0.3)), evaluated with 40 decimal digits
    assert!((bump(0.55).unwrap() - 0.870_429_530_600_294_08).abs() < 1e-15);
    assert_eq!(bump(0.0).unwrap(), 1.0);
    assert_eq!(bump(0.9).unwrap(), 0.0);
    let mid = bump(7.0 / 12.0).unwrap();
    assert!(mid > 0.0 && mid < 1.0);
    assert!((mid - 0.5).abs() < 1e-15);
    assert!(bump(-0.1).is_err());
}

#[test]
fn hamiltonian_and_field_examples() {
    for &th in &[0.0, 1.0, PI, 4.0] {
        assert!((hamiltonian(th, 0.0).unwrap() + f64::cos(th)).abs() < 1e-15);
        assert_eq!(hamiltonian(th, 0.9).unwrap(), 0.9);
        assert_eq!(field(th, 0.9).unwrap(), [1.0, 0.0]);
    }
    assert_eq!(gradient(PI, 0.0).unwrap()[1], 0.0);
    assert!(gradient(PI, 0.0).unwrap()[0].abs() < 1e-15);
    let f = field(PI, 0.0).unwrap();
    assert!(f[0] == 0.0 && f[1].abs() < 1e-15);
    let f = field(0.0, 0.25).unwrap();
    assert!((f[0] - 0.25).abs() < 1e-15 && f[1] == 0.0);
    assert!(hamiltonian(0.0, 1.0).is_err());
    assert!(field(0.0, -1.5).is_err());
}

#[test]
fn gradient_matches_finite_differences() {
    let h = 1e-6;
    for p in seeded_points(200, 3) {
        let (th, z) = (p.0[0], p.0[1]);
        let g = gradient(th, z).unwrap();
        let d_th = (hamiltonian(th + h, z).unwrap() - hamiltonian(th - h, z).unwrap()) / (2.0 * h);
        let d_z = (hamiltonian(th, z + h).unwrap() - hamiltonian(th, z - h).unwrap()) / (2.0 * h);
        assert!((g[0] - d_th).abs() < 1e-6, "dH/dtheta at {p}");
        assert!((g[1] - d_z).abs() < 1e-6, "dH/dz at {p}");
    }
}

#[test]
fn field_is_symplectic_gradient() {
    // omega(X, v) = X_theta v_z - X_z v_theta must equal dH(v) for all v
    for p in seeded_points(200, 4) {
        let x = field(p.0[0], p.0[1]).unwrap();
        let g = gradient(p.0[0], p.0[1]).unwrap();
        for v in [[1.0, 0.0], [0.0, 1.0], [0.3, -0.7]] {
            let omega = x[0] * v[1] - x[1] * v[0];
            let dh = g[0] * v[0] + g[1] * v[1];
            assert!((omega - dh).abs() < 1e-8);
        }
    }
}

#[test]
fn energy_is_conserved_to_time_fifty() {
    let steps = (50.0 / SpherePendulum::DEFAULT_STEP) as usize;
    let mut worst = 0.0_f64;
    for p in seeded_points(100, 11) {
        let (y, _) = integrate(p, 50.0, steps, false).unwrap();
        let drift = (hamiltonian(y.0[0], y.0[1]).unwrap() - hamiltonian(p.0[0], p.0[1]).unwrap()).abs();
        worst = worst.max(drift);
    }
    assert!(worst < 1e-8, "energy drift {worst}");
}

#[test]
fn time_map_is_symplectic() {
    let map = time_t_map(1.0, 1e-3).unwrap();
    for p in seeded_points(50, 12) {
        let det = map.jacobian(p).unwrap().det();
        assert!((det - 1.0).abs() < 1e-7, "det {det} at {p}");
    }
}

#[test]
fn flow_property() {
    for p in seeded_points(10, 13) {
        for &(s, t) in &[(0.5, 1.0), (1.0, 2.0), (2.0, 0.5), (1.0, 1.0)] {
            let h = 1e-3;
            let steps = |t: f64| (t / h).round() as usize;
            let (a, _) = integrate(p, s + t, steps(s + t), false).unwrap();
            let (mid, _) = integrate(p, t, steps(t), false).unwrap();
            let (b, _) = integrate(mid, s, steps(s), false).unwrap();
            assert!((a.0[0] - b.0[0]).abs() < 1e-7 && (a.0[1] - b.0[1]).abs() < 1e-7);
        }
    }
}

#[test]
fn integrating_back_returns_to_start() {
    for p in seeded_points(20, 14) {
        let (y, _) = integrate(p, 3.0, 3000, false).unwrap();
        let (back, _) = integrate(y, -3.0, 3000, false).unwrap();
        assert!((back.0[0] - p.0[0]).abs() < 1e-8 && (back.0[1] - p.0[1]).abs() < 1e-8);
    }
}

#[test]
fn rotation_region_and_saddle() {
    let map = time_t_map(1.0, 1e-3).unwrap();
    let y = map.forward(PhasePoint::new(0.5, 0.8)).unwrap();
    assert!((y.0[0] - 1.5).abs() < 1e-15 && y.0[1] == 0.8);
    let y = map.forward(SpherePendulum::SADDLE).unwrap();
    assert!((y.0[0] - PI).abs() < 1e-14 && y.0[1].abs() < 1e-14);
}

#[test]
fn saddle_multipliers_match_matrix_exponential() {
    // linearization of the pendulum at the top: (d theta, dz)' = (dz, d theta)
    let oracle = real_eigs(expm(Mat2::new(0.0, 1.0, 1.0, 0.0)));
    assert!((oracle.0 - std::f64::consts::E).abs() < 1e-13);
    let map = time_t_map(1.0, 1e-3).unwrap();
    let got = real_eigs(map.jacobian(SpherePendulum::SADDLE).unwrap());
    assert!((got.0 - oracle.0).abs() < 1e-4);
    assert!((got.1 - oracle.1).abs() < 1e-4);
}

#[test]
fn bad_time_or_step_rejected() {
    assert!(time_t_map(0.0, 1e-3).is_err());
    assert!(time_t_map(1.0, 0.0).is_err());
    assert!(time_t_map(1.0, 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pure_regions(th in 0.0..(2.0 * PI), z in 0.0..0.5f64, w in 0.667..0.999f64) {
        prop_assert!((hamiltonian(th, z).unwrap() - (0.5 * z * z - th.cos())).abs() < 1e-15);
        prop_assert_eq!(hamiltonian(th, w).unwrap(), w);
        prop_assert_eq!(hamiltonian(th, -w).unwrap(), -w);
    }

    #[test]
    fn bump_is_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(bump(lo).unwrap() >= bump(hi).unwrap());
    }
}
