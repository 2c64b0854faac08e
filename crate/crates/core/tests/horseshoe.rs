use std::f64::consts::{FRAC_1_SQRT_2, PI};

use approx::assert_relative_eq;
use proptest::prelude::*;
use symplab::horseshoe::*;
use symplab::linalg::{Mat2, Vec2};
use symplab::maps::{cocycle, PhasePoint, PlanarMap};

fn model(n: u128) -> SnakeModel {
    build_snake(2.0, 0.1, 0.05, n).unwrap()
}

/// Sign changes of `cos(πN(x − x_q)/(2a))` over `x − x_q ∈ [−a, a)` on a fine grid.
fn brute_force_crossings(n: u128) -> u128 {
    let steps = 200 * n as usize + 1;
    let mut count = 0;
    let f = |w: f64| (PI * n as f64 * w / 0.2).cos();
    let mut prev = f(-0.1);
    if prev.abs() < 1e-12 {
        count += 1;
        prev = f(-0.1 + 1e-9);
    }
    for i in 1..steps {
        let w = -0.1 + 0.2 * i as f64 / steps as f64;
        let v = f(w);
        if v * prev < 0.0 {
            count += 1;
        }
        prev = v;
    }
    count
}

#[test]
fn leg_count_matches_root_enumeration() {
    for n in 2..=64u128 {
        // closed-form roots: odd multiples of π/2 in [−Nπ/2, Nπ/2)
        let closed = (-(n as i64) - 1..n as i64)
            .filter(|m| m % 2 != 0)
            .filter(|&m| {
                let psi = m as f64 / 2.0;
                psi >= -(n as f64) / 2.0 && psi < n as f64 / 2.0
            })
            .count() as u128;
        let counted = count_legs(&model(n)).unwrap();
        assert_eq!(counted, n);
        assert_eq!(closed, n);
        assert_eq!(brute_force_crossings(n), n, "grid count for N={n}");
    }
}

#[test]
fn leg_count_far_beyond_float_phase() {
    assert_eq!(count_legs(&model(1 << 100)).unwrap(), 1 << 100);
    assert_eq!(count_legs(&model((1 << 100) + 1)).unwrap(), (1 << 100) + 1);
}

#[test]
fn snake_slope_is_the_perturbation_budget() {
    for n in [2u128, 5, 64, 1 << 90] {
        assert_relative_eq!(model(n).snake_slope(), 0.05, max_relative = 1e-14);
    }
    // grid maximization of |d/dx A cos(πN(x − x_q)/(2a))|
    let m = model(12);
    let x_q = m.tangency_point().x();
    let grid = (0..=100_000)
        .map(|i| {
            let x = x_q - 0.2 + 0.4 * i as f64 / 100_000.0;
            (m.amplitude() * PI * 12.0 / 0.2 * (PI * 12.0 * (x - x_q) / 0.2).sin()).abs()
        })
        .fold(0.0, f64::max);
    assert_relative_eq!(grid, 0.05, max_relative = 1e-6);
    assert!(theta_c1_distance(&m, 100_000) <= 0.05 + 1e-15);
}

/// Depth by the closed form `k = ⌈log_λ(2·max(y₂, x_max/s)/A)⌉`.
fn depth_oracle(m: &SnakeModel) -> u32 {
    let [_, y2] = m.unstable_window();
    let [_, x_hi] = m.stable_side();
    let reach = y2.max(x_hi / m.reinjection_scale());
    (2.0 * reach / m.amplitude()).log(m.lambda()).ceil() as u32
}

#[test]
fn return_time_matches_closed_form_and_grows_with_n() {
    let mut prev = None;
    for e in 2..=20 {
        let m = model(1 << e);
        let rt = return_time(&m).unwrap();
        assert_eq!(rt.depth, depth_oracle(&m), "N = 2^{e}");
        assert_eq!(rt.t, rt.depth + TRANSIT_TIME);
        if let Some(p) = prev {
            assert_eq!(rt.t, p + 1, "doubling N adds one step at λ = 2");
        }
        prev = Some(rt.t);
    }
}

#[test]
fn k1_constant_across_small_sweep() {
    let k1: Vec<f64> = [4u128, 8, 16, 32, 64]
        .iter()
        .map(|&n| return_time(&model(n)).unwrap().k1)
        .collect();
    let hi = k1.iter().copied().fold(f64::MIN, f64::max);
    let lo = k1.iter().copied().fold(f64::MAX, f64::min);
    assert!(hi / lo < 2.0);
    for (n, k) in [4u128, 8, 16, 32, 64].iter().zip(&k1) {
        let rt = return_time(&model(*n)).unwrap();
        assert!(model(*n).amplitude() <= k * 2f64.powi(-(rt.t as i32)) * (1.0 + 1e-15));
    }
}

#[test]
fn certified_entropy_is_log_n_over_t() {
    for n in [2u128, 3, 4, 7, 64, 1 << 84] {
        let m = model(n);
        let c = code_horseshoe(&m).unwrap();
        assert!(c.is_full_shift(), "N = {n}");
        assert_eq!(c.entropy, (n as f64).ln() / c.return_time as f64);
        assert!(c.certificates.iter().all(|l| l.certified()));
    }
}

#[test]
fn two_legs_give_the_two_by_two_matrix() {
    let m = model(2);
    let c = code_horseshoe(&m).unwrap();
    assert!(c.is_full_shift());
    assert_relative_eq!(spectral_radius(&[vec![1, 1], vec![1, 1]]), 2.0);
    assert_eq!(c.entropy, 2f64.ln() / c.return_time as f64);
}

#[test]
fn planted_shallow_depth_reports_partial_matrix() {
    let m = model(6);
    let c = code_horseshoe_with_depth(&m, 4).unwrap();
    match &c.transitions {
        Transitions::Partial {
            matrix: Some(mat),
            spectral_radius,
            ..
        } => {
            assert_eq!(mat.len(), 6);
            assert_eq!(*spectral_radius, 0.0);
        }
        other => panic!("expected a partial matrix, got {other:?}"),
    }
}

/// Iterates the model itself for `steps` steps.
fn simulate(m: &SnakeModel, z: PhasePoint, steps: usize) -> Vec<PhasePoint> {
    let mut out = vec![z];
    let mut p = z;
    for _ in 0..steps {
        p = m.lift(p).unwrap();
        out.push(p);
    }
    out
}

#[test]
fn coded_orbits_are_periodic_under_the_model() {
    for n in [4u128, 16] {
        let m = model(n);
        let c = code_horseshoe(&m).unwrap();
        for word in enumerate_words(n, 2) {
            let o = solve_coded_orbit(&m, &c, &word).unwrap();
            let period = c.return_time as usize * word.len();
            let path = simulate(&m, o.points[0], period);
            let end = path[period];
            // cancellation in the snake step, amplified by the period multiplier
            let tol = 1e-12 * (o.chi * period as f64).exp();
            let dx = (end.x() - o.points[0].x()).abs();
            let dy = (end.y() - o.points[0].y()).abs() / o.points[0].y().abs();
            assert!(dx < tol && dy < tol, "{word:?}: mismatch {dx:e}, {dy:e} vs {tol:e}");
            // closed-form segment agrees with direct simulation
            let seg = coded_orbit_segment(&m, &c, &o);
            assert_eq!(seg.len(), period);
            for (a, b) in seg.points.iter().zip(&path) {
                assert!((a.x() - b.x()).abs() < 1e-9 && (a.y() - b.y()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn coded_exponent_matches_direct_cocycle() {
    let m = model(16);
    let c = code_horseshoe(&m).unwrap();
    for word in [vec![1u128], vec![0, 15], vec![3, 8, 8]] {
        let o = solve_coded_orbit(&m, &c, &word).unwrap();
        let period = c.return_time as usize * word.len();
        let direct = cocycle(&m, o.points[0], period).unwrap().log_spectral_radius() / period as f64;
        assert_relative_eq!(o.chi, direct, max_relative = 1e-9);
    }
}

#[test]
fn fixed_leg_exponent_is_the_coded_expansion() {
    let m = model(1 << 20);
    let c = code_horseshoe(&m).unwrap();
    let o = solve_coded_orbit(&m, &c, &[1]).unwrap();
    let k = c.depth as i32;
    let mult = 0.05 * m.reinjection_scale() * 2f64.powi(k) * o.phases[0].sin();
    // eigenvalue of [[0, −s], [1/s, M]] with trace M and determinant 1
    let big = (mult.abs() + (mult * mult - 4.0).sqrt()) / 2.0;
    assert_relative_eq!(o.chi, big.ln() / c.return_time as f64, max_relative = 1e-12);
    assert!((o.chi - m.chi_p()).abs() < 1.0 / 10.0 + 0.1);
}

#[test]
fn exponent_floor_at_two_symbols() {
    let m = model(1 << 50);
    let c = code_horseshoe(&m).unwrap();
    let r = periodic_exponent_floor(&c, &m, 10).unwrap();
    assert!(r.passed, "violations {}", r.violations);
    assert!(r.min_chi.unwrap() > 2f64.ln() - 0.1);
    assert!(r.orbits.iter().all(|o| o.cone_floor < o.chi));
    let small = model(4);
    let rs = periodic_exponent_floor(&code_horseshoe(&small).unwrap(), &small, 10).unwrap();
    assert_eq!(rs.orbits.len(), 4 + 6 + 20 + 60);
    assert!(rs.failures.is_empty());
}

#[test]
fn failed_coding_enumerates_nothing() {
    let m = model(4);
    let c = code_horseshoe_with_depth(&m, 2).unwrap();
    let r = periodic_exponent_floor(&c, &m, 10).unwrap();
    assert!(r.orbits.is_empty() && !r.passed);
}

#[test]
fn visit_frequency_rises_with_n() {
    let p = PhasePoint::new(0.0, 0.0);
    let mut prev = 0.0;
    for e in [4u32, 12, 24, 48] {
        let m = model(1 << e);
        let c = code_horseshoe(&m).unwrap();
        let o = solve_coded_orbit(&m, &c, &[1]).unwrap();
        let seg = coded_orbit_segment(&m, &c, &o);
        let f = visit_frequency(&seg, p, 0.1).unwrap();
        // direct count oracle
        let direct = seg.points.iter().filter(|q| q.x().hypot(q.y()) < 0.1).count() as f64
            / seg.len() as f64;
        assert_eq!(f, direct);
        assert!(f > prev);
        prev = f;
    }
    assert!(prev > 0.8);
}

#[test]
fn visit_frequency_on_simulated_orbit() {
    let m = model(8);
    let c = code_horseshoe(&m).unwrap();
    let o = solve_coded_orbit(&m, &c, &[0, 7]).unwrap();
    let period = 2 * c.return_time as usize;
    let mut path = simulate(&m, o.points[0], period);
    path.pop();
    let seg = symplab::maps::OrbitSegment {
        points: path,
        map: m.spec(),
        topology: m.topology(),
    };
    let analytic = coded_orbit_segment(&m, &c, &o);
    let z = PhasePoint::new(0.0, 0.0);
    assert_eq!(
        visit_frequency(&seg, z, 0.05).unwrap(),
        visit_frequency(&analytic, z, 0.05).unwrap()
    );
}

#[test]
fn expansion_estimate_for_diagonal_vector() {
    let m = model(4);
    let v = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    let z = PhasePoint::new(0.4, 1e-3);
    // direct matrix-vector oracle
    let direct = Mat2::diag(2f64.powi(-5), 32.0).apply(v).norm();
    match verify_expansion(&m, 5, v, z).unwrap() {
        ExpansionReport::Checked { lhs, rhs, margin, holds, .. } => {
            assert_relative_eq!(lhs, direct, max_relative = 1e-15);
            assert_relative_eq!(rhs, K6 * 32.0, max_relative = 1e-15);
            assert!(margin > 0.0 && holds);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn expansion_requires_orbit_in_box() {
    let m = model(4);
    let r = verify_expansion(&m, 5, Vec2::new(0.0, 1.0), PhasePoint::new(0.4, 0.5));
    assert!(r.is_err());
}

#[test]
fn angle_agrees_with_arccos_formula() {
    let oracle = |v: Vec2, w: Vec2| (v.dot(&w) / (v.norm() * w.norm())).acos().tan().abs();
    for (v, w) in [
        (Vec2::new(1.0, 2.0), Vec2::new(3.0, -1.0)),
        (Vec2::new(0.3, 0.1), Vec2::new(1.0, 0.0)),
        (Vec2::new(-2.0, 5.0), Vec2::new(1.0, 1.0)),
    ] {
        assert_relative_eq!(angle(v, w).unwrap(), oracle(v, w), max_relative = 1e-12);
    }
}

#[test]
fn sweep_entropy_increases_toward_log_lambda() {
    let cfg = SweepConfig {
        legs: (2..=30).map(|e| 1u128 << e).collect(),
        ..SweepConfig::standard()
    };
    let r = snake_sweep(&cfg).unwrap();
    for w in r.rows.windows(2) {
        assert!(w[1].coded_entropy > w[0].coded_entropy);
        assert!(w[1].coded_entropy < 2f64.ln());
    }
    assert!(r.n1.is_none(), "entropy floor is out of reach below 2^30");
    assert!(r.k1_spread() < 2.0);
}

fn model_points(m: &SnakeModel) -> impl Strategy<Value = PhasePoint> {
    let w = m.box_half_width();
    let e = w / m.lambda();
    prop_oneof![
        (-w..w, -1.0..1.0f64).prop_map(|(x, y)| PhasePoint::new(x, y)),
        (-e..e, 1.0001..2.0f64, 0..3usize)
            .prop_map(|(x, y, b)| PhasePoint::new(x + 10.0 * b as f64, y)),
    ]
}

proptest! {
    #[test]
    fn every_piece_preserves_area(n in 2u128..200, p in model_points(&model(4))) {
        let m = model(n);
        let det = m.jacobian(p).unwrap().det();
        prop_assert!((det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coded_entropy_dominated_by_saddle(e in 1u32..120) {
        let m = model(1u128 << e);
        let c = code_horseshoe(&m).unwrap();
        prop_assert!(c.is_full_shift());
        prop_assert!(c.entropy < m.chi_p());
    }

    #[test]
    fn leg_count_equals_n(n in 2u128..100_000) {
        prop_assert_eq!(count_legs(&model(n)).unwrap(), n);
    }
}
