use proptest::prelude::*;
use symplab::entropy::shift_entropy;
use symplab::maps::{orbit, CatMap};
use symplab::measures::{
    empirical_measure, periodic_measure, shift_metric_entropy, weak_star_distance, AtomicMeasure, ShiftMeasure,
    TestFunctionFamily,
};
use symplab::periodic::{find_periodic, SearchConfig};
use symplab::{PhasePoint, PhaseTopology, PlanarMap};

const TORUS: PhaseTopology = PhaseTopology::UNIT_TORUS;

/// 1-based positions of `(i, j) ∈ {0..=order}²` ordered by shell `max(i, j)`,
/// then `i`, then `j`.
fn shell_index(order: usize, i: usize, j: usize) -> usize {
    let mut k = 0;
    for shell in 0..=order {
        for a in 0..=shell {
            for b in 0..=shell {
                if a.max(b) != shell {
                    continue;
                }
                k += 1;
                if (a, b) == (i, j) {
                    return k;
                }
            }
        }
    }
    unreachable!()
}

#[test]
fn half_shift_distance_by_direct_summation() {
    // along y = 0 only cosines survive; at x = 1/2 the cosine of frequency f is (−1)^f,
    // so the moments differ by 2 exactly for cos(2πx) and cos(6πx)
    let mut expected = 0.0;
    for i in [1usize, 5] {
        for j in [0usize, 1, 3, 5, 7] {
            expected += 2.0 * 0.5f64.powi(shell_index(8, i, j) as i32);
        }
    }
    let fam = TestFunctionFamily::standard(TORUS);
    let a = AtomicMeasure::dirac(PhasePoint::new(0.0, 0.0), TORUS).unwrap();
    let b = AtomicMeasure::dirac(PhasePoint::new(0.5, 0.0), TORUS).unwrap();
    let rho = weak_star_distance(&a, &b, &fam).unwrap();
    assert!(rho > 0.0);
    assert!((rho - expected).abs() < 1e-14, "rho {rho}, oracle {expected}");
    assert_eq!(rho, weak_star_distance(&b, &a, &fam).unwrap());
}

#[test]
fn periodic_measure_is_invariant() {
    let cat = CatMap::arnold();
    let c = find_periodic(&cat, &SearchConfig::new(3)).unwrap();
    let o = c.orbits.iter().find(|o| o.tau == 3).expect("period-3 orbit");
    let mu = periodic_measure(o, TORUS).unwrap();
    assert_eq!(mu.atoms().len(), 3);
    assert!(mu.weights().iter().all(|&w| w == 1.0 / 3.0));
    let pushed = mu.pushforward(&cat).unwrap();
    for a in pushed.atoms() {
        let d = mu.atoms().iter().map(|b| TORUS.distance(*a, *b)).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9);
    }
    let fam = TestFunctionFamily::standard(TORUS);
    assert!(weak_star_distance(&mu, &pushed, &fam).unwrap() < 1e-8);
}

#[test]
fn generic_cat_segment_equidistributes() {
    let seg = orbit(&CatMap::arnold(), PhasePoint::new(0.123_456_7, 0.314_159_2), 999).unwrap();
    assert_eq!(seg.points.len(), 1000);
    let mu = empirical_measure(&seg).unwrap();
    let mean_theta = mu.integrate(|p| p.0[0]);
    assert!((mean_theta - 0.5).abs() < 0.05, "mean {mean_theta}");
}

#[test]
fn segments_converge_to_periodic_measure() {
    let cat = CatMap::arnold();
    let fam = TestFunctionFamily::standard(TORUS);
    let c = find_periodic(&cat, &SearchConfig::new(3)).unwrap();
    for tau in 1..=3 {
        let o = c.orbits.iter().find(|o| o.tau == tau).unwrap();
        let mu_p = periodic_measure(o, TORUS).unwrap();
        // iterate on the stored cycle: forward iteration of a hyperbolic orbit drifts off it
        let seg: Vec<PhasePoint> = (0..300).map(|i| o.points[i % tau]).collect();
        let mut worst_c = 0.0_f64;
        for n in 1..=300 {
            let mu = AtomicMeasure::uniform(&seg[..n], TORUS).unwrap();
            let rho = weak_star_distance(&mu, &mu_p, &fam).unwrap();
            if n % tau == 0 {
                assert!(rho < 1e-8, "tau={tau} n={n}: {rho}");
            }
            worst_c = worst_c.max(rho * n as f64);
        }
        // each moment differs by at most 2·(τ − 1)/n and the weights sum below 1
        assert!(worst_c <= 2.0 * (tau as f64 - 1.0) + 1e-8, "tau={tau}: C = {worst_c}");
    }
}

#[test]
fn uniform_shift_measure_matches_shift_entropy() {
    let u = ShiftMeasure::uniform(4).unwrap();
    let h = shift_metric_entropy(&u, 12).unwrap();
    assert!((h - shift_entropy(4, 12).unwrap()).abs() < 1e-15);
    assert!((h - 0.115_524_53).abs() < 1e-8);
}

fn measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.1..1.0f64), 1..5).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.2).sum();
        let points: Vec<PhasePoint> = atoms.iter().map(|a| PhasePoint::new(a.0, a.1)).collect();
        let mut weights: Vec<f64> = atoms.iter().map(|a| a.2 / total).collect();
        let rest: f64 = weights[1..].iter().sum();
        weights[0] = 1.0 - rest;
        AtomicMeasure::new(points, weights, TORUS).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rho_triangle_inequality(a in measure(), b in measure(), c in measure()) {
        let fam = TestFunctionFamily::standard(TORUS);
        let ab = weak_star_distance(&a, &b, &fam).unwrap();
        let bc = weak_star_distance(&b, &c, &fam).unwrap();
        let ac = weak_star_distance(&a, &c, &fam).unwrap();
        prop_assert!(ac <= ab + bc + 1e-15);
        prop_assert_eq!(ab, weak_star_distance(&b, &a, &fam).unwrap());
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn pushforward_preserves_mass(a in measure()) {
        let pushed = a.pushforward(&CatMap::arnold()).unwrap();
        let total: f64 = pushed.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(pushed.topology(), CatMap::arnold().topology());
    }
}
