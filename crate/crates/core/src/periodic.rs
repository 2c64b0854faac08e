//! Periodic-orbit search, hyperbolicity classification and the exponent
//! functionals `χ(p, f)` and `s_n(f)`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Eigenvalues, Mat2, Vec2};
use crate::maps::{cocycle, PhasePoint, PlanarMap};
use crate::report::sig12;

/// Width of the band `||trace| − 2| < PARABOLIC_BAND` reported as parabolic.
pub const PARABOLIC_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Hyperbolic,
    Elliptic,
    Parabolic,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Hyperbolic => "hyperbolic",
            Stability::Elliptic => "elliptic",
            Stability::Parabolic => "parabolic",
        })
    }
}

/// Eigenvalues of `Df^τ` at a periodic point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Multipliers {
    /// `|large| >= |small|`.
    Real { large: f64, small: f64 },
    Complex { re: f64, im: f64 },
}

impl Multipliers {
    pub fn product(&self) -> f64 {
        match *self {
            Multipliers::Real { large, small } => large * small,
            Multipliers::Complex { re, im } => re * re + im * im,
        }
    }

    pub fn max_modulus(&self) -> f64 {
        match *self {
            Multipliers::Real { large, .. } => large.abs(),
            Multipliers::Complex { re, im } => re.hypot(im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub points: Vec<PhasePoint>,
    pub tau: usize,
    pub trace: f64,
    pub multipliers: Multipliers,
    pub stability: Stability,
    /// `(1/τ)·log λ` for hyperbolic orbits.
    pub chi: Option<f64>,
}

impl PeriodicOrbit {
    pub fn is_hyperbolic(&self) -> bool {
        self.stability == Stability::Hyperbolic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_period: usize,
    /// Seeds per axis.
    pub grid: usize,
    /// Newton residual for convergence.
    pub tol: f64,
    pub dedupe_radius: f64,
    pub max_iter: usize,
}

impl SearchConfig {
    pub fn new(max_period: usize) -> Self {
        SearchConfig {
            max_period,
            grid: 64,
            tol: 1e-11,
            dedupe_radius: 1e-6,
            max_iter: 60,
        }
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    pub non_converged: usize,
    pub singular: usize,
    pub domain_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicCatalog {
    pub map: String,
    pub max_period: usize,
    pub orbits: Vec<PeriodicOrbit>,
    pub diagnostics: SearchDiagnostics,
}

impl PeriodicCatalog {
    pub fn point_count(&self) -> usize {
        self.orbits.iter().map(|o| o.tau).sum()
    }

    pub fn hyperbolic(&self) -> impl Iterator<Item = &PeriodicOrbit> {
        self.orbits.iter().filter(|o| o.is_hyperbolic())
    }

    /// Number of orbits with minimal period `tau`.
    pub fn count_with_period(&self, tau: usize) -> usize {
        self.orbits.iter().filter(|o| o.tau == tau).count()
    }

    /// CSV with columns `period,theta_0,z_0,trace,multiplier_max,chi,stability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,theta_0,z_0,trace,multiplier_max,chi,stability\n");
        for o in &self.orbits {
            let p = o.points[0];
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                o.tau,
                sig12(p.0[0]),
                sig12(p.0[1]),
                sig12(o.trace),
                sig12(o.multipliers.max_modulus()),
                o.chi.map(sig12).unwrap_or_default(),
                o.stability
            ));
        }
        out
    }
}

/// Result of `s_n` on a catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExponentBound {
    Value(f64),
    /// The catalog holds no hyperbolic orbit.
    NoHyperbolicOrbit,
}

impl ExponentBound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ExponentBound::Value(v) => Some(v),
            ExponentBound::NoHyperbolicOrbit => None,
        }
    }
}

enum NewtonOutcome {
    Root(PhasePoint),
    NonConverged,
    Singular,
    Domain,
}

/// `fᵐ(x) − x` reduced to the nearest lattice representative, with `Dfᵐ(x)`.
fn defect(map: &dyn PlanarMap, x: PhasePoint, m: usize) -> Result<(Vec2, Mat2)> {
    let topology = map.topology();
    let mut cur = x;
    let mut jac = Mat2::IDENTITY;
    // track the lift so the defect is measured in the universal cover
    let mut shift = [0.0_f64; 2];
    for _ in 0..m {
        let (next, j) = map.lift_with_jacobian(cur)?;
        jac = j * jac;
        let wrapped = topology.wrap(next)?;
        shift[0] += next.0[0] - wrapped.0[0];
        shift[1] += next.0[1] - wrapped.0[1];
        cur = wrapped;
    }
    let mut d = [
        cur.0[0] + shift[0] - x.0[0],
        cur.0[1] + shift[1] - x.0[1],
    ];
    for (c, p) in d.iter_mut().zip(topology.periods()) {
        if let Some(p) = p {
            *c = crate::maps::reduce_symmetric(*c, p);
        }
    }
    Ok((Vec2(d), jac))
}

fn newton(map: &dyn PlanarMap, seed: PhasePoint, m: usize, cfg: &SearchConfig) -> NewtonOutcome {
    let topology = map.topology();
    let mut x = seed;
    for _ in 0..cfg.max_iter {
        let (g, jac) = match defect(map, x, m) {
            Ok(v) => v,
            Err(_) => return NewtonOutcome::Domain,
        };
        if g.max_norm() < cfg.tol {
            return match topology.wrap(x) {
                Ok(p) => NewtonOutcome::Root(p),
                Err(_) => NewtonOutcome::Domain,
            };
        }
        let lhs = jac - Mat2::IDENTITY;
        let Some(step) = lhs.solve(g) else {
            return NewtonOutcome::Singular;
        };
        if !(step.0[0].is_finite() && step.0[1].is_finite()) {
            return NewtonOutcome::Singular;
        }
        let next = PhasePoint([x.0[0] - step.0[0], x.0[1] - step.0[1]]);
        x = match topology.wrap(next) {
            Ok(p) => p,
            Err(_) => return NewtonOutcome::Domain,
        };
    }
    NewtonOutcome::NonConverged
}

fn proper_divisors(m: usize) -> impl Iterator<Item = usize> {
    (1..m).filter(move |d| m % d == 0)
}

/// Minimal period of a root of `fᵐ(x) = x`.
fn minimal_period(map: &dyn PlanarMap, x: PhasePoint, m: usize, radius: f64) -> Result<usize> {
    let topology = map.topology();
    for d in proper_divisors(m) {
        let mut cur = x;
        for _ in 0..d {
            cur = map.forward(cur)?;
        }
        if topology.distance(cur, x) < radius {
            return Ok(d);
        }
    }
    Ok(m)
}

fn lex_less(a: &PhasePoint, b: &PhasePoint) -> std::cmp::Ordering {
    a.0[0]
        .total_cmp(&b.0[0])
        .then(a.0[1].total_cmp(&b.0[1]))
}

/// Newton search for periodic orbits of minimal period `≤ max_period`.
pub fn find_periodic(map: &dyn PlanarMap, cfg: &SearchConfig) -> Result<PeriodicCatalog> {
    if cfg.max_period == 0 {
        return Err(Error::Parameter("period bound must be >= 1".into()));
    }
    if cfg.grid < 2 {
        return Err(Error::Parameter("seed grid must be >= 2 per axis".into()));
    }
    let topology = map.topology();
    let region = map.sample_region();
    let g = cfg.grid;
    let seeds: Vec<PhasePoint> = (0..g * g)
        .map(|k| {
            let (i, j) = (k / g, k % g);
            region.at([(i as f64 + 0.5) / g as f64, (j as f64 + 0.5) / g as f64])
        })
        .collect();

    let mut diagnostics = SearchDiagnostics::default();
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();

    for m in 1..=cfg.max_period {
        let outcomes: Vec<NewtonOutcome> = seeds
            .par_iter()
            .map(|&s| newton(map, s, m, cfg))
            .collect();
        diagnostics.seeds += seeds.len();
        for outcome in outcomes {
            let root = match outcome {
                NewtonOutcome::Root(p) => p,
                NewtonOutcome::NonConverged => {
                    diagnostics.non_converged += 1;
                    continue;
                }
                NewtonOutcome::Singular => {
                    diagnostics.singular += 1;
                    continue;
                }
                NewtonOutcome::Domain => {
                    diagnostics.domain_failures += 1;
                    continue;
                }
            };
            diagnostics.converged += 1;
            let known = orbits.iter().any(|o| {
                o.points
                    .iter()
                    .any(|q| topology.distance(*q, root) < cfg.dedupe_radius)
            });
            if known {
                continue;
            }
            let tau = minimal_period(map, root, m, cfg.dedupe_radius)?;
            let mut points = Vec::with_capacity(tau);
            let mut cur = root;
            for _ in 0..tau {
                points.push(cur);
                cur = map.forward(cur)?;
            }
            // iterates inherit an amplified defect; polish each at period tau
            // and drop orbits that cannot be brought under the tolerance
            let mut polished = true;
            for p in points.iter_mut() {
                match newton(map, *p, tau, cfg) {
                    NewtonOutcome::Root(q) if topology.distance(q, *p) < cfg.dedupe_radius => *p = q,
                    _ => {
                        polished = false;
                        break;
                    }
                }
            }
            if !polished {
                diagnostics.converged -= 1;
                diagnostics.non_converged += 1;
                continue;
            }
            let collapsed = orbits.iter().any(|o| {
                o.points.iter().any(|q| {
                    points
                        .iter()
                        .any(|p| topology.distance(*q, *p) < cfg.dedupe_radius)
                })
            });
            if collapsed {
                continue;
            }
            // start the orbit at its lexicographically smallest point
            let start = points
                .iter()
                .enumerate()
                .min_by(|a, b| lex_less(a.1, b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            points.rotate_left(start);
            let orbit = classify(map, &points, cfg.dedupe_radius)?;
            orbits.push(orbit);
        }
    }
    orbits.sort_by(|a, b| lex_less(&a.points[0], &b.points[0]).then(a.tau.cmp(&b.tau)));
    Ok(PeriodicCatalog {
        map: map.spec(),
        max_period: cfg.max_period,
        orbits,
        diagnostics,
    })
}

/// Classify a periodic orbit given as its consecutive points.
pub fn classify(map: &dyn PlanarMap, points: &[PhasePoint], tol: f64) -> Result<PeriodicOrbit> {
    if points.is_empty() {
        return Err(Error::Contract("empty periodic orbit".into()));
    }
    let topology = map.topology();
    let tau = points.len();
    for (i, p) in points.iter().enumerate() {
        let image = map.forward(*p)?;
        let expected = points[(i + 1) % tau];
        let miss = topology.distance(image, expected);
        if miss > tol {
            return Err(Error::Contract(format!(
                "point {i} of the candidate orbit is not mapped onto its successor (miss {miss:e})"
            )));
        }
    }
    let m = cocycle(map, points[0], tau)?;
    let dense = m.to_matrix();
    let (trace, multipliers) = if m.log_scale == 0.0 {
        let mult = match dense.eigenvalues() {
            Eigenvalues::Real(large, small) => Multipliers::Real { large, small },
            Eigenvalues::Complex { re, im } => Multipliers::Complex { re, im },
        };
        (dense.trace(), mult)
    } else {
        // entries were rescaled: the orbit is strongly hyperbolic
        let large = m.log_spectral_radius().exp() * m.matrix.trace().signum();
        (dense.trace(), Multipliers::Real { large, small: 1.0 / large })
    };
    let stability = stability_from_trace(trace);
    let chi = match stability {
        Stability::Hyperbolic => Some(m.log_spectral_radius() / tau as f64),
        _ => None,
    };
    Ok(PeriodicOrbit {
        points: points.to_vec(),
        tau,
        trace,
        multipliers,
        stability,
        chi,
    })
}

pub fn stability_from_trace(trace: f64) -> Stability {
    let gap = trace.abs() - 2.0;
    if gap.abs() < PARABOLIC_BAND {
        Stability::Parabolic
    } else if gap > 0.0 {
        Stability::Hyperbolic
    } else {
        Stability::Elliptic
    }
}

/// `χ(p, f) = (1/τ)·log λ` for a hyperbolic orbit.
pub fn chi(orbit: &PeriodicOrbit) -> Result<f64> {
    orbit.chi.ok_or_else(|| {
        Error::UndefinedExponent(format!(
            "{} orbit of period {} has no positive exponent",
            orbit.stability, orbit.tau
        ))
    })
}

/// Sum of the positive Lyapunov exponents of a periodic orbit, counted with
/// multiplicity; a planar orbit has at most one.
pub fn sum_positive_exponents(orbit: &PeriodicOrbit) -> Result<f64> {
    chi(orbit)
}

/// `s_n(f) = max χ` over the hyperbolic orbits of the catalog.
pub fn s_n(catalog: &PeriodicCatalog) -> ExponentBound {
    catalog
        .hyperbolic()
        .filter_map(|o| o.chi)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))))
        .map_or(ExponentBound::NoHyperbolicOrbit, ExponentBound::Value)
}

/// Largest `Σχ⁺` over hyperbolic catalog entries.
pub fn max_positive_exponent_sum(catalog: &PeriodicCatalog) -> ExponentBound {
    catalog
        .hyperbolic()
        .filter_map(|o| sum_positive_exponents(o).ok())
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))))
        .map_or(ExponentBound::NoHyperbolicOrbit, ExponentBound::Value)
}

/// Topology-independent check used by tests and reports: every accepted orbit
/// point satisfies `|fᵗ(p) − p| < tol` in the universal cover.
pub fn newton_residual(map: &dyn PlanarMap, orbit: &PeriodicOrbit) -> Result<f64> {
    let mut worst = 0.0_f64;
    for p in &orbit.points {
        let (g, _) = defect(map, *p, orbit.tau)?;
        worst = worst.max(g.max_norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{CatMap, IdentityMap, LinearSaddle, ShearMap, StandardMap};
    use std::f64::consts::PI;

    const CAT_CHI: f64 = 0.962_423_650_119_206_9;

    #[test]
    fn cat_fixed_point_is_origin() {
        let cat = CatMap::arnold();
        let cat_catalog = find_periodic(&cat, &SearchConfig::new(1)).unwrap();
        assert_eq!(cat_catalog.orbits.len(), 1);
        let o = &cat_catalog.orbits[0];
        assert_eq!(o.tau, 1);
        assert!(o.points[0].0[0].abs() < 1e-9 && o.points[0].0[1].abs() < 1e-9);
        assert_eq!(o.stability, Stability::Hyperbolic);
        assert!((o.chi.unwrap() - CAT_CHI).abs() < 1e-12);
    }

    #[test]
    fn cat_period_two() {
        let catalog = find_periodic(&CatMap::arnold(), &SearchConfig::new(2)).unwrap();
        assert_eq!(catalog.count_with_period(1), 1);
        assert_eq!(catalog.count_with_period(2), 2);
        assert_eq!(catalog.point_count(), 5);
    }

    #[test]
    fn standard_map_fixed_points() {
        let map = StandardMap { k: 1.0 };
        let catalog = find_periodic(&map, &SearchConfig::new(1)).unwrap();
        assert_eq!(catalog.orbits.len(), 2);
        let origin = &catalog.orbits[0];
        assert_eq!(origin.stability, Stability::Hyperbolic);
        assert!((origin.trace - 3.0).abs() < 1e-12);
        let center = &catalog.orbits[1];
        assert!((center.points[0].0[0] - PI).abs() < 1e-9);
        assert_eq!(center.stability, Stability::Elliptic);
        assert!((center.trace - 1.0).abs() < 1e-12);
        assert!((s_n(&catalog).value().unwrap() - CAT_CHI).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let cat = CatMap::arnold();
        let o = classify(&cat, &[PhasePoint::new(0.0, 0.0)], 1e-12).unwrap();
        match o.multipliers {
            Multipliers::Real { large, small } => {
                assert!((large - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
                assert!((small - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        let e = classify(&StandardMap { k: 1.0 }, &[PhasePoint::new(PI, 0.0)], 1e-12).unwrap();
        assert_eq!(e.stability, Stability::Elliptic);
        let p = classify(&ShearMap, &[PhasePoint::new(0.0, 0.0)], 1e-12).unwrap();
        assert_eq!(p.stability, Stability::Parabolic);
        assert!(classify(&cat, &[PhasePoint::new(0.1, 0.3)], 1e-9).is_err());
    }

    #[test]
    fn chi_examples() {
        let saddle = LinearSaddle { lambda: 2.0 };
        let o = classify(&saddle, &[PhasePoint::new(0.0, 0.0)], 1e-12).unwrap();
        assert!((chi(&o).unwrap() - 2f64.ln()).abs() < 1e-15);
        let o3 = classify(&LinearSaddle { lambda: 3.0 }, &[PhasePoint::new(0.0, 0.0)], 1e-12).unwrap();
        assert!((sum_positive_exponents(&o3).unwrap() - 3f64.ln()).abs() < 1e-15);
        let e = classify(&StandardMap { k: 1.0 }, &[PhasePoint::new(PI, 0.0)], 1e-12).unwrap();
        assert!(matches!(chi(&e), Err(Error::UndefinedExponent(_))));
        assert!(sum_positive_exponents(&e).is_err());
    }

    #[test]
    fn elliptic_only_catalog_gives_marker() {
        // every point of the identity is fixed; Newton's matrix is singular
        let catalog = find_periodic(&IdentityMap::unit_torus(), &SearchConfig::new(1).with_grid(4)).unwrap();
        assert_eq!(s_n(&catalog), ExponentBound::NoHyperbolicOrbit);
        let catalog = PeriodicCatalog {
            map: "standard:k=1".into(),
            max_period: 1,
            orbits: vec![classify(&StandardMap { k: 1.0 }, &[PhasePoint::new(PI, 0.0)], 1e-12).unwrap()],
            diagnostics: SearchDiagnostics::default(),
        };
        assert_eq!(s_n(&catalog), ExponentBound::NoHyperbolicOrbit);
    }

    #[test]
    fn rejects_bad_config() {
        let cat = CatMap::arnold();
        assert!(find_periodic(&cat, &SearchConfig::new(0)).is_err());
        assert!(find_periodic(&cat, &SearchConfig::new(1).with_grid(1)).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let catalog = find_periodic(&CatMap::arnold(), &SearchConfig::new(2)).unwrap();
        let csv = catalog.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "period,theta_0,z_0,trace,multiplier_max,chi,stability");
        assert_eq!(lines.len(), 1 + catalog.orbits.len());
        assert!(lines[1].ends_with(",hyperbolic"));
    }
}
