//! Phase-space geometry and area-preserving planar maps with analytic Jacobians.

mod spec;
mod zoo;

use std::f64::consts::TAU;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, ScaledMat2};

pub use spec::{build_map, parse_map_spec, MapSpec, ZOO_NAMES};
pub use zoo::{CatMap, IdentityMap, LinearSaddle, RotationMap, ShearMap, SqueezeMap, StandardMap};

/// A point of a two-dimensional phase space, `(angle-like, momentum-like)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint(pub [f64; 2]);

impl PhasePoint {
    pub const fn new(a: f64, b: f64) -> Self {
        PhasePoint([a, b])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0[0], self.0[1])
    }
}

/// Declared topology of a phase space.
///
/// Periodic coordinates are identified modulo `period`; the distance is the
/// Euclidean length of the shortest lift of the difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseTopology {
    /// Both coordinates periodic with the same period (1 or 2π in the zoo).
    Torus2 { period: f64 },
    /// Angle modulo `period` times the real line.
    Cylinder { period: f64 },
    /// Cylindrical chart of the sphere away from its poles: `θ mod 2π`, `z ∈ (−1, 1)`.
    SphereChart,
    /// Euclidean plane; used by the local horseshoe model.
    Plane,
}

impl PhaseTopology {
    pub const UNIT_TORUS: PhaseTopology = PhaseTopology::Torus2 { period: 1.0 };
    pub const ANGLE_TORUS: PhaseTopology = PhaseTopology::Torus2 { period: TAU };

    /// Period of each coordinate, `None` for a line coordinate.
    pub fn periods(&self) -> [Option<f64>; 2] {
        match *self {
            PhaseTopology::Torus2 { period } => [Some(period), Some(period)],
            PhaseTopology::Cylinder { period } => [Some(period), None],
            PhaseTopology::SphereChart => [Some(TAU), None],
            PhaseTopology::Plane => [None, None],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseTopology::Torus2 { .. } => "torus2",
            PhaseTopology::Cylinder { .. } => "cylinder",
            PhaseTopology::SphereChart => "sphere_chart",
            PhaseTopology::Plane => "plane",
        }
    }

    pub fn validate(&self, x: PhasePoint) -> Result<()> {
        if !(x.0[0].is_finite() && x.0[1].is_finite()) {
            return Err(Error::Domain(format!("non-finite point {x}")));
        }
        if let PhaseTopology::SphereChart = self {
            if x.0[1].abs() >= 1.0 {
                return Err(Error::Domain(format!(
                    "z = {} outside the sphere chart (-1, 1)",
                    x.0[1]
                )));
            }
        }
        Ok(())
    }

    /// Reduce periodic coordinates into the fundamental domain `[0, period)`.
    pub fn wrap(&self, x: PhasePoint) -> Result<PhasePoint> {
        self.validate(x)?;
        let mut out = x.0;
        for (c, p) in out.iter_mut().zip(self.periods()) {
            if let Some(p) = p {
                *c = wrap_coord(*c, p);
            }
        }
        Ok(PhasePoint(out))
    }

    /// Shortest lifted difference `b − a`.
    pub fn displacement(&self, a: PhasePoint, b: PhasePoint) -> [f64; 2] {
        let mut d = [b.0[0] - a.0[0], b.0[1] - a.0[1]];
        for (c, p) in d.iter_mut().zip(self.periods()) {
            if let Some(p) = p {
                *c = reduce_symmetric(*c, p);
            }
        }
        d
    }

    pub fn distance(&self, a: PhasePoint, b: PhasePoint) -> f64 {
        let d = self.displacement(a, b);
        d[0].hypot(d[1])
    }
}

/// Representative of `v mod p` in `[0, p)`.
pub fn wrap_coord(v: f64, p: f64) -> f64 {
    let r = v.rem_euclid(p);
    // rem_euclid may round up to p for tiny negative inputs
    if r >= p {
        0.0
    } else {
        r
    }
}

/// Representative of `v mod p` in `[−p/2, p/2]`.
pub fn reduce_symmetric(v: f64, p: f64) -> f64 {
    v - p * (v / p).round()
}

/// Axis-aligned rectangle used for sampling initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Rect { lo, hi }
    }

    /// Affine image of a point of the unit square.
    pub fn at(&self, u: [f64; 2]) -> PhasePoint {
        PhasePoint([
            self.lo[0] + u[0] * (self.hi[0] - self.lo[0]),
            self.lo[1] + u[1] * (self.hi[1] - self.lo[1]),
        ])
    }

    pub fn contains(&self, x: PhasePoint) -> bool {
        (0..2).all(|i| x.0[i] >= self.lo[i] && x.0[i] <= self.hi[i])
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }
}

/// A differentiable area-preserving map of a planar phase space.
///
/// `lift` returns the image in the universal cover (periodic coordinates not
/// reduced); `forward` wraps it into the fundamental domain.
pub trait PlanarMap: Send + Sync {
    fn name(&self) -> &str;

    fn topology(&self) -> PhaseTopology;

    fn parameters(&self) -> Vec<(String, f64)>;

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint>;

    fn jacobian(&self, x: PhasePoint) -> Result<Mat2>;

    /// Lifted image and Jacobian together; maps whose two evaluations share
    /// work (time-t flow maps) override this.
    fn lift_with_jacobian(&self, x: PhasePoint) -> Result<(PhasePoint, Mat2)> {
        Ok((self.lift(x)?, self.jacobian(x)?))
    }

    fn forward(&self, x: PhasePoint) -> Result<PhasePoint> {
        self.topology().validate(x)?;
        let y = self.lift(x)?;
        self.topology().wrap(y)
    }

    /// Region from which initial conditions are drawn.
    fn sample_region(&self) -> Rect {
        default_region(self.topology())
    }

    /// Canonical `name:key=value,...` string.
    fn spec(&self) -> String {
        let params = self
            .parameters()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",");
        if params.is_empty() {
            self.name().to_string()
        } else {
            format!("{}:{}", self.name(), params)
        }
    }
}

pub fn default_region(topology: PhaseTopology) -> Rect {
    match topology {
        PhaseTopology::Torus2 { period } => Rect::new([0.0, 0.0], [period, period]),
        PhaseTopology::Cylinder { period } => Rect::new([0.0, -1.0], [period, 1.0]),
        PhaseTopology::SphereChart => Rect::new([0.0, -0.999], [TAU, 0.999]),
        PhaseTopology::Plane => Rect::new([-1.0, -1.0], [1.0, 1.0]),
    }
}

/// Finite orbit `x, f(x), …, fⁿ(x)` with the spec string of its map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment {
    pub points: Vec<PhasePoint>,
    pub map: String,
    pub topology: PhaseTopology,
}

impl OrbitSegment {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn evaluate(map: &dyn PlanarMap, x: PhasePoint) -> Result<PhasePoint> {
    map.forward(x)
}

pub fn jacobian(map: &dyn PlanarMap, x: PhasePoint) -> Result<Mat2> {
    map.topology().validate(x)?;
    map.jacobian(x)
}

pub fn orbit(map: &dyn PlanarMap, x: PhasePoint, n: usize) -> Result<OrbitSegment> {
    if n == 0 {
        return Err(Error::Parameter("orbit length n must be >= 1".into()));
    }
    let topology = map.topology();
    let mut points = Vec::with_capacity(n + 1);
    let mut cur = topology.wrap(x)?;
    points.push(cur);
    for _ in 0..n {
        cur = map.forward(cur)?;
        points.push(cur);
    }
    Ok(OrbitSegment {
        points,
        map: map.spec(),
        topology,
    })
}

/// `Dfⁿ(x) = Df(fⁿ⁻¹x)·…·Df(x)` with a separated log-scale factor.
pub fn cocycle(map: &dyn PlanarMap, x: PhasePoint, n: usize) -> Result<ScaledMat2> {
    if n == 0 {
        return Err(Error::Parameter("cocycle length n must be >= 1".into()));
    }
    let topology = map.topology();
    let mut cur = topology.wrap(x)?;
    let mut acc = ScaledMat2::identity();
    for _ in 0..n {
        let (next, jac) = map.lift_with_jacobian(cur)?;
        acc.push(&jac);
        cur = topology.wrap(next)?;
    }
    Ok(acc)
}

/// Maximum of `|det Df − 1|` over seeded random points of the sample region.
pub fn check_symplectic(map: &dyn PlanarMap, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Parameter("samples must be >= 1".into()));
    }
    let region = map.sample_region();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = region.at([rng.gen::<f64>(), rng.gen::<f64>()]);
        let residual = (map.jacobian(x)?.det() - 1.0).abs();
        worst = worst.max(residual);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_handles_negative_rounding() {
        assert_eq!(wrap_coord(-1e-18, 1.0), 0.0);
        assert!((wrap_coord(-0.25, 1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn torus_distance_uses_shortest_lift() {
        let t = PhaseTopology::UNIT_TORUS;
        let d = t.distance(PhasePoint::new(0.05, 0.0), PhasePoint::new(0.95, 0.0));
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sphere_chart_rejects_poles() {
        let t = PhaseTopology::SphereChart;
        assert!(matches!(
            t.wrap(PhasePoint::new(0.0, 1.0)),
            Err(Error::Domain(_))
        ));
        assert!(t.wrap(PhasePoint::new(7.0, 0.5)).is_ok());
    }

    #[test]
    fn cylinder_keeps_line_coordinate() {
        let t = PhaseTopology::Cylinder { period: TAU };
        let w = t.wrap(PhasePoint::new(-1.0, 12.5)).unwrap();
        assert!((w.0[0] - (TAU - 1.0)).abs() < 1e-15);
        assert_eq!(w.0[1], 12.5);
    }
}
