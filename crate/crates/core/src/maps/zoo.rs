use std::f64::consts::TAU;

use super::{PhasePoint, PhaseTopology, PlanarMap, Rect};
use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// The identity on a declared phase space.
#[derive(Debug, Clone)]
pub struct IdentityMap {
    pub topology: PhaseTopology,
}

impl IdentityMap {
    pub fn unit_torus() -> Self {
        IdentityMap {
            topology: PhaseTopology::UNIT_TORUS,
        }
    }
}

impl PlanarMap for IdentityMap {
    fn name(&self) -> &str {
        "identity"
    }

    fn topology(&self) -> PhaseTopology {
        self.topology
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        Ok(x)
    }

    fn jacobian(&self, _x: PhasePoint) -> Result<Mat2> {
        Ok(Mat2::IDENTITY)
    }
}

/// Hyperbolic toral automorphism `x ↦ A·x mod 1` on `[0, 1)²`.
#[derive(Debug, Clone)]
pub struct CatMap {
    matrix: [[i64; 2]; 2],
}

impl CatMap {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det != 1 {
            return Err(Error::Parameter(format!(
                "cat map matrix must have determinant 1, got {det}"
            )));
        }
        Ok(CatMap { matrix })
    }

    /// Arnold's `[[2, 1], [1, 1]]`.
    pub fn arnold() -> Self {
        CatMap {
            matrix: [[2, 1], [1, 1]],
        }
    }

    pub fn matrix(&self) -> Mat2 {
        let m = &self.matrix;
        Mat2::new(m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64)
    }

    pub fn integer_matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }
}

impl PlanarMap for CatMap {
    fn name(&self) -> &str {
        "cat"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::UNIT_TORUS
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        let m = &self.matrix;
        vec![
            ("a".into(), m[0][0] as f64),
            ("b".into(), m[0][1] as f64),
            ("c".into(), m[1][0] as f64),
            ("d".into(), m[1][1] as f64),
        ]
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        let v = self.matrix().apply(crate::linalg::Vec2(x.0));
        Ok(PhasePoint(v.0))
    }

    fn jacobian(&self, _x: PhasePoint) -> Result<Mat2> {
        Ok(self.matrix())
    }
}

/// Chirikov standard map `(θ, p) ↦ (θ + p + K sin θ, p + K sin θ)` on `[0, 2π)²`.
#[derive(Debug, Clone)]
pub struct StandardMap {
    pub k: f64,
}

impl PlanarMap for StandardMap {
    fn name(&self) -> &str {
        "standard"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::ANGLE_TORUS
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("k".into(), self.k)]
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        let [theta, p] = x.0;
        let p1 = p + self.k * theta.sin();
        Ok(PhasePoint([theta + p1, p1]))
    }

    fn jacobian(&self, x: PhasePoint) -> Result<Mat2> {
        let kc = self.k * x.0[0].cos();
        Ok(Mat2::new(1.0 + kc, 1.0, kc, 1.0))
    }
}

/// Rigid rotation `(θ, z) ↦ (θ + α, z)` on the cylinder.
#[derive(Debug, Clone)]
pub struct RotationMap {
    pub alpha: f64,
}

impl PlanarMap for RotationMap {
    fn name(&self) -> &str {
        "rotation"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::Cylinder { period: TAU }
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("alpha".into(), self.alpha)]
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        Ok(PhasePoint([x.0[0] + self.alpha, x.0[1]]))
    }

    fn jacobian(&self, _x: PhasePoint) -> Result<Mat2> {
        Ok(Mat2::IDENTITY)
    }
}

/// Integrable twist `(θ, p) ↦ (θ + p, p)` on `[0, 2π)²`.
#[derive(Debug, Clone, Default)]
pub struct ShearMap;

impl PlanarMap for ShearMap {
    fn name(&self) -> &str {
        "shear"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::ANGLE_TORUS
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        Ok(PhasePoint([x.0[0] + x.0[1], x.0[1]]))
    }

    fn jacobian(&self, _x: PhasePoint) -> Result<Mat2> {
        Ok(Mat2::new(1.0, 1.0, 0.0, 1.0))
    }
}

/// Linear saddle `diag(λ, 1/λ)` on the plane.
#[derive(Debug, Clone)]
pub struct LinearSaddle {
    pub lambda: f64,
}

impl PlanarMap for LinearSaddle {
    fn name(&self) -> &str {
        "saddle"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::Plane
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("lambda".into(), self.lambda)]
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        Ok(PhasePoint([self.lambda * x.0[0], x.0[1] / self.lambda]))
    }

    fn jacobian(&self, _x: PhasePoint) -> Result<Mat2> {
        Ok(Mat2::diag(self.lambda, 1.0 / self.lambda))
    }

    fn sample_region(&self) -> Rect {
        Rect::new([-1.0, -1.0], [1.0, 1.0])
    }
}

/// Deliberately non-area-preserving `(θ, z) ↦ (θ, c·z)`; exists to exercise
/// the symplecticity checker.
#[derive(Debug, Clone)]
pub struct SqueezeMap {
    pub c: f64,
}

impl PlanarMap for SqueezeMap {
    fn name(&self) -> &str {
        "squeeze"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::Cylinder { period: TAU }
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("c".into(), self.c)]
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        Ok(PhasePoint([x.0[0], self.c * x.0[1]]))
    }

    fn jacobian(&self, _x: PhasePoint) -> Result<Mat2> {
        Ok(Mat2::diag(1.0, self.c))
    }
}
