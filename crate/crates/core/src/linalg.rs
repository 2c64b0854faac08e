//! Fixed-size 2×2 linear algebra used throughout the crate.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2(pub [f64; 2]);

impl Vec2 {
    pub const fn new(a: f64, b: f64) -> Self {
        Vec2([a, b])
    }

    pub fn dot(&self, other: &Vec2) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    pub fn norm(&self) -> f64 {
        self.0[0].hypot(self.0[1])
    }

    pub fn max_norm(&self) -> f64 {
        self.0[0].abs().max(self.0[1].abs())
    }

    pub fn scale(&self, s: f64) -> Vec2 {
        Vec2([self.0[0] * s, self.0[1] * s])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

/// Row-major 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// Eigenvalues of a real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    /// Sorted so that `|.0| >= |.1|`.
    Real(f64, f64),
    /// `re ± i·im` with `im > 0`.
    Complex { re: f64, im: f64 },
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2([[a, 0.0], [0.0, d]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn solve(&self, rhs: Vec2) -> Option<Vec2> {
        self.inverse().map(|inv| inv.apply(rhs))
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        let (smax, _) = self.singular_values();
        smax
    }

    /// `(σ_max, σ_min)`.
    pub fn singular_values(&self) -> (f64, f64) {
        let m = &self.0;
        let frob2 = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
        let d = self.det().abs();
        let disc = (frob2 * frob2 - 4.0 * d * d).max(0.0).sqrt();
        let smax = ((frob2 + disc) / 2.0).sqrt();
        let smin = if smax > 0.0 { d / smax } else { 0.0 };
        (smax, smin)
    }

    /// Eigenvalues from the characteristic polynomial `x² − tr·x + det`.
    pub fn eigenvalues(&self) -> Eigenvalues {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable root pair
            let big = if tr >= 0.0 { (tr + sq) / 2.0 } else { (tr - sq) / 2.0 };
            let small = if big != 0.0 { det / big } else { 0.0 };
            if big.abs() >= small.abs() {
                Eigenvalues::Real(big, small)
            } else {
                Eigenvalues::Real(small, big)
            }
        } else {
            Eigenvalues::Complex {
                re: tr / 2.0,
                im: (-disc).sqrt() / 2.0,
            }
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

/// A matrix stored as `scale · exp(log_scale)`, for long cocycle products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMat2 {
    pub matrix: Mat2,
    pub log_scale: f64,
}

impl ScaledMat2 {
    pub fn identity() -> Self {
        ScaledMat2 {
            matrix: Mat2::IDENTITY,
            log_scale: 0.0,
        }
    }

    /// Renormalize once entries exceed this magnitude.
    pub const RESCALE_THRESHOLD: f64 = 1e100;

    /// Left-multiply by `m`, rescaling if entries grow too large.
    pub fn push(&mut self, m: &Mat2) {
        self.matrix = *m * self.matrix;
        let big = self.matrix.max_abs();
        if big > Self::RESCALE_THRESHOLD {
            self.matrix = self.matrix.scale(1.0 / big);
            self.log_scale += big.ln();
        }
    }

    /// Dense value; overflows to infinity when the log scale is large.
    pub fn to_matrix(&self) -> Mat2 {
        self.matrix.scale(self.log_scale.exp())
    }

    pub fn trace_scaled(&self) -> (f64, f64) {
        (self.matrix.trace(), self.log_scale)
    }

    /// `log |λ_max|` of the represented matrix when its eigenvalues are real.
    ///
    /// Uses the characteristic polynomial of the normalized matrix; the
    /// determinant of the normalized matrix is `det · exp(−2·log_scale)`.
    pub fn log_spectral_radius(&self) -> f64 {
        match self.matrix.eigenvalues() {
            Eigenvalues::Real(big, _) => big.abs().ln() + self.log_scale,
            Eigenvalues::Complex { re, im } => re.hypot(im).ln() + self.log_scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_matrix_eigenvalues() {
        let a = Mat2::new(2.0, 1.0, 1.0, 1.0);
        match a.eigenvalues() {
            Eigenvalues::Real(big, small) => {
                assert!((big - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
                assert!((small - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
            }
            other => panic!("expected real eigenvalues, got {other:?}"),
        }
    }

    #[test]
    fn rotation_has_complex_eigenvalues() {
        let r = Mat2::new(0.0, -1.0, 1.0, 0.0);
        assert_eq!(r.eigenvalues(), Eigenvalues::Complex { re: 0.0, im: 1.0 });
    }

    #[test]
    fn singular_values_of_diagonal() {
        let (a, b) = Mat2::diag(4.0, 0.25).singular_values();
        assert!((a - 4.0).abs() < 1e-14 && (b - 0.25).abs() < 1e-14);
    }

    #[test]
    fn scaled_product_tracks_log() {
        let m = Mat2::diag(1e60, 1e-60);
        let mut acc = ScaledMat2::identity();
        for _ in 0..10 {
            acc.push(&m);
        }
        let expect = 600.0 * 10f64.ln();
        assert!((acc.log_spectral_radius() - expect).abs() < 1e-9);
    }
}
