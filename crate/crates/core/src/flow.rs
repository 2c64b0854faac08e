//! Pendulum flow carried onto the sphere chart.
//!
//! On the chart `(θ, z) ∈ [0, 2π) × (−1, 1)` with area form `dθ ∧ dz` the
//! Hamiltonian is
//!
//! ```text
//! H(θ, z) = β(|z|)·H₂(θ, z) + (1 − β(|z|))·H₁(θ, z),   H₁ = z,   H₂ = z²/2 − cos θ
//! ```
//!
//! so the pendulum (with its saddle at `(π, 0)`) lives on `|z| < 1/2` and the
//! rigid rotation of the height function on `|z| > 2/3`. The time-t map is
//! produced by a composition of implicit midpoint steps together with its
//! exact discrete Jacobian.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::maps::{PhasePoint, PhaseTopology, PlanarMap, Rect};

const PLATEAU: f64 = 0.5;
const SUPPORT: f64 = 2.0 / 3.0;
const RAMP: f64 = SUPPORT - PLATEAU;

fn edge(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn edge_d1(s: f64) -> f64 {
    if s > 0.0 {
        edge(s) / (s * s)
    } else {
        0.0
    }
}

fn edge_d2(s: f64) -> f64 {
    if s > 0.0 {
        edge(s) * (1.0 / s.powi(4) - 2.0 / s.powi(3))
    } else {
        0.0
    }
}

/// Smooth step `S(s) = e(s) / (e(s) + e(1 − s))` and its first two derivatives.
fn smooth_step(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (u, v) = (edge(s), edge(1.0 - s));
    let (du, dv) = (edge_d1(s), -edge_d1(1.0 - s));
    let (ddu, ddv) = (edge_d2(s), edge_d2(1.0 - s));
    let d = u + v;
    let dd = du + dv;
    let num = du * v - u * dv;
    let dnum = ddu * v - u * ddv;
    let s0 = u / d;
    let s1 = num / (d * d);
    let s2 = (dnum * d - 2.0 * num * dd) / (d * d * d);
    (s0.clamp(0.0, 1.0), s1, s2)
}

/// Bump `β` with `β = 1` on `[0, 1/2]`, `β = 0` on `[2/3, ∞)`, with `β'` and `β''`.
pub fn bump_with_derivatives(x: f64) -> (f64, f64, f64) {
    let s = (SUPPORT - x) / RAMP;
    let (b, db, ddb) = smooth_step(s);
    (b, -db / RAMP, ddb / (RAMP * RAMP))
}

/// The C^∞ bump `β(x)`; requires `x ≥ 0`.
pub fn bump(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("bump argument must be >= 0, got {x}")));
    }
    Ok(bump_with_derivatives(x).0)
}

fn check_chart(theta: f64, z: f64) -> Result<()> {
    if !theta.is_finite() || !z.is_finite() || z.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "({theta}, {z}) outside the sphere chart |z| < 1"
        )));
    }
    Ok(())
}

struct Blend {
    b: f64,
    bz: f64,
    bzz: f64,
    delta: f64,
}

fn blend(theta: f64, z: f64) -> Blend {
    let (b, db, ddb) = bump_with_derivatives(z.abs());
    Blend {
        b,
        bz: db * z.signum(),
        bzz: ddb,
        delta: 0.5 * z * z - theta.cos() - z,
    }
}

pub fn hamiltonian(theta: f64, z: f64) -> Result<f64> {
    check_chart(theta, z)?;
    let bl = blend(theta, z);
    Ok(z + bl.b * bl.delta)
}

/// `(∂H/∂θ, ∂H/∂z)`.
pub fn gradient(theta: f64, z: f64) -> Result<[f64; 2]> {
    check_chart(theta, z)?;
    let bl = blend(theta, z);
    Ok([bl.b * theta.sin(), 1.0 + bl.bz * bl.delta + bl.b * (z - 1.0)])
}

fn field_unchecked(theta: f64, z: f64) -> Vec2 {
    let bl = blend(theta, z);
    Vec2([1.0 + bl.bz * bl.delta + bl.b * (z - 1.0), -bl.b * theta.sin()])
}

fn field_and_jacobian(theta: f64, z: f64) -> (Vec2, Mat2) {
    let bl = blend(theta, z);
    let (s, c) = theta.sin_cos();
    let x = Vec2([1.0 + bl.bz * bl.delta + bl.b * (z - 1.0), -bl.b * s]);
    let j = Mat2::new(
        bl.bz * s,
        bl.bzz * bl.delta + 2.0 * bl.bz * (z - 1.0) + bl.b,
        -bl.b * c,
        -bl.bz * s,
    );
    (x, j)
}

/// Hamiltonian vector field `X_H = (∂H/∂z, −∂H/∂θ)` for `ω = dθ ∧ dz`.
pub fn field(theta: f64, z: f64) -> Result<[f64; 2]> {
    check_chart(theta, z)?;
    Ok(field_unchecked(theta, z).0)
}

/// Jacobian of the vector field (trace zero).
pub fn field_jacobian(theta: f64, z: f64) -> Result<Mat2> {
    check_chart(theta, z)?;
    Ok(field_and_jacobian(theta, z).1)
}

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 30;

/// Symmetric triple-jump weights; the middle step runs backwards.
fn triple_jump() -> [f64; 3] {
    let g1 = 1.0 / (2.0 - 2f64.cbrt());
    [g1, 1.0 - 2.0 * g1, g1]
}

/// One implicit midpoint step `y = x + h·X((x + y)/2)`; returns `y` and, on
/// request, the step's Jacobian `(I − h/2·J)⁻¹(I + h/2·J)` at the midpoint.
fn midpoint_step(x: Vec2, h: f64, want_jacobian: bool) -> Result<(Vec2, Option<Mat2>)> {
    let mut y = x + field_unchecked(x.0[0], x.0[1]).scale(h);
    let mut converged = false;
    let mut last_j = Mat2::IDENTITY;
    for _ in 0..NEWTON_MAX_ITER {
        let m = (x + y).scale(0.5);
        if m.0[1].abs() >= 1.0 || !m.0[1].is_finite() {
            return Err(Error::Domain(format!(
                "trajectory left the sphere chart near z = {}",
                m.0[1]
            )));
        }
        let (f, j) = field_and_jacobian(m.0[0], m.0[1]);
        last_j = j;
        let g = y - x - f.scale(h);
        let lhs = Mat2::IDENTITY - j.scale(0.5 * h);
        let dy = lhs
            .solve(g)
            .ok_or_else(|| Error::Domain("singular implicit midpoint system".into()))?;
        y = y - dy;
        if dy.max_norm() <= NEWTON_TOL * 1e-3 || g.max_norm() <= NEWTON_TOL * 1e-3 {
            converged = true;
            break;
        }
    }
    if !converged {
        // accept when the final residual still meets the tolerance
        let m = (x + y).scale(0.5);
        let g = y - x - field_unchecked(m.0[0], m.0[1]).scale(h);
        if g.max_norm() > NEWTON_TOL {
            return Err(Error::Domain(format!(
                "implicit midpoint Newton did not converge (residual {})",
                g.max_norm()
            )));
        }
    }
    if y.0[1].abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "trajectory left the sphere chart at z = {}",
            y.0[1]
        )));
    }
    let jac = if want_jacobian {
        let m = (x + y).scale(0.5);
        let j = field_jacobian(m.0[0], m.0[1]).unwrap_or(last_j);
        let lhs = Mat2::IDENTITY - j.scale(0.5 * h);
        let rhs = Mat2::IDENTITY + j.scale(0.5 * h);
        let inv = lhs
            .inverse()
            .ok_or_else(|| Error::Domain("singular variational system".into()))?;
        Some(inv * rhs)
    } else {
        None
    };
    Ok((y, jac))
}

/// Fourth-order symmetric composition of three implicit midpoint steps.
fn composed_step(x: Vec2, h: f64, want_jacobian: bool) -> Result<(Vec2, Option<Mat2>)> {
    let mut y = x;
    let mut jac = want_jacobian.then_some(Mat2::IDENTITY);
    for g in triple_jump() {
        let (next, step_j) = midpoint_step(y, g * h, want_jacobian)?;
        y = next;
        if let (Some(acc), Some(sj)) = (jac.as_mut(), step_j) {
            *acc = sj * *acc;
        }
    }
    Ok((y, jac))
}

/// Integrate the flow for signed time `t` with `steps` equal steps.
pub fn integrate(x: PhasePoint, t: f64, steps: usize, want_jacobian: bool) -> Result<(PhasePoint, Option<Mat2>)> {
    check_chart(x.0[0], x.0[1])?;
    // on |z| > 2/3 the field is exactly (1, 0) and z is conserved
    if x.0[1].abs() > SUPPORT {
        return Ok((
            PhasePoint([x.0[0] + t, x.0[1]]),
            want_jacobian.then_some(Mat2::IDENTITY),
        ));
    }
    let h = t / steps as f64;
    let mut y = Vec2(x.0);
    let mut jac = want_jacobian.then_some(Mat2::IDENTITY);
    for _ in 0..steps {
        let (next, sj) = composed_step(y, h, want_jacobian)?;
        y = next;
        if let (Some(acc), Some(sj)) = (jac.as_mut(), sj) {
            *acc = sj * *acc;
        }
    }
    Ok((PhasePoint(y.0), jac))
}

/// Time-t map of the blended Hamiltonian flow, as a map of the sphere chart.
#[derive(Debug, Clone)]
pub struct SpherePendulum {
    t: f64,
    step: f64,
    steps: usize,
}

impl SpherePendulum {
    pub const DEFAULT_STEP: f64 = 1e-3;

    /// Saddle of the pendulum, hyperbolic for every `t > 0`.
    pub const SADDLE: PhasePoint = PhasePoint([PI, 0.0]);

    pub fn new(t: f64, step: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Parameter(format!("flow time must be > 0, got {t}")));
        }
        if !(step > 0.0 && step <= t) {
            return Err(Error::Parameter(format!(
                "step must satisfy 0 < step <= t, got step={step}, t={t}"
            )));
        }
        let steps = ((t / step).round() as usize).max(1);
        Ok(SpherePendulum { t, step, steps })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of integrator steps per application of the map.
    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// `time_t_map(t, step)`.
pub fn time_t_map(t: f64, step: f64) -> Result<SpherePendulum> {
    SpherePendulum::new(t, step)
}

impl PlanarMap for SpherePendulum {
    fn name(&self) -> &str {
        "sphere_pendulum"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::SphereChart
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![("t".into(), self.t), ("step".into(), self.step)]
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        Ok(integrate(x, self.t, self.steps, false)?.0)
    }

    fn jacobian(&self, x: PhasePoint) -> Result<Mat2> {
        Ok(self.lift_with_jacobian(x)?.1)
    }

    fn lift_with_jacobian(&self, x: PhasePoint) -> Result<(PhasePoint, Mat2)> {
        let (y, j) = integrate(x, self.t, self.steps, true)?;
        Ok((y, j.expect("jacobian requested")))
    }

    fn sample_region(&self) -> Rect {
        Rect::new([0.0, -0.999], [TAU, 0.999])
    }
}
