//! A two-dimensional model of a homoclinic tangency turned into a horseshoe
//! by a snake perturbation.
//!
//! The saddle `p` sits at the origin with stable axis `x` and unstable axis
//! `y`. On the box `V = [−W, W] × [−1, 1]` the map is linear,
//! `(x, y) ↦ (x/λ, λy)`. Points leaving through the top of `V` enter the exit
//! box `E`, make two translations to the boxes `B1 = E + (10, 0)` and
//! `B2 = E + (20, 0)`, and are reinjected near the tangency point
//! `q = (x_q, 0)` on the stable axis by the affine map
//! `R(x, y) = (x_q − s(y − y_c), x/s)`. The reinjection sends the local
//! unstable manifold `{x = 0}` onto the segment `|x − x_q| ≤ 2a` of the stable
//! axis, so without the snake the model has a tangency interval. The snake
//! `Θ(x, y) = (x, y + A cos(πN(x − x_q)/(2a)))` is applied after `R` and cuts
//! the interval into `N` transversal crossings.
//!
//! Every piece is area preserving with exact unit determinant, and the pieces
//! have pairwise disjoint images.

mod coding;
mod interval;

pub use coding::{
    code_horseshoe, code_horseshoe_with_depth, coded_orbit_segment, enumerate_words,
    periodic_exponent_floor, powers_of_two, rho_to_saddle, snake_sweep, solve_coded_orbit,
    spectral_radius, transit_gain, visit_frequency,
    CodedOrbit, FloorReport, HorseshoeCoding, LegCertificate, SweepConfig, SweepReport, SweepRow,
    Transitions,
};
pub use interval::Interval;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::maps::{PhasePoint, PhaseTopology, PlanarMap, Rect};

/// Steps spent outside `V` between leaving through the top and reinjection.
pub const TRANSIT_TIME: u32 = 3;

/// Constant in `A = 2Kaδ/(πN)`.
pub const SNAKE_K: f64 = 1.0;

/// Horizontal offset between consecutive transit boxes.
pub const TRANSIT_SHIFT: f64 = 10.0;

/// Iterate cap for [`return_time`].
pub const DEPTH_CAP: u32 = 10_000;

pub const DEFAULT_QUALITY: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnakeParams {
    pub lambda: f64,
    pub a: f64,
    pub delta: f64,
    pub legs: u128,
    /// Quality index `n`: the construction aims at exponents within `1/n`.
    pub quality: u32,
}

impl SnakeParams {
    pub fn new(lambda: f64, a: f64, delta: f64, legs: u128) -> Self {
        SnakeParams {
            lambda,
            a,
            delta,
            legs,
            quality: DEFAULT_QUALITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnakeModel {
    params: SnakeParams,
    amplitude: f64,
    x_q: f64,
    s: f64,
    y_c: f64,
    half_width: f64,
}

impl SnakeModel {
    pub fn new(params: SnakeParams) -> Result<Self> {
        let SnakeParams {
            lambda,
            a,
            delta,
            legs,
            quality,
        } = params;
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be > 1, got {lambda}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("a must be > 0, got {a}")));
        }
        if !(delta > 0.0 && delta <= 0.1) {
            return Err(Error::Parameter(format!("delta must lie in (0, 0.1], got {delta}")));
        }
        if legs < 2 {
            return Err(Error::Parameter(format!("leg count must be >= 2, got {legs}")));
        }
        if quality == 0 {
            return Err(Error::Parameter("quality index must be >= 1".into()));
        }
        let x_q = 2.0 * a * (lambda + 1.0) / (lambda - 1.0) + a / 2.0;
        Ok(SnakeModel {
            params,
            amplitude: 2.0 * SNAKE_K * a * delta / (PI * legs as f64),
            x_q,
            s: 4.0 * a / (lambda - 1.0),
            y_c: (1.0 + lambda) / 2.0,
            half_width: x_q + 2.0 * a,
        })
    }

    /// Same geometry with the snake amplitude replaced, bypassing the
    /// amplitude formula. Used to probe the return time at a given `A` and to
    /// plant degenerate models.
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        SnakeModel {
            amplitude,
            ..self.clone()
        }
    }

    pub fn params(&self) -> &SnakeParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn a(&self) -> f64 {
        self.params.a
    }

    pub fn delta(&self) -> f64 {
        self.params.delta
    }

    pub fn legs(&self) -> u128 {
        self.params.legs
    }

    pub fn quality(&self) -> u32 {
        self.params.quality
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Support half-width of the snake around `x_q`.
    pub fn support_radius(&self) -> f64 {
        2.0 * self.params.a
    }

    pub fn tangency_point(&self) -> PhasePoint {
        PhasePoint::new(self.x_q, 0.0)
    }

    pub fn reinjection_scale(&self) -> f64 {
        self.s
    }

    pub fn reinjection_center(&self) -> f64 {
        self.y_c
    }

    /// Half-width `W` of the linearizing box `V`.
    pub fn box_half_width(&self) -> f64 {
        self.half_width
    }

    /// `V = [−W, W] × [−1, 1]`.
    pub fn linear_box(&self) -> Rect {
        Rect::new([-self.half_width, -1.0], [self.half_width, 1.0])
    }

    /// Exponent of the saddle, `log λ`.
    pub fn chi_p(&self) -> f64 {
        self.params.lambda.ln()
    }

    /// `A·πN/(2a)`, the C¹ size of the snake; equals `Kδ` for the formula
    /// amplitude.
    pub fn snake_slope(&self) -> f64 {
        self.amplitude * PI * self.params.legs as f64 / (2.0 * self.params.a)
    }

    /// `⌊N/2⌋`.
    pub(crate) fn half_legs(&self) -> u128 {
        self.params.legs / 2
    }

    /// Stable side `D^s = [x_q + e, x_q + e + 2a]` with `e = −2⌊N/2⌋a/N`, so
    /// that it starts at a crest of the snake and holds `N` full legs.
    pub fn stable_side(&self) -> [f64; 2] {
        let n = self.params.legs;
        let e = -2.0 * self.params.a * (self.half_legs() as f64 / n as f64);
        let lo = self.x_q + e;
        [lo, lo + 2.0 * self.params.a]
    }

    /// Normalized unstable window `[y₁, y₂]`: the heights in `E` reinjected
    /// onto `D^s` widened by `a/4` on both sides.
    pub fn unstable_window(&self) -> [f64; 2] {
        let [lo, hi] = self.stable_side();
        let a = self.params.a;
        [
            self.y_c - (hi + 0.25 * a - self.x_q) / self.s,
            self.y_c - (lo - 0.25 * a - self.x_q) / self.s,
        ]
    }

    /// Model x-coordinate of a point on leg `j` at leg phase `u ∈ [0, π]`.
    pub fn leg_x(&self, j: u128, u: f64) -> f64 {
        let d = j as i128 - self.half_legs() as i128;
        self.x_q + 2.0 * self.params.a * (d as f64 + u / PI) / self.params.legs as f64
    }

    /// `σ_j = (−1)^{j − ⌊N/2⌋}`: the sign of the snake at the start of leg `j`.
    pub fn leg_sign(&self, j: u128) -> f64 {
        if (j + self.half_legs()) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn snake_phase(&self, x: f64) -> f64 {
        PI * self.params.legs as f64 * (x - self.x_q) / (2.0 * self.params.a)
    }

    fn in_linear_box(&self, p: PhasePoint) -> bool {
        p.x().abs() <= self.half_width && p.y().abs() <= 1.0
    }

    /// Index of the exit or transit box containing `p`: 0 for `E`, 1 for `B1`,
    /// 2 for `B2`.
    fn transit_box(&self, p: PhasePoint) -> Option<u32> {
        let lam = self.params.lambda;
        if !(p.y() > 1.0 && p.y() <= lam) {
            return None;
        }
        let w = self.half_width / lam;
        (0..TRANSIT_TIME).find(|&i| (p.x() - TRANSIT_SHIFT * i as f64).abs() <= w)
    }

    fn reinject(&self, p: PhasePoint) -> PhasePoint {
        let x = p.x() - TRANSIT_SHIFT * (TRANSIT_TIME - 1) as f64;
        PhasePoint::new(self.x_q - self.s * (p.y() - self.y_c), x / self.s)
    }

    fn theta(&self, p: PhasePoint) -> PhasePoint {
        PhasePoint::new(p.x(), p.y() + self.amplitude * self.snake_phase(p.x()).cos())
    }

    fn theta_jacobian(&self, p: PhasePoint) -> Mat2 {
        let slope = -self.snake_slope() * self.snake_phase(p.x()).sin();
        Mat2::new(1.0, 0.0, slope, 1.0)
    }

    fn reinjection_jacobian(&self) -> Mat2 {
        Mat2::new(0.0, -self.s, 1.0 / self.s, 0.0)
    }

    /// One step of the model, with or without the snake.
    fn step(&self, p: PhasePoint, snake: bool) -> Result<PhasePoint> {
        let lam = self.params.lambda;
        if self.in_linear_box(p) {
            return Ok(PhasePoint::new(p.x() / lam, lam * p.y()));
        }
        match self.transit_box(p) {
            Some(i) if i + 1 < TRANSIT_TIME => Ok(PhasePoint::new(p.x() + TRANSIT_SHIFT, p.y())),
            Some(_) => {
                let r = self.reinject(p);
                Ok(if snake { self.theta(r) } else { r })
            }
            None => Err(Error::Domain(format!("{p} lies outside the snake model's domain"))),
        }
    }

    /// The model without the snake: a map with a tangency interval.
    pub fn unperturbed(&self, p: PhasePoint) -> Result<PhasePoint> {
        self.step(p, false)
    }
}

impl PlanarMap for SnakeModel {
    fn name(&self) -> &str {
        "snake"
    }

    fn topology(&self) -> PhaseTopology {
        PhaseTopology::Plane
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("lambda".into(), self.params.lambda),
            ("a".into(), self.params.a),
            ("delta".into(), self.params.delta),
            ("n".into(), self.params.legs as f64),
        ]
    }

    fn lift(&self, x: PhasePoint) -> Result<PhasePoint> {
        self.step(x, true)
    }

    fn jacobian(&self, p: PhasePoint) -> Result<Mat2> {
        let lam = self.params.lambda;
        if self.in_linear_box(p) {
            return Ok(Mat2::diag(1.0 / lam, lam));
        }
        match self.transit_box(p) {
            Some(i) if i + 1 < TRANSIT_TIME => Ok(Mat2::IDENTITY),
            Some(_) => Ok(self.theta_jacobian(self.reinject(p)) * self.reinjection_jacobian()),
            None => Err(Error::Domain(format!("{p} lies outside the snake model's domain"))),
        }
    }

    fn sample_region(&self) -> Rect {
        self.linear_box()
    }
}

/// Model with the formula amplitude `A = 2aδ/(πN)` and the default quality.
pub fn build_snake(lambda: f64, a: f64, delta: f64, legs: u128) -> Result<SnakeModel> {
    SnakeModel::new(SnakeParams::new(lambda, a, delta, legs))
}

/// `sup ‖DΘ − Id‖` over `grid` points spread across the snake support.
pub fn theta_c1_distance(model: &SnakeModel, grid: usize) -> f64 {
    let r = model.support_radius();
    (0..=grid)
        .map(|i| {
            let x = model.x_q - r + 2.0 * r * i as f64 / grid.max(1) as f64;
            let d = model.theta_jacobian(PhasePoint::new(x, 0.0)) - Mat2::IDENTITY;
            d.operator_norm()
        })
        .fold(0.0, f64::max)
}

/// Chart change `φ(x, y) = (x, y − r(x))` straightening the graph of `r`.
pub struct GraphFlattening<R, D> {
    r: R,
    dr: D,
}

/// Builds `φ` from `r` and its derivative `dr`. Requires `r(0) = 0` and
/// `r'(0) = 0` so that the graph is tangent to the axis at the origin.
pub fn flatten_graph<R, D>(r: R, dr: D) -> Result<GraphFlattening<R, D>>
where
    R: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if r(0.0).abs() > 1e-12 || dr(0.0).abs() > 1e-12 {
        return Err(Error::Contract(
            "graph function must satisfy r(0) = 0 and r'(0) = 0".into(),
        ));
    }
    Ok(GraphFlattening { r, dr })
}

impl<R, D> GraphFlattening<R, D>
where
    R: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    pub fn apply(&self, p: PhasePoint) -> PhasePoint {
        PhasePoint::new(p.x(), p.y() - (self.r)(p.x()))
    }

    pub fn inverse(&self, p: PhasePoint) -> PhasePoint {
        PhasePoint::new(p.x(), p.y() + (self.r)(p.x()))
    }

    pub fn jacobian(&self, p: PhasePoint) -> Mat2 {
        Mat2::new(1.0, 0.0, -(self.dr)(p.x()), 1.0)
    }
}

/// Exact count of transversal zeros of `x ↦ A cos(πN(x − x_q)/(2a))` on the
/// half-open interval `x − x_q ∈ [−a, a)`.
///
/// In the phase `ψ = πN(x − x_q)/(2a)` the interval is `[−Nπ/2, Nπ/2)` and the
/// zeros are `ψ = π/2 + mπ`. Between consecutive crests the function changes
/// sign exactly once, and at each zero its slope is `±A·πN/(2a)`; both facts
/// are checked on the two representative cells (even and odd `m`) and the
/// count of admissible `m` is then taken in integer arithmetic.
pub fn count_legs(model: &SnakeModel) -> Result<u128> {
    let slope = model.snake_slope();
    if !(slope.abs() >= 1e-12) {
        return Err(Error::Degeneracy(format!(
            "snake slope {slope:e} at the crossings is below 1e-12"
        )));
    }
    for m in [0.0_f64, 1.0] {
        let zero = PI / 2.0 + m * PI;
        let left = model.amplitude * (zero - PI / 2.0).cos();
        let right = model.amplitude * (zero + PI / 2.0).cos();
        if left * right >= 0.0 {
            return Err(Error::Degeneracy(format!("no sign change across the zero at m = {m}")));
        }
        let derivative = slope * zero.sin().abs();
        if derivative.abs() < 1e-12 {
            return Err(Error::Degeneracy(format!("tangential crossing at m = {m}")));
        }
    }
    // −N/2 ≤ 1/2 + m < N/2  ⇔  −(N+1)/2 ≤ m < (N−1)/2, counted in halves.
    let n = model.legs() as i128;
    let lo = ceil_half(-(n + 1));
    let hi = ceil_half(n - 1);
    Ok((hi - lo).max(0) as u128)
}

fn ceil_half(v: i128) -> i128 {
    v.div_euclid(2) + v.rem_euclid(2)
}

/// Depth and return time of the horseshoe rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnTime {
    /// Iterates `k` spent in `V` before leaving through the top.
    pub depth: u32,
    /// `t = k + T`.
    pub t: u32,
    pub amplitude: f64,
    /// `A·λ^t`.
    pub k1: f64,
}

/// Smallest depth `k` such that `D_k = D^s × [y₁, y₂]·λ^{−k}` fits inside the
/// snake amplitude: `y₂λ^{−k} ≤ A/2`, and the reinjected image of `D_k`
/// before the snake lies within `A/2` of the stable axis.
///
/// The depth is located by the closed-form condition and then confirmed by
/// iterating the corners of `D_k` through the unperturbed dynamics: each
/// corner must stay in `V` for `k − 1` steps, reach `E` at step `k`, and
/// return within height `A/2` after `T` more steps.
pub fn return_time(model: &SnakeModel) -> Result<ReturnTime> {
    let amp = model.amplitude;
    if !(amp > 0.0 && amp.is_finite()) {
        return Err(Error::Construction(format!("snake amplitude {amp:e} must be positive")));
    }
    let lam = model.lambda();
    let [x_lo, x_hi] = model.stable_side();
    let [y_lo, y_hi] = model.unstable_window();
    let reach = y_hi.max(x_hi.abs().max(x_lo.abs()) / model.s);
    let mut scale = 1.0_f64;
    let mut depth = None;
    for k in 1..=DEPTH_CAP {
        scale /= lam;
        if reach * scale <= amp / 2.0 {
            depth = Some(k);
            break;
        }
    }
    let k = depth.ok_or_else(|| {
        Error::Construction(format!(
            "horseshoe does not close within {DEPTH_CAP} iterates at A = {amp:e}"
        ))
    })?;
    let contraction = lam.powi(-(k as i32));
    for x in [x_lo, x_hi] {
        for y in [y_lo, y_hi] {
            let mut p = PhasePoint::new(x, y * contraction);
            if y * contraction > amp / 2.0 {
                return Err(Error::Construction("rectangle taller than A/2".into()));
            }
            for i in 0..k + TRANSIT_TIME {
                if i < k && !model.in_linear_box(p) {
                    return Err(Error::Construction(format!(
                        "corner left V after {i} of {k} iterates"
                    )));
                }
                if i == k && model.transit_box(p) != Some(0) {
                    return Err(Error::Construction(format!(
                        "corner did not reach the exit box after {k} iterates"
                    )));
                }
                p = model.unperturbed(p)?;
            }
            if p.y().abs() > amp / 2.0 {
                return Err(Error::Construction(format!(
                    "reinjected corner at height {:e} exceeds A/2",
                    p.y()
                )));
            }
        }
    }
    let t = k + TRANSIT_TIME;
    Ok(ReturnTime {
        depth: k,
        t,
        amplitude: amp,
        k1: amp * lam.powi(t as i32),
    })
}

/// [`return_time`] with the amplitude replaced by `amplitude`.
pub fn return_time_at(model: &SnakeModel, amplitude: f64) -> Result<ReturnTime> {
    return_time(&model.with_amplitude(amplitude))
}

/// `|tan ∠(v, w)|`, computed as `|v × w| / |v · w|`; `+∞` when orthogonal.
pub fn angle(v: Vec2, w: Vec2) -> Result<f64> {
    if v.norm() == 0.0 || w.norm() == 0.0 {
        return Err(Error::Domain("angle of a zero vector".into()));
    }
    let cross = (v.0[0] * w.0[1] - v.0[1] * w.0[0]).abs();
    let dot = v.dot(&w).abs();
    Ok(if dot == 0.0 { f64::INFINITY } else { cross / dot })
}

/// Angle between `v` and the subspace spanned by an orthonormal `basis`:
/// `|v_⊥| / |v_∥|` with the orthogonal projection, `+∞` when `v_∥ = 0`.
pub fn angle_to_subspace(v: Vec2, basis: &[Vec2]) -> Result<f64> {
    if v.norm() == 0.0 {
        return Err(Error::Domain("angle of a zero vector".into()));
    }
    for (i, b) in basis.iter().enumerate() {
        for c in &basis[i..] {
            let expect = if std::ptr::eq(b, c) { 1.0 } else { 0.0 };
            if (b.dot(c) - expect).abs() > 1e-12 {
                return Err(Error::Domain("subspace basis is not orthonormal".into()));
            }
        }
    }
    let par = basis
        .iter()
        .fold(Vec2::new(0.0, 0.0), |acc, b| acc + b.scale(v.dot(b)));
    let perp = v - par;
    let pn = par.norm();
    Ok(if pn == 0.0 { f64::INFINITY } else { perp.norm() / pn })
}

/// Norm-equivalence constant between the Euclidean and max norms in the plane.
pub const K6: f64 = FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq)]
pub enum ExpansionReport {
    Checked {
        /// `|Dg^k(z) v|`.
        lhs: f64,
        /// `K₆ ‖Dg_p^{−k}|E^u‖^{−1} |v| min{ang(v, E^s), 1}`.
        rhs: f64,
        margin: f64,
        /// The same inequality in the max norm with constant 1.
        max_norm_lhs: f64,
        max_norm_rhs: f64,
        holds: bool,
    },
    /// `ang(Dg^k(z) v, E^s) < 1`: the estimate does not apply.
    HypothesisFailed { image_angle: f64 },
}

/// Evaluates both sides of the cone expansion estimate for `k` iterates of the
/// model from `z`, which must stay in `V` throughout.
pub fn verify_expansion(model: &SnakeModel, k: u32, v: Vec2, z: PhasePoint) -> Result<ExpansionReport> {
    if v.norm() == 0.0 {
        return Err(Error::Domain("zero tangent vector".into()));
    }
    let mut p = z;
    let mut w = v;
    for i in 0..k {
        if !model.in_linear_box(p) {
            return Err(Error::Contract(format!("orbit of {z} leaves V after {i} iterates")));
        }
        w = model.jacobian(p)?.apply(w);
        p = model.lift(p)?;
    }
    let stable = [Vec2::new(1.0, 0.0)];
    let image_angle = angle_to_subspace(w, &stable)?;
    if image_angle < 1.0 {
        return Ok(ExpansionReport::HypothesisFailed { image_angle });
    }
    let rate = model.lambda().powi(k as i32);
    let factor = angle_to_subspace(v, &stable)?.min(1.0);
    let lhs = w.norm();
    let rhs = K6 * rate * v.norm() * factor;
    let max_norm_lhs = w.max_norm();
    let max_norm_rhs = rate * v.max_norm() * factor;
    Ok(ExpansionReport::Checked {
        lhs,
        rhs,
        margin: lhs - rhs,
        max_norm_lhs,
        max_norm_rhs,
        holds: lhs >= rhs && max_norm_lhs >= max_norm_rhs * (1.0 - 1e-15),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(n: u128) -> SnakeModel {
        build_snake(2.0, 0.1, 0.05, n).unwrap()
    }

    #[test]
    fn amplitude_from_formula() {
        let m = model(5);
        assert_relative_eq!(m.amplitude(), 0.002 / PI, max_relative = 1e-15);
        assert_relative_eq!(m.amplitude(), 6.366e-4, max_relative = 1e-4);
        assert_eq!(model(10).amplitude() * 2.0, m.amplitude());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_snake(1.0, 0.1, 0.05, 4).is_err());
        assert!(build_snake(2.0, 0.0, 0.05, 4).is_err());
        assert!(build_snake(2.0, 0.1, 0.2, 4).is_err());
        assert!(build_snake(2.0, 0.1, 0.0, 4).is_err());
        assert!(build_snake(2.0, 0.1, 0.05, 1).is_err());
    }

    #[test]
    fn pieces_have_disjoint_images() {
        let m = model(4);
        // image of V stays left of the reinjected tangency segment
        assert!(m.box_half_width() / m.lambda() < m.x_q - 2.0 * m.a());
    }

    #[test]
    fn snake_c1_size_matches_delta() {
        let m = model(8);
        let d = theta_c1_distance(&m, 20_000);
        assert!(d <= 0.05 + 1e-12);
        assert!(d > 0.05 * (1.0 - 1e-6));
    }

    #[test]
    fn unit_determinant_on_every_piece() {
        let m = model(6);
        let pts = [
            PhasePoint::new(0.3, 0.4),
            PhasePoint::new(-0.1, 1.5),
            PhasePoint::new(10.2, 1.2),
            PhasePoint::new(19.8, 1.9),
        ];
        for p in pts {
            assert!((m.jacobian(p).unwrap().det() - 1.0).abs() < 1e-15);
        }
        assert!(m.lift(PhasePoint::new(5.0, 0.0)).is_err());
    }

    #[test]
    fn reinjection_maps_unstable_axis_onto_tangency_interval() {
        let m = model(4);
        let mut p = PhasePoint::new(0.0, m.reinjection_center());
        for _ in 0..TRANSIT_TIME {
            p = m.unperturbed(p).unwrap();
        }
        assert_relative_eq!(p.x(), m.tangency_point().x(), epsilon = 1e-15);
        assert_eq!(p.y(), 0.0);
    }

    #[test]
    fn flattening_straightens_parabola() {
        let phi = flatten_graph(|x| x * x, |x| 2.0 * x).unwrap();
        let q = phi.apply(PhasePoint::new(0.2, 0.04));
        assert_relative_eq!(q.y(), 0.0, epsilon = 1e-17);
        assert_eq!(phi.jacobian(PhasePoint::new(0.7, 3.0)).det(), 1.0);
        assert!(flatten_graph(|x| x + 1.0, |_| 1.0).is_err());
        let id = flatten_graph(|_| 0.0, |_| 0.0).unwrap();
        assert_eq!(id.apply(PhasePoint::new(0.3, 0.5)), PhasePoint::new(0.3, 0.5));
    }

    #[test]
    fn leg_count_degenerate_amplitude() {
        let m = model(4).with_amplitude(0.0);
        assert!(matches!(count_legs(&m), Err(Error::Degeneracy(_))));
    }

    #[test]
    fn return_time_at_reference_amplitude() {
        let r = return_time_at(&model(4), 2f64.powi(-10)).unwrap();
        assert_eq!(r.depth, 12);
        assert_eq!(r.t, 15);
        assert!((5..=15).contains(&r.t));
    }

    #[test]
    fn return_time_cap() {
        let m = build_snake(1.0001, 0.1, 0.05, 4).unwrap();
        assert!(matches!(return_time(&m), Err(Error::Construction(_))));
    }

    #[test]
    fn angles() {
        let e1 = Vec2::new(1.0, 0.0);
        let e2 = Vec2::new(0.0, 1.0);
        assert_eq!(angle(e1, e1).unwrap(), 0.0);
        let d = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert_relative_eq!(angle_to_subspace(d, &[e1]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(angle_to_subspace(e1, &[e2]).unwrap(), f64::INFINITY);
        assert!(angle(Vec2::new(0.0, 0.0), e1).is_err());
        assert_eq!(angle_to_subspace(d, &[e1, e2]).unwrap(), 0.0);
    }

    #[test]
    fn expansion_unstable_vector_is_tight() {
        let m = model(4);
        let z = PhasePoint::new(0.5, 1e-4);
        match verify_expansion(&m, 5, Vec2::new(0.0, 1.0), z).unwrap() {
            ExpansionReport::Checked {
                max_norm_lhs,
                max_norm_rhs,
                holds,
                ..
            } => {
                assert_eq!(max_norm_lhs, 32.0);
                assert_eq!(max_norm_rhs, 32.0);
                assert!(holds);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expansion_stable_vector_fails_hypothesis() {
        let m = model(4);
        let r = verify_expansion(&m, 5, Vec2::new(1.0, 0.0), PhasePoint::new(0.5, 1e-4)).unwrap();
        assert!(matches!(r, ExpansionReport::HypothesisFailed { .. }));
    }
}
