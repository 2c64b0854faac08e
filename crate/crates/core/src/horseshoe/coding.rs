//! Certification of the horseshoe, its coded periodic orbits, and the sweep
//! over the leg count.
//!
//! Work happens in the normalized coordinates `(X, ŷ)` of the rectangle
//! `D_k`, where `ŷ = y·λ^k`. A point of `D_k` spends `k` steps in `V`, exits
//! at height `ŷ ∈ [y₁, y₂]`, and after the transit returns to
//!
//! ```text
//! X' = x_q − s(ŷ − y_c),    ŷ' = X/s + A·λ^k·cos(πN(X' − x_q)/(2a)).
//! ```
//!
//! On leg `j` write `X' = x_q + 2a(j − ⌊N/2⌋ + u/π)/N` with `u ∈ [0, π]`; the
//! cosine becomes `σ_j cos u`. The derivative of the return map is
//! `[[0, −s], [1/s, M]]` with `M = (AπN/2a)·s·λ^k·σ_j·sin u`, independent of
//! `j` except for the sign, which is what lets two certificates cover every
//! leg and keeps the arithmetic exact in `N` far beyond `f64` phase accuracy.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::interval::Interval;
use super::{return_time, SnakeModel, SnakeParams, K6, TRANSIT_SHIFT, TRANSIT_TIME};
use crate::entropy::shift_entropy;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, ScaledMat2, Vec2};
use crate::maps::{OrbitSegment, PhasePoint, PhaseTopology, PlanarMap};
use crate::measures::{empirical_measure, weak_star_distance, AtomicMeasure, TestFunctionFamily};
use crate::report::sig12;

/// Leg counts up to this size also get an explicit transition matrix.
const MATRIX_LIMIT: u128 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegCertificate {
    /// Sign `σ` of the snake at the start of the legs covered.
    pub sigma: f64,
    /// The image of every horizontal strip runs from below `y₁` to above `y₂`.
    pub crossing: bool,
    /// Upper bound on `|cos u|` over the part of a leg inside `D_k`; below 1
    /// the strips stay off the leg ends and are pairwise disjoint.
    pub cos_bound: f64,
    pub sin_lower: f64,
    /// Lower bound on `|M|`.
    pub slope_lower: f64,
    /// `|M| ≥ s + 1/s`: the cone `|dX| ≤ |dŷ|` is mapped into itself.
    pub cone: bool,
    /// The reinjected window covers `D^s`.
    pub cover: bool,
}

impl LegCertificate {
    pub fn certified(&self) -> bool {
        self.crossing && self.cos_bound < 1.0 && self.cone && self.cover
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transitions {
    FullShift,
    Partial {
        certified_legs: u128,
        matrix: Option<Vec<Vec<u8>>>,
        spectral_radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorseshoeCoding {
    pub legs: u128,
    pub depth: u32,
    pub return_time: u32,
    /// `D_t` in model coordinates.
    pub stable_side: [f64; 2],
    pub unstable_side: [f64; 2],
    pub certificates: Vec<LegCertificate>,
    pub transitions: Transitions,
    pub entropy: f64,
}

impl HorseshoeCoding {
    pub fn is_full_shift(&self) -> bool {
        self.transitions == Transitions::FullShift
    }

    /// `h > χ(p) − 1/n`.
    pub fn meets_entropy_floor(&self, chi_p: f64, quality: u32) -> bool {
        self.entropy > chi_p - 1.0 / quality as f64
    }
}

/// Codes the horseshoe at the depth given by [`return_time`].
pub fn code_horseshoe(model: &SnakeModel) -> Result<HorseshoeCoding> {
    let rt = return_time(model)?;
    code_horseshoe_with_depth(model, rt.depth)
}

fn certify(model: &SnakeModel, depth: u32, sigma: f64) -> Result<LegCertificate> {
    let one = Interval::point(1.0);
    let s = Interval::point(model.s);
    let lam_k = Interval::point(model.lambda()).powi(depth);
    let amp = Interval::point(model.amplitude()) * lam_k;
    let [x_lo, x_hi] = model.stable_side();
    let [y1, y2] = model.unstable_window();
    let side = Interval::new(x_lo, x_hi);
    let window = Interval::new(y1, y2);
    let degenerate = || Error::Construction("snake amplitude must be positive".into());
    let xi = side.div(&(s * amp)).ok_or_else(degenerate)?;
    let eta = window.div(&amp).ok_or_else(degenerate)?;

    // end values of ξ + σ cos u at u = 0 and u = π
    let (high, low) = if sigma > 0.0 { (xi + one, xi - one) } else { (xi - one, xi + one) };
    let (top, bottom) = if high.lo >= low.lo { (high, low) } else { (low, high) };
    let crossing = top.lo > eta.hi && bottom.hi < eta.lo;

    let cos_bound = (eta - xi).mag();
    let sin_lower = if cos_bound < 1.0 {
        let c = Interval::point(cos_bound);
        (one - c * c).sqrt().map_or(0.0, |v| v.lo)
    } else {
        0.0
    };
    let slope = Interval::point(model.snake_slope()) * s * lam_k * sin_lower;
    let cone = slope.lo >= (s + s.recip().ok_or_else(degenerate)?).hi;

    let reinjected = Interval::point(model.x_q) - s * (window - Interval::point(model.y_c));
    let cover = reinjected.contains_interval(&side);

    Ok(LegCertificate {
        sigma,
        crossing,
        cos_bound,
        sin_lower,
        slope_lower: slope.lo,
        cone,
        cover,
    })
}

/// Certifies the horseshoe of `D_k` for a prescribed depth `k`.
///
/// A depth shallower than the one from [`return_time`] generally fails the
/// crossing check; the coding then carries a partial transition structure
/// and its entropy comes from the spectral radius.
pub fn code_horseshoe_with_depth(model: &SnakeModel, depth: u32) -> Result<HorseshoeCoding> {
    let certificates = vec![certify(model, depth, 1.0)?, certify(model, depth, -1.0)?];
    let legs = model.legs();
    let t = depth + TRANSIT_TIME;
    let ok = |sigma: f64| {
        certificates
            .iter()
            .any(|c| c.sigma == sigma && c.certified())
    };
    let leg_ok = |j: u128| ok(model.leg_sign(j));
    let (transitions, entropy) = if ok(1.0) && ok(-1.0) {
        (Transitions::FullShift, shift_entropy(legs, t as usize)?)
    } else {
        // legs of one sign start at crests, the other at troughs; there are
        // ⌈N/2⌉ of the sign of leg 0 and ⌊N/2⌋ of the other
        let first = legs.div_ceil(2);
        let certified_legs = match (leg_ok(0), leg_ok(1)) {
            (true, true) => legs,
            (true, false) => first,
            (false, true) => legs - first,
            (false, false) => 0,
        };
        let matrix = (legs <= MATRIX_LIMIT).then(|| {
            (0..legs)
                .map(|i| (0..legs).map(|j| u8::from(leg_ok(i) && leg_ok(j))).collect())
                .collect::<Vec<Vec<u8>>>()
        });
        let radius = match &matrix {
            Some(m) => spectral_radius(m),
            None => certified_legs as f64,
        };
        let entropy = if radius >= 1.0 { radius.ln() / t as f64 } else { 0.0 };
        (
            Transitions::Partial {
                certified_legs,
                matrix,
                spectral_radius: radius,
            },
            entropy,
        )
    };
    let [y1, y2] = model.unstable_window();
    let contraction = model.lambda().powi(-(depth as i32));
    Ok(HorseshoeCoding {
        legs,
        depth,
        return_time: t,
        stable_side: model.stable_side(),
        unstable_side: [y1 * contraction, y2 * contraction],
        certificates,
        transitions,
        entropy,
    })
}

/// Spectral radius of a nonnegative matrix by power iteration from the
/// all-ones vector.
pub fn spectral_radius(m: &[Vec<u8>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0_f64; n];
    let mut radius = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = m
            .iter()
            .map(|row| row.iter().zip(&v).map(|(&a, x)| a as f64 * x).sum())
            .collect();
        let norm = w.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let prev = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm / prev;
        let settled = (next - radius).abs() <= 1e-15 * next;
        radius = next;
        v = w.iter().map(|x| x / norm).collect();
        if settled {
            break;
        }
    }
    radius
}

/// Gain `C` of the transit into the unstable direction: the least
/// `|(DΘ·DR·e_u)_y|` over the part of a leg inside `D_k`.
///
/// The reinjection lays the unstable direction along the stable axis, so only
/// the shear of the snake turns it back; `C = s·(AπN/2a)·sin u` is measured on
/// a grid of leg phases `u` with `|cos u|` within the certified bound.
pub fn transit_gain(model: &SnakeModel, coding: &HorseshoeCoding) -> f64 {
    let dr = Mat2::new(0.0, -model.s, 1.0 / model.s, 0.0);
    let bound = coding
        .certificates
        .iter()
        .map(|c| c.cos_bound)
        .fold(0.0_f64, f64::max)
        .min(1.0);
    let lo = bound.acos();
    (0..=200)
        .map(|i| {
            let u = lo + (PI - 2.0 * lo) * i as f64 / 200.0;
            let shear = Mat2::new(1.0, 0.0, -model.snake_slope() * u.sin(), 1.0);
            (shear * dr).apply(Vec2::new(0.0, 1.0)).0[1].abs()
        })
        .fold(f64::INFINITY, f64::min)
}

/// A periodic orbit of the return map, coded by the legs it visits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodedOrbit {
    pub word: Vec<u128>,
    /// Leg phase `u_i` of the `i`-th return.
    pub phases: Vec<f64>,
    /// Points of `D_k` at which the returns start, in model coordinates.
    pub points: Vec<PhasePoint>,
    /// `χ(q, g)`, from the derivative along one period of `g`.
    pub chi: f64,
    /// Exponent floor `(log(C·K₆) + k·log λ)/t` from the cone estimate, with
    /// `C` from [`transit_gain`].
    pub cone_floor: f64,
}

/// Solves for the periodic point of the return map with itinerary `word`.
///
/// Writing `X_{i+1}` for the point of leg `w_i` at phase `u_i`, periodicity
/// reads `σ_{w_i} cos u_i = (y_c − (X_{i+2} − x_q)/s − X_i/s)/(Aλ^k)`, whose
/// right side depends on the phases only through the `2a/N`-scaled leg
/// positions; fixed-point iteration converges immediately.
pub fn solve_coded_orbit(model: &SnakeModel, coding: &HorseshoeCoding, word: &[u128]) -> Result<CodedOrbit> {
    let l = word.len();
    if l == 0 {
        return Err(Error::Parameter("empty itinerary".into()));
    }
    if let Some(&bad) = word.iter().find(|&&j| j >= model.legs()) {
        return Err(Error::Parameter(format!("symbol {bad} exceeds the leg count")));
    }
    let k = coding.depth;
    let lam_k = model.lambda().powi(k as i32);
    let amp = model.amplitude() * lam_k;
    let (s, x_q, y_c) = (model.s, model.x_q, model.y_c);
    let mut u = vec![PI / 2.0; l];
    let mut converged = false;
    for _ in 0..200 {
        let xs: Vec<f64> = (0..l).map(|i| model.leg_x(word[i], u[i])).collect();
        let mut change = 0.0_f64;
        for i in 0..l {
            let prev = xs[(i + l - 1) % l];
            let next = xs[(i + 1) % l];
            let c = model.leg_sign(word[i]) * (y_c - (next - x_q) / s - prev / s) / amp;
            if !(c.abs() < 1.0) {
                return Err(Error::Contract(format!(
                    "itinerary {word:?} has no periodic point: cos u = {c}"
                )));
            }
            let next_u = c.acos();
            change = change.max((next_u - u[i]).abs());
            u[i] = next_u;
        }
        if change <= 4.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Contract(format!("itinerary {word:?}: phase iteration did not settle")));
    }
    let xs: Vec<f64> = (0..l).map(|i| model.leg_x(word[i], u[i])).collect();
    let [x_lo, x_hi] = coding.stable_side;
    let [y1, y2] = model.unstable_window();
    let contraction = 1.0 / lam_k;
    let mut points = Vec::with_capacity(l);
    for i in 0..l {
        let x = xs[(i + l - 1) % l];
        let y_hat = y_c - (xs[i] - x_q) / s;
        let slack = 1e-12 * (1.0 + x.abs());
        if x < x_lo - slack || x > x_hi + slack || y_hat < y1 || y_hat > y2 {
            return Err(Error::Contract(format!("itinerary {word:?} leaves D_k")));
        }
        points.push(PhasePoint::new(x, y_hat * contraction));
    }
    let slope = model.snake_slope() * s * lam_k;
    let mut product = ScaledMat2::identity();
    for i in 0..l {
        let m = slope * model.leg_sign(word[i]) * u[i].sin();
        product.push(&Mat2::new(0.0, -s, 1.0 / s, m));
    }
    let t = coding.return_time as f64;
    let chi = product.log_spectral_radius() / (t * l as f64);
    let cone_floor = ((transit_gain(model, coding) * K6).ln() + k as f64 * model.lambda().ln()) / t;
    Ok(CodedOrbit {
        word: word.to_vec(),
        phases: u,
        points,
        chi,
        cone_floor,
    })
}

/// One period of the orbit under `g`, built from the closed form of each
/// piece: `k` steps in `V`, then the exit box and the two transit boxes.
pub fn coded_orbit_segment(model: &SnakeModel, coding: &HorseshoeCoding, orbit: &CodedOrbit) -> OrbitSegment {
    let k = coding.depth as i32;
    let lam = model.lambda();
    let mut points = Vec::with_capacity(orbit.points.len() * coding.return_time as usize);
    for p in &orbit.points {
        let y_hat = p.y() * lam.powi(k);
        for r in 0..k {
            points.push(PhasePoint::new(p.x() * lam.powi(-r), y_hat * lam.powi(r - k)));
        }
        let exit_x = p.x() * lam.powi(-k);
        for i in 0..TRANSIT_TIME {
            points.push(PhasePoint::new(exit_x + TRANSIT_SHIFT * i as f64, y_hat));
        }
    }
    OrbitSegment {
        points,
        map: model.spec(),
        topology: PhaseTopology::Plane,
    }
}

/// Fraction of the points of `orbit` within distance `zeta` of `center`.
pub fn visit_frequency(orbit: &OrbitSegment, center: PhasePoint, zeta: f64) -> Result<f64> {
    if orbit.is_empty() {
        return Err(Error::Parameter("empty orbit".into()));
    }
    if !(zeta > 0.0) {
        return Err(Error::Parameter("zeta must be > 0".into()));
    }
    let inside = orbit
        .points
        .iter()
        .filter(|&&p| orbit.topology.distance(p, center) < zeta)
        .count();
    Ok(inside as f64 / orbit.len() as f64)
}

/// `ρ(μ_q, δ_p)` for the periodic measure of a coded orbit and the saddle.
pub fn rho_to_saddle(
    model: &SnakeModel,
    coding: &HorseshoeCoding,
    orbit: &CodedOrbit,
    family: &TestFunctionFamily,
) -> Result<f64> {
    let mu = empirical_measure(&coded_orbit_segment(model, coding, orbit))?;
    let dirac = AtomicMeasure::dirac(PhasePoint::new(0.0, 0.0), PhaseTopology::Plane)?;
    weak_star_distance(&mu, &dirac, family)
}

/// Itineraries of length `1..=max_len` that are least among their rotations
/// and not powers of shorter words. The alphabet is every leg when `N ≤ 8`,
/// and otherwise the five legs `{0, 1, ⌊N/2⌋, N−2, N−1}`, which include both
/// ends of `D^s` and the middle.
pub fn enumerate_words(legs: u128, max_len: usize) -> Vec<Vec<u128>> {
    let mut alphabet: Vec<u128> = if legs <= 8 {
        (0..legs).collect()
    } else {
        vec![0, 1, legs / 2, legs - 2, legs - 1]
    };
    alphabet.sort_unstable();
    alphabet.dedup();
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<u128>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &c in &alphabet {
                let mut v = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        for w in &next {
            let n = w.len();
            let least = (1..n).all(|r| {
                let rotated = w[r..].iter().chain(&w[..r]);
                w.iter().lt(rotated)
            });
            if least {
                out.push(w.clone());
            }
        }
        frontier = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorReport {
    pub chi_p: f64,
    /// `χ(p) − 1/n`.
    pub floor: f64,
    pub orbits: Vec<CodedOrbit>,
    /// Itineraries whose periodic point could not be solved, with the reason.
    pub failures: Vec<(Vec<u128>, String)>,
    pub min_chi: Option<f64>,
    pub violations: usize,
    pub passed: bool,
}

/// Exponents of the coded periodic orbits of itinerary length up to 4 against
/// the floor `χ(p) − 1/n`.
pub fn periodic_exponent_floor(coding: &HorseshoeCoding, model: &SnakeModel, quality: u32) -> Result<FloorReport> {
    if quality == 0 {
        return Err(Error::Parameter("quality index must be >= 1".into()));
    }
    let chi_p = model.chi_p();
    let floor = chi_p - 1.0 / quality as f64;
    let words = if coding.is_full_shift() {
        enumerate_words(coding.legs, 4)
    } else {
        Vec::new()
    };
    let solved: Vec<(Vec<u128>, Result<CodedOrbit>)> = words
        .into_par_iter()
        .map(|w| {
            let r = solve_coded_orbit(model, coding, &w);
            (w, r)
        })
        .collect();
    let mut orbits = Vec::new();
    let mut failures = Vec::new();
    for (w, r) in solved {
        match r {
            Ok(o) => orbits.push(o),
            Err(e) => failures.push((w, e.to_string())),
        }
    }
    let min_chi = orbits.iter().map(|o| o.chi).reduce(f64::min);
    let violations = orbits.iter().filter(|o| !(o.chi > floor)).count();
    let passed = !orbits.is_empty() && failures.is_empty() && violations == 0;
    Ok(FloorReport {
        chi_p,
        floor,
        orbits,
        failures,
        min_chi,
        violations,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub lambda: f64,
    pub a: f64,
    pub delta: f64,
    pub quality: u32,
    /// Leg counts in increasing order.
    pub legs: Vec<u128>,
}

impl SweepConfig {
    /// `λ = 2, a = 0.1, δ = 0.05, n = 10`, `N = 4, 8, …, 2^120`.
    pub fn standard() -> Self {
        SweepConfig {
            lambda: 2.0,
            a: 0.1,
            delta: 0.05,
            quality: 10,
            legs: powers_of_two(2, 120),
        }
    }
}

/// `2^lo, …, 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<u128> {
    (lo..=hi.min(127)).map(|e| 1u128 << e).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub legs: u128,
    pub amplitude: f64,
    pub t: u32,
    pub certified: bool,
    pub coded_entropy: f64,
    pub chi_p: f64,
    /// Least exponent over the coded orbits; NaN when none were solved.
    pub min_chi_q: f64,
    /// Largest `ρ(μ_q, δ_p)` over the coded orbits; NaN when none.
    pub rho_to_mu_p: f64,
    pub k1: f64,
    pub orbits: usize,
    pub floor_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// First leg count whose certified coded entropy exceeds `χ(p) − 1/n`.
    pub n1: Option<u128>,
    /// First leg count with every coded orbit measure within `1/n` of `δ_p`.
    pub n2: Option<u128>,
    /// First leg count with every coded exponent above `χ(p) − 1/n`.
    pub n3: Option<u128>,
    pub accepted: Option<u128>,
}

impl SweepReport {
    pub fn accepted_row(&self) -> Option<&SweepRow> {
        self.accepted
            .and_then(|n| self.rows.iter().find(|r| r.legs == n))
    }

    /// Entropy, exponent and measure checks at the accepted leg count.
    pub fn passed(&self) -> bool {
        let tol = 1.0 / self.config.quality as f64;
        match self.accepted_row() {
            Some(r) => {
                r.certified
                    && r.coded_entropy > r.chi_p - tol
                    && r.floor_passed
                    && r.min_chi_q > r.chi_p - tol
                    && r.rho_to_mu_p < tol
            }
            None => false,
        }
    }

    /// `max K₁ / min K₁` over the rows.
    pub fn k1_spread(&self) -> f64 {
        let hi = self.rows.iter().map(|r| r.k1).fold(f64::NEG_INFINITY, f64::max);
        let lo = self.rows.iter().map(|r| r.k1).fold(f64::INFINITY, f64::min);
        hi / lo
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,A,t,coded_entropy,chi_p,min_chi_q,rho_to_mu_p,K1_fit\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.legs,
                sig12(r.amplitude),
                r.t,
                sig12(r.coded_entropy),
                sig12(r.chi_p),
                sig12(r.min_chi_q),
                sig12(r.rho_to_mu_p),
                sig12(r.k1)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            lambda: f64,
            a: f64,
            delta: f64,
            quality: u32,
            n1: Option<String>,
            n2: Option<String>,
            n3: Option<String>,
            accepted: Option<String>,
            rows: usize,
            k1_spread: String,
            accepted_row: Option<RowSummary<'a>>,
            passed: bool,
        }
        #[derive(Serialize)]
        struct RowSummary<'a> {
            row: &'a SweepRow,
            coded_entropy: String,
            min_chi_q: String,
            rho_to_mu_p: String,
        }
        let summary = Summary {
            lambda: self.config.lambda,
            a: self.config.a,
            delta: self.config.delta,
            quality: self.config.quality,
            n1: self.n1.map(|n| n.to_string()),
            n2: self.n2.map(|n| n.to_string()),
            n3: self.n3.map(|n| n.to_string()),
            accepted: self.accepted.map(|n| n.to_string()),
            rows: self.rows.len(),
            k1_spread: sig12(self.k1_spread()),
            accepted_row: self.accepted_row().map(|row| RowSummary {
                row,
                coded_entropy: sig12(row.coded_entropy),
                min_chi_q: sig12(row.min_chi_q),
                rho_to_mu_p: sig12(row.rho_to_mu_p),
            }),
            passed: self.passed(),
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

fn sweep_row(cfg: &SweepConfig, legs: u128, family: &TestFunctionFamily) -> Result<SweepRow> {
    let model = SnakeModel::new(SnakeParams {
        lambda: cfg.lambda,
        a: cfg.a,
        delta: cfg.delta,
        legs,
        quality: cfg.quality,
    })?;
    let rt = return_time(&model)?;
    let coding = code_horseshoe_with_depth(&model, rt.depth)?;
    let floor = periodic_exponent_floor(&coding, &model, cfg.quality)?;
    let rhos = floor
        .orbits
        .par_iter()
        .map(|o| rho_to_saddle(&model, &coding, o, family))
        .collect::<Result<Vec<f64>>>()?;
    let rho = if rhos.is_empty() {
        f64::NAN
    } else {
        rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(SweepRow {
        legs,
        amplitude: model.amplitude(),
        t: rt.t,
        certified: coding.is_full_shift(),
        coded_entropy: coding.entropy,
        chi_p: model.chi_p(),
        min_chi_q: floor.min_chi.unwrap_or(f64::NAN),
        rho_to_mu_p: rho,
        k1: rt.k1,
        orbits: floor.orbits.len(),
        floor_passed: floor.passed,
    })
}

/// Walks the leg counts upward, recording where the entropy, exponent and
/// measure conditions are first met, and stops once all three are.
pub fn snake_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.legs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("sweep leg counts must increase".into()));
    }
    let family = TestFunctionFamily::standard(PhaseTopology::Plane);
    let tol = 1.0 / cfg.quality.max(1) as f64;
    let mut report = SweepReport {
        config: cfg.clone(),
        rows: Vec::new(),
        n1: None,
        n2: None,
        n3: None,
        accepted: None,
    };
    for &legs in &cfg.legs {
        let row = sweep_row(cfg, legs, &family)?;
        let floor = row.chi_p - tol;
        if report.n1.is_none() && row.certified && row.coded_entropy > floor {
            report.n1 = Some(legs);
        }
        if report.n2.is_none() && row.orbits > 0 && row.rho_to_mu_p < tol {
            report.n2 = Some(legs);
        }
        if report.n3.is_none() && row.floor_passed && row.min_chi_q > floor {
            report.n3 = Some(legs);
        }
        report.rows.push(row);
        if let (Some(a), Some(b), Some(c)) = (report.n1, report.n2, report.n3) {
            report.accepted = Some(a.max(b).max(c));
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horseshoe::build_snake;

    #[test]
    fn two_leg_matrix_radius() {
        assert!((spectral_radius(&[vec![1, 1], vec![1, 1]]) - 2.0).abs() < 1e-15);
        assert_eq!(spectral_radius(&[vec![0, 0], vec![0, 0]]), 0.0);
        assert!((spectral_radius(&[vec![0, 1], vec![1, 0]]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn words_are_lyndon() {
        let w = enumerate_words(2, 4);
        // binary Lyndon words of length 1..4: 2 + 1 + 2 + 3
        assert_eq!(w.len(), 8);
        assert!(w.contains(&vec![0, 0, 1, 1]));
        assert!(!w.contains(&vec![0, 1, 0, 1]));
        assert_eq!(enumerate_words(1 << 40, 1).len(), 5);
    }

    #[test]
    fn full_shift_at_return_depth() {
        let m = build_snake(2.0, 0.1, 0.05, 4).unwrap();
        let c = code_horseshoe(&m).unwrap();
        assert!(c.is_full_shift());
        assert_eq!(c.entropy, 4f64.ln() / c.return_time as f64);
    }

    #[test]
    fn shallow_depth_is_partial() {
        let m = build_snake(2.0, 0.1, 0.05, 4).unwrap();
        let c = code_horseshoe_with_depth(&m, 3).unwrap();
        match c.transitions {
            Transitions::Partial { certified_legs, .. } => assert_eq!(certified_legs, 0),
            other => panic!("expected partial coding, got {other:?}"),
        }
        assert_eq!(c.entropy, 0.0);
    }

    #[test]
    fn visit_frequency_extremes() {
        let seg = OrbitSegment {
            points: vec![PhasePoint::new(0.0, 0.0); 5],
            map: "identity".into(),
            topology: PhaseTopology::Plane,
        };
        assert_eq!(visit_frequency(&seg, PhasePoint::new(0.0, 0.0), 0.1).unwrap(), 1.0);
        assert_eq!(visit_frequency(&seg, PhasePoint::new(5.0, 0.0), 0.1).unwrap(), 0.0);
        assert!(visit_frequency(&seg, PhasePoint::new(0.0, 0.0), 0.0).is_err());
    }
}
