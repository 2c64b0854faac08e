//! Atomic measures, the weak-* distance `ρ` and entropies of shift measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{OrbitSegment, PhasePoint, PhaseTopology, PlanarMap};
use crate::periodic::PeriodicOrbit;

/// Atoms closer than this are merged.
pub const MERGE_RADIUS: f64 = 1e-12;

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<PhasePoint>,
    weights: Vec<f64>,
    topology: PhaseTopology,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    atoms: Vec<[f64; 2]>,
    weights: Vec<f64>,
    topology: String,
}

impl AtomicMeasure {
    /// Validates the weights, wraps the atoms and merges near-duplicates.
    pub fn new(atoms: Vec<PhasePoint>, weights: Vec<f64>, topology: PhaseTopology) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::Parameter(format!(
                "{} atoms with {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Parameter("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("weights sum to {total}, not 1")));
        }
        let mut merged_atoms: Vec<PhasePoint> = Vec::with_capacity(atoms.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (a, w) in atoms.into_iter().zip(weights) {
            let a = topology.wrap(a)?;
            match merged_atoms
                .iter()
                .position(|b| topology.distance(a, *b) < MERGE_RADIUS)
            {
                Some(k) => merged_weights[k] += w,
                None => {
                    merged_atoms.push(a);
                    merged_weights.push(w);
                }
            }
        }
        Ok(AtomicMeasure {
            atoms: merged_atoms,
            weights: merged_weights,
            topology,
        })
    }

    /// Uniform weights on `points`.
    pub fn uniform(points: &[PhasePoint], topology: PhaseTopology) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("empty point list".into()));
        }
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        // the sum of n copies of 1/n may miss 1 by a few ulps
        let total: f64 = weights.iter().sum();
        let weights = weights.iter().map(|v| v / total).collect();
        Self::new(points.to_vec(), weights, topology)
    }

    pub fn dirac(p: PhasePoint, topology: PhaseTopology) -> Result<Self> {
        Self::new(vec![p], vec![1.0], topology)
    }

    pub fn atoms(&self) -> &[PhasePoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn topology(&self) -> PhaseTopology {
        self.topology
    }

    pub fn integrate(&self, f: impl Fn(PhasePoint) -> f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * f(*a))
            .sum()
    }

    /// Weight the measure gives to `B_zeta(center)`.
    pub fn ball_mass(&self, center: PhasePoint, zeta: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| self.topology.distance(**a, center) < zeta)
            .map(|(_, w)| w)
            .sum()
    }

    /// `f_*μ`.
    pub fn pushforward(&self, map: &dyn PlanarMap) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| map.forward(*a))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms, self.weights.clone(), self.topology)
    }

    pub fn to_json(&self) -> String {
        let doc = MeasureJson {
            atoms: self.atoms.iter().map(|a| a.0).collect(),
            weights: self.weights.clone(),
            topology: self.topology.name().to_string(),
        };
        serde_json::to_string(&doc).expect("measure serializes")
    }

    /// Parses the JSON form. Torus and cylinder periods are supplied by
    /// `topology`, whose name must match the document.
    pub fn from_json(s: &str, topology: PhaseTopology) -> Result<Self> {
        let doc: MeasureJson =
            serde_json::from_str(s).map_err(|e| Error::Parameter(format!("bad measure JSON: {e}")))?;
        if doc.topology != topology.name() {
            return Err(Error::Domain(format!(
                "measure topology {} does not match {}",
                doc.topology,
                topology.name()
            )));
        }
        Self::new(doc.atoms.into_iter().map(PhasePoint).collect(), doc.weights, topology)
    }
}

/// One factor of a product test function.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Basis1d {
    /// `1, cos(2πx/P), sin(2πx/P), cos(4πx/P), …`
    Fourier { period: f64 },
    /// Chebyshev `T_m(tanh x)`.
    ChebyshevTanh,
    /// Chebyshev `T_m(z)` for `z ∈ (−1, 1)`.
    Chebyshev,
}

impl Basis1d {
    fn eval(&self, index: usize, v: f64) -> f64 {
        match *self {
            Basis1d::Fourier { period } => {
                if index == 0 {
                    return 1.0;
                }
                let f = index.div_ceil(2) as f64;
                let arg = std::f64::consts::TAU * f * v / period;
                if index % 2 == 1 {
                    arg.cos()
                } else {
                    arg.sin()
                }
            }
            Basis1d::ChebyshevTanh => chebyshev(index, v.tanh()),
            Basis1d::Chebyshev => chebyshev(index, v.clamp(-1.0, 1.0)),
        }
    }

    fn lipschitz(&self, index: usize) -> f64 {
        match *self {
            Basis1d::Fourier { period } => {
                std::f64::consts::TAU * index.div_ceil(2) as f64 / period
            }
            // |T_m'| ≤ m² on [−1, 1] and tanh is 1-Lipschitz
            Basis1d::ChebyshevTanh | Basis1d::Chebyshev => (index * index) as f64,
        }
    }
}

/// `T_m(c)` by the three-term recurrence.
fn chebyshev(m: usize, c: f64) -> f64 {
    let (mut a, mut b) = (1.0, c);
    if m == 0 {
        return a;
    }
    for _ in 1..m {
        let next = 2.0 * c * b - a;
        a = b;
        b = next;
    }
    b.clamp(-1.0, 1.0)
}

/// Product test functions `φ_k(x, y) = b_i(x)·b_j(y)` with weights `2^{-k}`.
///
/// Index pairs `(i, j) ∈ {0..=order}²` are enumerated by `max(i, j)`, then
/// lexicographically; `k` starts at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionFamily {
    topology: PhaseTopology,
    order: usize,
    basis: [Basis1d; 2],
    pairs: Vec<(usize, usize)>,
}

impl TestFunctionFamily {
    pub fn new(topology: PhaseTopology, order: usize) -> Self {
        let basis = match topology {
            PhaseTopology::Torus2 { period } => [Basis1d::Fourier { period }, Basis1d::Fourier { period }],
            PhaseTopology::Cylinder { period } => [Basis1d::Fourier { period }, Basis1d::ChebyshevTanh],
            PhaseTopology::SphereChart => [
                Basis1d::Fourier {
                    period: std::f64::consts::TAU,
                },
                Basis1d::Chebyshev,
            ],
            PhaseTopology::Plane => [Basis1d::ChebyshevTanh, Basis1d::ChebyshevTanh],
        };
        let mut pairs: Vec<(usize, usize)> = (0..=order)
            .flat_map(|i| (0..=order).map(move |j| (i, j)))
            .collect();
        pairs.sort_by_key(|&(i, j)| (i.max(j), i, j));
        TestFunctionFamily {
            topology,
            order,
            basis,
            pairs,
        }
    }

    /// Order 8: 81 functions.
    pub fn standard(topology: PhaseTopology) -> Self {
        Self::new(topology, 8)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn topology(&self) -> PhaseTopology {
        self.topology
    }

    /// `(i, j)` for `φ_k`, `k ≥ 1`.
    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k - 1]
    }

    pub fn weight(k: usize) -> f64 {
        0.5_f64.powi(k as i32)
    }

    pub fn eval(&self, k: usize, p: PhasePoint) -> f64 {
        let (i, j) = self.pair(k);
        self.basis[0].eval(i, p.0[0]) * self.basis[1].eval(j, p.0[1])
    }

    /// Lipschitz constant of `φ_k` in the sup-of-coordinates sense.
    pub fn lipschitz(&self, k: usize) -> f64 {
        let (i, j) = self.pair(k);
        self.basis[0].lipschitz(i) + self.basis[1].lipschitz(j)
    }

    /// `∫φ_k dμ` for `k = 1..=len`.
    pub fn moments(&self, mu: &AtomicMeasure) -> Vec<f64> {
        (1..=self.len())
            .map(|k| mu.integrate(|p| self.eval(k, p)))
            .collect()
    }
}

/// `ρ(μ, ν) = Σ_k 2^{-k}·|∫φ_k dμ − ∫φ_k dν|`.
pub fn weak_star_distance(mu: &AtomicMeasure, nu: &AtomicMeasure, family: &TestFunctionFamily) -> Result<f64> {
    if mu.topology != nu.topology || mu.topology != family.topology {
        return Err(Error::Domain(format!(
            "topology mismatch: {} vs {} (family {})",
            mu.topology.name(),
            nu.topology.name(),
            family.topology.name()
        )));
    }
    let a = family.moments(mu);
    let b = family.moments(nu);
    Ok(a.iter()
        .zip(&b)
        .enumerate()
        .map(|(k, (x, y))| TestFunctionFamily::weight(k + 1) * (x - y).abs())
        .sum())
}

/// `μ_p`, uniform on the orbit.
pub fn periodic_measure(orbit: &PeriodicOrbit, topology: PhaseTopology) -> Result<AtomicMeasure> {
    AtomicMeasure::uniform(&orbit.points, topology)
}

/// Uniform measure on the points of a segment.
pub fn empirical_measure(segment: &OrbitSegment) -> Result<AtomicMeasure> {
    AtomicMeasure::uniform(&segment.points, segment.topology)
}

/// Invariant measure of a shift on `N` symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftMeasure {
    Bernoulli { p: Vec<f64> },
    Markov { pi: Vec<f64>, transition: Vec<Vec<f64>> },
}

fn check_simplex(p: &[f64], what: &str) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::Parameter(format!("{what}: need at least 2 symbols")));
    }
    if p.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Parameter(format!("{what}: negative probability")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("{what}: probabilities sum to {s}")));
    }
    Ok(())
}

impl ShiftMeasure {
    pub fn bernoulli(p: Vec<f64>) -> Result<Self> {
        check_simplex(&p, "bernoulli")?;
        Ok(ShiftMeasure::Bernoulli { p })
    }

    pub fn uniform(symbols: usize) -> Result<Self> {
        Self::bernoulli(vec![1.0 / symbols as f64; symbols])
    }

    /// Validates the transition rows and `πP = π`.
    pub fn markov(pi: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        check_simplex(&pi, "stationary vector")?;
        if transition.len() != pi.len() {
            return Err(Error::Parameter("transition matrix size mismatch".into()));
        }
        for row in &transition {
            if row.len() != pi.len() {
                return Err(Error::Parameter("transition matrix is not square".into()));
            }
            check_simplex(row, "transition row")?;
        }
        for j in 0..pi.len() {
            let v: f64 = (0..pi.len()).map(|i| pi[i] * transition[i][j]).sum();
            if (v - pi[j]).abs() > 1e-12 {
                return Err(Error::Parameter(format!(
                    "pi is not stationary: (πP)_{j} = {v}, π_{j} = {}",
                    pi[j]
                )));
            }
        }
        Ok(ShiftMeasure::Markov { pi, transition })
    }

    pub fn symbols(&self) -> usize {
        match self {
            ShiftMeasure::Bernoulli { p } => p.len(),
            ShiftMeasure::Markov { pi, .. } => pi.len(),
        }
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Metric entropy of the shift measure per step of a system that takes `t`
/// steps per symbol.
pub fn shift_metric_entropy(m: &ShiftMeasure, t: usize) -> Result<f64> {
    if t < 1 {
        return Err(Error::Parameter("return time must be >= 1".into()));
    }
    let h = match m {
        ShiftMeasure::Bernoulli { p } => -p.iter().map(|&v| plogp(v)).sum::<f64>(),
        ShiftMeasure::Markov { pi, transition } => -pi
            .iter()
            .zip(transition)
            .map(|(w, row)| w * row.iter().map(|&v| plogp(v)).sum::<f64>())
            .sum::<f64>(),
    };
    Ok(h / t as f64)
}
