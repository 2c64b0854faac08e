//! Topological entropy from Bowen's `(n, ε)`-separated orbit counts, exact
//! entropies of coded systems, and the bound check against periodic data.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{PhasePoint, PhaseTopology, PlanarMap, Rect};
use crate::periodic::{max_positive_exponent_sum, s_n, ExponentBound, PeriodicCatalog};
use crate::report::sig12;
use crate::sampling::{halton_points, halton_unit};

/// How initial conditions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// Quasi-random points over the map's whole sample region.
    Global,
    /// `windows` squares of side `ratio·ε_min` (`ε_min` the smallest scale of
    /// the schedule), each holding `samples / windows` quasi-random points;
    /// the reported count is the largest over windows.
    Windows { windows: usize, ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySchedule {
    pub n_min: usize,
    pub n_max: usize,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub sampling: Sampling,
}

impl EntropySchedule {
    /// `n ∈ 6..=14`, `ε ∈ {0.1, 0.05, 0.025}`, 2·10⁵ samples split over
    /// [`DEFAULT_WINDOWS`] windows of side [`DEFAULT_WINDOW_RATIO`]`·ε_min`.
    pub fn standard(seed: u64) -> Self {
        EntropySchedule {
            n_min: 6,
            n_max: 14,
            eps: vec![0.1, 0.05, 0.025],
            samples: 200_000,
            seed,
            sampling: Sampling::Windows {
                windows: DEFAULT_WINDOWS,
                ratio: DEFAULT_WINDOW_RATIO,
            },
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_max < self.n_min {
            return Err(Error::Parameter(format!(
                "invalid n-range {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.n_max - self.n_min + 1 < 4 {
            return Err(Error::Parameter("n-range must contain at least 4 values".into()));
        }
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Parameter("eps list must be nonempty and positive".into()));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Parameter("eps list must be strictly decreasing".into()));
        }
        if self.samples == 0 {
            return Err(Error::Parameter("samples must be >= 1".into()));
        }
        if let Sampling::Windows { windows, ratio } = self.sampling {
            if windows == 0 || windows > self.samples || !(ratio > 0.0 && ratio <= 1.0) {
                return Err(Error::Parameter(format!(
                    "invalid window sampling ({windows} windows, side ratio {ratio})"
                )));
            }
        }
        Ok(())
    }
}

pub const DEFAULT_WINDOWS: usize = 1;
/// Window side as a fraction of the smallest `ε`.
pub const DEFAULT_WINDOW_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountEntry {
    pub n: usize,
    pub eps: f64,
    pub count: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedCountTable {
    pub map: String,
    pub seed: u64,
    pub sampling: Sampling,
    pub entries: Vec<CountEntry>,
}

impl SeparatedCountTable {
    pub fn get(&self, n: usize, eps: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.n == n && e.eps == eps)
            .map(|e| e.count)
    }

    /// Checks `count ≥ 1`, monotonicity in `n` and antitonicity in `ε`.
    pub fn check_monotone(&self) -> Result<()> {
        for e in &self.entries {
            if e.samples > 0 && e.count == 0 {
                return Err(Error::Contract(format!("empty count at n={}, eps={}", e.n, e.eps)));
            }
            for f in &self.entries {
                if f.n == e.n && f.eps < e.eps && f.count < e.count {
                    return Err(Error::Contract(format!(
                        "count not antitone in eps at n={}: {} at eps={} < {} at eps={}",
                        e.n, f.count, f.eps, e.count, e.eps
                    )));
                }
                if f.eps == e.eps && f.n == e.n + 1 && f.count < e.count {
                    return Err(Error::Contract(format!(
                        "count decreases from n={} to n={} at eps={}",
                        e.n, f.n, e.eps
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV with columns `n,eps,count,samples`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,eps,count,samples\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.n, sig12(e.eps), e.count, e.samples));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub eps: f64,
    pub slope: f64,
    /// Root-mean-square residual of `log count` about the fitted line.
    pub residual: f64,
    pub n_lo: usize,
    pub n_hi: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub slopes: Vec<SlopeFit>,
    pub warnings: Vec<String>,
    pub n_min: usize,
    pub n_max: usize,
    pub eps: Vec<f64>,
    pub table: SeparatedCountTable,
}

#[derive(Serialize)]
struct SlopeJson {
    eps: f64,
    slope: f64,
    residual: f64,
}

#[derive(Serialize)]
struct EstimateJson<'a> {
    value: f64,
    slopes: Vec<SlopeJson>,
    warnings: &'a [String],
}

impl EntropyEstimate {
    pub fn to_json(&self) -> String {
        let doc = EstimateJson {
            value: self.value,
            slopes: self
                .slopes
                .iter()
                .map(|s| SlopeJson {
                    eps: s.eps,
                    slope: s.slope,
                    residual: s.residual,
                })
                .collect(),
            warnings: &self.warnings,
        };
        serde_json::to_string_pretty(&doc).expect("estimate serializes")
    }
}

/// Largest RMS residual accepted for the linear regime.
pub const LINEAR_RESIDUAL: f64 = 0.05;
/// Counts above this fraction of the sample size at the largest `n` abort.
pub const SATURATION_FRACTION: f64 = 0.9;
/// Counts above this fraction produce a warning.
pub const SATURATION_WARNING: f64 = 0.5;

#[derive(Default)]
struct SplitMix(u64);

impl Hasher for SplitMix {
    fn finish(&self) -> u64 {
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(29);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct CellKey([i64; 4]);

impl std::hash::Hash for CellKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for v in self.0 {
            state.write_u64(v as u64);
        }
    }
}

/// Accepted orbit with copies of the coordinates checked first.
struct Member {
    index: u32,
    probe: [PhasePoint; 3],
}

type CellMap = HashMap<CellKey, Vec<Member>, BuildHasherDefault<SplitMix>>;

/// Cell geometry for one coordinate: `Some(c)` cells around a circle, or
/// unbounded cells along a line.
#[derive(Clone, Copy)]
struct Axis {
    cells: Option<i64>,
    size: f64,
}

impl Axis {
    fn new(period: Option<f64>, eps: f64) -> Self {
        match period {
            Some(p) => {
                let c = ((p / eps).floor() as i64).max(1);
                Axis {
                    cells: Some(c),
                    size: p / c as f64,
                }
            }
            None => Axis { cells: None, size: eps },
        }
    }

    fn cell(&self, v: f64) -> i64 {
        let i = (v / self.size).floor() as i64;
        match self.cells {
            Some(c) => i.rem_euclid(c),
            None => i,
        }
    }

    fn neighbours(&self, i: i64) -> Vec<i64> {
        match self.cells {
            Some(c) if c < 3 => (0..c).collect(),
            Some(c) => vec![(i - 1).rem_euclid(c), i, (i + 1).rem_euclid(c)],
            None => vec![i - 1, i, i + 1],
        }
    }
}

/// Precomputed orbits `x, f(x), …, f^{n_max}(x)` for a fixed sample list.
struct Orbits {
    topology: PhaseTopology,
    len: usize,
    data: Vec<PhasePoint>,
}

impl Orbits {
    fn compute(map: &dyn PlanarMap, starts: &[PhasePoint], n_max: usize) -> Result<Self> {
        let topology = map.topology();
        let rows: Vec<Result<Vec<PhasePoint>>> = starts
            .par_iter()
            .map(|&x0| {
                let mut row = Vec::with_capacity(n_max + 1);
                let mut cur = topology.wrap(x0)?;
                row.push(cur);
                for _ in 0..n_max {
                    cur = map.forward(cur)?;
                    row.push(cur);
                }
                Ok(row)
            })
            .collect();
        let mut data = Vec::with_capacity(starts.len() * (n_max + 1));
        for row in rows {
            data.extend(row?);
        }
        Ok(Orbits {
            topology,
            len: n_max + 1,
            data,
        })
    }

    fn count(&self) -> usize {
        self.data.len() / self.len
    }

    fn point(&self, i: usize, j: usize) -> PhasePoint {
        self.data[i * self.len + j]
    }

    /// True when `max_{0≤j≤n} d(fʲx_a, fʲx_b) ≤ eps`.
    fn bowen_close(&self, a: usize, b: usize, n: usize, eps: f64) -> bool {
        let eps2 = eps * eps;
        let ra = &self.data[a * self.len..a * self.len + n + 1];
        let rb = &self.data[b * self.len..b * self.len + n + 1];
        // endpoints first: most rejections of a conflict happen there
        for j in [n, 0].into_iter().chain(1..n) {
            let d = self.topology.displacement(ra[j], rb[j]);
            if d[0] * d[0] + d[1] * d[1] > eps2 {
                return false;
            }
        }
        true
    }
}

/// Greedy extension of `seed` (assumed `(n, ε)`-separated) to a maximal
/// `(n, ε)`-separated subset of the sample, scanning samples in index order.
fn greedy(orbits: &Orbits, n: usize, eps: f64, seed: &[u32]) -> Vec<u32> {
    let topology = orbits.topology;
    let periods = topology.periods();
    let axes = [Axis::new(periods[0], eps), Axis::new(periods[1], eps)];
    // Conflicting orbits are within ε at every time. The index uses the
    // middle and final times: samples drawn from a window smaller than ε
    // share their start cell, so early times do not discriminate.
    let slices = [n / 2, n, (3 * n) / 4];
    let eps2 = eps * eps;
    let key = |probe: &[PhasePoint; 3]| {
        CellKey([
            axes[0].cell(probe[0].0[0]),
            axes[1].cell(probe[0].0[1]),
            axes[0].cell(probe[1].0[0]),
            axes[1].cell(probe[1].0[1]),
        ])
    };
    let probe_of = |i: usize| slices.map(|j| orbits.point(i, j));
    let mut cells = CellMap::default();
    let mut accepted: Vec<u32> = Vec::with_capacity(seed.len() * 2 + 16);
    let mut taken = vec![false; orbits.count()];
    for &s in seed {
        let probe = probe_of(s as usize);
        cells.entry(key(&probe)).or_default().push(Member { index: s, probe });
        accepted.push(s);
        taken[s as usize] = true;
    }
    let close = |a: PhasePoint, b: PhasePoint| {
        let d = topology.displacement(a, b);
        d[0] * d[0] + d[1] * d[1] <= eps2
    };
    for i in 0..orbits.count() {
        if taken[i] {
            continue;
        }
        let probe = probe_of(i);
        let k = key(&probe);
        let nb: [Vec<i64>; 4] = std::array::from_fn(|c| axes[c % 2].neighbours(k.0[c]));
        let mut conflict = false;
        'search: for &a in &nb[0] {
            for &b in &nb[1] {
                for &c in &nb[2] {
                    for &d in &nb[3] {
                        let Some(members) = cells.get(&CellKey([a, b, c, d])) else {
                            continue;
                        };
                        for m in members {
                            if close(probe[0], m.probe[0])
                                && close(probe[1], m.probe[1])
                                && close(probe[2], m.probe[2])
                                && orbits.bowen_close(i, m.index as usize, n, eps)
                            {
                                conflict = true;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        if !conflict {
            cells.entry(k).or_default().push(Member { index: i as u32, probe });
            accepted.push(i as u32);
        }
    }
    accepted.sort_unstable();
    accepted
}

/// Size of a greedy maximal `(n, ε)`-separated set among `samples`
/// quasi-random points of the map's sample region.
pub fn count_separated(
    map: &dyn PlanarMap,
    n: usize,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    if n < 1 {
        return Err(Error::Parameter("orbit length n must be >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Parameter("eps must be > 0".into()));
    }
    if samples == 0 {
        return Err(Error::Parameter("samples must be >= 1".into()));
    }
    let starts = halton_points(&map.sample_region(), samples, seed);
    let orbits = Orbits::compute(map, &starts, n)?;
    Ok(greedy(&orbits, n, eps, &[]).len())
}

/// Sample sets for a schedule: one for global sampling, one per window.
fn sample_sets(map: &dyn PlanarMap, schedule: &EntropySchedule) -> Vec<Vec<PhasePoint>> {
    let region = map.sample_region();
    match schedule.sampling {
        Sampling::Global => vec![halton_points(&region, schedule.samples, schedule.seed)],
        Sampling::Windows { windows, ratio } => {
            let side = ratio * schedule.eps[schedule.eps.len() - 1];
            let per = schedule.samples / windows;
            let half = [
                (side / 2.0).min(region.width(0) / 2.0),
                (side / 2.0).min(region.width(1) / 2.0),
            ];
            let inner = Rect::new(
                [region.lo[0] + half[0], region.lo[1] + half[1]],
                [region.hi[0] - half[0], region.hi[1] - half[1]],
            );
            halton_unit(windows, schedule.seed ^ 0x5eed_0f_f1ce)
                .into_iter()
                .enumerate()
                .map(|(w, u)| {
                    let c = inner.at(u);
                    let window = Rect::new(
                        [c.0[0] - half[0], c.0[1] - half[1]],
                        [c.0[0] + half[0], c.0[1] + half[1]],
                    );
                    halton_points(&window, per, schedule.seed.wrapping_add(1 + w as u64))
                })
                .collect()
        }
    }
}

/// Counts for every `(n, ε)` of the schedule.
///
/// Each entry is the size of the best separated set found: the greedy pass at
/// `(n, ε)` starts from the larger of the sets found at `(n − 1, ε)` and at
/// `(n, ε_prev)`, both of which are already `(n, ε)`-separated. This makes the
/// table monotone in `n` and antitone in `ε` by construction.
pub fn separated_table(map: &dyn PlanarMap, schedule: &EntropySchedule) -> Result<SeparatedCountTable> {
    schedule.validate()?;
    let sets = sample_sets(map, schedule);
    let ns: Vec<usize> = (schedule.n_min..=schedule.n_max).collect();
    let mut best: Vec<CountEntry> = Vec::new();
    for starts in &sets {
        let orbits = Orbits::compute(map, starts, schedule.n_max)?;
        let mut found: HashMap<(usize, usize), Vec<u32>> = HashMap::new();
        for (ei, &eps) in schedule.eps.iter().enumerate() {
            for (ni, &n) in ns.iter().enumerate() {
                let from_n = if ni > 0 { found.get(&(ni - 1, ei)) } else { None };
                let from_eps = if ei > 0 { found.get(&(ni, ei - 1)) } else { None };
                let seed: &[u32] = match (from_n, from_eps) {
                    (Some(a), Some(b)) if b.len() > a.len() => b,
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => &[],
                };
                let set = greedy(&orbits, n, eps, seed);
                found.insert((ni, ei), set);
            }
        }
        for (ei, &eps) in schedule.eps.iter().enumerate() {
            for (ni, &n) in ns.iter().enumerate() {
                let count = found[&(ni, ei)].len();
                match best.iter_mut().find(|e| e.n == n && e.eps == eps) {
                    Some(e) if e.count >= count => {}
                    Some(e) => e.count = count,
                    None => best.push(CountEntry {
                        n,
                        eps,
                        count,
                        samples: starts.len(),
                    }),
                }
            }
        }
    }
    best.sort_by(|a, b| b.eps.total_cmp(&a.eps).then(a.n.cmp(&b.n)));
    let table = SeparatedCountTable {
        map: map.spec(),
        seed: schedule.seed,
        sampling: schedule.sampling,
        entries: best,
    };
    table.check_monotone()?;
    Ok(table)
}

/// Least-squares line through `(x, y)`: `(slope, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (my + slope * (a - mx));
            r * r
        })
        .sum();
    (slope, (ss / m).sqrt())
}

/// Minimum number of `n` values in a fitting window.
pub const MIN_FIT_POINTS: usize = 4;

/// Slope over the largest contiguous window with residual below
/// [`LINEAR_RESIDUAL`]; ties go to the larger slope. Returns `None` when no
/// window qualifies.
fn fit_linear_regime(ns: &[usize], counts: &[usize]) -> Option<(f64, f64, usize, usize)> {
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    for len in (MIN_FIT_POINTS..=ns.len()).rev() {
        let mut best: Option<(f64, f64, usize, usize)> = None;
        for lo in 0..=ns.len() - len {
            let (slope, res) = linear_fit(&x[lo..lo + len], &y[lo..lo + len]);
            if res < LINEAR_RESIDUAL && best.map_or(true, |b| slope > b.0) {
                best = Some((slope, res, ns[lo], ns[lo + len - 1]));
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Entropy estimate: per-ε slope of `log count` against `n` over the linear
/// regime, maximized over ε.
pub fn estimate_entropy(map: &dyn PlanarMap, schedule: &EntropySchedule) -> Result<EntropyEstimate> {
    let table = separated_table(map, schedule)?;
    estimate_from_table(table, schedule)
}

/// Fits a previously computed table.
pub fn estimate_from_table(table: SeparatedCountTable, schedule: &EntropySchedule) -> Result<EntropyEstimate> {
    let ns: Vec<usize> = (schedule.n_min..=schedule.n_max).collect();
    let mut warnings = Vec::new();
    let mut slopes = Vec::new();
    for &eps in &schedule.eps {
        let rows: Vec<&CountEntry> = ns
            .iter()
            .map(|&n| {
                table
                    .entries
                    .iter()
                    .find(|e| e.n == n && e.eps == eps)
                    .expect("table covers the schedule")
            })
            .collect();
        let last = rows[rows.len() - 1];
        let fill = last.count as f64 / last.samples as f64;
        if fill > SATURATION_FRACTION {
            return Err(Error::Saturation(format!(
                "count {} exceeds {:.0}% of {} samples at n={}, eps={}; enlarge the sample",
                last.count,
                SATURATION_FRACTION * 100.0,
                last.samples,
                last.n,
                eps
            )));
        }
        if fill > SATURATION_WARNING {
            warnings.push(format!(
                "eps={eps}: count reaches {:.0}% of the sample at n={}",
                fill * 100.0,
                last.n
            ));
        }
        let counts: Vec<usize> = rows.iter().map(|e| e.count).collect();
        let fit = match fit_linear_regime(&ns, &counts) {
            Some(f) => f,
            None => {
                let (slope, res) = linear_fit(
                    &ns.iter().map(|&n| n as f64).collect::<Vec<_>>(),
                    &counts.iter().map(|&c| (c as f64).ln()).collect::<Vec<_>>(),
                );
                warnings.push(format!(
                    "eps={eps}: no window of {MIN_FIT_POINTS}+ points is linear within {LINEAR_RESIDUAL}; using the full range"
                ));
                (slope, res, ns[0], ns[ns.len() - 1])
            }
        };
        slopes.push(SlopeFit {
            eps,
            slope: fit.0.max(0.0),
            residual: fit.1,
            n_lo: fit.2,
            n_hi: fit.3,
        });
    }
    let value = slopes.iter().fold(0.0_f64, |acc, s| acc.max(s.slope));
    Ok(EntropyEstimate {
        value,
        slopes,
        warnings,
        n_min: schedule.n_min,
        n_max: schedule.n_max,
        eps: schedule.eps.clone(),
        table,
    })
}

/// `(log N)/t`, the entropy of the full `N`-shift read every `t` steps.
pub fn shift_entropy(symbols: u128, t: usize) -> Result<f64> {
    if symbols < 2 {
        return Err(Error::Parameter("shift needs at least 2 symbols".into()));
    }
    if t < 1 {
        return Err(Error::Parameter("return time must be >= 1".into()));
    }
    Ok((symbols as f64).ln() / t as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundReport {
    /// No hyperbolic orbit in the catalog.
    Skipped { h_est: f64 },
    Checked {
        h_est: f64,
        /// Largest sum of positive exponents over the catalog.
        bound: f64,
        s_n: f64,
        tolerance: f64,
        violated: bool,
        /// `|h_est − s_n|`.
        equality_gap: f64,
    },
}

impl BoundReport {
    pub fn violated(&self) -> bool {
        matches!(self, BoundReport::Checked { violated: true, .. })
    }
}

/// Compares an entropy estimate with the largest `Σχ⁺` of the catalog;
/// flags a violation when `h_est > bound + tolerance`.
pub fn check_entropy_bound(h: &EntropyEstimate, catalog: &PeriodicCatalog, tolerance: f64) -> BoundReport {
    match (max_positive_exponent_sum(catalog), s_n(catalog)) {
        (ExponentBound::Value(bound), ExponentBound::Value(s)) => BoundReport::Checked {
            h_est: h.value,
            bound,
            s_n: s,
            tolerance,
            violated: h.value > bound + tolerance,
            equality_gap: (h.value - s).abs(),
        },
        _ => BoundReport::Skipped { h_est: h.value },
    }
}
