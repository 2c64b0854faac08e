//! Registered experiments. Each one declares its keys with defaults, parses
//! and validates them up front, and only then runs.

use serde::Serialize;
use serde_json::{json, Value};

use symplab::entropy::{check_entropy_bound, estimate_entropy, BoundReport, EntropyEstimate, EntropySchedule, Sampling};
use symplab::flow::SpherePendulum;
use symplab::horseshoe::{powers_of_two, return_time, snake_sweep, SnakeModel, SnakeParams, SweepConfig};
use symplab::linalg::{Eigenvalues, Mat2};
use symplab::maps::{build_map, MapSpec, PlanarMap};
use symplab::periodic::{find_periodic, s_n, PeriodicCatalog, SearchConfig};
use symplab::report::sig12;

use crate::config::Params;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// `<`, `<=`, `>`, `>=` or `==`.
    pub relation: &'static str,
    pub threshold: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: &'static str, threshold: f64) -> Self {
        let passed = match relation {
            "<" => value < threshold,
            "<=" => value <= threshold,
            ">" => value > threshold,
            ">=" => value >= threshold,
            "==" => value == threshold,
            other => unreachable!("relation {other}"),
        };
        Check {
            name: name.into(),
            passed,
            value,
            relation,
            threshold,
        }
    }
}

/// What an experiment hands back to the runner.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    /// File name and contents.
    pub artifacts: Vec<(String, String)>,
}

pub type Job = Box<dyn FnOnce() -> Result<Outcome, CliError>>;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    /// Key and default value; `seed` is implicit and has no default.
    pub keys: &'static [(&'static str, &'static str)],
    /// Keys that hold acceptance thresholds.
    pub tolerances: &'static [&'static str],
    pub prepare: fn(&Params) -> Result<Job, CliError>,
}

const ENTROPY_KEYS: [(&str, &str); 7] = [
    ("n_min", "6"),
    ("n_max", "14"),
    ("eps", "0.1,0.05,0.025"),
    ("samples", "200000"),
    ("sampling", "windows"),
    ("windows", "1"),
    ("window_ratio", "0.25"),
];

const CATMAP_KEYS: &[(&str, &str)] = &[
    ("map", "cat"),
    ENTROPY_KEYS[0],
    ENTROPY_KEYS[1],
    ENTROPY_KEYS[2],
    ENTROPY_KEYS[3],
    ENTROPY_KEYS[4],
    ENTROPY_KEYS[5],
    ENTROPY_KEYS[6],
    ("max_period", "6"),
    ("grid", "64"),
    ("oracle_rel", "0.1"),
    ("equality_rel", "0.15"),
    ("bound_slack", "0.1"),
];

const STANDARD_KEYS: &[(&str, &str)] = &[
    ("k_list", "6"),
    ("n_min", "4"),
    ("n_max", "9"),
    ENTROPY_KEYS[2],
    ENTROPY_KEYS[3],
    ENTROPY_KEYS[4],
    ENTROPY_KEYS[5],
    ENTROPY_KEYS[6],
    ("max_period", "6"),
    ("grid", "64"),
    ("equality_rel", "0.15"),
    ("bound_slack", "0.1"),
];

const PENDULUM_KEYS: &[(&str, &str)] = &[
    ("t", "1"),
    ("step", "0.001"),
    ENTROPY_KEYS[0],
    ENTROPY_KEYS[1],
    ENTROPY_KEYS[2],
    ("samples", "20000"),
    ENTROPY_KEYS[4],
    ENTROPY_KEYS[5],
    ENTROPY_KEYS[6],
    ("max_period", "1"),
    ("grid", "16"),
    ("entropy_max", "0.05"),
    ("s1_lo", "0.95"),
    ("s1_hi", "1.05"),
    ("multiplier_tol", "0.001"),
];

const SNAKE_KEYS: &[(&str, &str)] = &[
    ("lambda", "2"),
    ("a", "0.1"),
    ("delta", "0.05"),
    ("quality", "10"),
    ("exp_lo", "2"),
    ("exp_hi", "120"),
    ("k1_exp_lo", "2"),
    ("k1_exp_hi", "6"),
    ("k1_factor", "2"),
];

const ANOSOV_KEYS: &[(&str, &str)] = &[
    ("maps", "cat;cat:a=3,b=2,c=1,d=1;cat:a=1,b=1,c=1,d=2"),
    ENTROPY_KEYS[0],
    ("n_max", "12"),
    ENTROPY_KEYS[2],
    ENTROPY_KEYS[3],
    ENTROPY_KEYS[4],
    ENTROPY_KEYS[5],
    ENTROPY_KEYS[6],
    ("max_period", "4"),
    ("grid", "64"),
    ("bound_slack", "0.1"),
];

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "catmap_equality",
        description: "entropy of a cat map against its eigenvalue and against s_n",
        keys: CATMAP_KEYS,
        tolerances: &["oracle_rel", "equality_rel", "bound_slack"],
        prepare: prepare_catmap,
    },
    Experiment {
        name: "standard_scan",
        description: "entropy and s_n of the standard map over a list of K",
        keys: STANDARD_KEYS,
        tolerances: &["equality_rel", "bound_slack"],
        prepare: prepare_standard,
    },
    Experiment {
        name: "sphere_pendulum_gap",
        description: "zero entropy next to a hyperbolic saddle for the pendulum flow on the sphere",
        keys: PENDULUM_KEYS,
        tolerances: &["entropy_max", "s1_lo", "s1_hi", "multiplier_tol"],
        prepare: prepare_pendulum,
    },
    Experiment {
        name: "snake_sweep",
        description: "leg-count sweep of the snake horseshoe model",
        keys: SNAKE_KEYS,
        tolerances: &["quality", "k1_factor"],
        prepare: prepare_snake,
    },
    Experiment {
        name: "anosov_bound",
        description: "entropy bound by periodic exponents on hyperbolic toral automorphisms",
        keys: ANOSOV_KEYS,
        tolerances: &["bound_slack"],
        prepare: prepare_anosov,
    },
];

/// Names and descriptions in registry order.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    EXPERIMENTS.iter().map(|e| (e.name, e.description)).collect()
}

pub fn find_experiment(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

fn schedule(p: &Params) -> Result<EntropySchedule, CliError> {
    let sampling = match p.str("sampling")? {
        "global" => Sampling::Global,
        "windows" => Sampling::Windows {
            windows: p.usize("windows")?,
            ratio: p.f64("window_ratio")?,
        },
        other => {
            return Err(CliError::Config(format!(
                "sampling must be 'windows' or 'global', got '{other}'"
            )))
        }
    };
    let s = EntropySchedule {
        n_min: p.usize("n_min")?,
        n_max: p.usize("n_max")?,
        eps: p.f64_list("eps")?,
        samples: p.usize("samples")?,
        seed: p.u64("seed")?,
        sampling,
    };
    validate_schedule(&s)?;
    Ok(s)
}

fn validate_schedule(s: &EntropySchedule) -> Result<(), CliError> {
    if s.n_min < 1 || s.n_max < s.n_min + 3 {
        return Err(CliError::Config(format!(
            "n-range {}..={} must hold at least 4 values starting at 1",
            s.n_min, s.n_max
        )));
    }
    if s.eps.windows(2).any(|w| w[1] >= w[0]) || s.eps.iter().any(|e| *e <= 0.0) {
        return Err(CliError::Config("eps must be positive and strictly decreasing".into()));
    }
    if s.samples == 0 {
        return Err(CliError::Config("samples must be >= 1".into()));
    }
    if let Sampling::Windows { windows, ratio } = s.sampling {
        if windows == 0 || windows > s.samples || !(ratio > 0.0 && ratio <= 1.0) {
            return Err(CliError::Config(format!(
                "invalid window sampling ({windows} windows, side ratio {ratio})"
            )));
        }
    }
    Ok(())
}

fn search(p: &Params) -> Result<SearchConfig, CliError> {
    let max_period = p.usize("max_period")?;
    let grid = p.usize("grid")?;
    if max_period == 0 || grid == 0 {
        return Err(CliError::Config("max_period and grid must be >= 1".into()));
    }
    Ok(SearchConfig::new(max_period).with_grid(grid))
}

fn positive(p: &Params, key: &str) -> Result<f64, CliError> {
    let v = p.f64(key)?;
    if v < 0.0 {
        return Err(CliError::Config(format!("{key} must be >= 0")));
    }
    Ok(v)
}

fn estimate_json(e: &EntropyEstimate) -> Value {
    json!({
        "h_est": e.value,
        "slopes": e.slopes.iter().map(|s| json!({
            "eps": s.eps,
            "slope": s.slope,
            "residual": s.residual,
            "n_lo": s.n_lo,
            "n_hi": s.n_hi,
        })).collect::<Vec<_>>(),
        "warnings": e.warnings,
    })
}

fn bound_json(b: &BoundReport) -> Value {
    serde_json::to_value(b).expect("bound report serializes")
}

struct MapRun {
    estimate: EntropyEstimate,
    catalog: PeriodicCatalog,
    bound: BoundReport,
}

fn run_map(map: &dyn PlanarMap, schedule: &EntropySchedule, search: &SearchConfig, slack: f64) -> Result<MapRun, CliError> {
    let estimate = estimate_entropy(map, schedule)?;
    estimate.table.check_monotone()?;
    let catalog = find_periodic(map, search)?;
    let bound = check_entropy_bound(&estimate, &catalog, slack);
    Ok(MapRun {
        estimate,
        catalog,
        bound,
    })
}

fn bound_checks(label: &str, run: &MapRun, slack: f64, equality_rel: Option<f64>) -> Vec<Check> {
    let mut out = Vec::new();
    if let BoundReport::Checked {
        h_est,
        bound,
        s_n,
        equality_gap,
        ..
    } = run.bound
    {
        out.push(Check::new(format!("{label}entropy_bound"), h_est, "<=", bound + slack));
        if let Some(rel) = equality_rel {
            out.push(Check::new(format!("{label}equality"), equality_gap, "<=", rel * s_n));
        }
    }
    out
}

fn largest_multiplier(m: &Mat2) -> f64 {
    match m.eigenvalues() {
        Eigenvalues::Real(a, _) => a.abs(),
        Eigenvalues::Complex { re, im } => re.hypot(im),
    }
}

fn prepare_catmap(p: &Params) -> Result<Job, CliError> {
    let spec = p.map_spec("map")?;
    if spec.name != "cat" {
        return Err(CliError::Config(format!("catmap_equality needs a cat map, got {spec}")));
    }
    let schedule = schedule(p)?;
    let search = search(p)?;
    let oracle_rel = positive(p, "oracle_rel")?;
    let equality_rel = positive(p, "equality_rel")?;
    let slack = positive(p, "bound_slack")?;
    Ok(Box::new(move || {
        let map = build_map(&spec)?;
        let oracle = largest_multiplier(&map.jacobian(symplab::PhasePoint::new(0.0, 0.0))?).ln();
        let run = run_map(map.as_ref(), &schedule, &search, slack)?;
        let mut checks = vec![Check::new(
            "oracle",
            (run.estimate.value - oracle).abs(),
            "<=",
            oracle_rel * oracle,
        )];
        checks.extend(bound_checks("", &run, slack, Some(equality_rel)));
        Ok(Outcome {
            results: json!({
                "map": spec.to_string(),
                "log_eigenvalue": oracle,
                "estimate": estimate_json(&run.estimate),
                "s_n": s_n(&run.catalog).value(),
                "orbits": run.catalog.orbits.len(),
                "bound": bound_json(&run.bound),
            }),
            checks,
            artifacts: vec![
                ("counts.csv".into(), run.estimate.table.to_csv()),
                ("catalog.csv".into(), run.catalog.to_csv()),
                ("estimate.json".into(), run.estimate.to_json() + "\n"),
            ],
        })
    }))
}

fn prepare_standard(p: &Params) -> Result<Job, CliError> {
    let ks = p.f64_list("k_list")?;
    let specs = ks
        .iter()
        .map(|k| {
            let spec = symplab::maps::parse_map_spec(&format!("standard:k={k}"))?;
            build_map(&spec)?;
            Ok(spec)
        })
        .collect::<Result<Vec<MapSpec>, symplab::Error>>()?;
    let schedule = schedule(p)?;
    let search = search(p)?;
    let equality_rel = positive(p, "equality_rel")?;
    let slack = positive(p, "bound_slack")?;
    Ok(Box::new(move || {
        let mut checks = Vec::new();
        let mut rows = Vec::new();
        let mut artifacts = Vec::new();
        let mut csv = String::from("k,h_est,s_n,bound,equality_gap\n");
        for (i, (k, spec)) in ks.iter().zip(&specs).enumerate() {
            let map = build_map(spec)?;
            let run = run_map(map.as_ref(), &schedule, &search, slack)?;
            checks.extend(bound_checks(&format!("k={k}:"), &run, slack, Some(equality_rel)));
            let (bound, gap) = match run.bound {
                BoundReport::Checked { bound, equality_gap, .. } => (bound, equality_gap),
                BoundReport::Skipped { .. } => (f64::NAN, f64::NAN),
            };
            let sn = s_n(&run.catalog).value().unwrap_or(f64::NAN);
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                sig12(*k),
                sig12(run.estimate.value),
                sig12(sn),
                sig12(bound),
                sig12(gap)
            ));
            rows.push(json!({
                "k": k,
                "estimate": estimate_json(&run.estimate),
                "s_n": s_n(&run.catalog).value(),
                "orbits": run.catalog.orbits.len(),
                "bound": bound_json(&run.bound),
            }));
            artifacts.push((format!("counts_{i}.csv"), run.estimate.table.to_csv()));
            artifacts.push((format!("catalog_{i}.csv"), run.catalog.to_csv()));
        }
        artifacts.insert(0, ("scan.csv".into(), csv));
        Ok(Outcome {
            results: json!({ "rows": rows }),
            checks,
            artifacts,
        })
    }))
}

/// `exp(m)` by scaling and squaring of a truncated Taylor series.
pub fn expm(m: &Mat2) -> Mat2 {
    let norm = m.max_abs();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.125 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m.scale(scale);
    let mut term = Mat2::IDENTITY;
    let mut sum = Mat2::IDENTITY;
    for k in 1..=20 {
        term = (term * a).scale(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn real_pair(m: &Mat2) -> Option<(f64, f64)> {
    match m.eigenvalues() {
        Eigenvalues::Real(a, b) => Some((a, b)),
        Eigenvalues::Complex { .. } => None,
    }
}

fn prepare_pendulum(p: &Params) -> Result<Job, CliError> {
    let t = p.f64("t")?;
    let step = p.f64("step")?;
    let pendulum = SpherePendulum::new(t, step)
        .map_err(|e| CliError::Config(format!("sphere_pendulum: {e}")))?;
    let schedule = schedule(p)?;
    let search = search(p)?;
    let entropy_max = positive(p, "entropy_max")?;
    let s1_lo = p.f64("s1_lo")?;
    let s1_hi = p.f64("s1_hi")?;
    let multiplier_tol = positive(p, "multiplier_tol")?;
    Ok(Box::new(move || {
        // linearization of the pendulum at the top equilibrium
        let oracle = real_pair(&expm(&Mat2::new(0.0, t, t, 0.0)))
            .ok_or_else(|| CliError::Config("oracle multipliers are complex".into()))?;
        let dphi = pendulum.jacobian(SpherePendulum::SADDLE)?;
        let (large, small) = real_pair(&dphi).unwrap_or((f64::NAN, f64::NAN));
        let saddle_chi = large.abs().ln() / t;

        let estimate = estimate_entropy(&pendulum, &schedule)?;
        estimate.table.check_monotone()?;
        let catalog = find_periodic(&pendulum, &search)?;
        let s1 = s_n(&catalog).value().unwrap_or(f64::NAN);

        let checks = vec![
            Check::new("h_est", estimate.value, "<", entropy_max),
            Check::new("s_1_lower", s1, ">=", s1_lo),
            Check::new("s_1_upper", s1, "<=", s1_hi),
            Check::new("saddle_multiplier_large", (large - oracle.0).abs(), "<=", multiplier_tol),
            Check::new("saddle_multiplier_small", (small - oracle.1).abs(), "<=", multiplier_tol),
            Check::new("gap", estimate.value, "<", s1),
        ];
        let hyperbolic: Vec<Value> = catalog
            .hyperbolic()
            .map(|o| json!({ "point": o.points[0].0, "tau": o.tau, "chi": o.chi }))
            .collect();
        Ok(Outcome {
            results: json!({
                "map": pendulum.spec(),
                "estimate": estimate_json(&estimate),
                "s_1": s1,
                "hyperbolic_orbits": hyperbolic,
                "saddle": {
                    "point": SpherePendulum::SADDLE.0,
                    "multipliers": [large, small],
                    "oracle_multipliers": [oracle.0, oracle.1],
                    "chi": saddle_chi,
                },
            }),
            checks,
            artifacts: vec![
                ("counts.csv".into(), estimate.table.to_csv()),
                ("catalog.csv".into(), catalog.to_csv()),
                ("estimate.json".into(), estimate.to_json() + "\n"),
            ],
        })
    }))
}

fn prepare_snake(p: &Params) -> Result<Job, CliError> {
    let lambda = p.f64("lambda")?;
    let a = p.f64("a")?;
    let delta = p.f64("delta")?;
    let quality = p.u32("quality")?;
    let (lo, hi) = (p.u32("exp_lo")?, p.u32("exp_hi")?);
    let (k1_lo, k1_hi) = (p.u32("k1_exp_lo")?, p.u32("k1_exp_hi")?);
    let k1_factor = positive(p, "k1_factor")?;
    if quality == 0 {
        return Err(CliError::Config("quality must be >= 1".into()));
    }
    if lo < 1 || hi < lo || hi > 126 || k1_lo < 1 || k1_hi < k1_lo || k1_hi > 126 {
        return Err(CliError::Config("leg exponents must satisfy 1 <= lo <= hi <= 126".into()));
    }
    // fail on bad geometry before sweeping
    SnakeModel::new(SnakeParams::new(lambda, a, delta, 1u128 << lo))
        .map_err(|e| CliError::Config(format!("snake parameters: {e}")))?;
    let cfg = SweepConfig {
        lambda,
        a,
        delta,
        quality,
        legs: powers_of_two(lo, hi),
    };
    Ok(Box::new(move || {
        let tol = 1.0 / quality as f64;
        let report = snake_sweep(&cfg)?;
        let mut k1 = Vec::new();
        for legs in powers_of_two(k1_lo, k1_hi) {
            let model = SnakeModel::new(SnakeParams::new(lambda, a, delta, legs))?;
            k1.push((legs, return_time(&model)?.k1));
        }
        let k1_max = k1.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let k1_min = k1.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);

        let mut checks = vec![Check::new(
            "n1_found",
            if report.n1.is_some() { 1.0 } else { 0.0 },
            "==",
            1.0,
        )];
        if let Some(row) = report.n1.and_then(|n| report.rows.iter().find(|r| r.legs == n)) {
            let exact = symplab::entropy::shift_entropy(row.legs, row.t as usize)?;
            checks.push(Check::new("n1_entropy_exact", (row.coded_entropy - exact).abs(), "==", 0.0));
            checks.push(Check::new("n1_entropy_floor", row.coded_entropy, ">", row.chi_p - tol));
        }
        match report.accepted_row() {
            Some(row) => {
                checks.push(Check::new("accepted_min_chi_q", row.min_chi_q, ">", row.chi_p - tol));
                checks.push(Check::new("accepted_rho_to_mu_p", row.rho_to_mu_p, "<", tol));
                checks.push(Check::new(
                    "accepted_cone_floor",
                    if row.floor_passed { 1.0 } else { 0.0 },
                    "==",
                    1.0,
                ));
            }
            None => checks.push(Check::new("accepted_found", 0.0, "==", 1.0)),
        }
        checks.push(Check::new("k1_spread", k1_max / k1_min, "<", k1_factor));

        let summary: Value = serde_json::from_str(&report.to_json()).expect("sweep summary is json");
        Ok(Outcome {
            results: json!({
                "sweep": summary,
                "k1": k1.iter().map(|(n, k)| json!({ "N": n.to_string(), "K1": k })).collect::<Vec<_>>(),
            }),
            checks,
            artifacts: vec![
                ("sweep.csv".into(), report.to_csv()),
                ("sweep.json".into(), report.to_json() + "\n"),
            ],
        })
    }))
}

fn prepare_anosov(p: &Params) -> Result<Job, CliError> {
    let specs = p.map_list("maps")?;
    if let Some(bad) = specs.iter().find(|s| s.name != "cat") {
        return Err(CliError::Config(format!("anosov_bound takes cat maps only, got {bad}")));
    }
    let schedule = schedule(p)?;
    let search = search(p)?;
    let slack = positive(p, "bound_slack")?;
    Ok(Box::new(move || {
        let mut checks = Vec::new();
        let mut rows = Vec::new();
        let mut artifacts = Vec::new();
        for (i, spec) in specs.iter().enumerate() {
            let map = build_map(spec)?;
            let run = run_map(map.as_ref(), &schedule, &search, slack)?;
            checks.extend(bound_checks(&format!("{spec}:"), &run, slack, None));
            rows.push(json!({
                "map": spec.to_string(),
                "estimate": estimate_json(&run.estimate),
                "s_n": s_n(&run.catalog).value(),
                "orbits": run.catalog.orbits.len(),
                "bound": bound_json(&run.bound),
            }));
            artifacts.push((format!("counts_{i}.csv"), run.estimate.table.to_csv()));
            artifacts.push((format!("catalog_{i}.csv"), run.catalog.to_csv()));
        }
        Ok(Outcome {
            results: json!({ "rows": rows }),
            checks,
            artifacts,
        })
    }))
}
