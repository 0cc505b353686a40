use std::fs;
use std::path::Path;
use std::time::Instant;

use oddcycle::experiment::{
    estimate_events, foam_probes, sample_torical_graph, ExperimentConfig, FoamConfig, RemovalLaw,
};
use oddcycle::game::{
    classical_value_exact_budgeted, classical_value_search, repetition_decay_check, DeterministicStrategy, ExactMode,
    GameSpec, ValueReport, DEFAULT_EXACT_BUDGET,
};
use oddcycle::pearls::{
    diamond_norm, grow_consistent_cycle, max_consistent_region, value_via_regions, DiamondMethod, DiamondVector,
    GrowthOptions,
};
use oddcycle::quantum::{
    bias_and_approximality, canonical_odd_cycle_strategy, chsh_optimal_strategy, optimize_angles, win_probability,
    AngleSearch,
};
use oddcycle::torus::{consistent_strategy, min_blocker, BlockerMode, MinBlockerOptions, SearchMethod};
use oddcycle::Error;
use serde_json::{json, Value};

use crate::args::{BlockerSearchArg, Cli, Command, Format, GameArgs, GameName, Method, Mode};
use crate::emit::{json, scalars_csv, write_output, RunManifest};
use crate::Failure;

const DEFAULT_SEED: u64 = 42;
/// Cycle lengths run by `experiment` when neither flags nor a file name any.
const DEFAULT_NS: [usize; 2] = [3, 5];
/// Largest question count for which `pearls` lists every region.
const MAX_LISTED_REGIONS: usize = 4096;

/// One finished command: its echoed parameters, its result, extra files
/// for the output directory and the phase timings.
struct Outcome {
    parameters: Value,
    result: Value,
    files: Vec<(String, Vec<u8>)>,
    timings: Vec<(String, f64)>,
}

impl Outcome {
    fn timed(parameters: Value, start: Instant, result: Value) -> Self {
        Outcome {
            parameters,
            result,
            files: Vec::new(),
            timings: vec![("compute".into(), start.elapsed().as_secs_f64())],
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    Ok(serde_json::to_value(v)?)
}

pub fn execute(cli: &Cli) -> Result<String, Failure> {
    let seed_flag = cli.global.seed;
    let seed = seed_flag.unwrap_or(DEFAULT_SEED);
    let (name, outcome, seed) = match &cli.command {
        Command::Value {
            game,
            method,
            iterations,
            budget,
        } => ("value", value(game, *method, *iterations, *budget, seed)?, seed),
        Command::Qvalue {
            game,
            theta,
            starts,
            epsilon,
        } => ("qvalue", qvalue(game, *theta, *starts, *epsilon, seed)?, seed),
        Command::Repeat { n, d, iterations } => ("repeat", repeat(*n, *d, *iterations, seed)?, seed),
        Command::Pearls { n, d, strategy, grow } => ("pearls", pearls(*n, *d, strategy.as_deref(), *grow, seed)?, seed),
        Command::Blocker {
            n,
            d,
            mode,
            method,
            node_budget,
        } => ("blocker", blocker(*n, *d, *mode, *method, *node_budget, seed)?, seed),
        Command::Foam {
            d,
            samples,
            max_weight,
            constant,
        } => {
            let config = FoamConfig {
                d: *d,
                samples: *samples,
                seed,
                max_weight: *max_weight,
                constant: *constant,
            };
            let start = Instant::now();
            let report = foam_probes(&config)?;
            (
                "foam",
                Outcome::timed(to_value(&config)?, start, to_value(&report)?),
                seed,
            )
        }
        Command::Norms {
            diamond: _,
            vector,
            samples,
        } => ("norms", norms(vector, *samples, seed)?, seed),
        Command::Experiment {
            config,
            n,
            samples,
            epsilon,
            summary_only,
        } => {
            let (ns, config) = experiment_config(
                config.as_deref(),
                n.as_deref(),
                *samples,
                *epsilon,
                *summary_only,
                seed_flag,
            )?;
            let seed = config.seed;
            ("experiment", experiment(&ns, config)?, seed)
        }
    };

    let mut manifest = RunManifest::new(name, seed, outcome.parameters);
    manifest.timings = outcome.timings;
    let with_manifest = cli.global.out.is_some();
    let report = manifest.report(outcome.result, with_manifest);
    let stdout = match cli.global.format {
        Format::Json => json(&report)?,
        Format::Csv => scalars_csv(&report.result)?,
    };
    if let Some(dir) = &cli.global.out {
        for (file, contents) in &outcome.files {
            write_output(dir, file, contents, &mut manifest)?;
        }
        if name != "experiment" {
            let ext = match cli.global.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            write_output(dir, &format!("{name}.{ext}"), stdout.as_bytes(), &mut manifest)?;
        }
        let body = json(&manifest)?;
        let path = dir.join(manifest.file_name());
        fs::write(&path, body).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(stdout)
}

fn game_spec(g: &GameArgs) -> Result<GameSpec, Failure> {
    Ok(match g.game {
        GameName::OddCycle => GameSpec::odd_cycle(g.n, g.d)?,
        GameName::Chsh => GameSpec::chsh(g.d, None)?,
    })
}

fn game_params(g: &GameArgs) -> Value {
    match g.game {
        GameName::OddCycle => json!({"game": "odd-cycle", "n": g.n, "d": g.d}),
        GameName::Chsh => json!({"game": "chsh", "d": g.d}),
    }
}

/// Exact best response when the budget allows, otherwise local search.
fn auto_value(game: &GameSpec, budget: u128, seed: u64, iterations: u64) -> Result<ValueReport, Failure> {
    match classical_value_exact_budgeted(game, ExactMode::AliceExhaustiveBestResponse, budget) {
        Err(Error::Intractable { .. }) => Ok(classical_value_search(game, seed, iterations)?),
        other => Ok(other?),
    }
}

fn value(g: &GameArgs, method: Method, iterations: u64, budget: Option<u128>, seed: u64) -> Result<Outcome, Failure> {
    let game = game_spec(g)?;
    let budget = budget.unwrap_or(DEFAULT_EXACT_BUDGET);
    let mut params = game_params(g);
    params["method"] = to_value(&method_name(method))?;
    params["iterations"] = json!(iterations);
    params["budget"] = json!(budget.to_string());
    let start = Instant::now();
    let report = match method {
        Method::Exhaustive => classical_value_exact_budgeted(&game, ExactMode::Full, budget)?,
        Method::BestResponse => classical_value_exact_budgeted(&game, ExactMode::AliceExhaustiveBestResponse, budget)?,
        Method::Search => classical_value_search(&game, seed, iterations)?,
        Method::Auto => auto_value(&game, budget, seed, iterations)?,
    };
    Ok(Outcome::timed(params, start, to_value(&report)?))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Exhaustive => "exhaustive",
        Method::BestResponse => "best-response",
        Method::Search => "search",
        Method::Auto => "auto",
    }
}

fn qvalue(g: &GameArgs, theta: f64, starts: usize, epsilon: f64, seed: u64) -> Result<Outcome, Failure> {
    if g.d != 1 {
        return Err(Failure::Usage("qvalue covers a single round; use d = 1".into()));
    }
    let game = game_spec(g)?;
    let (canonical, closed_form) = match g.game {
        GameName::OddCycle => {
            let c = (std::f64::consts::PI / (4.0 * g.n as f64)).cos();
            (canonical_odd_cycle_strategy(g.n, theta)?, c * c)
        }
        GameName::Chsh => {
            let c = (std::f64::consts::PI / 8.0).cos();
            (chsh_optimal_strategy(), c * c)
        }
    };
    let mut params = game_params(g);
    params["theta"] = json!(theta);
    params["starts"] = json!(starts);
    params["epsilon"] = json!(epsilon);
    let start = Instant::now();
    let canonical_value = win_probability(&game, &canonical)?;
    let search = AngleSearch {
        starts,
        seed,
        ..AngleSearch::default()
    };
    let optimum = optimize_angles(&game, Some(&canonical), &search)?;
    let bias = bias_and_approximality(&game, &canonical, epsilon, Some(2.0 * optimum.value - 1.0))?;
    let result = json!({
        "canonical_value": canonical_value,
        "optimised_value": optimum.value,
        "closed_form": closed_form,
        "bias": to_value(&bias)?,
        "optimum": to_value(&optimum)?,
    });
    Ok(Outcome::timed(params, start, result))
}

fn repeat(n: usize, d: u32, iterations: u64, seed: u64) -> Result<Outcome, Failure> {
    let game = GameSpec::odd_cycle(n, d)?;
    let params = json!({"n": n, "d": d, "iterations": iterations});
    let start = Instant::now();
    let report = auto_value(&game, DEFAULT_EXACT_BUDGET, seed, iterations)?;
    let decay = repetition_decay_check(n, d, report.value_f64)?;
    let single_round = 1.0 - 1.0 / (2.0 * n as f64);
    let result = json!({
        "value": to_value(&report)?,
        "single_round": single_round,
        "independent_rounds": single_round.powi(d as i32),
        "decay": to_value(&decay)?,
    });
    Ok(Outcome::timed(params, start, result))
}

fn pearls(n: usize, d: u32, strategy: Option<&[u32]>, grow: bool, seed: u64) -> Result<Outcome, Failure> {
    GameSpec::odd_cycle(n, 1)?;
    let params = json!({"n": n, "d": d, "strategy": strategy, "grow": grow});
    let start = Instant::now();
    let s_a = match strategy {
        Some(s) => s.to_vec(),
        None => DeterministicStrategy::parity(n).tensor_power(d)?.alice_table,
    };
    let value = value_via_regions(&s_a, n, d)?;
    let regions = if s_a.len() <= MAX_LISTED_REGIONS {
        let rs = (0..s_a.len())
            .map(|y| max_consistent_region(&s_a, y, n, d))
            .collect::<oddcycle::Result<Vec<_>>>()?;
        Some(to_value(&rs)?)
    } else {
        None
    };
    let growth = if grow {
        if d < 2 {
            return Err(Failure::Usage("growth needs a torus of dimension at least 2".into()));
        }
        let sample = sample_torical_graph(n, d, RemovalLaw::UpToHalf, seed)?;
        let s = match strategy {
            Some(_) => s_a.clone(),
            None => consistent_strategy(&sample.graph).ok_or_else(|| {
                Failure::Library(Error::InvalidArgument(
                    "sampled graph admits no consistent strategy".into(),
                ))
            })?,
        };
        let opts = GrowthOptions {
            seed,
            max_points: n.pow(d),
            strict: true,
        };
        let report = grow_consistent_cycle(&sample.graph, &s, &opts)?;
        Some(json!({
            "removed_edges": sample.graph.removed_count(),
            "attempts": sample.attempts,
            "strategy": s,
            "report": to_value(&report)?,
        }))
    } else {
        None
    };
    let result = json!({
        "value": to_value(&value)?,
        "value_f64": value.to_f64(),
        "regions": regions,
        "growth": growth,
    });
    Ok(Outcome::timed(params, start, result))
}

fn blocker(
    n: usize,
    d: u32,
    mode: Mode,
    method: BlockerSearchArg,
    node_budget: u64,
    seed: u64,
) -> Result<Outcome, Failure> {
    let mode = match mode {
        Mode::All => BlockerMode::AllNontrivial,
        Mode::Odd => BlockerMode::OddOnly,
    };
    let method = match method {
        BlockerSearchArg::Exact => SearchMethod::Exact,
        BlockerSearchArg::Heuristic => SearchMethod::Heuristic,
    };
    let opts = MinBlockerOptions {
        node_budget,
        seed,
        ..MinBlockerOptions::default()
    };
    let params =
        json!({"n": n, "d": d, "mode": to_value(&mode)?, "method": to_value(&method)?, "options": to_value(&opts)?});
    let start = Instant::now();
    let report = min_blocker(n, d, mode, method, &opts)?;
    Ok(Outcome::timed(params, start, to_value(&report)?))
}

fn norms(vector: &[f64], samples: Option<u64>, seed: u64) -> Result<Outcome, Failure> {
    let v = DiamondVector::new(vector.to_vec())?;
    let method = match samples {
        Some(samples) => DiamondMethod::MonteCarlo { samples, seed },
        None => DiamondMethod::ExactEnumeration,
    };
    let params = json!({"vector": vector, "method": to_value(&method)?});
    let start = Instant::now();
    let estimate = diamond_norm(&v, method)?;
    let upper = v.l2();
    let lower = upper / std::f64::consts::SQRT_2;
    let result = json!({
        "value": estimate.value,
        "std_error": estimate.std_error,
        "lower": lower,
        "upper": upper,
        "linf": v.linf(),
        "within": lower - 1e-12 <= estimate.value && estimate.value <= upper + 1e-12,
    });
    Ok(Outcome::timed(params, start, result))
}

/// Overlays `patch` on `base`. Objects merge key by key and must only use
/// keys `base` already has; the removal law is replaced whole because its
/// fields depend on its tag.
fn merge(base: &mut Value, patch: Value, path: &str) -> Result<(), Failure> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let here = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match b.get_mut(&k) {
                    Some(slot) if k == "removal_law" => *slot = v,
                    Some(slot) => merge(slot, v, &here)?,
                    None => return Err(Failure::Usage(format!("unknown configuration key `{here}`"))),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

/// Defaults, then the TOML file, then flags.
fn experiment_config(
    file: Option<&Path>,
    ns_flag: Option<&[usize]>,
    samples: Option<usize>,
    epsilon: Option<f64>,
    summary_only: bool,
    seed: Option<u64>,
) -> Result<(Vec<usize>, ExperimentConfig), Failure> {
    let mut merged = serde_json::to_value(ExperimentConfig::default())?;
    let mut ns = DEFAULT_NS.to_vec();
    if let Some(path) = file {
        let text =
            fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let mut patch = serde_json::to_value(table)?;
        if let Some(v) = patch.as_object_mut().and_then(|m| m.remove("ns")) {
            ns = serde_json::from_value(v).map_err(|e| Failure::Usage(format!("ns: {e}")))?;
        }
        merge(&mut merged, patch, "")?;
    }
    let mut config: ExperimentConfig =
        serde_json::from_value(merged).map_err(|e| Failure::Usage(format!("bad configuration: {e}")))?;
    if let Some(v) = ns_flag {
        ns = v.to_vec();
    }
    if let Some(s) = samples {
        config.samples = s;
    }
    if let Some(e) = epsilon {
        config.epsilon1 = e;
        config.epsilon2 = e;
        config.epsilon3 = e;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if summary_only {
        config.record_samples = false;
    }
    if ns.is_empty() {
        return Err(Failure::Usage("no cycle lengths given".into()));
    }
    for &n in &ns {
        ExperimentConfig { n, ..config.clone() }.validate()?;
    }
    Ok((ns, config))
}

fn experiment(ns: &[usize], config: ExperimentConfig) -> Result<Outcome, Failure> {
    let mut parameters = to_value(&config)?;
    parameters["ns"] = json!(ns);
    if let Some(m) = parameters.as_object_mut() {
        m.remove("n");
    }
    let manifest = RunManifest::new("experiment", config.seed, parameters.clone());
    let mut reports = Vec::new();
    let mut files = Vec::new();
    let mut timings = Vec::new();
    for &n in ns {
        let start = Instant::now();
        let report = estimate_events(&ExperimentConfig { n, ..config.clone() })?;
        timings.push((format!("n={n}"), start.elapsed().as_secs_f64()));
        files.push((
            format!("experiment-n{n}.json"),
            json(&manifest.report(&report, true))?.into_bytes(),
        ));
        for sweep in &report.sweeps {
            let mut buf = Vec::new();
            sweep.write_csv(&mut buf)?;
            files.push((format!("sweep-{}-n{n}.csv", sweep.event.to_lowercase()), buf));
        }
        reports.push(to_value(&report)?);
    }
    Ok(Outcome {
        parameters,
        result: Value::Array(reports),
        files,
        timings,
    })
}
