//! Command-line front end: reproducible protect / optimize / causal /
//! report runs over CSV datasets.
//!
//! Exit codes: 0 ok, 2 usage, 3 data error, 4 infeasible, 5 numeric failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::causal::{backdoor_adjustments, greedy_partial_corr_jam, interference_families, interfering_split, CausalDag, SplitOutcome};
use crate::cp::{apply_cp, FeatureSplit, PermutationFile, ShuffleSpec};
use crate::data::{apply_scaling, ingest_csv, standardize, Dataset, MissingPolicy};
use crate::error::{Error, Result};
use crate::fairness::{build_odds_cp, contingency, odds_ratio, plan_odds_shift, OddsConvention, Predicate};
use crate::kernel::{gaussian_kernel, Bandwidth};
use crate::learn::{cross_validate, default_lambda_grid, train, zero_one_error, Loss, TrainConfig};
use crate::search::{crossover_learn, read_trace_csv, write_trace_csv, CandidateMode, Objective, SearchConfig};
use crate::synth::train_test_split;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to replay a run: command, configuration snapshot,
/// input hashes and the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub input_hashes: HashMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub wall_time_secs: Option<f64>,
}

impl RunManifest {
    fn new(command: &str, args: &[String], seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            args: args.to_vec(),
            input_hashes: HashMap::new(),
            seed,
            version: VERSION.to_string(),
            wall_time_secs: None,
        }
    }

    fn hash_input(&mut self, label: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        self.input_hashes.insert(label.to_string(), fnv1a_hex(&bytes));
        Ok(())
    }

    fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{:016x}", h)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::Usage(_) => 2,
                Error::Data(_) | Error::Dimension(_) | Error::Io(_) | Error::Json(_) => 3,
                Error::Infeasible(_) => 4,
                Error::Numeric(_) => 5,
            }
        }
    }
}

fn dispatch(args: &[String]) -> Result<()> {
    let Some(command) = args.first() else {
        return Err(Error::Usage(usage_text()));
    };
    let flags = Flags::parse(&args[1..])?;
    match command.as_str() {
        "protect-hsic" => cmd_protect_hsic(&flags, args),
        "protect-odds" => cmd_protect_odds(&flags, args),
        "optimize" => cmd_optimize(&flags, args),
        "causal" => cmd_causal(&flags, args),
        "report" => cmd_report(&flags),
        "help" | "--help" | "-h" => {
            println!("{}", usage_text());
            Ok(())
        }
        other => Err(Error::Usage(format!("unknown command '{}'\n{}", other, usage_text()))),
    }
}

fn usage_text() -> String {
    [
        "usage: cpforge <command> [flags]",
        "  protect-hsic  --data F --label COL [--positive V] [--split first-half|a,b|c,d]",
        "                [--iters N] [--seed S] [--out-dir D] [--missing zero|error]",
        "                [--block-class true|false] [--resamples N]",
        "  protect-odds  --data F --label COL --xc COL --xa COL [--predicate 'f=0&g=1']",
        "                [--shift-i I | --target-rho R] [--out-dir D] [--seed S]",
        "  optimize      --data F --label COL [--loss logistic|square] [--cv-grid a,b,...]",
        "                [--iters N] [--retrain-every K] [--seed S] [--out-dir D]",
        "  causal        --dag F --mode adjustments|split|jam [--data F --label COL]",
        "                [--epsilon E] [--max-iter N] [--out-dir D] [--seed S]",
        "  report        --trace F [--format json|csv] [--out F]",
    ]
    .join("\n")
}

struct Flags {
    map: HashMap<String, String>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags> {
        let mut map = HashMap::new();
        let mut i = 0;
        while i < args.len() {
            let key = &args[i];
            if !key.starts_with("--") {
                return Err(Error::Usage(format!("unexpected argument '{}'", key)));
            }
            let name = key.trim_start_matches("--").to_string();
            let value = args
                .get(i + 1)
                .ok_or_else(|| Error::Usage(format!("flag '{}' needs a value", key)))?;
            map.insert(name, value.clone());
            i += 2;
        }
        Ok(Flags { map })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.map.get(name).map(|s| s.as_str())
    }

    fn require(&self, name: &str) -> Result<&str> {
        self.get(name).ok_or_else(|| Error::Usage(format!("missing --{}", name)))
    }

    fn parse_or<T: std::str::FromStr>(&self, name: &str, default: T) -> Result<T> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse::<T>()
                .map_err(|_| Error::Usage(format!("bad value '{}' for --{}", v, name))),
        }
    }
}

fn load_dataset(flags: &Flags) -> Result<(Dataset, PathBuf)> {
    let path = PathBuf::from(flags.require("data")?);
    let label = flags.require("label")?;
    let positive = flags.get("positive").unwrap_or("1").to_string();
    let missing = match flags.get("missing").unwrap_or("error") {
        "zero" => MissingPolicy::Zero,
        "error" => MissingPolicy::Error,
        other => return Err(Error::Usage(format!("bad --missing '{}'", other))),
    };
    let ds = ingest_csv(&path, label, &positive, missing)?;
    Ok((ds, path))
}

fn parse_split(spec: Option<&str>, d: usize) -> Result<FeatureSplit> {
    match spec {
        None | Some("first-half") => FeatureSplit::first_half(d),
        Some(text) => {
            // "0,1|2,3": anchor indices | shuffle indices
            let mut halves = text.splitn(2, '|');
            let parse_list = |s: &str| -> Result<Vec<usize>> {
                s.split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| {
                        p.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Usage(format!("bad feature index '{}'", p)))
                    })
                    .collect()
            };
            let anchor = parse_list(halves.next().unwrap_or(""))?;
            let shuffle = parse_list(
                halves
                    .next()
                    .ok_or_else(|| Error::Usage("explicit --split needs 'a,b|c,d'".to_string()))?,
            )?;
            FeatureSplit::new(anchor, shuffle, d)
        }
    }
}

fn out_dir(flags: &Flags) -> Result<PathBuf> {
    let dir = PathBuf::from(flags.get("out-dir").unwrap_or("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_protect_hsic(flags: &Flags, raw_args: &[String]) -> Result<()> {
    let start = Instant::now();
    let (ds, data_path) = load_dataset(flags)?;
    let dir = out_dir(flags)?;
    let seed: u64 = flags.parse_or("seed", 0)?;
    let iters: usize = flags.parse_or("iters", 100)?;
    let resamples: usize = flags.parse_or("resamples", 999)?;
    let block_class: bool = flags.parse_or("block-class", true)?;
    let split = parse_split(flags.get("split"), ds.d())?;

    let mut manifest = RunManifest::new("protect-hsic", raw_args, seed);
    manifest.hash_input("data", &data_path)?;
    manifest.write(&dir.join("manifest.json"))?;

    let (standardized, _) = standardize(&ds)?;
    let ku = gaussian_kernel(&standardized, split.anchor(), Bandwidth::Median)?;
    let kv = gaussian_kernel(&standardized, split.shuffle(), Bandwidth::Median)?;
    let config = SearchConfig {
        iterations: iters,
        candidate_mode: if ds.m() <= 500 {
            CandidateMode::Exhaustive
        } else {
            CandidateMode::Sampled { count: 4096 }
        },
        block_class,
        pvalue_every: 10,
        pvalue_resamples: resamples,
        seed,
        ..SearchConfig::default()
    };
    let result = crossover_learn(&standardized, &split, &config, &Objective::HsicReduce { ku, kv }, None)?;

    PermutationFile::new(&result.permutation, block_class, seed, iters).write(&dir.join("permutation.json"))?;
    let protected = apply_cp(&ds, &split, &ShuffleSpec::Permutation(result.permutation.clone()))?;
    protected.export_csv(&dir.join("protected.csv"))?;
    write_trace_csv(&result.trace, &dir.join("trace.csv"))?;

    manifest.wall_time_secs = Some(start.elapsed().as_secs_f64());
    manifest.write(&dir.join("manifest.json"))?;

    let first = result.trace.first().and_then(|r| r.hsic).unwrap_or(f64::NAN);
    let last = result.trace.last().and_then(|r| r.hsic).unwrap_or(f64::NAN);
    println!("hsic: {:.6e} -> {:.6e} over {} accepted steps", first, last, result.trace.len() - 1);
    Ok(())
}

fn cmd_protect_odds(flags: &Flags, raw_args: &[String]) -> Result<()> {
    let start = Instant::now();
    let (ds, data_path) = load_dataset(flags)?;
    let dir = out_dir(flags)?;
    let seed: u64 = flags.parse_or("seed", 0)?;
    let xc_name = flags.require("xc")?;
    let xa_name = flags.require("xa")?;
    let find = |name: &str| -> Result<usize> {
        ds.feature_names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::data(format!("missing column '{}'", name)))
    };
    let x_c = find(xc_name)?;
    let x_a = find(xa_name)?;
    let predicate = Predicate::parse(flags.get("predicate").unwrap_or(""), &ds)?;

    let mut manifest = RunManifest::new("protect-odds", raw_args, seed);
    manifest.hash_input("data", &data_path)?;
    manifest.write(&dir.join("manifest.json"))?;

    let before = contingency(&ds, x_c, x_a, &predicate)?;
    let shift: i64 = match (flags.get("shift-i"), flags.get("target-rho")) {
        (Some(i), _) => i
            .parse()
            .map_err(|_| Error::Usage(format!("bad --shift-i '{}'", i)))?,
        (None, Some(rho_text)) => {
            let target: f64 = rho_text
                .parse()
                .map_err(|_| Error::Usage(format!("bad --target-rho '{}'", rho_text)))?;
            // b+i = target (d-i): i = (target d - b) / (1 + target)
            let i = ((target * before.d as f64 - before.b as f64) / (1.0 + target)).round() as i64;
            let lo = -(before.b.min(before.c) as i64);
            // i = d would empty cell d and push the odds to infinity
            let hi = (before.a.min(before.d) as i64).min(before.d as i64 - 1);
            if i < lo || i > hi {
                return Err(Error::infeasible(format!(
                    "target rho {} needs transfer {} outside the feasible range [{}, {}]",
                    target, i, lo, hi
                )));
            }
            i
        }
        (None, None) => 0,
    };

    let plan = plan_odds_shift(&before, shift)?;
    let cp = build_odds_cp(&ds, x_c, x_a, &predicate, shift)?;
    let protected = apply_cp(&ds, &cp.split, &ShuffleSpec::Permutation(cp.permutation.clone()))?;
    let after = contingency(&protected, x_c, x_a, &predicate)?;

    let report = serde_json::json!({
        "before": {
            "table": before,
            "odds_counts": odds_ratio(&before, OddsConvention::Counts)?.to_f64(),
            "odds_probability": odds_ratio(&before, OddsConvention::Probability).ok().map(|r| r.to_f64()),
        },
        "after": {
            "table": after,
            "odds_counts": odds_ratio(&after, OddsConvention::Counts)?.to_f64(),
            "odds_probability": odds_ratio(&after, OddsConvention::Probability).ok().map(|r| r.to_f64()),
        },
        "shift": shift,
        "delta": plan.delta.to_f64(),
        "block_class": cp.block_class,
    });
    std::fs::write(dir.join("odds_report.json"), serde_json::to_string_pretty(&report)?)?;
    PermutationFile::new(&cp.permutation, cp.block_class, seed, 1).write(&dir.join("permutation.json"))?;
    protected.export_csv(&dir.join("protected.csv"))?;

    manifest.wall_time_secs = Some(start.elapsed().as_secs_f64());
    manifest.write(&dir.join("manifest.json"))?;
    println!(
        "odds (counts): {} -> {}",
        odds_ratio(&before, OddsConvention::Counts)?,
        odds_ratio(&after, OddsConvention::Counts)?
    );
    Ok(())
}

fn cmd_optimize(flags: &Flags, raw_args: &[String]) -> Result<()> {
    let start = Instant::now();
    let (ds, data_path) = load_dataset(flags)?;
    let dir = out_dir(flags)?;
    let seed: u64 = flags.parse_or("seed", 0)?;
    let iters: usize = flags.parse_or("iters", 100)?;
    let retrain_every: usize = flags.parse_or("retrain-every", 10)?;
    let loss = Loss::parse(flags.get("loss").unwrap_or("logistic"))?;
    let grid: Vec<f64> = match flags.get("cv-grid") {
        None => default_lambda_grid(),
        Some(text) => text
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad lambda '{}'", p)))
            })
            .collect::<Result<_>>()?,
    };

    let mut manifest = RunManifest::new("optimize", raw_args, seed);
    manifest.hash_input("data", &data_path)?;
    manifest.write(&dir.join("manifest.json"))?;

    // 1/5 holdout, standardization fitted on the training part
    let (train_raw, test_raw) = train_test_split(&ds, 0.2, seed)?;
    let (train_ds, scaling) = standardize(&train_raw)?;
    let test_ds = apply_scaling(&test_raw, &scaling)?;
    let split = parse_split(flags.get("split"), ds.d())?;

    let lambda = cross_validate(&train_ds, loss, &grid, 5)?;
    let baseline = train(
        &train_ds,
        loss,
        TrainConfig {
            lambda,
            ..TrainConfig::default()
        },
    )?;
    let baseline_err = zero_one_error(&baseline, &test_ds);

    let config = SearchConfig {
        iterations: iters,
        candidate_mode: if train_ds.m() <= 500 {
            CandidateMode::Exhaustive
        } else {
            CandidateMode::Sampled { count: 4096 }
        },
        block_class: true,
        retrain_every,
        pvalue_every: 0,
        seed,
        ..SearchConfig::default()
    };
    let result = crossover_learn(
        &train_ds,
        &split,
        &config,
        &Objective::PhiRisk {
            loss,
            model: baseline.clone(),
        },
        Some(&test_ds),
    )?;

    let model = result.model.clone().unwrap_or(baseline);
    model.write_json(&dir.join("model.json"))?;
    write_trace_csv(&result.trace, &dir.join("trace.csv"))?;
    PermutationFile::new(&result.permutation, true, seed, iters).write(&dir.join("permutation.json"))?;

    manifest.wall_time_secs = Some(start.elapsed().as_secs_f64());
    manifest.write(&dir.join("manifest.json"))?;
    println!(
        "holdout error: baseline {:.4}, optimized {:.4} (lambda = {:.1e})",
        baseline_err,
        zero_one_error(&model, &test_ds),
        lambda
    );
    Ok(())
}

fn cmd_causal(flags: &Flags, raw_args: &[String]) -> Result<()> {
    let start = Instant::now();
    let dag_path = PathBuf::from(flags.require("dag")?);
    let dag = CausalDag::read_json(&dag_path)?;
    let dir = out_dir(flags)?;
    let seed: u64 = flags.parse_or("seed", 0)?;
    let mode = flags.require("mode")?;

    let mut manifest = RunManifest::new("causal", raw_args, seed);
    manifest.hash_input("dag", &dag_path)?;
    manifest.write(&dir.join("manifest.json"))?;

    match mode {
        "adjustments" => {
            let mut out = Vec::new();
            for (yname, xname) in dag.queries.clone() {
                let x = dag.index_of(&xname)?;
                let y = dag.index_of(&yname)?;
                let sets = backdoor_adjustments(&dag, x, y, dag.n())?;
                out.push(serde_json::json!({
                    "query": [yname, xname],
                    "minimal_adjustments": sets.iter().map(|s| s.variables.clone()).collect::<Vec<_>>(),
                }));
            }
            std::fs::write(dir.join("adjustments.json"), serde_json::to_string_pretty(&out)?)?;
            println!("wrote adjustments for {} queries", out.len());
        }
        "split" => {
            let families = interference_families(&dag)?;
            let outcome = interfering_split(&families, dag.n(), seed)?;
            let json = match &outcome {
                SplitOutcome::Feasible { anchor_mask } => {
                    let anchor: Vec<&str> = (0..dag.n())
                        .filter(|&i| anchor_mask[i])
                        .map(|i| dag.vertices[i].name.as_str())
                        .collect();
                    let shuffle: Vec<&str> = (0..dag.n())
                        .filter(|&i| !anchor_mask[i])
                        .map(|i| dag.vertices[i].name.as_str())
                        .collect();
                    serde_json::json!({"feasible": true, "anchor": anchor, "shuffle": shuffle})
                }
                SplitOutcome::Infeasible => serde_json::json!({
                    "feasible": false,
                    "certificate": "exhaustive enumeration of all bipartitions found a monochromatic family for each",
                }),
            };
            std::fs::write(dir.join("split.json"), serde_json::to_string_pretty(&json)?)?;
            manifest.wall_time_secs = Some(start.elapsed().as_secs_f64());
            manifest.write(&dir.join("manifest.json"))?;
            return match outcome {
                SplitOutcome::Feasible { .. } => {
                    println!("interfering split found");
                    Ok(())
                }
                SplitOutcome::Infeasible => Err(Error::infeasible("no interfering split exists; certificate written")),
            };
        }
        "jam" => {
            let (ds, data_path) = load_dataset(flags)?;
            manifest.hash_input("data", &data_path)?;
            if ds.d() < 3 {
                return Err(Error::data("jam mode needs at least features x1, x2, x3"));
            }
            let epsilon: f64 = flags.parse_or("epsilon", 0.2)?;
            let max_iter: usize = flags.parse_or("max-iter", 10_000)?;
            let res = greedy_partial_corr_jam(&ds, 0, 1, 2, epsilon, max_iter)?;
            let json = serde_json::json!({
                "rho_initial": res.rho_initial,
                "rho_final": res.rho_final,
                "bound": res.bound,
                "iterations": res.trace.len(),
                "preconditions_ok": res.preconditions_ok,
                "trace": res.trace,
            });
            std::fs::write(dir.join("jam.json"), serde_json::to_string_pretty(&json)?)?;
            PermutationFile::new(&res.permutation, true, seed, res.trace.len()).write(&dir.join("permutation.json"))?;
            println!("partial correlation: {:.4} -> {:.4} (bound {:.4})", res.rho_initial, res.rho_final, res.bound);
        }
        other => return Err(Error::Usage(format!("unknown --mode '{}'", other))),
    }

    manifest.wall_time_secs = Some(start.elapsed().as_secs_f64());
    manifest.write(&dir.join("manifest.json"))?;
    Ok(())
}

fn cmd_report(flags: &Flags) -> Result<()> {
    let trace_arg = flags.require("trace")?;
    let format = flags.get("format").unwrap_or("csv");
    let paths: Vec<&str> = trace_arg.split(',').collect();
    let mut traces = Vec::new();
    for p in &paths {
        traces.push(read_trace_csv(Path::new(p))?);
    }
    let out: Option<PathBuf> = flags.get("out").map(PathBuf::from);

    if traces.len() == 1 {
        let text = match format {
            "csv" => crate::search::trace_to_csv(&traces[0]),
            "json" => serde_json::to_string_pretty(&traces[0])?,
            other => return Err(Error::Usage(format!("unknown --format '{}'", other))),
        };
        emit(out.as_deref(), &text)?;
        return Ok(());
    }

    // multi-seed aggregation: per-iteration mean and standard error of the
    // objective and test error over runs that reach the iteration
    let max_len = traces.iter().map(|t| t.len()).max().unwrap_or(0);
    let mut rows = Vec::new();
    for it in 0..max_len {
        let collect = |f: &dyn Fn(&crate::search::TraceRecord) -> Option<f64>| -> (usize, f64, f64) {
            let vals: Vec<f64> = traces.iter().filter_map(|t| t.get(it)).filter_map(f).collect();
            let n = vals.len();
            if n == 0 {
                return (0, f64::NAN, f64::NAN);
            }
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let stderr = if n > 1 { (var / (n - 1) as f64).sqrt() } else { 0.0 };
            (n, mean, stderr)
        };
        let (n, obj_mean, obj_se) = collect(&|r| Some(r.objective));
        let (_, te_mean, te_se) = collect(&|r| r.test_error);
        rows.push(serde_json::json!({
            "iteration": it,
            "runs": n,
            "objective_mean": obj_mean,
            "objective_stderr": obj_se,
            "test_error_mean": if te_mean.is_nan() { None } else { Some(te_mean) },
            "test_error_stderr": if te_se.is_nan() { None } else { Some(te_se) },
        }));
    }
    let text = match format {
        "json" => serde_json::to_string_pretty(&rows)?,
        "csv" => {
            let mut s = String::from("iteration,runs,objective_mean,objective_stderr,test_error_mean,test_error_stderr\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r["iteration"],
                    r["runs"],
                    r["objective_mean"],
                    r["objective_stderr"],
                    r["test_error_mean"].as_f64().map(|v| v.to_string()).unwrap_or_default(),
                    r["test_error_stderr"].as_f64().map(|v| v.to_string()).unwrap_or_default(),
                ));
            }
            s
        }
        other => return Err(Error::Usage(format!("unknown --format '{}'", other))),
    };
    emit(out.as_deref(), &text)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{}", text),
    }
    Ok(())
}
