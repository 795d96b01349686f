//! Greedy crossover learning: iterative composition of block-class
//! elementary permutations under a pluggable objective, with optional
//! classifier retraining and a full per-iteration trace.
//!
//! Each iteration scores every candidate transposition against the current
//! shuffle matrix (exact deltas, O(m) or better per candidate), accepts the
//! best strictly improving one, composes it into the permutation and logs a
//! trace record. The walk stops early when nothing improves.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cp::{apply_cp, cycle_stats, FeatureSplit, Permutation, ShuffleSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hsic::{pvalue_permutation_test, HsicState};
use crate::kernel::KernelMatrix;
use crate::learn::{phi_risk, train, zero_one_error, LinearModel, Loss, TrainConfig};
use crate::parallel;

/// What the greedy walk minimizes.
#[derive(Debug, Clone)]
pub enum Objective {
    /// HSIC between two fixed kernels, the shuffle side conjugated.
    HsicReduce { ku: KernelMatrix, kv: KernelMatrix },
    /// Empirical phi-risk of a linear model on the shuffled sample.
    PhiRisk { loss: Loss, model: LinearModel },
    /// `|odds_ratio - target|` of a contingency table whose `x_A` column is
    /// being shuffled.
    OddsTarget {
        x_c: usize,
        x_a: usize,
        predicate: crate::fairness::Predicate,
        target_rho: f64,
    },
    /// Partial correlation `rho_{(jk).given}` with column `k` shuffled.
    PartialCorr { j: usize, given: usize, k: usize },
}

/// Candidate generation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateMode {
    Exhaustive,
    /// `count` uniform distinct pairs per iteration.
    Sampled { count: usize },
}

/// Search configuration for one crossover-learning run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub iterations: usize,
    pub candidate_mode: CandidateMode,
    /// Restrict transpositions to same-class pairs (keeps the mean operator).
    pub block_class: bool,
    /// Retrain the classifier every k accepted iterations; 0 = never.
    pub retrain_every: usize,
    /// Compute the permutation p-value every k iterations; 0 = never.
    pub pvalue_every: usize,
    pub pvalue_resamples: usize,
    pub seed: u64,
    /// Radius for the complexity bound column of the trace.
    pub r_s: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            iterations: 0,
            candidate_mode: CandidateMode::Exhaustive,
            block_class: true,
            retrain_every: 0,
            pvalue_every: 10,
            pvalue_resamples: 999,
            seed: 0,
            r_s: 1.0,
        }
    }
}

/// One row of the run trace; iteration 0 is the untouched baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub hsic: Option<f64>,
    pub p_value: Option<f64>,
    pub phi_risk: Option<f64>,
    pub test_error: Option<f64>,
    pub rcp_bound: f64,
    pub odd_cycles: usize,
    pub fixed_points: usize,
    pub accepted_pair: Option<(usize, usize)>,
}

/// Result of a crossover-learning run.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub permutation: Permutation,
    pub model: Option<LinearModel>,
    pub trace: Vec<TraceRecord>,
    /// True when the walk stopped because no candidate improved.
    pub converged: bool,
}

/// All same-class pairs (block-class) or all pairs; sampled mode draws
/// `count` distinct pairs uniformly from that population.
pub fn candidate_pairs(ds: &Dataset, block_class: bool, mode: CandidateMode, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = Vec::new();
    if block_class {
        for range in [ds.class_range(true), ds.class_range(false)] {
            let idx: Vec<usize> = range.collect();
            for (a, &l) in idx.iter().enumerate() {
                for &l2 in &idx[a + 1..] {
                    all.push((l, l2));
                }
            }
        }
    } else {
        for l in 0..ds.m() {
            for l2 in (l + 1)..ds.m() {
                all.push((l, l2));
            }
        }
    }
    match mode {
        CandidateMode::Exhaustive => all,
        CandidateMode::Sampled { count } => {
            let count = count.min(all.len());
            // partial Fisher-Yates for `count` distinct draws
            let mut pool = all;
            for i in 0..count {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            pool.truncate(count);
            pool
        }
    }
}

/// Internal mutable objective state with O(m)-or-better candidate scoring.
enum ObjectiveState<'a> {
    Hsic {
        state: HsicState,
    },
    PhiRisk {
        ds: &'a Dataset,
        split: &'a FeatureSplit,
        loss: Loss,
        model: LinearModel,
        /// score of the anchor part + intercept per row (fixed)
        anchor_scores: Vec<f64>,
        /// current shuffle-part score per row (moves with the permutation)
        shuffle_scores: Vec<f64>,
        /// current loss term per row
        terms: Vec<f64>,
        current: f64,
    },
    Odds {
        ds: &'a Dataset,
        x_c: usize,
        in_support: Vec<bool>,
        /// current x_A value per row (moves with the permutation)
        xa: Vec<f64>,
        target: f64,
        current: f64,
    },
    PartialCorr {
        cj: Vec<f64>,
        cl: Vec<f64>,
        ck: Vec<f64>,
        mu_j: f64,
        mu_l: f64,
        mu_k: f64,
        v_j: f64,
        v_l: f64,
        v_k: f64,
        r_jl: f64,
        s_jk: f64,
        s_lk: f64,
        m: usize,
        current: f64,
    },
}

impl<'a> ObjectiveState<'a> {
    fn new(objective: &Objective, ds: &'a Dataset, split: &'a FeatureSplit) -> Result<ObjectiveState<'a>> {
        match objective {
            Objective::HsicReduce { ku, kv } => {
                if ku.m() != ds.m() || kv.m() != ds.m() {
                    return Err(Error::dimension("kernel size does not match the sample".to_string()));
                }
                Ok(ObjectiveState::Hsic {
                    state: HsicState::new(ku, kv)?,
                })
            }
            Objective::PhiRisk { loss, model } => {
                if model.weights.len() != ds.d() {
                    return Err(Error::dimension("model dimension does not match the sample".to_string()));
                }
                let mut st = ObjectiveState::PhiRisk {
                    ds,
                    split,
                    loss: *loss,
                    model: model.clone(),
                    anchor_scores: Vec::new(),
                    shuffle_scores: Vec::new(),
                    terms: Vec::new(),
                    current: 0.0,
                };
                st.rebuild_phi_caches();
                Ok(st)
            }
            Objective::OddsTarget {
                x_c,
                x_a,
                predicate,
                target_rho,
            } => {
                if !split.contains_in_shuffle(*x_a) {
                    return Err(Error::data("x_A must belong to the shuffle set"));
                }
                let mut in_support = vec![false; ds.m()];
                for i in 0..ds.m() {
                    in_support[i] = predicate.holds(ds, i)?;
                }
                let xa = ds.column(*x_a);
                let mut st = ObjectiveState::Odds {
                    ds,
                    x_c: *x_c,
                    in_support,
                    xa,
                    target: *target_rho,
                    current: 0.0,
                };
                let v = st.odds_objective(None)?;
                if let ObjectiveState::Odds { current, .. } = &mut st {
                    *current = v;
                }
                Ok(st)
            }
            Objective::PartialCorr { j, given, k } => {
                if !split.contains_in_shuffle(*k) {
                    return Err(Error::data("the shuffled variable must belong to the shuffle set"));
                }
                let cj = ds.column(*j);
                let cl = ds.column(*given);
                let ck = ds.column(*k);
                let m = ds.m();
                let stats = |c: &[f64]| {
                    let mu = c.iter().sum::<f64>() / m as f64;
                    let v = c.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / m as f64;
                    (mu, v)
                };
                let (mu_j, v_j) = stats(&cj);
                let (mu_l, v_l) = stats(&cl);
                let (mu_k, v_k) = stats(&ck);
                if v_j <= 0.0 || v_l <= 0.0 || v_k <= 0.0 {
                    return Err(Error::numeric("zero-variance column in partial-correlation objective"));
                }
                let c_jl: f64 = cj.iter().zip(&cl).map(|(a, b)| (a - mu_j) * (b - mu_l)).sum::<f64>() / m as f64;
                let r_jl = c_jl / (v_j * v_l).sqrt();
                let s_jk: f64 = cj.iter().zip(&ck).map(|(a, b)| a * b).sum();
                let s_lk: f64 = cl.iter().zip(&ck).map(|(a, b)| a * b).sum();
                let mut st = ObjectiveState::PartialCorr {
                    cj,
                    cl,
                    ck,
                    mu_j,
                    mu_l,
                    mu_k,
                    v_j,
                    v_l,
                    v_k,
                    r_jl,
                    s_jk,
                    s_lk,
                    m,
                    current: 0.0,
                };
                let v = st.partial_value(None).ok_or_else(|| Error::numeric("degenerate partial correlation"))?;
                if let ObjectiveState::PartialCorr { current, .. } = &mut st {
                    *current = v;
                }
                Ok(st)
            }
        }
    }

    fn rebuild_phi_caches(&mut self) {
        if let ObjectiveState::PhiRisk {
            ds,
            split,
            loss,
            model,
            anchor_scores,
            shuffle_scores,
            terms,
            current,
        } = self
        {
            let m = ds.m();
            anchor_scores.clear();
            shuffle_scores.clear();
            terms.clear();
            let mut total = 0.0;
            for i in 0..m {
                let mut a = model.intercept;
                for &j in split.anchor() {
                    a += model.weights[j] * ds.value(i, j);
                }
                anchor_scores.push(a);
                shuffle_scores.push(0.0);
                terms.push(0.0);
            }
            // shuffle scores currently follow the *current* assignment held in
            // the caller's permutation; the caller rebuilds after retraining
            for i in 0..m {
                let z = ds.label(i) as f64 * (anchor_scores[i] + shuffle_scores[i]);
                terms[i] = loss.value(z);
                total += terms[i];
            }
            *current = total / m as f64;
        }
    }

    /// Current objective value.
    fn current(&self) -> f64 {
        match self {
            ObjectiveState::Hsic { state } => state.current(),
            ObjectiveState::PhiRisk { current, .. } => *current,
            ObjectiveState::Odds { current, .. } => *current,
            ObjectiveState::PartialCorr { current, .. } => *current,
        }
    }

    fn odds_objective(&self, swap: Option<(usize, usize)>) -> Result<f64> {
        if let ObjectiveState::Odds {
            ds,
            x_c,
            in_support,
            xa,
            target,
            ..
        } = self
        {
            let (mut b, mut d) = (0u64, 0u64);
            for i in 0..ds.m() {
                if !in_support[i] {
                    continue;
                }
                let mut v = xa[i];
                if let Some((l, l2)) = swap {
                    if i == l {
                        v = xa[l2];
                    } else if i == l2 {
                        v = xa[l];
                    }
                }
                let c = ds.value(i, *x_c);
                if c == 1.0 {
                    if v == 0.0 {
                        b += 1;
                    } else {
                        d += 1;
                    }
                }
            }
            if d == 0 {
                return Err(Error::numeric("undefined odds: d = 0"));
            }
            Ok((b as f64 / d as f64 - target).abs())
        } else {
            unreachable!()
        }
    }

    fn partial_value(&self, swap: Option<(usize, usize)>) -> Option<f64> {
        if let ObjectiveState::PartialCorr {
            cj,
            cl,
            ck,
            mu_j,
            mu_l,
            mu_k,
            v_j,
            v_l,
            v_k,
            r_jl,
            s_jk,
            s_lk,
            m,
            ..
        } = self
        {
            let (mut s1, mut s2) = (*s_jk, *s_lk);
            if let Some((l, l2)) = swap {
                let dk = ck[l] - ck[l2];
                s1 -= (cj[l] - cj[l2]) * dk;
                s2 -= (cl[l] - cl[l2]) * dk;
            }
            let c_jk = s1 / *m as f64 - mu_j * mu_k;
            let c_lk = s2 / *m as f64 - mu_l * mu_k;
            let r_jk = c_jk / (v_j * v_k).sqrt();
            let r_lk = c_lk / (v_l * v_k).sqrt();
            let den = (1.0 - r_jl * r_jl) * (1.0 - r_lk * r_lk);
            if den <= 0.0 {
                return None;
            }
            Some((r_jk - r_jl * r_lk) / den.sqrt())
        } else {
            unreachable!()
        }
    }

    /// Exact objective change for composing the transposition on top of the
    /// current state; infinity when the candidate is invalid.
    fn delta(&self, l: usize, l2: usize) -> f64 {
        match self {
            ObjectiveState::Hsic { state } => state.delta(l, l2),
            ObjectiveState::PhiRisk {
                ds,
                loss,
                model: _,
                anchor_scores,
                shuffle_scores,
                terms,
                ..
            } => {
                let m = ds.m() as f64;
                let zl = ds.label(l) as f64 * (anchor_scores[l] + shuffle_scores[l2]);
                let zl2 = ds.label(l2) as f64 * (anchor_scores[l2] + shuffle_scores[l]);
                (loss.value(zl) + loss.value(zl2) - terms[l] - terms[l2]) / m
            }
            ObjectiveState::Odds { current, .. } => match self.odds_objective(Some((l, l2))) {
                Ok(v) => v - current,
                Err(_) => f64::INFINITY,
            },
            ObjectiveState::PartialCorr { current, .. } => match self.partial_value(Some((l, l2))) {
                Some(v) => v - current,
                None => f64::INFINITY,
            },
        }
    }

    fn apply(&mut self, l: usize, l2: usize) {
        match self {
            ObjectiveState::Hsic { state } => {
                state.apply(l, l2);
            }
            ObjectiveState::PhiRisk {
                ds,
                loss,
                anchor_scores,
                shuffle_scores,
                terms,
                current,
                ..
            } => {
                shuffle_scores.swap(l, l2);
                let m = ds.m() as f64;
                for i in [l, l2] {
                    let z = ds.label(i) as f64 * (anchor_scores[i] + shuffle_scores[i]);
                    let t = loss.value(z);
                    *current += (t - terms[i]) / m;
                    terms[i] = t;
                }
            }
            ObjectiveState::Odds { .. } => {
                if let ObjectiveState::Odds { xa, .. } = self {
                    xa.swap(l, l2);
                }
                // recount is O(m); odds tables are tiny in practice
                let v = self.odds_objective(None).unwrap_or(f64::INFINITY);
                if let ObjectiveState::Odds { current, .. } = self {
                    *current = v;
                }
            }
            ObjectiveState::PartialCorr { .. } => {
                if let ObjectiveState::PartialCorr {
                    cj, cl, ck, s_jk, s_lk, ..
                } = self
                {
                    let dk = ck[l] - ck[l2];
                    *s_jk -= (cj[l] - cj[l2]) * dk;
                    *s_lk -= (cl[l] - cl[l2]) * dk;
                    ck.swap(l, l2);
                }
                let v = self.partial_value(None).unwrap_or(f64::INFINITY);
                if let ObjectiveState::PartialCorr { current, .. } = self {
                    *current = v;
                }
            }
        }
    }

    /// Synchronizes shuffle-part scores with the sample shuffled by `perm`
    /// (phi-risk only; other objectives carry their own state).
    fn sync_phi_scores(&mut self, perm: &Permutation) {
        if let ObjectiveState::PhiRisk {
            ds,
            split,
            loss,
            model,
            anchor_scores,
            shuffle_scores,
            terms,
            current,
        } = self
        {
            let m = ds.m();
            for i in 0..m {
                let src = perm.target(i);
                let mut s = 0.0;
                for &j in split.shuffle() {
                    s += model.weights[j] * ds.value(src, j);
                }
                shuffle_scores[i] = s;
            }
            let mut total = 0.0;
            for i in 0..m {
                let z = ds.label(i) as f64 * (anchor_scores[i] + shuffle_scores[i]);
                terms[i] = loss.value(z);
                total += terms[i];
            }
            *current = total / m as f64;
        }
    }
}

/// Runs the greedy crossover-learning loop.
///
/// `holdout` supplies an untouched test set for the `test_error` column.
/// With `retrain_every > 0` and a phi-risk objective, the classifier is
/// refit (same lambda) on the shuffled sample every k accepted steps and the
/// final model is refit at the end.
pub fn crossover_learn(
    ds: &Dataset,
    split: &FeatureSplit,
    config: &SearchConfig,
    objective: &Objective,
    holdout: Option<&Dataset>,
) -> Result<SearchResult> {
    let m = ds.m();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut perm = Permutation::identity(m);
    let mut state = ObjectiveState::new(objective, ds, split)?;
    state.sync_phi_scores(&perm);

    let mut model: Option<LinearModel> = match objective {
        Objective::PhiRisk { model, .. } => Some(model.clone()),
        _ => None,
    };
    let loss_kind = match objective {
        Objective::PhiRisk { loss, .. } => Some(*loss),
        _ => None,
    };

    let mut trace: Vec<TraceRecord> = Vec::with_capacity(config.iterations + 1);
    let record = |iteration: usize,
                  perm: &Permutation,
                  state: &ObjectiveState,
                  model: &Option<LinearModel>,
                  accepted: Option<(usize, usize)>,
                  force_pvalue: bool|
     -> Result<TraceRecord> {
        let stats = cycle_stats(perm);
        let hsic_value = match state {
            ObjectiveState::Hsic { state } => Some(state.current()),
            _ => None,
        };
        let p_value = if let ObjectiveState::Hsic { state } = state {
            let due = config.pvalue_every > 0 && iteration.is_multiple_of(config.pvalue_every);
            if force_pvalue || due {
                let view = state.kv_view()?;
                Some(pvalue_permutation_test(
                    state.ku(),
                    &view,
                    config.pvalue_resamples,
                    config.seed.wrapping_add(iteration as u64),
                )?)
            } else {
                None
            }
        } else {
            None
        };
        let bound = crate::complexity::rcp_bound_linear(ds, split, &ShuffleSpec::Permutation(perm.clone()), config.r_s)?;
        let (phi, test_error) = match (&model, loss_kind) {
            (Some(mdl), Some(loss)) => {
                let shuffled = apply_cp(ds, split, &ShuffleSpec::Permutation(perm.clone()))?;
                let phi = phi_risk(mdl, &shuffled, loss);
                let te = holdout.map(|h| zero_one_error(mdl, h));
                (Some(phi), te)
            }
            _ => (None, None),
        };
        Ok(TraceRecord {
            iteration,
            objective: state.current(),
            hsic: hsic_value,
            p_value,
            phi_risk: phi,
            test_error,
            rcp_bound: bound.bound,
            odd_cycles: stats.odd_cycles,
            fixed_points: stats.fixed_points,
            accepted_pair: accepted,
        })
    };

    trace.push(record(0, &perm, &state, &model, None, true)?);

    let mut converged = false;
    let mut accepted_count = 0usize;
    for t in 1..=config.iterations {
        let pairs = candidate_pairs(ds, config.block_class, config.candidate_mode, &mut rng);
        let best = parallel::argmin_over(pairs.len(), |i| {
            let (l, l2) = pairs[i];
            state.delta(l, l2)
        });
        let improving = match best {
            Some((idx, dv)) if dv < -1e-12 && dv.is_finite() => Some(pairs[idx]),
            _ => None,
        };
        match improving {
            Some((l, l2)) => {
                state.apply(l, l2);
                perm.swap_targets(l, l2);
                accepted_count += 1;
                if config.retrain_every > 0 && accepted_count.is_multiple_of(config.retrain_every) {
                    if let (Some(loss), Some(mdl)) = (loss_kind, model.as_mut()) {
                        let shuffled = apply_cp(ds, split, &ShuffleSpec::Permutation(perm.clone()))?;
                        *mdl = train(
                            &shuffled,
                            loss,
                            TrainConfig {
                                lambda: mdl.lambda,
                                ..TrainConfig::default()
                            },
                        )?;
                        if let ObjectiveState::PhiRisk { model: m2, .. } = &mut state {
                            *m2 = mdl.clone();
                        }
                        state.rebuild_phi_caches();
                        state.sync_phi_scores(&perm);
                    }
                }
                trace.push(record(t, &perm, &state, &model, Some((l, l2)), false)?);
            }
            None => {
                converged = true;
                trace.push(record(t, &perm, &state, &model, None, false)?);
                break;
            }
        }
    }

    // final refit and final p-value
    if config.retrain_every > 0 {
        if let (Some(loss), Some(mdl)) = (loss_kind, model.as_mut()) {
            let shuffled = apply_cp(ds, split, &ShuffleSpec::Permutation(perm.clone()))?;
            *mdl = train(
                &shuffled,
                loss,
                TrainConfig {
                    lambda: mdl.lambda,
                    ..TrainConfig::default()
                },
            )?;
        }
    }
    if let Some(last) = trace.last_mut() {
        if last.p_value.is_none() {
            if let ObjectiveState::Hsic { state } = &state {
                let view = state.kv_view()?;
                last.p_value = Some(pvalue_permutation_test(
                    state.ku(),
                    &view,
                    config.pvalue_resamples,
                    config.seed.wrapping_add(last.iteration as u64),
                )?);
            }
        }
        if let (Some(mdl), Some(h)) = (&model, holdout) {
            last.test_error = Some(zero_one_error(mdl, h));
        }
    }

    Ok(SearchResult {
        permutation: perm,
        model,
        trace,
        converged,
    })
}

/// Exact objective change for one candidate against a fresh state: mostly a
/// convenience for tests and callers scoring a single pair.
pub fn evaluate_candidate(
    ds: &Dataset,
    split: &FeatureSplit,
    objective: &Objective,
    pair: (usize, usize),
) -> Result<f64> {
    let mut state = ObjectiveState::new(objective, ds, split)?;
    state.sync_phi_scores(&Permutation::identity(ds.m()));
    Ok(state.delta(pair.0, pair.1))
}

const TRACE_HEADER: &str = "iteration,objective,hsic,p_value,phi_risk,test_error,rcp_bound,odd_cycles,fixed_points,pair_l,pair_l2";

/// Serializes a trace to the plot-ready CSV layout.
pub fn write_trace_csv(trace: &[TraceRecord], path: &Path) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace))?;
    Ok(())
}

pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", TRACE_HEADER);
    let opt = |v: Option<f64>| v.map(|x| format!("{:.17e}", x)).unwrap_or_default();
    for r in trace {
        let _ = writeln!(
            out,
            "{},{:.17e},{},{},{},{},{:.17e},{},{},{},{}",
            r.iteration,
            r.objective,
            opt(r.hsic),
            opt(r.p_value),
            opt(r.phi_risk),
            opt(r.test_error),
            r.rcp_bound,
            r.odd_cycles,
            r.fixed_points,
            r.accepted_pair.map(|p| p.0.to_string()).unwrap_or_default(),
            r.accepted_pair.map(|p| p.1.to_string()).unwrap_or_default(),
        );
    }
    out
}

/// Parses a trace CSV back into records (for `report` aggregation).
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_trace_csv(&text)
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::data("empty trace"))?;
    if header.trim() != TRACE_HEADER {
        return Err(Error::data(format!("malformed trace header: '{}'", header)));
    }
    let mut out = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 11 {
            return Err(Error::data(format!("trace line {}: {} cells, expected 11", no + 2, cells.len())));
        }
        let req = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::data(format!("trace line {}: bad number '{}'", no + 2, s)))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                req(s).map(Some)
            }
        };
        let pair = if cells[9].is_empty() {
            None
        } else {
            Some((
                cells[9]
                    .parse::<usize>()
                    .map_err(|_| Error::data(format!("trace line {}: bad index", no + 2)))?,
                cells[10]
                    .parse::<usize>()
                    .map_err(|_| Error::data(format!("trace line {}: bad index", no + 2)))?,
            ))
        };
        out.push(TraceRecord {
            iteration: cells[0]
                .parse()
                .map_err(|_| Error::data(format!("trace line {}: bad iteration", no + 2)))?,
            objective: req(cells[1])?,
            hsic: opt(cells[2])?,
            p_value: opt(cells[3])?,
            phi_risk: opt(cells[4])?,
            test_error: opt(cells[5])?,
            rcp_bound: req(cells[6])?,
            odd_cycles: cells[7]
                .parse()
                .map_err(|_| Error::data(format!("trace line {}: bad odd_cycles", no + 2)))?,
            fixed_points: cells[8]
                .parse()
                .map_err(|_| Error::data(format!("trace line {}: bad fixed_points", no + 2)))?,
            accepted_pair: pair,
        });
    }
    Ok(out)
}
