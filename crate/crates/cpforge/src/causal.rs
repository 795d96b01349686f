//! Partial-correlation jamming and adjustment-interference splits on causal
//! DAGs.
//!
//! Two halves live here. The statistical half drives the partial correlation
//! `rho_{(jk).l}` down through block-class transpositions of one column (the
//! worst case for conditional-independence-based causal analysis). The
//! graphical half enumerates minimal back-door adjustment sets on small DAGs
//! and searches for a feature split that interferes with every query.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cp::Permutation;
use crate::data::Dataset;
use crate::error::{Error, Result};

const DEGENERATE_CORR: f64 = 1.0 - 1e-12;

// ---------------------------------------------------------------------------
// partial correlations and jamming
// ---------------------------------------------------------------------------

fn column_stats(col: &[f64]) -> (f64, f64) {
    let m = col.len() as f64;
    let mean = col.iter().sum::<f64>() / m;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    (mean, var)
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len() as f64;
    let (ma, _) = column_stats(a);
    let (mb, _) = column_stats(b);
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / m
}

fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    let (_, va) = column_stats(a);
    let (_, vb) = column_stats(b);
    if va <= 0.0 || vb <= 0.0 {
        return Err(Error::numeric("zero-variance column in correlation"));
    }
    Ok(covariance(a, b) / (va * vb).sqrt())
}

/// `rho_{(jk).l} = (rho_jk - rho_jl rho_lk) / sqrt((1 - rho_jl^2)(1 - rho_lk^2))`.
pub fn partial_correlation(ds: &Dataset, j: usize, k: usize, given: usize) -> Result<f64> {
    let cj = ds.column(j);
    let ck = ds.column(k);
    let cl = ds.column(given);
    partial_correlation_cols(&cj, &ck, &cl)
}

pub fn partial_correlation_cols(cj: &[f64], ck: &[f64], cl: &[f64]) -> Result<f64> {
    let r_jk = correlation(cj, ck)?;
    let r_jl = correlation(cj, cl)?;
    let r_lk = correlation(cl, ck)?;
    if r_jl * r_jl > DEGENERATE_CORR || r_lk * r_lk > DEGENERATE_CORR {
        return Err(Error::numeric("conditioning variable is degenerate: |correlation| ~ 1"));
    }
    Ok((r_jk - r_jl * r_lk) / ((1.0 - r_jl * r_jl) * (1.0 - r_lk * r_lk)).sqrt())
}

/// Class-standardized mean gap `(mu_j^+ - mu_j^-) / sqrt(v_j)`.
fn standardized_mean_gap(ds: &Dataset, j: usize) -> Result<f64> {
    let col = ds.column(j);
    let (_, v) = column_stats(&col);
    if v <= 0.0 {
        return Err(Error::numeric("zero-variance column"));
    }
    let mut mu_pos = 0.0;
    let mut mu_neg = 0.0;
    for i in 0..ds.m() {
        if ds.label(i) == 1 {
            mu_pos += col[i];
        } else {
            mu_neg += col[i];
        }
    }
    mu_pos /= ds.m_pos() as f64;
    mu_neg /= ds.m_neg() as f64;
    Ok((mu_pos - mu_neg) / v.sqrt())
}

/// The worst-case residual the jam converges to:
/// `R = (1 - eps)^-1 p_+(1 - p_+) (mu~_1 - rho_12 mu~_2) mu~_3` over the
/// fixed triple `(x_1, x_2, x_3) = (features 0, 1, 2)` of the model, with
/// `mu~_j` the class-standardized mean gap.
pub fn cm_bound_r(ds: &Dataset, epsilon: f64) -> Result<f64> {
    cm_bound_r_cols(ds, 0, 1, 2, epsilon)
}

/// Same bound for an arbitrary variable triple `(j, l, k)` standing for
/// `(x_1, x_2, x_3)`.
pub fn cm_bound_r_cols(ds: &Dataset, j: usize, given: usize, k: usize, epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::data("epsilon must lie in [0, 1)"));
    }
    let p = ds.m_pos() as f64 / ds.m() as f64;
    let rho_12 = correlation(&ds.column(j), &ds.column(given))?;
    let g1 = standardized_mean_gap(ds, j)?;
    let g2 = standardized_mean_gap(ds, given)?;
    let g3 = standardized_mean_gap(ds, k)?;
    Ok(1.0 / (1.0 - epsilon) * p * (1.0 - p) * (g1 - rho_12 * g2) * g3)
}

/// One record per accepted jam transposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JamStep {
    pub iteration: usize,
    pub rho: f64,
    pub pair: (usize, usize),
}

/// Outcome of the greedy partial-correlation jam.
#[derive(Debug, Clone)]
pub struct JamResult {
    pub permutation: Permutation,
    pub rho_initial: f64,
    pub rho_final: f64,
    pub bound: f64,
    pub trace: Vec<JamStep>,
    /// False when a precondition (degenerate correlations) was violated and
    /// the result is best-effort only.
    pub preconditions_ok: bool,
}

/// Greedy block-class jam of `rho_{(jk).given}` where `k` is the shuffled
/// column (`j`, `given` anchored). Each accepted transposition strictly
/// decreases the partial correlation; the walk stops when it reaches the
/// bound `R` or no candidate improves.
pub fn greedy_partial_corr_jam(
    ds: &Dataset,
    j: usize,
    given: usize,
    k: usize,
    epsilon: f64,
    max_iter: usize,
) -> Result<JamResult> {
    let m = ds.m();
    let cj = ds.column(j);
    let cl = ds.column(given);
    let ck0 = ds.column(k);

    let bound = cm_bound_r_cols(ds, j, given, k, epsilon)?;

    let (mu_j, v_j) = column_stats(&cj);
    let (mu_l, v_l) = column_stats(&cl);
    let (mu_k, v_k) = column_stats(&ck0);
    if v_j <= 0.0 || v_l <= 0.0 || v_k <= 0.0 {
        return Err(Error::numeric("zero-variance column"));
    }
    let c_jl = covariance(&cj, &cl);
    let r_jl = c_jl / (v_j * v_l).sqrt();
    let mut preconditions_ok = r_jl * r_jl <= DEGENERATE_CORR;

    // permuting k only moves sums of cross products; everything else is fixed
    let mut ck = ck0.clone();
    let mut s_jk: f64 = cj.iter().zip(&ck).map(|(a, b)| a * b).sum();
    let mut s_lk: f64 = cl.iter().zip(&ck).map(|(a, b)| a * b).sum();

    let partial = |s_jk: f64, s_lk: f64| -> Option<f64> {
        let c_jk = s_jk / m as f64 - mu_j * mu_k;
        let c_lk = s_lk / m as f64 - mu_l * mu_k;
        let r_jk = c_jk / (v_j * v_k).sqrt();
        let r_lk = c_lk / (v_l * v_k).sqrt();
        let den = (1.0 - r_jl * r_jl) * (1.0 - r_lk * r_lk);
        if den <= 0.0 {
            return None;
        }
        Some((r_jk - r_jl * r_lk) / den.sqrt())
    };

    let rho_initial = partial(s_jk, s_lk).ok_or_else(|| Error::numeric("degenerate initial correlations"))?;
    let mut rho = rho_initial;
    let mut perm = Permutation::identity(m);
    let mut trace = Vec::new();

    let classes: [Vec<usize>; 2] = [ds.class_range(true).collect(), ds.class_range(false).collect()];
    let mut iter = 0;
    while rho > bound && iter < max_iter {
        let mut best: Option<(usize, usize, f64, f64, f64)> = None;
        for class in &classes {
            for (a, &l) in class.iter().enumerate() {
                for &l2 in &class[a + 1..] {
                    let dk = ck[l] - ck[l2];
                    if dk == 0.0 {
                        continue;
                    }
                    let nd_jk = s_jk - (cj[l] - cj[l2]) * dk;
                    let nd_lk = s_lk - (cl[l] - cl[l2]) * dk;
                    if let Some(cand) = partial(nd_jk, nd_lk) {
                        if cand < rho - 1e-12 && best.is_none_or(|b| cand < b.2) {
                            best = Some((l, l2, cand, nd_jk, nd_lk));
                        }
                    }
                }
            }
        }
        match best {
            Some((l, l2, cand, nd_jk, nd_lk)) => {
                ck.swap(l, l2);
                perm.swap_targets(l, l2);
                s_jk = nd_jk;
                s_lk = nd_lk;
                rho = cand;
                iter += 1;
                trace.push(JamStep {
                    iteration: iter,
                    rho,
                    pair: (l, l2),
                });
            }
            None => break,
        }
    }

    // final-state precondition check for the (1 - eps) slack
    let c_lk = s_lk / m as f64 - mu_l * mu_k;
    let r_lk = c_lk / (v_l * v_k).sqrt();
    if r_lk * r_lk > 1.0 - epsilon || r_jl * r_jl > 1.0 - epsilon {
        preconditions_ok = false;
    }

    Ok(JamResult {
        permutation: perm,
        rho_initial,
        rho_final: rho,
        bound,
        trace,
        preconditions_ok,
    })
}

/// One uniform block-class permutation (independent uniform permutations per
/// class) and the partial correlation it produces on the shuffled column `k`.
pub fn random_blockclass_jam(ds: &Dataset, j: usize, given: usize, k: usize, seed: u64) -> Result<(Permutation, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets: Vec<usize> = (0..ds.m()).collect();
    {
        let (pos, neg) = targets.split_at_mut(ds.m_pos());
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
    }
    let perm = Permutation::new(targets)?;
    let ck: Vec<f64> = (0..ds.m()).map(|i| ds.value(perm.target(i), k)).collect();
    let rho = partial_correlation_cols(&ds.column(j), &ck, &ds.column(given))?;
    Ok((perm, rho))
}

// ---------------------------------------------------------------------------
// causal DAGs, back-door adjustment, interfering splits
// ---------------------------------------------------------------------------

/// Causal DAG over named vertices, some latent, with attached queries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CausalDag {
    pub vertices: Vec<Vertex>,
    /// Arcs as `(from, to)` vertex indices.
    #[serde(skip)]
    arcs_idx: Vec<(usize, usize)>,
    /// Arcs as name pairs for serialization.
    pub arcs: Vec<(String, String)>,
    /// Queries as `(y, x)` name pairs.
    pub queries: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    #[serde(default)]
    pub latent: bool,
}

impl CausalDag {
    pub fn new(vertices: Vec<Vertex>, arcs: Vec<(String, String)>, queries: Vec<(String, String)>) -> Result<CausalDag> {
        let mut dag = CausalDag {
            vertices,
            arcs_idx: Vec::new(),
            arcs,
            queries,
        };
        dag.rebuild_indices()?;
        Ok(dag)
    }

    fn rebuild_indices(&mut self) -> Result<()> {
        let index: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        if index.len() != self.vertices.len() {
            return Err(Error::data("duplicate vertex names"));
        }
        self.arcs_idx.clear();
        for (a, b) in &self.arcs {
            let ia = *index.get(a.as_str()).ok_or_else(|| Error::data(format!("unknown vertex '{}'", a)))?;
            let ib = *index.get(b.as_str()).ok_or_else(|| Error::data(format!("unknown vertex '{}'", b)))?;
            self.arcs_idx.push((ia, ib));
        }
        for (y, x) in &self.queries {
            for name in [y, x] {
                let i = *index
                    .get(name.as_str())
                    .ok_or_else(|| Error::data(format!("unknown query vertex '{}'", name)))?;
                if self.vertices[i].latent {
                    return Err(Error::data(format!("query variable '{}' is latent", name)));
                }
            }
        }
        if self.topological_order().is_none() {
            return Err(Error::data("graph has a cycle"));
        }
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<CausalDag> {
        let text = std::fs::read_to_string(path)?;
        CausalDag::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<CausalDag> {
        #[derive(Deserialize)]
        struct Raw {
            vertices: Vec<Vertex>,
            arcs: Vec<(String, String)>,
            #[serde(default)]
            queries: Vec<(String, String)>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        CausalDag::new(raw.vertices, raw.arcs, raw.queries)
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::data(format!("unknown vertex '{}'", name)))
    }

    pub fn observable_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.vertices[i].latent).collect()
    }

    pub fn parents_of(&self, v: usize) -> Vec<usize> {
        self.arcs_idx.iter().filter(|&&(_, b)| b == v).map(|&(a, _)| a).collect()
    }

    pub fn children_of(&self, v: usize) -> Vec<usize> {
        self.arcs_idx.iter().filter(|&&(a, _)| a == v).map(|&(_, b)| b).collect()
    }

    fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut indeg = vec![0usize; n];
        for &(_, b) in &self.arcs_idx {
            indeg[b] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop() {
            order.push(v);
            for c in self.children_of(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn descendants_of(&self, v: usize) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for c in self.children_of(u) {
                if !mask[c] {
                    mask[c] = true;
                    stack.push(c);
                }
            }
        }
        mask
    }

    fn ancestral_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            mask[s] = true;
        }
        while let Some(u) = stack.pop() {
            for p in self.parents_of(u) {
                if !mask[p] {
                    mask[p] = true;
                    stack.push(p);
                }
            }
        }
        mask
    }

    /// d-separation of `x` and `y` given `z`, by moralizing the ancestral
    /// graph of `{x, y}.union(z)` and testing reachability around `z`.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize], drop_x_out_arcs: bool) -> bool {
        let mut seeds = vec![x, y];
        seeds.extend_from_slice(z);
        let keep = self.ancestral_mask(&seeds);
        let n = self.n();

        let arc_kept = |a: usize, b: usize| -> bool {
            if !(keep[a] && keep[b]) {
                return false;
            }
            !(drop_x_out_arcs && a == x)
        };

        // moral graph: arc endpoints joined, co-parents married
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in &self.arcs_idx {
            if arc_kept(a, b) {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        for v in 0..n {
            if !keep[v] {
                continue;
            }
            let parents: Vec<usize> = self
                .arcs_idx
                .iter()
                .filter(|&&(a, b)| b == v && arc_kept(a, b))
                .map(|&(a, _)| a)
                .collect();
            for (i, &p) in parents.iter().enumerate() {
                for &q in &parents[i + 1..] {
                    adj[p][q] = true;
                    adj[q][p] = true;
                }
            }
        }

        // BFS from x avoiding z
        let mut blocked = vec![false; n];
        for &v in z {
            blocked[v] = true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![x];
        seen[x] = true;
        while let Some(u) = stack.pop() {
            if u == y {
                return false;
            }
            for v in 0..n {
                if adj[u][v] && !seen[v] && !blocked[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        true
    }
}

/// An observable set satisfying the back-door criterion for `(y, x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjustmentSet {
    /// Vertex names, sorted.
    pub variables: Vec<String>,
    pub query: (String, String),
}

/// True iff `z` satisfies the back-door criterion for the effect of `x` on
/// `y`: no descendant of `x` inside, and `z` blocks every back-door path
/// (d-separation with `x`'s outgoing arcs removed).
pub fn is_backdoor_set(dag: &CausalDag, x: usize, y: usize, z: &[usize]) -> bool {
    let desc = dag.descendants_of(x);
    if z.iter().any(|&v| desc[v] || v == x || v == y) {
        return false;
    }
    dag.d_separated(x, y, z, true)
}

const MAX_BRUTE_FORCE_OBSERVABLES: usize = 20;

/// All inclusion-minimal back-door adjustment sets for the query `(y, x)`,
/// by brute force over observable subsets. The empty list means no
/// adjustment exists; a singleton `[{}]` means the empty set already adjusts.
pub fn backdoor_adjustments(dag: &CausalDag, x: usize, y: usize, max_size: usize) -> Result<Vec<AdjustmentSet>> {
    let observables: Vec<usize> = dag
        .observable_indices()
        .into_iter()
        .filter(|&v| v != x && v != y)
        .collect();
    if dag.observable_indices().len() > MAX_BRUTE_FORCE_OBSERVABLES {
        return Err(Error::infeasible(format!(
            "{} observables exceed the brute-force cap {}",
            dag.observable_indices().len(),
            MAX_BRUTE_FORCE_OBSERVABLES
        )));
    }
    let mut valid: Vec<Vec<usize>> = Vec::new();
    let n = observables.len();
    for bits in 0u64..(1u64 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| (bits >> i) & 1 == 1).map(|i| observables[i]).collect();
        if subset.len() > max_size {
            continue;
        }
        if is_backdoor_set(dag, x, y, &subset) {
            valid.push(subset);
        }
    }
    // keep inclusion-minimal sets
    let mut minimal: Vec<Vec<usize>> = Vec::new();
    for cand in &valid {
        let has_smaller = valid
            .iter()
            .any(|o| o.len() < cand.len() && o.iter().all(|v| cand.contains(v)));
        if !has_smaller {
            minimal.push(cand.clone());
        }
    }
    minimal.sort();
    minimal.dedup();
    Ok(minimal
        .into_iter()
        .map(|vs| AdjustmentSet {
            variables: vs.iter().map(|&v| dag.vertices[v].name.clone()).collect(),
            query: (dag.vertices[y].name.clone(), dag.vertices[x].name.clone()),
        })
        .collect())
}

/// The variable families `V_i = {x, y} U Z_i` the interference condition
/// ranges over: one per minimal adjustment of each query.
pub fn interference_families(dag: &CausalDag) -> Result<Vec<Vec<usize>>> {
    if dag.queries.is_empty() {
        return Err(Error::data("no queries attached to the graph"));
    }
    let mut families = Vec::new();
    for (yname, xname) in &dag.queries {
        let y = dag.index_of(yname)?;
        let x = dag.index_of(xname)?;
        let adjustments = backdoor_adjustments(dag, x, y, dag.n())?;
        for adj in adjustments {
            let mut fam = vec![x, y];
            for v in &adj.variables {
                fam.push(dag.index_of(v)?);
            }
            fam.sort_unstable();
            fam.dedup();
            families.push(fam);
        }
    }
    Ok(families)
}

/// Outcome of the interfering-split search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitOutcome {
    /// Anchor-membership mask over observables: every family straddles it.
    Feasible { anchor_mask: Vec<bool> },
    /// Exhaustive search proved no split works (the certificate is the
    /// family list itself).
    Infeasible,
}

const MAX_EXHAUSTIVE_SPLIT: usize = 24;

/// Searches for a feature bipartition such that every family `V_i` has a
/// member on both sides (the set-splitting condition). Exhaustive below 25
/// observables (sound and complete), randomized flip-improve above.
pub fn interfering_split(families: &[Vec<usize>], n_vars: usize, seed: u64) -> Result<SplitOutcome> {
    if families.is_empty() {
        return Err(Error::data("no families to split"));
    }
    for fam in families {
        if fam.len() < 2 {
            // a singleton family can never be bichromatic
            return Ok(SplitOutcome::Infeasible);
        }
        if fam.iter().any(|&v| v >= n_vars) {
            return Err(Error::dimension("family references a variable out of range".to_string()));
        }
    }
    let bichromatic = |mask: &[bool]| -> bool {
        families
            .iter()
            .all(|fam| fam.iter().any(|&v| mask[v]) && fam.iter().any(|&v| !mask[v]))
    };

    if n_vars <= MAX_EXHAUSTIVE_SPLIT {
        for bits in 1u64..(1u64 << n_vars) - 1 {
            let mask: Vec<bool> = (0..n_vars).map(|i| (bits >> i) & 1 == 1).collect();
            if bichromatic(&mask) {
                return Ok(SplitOutcome::Feasible { anchor_mask: mask });
            }
        }
        return Ok(SplitOutcome::Infeasible);
    }

    // randomized flip-improve; no completeness claim at this size
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut mask: Vec<bool> = (0..n_vars).map(|_| rand::Rng::random_bool(&mut rng, 0.5)).collect();
        for _ in 0..4 * n_vars {
            if bichromatic(&mask) {
                return Ok(SplitOutcome::Feasible { anchor_mask: mask });
            }
            // flip a variable in some monochromatic family
            let fam = families
                .iter()
                .find(|fam| !(fam.iter().any(|&v| mask[v]) && fam.iter().any(|&v| !mask[v])))
                .expect("some family is monochromatic");
            let pick = fam[rand::Rng::random_range(&mut rng, 0..fam.len())];
            mask[pick] ^= true;
        }
        if bichromatic(&mask) {
            return Ok(SplitOutcome::Feasible { anchor_mask: mask });
        }
    }
    Err(Error::infeasible("flip-improve search found no split (size precludes exhaustive proof)"))
}
