//! Rademacher crossover complexity: exact values at desk scale and the
//! computable upper bounds on it.
//!
//! The complexity of a crossover over a linear class is
//! `(r_s / m) E_sigma || sum_i sigma_i delta_i ||` with `delta_i` the i-th
//! row of `(I - M) s F^s` — the per-example change of the shuffle features.
//! Everything below works off those delta rows.

use serde::{Deserialize, Serialize};

use crate::cp::{cycle_stats, CycleStats, FeatureSplit, Permutation, ShuffleSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::parallel;

/// `epsilon* = 1 - 1/(2 sqrt 2)`: the value for which the factorial-ratio
/// inequality behind the `u` factor holds at every order.
pub const EPSILON_STAR: f64 = 1.0 - 0.5 / std::f64::consts::SQRT_2;

/// Which ball the linear class ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaBall {
    /// `||theta||_2 <= r`: the default; sup is `(r/m) ||sum sigma delta||_2`.
    L2,
    /// `||theta||_inf <= r`: sup is `(r/m) ||sum sigma delta||_1`.
    LInf,
}

/// Per-example difference rows `delta_i = x_i^s - (M x^s)_i`, m x d_s
/// row-major.
pub fn delta_rows(ds: &Dataset, split: &FeatureSplit, shuffle: &ShuffleSpec) -> Result<Vec<f64>> {
    let shuffled = crate::cp::apply_cp(ds, split, shuffle)?;
    let d_s = split.shuffle().len();
    let mut rows = Vec::with_capacity(ds.m() * d_s);
    for i in 0..ds.m() {
        for &j in split.shuffle() {
            rows.push(ds.value(i, j) - shuffled.value(i, j));
        }
    }
    Ok(rows)
}

/// Exact Rademacher crossover complexity of the linear class by full
/// enumeration of sign vectors; `m` is capped (default 20) since the cost is
/// `2^m`.
pub fn rcp_exact_linear(
    ds: &Dataset,
    split: &FeatureSplit,
    perm: &Permutation,
    r_s: f64,
    m_cap: usize,
    ball: ThetaBall,
) -> Result<f64> {
    let rows = delta_rows(ds, split, &ShuffleSpec::Permutation(perm.clone()))?;
    rademacher_expectation(&rows, ds.m(), split.shuffle().len(), r_s, m_cap, ball)
}

/// Exact empirical Rademacher complexity `(r/m) E_sigma ||sum sigma_i x_i||`
/// of a linear class over arbitrary rows (used for the factor-2 comparison of
/// the crude bound).
pub fn rademacher_exact_linear(rows: &[f64], m: usize, dim: usize, r: f64, m_cap: usize, ball: ThetaBall) -> Result<f64> {
    rademacher_expectation(rows, m, dim, r, m_cap, ball)
}

fn rademacher_expectation(rows: &[f64], m: usize, dim: usize, r: f64, m_cap: usize, ball: ThetaBall) -> Result<f64> {
    if m > m_cap {
        return Err(Error::infeasible(format!("m={} exceeds the enumeration cap {}", m, m_cap)));
    }
    if m >= usize::BITS as usize - 1 {
        return Err(Error::infeasible(format!("m={} too large to enumerate", m)));
    }
    if rows.len() != m * dim {
        return Err(Error::dimension(format!("{} values for {}x{} delta rows", rows.len(), m, dim)));
    }
    let total: u64 = 1u64 << m;
    let norm = |acc: &[f64]| -> f64 {
        match ball {
            ThetaBall::L2 => acc.iter().map(|v| v * v).sum::<f64>().sqrt(),
            ThetaBall::LInf => acc.iter().map(|v| v.abs()).sum::<f64>(),
        }
    };

    // Gray-code walk per chunk: one row flips sign per step.
    let sum_chunk = |range: std::ops::Range<u64>| -> f64 {
        let mut acc = vec![0.0; dim];
        let start = range.start;
        let gray = start ^ (start >> 1);
        for i in 0..m {
            let sign = if (gray >> i) & 1 == 1 { -1.0 } else { 1.0 };
            for j in 0..dim {
                acc[j] += sign * rows[i * dim + j];
            }
        }
        let mut local = norm(&acc);
        for k in range.start + 1..range.end {
            // bit flipped between gray(k-1) and gray(k)
            let flip = (k.trailing_zeros()) as usize;
            let prev_gray = (k - 1) ^ ((k - 1) >> 1);
            let was_positive = (prev_gray >> flip) & 1 == 0;
            let scale = if was_positive { -2.0 } else { 2.0 };
            for j in 0..dim {
                acc[j] += scale * rows[flip * dim + j];
            }
            local += norm(&acc);
        }
        local
    };

    let sum = parallel::sum_over_ranges(total, sum_chunk);
    Ok(r / m as f64 * (sum / total as f64))
}

/// Smallest `(delta, gamma)` for which the correlation assumptions hold on
/// the Gram matrix `G = Delta Delta^T` of the difference rows.
///
/// Rows with `G_ii = 0` (fixed points of the shuffle) force `delta = 1`;
/// they are excluded from the `gamma` minimum because their cosine is
/// undefined, and the exclusion is flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationParams {
    pub delta: f64,
    pub gamma: f64,
    pub zero_rows_excluded: usize,
}

pub fn estimate_correlation_params(rows: &[f64], m: usize, dim: usize) -> Result<CorrelationParams> {
    if rows.len() != m * dim {
        return Err(Error::dimension(format!("{} values for {}x{} rows", rows.len(), m, dim)));
    }
    let sq_norm = |i: usize| -> f64 { (0..dim).map(|j| rows[i * dim + j].powi(2)).sum() };
    let dot = |i: usize, k: usize| -> f64 { (0..dim).map(|j| rows[i * dim + j] * rows[k * dim + j]).sum() };

    let norms: Vec<f64> = (0..m).map(sq_norm).collect();
    let trace: f64 = norms.iter().sum();
    if trace <= 0.0 {
        return Err(Error::numeric("all difference rows are zero"));
    }
    let min_diag = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = 1.0 - m as f64 * min_diag / trace;

    let nonzero: Vec<usize> = (0..m).filter(|&i| norms[i] > 0.0).collect();
    let mut min_cos = f64::INFINITY;
    for (a, &i) in nonzero.iter().enumerate() {
        for &k in &nonzero[a + 1..] {
            let c = dot(i, k).abs() / (norms[i] * norms[k]).sqrt();
            min_cos = min_cos.min(c);
        }
    }
    let gamma = if min_cos.is_finite() { 1.0 - min_cos } else { 1.0 };
    Ok(CorrelationParams {
        delta: delta.clamp(0.0, 1.0),
        gamma: gamma.clamp(0.0, 1.0),
        zero_rows_excluded: m - nonzero.len(),
    })
}

fn kappa(delta: f64, gamma: f64) -> f64 {
    1.0 - ((1.0 - delta) * (1.0 - EPSILON_STAR) * (1.0 - gamma)).powi(2)
}

fn u_factor(m: usize, delta: f64, gamma: f64) -> f64 {
    1.0 / m as f64 + kappa(delta, gamma) * (1.0 - 1.0 / m as f64)
}

/// Data-dependent upper bound on the crossover complexity of the L2 linear
/// class: `(u r_s / m) sqrt(<I, K^s>_M)`, together with its per-column
/// variance decomposition for permutation shuffles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RcpBound {
    pub bound: f64,
    pub u_factor: f64,
    pub delta: f64,
    pub gamma: f64,
    pub centered_inner: f64,
    /// `2 sum_j var(col_j) (1 - corr(col_j, permuted col_j))`, equal to
    /// `centered_inner / m` for permutation shuffles.
    pub variance_decomposition: Option<f64>,
}

pub fn rcp_bound_linear(ds: &Dataset, split: &FeatureSplit, shuffle: &ShuffleSpec, r_s: f64) -> Result<RcpBound> {
    let m = ds.m();
    let d_s = split.shuffle().len();
    let rows = delta_rows(ds, split, shuffle)?;
    // <I, K^s>_M = sum_i ||delta_i||^2 (trace form)
    let centered_inner: f64 = rows.iter().map(|v| v * v).sum();

    let (delta, gamma) = match estimate_correlation_params(&rows, m, d_s) {
        Ok(p) => {
            if p.zero_rows_excluded > 0 {
                // assumption (a) fails on zero rows; only delta = 1 is valid
                (1.0, p.gamma)
            } else {
                (p.delta, p.gamma)
            }
        }
        // identity shuffle: zero rows everywhere, bound is exactly 0
        Err(_) => (1.0, 1.0),
    };
    let u = u_factor(m, delta, gamma);

    let variance_decomposition = match shuffle {
        ShuffleSpec::Permutation(p) => Some(variance_identity(ds, split, p)),
        _ => None,
    };

    Ok(RcpBound {
        bound: u * r_s / m as f64 * centered_inner.sqrt(),
        u_factor: u,
        delta,
        gamma,
        centered_inner,
        variance_decomposition,
    })
}

/// Right-hand side of the per-column identity
/// `(1/m) <I, K^s>_M = 2 sum_j var(col_j)(1 - corr(col_j, col_j o sigma))`.
fn variance_identity(ds: &Dataset, split: &FeatureSplit, perm: &Permutation) -> f64 {
    let m = ds.m() as f64;
    let mut acc = 0.0;
    for &j in split.shuffle() {
        let col = ds.column(j);
        let mean = col.iter().sum::<f64>() / m;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
        if var <= 0.0 {
            continue;
        }
        let mut cov = 0.0;
        for i in 0..ds.m() {
            cov += (col[i] - mean) * (col[perm.target(i)] - mean);
        }
        cov /= m;
        acc += 2.0 * var * (1.0 - cov / var);
    }
    acc
}

/// Centered inner product `<A, B>_M = tr((I - M)^T A (I - M) B)` of two
/// square matrices with respect to a mixing matrix.
pub fn centered_inner_product(a: &[f64], b: &[f64], mixing: &[f64], n: usize) -> Result<f64> {
    if a.len() != n * n || b.len() != n * n || mixing.len() != n * n {
        return Err(Error::dimension("centered inner product needs three n x n matrices".to_string()));
    }
    // C = (I - M), T = C^T A C, result = tr(T B)
    let mut ca = vec![0.0; n * n]; // C^T A
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                let c_li = (if l == i { 1.0 } else { 0.0 }) - mixing[l * n + i];
                acc += c_li * a[l * n + j];
            }
            ca[i * n + j] = acc;
        }
    }
    let mut t = vec![0.0; n * n]; // (C^T A) C
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                let c_lj = (if l == j { 1.0 } else { 0.0 }) - mixing[l * n + j];
                acc += ca[i * n + l] * c_lj;
            }
            t[i * n + j] = acc;
        }
    }
    let mut trace = 0.0;
    for i in 0..n {
        for l in 0..n {
            trace += t[i * n + l] * b[l * n + i];
        }
    }
    Ok(trace)
}

/// Odd-cycle bound for DAG-shaped classes with predictions bounded by `K_s`:
/// `K_s sqrt((2/m) ln(|H+| / (1 + eps)^{odd_cycles}))`, valid when
/// `ln |H+| >= (4 eps / 3) m`.
pub fn rcp_bound_dag(h_plus_count: f64, m: usize, k_s: f64, odd_cycles: usize, epsilon: f64) -> Result<f64> {
    if h_plus_count <= 1.0 {
        return Err(Error::data("|H+| must exceed 1"));
    }
    if epsilon <= 0.0 {
        return Err(Error::data("epsilon must be positive"));
    }
    let log_h = h_plus_count.ln();
    if log_h < 4.0 * epsilon / 3.0 * m as f64 {
        return Err(Error::infeasible(format!(
            "ln|H+| = {:.3} below the requirement (4 eps / 3) m = {:.3}",
            log_h,
            4.0 * epsilon / 3.0 * m as f64
        )));
    }
    let inner = log_h - odd_cycles as f64 * (1.0 + epsilon).ln();
    Ok(k_s * (2.0 / m as f64 * inner).sqrt())
}

/// Class restriction for the expected bound over uniformly sampled
/// permutations with `k` non-fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassRestriction {
    All,
    Positive,
    Negative,
}

/// Expected-complexity bound `u (r_s / sqrt m) sqrt((k/m) Q)` where `Q` is
/// the mean pairwise squared shuffle-feature distance over the designated
/// index set. `u` is reported as 1: permutations with fixed points zero out
/// difference rows, which invalidates any smaller factor.
pub fn expected_rcp_bound(
    ds: &Dataset,
    split: &FeatureSplit,
    k: usize,
    restriction: ClassRestriction,
    r_s: f64,
) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let idx: Vec<usize> = match restriction {
        ClassRestriction::All => (0..ds.m()).collect(),
        ClassRestriction::Positive => ds.class_range(true).collect(),
        ClassRestriction::Negative => ds.class_range(false).collect(),
    };
    if k > idx.len() {
        return Err(Error::data(format!("k={} exceeds the {} candidate indices", k, idx.len())));
    }
    let q = mean_pairwise_sq_distance(ds, split, &idx)?;
    let m = ds.m() as f64;
    Ok(r_s / m.sqrt() * (k as f64 / m * q).sqrt())
}

/// `Q`: mean squared shuffle-feature distance over ordered pairs without
/// replacement from `idx`.
pub fn mean_pairwise_sq_distance(ds: &Dataset, split: &FeatureSplit, idx: &[usize]) -> Result<f64> {
    if idx.len() < 2 {
        return Err(Error::data("need at least a pair of indices"));
    }
    let mut acc = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let mut s = 0.0;
            for &f in split.shuffle() {
                let diff = ds.value(i, f) - ds.value(j, f);
                s += diff * diff;
            }
            acc += s;
        }
    }
    let pairs = (idx.len() * (idx.len() - 1) / 2) as f64;
    Ok(acc / pairs)
}

/// Improved norm-based bound on the plain empirical Rademacher complexity of
/// linear classifiers: `(1/m + kappa(eps*)(1 - 1/m)) r_x r_theta / sqrt m`
/// with `(delta, gamma)` estimated from the raw observations
/// (`gamma` from the mean absolute cosine over pairs).
pub fn rademacher_bound_linear_improved(ds: &Dataset, r_theta: f64) -> Result<f64> {
    let m = ds.m();
    let d = ds.d();
    let norms: Vec<f64> = (0..m)
        .map(|i| (0..d).map(|j| ds.value(i, j).powi(2)).sum::<f64>())
        .collect();
    let trace: f64 = norms.iter().sum();
    if trace <= 0.0 {
        return Err(Error::numeric("all-zero observations"));
    }
    let r_x = norms.iter().copied().fold(0.0_f64, f64::max).sqrt();
    let delta = if norms.iter().all(|&n| n > 0.0) {
        (1.0 - m as f64 * norms.iter().copied().fold(f64::INFINITY, f64::min) / trace).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let mut cos_sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..m {
        if norms[i] == 0.0 {
            continue;
        }
        for k in (i + 1)..m {
            if norms[k] == 0.0 {
                continue;
            }
            let dot: f64 = (0..d).map(|j| ds.value(i, j) * ds.value(k, j)).sum();
            cos_sum += dot.abs() / (norms[i] * norms[k]).sqrt();
            pairs += 1;
        }
    }
    let gamma = if pairs > 0 { (1.0 - cos_sum / pairs as f64).clamp(0.0, 1.0) } else { 1.0 };
    Ok(u_factor(m, delta, gamma) * r_x * r_theta / (m as f64).sqrt())
}

/// Baseline norm bound `r_x r_theta / sqrt m` the improved version refines.
pub fn rademacher_bound_linear_baseline(ds: &Dataset, r_theta: f64) -> Result<f64> {
    let m = ds.m();
    let d = ds.d();
    let r_x = (0..m)
        .map(|i| (0..d).map(|j| ds.value(i, j).powi(2)).sum::<f64>())
        .fold(0.0_f64, f64::max)
        .sqrt();
    Ok(r_x * r_theta / (m as f64).sqrt())
}

/// Assembled generalization bound:
/// `risk + rcp + (4 / b_phi) rad + (2 K_phi + K_s) sqrt((2/m) ln(3/delta))`.
#[allow(clippy::too_many_arguments)]
pub fn generalization_bound_report(
    phi_risk_cp: f64,
    rcp_bound: f64,
    rademacher_bound: f64,
    k_phi: f64,
    k_s: f64,
    b_phi: f64,
    m: usize,
    delta_conf: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&delta_conf) || delta_conf == 0.0 {
        return Err(Error::data("confidence delta must lie in (0, 1)"));
    }
    if b_phi <= 0.0 {
        return Err(Error::data("b_phi must be positive"));
    }
    Ok(phi_risk_cp
        + rcp_bound
        + 4.0 / b_phi * rademacher_bound
        + (2.0 * k_phi + k_s) * (2.0 / m as f64 * (3.0 / delta_conf).ln()).sqrt())
}

/// Everything a trace record or report wants to know about one crossover's
/// complexity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RcpReport {
    pub exact: Option<f64>,
    pub bound_linear: f64,
    pub bound_dag: Option<f64>,
    pub expected_bound: Option<f64>,
    pub u_factor: f64,
    pub delta: f64,
    pub gamma: f64,
    pub epsilon_star: f64,
    pub cycle_stats: CycleStats,
}

/// Builds the report for a permutation crossover, computing the exact value
/// only when `m` fits under the enumeration cap.
pub fn rcp_report(ds: &Dataset, split: &FeatureSplit, perm: &Permutation, r_s: f64, m_cap: usize) -> Result<RcpReport> {
    let bound = rcp_bound_linear(ds, split, &ShuffleSpec::Permutation(perm.clone()), r_s)?;
    let exact = if ds.m() <= m_cap {
        Some(rcp_exact_linear(ds, split, perm, r_s, m_cap, ThetaBall::L2)?)
    } else {
        None
    };
    Ok(RcpReport {
        exact,
        bound_linear: bound.bound,
        bound_dag: None,
        expected_bound: None,
        u_factor: bound.u_factor,
        delta: bound.delta,
        gamma: bound.gamma,
        epsilon_star: EPSILON_STAR,
        cycle_stats: cycle_stats(perm),
    })
}
