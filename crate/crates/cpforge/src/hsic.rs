//! The Hilbert-Schmidt independence criterion and the incremental formulas
//! that make greedy shuffling cheap.
//!
//! Everything here works on the unnormalised criterion
//! `HSIC(Ku, Kv) = tr((I - U) Ku (I - U) Kv)` with `U = (1/m) 1 1^T`.
//! Shuffling a sample with a permutation conjugates the shuffle-side kernel:
//! entries move, none is re-evaluated, so the whole evolution can be driven
//! through an index map plus cached row sums.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cp::ShuffleSpec;
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;

/// `HSIC(Ku, Kv) = sum_ij Ku_ij Kv_ij - (2/m) sum_i Ku_i. Kv_i.
///                + (1/m^2) Ku_.. Kv_..`
pub fn hsic(ku: &KernelMatrix, kv: &KernelMatrix) -> Result<f64> {
    if ku.m() != kv.m() {
        return Err(Error::dimension(format!("kernels of sizes {} and {}", ku.m(), kv.m())));
    }
    let m = ku.m() as f64;
    let frob: f64 = ku.data().iter().zip(kv.data()).map(|(a, b)| a * b).sum();
    let row: f64 = ku
        .row_sums()
        .iter()
        .zip(kv.row_sums().iter())
        .map(|(a, b)| a * b)
        .sum();
    Ok(frob - 2.0 / m * row + ku.total_sum() * kv.total_sum() / (m * m))
}

/// Exact change of HSIC when `Kv` gets conjugated by the transposition
/// `(l, l2)`, in O(m) given the kernel rows and row sums.
///
/// The closed form is
/// `-2m cov(d_u, d_v) + 2 [ (Ku_ll - Ku_l2l)(Kv_ll - Kv_l2l)
///                        + (Ku_l2l2 - Ku_l2l)(Kv_l2l2 - Kv_l2l) ]`
/// with `d_u(i) = Ku_li - Ku_l2i` (and likewise for `v`). Note the factor 2
/// on the boundary term; dropping it leaves an O(1)-sized residual error,
/// which the full-recompute oracle in the tests pins down.
pub fn hsic_delta_elementary(ku: &KernelMatrix, kv: &KernelMatrix, l: usize, l2: usize) -> Result<f64> {
    if ku.m() != kv.m() {
        return Err(Error::dimension(format!("kernels of sizes {} and {}", ku.m(), kv.m())));
    }
    if l >= ku.m() || l2 >= ku.m() {
        return Err(Error::dimension(format!("indices ({}, {}) out of range (m={})", l, l2, ku.m())));
    }
    if l == l2 {
        return Err(Error::data("elementary permutation needs two distinct indices"));
    }
    let state = HsicState::new(ku, kv)?;
    Ok(state.delta(l, l2))
}

/// Expected HSIC after one uniformly drawn transposition:
/// `(1 - 4/(m-1)) HSIC + (4/(m-1)) R` where
/// `R = sum_i Ku_ii Kv_ii - (1/m) sum_i (Ku_ii Kv_.i + Ku_.i Kv_ii)
///     + (1/m) sum_ij Ku_ij Kv_ij`.
pub fn expected_hsic_after_elementary(ku: &KernelMatrix, kv: &KernelMatrix) -> Result<f64> {
    let h = hsic(ku, kv)?;
    let m = ku.m() as f64;
    let r = transposition_residual(ku, kv);
    Ok((1.0 - 4.0 / (m - 1.0)) * h + 4.0 / (m - 1.0) * r)
}

/// The residual `R` toward which uniformly sampled transpositions pull HSIC.
pub fn transposition_residual(ku: &KernelMatrix, kv: &KernelMatrix) -> f64 {
    let m = ku.m();
    let ms = m as f64;
    let csu = column_sums(ku);
    let csv = column_sums(kv);
    let mut diag = 0.0;
    let mut mix = 0.0;
    for i in 0..m {
        diag += ku.entry(i, i) * kv.entry(i, i);
        mix += ku.entry(i, i) * csv[i] + csu[i] * kv.entry(i, i);
    }
    let frob: f64 = ku.data().iter().zip(kv.data()).map(|(a, b)| a * b).sum();
    diag - mix / ms + frob / ms
}

/// Unit-diagonal simplification of the greedy floor used by the contraction
/// guarantee: `m (1 - (Ku_.. + Kv_..) / (2 m^2))`.
pub fn unit_diag_residual(ku: &KernelMatrix, kv: &KernelMatrix) -> f64 {
    let m = ku.m() as f64;
    m * (1.0 - (ku.total_sum() + kv.total_sum()) / (2.0 * m * m))
}

fn column_sums(k: &KernelMatrix) -> Vec<f64> {
    // kernels are symmetric; row sums double as column sums
    k.row_sums()
}

/// Exact HSIC shift of a crossover with shuffle matrix `M`, computed from the
/// kernel row means (the "spectral" summary) plus a trace correction:
///
/// `shift = [<Ku, M Kv M^T> - <Ku, Kv>]_F + 2m * u~^T (I - M) v~`
///
/// with `u~ = (1/m) Ku 1` and `v~ = (1/m) Kv 1`. The row-mean form equals the
/// eigendecomposition sum `(1/m) sum_i lambda_i (1^T u_i) u_i`; the sign
/// convention is `shift = HSIC_after - HSIC_before`. The cross/centering part
/// alone (without the Frobenius term) is not the full shift.
pub fn hsic_shift_spectral(ku: &KernelMatrix, kv: &KernelMatrix, shuffle: &ShuffleSpec, labels: &[i8]) -> Result<f64> {
    if ku.m() != kv.m() {
        return Err(Error::dimension(format!("kernels of sizes {} and {}", ku.m(), kv.m())));
    }
    let m = ku.m();
    if labels.len() != m {
        return Err(Error::dimension(format!("{} labels for m={}", labels.len(), m)));
    }
    let spectral = SpectralSummary::from_kernels(ku, kv);
    let u_t = &spectral.u_tilde;
    let v_t = &spectral.v_tilde;

    // 2m * u~^T (I - M) v~ and the Frobenius correction, per shuffle kind.
    match shuffle {
        ShuffleSpec::Permutation(p) => {
            if p.m() != m {
                return Err(Error::dimension(format!("permutation of size {} on m={}", p.m(), m)));
            }
            let mut cross = 0.0;
            for i in 0..m {
                cross += u_t[i] * (v_t[i] - v_t[p.target(i)]);
            }
            let mut frob = 0.0;
            for i in 0..m {
                let pi = p.target(i);
                for j in 0..m {
                    frob += ku.entry(i, j) * (kv.entry(pi, p.target(j)) - kv.entry(i, j));
                }
            }
            Ok(frob + 2.0 * m as f64 * cross)
        }
        _ => {
            let dense = shuffle.to_dense(labels)?;
            let mut cross = 0.0;
            for i in 0..m {
                let mut mv = 0.0;
                for l in 0..m {
                    mv += dense.entry(i, l) * v_t[l];
                }
                cross += u_t[i] * (v_t[i] - mv);
            }
            // M Kv M^T, then Frobenius inner products with Ku
            let mut mkv = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    let mut acc = 0.0;
                    for l in 0..m {
                        acc += dense.entry(i, l) * kv.entry(l, j);
                    }
                    mkv[i * m + j] = acc;
                }
            }
            let mut frob = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let mut conj = 0.0;
                    for l in 0..m {
                        conj += mkv[i * m + l] * dense.entry(j, l);
                    }
                    frob += ku.entry(i, j) * (conj - kv.entry(i, j));
                }
            }
            Ok(frob + 2.0 * m as f64 * cross)
        }
    }
}

/// Linear-space kernel summary: `u~ = (1/m) Ku 1`, `v~ = (1/m) Kv 1`.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub u_tilde: Vec<f64>,
    pub v_tilde: Vec<f64>,
}

impl SpectralSummary {
    pub fn from_kernels(ku: &KernelMatrix, kv: &KernelMatrix) -> SpectralSummary {
        let m = ku.m() as f64;
        SpectralSummary {
            u_tilde: ku.row_sums().iter().map(|s| s / m).collect(),
            v_tilde: kv.row_sums().iter().map(|s| s / m).collect(),
        }
    }
}

/// Permutation-test p-value on top of HSIC, with add-one smoothing so the
/// result is never 0: `p = (1 + #{HSIC(Ku, Kv[pi,pi]) >= HSIC(Ku, Kv)}) /
/// (resamples + 1)`. The null permutations are unrestricted.
pub fn pvalue_permutation_test(ku: &KernelMatrix, kv: &KernelMatrix, resamples: usize, seed: u64) -> Result<f64> {
    if resamples < 1 {
        return Err(Error::data("resamples must be at least 1"));
    }
    if ku.m() != kv.m() {
        return Err(Error::dimension(format!("kernels of sizes {} and {}", ku.m(), kv.m())));
    }
    let m = ku.m();
    let observed = hsic(ku, kv)?;
    let ku_rows = ku.row_sums();
    let ku_total = ku.total_sum();
    let kv_rows = kv.row_sums();
    let kv_total = kv.total_sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..m).collect();
    let mut exceed = 0usize;
    for _ in 0..resamples {
        idx.shuffle(&mut rng);
        // HSIC(Ku, Kv[idx, idx]) without materializing the conjugation.
        let mut frob = 0.0;
        let mut row = 0.0;
        for i in 0..m {
            let pii = idx[i];
            let kur = ku.row(i);
            let kvr = kv.row(pii);
            let mut acc = 0.0;
            for j in 0..m {
                acc += kur[j] * kvr[idx[j]];
            }
            frob += acc;
            row += ku_rows[i] * kv_rows[pii];
        }
        let stat = frob - 2.0 / m as f64 * row + ku_total * kv_total / (m as f64 * m as f64);
        if stat >= observed {
            exceed += 1;
        }
    }
    Ok((1 + exceed) as f64 / (resamples + 1) as f64)
}

/// Mutable greedy-shuffle state over a fixed kernel pair: the shuffle-side
/// kernel is viewed through an index map, row sums stay cached, and each
/// candidate transposition is scored in O(m).
#[derive(Debug, Clone)]
pub struct HsicState {
    ku: KernelMatrix,
    kv: KernelMatrix,
    /// Current view: effective Kv entry (i, j) is `kv[idx[i]][idx[j]]`.
    idx: Vec<usize>,
    ku_rows: Vec<f64>,
    /// Row sums of the *viewed* kernel: `kv_rows[i] = kv_row_sum(idx[i])`.
    kv_rows: Vec<f64>,
    current: f64,
}

impl HsicState {
    pub fn new(ku: &KernelMatrix, kv: &KernelMatrix) -> Result<HsicState> {
        let current = hsic(ku, kv)?;
        Ok(HsicState {
            ku: ku.clone(),
            kv: kv.clone(),
            idx: (0..ku.m()).collect(),
            ku_rows: ku.row_sums(),
            kv_rows: kv.row_sums(),
            current,
        })
    }

    pub fn m(&self) -> usize {
        self.ku.m()
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn index_map(&self) -> &[usize] {
        &self.idx
    }

    /// The viewed kernel as a concrete matrix.
    pub fn kv_view(&self) -> Result<KernelMatrix> {
        self.kv.conjugate_by(&self.idx)
    }

    pub fn ku(&self) -> &KernelMatrix {
        &self.ku
    }

    /// O(m) exact delta for composing the transposition `(l, l2)` on top of
    /// the current view.
    pub fn delta(&self, l: usize, l2: usize) -> f64 {
        let m = self.m();
        let ms = m as f64;
        let kul = self.ku.row(l);
        let kul2 = self.ku.row(l2);
        let kvl = self.kv.row(self.idx[l]);
        let kvl2 = self.kv.row(self.idx[l2]);
        let mut dot = 0.0;
        for i in 0..m {
            let vi = self.idx[i];
            dot += (kul[i] - kul2[i]) * (kvl[vi] - kvl2[vi]);
        }
        let du_row = self.ku_rows[l] - self.ku_rows[l2];
        let dv_row = self.kv_rows[l] - self.kv_rows[l2];
        let kv_ll = kvl[self.idx[l]];
        let kv_l2l = kvl2[self.idx[l]];
        let kv_l2l2 = kvl2[self.idx[l2]];
        let boundary = (kul[l] - kul2[l]) * (kv_ll - kv_l2l) + (kul2[l2] - kul2[l]) * (kv_l2l2 - kv_l2l);
        -2.0 * (dot - du_row * dv_row / ms) + 2.0 * boundary
    }

    /// Applies the transposition and updates caches; returns the delta that
    /// was realized.
    pub fn apply(&mut self, l: usize, l2: usize) -> f64 {
        let d = self.delta(l, l2);
        self.idx.swap(l, l2);
        self.kv_rows.swap(l, l2);
        self.current += d;
        d
    }

    /// Recomputes the criterion from scratch (consistency checks).
    pub fn recompute(&mut self) -> Result<f64> {
        let view = self.kv_view()?;
        self.current = hsic(&self.ku, &view)?;
        Ok(self.current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::Permutation;
    use crate::kernel::KernelMatrix;

    fn ones(m: usize) -> KernelMatrix {
        KernelMatrix::from_data(m, vec![1.0; m * m]).unwrap()
    }

    fn eye(m: usize) -> KernelMatrix {
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            d[i * m + i] = 1.0;
        }
        KernelMatrix::from_data(m, d).unwrap()
    }

    #[test]
    fn centering_annihilates_constant_kernel() {
        let ku = eye(4);
        let kv = ones(4);
        assert!(hsic(&ku, &kv).unwrap().abs() < 1e-14);
    }

    #[test]
    fn identity_pair_gives_m_minus_one() {
        let k = eye(4);
        assert!((hsic(&k, &k).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn delta_zero_for_identical_kv_rows() {
        // Kv rows 0 and 1 identical
        let kv = KernelMatrix::from_data(
            3,
            vec![
                0.8, 0.8, 0.3, //
                0.8, 0.8, 0.3, //
                0.3, 0.3, 1.0,
            ],
        )
        .unwrap();
        let ku = KernelMatrix::from_data(
            3,
            vec![
                1.0, 0.2, 0.5, //
                0.2, 1.0, 0.1, //
                0.5, 0.1, 1.0,
            ],
        )
        .unwrap();
        let d = hsic_delta_elementary(&ku, &kv, 0, 1).unwrap();
        assert!(d.abs() < 1e-14, "delta {}", d);
    }

    #[test]
    fn exchangeable_kernel_is_a_fixed_point() {
        // alpha on the diagonal, beta off-diagonal: invariant under any
        // permutation, so every transposition has zero delta and the expected
        // HSIC equals the current one.
        let m = 5;
        let (alpha, beta) = (1.0, 0.4);
        let mut d = vec![beta; m * m];
        for i in 0..m {
            d[i * m + i] = alpha;
        }
        let kv = KernelMatrix::from_data(m, d).unwrap();
        let ku = KernelMatrix::from_data(
            m,
            (0..m * m)
                .map(|k| {
                    let (i, j) = (k / m, k % m);
                    (-0.1 * ((i as f64 - j as f64).powi(2))).exp()
                })
                .collect(),
        )
        .unwrap();
        for l in 0..m {
            for l2 in (l + 1)..m {
                assert!(hsic_delta_elementary(&ku, &kv, l, l2).unwrap().abs() < 1e-12);
            }
        }
        let h = hsic(&ku, &kv).unwrap();
        let e = expected_hsic_after_elementary(&ku, &kv).unwrap();
        assert!((h - e).abs() < 1e-12);
    }

    #[test]
    fn delta_rejects_equal_indices() {
        let k = eye(3);
        assert!(hsic_delta_elementary(&k, &k, 1, 1).is_err());
        assert!(hsic_delta_elementary(&k, &k, 0, 5).is_err());
    }

    #[test]
    fn spectral_shift_zero_for_identity() {
        let ku = eye(4);
        let kv = ones(4);
        let labels = [1, 1, -1, -1];
        let s = hsic_shift_spectral(&ku, &kv, &ShuffleSpec::Permutation(Permutation::identity(4)), &labels).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn pvalue_smoothing_bounds() {
        // resamples = 1: p in {1/2, 1}
        let ku = eye(6);
        let kv = eye(6);
        let p = pvalue_permutation_test(&ku, &kv, 1, 3).unwrap();
        assert!(p == 0.5 || p == 1.0);
        assert!(pvalue_permutation_test(&ku, &kv, 0, 3).is_err());
    }

    #[test]
    fn hsic_symmetry() {
        let ku = KernelMatrix::from_data(
            3,
            vec![
                1.0, 0.2, 0.5, //
                0.2, 1.0, 0.1, //
                0.5, 0.1, 1.0,
            ],
        )
        .unwrap();
        let kv = KernelMatrix::from_data(
            3,
            vec![
                1.0, 0.7, 0.3, //
                0.7, 1.0, 0.6, //
                0.3, 0.6, 1.0,
            ],
        )
        .unwrap();
        let a = hsic(&ku, &kv).unwrap();
        let b = hsic(&kv, &ku).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn state_apply_tracks_full_recompute() {
        let ku = KernelMatrix::from_data(
            4,
            vec![
                1.0, 0.2, 0.5, 0.1, //
                0.2, 1.0, 0.4, 0.3, //
                0.5, 0.4, 1.0, 0.6, //
                0.1, 0.3, 0.6, 1.0,
            ],
        )
        .unwrap();
        let kv = KernelMatrix::from_data(
            4,
            vec![
                1.0, 0.9, 0.2, 0.4, //
                0.9, 1.0, 0.3, 0.5, //
                0.2, 0.3, 1.0, 0.8, //
                0.4, 0.5, 0.8, 1.0,
            ],
        )
        .unwrap();
        let mut st = HsicState::new(&ku, &kv).unwrap();
        st.apply(0, 2);
        st.apply(1, 3);
        st.apply(0, 1);
        let tracked = st.current();
        let fresh = st.recompute().unwrap();
        assert!((tracked - fresh).abs() < 1e-10, "{} vs {}", tracked, fresh);
    }
}
