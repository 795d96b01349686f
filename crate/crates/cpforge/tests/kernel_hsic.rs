//! Oracle-backed verification of the kernel and HSIC machinery: incremental
//! deltas against full recomputation, the expectation identity against
//! exhaustive enumeration, the shift identity against both a direct
//! recompute and an eigendecomposition route, and the p-value calibration.

mod common;

use common::{hsic_naive, jacobi_eigh, random_dataset, random_kernel_pair, random_permutation};
use cpforge::cp::{Permutation, ShuffleSpec};
use cpforge::hsic::{
    expected_hsic_after_elementary, hsic, hsic_delta_elementary, hsic_shift_spectral, pvalue_permutation_test,
    unit_diag_residual, HsicState,
};
use cpforge::kernel::{gaussian_kernel, Bandwidth, KernelMatrix};
use cpforge::synth::dependent_features;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_gaussian_kernel_is_symmetric_unit_diagonal_psd() {
    let ds = random_dataset(5, 3, 42);
    let k = gaussian_kernel(&ds, &[0, 1, 2], Bandwidth::Median).unwrap();
    for i in 0..5 {
        assert_eq!(k.entry(i, i), 1.0);
        for j in 0..5 {
            assert!((k.entry(i, j) - k.entry(j, i)).abs() < 1e-15);
            assert!(k.entry(i, j) > 0.0 && k.entry(i, j) <= 1.0);
        }
    }
    let (eigvals, _) = jacobi_eigh(k.data(), 5);
    let min = eigvals.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min >= -1e-10, "min eigenvalue {}", min);
}

#[test]
fn hsic_matches_naive_four_term_expansion() {
    for seed in 0..10 {
        let (ku, kv) = random_kernel_pair(7, seed);
        let fast = hsic(&ku, &kv).unwrap();
        let naive = hsic_naive(&ku, &kv);
        assert!((fast - naive).abs() <= 1e-10 * naive.abs().max(1.0));
        assert!(fast >= -1e-10);
    }
}

#[test]
fn hsic_invariant_under_simultaneous_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..5 {
        let (ku, kv) = random_kernel_pair(8, 100 + seed);
        let perm = random_permutation(8, &mut rng);
        let kup = ku.conjugate_by(perm.targets()).unwrap();
        let kvp = kv.conjugate_by(perm.targets()).unwrap();
        let a = hsic(&ku, &kv).unwrap();
        let b = hsic(&kup, &kvp).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }
}

#[test]
fn elementary_deltas_match_full_recompute_all_pairs() {
    // every transposition at m = 6, against conjugate-and-recompute
    for seed in 0..8 {
        let (ku, kv) = random_kernel_pair(6, 200 + seed);
        let base = hsic(&ku, &kv).unwrap();
        for l in 0..6 {
            for l2 in (l + 1)..6 {
                let fast = hsic_delta_elementary(&ku, &kv, l, l2).unwrap();
                let perm = Permutation::transposition(6, l, l2).unwrap();
                let view = kv.conjugate_by(perm.targets()).unwrap();
                let slow = hsic(&ku, &view).unwrap() - base;
                assert!(
                    (fast - slow).abs() <= 1e-9 * slow.abs().max(1e-12),
                    "seed {} pair ({}, {}): {} vs {}",
                    seed,
                    l,
                    l2,
                    fast,
                    slow
                );
            }
        }
    }
}

#[test]
fn expectation_identity_matches_exhaustive_average() {
    for seed in 0..8 {
        let (ku, kv) = random_kernel_pair(6, 300 + seed);
        let base = hsic(&ku, &kv).unwrap();
        let mut acc = 0.0;
        let mut n = 0;
        for l in 0..6 {
            for l2 in (l + 1)..6 {
                let perm = Permutation::transposition(6, l, l2).unwrap();
                let view = kv.conjugate_by(perm.targets()).unwrap();
                acc += hsic(&ku, &view).unwrap();
                n += 1;
            }
        }
        let exhaustive = acc / n as f64;
        let formula = expected_hsic_after_elementary(&ku, &kv).unwrap();
        assert!(
            (formula - exhaustive).abs() <= 1e-9 * exhaustive.abs().max(1e-12),
            "seed {}: {} vs {}",
            seed,
            formula,
            exhaustive
        );
        let _ = base;
    }
}

#[test]
fn unit_diagonal_residual_matches_general_form() {
    // m (1 - (Ku.. + Kv..) / (2 m^2)) is the unit-diagonal collapse of the
    // diagonal-vs-rowsum residual sum_i Ku_ii Kv_ii
    //   - (1/m)(sum_i Ku_ii Kv_.i + sum_i Ku_.i Kv_ii) / 2
    for seed in 0..6 {
        let (ku, kv) = random_kernel_pair(7, 900 + seed); // Gaussian: unit diagonal
        let m = 7;
        let mut diag = 0.0;
        let mut mix = 0.0;
        let kur = ku.row_sums();
        let kvr = kv.row_sums();
        for i in 0..m {
            diag += ku.entry(i, i) * kv.entry(i, i);
            mix += ku.entry(i, i) * kvr[i] + kur[i] * kv.entry(i, i);
        }
        let general = diag - mix / (2.0 * m as f64);
        let simplified = unit_diag_residual(&ku, &kv);
        assert!(
            (general - simplified).abs() < 1e-10,
            "seed {}: {} vs {}",
            seed,
            general,
            simplified
        );
    }
    // and on exchangeable kernels every transposition is a no-op, so the
    // expectation identity keeps the criterion fixed
    let m = 5;
    let mut d = vec![0.3; m * m];
    for i in 0..m {
        d[i * m + i] = 1.0;
    }
    let kv = KernelMatrix::from_data(m, d.clone()).unwrap();
    let ku = KernelMatrix::from_data(m, d).unwrap();
    let h = hsic(&ku, &kv).unwrap();
    let e = expected_hsic_after_elementary(&ku, &kv).unwrap();
    assert!((h - e).abs() < 1e-12);
}

#[test]
fn spectral_shift_matches_elementary_delta() {
    for seed in 0..10 {
        let ds = random_dataset(9, 5, 400 + seed);
        let ku = gaussian_kernel(&ds, &[0, 1], Bandwidth::Median).unwrap();
        let kv = gaussian_kernel(&ds, &[2, 3, 4], Bandwidth::Median).unwrap();
        let (l, l2) = (2, 7);
        let delta = hsic_delta_elementary(&ku, &kv, l, l2).unwrap();
        let spec = ShuffleSpec::Permutation(Permutation::transposition(9, l, l2).unwrap());
        let shift = hsic_shift_spectral(&ku, &kv, &spec, ds.labels()).unwrap();
        assert!(
            (delta - shift).abs() <= 1e-7 * delta.abs().max(1e-12),
            "{} vs {}",
            delta,
            shift
        );
    }
}

#[test]
fn spectral_shift_matches_direct_difference_class_uniform() {
    for seed in 0..10 {
        let ds = random_dataset(8, 5, 500 + seed);
        let ku = gaussian_kernel(&ds, &[0, 1], Bandwidth::Median).unwrap();
        let kv = gaussian_kernel(&ds, &[2, 3, 4], Bandwidth::Median).unwrap();
        let spec = ShuffleSpec::ClassUniform;
        let shift = hsic_shift_spectral(&ku, &kv, &spec, ds.labels()).unwrap();
        // direct: materialize M Kv M^T and recompute
        let dense = spec.to_dense(ds.labels()).unwrap();
        let m = 8;
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
        let mut conj = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for l in 0..m {
                    acc += mkv[i * m + l] * dense.entry(j, l);
                }
                conj[i * m + j] = acc;
            }
        }
        let kv_after = KernelMatrix::from_data(m, conj).unwrap();
        let direct = hsic(&ku, &kv_after).unwrap() - hsic(&ku, &kv).unwrap();
        assert!(
            (shift - direct).abs() <= 1e-7 * direct.abs().max(1e-12),
            "{} vs {}",
            shift,
            direct
        );
    }
}

#[test]
fn spectral_summary_equals_eigendecomposition_route() {
    // u~ = (1/m) K 1 must equal (1/m) sum_i lambda_i (1^T u_i) u_i
    let ds = random_dataset(7, 4, 77);
    let k = gaussian_kernel(&ds, &[0, 1, 2, 3], Bandwidth::Median).unwrap();
    let m = 7;
    let (eigvals, eigvecs) = jacobi_eigh(k.data(), m);
    let mut u_eig = vec![0.0; m];
    for i in 0..m {
        let col: Vec<f64> = (0..m).map(|r| eigvecs[r * m + i]).collect();
        let one_dot: f64 = col.iter().sum();
        for r in 0..m {
            u_eig[r] += eigvals[i] * one_dot * col[r] / m as f64;
        }
    }
    let direct: Vec<f64> = k.row_sums().iter().map(|s| s / m as f64).collect();
    for r in 0..m {
        assert!((u_eig[r] - direct[r]).abs() < 1e-8, "{} vs {}", u_eig[r], direct[r]);
    }
}

#[test]
fn greedy_chain_cumulative_deltas_match_endpoints() {
    let ds = dependent_features(40, 0.2, 9).unwrap();
    let ku = gaussian_kernel(&ds, &[0, 1], Bandwidth::Median).unwrap();
    let kv = gaussian_kernel(&ds, &[2, 3], Bandwidth::Median).unwrap();
    let mut st = HsicState::new(&ku, &kv).unwrap();
    let initial = st.current();
    let mut cumulative = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..25 {
        let l = rand::Rng::random_range(&mut rng, 0..40);
        let mut l2 = rand::Rng::random_range(&mut rng, 0..40);
        if l == l2 {
            l2 = (l2 + 1) % 40;
        }
        cumulative += st.apply(l, l2);
    }
    let tracked = st.current();
    let fresh = st.recompute().unwrap();
    assert!((initial + cumulative - fresh).abs() <= 1e-8 * fresh.abs().max(1.0));
    assert!((tracked - fresh).abs() <= 1e-8 * fresh.abs().max(1.0));
}

#[test]
fn pvalue_saturates_under_dependence() {
    // Kv built from the same feature as Ku: minimum p at 999 resamples
    let ds = random_dataset(100, 2, 11);
    let ku = gaussian_kernel(&ds, &[0], Bandwidth::Median).unwrap();
    let kv = gaussian_kernel(&ds, &[0], Bandwidth::Median).unwrap();
    let p = pvalue_permutation_test(&ku, &kv, 999, 5).unwrap();
    assert_eq!(p, 1.0 / 1000.0);
}

#[test]
fn pvalue_calibrated_under_independence() {
    // independent features: p > 0.05 in at least 95% of seeds
    let mut above = 0;
    let total = 40;
    for seed in 0..total {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let m = 100;
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..2)
                    .map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0))
                    .collect()
            })
            .collect();
        let mut labels = vec![1i8; m];
        for l in labels.iter_mut().skip(m / 2) {
            *l = -1;
        }
        let ds = cpforge::data::Dataset::from_rows(rows, labels, vec!["a".into(), "b".into()]).unwrap();
        let ku = gaussian_kernel(&ds, &[0], Bandwidth::Median).unwrap();
        let kv = gaussian_kernel(&ds, &[1], Bandwidth::Median).unwrap();
        let p = pvalue_permutation_test(&ku, &kv, 199, 8_000 + seed).unwrap();
        if p > 0.05 {
            above += 1;
        }
    }
    assert!(above * 100 >= total * 90, "only {}/{} null p-values above 0.05", above, total);
}
