//! Drive the kernel dependence between two feature blocks below statistical
//! significance with a greedy block-class shuffle, then check what it cost.
//!
//!     cargo run --release --example protect_hsic

use cpforge::cp::{FeatureSplit, ShuffleSpec};
use cpforge::hsic::{pvalue_permutation_test, unit_diag_residual};
use cpforge::kernel::{gaussian_kernel, Bandwidth};
use cpforge::learn::{cross_validate, train, zero_one_error, Loss, TrainConfig};
use cpforge::search::{crossover_learn, Objective, SearchConfig};
use cpforge::synth::dependent_features;

fn main() -> cpforge::Result<()> {
    // anchor features drive the label; shuffle features are strong nonlinear
    // functions of the anchors
    let m = 200;
    let ds = dependent_features(m, 0.15, 1)?;
    let holdout = dependent_features(m, 0.15, 2)?;
    let split = FeatureSplit::first_half(ds.d())?;

    let ku = gaussian_kernel(&ds, split.anchor(), Bandwidth::Median)?;
    let kv = gaussian_kernel(&ds, split.shuffle(), Bandwidth::Median)?;
    let p0 = pvalue_permutation_test(&ku, &kv, 999, 11)?;
    println!("initial p-value of the independence test: {:.4} (999 resamples)", p0);
    println!("greedy floor (unit-diagonal residual):    {:.2}", unit_diag_residual(&ku, &kv));

    let config = SearchConfig {
        iterations: 200,
        block_class: true,
        pvalue_every: 50,
        pvalue_resamples: 999,
        seed: 11,
        ..SearchConfig::default()
    };
    let result = crossover_learn(&ds, &split, &config, &Objective::HsicReduce { ku, kv }, None)?;
    for r in &result.trace {
        if let (Some(h), Some(p)) = (r.hsic, r.p_value) {
            println!("  iteration {:>3}: hsic {:>8.2}, p {:.4}", r.iteration, h, p);
        }
    }
    let last = result.trace.last().unwrap();
    println!("final p-value after {} iterations: {:.4}", last.iteration, last.p_value.unwrap());

    // utility check: retrain on the shuffled sample, compare holdout error
    let lambda = cross_validate(&ds, Loss::Logistic, &[1e-4, 1e-2, 1.0], 5)?;
    let tc = TrainConfig {
        lambda,
        ..TrainConfig::default()
    };
    let baseline = train(&ds, Loss::Logistic, tc)?;
    let shuffled = cpforge::apply_cp(&ds, &split, &ShuffleSpec::Permutation(result.permutation))?;
    let retrained = train(&shuffled, Loss::Logistic, tc)?;
    println!(
        "holdout error: baseline {:.3}, retrained on protected data {:.3}",
        zero_one_error(&baseline, &holdout),
        zero_one_error(&retrained, &holdout)
    );
    Ok(())
}
