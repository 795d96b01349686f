//! Data optimization on the two-spiral domain: greedily mix shuffle-feature
//! values within classes to lower the training risk, retrain periodically,
//! and compare holdout errors.
//!
//!     cargo run --release --example optimize_spirals

use cpforge::cp::FeatureSplit;
use cpforge::learn::{cross_validate, train, zero_one_error, Loss, TrainConfig};
use cpforge::search::{crossover_learn, Objective, SearchConfig};
use cpforge::synth::two_spirals_3d;

fn main() -> cpforge::Result<()> {
    let split = FeatureSplit::new(vec![0, 2], vec![1], 3)?;
    let grid = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
    let seeds = 10u64;
    let mut base_sum = 0.0;
    let mut opt_sum = 0.0;
    println!("{:>4}  {:>8}  {:>9}  {:>6}", "seed", "baseline", "optimized", "swaps");
    for seed in 0..seeds {
        let train_ds = two_spirals_3d(60, 0.25, 0.9, 0.2, 9_000 + seed * 13)?;
        let test_ds = two_spirals_3d(800, 0.25, 0.9, 0.2, 90_000 + seed * 17)?;
        let lambda = cross_validate(&train_ds, Loss::Square, &grid, 5)?;
        let tc = TrainConfig {
            lambda,
            ..TrainConfig::default()
        };
        let baseline = train(&train_ds, Loss::Square, tc)?;
        let config = SearchConfig {
            iterations: 60,
            retrain_every: 10,
            pvalue_every: 0,
            seed,
            ..SearchConfig::default()
        };
        let result = crossover_learn(
            &train_ds,
            &split,
            &config,
            &Objective::PhiRisk {
                loss: Loss::Square,
                model: baseline.clone(),
            },
            Some(&test_ds),
        )?;
        let optimized = result.model.unwrap();
        let b = zero_one_error(&baseline, &test_ds);
        let o = zero_one_error(&optimized, &test_ds);
        let swaps = result.trace.iter().filter(|r| r.accepted_pair.is_some()).count();
        println!("{:>4}  {:>8.4}  {:>9.4}  {:>6}", seed, b, o, swaps);
        base_sum += b;
        opt_sum += o;
    }
    println!(
        "\nmean holdout error over {} seeds: baseline {:.4}, crossover-optimized {:.4}",
        seeds,
        base_sum / seeds as f64,
        opt_sum / seeds as f64
    );
    Ok(())
}
