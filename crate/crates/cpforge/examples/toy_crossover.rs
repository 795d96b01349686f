//! Walkthrough on a five-point sample: apply a block-class crossover, watch
//! the mean operator stay put, and compare risks and complexity before and
//! after.
//!
//!     cargo run --example toy_crossover

use cpforge::complexity::{rcp_bound_linear, rcp_exact_linear, ThetaBall};
use cpforge::cp::{apply_cp, cycle_stats, mean_operator_invariant, FeatureSplit, Permutation, ShuffleSpec};
use cpforge::data::{mean_operator, Dataset};
use cpforge::learn::{phi_risk, train, Loss, TrainConfig};

fn main() -> cpforge::Result<()> {
    // two copies of (0,0) and (1,1) labeled positive, one (-1,-1) negative
    let ds = Dataset::from_rows(
        vec![
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
        ],
        vec![1, 1, 1, 1, -1],
        vec!["x".into(), "y".into()],
    )?;
    let split = FeatureSplit::new(vec![0], vec![1], 2)?;
    // swap the y-values of the (0,0) pair with those of the (1,1) pair
    let perm = Permutation::new(vec![2, 3, 0, 1, 4])?;
    let spec = ShuffleSpec::Permutation(perm.clone());

    println!("sample (x, y, label):");
    for i in 0..ds.m() {
        println!("  ({:+.0}, {:+.0})  {:+}", ds.value(i, 0), ds.value(i, 1), ds.label(i));
    }

    let crossed = apply_cp(&ds, &split, &spec)?;
    println!("\nafter the crossover (anchor x fixed, y shuffled within class):");
    for i in 0..crossed.m() {
        println!("  ({:+.0}, {:+.0})  {:+}", crossed.value(i, 0), crossed.value(i, 1), crossed.label(i));
    }

    let mu = mean_operator(&ds);
    let (invariant, dev) = mean_operator_invariant(&ds, &split, &spec)?;
    println!("\nmean operator: ({:.3}, {:.3}); preserved: {} (deviation {:.1e})", mu[0], mu[1], invariant, dev);
    println!("cycle stats: {:?}", cycle_stats(&perm));

    let cfg = TrainConfig {
        fit_intercept: false,
        ..TrainConfig::default()
    };
    let model_s = train(&ds, Loss::Square, cfg)?;
    let model_t = train(&crossed, Loss::Square, cfg)?;
    let risk_s = phi_risk(&model_s, &ds, Loss::Square);
    let risk_t = phi_risk(&model_t, &crossed, Loss::Square);
    println!("\nmin square risk on the original sample: {:.4} at ({:.2}, {:.2})", risk_s, model_s.weights[0], model_s.weights[1]);
    println!("min square risk on the crossed sample:   {:.4} at ({:.2}, {:.2})", risk_t, model_t.weights[0], model_t.weights[1]);

    let rcp = rcp_exact_linear(&ds, &split, &perm, 0.75, 20, ThetaBall::LInf)?;
    let bound = rcp_bound_linear(&ds, &split, &spec, 0.75)?;
    println!("\nexact crossover complexity (inf-ball 3/4): {:.4}", rcp);
    println!("data-dependent upper bound:                {:.4} (u = {:.3})", bound.bound, bound.u_factor);
    println!(
        "\ncrossed risk + complexity = {:.4} < {:.4} = original risk: training on the crossed sample is provably no worse",
        risk_t + rcp,
        risk_s
    );
    Ok(())
}
