//! The complexity side: exact crossover complexity against every computable
//! bound on a desk-scale instance.
//!
//!     cargo run --example complexity_report

use cpforge::complexity::{
    expected_rcp_bound, rademacher_bound_linear_baseline, rademacher_bound_linear_improved, rcp_bound_dag,
    rcp_report, ClassRestriction,
};
use cpforge::cp::{cycle_stats, FeatureSplit, Permutation};
use cpforge::synth::dependent_features;

fn main() -> cpforge::Result<()> {
    let ds = dependent_features(14, 0.3, 5)?;
    let split = FeatureSplit::first_half(ds.d())?;
    // a block-class permutation with a 3-cycle in each class
    let mut targets: Vec<usize> = (0..ds.m()).collect();
    targets.swap(0, 1);
    let pos = ds.class_range(true);
    if pos.len() >= 3 {
        let (a, b, c) = (pos.start, pos.start + 1, pos.start + 2);
        targets[a] = b;
        targets[b] = c;
        targets[c] = a;
    }
    let neg = ds.class_range(false);
    if neg.len() >= 2 {
        targets.swap(neg.start, neg.start + 1);
    }
    let perm = Permutation::new(targets)?;

    let report = rcp_report(&ds, &split, &perm, 1.0, 20)?;
    println!("cycle structure: {:?}", cycle_stats(&perm));
    println!("exact complexity (2^m enumeration): {:.5}", report.exact.unwrap());
    println!(
        "linear bound: {:.5} with u = {:.3} (delta = {:.3}, gamma = {:.3})",
        report.bound_linear, report.u_factor, report.delta, report.gamma
    );

    let expected = expected_rcp_bound(&ds, &split, 2, ClassRestriction::All, 1.0)?;
    println!("expected complexity of a uniform transposition (k = 2): <= {:.5}", expected);

    // odd cycles buy down the capacity bound for bounded-leaf classes
    let h_plus = (60.0f64).exp();
    for oc in [0usize, 2, 4] {
        let b = rcp_bound_dag(h_plus, ds.m(), 1.0, oc, 1.0)?;
        println!("bounded-prediction class, {} odd cycles: bound {:.4}", oc, b);
    }

    // the norm-and-angle refinement of the plain Rademacher bound
    let improved = rademacher_bound_linear_improved(&ds, 1.0)?;
    let baseline = rademacher_bound_linear_baseline(&ds, 1.0)?;
    println!("\nplain Rademacher bound on this sample: {:.4} (norm-only: {:.4})", improved, baseline);
    Ok(())
}
