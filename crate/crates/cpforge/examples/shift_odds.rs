//! Shift an odds ratio by an exact combinatorial amount: plan the transfer,
//! build the permutation that realizes it, verify marginals never move.
//!
//!     cargo run --example shift_odds

use cpforge::cp::{apply_cp, ShuffleSpec};
use cpforge::data::Dataset;
use cpforge::fairness::{
    build_odds_cp, contingency, fairness_check, odds_ratio, plan_odds_shift, FairnessCriterion, OddsConvention,
    Predicate,
};

fn main() -> cpforge::Result<()> {
    // 14 rows realizing the table a=5, b=3, c=2, d=4
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (n, xa, xc) in [(5, 0.0, 0.0), (3, 0.0, 1.0), (2, 1.0, 0.0), (4, 1.0, 1.0)] {
        for k in 0..n {
            rows.push(vec![xa, xc]);
            labels.push(if k % 2 == 0 { 1 } else { -1 });
        }
    }
    let ds = Dataset::from_rows(rows, labels, vec!["group".into(), "outcome".into()])?;
    let pi = Predicate::always_true();

    let before = contingency(&ds, 1, 0, &pi)?;
    println!("table before: a={} b={} c={} d={}", before.a, before.b, before.c, before.d);
    println!(
        "odds ratio: counts {} = {:.4}, probability {:.4}",
        odds_ratio(&before, OddsConvention::Counts)?,
        odds_ratio(&before, OddsConvention::Counts)?.to_f64(),
        odds_ratio(&before, OddsConvention::Probability)?.to_f64()
    );

    // the feasible transfer range and what each shift would do
    println!("\nfeasible transfers and their exact deltas:");
    for i in -2..=3 {
        match plan_odds_shift(&before, i) {
            Ok(plan) => println!("  i = {:+}: delta = {}, new table ({}, {}, {}, {})", i, plan.delta, plan.new_table.a, plan.new_table.b, plan.new_table.c, plan.new_table.d),
            Err(e) => println!("  i = {:+}: {}", i, e),
        }
    }

    // transfer one observation and verify on the data
    let cp = build_odds_cp(&ds, 1, 0, &pi, 1)?;
    let shuffled = apply_cp(&ds, &cp.split, &ShuffleSpec::Permutation(cp.permutation.clone()))?;
    let after = contingency(&shuffled, 1, 0, &pi)?;
    println!(
        "\nafter transferring 1: table ({}, {}, {}, {}), odds {} (block-class pairing: {})",
        after.a,
        after.b,
        after.c,
        after.d,
        odds_ratio(&after, OddsConvention::Counts)?,
        cp.block_class
    );

    let count_ones = |d: &Dataset, j: usize| d.column(j).iter().filter(|&&v| v == 1.0).count();
    println!(
        "marginals unchanged: group {} -> {}, outcome {} -> {}",
        count_ones(&ds, 0),
        count_ones(&shuffled, 0),
        count_ones(&ds, 1),
        count_ones(&shuffled, 1)
    );

    for (name, criterion) in [
        ("exact balance", FairnessCriterion::Exact),
        ("band 15%", FairnessCriterion::Band(0.15)),
        ("no disparate impact", FairnessCriterion::DisparateImpact),
    ] {
        println!(
            "{:<20} before: {:<5} after: {}",
            name,
            fairness_check(&before, criterion, OddsConvention::Counts)?,
            fairness_check(&after, criterion, OddsConvention::Counts)?
        );
    }
    Ok(())
}
