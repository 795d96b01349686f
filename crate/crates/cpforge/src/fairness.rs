//! Contingency tables, odds ratios and the constructive odds-shifting
//! crossover.
//!
//! Everything combinatorial here is exact: tables hold integer counts and
//! odds ratios are reduced fractions, so the shift `Delta(i) =
//! (b+d)/(d-i) * i/d` and the post-transfer table can be asserted without
//! tolerances.

use serde::{Deserialize, Serialize};

use crate::cp::{FeatureSplit, Permutation};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Reduced fraction over i128.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    num: i128,
    den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Result<Rational> {
        if den == 0 {
            return Err(Error::numeric("zero denominator"));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Ok(Rational {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn from_int(v: i128) -> Rational {
        Rational { num: v, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn checked_div(self, o: Rational) -> Result<Rational> {
        Rational::new(self.num * o.den, self.den * o.num)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::ops::Add for Rational {
    type Output = Rational;
    fn add(self, o: Rational) -> Rational {
        Rational::new(self.num * o.den + o.num * self.den, self.den * o.den).expect("non-zero den")
    }
}

impl std::ops::Sub for Rational {
    type Output = Rational;
    fn sub(self, o: Rational) -> Rational {
        Rational::new(self.num * o.den - o.num * self.den, self.den * o.den).expect("non-zero den")
    }
}

impl std::ops::Mul for Rational {
    type Output = Rational;
    fn mul(self, o: Rational) -> Rational {
        Rational::new(self.num * o.num, self.den * o.den).expect("non-zero den")
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// The 2x2 table of counts for `(x_A, x_C)` among rows satisfying the
/// predicate: rows are `x_A = 0/1`, columns `x_C = 0/1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    /// x_A = 0, x_C = 0
    pub a: u64,
    /// x_A = 0, x_C = 1
    pub b: u64,
    /// x_A = 1, x_C = 0
    pub c: u64,
    /// x_A = 1, x_C = 1
    pub d: u64,
    pub predicate_support: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> ContingencyTable {
        ContingencyTable {
            a,
            b,
            c,
            d,
            predicate_support: a + b + c + d,
        }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

/// Conjunction of equality tests on binary features; `TRUE` when empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Predicate {
    /// `(feature index, required 0/1 value)`
    pub clauses: Vec<(usize, u8)>,
}

impl Predicate {
    pub fn always_true() -> Predicate {
        Predicate::default()
    }

    pub fn holds(&self, ds: &Dataset, i: usize) -> Result<bool> {
        for &(j, v) in &self.clauses {
            let cell = binary_value(ds, i, j)?;
            if cell != v {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Parses `"f1=0&f3=1"` against the dataset's feature names; an empty
    /// string is TRUE.
    pub fn parse(text: &str, ds: &Dataset) -> Result<Predicate> {
        let mut clauses = Vec::new();
        if text.trim().is_empty() {
            return Ok(Predicate { clauses });
        }
        for part in text.split('&') {
            let mut halves = part.splitn(2, '=');
            let name = halves.next().unwrap_or("").trim();
            let val = halves
                .next()
                .ok_or_else(|| Error::data(format!("predicate clause '{}' lacks '='", part)))?
                .trim();
            let j = ds
                .feature_names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::data(format!("missing column '{}'", name)))?;
            let v: u8 = match val {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::data(format!("predicate value '{}' is not 0/1", other))),
            };
            clauses.push((j, v));
        }
        Ok(Predicate { clauses })
    }
}

fn binary_value(ds: &Dataset, i: usize, j: usize) -> Result<u8> {
    let v = ds.value(i, j);
    if v == 0.0 {
        Ok(0)
    } else if v == 1.0 {
        Ok(1)
    } else {
        Err(Error::data(format!(
            "feature '{}' is not binary: value {} at row {}",
            ds.feature_names()[j],
            v,
            i
        )))
    }
}

/// Counts the 2x2 table of `(x_A, x_C)` over rows where the predicate holds.
pub fn contingency(ds: &Dataset, x_c: usize, x_a: usize, pi: &Predicate) -> Result<ContingencyTable> {
    if x_c == x_a {
        return Err(Error::data("x_C and x_A must be distinct features"));
    }
    if pi.clauses.iter().any(|&(j, _)| j == x_c || j == x_a) {
        return Err(Error::data("predicate must not reference x_C or x_A"));
    }
    let (mut a, mut b, mut c, mut d) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..ds.m() {
        if !pi.holds(ds, i)? {
            continue;
        }
        let va = binary_value(ds, i, x_a)?;
        let vc = binary_value(ds, i, x_c)?;
        match (va, vc) {
            (0, 0) => a += 1,
            (0, 1) => b += 1,
            (1, 0) => c += 1,
            (1, 1) => d += 1,
            _ => unreachable!(),
        }
    }
    let t = ContingencyTable::new(a, b, c, d);
    if t.total() == 0 {
        return Err(Error::data("empty support: predicate excludes every row"));
    }
    Ok(t)
}

/// Which ratio the odds computation takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OddsConvention {
    /// `b / d`: the count ratio the additive shift formula is stated for.
    Counts,
    /// `(b/(a+b)) / (d/(c+d))`: ratio of conditional probabilities.
    Probability,
}

/// Odds ratio of a table under the chosen convention, as an exact fraction.
pub fn odds_ratio(t: &ContingencyTable, convention: OddsConvention) -> Result<Rational> {
    match convention {
        OddsConvention::Counts => {
            if t.d == 0 {
                return Err(Error::numeric("undefined odds: d = 0"));
            }
            Rational::new(t.b as i128, t.d as i128)
        }
        OddsConvention::Probability => {
            if t.a + t.b == 0 || t.c + t.d == 0 || t.d == 0 {
                return Err(Error::numeric("undefined odds: zero denominator"));
            }
            let top = Rational::new(t.b as i128, (t.a + t.b) as i128)?;
            let bot = Rational::new(t.d as i128, (t.c + t.d) as i128)?;
            top.checked_div(bot)
        }
    }
}

/// Outcome of a planned transfer of `i` observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OddsShiftPlan {
    pub new_table: ContingencyTable,
    /// Exact change of the count-convention odds ratio.
    pub delta: Rational,
}

/// Plans the transfer of `i` observations between the table's cells:
/// positive `i` moves mass from `d` to `b` (and `a` to `c`), negative `i`
/// the other way. Requires `-min(b,c) <= i <= min(a,d)` and `d != i`.
pub fn plan_odds_shift(t: &ContingencyTable, i: i64) -> Result<OddsShiftPlan> {
    if t.d == 0 {
        return Err(Error::numeric("undefined odds: d = 0"));
    }
    let lo = -(t.b.min(t.c) as i64);
    let hi = t.a.min(t.d) as i64;
    if i < lo || i > hi {
        return Err(Error::infeasible(format!("shift {} outside feasible range [{}, {}]", i, lo, hi)));
    }
    if t.d as i64 == i {
        return Err(Error::numeric("shift empties cell d: odds undefined after transfer"));
    }
    let new_table = ContingencyTable::new(
        (t.a as i64 - i) as u64,
        (t.b as i64 + i) as u64,
        (t.c as i64 + i) as u64,
        (t.d as i64 - i) as u64,
    );
    // Delta(i) = (b + d) / (d - i) * i / d
    let delta = Rational::new((t.b + t.d) as i128, (t.d as i64 - i) as i128)? * Rational::new(i as i128, t.d as i128)?;
    Ok(OddsShiftPlan { new_table, delta })
}

/// Result of building the odds-shifting crossover.
#[derive(Debug, Clone)]
pub struct OddsCp {
    pub split: FeatureSplit,
    pub permutation: Permutation,
    pub plan: OddsShiftPlan,
    /// False when within-class pairing was impossible for some transfers, so
    /// the permutation crosses class boundaries and the learnability
    /// guarantee no longer applies.
    pub block_class: bool,
}

/// Builds a permutation acting only on the `x_A` column that realizes the
/// planned transfer: applying it and recounting yields exactly
/// `plan_odds_shift`'s table while both features keep their marginals.
///
/// Transfer rows are paired deterministically lowest-index-first, pairing
/// within a class whenever the per-class cell counts allow it.
pub fn build_odds_cp(ds: &Dataset, x_c: usize, x_a: usize, pi: &Predicate, i: i64) -> Result<OddsCp> {
    let table = contingency(ds, x_c, x_a, pi)?;
    let plan = plan_odds_shift(&table, i)?;
    let d = ds.d();
    let anchor: Vec<usize> = (0..d).filter(|&j| j != x_a).collect();
    let split = FeatureSplit::new(anchor, vec![x_a], d)?;

    let mut perm = Permutation::identity(ds.m());
    let mut block_class = true;
    if i != 0 {
        // donors lose their x_A value to recipients by a swap of the x_A cell
        let (donor_cell, recipient_cell) = if i > 0 {
            // d -> b means swapping x_A between (x_A=1, x_C=1) and (x_A=0, x_C=0)
            ((1u8, 1u8), (0u8, 0u8))
        } else {
            // b -> d: swap x_A between (x_A=0, x_C=1) and (x_A=1, x_C=0)
            ((0u8, 1u8), (1u8, 0u8))
        };
        let n = i.unsigned_abs() as usize;
        let collect = |cell: (u8, u8)| -> Result<Vec<usize>> {
            let mut out = Vec::new();
            for r in 0..ds.m() {
                if pi.holds(ds, r)? && binary_value(ds, r, x_a)? == cell.0 && binary_value(ds, r, x_c)? == cell.1 {
                    out.push(r);
                }
            }
            Ok(out)
        };
        let donors = collect(donor_cell)?;
        let recipients = collect(recipient_cell)?;
        if donors.len() < n || recipients.len() < n {
            return Err(Error::infeasible("insufficient rows to pair for the transfer"));
        }

        // within-class pairs first (lowest index first), then cross-class
        let mut used_d = vec![false; donors.len()];
        let mut used_r = vec![false; recipients.len()];
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n);
        for positive in [true, false] {
            if pairs.len() == n {
                break;
            }
            let dsel: Vec<usize> = (0..donors.len())
                .filter(|&k| !used_d[k] && (ds.label(donors[k]) == 1) == positive)
                .collect();
            let rsel: Vec<usize> = (0..recipients.len())
                .filter(|&k| !used_r[k] && (ds.label(recipients[k]) == 1) == positive)
                .collect();
            for (dk, rk) in dsel.into_iter().zip(rsel) {
                if pairs.len() == n {
                    break;
                }
                used_d[dk] = true;
                used_r[rk] = true;
                pairs.push((donors[dk], recipients[rk]));
            }
        }
        if pairs.len() < n {
            block_class = false;
            let dleft: Vec<usize> = (0..donors.len()).filter(|&k| !used_d[k]).collect();
            let rleft: Vec<usize> = (0..recipients.len()).filter(|&k| !used_r[k]).collect();
            for (dk, rk) in dleft.into_iter().zip(rleft) {
                if pairs.len() == n {
                    break;
                }
                pairs.push((donors[dk], recipients[rk]));
            }
        }
        debug_assert_eq!(pairs.len(), n);
        for (l, l2) in pairs {
            perm.swap_targets(l, l2);
        }
    }

    Ok(OddsCp {
        split,
        permutation: perm,
        plan,
        block_class,
    })
}

/// Fairness conditions expressed as membership sets for the odds ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FairnessCriterion {
    /// `rho = 1`.
    Exact,
    /// `rho in [1 - eps, 1 + eps]`.
    Band(f64),
    /// `rho in (0.8, +inf)`.
    DisparateImpact,
}

/// Membership test of the table's odds ratio in the criterion's set.
pub fn fairness_check(t: &ContingencyTable, criterion: FairnessCriterion, convention: OddsConvention) -> Result<bool> {
    let rho = odds_ratio(t, convention)?;
    Ok(match criterion {
        FairnessCriterion::Exact => rho.num() == rho.den(),
        FairnessCriterion::Band(eps) => {
            let v = rho.to_f64();
            v >= 1.0 - eps && v <= 1.0 + eps
        }
        FairnessCriterion::DisparateImpact => rho.to_f64() > 0.8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::{apply_cp, ShuffleSpec};

    fn table_dataset(t: &ContingencyTable, labels_alternate: bool) -> Dataset {
        // build one row per table entry: features [x_a, x_c, pad]
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut push = |n: u64, xa: f64, xc: f64| {
            for k in 0..n {
                rows.push(vec![xa, xc, 0.0]);
                labels.push(if labels_alternate && k % 2 == 1 { -1 } else { 1 });
            }
        };
        push(t.a, 0.0, 0.0);
        push(t.b, 0.0, 1.0);
        push(t.c, 1.0, 0.0);
        push(t.d, 1.0, 1.0);
        // make sure both classes exist
        labels[0] = 1;
        let last = labels.len() - 1;
        labels[last] = -1;
        Dataset::from_rows(rows, labels, vec!["xa".into(), "xc".into(), "pad".into()]).unwrap()
    }

    #[test]
    fn contingency_counts_unit_cells() {
        let t = ContingencyTable::new(1, 1, 1, 1);
        let ds = table_dataset(&t, false);
        let got = contingency(&ds, 1, 0, &Predicate::always_true()).unwrap();
        assert_eq!(got, ContingencyTable::new(1, 1, 1, 1));
    }

    #[test]
    fn contingency_rejects_empty_support() {
        let t = ContingencyTable::new(2, 2, 2, 2);
        let ds = table_dataset(&t, false);
        // pad feature is always 0; requiring 1 empties the support
        let pi = Predicate {
            clauses: vec![(2, 1)],
        };
        assert!(contingency(&ds, 1, 0, &pi).is_err());
    }

    #[test]
    fn contingency_rejects_non_binary_feature() {
        let ds = Dataset::from_rows(
            vec![vec![0.0, 0.5, 0.0], vec![1.0, 1.0, 0.0]],
            vec![1, -1],
            vec!["xa".into(), "xc".into(), "pad".into()],
        )
        .unwrap();
        assert!(contingency(&ds, 1, 0, &Predicate::always_true()).is_err());
    }

    #[test]
    fn odds_ratio_hand_arithmetic() {
        let t = ContingencyTable::new(1, 2, 3, 4);
        let counts = odds_ratio(&t, OddsConvention::Counts).unwrap();
        assert_eq!((counts.num(), counts.den()), (1, 2)); // 2/4
        let prob = odds_ratio(&t, OddsConvention::Probability).unwrap();
        assert_eq!((prob.num(), prob.den()), (7, 6)); // (2/3)/(4/7)
    }

    #[test]
    fn balanced_table_is_fair_in_both_conventions() {
        let t = ContingencyTable::new(3, 5, 3, 5);
        assert_eq!(odds_ratio(&t, OddsConvention::Counts).unwrap(), Rational::from_int(1));
        assert_eq!(odds_ratio(&t, OddsConvention::Probability).unwrap(), Rational::from_int(1));
        assert!(fairness_check(&t, FairnessCriterion::Exact, OddsConvention::Counts).unwrap());
    }

    #[test]
    fn zero_d_is_undefined() {
        let t = ContingencyTable::new(1, 2, 3, 0);
        assert!(odds_ratio(&t, OddsConvention::Counts).is_err());
        assert!(plan_odds_shift(&t, 0).is_err());
    }

    #[test]
    fn plan_zero_shift_is_identity() {
        let t = ContingencyTable::new(5, 3, 2, 4);
        let plan = plan_odds_shift(&t, 0).unwrap();
        assert_eq!(plan.new_table, t);
        assert_eq!(plan.delta, Rational::from_int(0));
    }

    #[test]
    fn plan_shift_examples() {
        let t = ContingencyTable::new(5, 3, 2, 4);
        let plan = plan_odds_shift(&t, 1).unwrap();
        assert_eq!(plan.new_table, ContingencyTable::new(4, 4, 3, 3));
        assert_eq!((plan.delta.num(), plan.delta.den()), (7, 12));
        // recompute b'/d' - b/d = 4/3 - 3/4 = 7/12
        let t2 = ContingencyTable::new(2, 2, 2, 2);
        let plan2 = plan_odds_shift(&t2, 1).unwrap();
        assert_eq!(plan2.delta, Rational::from_int(2)); // odds 1 -> 3
        assert_eq!(
            odds_ratio(&plan2.new_table, OddsConvention::Counts).unwrap(),
            Rational::from_int(3)
        );
    }

    #[test]
    fn plan_shift_range_checks() {
        // i = d would empty cell d: rejected even though i = min(a, d)
        let t = ContingencyTable::new(5, 3, 2, 4);
        assert!(plan_odds_shift(&t, 4).is_err());
        // boundary: legal at min(a, d) when d > i, one past is out of range
        let t3 = ContingencyTable::new(2, 3, 2, 4);
        assert!(plan_odds_shift(&t3, 2).is_ok());
        assert!(plan_odds_shift(&t3, 3).is_err());
        assert!(plan_odds_shift(&t3, -2).is_ok());
        assert!(plan_odds_shift(&t3, -3).is_err());
    }

    #[test]
    fn shift_then_unshift_restores_table() {
        let t = ContingencyTable::new(5, 3, 2, 6);
        let plan = plan_odds_shift(&t, 2).unwrap();
        let back = plan_odds_shift(&plan.new_table, -2).unwrap();
        assert_eq!(back.new_table, t);
    }

    #[test]
    fn build_odds_cp_zero_is_identity() {
        let t = ContingencyTable::new(3, 3, 3, 3);
        let ds = table_dataset(&t, true);
        let cp = build_odds_cp(&ds, 1, 0, &Predicate::always_true(), 0).unwrap();
        assert!(cp.permutation.is_identity());
    }

    #[test]
    fn build_odds_cp_realizes_plan_and_keeps_marginals() {
        let t = ContingencyTable::new(5, 3, 2, 4);
        let ds = table_dataset(&t, true);
        let pi = Predicate::always_true();
        let cp = build_odds_cp(&ds, 1, 0, &pi, 1).unwrap();
        let shuffled = apply_cp(&ds, &cp.split, &ShuffleSpec::Permutation(cp.permutation.clone())).unwrap();
        let after = contingency(&shuffled, 1, 0, &pi).unwrap();
        assert_eq!(after, cp.plan.new_table);
        // recomputed odds 4/3
        let rho = odds_ratio(&after, OddsConvention::Counts).unwrap();
        assert_eq!((rho.num(), rho.den()), (4, 3));
        // marginals of x_A and x_C unchanged
        let count = |d: &Dataset, j: usize| d.column(j).iter().filter(|&&v| v == 1.0).count();
        assert_eq!(count(&ds, 0), count(&shuffled, 0));
        assert_eq!(count(&ds, 1), count(&shuffled, 1));
    }

    #[test]
    fn build_odds_cp_boundary_and_error() {
        let t = ContingencyTable::new(2, 3, 2, 4);
        let ds = table_dataset(&t, true);
        let pi = Predicate::always_true();
        assert!(build_odds_cp(&ds, 1, 0, &pi, 2).is_ok());
        assert!(build_odds_cp(&ds, 1, 0, &pi, 3).is_err());
    }

    #[test]
    fn fairness_bands() {
        let t = ContingencyTable::new(10, 9, 10, 10); // counts rho = 0.9
        assert!(fairness_check(&t, FairnessCriterion::Band(0.15), OddsConvention::Counts).unwrap());
        let t2 = ContingencyTable::new(10, 5, 10, 10); // rho = 0.5
        assert!(!fairness_check(&t2, FairnessCriterion::DisparateImpact, OddsConvention::Counts).unwrap());
        assert!(fairness_check(&t, FairnessCriterion::DisparateImpact, OddsConvention::Counts).unwrap());
    }
}
