//! Dense CSP instances: exact SAT values, restriction, and subsampling means.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combin;
use crate::error::{Budget, Error, Result};
use crate::oracle::VerificationOracle;

#[derive(Clone, Debug)]
pub struct Constraint {
    pub scope: Vec<usize>,
    pub weight: f64,
    pub payoff: VerificationOracle,
}

#[derive(Clone, Debug)]
pub struct DenseCsp {
    pub n_vars: usize,
    pub alphabet_size: usize,
    pub arity: usize,
    pub constraints: Vec<Constraint>,
}

/// Value of a maximization together with an attaining assignment.
/// `vacuous` marks the empty-constraint convention (value 1 by fiat).
#[derive(Clone, Debug, serde::Serialize)]
pub struct SatValue {
    pub value: f64,
    pub witness: Option<Vec<usize>>,
    pub vacuous: bool,
}

/// How subsampling means treat restrictions with no surviving constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VacuousPolicy {
    /// Count the subset with value 1 (Arthur accepts vacuously).
    ScoreOne,
    /// Drop the subset from the average.
    Exclude,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SubsampleMean {
    pub mean: f64,
    pub n_samples: usize,
    pub stderr: Option<f64>,
    pub vacuous_count: usize,
}

impl DenseCsp {
    pub fn new(
        n_vars: usize,
        alphabet_size: usize,
        arity: usize,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        if n_vars == 0 || alphabet_size == 0 {
            return Err(Error::InvalidCsp("n_vars and alphabet must be >= 1".into()));
        }
        if arity < 2 {
            return Err(Error::InvalidCsp(format!("arity {arity} < 2")));
        }
        for (ci, c) in constraints.iter().enumerate() {
            if c.scope.len() != arity {
                return Err(Error::InvalidCsp(format!(
                    "constraint {ci} scope has arity {}, expected {arity}",
                    c.scope.len()
                )));
            }
            let mut sorted = c.scope.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidCsp(format!(
                    "constraint {ci} scope has a repeated variable"
                )));
            }
            if sorted.last().copied().unwrap_or(0) >= n_vars {
                return Err(Error::InvalidCsp(format!(
                    "constraint {ci} scope exceeds variable count {n_vars}"
                )));
            }
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::InvalidCsp(format!(
                    "constraint {ci} weight {} not positive",
                    c.weight
                )));
            }
            if let VerificationOracle::DenseTable { dims, .. } = &c.payoff {
                if dims.len() != arity || dims.iter().any(|&d| d != alphabet_size) {
                    return Err(Error::InvalidCsp(format!(
                        "constraint {ci} payoff dims {dims:?} do not match Sigma^{arity}"
                    )));
                }
            }
        }
        Ok(DenseCsp {
            n_vars,
            alphabet_size,
            arity,
            constraints,
        })
    }

    /// Normalized weighted average payoff of a full assignment.
    pub fn assignment_value(&self, assignment: &[usize]) -> Result<f64> {
        if assignment.len() != self.n_vars {
            return Err(Error::InvalidParameter(format!(
                "assignment length {} != {}",
                assignment.len(),
                self.n_vars
            )));
        }
        if assignment.iter().any(|&s| s >= self.alphabet_size) {
            return Err(Error::InvalidParameter("symbol out of alphabet".into()));
        }
        if self.constraints.is_empty() {
            return Err(Error::NoConstraints);
        }
        let mut total = 0.0;
        let mut score = 0.0;
        let mut symbols = vec![0usize; self.arity];
        for c in &self.constraints {
            for (slot, &v) in symbols.iter_mut().zip(&c.scope) {
                *slot = assignment[v];
            }
            total += c.weight;
            score += c.weight * c.payoff.eval(&symbols);
        }
        Ok(score / total)
    }

    /// Greedy set of variables whose fixing leaves every constraint with at
    /// most one free variable, so the remainder optimizes per variable.
    fn conditioning_set(&self) -> Vec<usize> {
        let mut degree = vec![0usize; self.n_vars];
        for c in &self.constraints {
            for &v in &c.scope {
                degree[v] += 1;
            }
        }
        let mut fixed = vec![false; self.n_vars];
        for c in &self.constraints {
            loop {
                let free: Vec<usize> = c.scope.iter().copied().filter(|&v| !fixed[v]).collect();
                if free.len() <= 1 {
                    break;
                }
                let &pick = free
                    .iter()
                    .max_by_key(|&&v| (degree[v], std::cmp::Reverse(v)))
                    .unwrap();
                fixed[pick] = true;
            }
        }
        (0..self.n_vars).filter(|&v| fixed[v]).collect()
    }

    /// Exact maximum of the normalized weighted payoff average over all
    /// assignments, with witness. Conditions on a covering variable set and
    /// optimizes the independent remainder per variable.
    pub fn sat_value(&self, budget: Budget) -> Result<SatValue> {
        if self.constraints.is_empty() {
            return Err(Error::NoConstraints);
        }
        let cover = self.conditioning_set();
        let space = (self.alphabet_size as u128)
            .checked_pow(cover.len() as u32)
            .unwrap_or(u128::MAX);
        let eval_cost: u128 = self
            .constraints
            .iter()
            .map(|c| c.payoff.eval_cost() as u128)
            .sum();
        let per = eval_cost.max(1) * (self.alphabet_size as u128);
        budget.check(space.checked_mul(per).unwrap_or(u128::MAX))?;
        if space > u64::MAX as u128 {
            return Err(Error::BudgetExceeded {
                required: space,
                budget: budget.0,
            });
        }

        let in_cover = {
            let mut m = vec![false; self.n_vars];
            for &v in &cover {
                m[v] = true;
            }
            m
        };
        // Constraints grouped by their single free variable (if any).
        let mut fully_fixed = Vec::new();
        let mut by_free: Vec<Vec<usize>> = vec![Vec::new(); self.n_vars];
        for (ci, c) in self.constraints.iter().enumerate() {
            match c.scope.iter().copied().find(|&v| !in_cover[v]) {
                Some(v) => by_free[v].push(ci),
                None => fully_fixed.push(ci),
            }
        }
        let free_vars: Vec<usize> = (0..self.n_vars)
            .filter(|&v| !in_cover[v] && !by_free[v].is_empty())
            .collect();
        let total_weight: f64 = self.constraints.iter().map(|c| c.weight).sum();

        let radices = vec![self.alphabet_size; cover.len()];
        let score_of = |rank: u64| -> f64 {
            let cover_assign = combin::unrank_tuple(&radices, rank as u128);
            let mut assignment = vec![usize::MAX; self.n_vars];
            for (i, &v) in cover.iter().enumerate() {
                assignment[v] = cover_assign[i];
            }
            let mut score = 0.0;
            let mut symbols = vec![0usize; self.arity];
            for &ci in &fully_fixed {
                let c = &self.constraints[ci];
                for (slot, &v) in symbols.iter_mut().zip(&c.scope) {
                    *slot = assignment[v];
                }
                score += c.weight * c.payoff.eval(&symbols);
            }
            for &fv in &free_vars {
                let mut best = f64::NEG_INFINITY;
                for sym in 0..self.alphabet_size {
                    let mut s = 0.0;
                    for &ci in &by_free[fv] {
                        let c = &self.constraints[ci];
                        for (slot, &v) in symbols.iter_mut().zip(&c.scope) {
                            *slot = if v == fv { sym } else { assignment[v] };
                        }
                        s += c.weight * c.payoff.eval(&symbols);
                    }
                    if s > best {
                        best = s;
                    }
                }
                score += best;
            }
            score
        };

        let best = (0..space as u64)
            .into_par_iter()
            .map(|rank| (score_of(rank), rank))
            .reduce(
                || (f64::NEG_INFINITY, u64::MAX),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                },
            );

        // Reconstruct the full witness for the best cover assignment.
        let cover_assign = combin::unrank_tuple(&radices, best.1 as u128);
        let mut assignment = vec![0usize; self.n_vars];
        for (i, &v) in cover.iter().enumerate() {
            assignment[v] = cover_assign[i];
        }
        let mut symbols = vec![0usize; self.arity];
        for &fv in &free_vars {
            let mut best_sym = 0;
            let mut best_score = f64::NEG_INFINITY;
            for sym in 0..self.alphabet_size {
                let mut s = 0.0;
                for &ci in &by_free[fv] {
                    let c = &self.constraints[ci];
                    for (slot, &v) in symbols.iter_mut().zip(&c.scope) {
                        *slot = if v == fv { sym } else { assignment[v] };
                    }
                    s += c.weight * c.payoff.eval(&symbols);
                }
                if s > best_score {
                    best_score = s;
                    best_sym = sym;
                }
            }
            assignment[fv] = best_sym;
        }
        let value = best.0 / total_weight;
        debug_assert!((self.assignment_value(&assignment)? - value).abs() < 1e-9);
        Ok(SatValue {
            value,
            witness: Some(assignment),
            vacuous: false,
        })
    }

    /// [`sat_value`] extended to empty instances via the vacuous convention.
    pub fn sat_value_vacuous_ok(&self, budget: Budget) -> Result<SatValue> {
        if self.constraints.is_empty() {
            return Ok(SatValue {
                value: 1.0,
                witness: None,
                vacuous: true,
            });
        }
        self.sat_value(budget)
    }

    /// Restriction to the variables in `subset`: keeps exactly the constraints
    /// whose scope lies inside it, with variables reindexed in subset order.
    pub fn restrict(&self, subset: &[usize]) -> Result<DenseCsp> {
        if subset.is_empty() {
            return Err(Error::EmptySubset { player: 0 });
        }
        let mut new_index = vec![None; self.n_vars];
        for (i, &v) in subset.iter().enumerate() {
            if v >= self.n_vars {
                return Err(Error::QuestionOutOfRange {
                    question: v,
                    count: self.n_vars,
                });
            }
            if new_index[v].replace(i).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate variable {v} in subset"
                )));
            }
        }
        let constraints = self
            .constraints
            .iter()
            .filter(|c| c.scope.iter().all(|&v| new_index[v].is_some()))
            .map(|c| Constraint {
                scope: c.scope.iter().map(|&v| new_index[v].unwrap()).collect(),
                weight: c.weight,
                payoff: c.payoff.clone(),
            })
            .collect();
        Ok(DenseCsp {
            n_vars: subset.len(),
            alphabet_size: self.alphabet_size,
            arity: self.arity,
            constraints,
        })
    }

    /// E_I[SAT(restriction to I)] over uniform size-t variable subsets,
    /// exactly over all C(n,t) subsets.
    pub fn subsample_mean_exact(
        &self,
        t: usize,
        policy: VacuousPolicy,
        budget: Budget,
    ) -> Result<SubsampleMean> {
        if t == 0 || t > self.n_vars {
            return Err(Error::InvalidParameter(format!(
                "subset size {t} out of range 1..={}",
                self.n_vars
            )));
        }
        let count = combin::binomial(self.n_vars, t);
        let per = (self.alphabet_size as u128)
            .checked_pow(t as u32)
            .unwrap_or(u128::MAX);
        budget.check(count.checked_mul(per).unwrap_or(u128::MAX))?;
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut vacuous = 0usize;
        for subset in combin::subsets(self.n_vars, t) {
            let sv = self.restrict(&subset)?.sat_value_vacuous_ok(budget)?;
            if sv.vacuous {
                vacuous += 1;
                if policy == VacuousPolicy::Exclude {
                    continue;
                }
            }
            sum += sv.value;
            n += 1;
        }
        if n == 0 {
            return Err(Error::NoConstraints);
        }
        Ok(SubsampleMean {
            mean: sum / n as f64,
            n_samples: n,
            stderr: None,
            vacuous_count: vacuous,
        })
    }

    /// Monte-Carlo estimate of the subsample mean with a seeded RNG.
    pub fn subsample_mean_mc(
        &self,
        t: usize,
        trials: usize,
        seed: u64,
        policy: VacuousPolicy,
        budget: Budget,
    ) -> Result<SubsampleMean> {
        if t == 0 || t > self.n_vars {
            return Err(Error::InvalidParameter(format!(
                "subset size {t} out of range 1..={}",
                self.n_vars
            )));
        }
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(trials);
        let mut vacuous = 0usize;
        for _ in 0..trials {
            let mut subset: Vec<usize> = sample(&mut rng, self.n_vars, t).into_vec();
            subset.sort_unstable();
            let sv = self.restrict(&subset)?.sat_value_vacuous_ok(budget)?;
            if sv.vacuous {
                vacuous += 1;
                if policy == VacuousPolicy::Exclude {
                    continue;
                }
            }
            values.push(sv.value);
        }
        if values.is_empty() {
            return Err(Error::NoConstraints);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(SubsampleMean {
            mean,
            n_samples: values.len(),
            stderr: Some((var / n).sqrt()),
            vacuous_count: vacuous,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn equality_payoff() -> VerificationOracle {
        VerificationOracle::rule(1, |s| if s[0] == s[1] { 1.0 } else { 0.0 })
    }

    fn seeded_csp(n_vars: usize, alphabet: usize, n_constraints: usize, seed: u64) -> DenseCsp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut constraints = Vec::new();
        for _ in 0..n_constraints {
            let mut scope = sample(&mut rng, n_vars, 2).into_vec();
            scope.sort_unstable();
            let values: Vec<f64> = (0..alphabet * alphabet).map(|_| rng.gen()).collect();
            constraints.push(Constraint {
                scope,
                weight: rng.gen_range(0.5..2.0),
                payoff: VerificationOracle::dense(vec![alphabet, alphabet], values).unwrap(),
            });
        }
        DenseCsp::new(n_vars, alphabet, 2, constraints).unwrap()
    }

    /// Independent oracle: plain enumeration of all alphabet^n assignments.
    fn brute_force(csp: &DenseCsp) -> f64 {
        let radices = vec![csp.alphabet_size; csp.n_vars];
        let space = combin::tuple_count(&radices);
        let mut best = f64::NEG_INFINITY;
        for rank in 0..space {
            let a = combin::unrank_tuple(&radices, rank);
            best = best.max(csp.assignment_value(&a).unwrap());
        }
        best
    }

    #[test]
    fn single_constant_constraint() {
        let csp = DenseCsp::new(
            2,
            2,
            2,
            vec![Constraint {
                scope: vec![0, 1],
                weight: 1.0,
                payoff: VerificationOracle::rule(1, |_| 1.0),
            }],
        )
        .unwrap();
        assert_eq!(csp.sat_value(Budget::default()).unwrap().value, 1.0);
    }

    #[test]
    fn complementary_constraints_give_half() {
        let csp = DenseCsp::new(
            2,
            2,
            2,
            vec![
                Constraint {
                    scope: vec![0, 1],
                    weight: 1.0,
                    payoff: equality_payoff(),
                },
                Constraint {
                    scope: vec![0, 1],
                    weight: 1.0,
                    payoff: VerificationOracle::rule(1, |s| if s[0] != s[1] { 1.0 } else { 0.0 }),
                },
            ],
        )
        .unwrap();
        assert_eq!(csp.sat_value(Budget::default()).unwrap().value, 0.5);
    }

    #[test]
    fn sat_value_matches_brute_force() {
        for seed in 0..10 {
            let csp = seeded_csp(5, 3, 7, seed);
            let fast = csp.sat_value(Budget::default()).unwrap();
            let slow = brute_force(&csp);
            assert!(
                (fast.value - slow).abs() < 1e-12,
                "seed {seed}: {} vs {}",
                fast.value,
                slow
            );
            let w = fast.witness.unwrap();
            assert!((csp.assignment_value(&w).unwrap() - fast.value).abs() < 1e-12);
        }
    }

    #[test]
    fn sat_value_order_independent() {
        let csp = seeded_csp(4, 3, 6, 99);
        let v1 = csp.sat_value(Budget::default()).unwrap().value;
        let mut shuffled = csp.constraints.clone();
        shuffled.reverse();
        let csp2 = DenseCsp::new(4, 3, 2, shuffled).unwrap();
        let v2 = csp2.sat_value(Budget::default()).unwrap().value;
        assert!((v1 - v2).abs() < 1e-12);
    }

    #[test]
    fn no_constraints_is_an_error() {
        let csp = DenseCsp::new(3, 2, 2, vec![]).unwrap();
        assert!(matches!(
            csp.sat_value(Budget::default()),
            Err(Error::NoConstraints)
        ));
        let v = csp.sat_value_vacuous_ok(Budget::default()).unwrap();
        assert!(v.vacuous);
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn restrict_full_is_identity() {
        let csp = seeded_csp(5, 2, 6, 3);
        let all: Vec<usize> = (0..5).collect();
        let r = csp.restrict(&all).unwrap();
        assert_eq!(r.constraints.len(), csp.constraints.len());
        let v1 = csp.sat_value(Budget::default()).unwrap().value;
        let v2 = r.sat_value(Budget::default()).unwrap().value;
        assert!((v1 - v2).abs() < 1e-12);
    }

    #[test]
    fn restrict_below_arity_drops_everything() {
        let csp = seeded_csp(5, 2, 6, 4);
        let r = csp.restrict(&[2]).unwrap();
        assert!(r.constraints.is_empty());
    }

    #[test]
    fn restrict_matches_scope_filter_oracle() {
        let csp = seeded_csp(5, 2, 8, 17);
        let subset = [0, 2, 4];
        let r = csp.restrict(&subset).unwrap();
        // Independent filter: count constraints with scope inside the subset.
        let expected = csp
            .constraints
            .iter()
            .filter(|c| c.scope.iter().all(|v| subset.contains(v)))
            .count();
        assert_eq!(r.constraints.len(), expected);
    }

    #[test]
    fn subsample_full_size_recovers_sat() {
        let csp = seeded_csp(5, 2, 6, 8);
        let m = csp
            .subsample_mean_exact(5, VacuousPolicy::ScoreOne, Budget::default())
            .unwrap();
        let sat = csp.sat_value(Budget::default()).unwrap().value;
        assert!((m.mean - sat).abs() < 1e-12);
    }

    #[test]
    fn subsample_mean_at_least_sat() {
        for seed in 0..5 {
            let csp = seeded_csp(6, 2, 8, seed);
            let sat = csp.sat_value(Budget::default()).unwrap().value;
            for t in 2..=6 {
                let m = csp
                    .subsample_mean_exact(t, VacuousPolicy::ScoreOne, Budget::default())
                    .unwrap();
                assert!(
                    m.mean >= sat - 1e-12,
                    "seed {seed} t {t}: {} < {}",
                    m.mean,
                    sat
                );
            }
        }
    }

    #[test]
    fn subsample_matches_subset_enumeration_oracle() {
        let csp = seeded_csp(6, 2, 7, 13);
        let m = csp
            .subsample_mean_exact(3, VacuousPolicy::ScoreOne, Budget::default())
            .unwrap();
        // Independent oracle: explicit loop over all C(6,3) subsets with
        // brute-force SAT on each restriction.
        let mut sum = 0.0;
        let mut n = 0;
        for subset in combin::subsets(6, 3) {
            let r = csp.restrict(&subset).unwrap();
            sum += if r.constraints.is_empty() {
                1.0
            } else {
                brute_force(&r)
            };
            n += 1;
        }
        assert_eq!(n, 20);
        assert!((m.mean - sum / 20.0).abs() < 1e-12);
    }

    #[test]
    fn arity_one_rejected() {
        assert!(DenseCsp::new(3, 2, 1, vec![]).is_err());
    }
}
