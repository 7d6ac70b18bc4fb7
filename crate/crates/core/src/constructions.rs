//! Game transformations: clause/variable game, birthday / parallel /
//! threshold repetition, free-game-to-CSP encodings, and named test games.

use std::sync::Arc;

use num_integer::Integer;

use crate::cnf::CnfFormula;
use crate::combin;
use crate::csp::{Constraint, DenseCsp};
use crate::error::{Error, Result};
use crate::game::{Distribution, FreeGame, KFreeGame, TwoProverGame};
use crate::oracle::VerificationOracle;

/// Dense materializations are capped at this many table entries.
pub const MATERIALIZE_GATE: u128 = 10_000_000;

/// Clause/variable game of a 3-CNF: Merlin_1 gets a clause and answers a
/// 3-bit assignment to its sorted variables, Merlin_2 gets a variable and
/// answers a bit. Arthur draws (clause, variable) uniformly over incident
/// pairs and checks satisfaction plus consistency.
pub fn clause_variable_game(phi: &CnfFormula) -> Result<TwoProverGame> {
    if phi.clauses.is_empty() {
        return Err(Error::InvalidParameter("formula has no clauses".into()));
    }
    let occurrences = phi.occurrence_counts();
    if let Some(v) = occurrences.iter().position(|&c| c == 0) {
        return Err(Error::InvalidParameter(format!(
            "variable {} occurs in no clause",
            v + 1
        )));
    }
    let m = phi.clauses.len();
    let n = phi.n_vars;
    let mut support = Vec::with_capacity(3 * m);
    for (i, clause) in phi.clauses.iter().enumerate() {
        for v in CnfFormula::clause_vars(clause) {
            support.push((i, v));
        }
    }
    let clauses = phi.clauses.clone();
    let verifier = VerificationOracle::rule(1, move |idx| {
        let (i, j, a, b) = (idx[0], idx[1], idx[2], idx[3]);
        let clause = &clauses[i];
        let vars = CnfFormula::clause_vars(clause);
        let bits = [a & 1 == 1, a >> 1 & 1 == 1, a >> 2 & 1 == 1];
        if !CnfFormula::clause_satisfied_by_bits(clause, bits) {
            return 0.0;
        }
        // Non-incident (i, j) never occurs under the support distribution;
        // any boolean value works there.
        let Some(slot) = vars.iter().position(|&v| v == j) else {
            return 0.0;
        };
        if bits[slot] == (b == 1) {
            1.0
        } else {
            0.0
        }
    });
    TwoProverGame::new(m, n, 8, 2, Distribution::UniformOverSupport(support), verifier)
}

/// The footnote game: X = Y = A = B = [n], Merlins lose iff x is the first
/// question, independent of all answers.
pub fn counterexample_game(n: usize) -> Result<FreeGame> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be >= 2")));
    }
    let verifier = VerificationOracle::rule(1, |idx| if idx[0] == 0 { 0.0 } else { 1.0 });
    FreeGame::from_parts(n, n, n, n, verifier)
}

/// Birthday repetition of a boolean-verifier base game with an explicit
/// support set Z. Questions are ranked k-/l-subsets, answers are tuples, and
/// the verifier ANDs the base check over (S x T) n Z.
#[derive(Clone, Debug)]
pub struct BirthdayGame {
    pub base: Arc<TwoProverGame>,
    pub k: usize,
    pub ell: usize,
}

pub fn birthday_repetition(base: TwoProverGame, k: usize, ell: usize) -> Result<BirthdayGame> {
    if !matches!(base.distribution, Distribution::UniformOverSupport(_)) {
        return Err(Error::InvalidGame(
            "birthday repetition requires a uniform-over-support base; \
             use with_explicit_support() for free bases"
                .into(),
        ));
    }
    if k == 0 || k > base.x_count || ell == 0 || ell > base.y_count {
        return Err(Error::InvalidParameter(format!(
            "k = {k}, l = {ell} out of range for |X| = {}, |Y| = {}",
            base.x_count, base.y_count
        )));
    }
    base.require_boolean()?;
    Ok(BirthdayGame {
        base: Arc::new(base),
        k,
        ell,
    })
}

impl BirthdayGame {
    pub fn x_count(&self) -> u128 {
        combin::binomial(self.base.x_count, self.k)
    }

    pub fn y_count(&self) -> u128 {
        combin::binomial(self.base.y_count, self.ell)
    }

    pub fn a_count(&self) -> u128 {
        (self.base.a_count as u128)
            .checked_pow(self.k as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn b_count(&self) -> u128 {
        (self.base.b_count as u128)
            .checked_pow(self.ell as u32)
            .unwrap_or(u128::MAX)
    }

    /// Implicit free game over ranked subsets with a rule verifier.
    pub fn as_free_game(&self) -> Result<FreeGame> {
        let counts = [
            self.x_count(),
            self.y_count(),
            self.a_count(),
            self.b_count(),
        ];
        if counts.iter().any(|&c| c > usize::MAX as u128) {
            return Err(Error::BudgetExceeded {
                required: counts.iter().copied().max().unwrap(),
                budget: u64::MAX,
            });
        }
        let base = Arc::clone(&self.base);
        let (k, ell) = (self.k, self.ell);
        let (m, n) = (base.x_count, base.y_count);
        let mut in_z = vec![false; m * n];
        if let Distribution::UniformOverSupport(support) = &base.distribution {
            for &(x, y) in support {
                in_z[x * n + y] = true;
            }
        }
        let a_rad = vec![base.a_count; k];
        let b_rad = vec![base.b_count; ell];
        let cost = (k * ell) as u64 * base.verifier.eval_cost();
        let verifier = VerificationOracle::rule(cost, move |idx| {
            let s = combin::unrank_subset(m, k, idx[0] as u128);
            let t = combin::unrank_subset(n, ell, idx[1] as u128);
            let a = combin::unrank_tuple(&a_rad, idx[2] as u128);
            let b = combin::unrank_tuple(&b_rad, idx[3] as u128);
            for (si, &x) in s.iter().enumerate() {
                for (tj, &y) in t.iter().enumerate() {
                    if in_z[x * n + y] && base.eval(x, y, a[si], b[tj]) != 1.0 {
                        return 0.0;
                    }
                }
            }
            1.0
        });
        FreeGame::from_parts(
            counts[0] as usize,
            counts[1] as usize,
            counts[2] as usize,
            counts[3] as usize,
            verifier,
        )
    }

    /// Dense materialization, gated at [`MATERIALIZE_GATE`] table entries.
    pub fn materialize(&self) -> Result<FreeGame> {
        let entries = self
            .x_count()
            .checked_mul(self.y_count())
            .and_then(|c| c.checked_mul(self.a_count()))
            .and_then(|c| c.checked_mul(self.b_count()))
            .unwrap_or(u128::MAX);
        if entries > MATERIALIZE_GATE {
            return Err(Error::BudgetExceeded {
                required: entries,
                budget: MATERIALIZE_GATE as u64,
            });
        }
        let implicit = self.as_free_game()?;
        let dims = vec![
            implicit.x_count,
            implicit.y_count,
            implicit.a_count,
            implicit.b_count,
        ];
        let mut values = Vec::with_capacity(entries as usize);
        for rank in 0..entries {
            let idx = combin::unrank_tuple(&dims, rank_to_row_major(rank, &dims));
            values.push(implicit.verifier.eval(&idx));
        }
        FreeGame::from_parts(
            dims[0],
            dims[1],
            dims[2],
            dims[3],
            VerificationOracle::dense(dims, values)?,
        )
    }
}

/// Convert a flat row-major position to the little-endian tuple rank used by
/// `unrank_tuple`, so dense tables fill in their own storage order.
fn rank_to_row_major(pos: u128, dims: &[usize]) -> u128 {
    let mut rem = pos;
    let mut idx = vec![0usize; dims.len()];
    for (slot, &d) in idx.iter_mut().zip(dims).rev() {
        *slot = (rem % d as u128) as usize;
        rem /= d as u128;
    }
    combin::rank_tuple(dims, &idx)
}

/// m-fold parallel repetition: product questions, product distribution,
/// product verifier.
pub fn parallel_repetition(base: &TwoProverGame, m: usize) -> Result<TwoProverGame> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let x_count = checked_pow_usize(base.x_count, m)?;
    let y_count = checked_pow_usize(base.y_count, m)?;
    let a_count = checked_pow_usize(base.a_count, m)?;
    let b_count = checked_pow_usize(base.b_count, m)?;
    let distribution = match &base.distribution {
        Distribution::UniformProduct => Distribution::UniformProduct,
        Distribution::UniformOverSupport(support) => {
            let total = (support.len() as u128)
                .checked_pow(m as u32)
                .unwrap_or(u128::MAX);
            if total > MATERIALIZE_GATE {
                return Err(Error::BudgetExceeded {
                    required: total,
                    budget: MATERIALIZE_GATE as u64,
                });
            }
            let x_rad = vec![base.x_count; m];
            let y_rad = vec![base.y_count; m];
            let mut pairs = Vec::with_capacity(total as usize);
            let radices = vec![support.len(); m];
            for rank in 0..total {
                let choice = combin::unrank_tuple(&radices, rank);
                let xs: Vec<usize> = choice.iter().map(|&c| support[c].0).collect();
                let ys: Vec<usize> = choice.iter().map(|&c| support[c].1).collect();
                pairs.push((
                    combin::rank_tuple(&x_rad, &xs) as usize,
                    combin::rank_tuple(&y_rad, &ys) as usize,
                ));
            }
            pairs.sort_unstable();
            pairs.dedup();
            Distribution::UniformOverSupport(pairs)
        }
        Distribution::Weighted(weights) => {
            let total = (x_count as u128) * (y_count as u128);
            if total > MATERIALIZE_GATE {
                return Err(Error::BudgetExceeded {
                    required: total,
                    budget: MATERIALIZE_GATE as u64,
                });
            }
            let x_rad = vec![base.x_count; m];
            let y_rad = vec![base.y_count; m];
            let mut out = vec![0.0f64; x_count * y_count];
            for (x, slot_row) in out.chunks_mut(y_count).enumerate() {
                let xs = combin::unrank_tuple(&x_rad, x as u128);
                for (y, slot) in slot_row.iter_mut().enumerate() {
                    let ys = combin::unrank_tuple(&y_rad, y as u128);
                    let mut w = 1.0;
                    for i in 0..m {
                        w *= weights[xs[i] * base.y_count + ys[i]];
                    }
                    *slot = w;
                }
            }
            // Renormalize to absorb float drift in the product.
            let sum: f64 = out.iter().sum();
            for w in &mut out {
                *w /= sum;
            }
            Distribution::Weighted(out)
        }
    };
    let base_v = base.verifier.clone();
    let x_rad = vec![base.x_count; m];
    let y_rad = vec![base.y_count; m];
    let a_rad = vec![base.a_count; m];
    let b_rad = vec![base.b_count; m];
    let cost = m as u64 * base_v.eval_cost();
    let verifier = VerificationOracle::rule(cost, move |idx| {
        let xs = combin::unrank_tuple(&x_rad, idx[0] as u128);
        let ys = combin::unrank_tuple(&y_rad, idx[1] as u128);
        let al = combin::unrank_tuple(&a_rad, idx[2] as u128);
        let bl = combin::unrank_tuple(&b_rad, idx[3] as u128);
        let mut v = 1.0;
        for i in 0..xs.len() {
            v *= base_v.eval(&[xs[i], ys[i], al[i], bl[i]]);
            if v == 0.0 {
                break;
            }
        }
        v
    });
    TwoProverGame::new(x_count, y_count, a_count, b_count, distribution, verifier)
}

/// N-fold repetition with a win-count threshold: the Merlins win iff they win
/// at least ceil(threshold * N) coordinates. Requires a boolean base.
pub fn threshold_repetition(base: &TwoProverGame, n: usize, threshold: f64) -> Result<TwoProverGame> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    base.require_boolean()?;
    let need = (threshold * n as f64).ceil() as usize;
    let mut repeated = parallel_repetition(base, n)?;
    let base_v = base.verifier.clone();
    let x_rad = vec![base.x_count; n];
    let y_rad = vec![base.y_count; n];
    let a_rad = vec![base.a_count; n];
    let b_rad = vec![base.b_count; n];
    let cost = n as u64 * base_v.eval_cost();
    repeated.verifier = VerificationOracle::rule(cost, move |idx| {
        let xs = combin::unrank_tuple(&x_rad, idx[0] as u128);
        let ys = combin::unrank_tuple(&y_rad, idx[1] as u128);
        let al = combin::unrank_tuple(&a_rad, idx[2] as u128);
        let bl = combin::unrank_tuple(&b_rad, idx[3] as u128);
        let won = (0..xs.len())
            .filter(|&i| base_v.eval(&[xs[i], ys[i], al[i], bl[i]]) == 1.0)
            .count();
        if won >= need {
            1.0
        } else {
            0.0
        }
    });
    Ok(repeated)
}

fn checked_pow_usize(base: usize, exp: usize) -> Result<usize> {
    (base as u128)
        .checked_pow(exp as u32)
        .filter(|&v| v <= usize::MAX as u128)
        .map(|v| v as usize)
        .ok_or(Error::BudgetExceeded {
            required: u128::MAX,
            budget: u64::MAX,
        })
}

/// 2-CSP encoding of a free game. The question sets are equalized by
/// lcm-duplication; every (Merlin_1 copy, Merlin_2 copy) pair gets one
/// constraint over the tagged alphabet A + B, scoring V on well-typed symbol
/// pairs and 0 otherwise. SAT of the encoding equals the game value.
pub fn free_to_2csp(game: &FreeGame) -> Result<DenseCsp> {
    let l = game.x_count.lcm(&game.y_count);
    let r1 = l / game.x_count;
    let r2 = l / game.y_count;
    let n_vars = 2 * l;
    let alphabet = game.a_count + game.b_count;
    let a_count = game.a_count;
    let mut constraints = Vec::with_capacity(l * l);
    for xc in 0..l {
        let x = xc / r1;
        for yc in 0..l {
            let y = yc / r2;
            let v = game.verifier.clone();
            constraints.push(Constraint {
                scope: vec![xc, l + yc],
                weight: 1.0,
                payoff: VerificationOracle::rule(v.eval_cost(), move |s| {
                    if s[0] < a_count && s[1] >= a_count {
                        v.eval(&[x, y, s[0], s[1] - a_count])
                    } else {
                        0.0
                    }
                }),
            });
        }
    }
    DenseCsp::new(n_vars, alphabet, 2, constraints)
}

/// k-CSP encoding of a k-player free game: one variable per question tuple
/// over the tuple-answer alphabet, one constraint per k-subset of tuples.
///
/// Each constraint evaluates V "along the diagonal" for every ordered
/// selection of its k tuples — the k! bijections, plus selections with
/// repeats, the latter weighted by exchangeability (a repeat with support
/// size j is shared by C(n-j, k-j) constraints). With these weights the
/// plain constraint average is exactly the expectation of V over k
/// independent uniform tuples, so SAT equals the game value: restricting the
/// optimal product strategy gives one direction, and per-player convexity of
/// the induced answer distributions gives the other.
pub fn kfree_to_kcsp(game: &KFreeGame) -> Result<DenseCsp> {
    let k = game.player_count();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "k-CSP encoding requires at least 2 players (arity >= 2)".into(),
        ));
    }
    if k > 5 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} > 5: exact k! permutation averaging not supported"
        )));
    }
    let n_tuples = combin::tuple_count(&game.question_counts);
    let alphabet = combin::tuple_count(&game.answer_counts);
    if n_tuples > 64 || alphabet > 4096 {
        return Err(Error::BudgetExceeded {
            required: n_tuples.max(alphabet),
            budget: 64,
        });
    }
    let n_tuples = n_tuples as usize;
    if n_tuples < k {
        return Err(Error::InvalidParameter(format!(
            "only {n_tuples} question tuples, need at least k = {k}"
        )));
    }
    // Ordered selections of constraint members, repeats allowed: t maps each
    // player to one of the constraint's k variables.
    let selections: Vec<Vec<usize>> = (0..combin::tuple_count(&vec![k; k]))
        .map(|r| combin::unrank_tuple(&vec![k; k], r))
        .collect();
    // Weight of a selection with support size j: C(n,k) / (n^k C(n-j, k-j)).
    // The weights of one constraint sum to exactly 1, and each selection's
    // total mass across constraints is C(n,k)/n^k, so the constraint average
    // is the independent-uniform-tuple expectation of V.
    let n_pow_k = (n_tuples as f64).powi(k as i32);
    let c_n_k = combin::binomial(n_tuples, k) as f64;
    let weight_for = |support: usize| -> f64 {
        c_n_k / (n_pow_k * combin::binomial(n_tuples - support, k - support) as f64)
    };
    let sel_weights: Arc<Vec<(Vec<usize>, f64)>> = Arc::new(
        selections
            .into_iter()
            .map(|t| {
                let mut seen = t.clone();
                seen.sort_unstable();
                seen.dedup();
                let w = weight_for(seen.len());
                (t, w)
            })
            .collect(),
    );
    let q_rad = game.question_counts.clone();
    let b_rad = game.answer_counts.clone();
    let mut constraints = Vec::new();
    for scope in combin::subsets(n_tuples, k) {
        let tuples: Vec<Vec<usize>> = scope
            .iter()
            .map(|&r| combin::unrank_tuple(&q_rad, r as u128))
            .collect();
        let verifier = game.verifier.clone();
        let sel_weights = Arc::clone(&sel_weights);
        let b_rad = b_rad.clone();
        let cost = verifier.eval_cost() * sel_weights.len() as u64;
        constraints.push(Constraint {
            scope,
            weight: 1.0,
            payoff: VerificationOracle::rule(cost, move |symbols| {
                let answers: Vec<Vec<usize>> = symbols
                    .iter()
                    .map(|&s| combin::unrank_tuple(&b_rad, s as u128))
                    .collect();
                let k = b_rad.len();
                let mut idx = vec![0usize; 2 * k];
                let mut sum = 0.0;
                for (sel, w) in sel_weights.iter() {
                    for (i, &p) in sel.iter().enumerate() {
                        idx[i] = tuples[p][i];
                        idx[k + i] = answers[p][i];
                    }
                    sum += w * verifier.eval(&idx);
                }
                sum
            }),
        });
    }
    DenseCsp::new(n_tuples, alphabet as usize, k, constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{all_sign_patterns, parse_dimacs};
    use crate::error::Budget;
    use crate::game::StrategyProfile;

    #[test]
    fn counterexample_values() {
        for n in [2usize, 4] {
            let g = counterexample_game(n).unwrap();
            let v = g.exact_value(Budget::default()).unwrap();
            assert_eq!(v.value, (n - 1) as f64 / n as f64);
        }
    }

    #[test]
    fn clause_variable_perfect_completeness() {
        let phi = parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 2 -3 0\n").unwrap();
        assert_eq!(phi.sat_value(Budget::default()).unwrap().value, 1.0);
        let g = clause_variable_game(&phi).unwrap();
        assert_eq!(g.exact_value(Budget::default()).unwrap().value, 1.0);
    }

    #[test]
    fn clause_variable_soundness_sign_patterns() {
        // SAT = 7/8, so the game value must be at most 1 - (1/8)/3.
        let phi = all_sign_patterns();
        let g = clause_variable_game(&phi).unwrap();
        let v = g.exact_value(Budget::default()).unwrap().value;
        assert!(v <= 1.0 - 1.0 / 24.0 + 1e-12, "omega = {v}");
        assert!(v < 1.0);
    }

    #[test]
    fn clause_variable_rejects_unused_variable() {
        let phi = parse_dimacs("p cnf 4 1\n1 2 3 0\n").unwrap();
        assert!(clause_variable_game(&phi).is_err());
    }

    #[test]
    fn birthday_counterexample_footnote() {
        // omega(G^{k x l}) = 1 - k/n for the footnote game.
        let n = 4;
        let base = counterexample_game(n).unwrap().with_explicit_support();
        for k in 1..=3usize {
            for ell in [1usize, 2] {
                let bd = birthday_repetition(base.clone(), k, ell).unwrap();
                let g = bd.as_free_game().unwrap();
                let v = g.exact_value(Budget::default()).unwrap();
                assert_eq!(v.value, (n - k) as f64 / n as f64, "k={k} l={ell}");
            }
        }
    }

    #[test]
    fn birthday_empty_intersection_accepts() {
        // Base support touches only x=0; subsets S avoiding 0 make the
        // verifier vacuously 1.
        let base = TwoProverGame::new(
            3,
            3,
            2,
            2,
            Distribution::UniformOverSupport(vec![(0, 0)]),
            VerificationOracle::rule(1, |_| 0.0),
        )
        .unwrap();
        let bd = birthday_repetition(base, 1, 1).unwrap();
        let g = bd.as_free_game().unwrap();
        // S = {1}, T = {2}: no overlap with Z.
        assert_eq!(g.eval(1, 2, 0, 0), 1.0);
        // S = {0}, T = {0}: the failing pair.
        assert_eq!(g.eval(0, 0, 0, 0), 0.0);
    }

    #[test]
    fn birthday_full_subsets_perfect_strategy() {
        let phi = parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 2 -3 0\n").unwrap();
        let base = clause_variable_game(&phi).unwrap();
        let bd = birthday_repetition(base, 2, 3).unwrap();
        let g = bd.as_free_game().unwrap();
        let v = g.exact_value(Budget::default()).unwrap().value;
        // Satisfiable formula: a consistent assignment wins every pair in Z.
        assert_eq!(v, 1.0);
    }

    #[test]
    fn birthday_rejects_non_boolean_base() {
        let base = TwoProverGame::new(
            2,
            2,
            2,
            2,
            Distribution::UniformOverSupport(vec![(0, 0)]),
            VerificationOracle::rule(1, |_| 0.5),
        )
        .unwrap();
        assert!(matches!(
            birthday_repetition(base, 1, 1),
            Err(Error::NonBooleanVerifier { .. })
        ));
    }

    #[test]
    fn birthday_materialize_matches_implicit() {
        let base = counterexample_game(3).unwrap().with_explicit_support();
        let bd = birthday_repetition(base, 2, 1).unwrap();
        let implicit = bd.as_free_game().unwrap();
        let dense = bd.materialize().unwrap();
        for x in 0..implicit.x_count {
            for y in 0..implicit.y_count {
                for a in 0..implicit.a_count {
                    for b in 0..implicit.b_count {
                        assert_eq!(implicit.eval(x, y, a, b), dense.eval(x, y, a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn parallel_m1_preserves_value() {
        let g = crate::testgames::seeded_free_game(3, 3, 2, 2, 5).into_inner();
        let g1 = parallel_repetition(&g, 1).unwrap();
        let v0 = g.exact_value(Budget::default()).unwrap().value;
        let v1 = g1.exact_value(Budget::default()).unwrap().value;
        assert!((v0 - v1).abs() < 1e-12);
    }

    #[test]
    fn parallel_sandwich_m2() {
        let g = crate::testgames::seeded_boolean_game(2, 2, 2, 2, 0.7, 8).into_inner();
        let v = g.exact_value(Budget::default()).unwrap().value;
        let g2 = parallel_repetition(&g, 2).unwrap();
        let v2 = g2.exact_value(Budget::default()).unwrap().value;
        assert!(v2 <= v + 1e-12, "{v2} > {v}");
        assert!(v2 >= v * v - 1e-12, "{v2} < {}", v * v);
    }

    #[test]
    fn threshold_one_equals_parallel() {
        let g = crate::testgames::seeded_boolean_game(2, 2, 2, 2, 0.6, 2).into_inner();
        let thr = threshold_repetition(&g, 2, 1.0).unwrap();
        let par = parallel_repetition(&g, 2).unwrap();
        let v1 = thr.exact_value(Budget::default()).unwrap().value;
        let v2 = par.exact_value(Budget::default()).unwrap().value;
        assert!((v1 - v2).abs() < 1e-12);
    }

    #[test]
    fn threshold_zero_is_free_win() {
        let g = crate::testgames::seeded_boolean_game(2, 2, 2, 2, 0.3, 4).into_inner();
        let thr = threshold_repetition(&g, 3, 0.0).unwrap();
        assert_eq!(thr.exact_value(Budget::default()).unwrap().value, 1.0);
    }

    #[test]
    fn threshold_majority_matches_profile_search() {
        let g = crate::testgames::seeded_boolean_game(2, 2, 2, 2, 0.65, 12).into_inner();
        let thr = threshold_repetition(&g, 2, 0.5).unwrap();
        let fast = thr.exact_value(Budget::default()).unwrap();
        // Exhaustive oracle over all 4^4 * 4^4 strategy pairs of the repeated game.
        let a_rad = vec![thr.a_count; thr.x_count];
        let b_rad = vec![thr.b_count; thr.y_count];
        let mut best = f64::NEG_INFINITY;
        for ar in 0..combin::tuple_count(&a_rad) {
            let a = combin::unrank_tuple(&a_rad, ar);
            for br in 0..combin::tuple_count(&b_rad) {
                let b = combin::unrank_tuple(&b_rad, br);
                let v = thr
                    .strategy_value(&StrategyProfile::two(a.clone(), b))
                    .unwrap();
                best = best.max(v);
            }
        }
        assert!((fast.value - best).abs() < 1e-12);
        let witness = fast.witness.unwrap();
        assert!((thr.strategy_value(&witness).unwrap() - fast.value).abs() < 1e-12);
    }

    #[test]
    fn free_to_2csp_value_preserved() {
        for seed in 0..4 {
            let g = crate::testgames::seeded_free_game(3, 3, 2, 2, 100 + seed);
            let omega = g.exact_value(Budget::default()).unwrap().value;
            let csp = free_to_2csp(&g).unwrap();
            let sat = csp.sat_value(Budget::default()).unwrap().value;
            assert!((sat - omega).abs() < 1e-9, "seed {seed}: {sat} vs {omega}");
        }
    }

    #[test]
    fn free_to_2csp_lcm_duplication() {
        let g = crate::testgames::seeded_free_game(2, 3, 2, 2, 50);
        let csp = free_to_2csp(&g).unwrap();
        // lcm(2,3) = 6: 6 Merlin_1 copies + 6 Merlin_2 copies.
        assert_eq!(csp.n_vars, 12);
        assert_eq!(csp.constraints.len(), 36);
        let g2 = crate::testgames::seeded_free_game(3, 3, 2, 2, 51);
        assert_eq!(free_to_2csp(&g2).unwrap().n_vars, 6);
    }

    #[test]
    fn kfree_to_kcsp_value_preserved_2player() {
        for seed in 0..4 {
            let g = crate::testgames::seeded_free_game(2, 2, 2, 2, 200 + seed);
            let omega = g.exact_value(Budget::default()).unwrap().value;
            let csp = kfree_to_kcsp(&g.to_k_player()).unwrap();
            let sat = csp.sat_value(Budget::default()).unwrap().value;
            assert!((sat - omega).abs() < 1e-9, "seed {seed}: {sat} vs {omega}");
        }
    }

    #[test]
    fn kfree_to_kcsp_constraint_count() {
        let g = crate::testgames::seeded_k_game(&[2, 2, 2], &[2, 2, 2], 33);
        let csp = kfree_to_kcsp(&g).unwrap();
        assert_eq!(csp.n_vars, 8);
        assert_eq!(csp.constraints.len(), combin::binomial(8, 3) as usize);
    }

    #[test]
    fn kfree_to_kcsp_rejects_single_player() {
        let g = KFreeGame::new(vec![3], vec![2], VerificationOracle::rule(1, |_| 1.0)).unwrap();
        assert!(kfree_to_kcsp(&g).is_err());
    }

    #[test]
    fn clause_variable_value_profile_consistency() {
        let phi = all_sign_patterns();
        let g = clause_variable_game(&phi).unwrap();
        let v = g.exact_value(Budget::default()).unwrap();
        let w = v.witness.unwrap();
        assert!((g.strategy_value(&w).unwrap() - v.value).abs() < 1e-12);
        // Any profile is dominated.
        let p = StrategyProfile::two(vec![7; g.x_count], vec![1; g.y_count]);
        assert!(g.strategy_value(&p).unwrap() <= v.value + 1e-12);
    }
}
