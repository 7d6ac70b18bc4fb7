//! Quasipolynomial estimators and deciders for free games: Est / REst,
//! the 1-vs-gap and 1-vs-delta deciders, the recursive k-player estimator,
//! and the subsampling estimator.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combin;
use crate::error::{Budget, Error, Result};
use crate::game::{FreeGame, KFreeGame, PartialStrategy, Player, StrategyProfile};
use crate::oracle::VerificationOracle;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum EstMode {
    Deterministic,
    Randomized { seed: u64 },
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct EstimateReport {
    /// W: the best realized profile value found; never exceeds the true value.
    pub lower_bound: f64,
    /// min(W + epsilon, 1).
    pub estimate: f64,
    pub epsilon: f64,
    pub witness: StrategyProfile,
    /// Sample-set size for the outermost player.
    pub kappa: usize,
    /// Per-level sample sizes, outermost player first (k-player runs only).
    pub level_kappas: Vec<usize>,
    /// Number of (S, alpha) candidates examined.
    pub candidates: u128,
    pub mode: EstMode,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    ValueOne,
    BelowGap,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RefutationEntry {
    /// Rank of the (S, alpha) candidate in deterministic iteration order.
    pub candidate: u128,
    /// A question tuple on which the candidate's induced profile loses.
    pub questions: Vec<usize>,
    /// The answers the profile gives there.
    pub answers: Vec<usize>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub enum Certificate {
    Perfect(StrategyProfile),
    /// One losing pair per refuted candidate, capped at [`REFUTATION_CAP`].
    Refutation(Vec<RefutationEntry>),
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DecisionReport {
    pub verdict: Verdict,
    pub certificate: Certificate,
    pub kappa: usize,
}

pub const REFUTATION_CAP: usize = 50;

/// kappa for Est/REst: ceil(ln(6 |Y| |B|) / eps^2), clamped to |X|.
pub fn est_kappa(game: &FreeGame, epsilon: f64) -> usize {
    let raw = ((6.0 * (game.y_count * game.b_count) as f64).ln() / (epsilon * epsilon)).ceil();
    (raw as usize).clamp(1, game.x_count)
}

/// kappa for the 1-vs-(1-eps) decider: smallest kappa with
/// (1-eps)^kappa < 1/(3 |Y| |B|), clamped to |X|.
pub fn gap_kappa(game: &FreeGame, epsilon: f64) -> usize {
    let target = (3.0 * (game.y_count * game.b_count) as f64).ln();
    let raw = (target / -(1.0 - epsilon).ln()).floor() as usize + 1;
    raw.clamp(1, game.x_count)
}

/// kappa for the 1-vs-delta decider: smallest kappa with
/// delta^kappa < 1/(3 |Y| |B|), clamped to |X|.
pub fn delta_kappa(game: &FreeGame, delta: f64) -> usize {
    let target = (3.0 * (game.y_count * game.b_count) as f64).ln();
    let raw = (target / (1.0 / delta).ln()).floor() as usize + 1;
    raw.clamp(1, game.x_count)
}

/// Evaluate one (S, alpha) candidate: Merlin_2's best response to alpha on S,
/// Merlin_1's best response to that over the full question set, and the full
/// profile's value.
fn eval_candidate(game: &FreeGame, s: &[usize], alpha: &[usize]) -> (StrategyProfile, f64) {
    let fixed = PartialStrategy {
        questions: s.to_vec(),
        answers: alpha.to_vec(),
    };
    let b_alpha = game
        .best_response(Player::One, &fixed)
        .expect("valid candidate")
        .strategy;
    let row = game
        .best_response(Player::Two, &PartialStrategy::total(b_alpha.clone()))
        .expect("valid candidate");
    let profile = StrategyProfile::two(row.strategy, b_alpha);
    let value = game.strategy_value(&profile).expect("valid profile");
    (profile, value)
}

struct CandidateSpace {
    kappa: usize,
    a_space: u128,
    total: u128,
}

impl CandidateSpace {
    fn new(game: &FreeGame, kappa: usize) -> CandidateSpace {
        let s_space = combin::binomial(game.x_count, kappa);
        let a_space = (game.a_count as u128)
            .checked_pow(kappa as u32)
            .unwrap_or(u128::MAX);
        CandidateSpace {
            kappa,
            a_space,
            total: s_space.checked_mul(a_space).unwrap_or(u128::MAX),
        }
    }

    fn decode(&self, game: &FreeGame, rank: u128) -> (Vec<usize>, Vec<usize>) {
        let s = combin::unrank_subset(game.x_count, self.kappa, rank / self.a_space);
        let alpha = combin::unrank_tuple(&vec![game.a_count; self.kappa], rank % self.a_space);
        (s, alpha)
    }
}

fn per_candidate_cost(game: &FreeGame) -> u128 {
    let pairs = (game.x_count * game.y_count) as u128;
    pairs * (game.a_count + game.b_count + 1) as u128 * game.verifier.eval_cost() as u128
}

/// Best candidate over the given set, by value, ties to the lowest rank.
fn best_candidate(
    game: &FreeGame,
    space: &CandidateSpace,
    budget: Budget,
) -> Result<(u128, StrategyProfile, f64)> {
    budget.check(
        space
            .total
            .checked_mul(per_candidate_cost(game))
            .unwrap_or(u128::MAX),
    )?;
    let best = (0..space.total as u64)
        .into_par_iter()
        .map(|rank| {
            let (s, alpha) = space.decode(game, rank as u128);
            let (_, value) = eval_candidate(game, &s, &alpha);
            (value, rank)
        })
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
    let (s, alpha) = space.decode(game, best.1 as u128);
    let (profile, value) = eval_candidate(game, &s, &alpha);
    Ok((best.1 as u128, profile, value))
}

/// Deterministic Est: loops over every size-kappa subset S of Merlin_1's
/// questions and every alpha: S -> A; the estimate is within epsilon of the
/// true value unconditionally, and the lower bound is always sound.
pub fn est_deterministic(game: &FreeGame, epsilon: f64, budget: Budget) -> Result<EstimateReport> {
    check_epsilon(epsilon)?;
    let kappa = est_kappa(game, epsilon);
    let space = CandidateSpace::new(game, kappa);
    let (_, witness, w) = best_candidate(game, &space, budget)?;
    Ok(EstimateReport {
        lower_bound: w,
        estimate: (w + epsilon).min(1.0),
        epsilon,
        witness,
        kappa,
        level_kappas: vec![kappa],
        candidates: space.total,
        mode: EstMode::Deterministic,
    })
}

/// Randomized Est: a single uniformly random S; the estimate is within
/// epsilon of the true value with probability >= 2/3 over S, and the lower
/// bound is always sound.
pub fn est_randomized(
    game: &FreeGame,
    epsilon: f64,
    seed: u64,
    budget: Budget,
) -> Result<EstimateReport> {
    check_epsilon(epsilon)?;
    let kappa = est_kappa(game, epsilon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s: Vec<usize> = sample(&mut rng, game.x_count, kappa).into_vec();
    s.sort_unstable();
    let a_space = (game.a_count as u128)
        .checked_pow(kappa as u32)
        .unwrap_or(u128::MAX);
    budget.check(
        a_space
            .checked_mul(per_candidate_cost(game))
            .unwrap_or(u128::MAX),
    )?;
    let radices = vec![game.a_count; kappa];
    let best = (0..a_space as u64)
        .into_par_iter()
        .map(|rank| {
            let alpha = combin::unrank_tuple(&radices, rank as u128);
            let (_, value) = eval_candidate(game, &s, &alpha);
            (value, rank)
        })
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
    let alpha = combin::unrank_tuple(&radices, best.1 as u128);
    let (witness, w) = eval_candidate(game, &s, &alpha);
    Ok(EstimateReport {
        lower_bound: w,
        estimate: (w + epsilon).min(1.0),
        epsilon,
        witness,
        kappa,
        level_kappas: vec![kappa],
        candidates: a_space,
        mode: EstMode::Randomized { seed },
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} outside (0, 1)"
        )));
    }
    Ok(())
}

fn decide_with_kappa(
    game: &FreeGame,
    kappa: usize,
    gap_low: f64,
    budget: Budget,
) -> Result<DecisionReport> {
    let space = CandidateSpace::new(game, kappa);
    let (_, profile, w) = best_candidate(game, &space, budget)?;
    if w == 1.0 {
        return Ok(DecisionReport {
            verdict: Verdict::ValueOne,
            certificate: Certificate::Perfect(profile),
            kappa,
        });
    }
    if w > gap_low {
        return Err(Error::PromiseViolation {
            value: w,
            low: gap_low,
        });
    }
    // Refutation pass: for the first candidates, name a losing (y, b) pair of
    // the induced profile.
    let mut entries = Vec::new();
    for rank in 0..space.total.min(REFUTATION_CAP as u128) {
        let (s, alpha) = space.decode(game, rank);
        let (profile, value) = eval_candidate(game, &s, &alpha);
        if value == 1.0 {
            continue;
        }
        'outer: for x in 0..game.x_count {
            for y in 0..game.y_count {
                let a = profile.players[0][x];
                let b = profile.players[1][y];
                if game.eval(x, y, a, b) < 1.0 {
                    entries.push(RefutationEntry {
                        candidate: rank,
                        questions: vec![y],
                        answers: vec![b],
                    });
                    break 'outer;
                }
            }
        }
    }
    Ok(DecisionReport {
        verdict: Verdict::BelowGap,
        certificate: Certificate::Refutation(entries),
        kappa,
    })
}

/// Decide omega = 1 versus omega <= 1 - epsilon (caller-asserted promise).
pub fn decide_one_vs_gap(game: &FreeGame, epsilon: f64, budget: Budget) -> Result<DecisionReport> {
    check_epsilon(epsilon)?;
    decide_with_kappa(game, gap_kappa(game, epsilon), 1.0 - epsilon, budget)
}

/// Decide omega = 1 versus omega < delta (caller-asserted promise).
pub fn decide_one_vs_delta(game: &FreeGame, delta: f64, budget: Budget) -> Result<DecisionReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} outside (0, 1)"
        )));
    }
    decide_with_kappa(game, delta_kappa(game, delta), delta, budget)
}

/// Per-level sample size for the k-player recursion at a level with `below`
/// (question, answer) counts beneath it: ceil(delta^-2 (ln 6 + sum ln|Y_i||B_i|)).
fn level_kappa(delta: f64, below: &[(usize, usize)], clamp: usize) -> usize {
    let sum: f64 = below
        .iter()
        .map(|&(y, b)| ((y * b) as f64).ln())
        .sum::<f64>()
        + 6f64.ln();
    ((sum / (delta * delta)).ceil() as usize).clamp(1, clamp)
}

/// Recursive deterministic estimator for the top player of `game`; peels the
/// last player, recurses on the induced (k-1)-player game, then re-optimizes
/// the last player against the recursive profile in the full game.
fn est_k_inner(
    game: &KFreeGame,
    kappa_of: &dyn Fn(&KFreeGame) -> usize,
    kappas: &mut Vec<usize>,
    budget: Budget,
) -> Result<(StrategyProfile, f64)> {
    let k = game.player_count();
    if k == 1 {
        // Exact base case: the single player's optimum decomposes per question.
        let mut strategy = Vec::with_capacity(game.question_counts[0]);
        for q in 0..game.question_counts[0] {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for a in 0..game.answer_counts[0] {
                let v = game.eval(&[q], &[a]);
                if v > best.0 {
                    best = (v, a);
                }
            }
            strategy.push(best.1);
        }
        let profile = StrategyProfile {
            players: vec![strategy],
        };
        let value = game.strategy_value(&profile)?;
        return Ok((profile, value));
    }

    let last = k - 1;
    let y_last = game.question_counts[last];
    let b_last = game.answer_counts[last];
    let kappa = kappa_of(game);
    if kappas.len() < k {
        kappas.resize(k, 0);
    }
    kappas[last] = kappa;
    let s_space = combin::binomial(y_last, kappa);
    let a_space = (b_last as u128)
        .checked_pow(kappa as u32)
        .unwrap_or(u128::MAX);
    let total = s_space.checked_mul(a_space).unwrap_or(u128::MAX);
    let eval_estimate = combin::tuple_count(&game.question_counts)
        .checked_mul(combin::tuple_count(&game.answer_counts))
        .and_then(|c| c.checked_mul(game.verifier.eval_cost() as u128))
        .unwrap_or(u128::MAX);
    budget.check(total.checked_mul(eval_estimate).unwrap_or(u128::MAX))?;

    let radices = vec![b_last; kappa];
    let mut best: Option<(StrategyProfile, f64)> = None;
    for s_rank in 0..s_space {
        let s = combin::unrank_subset(y_last, kappa, s_rank);
        for a_rank in 0..a_space {
            let alpha = combin::unrank_tuple(&radices, a_rank);
            // Induced game on players 1..k-1: V_P averages V over y_k in S
            // with Merlin_k answering alpha.
            let sub_questions = game.question_counts[..last].to_vec();
            let sub_answers = game.answer_counts[..last].to_vec();
            let verifier = game.verifier.clone();
            let (s_c, alpha_c) = (s.clone(), alpha.clone());
            let cost = verifier.eval_cost() * s_c.len() as u64;
            let sub_verifier = VerificationOracle::rule(cost, move |idx| {
                let kk = idx.len() / 2;
                let mut full = Vec::with_capacity(2 * kk + 2);
                full.extend_from_slice(&idx[..kk]);
                full.push(0);
                full.extend_from_slice(&idx[kk..]);
                full.push(0);
                let mut sum = 0.0;
                for (pos, &yk) in s_c.iter().enumerate() {
                    full[kk] = yk;
                    full[2 * kk + 1] = alpha_c[pos];
                    sum += verifier.eval(&full);
                }
                sum / s_c.len() as f64
            });
            let sub_game = KFreeGame::new(sub_questions, sub_answers, sub_verifier)?;
            let (sub_profile, _) = est_k_inner(&sub_game, kappa_of, kappas, budget)?;

            // Lift: last player's best response against the recursive profile
            // in the full game, then the realized full-game value.
            let mut players = sub_profile.players;
            players.push(vec![0usize; y_last]);
            let mut profile = StrategyProfile { players };
            let (last_strategy, value) = game.best_response_k(&profile, last)?;
            profile.players[last] = last_strategy;
            if best.as_ref().is_none_or(|b| value > b.1) {
                best = Some((profile, value));
            }
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Recursive deterministic k-player estimator. The lower bound is a realized
/// profile value; the estimate carries an additive error budget of epsilon/k
/// per peeled player.
pub fn est_k(game: &KFreeGame, epsilon: f64, budget: Budget) -> Result<EstimateReport> {
    check_epsilon(epsilon)?;
    let k = game.player_count();
    let delta = epsilon / k as f64;
    let kappa_of = move |g: &KFreeGame| {
        let last = g.player_count() - 1;
        let below: Vec<(usize, usize)> = (0..last)
            .map(|i| (g.question_counts[i], g.answer_counts[i]))
            .collect();
        level_kappa(delta, &below, g.question_counts[last])
    };
    let mut kappas = Vec::new();
    let (witness, w) = est_k_inner(game, &kappa_of, &mut kappas, budget)?;
    Ok(EstimateReport {
        lower_bound: w,
        estimate: (w + epsilon).min(1.0),
        epsilon,
        witness,
        kappa: kappas.last().copied().unwrap_or(1),
        level_kappas: kappas,
        candidates: 0,
        mode: EstMode::Deterministic,
    })
}

/// Decision analogue of [`est_k`] under the 1 vs 1-epsilon promise, with the
/// sharper epsilon/k^2 level scaling.
pub fn est_k_perfect(game: &KFreeGame, epsilon: f64, budget: Budget) -> Result<DecisionReport> {
    check_epsilon(epsilon)?;
    let k = game.player_count();
    let scale = epsilon / (k * k) as f64;
    let kappa_of = move |g: &KFreeGame| {
        let last = g.player_count() - 1;
        let sum: f64 = (0..last)
            .map(|i| ((g.question_counts[i] * g.answer_counts[i]) as f64).ln())
            .sum::<f64>()
            + 6f64.ln();
        ((sum / scale).ceil() as usize).clamp(1, g.question_counts[last])
    };
    let mut kappas = Vec::new();
    let (witness, w) = est_k_inner(game, &kappa_of, &mut kappas, budget)?;
    let kappa = kappas.last().copied().unwrap_or(1);
    if w == 1.0 {
        return Ok(DecisionReport {
            verdict: Verdict::ValueOne,
            certificate: Certificate::Perfect(witness),
            kappa,
        });
    }
    if w > 1.0 - epsilon {
        return Err(Error::PromiseViolation {
            value: w,
            low: 1.0 - epsilon,
        });
    }
    // Name a question tuple on which the best profile loses.
    let mut entries = Vec::new();
    let q_space = combin::tuple_count(&game.question_counts);
    for rank in 0..q_space {
        let qs = combin::unrank_tuple(&game.question_counts, rank);
        let answers: Vec<usize> = qs
            .iter()
            .enumerate()
            .map(|(i, &q)| witness.players[i][q])
            .collect();
        if game.eval(&qs, &answers) < 1.0 {
            entries.push(RefutationEntry {
                candidate: 0,
                questions: qs,
                answers,
            });
            break;
        }
    }
    Ok(DecisionReport {
        verdict: Verdict::BelowGap,
        certificate: Certificate::Refutation(entries),
        kappa,
    })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SubsampleReport {
    /// Mean of exact subgame values; always >= the true game value in exact
    /// mode (restriction of the optimum wins each subgame).
    pub mean: f64,
    /// Per-player subset sizes actually used.
    pub kappas: Vec<usize>,
    pub n_samples: usize,
    pub stderr: Option<f64>,
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub enum SubsampleMode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

/// Subsampling estimator: mean of exact subgame values over product subsets
/// with per-player size kappa = ceil(eps^-Lambda ln(|B_1| ... |B_k|)),
/// clamped to each |Y_i|.
pub fn subsample_estimate(
    game: &KFreeGame,
    epsilon: f64,
    lambda: f64,
    mode: SubsampleMode,
    budget: Budget,
) -> Result<SubsampleReport> {
    check_epsilon(epsilon)?;
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Lambda {lambda} must be positive"
        )));
    }
    let log_b: f64 = game
        .answer_counts
        .iter()
        .map(|&b| (b as f64).ln())
        .sum();
    let kappa_raw = (epsilon.powf(-lambda) * log_b).ceil().max(1.0) as usize;
    let kappas: Vec<usize> = game
        .question_counts
        .iter()
        .map(|&y| kappa_raw.min(y))
        .collect();
    match mode {
        SubsampleMode::Exact => {
            let counts: Vec<u128> = game
                .question_counts
                .iter()
                .zip(&kappas)
                .map(|(&y, &k)| combin::binomial(y, k))
                .collect();
            let total = counts
                .iter()
                .try_fold(1u128, |acc, &c| acc.checked_mul(c))
                .unwrap_or(u128::MAX);
            let sub_cost: u128 = kappas
                .iter()
                .zip(&game.answer_counts)
                .map(|(&k, &b)| (b as u128).saturating_pow(k as u32))
                .product();
            budget.check(total.checked_mul(sub_cost).unwrap_or(u128::MAX))?;
            let mut sum = 0.0;
            let mut n = 0usize;
            let mut ranks = vec![0u128; kappas.len()];
            loop {
                let subsets: Vec<Vec<usize>> = ranks
                    .iter()
                    .zip(game.question_counts.iter().zip(&kappas))
                    .map(|(&r, (&y, &k))| combin::unrank_subset(y, k, r))
                    .collect();
                let sub = game.restrict(&subsets)?;
                sum += sub.exact_value_k(budget)?.value;
                n += 1;
                // Mixed-radix increment over per-player subset ranks.
                let mut i = 0;
                loop {
                    if i == ranks.len() {
                        break;
                    }
                    ranks[i] += 1;
                    if ranks[i] < counts[i] {
                        break;
                    }
                    ranks[i] = 0;
                    i += 1;
                }
                if i == ranks.len() {
                    break;
                }
            }
            Ok(SubsampleReport {
                mean: sum / n as f64,
                kappas,
                n_samples: n,
                stderr: None,
            })
        }
        SubsampleMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut values = Vec::with_capacity(trials);
            for _ in 0..trials {
                let subsets: Vec<Vec<usize>> = game
                    .question_counts
                    .iter()
                    .zip(&kappas)
                    .map(|(&y, &k)| {
                        let mut s = sample(&mut rng, y, k).into_vec();
                        s.sort_unstable();
                        s
                    })
                    .collect();
                let sub = game.restrict(&subsets)?;
                values.push(sub.exact_value_k(budget)?.value);
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            Ok(SubsampleReport {
                mean,
                kappas,
                n_samples: values.len(),
                stderr: Some((var / n).sqrt()),
            })
        }
    }
}
