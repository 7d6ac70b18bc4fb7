//! Two-prover and k-player free game representations, strategy evaluation,
//! best responses, exact value computation, and subgame restriction.

use std::ops::Deref;
use std::sync::Arc;

use rayon::prelude::*;

use crate::combin;
use crate::error::{Budget, Error, Result};
use crate::oracle::VerificationOracle;

/// Arthur's question distribution over X x Y.
#[derive(Clone, Debug)]
pub enum Distribution {
    /// Uniform and independent over X x Y (the free-game case).
    UniformProduct,
    /// Uniform over a nonempty subset Z of X x Y.
    UniformOverSupport(Vec<(usize, usize)>),
    /// Arbitrary nonnegative weights over X x Y (row-major), summing to 1.
    Weighted(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct TwoProverGame {
    pub x_count: usize,
    pub y_count: usize,
    pub a_count: usize,
    pub b_count: usize,
    pub distribution: Distribution,
    pub verifier: VerificationOracle,
}

/// A two-prover game whose distribution is uniform-product, by construction.
#[derive(Clone, Debug)]
pub struct FreeGame(TwoProverGame);

#[derive(Clone, Debug)]
pub struct KFreeGame {
    pub question_counts: Vec<usize>,
    pub answer_counts: Vec<usize>,
    pub verifier: VerificationOracle,
}

/// Per-player total map from question index to answer index.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct StrategyProfile {
    pub players: Vec<Vec<usize>>,
}

impl StrategyProfile {
    pub fn two(a: Vec<usize>, b: Vec<usize>) -> Self {
        StrategyProfile {
            players: vec![a, b],
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct GameValue {
    pub value: f64,
    pub witness: Option<StrategyProfile>,
    pub exact: bool,
}

/// Strategy of one player over a declared subset of their questions.
/// `questions` and `answers` are parallel; `questions` must be duplicate-free.
#[derive(Clone, Debug)]
pub struct PartialStrategy {
    pub questions: Vec<usize>,
    pub answers: Vec<usize>,
}

impl PartialStrategy {
    pub fn total(answers: Vec<usize>) -> Self {
        PartialStrategy {
            questions: (0..answers.len()).collect(),
            answers,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    One,
    Two,
}

#[derive(Clone, Debug)]
pub struct BestResponse {
    pub strategy: Vec<usize>,
    /// Expectation of V under the game's distribution conditioned on the
    /// fixed player's declared question subset.
    pub value: f64,
    /// Responder questions with empty conditional support (answer defaulted to 0).
    pub vacuous_questions: Vec<usize>,
}

impl TwoProverGame {
    pub fn new(
        x_count: usize,
        y_count: usize,
        a_count: usize,
        b_count: usize,
        distribution: Distribution,
        verifier: VerificationOracle,
    ) -> Result<Self> {
        if x_count == 0 || y_count == 0 || a_count == 0 || b_count == 0 {
            return Err(Error::InvalidGame("all counts must be >= 1".into()));
        }
        match &distribution {
            Distribution::UniformProduct => {}
            Distribution::UniformOverSupport(support) => {
                if support.is_empty() {
                    return Err(Error::InvalidGame("support must be nonempty".into()));
                }
                for &(x, y) in support {
                    if x >= x_count || y >= y_count {
                        return Err(Error::InvalidGame(format!(
                            "support pair ({x}, {y}) out of range"
                        )));
                    }
                }
                let mut seen = support.to_vec();
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidGame("duplicate support pair".into()));
                }
            }
            Distribution::Weighted(weights) => {
                if weights.len() != x_count * y_count {
                    return Err(Error::InvalidGame(format!(
                        "weight vector length {} != {}",
                        weights.len(),
                        x_count * y_count
                    )));
                }
                if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
                    return Err(Error::InvalidGame("negative or non-finite weight".into()));
                }
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidGame(format!("weights sum to {sum}, not 1")));
                }
            }
        }
        if let VerificationOracle::DenseTable { dims, .. } = &verifier {
            if dims != &[x_count, y_count, a_count, b_count] {
                return Err(Error::InvalidGame(format!(
                    "table dims {dims:?} do not match game counts"
                )));
            }
        }
        Ok(TwoProverGame {
            x_count,
            y_count,
            a_count,
            b_count,
            distribution,
            verifier,
        })
    }

    pub fn eval(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.verifier.eval(&[x, y, a, b])
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.players.len() != 2 {
            return Err(Error::DimensionMismatch {
                player: 0,
                expected: 2,
                got: profile.players.len(),
            });
        }
        let dims = [(self.x_count, self.a_count), (self.y_count, self.b_count)];
        for (p, ((qs, ans), strat)) in dims.iter().zip(&profile.players).enumerate() {
            if strat.len() != *qs {
                return Err(Error::DimensionMismatch {
                    player: p + 1,
                    expected: *qs,
                    got: strat.len(),
                });
            }
            if let Some(&bad) = strat.iter().find(|&&v| v >= *ans) {
                return Err(Error::AnswerOutOfRange {
                    player: p + 1,
                    answer: bad,
                    count: *ans,
                });
            }
        }
        Ok(())
    }

    /// Exact expectation of V under the game's distribution for a
    /// deterministic strategy pair.
    pub fn strategy_value(&self, profile: &StrategyProfile) -> Result<f64> {
        self.check_profile(profile)?;
        let a = &profile.players[0];
        let b = &profile.players[1];
        Ok(match &self.distribution {
            Distribution::UniformProduct => {
                let mut sum = 0.0;
                for x in 0..self.x_count {
                    for y in 0..self.y_count {
                        sum += self.eval(x, y, a[x], b[y]);
                    }
                }
                sum / (self.x_count * self.y_count) as f64
            }
            Distribution::UniformOverSupport(support) => {
                let mut sum = 0.0;
                for &(x, y) in support {
                    sum += self.eval(x, y, a[x], b[y]);
                }
                sum / support.len() as f64
            }
            Distribution::Weighted(weights) => {
                let mut sum = 0.0;
                for x in 0..self.x_count {
                    for y in 0..self.y_count {
                        let w = weights[x * self.y_count + y];
                        if w > 0.0 {
                            sum += w * self.eval(x, y, a[x], b[y]);
                        }
                    }
                }
                sum
            }
        })
    }

    /// Weight of the pair (x, y) under the distribution, as (numerator, denominator)
    /// scaled so uniform kinds stay in exact integer arithmetic.
    fn support_pairs(&self) -> Vec<(usize, usize, f64)> {
        match &self.distribution {
            Distribution::UniformProduct => {
                let mut v = Vec::with_capacity(self.x_count * self.y_count);
                for x in 0..self.x_count {
                    for y in 0..self.y_count {
                        v.push((x, y, 1.0));
                    }
                }
                v
            }
            Distribution::UniformOverSupport(s) => {
                s.iter().map(|&(x, y)| (x, y, 1.0)).collect()
            }
            Distribution::Weighted(w) => {
                let mut v = Vec::new();
                for x in 0..self.x_count {
                    for y in 0..self.y_count {
                        let wt = w[x * self.y_count + y];
                        if wt > 0.0 {
                            v.push((x, y, wt));
                        }
                    }
                }
                v
            }
        }
    }

    /// Normalizer matching [`support_pairs`] raw weights.
    fn support_total(&self) -> f64 {
        match &self.distribution {
            Distribution::UniformProduct => (self.x_count * self.y_count) as f64,
            Distribution::UniformOverSupport(s) => s.len() as f64,
            Distribution::Weighted(_) => 1.0,
        }
    }

    /// Per-question optimal response of the non-fixed player against a
    /// (possibly partial) fixed strategy. Ties break to the lowest answer index.
    pub fn best_response(&self, fixed_player: Player, fixed: &PartialStrategy) -> Result<BestResponse> {
        let (fixed_qs, fixed_ans, resp_qs, resp_ans) = match fixed_player {
            Player::One => (self.x_count, self.a_count, self.y_count, self.b_count),
            Player::Two => (self.y_count, self.b_count, self.x_count, self.a_count),
        };
        if fixed.questions.len() != fixed.answers.len() {
            return Err(Error::InvalidParameter(
                "partial strategy questions/answers length mismatch".into(),
            ));
        }
        let player_no = match fixed_player {
            Player::One => 1,
            Player::Two => 2,
        };
        let mut in_subset = vec![None; fixed_qs];
        for (&q, &ans) in fixed.questions.iter().zip(&fixed.answers) {
            if q >= fixed_qs {
                return Err(Error::QuestionOutOfRange {
                    question: q,
                    count: fixed_qs,
                });
            }
            if ans >= fixed_ans {
                return Err(Error::AnswerOutOfRange {
                    player: player_no,
                    answer: ans,
                    count: fixed_ans,
                });
            }
            if in_subset[q].replace(ans).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate question {q} in partial strategy"
                )));
            }
        }

        // Raw (unnormalized) score of each (responder question, responder answer)
        // against the fixed subset, plus the conditional normalizer per question.
        let mut scores = vec![0.0f64; resp_qs * resp_ans];
        let mut mass = vec![0.0f64; resp_qs];
        for (x, y, w) in self.support_pairs() {
            let (fq, rq) = match fixed_player {
                Player::One => (x, y),
                Player::Two => (y, x),
            };
            let Some(fans) = in_subset[fq] else { continue };
            mass[rq] += w;
            for r in 0..resp_ans {
                let v = match fixed_player {
                    Player::One => self.eval(x, y, fans, r),
                    Player::Two => self.eval(x, y, r, fans),
                };
                scores[rq * resp_ans + r] += w * v;
            }
        }

        let mut strategy = Vec::with_capacity(resp_qs);
        let mut vacuous = Vec::new();
        let mut total_score = 0.0;
        let mut total_mass = 0.0;
        for q in 0..resp_qs {
            if mass[q] == 0.0 {
                strategy.push(0);
                vacuous.push(q);
                continue;
            }
            let row = &scores[q * resp_ans..(q + 1) * resp_ans];
            let mut best = 0;
            for (r, &s) in row.iter().enumerate() {
                if s > row[best] {
                    best = r;
                }
            }
            strategy.push(best);
            total_score += row[best];
            total_mass += mass[q];
        }
        // All questions vacuous: the conditioned game is empty, Arthur
        // accepts vacuously.
        let value = if total_mass == 0.0 {
            1.0
        } else {
            total_score / total_mass
        };
        Ok(BestResponse {
            strategy,
            value,
            vacuous_questions: vacuous,
        })
    }

    /// Value and per-y best response of Merlin_2 against a full row strategy,
    /// as (response, raw score sum). Divide by `support_total` for the value.
    fn column_optimum(&self, row: &[usize]) -> (Vec<usize>, f64) {
        let mut scores = vec![0.0f64; self.y_count * self.b_count];
        for (x, y, w) in self.support_pairs() {
            for b in 0..self.b_count {
                scores[y * self.b_count + b] += w * self.eval(x, y, row[x], b);
            }
        }
        let mut strategy = Vec::with_capacity(self.y_count);
        let mut sum = 0.0;
        for y in 0..self.y_count {
            let slice = &scores[y * self.b_count..(y + 1) * self.b_count];
            let mut best = 0;
            for (b, &s) in slice.iter().enumerate() {
                if s > slice[best] {
                    best = b;
                }
            }
            strategy.push(best);
            sum += slice[best];
        }
        (strategy, sum)
    }

    fn row_optimum(&self, col: &[usize]) -> (Vec<usize>, f64) {
        let mut scores = vec![0.0f64; self.x_count * self.a_count];
        for (x, y, w) in self.support_pairs() {
            for a in 0..self.a_count {
                scores[x * self.a_count + a] += w * self.eval(x, y, a, col[y]);
            }
        }
        let mut strategy = Vec::with_capacity(self.x_count);
        let mut sum = 0.0;
        for x in 0..self.x_count {
            let slice = &scores[x * self.a_count..(x + 1) * self.a_count];
            let mut best = 0;
            for (a, &s) in slice.iter().enumerate() {
                if s > slice[best] {
                    best = a;
                }
            }
            strategy.push(best);
            sum += slice[best];
        }
        (strategy, sum)
    }

    /// Relaxation that drops the consistency requirement: E[max over answers].
    /// Always an upper bound on the game value.
    fn pointwise_upper_bound(&self) -> f64 {
        let mut sum = 0.0;
        for (x, y, w) in self.support_pairs() {
            let mut best = 0.0f64;
            for a in 0..self.a_count {
                for b in 0..self.b_count {
                    let v = self.eval(x, y, a, b);
                    if v > best {
                        best = v;
                    }
                }
            }
            sum += w * best;
        }
        sum / self.support_total()
    }

    /// Best-response ascent from the all-zeros profile. Returns a feasible
    /// profile and its exact value (a lower bound on the game value).
    fn ascent_lower_bound(&self) -> (StrategyProfile, f64) {
        let total = self.support_total();
        let mut row = vec![0usize; self.x_count];
        let (mut col, mut best_sum) = self.column_optimum(&row);
        for _ in 0..64 {
            let (new_row, sum_a) = self.row_optimum(&col);
            let (new_col, sum_b) = self.column_optimum(&new_row);
            let sum = sum_a.max(sum_b);
            if sum <= best_sum {
                break;
            }
            best_sum = sum;
            row = new_row;
            col = if sum_b >= sum_a {
                new_col
            } else {
                // keep previous column if the row step alone was the improvement
                col
            };
        }
        (StrategyProfile::two(row, col), best_sum / total)
    }

    fn strategy_space(questions: usize, answers: usize) -> u128 {
        (answers as u128)
            .checked_pow(questions as u32)
            .unwrap_or(u128::MAX)
    }

    /// Exact game value with witness, by enumerating the cheaper player's
    /// strategy space and taking the other player's per-question optimum.
    ///
    /// A sandwich shortcut returns early when a best-response ascent meets the
    /// consistency-free upper bound exactly.
    pub fn exact_value(&self, budget: Budget) -> Result<GameValue> {
        let (lb_profile, lb) = self.ascent_lower_bound();
        let ub = self.pointwise_upper_bound();
        if lb == ub {
            return Ok(GameValue {
                value: lb,
                witness: Some(lb_profile),
                exact: true,
            });
        }

        let row_space = Self::strategy_space(self.x_count, self.a_count);
        let col_space = Self::strategy_space(self.y_count, self.b_count);
        let enumerate_rows = row_space <= col_space;
        let (space, per_cost) = if enumerate_rows {
            (
                row_space,
                (self.support_pairs().len() * self.b_count) as u128,
            )
        } else {
            (
                col_space,
                (self.support_pairs().len() * self.a_count) as u128,
            )
        };
        let cost = space
            .checked_mul(per_cost)
            .and_then(|c| c.checked_mul(self.verifier.eval_cost() as u128))
            .unwrap_or(u128::MAX);
        budget.check(cost)?;

        let total = self.support_total();
        let (qs, ans) = if enumerate_rows {
            (self.x_count, self.a_count)
        } else {
            (self.y_count, self.b_count)
        };
        let radices = vec![ans; qs];
        let best = (0..space as u64)
            .into_par_iter()
            .map(|rank| {
                let strat: Vec<usize> = combin::unrank_tuple(&radices, rank as u128);
                let (_, sum) = if enumerate_rows {
                    self.column_optimum(&strat)
                } else {
                    self.row_optimum(&strat)
                };
                (sum, rank)
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
        let strat = combin::unrank_tuple(&radices, best.1 as u128);
        let (other, _) = if enumerate_rows {
            self.column_optimum(&strat)
        } else {
            self.row_optimum(&strat)
        };
        let profile = if enumerate_rows {
            StrategyProfile::two(strat, other)
        } else {
            StrategyProfile::two(other, strat)
        };
        Ok(GameValue {
            value: best.0 / total,
            witness: Some(profile),
            exact: true,
        })
    }

    /// Reinterpret a uniform-product distribution as uniform over the full
    /// support set, as required by the birthday construction.
    pub fn with_explicit_support(&self) -> TwoProverGame {
        let mut game = self.clone();
        if matches!(game.distribution, Distribution::UniformProduct) {
            let mut support = Vec::with_capacity(self.x_count * self.y_count);
            for x in 0..self.x_count {
                for y in 0..self.y_count {
                    support.push((x, y));
                }
            }
            game.distribution = Distribution::UniformOverSupport(support);
        }
        game
    }

    /// Errors unless the verifier is {0,1}-valued on the whole index space.
    pub fn require_boolean(&self) -> Result<()> {
        for x in 0..self.x_count {
            for y in 0..self.y_count {
                for a in 0..self.a_count {
                    for b in 0..self.b_count {
                        let v = self.eval(x, y, a, b);
                        if v != 0.0 && v != 1.0 {
                            return Err(Error::NonBooleanVerifier {
                                value: v,
                                index: vec![x, y, a, b],
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl FreeGame {
    pub fn new(game: TwoProverGame) -> Result<Self> {
        if !matches!(game.distribution, Distribution::UniformProduct) {
            return Err(Error::InvalidGame(
                "free game requires a uniform-product distribution".into(),
            ));
        }
        Ok(FreeGame(game))
    }

    pub fn from_parts(
        x_count: usize,
        y_count: usize,
        a_count: usize,
        b_count: usize,
        verifier: VerificationOracle,
    ) -> Result<Self> {
        FreeGame::new(TwoProverGame::new(
            x_count,
            y_count,
            a_count,
            b_count,
            Distribution::UniformProduct,
            verifier,
        )?)
    }

    pub fn game(&self) -> &TwoProverGame {
        &self.0
    }

    pub fn into_inner(self) -> TwoProverGame {
        self.0
    }

    /// Subgame on question subsets S x T with the verifier unchanged on
    /// surviving tuples. The subsets double as the witness-lifting maps.
    pub fn restrict(&self, s: &[usize], t: &[usize]) -> Result<RestrictedGame> {
        validate_subset(s, self.x_count, 1)?;
        validate_subset(t, self.y_count, 2)?;
        let base = Arc::new(self.verifier.clone());
        let (s_v, t_v) = (s.to_vec(), t.to_vec());
        let cost = base.eval_cost();
        let (sm, tm) = (s_v.clone(), t_v.clone());
        let verifier = VerificationOracle::rule(cost, move |idx| {
            base.eval(&[sm[idx[0]], tm[idx[1]], idx[2], idx[3]])
        });
        let game = FreeGame::from_parts(s.len(), t.len(), self.a_count, self.b_count, verifier)?;
        Ok(RestrictedGame {
            game,
            x_questions: s_v,
            y_questions: t_v,
        })
    }

    /// View as a 2-player instance of the k-player representation. The index
    /// layout (y_1, y_2, b_1, b_2) coincides with (x, y, a, b).
    pub fn to_k_player(&self) -> KFreeGame {
        KFreeGame {
            question_counts: vec![self.x_count, self.y_count],
            answer_counts: vec![self.a_count, self.b_count],
            verifier: self.verifier.clone(),
        }
    }
}

impl Deref for FreeGame {
    type Target = TwoProverGame;

    fn deref(&self) -> &TwoProverGame {
        &self.0
    }
}

/// A restriction together with the index maps back into the parent game.
#[derive(Clone, Debug)]
pub struct RestrictedGame {
    pub game: FreeGame,
    pub x_questions: Vec<usize>,
    pub y_questions: Vec<usize>,
}

impl RestrictedGame {
    /// Extend a subgame profile to the full question sets, answering `0`
    /// outside the subsets.
    pub fn lift_profile(&self, profile: &StrategyProfile, x_count: usize, y_count: usize) -> StrategyProfile {
        let mut a = vec![0usize; x_count];
        let mut b = vec![0usize; y_count];
        for (i, &x) in self.x_questions.iter().enumerate() {
            a[x] = profile.players[0][i];
        }
        for (i, &y) in self.y_questions.iter().enumerate() {
            b[y] = profile.players[1][i];
        }
        StrategyProfile::two(a, b)
    }
}

fn validate_subset(subset: &[usize], count: usize, player: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::EmptySubset { player });
    }
    for &q in subset {
        if q >= count {
            return Err(Error::QuestionOutOfRange {
                question: q,
                count,
            });
        }
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter(format!(
            "duplicate question in subset for player {player}"
        )));
    }
    Ok(())
}

impl KFreeGame {
    pub fn new(
        question_counts: Vec<usize>,
        answer_counts: Vec<usize>,
        verifier: VerificationOracle,
    ) -> Result<Self> {
        if question_counts.is_empty() || question_counts.len() != answer_counts.len() {
            return Err(Error::InvalidGame(
                "question/answer count lists must be nonempty and equal length".into(),
            ));
        }
        if question_counts.iter().chain(&answer_counts).any(|&c| c == 0) {
            return Err(Error::InvalidGame("all counts must be >= 1".into()));
        }
        if let VerificationOracle::DenseTable { dims, .. } = &verifier {
            let expected: Vec<usize> = question_counts
                .iter()
                .chain(&answer_counts)
                .copied()
                .collect();
            if dims != &expected {
                return Err(Error::InvalidGame(format!(
                    "table dims {dims:?} do not match counts {expected:?}"
                )));
            }
        }
        Ok(KFreeGame {
            question_counts,
            answer_counts,
            verifier,
        })
    }

    pub fn player_count(&self) -> usize {
        self.question_counts.len()
    }

    fn question_space(&self) -> u128 {
        combin::tuple_count(&self.question_counts)
    }

    pub fn eval(&self, questions: &[usize], answers: &[usize]) -> f64 {
        let mut idx = Vec::with_capacity(questions.len() * 2);
        idx.extend_from_slice(questions);
        idx.extend_from_slice(answers);
        self.verifier.eval(&idx)
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.players.len() != self.player_count() {
            return Err(Error::DimensionMismatch {
                player: 0,
                expected: self.player_count(),
                got: profile.players.len(),
            });
        }
        for (p, strat) in profile.players.iter().enumerate() {
            if strat.len() != self.question_counts[p] {
                return Err(Error::DimensionMismatch {
                    player: p + 1,
                    expected: self.question_counts[p],
                    got: strat.len(),
                });
            }
            if let Some(&bad) = strat.iter().find(|&&v| v >= self.answer_counts[p]) {
                return Err(Error::AnswerOutOfRange {
                    player: p + 1,
                    answer: bad,
                    count: self.answer_counts[p],
                });
            }
        }
        Ok(())
    }

    /// Expectation of V over the uniform product of all question sets.
    pub fn strategy_value(&self, profile: &StrategyProfile) -> Result<f64> {
        self.check_profile(profile)?;
        let space = self.question_space();
        let mut sum = 0.0;
        let mut answers = vec![0usize; self.player_count()];
        for rank in 0..space {
            let qs = combin::unrank_tuple(&self.question_counts, rank);
            for (i, &q) in qs.iter().enumerate() {
                answers[i] = profile.players[i][q];
            }
            sum += self.eval(&qs, &answers);
        }
        Ok(sum / space as f64)
    }

    /// Per-question optimal strategy for `player`, holding all other players'
    /// strategies fixed. Returns (strategy, value of the updated profile).
    pub fn best_response_k(&self, profile: &StrategyProfile, player: usize) -> Result<(Vec<usize>, f64)> {
        self.check_profile(profile)?;
        let qs_count = self.question_counts[player];
        let ans_count = self.answer_counts[player];
        let mut scores = vec![0.0f64; qs_count * ans_count];
        let space = self.question_space();
        let mut answers = vec![0usize; self.player_count()];
        for rank in 0..space {
            let qs = combin::unrank_tuple(&self.question_counts, rank);
            for (i, &q) in qs.iter().enumerate() {
                answers[i] = profile.players[i][q];
            }
            for ans in 0..ans_count {
                answers[player] = ans;
                scores[qs[player] * ans_count + ans] += self.eval(&qs, &answers);
            }
        }
        let mut strategy = Vec::with_capacity(qs_count);
        let mut sum = 0.0;
        for q in 0..qs_count {
            let slice = &scores[q * ans_count..(q + 1) * ans_count];
            let mut best = 0;
            for (a, &s) in slice.iter().enumerate() {
                if s > slice[best] {
                    best = a;
                }
            }
            strategy.push(best);
            sum += slice[best];
        }
        Ok((strategy, sum / space as f64))
    }

    fn pointwise_upper_bound_k(&self) -> f64 {
        let space = self.question_space();
        let answer_space = combin::tuple_count(&self.answer_counts);
        let mut sum = 0.0;
        for rank in 0..space {
            let qs = combin::unrank_tuple(&self.question_counts, rank);
            let mut best = 0.0f64;
            for arank in 0..answer_space {
                let ans = combin::unrank_tuple(&self.answer_counts, arank);
                let v = self.eval(&qs, &ans);
                if v > best {
                    best = v;
                }
            }
            sum += best;
        }
        sum / space as f64
    }

    fn ascent_lower_bound_k(&self) -> Result<(StrategyProfile, f64)> {
        let mut profile = StrategyProfile {
            players: self
                .question_counts
                .iter()
                .map(|&q| vec![0usize; q])
                .collect(),
        };
        let mut best = self.strategy_value(&profile)?;
        for _ in 0..32 {
            let mut improved = false;
            for p in 0..self.player_count() {
                let (strategy, value) = self.best_response_k(&profile, p)?;
                if value > best {
                    best = value;
                    profile.players[p] = strategy;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        Ok((profile, best))
    }

    /// Exact value: enumerates joint strategies of players 1..k-1 and takes
    /// the last player's per-question optimum for each.
    pub fn exact_value_k(&self, budget: Budget) -> Result<GameValue> {
        let k = self.player_count();
        let question_space = self.question_space();
        let last = k - 1;

        if k == 1 {
            // Single player: per-question max of V.
            let mut strategy = Vec::with_capacity(self.question_counts[0]);
            let mut sum = 0.0;
            for q in 0..self.question_counts[0] {
                let mut best_a = 0;
                let mut best = f64::NEG_INFINITY;
                for a in 0..self.answer_counts[0] {
                    let v = self.eval(&[q], &[a]);
                    if v > best {
                        best = v;
                        best_a = a;
                    }
                }
                strategy.push(best_a);
                sum += best;
            }
            return Ok(GameValue {
                value: sum / self.question_counts[0] as f64,
                witness: Some(StrategyProfile {
                    players: vec![strategy],
                }),
                exact: true,
            });
        }

        let ub_cost = question_space
            .checked_mul(combin::tuple_count(&self.answer_counts))
            .unwrap_or(u128::MAX);
        if ub_cost <= 1_000_000 {
            let (profile, lb) = self.ascent_lower_bound_k()?;
            let ub = self.pointwise_upper_bound_k();
            if lb == ub {
                return Ok(GameValue {
                    value: lb,
                    witness: Some(profile),
                    exact: true,
                });
            }
        }

        // Mixed-radix space of joint strategies for players 0..k-1.
        let mut radices = Vec::new();
        for p in 0..last {
            radices.extend(std::iter::repeat(self.answer_counts[p]).take(self.question_counts[p]));
        }
        let space = combin::tuple_count(&radices);
        let per_cost = question_space
            .checked_mul(self.answer_counts[last] as u128)
            .unwrap_or(u128::MAX);
        let cost = space
            .checked_mul(per_cost)
            .and_then(|c| c.checked_mul(self.verifier.eval_cost() as u128))
            .unwrap_or(u128::MAX);
        budget.check(cost)?;
        if space > u64::MAX as u128 {
            return Err(Error::BudgetExceeded {
                required: space,
                budget: budget.0,
            });
        }

        let best = (0..space as u64)
            .into_par_iter()
            .map(|rank| {
                let digits = combin::unrank_tuple(&radices, rank as u128);
                let sum = self.last_player_optimum(&digits).1;
                (sum, rank)
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

        let digits = combin::unrank_tuple(&radices, best.1 as u128);
        let (last_strategy, _) = self.last_player_optimum(&digits);
        let mut players = Vec::with_capacity(k);
        let mut offset = 0;
        for p in 0..last {
            let q = self.question_counts[p];
            players.push(digits[offset..offset + q].to_vec());
            offset += q;
        }
        players.push(last_strategy);
        Ok(GameValue {
            value: best.0 / question_space as f64,
            witness: Some(StrategyProfile { players }),
            exact: true,
        })
    }

    /// Given flattened strategies for players 0..k-1, the last player's
    /// per-question optimum as (strategy, raw score summed over all question
    /// tuples).
    fn last_player_optimum(&self, digits: &[usize]) -> (Vec<usize>, f64) {
        let k = self.player_count();
        let last = k - 1;
        let mut offsets = Vec::with_capacity(last);
        let mut off = 0;
        for p in 0..last {
            offsets.push(off);
            off += self.question_counts[p];
        }
        let others_space = combin::tuple_count(&self.question_counts[..last]);
        let last_qs = self.question_counts[last];
        let last_ans = self.answer_counts[last];
        let mut scores = vec![0.0f64; last_qs * last_ans];
        let mut qs = vec![0usize; k];
        let mut answers = vec![0usize; k];
        for orank in 0..others_space {
            let others = combin::unrank_tuple(&self.question_counts[..last], orank);
            for p in 0..last {
                qs[p] = others[p];
                answers[p] = digits[offsets[p] + others[p]];
            }
            for yk in 0..last_qs {
                qs[last] = yk;
                for bk in 0..last_ans {
                    answers[last] = bk;
                    scores[yk * last_ans + bk] += self.eval(&qs, &answers);
                }
            }
        }
        let mut strategy = Vec::with_capacity(last_qs);
        let mut sum = 0.0;
        for y in 0..last_qs {
            let slice = &scores[y * last_ans..(y + 1) * last_ans];
            let mut best = 0;
            for (b, &s) in slice.iter().enumerate() {
                if s > slice[best] {
                    best = b;
                }
            }
            strategy.push(best);
            sum += slice[best];
        }
        (strategy, sum)
    }

    /// Subgame with each player's questions restricted to the given subsets.
    pub fn restrict(&self, subsets: &[Vec<usize>]) -> Result<KFreeGame> {
        if subsets.len() != self.player_count() {
            return Err(Error::DimensionMismatch {
                player: 0,
                expected: self.player_count(),
                got: subsets.len(),
            });
        }
        for (p, s) in subsets.iter().enumerate() {
            validate_subset(s, self.question_counts[p], p + 1)?;
        }
        let k = self.player_count();
        let base = Arc::new(self.verifier.clone());
        let maps: Vec<Vec<usize>> = subsets.to_vec();
        let cost = base.eval_cost();
        let verifier = VerificationOracle::rule(cost, move |idx| {
            let mut full = Vec::with_capacity(2 * k);
            for (p, map) in maps.iter().enumerate() {
                full.push(map[idx[p]]);
            }
            full.extend_from_slice(&idx[k..]);
            base.eval(&full)
        });
        KFreeGame::new(
            subsets.iter().map(|s| s.len()).collect(),
            self.answer_counts.clone(),
            verifier,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded_game(x: usize, y: usize, a: usize, b: usize, seed: u64) -> TwoProverGame {
        crate::testgames::seeded_free_game(x, y, a, b, seed).into_inner()
    }

    #[test]
    fn constant_verifier_value_one() {
        let g = TwoProverGame::new(
            3,
            3,
            2,
            2,
            Distribution::UniformProduct,
            VerificationOracle::rule(1, |_| 1.0),
        )
        .unwrap();
        let p = StrategyProfile::two(vec![0; 3], vec![1; 3]);
        assert_eq!(g.strategy_value(&p).unwrap(), 1.0);
    }

    #[test]
    fn agreement_game_matching_profile() {
        let g = agreement_game(2);
        let p = StrategyProfile::two(vec![0, 0], vec![0, 0]);
        assert_eq!(g.strategy_value(&p).unwrap(), 1.0);
    }

    fn agreement_game(n: usize) -> TwoProverGame {
        TwoProverGame::new(
            n,
            n,
            n,
            n,
            Distribution::UniformProduct,
            VerificationOracle::rule(1, |idx| if idx[2] == idx[3] { 1.0 } else { 0.0 }),
        )
        .unwrap()
    }

    #[test]
    fn strategy_value_matches_naive_sum() {
        // Independent oracle: direct double sum over X x Y.
        let g = seeded_game(3, 3, 2, 2, 42);
        let profile = StrategyProfile::two(vec![1, 0, 1], vec![0, 1, 1]);
        let mut sum = 0.0;
        for x in 0..3 {
            for y in 0..3 {
                sum += g.eval(x, y, profile.players[0][x], profile.players[1][y]);
            }
        }
        let expected = sum / 9.0;
        assert!((g.strategy_value(&profile).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn strategy_value_dimension_mismatch_names_player() {
        let g = seeded_game(3, 3, 2, 2, 1);
        let p = StrategyProfile::two(vec![0, 0], vec![0, 0, 0]);
        match g.strategy_value(&p) {
            Err(Error::DimensionMismatch { player: 1, .. }) => {}
            other => panic!("expected player-1 mismatch, got {other:?}"),
        }
    }

    #[test]
    fn best_response_zero_verifier() {
        let g = TwoProverGame::new(
            2,
            2,
            2,
            2,
            Distribution::UniformProduct,
            VerificationOracle::rule(1, |_| 0.0),
        )
        .unwrap();
        let br = g
            .best_response(Player::One, &PartialStrategy::total(vec![0, 0]))
            .unwrap();
        assert_eq!(br.value, 0.0);
    }

    #[test]
    fn best_response_mirrors_agreement() {
        let g = agreement_game(3);
        let br = g
            .best_response(Player::One, &PartialStrategy::total(vec![1, 1, 1]))
            .unwrap();
        assert_eq!(br.strategy, vec![1, 1, 1]);
        assert_eq!(br.value, 1.0);
    }

    #[test]
    fn best_response_matches_per_question_argmax_oracle() {
        let g = seeded_game(4, 4, 3, 3, 7);
        let fixed = vec![2, 0, 1, 2];
        let br = g
            .best_response(Player::One, &PartialStrategy::total(fixed.clone()))
            .unwrap();
        // Exhaustive per-question argmax, lowest-index ties.
        for y in 0..4 {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for b in 0..3 {
                let score: f64 = (0..4).map(|x| g.eval(x, y, fixed[x], b)).sum();
                if score > best_score {
                    best_score = score;
                    best = b;
                }
            }
            assert_eq!(br.strategy[y], best);
        }
    }

    #[test]
    fn exact_value_trivial_games() {
        let zero = TwoProverGame::new(
            2,
            2,
            2,
            2,
            Distribution::UniformProduct,
            VerificationOracle::rule(1, |_| 0.0),
        )
        .unwrap();
        assert_eq!(zero.exact_value(Budget::default()).unwrap().value, 0.0);
        let one = TwoProverGame::new(
            2,
            2,
            2,
            2,
            Distribution::UniformProduct,
            VerificationOracle::rule(1, |_| 1.0),
        )
        .unwrap();
        assert_eq!(one.exact_value(Budget::default()).unwrap().value, 1.0);
    }

    #[test]
    fn exact_value_matches_double_enumeration() {
        let g = seeded_game(3, 3, 2, 2, 11);
        let fast = g.exact_value(Budget::default()).unwrap();
        let slow = double_enumeration(&g);
        assert!((fast.value - slow).abs() < 1e-12);
        let witness = fast.witness.unwrap();
        assert!((g.strategy_value(&witness).unwrap() - fast.value).abs() < 1e-12);
    }

    /// Independent oracle: full enumeration over all (a, b) strategy pairs.
    fn double_enumeration(g: &TwoProverGame) -> f64 {
        let a_space = (g.a_count as u128).pow(g.x_count as u32);
        let b_space = (g.b_count as u128).pow(g.y_count as u32);
        let a_rad = vec![g.a_count; g.x_count];
        let b_rad = vec![g.b_count; g.y_count];
        let mut best = f64::NEG_INFINITY;
        for ar in 0..a_space {
            let a = combin::unrank_tuple(&a_rad, ar);
            for br in 0..b_space {
                let b = combin::unrank_tuple(&b_rad, br);
                let v = g
                    .strategy_value(&StrategyProfile::two(a.clone(), b))
                    .unwrap();
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    #[test]
    fn exact_value_budget_guard() {
        let g = TwoProverGame::new(
            30,
            30,
            8,
            8,
            Distribution::UniformProduct,
            VerificationOracle::rule(1, |idx| {
                ((idx[0] * 7 + idx[1] * 13 + idx[2] * 3 + idx[3] * 5) % 11) as f64 / 10.0
            }),
        )
        .unwrap();
        match g.exact_value(Budget(1000)) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn exact_value_k_single_player() {
        // k=1 decomposes per question: E_y max_b V.
        let g = KFreeGame::new(
            vec![3],
            vec![2],
            VerificationOracle::rule(1, |idx| {
                if idx[1] == idx[0] % 2 {
                    1.0
                } else {
                    0.25
                }
            }),
        )
        .unwrap();
        let v = g.exact_value_k(Budget::default()).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn exact_value_k_constant() {
        let g = KFreeGame::new(
            vec![2, 2, 2],
            vec![2, 2, 2],
            VerificationOracle::rule(1, |_| 0.375),
        )
        .unwrap();
        assert!((g.exact_value_k(Budget::default()).unwrap().value - 0.375).abs() < 1e-12);
    }

    #[test]
    fn exact_value_k_matches_triple_enumeration() {
        let g = crate::testgames::seeded_k_game(&[2, 2, 2], &[2, 2, 2], 5);
        let fast = g.exact_value_k(Budget::default()).unwrap();
        // Independent oracle: full enumeration over all strategy triples.
        let mut best = f64::NEG_INFINITY;
        for s1 in 0..4u32 {
            for s2 in 0..4u32 {
                for s3 in 0..4u32 {
                    let profile = StrategyProfile {
                        players: vec![
                            vec![(s1 & 1) as usize, (s1 >> 1) as usize],
                            vec![(s2 & 1) as usize, (s2 >> 1) as usize],
                            vec![(s3 & 1) as usize, (s3 >> 1) as usize],
                        ],
                    };
                    best = best.max(g.strategy_value(&profile).unwrap());
                }
            }
        }
        assert!((fast.value - best).abs() < 1e-12);
    }

    #[test]
    fn restrict_identity() {
        let fg = crate::testgames::seeded_free_game(3, 3, 2, 2, 3);
        let r = fg.restrict(&[0, 1, 2], &[0, 1, 2]).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                for a in 0..2 {
                    for b in 0..2 {
                        assert_eq!(r.game.eval(x, y, a, b), fg.eval(x, y, a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn restrict_singleton_is_pointwise_max() {
        let fg = crate::testgames::seeded_free_game(4, 4, 3, 3, 9);
        let r = fg.restrict(&[2], &[1]).unwrap();
        let v = r.game.exact_value(Budget::default()).unwrap().value;
        let mut best = f64::NEG_INFINITY;
        for a in 0..3 {
            for b in 0..3 {
                best = best.max(fg.eval(2, 1, a, b));
            }
        }
        assert!((v - best).abs() < 1e-12);
    }

    #[test]
    fn restrict_empty_subset_rejected() {
        let fg = crate::testgames::seeded_free_game(3, 3, 2, 2, 3);
        assert!(matches!(
            fg.restrict(&[], &[0]),
            Err(Error::EmptySubset { player: 1 })
        ));
    }

    #[test]
    fn restriction_matches_manual_slice() {
        let fg = crate::testgames::seeded_free_game(6, 6, 2, 2, 21);
        let s = [1, 3, 4];
        let t = [0, 2, 5];
        let r = fg.restrict(&s, &t).unwrap();
        // Manual slice oracle: rebuild a dense table by hand and solve it.
        let mut values = Vec::new();
        for &x in &s {
            for &y in &t {
                for a in 0..2 {
                    for b in 0..2 {
                        values.push(fg.eval(x, y, a, b));
                    }
                }
            }
        }
        let sliced = FreeGame::from_parts(
            3,
            3,
            2,
            2,
            VerificationOracle::dense(vec![3, 3, 2, 2], values).unwrap(),
        )
        .unwrap();
        let v1 = r.game.exact_value(Budget::default()).unwrap().value;
        let v2 = sliced.exact_value(Budget::default()).unwrap().value;
        assert!((v1 - v2).abs() < 1e-12);
    }
}
