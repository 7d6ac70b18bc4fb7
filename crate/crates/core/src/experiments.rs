//! Exact small-scale verification of the analytic inequalities: the
//! variation-distance closed form, the birthday collision bound, birthday
//! soundness gaps, subsampling gaps, and amplification curves.
//!
//! Distribution identities are checked in exact rational arithmetic; game
//! values that enter an exact inequality are computed as integer
//! win-counts over totals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::cnf::CnfFormula;
use crate::combin;
use crate::constructions::{birthday_repetition, clause_variable_game, threshold_repetition};
use crate::error::{Budget, Error, Result};
use crate::game::{Distribution, KFreeGame, StrategyProfile, TwoProverGame};

pub type Rat = BigRational;

pub fn rat(num: u128, den: u128) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact value of a boolean-verifier game with a uniform distribution, as an
/// integer win-count over the support size.
#[derive(Clone, Debug)]
pub struct RationalValue {
    pub wins: u64,
    pub total: u64,
    pub witness: StrategyProfile,
}

impl RationalValue {
    pub fn value(&self) -> Rat {
        rat(self.wins as u128, self.total as u128)
    }
}

/// Brute-force rational game value: enumerates the cheaper player's strategy
/// space, best-responding with the other player per question, counting wins
/// as exact integers. Requires a {0,1} verifier and a uniform distribution.
pub fn exact_value_rational(game: &TwoProverGame, budget: Budget) -> Result<RationalValue> {
    let support: Vec<(usize, usize)> = match &game.distribution {
        Distribution::UniformProduct => {
            let mut v = Vec::with_capacity(game.x_count * game.y_count);
            for x in 0..game.x_count {
                for y in 0..game.y_count {
                    v.push((x, y));
                }
            }
            v
        }
        Distribution::UniformOverSupport(s) => s.clone(),
        Distribution::Weighted(_) => {
            return Err(Error::InvalidParameter(
                "rational solver requires a uniform distribution".into(),
            ))
        }
    };
    // Validation pass: every reachable payoff must be 0 or 1.
    let check_cost = (support.len() * game.a_count * game.b_count) as u128
        * game.verifier.eval_cost() as u128;
    budget.check(check_cost)?;
    for &(x, y) in &support {
        for a in 0..game.a_count {
            for b in 0..game.b_count {
                let v = game.eval(x, y, a, b);
                if v != 0.0 && v != 1.0 {
                    return Err(Error::NonBooleanVerifier {
                        value: v,
                        index: vec![x, y, a, b],
                    });
                }
            }
        }
    }

    let row_space = (game.a_count as u128)
        .checked_pow(game.x_count as u32)
        .unwrap_or(u128::MAX);
    let col_space = (game.b_count as u128)
        .checked_pow(game.y_count as u32)
        .unwrap_or(u128::MAX);
    let enumerate_rows = row_space <= col_space;
    let (space, qs, ans, other_qs, other_ans) = if enumerate_rows {
        (row_space, game.x_count, game.a_count, game.y_count, game.b_count)
    } else {
        (col_space, game.y_count, game.b_count, game.x_count, game.a_count)
    };
    let cost = space
        .checked_mul((support.len() * other_ans) as u128)
        .and_then(|c| c.checked_mul(game.verifier.eval_cost() as u128))
        .unwrap_or(u128::MAX);
    budget.check(cost)?;

    let radices = vec![ans; qs];
    let count_for = |strat: &[usize]| -> (Vec<usize>, u64) {
        let mut counts = vec![0u64; other_qs * other_ans];
        for &(x, y) in &support {
            let (eq, oq) = if enumerate_rows { (x, y) } else { (y, x) };
            for r in 0..other_ans {
                let won = if enumerate_rows {
                    game.eval(x, y, strat[eq], r) == 1.0
                } else {
                    game.eval(x, y, r, strat[eq]) == 1.0
                };
                if won {
                    counts[oq * other_ans + r] += 1;
                }
            }
        }
        let mut response = Vec::with_capacity(other_qs);
        let mut total = 0u64;
        for q in 0..other_qs {
            let slice = &counts[q * other_ans..(q + 1) * other_ans];
            let mut best = 0;
            for (r, &c) in slice.iter().enumerate() {
                if c > slice[best] {
                    best = r;
                }
            }
            response.push(best);
            total += slice[best];
        }
        (response, total)
    };

    let best = (0..space as u64)
        .into_par_iter()
        .map(|rank| {
            let strat = combin::unrank_tuple(&radices, rank as u128);
            (count_for(&strat).1, rank)
        })
        .reduce(
            || (0u64, u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let strat = combin::unrank_tuple(&radices, best.1 as u128);
    let (other, wins) = count_for(&strat);
    let witness = if enumerate_rows {
        StrategyProfile::two(strat, other)
    } else {
        StrategyProfile::two(other, strat)
    };
    Ok(RationalValue {
        wins,
        total: support.len() as u64,
        witness,
    })
}

/// The strategy-embedding distribution D and the uniform distribution U over
/// (clause-subset, variable-subset) pairs, in exact rationals.
#[derive(Clone, Debug)]
pub struct DistributionPair {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    /// Left (clause) degree of the incidence matrix: always 3.
    pub clause_degree: usize,
    /// Right (variable) degree d from the balance record.
    pub var_degree: usize,
    /// All (I-rank, J-rank) pairs in colex order.
    pub support: Vec<(u64, u64)>,
    pub u_prob: Vec<Rat>,
    pub d_prob: Vec<Rat>,
    /// Edge counts S_IJ between the chosen subsets.
    pub s_ij: Vec<u64>,
}

impl DistributionPair {
    /// Half the L1 distance between D and U.
    pub fn variation_distance(&self) -> Rat {
        let mut sum = Rat::zero();
        for (d, u) in self.d_prob.iter().zip(&self.u_prob) {
            sum += (d - u).abs();
        }
        sum / Rat::from(BigInt::from(2))
    }
}

fn incidence(phi: &CnfFormula) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(3 * phi.clauses.len());
    for (i, clause) in phi.clauses.iter().enumerate() {
        for v in CnfFormula::clause_vars(clause) {
            edges.push((i, v));
        }
    }
    edges
}

/// Closed-form D: Pr_D[(I, J)] = Pr_U[(I, J)] * S_IJ / (3 k l / N).
pub fn distribution_pair(phi: &CnfFormula, k: usize, ell: usize) -> Result<DistributionPair> {
    let Some(var_degree) = phi.balance else {
        return Err(Error::Unbalanced);
    };
    let (m, n) = (phi.clauses.len(), phi.n_vars);
    if k == 0 || k > m || ell == 0 || ell > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k}, l = {ell} out of range for m = {m}, n = {n}"
        )));
    }
    let edges = incidence(phi);
    let ci = combin::binomial(m, k);
    let cj = combin::binomial(n, ell);
    let u = rat(1, ci * cj);
    // Pr_D = u * S_IJ * N / (3 k l).
    let scale = &u * rat(n as u128, 3 * (k * ell) as u128);
    let mut support = Vec::new();
    let mut u_prob = Vec::new();
    let mut d_prob = Vec::new();
    let mut s_ij = Vec::new();
    for (i_rank, i_set) in combin::subsets(m, k).enumerate() {
        let in_i: Vec<bool> = {
            let mut v = vec![false; m];
            for &i in &i_set {
                v[i] = true;
            }
            v
        };
        for (j_rank, j_set) in combin::subsets(n, ell).enumerate() {
            let mut in_j = vec![false; n];
            for &j in &j_set {
                in_j[j] = true;
            }
            let s = edges
                .iter()
                .filter(|&&(i, j)| in_i[i] && in_j[j])
                .count() as u64;
            support.push((i_rank as u64, j_rank as u64));
            u_prob.push(u.clone());
            d_prob.push(&scale * rat(s as u128, 1));
            s_ij.push(s);
        }
    }
    Ok(DistributionPair {
        m,
        n,
        k,
        ell,
        clause_degree: 3,
        var_degree,
        support,
        u_prob,
        d_prob,
        s_ij,
    })
}

/// D by direct process enumeration: draw (i, j) uniformly from the incidence
/// set Z, then complete to (I, J) uniformly among supersets.
pub fn distribution_pair_process(phi: &CnfFormula, k: usize, ell: usize) -> Result<Vec<Rat>> {
    if phi.balance.is_none() {
        return Err(Error::Unbalanced);
    }
    let (m, n) = (phi.clauses.len(), phi.n_vars);
    if k == 0 || k > m || ell == 0 || ell > n {
        return Err(Error::InvalidParameter("k or l out of range".into()));
    }
    let edges = incidence(phi);
    let ci = combin::binomial(m, k);
    let cj = combin::binomial(n, ell);
    let per_edge = rat(
        1,
        edges.len() as u128 * combin::binomial(m - 1, k - 1) * combin::binomial(n - 1, ell - 1),
    );
    let mut probs = vec![Rat::zero(); (ci * cj) as usize];
    let j_sets: Vec<Vec<usize>> = combin::subsets(n, ell).collect();
    for (i_rank, i_set) in combin::subsets(m, k).enumerate() {
        for (j_rank, j_set) in j_sets.iter().enumerate() {
            for &(i, j) in &edges {
                if i_set.contains(&i) && j_set.contains(&j) {
                    probs[i_rank * cj as usize + j_rank] += &per_edge;
                }
            }
        }
    }
    Ok(probs)
}

#[derive(Clone, Debug)]
pub struct VariationReport {
    pub pair: DistributionPair,
    pub distance: Rat,
    /// The paper-cited asymptotic scale sqrt(N / (k l)), recorded only.
    pub bound_rhs: f64,
}

/// Closed-form variation distance, cross-validated element-wise against the
/// process enumeration.
pub fn variation_distance(phi: &CnfFormula, k: usize, ell: usize) -> Result<VariationReport> {
    let pair = distribution_pair(phi, k, ell)?;
    let process = distribution_pair_process(phi, k, ell)?;
    for (idx, (closed, proc)) in pair.d_prob.iter().zip(&process).enumerate() {
        if closed != proc {
            return Err(Error::InvalidParameter(format!(
                "closed form and process enumeration disagree at support index {idx}"
            )));
        }
    }
    let distance = pair.variation_distance();
    let bound_rhs = (phi.n_vars as f64 / (k * ell) as f64).sqrt();
    Ok(VariationReport {
        pair,
        distance,
        bound_rhs,
    })
}

/// Biregular bipartite graph with left degree c and right degree d.
#[derive(Clone, Debug)]
pub struct BipartiteRegular {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize)>,
    pub left_degree: usize,
    pub right_degree: usize,
}

impl BipartiteRegular {
    pub fn new(left: usize, right: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if left == 0 || right == 0 || edges.is_empty() {
            return Err(Error::IrregularGraph("empty side or edge set".into()));
        }
        let mut ldeg = vec![0usize; left];
        let mut rdeg = vec![0usize; right];
        for &(u, v) in &edges {
            if u >= left || v >= right {
                return Err(Error::IrregularGraph(format!("edge ({u}, {v}) out of range")));
            }
            ldeg[u] += 1;
            rdeg[v] += 1;
        }
        if ldeg.iter().any(|&d| d != ldeg[0]) {
            return Err(Error::IrregularGraph("left degrees not constant".into()));
        }
        if rdeg.iter().any(|&d| d != rdeg[0]) {
            return Err(Error::IrregularGraph("right degrees not constant".into()));
        }
        Ok(BipartiteRegular {
            left,
            right,
            edges,
            left_degree: ldeg[0],
            right_degree: rdeg[0],
        })
    }

    pub fn from_formula(phi: &CnfFormula) -> Result<Self> {
        BipartiteRegular::new(phi.clauses.len(), phi.n_vars, incidence(phi))
    }

    /// Perfect matching on n + n vertices (c = d = 1).
    pub fn matching(n: usize) -> Self {
        BipartiteRegular::new(n, n, (0..n).map(|i| (i, i)).collect()).unwrap()
    }

    pub fn complete(a: usize, b: usize) -> Self {
        let mut edges = Vec::with_capacity(a * b);
        for u in 0..a {
            for v in 0..b {
                edges.push((u, v));
            }
        }
        BipartiteRegular::new(a, b, edges).unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct CollisionReport {
    /// Exact probability that random subsets I (size k) and J (size l) span
    /// at least one edge.
    pub exact: Rat,
    /// The analytic lower bound (c k l / N)(1 - c^2 k^2 / N - c k l / N).
    pub bound: Rat,
}

pub fn collision_probability(graph: &BipartiteRegular, k: usize, ell: usize) -> Result<CollisionReport> {
    if k == 0 || k > graph.left || ell == 0 || ell > graph.right {
        return Err(Error::InvalidParameter(format!(
            "k = {k}, l = {ell} out of range for {} x {} graph",
            graph.left, graph.right
        )));
    }
    let mut hits: u128 = 0;
    let mut total: u128 = 0;
    let j_sets: Vec<Vec<usize>> = combin::subsets(graph.right, ell).collect();
    for i_set in combin::subsets(graph.left, k) {
        let mut in_i = vec![false; graph.left];
        for &i in &i_set {
            in_i[i] = true;
        }
        for j_set in &j_sets {
            total += 1;
            let hit = graph
                .edges
                .iter()
                .any(|&(u, v)| in_i[u] && j_set.contains(&v));
            if hit {
                hits += 1;
            }
        }
    }
    let exact = rat(hits, total);
    let c = graph.left_degree as u128;
    let n = graph.right as u128;
    let front = rat(c * (k * ell) as u128, n);
    let penalty = Rat::one()
        - rat(c * c * (k * k) as u128, n)
        - rat(c * (k * ell) as u128, n);
    let bound = front * penalty;
    if bound.is_positive() && exact < bound {
        return Err(Error::InvalidParameter(format!(
            "collision bound violated: exact {exact} < bound {bound}"
        )));
    }
    Ok(CollisionReport { exact, bound })
}

#[derive(Clone, Debug)]
pub struct BirthdayGapReport {
    pub omega_base: Rat,
    pub omega_birthday: Rat,
    /// omega(G^{k x l}) - omega(G_phi); may be negative.
    pub gap: Rat,
    pub distance: Rat,
    /// True iff gap <= distance (the sharp form of the soundness chain).
    pub sharp_inequality_holds: bool,
    /// Observational ratio (1 - omega(G^{k x l})) * N / (k l).
    pub smallkl_ratio: f64,
}

/// Exact birthday soundness gap for a balanced formula, together with the
/// exact variation distance it is bounded by.
pub fn birthday_gap(phi: &CnfFormula, k: usize, ell: usize, budget: Budget) -> Result<BirthdayGapReport> {
    let base = clause_variable_game(phi)?;
    let omega_base = exact_value_rational(&base, budget)?.value();
    let bd = birthday_repetition(base, k, ell)?;
    let bd_game = bd.as_free_game()?;
    let omega_birthday = exact_value_rational(&bd_game, budget)?.value();
    let distance = distribution_pair(phi, k, ell)?.variation_distance();
    let gap = &omega_birthday - &omega_base;
    let sharp_inequality_holds = gap <= distance;
    let one_minus = Rat::one() - &omega_birthday;
    let smallkl_ratio = rat_to_f64(&one_minus) * phi.n_vars as f64 / (k * ell) as f64;
    Ok(BirthdayGapReport {
        omega_base,
        omega_birthday,
        gap,
        distance,
        sharp_inequality_holds,
        smallkl_ratio,
    })
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Corpus rationals are small; a lossy fold is fine for diagnostics.
    let to_f = |b: &BigInt| -> f64 {
        b.to_string().parse::<f64>().unwrap_or(f64::NAN)
    };
    to_f(num) / to_f(den)
}

#[derive(Clone, Debug)]
pub struct CurveRow {
    pub kappa: usize,
    pub mean: f64,
    pub omega: f64,
    pub upper_gap: f64,
}

/// Exact E_S[omega(G_S)] per kappa over all per-player size-kappa product
/// subsets. The mean never falls below omega; the upper gap is recorded.
pub fn subsample_gap_curve(
    game: &KFreeGame,
    kappas: &[usize],
    budget: Budget,
) -> Result<Vec<CurveRow>> {
    let omega = game.exact_value_k(budget)?.value;
    let mut rows = Vec::with_capacity(kappas.len());
    for &kappa in kappas {
        if kappa == 0 {
            return Err(Error::InvalidParameter("kappa must be >= 1".into()));
        }
        let sizes: Vec<usize> = game.question_counts.iter().map(|&y| kappa.min(y)).collect();
        let counts: Vec<u128> = game
            .question_counts
            .iter()
            .zip(&sizes)
            .map(|(&y, &s)| combin::binomial(y, s))
            .collect();
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut ranks = vec![0u128; sizes.len()];
        loop {
            let subsets: Vec<Vec<usize>> = ranks
                .iter()
                .zip(game.question_counts.iter().zip(&sizes))
                .map(|(&r, (&y, &s))| combin::unrank_subset(y, s, r))
                .collect();
            sum += game.restrict(&subsets)?.exact_value_k(budget)?.value;
            n += 1;
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
        let mean = sum / n as f64;
        rows.push(CurveRow {
            kappa,
            mean,
            omega,
            upper_gap: mean - omega,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct AmpRow {
    pub n: usize,
    pub value: f64,
}

/// Exact threshold-repetition values for each N, asserting only the
/// monotone direction implied by omega versus the threshold.
pub fn amplification_curve(
    base: &TwoProverGame,
    ns: &[usize],
    threshold: f64,
    budget: Budget,
) -> Result<Vec<AmpRow>> {
    let omega = base.exact_value(budget)?.value;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let game = threshold_repetition(base, n, threshold)?;
        let value = game.exact_value(budget)?.value;
        rows.push(AmpRow { n, value });
    }
    for w in rows.windows(2) {
        if omega > threshold && w[1].value < w[0].value - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "amplification curve not non-decreasing at N = {}",
                w[1].n
            )));
        }
        if omega < threshold && w[1].value > w[0].value + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "amplification curve not non-increasing at N = {}",
                w[1].n
            )));
        }
    }
    Ok(rows)
}

pub fn subsample_curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("t,mean,omega,upper_gap\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.kappa, r.mean, r.omega, r.upper_gap));
    }
    out
}

pub fn amplification_csv(rows: &[AmpRow]) -> String {
    let mut out = String::from("N,value\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.n, r.value));
    }
    out
}

// ---- Pinned corpus ----------------------------------------------------

/// All 8 sign patterns over 3 variables: balanced d = 8, SAT = 7/8.
pub fn corpus_sign_patterns() -> CnfFormula {
    crate::cnf::all_sign_patterns()
}

/// All C(4,3) positive clauses over 4 variables: satisfiable, balanced d = 3.
pub fn corpus_positive_subsets() -> CnfFormula {
    CnfFormula::new(4, vec![[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]).unwrap()
}

/// The same scopes with mixed signs; still balanced d = 3.
pub fn corpus_mixed_subsets() -> CnfFormula {
    CnfFormula::new(4, vec![[1, -2, 3], [-1, 2, 4], [1, 3, -4], [-2, -3, 4]]).unwrap()
}

/// Three clauses over three variables, balanced d = 3.
pub fn corpus_three_clause() -> CnfFormula {
    CnfFormula::new(3, vec![[1, 2, 3], [-1, -2, -3], [1, -2, 3]]).unwrap()
}

pub fn corpus_formulas() -> Vec<(&'static str, CnfFormula)> {
    vec![
        ("sign-patterns", corpus_sign_patterns()),
        ("positive-subsets", corpus_positive_subsets()),
        ("mixed-subsets", corpus_mixed_subsets()),
        ("three-clause", corpus_three_clause()),
    ]
}

pub fn corpus_graphs() -> Vec<(&'static str, BipartiteRegular)> {
    vec![
        ("matching-8", BipartiteRegular::matching(8)),
        ("k22", BipartiteRegular::complete(2, 2)),
        ("k33", BipartiteRegular::complete(3, 3)),
        (
            "sign-patterns-incidence",
            BipartiteRegular::from_formula(&corpus_sign_patterns()).unwrap(),
        ),
        (
            "three-clause-incidence",
            BipartiteRegular::from_formula(&corpus_three_clause()).unwrap(),
        ),
    ]
}

/// Seeds of the 20 pinned random boolean 2x2x2x2 base games.
pub const CORPUS_GAME_SEEDS: [u64; 20] = [
    9000, 9001, 9002, 9003, 9004, 9005, 9006, 9007, 9008, 9009, 9010, 9011, 9012, 9013, 9014,
    9015, 9016, 9017, 9018, 9019,
];

/// Run every corpus assertion and produce a markdown summary.
pub fn report(budget: Budget) -> String {
    let mut out = String::from("# experiment report\n\n| check | instance | result |\n|---|---|---|\n");
    let mut push = |check: &str, instance: &str, ok: bool, detail: String| {
        out.push_str(&format!(
            "| {check} | {instance} | {} {detail} |\n",
            if ok { "pass" } else { "FAIL" }
        ));
    };

    for (name, phi) in corpus_formulas() {
        for k in 1..=2usize {
            for ell in 1..=2usize.min(phi.n_vars) {
                match variation_distance(&phi, k, ell) {
                    Ok(rep) => push(
                        "vardist closed form = process",
                        &format!("{name} k={k} l={ell}"),
                        true,
                        format!("(distance {})", rep.distance),
                    ),
                    Err(e) => push(
                        "vardist closed form = process",
                        &format!("{name} k={k} l={ell}"),
                        false,
                        format!("({e})"),
                    ),
                }
            }
        }
    }

    for (name, graph) in corpus_graphs() {
        for k in 1..=2usize.min(graph.left) {
            for ell in 1..=2usize.min(graph.right) {
                match collision_probability(&graph, k, ell) {
                    Ok(rep) => push(
                        "collision bound",
                        &format!("{name} k={k} l={ell}"),
                        true,
                        format!("(exact {} >= bound {})", rep.exact, rep.bound),
                    ),
                    Err(e) => push(
                        "collision bound",
                        &format!("{name} k={k} l={ell}"),
                        false,
                        format!("({e})"),
                    ),
                }
            }
        }
    }

    for (name, phi) in corpus_formulas() {
        for (k, ell) in [(1usize, 1usize), (2, 2)] {
            if k > phi.clauses.len() || ell > phi.n_vars {
                continue;
            }
            match birthday_gap(&phi, k, ell, budget) {
                Ok(rep) => push(
                    "birthday gap <= ||D-U||",
                    &format!("{name} k={k} l={ell}"),
                    rep.sharp_inequality_holds,
                    format!("(gap {}, distance {})", rep.gap, rep.distance),
                ),
                Err(e) => push(
                    "birthday gap <= ||D-U||",
                    &format!("{name} k={k} l={ell}"),
                    false,
                    format!("({e})"),
                ),
            }
        }
    }

    for &seed in CORPUS_GAME_SEEDS.iter().take(5) {
        let base = crate::testgames::seeded_boolean_game(2, 2, 2, 2, 0.75, seed).into_inner();
        match amplification_curve(&base, &[1, 2], 0.5, budget) {
            Ok(rows) => push(
                "amplification direction",
                &format!("seed {seed}"),
                true,
                format!("(values {:?})", rows.iter().map(|r| r.value).collect::<Vec<_>>()),
            ),
            Err(e) => push(
                "amplification direction",
                &format!("seed {seed}"),
                false,
                format!("({e})"),
            ),
        }
    }

    out
}
