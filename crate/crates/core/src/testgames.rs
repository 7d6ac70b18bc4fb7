//! Seeded random instances used by tests and the experiments corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{FreeGame, KFreeGame};
use crate::oracle::VerificationOracle;

/// Free game with a dense [0, 1]-valued payoff table drawn from a seeded RNG.
pub fn seeded_free_game(x: usize, y: usize, a: usize, b: usize, seed: u64) -> FreeGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..x * y * a * b).map(|_| rng.gen::<f64>()).collect();
    FreeGame::from_parts(
        x,
        y,
        a,
        b,
        VerificationOracle::dense(vec![x, y, a, b], values).unwrap(),
    )
    .unwrap()
}

/// Free game with a seeded {0,1}-valued table accepting with probability `p`.
pub fn seeded_boolean_game(x: usize, y: usize, a: usize, b: usize, p: f64, seed: u64) -> FreeGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..x * y * a * b)
        .map(|_| if rng.gen::<f64>() < p { 1.0 } else { 0.0 })
        .collect();
    FreeGame::from_parts(
        x,
        y,
        a,
        b,
        VerificationOracle::dense(vec![x, y, a, b], values).unwrap(),
    )
    .unwrap()
}

/// k-player free game with a dense seeded payoff table.
pub fn seeded_k_game(question_counts: &[usize], answer_counts: &[usize], seed: u64) -> KFreeGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = question_counts
        .iter()
        .chain(answer_counts)
        .copied()
        .collect();
    let len: usize = dims.iter().product();
    let values: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
    KFreeGame::new(
        question_counts.to_vec(),
        answer_counts.to_vec(),
        VerificationOracle::dense(dims, values).unwrap(),
    )
    .unwrap()
}
