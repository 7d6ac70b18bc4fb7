//! JSON schemas for games and CSPs. Field order is fixed by the struct
//! definitions, so serialization is byte-stable across runs.

use serde::{Deserialize, Serialize};

use crate::cnf::CnfFormula;
use crate::constructions::{birthday_repetition, BirthdayGame, MATERIALIZE_GATE};
use crate::csp::{Constraint, DenseCsp};
use crate::error::{Error, Result};
use crate::game::{Distribution, FreeGame, KFreeGame, TwoProverGame};
use crate::oracle::VerificationOracle;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistributionSpec {
    UniformProduct,
    UniformOverSupport { support: Vec<(usize, usize)> },
    Weighted { weights: Vec<f64> },
}

impl From<&Distribution> for DistributionSpec {
    fn from(d: &Distribution) -> Self {
        match d {
            Distribution::UniformProduct => DistributionSpec::UniformProduct,
            Distribution::UniformOverSupport(s) => DistributionSpec::UniformOverSupport {
                support: s.clone(),
            },
            Distribution::Weighted(w) => DistributionSpec::Weighted { weights: w.clone() },
        }
    }
}

impl From<DistributionSpec> for Distribution {
    fn from(d: DistributionSpec) -> Self {
        match d {
            DistributionSpec::UniformProduct => Distribution::UniformProduct,
            DistributionSpec::UniformOverSupport { support } => {
                Distribution::UniformOverSupport(support)
            }
            DistributionSpec::Weighted { weights } => Distribution::Weighted(weights),
        }
    }
}

/// On-disk game description. `free2` / `general2` / `freek` carry a dense
/// row-major payoff table; `birthday` stays implicit as base + (k, l).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameSpec {
    Free2 {
        x: usize,
        y: usize,
        a: usize,
        b: usize,
        table: Vec<f64>,
    },
    General2 {
        x: usize,
        y: usize,
        a: usize,
        b: usize,
        distribution: DistributionSpec,
        table: Vec<f64>,
    },
    Freek {
        questions: Vec<usize>,
        answers: Vec<usize>,
        table: Vec<f64>,
    },
    Birthday {
        base: Box<GameSpec>,
        k: usize,
        ell: usize,
    },
}

/// A deserialized game, dispatched by kind.
pub enum LoadedGame {
    Two(TwoProverGame),
    Free(FreeGame),
    K(KFreeGame),
    Birthday(BirthdayGame),
}

fn materialize_table(verifier: &VerificationOracle, dims: &[usize]) -> Result<Vec<f64>> {
    let entries: u128 = dims.iter().map(|&d| d as u128).product();
    if entries > MATERIALIZE_GATE {
        return Err(Error::BudgetExceeded {
            required: entries,
            budget: MATERIALIZE_GATE as u64,
        });
    }
    let mut table = Vec::with_capacity(entries as usize);
    let mut idx = vec![0usize; dims.len()];
    loop {
        table.push(verifier.eval(&idx));
        let mut i = dims.len();
        loop {
            if i == 0 {
                return Ok(table);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < dims[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

impl GameSpec {
    pub fn from_two_prover(game: &TwoProverGame) -> Result<GameSpec> {
        let table = materialize_table(
            &game.verifier,
            &[game.x_count, game.y_count, game.a_count, game.b_count],
        )?;
        match &game.distribution {
            Distribution::UniformProduct => Ok(GameSpec::Free2 {
                x: game.x_count,
                y: game.y_count,
                a: game.a_count,
                b: game.b_count,
                table,
            }),
            d => Ok(GameSpec::General2 {
                x: game.x_count,
                y: game.y_count,
                a: game.a_count,
                b: game.b_count,
                distribution: d.into(),
                table,
            }),
        }
    }

    pub fn from_k(game: &KFreeGame) -> Result<GameSpec> {
        let dims: Vec<usize> = game
            .question_counts
            .iter()
            .chain(&game.answer_counts)
            .copied()
            .collect();
        Ok(GameSpec::Freek {
            questions: game.question_counts.clone(),
            answers: game.answer_counts.clone(),
            table: materialize_table(&game.verifier, &dims)?,
        })
    }

    pub fn from_birthday(game: &BirthdayGame) -> Result<GameSpec> {
        Ok(GameSpec::Birthday {
            base: Box::new(GameSpec::from_two_prover(&game.base)?),
            k: game.k,
            ell: game.ell,
        })
    }

    pub fn load(self) -> Result<LoadedGame> {
        match self {
            GameSpec::Free2 { x, y, a, b, table } => {
                let verifier = VerificationOracle::dense(vec![x, y, a, b], table)?;
                Ok(LoadedGame::Free(FreeGame::new(TwoProverGame::new(
                    x,
                    y,
                    a,
                    b,
                    Distribution::UniformProduct,
                    verifier,
                )?)?))
            }
            GameSpec::General2 {
                x,
                y,
                a,
                b,
                distribution,
                table,
            } => {
                let verifier = VerificationOracle::dense(vec![x, y, a, b], table)?;
                Ok(LoadedGame::Two(TwoProverGame::new(
                    x,
                    y,
                    a,
                    b,
                    distribution.into(),
                    verifier,
                )?))
            }
            GameSpec::Freek {
                questions,
                answers,
                table,
            } => {
                let dims: Vec<usize> = questions.iter().chain(&answers).copied().collect();
                let verifier = VerificationOracle::dense(dims, table)?;
                Ok(LoadedGame::K(KFreeGame::new(questions, answers, verifier)?))
            }
            GameSpec::Birthday { base, k, ell } => {
                let base = match base.load()? {
                    LoadedGame::Two(g) => g,
                    LoadedGame::Free(g) => g.into_inner().with_explicit_support(),
                    _ => {
                        return Err(Error::InvalidGame(
                            "birthday base must be a two-prover game".into(),
                        ))
                    }
                };
                Ok(LoadedGame::Birthday(birthday_repetition(base, k, ell)?))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConstraintSpec {
    pub scope: Vec<usize>,
    pub weight: f64,
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CspSpec {
    pub n_vars: usize,
    pub alphabet_size: usize,
    pub arity: usize,
    pub constraints: Vec<ConstraintSpec>,
}

impl CspSpec {
    pub fn from_csp(csp: &DenseCsp) -> Result<CspSpec> {
        let dims = vec![csp.alphabet_size; csp.arity];
        let constraints = csp
            .constraints
            .iter()
            .map(|c| {
                Ok(ConstraintSpec {
                    scope: c.scope.clone(),
                    weight: c.weight,
                    table: materialize_table(&c.payoff, &dims)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CspSpec {
            n_vars: csp.n_vars,
            alphabet_size: csp.alphabet_size,
            arity: csp.arity,
            constraints,
        })
    }

    pub fn load(self) -> Result<DenseCsp> {
        let dims = vec![self.alphabet_size; self.arity];
        let constraints = self
            .constraints
            .into_iter()
            .map(|c| {
                Ok(Constraint {
                    scope: c.scope,
                    weight: c.weight,
                    payoff: VerificationOracle::dense(dims.clone(), c.table)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DenseCsp::new(self.n_vars, self.alphabet_size, self.arity, constraints)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn game_from_str(text: &str) -> Result<GameSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn csp_from_str(text: &str) -> Result<CspSpec> {
    Ok(serde_json::from_str(text)?)
}

/// DIMACS -> formula passthrough, here so callers only need one module for
/// file format work.
pub fn formula_from_dimacs(text: &str) -> Result<CnfFormula> {
    crate::cnf::parse_dimacs(text)
}
