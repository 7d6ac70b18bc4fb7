//! 3-CNF formulas: DIMACS parsing, balance detection, exact SAT values.

use rayon::prelude::*;

use crate::csp::SatValue;
use crate::error::{Budget, Error, Result};

/// Width-3 CNF. Literals are signed 1-based variable indices, DIMACS style.
/// `balance` holds d when every variable occurs in exactly d clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub n_vars: usize,
    pub clauses: Vec<[i64; 3]>,
    pub balance: Option<usize>,
}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<[i64; 3]>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidParameter("n_vars must be >= 1".into()));
        }
        for (ci, clause) in clauses.iter().enumerate() {
            validate_clause(clause, n_vars, ci + 1)?;
        }
        let balance = compute_balance(n_vars, &clauses);
        Ok(CnfFormula {
            n_vars,
            clauses,
            balance,
        })
    }

    /// Per-variable clause occurrence counts (0-based variables).
    pub fn occurrence_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_vars];
        for clause in &self.clauses {
            for &lit in clause {
                counts[lit.unsigned_abs() as usize - 1] += 1;
            }
        }
        counts
    }

    /// Sorted 0-based variables of a clause.
    pub fn clause_vars(clause: &[i64; 3]) -> [usize; 3] {
        let mut vars = [
            clause[0].unsigned_abs() as usize - 1,
            clause[1].unsigned_abs() as usize - 1,
            clause[2].unsigned_abs() as usize - 1,
        ];
        vars.sort_unstable();
        vars
    }

    /// Whether 3 bits assigned to the clause's sorted variables satisfy it.
    pub fn clause_satisfied_by_bits(clause: &[i64; 3], bits: [bool; 3]) -> bool {
        let vars = Self::clause_vars(clause);
        clause.iter().any(|&lit| {
            let v = lit.unsigned_abs() as usize - 1;
            let slot = vars.iter().position(|&u| u == v).unwrap();
            (lit > 0) == bits[slot]
        })
    }

    fn clause_satisfied(clause: &[i64; 3], assignment: u64) -> bool {
        clause.iter().any(|&lit| {
            let bit = assignment >> (lit.unsigned_abs() - 1) & 1 == 1;
            (lit > 0) == bit
        })
    }

    /// Exact maximum fraction of satisfied clauses, with a witness
    /// assignment (bit i = value of variable i).
    pub fn sat_value(&self, budget: Budget) -> Result<SatValue> {
        if self.clauses.is_empty() {
            return Ok(SatValue {
                value: 1.0,
                witness: None,
                vacuous: true,
            });
        }
        if self.n_vars >= 64 {
            return Err(Error::BudgetExceeded {
                required: u128::MAX,
                budget: budget.0,
            });
        }
        let space = 1u64 << self.n_vars;
        budget.check(space as u128 * self.clauses.len() as u128)?;
        let best = (0..space)
            .into_par_iter()
            .map(|assignment| {
                let satisfied = self
                    .clauses
                    .iter()
                    .filter(|c| Self::clause_satisfied(c, assignment))
                    .count();
                (satisfied, assignment)
            })
            .reduce(
                || (0usize, u64::MAX),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                },
            );
        let witness = (0..self.n_vars)
            .map(|v| (best.1 >> v & 1) as usize)
            .collect();
        Ok(SatValue {
            value: best.0 as f64 / self.clauses.len() as f64,
            witness: Some(witness),
            vacuous: false,
        })
    }
}

fn validate_clause(clause: &[i64; 3], n_vars: usize, line: usize) -> Result<()> {
    for &lit in clause {
        if lit == 0 {
            return Err(Error::Parse {
                line,
                message: "zero literal inside clause".into(),
            });
        }
        if lit.unsigned_abs() as usize > n_vars {
            return Err(Error::Parse {
                line,
                message: format!("literal {lit} exceeds variable count {n_vars}"),
            });
        }
    }
    let mut vars = [
        clause[0].unsigned_abs(),
        clause[1].unsigned_abs(),
        clause[2].unsigned_abs(),
    ];
    vars.sort_unstable();
    if vars[0] == vars[1] || vars[1] == vars[2] {
        return Err(Error::Parse {
            line,
            message: format!("repeated variable {} in clause", vars[1]),
        });
    }
    Ok(())
}

fn compute_balance(n_vars: usize, clauses: &[[i64; 3]]) -> Option<usize> {
    if clauses.is_empty() {
        return None;
    }
    let mut counts = vec![0usize; n_vars];
    for clause in clauses {
        for &lit in clause {
            counts[lit.unsigned_abs() as usize - 1] += 1;
        }
    }
    let d = counts[0];
    if d > 0 && counts.iter().all(|&c| c == d) {
        Some(d)
    } else {
        None
    }
}

/// DIMACS CNF parser, restricted to width-3 clauses with distinct variables.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "duplicate problem line".into(),
                });
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("malformed problem line {line:?}"),
                });
            }
            let n: usize = parts[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad variable count {:?}", parts[2]),
            })?;
            let m: usize = parts[3].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad clause count {:?}", parts[3]),
            })?;
            header = Some((n, m));
            continue;
        }
        let Some((n_vars, _)) = header else {
            return Err(Error::Parse {
                line: line_no,
                message: "clause before problem line".into(),
            });
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad literal {tok:?}"),
            })?;
            if lit == 0 {
                if pending.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("clause of width {}, expected 3", pending.len()),
                    });
                }
                let clause = [pending[0], pending[1], pending[2]];
                validate_clause(&clause, n_vars, line_no)?;
                clauses.push(clause);
                pending.clear();
            } else {
                pending.push(lit);
            }
        }
    }
    let Some((n_vars, m)) = header else {
        return Err(Error::Parse {
            line: 0,
            message: "missing problem line".into(),
        });
    };
    if !pending.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "unterminated clause at end of input".into(),
        });
    }
    if clauses.len() != m {
        return Err(Error::Parse {
            line: 0,
            message: format!("declared {m} clauses, found {}", clauses.len()),
        });
    }
    CnfFormula::new(n_vars, clauses)
}

/// Every sign pattern over 3 variables: balanced with d = 8, SAT = 7/8.
pub fn all_sign_patterns() -> CnfFormula {
    let mut clauses = Vec::with_capacity(8);
    for mask in 0..8u32 {
        let sign = |v: i64, bit: u32| if mask >> bit & 1 == 1 { -v } else { v };
        clauses.push([sign(1, 0), sign(2, 1), sign(3, 2)]);
    }
    CnfFormula::new(3, clauses).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let f = parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
        assert_eq!(f.n_vars, 3);
        assert_eq!(f.clauses, vec![[1, 2, 3]]);
    }

    #[test]
    fn parse_rejects_repeated_variable() {
        let err = parse_dimacs("p cnf 3 1\n1 1 2 0\n").unwrap_err();
        match err {
            Error::Parse { line: 2, .. } => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_wide_clause() {
        assert!(parse_dimacs("p cnf 4 1\n1 2 3 4 0\n").is_err());
    }

    #[test]
    fn parse_with_comments_and_multiline_clause() {
        let f = parse_dimacs("c hello\np cnf 3 2\n1 2\n3 0\n-1 -2 -3 0\n").unwrap();
        assert_eq!(f.clauses.len(), 2);
    }

    #[test]
    fn sign_pattern_formula_balanced() {
        let f = all_sign_patterns();
        assert_eq!(f.balance, Some(8));
        // Occurrence count oracle: direct recount.
        assert!(f.occurrence_counts().iter().all(|&c| c == 8));
    }

    #[test]
    fn single_clause_satisfiable() {
        let f = CnfFormula::new(3, vec![[1, -2, 3]]).unwrap();
        assert_eq!(f.sat_value(Budget::default()).unwrap().value, 1.0);
    }

    #[test]
    fn sign_patterns_sat_seven_eighths() {
        // Exhaustive oracle over all 8 assignments: exactly one clause fails
        // per assignment.
        let f = all_sign_patterns();
        let v = f.sat_value(Budget::default()).unwrap();
        assert_eq!(v.value, 7.0 / 8.0);
    }

    #[test]
    fn empty_clause_list_vacuous() {
        let f = CnfFormula::new(2, vec![]).unwrap();
        let v = f.sat_value(Budget::default()).unwrap();
        assert!(v.vacuous);
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn sat_invariant_under_clause_reorder_and_renaming() {
        let f = CnfFormula::new(4, vec![[1, 2, 3], [-1, 2, 4], [-2, -3, -4], [1, -3, 4]]).unwrap();
        let base = f.sat_value(Budget::default()).unwrap().value;
        let mut reordered = f.clauses.clone();
        reordered.reverse();
        let f2 = CnfFormula::new(4, reordered).unwrap();
        assert_eq!(f2.sat_value(Budget::default()).unwrap().value, base);
        // Rename vars 1<->4, 2<->3, preserving signs.
        let rename = |lit: i64| {
            let sign = lit.signum();
            sign * match lit.abs() {
                1 => 4,
                2 => 3,
                3 => 2,
                _ => 1,
            }
        };
        let renamed: Vec<[i64; 3]> = f
            .clauses
            .iter()
            .map(|c| [rename(c[0]), rename(c[1]), rename(c[2])])
            .collect();
        let f3 = CnfFormula::new(4, renamed).unwrap();
        assert_eq!(f3.sat_value(Budget::default()).unwrap().value, base);
    }

    #[test]
    fn witness_reproduces_value() {
        let f = all_sign_patterns();
        let v = f.sat_value(Budget::default()).unwrap();
        let w = v.witness.unwrap();
        let satisfied = f
            .clauses
            .iter()
            .filter(|c| {
                c.iter()
                    .any(|&lit| (lit > 0) == (w[lit.unsigned_abs() as usize - 1] == 1))
            })
            .count();
        assert_eq!(satisfied as f64 / 8.0, v.value);
    }
}
