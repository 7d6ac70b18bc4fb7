use std::fmt;
use std::sync::Arc;

use crate::combin;
use crate::error::{Error, Result};

/// Pure payoff map from a question/answer index tuple to a value in [0, 1].
#[derive(Clone)]
pub enum VerificationOracle {
    /// Flat array indexed row-major by the full index tuple.
    DenseTable { dims: Vec<usize>, values: Vec<f64> },
    /// Deterministic evaluable rule with a declared per-call evaluation cost
    /// (in units of dense-table lookups).
    Rule {
        cost: u64,
        eval: Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for VerificationOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerificationOracle::DenseTable { dims, .. } => {
                write!(f, "DenseTable{{dims: {dims:?}}}")
            }
            VerificationOracle::Rule { cost, .. } => write!(f, "Rule{{cost: {cost}}}"),
        }
    }
}

impl VerificationOracle {
    pub fn dense(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected = combin::tuple_count(&dims);
        if expected != values.len() as u128 {
            return Err(Error::InvalidGame(format!(
                "dense table length {} does not match index space {}",
                values.len(),
                expected
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidGame(format!(
                    "table entry {i} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(VerificationOracle::DenseTable { dims, values })
    }

    pub fn rule<F>(cost: u64, eval: F) -> Self
    where
        F: Fn(&[usize]) -> f64 + Send + Sync + 'static,
    {
        VerificationOracle::Rule {
            cost,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, index: &[usize]) -> f64 {
        match self {
            VerificationOracle::DenseTable { dims, values } => {
                debug_assert_eq!(index.len(), dims.len());
                let mut flat = 0usize;
                for (&i, &d) in index.iter().zip(dims) {
                    debug_assert!(i < d);
                    flat = flat * d + i;
                }
                values[flat]
            }
            VerificationOracle::Rule { eval, .. } => (eval)(index),
        }
    }

    /// Declared cost of one evaluation.
    pub fn eval_cost(&self) -> u64 {
        match self {
            VerificationOracle::DenseTable { .. } => 1,
            VerificationOracle::Rule { cost, .. } => *cost,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_row_major_indexing() {
        let values: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        let oracle = VerificationOracle::dense(vec![2, 3, 2], values.clone()).unwrap();
        assert_eq!(oracle.eval(&[0, 0, 0]), values[0]);
        assert_eq!(oracle.eval(&[1, 2, 1]), values[11]);
        assert_eq!(oracle.eval(&[0, 2, 1]), values[5]);
    }

    #[test]
    fn dense_length_validated() {
        assert!(VerificationOracle::dense(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(VerificationOracle::dense(vec![2, 2], vec![1.5; 4]).is_err());
    }
}
