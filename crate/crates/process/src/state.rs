use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The constraint set Z that every state entry must lie in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Real,
    NonnegativeCone,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Real => f.write_str("real"),
            Domain::NonnegativeCone => f.write_str("nonnegative cone"),
        }
    }
}

impl Domain {
    /// Index and value of the first entry outside the domain, if any.
    pub fn violation(&self, values: &[f64]) -> Option<(usize, f64)> {
        values.iter().copied().enumerate().find(|&(_, v)| match self {
            Domain::Real => !v.is_finite(),
            Domain::NonnegativeCone => !v.is_finite() || v < 0.0,
        })
    }

    pub fn check(&self, time: i64, values: &[f64]) -> Result<()> {
        match self.violation(values) {
            None => Ok(()),
            Some((index, value)) => Err(Error::Constraint {
                time,
                index,
                value,
                domain: *self,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub values: Vec<f64>,
    pub domain: Domain,
}

impl StateVector {
    pub fn new(values: Vec<f64>, domain: Domain) -> Self {
        Self { values, domain }
    }

    pub fn scalar(v: f64, domain: Domain) -> Self {
        Self::new(vec![v], domain)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// ‖a − b‖∞ over equal-length slices.
pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
