use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A set of consecutive integers; a missing endpoint means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DiscreteInterval {
    start: Option<i64>,
    end: Option<i64>,
}

impl DiscreteInterval {
    pub const INTEGERS: DiscreteInterval = DiscreteInterval { start: None, end: None };

    pub fn new(start: Option<i64>, end: Option<i64>) -> Result<Self> {
        if let (Some(s), Some(e)) = (start, end) {
            if s > e {
                return Err(Error::Ordering { from: s, to: e });
            }
        }
        Ok(Self { start, end })
    }

    pub fn from(start: i64) -> Self {
        Self {
            start: Some(start),
            end: None,
        }
    }

    pub fn start(&self) -> Option<i64> {
        self.start
    }

    pub fn end(&self) -> Option<i64> {
        self.end
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start.is_none_or(|s| s <= t) && self.end.is_none_or(|e| t <= e)
    }

    /// Membership in I', the times from which one step stays inside I.
    pub fn contains_step(&self, t: i64) -> bool {
        self.contains(t) && self.end.is_none_or(|e| t < e)
    }

    /// Clamp a requested starting time into the interval.
    pub fn clamp_start(&self, t: i64) -> i64 {
        self.start.map_or(t, |s| t.max(s))
    }
}
