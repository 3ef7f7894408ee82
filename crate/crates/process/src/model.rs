use std::fmt;
use std::sync::Arc;

use crate::{DiscreteInterval, Domain, Error, Metadata, Result, StateVector};

pub type Rhs = dyn Fn(i64, &[f64]) -> Vec<f64> + Send + Sync;

/// A nonautonomous difference equation u_{t+1} = F_t(u_t).
#[derive(Clone)]
pub struct ModelSpec {
    id: String,
    dimension: usize,
    domain: Domain,
    time_domain: DiscreteInterval,
    period: Option<u64>,
    rhs: Arc<Rhs>,
    pub metadata: Metadata,
    pub params: serde_json::Value,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("id", &self.id)
            .field("dimension", &self.dimension)
            .field("domain", &self.domain)
            .field("time_domain", &self.time_domain)
            .field("period", &self.period)
            .field("metadata", &self.metadata)
            .finish()
    }
}

impl ModelSpec {
    pub fn new<F>(id: impl Into<String>, dimension: usize, domain: Domain, rhs: F) -> Self
    where
        F: Fn(i64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dimension > 0, "model dimension must be positive");
        Self {
            id: id.into(),
            dimension,
            domain,
            time_domain: DiscreteInterval::INTEGERS,
            period: None,
            rhs: Arc::new(rhs),
            metadata: Metadata::default(),
            params: serde_json::Value::Null,
        }
    }

    pub fn with_time_domain(mut self, time_domain: DiscreteInterval) -> Self {
        self.time_domain = time_domain;
        self
    }

    pub fn with_period(mut self, period: u64) -> Self {
        assert!(period > 0, "period must be positive");
        self.period = Some(period);
        self
    }

    pub fn with_metadata(mut self, metadata: Metadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn time_domain(&self) -> DiscreteInterval {
        self.time_domain
    }

    pub fn period(&self) -> Option<u64> {
        self.period
    }

    pub fn is_autonomous(&self) -> bool {
        self.period == Some(1)
    }

    /// F_t on raw values, with time, dimension and domain checks on both sides.
    pub fn apply(&self, t: i64, u: &[f64]) -> Result<Vec<f64>> {
        if !self.time_domain.contains_step(t) {
            return Err(Error::OutsideTimeDomain(t));
        }
        if u.len() != self.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                found: u.len(),
            });
        }
        self.domain.check(t, u)?;
        let out = (self.rhs)(t, u);
        if out.len() != self.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                found: out.len(),
            });
        }
        self.domain.check(t + 1, &out)?;
        Ok(out)
    }

    /// φ(t;τ,u) on raw values.
    pub fn evolve_values(&self, tau: i64, t: i64, u: &[f64]) -> Result<Vec<f64>> {
        if tau > t {
            return Err(Error::Ordering { from: tau, to: t });
        }
        if !self.time_domain.contains(tau) {
            return Err(Error::OutsideTimeDomain(tau));
        }
        if !self.time_domain.contains(t) {
            return Err(Error::OutsideTimeDomain(t));
        }
        if tau == t {
            if u.len() != self.dimension {
                return Err(Error::Dimension {
                    expected: self.dimension,
                    found: u.len(),
                });
            }
            self.domain.check(tau, u)?;
            return Ok(u.to_vec());
        }
        let mut x = self.apply(tau, u)?;
        for s in tau + 1..t {
            x = self.apply(s, &x)?;
        }
        Ok(x)
    }

    pub fn state(&self, values: Vec<f64>) -> StateVector {
        StateVector::new(values, self.domain)
    }
}
