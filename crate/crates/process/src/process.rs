use std::io::{self, Write};

use crate::{fmt_f64, sup_dist, Error, ModelSpec, Result, StateVector};

pub fn step(model: &ModelSpec, t: i64, u: &StateVector) -> Result<StateVector> {
    model.apply(t, &u.values).map(|v| model.state(v))
}

/// φ(t;τ,u) = F_{t−1}∘…∘F_τ(u).
pub fn evolve(model: &ModelSpec, tau: i64, t: i64, u: &StateVector) -> Result<StateVector> {
    model.evolve_values(tau, t, &u.values).map(|v| model.state(v))
}

/// A forward solution; `states[s]` is φ(τ+s;τ,u).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: i64,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// CSV with header `t,component_0,...`, one row per time step.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.states[0].len();
        write!(w, "t")?;
        for i in 0..d {
            write!(w, ",component_{i}")?;
        }
        writeln!(w)?;
        for (s, x) in self.states.iter().enumerate() {
            write!(w, "{}", self.start + s as i64)?;
            for v in &x.values {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn orbit(model: &ModelSpec, tau: i64, horizon: usize, u: &StateVector) -> Result<Trajectory> {
    let end = tau + horizon as i64;
    if !model.time_domain().contains(end) {
        return Err(Error::OutsideTimeDomain(end));
    }
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(evolve(model, tau, tau, u)?);
    for s in 0..horizon {
        let next = step(model, tau + s as i64, &states[s])?;
        states.push(next);
    }
    Ok(Trajectory { start: tau, states })
}

/// ‖φ(t;s,φ(s;τ,u)) − φ(t;τ,u)‖∞, zero for any deterministic right-hand side.
pub fn verify_process_property(model: &ModelSpec, tau: i64, s: i64, t: i64, u: &StateVector) -> Result<f64> {
    if tau > s {
        return Err(Error::Ordering { from: tau, to: s });
    }
    if s > t {
        return Err(Error::Ordering { from: s, to: t });
    }
    let mid = model.evolve_values(tau, s, &u.values)?;
    let split = model.evolve_values(s, t, &mid)?;
    let direct = model.evolve_values(tau, t, &u.values)?;
    Ok(sup_dist(&split, &direct))
}

/// max over samples of ‖φ(t+θ;τ+θ,u) − φ(t;τ,u)‖∞.
pub fn verify_periodicity(model: &ModelSpec, theta: u64, samples: &[(i64, i64, StateVector)]) -> Result<f64> {
    let th = theta as i64;
    let mut worst = 0.0_f64;
    for (tau, t, u) in samples {
        let a = model.evolve_values(*tau + th, *t + th, &u.values)?;
        let b = model.evolve_values(*tau, *t, &u.values)?;
        worst = worst.max(sup_dist(&a, &b));
    }
    Ok(worst)
}
