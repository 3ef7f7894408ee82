use std::collections::BTreeMap;

use idescope_process::{sup_dist, Error, ModelSpec, Result};
use rayon::prelude::*;

use crate::cloud::{hausdorff_semidist, FiberCloud};
use crate::limits::Trace;

/// Distances below this are treated as rounding noise when fitting decay rates.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Slope of ln(dist) per step below which a decay is called exponential.
pub const EXPONENTIAL_SLOPE: f64 = -1e-3;

fn semi_or_inf(a: &FiberCloud, b: &FiberCloud) -> Result<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => Ok(0.0),
        (false, true) => Ok(f64::INFINITY),
        _ => hausdorff_semidist(a, b),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceEntry {
    pub tau: i64,
    /// dist(F_τ(fiber(τ)), fiber(τ+1))
    pub positive: f64,
    /// dist(fiber(τ+1), F_τ(fiber(τ)))
    pub negative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub entries: Vec<InvarianceEntry>,
    pub tol: f64,
    pub positively_invariant: bool,
    pub negatively_invariant: bool,
}

impl InvarianceReport {
    pub fn invariant(&self) -> bool {
        self.positively_invariant && self.negatively_invariant
    }
}

pub fn check_invariance(model: &ModelSpec, fibers: &BTreeMap<i64, FiberCloud>, tol: f64) -> Result<InvarianceReport> {
    let pairs: Vec<(i64, &FiberCloud, &FiberCloud)> = fibers
        .iter()
        .filter_map(|(&t, f)| fibers.get(&(t + 1)).map(|g| (t, f, g)))
        .collect();
    let entries: Vec<InvarianceEntry> = pairs
        .par_iter()
        .map(|&(tau, f, g)| {
            if f.is_empty() {
                let negative = if g.is_empty() { 0.0 } else { f64::INFINITY };
                return Ok(InvarianceEntry {
                    tau,
                    positive: 0.0,
                    negative,
                });
            }
            let image = f.map(model, tau)?;
            Ok(InvarianceEntry {
                tau,
                positive: semi_or_inf(&image, g)?,
                negative: semi_or_inf(g, &image)?,
            })
        })
        .collect::<Result<_>>()?;
    let any = !entries.is_empty();
    Ok(InvarianceReport {
        positively_invariant: any && entries.iter().all(|e| e.positive < tol),
        negatively_invariant: any && entries.iter().all(|e| e.negative < tol),
        entries,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveInvarianceReport {
    /// (τ, sup_{s≤horizon} dist(φ(τ+s;τ,ω⁺), ω⁺)) per probe.
    pub probes: Vec<(i64, f64)>,
    /// (ε, smallest probe T such that every probe τ ≥ T stays within ε), None on failure.
    pub thresholds: Vec<(f64, Option<i64>)>,
}

impl PositiveInvarianceReport {
    pub fn holds(&self) -> bool {
        self.thresholds.iter().all(|t| t.1.is_some())
    }
}

/// Asymptotic positive invariance of ω⁺ on the probed initial times.
pub fn verify_positive_invariance(
    model: &ModelSpec,
    omega_plus: &FiberCloud,
    eps_list: &[f64],
    tau_probe: &[i64],
    horizon: u64,
) -> Result<PositiveInvarianceReport> {
    if omega_plus.is_empty() {
        return Err(Error::Empty("omega_plus".into()));
    }
    let mut taus = tau_probe.to_vec();
    taus.sort_unstable();
    taus.dedup();
    let probes: Vec<(i64, f64)> = taus
        .par_iter()
        .map(|&tau| {
            let mut x = omega_plus.clone().at_time(tau);
            let mut worst = 0.0_f64;
            for s in 0..horizon {
                x = x.map(model, tau + s as i64)?;
                worst = worst.max(hausdorff_semidist(&x, omega_plus)?);
            }
            Ok((tau, worst))
        })
        .collect::<Result<_>>()?;
    let thresholds = eps_list
        .iter()
        .map(|&eps| {
            let first_bad_from_end = probes.iter().rposition(|p| p.1 >= eps);
            let start = first_bad_from_end.map_or(0, |i| i + 1);
            (eps, probes.get(start).map(|p| p.0))
        })
        .collect();
    Ok(PositiveInvarianceReport { probes, thresholds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeWitness {
    pub target: Vec<f64>,
    /// (s⋆, u⋆, ‖φ(τ+s⋆; τ+s⋆−T, u⋆) − target‖) for the first s⋆ that succeeds.
    pub witness: Option<(i64, Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeInvarianceReport {
    pub eps: f64,
    pub lag: u64,
    pub witnesses: Vec<NegativeWitness>,
}

impl NegativeInvarianceReport {
    pub fn all_found(&self) -> bool {
        self.witnesses.iter().all(|w| w.witness.is_some())
    }
}

/// Empirical asymptotic negative invariance: for each target u, search s⋆ in `s_candidates`
/// and u⋆ in the (dense) ω⁺ cloud with ‖φ(τ+s⋆; τ+s⋆−T, u⋆) − u‖∞ < ε.
///
/// This samples the statement; it cannot certify the uniform-continuity hypothesis behind it.
pub fn verify_negative_invariance(
    model: &ModelSpec,
    omega_plus: &FiberCloud,
    targets: &[Vec<f64>],
    eps: f64,
    lag: u64,
    tau: i64,
    s_candidates: &[u64],
) -> Result<NegativeInvarianceReport> {
    if omega_plus.is_empty() {
        return Err(Error::Empty("omega_plus".into()));
    }
    let mut open: Vec<usize> = (0..targets.len()).collect();
    let mut found: Vec<Option<(i64, Vec<f64>, f64)>> = vec![None; targets.len()];
    for &s in s_candidates {
        if open.is_empty() {
            break;
        }
        let start = tau + s as i64 - lag as i64;
        let mut images: Vec<(Vec<f64>, usize)> = omega_plus
            .points()
            .par_iter()
            .enumerate()
            .map(|(i, p)| model.evolve_values(start, start + lag as i64, p).map(|y| (y, i)))
            .collect::<Result<_>>()?;
        let one_d = omega_plus.dim() == 1;
        if one_d {
            images.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.1.cmp(&b.1)));
        }
        let nearest = |u: &[f64]| -> (usize, f64) {
            if one_d {
                let k = images.partition_point(|(y, _)| y[0] < u[0]);
                [k.wrapping_sub(1), k]
                    .into_iter()
                    .filter_map(|i| images.get(i).map(|(y, j)| (*j, (y[0] - u[0]).abs())))
                    .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
            } else {
                images
                    .iter()
                    .map(|(y, j)| (*j, sup_dist(y, u)))
                    .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
            }
        };
        open.retain(|&k| {
            let (j, d) = nearest(&targets[k]);
            if d < eps {
                found[k] = Some((s as i64, omega_plus.points()[j].clone(), d));
                false
            } else {
                true
            }
        });
    }
    Ok(NegativeInvarianceReport {
        eps,
        lag,
        witnesses: targets
            .iter()
            .cloned()
            .zip(found)
            .map(|(target, witness)| NegativeWitness { target, witness })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractionReport {
    pub trace: Trace,
    pub attracting: bool,
}

/// dist(φ(τ+s;τ,A(τ)), target(τ+s)) along `s_grid`; attracting iff the final value is
/// below tol and the last quartile does not increase beyond tol/100 per entry.
pub fn verify_forward_attraction(
    model: &ModelSpec,
    target: &BTreeMap<i64, FiberCloud>,
    a: &FiberCloud,
    s_grid: &[u64],
    tol: f64,
) -> Result<AttractionReport> {
    let tau = a.time;
    if let Some(s) = s_grid.iter().find(|&&s| !target.contains_key(&(tau + s as i64))) {
        return Err(Error::Precondition(format!(
            "no target fibre at time {}",
            tau + *s as i64
        )));
    }
    let s_max = s_grid.iter().copied().max().unwrap_or(0);
    let mut trace = Trace::new(tol);
    let mut x = a.clone();
    for s in 0..=s_max {
        if s_grid.contains(&s) {
            trace
                .entries
                .push((s as i64, semi_or_inf(&x, &target[&(tau + s as i64)])?));
        }
        if s < s_max {
            x = x.map(model, tau + s as i64)?;
        }
    }
    let vals: Vec<f64> = trace.entries.iter().map(|e| e.1).collect();
    let final_ok = vals.last().is_some_and(|d| *d < tol);
    let quartile = &vals[vals.len() - (vals.len() / 4).max(1)..];
    let settled = quartile.windows(2).all(|w| w[1] <= w[0] + 0.01 * tol);
    trace.converged = final_ok;
    Ok(AttractionReport {
        attracting: final_ok && settled,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutonomyVerdict {
    Exact,
    Exponential { rate: f64 },
    Subexponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomyReport {
    pub traces: BTreeMap<i64, Vec<(i64, f64)>>,
    /// Pointwise maximum over probes.
    pub combined: Vec<(i64, f64)>,
    pub slope: Option<f64>,
    pub verdict: AutonomyVerdict,
}

/// Least-squares slope of ln d over the decaying tail: from the peak to the last value
/// above the noise floor.
pub fn tail_log_slope(trace: &[(i64, f64)]) -> Option<f64> {
    let peak = trace
        .iter()
        .enumerate()
        .fold(None, |b: Option<(usize, f64)>, (i, e)| match b {
            Some((_, v)) if v >= e.1 => b,
            _ => Some((i, e.1)),
        })?
        .0;
    let end = trace.iter().rposition(|e| e.1 > NOISE_FLOOR)?;
    if end <= peak {
        return None;
    }
    let pts: Vec<(f64, f64)> = trace[peak..=end]
        .iter()
        .filter(|e| e.1 > NOISE_FLOOR)
        .map(|e| (e.0 as f64, e.1.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Upper bound on the slope when the trace drops from its peak straight to the noise floor.
fn collapse_slope(trace: &[(i64, f64)]) -> Option<f64> {
    let (ip, peak) = trace.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    let floor = trace[ip..].iter().find(|e| e.1 <= NOISE_FLOOR)?;
    (peak.1 > NOISE_FLOOR).then(|| (NOISE_FLOOR / peak.1).ln() / (floor.0 - peak.0) as f64)
}

/// sup over a ∈ A of ‖φ(τ+s;τ,a) − F^s(a)‖∞ for s = 0..=horizon, with F the limit map.
pub fn verify_asymptotic_autonomy(
    model: &ModelSpec,
    limit_model: &ModelSpec,
    a: &FiberCloud,
    tau_probe: &[i64],
    horizon: u64,
) -> Result<AutonomyReport> {
    if !limit_model.is_autonomous() {
        return Err(Error::Precondition(format!(
            "limit model `{}` is not autonomous",
            limit_model.id()
        )));
    }
    let t0 = limit_model.time_domain().start().unwrap_or(0).max(0);
    let mut traces = BTreeMap::new();
    for &tau in tau_probe {
        let per_point: Vec<Vec<f64>> = a
            .points()
            .par_iter()
            .map(|p| {
                let (mut x, mut y) = (p.clone(), p.clone());
                let mut d = Vec::with_capacity(horizon as usize + 1);
                d.push(0.0);
                for s in 0..horizon as i64 {
                    x = model.apply(tau + s, &x)?;
                    y = limit_model.apply(t0 + s, &y)?;
                    d.push(sup_dist(&x, &y));
                }
                Ok(d)
            })
            .collect::<Result<_>>()?;
        let trace: Vec<(i64, f64)> = (0..=horizon as usize)
            .map(|s| (s as i64, per_point.iter().map(|d| d[s]).fold(0.0, f64::max)))
            .collect();
        traces.insert(tau, trace);
    }
    let combined: Vec<(i64, f64)> = (0..=horizon as usize)
        .map(|s| (s as i64, traces.values().map(|t| t[s].1).fold(0.0, f64::max)))
        .collect();
    let slope = tail_log_slope(&combined).or_else(|| collapse_slope(&combined));
    let verdict = if combined.iter().all(|e| e.1 == 0.0) {
        AutonomyVerdict::Exact
    } else {
        match slope {
            Some(m) if m < EXPONENTIAL_SLOPE => AutonomyVerdict::Exponential { rate: m.exp() },
            _ => AutonomyVerdict::Subexponential,
        }
    };
    Ok(AutonomyReport {
        traces,
        combined,
        slope,
        verdict,
    })
}
