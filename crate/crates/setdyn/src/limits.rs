use std::collections::BTreeMap;

use idescope_process::{Error, ModelSpec, Result};
use rayon::prelude::*;

use crate::cloud::{hausdorff_dist, FiberCloud, Provenance};
use crate::sets::{Sampling, SetDescriptor};

/// Successive distances (s, dist) of a Cauchy-stopped construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub entries: Vec<(i64, f64)>,
    pub tol: f64,
    pub converged: bool,
}

impl Trace {
    pub fn new(tol: f64) -> Self {
        Self {
            entries: Vec::new(),
            tol,
            converged: false,
        }
    }

    pub fn last_value(&self) -> Option<f64> {
        self.entries.last().map(|e| e.1)
    }

    fn close(mut self) -> Self {
        self.converged = self.last_value().is_some_and(|d| d < self.tol);
        self
    }
}

fn check_grid(s_grid: &[u64], tol: f64) -> Result<()> {
    if s_grid.is_empty() {
        return Err(Error::invalid("s_grid is empty"));
    }
    if s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("s_grid must be strictly increasing"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// Symmetric distance between possibly empty clouds: 0 if both are empty, ∞ if one is.
fn set_gap(a: &FiberCloud, b: &FiberCloud) -> Result<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Ok(0.0),
        (false, false) => hausdorff_dist(a, b),
        _ => Ok(f64::INFINITY),
    }
}

pub type SourceFibre<'a> = &'a (dyn Fn(i64) -> Result<FiberCloud> + Sync);

/// Pullback images φ(τ; τ−s, source(τ−s)) for s in `s_grid`, returning the cloud at
/// the largest s and the trace of symmetric distances between successive clouds.
pub fn pullback_limit_fiber(
    model: &ModelSpec,
    source: SourceFibre,
    tau: i64,
    s_grid: &[u64],
    tol: f64,
) -> Result<(FiberCloud, Trace)> {
    check_grid(s_grid, tol)?;
    let clouds: Vec<FiberCloud> = s_grid
        .par_iter()
        .map(|&s| {
            let start = tau - s as i64;
            source(start)?.at_time(start).evolve(model, tau)
        })
        .collect::<Result<_>>()?;
    let mut trace = Trace::new(tol);
    for (k, w) in clouds.windows(2).enumerate() {
        trace
            .entries
            .push((s_grid[k + 1] as i64, hausdorff_dist(&w[0], &w[1])?));
    }
    let last = clouds.into_iter().last().expect("s_grid is nonempty");
    Ok((last, trace.close()))
}

#[derive(Debug, Clone)]
pub struct AttractorFibers {
    pub fibers: BTreeMap<i64, FiberCloud>,
    pub trace: Trace,
}

/// A⋆ on τ_lo..=τ_hi: the pullback fibre at τ_lo, propagated forward so that the
/// returned family is invariant by construction.
///
/// Positive invariance of the absorbing family is checked on samples over every step the
/// construction uses; a violation is reported with the offending point.
pub fn attractor_star_fibers(
    model: &ModelSpec,
    absorbing: &(dyn Fn(i64) -> SetDescriptor + Sync),
    tau_lo: i64,
    tau_hi: i64,
    s_grid: &[u64],
    tol: f64,
    sampling: Sampling,
) -> Result<AttractorFibers> {
    check_grid(s_grid, tol)?;
    if tau_hi < tau_lo {
        return Err(Error::Ordering {
            from: tau_lo,
            to: tau_hi,
        });
    }
    let s_max = *s_grid.last().expect("checked") as i64;
    check_positive_invariance(model, absorbing, tau_lo - s_max, tau_hi, sampling)?;
    let source = |t: i64| sampling.sample(&absorbing(t), t);
    let (first, trace) = pullback_limit_fiber(model, &source, tau_lo, s_grid, tol)?;
    let mut fibers = BTreeMap::new();
    let mut cur = first;
    for tau in tau_lo..tau_hi {
        let next = cur.map(model, tau)?;
        fibers.insert(tau, cur);
        cur = next;
    }
    fibers.insert(tau_hi, cur);
    Ok(AttractorFibers { fibers, trace })
}

fn check_positive_invariance(
    model: &ModelSpec,
    absorbing: &(dyn Fn(i64) -> SetDescriptor + Sync),
    from: i64,
    to: i64,
    sampling: Sampling,
) -> Result<()> {
    (from..to).into_par_iter().try_for_each(|t| {
        let next = absorbing(t + 1);
        let cloud = sampling.sample(&absorbing(t), t)?;
        for p in cloud.points() {
            let q = model.apply(t, p)?;
            let scale = 1.0 + idescope_process::sup_norm(&q);
            if !next.contains(&q, 1e-12 * scale) {
                return Err(Error::Precondition(format!(
                    "absorbing family is not positively invariant: F_{t}({p:?}) = {q:?} lies outside A({})",
                    t + 1
                )));
            }
        }
        Ok(())
    })
}

/// A way of approximating the forward limit fibre Ω_A(τ) from A(τ).
pub trait ForwardConstruction: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// `a` is A(τ) with τ = a.time; the horizon is the last grid entry.
    fn forward_fiber(&self, model: &ModelSpec, a: &FiberCloud, s_grid: &[u64], tol: f64)
        -> Result<(FiberCloud, Trace)>;
}

/// ⋂_s closure ⋃_{t≥s} φ(τ+t; τ, A(τ)), realised by unions over trailing windows [s_k, s_max].
pub struct TailUnion;

impl ForwardConstruction for TailUnion {
    fn name(&self) -> &'static str {
        "tail_union"
    }

    fn summary(&self) -> &'static str {
        "accumulation points of the forward images over trailing windows [s, horizon]"
    }

    fn forward_fiber(
        &self,
        model: &ModelSpec,
        a: &FiberCloud,
        s_grid: &[u64],
        tol: f64,
    ) -> Result<(FiberCloud, Trace)> {
        check_grid(s_grid, tol)?;
        if a.is_empty() {
            return Err(Error::Empty(format!("A({})", a.time)));
        }
        if s_grid.len() < 2 {
            return Err(Error::invalid(
                "tail_union needs at least one window start before the horizon",
            ));
        }
        let tau = a.time;
        let s_max = *s_grid.last().expect("checked");
        let starts = &s_grid[..s_grid.len() - 1];
        let mut windows: Vec<Option<FiberCloud>> = vec![None; starts.len()];
        let mut x = a.clone();
        for s in 0..=s_max {
            for (k, &sk) in starts.iter().enumerate() {
                if sk <= s {
                    let time = tau + s_max as i64;
                    let acc = match windows[k].take() {
                        None => FiberCloud::union(time, [&x], a.resolution)?,
                        Some(w) => FiberCloud::union(time, [&w, &x], a.resolution)?,
                    };
                    windows[k] = Some(acc);
                }
            }
            if s < s_max {
                x = x.map(model, tau + s as i64)?;
            }
        }
        let windows: Vec<FiberCloud> = windows
            .into_iter()
            .map(|w| w.expect("every window saw the horizon"))
            .collect();
        let mut trace = Trace::new(tol);
        for (k, w) in windows.windows(2).enumerate() {
            trace
                .entries
                .push((starts[k + 1] as i64, hausdorff_dist(&w[0], &w[1])?));
        }
        let out = windows.into_iter().last().expect("nonempty").at_time(tau);
        Ok((out, trace.close()))
    }
}

/// ⋂_s φ(τ+s; τ, A(τ)): the images themselves intersected.
///
/// For connected 1-dimensional clouds the images are intervals and the intersection is
/// the interval of running hull bounds; otherwise points of the latest image are kept if
/// they lie within the resolution of every earlier image.
pub struct ImageIntersection;

impl ImageIntersection {
    fn interval(tau: i64, lo: f64, hi: f64, res: f64) -> Result<FiberCloud> {
        if lo > hi {
            return Ok(FiberCloud::empty(tau, res, Provenance::Intersected));
        }
        let mut c = FiberCloud::scalar(tau, &[lo, hi], res, Provenance::Intersected)?.with_connected(true);
        c.provenance = Provenance::Intersected;
        Ok(c)
    }
}

impl ForwardConstruction for ImageIntersection {
    fn name(&self) -> &'static str {
        "image_intersection"
    }

    fn summary(&self) -> &'static str {
        "intersection of the forward images of A(tau) over all s up to the horizon"
    }

    fn forward_fiber(
        &self,
        model: &ModelSpec,
        a: &FiberCloud,
        s_grid: &[u64],
        tol: f64,
    ) -> Result<(FiberCloud, Trace)> {
        check_grid(s_grid, tol)?;
        if a.is_empty() {
            return Err(Error::Empty(format!("A({})", a.time)));
        }
        let tau = a.time;
        let res = a.resolution;
        let s_max = *s_grid.last().expect("checked");
        let mut snapshots = Vec::with_capacity(s_grid.len());
        let mut x = a.clone();
        if a.connected {
            let (mut lo, mut hi) = a.hull().expect("connected clouds are 1-dimensional");
            for s in 0..=s_max {
                let (l, h) = x.hull().expect("images stay 1-dimensional");
                lo = lo.max(l);
                hi = hi.min(h);
                if s_grid.contains(&s) {
                    snapshots.push(Self::interval(tau, lo, hi, res)?);
                }
                if s < s_max {
                    x = x.map(model, tau + s as i64)?;
                }
            }
        } else {
            let mut images = Vec::with_capacity(s_max as usize + 1);
            for s in 0..=s_max {
                if s_grid.contains(&s) {
                    let mut j = x.filter_within(&images.iter().collect::<Vec<_>>(), res).at_time(tau);
                    j.provenance = Provenance::Intersected;
                    snapshots.push(j);
                }
                if s < s_max {
                    let next = x.map(model, tau + s as i64)?;
                    images.push(x);
                    x = next;
                }
            }
        }
        let mut trace = Trace::new(tol);
        for (k, w) in snapshots.windows(2).enumerate() {
            trace.entries.push((s_grid[k + 1] as i64, set_gap(&w[0], &w[1])?));
        }
        let out = snapshots.into_iter().last().expect("nonempty grid");
        let mut trace = trace.close();
        trace.converged &= !out.is_empty();
        Ok((out, trace))
    }
}

pub fn constructions() -> Vec<Box<dyn ForwardConstruction>> {
    vec![Box::new(TailUnion), Box::new(ImageIntersection)]
}

pub fn construction_by_name(name: &str) -> Result<Box<dyn ForwardConstruction>> {
    constructions().into_iter().find(|c| c.name() == name).ok_or_else(|| {
        let known: Vec<_> = constructions().iter().map(|c| c.name()).collect();
        Error::invalid(format!(
            "unknown forward construction `{name}` (known: {})",
            known.join(", ")
        ))
    })
}

pub fn forward_limit_fiber(
    model: &ModelSpec,
    a: &FiberCloud,
    s_grid: &[u64],
    tol: f64,
    construction: &dyn ForwardConstruction,
) -> Result<(FiberCloud, Trace)> {
    construction.forward_fiber(model, a, s_grid, tol)
}

#[derive(Debug, Clone)]
pub struct OmegaForward {
    pub fibres: BTreeMap<i64, FiberCloud>,
    pub traces: BTreeMap<i64, Trace>,
    pub minus: FiberCloud,
    pub plus: FiberCloud,
    pub converged: bool,
}

/// ω⁻ = ⋂_τ Ω_A(τ) and ω⁺ = closure ⋃_τ Ω_A(τ) over `taus`.
pub fn omega_forward(
    model: &ModelSpec,
    a: SourceFibre,
    taus: &[i64],
    s_grid: &[u64],
    tol: f64,
    construction: &dyn ForwardConstruction,
) -> Result<OmegaForward> {
    if taus.is_empty() {
        return Err(Error::Empty("tau range".into()));
    }
    let computed: Vec<(i64, FiberCloud, Trace)> = taus
        .par_iter()
        .map(|&tau| {
            let src = a(tau)?.at_time(tau);
            let (f, t) = construction.forward_fiber(model, &src, s_grid, tol)?;
            Ok((tau, f, t))
        })
        .collect::<Result<_>>()?;
    let mut fibres = BTreeMap::new();
    let mut traces = BTreeMap::new();
    for (tau, f, t) in computed {
        fibres.insert(tau, f);
        traces.insert(tau, t);
    }
    let res = fibres.values().map(|f| f.resolution).fold(0.0, f64::max);
    let last_tau = *taus.iter().max().expect("nonempty");
    let nonempty: Vec<&FiberCloud> = fibres.values().filter(|f| !f.is_empty()).collect();
    let plus = if nonempty.is_empty() {
        FiberCloud::empty(last_tau, res, Provenance::Closure)
    } else {
        FiberCloud::union(last_tau, nonempty.iter().copied(), res)?
    };
    let minus = if nonempty.len() < fibres.len() {
        FiberCloud::empty(last_tau, res, Provenance::Intersected)
    } else {
        plus.filter_within(&fibres.values().collect::<Vec<_>>(), res)
    };
    let converged = traces.values().all(|t| t.converged);
    Ok(OmegaForward {
        fibres,
        traces,
        minus,
        plus,
        converged,
    })
}

/// Accumulation cloud of ⋃_{s≥0} A⋆(τ+s) along a tail of times.
///
/// U_k is the union of the fibres at tail[k..]; the trace records dist(U_k, U_{k+1}) and
/// the cloud returned is the union over the second half of the tail, which also covers
/// fibres that oscillate with a period up to half the tail length.
pub fn omega_star(fibers: &BTreeMap<i64, FiberCloud>, tau_tail: &[i64], tol: f64) -> Result<(FiberCloud, Trace)> {
    let mut tail: Vec<i64> = tau_tail.to_vec();
    tail.sort_unstable();
    tail.dedup();
    if tail.len() < 2 {
        return Err(Error::invalid("omega_star needs at least two tail times"));
    }
    if let Some(t) = tail.iter().find(|t| !fibers.contains_key(t)) {
        return Err(Error::Precondition(format!("no attractor fibre at tail time {t}")));
    }
    let res = tail.iter().map(|t| fibers[t].resolution).fold(0.0, f64::max);
    let last = *tail.last().expect("nonempty");
    let mut suffix: Vec<FiberCloud> = Vec::with_capacity(tail.len());
    let mut acc = fibers[&last].clone();
    suffix.push(acc.clone());
    for t in tail.iter().rev().skip(1) {
        acc = FiberCloud::union(last, [&acc, &fibers[t]], res)?;
        suffix.push(acc.clone());
    }
    suffix.reverse();
    let mut trace = Trace::new(tol);
    for (k, w) in suffix.windows(2).enumerate() {
        trace.entries.push((tail[k + 1], hausdorff_dist(&w[0], &w[1])?));
    }
    let mid = tail.len() / 2;
    let converged = trace.entries[mid.saturating_sub(1)..].iter().all(|e| e.1 < tol);
    let mut out = suffix.swap_remove(mid);
    out.provenance = Provenance::Closure;
    trace.converged = converged;
    Ok((out, trace))
}
