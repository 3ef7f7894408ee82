use idescope_process::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{FiberCloud, Provenance};

/// Grids larger than this are refused; use `sample_random` for high dimensions.
pub const MAX_GRID_POINTS: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    Interval {
        lo: f64,
        hi: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Closed ball in the sup-norm.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Points(Vec<Vec<f64>>),
}

impl SetDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            SetDescriptor::Interval { .. } => 1,
            SetDescriptor::Box { lo, .. } => lo.len(),
            SetDescriptor::Ball { center, .. } => center.len(),
            SetDescriptor::Points(p) => p.first().map_or(0, |p| p.len()),
        }
    }

    /// Bounding box, or None for a point list.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            SetDescriptor::Interval { lo, hi } => Some((vec![*lo], vec![*hi])),
            SetDescriptor::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            SetDescriptor::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            SetDescriptor::Points(_) => None,
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        match self.bounds() {
            Some((lo, hi)) => {
                p.len() == lo.len()
                    && p.iter()
                        .zip(lo.iter().zip(&hi))
                        .all(|(x, (l, h))| *x >= l - tol && *x <= h + tol)
            }
            None => match self {
                SetDescriptor::Points(pts) => pts.iter().any(|q| idescope_process::sup_dist(q, p) <= tol),
                _ => unreachable!(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some((lo, hi)) = self.bounds() {
            if lo.len() != hi.len() || lo.is_empty() {
                return Err(Error::invalid("box bounds must be nonempty and of equal length"));
            }
            if let Some(k) = (0..lo.len()).find(|&k| !(lo[k] <= hi[k]) || !lo[k].is_finite() || !hi[k].is_finite()) {
                return Err(Error::invalid(format!(
                    "degenerate bounds in coordinate {k}: [{}, {}]",
                    lo[k], hi[k]
                )));
            }
        }
        Ok(())
    }
}

/// Grid-plus-jitter sample with mesh at most `resolution`.
///
/// Each coordinate is split into segments of width h ≤ resolution; interior grid nodes
/// move by at most h/4, boundary nodes stay put, so every corner is sampled exactly and
/// every point of the set lies within 3h/4 of a sample.
pub fn sample_set(desc: &SetDescriptor, resolution: f64, seed: u64, time: i64) -> Result<FiberCloud> {
    if !(resolution > 0.0) {
        return Err(Error::invalid(format!("resolution {resolution} must be positive")));
    }
    desc.validate()?;
    let (lo, hi) = match desc {
        SetDescriptor::Points(p) => return FiberCloud::new(time, p.clone(), resolution, Provenance::Sampled),
        d => d.bounds().expect("non-point descriptors have bounds"),
    };
    let d = lo.len();
    let segments: Vec<usize> = (0..d).map(|k| ((hi[k] - lo[k]) / resolution).ceil() as usize).collect();
    let total = segments
        .iter()
        .try_fold(1usize, |acc, m| acc.checked_mul(m + 1))
        .filter(|&n| n <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::invalid(format!(
                "grid at resolution {resolution} exceeds {MAX_GRID_POINTS} points; sample randomly instead"
            ))
        })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let p: Vec<f64> = (0..d)
            .map(|k| {
                let m = segments[k];
                if m == 0 {
                    return lo[k];
                }
                let h = (hi[k] - lo[k]) / m as f64;
                let i = idx[k];
                if i == 0 {
                    lo[k]
                } else if i == m {
                    hi[k]
                } else {
                    lo[k] + i as f64 * h + rng.gen_range(-0.25..0.25) * h
                }
            })
            .collect();
        points.push(p);
        for k in 0..d {
            idx[k] += 1;
            if idx[k] <= segments[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(FiberCloud::new(time, points, resolution, Provenance::Sampled)?.with_connected(true))
}

/// `count` uniform samples of a bounded descriptor plus its two extreme corners and centre.
/// The nominal resolution is the sup-diameter, since no covering is guaranteed.
pub fn sample_random(desc: &SetDescriptor, count: usize, seed: u64, time: i64) -> Result<FiberCloud> {
    desc.validate()?;
    let (lo, hi) = match desc {
        SetDescriptor::Points(p) => {
            let diam = p
                .iter()
                .flat_map(|a| p.iter().map(move |b| idescope_process::sup_dist(a, b)))
                .fold(0.0, f64::max);
            return FiberCloud::new(time, p.clone(), diam.max(f64::MIN_POSITIVE), Provenance::Sampled);
        }
        d => d.bounds().expect("non-point descriptors have bounds"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![
        lo.clone(),
        hi.clone(),
        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect(),
    ];
    for _ in 0..count {
        points.push(
            lo.iter()
                .zip(&hi)
                .map(|(a, b)| if a < b { rng.gen_range(*a..=*b) } else { *a })
                .collect(),
        );
    }
    let diam = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    FiberCloud::new(time, points, diam.max(f64::MIN_POSITIVE), Provenance::Sampled)
}

/// How source fibres are turned into clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    Grid { resolution: f64, seed: u64 },
    Random { count: usize, seed: u64 },
}

impl Sampling {
    pub fn sample(&self, desc: &SetDescriptor, time: i64) -> Result<FiberCloud> {
        match *self {
            Sampling::Grid { resolution, seed } => sample_set(desc, resolution, stream_seed(seed, time), time),
            Sampling::Random { count, seed } => sample_random(desc, count, stream_seed(seed, time), time),
        }
    }
}

/// Counter-based split of one seed into independent per-index streams.
pub fn stream_seed(seed: u64, index: i64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen()
}
