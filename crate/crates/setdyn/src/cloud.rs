use std::cmp::Ordering;

use idescope_process::{sup_dist, Error, ModelSpec, Result};
use rayon::prelude::*;

/// Points closer than this in the sup-norm are the same point.
pub const MERGE_TOL: f64 = 1e-12;

const PAR_THRESHOLD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Sampled,
    Iterated,
    Intersected,
    Closure,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Sampled => "sampled",
            Provenance::Iterated => "iterated",
            Provenance::Intersected => "intersected",
            Provenance::Closure => "closure",
        }
    }
}

/// Finite approximation of one fibre A(t).
///
/// Points are kept in lexicographic order with near-duplicates merged, so every cloud
/// operation is independent of the order in which points were supplied. A 1-dimensional
/// cloud flagged `connected` samples an interval; its images are again intervals, so gaps
/// wider than `resolution` are refilled after every map.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberCloud {
    pub time: i64,
    points: Vec<Vec<f64>>,
    pub resolution: f64,
    pub provenance: Provenance,
    pub connected: bool,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn canonicalize(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    points.sort_by(|a, b| lex(a, b));
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        let dup = kept
            .iter()
            .rev()
            .take_while(|q| q[0] >= p[0] - MERGE_TOL)
            .any(|q| sup_dist(q, &p) <= MERGE_TOL);
        if !dup {
            kept.push(p);
        }
    }
    kept
}

impl FiberCloud {
    pub fn new(time: i64, points: Vec<Vec<f64>>, resolution: f64, provenance: Provenance) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(Error::invalid(format!("resolution {resolution} must be positive")));
        }
        if points.is_empty() {
            return Err(Error::Empty(format!("cloud at t = {time}")));
        }
        let d = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                found: p.len(),
            });
        }
        Ok(Self {
            time,
            points: canonicalize(points),
            resolution,
            provenance,
            connected: false,
        })
    }

    /// An explicitly empty fibre.
    pub fn empty(time: i64, resolution: f64, provenance: Provenance) -> Self {
        Self {
            time,
            points: Vec::new(),
            resolution,
            provenance,
            connected: false,
        }
    }

    pub fn scalar(time: i64, values: &[f64], resolution: f64, provenance: Provenance) -> Result<Self> {
        Self::new(time, values.iter().map(|v| vec![*v]).collect(), resolution, provenance)
    }

    pub fn with_connected(mut self, connected: bool) -> Self {
        self.connected = connected && self.dim() == 1;
        if self.connected {
            self.normalize_interval();
        }
        self
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn sup_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| idescope_process::sup_norm(p))
            .fold(0.0, f64::max)
    }

    /// [min, max] of a 1-dimensional cloud.
    pub fn hull(&self) -> Option<(f64, f64)> {
        if self.dim() != 1 {
            return None;
        }
        Some((self.points[0][0], self.points[self.len() - 1][0]))
    }

    /// Drop points of a 1-dimensional cloud closer than resolution/2 to their kept
    /// predecessor; the extremes always survive.
    fn thin(&mut self) {
        if self.dim() != 1 || self.len() < 3 {
            return;
        }
        let half = 0.5 * self.resolution;
        let last = self.points[self.len() - 1].clone();
        let mut kept: Vec<Vec<f64>> = vec![self.points[0].clone()];
        for p in &self.points[1..self.len() - 1] {
            if p[0] - kept[kept.len() - 1][0] >= half {
                kept.push(p.clone());
            }
        }
        if last[0] - kept[kept.len() - 1][0] < half && kept.len() > 1 {
            kept.pop();
        }
        kept.push(last);
        self.points = kept;
    }

    /// Insert evenly spaced points into gaps wider than the resolution.
    fn fill_gaps(&mut self) {
        if self.dim() != 1 || self.len() < 2 {
            return;
        }
        let res = self.resolution;
        let mut out = Vec::with_capacity(self.len());
        for w in self.points.windows(2) {
            let (a, b) = (w[0][0], w[1][0]);
            out.push(vec![a]);
            let gap = b - a;
            if gap > res {
                let m = (gap / res).ceil() as usize;
                for k in 1..m {
                    out.push(vec![a + gap * k as f64 / m as f64]);
                }
            }
        }
        out.push(self.points[self.len() - 1].clone());
        self.points = out;
    }

    fn normalize_interval(&mut self) {
        self.thin();
        self.fill_gaps();
    }

    /// Union of clouds at one time; 1-dimensional unions are thinned to the resolution.
    /// A union of connected clouds without gaps wider than the resolution is connected.
    pub fn union<'a>(time: i64, clouds: impl IntoIterator<Item = &'a FiberCloud>, resolution: f64) -> Result<Self> {
        let clouds: Vec<&FiberCloud> = clouds.into_iter().collect();
        let all_connected = clouds.iter().all(|c| c.connected);
        let points: Vec<Vec<f64>> = clouds.iter().flat_map(|c| c.points.iter().cloned()).collect();
        let mut u = Self::new(time, points, resolution, Provenance::Closure)?;
        if all_connected && u.dim() == 1 && u.points.windows(2).all(|w| w[1][0] - w[0][0] <= resolution) {
            u.connected = true;
            u.normalize_interval();
        } else {
            u.thin();
        }
        Ok(u)
    }

    /// Points of self lying within tol of every cloud in `others`.
    pub fn filter_within(&self, others: &[&FiberCloud], tol: f64) -> Self {
        let keep: Vec<Vec<f64>> = self
            .points
            .par_iter()
            .filter(|p| others.iter().all(|o| o.nearest_dist(p) <= tol))
            .cloned()
            .collect();
        Self {
            time: self.time,
            points: keep,
            resolution: self.resolution,
            provenance: Provenance::Intersected,
            connected: false,
        }
    }

    /// min over cloud points of ‖p − q‖∞; lowest index wins ties.
    pub fn nearest(&self, p: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        if self.dim() == 1 {
            let x = p[0];
            let k = self.points.partition_point(|q| q[0] < x);
            let mut best: Option<(usize, f64)> = None;
            for i in [k.wrapping_sub(1), k] {
                if let Some(q) = self.points.get(i) {
                    let d = (q[0] - x).abs();
                    if best.is_none_or(|(bi, bd)| d < bd || (d == bd && i < bi)) {
                        best = Some((i, d));
                    }
                }
            }
            return best;
        }
        let mut best = (0, f64::INFINITY);
        for (i, q) in self.points.iter().enumerate() {
            let d = sup_dist(q, p);
            if d < best.1 {
                best = (i, d);
            }
        }
        Some(best)
    }

    pub fn nearest_dist(&self, p: &[f64]) -> f64 {
        self.nearest(p).map_or(f64::INFINITY, |(_, d)| d)
    }

    /// F_t applied pointwise; the image lives at time t + 1.
    pub fn map(&self, model: &ModelSpec, t: i64) -> Result<FiberCloud> {
        let images: Result<Vec<Vec<f64>>> = if self.len() >= PAR_THRESHOLD {
            self.points.par_iter().map(|p| model.apply(t, p)).collect()
        } else {
            self.points.iter().map(|p| model.apply(t, p)).collect()
        };
        let mut out = Self::new(t + 1, images?, self.resolution, Provenance::Iterated)?;
        out.connected = self.connected;
        if out.connected {
            out.normalize_interval();
        }
        Ok(out)
    }

    /// φ(t; self.time, ·) applied to the cloud.
    pub fn evolve(&self, model: &ModelSpec, t: i64) -> Result<FiberCloud> {
        if t < self.time {
            return Err(Error::Ordering { from: self.time, to: t });
        }
        let mut c = self.clone();
        for s in self.time..t {
            c = c.map(model, s)?;
        }
        Ok(c)
    }

    pub fn at_time(mut self, time: i64) -> Self {
        self.time = time;
        self
    }
}

/// dist(a, b) = max_{p∈a} min_{q∈b} ‖p − q‖∞.
///
/// Two connected clouds stand for the intervals they span, and their exact interval
/// semidistance is returned.
pub fn hausdorff_semidist(a: &FiberCloud, b: &FiberCloud) -> Result<f64> {
    if b.is_empty() {
        return Err(Error::Empty("semidistance to an empty cloud is undefined".into()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: b.dim(),
            found: a.dim(),
        });
    }
    if a.connected && b.connected {
        let ((a0, a1), (b0, b1)) = (a.hull().expect("connected"), b.hull().expect("connected"));
        return Ok((b0 - a0).max(a1 - b1).max(0.0));
    }
    let worst = if a.len() >= PAR_THRESHOLD {
        a.points.par_iter().map(|p| b.nearest_dist(p)).reduce(|| 0.0, f64::max)
    } else {
        a.points.iter().map(|p| b.nearest_dist(p)).fold(0.0, f64::max)
    };
    Ok(worst)
}

/// max of both semidistances.
pub fn hausdorff_dist(a: &FiberCloud, b: &FiberCloud) -> Result<f64> {
    Ok(hausdorff_semidist(a, b)?.max(hausdorff_semidist(b, a)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> FiberCloud {
        let v: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        FiberCloud::scalar(0, &v, (hi - lo) / n as f64, Provenance::Sampled).unwrap()
    }

    #[test]
    fn interval_semidistances() {
        let a = grid(0.0, 2.0, 200);
        let b = grid(0.0, 1.0, 100);
        assert_eq!(hausdorff_semidist(&a, &a).unwrap(), 0.0);
        assert!((hausdorff_semidist(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(hausdorff_semidist(&b, &a).unwrap(), 0.0);
        let empty = FiberCloud::empty(0, 0.1, Provenance::Intersected);
        assert!(hausdorff_semidist(&a, &empty).is_err());
        assert_eq!(hausdorff_semidist(&empty, &a).unwrap(), 0.0);
    }

    #[test]
    fn duplicates_merge() {
        let c = FiberCloud::new(
            0,
            vec![
                vec![1.0, 2.0],
                vec![1.0 + 1e-13, 2.0],
                vec![0.0, 5.0],
                vec![1.0, 2.0 - 5e-13],
            ],
            0.1,
            Provenance::Sampled,
        )
        .unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.points()[0], vec![0.0, 5.0]);
    }

    #[test]
    fn connected_clouds_stay_dense() {
        let c = FiberCloud::scalar(0, &[0.0, 1.0], 0.1, Provenance::Sampled)
            .unwrap()
            .with_connected(true);
        let pts = c.points();
        assert_eq!(pts.first().unwrap()[0], 0.0);
        assert_eq!(pts.last().unwrap()[0], 1.0);
        assert!(pts.windows(2).all(|w| w[1][0] - w[0][0] <= 0.1 + 1e-15));
        assert!(pts.windows(2).all(|w| w[1][0] - w[0][0] >= 0.05 - 1e-15));
    }
}
