use std::f64::consts::PI;

use idescope_process::{Error, Result};

/// A rule producing n nodes and positive weights on [lo, hi].
pub trait QuadratureRule: Send + Sync {
    fn name(&self) -> &'static str;
    fn nodes_weights(&self, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>);
}

pub struct Midpoint;
pub struct Trapezoid;
pub struct GaussLegendre;

impl QuadratureRule for Midpoint {
    fn name(&self) -> &'static str {
        "midpoint"
    }

    fn nodes_weights(&self, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (hi - lo) / n as f64;
        let nodes = (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect();
        (nodes, vec![h; n])
    }
}

impl QuadratureRule for Trapezoid {
    fn name(&self) -> &'static str {
        "trapezoid"
    }

    fn nodes_weights(&self, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (hi - lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        nodes[n - 1] = hi;
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        (nodes, weights)
    }
}

impl QuadratureRule for GaussLegendre {
    fn name(&self) -> &'static str {
        "gauss_legendre"
    }

    fn nodes_weights(&self, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton from the Tricomi initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = mid - half * x;
            nodes[n - 1 - i] = mid + half * x;
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        (nodes, weights)
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn rules() -> Vec<Box<dyn QuadratureRule>> {
    vec![Box::new(Midpoint), Box::new(Trapezoid), Box::new(GaussLegendre)]
}

pub fn rule_by_name(name: &str) -> Result<Box<dyn QuadratureRule>> {
    rules()
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| Error::invalid(format!("unknown quadrature rule `{name}`")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Habitat {
    Interval {
        lo: f64,
        hi: f64,
    },
    /// An explicit weighted node set (countable Ω).
    Countable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub habitat: Habitat,
    pub measure_total: f64,
    pub rule: String,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted node set of a countable habitat; μ(Ω) is the weight sum.
    pub fn from_nodes(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::invalid(
                "node and weight lists must be nonempty and equally long",
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be positive and finite"));
        }
        let mut sorted = nodes.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::invalid("nodes must be pairwise distinct"));
        }
        let measure_total = weights.iter().sum();
        Ok(Self {
            nodes,
            weights,
            habitat: Habitat::Countable,
            measure_total,
            rule: "explicit".into(),
        })
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Nodes and weights on [lo, hi], weights rescaled so they sum to hi − lo.
pub fn build_quadrature(lo: f64, hi: f64, n: usize, rule: &dyn QuadratureRule) -> Result<Quadrature> {
    if n < 2 {
        return Err(Error::invalid(format!("quadrature needs n ≥ 2, got {n}")));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("habitat [{lo}, {hi}] is not a proper interval")));
    }
    let (nodes, mut weights) = rule.nodes_weights(lo, hi, n);
    let length = hi - lo;
    let sum: f64 = weights.iter().sum();
    let scale = length / sum;
    for w in &mut weights {
        *w *= scale;
    }
    Ok(Quadrature {
        nodes,
        weights,
        habitat: Habitat::Interval { lo, hi },
        measure_total: length,
        rule: rule.name().into(),
    })
}
