use std::collections::BTreeMap;
use std::sync::Arc;

use idescope_process::{sup_dist, Domain, Error, Metadata, ModelSpec, Result, StateVector};

use crate::kernel::{max_row_sum, split_row_integral};
use crate::operators::{Growth, KernelForm, UrysohnOperator};
use crate::quadrature::{GaussLegendre, Habitat, Quadrature};

/// (H1)–(H4) constants at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisBounds {
    pub gamma: f64,
    pub ell: f64,
    /// max_i Σ_j W_ij κ_t(x_i, x_j) under the operator's own weights.
    pub rho: f64,
    pub lambda_sup: f64,
    /// sup_x ∫ κ_t(x, y) dy, closed form when known, otherwise split-integrated at the nodes.
    pub rho_reference: Option<f64>,
    pub lambda_reference: Option<f64>,
}

/// u_{t+1}(x) = g_t(x, u_t(x)) + ∫ k_t(x, y, u_t(y)) dy, discretized.
#[derive(Clone)]
pub struct IdeSystem {
    pub growth: Growth,
    pub operator: UrysohnOperator,
}

impl IdeSystem {
    pub fn new(growth: Growth, operator: UrysohnOperator) -> Self {
        Self { growth, operator }
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.operator.quad
    }

    pub fn step_values(&self, t: i64, u: &[f64]) -> Vec<f64> {
        let k = self.operator.apply(t, u);
        let q = &self.operator.quad;
        q.nodes
            .iter()
            .zip(u)
            .zip(k)
            .map(|((x, z), ku)| (self.growth.g)(t, *x, *z) + ku)
            .collect()
    }

    /// Solve v = g_t(x, v) + (K_t u)(x; v) at off-node points x for a fixed point u of the
    /// discrete map, starting from linear interpolation.
    pub fn fixed_point_at(&self, t: i64, u: &[f64], xs: &[f64], tol: f64) -> Vec<f64> {
        let nodes = &self.operator.quad.nodes;
        xs.iter()
            .map(|&x| {
                let mut v = linear_interp(nodes, u, x);
                for _ in 0..200 {
                    let next = (self.growth.g)(t, x, v) + self.operator.interpolate(t, u, x, v);
                    let done = (next - v).abs() < tol;
                    v = next;
                    if done {
                        break;
                    }
                }
                v
            })
            .collect()
    }
}

fn linear_interp(nodes: &[f64], u: &[f64], x: f64) -> f64 {
    let k = nodes.partition_point(|n| *n < x);
    if k == 0 {
        return u[0];
    }
    if k == nodes.len() {
        return u[k - 1];
    }
    let (x0, x1) = (nodes[k - 1], nodes[k]);
    let s = (x - x0) / (x1 - x0);
    u[k - 1] * (1.0 - s) + u[k] * s
}

pub fn hypothesis_bounds(g: &Growth, op: &UrysohnOperator, t: i64) -> Result<HypothesisBounds> {
    let (Some(gamma), Some(ell)) = (&g.gamma, &g.ell) else {
        return Err(Error::MissingMetadata("growth bounds γ_t, ℓ_t".into()));
    };
    let q = &op.quad;
    let (rho, lambda_sup, rho_reference, lambda_reference) = match &op.spec.form {
        KernelForm::Separable {
            base,
            coeff,
            profile_bound,
            profile_lipschitz,
            additive,
            additive_sup,
            ..
        } => {
            let w = op.weight_matrix().expect("separable operators carry weights");
            let c = coeff(t).abs();
            let (b, l) = (profile_bound(t).abs(), profile_lipschitz(t).abs());
            let scale = q.weights.iter().sum::<f64>() / q.measure_total;
            let mut rho = 0.0_f64;
            let mut row_max = 0.0_f64;
            for i in 0..q.len() {
                let row: f64 = w.row(i).iter().map(|v| v.abs()).sum();
                let e = additive.as_ref().map_or(0.0, |e| e(t, q.nodes[i]).abs() * scale);
                rho = rho.max(c * b * row + e);
                row_max = row_max.max(row);
            }
            let mass = match q.habitat {
                Habitat::Interval { lo, hi } => base.sup_row_mass(lo, hi).or_else(|| {
                    q.nodes
                        .iter()
                        .map(|&x| split_row_integral(base, x, lo, hi, &GaussLegendre, 48).ok())
                        .try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))
                }),
                Habitat::Countable => None,
            };
            let e_sup = match (additive, additive_sup) {
                (None, _) => Some(0.0),
                (Some(_), Some(s)) => Some(s(t).abs()),
                (Some(_), None) => None,
            };
            let rho_ref = mass.zip(e_sup).map(|(m, e)| c * b * m + e);
            let lambda_ref = mass.map(|m| c * l * m);
            (rho, c * l * row_max, rho_ref, lambda_ref)
        }
        KernelForm::General { kappa, lambda, .. } => {
            let (Some(kappa), Some(lambda)) = (kappa, lambda) else {
                return Err(Error::MissingMetadata("custom kernel without declared κ_t, λ_t".into()));
            };
            let row = |f: &dyn Fn(i64, f64, f64) -> f64| {
                q.nodes
                    .iter()
                    .map(|&x| {
                        q.nodes
                            .iter()
                            .zip(&q.weights)
                            .map(|(&y, &w)| w * f(t, x, y))
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max)
            };
            (row(&**kappa), row(&**lambda), None, None)
        }
    };
    Ok(HypothesisBounds {
        gamma: gamma(t),
        ell: ell(t),
        rho,
        lambda_sup,
        rho_reference,
        lambda_reference,
    })
}

/// Assemble the discretized equation as a process model.
pub fn ide_model(id: impl Into<String>, system: &IdeSystem, domain: Domain) -> ModelSpec {
    let sys = system.clone();
    let n = sys.operator.len();
    let rhs = move |t: i64, u: &[f64]| sys.step_values(t, u);

    let mut meta = Metadata {
        gamma: system.growth.gamma.clone(),
        ell: system.growth.ell.clone(),
        darbo: system.growth.ell.clone(),
        nodes: Some(Arc::new(system.quadrature().nodes.clone())),
        ..Metadata::default()
    };
    if hypothesis_bounds(&system.growth, &system.operator, 0).is_ok() {
        let (g, op) = (system.growth.clone(), system.operator.clone());
        meta.rho = Some(Arc::new(move |t| {
            hypothesis_bounds(&g, &op, t).map(|b| b.rho).unwrap_or(f64::NAN)
        }));
    }
    ModelSpec::new(id, n, domain, rhs).with_metadata(meta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsorbingVariant {
    /// With a Nemytskii part: radius γ_{t⋆} + ρ_{t⋆}, absorption time 1.
    Nemytskii,
    /// Pure Urysohn: radius sup_t ρ_t, absorption time 2.
    Urysohn,
}

pub fn absorbing_bound(bounds: &BTreeMap<i64, HypothesisBounds>, t: i64, variant: AbsorbingVariant) -> Result<f64> {
    match variant {
        AbsorbingVariant::Nemytskii => {
            let first = bounds.keys().next().copied();
            let b = bounds
                .get(&(t - 1))
                .or_else(|| if first == Some(t) { bounds.get(&t) } else { None })
                .ok_or_else(|| Error::MissingMetadata(format!("hypothesis bounds at t⋆ = {}", t - 1)))?;
            Ok(b.gamma + b.rho)
        }
        AbsorbingVariant::Urysohn => {
            if bounds.is_empty() {
                return Err(Error::MissingMetadata("hypothesis bounds sequence".into()));
            }
            Ok(bounds.values().map(|b| b.rho).fold(0.0, f64::max))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub u_star: StateVector,
    /// ‖u_{k+1} − u_k‖₀ per iteration.
    pub diffs: Vec<f64>,
    /// ‖u_{k+1} − u_k‖₀ / ‖u_k − u_{k−1}‖₀.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

/// Picard iteration of an autonomous model until successive iterates differ by less than tol.
pub fn fixed_point_iterate(model: &ModelSpec, u0: &StateVector, tol: f64, max_iter: usize) -> Result<FixedPointReport> {
    if !model.is_autonomous() {
        return Err(Error::Precondition(format!("{} is not autonomous", model.id())));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tol = {tol} must be positive")));
    }
    let t = model.time_domain().clamp_start(0);
    let mut u = u0.values.clone();
    let mut diffs = Vec::new();
    let mut ratios = Vec::new();
    for _ in 0..max_iter {
        let next = model.apply(t, &u)?;
        let d = sup_dist(&next, &u);
        if let Some(&prev) = diffs.last() {
            if prev > 0.0 {
                ratios.push(d / prev);
            }
        }
        diffs.push(d);
        u = next;
        if d < tol {
            return Ok(FixedPointReport {
                u_star: model.state(u),
                diffs,
                ratios,
                converged: true,
            });
        }
    }
    Ok(FixedPointReport {
        u_star: model.state(u),
        diffs,
        ratios,
        converged: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessCheck {
    /// 2(1+e^{−2})α < (1−α)/K
    pub general: bool,
    pub general_slack: f64,
    /// 2(1+e^{−2})α·e^{1/(1−α)} < 1−α
    pub displayed: bool,
    pub displayed_slack: f64,
}

/// Smallness condition for the asymptotically autonomous Ricker equation with
/// α_t = α_+(1 + α^t), α = α_+γ, so that sup α_t = 2α_+.
pub fn ricker_smallness_check(alpha: f64, k: f64) -> Result<SmallnessCheck> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("α = {alpha} must lie in (0, 1)")));
    }
    if !(k >= 1.0) {
        return Err(Error::invalid(format!("K = {k} must be ≥ 1")));
    }
    let lhs = 2.0 * (1.0 + (-2.0_f64).exp()) * alpha;
    let general_slack = (1.0 - alpha) / k - lhs;
    let displayed_slack = (1.0 - alpha) - lhs * (1.0 / (1.0 - alpha)).exp();
    Ok(SmallnessCheck {
        general: general_slack > 0.0,
        general_slack,
        displayed: displayed_slack > 0.0,
        displayed_slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTable {
    pub n: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    /// sup-norm difference between consecutive refinements.
    pub diffs: Vec<f64>,
    pub decreasing: bool,
}

/// Evaluate an observable (sampled on points common to every n) along a refinement sequence.
pub fn refine_and_compare(n_list: &[usize], observable: &dyn Fn(usize) -> Result<Vec<f64>>) -> Result<RefinementTable> {
    if n_list.len() < 2 || n_list.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::invalid("n_list must be increasing with at least two entries"));
    }
    let values = n_list.iter().map(|&n| observable(n)).collect::<Result<Vec<_>>>()?;
    let diffs: Vec<f64> = values.windows(2).map(|p| sup_dist(&p[0], &p[1])).collect();
    let decreasing = diffs.windows(2).all(|p| p[1] <= p[0]);
    Ok(RefinementTable {
        n: n_list.to_vec(),
        values,
        diffs,
        decreasing,
    })
}

/// max_i Σ_j |W_ij| of the operator's weight matrix, the discrete γ of the kernel.
pub fn discrete_row_sum_max(op: &UrysohnOperator) -> Option<f64> {
    op.weight_matrix().map(max_row_sum)
}
