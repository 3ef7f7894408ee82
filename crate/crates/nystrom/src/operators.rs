use std::sync::Arc;

use idescope_process::{Error, Result, Sequence, StateVector};
use nalgebra::DMatrix;

use crate::kernel::{DispersalKernel, NystromAssembly, PlainNystrom};
use crate::quadrature::Quadrature;

/// (t, x) ↦ value.
pub type Field = Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>;
/// (t, x, z) ↦ value.
pub type PointMap = Arc<dyn Fn(i64, f64, f64) -> f64 + Send + Sync>;
/// (t, x, y, z) ↦ value.
pub type UrysohnMap = Arc<dyn Fn(i64, f64, f64, f64) -> f64 + Send + Sync>;
/// (t, x, y) ↦ value.
pub type BoundKernel = Arc<dyn Fn(i64, f64, f64) -> f64 + Send + Sync>;

/// The Nemytskii part g_t(x, z) with its declared sup bound γ_t and Lipschitz constant ℓ_t.
#[derive(Clone)]
pub struct Growth {
    pub g: PointMap,
    pub gamma: Option<Sequence>,
    pub ell: Option<Sequence>,
}

impl Growth {
    pub fn zero() -> Self {
        Self {
            g: Arc::new(|_, _, _| 0.0),
            gamma: Some(idescope_process::constant(0.0)),
            ell: Some(idescope_process::constant(0.0)),
        }
    }

    pub fn is_declared(&self) -> bool {
        self.gamma.is_some() && self.ell.is_some()
    }
}

/// (G_t u)(x_i) = g_t(x_i, u(x_i)).
pub fn nemytskii_apply(g: &Growth, q: &Quadrature, t: i64, u: &StateVector) -> Result<StateVector> {
    if u.len() != q.len() {
        return Err(Error::Dimension {
            expected: q.len(),
            found: u.len(),
        });
    }
    u.domain.check(t, &u.values)?;
    let out: Vec<f64> = q.nodes.iter().zip(&u.values).map(|(x, z)| (g.g)(t, *x, *z)).collect();
    u.domain.check(t + 1, &out)?;
    Ok(StateVector::new(out, u.domain))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    LaplaceBh,
    Ricker,
    Custom,
}

/// Structure of the Urysohn kernel k_t(x, y, z).
#[derive(Clone)]
pub enum KernelForm {
    /// k_t(x,y,z) = c_t·k(x,y)·h_t(y,z) + e_t(x)/μ(Ω), with sup_z |h_t| ≤ B_t and
    /// Lip(h_t(y,·)) ≤ Λ_t.
    Separable {
        base: DispersalKernel,
        coeff: Sequence,
        profile: PointMap,
        profile_bound: Sequence,
        profile_lipschitz: Sequence,
        additive: Option<Field>,
        additive_sup: Option<Sequence>,
    },
    /// Arbitrary kernel; bounds only if κ_t and λ_t are declared.
    General {
        k: UrysohnMap,
        kappa: Option<BoundKernel>,
        lambda: Option<BoundKernel>,
    },
}

#[derive(Clone)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub form: KernelForm,
}

impl KernelSpec {
    pub fn eval(&self, t: i64, x: f64, y: f64, z: f64, measure: f64) -> f64 {
        match &self.form {
            KernelForm::Separable {
                base,
                coeff,
                profile,
                additive,
                ..
            } => {
                let e = additive.as_ref().map_or(0.0, |e| e(t, x) / measure);
                coeff(t) * base.eval(x, y) * profile(t, y, z) + e
            }
            KernelForm::General { k, .. } => k(t, x, y, z),
        }
    }
}

/// (K_t u)(x_i) = Σ_j w_j k_t(x_i, x_j, u(x_j)), evaluated term by term.
pub fn urysohn_apply(k: &KernelSpec, q: &Quadrature, t: i64, u: &StateVector) -> Result<StateVector> {
    if u.len() != q.len() {
        return Err(Error::Dimension {
            expected: q.len(),
            found: u.len(),
        });
    }
    let out = q
        .nodes
        .iter()
        .map(|&x| {
            q.nodes
                .iter()
                .zip(&q.weights)
                .zip(&u.values)
                .map(|((&y, &w), &z)| w * k.eval(t, x, y, z, q.measure_total))
                .sum()
        })
        .collect();
    Ok(StateVector::new(out, u.domain))
}

/// A Urysohn operator compiled against a quadrature: the weighted kernel matrix is built once.
#[derive(Clone)]
pub struct UrysohnOperator {
    pub spec: KernelSpec,
    pub quad: Arc<Quadrature>,
    pub assembly: &'static str,
    weights: Option<Arc<DMatrix<f64>>>,
    additive_scale: f64,
}

impl UrysohnOperator {
    pub fn new(spec: KernelSpec, quad: Quadrature, assembly: &dyn NystromAssembly) -> Self {
        let (weights, name) = match &spec.form {
            KernelForm::Separable { base, .. } => (Some(Arc::new(assembly.assemble(base, &quad))), assembly.name()),
            KernelForm::General { .. } => (None, PlainNystrom.name()),
        };
        let additive_scale = quad.weights.iter().sum::<f64>() / quad.measure_total;
        Self {
            spec,
            quad: Arc::new(quad),
            assembly: name,
            weights,
            additive_scale,
        }
    }

    pub fn len(&self) -> usize {
        self.quad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quad.is_empty()
    }

    /// The weighted dispersal matrix W, for separable kernels.
    pub fn weight_matrix(&self) -> Option<&DMatrix<f64>> {
        self.weights.as_deref()
    }

    pub fn apply(&self, t: i64, u: &[f64]) -> Vec<f64> {
        let q = &self.quad;
        match (&self.spec.form, &self.weights) {
            (
                KernelForm::Separable {
                    coeff,
                    profile,
                    additive,
                    ..
                },
                Some(w),
            ) => {
                let c = coeff(t);
                let h: Vec<f64> = q.nodes.iter().zip(u).map(|(y, z)| profile(t, *y, *z)).collect();
                (0..q.len())
                    .map(|i| {
                        let mut s = 0.0;
                        for (j, hj) in h.iter().enumerate() {
                            s += w[(i, j)] * hj;
                        }
                        let e = additive
                            .as_ref()
                            .map_or(0.0, |e| e(t, q.nodes[i]) * self.additive_scale);
                        c * s + e
                    })
                    .collect()
            }
            _ => urysohn_apply(
                &self.spec,
                q,
                t,
                &StateVector::new(u.to_vec(), idescope_process::Domain::Real),
            )
            .map(|s| s.values)
            .expect("dimension checked by caller"),
        }
    }

    /// Natural Nyström interpolant of K_t u at an off-node point x, where v stands for u(x).
    pub fn interpolate(&self, t: i64, u: &[f64], x: f64, v: f64) -> f64 {
        let q = &self.quad;
        match &self.spec.form {
            KernelForm::Separable {
                base,
                coeff,
                profile,
                additive,
                ..
            } => {
                let e = additive.as_ref().map_or(0.0, |e| e(t, x) * self.additive_scale);
                let mass = match q.habitat {
                    crate::quadrature::Habitat::Interval { lo, hi } if self.assembly != PlainNystrom.name() => {
                        base.row_mass(x, lo, hi)
                    }
                    _ => None,
                };
                let hx = profile(t, x, v);
                let mut s = 0.0;
                for ((y, w), z) in q.nodes.iter().zip(&q.weights).zip(u) {
                    let hy = profile(t, *y, *z);
                    s += w * base.eval(x, *y) * if mass.is_some() { hy - hx } else { hy };
                }
                if let Some(m) = mass {
                    s += hx * m;
                }
                coeff(t) * s + e
            }
            KernelForm::General { k, .. } => q
                .nodes
                .iter()
                .zip(&q.weights)
                .zip(u)
                .map(|((y, w), z)| w * k(t, x, *y, *z))
                .sum(),
        }
    }
}
