//! Semilinear structure u_{t+1} = L_t u_t + N_t(u_t): transition operators, variation of
//! constants, Grönwall-type growth bounds and absorbing radii.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use idescope_process::SemilinearParams;
use idescope_process::{Domain, Error, Metadata, ModelSpec, Result};

pub type MatrixSeq = Arc<dyn Fn(i64) -> DMatrix<f64> + Send + Sync>;
pub type Nonlinearity = Arc<dyn Fn(i64, &[f64]) -> Vec<f64> + Send + Sync>;

/// The linear part t ↦ L_t.
#[derive(Clone)]
pub struct LinearPart {
    dim: usize,
    matrix_of: MatrixSeq,
}

impl LinearPart {
    pub fn new<F>(dim: usize, matrix_of: F) -> Self
    where
        F: Fn(i64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            matrix_of: Arc::new(matrix_of),
        }
    }

    pub fn scalar<F>(coef: F) -> Self
    where
        F: Fn(i64) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, move |t| DMatrix::from_element(1, 1, coef(t)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, t: i64) -> Result<DMatrix<f64>> {
        let m = (self.matrix_of)(t);
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: m.nrows().max(m.ncols()),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite entry in L_{t}")));
        }
        Ok(m)
    }
}

/// Φ(t,τ) = L_{t−1}···L_τ, the identity for t = τ.
pub fn transition_matrix(lin: &LinearPart, t: i64, tau: i64) -> Result<DMatrix<f64>> {
    continue_transition(lin, t, tau, DMatrix::identity(lin.dim, lin.dim))
}

/// Extend the fold Φ(s,τ) to Φ(t,τ) by left-multiplying L_s, …, L_{t−1}.
pub fn continue_transition(lin: &LinearPart, t: i64, s: i64, phi_s: DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s > t {
        return Err(Error::Ordering { from: s, to: t });
    }
    let mut phi = phi_s;
    for r in s..t {
        phi = lin.at(r)? * phi;
    }
    Ok(phi)
}

fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// Φ(t,τ)u + Σ_{s=τ}^{t−1} Φ(t,s+1) N_s(φ(s;τ,u)), with φ evolved recursively.
pub fn voc_evolve(
    lin: &LinearPart,
    nonlin: &dyn Fn(i64, &[f64]) -> Vec<f64>,
    tau: i64,
    t: i64,
    u: &[f64],
) -> Result<Vec<f64>> {
    if tau > t {
        return Err(Error::Ordering { from: tau, to: t });
    }
    let d = lin.dim;
    check_dim(d, u)?;

    let mut forcing = Vec::with_capacity((t - tau) as usize);
    let mut x = DVector::from_column_slice(u);
    for s in tau..t {
        let n = nonlin(s, x.as_slice());
        check_dim(d, &n)?;
        let n = DVector::from_vec(n);
        x = lin.at(s)? * x + &n;
        forcing.push(n);
    }

    // Accumulate Φ(t,s+1) backwards so each term costs one product.
    let mut phi = DMatrix::<f64>::identity(d, d);
    let mut sum = DVector::<f64>::zeros(d);
    for (k, n) in forcing.iter().enumerate().rev() {
        let s = tau + k as i64;
        sum += &phi * n;
        phi *= lin.at(s)?;
    }
    let out = phi * DVector::from_column_slice(u) + sum;
    Ok(out.as_slice().to_vec())
}

/// Assemble u_{t+1} = L_t u_t + N_t(u_t) as a process model.
pub fn semilinear_model(
    id: impl Into<String>,
    lin: LinearPart,
    nonlin: Nonlinearity,
    domain: Domain,
    params: Option<SemilinearParams>,
) -> ModelSpec {
    let d = lin.dim;
    let rhs = move |t: i64, u: &[f64]| {
        let l = (lin.matrix_of)(t);
        let n = nonlin(t, u);
        let lu = l * DVector::from_column_slice(u);
        lu.iter().zip(&n).map(|(a, b)| a + b).collect()
    };
    ModelSpec::new(id, d, domain, rhs).with_metadata(Metadata {
        semilinear: params,
        ..Metadata::default()
    })
}

fn validate(params: &SemilinearParams) -> Result<()> {
    if !(params.k >= 1.0) || !params.k.is_finite() {
        return Err(Error::invalid(format!("K = {} must be finite and ≥ 1", params.k)));
    }
    Ok(())
}

fn growth_factor(params: &SemilinearParams, r: i64) -> Result<f64> {
    let alpha = (params.alpha)(r);
    let a = (params.a)(r);
    if !(alpha >= 0.0 && a >= 0.0 && alpha.is_finite() && a.is_finite()) {
        return Err(Error::invalid(format!(
            "α_{r} = {alpha}, a_{r} = {a} must be finite and ≥ 0"
        )));
    }
    Ok(alpha + params.k * a)
}

fn forcing(params: &SemilinearParams, s: i64) -> Result<f64> {
    let b = (params.b)(s);
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("b_{s} = {b} must be finite and ≥ 0")));
    }
    Ok(b)
}

/// K‖u‖∏_{r=τ}^{t−1}(α_r+Ka_r) + K Σ_{s=τ}^{t−1} b_s ∏_{r=s+1}^{t−1}(α_r+Ka_r).
pub fn gronwall_bound(params: &SemilinearParams, tau: i64, t: i64, norm_u: f64) -> Result<f64> {
    validate(params)?;
    if tau > t {
        return Err(Error::Ordering { from: tau, to: t });
    }
    if !(norm_u >= 0.0) {
        return Err(Error::invalid(format!("norm {norm_u} must be ≥ 0")));
    }
    let k = params.k;
    // Backward sweep keeps ∏_{r=s+1}^{t−1} as a running product.
    let mut tail = 1.0;
    let mut sum = 0.0;
    for s in (tau..t).rev() {
        sum += forcing(params, s)? * tail;
        tail *= growth_factor(params, s)?;
    }
    Ok(k * norm_u * tail + k * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Pullback,
    Forward,
}

/// ρ + R_τ, where R_τ sums the forcing over the past of τ (pullback) or is the forward limit
/// of the forcing accumulated from τ.
pub fn absorbing_radius(
    params: &SemilinearParams,
    tau: i64,
    rho: f64,
    direction: Direction,
    truncation: usize,
    tol: f64,
) -> Result<f64> {
    validate(params)?;
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("ρ = {rho} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tol = {tol} must be positive")));
    }
    let k = params.k;
    match direction {
        Direction::Pullback => {
            let mut prod = 1.0;
            let mut sum = 0.0;
            for j in 1..=truncation as i64 {
                let s = tau - j;
                let inc = k * forcing(params, s)? * prod;
                sum += inc;
                prod *= growth_factor(params, s)?;
                if inc < tol && prod < tol {
                    return Ok(rho + sum);
                }
            }
            Err(Error::Divergence {
                what: "pullback absorbing radius".into(),
                partial: rho + sum,
                iterations: truncation,
            })
        }
        Direction::Forward => {
            let mut prod = 1.0;
            let mut acc = 0.0;
            for j in 0..truncation as i64 {
                let r = tau + j;
                let c = growth_factor(params, r)?;
                let next = c * acc + forcing(params, r)?;
                prod *= c;
                let inc = k * (next - acc).abs();
                acc = next;
                if inc < tol && prod < tol {
                    return Ok(rho + k * acc);
                }
            }
            Err(Error::Divergence {
                what: "forward absorbing radius".into(),
                partial: rho + k * acc,
                iterations: truncation,
            })
        }
    }
}

/// ∏_{s=τ}^{t−1} dar(G_s) from the model's declared Darbo constants.
pub fn darbo_bound(model: &ModelSpec, tau: i64, t: i64) -> Result<f64> {
    if tau > t {
        return Err(Error::Ordering { from: tau, to: t });
    }
    if tau == t {
        return Ok(1.0);
    }
    let dar = model
        .metadata
        .darbo
        .as_ref()
        .ok_or_else(|| Error::MissingMetadata(format!("Darbo constants of {}", model.id())))?;
    Ok((tau..t).map(|s| dar(s)).product())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Power iteration from the all-ones vector, normalized in the max-norm.
pub fn spectral_radius_estimate(m: &DMatrix<f64>, iterations: usize, tol: f64) -> Result<SpectralEstimate> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Empty("spectral radius of a 0×0 matrix".into()));
    }
    let mut x = DVector::from_element(m.nrows(), 1.0);
    let mut prev = f64::NAN;
    for it in 1..=iterations {
        let y = m * &x;
        let lambda = y.amax();
        if lambda == 0.0 {
            return Ok(SpectralEstimate {
                value: 0.0,
                converged: true,
                iterations: it,
            });
        }
        x = y / lambda;
        if (lambda - prev).abs() <= tol * lambda.max(1.0) {
            return Ok(SpectralEstimate {
                value: lambda,
                converged: true,
                iterations: it,
            });
        }
        prev = lambda;
    }
    Ok(SpectralEstimate {
        value: prev,
        converged: false,
        iterations,
    })
}
