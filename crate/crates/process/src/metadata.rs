use std::fmt;
use std::sync::Arc;

/// A real sequence indexed by time.
pub type Sequence = Arc<dyn Fn(i64) -> f64 + Send + Sync>;

pub fn constant(v: f64) -> Sequence {
    Arc::new(move |_| v)
}

/// Growth data for u_{t+1} = L_t u + N_t(u): ‖Φ(t,s)‖ ≤ K∏α_r and ‖N_t(u)‖ ≤ b_t + a_t‖u‖.
#[derive(Clone)]
pub struct SemilinearParams {
    pub k: f64,
    pub alpha: Sequence,
    pub a: Sequence,
    pub b: Sequence,
}

impl SemilinearParams {
    pub fn constant(k: f64, alpha: f64, a: f64, b: f64) -> Self {
        Self {
            k,
            alpha: constant(alpha),
            a: constant(a),
            b: constant(b),
        }
    }
}

impl fmt::Debug for SemilinearParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemilinearParams")
            .field("k", &self.k)
            .field("alpha(0)", &(self.alpha)(0))
            .field("a(0)", &(self.a)(0))
            .field("b(0)", &(self.b)(0))
            .finish()
    }
}

/// Analytic side information attached to a model. Every field is optional.
#[derive(Clone, Default)]
pub struct Metadata {
    /// Sup bound γ_t of the Nemytskii part.
    pub gamma: Option<Sequence>,
    /// Lipschitz constant ℓ_t of the Nemytskii part.
    pub ell: Option<Sequence>,
    /// Sup-integral ρ_t of the kernel bound κ_t.
    pub rho: Option<Sequence>,
    /// Darbo constants dar(G_t).
    pub darbo: Option<Sequence>,
    pub semilinear: Option<SemilinearParams>,
    /// Habitat nodes when the state is a function sampled on a quadrature.
    pub nodes: Option<Arc<Vec<f64>>>,
}

impl fmt::Debug for Metadata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Metadata")
            .field("gamma", &self.gamma.is_some())
            .field("ell", &self.ell.is_some())
            .field("rho", &self.rho.is_some())
            .field("darbo", &self.darbo.is_some())
            .field("semilinear", &self.semilinear)
            .field("nodes", &self.nodes.as_ref().map(|n| n.len()))
            .finish()
    }
}
