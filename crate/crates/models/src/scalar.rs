use std::sync::Arc;

use idescope_process::{constant, DiscreteInterval, Domain, Error, Metadata, ModelSpec, Result, SemilinearParams};
use serde::{Deserialize, Serialize};

use crate::{parse, Instance, ModelFamily, ParamDoc, StateBox};

fn positive(family: &str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{family}: {name} = {v} must be positive and finite"
        )))
    }
}

/// u ↦ a·u/(1+u)
pub(crate) fn bh_map(a: f64, u: f64) -> f64 {
    a * u / (1.0 + u)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearParams {
    pub alpha: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

/// u_{t+1} = α u_t + α^t on t ≥ 0.
pub struct LinearExninv;

impl ModelFamily for LinearExninv {
    fn name(&self) -> &'static str {
        "linear_exninv"
    }

    fn summary(&self) -> &'static str {
        "scalar u_{t+1} = alpha*u_t + alpha^t on t >= 0; limit fibres {0} for 0 < alpha < 1"
    }

    fn params(&self) -> &'static [ParamDoc] {
        &[ParamDoc {
            name: "alpha",
            default: "0.5",
            doc: "linear coefficient and forcing base",
        }]
    }

    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance> {
        let p: LinearParams = parse(self.name(), params)?;
        if !p.alpha.is_finite() {
            return Err(Error::invalid("linear_exninv: alpha must be finite"));
        }
        let alpha = p.alpha;
        let model = ModelSpec::new(self.name(), 1, Domain::Real, move |t, u| {
            vec![alpha * u[0] + alpha.powi(t as i32)]
        })
        .with_time_domain(DiscreteInterval::from(0))
        .with_metadata(Metadata {
            semilinear: Some(SemilinearParams {
                k: 1.0,
                alpha: constant(alpha.abs()),
                a: constant(0.0),
                b: Arc::new(move |t| alpha.abs().powi(t as i32)),
            }),
            ..Metadata::default()
        })
        .with_params(serde_json::to_value(&p).expect("plain struct"));
        Ok(Instance {
            model,
            system: None,
            source: Some(StateBox::uniform(1, -2.0, 2.0)),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BhAutonomousParams {
    pub alpha: f64,
}

impl Default for BhAutonomousParams {
    fn default() -> Self {
        Self { alpha: 3.0 }
    }
}

/// u_{t+1} = α u_t / (1 + u_t).
pub struct BhAutonomous;

impl ModelFamily for BhAutonomous {
    fn name(&self) -> &'static str {
        "bh_autonomous"
    }

    fn summary(&self) -> &'static str {
        "autonomous Beverton-Holt u -> alpha*u/(1+u); attractor [0, alpha-1] for alpha > 1"
    }

    fn params(&self) -> &'static [ParamDoc] {
        &[ParamDoc {
            name: "alpha",
            default: "3.0",
            doc: "growth rate, > 0",
        }]
    }

    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance> {
        let p: BhAutonomousParams = parse(self.name(), params)?;
        positive(self.name(), "alpha", p.alpha)?;
        let alpha = p.alpha;
        let model = ModelSpec::new(self.name(), 1, Domain::NonnegativeCone, move |_, u| {
            vec![bh_map(alpha, u[0])]
        })
        .with_period(1)
        .with_params(serde_json::to_value(&p).expect("plain struct"));
        Ok(Instance {
            model,
            system: None,
            source: Some(StateBox::uniform(1, 0.0, alpha + 1.0)),
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BhPiecewiseParams {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
}

impl Default for BhPiecewiseParams {
    fn default() -> Self {
        Self {
            alpha_minus: 0.5,
            alpha_plus: 3.0,
        }
    }
}

impl BhPiecewiseParams {
    pub fn new(alpha_minus: f64, alpha_plus: f64) -> Self {
        Self {
            alpha_minus,
            alpha_plus,
        }
    }

    /// ã_t: α_− before time 0, α_+ from time 0 on.
    pub fn coef(&self, t: i64) -> f64 {
        if t < 0 {
            self.alpha_minus
        } else {
            self.alpha_plus
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("bh_piecewise", "alpha_minus", self.alpha_minus)?;
        positive("bh_piecewise", "alpha_plus", self.alpha_plus)
    }
}

/// Beverton-Holt with growth rate switching from α_− to α_+ at t = 0.
pub struct BhPiecewise;

impl ModelFamily for BhPiecewise {
    fn name(&self) -> &'static str {
        "bh_piecewise"
    }

    fn summary(&self) -> &'static str {
        "Beverton-Holt with rate alpha_minus for t < 0 and alpha_plus for t >= 0"
    }

    fn params(&self) -> &'static [ParamDoc] {
        &[
            ParamDoc {
                name: "alpha_minus",
                default: "0.5",
                doc: "rate before time 0, > 0",
            },
            ParamDoc {
                name: "alpha_plus",
                default: "3.0",
                doc: "rate from time 0 on, > 0",
            },
        ]
    }

    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance> {
        let p: BhPiecewiseParams = parse(self.name(), params)?;
        p.validate()?;
        let model = ModelSpec::new(self.name(), 1, Domain::NonnegativeCone, move |t, u| {
            vec![bh_map(p.coef(t), u[0])]
        })
        .with_params(serde_json::to_value(p).expect("plain struct"));
        let top = p.alpha_minus.max(p.alpha_plus) + 1.0;
        Ok(Instance {
            model,
            system: None,
            source: Some(StateBox::uniform(1, 0.0, top)),
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BhAsyParams {
    pub alpha: f64,
    pub c: f64,
    /// Exponent of f_t = (t + c)^n; 0 gives constant f.
    pub n: u32,
}

impl Default for BhAsyParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            c: 1.0,
            n: 1,
        }
    }
}

impl BhAsyParams {
    pub fn new(alpha: f64, c: f64, n: u32) -> Self {
        Self { alpha, c, n }
    }

    pub fn f(&self, t: i64) -> f64 {
        (t as f64 + self.c).powi(self.n as i32)
    }

    /// ln f_t
    pub fn ln_f(&self, t: i64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.n as f64 * (t as f64 + self.c).ln()
    }

    /// ã_t = (f_{t+1}/f_t)·α
    pub fn coef(&self, t: i64) -> f64 {
        if self.n == 0 {
            return self.alpha;
        }
        ((t as f64 + 1.0 + self.c) / (t as f64 + self.c)).powi(self.n as i32) * self.alpha
    }

    /// First time with f_t > 0.
    pub fn first_time(&self) -> i64 {
        if self.n == 0 {
            i64::MIN
        } else {
            (-self.c).floor() as i64 + 1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("bh_asy: alpha = {} must exceed 1", self.alpha)));
        }
        if !self.c.is_finite() {
            return Err(Error::invalid("bh_asy: c must be finite"));
        }
        if self.n > 4 {
            return Err(Error::invalid(format!("bh_asy: n = {} must lie in 0..=4", self.n)));
        }
        Ok(())
    }

    pub fn check_range(&self, from: i64) -> Result<()> {
        if self.n > 0 && from < self.first_time() {
            return Err(Error::invalid(format!(
                "bh_asy: f_t = (t + {})^{} is not positive at t = {from}",
                self.c, self.n
            )));
        }
        Ok(())
    }
}

/// Asymptotically autonomous Beverton-Holt with ã_t = (f_{t+1}/f_t)·α.
pub struct BhAsy;

impl ModelFamily for BhAsy {
    fn name(&self) -> &'static str {
        "bh_asy"
    }

    fn summary(&self) -> &'static str {
        "Beverton-Holt with rate (f_{t+1}/f_t)*alpha, f_t = (t+c)^n; limit equation has rate alpha"
    }

    fn params(&self) -> &'static [ParamDoc] {
        &[
            ParamDoc {
                name: "alpha",
                default: "2.0",
                doc: "limit growth rate, > 1",
            },
            ParamDoc {
                name: "c",
                default: "1.0",
                doc: "shift in f_t = (t+c)^n; time domain starts where t + c > 0",
            },
            ParamDoc {
                name: "n",
                default: "1",
                doc: "exponent in 0..=4 (0: constant f)",
            },
        ]
    }

    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance> {
        let p: BhAsyParams = parse(self.name(), params)?;
        p.validate()?;
        let time = if p.n == 0 {
            DiscreteInterval::INTEGERS
        } else {
            DiscreteInterval::from(p.first_time())
        };
        let model = ModelSpec::new(self.name(), 1, Domain::NonnegativeCone, move |t, u| {
            vec![bh_map(p.coef(t), u[0])]
        })
        .with_time_domain(time)
        .with_params(serde_json::to_value(p).expect("plain struct"));
        Ok(Instance {
            model,
            system: None,
            source: Some(StateBox::uniform(1, 0.5, 5.0)),
        })
    }
}
