use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use idescope_nystrom::{
    assembly_by_name, build_quadrature, ide_model, rule_by_name, DispersalKernel, Growth, IdeSystem, KernelFamily,
    KernelForm, KernelSpec, Quadrature, UrysohnOperator,
};
use idescope_process::{constant, Domain, Error, Result};
use serde::{Deserialize, Serialize};

use crate::{parse, Instance, ModelFamily, ParamDoc, StateBox};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationParams {
    pub n: usize,
    pub rule: String,
    /// `row_corrected` or `plain`
    pub assembly: String,
}

impl Default for DiscretizationParams {
    fn default() -> Self {
        Self {
            n: 128,
            rule: "trapezoid".into(),
            assembly: "row_corrected".into(),
        }
    }
}

impl DiscretizationParams {
    fn build(&self, half_length: f64) -> Result<Quadrature> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::invalid(format!("half_length = {half_length} must be positive")));
        }
        build_quadrature(-half_length, half_length, self.n, rule_by_name(&self.rule)?.as_ref())
    }
}

fn check_positive(family: &str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{family}: {name} = {v} must be positive and finite"
        )))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GrowthField {
    /// a_t(x) = 3 − sin(t x / 10)
    Fig1,
    /// a_t(x) ≡ growth_value
    Constant,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpatialBhParams {
    pub vartheta: f64,
    pub dispersal: f64,
    pub half_length: f64,
    pub growth: GrowthField,
    pub growth_value: f64,
    pub quadrature: DiscretizationParams,
}

impl Default for SpatialBhParams {
    fn default() -> Self {
        Self {
            vartheta: 0.25,
            dispersal: 10.0,
            half_length: PI,
            growth: GrowthField::Fig1,
            growth_value: 4.0,
            quadrature: DiscretizationParams::default(),
        }
    }
}

/// sup_{|x| ≤ L} (3 − sin(t x / 10)).
pub fn fig1_alpha(t: i64, half_length: f64) -> f64 {
    let theta = (t as f64).abs() * half_length / 10.0;
    3.0 + theta.min(FRAC_PI_2).sin()
}

/// u_{t+1}(x) = (1−ϑ)a_t(x)u/(1+u) + ϑ∫k(x,y)a_t(y)u(y)/(1+u(y))dy, Laplace kernel.
pub struct SpatialBh;

impl SpatialBh {
    pub fn system(p: &SpatialBhParams) -> Result<IdeSystem> {
        check_positive("spatial_bh", "dispersal", p.dispersal)?;
        if !(0.0..=1.0).contains(&p.vartheta) {
            return Err(Error::invalid(format!(
                "spatial_bh: vartheta = {} must lie in [0, 1]",
                p.vartheta
            )));
        }
        if p.growth == GrowthField::Constant {
            check_positive("spatial_bh", "growth_value", p.growth_value)?;
        }
        let q = p.quadrature.build(p.half_length)?;
        let (growth, value, l, theta) = (p.growth, p.growth_value, p.half_length, p.vartheta);
        let a_t = move |t: i64, x: f64| match growth {
            GrowthField::Fig1 => 3.0 - (t as f64 * x / 10.0).sin(),
            GrowthField::Constant => value,
        };
        let alpha_t: Arc<dyn Fn(i64) -> f64 + Send + Sync> = match growth {
            GrowthField::Fig1 => Arc::new(move |t| fig1_alpha(t, l)),
            GrowthField::Constant => constant(value),
        };
        let sedentary = alpha_t.clone();
        let nem = Growth {
            g: Arc::new(move |t, x, z| (1.0 - theta) * a_t(t, x) * z / (1.0 + z)),
            gamma: Some(Arc::new(move |t| (1.0 - theta) * sedentary(t))),
            ell: None,
        };
        let nem = Growth {
            ell: nem.gamma.clone(),
            ..nem
        };
        let kernel = KernelSpec {
            family: KernelFamily::LaplaceBh,
            form: KernelForm::Separable {
                base: DispersalKernel::Laplace { a: p.dispersal },
                coeff: constant(theta),
                profile: Arc::new(move |t, y, z| a_t(t, y) * z / (1.0 + z)),
                profile_bound: alpha_t.clone(),
                profile_lipschitz: alpha_t,
                additive: None,
                additive_sup: None,
            },
        };
        let op = UrysohnOperator::new(kernel, q, assembly_by_name(&p.quadrature.assembly)?.as_ref());
        Ok(IdeSystem::new(nem, op))
    }
}

impl ModelFamily for SpatialBh {
    fn name(&self) -> &'static str {
        "spatial_bh"
    }

    fn summary(&self) -> &'static str {
        "spatial Beverton-Holt IDE on [-L, L], sedentary share 1-vartheta, Laplace dispersal"
    }

    fn params(&self) -> &'static [ParamDoc] {
        &[
            ParamDoc {
                name: "vartheta",
                default: "0.25",
                doc: "dispersing share in [0, 1]",
            },
            ParamDoc {
                name: "dispersal",
                default: "10.0",
                doc: "Laplace kernel rate a",
            },
            ParamDoc {
                name: "half_length",
                default: "pi",
                doc: "habitat [-L, L]",
            },
            ParamDoc {
                name: "growth",
                default: "fig1",
                doc: "`fig1`: a_t(x) = 3 - sin(t*x/10); `constant`: a_t = growth_value",
            },
            ParamDoc {
                name: "growth_value",
                default: "4.0",
                doc: "rate for growth = constant",
            },
            ParamDoc {
                name: "quadrature",
                default: "{n = 128, rule = trapezoid, assembly = row_corrected}",
                doc: "Nyström discretization",
            },
        ]
    }

    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance> {
        let p: SpatialBhParams = parse(self.name(), params)?;
        let system = SpatialBh::system(&p)?;
        let model = ide_model(self.name(), &system, Domain::NonnegativeCone)
            .with_params(serde_json::to_value(&p).expect("plain struct"));
        let top = match p.growth {
            GrowthField::Fig1 => 4.0,
            GrowthField::Constant => p.growth_value,
        };
        let n = model.dimension();
        Ok(Instance {
            model,
            system: Some(system),
            source: Some(StateBox::uniform(n, 0.0, top)),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpatialRickerParams {
    pub dispersal: f64,
    pub half_length: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// Decay base of α_t = α_+(1 + rate^t); defaults to α_+γ with γ = 1 − e^{−aL}.
    pub rate: Option<f64>,
    pub b_amplitude: f64,
    pub b_frequency: f64,
    pub quadrature: DiscretizationParams,
}

impl Default for SpatialRickerParams {
    fn default() -> Self {
        Self {
            dispersal: 2.0,
            half_length: 10.0,
            alpha_plus: 0.12,
            alpha_minus: 14.0,
            rate: None,
            b_amplitude: 5.0,
            b_frequency: 0.125,
            quadrature: DiscretizationParams::default(),
        }
    }
}

impl SpatialRickerParams {
    pub fn gamma(&self) -> f64 {
        1.0 - (-self.dispersal * self.half_length).exp()
    }

    pub fn rate(&self) -> f64 {
        self.rate.unwrap_or(self.alpha_plus * self.gamma())
    }

    pub fn alpha_t(&self, t: i64) -> f64 {
        if t < 0 {
            self.alpha_minus
        } else {
            self.alpha_plus * (1.0 + self.rate().powi(t.min(i32::MAX as i64) as i32))
        }
    }

    /// sup_t [α_t γ / e + ‖b_t‖₀]
    pub fn rho_sup(&self) -> f64 {
        let e = (-1.0_f64).exp();
        let past = self.alpha_minus * self.gamma() * e;
        let present = self.alpha_t(0) * self.gamma() * e + self.b_amplitude.abs();
        past.max(present)
    }

    fn limit(&self) -> RickerLimitParams {
        RickerLimitParams {
            dispersal: self.dispersal,
            half_length: self.half_length,
            alpha_plus: self.alpha_plus,
            b_amplitude: self.b_amplitude,
            b_frequency: self.b_frequency,
            quadrature: self.quadrature.clone(),
        }
    }
}

fn check_inhomogeneity(family: &str, amp: f64, freq: f64, half_length: f64) -> Result<()> {
    if !(amp >= 0.0 && freq.is_finite()) || (amp > 0.0 && freq.abs() * half_length > FRAC_PI_2) {
        return Err(Error::invalid(format!(
            "{family}: b(x) = {amp}·cos({freq}·x) must be nonnegative on the habitat"
        )));
    }
    Ok(())
}

fn ricker_system(
    dispersal: f64,
    quad: Quadrature,
    assembly: &str,
    alpha_t: Arc<dyn Fn(i64) -> f64 + Send + Sync>,
    b: Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>,
    b_sup: Arc<dyn Fn(i64) -> f64 + Send + Sync>,
) -> Result<IdeSystem> {
    let kernel = KernelSpec {
        family: KernelFamily::Ricker,
        form: KernelForm::Separable {
            base: DispersalKernel::Laplace { a: dispersal },
            coeff: alpha_t,
            profile: Arc::new(|_, _, z| z * (-z).exp()),
            profile_bound: constant((-1.0_f64).exp()),
            profile_lipschitz: constant(1.0),
            additive: Some(b),
            additive_sup: Some(b_sup),
        },
    };
    let op = UrysohnOperator::new(kernel, quad, assembly_by_name(assembly)?.as_ref());
    Ok(IdeSystem::new(Growth::zero(), op))
}

/// u_{t+1}(x) = α_t ∫k(x,y)u(y)e^{−u(y)}dy + b_t(x).
pub struct SpatialRicker;

impl SpatialRicker {
    pub fn system(p: &SpatialRickerParams) -> Result<IdeSystem> {
        check_positive("spatial_ricker", "dispersal", p.dispersal)?;
        check_positive("spatial_ricker", "alpha_plus", p.alpha_plus)?;
        check_positive("spatial_ricker", "alpha_minus", p.alpha_minus)?;
        check_inhomogeneity("spatial_ricker", p.b_amplitude, p.b_frequency, p.half_length)?;
        let rate = p.rate();
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::invalid(format!("spatial_ricker: rate = {rate} must be ≥ 0")));
        }
        let q = p.quadrature.build(p.half_length)?;
        let pa = p.clone();
        let (amp, freq) = (p.b_amplitude, p.b_frequency);
        ricker_system(
            p.dispersal,
            q,
            &p.quadrature.assembly,
            Arc::new(move |t| pa.alpha_t(t)),
            Arc::new(move |t, x| if t < 0 { 0.0 } else { amp * (freq * x).cos() }),
            Arc::new(move |t| if t < 0 { 0.0 } else { amp }),
        )
    }
}

impl ModelFamily for SpatialRicker {
    fn name(&self) -> &'static str {
        "spatial_ricker"
    }

    fn summary(&self) -> &'static str {
        "Urysohn Ricker IDE with alpha_t = alpha_plus*(1+rate^t) for t >= 0, alpha_minus before; b_t = 0 before 0"
    }

    fn params(&self) -> &'static [ParamDoc] {
        &[
            ParamDoc {
                name: "dispersal",
                default: "2.0",
                doc: "Laplace kernel rate a",
            },
            ParamDoc {
                name: "half_length",
                default: "10.0",
                doc: "habitat [-L, L]",
            },
            ParamDoc {
                name: "alpha_plus",
                default: "0.12",
                doc: "limit growth rate",
            },
            ParamDoc {
                name: "alpha_minus",
                default: "14.0",
                doc: "growth rate for t < 0",
            },
            ParamDoc {
                name: "rate",
                default: "alpha_plus*(1-exp(-a*L))",
                doc: "decay base of the transient",
            },
            ParamDoc {
                name: "b_amplitude",
                default: "5.0",
                doc: "b(x) = b_amplitude*cos(b_frequency*x)",
            },
            ParamDoc {
                name: "b_frequency",
                default: "0.125",
                doc: "see b_amplitude",
            },
            ParamDoc {
                name: "quadrature",
                default: "{n = 128, rule = trapezoid, assembly = row_corrected}",
                doc: "Nyström discretization",
            },
        ]
    }

    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance> {
        let p: SpatialRickerParams = parse(self.name(), params)?;
        let system = SpatialRicker::system(&p)?;
        let model = ide_model(self.name(), &system, Domain::NonnegativeCone)
            .with_params(serde_json::to_value(&p).expect("plain struct"));
        let n = model.dimension();
        Ok(Instance {
            model,
            system: Some(system),
            source: Some(StateBox::uniform(n, 0.0, p.rho_sup())),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RickerLimitParams {
    pub dispersal: f64,
    pub half_length: f64,
    pub alpha_plus: f64,
    pub b_amplitude: f64,
    pub b_frequency: f64,
    pub quadrature: DiscretizationParams,
}

impl Default for RickerLimitParams {
    fn default() -> Self {
        SpatialRickerParams::default().limit()
    }
}

impl RickerLimitParams {
    pub fn gamma(&self) -> f64 {
        1.0 - (-self.dispersal * self.half_length).exp()
    }
}

/// Autonomous limit u_{t+1}(x) = α_+ ∫k(x,y)u(y)e^{−u(y)}dy + b(x).
pub struct RickerLimit;

impl RickerLimit {
    pub fn system(p: &RickerLimitParams) -> Result<IdeSystem> {
        check_positive("ricker_limit", "dispersal", p.dispersal)?;
        check_positive("ricker_limit", "alpha_plus", p.alpha_plus)?;
        check_inhomogeneity("ricker_limit", p.b_amplitude, p.b_frequency, p.half_length)?;
        let q = p.quadrature.build(p.half_length)?;
        let (amp, freq) = (p.b_amplitude, p.b_frequency);
        ricker_system(
            p.dispersal,
            q,
            &p.quadrature.assembly,
            constant(p.alpha_plus),
            Arc::new(move |_, x| amp * (freq * x).cos()),
            constant(amp),
        )
    }
}

impl ModelFamily for RickerLimit {
    fn name(&self) -> &'static str {
        "ricker_limit"
    }

    fn summary(&self) -> &'static str {
        "autonomous Ricker IDE, the limit equation of spatial_ricker"
    }

    fn params(&self) -> &'static [ParamDoc] {
        &[
            ParamDoc {
                name: "dispersal",
                default: "2.0",
                doc: "Laplace kernel rate a",
            },
            ParamDoc {
                name: "half_length",
                default: "10.0",
                doc: "habitat [-L, L]",
            },
            ParamDoc {
                name: "alpha_plus",
                default: "0.12",
                doc: "growth rate",
            },
            ParamDoc {
                name: "b_amplitude",
                default: "5.0",
                doc: "b(x) = b_amplitude*cos(b_frequency*x)",
            },
            ParamDoc {
                name: "b_frequency",
                default: "0.125",
                doc: "see b_amplitude",
            },
            ParamDoc {
                name: "quadrature",
                default: "{n = 128, rule = trapezoid, assembly = row_corrected}",
                doc: "Nyström discretization",
            },
        ]
    }

    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance> {
        let p: RickerLimitParams = parse(self.name(), params)?;
        let system = RickerLimit::system(&p)?;
        let model = ide_model(self.name(), &system, Domain::NonnegativeCone)
            .with_period(1)
            .with_params(serde_json::to_value(&p).expect("plain struct"));
        let n = model.dimension();
        let e = (-1.0_f64).exp();
        let top = p.alpha_plus * p.gamma() * e + p.b_amplitude;
        Ok(Instance {
            model,
            system: Some(system),
            source: Some(StateBox::uniform(n, 0.0, top)),
        })
    }
}
