//! Catalog of example models, selectable by name, with closed-form oracles.

mod closed_form;
mod scalar;
mod spatial;

use idescope_nystrom::IdeSystem;
use idescope_process::{Error, ModelSpec, Result};
use serde::de::DeserializeOwned;

pub use closed_form::{
    bh_asy_closed_form, bh_closed_form, bh_forward_fiber_formula, bh_omega_table, bh_series_limit, OmegaCase,
    OmegaTableRow, SeriesLimit, SetValue,
};
pub use scalar::{
    BhAsy, BhAsyParams, BhAutonomous, BhAutonomousParams, BhPiecewise, BhPiecewiseParams, LinearExninv, LinearParams,
};
pub use spatial::{
    fig1_alpha, DiscretizationParams, RickerLimit, RickerLimitParams, SpatialBh, SpatialBhParams, SpatialRicker,
    SpatialRickerParams,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDoc {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

/// A box [lo, hi] in state space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl StateBox {
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }
}

/// An instantiated catalog entry.
#[derive(Clone)]
pub struct Instance {
    pub model: ModelSpec,
    /// Present for Nyström-discretized families.
    pub system: Option<IdeSystem>,
    /// Default source set for limit-set tasks; positively invariant where the family
    /// documents so.
    pub source: Option<StateBox>,
}

pub trait ModelFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn params(&self) -> &'static [ParamDoc];
    fn instantiate(&self, params: &serde_json::Value) -> Result<Instance>;
}

pub(crate) fn parse<T: DeserializeOwned + Default>(family: &str, params: &serde_json::Value) -> Result<T> {
    match params {
        serde_json::Value::Null => Ok(T::default()),
        v => serde_json::from_value(v.clone()).map_err(|e| Error::invalid(format!("{family}: {e}"))),
    }
}

pub struct Catalog {
    families: Vec<Box<dyn ModelFamily>>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Catalog {
    pub fn empty() -> Self {
        Self { families: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut c = Self::empty();
        c.register(Box::new(LinearExninv));
        c.register(Box::new(BhAutonomous));
        c.register(Box::new(BhPiecewise));
        c.register(Box::new(BhAsy));
        c.register(Box::new(SpatialBh));
        c.register(Box::new(SpatialRicker));
        c.register(Box::new(RickerLimit));
        c
    }

    /// Later registrations under an existing name replace the earlier one.
    pub fn register(&mut self, family: Box<dyn ModelFamily>) {
        self.families.retain(|f| f.name() != family.name());
        self.families.push(family);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.iter().map(|f| f.name()).collect()
    }

    pub fn families(&self) -> impl Iterator<Item = &dyn ModelFamily> {
        self.families.iter().map(|f| f.as_ref())
    }

    pub fn get(&self, name: &str) -> Result<&dyn ModelFamily> {
        self.families()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::invalid(format!("unknown model family `{name}`")))
    }

    pub fn instantiate(&self, name: &str, params: &serde_json::Value) -> Result<Instance> {
        self.get(name)?.instantiate(params)
    }
}

pub fn catalog_instantiate(name: &str, params: &serde_json::Value) -> Result<Instance> {
    Catalog::builtin().instantiate(name, params)
}
