use std::collections::BTreeMap;

use idescope_nystrom::{absorbing_bound, fixed_point_iterate, hypothesis_bounds, AbsorbingVariant, Habitat};
use idescope_process::{sup_norm, verify_process_property, Domain, StateVector};
use idescope_semilinear::gronwall_bound;
use idescope_setdyn::{verify_asymptotic_autonomy, AutonomyVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::{decode, positive, source_descriptor, ModelSection, SamplingSpec, Times};
use crate::tasks::Context;
use crate::{schema, CliResult};

#[derive(Debug, Clone, Default)]
pub struct CheckOutcome {
    pub report: Map<String, Value>,
    pub passed: bool,
    pub converged: bool,
    /// Named (step, value) series written as trace CSVs.
    pub traces: BTreeMap<String, Vec<(i64, f64)>>,
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<CheckOutcome>;
}

pub struct CheckRegistry {
    checks: Vec<Box<dyn Check>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl CheckRegistry {
    pub fn builtin() -> Self {
        let mut r = Self { checks: Vec::new() };
        r.register(Box::new(ProcessProperty));
        r.register(Box::new(Gronwall));
        r.register(Box::new(Dissipativity));
        r.register(Box::new(FixedPoint));
        r.register(Box::new(Autonomy));
        r
    }

    pub fn register(&mut self, check: Box<dyn Check>) {
        self.checks.retain(|c| c.name() != check.name());
        self.checks.push(check);
    }

    pub fn checks(&self) -> impl Iterator<Item = &dyn Check> {
        self.checks.iter().map(|c| c.as_ref())
    }

    pub fn get(&self, name: &str) -> CliResult<&dyn Check> {
        self.checks().find(|c| c.name() == name).ok_or_else(|| {
            let known: Vec<_> = self.checks().map(|c| c.name()).collect();
            schema(format!("unknown check `{name}` (known: {})", known.join(", ")))
        })
    }
}

fn rng_for(ctx: &Context) -> CliResult<ChaCha8Rng> {
    Ok(ChaCha8Rng::seed_from_u64(ctx.config.require_seed()?))
}

/// A uniform point of the instance's default source box.
fn sample_source(ctx: &Context, rng: &mut ChaCha8Rng) -> CliResult<Vec<f64>> {
    let b = ctx
        .instance
        .source
        .as_ref()
        .ok_or_else(|| schema(format!("model `{}` has no default source set", ctx.instance.model.id())))?;
    Ok(b.lo
        .iter()
        .zip(&b.hi)
        .map(|(a, c)| if a < c { rng.gen_range(*a..=*c) } else { *a })
        .collect())
}

fn default_samples_100() -> usize {
    100
}

fn default_span() -> i64 {
    20
}

fn default_steps_10() -> u64 {
    10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessParams {
    #[serde(default = "default_samples_100")]
    samples: usize,
    tau_lo: Option<i64>,
    #[serde(default = "default_span")]
    tau_span: i64,
    #[serde(default = "default_steps_10")]
    max_steps: u64,
}

/// ‖φ(t,τ,u) − φ(t,s,φ(s,τ,u))‖ on random triples τ ≤ s ≤ t; passes iff every one is 0.
pub struct ProcessProperty;

impl Check for ProcessProperty {
    fn name(&self) -> &'static str {
        "process_property"
    }

    fn summary(&self) -> &'static str {
        "composition law on random (tau, s, t, u); must hold exactly"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<CheckOutcome> {
        let p: ProcessParams = decode("process_property", params)?;
        if p.samples == 0 || p.tau_span <= 0 {
            return Err(schema("process_property needs samples > 0 and tau_span > 0"));
        }
        let m = &ctx.instance.model;
        let lo = m.time_domain().clamp_start(p.tau_lo.unwrap_or(-p.tau_span / 2));
        let mut rng = rng_for(ctx)?;
        let mut worst = 0.0f64;
        let mut failures = 0usize;
        for _ in 0..p.samples {
            let tau = rng.gen_range(lo..lo + p.tau_span);
            let s = tau + rng.gen_range(0..=p.max_steps) as i64;
            let t = s + rng.gen_range(0..=p.max_steps) as i64;
            let u = m.state(sample_source(ctx, &mut rng)?);
            let d = verify_process_property(m, tau, s, t, &u)?;
            if d != 0.0 {
                failures += 1;
            }
            worst = worst.max(d);
        }
        let mut report = Map::new();
        report.insert("samples".into(), json!(p.samples));
        report.insert("max_deviation".into(), json!(worst));
        report.insert("failures".into(), json!(failures));
        Ok(CheckOutcome {
            report,
            passed: failures == 0,
            converged: true,
            traces: BTreeMap::new(),
        })
    }
}

fn default_samples_1000() -> usize {
    1000
}

fn default_steps_20() -> u64 {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GronwallParams {
    #[serde(default = "default_samples_1000")]
    samples: usize,
    tau_lo: Option<i64>,
    #[serde(default = "default_span")]
    tau_span: i64,
    #[serde(default = "default_steps_20")]
    max_steps: u64,
    /// Samples drawn from [-scale, scale]^d; the default is the source box.
    scale: Option<f64>,
}

/// ‖φ(t,τ,u)‖ against the semilinear growth bound on random (τ, t, u).
pub struct Gronwall;

impl Check for Gronwall {
    fn name(&self) -> &'static str {
        "gronwall"
    }

    fn summary(&self) -> &'static str {
        "semilinear growth bound on random (tau, t, u); needs semilinear metadata"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<CheckOutcome> {
        let p: GronwallParams = decode("gronwall", params)?;
        if let Some(s) = p.scale {
            positive("scale", s)?;
        }
        if p.samples == 0 || p.tau_span <= 0 {
            return Err(schema("gronwall needs samples > 0 and tau_span > 0"));
        }
        let m = &ctx.instance.model;
        let sl = m
            .metadata
            .semilinear
            .as_ref()
            .ok_or_else(|| schema(format!("model `{}` declares no semilinear constants", m.id())))?;
        let lo = m.time_domain().clamp_start(p.tau_lo.unwrap_or(-p.tau_span / 2));
        let mut rng = rng_for(ctx)?;
        let mut violations = 0usize;
        let mut worst_ratio = 0.0f64;
        for _ in 0..p.samples {
            let tau = rng.gen_range(lo..lo + p.tau_span);
            let t = tau + rng.gen_range(0..=p.max_steps) as i64;
            let u = match p.scale {
                Some(s) => (0..m.dimension()).map(|_| rng.gen_range(-s..=s)).collect(),
                None => sample_source(ctx, &mut rng)?,
            };
            let x = m.evolve_values(tau, t, &u)?;
            let bound = gronwall_bound(sl, tau, t, sup_norm(&u))?;
            let n = sup_norm(&x);
            if n > bound * (1.0 + 1e-12) {
                violations += 1;
            }
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(n / bound);
            }
        }
        let mut report = Map::new();
        report.insert("samples".into(), json!(p.samples));
        report.insert("violations".into(), json!(violations));
        report.insert("max_norm_over_bound".into(), json!(worst_ratio));
        Ok(CheckOutcome {
            report,
            passed: violations == 0,
            converged: true,
            traces: BTreeMap::new(),
        })
    }
}

fn default_samples_200() -> usize {
    200
}

fn default_steps_8() -> u64 {
    8
}

fn default_taus() -> Times {
    Times::Range {
        start: -5,
        end: 5,
        step: 1,
    }
}

fn default_abs_tol() -> f64 {
    1e-9
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DissipativityParams {
    #[serde(default = "default_samples_200")]
    samples: usize,
    #[serde(default = "default_taus")]
    taus: Times,
    /// `nemytskii` or `urysohn`; by default nemytskii when the growth part is declared.
    variant: Option<String>,
    #[serde(default = "default_steps_8")]
    steps_after: u64,
    #[serde(default = "default_abs_tol")]
    tol: f64,
    /// Initial data drawn in [0, 10^max_log10]; spans several magnitudes.
    #[serde(default = "default_max_log10")]
    max_log10: f64,
}

fn default_max_log10() -> f64 {
    4.0
}

/// Absorption of arbitrary nonnegative data by the ball of the declared radius.
pub struct Dissipativity;

impl Check for Dissipativity {
    fn name(&self) -> &'static str {
        "dissipativity"
    }

    fn summary(&self) -> &'static str {
        "absorption into the hypothesis-bound ball (nemytskii: one step, urysohn: two steps)"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<CheckOutcome> {
        let p: DissipativityParams = decode("dissipativity", params)?;
        positive("tol", p.tol)?;
        if p.samples == 0 {
            return Err(schema("dissipativity needs samples > 0"));
        }
        let m = &ctx.instance.model;
        let sys = ctx
            .instance
            .system
            .as_ref()
            .ok_or_else(|| schema(format!("model `{}` is not an integrodifference system", m.id())))?;
        let variant = match p.variant.as_deref() {
            None if sys.growth.is_declared() => AbsorbingVariant::Nemytskii,
            None | Some("urysohn") => AbsorbingVariant::Urysohn,
            Some("nemytskii") => AbsorbingVariant::Nemytskii,
            Some(v) => return Err(schema(format!("unknown dissipativity variant `{v}`"))),
        };
        let taus = p.taus.values()?;
        let lo = taus.iter().copied().min().expect("nonempty");
        let hi = taus.iter().copied().max().expect("nonempty") + p.steps_after as i64 + 2;
        let bounds: BTreeMap<i64, _> = (lo.min(hi)..=hi)
            .map(|t| Ok((t, hypothesis_bounds(&sys.growth, &sys.operator, t)?)))
            .collect::<CliResult<_>>()?;
        let urysohn_radius = absorbing_bound(&bounds, lo, AbsorbingVariant::Urysohn)?;
        let mut rng = rng_for(ctx)?;
        let mut violations = 0usize;
        let mut worst_excess = f64::NEG_INFINITY;
        for k in 0..p.samples {
            let tau = taus[k % taus.len()];
            let scale = 10f64.powf(rng.gen_range(-3.0..p.max_log10));
            let mut u: Vec<f64> = (0..m.dimension()).map(|_| rng.gen_range(0.0..=scale)).collect();
            let delay = match variant {
                AbsorbingVariant::Nemytskii => 1,
                AbsorbingVariant::Urysohn => 2,
            };
            for t in tau..tau + delay + p.steps_after as i64 {
                u = m.apply(t, &u)?;
                if t + 1 < tau + delay {
                    continue;
                }
                let radius = match variant {
                    // ‖F_t(u)‖ ≤ γ_t + ρ_t for every u ≥ 0
                    AbsorbingVariant::Nemytskii => absorbing_bound(&bounds, t + 1, variant)?,
                    AbsorbingVariant::Urysohn => urysohn_radius,
                };
                let excess = sup_norm(&u) - radius;
                worst_excess = worst_excess.max(excess);
                if excess > p.tol {
                    violations += 1;
                }
            }
        }
        let mut report = Map::new();
        report.insert(
            "variant".into(),
            json!(match variant {
                AbsorbingVariant::Nemytskii => "nemytskii",
                AbsorbingVariant::Urysohn => "urysohn",
            }),
        );
        report.insert("samples".into(), json!(p.samples));
        report.insert("violations".into(), json!(violations));
        report.insert("max_excess".into(), json!(worst_excess));
        report.insert("urysohn_radius".into(), json!(urysohn_radius));
        Ok(CheckOutcome {
            report,
            passed: violations == 0,
            converged: true,
            traces: BTreeMap::new(),
        })
    }
}

fn default_fp_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    1000
}

fn default_probes() -> usize {
    41
}

fn default_refine_tol() -> f64 {
    1e-4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixedPointParams {
    #[serde(default)]
    u0: f64,
    #[serde(default = "default_fp_tol")]
    tol: f64,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
    /// Contraction factor the Picard ratios must respect; by default ℓ + λ at t = 0.
    rate_bound: Option<f64>,
    /// Quadrature sizes for the refinement study; empty skips it.
    #[serde(default)]
    refine: Vec<usize>,
    #[serde(default = "default_probes")]
    probes: usize,
    #[serde(default = "default_refine_tol")]
    refine_tol: f64,
}

/// Picard iteration of an autonomous IDE, its contraction ratios and the Cauchy behaviour
/// of the fixed point under quadrature refinement.
pub struct FixedPoint;

impl Check for FixedPoint {
    fn name(&self) -> &'static str {
        "fixed_point"
    }

    fn summary(&self) -> &'static str {
        "Picard iteration with contraction ratios and fixed point refinement over quadrature sizes"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<CheckOutcome> {
        let p: FixedPointParams = decode("fixed_point", params)?;
        positive("tol", p.tol)?;
        positive("refine_tol", p.refine_tol)?;
        let m = &ctx.instance.model;
        let sys = ctx
            .instance
            .system
            .as_ref()
            .ok_or_else(|| schema(format!("model `{}` is not an integrodifference system", m.id())))?;
        let t0 = m.time_domain().clamp_start(0);
        let rate = match p.rate_bound {
            Some(r) => r,
            None => {
                let b = hypothesis_bounds(&sys.growth, &sys.operator, t0)?;
                b.ell + b.lambda_sup
            }
        };
        let solve = |inst: &idescope_models::Instance| {
            let u0 = StateVector::new(vec![p.u0; inst.model.dimension()], Domain::NonnegativeCone);
            fixed_point_iterate(&inst.model, &u0, p.tol, p.max_iter)
        };
        let rep = solve(ctx.instance)?;
        let worst_ratio = rep.ratios.iter().copied().fold(0.0, f64::max);
        let contracting = worst_ratio <= rate + 1e-6;
        let mut report = Map::new();
        report.insert("iterations".into(), json!(rep.diffs.len()));
        report.insert("rate_bound".into(), json!(rate));
        report.insert("max_ratio".into(), json!(worst_ratio));
        report.insert("u_star".into(), json!(rep.u_star.values));
        let mut traces = BTreeMap::new();
        traces.insert(
            "picard".to_string(),
            rep.diffs.iter().enumerate().map(|(k, d)| (k as i64 + 1, *d)).collect(),
        );
        let mut converged = rep.converged;
        let mut refined_ok = true;
        if !p.refine.is_empty() {
            if p.probes < 2 || p.refine.windows(2).any(|w| w[0] >= w[1]) {
                return Err(schema("refine must be increasing and probes ≥ 2"));
            }
            let (lo, hi) = match sys.quadrature().habitat {
                Habitat::Interval { lo, hi } => (lo, hi),
                Habitat::Countable => return Err(schema("refinement needs an interval habitat")),
            };
            let xs: Vec<f64> = (0..p.probes)
                .map(|k| lo + (hi - lo) * k as f64 / (p.probes - 1) as f64)
                .collect();
            let mut values = Vec::new();
            for &n in &p.refine {
                let mut params = m.params.clone();
                let q = params
                    .as_object_mut()
                    .and_then(|o| o.get_mut("quadrature"))
                    .and_then(|q| q.as_object_mut())
                    .ok_or_else(|| schema(format!("model `{}` has no quadrature parameters", m.id())))?;
                q.insert("n".into(), json!(n));
                let inst = ctx
                    .catalog
                    .instantiate(m.id(), &params)
                    .map_err(|e| schema(e.to_string()))?;
                let r = solve(&inst)?;
                converged &= r.converged;
                let s = inst.system.as_ref().expect("same family");
                values.push(s.fixed_point_at(t0, &r.u_star.values, &xs, 1e-14));
            }
            let diffs: Vec<f64> = values
                .windows(2)
                .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .collect();
            refined_ok = diffs.last().is_none_or(|d| *d < p.refine_tol);
            traces.insert(
                "refinement".to_string(),
                p.refine
                    .iter()
                    .skip(1)
                    .zip(&diffs)
                    .map(|(n, d)| (*n as i64, *d))
                    .collect(),
            );
            report.insert("refine".into(), json!(p.refine));
            report.insert("refine_diffs".into(), json!(diffs));
            report.insert("refine_probes".into(), json!(xs));
        }
        report.insert("contracting".into(), json!(contracting));
        report.insert("refinement_ok".into(), json!(refined_ok));
        Ok(CheckOutcome {
            report,
            passed: converged && contracting && refined_ok,
            converged,
            traces,
        })
    }
}

fn default_taus_zero() -> Vec<i64> {
    vec![0]
}

fn default_horizon() -> u64 {
    200
}

fn default_autonomy_tol() -> f64 {
    1e-8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutonomyParams {
    limit: ModelSection,
    #[serde(default = "default_taus_zero")]
    taus: Vec<i64>,
    #[serde(default = "default_horizon")]
    horizon: u64,
    sampling: SamplingSpec,
    #[serde(default = "default_autonomy_tol")]
    tol: f64,
}

/// sup over a sampled source set of ‖φ(τ+s;τ,a) − F^s(a)‖ against an autonomous limit;
/// passes when the distance at the horizon is below tol and the tail decays.
pub struct Autonomy;

impl Check for Autonomy {
    fn name(&self) -> &'static str {
        "autonomy"
    }

    fn summary(&self) -> &'static str {
        "distance of orbits to those of an autonomous limit model; passes on decay below tol at the horizon"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<CheckOutcome> {
        let p: AutonomyParams = decode("autonomy", params)?;
        positive("tol", p.tol)?;
        if p.taus.is_empty() {
            return Err(schema("autonomy needs at least one probe time"));
        }
        let limit = p.limit.instantiate(ctx.catalog, None)?;
        let m = &ctx.instance.model;
        let desc = source_descriptor(ctx.instance, None)?;
        let sampling = p.sampling.build(ctx.config.require_seed()?)?;
        let cloud = sampling.sample(&desc, p.taus[0])?;
        let r = verify_asymptotic_autonomy(m, &limit.model, &cloud, &p.taus, p.horizon)?;
        let last = r.combined.last().map_or(f64::INFINITY, |e| e.1);
        let decaying = match r.verdict {
            AutonomyVerdict::Exact => true,
            _ => r.slope.is_some_and(|s| s < 0.0),
        };
        let verdict = match r.verdict {
            AutonomyVerdict::Exact => json!({"kind": "exact"}),
            AutonomyVerdict::Exponential { rate } => json!({"kind": "exponential", "rate": rate}),
            AutonomyVerdict::Subexponential => json!({"kind": "subexponential"}),
        };
        let mut report = Map::new();
        report.insert("limit".into(), json!(limit.model.id()));
        report.insert("points".into(), json!(cloud.len()));
        report.insert("final_distance".into(), json!(last));
        report.insert("slope".into(), json!(r.slope));
        report.insert("verdict".into(), verdict);
        let passed = last < p.tol && decaying;
        let mut traces = BTreeMap::new();
        traces.insert("autonomy".to_string(), r.combined);
        Ok(CheckOutcome {
            report,
            passed,
            converged: passed,
            traces,
        })
    }
}
