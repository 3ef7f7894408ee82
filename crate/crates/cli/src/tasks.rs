use std::collections::BTreeMap;

use idescope_models::{Catalog, Instance};
use idescope_process::{sup_dist, sup_norm};
use idescope_setdyn::{
    attractor_star_fibers, check_invariance, construction_by_name, hausdorff_dist, hausdorff_semidist, omega_forward,
    omega_star, pullback_limit_fiber, trace_json, verify_forward_attraction, write_cloud_csv, write_trace_csv,
    FiberCloud, LimitSetReport, SetDescriptor, Trace,
};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::checks::CheckRegistry;
use crate::config::{decode, positive, source_descriptor, ExperimentConfig, SamplingSpec, SourceSpec, Times, Vector};
use crate::{schema, CliResult};

/// What a task sees: the parsed config and the instantiated model.
pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub instance: &'a Instance,
    pub catalog: &'a Catalog,
}

impl Context<'_> {
    pub fn nodes(&self) -> Option<&[f64]> {
        self.instance.model.metadata.nodes.as_deref().map(|v| v.as_slice())
    }
}

/// A finished task: the report document plus plot data files.
#[derive(Debug, Clone)]
pub struct TaskOutput {
    pub report: Value,
    /// (file name, contents), written next to the report.
    pub files: Vec<(String, String)>,
    pub converged: bool,
    pub passed: bool,
}

pub trait Task: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<TaskOutput>;
}

pub struct TaskRegistry {
    tasks: Vec<Box<dyn Task>>,
}

impl Default for TaskRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TaskRegistry {
    pub fn builtin() -> Self {
        let mut r = Self { tasks: Vec::new() };
        r.register(Box::new(Simulate));
        r.register(Box::new(Pullback));
        r.register(Box::new(Forward));
        r.register(Box::new(Omega));
        r.register(Box::new(Verify {
            checks: CheckRegistry::builtin(),
        }));
        r
    }

    /// Later registrations under an existing name replace the earlier one.
    pub fn register(&mut self, task: Box<dyn Task>) {
        self.tasks.retain(|t| t.name() != task.name());
        self.tasks.push(task);
    }

    pub fn tasks(&self) -> impl Iterator<Item = &dyn Task> {
        self.tasks.iter().map(|t| t.as_ref())
    }

    pub fn get(&self, name: &str) -> CliResult<&dyn Task> {
        self.tasks().find(|t| t.name() == name).ok_or_else(|| {
            let known: Vec<_> = self.tasks().map(|t| t.name()).collect();
            schema(format!("unknown task `{name}` (known: {})", known.join(", ")))
        })
    }
}

pub(crate) fn cloud_csv(cloud: &FiberCloud, nodes: Option<&[f64]>) -> String {
    let mut buf = Vec::new();
    write_cloud_csv(cloud, nodes, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

pub(crate) fn trace_csv(entries: &[(i64, f64)]) -> String {
    let mut buf = Vec::new();
    write_trace_csv(entries, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

fn header(ctx: &Context, task: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("task".into(), json!(task));
    m.insert("model".into(), json!(ctx.instance.model.id()));
    m.insert("params".into(), ctx.instance.model.params.clone());
    m
}

fn check_grid(name: &str, grid: &[u64]) -> CliResult<()> {
    if grid.is_empty() || grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(schema(format!("{name} must be a nonempty increasing list")));
    }
    Ok(())
}

/// Serialize a limit-set report under the output options and collect its CSV files.
fn finish_limit_report(ctx: &Context, task: &str, report: &LimitSetReport, files: &mut Vec<(String, String)>) -> Value {
    let mut doc = report.to_json();
    let obj = doc.as_object_mut().expect("report is an object");
    obj.insert("task".into(), json!(task));
    if !ctx.config.output.fibres_in_report {
        obj.remove("fibres");
    }
    if ctx.config.output.fibre_csv {
        let nodes = ctx.nodes();
        for (t, c) in &report.fibres {
            files.push((format!("fibre_omega_a_{t}.csv"), cloud_csv(c, nodes)));
        }
        for (t, c) in &report.attractor_fibers {
            files.push((format!("fibre_attractor_{t}.csv"), cloud_csv(c, nodes)));
        }
        for (name, c) in [
            ("omega_minus", &report.omega_minus),
            ("omega_plus", &report.omega_plus),
            ("omega_star", &report.omega_star),
        ] {
            if let Some(c) = c {
                files.push((format!("fibre_{name}.csv"), cloud_csv(c, nodes)));
            }
        }
    }
    for (name, t) in &report.traces {
        files.push((format!("trace_{name}.csv"), trace_csv(&t.entries)));
    }
    doc
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateParams {
    tau: Option<i64>,
    horizon: u64,
    u0: Vector,
    /// Marks the run converged when the last step moves less than this.
    fixed_point_tol: Option<f64>,
}

/// One trajectory from u0, written as CSV.
pub struct Simulate;

impl Task for Simulate {
    fn name(&self) -> &'static str {
        "simulate"
    }

    fn summary(&self) -> &'static str {
        "iterate one initial state; trajectory CSV `t,index,value` or `t,x,u`"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<TaskOutput> {
        let p: SimulateParams = decode("simulate", params)?;
        if let Some(tol) = p.fixed_point_tol {
            positive("fixed_point_tol", tol)?;
        }
        let m = &ctx.instance.model;
        let tau = p.tau.unwrap_or_else(|| m.time_domain().clamp_start(0));
        let mut u = p.u0.expand(m.dimension())?;
        let nodes = ctx.nodes();
        let mut csv = String::from(if nodes.is_some() { "t,x,u\n" } else { "t,index,value\n" });
        let mut push = |t: i64, u: &[f64]| {
            for (i, v) in u.iter().enumerate() {
                let first = match nodes {
                    Some(xs) => idescope_process::fmt_f64(xs[i]),
                    None => i.to_string(),
                };
                csv.push_str(&format!("{t},{first},{}\n", idescope_process::fmt_f64(*v)));
            }
        };
        m.evolve_values(tau, tau, &u)?;
        push(tau, &u);
        let mut last_step = f64::NAN;
        for t in tau..tau + p.horizon as i64 {
            let next = m.apply(t, &u)?;
            last_step = sup_dist(&next, &u);
            u = next;
            push(t + 1, &u);
        }
        let converged = p.fixed_point_tol.is_none_or(|tol| last_step < tol);
        let mut doc = header(ctx, self.name());
        doc.insert("tau".into(), json!(tau));
        doc.insert("horizon".into(), json!(p.horizon));
        doc.insert("final".into(), json!(u));
        doc.insert("final_norm".into(), json!(sup_norm(&u)));
        if last_step.is_finite() {
            doc.insert("last_step".into(), json!(last_step));
        }
        doc.insert("converged".into(), json!(converged));
        Ok(TaskOutput {
            report: Value::Object(doc),
            files: vec![("trajectory.csv".into(), csv)],
            converged,
            passed: true,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PullbackParams {
    taus: Times,
    s_grid: Vec<u64>,
    tol: f64,
    sampling: SamplingSpec,
    source: Option<SourceSpec>,
}

/// Pullback limit fibres ω_A(τ) of a time-constant source set.
pub struct Pullback;

impl Task for Pullback {
    fn name(&self) -> &'static str {
        "pullback"
    }

    fn summary(&self) -> &'static str {
        "pullback limit fibres of the source set, Cauchy-stopped over s_grid"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<TaskOutput> {
        let p: PullbackParams = decode("pullback", params)?;
        positive("tol", p.tol)?;
        check_grid("s_grid", &p.s_grid)?;
        let sampling = p.sampling.build(ctx.config.require_seed()?)?;
        let desc = source_descriptor(ctx.instance, p.source.as_ref())?;
        let m = &ctx.instance.model;
        let source = |t: i64| sampling.sample(&desc, t);
        let mut report = LimitSetReport::new(m.id(), m.params.clone());
        for tau in p.taus.values()? {
            let (fib, trace) = pullback_limit_fiber(m, &source, tau, &p.s_grid, p.tol)?;
            report.fibres.insert(tau, fib);
            report.add_trace(format!("pullback_{tau}"), trace);
        }
        let converged = report.all_converged();
        let mut files = Vec::new();
        let doc = finish_limit_report(ctx, self.name(), &report, &mut files);
        Ok(TaskOutput {
            report: doc,
            files,
            converged,
            passed: true,
        })
    }
}

fn default_construction() -> String {
    "image_intersection".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForwardParams {
    taus: Times,
    s_grid: Vec<u64>,
    tol: f64,
    sampling: SamplingSpec,
    source: Option<SourceSpec>,
    #[serde(default = "default_construction")]
    construction: String,
}

struct ForwardResult {
    report: LimitSetReport,
    res: f64,
}

fn forward_part(ctx: &Context, p: &ForwardParams, desc: &SetDescriptor, seed: u64) -> CliResult<ForwardResult> {
    positive("tol", p.tol)?;
    check_grid("s_grid", &p.s_grid)?;
    let sampling = p.sampling.build(seed)?;
    let construction = construction_by_name(&p.construction).map_err(|e| schema(e.to_string()))?;
    let m = &ctx.instance.model;
    let source = |t: i64| sampling.sample(desc, t);
    let taus = p.taus.values()?;
    let o = omega_forward(m, &source, &taus, &p.s_grid, p.tol, construction.as_ref())?;
    let res = o.plus.resolution;
    let mut report = LimitSetReport::new(m.id(), m.params.clone());
    for (tau, t) in &o.traces {
        report.add_trace(format!("forward_{tau}"), t.clone());
    }
    // Ω_A(τ) ⊆ Ω_A(τ') for τ < τ' when A is positively invariant
    let mut monotone = true;
    let fibres: Vec<(&i64, &FiberCloud)> = o.fibres.iter().collect();
    for w in fibres.windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        if !a.is_empty() && (b.is_empty() || hausdorff_semidist(a, b)? > res + p.tol) {
            monotone = false;
        }
    }
    report.verdicts.insert("monotone_fibres".into(), monotone);
    let minus_in_plus = o.minus.is_empty() || hausdorff_semidist(&o.minus, &o.plus)? <= res;
    report.verdicts.insert("omega_minus_in_plus".into(), minus_in_plus);
    report.extra.insert("construction".into(), json!(construction.name()));
    report.fibres = o.fibres;
    report.omega_minus = Some(o.minus);
    report.omega_plus = Some(o.plus);
    Ok(ForwardResult { report, res })
}

/// Forward limit fibres Ω_A(τ) and the sets ω⁻, ω⁺ built from them.
pub struct Forward;

impl Task for Forward {
    fn name(&self) -> &'static str {
        "forward"
    }

    fn summary(&self) -> &'static str {
        "forward limit fibres of the source set and the forward limit sets omega_minus, omega_plus"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<TaskOutput> {
        let p: ForwardParams = decode("forward", params)?;
        let seed = ctx.config.require_seed()?;
        let desc = source_descriptor(ctx.instance, p.source.as_ref())?;
        let f = forward_part(ctx, &p, &desc, seed)?;
        let converged = f.report.all_converged();
        let mut files = Vec::new();
        let doc = finish_limit_report(ctx, self.name(), &f.report, &mut files);
        Ok(TaskOutput {
            report: doc,
            files,
            converged,
            passed: true,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttractorSpec {
    tau_start: i64,
    tau_end: i64,
    s_grid: Vec<u64>,
    tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StarSpec {
    tail: Times,
    tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttractionSpec {
    tau: i64,
    s_grid: Vec<u64>,
    tol: f64,
}

fn default_equality_tol() -> f64 {
    1e-3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OmegaParams {
    #[serde(flatten)]
    forward: ForwardParams,
    attractor: AttractorSpec,
    star: StarSpec,
    attraction: AttractionSpec,
    #[serde(default = "default_equality_tol")]
    equality_tol: f64,
}

/// ω⋆ from the invariant family A⋆, ω⁻ and ω⁺ from the forward fibres, and the
/// forward-attraction verdict for A⋆ set against [ω⁺ = ω⋆].
pub struct Omega;

impl Task for Omega {
    fn name(&self) -> &'static str {
        "omega"
    }

    fn summary(&self) -> &'static str {
        "omega_star, omega_minus, omega_plus and the forward-attraction dichotomy"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<TaskOutput> {
        // flatten and deny_unknown_fields do not combine in serde; check keys by hand
        const KEYS: [&str; 10] = [
            "taus",
            "s_grid",
            "tol",
            "sampling",
            "source",
            "construction",
            "attractor",
            "star",
            "attraction",
            "equality_tol",
        ];
        if let Some(k) = params.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(schema(format!("omega: unknown field `{k}`")));
        }
        let p: OmegaParams = decode("omega", params)?;
        for (name, v) in [
            ("attractor.tol", p.attractor.tol),
            ("star.tol", p.star.tol),
            ("attraction.tol", p.attraction.tol),
            ("equality_tol", p.equality_tol),
        ] {
            positive(name, v)?;
        }
        check_grid("attractor.s_grid", &p.attractor.s_grid)?;
        check_grid("attraction.s_grid", &p.attraction.s_grid)?;
        let seed = ctx.config.require_seed()?;
        let m = &ctx.instance.model;
        let desc = source_descriptor(ctx.instance, p.forward.source.as_ref())?;
        let mut f = forward_part(ctx, &p.forward, &desc, seed)?;

        let sampling = p.forward.sampling.build(seed)?;
        let absorbing = |_: i64| desc.clone();
        let a = &p.attractor;
        let star = attractor_star_fibers(m, &absorbing, a.tau_start, a.tau_end, &a.s_grid, a.tol, sampling)?;
        let tail = p.star.tail.values()?;
        let (w_star, star_trace) = omega_star(&star.fibers, &tail, p.star.tol)?;
        let invariance = check_invariance(m, &star.fibers, a.tol)?;

        let probe = sampling.sample(&desc, p.attraction.tau)?;
        let attraction = verify_forward_attraction(m, &star.fibers, &probe, &p.attraction.s_grid, p.attraction.tol)?;

        let report = &mut f.report;
        let plus = report.omega_plus.as_ref().expect("set by forward_part");
        let gap = if plus.is_empty() {
            f64::INFINITY
        } else {
            hausdorff_dist(plus, &w_star)?
        };
        let equal = gap < p.equality_tol;
        let star_in_plus = !plus.is_empty() && hausdorff_semidist(&w_star, plus)? <= f.res.max(p.equality_tol);
        report
            .verdicts
            .insert("forward_attracting".into(), attraction.attracting);
        report.verdicts.insert("omega_plus_equals_star".into(), equal);
        report
            .verdicts
            .insert("dichotomy_consistent".into(), attraction.attracting == equal);
        report.verdicts.insert("omega_star_in_plus".into(), star_in_plus);
        report
            .verdicts
            .insert("attractor_invariant".into(), invariance.invariant());
        report.add_trace("attractor", star.trace.clone());
        report.add_trace("omega_star", star_trace);
        report.extra.insert(
            "omega_plus_star_distance".into(),
            json!(if gap.is_finite() { json!(gap) } else { json!("inf") }),
        );
        report
            .extra
            .insert("attraction_trace".into(), trace_json(&attraction.trace));
        report.extra.insert("attraction_tol".into(), json!(p.attraction.tol));
        report.extra.insert("equality_tol".into(), json!(p.equality_tol));
        let tail_fibres: BTreeMap<i64, FiberCloud> =
            star.fibers.into_iter().filter(|(t, _)| tail.contains(t)).collect();
        report.attractor_fibers = tail_fibres;
        report.omega_star = Some(w_star);
        let converged = report.all_converged();
        let mut files = Vec::new();
        let doc = finish_limit_report(ctx, self.name(), report, &mut files);
        files.push(("trace_attraction.csv".into(), trace_csv(&attraction.trace.entries)));
        Ok(TaskOutput {
            report: doc,
            files,
            converged,
            passed: true,
        })
    }
}

/// Runs one registered check.
pub struct Verify {
    pub checks: CheckRegistry,
}

impl Task for Verify {
    fn name(&self) -> &'static str {
        "verify"
    }

    fn summary(&self) -> &'static str {
        "run a named check; the run fails when the check does"
    }

    fn run(&self, ctx: &Context, params: &Map<String, Value>) -> CliResult<TaskOutput> {
        let mut params = params.clone();
        let name = match params.remove("check") {
            Some(Value::String(s)) => s,
            _ => return Err(schema("verify needs `check = \"<name>\"`")),
        };
        let check = self.checks.get(&name)?;
        let out = check.run(ctx, &params)?;
        let mut doc = header(ctx, self.name());
        doc.insert("check".into(), json!(name));
        doc.insert("passed".into(), json!(out.passed));
        doc.insert("converged".into(), json!(out.converged));
        doc.insert("result".into(), Value::Object(out.report));
        let mut traces = Map::new();
        let mut files = Vec::new();
        for (k, entries) in &out.traces {
            traces.insert(
                k.clone(),
                trace_json(&Trace {
                    entries: entries.clone(),
                    tol: 0.0,
                    converged: true,
                }),
            );
            files.push((format!("trace_{k}.csv"), trace_csv(entries)));
        }
        if !traces.is_empty() {
            doc.insert("traces".into(), Value::Object(traces));
        }
        Ok(TaskOutput {
            report: Value::Object(doc),
            files,
            converged: out.converged,
            passed: out.passed,
        })
    }
}
