use std::collections::BTreeMap;

use idescope_models::*;
use idescope_nystrom::{
    absorbing_bound, discrete_row_sum_max, fixed_point_iterate, hypothesis_bounds, ricker_smallness_check,
    AbsorbingVariant,
};
use idescope_process::{sup_norm, verify_process_property, Domain, StateVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn small_spatial(name: &str) -> Value {
    match name {
        "spatial_bh" | "spatial_ricker" | "ricker_limit" => json!({"quadrature": {"n": 24}}),
        _ => Value::Null,
    }
}

#[test]
fn process_law_holds_exactly_across_the_catalog() {
    let catalog = Catalog::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in catalog.names() {
        let inst = catalog.instantiate(name, &small_spatial(name)).unwrap();
        let m = &inst.model;
        let start = m.time_domain().clamp_start(-15);
        let src = inst.source.unwrap();
        for _ in 0..100 {
            let tau = rng.gen_range(start..start + 15);
            let s = tau + rng.gen_range(0..8);
            let t = s + rng.gen_range(0..8);
            let u: Vec<f64> = src
                .lo
                .iter()
                .zip(&src.hi)
                .map(|(a, b)| rng.gen_range(*a..=*b))
                .collect();
            let d = verify_process_property(m, tau, s, t, &m.state(u)).unwrap();
            assert_eq!(d, 0.0, "{name}: ({tau}, {s}, {t})");
        }
    }
}

#[test]
fn piecewise_closed_form_matches_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p = BhPiecewiseParams::new(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
        let m = catalog_instantiate("bh_piecewise", &serde_json::to_value(p).unwrap())
            .unwrap()
            .model;
        let tau = rng.gen_range(-20..=0);
        let t = tau + rng.gen_range(0..=50);
        let v = rng.gen_range(0.0..10.0);
        let it = m.evolve_values(tau, t, &[v]).unwrap()[0];
        let cf = bh_closed_form(&|r| p.coef(r), tau, t, v).unwrap();
        assert!(
            (it - cf).abs() <= 1e-10 * it.abs().max(1e-300),
            "{p:?} {tau} {t} {v}: {it} vs {cf}"
        );
    }
}

#[test]
fn asymptotic_closed_form_matches_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let p = BhAsyParams::new(
            rng.gen_range(1.05..5.0),
            rng.gen_range(20.5..30.0),
            rng.gen_range(0..=4),
        );
        let m = catalog_instantiate("bh_asy", &serde_json::to_value(p).unwrap())
            .unwrap()
            .model;
        let tau = rng.gen_range(-20..=0);
        let steps = rng.gen_range(0..=50u64);
        let a = rng.gen_range(0.01..10.0);
        let it = m.evolve_values(tau, tau + steps as i64, &[a]).unwrap()[0];
        let cf = bh_asy_closed_form(&p, tau, steps, a).unwrap();
        assert!((it - cf).abs() <= 1e-10 * it, "{p:?} {tau} {steps} {a}: {it} vs {cf}");
    }
}

#[test]
fn series_limit_reaches_reciprocal() {
    for n in 1..=4 {
        let p = BhAsyParams::new(2.0, 1.0, n);
        let s = bh_series_limit(&p, 0, 1_000_000, 1e-4).unwrap();
        assert!(s.converged && s.t <= 1_000_000, "{n}: {s:?}");
        assert!((s.value - 1.0).abs() < 1e-3, "{n}: {s:?}");
    }
}

#[test]
fn omega_table_rows() {
    let z = [0.0, 0.0];
    let cases = [
        ((0.8, 0.9), [z, z, z]),
        ((0.5, 3.0), [z, z, [0.0, 2.0]]),
        ((1.2, 0.9), [z, z, z]),
        ((2.0, 3.0), [[0.0, 2.0], [0.0, 1.0], [0.0, 2.0]]),
        ((3.0, 2.0), [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]),
    ];
    for ((am, ap), [star, minus, plus]) in cases {
        let g = bh_omega_table(&BhPiecewiseParams::new(am, ap)).unwrap().golden_json();
        assert_eq!(g["intervals"]["omega_star"], json!(star));
        assert_eq!(g["intervals"]["omega_minus"], json!(minus));
        assert_eq!(g["intervals"]["omega_plus"], json!(plus));
    }
}

#[test]
fn spatial_bh_hypothesis_constants() {
    let p = SpatialBhParams::default();
    let sys = SpatialBh::system(&p).unwrap();
    let row = discrete_row_sum_max(&sys.operator).unwrap();
    for t in -5..=5 {
        let b = hypothesis_bounds(&sys.growth, &sys.operator, t).unwrap();
        let a = fig1_alpha(t, p.half_length);
        assert!((b.gamma - 0.75 * a).abs() < 1e-15);
        assert_eq!(b.gamma, b.ell);
        assert!((b.rho - 0.25 * a * row).abs() < 1e-14);
        assert!(b.rho <= b.rho_reference.unwrap() + 1e-12);
    }
    // Fig. 1 rates: 3 at t = 0, 4 once |t|·π/10 reaches π/2
    assert_eq!(fig1_alpha(0, p.half_length), 3.0);
    assert!((fig1_alpha(5, p.half_length) - 4.0).abs() < 1e-15);
    assert_eq!(fig1_alpha(-7, p.half_length), 4.0);
}

#[test]
fn spatial_bh_one_step_absorption() {
    let inst = catalog_instantiate("spatial_bh", &Value::Null).unwrap();
    let sys = inst.system.unwrap();
    let m = inst.model;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let tau = rng.gen_range(-5..=5);
        let scale = 10f64.powf(rng.gen_range(-3.0..4.0));
        let u: Vec<f64> = (0..m.dimension()).map(|_| rng.gen_range(0.0..scale)).collect();
        let v = m.evolve_values(tau, tau + 1, &u).unwrap();
        let b = hypothesis_bounds(&sys.growth, &sys.operator, tau).unwrap();
        assert!(v.iter().all(|x| *x >= 0.0));
        assert!(sup_norm(&v) <= b.gamma + b.rho + 1e-12);
    }
}

#[test]
fn spatial_ricker_two_step_absorption() {
    let p = SpatialRickerParams::default();
    let inst = catalog_instantiate("spatial_ricker", &serde_json::to_value(&p).unwrap()).unwrap();
    let sys = inst.system.unwrap();
    let m = inst.model;
    let bounds: BTreeMap<i64, _> = (-10..=40)
        .map(|t| (t, hypothesis_bounds(&sys.growth, &sys.operator, t).unwrap()))
        .collect();
    let rho = absorbing_bound(&bounds, 0, AbsorbingVariant::Urysohn).unwrap();
    assert!(rho <= p.rho_sup() + 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let tau = rng.gen_range(-8..=20);
        let u: Vec<f64> = (0..m.dimension()).map(|_| rng.gen_range(0.0..100.0)).collect();
        let mut v = m.evolve_values(tau, tau + 2, &u).unwrap();
        for t in tau + 2..tau + 10 {
            assert!(sup_norm(&v) <= rho + 1e-9);
            v = m.apply(t, &v).unwrap();
        }
    }
}

#[test]
fn ricker_limit_fixed_point_and_refinement() {
    let p = RickerLimitParams::default();
    let alpha = p.alpha_plus * p.gamma();
    let solve = |n: usize| {
        let mut q = p.clone();
        q.quadrature.n = n;
        let inst = catalog_instantiate("ricker_limit", &serde_json::to_value(&q).unwrap()).unwrap();
        let u0 = StateVector::new(vec![0.0; n], Domain::NonnegativeCone);
        let rep = fixed_point_iterate(&inst.model, &u0, 1e-13, 500).unwrap();
        assert!(rep.converged);
        assert!(rep.ratios.iter().all(|r| *r <= alpha + 1e-6), "{:?}", rep.ratios);
        (inst.system.unwrap(), rep.u_star.values)
    };
    let probes: Vec<f64> = (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect();
    let (s1, u1) = solve(128);
    let (s2, u2) = solve(256);
    let f1 = s1.fixed_point_at(0, &u1, &probes, 1e-14);
    let f2 = s2.fixed_point_at(0, &u2, &probes, 1e-14);
    let d = f1.iter().zip(&f2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-4, "{d}");
    assert!(f1.iter().all(|v| *v > 0.0));
}

#[test]
fn default_ricker_passes_smallness() {
    let p = SpatialRickerParams::default();
    let alpha = p.alpha_plus * p.gamma();
    let c = ricker_smallness_check(alpha, (1.0 / (1.0 - alpha)).exp()).unwrap();
    assert!(c.displayed && c.displayed_slack > 0.0);
}

#[test]
fn catalog_registry() {
    let mut c = Catalog::builtin();
    let names = c.names();
    for n in [
        "linear_exninv",
        "bh_autonomous",
        "bh_piecewise",
        "bh_asy",
        "spatial_bh",
        "spatial_ricker",
        "ricker_limit",
    ] {
        assert!(names.contains(&n));
        assert!(!c.get(n).unwrap().summary().is_empty());
    }
    c.register(Box::new(BhAutonomous));
    assert_eq!(c.names().len(), names.len());
    assert!(Catalog::empty().get("bh_asy").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_families_preserve_the_cone(am in 0.05..6.0f64, ap in 0.05..6.0f64, t in -30i64..30, u in 0.0..1e6f64) {
        let m = catalog_instantiate("bh_piecewise", &json!({"alpha_minus": am, "alpha_plus": ap})).unwrap().model;
        let v = m.apply(t, &[u]).unwrap()[0];
        prop_assert!(v >= 0.0 && v <= am.max(ap));
    }

    #[test]
    fn spatial_families_preserve_the_cone(seed in any::<u64>(), t in -5i64..10, ricker in any::<bool>()) {
        let name = if ricker { "spatial_ricker" } else { "spatial_bh" };
        let m = catalog_instantiate(name, &small_spatial(name)).unwrap().model;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..m.dimension()).map(|_| rng.gen_range(0.0..50.0)).collect();
        let v = m.evolve_values(t, t + 3, &u).unwrap();
        prop_assert!(v.iter().all(|x| *x >= 0.0 && x.is_finite()));
    }
}
