use std::f64::consts::PI;
use std::sync::Arc;

use idescope_nystrom::*;
use idescope_process::{constant, Domain, StateVector};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trapezoid(lo: f64, hi: f64, n: usize) -> Quadrature {
    build_quadrature(lo, hi, n, &*rule_by_name("trapezoid").unwrap()).unwrap()
}

fn ricker_operator(alpha: f64, a: f64, n: usize, assembly: &dyn NystromAssembly) -> UrysohnOperator {
    let spec = KernelSpec {
        family: KernelFamily::Ricker,
        form: KernelForm::Separable {
            base: DispersalKernel::Laplace { a },
            coeff: constant(alpha),
            profile: Arc::new(|_, _, z| z * (-z).exp()),
            profile_bound: constant((-1.0f64).exp()),
            profile_lipschitz: constant(1.0),
            additive: None,
            additive_sup: None,
        },
    };
    UrysohnOperator::new(spec, trapezoid(-PI, PI, n), assembly)
}

#[test]
fn power_iteration_matches_symmetric_eigensolver() {
    // W = K·D with K symmetric and D the positive weight diagonal, so W is similar to
    // D^{1/2} K D^{1/2} and shares its spectrum.
    for n in [17, 40, 65] {
        let q = trapezoid(-PI, PI, n);
        let kernel = DispersalKernel::Laplace { a: 2.0 };
        let w = PlainNystrom.assemble(&kernel, &q);
        let s: Vec<f64> = q.weights.iter().map(|v| v.sqrt()).collect();
        let sym = DMatrix::from_fn(n, n, |i, j| s[i] * kernel.eval(q.nodes[i], q.nodes[j]) * s[j]);
        let eig = SymmetricEigen::new(sym);
        let oracle = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let est = idescope_semilinear::spectral_radius_estimate(&w, 10_000, 1e-14).unwrap();
        assert!(est.converged);
        assert!(
            (est.value - oracle).abs() < 1e-9 * oracle,
            "n={n}: {} vs {oracle}",
            est.value
        );
        assert!(oracle <= max_row_sum(&w) + 1e-12);
    }
}

#[test]
fn plain_row_sums_converge_to_analytic_mass() {
    let kernel = DispersalKernel::Laplace { a: 10.0 };
    let coarse = 32;
    let rows = |n: usize| {
        let q = trapezoid(-PI, PI, n + 1);
        let w = PlainNystrom.assemble(&kernel, &q);
        let stride = n / coarse;
        Ok((0..=coarse).map(|k| w.row(k * stride).sum()).collect::<Vec<f64>>())
    };
    let table = refine_and_compare(&[32, 64, 128, 256], &rows).unwrap();
    assert!(table.decreasing, "{:?}", table.diffs);
    let errs: Vec<f64> = table
        .values
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(k, s)| {
                    let x = -PI + 2.0 * PI * k as f64 / coarse as f64;
                    (s - kernel.row_mass(x, -PI, PI).unwrap()).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs.windows(2).all(|p| p[1] < p[0]), "{errs:?}");
}

#[test]
fn corrected_assembly_is_exact_for_constants_at_every_n() {
    let kernel = DispersalKernel::Laplace { a: 10.0 };
    for n in [5, 33, 128] {
        let q = trapezoid(-PI, PI, n);
        let w = RowCorrectedNystrom.assemble(&kernel, &q);
        for (i, x) in q.nodes.iter().enumerate() {
            assert!((w.row(i).sum() - kernel.row_mass(*x, -PI, PI).unwrap()).abs() < 1e-13);
        }
        let sup = kernel.sup_row_mass(-PI, PI).unwrap();
        assert!(max_row_sum(&w) <= sup + 1e-13);
    }
}

#[test]
fn picard_ratios_stay_below_lipschitz_constant() {
    let op = ricker_operator(0.5, 2.0, 96, &RowCorrectedNystrom);
    let sys = IdeSystem::new(Growth::zero(), op.clone());
    let model = ide_model("ricker", &sys, Domain::NonnegativeCone).with_period(1);
    let gamma = discrete_row_sum_max(&op).unwrap();
    let u0 = StateVector::new(vec![1.0; op.len()], Domain::NonnegativeCone);
    let rep = fixed_point_iterate(&model, &u0, 1e-12, 500).unwrap();
    assert!(rep.converged);
    assert!(rep.ratios.iter().all(|r| *r <= 0.5 * gamma + 1e-6), "{:?}", rep.ratios);
    let again = sys.step_values(0, &rep.u_star.values);
    assert!(again.iter().zip(&rep.u_star.values).all(|(a, b)| (a - b).abs() < 1e-11));
}

#[test]
fn fixed_point_refinement_is_cauchy() {
    let fp = |n: usize| {
        let op = ricker_operator(0.5, 2.0, n, &RowCorrectedNystrom);
        let sys = IdeSystem::new(Growth::zero(), op.clone());
        let model = ide_model("ricker", &sys, Domain::NonnegativeCone).with_period(1);
        let u0 = StateVector::new(vec![1.0; n], Domain::NonnegativeCone);
        let rep = fixed_point_iterate(&model, &u0, 1e-13, 1000)?;
        let probes: Vec<f64> = (0..=20).map(|k| -PI + 2.0 * PI * k as f64 / 20.0).collect();
        Ok(sys.fixed_point_at(0, &rep.u_star.values, &probes, 1e-14))
    };
    let table = refine_and_compare(&[33, 65, 129, 257], &fp).unwrap();
    assert!(table.decreasing, "{:?}", table.diffs);
    assert!(*table.diffs.last().unwrap() < 1e-4);
}

#[test]
fn hypothesis_bounds_follow_the_operator() {
    let op = ricker_operator(0.3, 2.0, 64, &RowCorrectedNystrom);
    let g = Growth {
        g: Arc::new(|_, _, z| 0.25 * z),
        gamma: Some(constant(0.25)),
        ell: Some(constant(0.25)),
    };
    let b = hypothesis_bounds(&g, &op, 0).unwrap();
    let row = discrete_row_sum_max(&op).unwrap();
    assert!((b.rho - 0.3 * (-1.0f64).exp() * row).abs() < 1e-15);
    assert!((b.lambda_sup - 0.3 * row).abs() < 1e-15);
    let reference = 0.3 * (-1.0f64).exp() * (1.0 - (-2.0 * PI).exp());
    assert!((b.rho_reference.unwrap() - reference).abs() < 1e-15);
    assert!(b.rho <= b.rho_reference.unwrap() + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn urysohn_output_is_bounded_by_rho(alpha in 0.01..3.0f64, a in 0.2..20.0f64, n in 8usize..80, seed in any::<u64>()) {
        let op = ricker_operator(alpha, a, n, &RowCorrectedNystrom);
        let rho = hypothesis_bounds(&Growth::zero(), &op, 0).unwrap().rho;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let scale = rng.gen_range(0.0..50.0);
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..scale + 1e-9)).collect();
            let ku = op.apply(0, &u);
            prop_assert!(ku.iter().all(|v| v.abs() <= rho * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn urysohn_is_lipschitz(alpha in 0.01..3.0f64, a in 0.2..20.0f64, n in 8usize..80, seed in any::<u64>(),
                            plain in any::<bool>()) {
        let assembly: &dyn NystromAssembly = if plain { &PlainNystrom } else { &RowCorrectedNystrom };
        let op = ricker_operator(alpha, a, n, assembly);
        let lambda = hypothesis_bounds(&Growth::zero(), &op, 0).unwrap().lambda_sup;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let du = u.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let (ku, kv) = (op.apply(0, &u), op.apply(0, &v));
            let dk = ku.iter().zip(&kv).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(dk <= lambda * du * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn quadrature_weights_positive_and_exact_on_linears(lo in -5.0..5.0f64, w in 0.01..10.0f64, n in 2usize..200,
                                                         rule in 0usize..3) {
        let r = &rules()[rule];
        let q = build_quadrature(lo, lo + w, n, &**r).unwrap();
        prop_assert_eq!(q.len(), n);
        prop_assert!(q.weights.iter().all(|v| *v > 0.0));
        prop_assert!(q.nodes.iter().all(|x| *x >= lo && *x <= lo + w));
        prop_assert!(q.nodes.windows(2).all(|p| p[0] < p[1]));
        let exact = w * (lo + 0.5 * w);
        prop_assert!((q.integrate(|x| x) - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
        prop_assert!((q.weights.iter().sum::<f64>() - w).abs() <= 1e-12 * w.max(1.0));
    }
}
