use idescope_setdyn::*;
use proptest::prelude::*;

fn cloud(points: Vec<Vec<f64>>) -> FiberCloud {
    FiberCloud::new(0, points, 0.1, Provenance::Sampled).unwrap()
}

fn brute(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in a {
        let mut best = f64::INFINITY;
        for q in b {
            let d = p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            best = best.min(d);
        }
        worst = worst.max(best);
    }
    worst
}

fn points(dim: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, dim), 1..=n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semidist_matches_double_loop(dim in 1usize..4, a in points(3, 50), b in points(3, 50)) {
        let a: Vec<Vec<f64>> = a.into_iter().map(|p| p[..dim].to_vec()).collect();
        let b: Vec<Vec<f64>> = b.into_iter().map(|p| p[..dim].to_vec()).collect();
        let got = hausdorff_semidist(&cloud(a.clone()), &cloud(b.clone())).unwrap();
        prop_assert_eq!(got, brute(&a, &b));
    }

    #[test]
    fn order_does_not_matter(a in points(2, 60), b in points(2, 60), rot in 0usize..60) {
        let mut a2 = a.clone();
        a2.reverse();
        let k = rot % a2.len();
        a2.rotate_left(k);
        prop_assert_eq!(cloud(a.clone()), cloud(a2.clone()));
        prop_assert_eq!(
            hausdorff_semidist(&cloud(a), &cloud(b.clone())).unwrap(),
            hausdorff_semidist(&cloud(a2), &cloud(b)).unwrap()
        );
    }

    #[test]
    fn triangle_bound(a in points(2, 30), b in points(2, 30), c in points(2, 30)) {
        let (a, b, c) = (cloud(a), cloud(b), cloud(c));
        let ac = hausdorff_semidist(&a, &c).unwrap();
        let ab = hausdorff_semidist(&a, &b).unwrap();
        let bc = hausdorff_semidist(&b, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn zero_iff_matched(a in points(1, 40), extra in -5.0..5.0f64) {
        let base = cloud(a.clone());
        prop_assert_eq!(hausdorff_semidist(&base, &base).unwrap(), 0.0);
        let mut more = a.clone();
        more.push(vec![extra]);
        let bigger = cloud(more);
        prop_assert_eq!(hausdorff_semidist(&base, &bigger).unwrap(), 0.0);
        let d = hausdorff_semidist(&bigger, &base).unwrap();
        let matched = a.iter().any(|p| (p[0] - extra).abs() <= MERGE_TOL);
        prop_assert_eq!(d == 0.0, matched);
    }

    #[test]
    fn box_samples_cover(lo in prop::collection::vec(-3.0..0.0f64, 2), w in prop::collection::vec(0.1..2.0f64, 2),
                         res in 0.05..0.5f64, seed in any::<u64>(), probes in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 50)) {
        let hi: Vec<f64> = lo.iter().zip(&w).map(|(a, b)| a + b).collect();
        let desc = SetDescriptor::Box { lo: lo.clone(), hi: hi.clone() };
        let c = sample_set(&desc, res, seed, 0).unwrap();
        prop_assert!(c.points().contains(&lo) && c.points().contains(&hi));
        for (u, v) in probes {
            let p = [lo[0] + u * w[0], lo[1] + v * w[1]];
            prop_assert!(c.nearest_dist(&p) <= res);
            prop_assert!(desc.contains(&p, 0.0));
        }
        prop_assert!(c.points().iter().all(|p| desc.contains(p, 0.0)));
    }

    #[test]
    fn interval_samples_cover(lo in -3.0..3.0f64, w in 0.0..4.0f64, res in 0.001..0.5f64, seed in any::<u64>()) {
        let c = sample_set(&SetDescriptor::Interval { lo, hi: lo + w }, res, seed, 0).unwrap();
        let (a, b) = c.hull().unwrap();
        prop_assert_eq!((a, b), (lo, lo + w));
        prop_assert!(c.points().windows(2).all(|p| p[1][0] - p[0][0] <= res * (1.0 + 1e-12)));
    }
}
