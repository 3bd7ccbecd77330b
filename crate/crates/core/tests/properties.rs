use proptest::prelude::*;

use benchgen::behavior::{behavioral_distance, wasserstein_1d};
use benchgen::bench::{delta_f, delta_x, lift};
use benchgen::expr::{
    random_tree, subtree_crossover, subtree_mutation, Domain, ExprTree, Node, Op, MAX_HEIGHT,
};
use benchgen::fla::{fdc_from_samples, to_bin, BINS};
use benchgen::optim::Objective;
use benchgen::seed;

fn tree_from_seed(s: u64, max_height: usize) -> ExprTree {
    random_tree(&mut seed::stream(s, &[]), 2, 1, max_height)
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, 1..40)
}

/// Smallest |argument| of any sqrt node in `t` at `p`.
fn sqrt_margin(t: &ExprTree, p: &[f64]) -> f64 {
    let nodes = t.nodes();
    (0..nodes.len())
        .filter(|&i| nodes[i] == Node::Op(Op::Sqrt))
        .map(|i| {
            let child = ExprTree::from_nodes(nodes[i + 1..t.subtree_end(i + 1)].to_vec()).unwrap();
            child.evaluate(p).abs()
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn print_parse_round_trip(s in any::<u64>()) {
        let t = tree_from_seed(s, 8);
        let text = t.to_string();
        prop_assert_eq!(text.parse::<ExprTree>().unwrap(), t);
        let json = serde_json::to_string(&text.parse::<ExprTree>().unwrap()).unwrap();
        prop_assert_eq!(json, format!("\"{text}\""));
    }

    #[test]
    fn variation_respects_height_cap(s in any::<u64>()) {
        let mut rng = seed::stream(s, &[1]);
        let mut a = tree_from_seed(s, 10);
        let mut b = tree_from_seed(s ^ 0x5555, 10);
        for _ in 0..20 {
            let (x, y) = subtree_crossover(&mut rng, &a, &b);
            a = subtree_mutation(&mut rng, &x, 2);
            b = y;
            prop_assert!(a.height() <= MAX_HEIGHT && b.height() <= MAX_HEIGHT);
            prop_assert!(a.check_dimension(2).is_ok() && b.check_dimension(2).is_ok());
        }
    }

    #[test]
    fn evaluation_is_continuous(s in any::<u64>(), x in -5.0..5.0f64, y in -5.0..5.0f64) {
        let t = tree_from_seed(s, 4);
        let p = [x, y];
        let q = [x + 1e-8, y - 1e-8];
        prop_assume!(sqrt_margin(&t, &p) > 1e-6 && sqrt_margin(&t, &q) > 1e-6);
        let (fp, fq) = (t.evaluate(&p), t.evaluate(&q));
        prop_assert!((fp - fq).abs() <= 1e-4 * (1.0 + fp.abs()), "{} vs {} for {}", fp, fq, t);
    }

    #[test]
    fn lift_to_two_is_identity(s in any::<u64>(), x in -5.0..5.0f64, y in -5.0..5.0f64) {
        let t = tree_from_seed(s, 6);
        let lifted = lift(t.clone(), 2).unwrap();
        prop_assert_eq!(lifted.evaluate(&[x, y]).to_bits(), t.evaluate(&[x, y]).to_bits());
    }

    #[test]
    fn wasserstein_is_a_metric(u in samples(), v in samples(), w in samples()) {
        let d = |a: &[f64], b: &[f64]| wasserstein_1d(a, b).unwrap();
        prop_assert!(d(&u, &v) >= 0.0);
        prop_assert!((d(&u, &v) - d(&v, &u)).abs() <= 1e-9);
        prop_assert!(d(&u, &u) <= 1e-12);
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w) + 1e-9);
    }

    #[test]
    fn wasserstein_translation_and_scale(u in samples(), v in samples(), c in -20.0..20.0f64, k in -4.0..4.0f64) {
        let base = wasserstein_1d(&u, &v).unwrap();
        let shift = |xs: &[f64]| xs.iter().map(|x| x + c).collect::<Vec<_>>();
        let scale = |xs: &[f64]| xs.iter().map(|x| x * k).collect::<Vec<_>>();
        prop_assert!((wasserstein_1d(&shift(&u), &shift(&v)).unwrap() - base).abs() <= 1e-9);
        prop_assert!((wasserstein_1d(&scale(&u), &scale(&v)).unwrap() - k.abs() * base).abs() <= 1e-9);
    }

    #[test]
    fn behavioral_distance_is_symmetric(
        u in prop::collection::vec(prop::array::uniform2(-5.0..5.0f64), 1..30),
        v in prop::collection::vec(prop::array::uniform2(-5.0..5.0f64), 1..30),
    ) {
        let u: Vec<Vec<f64>> = u.into_iter().map(Vec::from).collect();
        let v: Vec<Vec<f64>> = v.into_iter().map(Vec::from).collect();
        let ab = behavioral_distance(&u, &v).unwrap();
        prop_assert!((ab - behavioral_distance(&v, &u).unwrap()).abs() <= 1e-12);
        prop_assert!(behavioral_distance(&u, &u).unwrap() == 0.0);
    }

    #[test]
    fn fdc_invariant_under_affine_fitness(
        pts in prop::collection::vec(prop::array::uniform2(-5.0..5.0f64), 3..60),
        c in -100.0..100.0f64,
    ) {
        let points: Vec<Vec<f64>> = pts.into_iter().map(Vec::from).collect();
        let f: Vec<f64> = points.iter().map(|p| (p[0] - 1.0).powi(2) + p[1].abs()).collect();
        let base = fdc_from_samples(&points, &f);
        prop_assume!(!base.degenerate);
        prop_assert!((-1.0..=1.0).contains(&base.value));
        let shifted: Vec<f64> = f.iter().map(|x| x + c).collect();
        let doubled: Vec<f64> = f.iter().map(|x| x * 2.0).collect();
        prop_assert!((fdc_from_samples(&points, &shifted).value - base.value).abs() <= 1e-9);
        prop_assert!((fdc_from_samples(&points, &doubled).value - base.value).abs() <= 1e-9);
    }

    #[test]
    fn binning_is_total(fdc in -1.0..=1.0f64, neutrality in 0.0..=1.0f64, layer in any::<bool>()) {
        let bin = to_bin(fdc, neutrality, layer).unwrap();
        prop_assert!((bin.fdc as usize) < BINS && (bin.neutrality as usize) < BINS);
        prop_assert_eq!(bin.layer, layer as u8);
    }

    #[test]
    fn test_metrics_are_normalised(
        dim in 1usize..10,
        sa in any::<u64>(),
        na in 1usize..22,
        nb in 1usize..22,
    ) {
        let domain = Domain::new(-5.0, 5.0, dim).unwrap();
        let mut rng = seed::stream(sa, &[]);
        let a: Vec<Vec<f64>> = (0..na).map(|_| domain.sample(&mut rng)).collect();
        let b: Vec<Vec<f64>> = (0..nb).map(|_| domain.sample(&mut rng)).collect();
        let fit = |s: &[Vec<f64>]| s.iter().map(|p| p.iter().map(|x| x.sin()).sum()).collect::<Vec<f64>>();
        let dx = delta_x(&a, &b, &domain);
        let df = delta_f(&fit(&a), &fit(&b));
        prop_assert!((0.0..=1.0).contains(&dx));
        prop_assert!((0.0..=1.0).contains(&df));
        prop_assert!((delta_x(&b, &a, &domain) - dx).abs() <= 1e-12);
    }
}
