mod common;

use common::{pair_count_auc, random_matrix};
use ddos_elm::elm::{fit, ActivationKind, ElmParams};
use ddos_elm::metrics::{accuracy, auc_roc, confusion, evaluate, prf1, EvalReport};
use ddos_elm::preprocess::FlowDataset;
use ddos_elm::rng::Xoshiro256StarStar;
use proptest::prelude::*;

/// Labels with both classes present.
fn two_class_labels(rng: &mut Xoshiro256StarStar, n: usize) -> Vec<u8> {
    let mut y: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
    y[0] = 0;
    y[1] = 1;
    y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn confusion_matches_counting_loop(seed in any::<u64>(), n in 1usize..300) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let y: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
        let p: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for i in 0..n {
            match (y[i], p[i]) {
                (1, 1) => tp += 1,
                (0, 1) => fp += 1,
                (0, 0) => tn += 1,
                _ => fn_ += 1,
            }
        }
        let cm = confusion(&y, &p).unwrap();
        prop_assert_eq!((cm.tp, cm.fp, cm.tn, cm.fn_), (tp, fp, tn, fn_));
        prop_assert_eq!(cm.total(), n as u64);
    }

    #[test]
    fn auc_matches_pair_counting(seed in any::<u64>(), n in 2usize..60, levels in 1u64..8, mode in 0u8..3) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let y = two_class_labels(&mut rng, n);
        // coarse levels force ties; mode 1 is all-ties; mode 2 is perfectly separated
        let scores: Vec<f64> = match mode {
            0 => (0..n).map(|_| rng.below(levels) as f64 * 0.25).collect(),
            1 => vec![0.3; n],
            _ => y.iter().map(|&l| f64::from(l) + rng.uniform(0.0, 0.5)).collect(),
        };
        let auc = auc_roc(&y, &scores).unwrap();
        prop_assert!((auc - pair_count_auc(&y, &scores)).abs() <= 1e-12);
        match mode {
            1 => prop_assert_eq!(auc, 0.5),
            2 => prop_assert_eq!(auc, 1.0),
            _ => {}
        }
    }

    #[test]
    fn auc_is_invariant_under_monotone_maps(seed in any::<u64>(), n in 2usize..60, a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let y = two_class_labels(&mut rng, n);
        let scores: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let base = auc_roc(&y, &scores).unwrap();
        let affine: Vec<f64> = scores.iter().map(|s| a * s + b).collect();
        let exp: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        prop_assert_eq!(base, auc_roc(&y, &affine).unwrap());
        prop_assert_eq!(base, auc_roc(&y, &exp).unwrap());
    }

    #[test]
    fn rates_are_bounded_and_f1_between_precision_and_recall(seed in any::<u64>(), n in 1usize..200) {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let y: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
        let p: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
        let cm = confusion(&y, &p).unwrap();
        let m = prf1(&cm);
        let acc = accuracy(&cm).unwrap();
        for v in [acc, m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if m.precision > 0.0 && m.recall > 0.0 {
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-15);
            prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-15);
        }
    }
}

#[test]
fn report_recomputes_from_its_confusion_matrix() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(8);
    let x = random_matrix(&mut rng, 80, 4);
    let y = two_class_labels(&mut rng, 80);
    let names: Vec<String> = (0..4).map(|j| format!("f{j}")).collect();
    let data = FlowDataset::new(x.clone(), y.clone(), names, "random").unwrap();
    let model = fit(&x, &y, &ElmParams::new(16, ActivationKind::Tanh, 3)).unwrap();
    let report = evaluate(&model, &data, 0.5).unwrap();
    let cm = report.confusion;
    let total = cm.total() as f64;
    assert_eq!(report.accuracy, (cm.tp + cm.tn) as f64 / total);
    assert_eq!(report.precision, cm.tp as f64 / (cm.tp + cm.fp) as f64);
    assert_eq!(report.recall, cm.tp as f64 / (cm.tp + cm.fn_) as f64);
    let f1 = 2.0 * report.precision * report.recall / (report.precision + report.recall);
    assert!((report.f1 - f1).abs() <= 1e-15);
    assert_eq!(report.n_samples, 80);

    // the threshold-0.5 accuracy equals the composition of the primitives
    let predictions = model.predict(&x, 0.5).unwrap();
    let direct = accuracy(&confusion(&y, &predictions).unwrap()).unwrap();
    assert_eq!(report.accuracy, direct);

    let scores = model.score(&x).unwrap();
    let from_scores = EvalReport::from_scores(&y, &scores, 0.5).unwrap();
    assert_eq!(from_scores, report);
}

#[test]
fn unreachable_threshold_zeroes_recall() {
    let y = [0, 1, 1, 0];
    let report = EvalReport::from_scores(&y, &[0.1, 0.9, 0.8, 0.2], 1e18).unwrap();
    assert_eq!(report.recall, 0.0);
    assert_eq!(report.precision, 0.0);
    assert!(report.zero_division.contains(&"precision"));
    assert_eq!(report.auc_roc, 1.0);
}
