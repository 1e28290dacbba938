use eegmark::channel::ChannelId;
use eegmark::classify::{train, ClassifierKind, Hyperparams, TrainSet};
use eegmark::ensemble::{adaboost_weights, vote};
use eegmark::eval::make_folds;
use eegmark::features::{ftest_rank, relieff_rank, select_top_k, FeatureGroup, FeatureMatrix};
use eegmark::nonlinear::{higuchi_fd, lz76_count, HfdConfig};
use eegmark::signal::{Label, Segment};
use eegmark::spectral::{band_power, welch_psd, WelchParams};
use proptest::prelude::*;

fn label(b: bool) -> Label {
    if b { Label::Depressed } else { Label::Healthy }
}

/// 6+6 subjects × 18 channels of one group.
fn group_values() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0..100.0f64, 18), 12)
}

fn affine() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01..100.0f64, -50.0..50.0f64), 18)
}

fn matrix(values: &[Vec<f64>], group: FeatureGroup) -> FeatureMatrix {
    FeatureMatrix::from_fn(
        (0..values.len()).map(|i| format!("s{i}")).collect(),
        (0..values.len()).map(|i| label(i >= values.len() / 2)).collect(),
        |r, g, c| (g == group).then(|| values[r][c.index()]),
    )
    .unwrap()
}

fn rescale(values: &[Vec<f64>], t: &[(f64, f64)]) -> Vec<Vec<f64>> {
    values.iter().map(|r| r.iter().zip(t).map(|(v, (a, b))| a * v + b).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ftest_is_affine_invariant(values in group_values(), t in affine()) {
        let g = FeatureGroup::Hfd;
        let a = ftest_rank(&matrix(&values, g), g).unwrap();
        let b = ftest_rank(&matrix(&rescale(&values, &t), g), g).unwrap();
        prop_assert_eq!(&a.order, &b.order);
        for (x, y) in a.scores.iter().zip(&b.scores) {
            prop_assert!((x - y).abs() <= 1e-7 * x.abs().max(1.0));
        }
    }

    #[test]
    fn relieff_order_is_affine_invariant(values in group_values(), t in affine()) {
        let g = FeatureGroup::Lzc;
        let a = relieff_rank(&matrix(&values, g), g, 3).unwrap();
        let b = relieff_rank(&matrix(&rescale(&values, &t), g), g, 3).unwrap();
        prop_assert_eq!(a.order, b.order);
    }

    #[test]
    fn top_k_is_a_prefix(values in group_values(), k in 1usize..18) {
        let g = FeatureGroup::Dfa;
        let r = ftest_rank(&matrix(&values, g), g).unwrap();
        let small = select_top_k(&r, k).unwrap();
        let big = select_top_k(&r, k + 1).unwrap();
        prop_assert_eq!(&big[..k], &small[..]);
    }

    #[test]
    fn rankings_are_deterministic(values in group_values()) {
        let g = FeatureGroup::Sasi;
        let m = matrix(&values, g);
        prop_assert_eq!(relieff_rank(&m, g, 3).unwrap(), relieff_rank(&m, g, 3).unwrap());
    }

    #[test]
    fn vote_ignores_weight_scale(
        d in prop::collection::vec(any::<bool>(), 1..16),
        w in prop::collection::vec(0.0..10.0f64, 16),
        c in 1e-3..1e3f64,
    ) {
        let d: Vec<Label> = d.into_iter().map(label).collect();
        let w = &w[..d.len()];
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let y: f64 = d.iter().zip(w).map(|(l, w)| w * l.sign() as f64).sum();
        // exact sums with mixed signs can land on either side of zero after rounding
        prop_assume!(y.abs() > 1e-9);
        prop_assert_eq!(vote(&d, w).unwrap(), vote(&d, &scaled).unwrap());
    }

    #[test]
    fn boosting_training_error_never_rises(
        truth in prop::collection::vec(any::<bool>(), 12),
        flips in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 5), 12),
    ) {
        let y: Vec<Label> = truth.iter().map(|&b| label(b)).collect();
        let preds: Vec<Vec<Label>> = flips
            .iter()
            .zip(&y)
            .map(|(f, l)| f.iter().enumerate().map(|(m, p)| if *p < 0.2 + 0.1 * m as f64 { l.opposite() } else { *l }).collect())
            .collect();
        let r = adaboost_weights(&preds, &y, 5).unwrap();
        for w in r.rounds.windows(2) {
            prop_assert!(w[1].train_error <= w[0].train_error);
        }
        prop_assert!(r.weights.iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn folds_partition_and_balance(h in 2usize..15, d in 2usize..15, seed in any::<u64>()) {
        let n_folds = 2.max(h.min(d)).min(10);
        let ids: Vec<String> = (0..h + d).map(|i| format!("s{i}")).collect();
        let labels: Vec<Label> = (0..h + d).map(|i| label(i >= h)).collect();
        let plan = make_folds(&ids, &labels, n_folds, seed).unwrap();
        let mut seen: Vec<usize> = plan.rows.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..h + d).collect::<Vec<_>>());
        for class in [Label::Healthy, Label::Depressed] {
            let c: Vec<usize> = plan.rows.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
            prop_assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
        }
        prop_assert_eq!(plan, make_folds(&ids, &labels, n_folds, seed).unwrap());
    }

    #[test]
    fn band_power_is_additive(seed in any::<u64>(), a in 3.0..20.0f64, b in 20.0..30.0f64, c in 30.0..48.0f64) {
        let x = eegmark::signal::synth_dataset(
            &eegmark::signal::SynthSpec { n_subjects: 2, n_segments: 2, ..Default::default() },
            seed % 1000,
        ).unwrap();
        let seg = Segment::new(x[0].channel(ChannelId::Pz).to_vec(), 400, ChannelId::Pz);
        let spec = welch_psd(&[seg], &WelchParams::default()).unwrap();
        let whole = band_power(&spec, a, c).unwrap();
        let parts = band_power(&spec, a, b).unwrap() + band_power(&spec, b, c).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * whole);
    }

    #[test]
    fn lz_count_bounds(bits in prop::collection::vec(any::<bool>(), 2..200)) {
        let c = lz76_count(&bits);
        prop_assert!(c >= 1 && c <= bits.len());
    }

    #[test]
    fn hfd_is_scale_invariant(xs in prop::collection::vec(-1.0..1.0f64, 200..400), s in 0.1..10.0f64) {
        let cfg = HfdConfig::default();
        let a = higuchi_fd(&xs, &cfg).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|v| v * s + 3.0).collect();
        let b = higuchi_fd(&scaled, &cfg).unwrap();
        prop_assert!((a.dimension - b.dimension).abs() < 1e-9);
    }
}

/// Two-class training data and separate query points.
fn classifier_data() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (
        prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 12),
        prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 6),
    )
}

fn trainset(x: &[Vec<f64>]) -> TrainSet {
    TrainSet::new(x.to_vec(), (0..x.len()).map(|i| label(i % 2 == 1)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn standardized_models_ignore_affine_inputs(
        (x, q) in classifier_data(),
        t in prop::collection::vec((0.05..20.0f64, -10.0..10.0f64), 3),
    ) {
        let tx = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter().map(|r| r.iter().zip(&t).map(|(v, (a, b))| a * v + b).collect()).collect()
        };
        let hp = Hyperparams::default();
        for kind in [ClassifierKind::SvmRbf, ClassifierKind::Lda, ClassifierKind::Nb, ClassifierKind::Knn] {
            let m1 = train(kind, &trainset(&x), &hp).unwrap();
            let m2 = train(kind, &trainset(&tx(&x)), &hp).unwrap();
            for (a, b) in q.iter().zip(tx(&q)) {
                let d = m1.decision(a).unwrap();
                // decisions within rounding of zero may legitimately flip
                prop_assume!(d.abs() > 1e-6);
                prop_assert_eq!(m1.predict(a).unwrap(), m2.predict(&b).unwrap(), "{}", kind);
            }
        }
    }

    #[test]
    fn tree_training_predictions_survive_monotone_maps((x, _) in classifier_data()) {
        let f = |v: f64| v.powi(3) + v + (v / 4.0).exp();
        let tx: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect();
        let hp = Hyperparams { standardize: false, ..Hyperparams::default() };
        let m1 = train(ClassifierKind::Tree, &trainset(&x), &hp).unwrap();
        let m2 = train(ClassifierKind::Tree, &trainset(&tx), &hp).unwrap();
        prop_assert_eq!(m1.predict_many(&x).unwrap(), m2.predict_many(&tx).unwrap());
    }

    #[test]
    fn knn_over_all_points_returns_majority((x, q) in classifier_data(), extra in 0usize..3) {
        let n = x.len() - extra;
        let y: Vec<Label> = (0..n).map(|i| label(i % 2 == 1 || i < extra)).collect();
        let set = TrainSet::new(x[..n].to_vec(), y.clone()).unwrap();
        let hp = Hyperparams { knn_k: n, ..Hyperparams::default() };
        let m = train(ClassifierKind::Knn, &set, &hp).unwrap();
        let pos = y.iter().filter(|l| **l == Label::Depressed).count();
        let majority = label(2 * pos > n);
        for p in &q {
            prop_assert_eq!(m.predict(p).unwrap(), majority);
        }
    }

    #[test]
    fn predictions_are_pure((x, q) in classifier_data()) {
        for kind in ClassifierKind::ALL {
            let m = train(kind, &trainset(&x), &Hyperparams::default()).unwrap();
            prop_assert_eq!(m.predict_many(&q).unwrap(), m.predict_many(&q).unwrap());
        }
    }
}
