use eegmark::classify::{train, ClassifierKind, Hyperparams, TrainSet};
use eegmark::ensemble::VoteMode;
use eegmark::error::Error;
use eegmark::eval::{
    make_folds, repeat_cv, run_cv, run_fold, Cell, Experiment, FoldPlan, SelectionMethod, SelectionScope, SelectionSpec,
    Target,
};
use eegmark::features::{build_feature_matrix, ftest_rank, relieff_rank, FeatureConfig, FeatureGroup, FeatureMatrix};
use eegmark::seed::derive_seed;
use eegmark::signal::{synth_dataset, Label, SynthSpec};
use eegmark::ChannelId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn labels(n: usize) -> Vec<Label> {
    (0..n).map(|i| if i < n / 2 { Label::Healthy } else { Label::Depressed }).collect()
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:02}")).collect()
}

/// Gaussian noise everywhere; `signal` channels of every group shift the
/// depressed class by `shift` standard deviations.
fn planted(seed: u64, signal: &[ChannelId], shift: f64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = labels(20);
    FeatureMatrix::from_fn(ids(20), y.clone(), |r, _, c| {
        let z: f64 = rng.sample(StandardNormal);
        let s = if y[r] == Label::Depressed && signal.contains(&c) { shift } else { 0.0 };
        Some(z + s)
    })
    .unwrap()
}

#[test]
fn constant_features_give_exactly_half() {
    let mat = FeatureMatrix::from_fn(ids(20), labels(20), |_, _, _| Some(1.0)).unwrap();
    let cells = [ClassifierKind::SvmRbf, ClassifierKind::Lda, ClassifierKind::Nb, ClassifierKind::Tree]
        .map(|classifier| Cell { target: Target::Group(FeatureGroup::Hfd), classifier })
        .to_vec();
    let exp = Experiment { cells, ..Experiment::default() };
    let report = repeat_cv(&mat, &exp, 5, 3, 2).unwrap();
    for c in &report.cells {
        assert!(c.accuracies.iter().all(|&a| a == 0.5), "{}", c.classifier);
    }
}

#[test]
fn label_feature_gives_perfect_accuracy() {
    let y = labels(20);
    let mat = FeatureMatrix::from_fn(ids(20), y.clone(), |r, _, c| Some(y[r].sign() as f64 + 0.01 * c.index() as f64)).unwrap();
    let exp = Experiment::grid(SelectionSpec::default(), &[Target::Group(FeatureGroup::Apv)]);
    let plan = make_folds(mat.subjects(), mat.labels(), 10, 1).unwrap();
    let run = run_cv(&mat, &exp, &plan).unwrap();
    assert!(run.accuracies.iter().all(|&a| a == 1.0), "{:?}", run.accuracies);
}

#[test]
fn two_planted_channels_are_enough() {
    let mat = planted(8, &[ChannelId::O1, ChannelId::O2], 3.0);
    let r = ftest_rank(&mat, FeatureGroup::BetaRbp).unwrap();
    let mut top = r.order[..2].to_vec();
    top.sort();
    assert_eq!(top, vec![ChannelId::O1, ChannelId::O2]);
    let sel = SelectionSpec { method: SelectionMethod::Ftest, count: Some(2), ..SelectionSpec::default() };
    let exp = Experiment::grid(sel, &[Target::Group(FeatureGroup::BetaRbp)]);
    let report = repeat_cv(&mat, &exp, 5, 2, 1).unwrap();
    for c in &report.cells {
        assert!(c.mean_acc >= 0.9, "{} {}", c.classifier, c.mean_acc);
    }
}

fn leakage_experiment() -> Experiment {
    let sel = SelectionSpec { method: SelectionMethod::Relieff, ..SelectionSpec::default() };
    let mut exp = Experiment::grid(
        sel,
        &[Target::Group(FeatureGroup::Hfd), Target::Concatenated, Target::Ensemble(VoteMode::Weighted), Target::Ensemble(VoteMode::Adaboost)],
    );
    exp.cells.retain(|c| matches!(c.classifier, ClassifierKind::Nb | ClassifierKind::Knn));
    exp
}

#[test]
fn test_fold_values_never_reach_training_artifacts() {
    let mut mat = planted(5, &[ChannelId::Fp1, ChannelId::T4, ChannelId::O2], 1.5);
    mat.set(3, FeatureGroup::Dfa, ChannelId::C3, None);
    let exp = leakage_experiment();
    let plan = make_folds(mat.subjects(), mat.labels(), 10, 77).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [0, 4, 9] {
        let clean = run_fold(&mat, &exp, &plan, k, None).unwrap();
        let mut dirty = mat.clone();
        for &row in plan.test_rows(k) {
            for g in FeatureGroup::ALL {
                for c in ChannelId::ALL {
                    let v = if rng.random::<f64>() < 0.1 { None } else { Some(rng.random::<f64>() * 1e6 - 5e5) };
                    dirty.set(row, g, c, v);
                }
            }
        }
        let corrupted = run_fold(&dirty, &exp, &plan, k, None).unwrap();
        assert_eq!(clean.artifacts, corrupted.artifacts, "fold {k}");
    }
}

#[test]
fn report_is_independent_of_worker_count() {
    let mat = planted(6, &[ChannelId::F3, ChannelId::P4], 1.0);
    let exp = leakage_experiment();
    let a = repeat_cv(&mat, &exp, 4, 99, 1).unwrap();
    let b = repeat_cv(&mat, &exp, 4, 99, 4).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a, b);
}

#[test]
fn single_repetition_matches_run_cv() {
    let mat = planted(2, &[ChannelId::Fz], 2.0);
    let exp = Experiment::grid(SelectionSpec::default(), &[Target::Group(FeatureGroup::Lzc)]);
    let report = repeat_cv(&mat, &exp, 1, 5, 1).unwrap();
    let plan = make_folds(mat.subjects(), mat.labels(), 10, derive_seed(5, 0)).unwrap();
    let run = run_cv(&mat, &exp, &plan).unwrap();
    let means: Vec<f64> = report.cells.iter().map(|c| c.mean_acc).collect();
    assert_eq!(means, run.accuracies);
    assert!(report.cells.iter().all(|c| c.std_acc == 0.0 && c.reps == 1));
}

#[test]
fn scope_is_recorded_and_global_selection_is_shared() {
    let mat = planted(3, &[ChannelId::O1, ChannelId::O2], 3.0);
    let sel = SelectionSpec { method: SelectionMethod::Ftest, scope: SelectionScope::Global, count: Some(2), ..SelectionSpec::default() };
    let exp = Experiment::grid(sel, &[Target::Group(FeatureGroup::BetaRbp)]);
    let report = repeat_cv(&mat, &exp, 3, 1, 1).unwrap();
    let meta = report.meta.unwrap();
    assert_eq!(meta.experiment.selection.scope, SelectionScope::Global);
    let freq = &meta.channel_frequency[0];
    for (c, f) in &freq.frequency {
        let expected = if matches!(c, ChannelId::O1 | ChannelId::O2) { 1.0 } else { 0.0 };
        assert_eq!(*f, expected, "{c}");
    }
}

#[test]
fn single_class_training_fold_is_a_fold_error() {
    let mat = planted(1, &[], 0.0);
    let exp = Experiment::grid(SelectionSpec::default(), &[Target::Group(FeatureGroup::Hfd)]);
    let plan = FoldPlan {
        seed: 0,
        folds: vec![mat.subjects()[..10].to_vec(), mat.subjects()[10..].to_vec()],
        rows: vec![(0..10).collect(), (10..20).collect()],
    };
    match run_cv(&mat, &exp, &plan) {
        Err(Error::Fold { fold, .. }) => assert_eq!(fold, 0),
        other => panic!("expected a fold error, got {other:?}"),
    }
}

#[test]
fn lda_and_nb_find_the_midpoint() {
    for kind in [ClassifierKind::Lda, ClassifierKind::Nb] {
        let mut total = 0.0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<Vec<f64>> = (0..100)
                .map(|i| {
                    let m = if i < 50 { -1.0 } else { 1.0 };
                    vec![m + 0.1 * rng.sample::<f64, _>(StandardNormal)]
                })
                .collect();
            let set = TrainSet::new(x, labels(100)).unwrap();
            let model = train(kind, &set, &Hyperparams { standardize: false, ..Hyperparams::default() }).unwrap();
            // bisection for the sign change between the class means
            let (mut lo, mut hi) = (-1.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if model.decision(&[mid]).unwrap() > 0.0 { hi = mid } else { lo = mid }
            }
            total += lo.abs();
        }
        let mean_abs = total / 100.0;
        assert!(mean_abs < 0.1, "{kind}: {mean_abs}");
    }
}

#[test]
fn relieff_prefers_the_separating_channel() {
    let mut wins = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = labels(20);
        let mat = FeatureMatrix::from_fn(ids(20), y.clone(), |r, g, c| {
            (g == FeatureGroup::Apv).then(|| match c {
                ChannelId::Fp1 => y[r].sign() as f64 + 0.1 * rng.sample::<f64, _>(StandardNormal),
                _ => rng.sample(StandardNormal),
            })
        })
        .unwrap();
        let r = relieff_rank(&mat, FeatureGroup::Apv, 3).unwrap();
        if r.score(ChannelId::Fp1).unwrap() > r.score(ChannelId::Fp2).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 95, "{wins}");
}

#[test]
fn synthetic_dataset_gives_a_full_matrix() {
    let recs = synth_dataset(&SynthSpec { n_segments: 3, effect: 1.0, ..SynthSpec::default() }, 12).unwrap();
    let mat = build_feature_matrix(&recs, &FeatureConfig::default()).unwrap();
    assert_eq!(mat.n_subjects(), 20);
    assert_eq!(mat.row(0).len(), 180);
    assert_eq!(mat.masked_count(), 0);
}
