use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelId, N_CHANNELS};
use crate::classify::{train, ClassifierKind, Hyperparams, Standardizer, TrainSet, TrainedModel};
use crate::ensemble::{fit_weights_inner_cv, vote, MemberTrainer, VoteMode, WeightFitReport};
use crate::error::{param, Error, Result};
use crate::features::{ftest_rank, relieff_rank, select_top_k, sweep_feature_count, FeatureGroup, FeatureMatrix, SubsetEvaluator};
use crate::seed::derive_seed;
use crate::signal::Label;

use super::folds::{make_folds, FoldPlan};
use super::pipeline::{Experiment, SelectionMethod, SelectionScope, SelectionSpec, Target};

/// Selected channels indexed by [`FeatureGroup::index`]; `None` for groups
/// no cell uses.
pub type GroupChannels = Vec<Option<Vec<ChannelId>>>;

fn column(group: FeatureGroup, channel: ChannelId) -> usize {
    group.index() * N_CHANNELS + channel.index()
}

fn columns(selected: &GroupChannels, groups: &[FeatureGroup]) -> Vec<usize> {
    groups
        .iter()
        .flat_map(|&g| selected[g.index()].iter().flatten().map(move |&c| column(g, c)))
        .collect()
}

/// A training table over `cols`: rows with a masked cell in `cols` are
/// dropped; the column means of the kept rows fill masked test cells.
struct Table {
    x: Vec<Vec<f64>>,
    y: Vec<Label>,
    means: Vec<f64>,
}

impl Table {
    fn build(mat: &FeatureMatrix, rows: &[usize], cols: &[usize]) -> Table {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &r in rows {
            let valid = mat.row_valid(r);
            if cols.iter().all(|&c| valid[c]) {
                let v = mat.row(r);
                x.push(cols.iter().map(|&c| v[c]).collect::<Vec<f64>>());
                y.push(mat.labels()[r]);
            }
        }
        let n = x.len().max(1) as f64;
        let means = (0..cols.len()).map(|j| x.iter().map(|r: &Vec<f64>| r[j]).sum::<f64>() / n).collect();
        Table { x, y, means }
    }

    fn query(&self, mat: &FeatureMatrix, row: usize, cols: &[usize]) -> Vec<f64> {
        let (v, valid) = (mat.row(row), mat.row_valid(row));
        cols.iter().zip(&self.means).map(|(&c, &m)| if valid[c] { v[c] } else { m }).collect()
    }

    fn fit(self, kind: ClassifierKind, hyper: &Hyperparams) -> Result<(TrainedModel, Vec<f64>)> {
        let means = self.means.clone();
        Ok((train(kind, &TrainSet::new(self.x, self.y)?, hyper)?, means))
    }
}

/// Fits `kind` on `train` rows and predicts `test` rows of `mat`.
fn fit_predict(
    mat: &FeatureMatrix,
    cols: &[usize],
    train_rows: &[usize],
    test_rows: &[usize],
    kind: ClassifierKind,
    hyper: &Hyperparams,
) -> Result<(TrainedModel, Vec<Label>)> {
    let table = Table::build(mat, train_rows, cols);
    let queries: Vec<Vec<f64>> = test_rows.iter().map(|&r| table.query(mat, r, cols)).collect();
    let (model, _) = table.fit(kind, hyper)?;
    let pred = model.predict_many(&queries)?;
    Ok((model, pred))
}

fn class_fold_count(labels: &[Label], max_folds: usize) -> usize {
    let pos = labels.iter().filter(|l| **l == Label::Depressed).count();
    max_folds.min(pos).min(labels.len() - pos)
}

/// Cross-validated accuracy of each classifier on a channel subset, used to
/// choose the channel count. Subjects with masked cells in the group are
/// left out.
#[derive(Debug, Clone)]
pub struct InnerCvEvaluator {
    pub hyper: Hyperparams,
    pub kinds: Vec<ClassifierKind>,
    pub max_folds: usize,
    pub seed: u64,
}

impl SubsetEvaluator for InnerCvEvaluator {
    fn evaluate(&self, mat: &FeatureMatrix, group: FeatureGroup, channels: &[ChannelId]) -> Result<Vec<f64>> {
        let rows = mat.complete_rows(group);
        let sub = mat.subset(&rows);
        let n_folds = class_fold_count(sub.labels(), self.max_folds);
        let plan = make_folds(sub.subjects(), sub.labels(), n_folds, self.seed)?;
        let cols: Vec<usize> = channels.iter().map(|&c| column(group, c)).collect();
        self.kinds
            .iter()
            .map(|&kind| {
                let mut correct = 0;
                for k in 0..plan.n_folds() {
                    let test = plan.test_rows(k);
                    let (_, pred) = fit_predict(&sub, &cols, &plan.train_rows(k), test, kind, &self.hyper)?;
                    correct += test.iter().zip(pred).filter(|(&r, p)| sub.labels()[r] == *p).count();
                }
                Ok(correct as f64 / sub.n_subjects() as f64)
            })
            .collect()
    }
}

/// Channels per group chosen on `mat` according to `spec`.
pub fn select_channels(
    mat: &FeatureMatrix,
    groups: &[FeatureGroup],
    spec: &SelectionSpec,
    hyper: &Hyperparams,
    max_folds: usize,
    seed: u64,
) -> Result<GroupChannels> {
    let chosen: Vec<(FeatureGroup, Vec<ChannelId>)> = groups
        .par_iter()
        .map(|&g| {
            let ranked = match spec.method {
                SelectionMethod::None => return Ok((g, ChannelId::ALL.to_vec())),
                SelectionMethod::Ftest => ftest_rank(mat, g)?,
                SelectionMethod::Relieff => relieff_rank(mat, g, spec.relieff_k)?,
            };
            let k = match spec.count {
                Some(k) => k,
                None => {
                    let eval = InnerCvEvaluator {
                        hyper: *hyper,
                        kinds: ClassifierKind::ALL.to_vec(),
                        max_folds,
                        seed: derive_seed(seed, g.index() as u64),
                    };
                    sweep_feature_count(mat, &ranked, &eval)?.best_k
                }
            };
            Ok((g, select_top_k(&ranked, k)?))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![None; FeatureGroup::ALL.len()];
    for (g, c) in chosen {
        out[g.index()] = Some(c);
    }
    Ok(out)
}

/// Everything fitted inside one training fold. None of it may depend on
/// the fold's test subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldArtifacts {
    pub fold: usize,
    pub selected: GroupChannels,
    /// Per cell, the standardization of each fitted model (one per member for ensembles).
    pub standardizers: Vec<Vec<Option<Standardizer>>>,
    /// Per cell, the ensemble weight fit.
    pub weights: Vec<Option<WeightFitReport>>,
}

/// Count of subjects on which equal-weight voting was compared with
/// majority voting, and how many disagreed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub checked: usize,
    pub mismatched: usize,
}

impl ReductionCheck {
    fn add(&mut self, o: ReductionCheck) {
        self.checked += o.checked;
        self.mismatched += o.mismatched;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub artifacts: FoldArtifacts,
    /// Per cell, `(row, predicted label)` for each test subject.
    pub predictions: Vec<Vec<(usize, Label)>>,
    /// Per cell, member decisions for each test subject (ensembles only).
    pub member_decisions: Vec<Vec<Vec<Label>>>,
    pub reduction: ReductionCheck,
}

struct GroupMembers<'a> {
    mat: &'a FeatureMatrix,
    cols: Vec<Vec<usize>>,
    kind: ClassifierKind,
    hyper: &'a Hyperparams,
}

impl MemberTrainer for GroupMembers<'_> {
    fn n_members(&self) -> usize {
        self.cols.len()
    }

    fn fit_predict(&self, member: usize, train: &[usize], test: &[usize]) -> Result<Vec<Label>> {
        Ok(fit_predict(self.mat, &self.cols[member], train, test, self.kind, self.hyper)?.1)
    }
}

struct CellOutcome {
    standardizers: Vec<Option<Standardizer>>,
    weights: Option<WeightFitReport>,
    predictions: Vec<(usize, Label)>,
    member_decisions: Vec<Vec<Label>>,
    reduction: ReductionCheck,
}

fn run_cell(
    train_mat: &FeatureMatrix,
    mat: &FeatureMatrix,
    test: &[usize],
    selected: &GroupChannels,
    target: Target,
    kind: ClassifierKind,
    exp: &Experiment,
    seed: u64,
) -> Result<CellOutcome> {
    let all_train: Vec<usize> = (0..train_mat.n_subjects()).collect();
    let fit_cols = |cols: &[usize]| -> Result<(TrainedModel, Vec<Vec<f64>>)> {
        let table = Table::build(train_mat, &all_train, cols);
        let queries = test.iter().map(|&r| table.query(mat, r, cols)).collect();
        Ok((table.fit(kind, &exp.hyper)?.0, queries))
    };
    match target {
        Target::Group(_) | Target::Concatenated => {
            let (model, queries) = fit_cols(&columns(selected, &target.groups()))?;
            let pred = model.predict_many(&queries)?;
            Ok(CellOutcome {
                standardizers: vec![model.standardizer.clone()],
                weights: None,
                predictions: test.iter().copied().zip(pred).collect(),
                member_decisions: Vec::new(),
                reduction: ReductionCheck::default(),
            })
        }
        Target::Ensemble(mode) => {
            let members = GroupMembers {
                mat: train_mat,
                cols: FeatureGroup::ALL.iter().map(|&g| columns(selected, &[g])).collect(),
                kind,
                hyper: &exp.hyper,
            };
            let report = fit_weights_inner_cv(train_mat.subjects(), train_mat.labels(), &members, mode, exp.inner_folds, seed)?;
            let fitted: Vec<(TrainedModel, Vec<Vec<f64>>)> =
                members.cols.iter().map(|c| fit_cols(c)).collect::<Result<_>>()?;
            let mut decisions = vec![Vec::with_capacity(fitted.len()); test.len()];
            for (model, queries) in &fitted {
                for (d, q) in decisions.iter_mut().zip(queries) {
                    d.push(model.predict(q)?);
                }
            }
            let m = fitted.len();
            let mut reduction = ReductionCheck::default();
            let mut predictions = Vec::with_capacity(test.len());
            for (&row, d) in test.iter().zip(&decisions) {
                let label = vote(d, &report.weights)?;
                if let (VoteMode::Weighted, Some(acc)) = (mode, &report.accuracies) {
                    // weights from a common accuracy must reproduce the majority label;
                    // when the inner accuracies already coincide these are the fitted weights
                    let common = if acc.iter().all(|a| *a == acc[0]) {
                        report.weights.clone()
                    } else {
                        vec![acc.iter().sum::<f64>() / m as f64; m]
                    };
                    if common[0] > 0.0 {
                        reduction.checked += 1;
                        if vote(d, &common)? != vote(d, &vec![1.0; m])? {
                            reduction.mismatched += 1;
                        }
                    }
                }
                predictions.push((row, label));
            }
            Ok(CellOutcome {
                standardizers: fitted.into_iter().map(|(model, _)| model.standardizer).collect(),
                weights: Some(report),
                predictions,
                member_decisions: decisions,
                reduction,
            })
        }
    }
}

/// Trains every cell on all folds but `k` and predicts fold `k`. With global
/// scope `global` must hold the precomputed selection.
pub fn run_fold(
    mat: &FeatureMatrix,
    exp: &Experiment,
    plan: &FoldPlan,
    k: usize,
    global: Option<&GroupChannels>,
) -> Result<FoldResult> {
    let train_rows = plan.train_rows(k);
    let test = plan.test_rows(k);
    let train_mat = mat.subset(&train_rows);
    let pos = train_mat.labels().iter().filter(|l| **l == Label::Depressed).count();
    if pos == 0 || pos == train_mat.n_subjects() {
        return param("training fold holds a single class");
    }
    let selected = match (exp.selection.scope, global) {
        (SelectionScope::Global, Some(g)) => g.clone(),
        (SelectionScope::Global, None) => return param("global selection scope needs a precomputed selection"),
        (SelectionScope::PerFold, _) => select_channels(
            &train_mat,
            &exp.groups(),
            &exp.selection,
            &exp.hyper,
            exp.inner_folds,
            derive_seed(plan.seed, 2 * k as u64),
        )?,
    };
    let weight_seed = derive_seed(plan.seed, 2 * k as u64 + 1);
    let outcomes: Vec<CellOutcome> = exp
        .cells
        .par_iter()
        .map(|c| run_cell(&train_mat, mat, test, &selected, c.target, c.classifier, exp, weight_seed))
        .collect::<Result<_>>()?;
    let mut result = FoldResult {
        artifacts: FoldArtifacts { fold: k, selected, standardizers: Vec::new(), weights: Vec::new() },
        predictions: Vec::new(),
        member_decisions: Vec::new(),
        reduction: ReductionCheck::default(),
    };
    for o in outcomes {
        result.artifacts.standardizers.push(o.standardizers);
        result.artifacts.weights.push(o.weights);
        result.predictions.push(o.predictions);
        result.member_decisions.push(o.member_decisions);
        result.reduction.add(o.reduction);
    }
    Ok(result)
}

/// Outcome of one pass over a fold plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRun {
    /// Subject-level accuracy per cell.
    pub accuracies: Vec<f64>,
    pub folds: Vec<FoldResult>,
}

impl CvRun {
    pub fn reduction(&self) -> ReductionCheck {
        let mut r = ReductionCheck::default();
        for f in &self.folds {
            r.add(f.reduction);
        }
        r
    }
}

fn global_selection(mat: &FeatureMatrix, exp: &Experiment, seed: u64) -> Result<Option<GroupChannels>> {
    match exp.selection.scope {
        SelectionScope::Global => {
            Ok(Some(select_channels(mat, &exp.groups(), &exp.selection, &exp.hyper, exp.outer_folds, seed)?))
        }
        SelectionScope::PerFold => Ok(None),
    }
}

fn run_plan(mat: &FeatureMatrix, exp: &Experiment, plan: &FoldPlan, global: Option<&GroupChannels>, rep: usize) -> Result<CvRun> {
    let folds: Vec<FoldResult> = (0..plan.n_folds())
        .into_par_iter()
        .map(|k| {
            run_fold(mat, exp, plan, k, global).map_err(|e| Error::Fold { repetition: rep, fold: k, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let mut correct = vec![0usize; exp.cells.len()];
    for f in &folds {
        for (c, preds) in f.predictions.iter().enumerate() {
            correct[c] += preds.iter().filter(|(r, p)| mat.labels()[*r] == *p).count();
        }
    }
    let n = mat.n_subjects() as f64;
    Ok(CvRun { accuracies: correct.iter().map(|&c| c as f64 / n).collect(), folds })
}

/// One cross-validation pass. Selection, standardization and weight fitting
/// only see the training rows of each fold.
pub fn run_cv(mat: &FeatureMatrix, exp: &Experiment, plan: &FoldPlan) -> Result<CvRun> {
    if exp.cells.is_empty() {
        return param("experiment has no cells");
    }
    let global = global_selection(mat, exp, plan.seed)?;
    run_plan(mat, exp, plan, global.as_ref(), 0)
}

/// Accuracy summary of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub selection: SelectionMethod,
    pub target: Target,
    pub classifier: ClassifierKind,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub reps: usize,
    /// Accuracy of each repetition; empty when read back from CSV.
    #[serde(default)]
    pub accuracies: Vec<f64>,
}

impl CellReport {
    /// `method:set`, e.g. `relieff:B_RBP` or `none:ensemble`.
    pub fn feature_set(&self) -> String {
        format!("{}:{}", self.selection, self.target.set_name())
    }
}

/// How often each channel was selected, over all folds and repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFrequency {
    pub group: FeatureGroup,
    pub frequency: Vec<(ChannelId, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub experiment: Experiment,
    pub base_seed: u64,
    pub reps: usize,
    pub channel_frequency: Vec<ChannelFrequency>,
    pub reduction: ReductionCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub cells: Vec<CellReport>,
    pub meta: Option<RunMeta>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, std)
}

/// `reps` cross-validation passes with plan seeds derived from
/// `(base_seed, repetition)`, run on `workers` threads. The report does not
/// depend on `workers`.
pub fn repeat_cv(mat: &FeatureMatrix, exp: &Experiment, reps: usize, base_seed: u64, workers: usize) -> Result<CvReport> {
    Ok(repeat_cv_runs(mat, exp, reps, base_seed, workers)?.0)
}

/// [`repeat_cv`] that also returns every repetition's fold results.
pub fn repeat_cv_runs(
    mat: &FeatureMatrix,
    exp: &Experiment,
    reps: usize,
    base_seed: u64,
    workers: usize,
) -> Result<(CvReport, Vec<CvRun>)> {
    if reps == 0 {
        return param("at least one repetition required");
    }
    if exp.cells.is_empty() {
        return param("experiment has no cells");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<CvRun> = pool.install(|| -> Result<Vec<CvRun>> {
        let global = global_selection(mat, exp, derive_seed(base_seed, u64::MAX))?;
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let plan = make_folds(mat.subjects(), mat.labels(), exp.outer_folds, derive_seed(base_seed, r as u64))?;
                run_plan(mat, exp, &plan, global.as_ref(), r)
            })
            .collect()
    })?;
    Ok((summarize(exp, &runs, base_seed), runs))
}

fn summarize(exp: &Experiment, runs: &[CvRun], base_seed: u64) -> CvReport {
    let cells = exp
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracies[i]).collect();
            let (mean_acc, std_acc) = mean_std(&accuracies);
            CellReport {
                selection: exp.selection.method,
                target: c.target,
                classifier: c.classifier,
                mean_acc,
                std_acc,
                reps: runs.len(),
                accuracies,
            }
        })
        .collect();
    let mut counts = vec![[0usize; N_CHANNELS]; FeatureGroup::ALL.len()];
    let mut total = 0usize;
    let mut reduction = ReductionCheck::default();
    for run in runs {
        reduction.add(run.reduction());
        for f in &run.folds {
            total += 1;
            for (g, sel) in f.artifacts.selected.iter().enumerate() {
                for c in sel.iter().flatten() {
                    counts[g][c.index()] += 1;
                }
            }
        }
    }
    let channel_frequency = exp
        .groups()
        .into_iter()
        .map(|g| ChannelFrequency {
            group: g,
            frequency: ChannelId::ALL.iter().map(|&c| (c, counts[g.index()][c.index()] as f64 / total as f64)).collect(),
        })
        .collect();
    CvReport {
        cells,
        meta: Some(RunMeta { experiment: exp.clone(), base_seed, reps: runs.len(), channel_frequency, reduction }),
    }
}

impl CvReport {
    /// `feature_set,classifier,mode,mean_acc,std_acc,reps`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["feature_set", "classifier", "mode", "mean_acc", "std_acc", "reps"])?;
        for c in &self.cells {
            wtr.write_record([
                c.feature_set(),
                c.classifier.name().to_string(),
                c.target.mode_name().to_string(),
                c.mean_acc.to_string(),
                c.std_acc.to_string(),
                c.reps.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let expected = ["feature_set", "classifier", "mode", "mean_acc", "std_acc", "reps"];
        if rdr.headers()?.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Schema(format!("report CSV header must be {}", expected.join(","))));
        }
        let mut cells = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Schema(format!("line {}: bad {what}", i + 2));
            let (method, set) = rec[0].split_once(':').ok_or_else(|| bad("feature_set"))?;
            cells.push(CellReport {
                selection: method.parse()?,
                target: Target::from_parts(set, &rec[2])?,
                classifier: rec[1].parse()?,
                mean_acc: rec[3].parse().map_err(|_| bad("mean_acc"))?,
                std_acc: rec[4].parse().map_err(|_| bad("std_acc"))?,
                reps: rec[5].parse().map_err(|_| bad("reps"))?,
                accuracies: Vec::new(),
            });
        }
        Ok(CvReport { cells, meta: None })
    }
}
