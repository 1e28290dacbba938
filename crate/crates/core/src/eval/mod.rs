//! Repeated, class-balanced cross-validation and the result tables.

mod cv;
mod folds;
mod pipeline;
mod report;

pub use cv::{
    repeat_cv, repeat_cv_runs, run_cv, run_fold, select_channels, CellReport, ChannelFrequency, CvReport, CvRun, FoldArtifacts,
    FoldResult, GroupChannels, InnerCvEvaluator, ReductionCheck, RunMeta,
};
pub use folds::{make_folds, FoldPlan};
pub use pipeline::{Cell, Experiment, SelectionMethod, SelectionScope, SelectionSpec, Target};
pub use report::{report_tables, Layout, Table};
