//! The subject × (feature group, electrode) matrix, its extraction from
//! recordings, and channel ranking within a feature group.

mod extract;
mod group;
mod matrix;
mod rank;
mod sweep;

pub use extract::{build_feature_matrix, subject_features, FeatureConfig};
pub use group::FeatureGroup;
pub use matrix::{FeatureMatrix, N_FEATURES};
pub use rank::{ftest_rank, relieff_rank, select_top_k, RankedFeatures};
pub use sweep::{sweep_feature_count, SubsetEvaluator, SweepResult};
