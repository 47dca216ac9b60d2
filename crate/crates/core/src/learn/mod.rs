//! Feature ranking, forward selection, and pass/fail classifiers over compile
//! feature vectors.

mod baseline;
mod dataset;
mod forest;
mod mlp;
mod select;

pub use baseline::{
    baseline_fit_predict, fit_linear_svm, fit_logistic, BaselineKind, GaussianNb, LinearModel,
    LogisticConfig, SvmConfig, VARIANCE_FLOOR,
};
pub use dataset::{evaluate, split, split_indices, Dataset, Metrics, Standardizer};
pub use forest::{
    rf_fit, rf_importance, write_importance_csv, ForestConfig, ImportanceRanking, RandomForest,
};
pub use mlp::{mlp_fit, mlp_predict, DenseLayer, MlpClassifier, MlpConfig, MlpModel};
pub use select::{forward_select, selection_size, Selection};
