//! Label ranking with partial abstention.
//!
//! A label ranker may abstain on pairs of labels whose relative order it is
//! unsure about, predicting a partial order instead of a total one. This
//! crate implements two ways to get there:
//!
//! * **probabilistic**: predict a Mallows or Plackett-Luce distribution over
//!   rankings, compute its pairwise marginals `P(i > j)` and keep the pairs
//!   with `P(i > j) > q`. For these models the thresholded relation is a
//!   partial order for every `q` in `[0.5, 1)`, with no repair step.
//! * **baseline**: take ensemble vote fractions as `P`, raise `q` to the
//!   smallest value that removes all cycles and replace the result by its
//!   transitive closure.
//!
//! [`eval`] scores both against held-out rankings by completeness (fraction
//! of pairs ordered) and correctness (gamma rank correlation on the ordered
//! pairs), swept over a grid of thresholds.
//!
//! With the default `parallel` feature, per-instance and per-fold work runs
//! on rayon; results are identical to the sequential build.

pub mod abstention;
pub mod error;
pub mod eval;
pub mod io;
pub mod learners;
pub mod models;
pub mod parallel;
pub mod perm;
pub mod relation;
pub mod synth;

pub use abstention::{
    find_q_min, predict_baseline, predict_probabilistic, threshold_relation, AbstentionPrediction, Threshold,
};
pub use error::{Error, Result};
pub use eval::{
    completeness, cross_validate, gamma_correctness, sweep, CrossValidation, Method, QGrid, TradeoffCurve,
    TradeoffPoint,
};
pub use learners::{ensemble_relation, knn_neighbors, predict_model, Dataset, LearnerConfig, ModelKind};
pub use models::{FitReport, MallowsModel, PlModel, PreferenceModel};
pub use perm::{enumerate_rankings, kendall_distance, Ranking};
pub use relation::{PartialOrder, StrictRelation, ValuedPreferenceRelation};
