//! Hierarchical force-directed layout optimization for indoor scenes.

pub mod corpus;
pub mod deadlock;
pub mod editor;
pub mod error;
pub mod fixtures;
pub mod forces;
pub mod geometry;
pub mod metrics;
pub mod optimizer;
pub mod params;
pub mod ranker;
pub mod scene;
pub mod search;

pub use deadlock::{DeadlockEvent, DeadlockKind};
pub use corpus::gen_corpus;
pub use editor::{apply, edit_and_optimize, EditCommand, EditOutcome};
pub use error::{EditError, RankError, SceneError, SearchError};
pub use forces::{accumulate, ForceContribution, ForceField, ForceKind, ForceLedger};
pub use geometry::{footprint, Footprint, Mtv, Vec2};
pub use metrics::{evaluate, evaluate_corpus, MetricsReport};
pub use optimizer::{optimize, optimize_groups, residual, step, OptResult};
pub use params::{CollisionMode, OptimizerParams};
pub use ranker::{final_score, rank, size_score, AssetRecord, Catalog, Candidate, Query, RankWeights};
pub use scene::{
    load_scene, parse_scene, scene_to_json, ConstraintSet, ObjectState, ParentRef, RoomSpec, SceneState, Wall,
};
pub use search::{penalty, search, violations, SearchOutcome, SearchSpace, TrialRecord};
