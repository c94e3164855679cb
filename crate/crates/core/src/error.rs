use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("room dimensions must be positive and finite")]
    InvalidRoom,
    #[error("duplicate object id `{0}`")]
    DuplicateId(String),
    #[error("object `{0}` has a non-positive or non-finite dimension")]
    NonPositiveDimension(String),
    #[error("object `{0}` has a scale component outside (0, 1]")]
    InvalidScale(String),
    #[error("object `{0}` has a non-finite pose")]
    NonFinitePose(String),
    #[error("object `{object}` references unknown parent `{parent}`")]
    DanglingParent { object: String, parent: String },
    #[error("parent cycle through object `{0}`")]
    ParentCycle(String),
    #[error("unknown object id `{0}`")]
    UnknownId(String),
    #[error("constraint on `{0}` references the same object twice")]
    SelfReference(String),
    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),
    #[error("adjacency between `{a}` and `{b}` has a negative target distance")]
    NegativeDistance { a: String, b: String },
}

#[derive(Debug, Error)]
pub enum EditError {
    #[error("unknown object id `{0}`")]
    UnknownId(String),
    #[error("object id `{0}` already exists")]
    DuplicateId(String),
    #[error("moving `{object}` under `{parent}` would create a parent cycle")]
    MoveToDescendant { object: String, parent: String },
    #[error("added constraint does not involve the added object `{0}`")]
    UnrelatedConstraint(String),
    #[error(transparent)]
    Invalid(#[from] SceneError),
}

#[derive(Debug, Error)]
pub enum RankError {
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("asset `{0}` has a non-positive dimension")]
    NonPositiveDimension(String),
    #[error("embedding dimension mismatch for asset `{id}`: query {query}, asset {asset}")]
    DimensionMismatch { id: String, query: usize, asset: usize },
    #[error("no semantic similarity available for asset `{0}`")]
    MissingSemantic(String),
    #[error("no visual similarity available for asset `{0}`")]
    MissingVisual(String),
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("scene corpus is empty")]
    EmptyCorpus,
    #[error("search space for `{0}` needs 0 < min < max")]
    InvalidRange(String),
    #[error("trial budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Scene(#[from] SceneError),
}
