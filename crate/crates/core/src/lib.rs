//! Conceptor-based bias subspaces and debiasing for embedding collections.
//!
//! * [`conceptor`]: closed-form conceptors, NOT / AND / OR, projection.
//! * [`interchange`] and [`conceptor_file`]: the CEMB and CCON binary formats.
//! * [`subspace`]: wordlists, the percentile outlier filter, bias conceptors.
//! * [`seat`] and [`winobias`]: bias metrics.

pub mod conceptor;
pub mod conceptor_file;
pub mod error;
pub mod interchange;
pub mod linalg;
pub mod seat;
pub mod subspace;
pub mod synthetic;
pub mod winobias;

pub use conceptor::{
    and_op, apply_projection, compute_conceptor, compute_conceptor_with, negate, or_op, Conceptor, DataMatrix,
    GramScaling,
};
pub use error::{Error, Result};
pub use interchange::{CollectionKind, EmbeddingCollection, Manifest};
pub use seat::{effect_size, permutation_pvalue, EffectSizeResult, SeatTest};
pub use subspace::{build_bias_conceptor, filter_outliers, intersect_bias_conceptors, SubspaceSpec};
