//! Compressed index for trajectories of moving objects on an integer grid.
//!
//! Per-object movement logs are compressed with relative Lempel-Ziv against
//! an artificial reference. Unary bitmaps over the reference give
//! constant-time displacement queries, sampled local extrema give bounding
//! boxes, and per-phrase extrema plus periodic k²-tree snapshots answer
//! object, trajectory, time-slice and time-interval queries without
//! decompressing.

pub mod bench;
pub mod bitvec;
pub mod codec;
pub mod dataset;
pub mod error;
pub mod gen;
pub mod geom;
pub mod index;
pub mod k2tree;
pub mod oracle;
pub mod query;
pub mod reference;
pub mod rlz;
pub mod rmq;

pub use error::{Error, Result};
pub use geom::{BoundingBox, Position, Region};
pub use index::{IndexConfig, IndexStats, RctIndex};
pub use oracle::RawStore;
pub use query::{Query, QueryResult};
pub use reference::{MovementSymbol, Reference, ReferenceConfig};
pub use rlz::{Phrase, RawTrajectory, TrajectoryLog};
