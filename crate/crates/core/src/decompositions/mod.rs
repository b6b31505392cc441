//! Random metric decompositions: tree embeddings, tree simplification and
//! bounded-diameter partitions.

pub mod frt;
pub mod partition;
pub mod tree;

pub use frt::{frt_embed, EmbeddingResult, C_FRT};
pub use partition::{declared_sigma, sample_partition, Partition};
pub use tree::{r_simplify, tree_distance, TreeMetric};
