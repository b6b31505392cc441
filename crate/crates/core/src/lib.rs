//! One-way communication protocols that approximate dynamic time warping
//! distance, together with the exact oracles and instance generators used to
//! check them.
//!
//! Alice holds `x`, Bob holds `y`; Alice sends a single bit-accounted message
//! and Bob outputs an estimate `t` with `dtw(x, y) <= t <= α·dtw(x, y)`.

pub mod decompositions;
pub mod doc_exchange;
pub mod dtw;
pub mod error;
pub mod field;
pub mod gadgets;
pub mod harness;
pub mod io;
pub mod metric;
pub mod protocols;
pub mod randomness;
pub mod wire;

pub use error::{Error, Result};
pub use metric::{MetricKind, MetricSpace, Point};
pub use randomness::SharedRandomness;
