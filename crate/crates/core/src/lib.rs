//! Columnar serialization toolkit for replays of dynamic entity sets.
//!
//! Entity observations are regrouped instance-major (one column per field,
//! elements sorted by instance id and then time) before DEFLATE compression,
//! and many replays share one indexed container whose sections are ordered
//! so cheap partial reads never touch the bulky entity data.

pub mod bench;
pub mod bits;
pub mod container;
pub mod error;
pub mod layout;
pub mod model;
pub mod schema;
pub mod semantics;
pub mod simgen;
pub mod store;
pub mod value;

pub use error::{Error, Result};
