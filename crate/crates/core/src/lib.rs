//! Diophantine properties of fractal measures, studied through random walks on the
//! space of lattices, continued fractions and Möbius iterated function systems.

pub mod contfrac;
pub mod error;
pub mod exact;
pub mod groups;
pub mod ifs;
pub mod lattice;
pub mod linalg;
pub mod moebius;
pub mod randwalk;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
