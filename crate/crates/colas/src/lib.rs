//! Copula-seeded local latent-space random graphs: generation, network
//! statistics, large-graph limit formulas, one-graph calibration, and a
//! degree-preserving rewiring baseline.

pub mod calibration;
pub mod copula;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod geometry;
pub mod io;
pub mod limits;
pub mod rewiring;
pub mod rng;
pub mod stats;

pub use copula::{CopulaFamily, MarkSet, WeightMarginal};
pub use error::{Error, Result};
pub use generator::{GenConfig, Graph, Regime};
pub use geometry::{Kernel, KernelConstants};
