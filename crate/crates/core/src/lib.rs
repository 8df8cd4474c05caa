//! Finite-dimensional calculus of frames and semi-frames.
//!
//! The crate models discrete and continuous families of vectors by finite
//! truncations and quadrature discretizations, and computes with them:
//! analysis/synthesis/frame/Gram operators, optimal bounds, canonical duals,
//! reproducing kernels, the Hilbert scales generated by `S^{-1/2}` and
//! `G^{-1/2}`, fusion systems, and equivalences of rank-n systems.

pub mod atoms;
pub mod calculus;
pub mod classify;
pub mod continuum;
pub mod duality;
pub mod equivalence;
pub mod error;
pub mod fusion;
pub mod json;
pub mod linalg;
pub mod random;
pub mod scale;

pub use atoms::{TruncationFamily, VectorSystem, WeightRule};
pub use calculus::{BoundsReport, FrameCalculus, SnapshotClass, SpectralFrameData};
pub use error::{FrameError, Result};
pub use classify::{SemiFrameVerdict, Verdict};
pub use scale::{HilbertScale, ScaleNorm};
