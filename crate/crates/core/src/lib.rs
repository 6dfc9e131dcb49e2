//! Quantum-kernel support vector machines on a local statevector simulator.
//!
//! The crate is organized bottom-up:
//!
//! * [`sim`] – dense statevector simulation and seeded measurement.
//! * [`featuremap`] – Z / ZZ feature-map circuits and the RBF baseline.
//! * [`qkernel`] – exact and shot-based kernel values, Gram matrices, PSD repair.
//! * [`svm`] – SMO dual solver, reference oracle, decision function.
//! * [`hardware`] – coupling maps, SWAP routing, trajectory noise.
//! * [`pipeline`] – CSV ingestion, encoding, PCA, scaling, splitting and the
//!   end-to-end experiment runner.
//!
//! Data-parallel loops (Gram entries, shots, seed sweeps) run on rayon when
//! the `parallel` feature is enabled and sequentially otherwise; see [`par`].

pub mod error;
pub mod featuremap;
pub mod hardware;
pub mod linalg;
pub mod par;
pub mod pipeline;
pub mod qkernel;
pub mod rng;
pub mod sim;
pub mod svm;

pub use error::{Error, Result};
