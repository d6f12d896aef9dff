//! Operator-valued functions generated by passive selfadjoint
//! discrete-time systems.
//!
//! A passive system is a contraction `T = [D C; B A]` over an input space
//! and a state space; its transfer function `Omega(z) = D + zC(I-zA)^{-1}B`
//! is holomorphic on the plane cut along `(-inf,-1]` and `[1,+inf)` when the
//! system is selfadjoint. This crate realizes such functions at desk scale:
//! system validation and simulation, contractive block-operator
//! parametrizations, class certificates (Pick-type kernels and sampled
//! inequalities), compressed resolvents, and a catalog of transforms with
//! explicit realizations (the involution `Phi`, Moebius precompositions,
//! Redheffer feedback products, bi-inner dilations, spectral measures, and
//! their fixed points).

pub mod blocks;
pub mod cli;
pub mod error;
pub mod grids;
pub mod numkit;
pub mod systems;
pub mod rsclass;
pub mod seeded;
pub mod transforms;

pub use error::{Error, Result};
pub use numkit::{ComplexMatrix, HermitianMatrix};
pub use systems::{CutPlanePoint, PassiveSystem};
