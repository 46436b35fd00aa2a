//! Core algorithms for aerodynamic shape optimization of 2D airfoils.
//!
//! The crate covers the full pipeline from geometry to learned optimization:
//!
//! * [`geom`]: Bezier parameterization, sample-point deformation actions,
//!   thickness constraints, discrete curvature.
//! * [`mesh`]: unstructured triangle meshes, O-mesh generation, boundary-driven
//!   deformation with repair and smoothing, red/green and uniform refinement.
//! * [`euler`]: first-order finite-volume steady compressible Euler solver
//!   with an analytic flux Jacobian and pseudo-transient Newton continuation.
//! * [`adjoint`]: discrete adjoint solves, dual-weighted-residual error
//!   estimation, corrected functionals and the adaptation loop.
//! * [`nn`]: a small reverse-mode autodiff graph with dense and attention
//!   layers, Adam, and the actor/critic architectures built from it.
//! * [`rl`]: the shape-deformation environment, reward definitions, replay
//!   buffer, exploration noise and the TD3 training loop.
//!
//! The crate is `no_std` (with `alloc`); file IO and the command-line driver
//! live in the companion `airfoil-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adjoint;
pub mod config;
pub mod error;
pub mod euler;
pub mod geom;
pub mod linalg;
pub mod mesh;
pub mod nn;
pub mod rl;
pub mod sparse;

pub use error::CoreError;
