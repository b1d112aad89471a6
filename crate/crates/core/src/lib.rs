//! Numerical construction and verification of constant-Gaussian-curvature
//! surface foliations of the complement of a convex core in hyperbolic
//! 3-space.
//!
//! The crate is organised around the pipeline that builds such a
//! foliation leaf by leaf:
//!
//! - [`hypgeo`] — exact hyperboloid-model geometry: Minkowski vectors,
//!   distances, geodesic normal flow, the ideal boundary, and the two
//!   model convex cores (a geodesic plane and a dihedral wedge).
//! - [`surfcalc`] — discrete surface calculus on Fermi graph patches:
//!   immersion, fundamental forms, Weingarten operator, Hessians, area.
//! - [`equiflow`] — the matrix Riccati evolution of the Weingarten
//!   operator under equidistant flow, its closed-form eigenvalue
//!   branches, and the curvature bound for pushed-off leaves.
//! - [`continuation`] — the curvature-marching solver: a linear elliptic
//!   solve for the normal speed per stage, then a synchronized advance
//!   of shape operator, metric, immersion and normal field.
//! - [`foliation`] — foliation-level analytics: exact Fuchsian leaves,
//!   nesting checks, distance/area/volume tables, wedge equidistants.
//! - [`verify`] — the named verification suites the CLI exposes; each
//!   check reports a measured value against its pinned bound.

pub mod continuation;
pub mod equiflow;
pub mod error;
pub mod foliation;
pub mod hypgeo;
pub mod surfcalc;
pub mod verify;

pub use error::{Error, Result};
