//! Geometry engine for proper CAT(0) model spaces (Euclidean spaces, metric trees
//! with ends, and their products) together with a finite-base simulator of
//! equivalence-relation actions on fields of such spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`spaces`]: points, distances, geodesics, isometries.
//! * [`geometry`]: comparison angles, the CAT(0) audit, convex projection, circumcenters.
//! * [`boundary`]: geodesic rays, Busemann functions, Tits angles, angular circumcenters.
//! * [`asymptotics`]: limit sets of nested convex families, flat points, Euclidean factors.
//! * [`fields`]: scenarios, holonomy, invariant sections and the dichotomy analyzer.
//! * [`cli`] and [`document`]: the scenario format and the `cat0` command line.

pub mod asymptotics;
pub mod boundary;
pub mod cli;
pub mod document;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod numeric;
pub mod spaces;

pub use error::{Error, Result};
pub use spaces::{Isometry, Point, Space};
