//! Twisted `GL(d, ℝ)` cocycles over hyperbolic homeomorphisms.
//!
//! Base systems ([`dynamics`]), automorphism twists ([`twisting`]), cocycles
//! and generators ([`cocycle`]), fiber-bunching certificates and adapted
//! norms ([`bunching`]), stable/unstable holonomies ([`holonomy`]), transfer
//! maps rebuilt from periodic data ([`transfer`]) and a declarative
//! experiment runner ([`experiments`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod holonomy;
pub mod linalg;
pub mod transfer;
pub mod twisting;
pub mod bunching;
pub mod cocycle;
pub mod experiments;
