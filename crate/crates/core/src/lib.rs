//! Numerical laboratory for equivariant heat-trace asymptotics on compact
//! model spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`group`]: compact model groups, irreducible representations, Haar rules
//! * [`heat`]: Peter-Weyl heat kernels, isotypic kernels, bounds and probes
//! * [`traces`]: model spaces, equivariant traces and small-time fits
//! * [`symplectic`]: momentum maps, isotropy, orbit and Gaussian volumes
//! * [`oscillatory`]: oscillatory integrals and stationary phase
//! * [`selberg`]: finite lattices, the trace formula and bundle heat traces

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod group;
pub mod heat;
pub mod oscillatory;
pub mod quadrature;
pub mod selberg;
pub mod space;
pub mod symplectic;
pub mod traces;

pub use error::{EquiheatError, Result};
pub use group::{GroupElement, GroupKind, GroupModel, HalfInt, IrrepInfo, IrrepLabel, Quaternion};
