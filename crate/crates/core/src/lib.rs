//! Exact instability calculus: rational cones and formal fans, numerical invariants
//! `μ = l̂/√b̂`, optimal destabilizers, stratifications of torus models,
//! Harder–Narasimhan filtrations on finite lattices, spherical buildings over finite
//! fields, and the tautological-coefficient calculus for test configurations.

pub mod building;
pub mod cones;
pub mod error;
pub mod formalfan;
pub mod hn;
pub mod invariants;
pub mod kempf;
pub mod linalg;
pub mod rat;
pub mod stratify;

pub use error::{Error, Result};
pub use rat::Rat;
