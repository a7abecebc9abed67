//! Finite-level algebra for pseudocharacters, reducibility ideals, Selmer
//! groups and the commutative-algebra isomorphism criterion.

#![allow(clippy::needless_range_loop, clippy::large_enum_variant)]

pub mod catalog;
pub mod cohomology;
pub mod criterion;
pub mod group_rep;
pub mod instances;
pub mod linalg;
pub mod pseudochar;
pub mod ring_core;
pub mod zmod;

pub use zmod::{BaseRing, BaseRingError};
