//! Unimodular lattices from self-dual codes over GF(5).
//!
//! Construction A lifts a self-dual code over the field with five elements
//! to a unimodular lattice. This crate builds those lattices exactly,
//! certifies minimum norm, kissing number and shadow minimum by complete
//! short-vector enumeration, constructs the two unimodular neighbors,
//! decides isometry, and assembles machine-readable certificates.

pub mod certify;
pub mod checkpoint;
pub mod enumeration;
pub mod gf5;
pub mod isometry;
pub mod lattice;
pub mod matrix;
pub mod qseries;
pub mod reduction;
pub mod search;
