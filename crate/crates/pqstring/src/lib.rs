//! Symbolic and numerical tools for `(p,q)` string equations, Gelfand–Dickey
//! hierarchies, Hirota bilinear forms, Painlevé reductions and the Fredholm
//! determinants built from their wave functions.

pub mod cli;
pub mod diffpoly;
pub mod error;
pub mod fredholm;
pub mod gdtools;
pub mod golden;
pub mod hirota;
pub mod linalg;
pub mod painleve;
pub mod pdeverify;
pub mod psdo;
pub mod wavekernel;

pub use error::{Error, Result};
