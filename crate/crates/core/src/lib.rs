//! Quaternionic hyperbolic isometries: similarity classes, right eigenvalues,
//! real traces, pair invariants, conjugacy decisions and surface assembly.

pub mod acceptance;
pub mod classify;
pub mod conjugacy;
pub mod error;
pub mod fenchel;
pub mod invariants;
pub mod model;
pub mod qmat;
pub mod quat;
pub mod sample;
pub mod tol;

pub use error::{Error, Result};
pub use qmat::{Group, QMatrix, QVec};
pub use quat::{Quaternion, SimClass};
pub use tol::Tolerances;
