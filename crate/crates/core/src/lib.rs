//! Polyhedral realizations of affine crystal bases through Young walls and
//! truncated walls.
//!
//! The crate computes the inequality systems cutting out the images of
//! `B(infinity)` and `B(lambda)` inside `Z^infinity` and checks them against a
//! direct implementation of the crystal operators.

pub mod adapted_sequence;
pub mod affine_data;
pub mod error;
pub mod linear_forms;
pub mod wall_forms;
pub mod walls;
pub mod zcrystal;

pub use adapted_sequence::{AdaptedSequence, DoubleIndex, ShiftTable};
pub use affine_data::{AffineType, CartanMatrix, Family, HalfInt, Thresholds};
pub use error::{Error, Result};
pub use linear_forms::{DominantWeight, LinearForm};
pub use walls::{Wall, WallOrPair, WallPair};
pub use zcrystal::ZElement;
