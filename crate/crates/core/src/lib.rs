//! Tent spaces on finite metric measure spaces.

pub mod audit;
pub mod error;
pub mod functionals;
pub mod halfspace;
pub mod io;
pub mod operators;
pub mod sample;
pub mod space;
pub mod tolerance;
pub mod verify;
pub mod zoo;

pub use error::{Error, Result};
pub use functionals::{AVariant, KernelCenter, KernelScale};
pub use halfspace::{HalfSpaceFunction, RegionMask, TimeGrid};
pub use space::{Ball, PointSet, Space};
