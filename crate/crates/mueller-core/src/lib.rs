//! Stokes-Mueller calculus for rotating polarization elements.
//!
//! Provides the element matrices of a linear polarizer, quarter-wave plate
//! and coordinate rotator, all parameterized by a rotation angle about the
//! optical axis, plus state propagation for Stokes vectors.

mod angle;
mod mueller;
mod stokes;

pub use angle::Angle;
pub use mueller::{linear_polarizer, quarter_wave_plate, rotate_mueller, rotator, MuellerMatrix};
pub use stokes::StokesVector;
