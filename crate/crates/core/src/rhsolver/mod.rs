//! Riemann-Hilbert solver on the six-ray contour.

pub mod cauchy;
pub mod jump;
pub mod solve;
pub mod recover;
