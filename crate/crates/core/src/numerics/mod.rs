//! Numerical building blocks shared by the geometry modules.

pub mod quad;
pub mod rk;
pub mod roots;

pub use quad::{Estimate, Quadrature};
pub use rk::{DormandPrince, OdeSettings};
pub use roots::brent;
