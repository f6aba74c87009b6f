//! Shared numerical kernel: bracketing roots, Gauss-Legendre quadrature,
//! Levenberg-Marquardt least squares and real-order Bessel functions.

pub mod bessel;
pub mod lsq;
pub mod quadrature;
pub mod roots;

pub use bessel::{bessel_jy, BesselError, BesselJY};
pub use lsq::{least_squares, FitResult, LmError, LmOptions};
pub use quadrature::GaussLegendre;
pub use roots::{brent, scan_sign_changes, sign_change_brackets, RootBracket, RootError};
