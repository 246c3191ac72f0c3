//! Numerical building blocks: ODE integration, quadrature and root finding.

mod dop853_tableau;
pub mod ode;
pub mod quad;
pub mod roots;

pub use ode::{Dop853, OdeOptions};
pub use quad::{integrate, integrate_with_breaks, QuadOptions, QuadResult};
pub use roots::{brent, brent_with_values, scan_roots};
