//! Numerical building blocks: compensated sums, quadrature, root finding.

mod compensated;
mod quadrature;
mod roots;

pub use compensated::{KahanArray, KahanSum};
pub use quadrature::{integrate, integrate_to_infinity, Integral};
pub use roots::{golden_section_max, secant_bisect, Root, RootOptions};
