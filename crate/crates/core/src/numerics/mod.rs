//! Numerical building blocks shared by the physics modules.

pub mod phase;
pub mod quad;
pub mod roots;
pub mod sum;

pub use statrs::function::gamma::ln_gamma;
