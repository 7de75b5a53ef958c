//! Exact Hopf bifurcation data of internal-layer solutions of the shadow
//! reaction-diffusion system
//!
//! ```text
//! u_t = ε²u_xx + u - u³ - αξ,   τξ_t = ∫₀¹ (βu - γξ) dx,   u_x = 0 at x = 0, 1,
//! ```
//!
//! together with a semi-implicit simulator and the post-processing needed to
//! compare simulated oscillations with the closed-form predictions.

pub mod analyze;
pub mod config;
pub mod cubic;
pub mod elliptic;
pub mod error;
pub mod oracle;
pub mod simulate;
pub mod spectrum;
pub mod stationary;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use stationary::{build_profile, Params, Sign, StationaryProfile};
