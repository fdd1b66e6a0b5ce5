//! Special functions and quadrature.

pub mod gamma;
pub mod hypergeometric;
pub mod quadrature;

pub use gamma::{
    digamma, gamma, inverse_digamma, ln_gamma, ln_gamma_signed, log_gamma, psi, psi_real, rgamma, trigamma, EULER_GAMMA,
};
pub use hypergeometric::{gauss_2f1, gauss_2f1_ext, gauss_2f1_ext_complement};
pub use quadrature::{integrate, integrate_with, Domain, QuadOptions, QuadratureResult};
