//! Special functions: spherical Bessel/Hankel functions of complex argument,
//! Legendre polynomials and the `m = 0` Gaunt coefficients.

mod bessel;
mod gaunt;
mod legendre;

pub use bessel::{
    derivative_table, spherical_h1n, spherical_h1n_array, spherical_h1n_prime,
    spherical_h1n_with_derivative, spherical_jn, spherical_jn_array, spherical_jn_prime,
    spherical_jn_with_derivative, MAX_ORDER,
};
pub use gaunt::{gaunt0, orthonormal_factor, GauntTable};
pub use legendre::{legendre_derivative_table, legendre_pn, legendre_table};
