//! Complex effective wavenumbers of coherent compressional, shear and thermal
//! waves in a host medium filled with identical spherical scatterers at random
//! positions.
//!
//! The pipeline is: per-frequency T-matrices ([`tmatrix`]) and host
//! wavenumbers feed a truncated modal system ([`modal`]) from which
//! [`dispersion`] extracts one effective wavenumber per host wave, either from
//! second-order expansions in the number density or from the full
//! determinant. [`farfield`] provides the far-field integral route for the
//! fastest wave.

pub mod dispersion;
pub mod error;
pub mod farfield;
pub mod modal;
pub mod quadrature;
pub mod specfun;
pub mod tmatrix;

pub use num_complex::Complex64;

pub use dispersion::{
    lowfreq_coefficients, solve_determinant, solve_determinant_all, wavenumber_asymptotic_o2, wavenumber_lloyd_berry,
    wavenumber_lowfreq_o2, xi_from_square, DispersionResult, EffectiveWavenumber, Method, SolverOptions,
};
pub use error::{Error, Result};
pub use farfield::{
    delta1, delta2, delta2_coupling, farfield_f, g_kappa_theta, s_kappa_integral, s_kappa_series, CouplingForm,
    FarField,
};
pub use modal::{n_ell, n_ell_table, ModalSettings, ModalSystem, Regime};
pub use quadrature::{integrate, QuadOptions, QuadResult};
pub use specfun::{gaunt0, GauntTable};
pub use tmatrix::{
    fluid_sphere_tmatrix, is_decoupled, load_tmatrix, save_tmatrix, Convention, FluidSphere, HostMedium, HostWave,
    MixtureSpec, TMatrixSet, WaveModel, WAVE_LABELS,
};
