//! Fixtures shared by the benchmarks.

use coherent_core::{fluid_sphere_tmatrix, FluidSphere, HostMedium, MixtureSpec, ModalSystem, TMatrixSet, WAVE_LABELS};
use num_complex::Complex64;

/// Single-wave fluid sphere at `k a = ka` with volume fraction `phi`.
pub fn fluid_sphere_system(ka: f64, phi: f64) -> ModalSystem {
    let host = HostMedium::fluid(1.0).expect("valid host");
    let t = fluid_sphere_tmatrix(&host, 1.0, FluidSphere { density: 2.0, speed: 1.5 }, 1.0, ka, 40)
        .expect("regular sphere");
    let mix = MixtureSpec::from_volume_fraction(phi, 1.0, 2.1).expect("valid mixture");
    ModalSystem::new(vec![Complex64::new(ka, 0.0)], &t, mix).expect("valid system")
}

/// Coupled three-wave set with geometric decay `0.3^n`.
pub fn coupled_three_wave(n_max: usize) -> TMatrixSet {
    let orders = (0..=n_max)
        .map(|n| {
            let decay = 0.3f64.powi(n as i32);
            (0..3)
                .map(|q| {
                    (0..3)
                        .map(|p| {
                            let s = (q * 3 + p + 1) as f64;
                            Complex64::new(0.05 * decay * (0.7 + 0.1 * s).sin(), 0.04 * decay * (0.3 * s).cos())
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let labels = WAVE_LABELS.iter().map(|s| s.to_string()).collect();
    TMatrixSet::new(labels, 0.2, None, orders).expect("consistent dimensions")
}

pub fn three_wave_system(n_max: usize) -> ModalSystem {
    let ks = vec![Complex64::new(1.0, 0.01), Complex64::new(2.5, 0.4), Complex64::new(4.0, 3.0)];
    let mix = MixtureSpec::new(0.05, 0.2, 0.5).expect("valid mixture");
    ModalSystem::with_truncation(ks, &coupled_three_wave(n_max), mix, n_max).expect("valid system")
}
