//! Building blocks of the dispersion relation.
//!
//! For a trial effective wavenumber `xi` and host wave `p`, with
//! `y_p = xi^2 - k_p^2` and `eps = -4 i n0`:
//!
//! ```text
//! N_l^(p)(xi)    = xi b j_l'(xi b) h_l(k_p b) - k_p b j_l(xi b) h_l'(k_p b)
//! Qbar^(p)_{n nu} = pi / (k_p y_p) [ i k_p b sum_l N_l^(p)(xi) G(nu,n,l) - 1 ] (-1)^{n+nu}
//! T_{n nu}^{qp}   = delta_{n nu} (2 nu + 1) T_nu^{qp}
//! M_qp(xi)       = pi / sqrt(k_q k_p) <e| T (I - eps Qbar T)^{-1} |e>
//! ```
//!
//! with `e_n = (-1)^n` restricted to the appropriate wave blocks. The bracket
//! in `Qbar^(p)` vanishes at `xi = k_p` (Wronskian), so `y_p Qbar^(p)` is
//! analytic there and the at-`k_p` forms below are its limits.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{spherical_h1n_with_derivative, spherical_jn_with_derivative, GauntTable};
use crate::tmatrix::{MixtureSpec, TMatrixSet};

/// Truncation default: last order with some `|T_n^{qp}| >= 1e-12`, capped.
pub const DEFAULT_TRUNCATION_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_MAX_ORDER: usize = 64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Which closed forms to use for `Qbar` at `xi = k_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// exact Bessel/Hankel forms
    General,
    /// `k b -> 0` limits
    LowFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalSettings {
    /// `|k_p^2 - k_q^2|` below `degeneracy_tol * max |k^2|` is rejected.
    pub degeneracy_tol: f64,
    /// `|y_p|` below `singular_tol * |k_p^2|` needs the at-`k_p` limit.
    pub singular_tol: f64,
    /// Largest accepted pivot-ratio condition estimate of `I - eps Qbar T`.
    pub max_condition: f64,
}

impl Default for ModalSettings {
    fn default() -> Self {
        ModalSettings {
            degeneracy_tol: 1e-8,
            singular_tol: 1e-10,
            max_condition: 1e14,
        }
    }
}

/// `N_l^(p)(xi)` for `l = 0..=l_max`.
pub fn n_ell_table(l_max: usize, xi: Complex64, k_p: Complex64, b: f64) -> Result<Vec<Complex64>> {
    if k_p.norm() == 0.0 {
        return Err(Error::Domain("host wavenumber must be non-zero".into()));
    }
    if !(b > 0.0) {
        return Err(Error::Domain(format!("hole radius must be positive, got {b}")));
    }
    let (zx, zk) = (xi * b, k_p * b);
    let (j, jd) = spherical_jn_with_derivative(l_max, zx)?;
    let (h, hd) = spherical_h1n_with_derivative(l_max, zk)?;
    let out: Vec<Complex64> = (0..=l_max).map(|l| zx * jd[l] * h[l] - zk * j[l] * hd[l]).collect();
    if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Range(format!(
            "N_l kernel overflowed for xi b = {zx}, k b = {zk}, l <= {l_max}"
        )));
    }
    Ok(out)
}

/// `N_l^(p)(xi) = xi b j_l'(xi b) h_l(k_p b) - k_p b j_l(xi b) h_l'(k_p b)`.
pub fn n_ell(l: usize, xi: Complex64, k_p: Complex64, b: f64) -> Result<Complex64> {
    Ok(n_ell_table(l, xi, k_p, b)?[l])
}

/// Square matrix of `(n_max+1)` rows per wave block, row-major.
pub type Block = DMatrix<Complex64>;

/// The truncated modal problem at one angular frequency.
#[derive(Debug, Clone)]
pub struct ModalSystem {
    ks: Vec<Complex64>,
    tmatrix: TMatrixSet,
    mixture: MixtureSpec,
    n_max: usize,
    gaunt: Arc<GauntTable>,
    settings: ModalSettings,
    warnings: Vec<String>,
}

impl ModalSystem {
    /// `ks[p]` is the host wavenumber of wave `p` at the frequency of `tmatrix`.
    pub fn new(ks: Vec<Complex64>, tmatrix: &TMatrixSet, mixture: MixtureSpec) -> Result<Self> {
        let n_max = tmatrix.significant_order(DEFAULT_TRUNCATION_THRESHOLD, DEFAULT_MAX_ORDER);
        Self::with_truncation(ks, tmatrix, mixture, n_max)
    }

    pub fn with_truncation(
        ks: Vec<Complex64>,
        tmatrix: &TMatrixSet,
        mixture: MixtureSpec,
        n_max: usize,
    ) -> Result<Self> {
        if ks.len() != tmatrix.p() {
            return Err(Error::Validation(format!(
                "{} host wavenumbers for a T-matrix with P = {}",
                ks.len(),
                tmatrix.p()
            )));
        }
        for (p, k) in ks.iter().enumerate() {
            if !(k.re.is_finite() && k.im.is_finite()) || k.norm() == 0.0 || k.im < 0.0 {
                return Err(Error::Validation(format!(
                    "host wavenumber k_{} = {k} must be finite, non-zero with Im k >= 0",
                    p + 1
                )));
            }
        }
        let mut warnings = Vec::new();
        if tmatrix.is_under_truncated() {
            warnings.push(format!(
                "T-matrix under-truncated: |T_n| at n_max = {} is {:e}",
                tmatrix.n_max(),
                tmatrix.order_magnitude(tmatrix.n_max())
            ));
        }
        let needed = tmatrix.significant_order(DEFAULT_TRUNCATION_THRESHOLD, usize::MAX);
        if n_max < needed {
            warnings.push(format!(
                "truncation n_max = {n_max} drops orders up to {needed} with |T_n| >= {DEFAULT_TRUNCATION_THRESHOLD:e}"
            ));
        }
        Ok(ModalSystem {
            ks,
            tmatrix: tmatrix.truncated(n_max),
            mixture,
            n_max,
            gaunt: GauntTable::shared(n_max),
            settings: ModalSettings::default(),
            warnings,
        })
    }

    pub fn with_settings(mut self, settings: ModalSettings) -> Self {
        self.settings = settings;
        self
    }

    /// Reuse a shared table; it must cover `n_max`.
    pub fn with_gaunt(mut self, gaunt: Arc<GauntTable>) -> Self {
        assert!(gaunt.max_n() >= self.n_max, "Gaunt table too small for truncation");
        self.gaunt = gaunt;
        self
    }

    pub fn ks(&self) -> &[Complex64] {
        &self.ks
    }

    pub fn p(&self) -> usize {
        self.ks.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tmatrix(&self) -> &TMatrixSet {
        &self.tmatrix
    }

    pub fn mixture(&self) -> &MixtureSpec {
        &self.mixture
    }

    pub fn gaunt(&self) -> &GauntTable {
        &self.gaunt
    }

    pub fn settings(&self) -> &ModalSettings {
        &self.settings
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn epsilon(&self) -> Complex64 {
        self.mixture.epsilon()
    }

    /// Same host, T-matrix and truncation at a different number density.
    pub fn with_number_density(&self, n0: f64) -> Result<Self> {
        Ok(ModalSystem {
            mixture: self.mixture.with_number_density(n0)?,
            ..self.clone()
        })
    }

    /// Single-wave system for host wave `p` with `T^{pp}` only.
    pub fn diagonal_subsystem(&self, p: usize) -> ModalSystem {
        ModalSystem {
            ks: vec![self.ks[p]],
            tmatrix: self.tmatrix.diagonal_block(p),
            ..self.clone()
        }
    }

    /// True if wave `q` exchanges energy with wave `p` through `T`.
    pub fn coupled(&self, q: usize, p: usize) -> bool {
        let any = |a: usize, b: usize| (0..=self.n_max).any(|n| self.tmatrix.get(n, a, b).norm() != 0.0);
        any(q, p) && any(p, q)
    }

    /// Degeneracy guard shared with the dispersion solvers.
    pub fn check_distinct(&self, q: usize, p: usize) -> Result<()> {
        let scale = self.ks.iter().map(|k| (k * k).norm()).fold(0.0, f64::max);
        let threshold = self.settings.degeneracy_tol * scale;
        let gap = (self.ks[p] * self.ks[p] - self.ks[q] * self.ks[q]).norm();
        if gap < threshold {
            return Err(Error::Degenerate { q, p, gap, threshold });
        }
        Ok(())
    }

    fn l_max(&self) -> usize {
        2 * self.n_max
    }

    /// `sum_l G(nu,n,l) w_l`
    fn gaunt_sum(&self, n: usize, nu: usize, w: &[Complex64]) -> Complex64 {
        self.gaunt.terms(n, nu).map(|(l, g)| w[l] * g).sum()
    }

    fn gaunt_sum_real(&self, n: usize, nu: usize, w: impl Fn(usize) -> f64) -> f64 {
        self.gaunt.terms(n, nu).map(|(l, g)| w(l) * g).sum()
    }

    fn block_from(&self, f: impl Fn(usize, usize) -> Complex64) -> Block {
        let m = self.n_max + 1;
        DMatrix::from_fn(m, m, f)
    }

    fn check_y(&self, p: usize, y: Complex64) -> Result<()> {
        let threshold = self.settings.singular_tol * (self.ks[p] * self.ks[p]).norm();
        if y.norm() < threshold {
            return Err(Error::UseSpecialization {
                p,
                magnitude: y.norm(),
                threshold,
            });
        }
        Ok(())
    }

    fn qbar_general_block_sq(&self, p: usize, xi: Complex64, xi_sq: Complex64) -> Result<Block> {
        let k = self.ks[p];
        let y = xi_sq - k * k;
        self.check_y(p, y)?;
        let b = self.mixture.hole_b();
        let nl = n_ell_table(self.l_max(), xi, k, b)?;
        let pre = PI / (k * y);
        let ikb = I * k * b;
        Ok(self.block_from(|n, nu| pre * (ikb * self.gaunt_sum(n, nu, &nl) - 1.0) * sign(n + nu)))
    }

    /// `Qbar^(p)` at a general trial wavenumber (`xi^2 != k_p^2`).
    pub fn qbar_general_block(&self, p: usize, xi: Complex64) -> Result<Block> {
        self.qbar_general_block_sq(p, xi, xi * xi)
    }

    pub fn qbar_general(&self, n: usize, nu: usize, p: usize, xi: Complex64) -> Result<Complex64> {
        Ok(self.qbar_general_block(p, xi)?[(n, nu)])
    }

    /// `Qbar^(q)` evaluated at `xi = k_p`, `q != p`.
    pub fn qbar_at_kp_offdiag_block(&self, q: usize, p: usize) -> Result<Block> {
        assert_ne!(q, p, "off-diagonal form requires q != p");
        self.check_distinct(q, p)?;
        let (kp, kq) = (self.ks[p], self.ks[q]);
        let b = self.mixture.hole_b();
        let nl = n_ell_table(self.l_max(), kp, kq, b)?;
        let pre = I * PI * b / (kp * kp - kq * kq);
        let shift = I / (kq * b);
        Ok(self.block_from(|n, nu| pre * sign(n + nu) * (shift + self.gaunt_sum(n, nu, &nl))))
    }

    pub fn qbar_at_kp_offdiag(&self, n: usize, nu: usize, q: usize, p: usize) -> Result<Complex64> {
        Ok(self.qbar_at_kp_offdiag_block(q, p)?[(n, nu)])
    }

    /// `Qbar^(p)` at its own removable singularity `xi = k_p`:
    ///
    /// ```text
    /// -i pi b^2/(2 k_p) (-1)^{n+nu} sum_l G { j_l'(z)(h_l(z) + z h_l'(z))
    ///                                         + (z^2 - l(l+1))/z j_l(z) h_l(z) },  z = k_p b
    /// ```
    ///
    /// Every Hankel factor is taken at `k_p b`; this is the `xi -> k_p` limit of
    /// the general block and is checked against it numerically.
    pub fn qbar_at_kp_diag_block(&self, p: usize) -> Result<Block> {
        let k = self.ks[p];
        let b = self.mixture.hole_b();
        let z = k * b;
        let lm = self.l_max();
        let (j, jd) = spherical_jn_with_derivative(lm, z)?;
        let (h, hd) = spherical_h1n_with_derivative(lm, z)?;
        let w: Vec<Complex64> = (0..=lm)
            .map(|l| {
                let ll = (l * (l + 1)) as f64;
                jd[l] * (h[l] + z * hd[l]) + (z * z - ll) / z * j[l] * h[l]
            })
            .collect();
        if w.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Range(format!("at-k_p kernel overflowed for k b = {z}")));
        }
        let pre = -I * PI * b * b / (2.0 * k);
        Ok(self.block_from(|n, nu| pre * sign(n + nu) * self.gaunt_sum(n, nu, &w)))
    }

    pub fn qbar_at_kp_diag(&self, n: usize, nu: usize, p: usize) -> Result<Complex64> {
        Ok(self.qbar_at_kp_diag_block(p)?[(n, nu)])
    }

    /// `k b -> 0` limit of the off-diagonal block:
    /// `pi/(k_q (k_p^2 - k_q^2)) (-1)^{n+nu} sum_l G [(k_p/k_q)^l - 1]`.
    pub fn qbar_lowfreq_offdiag_block(&self, q: usize, p: usize) -> Result<Block> {
        assert_ne!(q, p, "off-diagonal form requires q != p");
        self.check_distinct(q, p)?;
        let (kp, kq) = (self.ks[p], self.ks[q]);
        let kappa = kp / kq;
        let powers: Vec<Complex64> = (0..=self.l_max()).map(|l| kappa.powu(l as u32) - 1.0).collect();
        let pre = PI / (kq * (kp * kp - kq * kq));
        Ok(self.block_from(|n, nu| pre * sign(n + nu) * self.gaunt_sum(n, nu, &powers)))
    }

    pub fn qbar_lowfreq_offdiag(&self, n: usize, nu: usize, q: usize, p: usize) -> Result<Complex64> {
        Ok(self.qbar_lowfreq_offdiag_block(q, p)?[(n, nu)])
    }

    /// `k b -> 0` limit of the diagonal block: `pi/(2 k_p^3) (-1)^{n+nu} sum_l l G`.
    pub fn qbar_lowfreq_diag_block(&self, p: usize) -> Block {
        let k = self.ks[p];
        let pre = PI / (2.0 * k * k * k);
        self.block_from(|n, nu| pre * sign(n + nu) * self.gaunt_sum_real(n, nu, |l| l as f64))
    }

    pub fn qbar_lowfreq_diag(&self, n: usize, nu: usize, p: usize) -> Complex64 {
        self.qbar_lowfreq_diag_block(p)[(n, nu)]
    }

    /// `pi / sqrt(k_q k_p)` with the principal square root of the product.
    pub fn pair_prefactor(&self, q: usize, p: usize) -> Complex64 {
        real(PI) / (self.ks[q] * self.ks[p]).sqrt()
    }

    /// `M_qp^(0) = pi/sqrt(k_q k_p) sum_n (2n+1) T_n^{qp}`.
    pub fn m_order0(&self, q: usize, p: usize) -> Complex64 {
        let s: Complex64 = (0..=self.n_max)
            .map(|n| self.tmatrix.get(n, q, p) * (2 * n + 1) as f64)
            .sum();
        self.pair_prefactor(q, p) * s
    }

    /// `M_pp^(1)(k_p) = pi/k_p sum_q sum_{n,nu} (-1)^{n+nu} (2n+1)(2nu+1)
    /// T_n^{qp} Qbar^(q)_{n nu}(k_p) T_nu^{pq}`.
    ///
    /// Waves `q` that do not couple to `p` contribute exactly zero and are
    /// skipped, so they cannot trigger degeneracy errors.
    pub fn m_order1_diag(&self, p: usize, regime: Regime) -> Result<Complex64> {
        let t = &self.tmatrix;
        let mut total = Complex64::new(0.0, 0.0);
        for q in 0..self.p() {
            if q != p && !self.coupled(q, p) {
                continue;
            }
            let block = match (regime, q == p) {
                (Regime::General, true) => self.qbar_at_kp_diag_block(p)?,
                (Regime::General, false) => self.qbar_at_kp_offdiag_block(q, p)?,
                (Regime::LowFrequency, true) => self.qbar_lowfreq_diag_block(p),
                (Regime::LowFrequency, false) => self.qbar_lowfreq_offdiag_block(q, p)?,
            };
            for n in 0..=self.n_max {
                let left = t.get(n, q, p) * (2 * n + 1) as f64;
                if left.norm() == 0.0 {
                    continue;
                }
                for nu in 0..=self.n_max {
                    let right = t.get(nu, p, q) * (2 * nu + 1) as f64;
                    total += left * block[(n, nu)] * right * sign(n + nu);
                }
            }
        }
        Ok(total * PI / self.ks[p])
    }

    /// `Qbar^(r)` at `xi`, falling back to the at-`k_r` limit on the
    /// removable singularity.
    fn qbar_block_for_resolvent(&self, r: usize, xi: Complex64, xi_sq: Complex64) -> Result<Block> {
        match self.qbar_general_block_sq(r, xi, xi_sq) {
            Err(Error::UseSpecialization { .. }) => self.qbar_at_kp_diag_block(r),
            other => other,
        }
    }

    /// Full `P x P` matrix `[q][p] = M_qp(xi)` from the truncated resolvent,
    /// given `xi` and its square (kept separately so that `y_p = xi_sq - k_p^2`
    /// is formed without cancellation).
    pub fn m_full_matrix_sq(&self, xi: Complex64, xi_sq: Complex64) -> Result<Vec<Vec<Complex64>>> {
        let np = self.p();
        let m = self.n_max + 1;
        let dim = np * m;
        let eps = self.epsilon();
        let t = &self.tmatrix;
        let idx = |r: usize, n: usize| r * m + n;

        let mut a = DMatrix::<Complex64>::identity(dim, dim);
        if eps.norm() != 0.0 {
            for r in 0..np {
                let qb = self.qbar_block_for_resolvent(r, xi, xi_sq)?;
                for s in 0..np {
                    for nu in 0..m {
                        let tv = t.get(nu, s, r) * (2 * nu + 1) as f64;
                        if tv.norm() == 0.0 {
                            continue;
                        }
                        for n in 0..m {
                            a[(idx(r, n), idx(s, nu))] -= eps * qb[(n, nu)] * tv;
                        }
                    }
                }
            }
        }

        let mut rhs = DMatrix::<Complex64>::zeros(dim, np);
        for q in 0..np {
            for nu in 0..m {
                rhs[(idx(q, nu), q)] = real(sign(nu));
            }
        }
        let lu = a.lu();
        let diag = lu.u().diagonal();
        let (mut big, mut small) = (0.0f64, f64::INFINITY);
        for d in diag.iter() {
            big = big.max(d.norm());
            small = small.min(d.norm());
        }
        let condition = if small == 0.0 { f64::INFINITY } else { big / small };
        if !(condition <= self.settings.max_condition) {
            return Err(Error::IllConditioned { condition });
        }
        let x = lu
            .solve(&rhs)
            .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;

        let mut out = vec![vec![Complex64::new(0.0, 0.0); np]; np];
        for q in 0..np {
            for p in 0..np {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..m {
                    let mut tx = Complex64::new(0.0, 0.0);
                    for s in 0..np {
                        tx += t.get(n, s, p) * (2 * n + 1) as f64 * x[(idx(s, n), q)];
                    }
                    acc += tx * sign(n);
                }
                out[q][p] = self.pair_prefactor(q, p) * acc;
            }
        }
        Ok(out)
    }

    pub fn m_full_matrix(&self, xi: Complex64) -> Result<Vec<Vec<Complex64>>> {
        self.m_full_matrix_sq(xi, xi * xi)
    }

    pub fn m_full(&self, q: usize, p: usize, xi: Complex64) -> Result<Complex64> {
        Ok(self.m_full_matrix(xi)?[q][p])
    }
}

/// `y_p = xi^2 - k_p^2` for every host wave.
pub fn y_values(xi_sq: Complex64, ks: &[Complex64]) -> Vec<Complex64> {
    ks.iter().map(|k| xi_sq - k * k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::*;
    use crate::tmatrix::WAVE_LABELS;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn labels(p: usize) -> Vec<String> {
        WAVE_LABELS[..p].iter().map(|s| s.to_string()).collect()
    }

    /// Deterministic coupled P=3 set with decaying orders.
    fn synthetic3(n_max: usize) -> TMatrixSet {
        let mut orders = Vec::new();
        for n in 0..=n_max {
            let decay = 0.3f64.powi(n as i32);
            let m = (0..3)
                .map(|q| {
                    (0..3)
                        .map(|p| {
                            let s = (q * 3 + p + 1) as f64;
                            c(0.05 * decay * (0.7 + 0.1 * s).sin(), 0.04 * decay * (0.3 * s).cos())
                        })
                        .collect()
                })
                .collect();
            orders.push(m);
        }
        TMatrixSet::new(labels(3), 0.2, None, orders).unwrap()
    }

    fn system3(n0: f64) -> ModalSystem {
        let ks = vec![c(1.0, 0.01), c(2.5, 0.4), c(4.0, 3.0)];
        let mix = MixtureSpec::new(n0, 0.2, 0.5).unwrap();
        ModalSystem::with_truncation(ks, &synthetic3(3), mix, 3).unwrap()
    }

    #[test]
    fn n_ell_at_kp_is_minus_i_over_kb() {
        // Wronskian j h' - j' h = i/z^2 turns the kernel into -i/(k b).
        let b = 0.7;
        for k in [c(1.0, 0.0), c(0.3, 0.2), c(5.0, 1.0)] {
            let table = n_ell_table(20, k, k, b).unwrap();
            let expect = -I / (k * b);
            for (l, v) in table.iter().enumerate() {
                assert!((v - expect).norm() < 1e-10 * expect.norm(), "l={l}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn n_ell_zero_small_argument_series() {
        // j_0(z) = 1 - z^2/6 + z^4/120, h_0(z) = -i e^{iz}/z
        let (xi, k, b) = (c(0.011, 0.002), c(0.01, 0.0), 1.0);
        let (zx, zk) = (xi * b, k * b);
        let j0 = 1.0 - zx * zx / 6.0 + zx.powu(4) / 120.0;
        let j0d = -zx / 3.0 + zx.powu(3) / 30.0 - zx.powu(5) / 840.0;
        let h0 = -I * (I * zk).exp() / zk;
        let h0d = (I * zk).exp() * (zk + I) / (zk * zk);
        let oracle = zx * j0d * h0 - zk * j0 * h0d;
        let v = n_ell(0, xi, k, b).unwrap();
        assert!((v - oracle).norm() < 1e-10 * oracle.norm(), "{v} vs {oracle}");
    }

    #[test]
    fn n_ell_conjugation() {
        let (xi, k, b) = (c(1.3, 0.2), c(1.1, 0.05), 0.9);
        let a = n_ell_table(6, xi.conj(), k.conj(), b).unwrap();
        // conjugated Bessel evaluations: j_l(z*) = j_l(z)*, h_l^(1)(z*) = h_l^(2)(z)*
        let (zx, zk) = (xi * b, k * b);
        let (j, jd) = spherical_jn_with_derivative(6, zx).unwrap();
        // h^(2) = 2 j - h^(1) for the argument zk
        let (h1, h1d) = spherical_h1n_with_derivative(6, zk).unwrap();
        let (jk, jkd) = spherical_jn_with_derivative(6, zk).unwrap();
        for l in 0..=6 {
            let h2 = 2.0 * jk[l] - h1[l];
            let h2d = 2.0 * jkd[l] - h1d[l];
            let built = (zx * jd[l] * h2 - zk * j[l] * h2d).conj();
            assert!((a[l] - built).norm() < 1e-12 * built.norm(), "l={l}");
        }
    }

    #[test]
    fn hankel_at_zero_is_domain_error() {
        assert!(matches!(n_ell(0, c(1.0, 0.0), c(0.0, 0.0), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn qbar_general_hand_assembled_single_mode() {
        let ks = vec![c(1.2, 0.1)];
        let t = TMatrixSet::new(labels(1), 0.2, None, vec![vec![vec![c(0.1, 0.0)]]]).unwrap();
        let sys = ModalSystem::with_truncation(ks.clone(), &t, MixtureSpec::new(0.1, 0.2, 0.5).unwrap(), 0).unwrap();
        let xi = c(1.5, 0.2);
        let k = ks[0];
        let hand = PI / (k * (xi * xi - k * k)) * (I * k * 0.5 * n_ell(0, xi, k, 0.5).unwrap() * gaunt0(0, 0, 0) - 1.0);
        let v = sys.qbar_general(0, 0, 0, xi).unwrap();
        assert!((v - hand).norm() < 1e-14 * hand.norm());
    }

    #[test]
    fn qbar_general_sign_structure() {
        let sys = system3(0.01);
        let blk = sys.qbar_general_block(1, c(1.7, 0.3)).unwrap();
        for n in 0..=3 {
            for nu in 0..=3 {
                let a = blk[(n, nu)] * sign(n + nu);
                let b = blk[(nu, n)] * sign(n + nu);
                assert!((a - b).norm() <= 1e-14 * a.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn qbar_general_rejects_singular_point() {
        let sys = system3(0.01);
        let k = sys.ks()[0];
        assert!(matches!(sys.qbar_general(0, 0, 0, k), Err(Error::UseSpecialization { .. })));
    }

    /// Richardson extrapolation of the general block towards xi = k_p,
    /// symmetric points +-h, +-2h (error O(h^4)).
    fn extrapolated(sys: &ModalSystem, r: usize, target: Complex64, h: f64) -> Block {
        let at = |d: f64| sys.qbar_general_block(r, target * (1.0 + d)).unwrap();
        let s1 = (at(h) + at(-h)) * real(0.5);
        let s2 = (at(2.0 * h) + at(-2.0 * h)) * real(0.5);
        (s1 * real(4.0) - s2) * real(1.0 / 3.0)
    }

    #[test]
    fn at_kp_diag_is_limit_of_general() {
        let sys = system3(0.01);
        for p in 0..3 {
            let exact = sys.qbar_at_kp_diag_block(p).unwrap();
            let lim = extrapolated(&sys, p, sys.ks()[p], 1e-3);
            let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in exact.iter().zip(lim.iter()) {
                assert!((a - b).norm() <= 1e-8 * scale, "p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn at_kp_offdiag_is_limit_of_general() {
        let sys = system3(0.01);
        for p in 0..3 {
            for q in 0..3 {
                if q == p {
                    continue;
                }
                let exact = sys.qbar_at_kp_offdiag_block(q, p).unwrap();
                let kp = sys.ks()[p];
                let near = sys.qbar_general_block(q, kp * (1.0 + 1e-6)).unwrap();
                let near2 = sys.qbar_general_block(q, kp * (1.0 + 2e-6)).unwrap();
                let lim = near * real(2.0) - near2;
                let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
                for (a, b) in exact.iter().zip(lim.iter()) {
                    assert!((a - b).norm() <= 1e-8 * scale, "q={q} p={p}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn at_kp_offdiag_hand_composed_n0() {
        // n = nu = 0, k_q = 2 k_p real: only l = 0 survives.
        let kp = c(0.8, 0.0);
        let kq = 2.0 * kp;
        let b = 0.5;
        let t = TMatrixSet::zero(labels(2), 0.2, 0).unwrap();
        let sys = ModalSystem::with_truncation(vec![kp, kq], &t, MixtureSpec::new(0.1, 0.2, b).unwrap(), 0).unwrap();
        let (zp, zq) = (kp * b, kq * b);
        let bracket = zp * spherical_jn_prime(0, zp).unwrap() * spherical_h1n(0, zq).unwrap()
            - zq * spherical_jn(0, zp).unwrap() * spherical_h1n_prime(0, zq).unwrap();
        let hand = I * PI * b / (kp * kp - kq * kq) * (I / (kq * b) + bracket);
        let v = sys.qbar_at_kp_offdiag(0, 0, 1, 0).unwrap();
        assert!((v - hand).norm() < 1e-14 * hand.norm());
    }

    #[test]
    fn at_kp_diag_hand_composed_n0() {
        let k = c(0.9, 0.05);
        let b = 0.6;
        let t = TMatrixSet::zero(labels(1), 0.2, 0).unwrap();
        let sys = ModalSystem::with_truncation(vec![k], &t, MixtureSpec::new(0.1, 0.2, b).unwrap(), 0).unwrap();
        let z = k * b;
        let (j, jd) = (spherical_jn(0, z).unwrap(), spherical_jn_prime(0, z).unwrap());
        let (h, hd) = (spherical_h1n(0, z).unwrap(), spherical_h1n_prime(0, z).unwrap());
        let hand = -I * PI * b * b / (2.0 * k) * (jd * (h + z * hd) + z * j * h);
        let v = sys.qbar_at_kp_diag(0, 0, 0).unwrap();
        assert!((v - hand).norm() < 1e-14 * hand.norm());
    }

    #[test]
    fn lowfreq_limits() {
        // k b = 1e-4
        let ks = vec![c(1.0, 0.0), c(3.0, 1.0), c(7.0, 6.0)];
        let b = 1e-4;
        let t = synthetic3(2);
        let sys = ModalSystem::with_truncation(ks, &t, MixtureSpec::new(1.0, 4e-5, b).unwrap(), 2).unwrap();
        let rel = |x: &Block, y: &Block| {
            let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
        };
        for p in 0..3 {
            let d = rel(&sys.qbar_at_kp_diag_block(p).unwrap(), &sys.qbar_lowfreq_diag_block(p));
            assert!(d < 1e-6, "diag p={p}: {d}");
            for q in 0..3 {
                if q != p {
                    let d = rel(
                        &sys.qbar_at_kp_offdiag_block(q, p).unwrap(),
                        &sys.qbar_lowfreq_offdiag_block(q, p).unwrap(),
                    );
                    assert!(d < 1e-6, "offdiag q={q} p={p}: {d}");
                }
            }
        }
    }

    #[test]
    fn lowfreq_diag_values() {
        let k = c(2.0, 0.0);
        let t = TMatrixSet::zero(labels(1), 0.2, 1).unwrap();
        let sys = ModalSystem::with_truncation(vec![k], &t, MixtureSpec::new(0.1, 0.2, 0.5).unwrap(), 1).unwrap();
        assert_eq!(sys.qbar_lowfreq_diag(0, 0, 0), c(0.0, 0.0));
        let expect = PI / (2.0 * 8.0) * (4.0 / 3.0);
        assert!((sys.qbar_lowfreq_diag(1, 1, 0) - c(expect, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degeneracy_guard() {
        let ks = vec![c(1.0, 0.0), c(1.0, 1e-10)];
        let t = TMatrixSet::zero(labels(2), 0.2, 0).unwrap();
        let sys = ModalSystem::with_truncation(ks, &t, MixtureSpec::new(0.1, 0.2, 0.5).unwrap(), 0).unwrap();
        assert!(matches!(sys.qbar_at_kp_offdiag(0, 0, 1, 0), Err(Error::Degenerate { .. })));
        assert!(matches!(sys.qbar_lowfreq_offdiag(0, 0, 1, 0), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn order0_elements() {
        let t = TMatrixSet::zero(labels(2), 0.2, 3).unwrap();
        let sys = ModalSystem::with_truncation(vec![c(1.0, 0.0), c(2.0, 0.5)], &t, MixtureSpec::new(0.1, 0.2, 0.5).unwrap(), 3).unwrap();
        assert_eq!(sys.m_order0(0, 1), c(0.0, 0.0));
        let tv = c(0.3, -0.2);
        let mut orders = vec![vec![vec![c(0.0, 0.0); 2]; 2]];
        orders[0][1][0] = tv;
        let t = TMatrixSet::new(labels(2), 0.2, None, orders).unwrap();
        let ks = vec![c(1.0, 0.0), c(2.0, 0.5)];
        let sys = ModalSystem::with_truncation(ks.clone(), &t, MixtureSpec::new(0.1, 0.2, 0.5).unwrap(), 0).unwrap();
        let expect = PI * tv / (ks[1] * ks[0]).sqrt();
        assert!((sys.m_order0(1, 0) - expect).norm() < 1e-15);
    }

    #[test]
    fn order1_zero_and_monopole_lowfreq() {
        let sys = ModalSystem::with_truncation(
            vec![c(1.0, 0.0)],
            &TMatrixSet::zero(labels(1), 0.2, 2).unwrap(),
            MixtureSpec::new(0.1, 0.2, 0.5).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(sys.m_order1_diag(0, Regime::General).unwrap(), c(0.0, 0.0));
        // T_0 only: the l-weighted Gaunt sum for n = nu = 0 has only l = 0.
        let t = TMatrixSet::new(labels(1), 0.2, None, vec![vec![vec![c(0.02, 0.01)]]]).unwrap();
        let sys = ModalSystem::with_truncation(vec![c(1.0, 0.0)], &t, MixtureSpec::new(0.1, 0.2, 0.5).unwrap(), 0).unwrap();
        assert_eq!(sys.m_order1_diag(0, Regime::LowFrequency).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn order1_general_vs_lowfreq() {
        let ks = vec![c(1.0, 0.0), c(3.0, 1.0), c(7.0, 6.0)];
        let t = synthetic3(2);
        let sys = ModalSystem::with_truncation(ks, &t, MixtureSpec::new(1.0, 4e-5, 1e-4).unwrap(), 2).unwrap();
        for p in 0..3 {
            let g = sys.m_order1_diag(p, Regime::General).unwrap();
            let l = sys.m_order1_diag(p, Regime::LowFrequency).unwrap();
            assert!((g - l).norm() <= 1e-5 * l.norm(), "p={p}: {g} vs {l}");
        }
    }

    #[test]
    fn m_full_zero_eps_is_order0() {
        let sys = system3(0.0);
        let xi = c(1.05, 0.02);
        let m = sys.m_full_matrix(xi).unwrap();
        for q in 0..3 {
            for p in 0..3 {
                assert_eq!(m[q][p], sys.m_order0(q, p), "q={q} p={p}");
            }
        }
    }

    #[test]
    fn m_full_first_order_matches_order1() {
        // (M(xi = k_p; eps) - M^(0)) / eps -> M^(1) as eps -> 0, Richardson in eps.
        let base = system3(0.0);
        for p in 0..3 {
            let kp = base.ks()[p];
            let m1 = base.m_order1_diag(p, Regime::General).unwrap();
            let d = |n0: f64| {
                let s = base.with_number_density(n0).unwrap();
                (s.m_full(p, p, kp).unwrap() - s.m_order0(p, p)) / s.epsilon()
            };
            // d(h) = M1 + c1 h + c2 h^2 + ...; cancel c1 and c2
            let h = 1e-5;
            let rich = (d(h) * 8.0 - d(2.0 * h) * 6.0 + d(4.0 * h)) / 3.0;
            assert!((rich - m1).norm() <= 1e-8 * m1.norm(), "p={p}: {rich} vs {m1}");
        }
    }

    #[test]
    fn m_full_decoupled_blocks() {
        let mut orders = Vec::new();
        for n in 0..=2 {
            let mut m = vec![vec![c(0.0, 0.0); 3]; 3];
            for p in 0..3 {
                m[p][p] = c(0.05 / (n + 1) as f64, 0.01 * p as f64);
            }
            orders.push(m);
        }
        let t = TMatrixSet::new(labels(3), 0.2, None, orders).unwrap();
        let ks = vec![c(1.0, 0.01), c(2.5, 0.4), c(4.0, 3.0)];
        let sys = ModalSystem::with_truncation(ks, &t, MixtureSpec::new(0.05, 0.2, 0.5).unwrap(), 2).unwrap();
        let m = sys.m_full_matrix(c(1.1, 0.05)).unwrap();
        for q in 0..3 {
            for p in 0..3 {
                if q != p {
                    assert_eq!(m[q][p], c(0.0, 0.0));
                }
            }
            let sub = sys.diagonal_subsystem(q).m_full(0, 0, c(1.1, 0.05)).unwrap();
            assert!((sub - m[q][q]).norm() <= 1e-14 * sub.norm());
        }
    }

    #[test]
    fn truncation_convergence() {
        // A rapidly decaying set: doubling n_max leaves M^(1) unchanged to 1e-12.
        let host = crate::tmatrix::HostMedium::fluid(1.0).unwrap();
        let t = crate::tmatrix::fluid_sphere_tmatrix(
            &host,
            1.0,
            crate::tmatrix::FluidSphere { density: 2.0, speed: 1.5 },
            0.3,
            1.0,
            24,
        )
        .unwrap();
        let mix = MixtureSpec::new(0.01, 0.3, 0.61).unwrap();
        let a = ModalSystem::with_truncation(vec![c(1.0, 0.0)], &t, mix, 10).unwrap();
        let b = ModalSystem::with_truncation(vec![c(1.0, 0.0)], &t, mix, 20).unwrap();
        let (ma, mb) = (a.m_order1_diag(0, Regime::General).unwrap(), b.m_order1_diag(0, Regime::General).unwrap());
        assert!((ma - mb).norm() <= 1e-12 * mb.norm(), "{ma} vs {mb}");
    }
}
