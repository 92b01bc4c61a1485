//! Far-field scattering functions and the integral route to the second-order
//! effective wavenumber of the fastest wave.
//!
//! ```text
//! f^{qp}(theta) = sum_n (2n+1) T_n^{qp} P_n(cos theta)
//! S(kappa)      = sum_{n,nu,l} (2n+1)(2nu+1) T_n^{qp} T_nu^{pq} kappa^l G(nu,n,l)
//!               = (1 - kappa^2)/2 int_0^pi f^{qp} f^{pq} sin theta / (1 - 2 kappa cos theta + kappa^2)^{3/2}
//! ```
//!
//! The integral form needs `|kappa| < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::specfun::{legendre_derivative_table, legendre_table, GauntTable};
use crate::tmatrix::TMatrixSet;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Quadrature settings used by the far-field integrals unless overridden.
pub fn default_quadrature() -> QuadOptions {
    QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_depth: 15,
    }
}

/// `f^{qp}` as a truncated Legendre series.
#[derive(Debug, Clone)]
pub struct FarField {
    pub q: usize,
    pub p: usize,
    coeffs: Vec<Complex64>,
}

impl FarField {
    pub fn new(t: &TMatrixSet, q: usize, p: usize) -> Self {
        let coeffs = (0..=t.n_max()).map(|n| t.get(n, q, p) * (2 * n + 1) as f64).collect();
        FarField { q, p, coeffs }
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let pn = legendre_table(self.n_max(), theta.cos());
        self.coeffs.iter().zip(pn).map(|(c, p)| c * p).sum()
    }

    /// `sum_n (2n+1) T_n P_n'(cos theta)`, so that `df/dtheta = -sin theta * this`.
    pub fn slope(&self, theta: f64) -> Complex64 {
        let dp = legendre_derivative_table(self.n_max(), theta.cos());
        self.coeffs.iter().zip(dp).map(|(c, d)| c * d).sum()
    }

    pub fn derivative(&self, theta: f64) -> Complex64 {
        -self.slope(theta) * theta.sin()
    }

    /// Forward value `sum (2n+1) T_n`.
    pub fn forward(&self) -> Complex64 {
        self.coeffs.iter().sum()
    }

    /// Backward value `sum (-1)^n (2n+1) T_n`.
    pub fn backward(&self) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| if n % 2 == 0 { *c } else { -c })
            .sum()
    }
}

pub fn farfield_f(t: &TMatrixSet, q: usize, p: usize, theta: f64) -> Complex64 {
    FarField::new(t, q, p).eval(theta)
}

fn check_kappa(kappa: Complex64) -> Result<()> {
    if !(kappa.norm() < 1.0) {
        return Err(Error::Domain(format!("|kappa| must be < 1, got {}", kappa.norm())));
    }
    Ok(())
}

/// `(1 - 2 kappa cos theta + kappa^2)^{-3/2}`, evaluated as the product of
/// `(1 - kappa e^{+-i theta})^{-3/2}`: both factors have positive real part
/// for `|kappa| < 1`, so the principal powers are continuous in `theta`.
fn kernel(kappa: Complex64, theta: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, theta);
    let a = Complex64::new(1.0, 0.0) - kappa * e;
    let b = Complex64::new(1.0, 0.0) - kappa * e.conj();
    a.powf(-1.5) * b.powf(-1.5)
}

/// `g(kappa, theta) = sum_m (2m+1) kappa^m P_m(cos theta)
///                  = (1 - kappa^2) (1 - 2 kappa cos theta + kappa^2)^{-3/2}`.
pub fn g_kappa_theta(kappa: Complex64, theta: f64) -> Result<Complex64> {
    check_kappa(kappa)?;
    Ok((1.0 - kappa * kappa) * kernel(kappa, theta))
}

/// Partial sum of the `g` series through order `m_max`.
pub fn g_kappa_series(kappa: Complex64, theta: f64, m_max: usize) -> Complex64 {
    let pm = legendre_table(m_max, theta.cos());
    let mut power = Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for (m, p) in pm.iter().enumerate() {
        s += power * ((2 * m + 1) as f64 * p);
        power *= kappa;
    }
    s
}

/// Tail bound of [`g_kappa_series`]: `|kappa|^{M+1} (2M+3) / (1-|kappa|)^3`.
pub fn g_kappa_tail_bound(kappa: f64, m_max: usize) -> f64 {
    kappa.powi(m_max as i32 + 1) * (2 * m_max + 3) as f64 / (1.0 - kappa).powi(3)
}

/// Value of the triple sum together with the size of its outermost terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: Complex64,
    /// Sum of `|term|` over terms with `n = n_max` or `nu = n_max`.
    pub tail_estimate: f64,
}

impl SeriesSum {
    pub fn is_under_truncated(&self, rel_tol: f64) -> bool {
        self.tail_estimate > rel_tol * self.value.norm()
    }
}

/// `S(kappa)` for the pair `(q, p)`; valid for any `kappa` (the Gaunt support
/// keeps the `l` sum finite).
pub fn s_kappa_series(t: &TMatrixSet, q: usize, p: usize, kappa: Complex64, gaunt: &GauntTable) -> SeriesSum {
    let n_max = t.n_max().min(gaunt.max_n());
    let powers: Vec<Complex64> = (0..=2 * n_max).map(|l| kappa.powu(l as u32)).collect();
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    for n in 0..=n_max {
        let a = t.get(n, q, p) * (2 * n + 1) as f64;
        if a.norm() == 0.0 {
            continue;
        }
        for nu in 0..=n_max {
            let b = t.get(nu, p, q) * (2 * nu + 1) as f64;
            if b.norm() == 0.0 {
                continue;
            }
            let inner: Complex64 = gaunt.terms(n, nu).map(|(l, g)| powers[l] * g).sum();
            let term = a * b * inner;
            value += term;
            if n == n_max || nu == n_max {
                tail += term.norm();
            }
        }
    }
    SeriesSum {
        value,
        tail_estimate: tail,
    }
}

/// `S(kappa)` from its angular integral, `|kappa| < 1`.
pub fn s_kappa_integral(t: &TMatrixSet, q: usize, p: usize, kappa: Complex64, opts: QuadOptions) -> Result<Complex64> {
    check_kappa(kappa)?;
    let (fqp, fpq) = (FarField::new(t, q, p), FarField::new(t, p, q));
    if fqp.is_zero() || fpq.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let r = integrate(
        |th| fqp.eval(th) * fpq.eval(th) * kernel(kappa, th) * th.sin(),
        0.0,
        PI,
        opts,
    )?;
    Ok(0.5 * (1.0 - kappa * kappa) * r.value)
}

/// `delta_1 = -4 i pi f^{pp}(0) / k_p`.
pub fn delta1(t: &TMatrixSet, p: usize, k_p: Complex64) -> Complex64 {
    -4.0 * I * PI * FarField::new(t, p, p).forward() / k_p
}

/// `delta_2 = 4 pi^2 / k_p^4 { f(0)^2 - f(pi)^2 + int_0^pi d(f^2)/dtheta / sin(theta/2) dtheta }`
/// with `f = f^{pp}`.
///
/// Writing `sin theta = 2 sin(theta/2) cos(theta/2)` the integrand becomes
/// `-4 cos(theta/2) f(theta) sum (2n+1) T_n P_n'(cos theta)`, which is smooth on
/// the closed interval. `exclusion` trims `[0, exclusion]` from the range and
/// exists only to demonstrate that the endpoint is harmless.
pub fn delta2(t: &TMatrixSet, p: usize, k_p: Complex64, exclusion: f64, opts: QuadOptions) -> Result<Complex64> {
    let f = FarField::new(t, p, p);
    if f.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (f0, fpi) = (f.forward(), f.backward());
    let r = integrate(
        |th| -4.0 * (0.5 * th).cos() * f.eval(th) * f.slope(th),
        exclusion,
        PI,
        opts,
    )?;
    Ok(4.0 * PI * PI / k_p.powu(4) * (f0 * f0 - fpi * fpi + r.value))
}

/// Which of the two equivalent expressions to use for the coupling term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingForm {
    /// `sum_q 16 pi^2 / (k_p k_q (k_q^2 - k_p^2)) S(k_p/k_q)`
    Series,
    /// `sum_q 8 pi^2 / (k_p k_q^3) int f^{qp} f^{pq} sin theta (1 - 2 kappa cos theta + kappa^2)^{-3/2}`
    Integral,
}

fn coupled(t: &TMatrixSet, q: usize, p: usize) -> bool {
    let any = |a, b| (0..=t.n_max()).any(|n| t.get(n, a, b).norm() != 0.0);
    any(q, p) && any(p, q)
}

/// Second-order coupling correction `delta_2^(c)` for the fastest wave `p`.
///
/// Waves that do not exchange energy with `p` are skipped; every coupled wave
/// must be slower (`|k_p / k_q| < 1`), otherwise a regime error is returned.
pub fn delta2_coupling(
    t: &TMatrixSet,
    p: usize,
    ks: &[Complex64],
    form: CouplingForm,
    gaunt: &GauntTable,
    opts: QuadOptions,
) -> Result<Complex64> {
    let kp = ks[p];
    let mut total = Complex64::new(0.0, 0.0);
    for (q, &kq) in ks.iter().enumerate() {
        if q == p || !coupled(t, q, p) {
            continue;
        }
        let kappa = kp / kq;
        if !(kappa.norm() < 1.0) {
            return Err(Error::Regime(format!(
                "wave {} couples to slower-or-equal wave {} (|k_p/k_q| = {:.6}); use the low-frequency expansion",
                p + 1,
                q + 1,
                kappa.norm()
            )));
        }
        total += match form {
            CouplingForm::Series => {
                let s = s_kappa_series(t, q, p, kappa, gaunt).value;
                16.0 * PI * PI / (kp * kq * (kq * kq - kp * kp)) * s
            }
            CouplingForm::Integral => {
                let (fqp, fpq) = (FarField::new(t, q, p), FarField::new(t, p, q));
                let r = integrate(
                    |th| fqp.eval(th) * fpq.eval(th) * kernel(kappa, th) * th.sin(),
                    0.0,
                    PI,
                    opts,
                )?;
                8.0 * PI * PI / (kp * kq.powu(3)) * r.value
            }
        };
    }
    Ok(total)
}
