//! Gaunt coefficients for products of Legendre polynomials,
//!
//! ```text
//! P_n(x) P_nu(x) = sum_l G(n, nu, l) P_l(x),
//! G(n, nu, l) = (2l+1) * (n nu l; 0 0 0)^2
//! ```
//!
//! With `J = n + nu + l` even and `g = J/2`, the squared 3j symbol is
//! `A_{g-n} A_{g-nu} A_{g-l} / ((J+1) A_g)` where `A_m = (2m-1)!!/m!`. Every
//! `A_m` is of order `1/sqrt(m)`, so the product never overflows.

use std::sync::Arc;

fn a_table(m_max: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(m_max + 1);
    a.push(1.0);
    for m in 1..=m_max {
        let prev = a[m - 1];
        a.push(prev * (2 * m - 1) as f64 / m as f64);
    }
    a
}

fn admissible(n: usize, nu: usize, l: usize) -> bool {
    l >= n.abs_diff(nu) && l <= n + nu && (n + nu + l) % 2 == 0
}

fn gaunt_from_table(a: &[f64], n: usize, nu: usize, l: usize) -> f64 {
    let j = n + nu + l;
    let g = j / 2;
    // fixed factor order keeps G exactly symmetric in (n, nu)
    let (n, nu) = (n.min(nu), n.max(nu));
    (2 * l + 1) as f64 / (j + 1) as f64 * a[g - n] * a[g - nu] * a[g - l] / a[g]
}

/// `G(0,nu;0,n;l)`, the coefficient of `P_l` in `P_n P_nu`. Exactly zero
/// outside the triangle `|n-nu| <= l <= n+nu` or when `n+nu+l` is odd.
pub fn gaunt0(n: usize, nu: usize, l: usize) -> f64 {
    if !admissible(n, nu, l) {
        return 0.0;
    }
    let a = a_table((n + nu + l) / 2);
    gaunt_from_table(&a, n, nu, l)
}

/// Conversion factor to the orthonormal-harmonic Gaunt coefficient
/// `G_orth(n,0;nu,0;l) = G(0,nu;0,n;l) * sqrt((2n+1)(2nu+1) / (4 pi (2l+1)))`.
pub fn orthonormal_factor(n: usize, nu: usize, l: usize) -> f64 {
    (((2 * n + 1) * (2 * nu + 1)) as f64 / (4.0 * std::f64::consts::PI * (2 * l + 1) as f64)).sqrt()
}

/// Immutable table of `G(0,nu;0,n;l)` for `n, nu <= max_n`.
///
/// Only the admissible `l` (same parity as `n+nu`, within the triangle) are
/// stored; rows are indexed by `l_min = |n - nu|` with stride 2.
#[derive(Debug, Clone)]
pub struct GauntTable {
    max_n: usize,
    rows: Vec<Vec<f64>>,
}

impl GauntTable {
    pub fn new(max_n: usize) -> Self {
        let a = a_table(2 * max_n);
        let mut rows = Vec::with_capacity((max_n + 1) * (max_n + 1));
        for n in 0..=max_n {
            for nu in 0..=max_n {
                let lo = n.abs_diff(nu);
                let row = (lo..=n + nu)
                    .step_by(2)
                    .map(|l| gaunt_from_table(&a, n, nu, l))
                    .collect();
                rows.push(row);
            }
        }
        GauntTable { max_n, rows }
    }

    pub fn shared(max_n: usize) -> Arc<Self> {
        Arc::new(Self::new(max_n))
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// `(l_min, coefficients)` for the pair `(n, nu)`; coefficient `i`
    /// belongs to `l = l_min + 2 i`.
    pub fn row(&self, n: usize, nu: usize) -> (usize, &[f64]) {
        assert!(n <= self.max_n && nu <= self.max_n, "Gaunt index out of table range");
        (n.abs_diff(nu), &self.rows[n * (self.max_n + 1) + nu])
    }

    pub fn get(&self, n: usize, nu: usize, l: usize) -> f64 {
        if !admissible(n, nu, l) {
            return 0.0;
        }
        let (lo, row) = self.row(n, nu);
        row[(l - lo) / 2]
    }

    /// Iterator over `(l, G(0,nu;0,n;l))` for admissible `l`.
    pub fn terms(&self, n: usize, nu: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, row) = self.row(n, nu);
        row.iter().enumerate().map(move |(i, &g)| (lo + 2 * i, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(gaunt0(0, 0, 0), 1.0);
        assert!((gaunt0(1, 1, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((gaunt0(1, 1, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(gaunt0(1, 2, 2), 0.0);
        assert_eq!(gaunt0(2, 2, 5), 0.0);
        assert_eq!(gaunt0(3, 1, 1), 0.0);
    }

    #[test]
    fn table_matches_pointwise() {
        let t = GauntTable::new(12);
        for n in 0..=12 {
            for nu in 0..=12 {
                for l in 0..=25 {
                    assert_eq!(t.get(n, nu, l), gaunt0(n, nu, l));
                }
            }
        }
    }

    #[test]
    fn sum_rule_and_symmetry() {
        let t = GauntTable::new(25);
        for n in 0..=25 {
            for nu in 0..=25 {
                let s: f64 = t.terms(n, nu).map(|(_, g)| g).sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} nu={nu} sum={s}");
                for l in 0..=50 {
                    assert_eq!(t.get(n, nu, l), t.get(nu, n, l));
                }
            }
        }
    }

    #[test]
    fn orthonormal_conversion() {
        // Y_0^0 Y_0^0 = Y_0^0 / sqrt(4 pi)
        let f = orthonormal_factor(0, 0, 0) * gaunt0(0, 0, 0);
        assert!((f - 1.0 / (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn large_orders_stay_finite() {
        let t = GauntTable::new(64);
        for (_, g) in t.terms(64, 64) {
            assert!(g.is_finite() && g >= 0.0);
        }
    }
}
