use crate::error::{Error, Result};

/// `P_n(x)` by the three-term recurrence
/// `(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`.
pub fn legendre_pn(n: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "Legendre polynomial argument {x} outside [-1, 1]"
        )));
    }
    Ok(legendre_table(n, x)[n])
}

/// `P_0(x), ..., P_{n_max}(x)`; no domain check.
pub fn legendre_table(n_max: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n_max + 1);
    p.push(1.0);
    if n_max >= 1 {
        p.push(x);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
        p.push(next);
    }
    p
}

/// `P_0'(x), ..., P_{n_max}'(x)` from `P'_{n+1} = P'_{n-1} + (2n+1) P_n`,
/// which stays regular at `x = ±1`.
pub fn legendre_derivative_table(n_max: usize, x: f64) -> Vec<f64> {
    let p = legendre_table(n_max, x);
    let mut d = vec![0.0; n_max + 1];
    if n_max >= 1 {
        d[1] = 1.0;
    }
    for n in 1..n_max {
        d[n + 1] = d[n - 1] + (2 * n + 1) as f64 * p[n];
    }
    d
}
