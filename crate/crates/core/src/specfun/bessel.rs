//! Spherical Bessel functions of the first kind and spherical Hankel functions
//! of the first kind for complex arguments.
//!
//! `j_n` is computed by downward (Miller) recurrence normalized against the
//! closed forms of `j_0` and `j_1`; `h_n^(1)` by upward recurrence from
//! `h_0^(1)(z) = -i e^{iz}/z`, which is stable because `h_n^(1)` is the
//! dominant solution in the order direction. Derivatives follow from
//!
//! ```text
//! f_n'(z) = f_{n-1}(z) - (n+1)/z f_n(z),    f_0' = -f_1
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest order accepted by the public evaluators.
pub const MAX_ORDER: usize = 512;

const RESCALE_ABOVE: f64 = 1e250;

fn check_order(n: usize) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!(
            "order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn check_finite(values: &[Complex64], what: &str, z: Complex64) -> Result<()> {
    if let Some(n) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Range(format!(
            "{what}_{n}({z}) is not representable as a finite double"
        )));
    }
    Ok(())
}

/// `j_0(z)` and `j_1(z)` from closed forms, switching to the power series near
/// the origin where `sin z / z^2 - cos z / z` cancels.
fn j0_j1(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.5 {
        let w = -z * z / 2.0;
        let mut t0 = Complex64::new(1.0, 0.0);
        let mut t1 = Complex64::new(1.0 / 3.0, 0.0);
        let (mut s0, mut s1) = (t0, t1);
        for k in 1..30 {
            let kf = k as f64;
            t0 *= w / (kf * (2.0 * kf + 1.0));
            t1 *= w / (kf * (2.0 * kf + 3.0));
            s0 += t0;
            s1 += t1;
            if t0.norm() < 1e-18 * s0.norm() && t1.norm() < 1e-18 * s1.norm() {
                break;
            }
        }
        (s0, z * s1)
    } else {
        let (s, c) = (z.sin(), z.cos());
        (s / z, s / (z * z) - c / z)
    }
}

/// `j_0(z), ..., j_{n_max}(z)`.
pub fn spherical_jn_array(n_max: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check_order(n_max)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    if z.re == 0.0 && z.im == 0.0 {
        out[0] = Complex64::new(1.0, 0.0);
        return Ok(out);
    }
    let az = z.norm();
    if az < 1e-8 {
        // two-term series; the relative correction is below 1e-17
        let mut lead = Complex64::new(1.0, 0.0);
        for (n, v) in out.iter_mut().enumerate() {
            if n > 0 {
                lead *= z / (2 * n + 1) as f64;
            }
            *v = lead * (1.0 - z * z / (2.0 * (2 * n + 3) as f64));
        }
        return Ok(out);
    }
    let (j0, j1) = j0_j1(z);
    check_finite(&[j0, j1], "j", z)?;
    out[0] = j0;
    if n_max == 0 {
        return Ok(out);
    }

    // Miller: start far enough above both n_max and |z| that the minimal
    // solution dominates by the time the recurrence reaches n_max.
    let m = (n_max as f64).max(az);
    let start = (m + 20.0 + (50.0 * m).sqrt()).ceil() as usize;

    let mut f = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut upper = Complex64::new(0.0, 0.0); // f_{k+1}
    let mut cur = Complex64::new(1e-30, 0.0); // f_k
    for k in (1..=start).rev() {
        if k <= n_max {
            f[k] = cur;
        }
        let lower = Complex64::new((2 * k + 1) as f64, 0.0) / z * cur - upper;
        upper = cur;
        cur = lower;
        if cur.norm() > RESCALE_ABOVE {
            let s = 1.0 / cur.norm();
            cur *= s;
            upper *= s;
            for v in f.iter_mut().skip(k.min(n_max + 1)) {
                *v *= s;
            }
        }
    }
    f[0] = cur;
    // bring the anchors to unit size with a real factor; complex division by
    // values near the rescale bound would overflow in |f|^2
    let norm = 1.0 / f[0].norm().max(f[1].norm());
    for v in f.iter_mut() {
        *v *= norm;
    }

    let scale = if az < 1.0 {
        j0 / f[0]
    } else {
        // Least-squares fit to both anchors: j_0 and j_1 never vanish together.
        let num = j0 * f[0].conj() + j1 * f[1].conj();
        let den = f[0].norm_sqr() + f[1].norm_sqr();
        num / den
    };
    out[1] = j1;
    for k in 2..=n_max {
        out[k] = scale * f[k];
    }
    check_finite(&out, "j", z)?;
    Ok(out)
}

/// `h^(1)_0(z), ..., h^(1)_{n_max}(z)`.
pub fn spherical_h1n_array(n_max: usize, z: Complex64) -> Result<Vec<Complex64>> {
    check_order(n_max)?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain(
            "spherical Hankel function is singular at z = 0".into(),
        ));
    }
    let i = Complex64::i();
    let e = (i * z).exp();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(-i * e / z);
    if n_max >= 1 {
        out.push(-e * (z + i) / (z * z));
    }
    for k in 1..n_max {
        let next = Complex64::new((2 * k + 1) as f64, 0.0) / z * out[k] - out[k - 1];
        out.push(next);
    }
    check_finite(&out, "h", z)?;
    Ok(out)
}

/// Derivatives `f_0', ..., f_{len-2}'` from a table `f_0, ..., f_{len-1}`.
///
/// `z = 0` is only meaningful for `j`, where `j_1'(0) = 1/3` and all other
/// derivatives vanish.
pub fn derivative_table(values: &[Complex64], z: Complex64) -> Vec<Complex64> {
    let n_out = values.len().saturating_sub(1);
    let mut d = Vec::with_capacity(n_out);
    if z.re == 0.0 && z.im == 0.0 {
        for n in 0..n_out {
            d.push(Complex64::new(if n == 1 { 1.0 / 3.0 } else { 0.0 }, 0.0));
        }
        return d;
    }
    for n in 0..n_out {
        if n == 0 {
            d.push(-values[1]);
        } else {
            d.push(values[n - 1] - Complex64::new((n + 1) as f64, 0.0) / z * values[n]);
        }
    }
    d
}

/// Values and derivatives of `j_n` for `n = 0..=n_max`.
pub fn spherical_jn_with_derivative(
    n_max: usize,
    z: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut v = spherical_jn_array(n_max + 1, z)?;
    let d = derivative_table(&v, z);
    v.truncate(n_max + 1);
    Ok((v, d))
}

/// Values and derivatives of `h^(1)_n` for `n = 0..=n_max`.
pub fn spherical_h1n_with_derivative(
    n_max: usize,
    z: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut v = spherical_h1n_array(n_max + 1, z)?;
    let d = derivative_table(&v, z);
    v.truncate(n_max + 1);
    check_finite(&d, "h'", z)?;
    Ok((v, d))
}

pub fn spherical_jn(n: usize, z: Complex64) -> Result<Complex64> {
    Ok(spherical_jn_array(n, z)?[n])
}

pub fn spherical_jn_prime(n: usize, z: Complex64) -> Result<Complex64> {
    Ok(spherical_jn_with_derivative(n, z)?.1[n])
}

pub fn spherical_h1n(n: usize, z: Complex64) -> Result<Complex64> {
    Ok(spherical_h1n_array(n, z)?[n])
}

pub fn spherical_h1n_prime(n: usize, z: Complex64) -> Result<Complex64> {
    Ok(spherical_h1n_with_derivative(n, z)?.1[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn closed_forms_at_one() {
        let z = c(1.0, 0.0);
        let j0 = spherical_jn(0, z).unwrap();
        assert!((j0 - c(1f64.sin(), 0.0)).norm() < 1e-15);
        assert!((j0.re - 0.841_470_984_807_896_5).abs() < 1e-15);
        let j1 = spherical_jn(1, z).unwrap();
        let expect = 1f64.sin() - 1f64.cos();
        assert!((j1.re - expect).abs() < 1e-15);
        assert!((j1.re - 0.301_168_678_939_756_8).abs() < 1e-15);
    }

    #[test]
    fn origin() {
        let z = c(0.0, 0.0);
        assert_eq!(spherical_jn(0, z).unwrap(), c(1.0, 0.0));
        for n in 1..10 {
            assert_eq!(spherical_jn(n, z).unwrap(), c(0.0, 0.0));
        }
        assert!(matches!(spherical_h1n(0, z), Err(Error::Domain(_))));
        assert!(matches!(spherical_h1n_prime(3, z), Err(Error::Domain(_))));
    }

    #[test]
    fn hankel_zero_closed_form() {
        let z = c(2.0, 0.0);
        let expect = -Complex64::i() * (Complex64::i() * z).exp() / 2.0;
        assert!(rel(spherical_h1n(0, z).unwrap(), expect) < 1e-15);
    }

    #[test]
    fn j0_derivative_is_minus_j1() {
        let z = c(3.0, 1.0);
        let d = spherical_jn_prime(0, z).unwrap();
        let j1 = spherical_jn(1, z).unwrap();
        assert!(rel(d, -j1) < 1e-15);
    }

    #[test]
    fn wronskian_small_grid() {
        let z = c(1.5, 0.5);
        let (j, jd) = spherical_jn_with_derivative(20, z).unwrap();
        let (h, hd) = spherical_h1n_with_derivative(20, z).unwrap();
        let target = Complex64::i() / (z * z);
        for n in 0..=20 {
            let w = j[n] * hd[n] - jd[n] * h[n];
            assert!(rel(w, target) < 1e-12, "n={n}: {w} vs {target}");
        }
    }

    #[test]
    fn derivative_recurrence_consistency() {
        // f_n' = f_{n-1} - (n+1)/z f_n must agree with the companion
        // form f_n' = n/z f_n - f_{n+1}.
        let z = c(4.2, -0.7);
        let j = spherical_jn_array(31, z).unwrap();
        let (_, jd) = spherical_jn_with_derivative(30, z).unwrap();
        for n in 1..30 {
            let other = Complex64::new(n as f64, 0.0) / z * j[n] - j[n + 1];
            assert!((jd[n] - other).norm() <= 1e-12 * jd[n].norm().max(1e-300), "n={n}");
        }
    }

    #[test]
    fn downward_matches_upward_below_switchover() {
        // For n <= |z| upward recurrence from j_0, j_1 is stable and serves
        // as an independent check of the Miller values.
        let z = c(35.0, 2.0);
        let j = spherical_jn_array(30, z).unwrap();
        let (j0, j1) = (z.sin() / z, z.sin() / (z * z) - z.cos() / z);
        let mut up = vec![j0, j1];
        for k in 1..30 {
            let next = Complex64::new((2 * k + 1) as f64, 0.0) / z * up[k] - up[k - 1];
            up.push(next);
        }
        for n in 0..=30 {
            assert!(rel(j[n], up[n]) < 1e-12, "n={n}: {} vs {}", j[n], up[n]);
        }
    }

    #[test]
    fn extreme_imaginary_part_is_range_error() {
        let z = c(1.0, 800.0);
        assert!(matches!(spherical_jn(3, z), Err(Error::Range(_))));
    }

    #[test]
    fn order_limit() {
        assert!(matches!(
            spherical_jn(MAX_ORDER + 1, c(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn small_argument_high_order() {
        // four-term ascending series; the omitted term is below 1e-14 relative
        for (z, n_max) in [(0.05, 20), (0.0333, 30), (0.01, 40)] {
            let zc = c(z, 0.0);
            let j = spherical_jn_array(n_max, zc).unwrap();
            let mut lead = 1.0;
            for n in 0..=n_max {
                if n > 0 {
                    lead *= z / (2 * n + 1) as f64;
                }
                let m = (2 * n + 3) as f64;
                let want = lead
                    * (1.0 - z * z / (2.0 * m) + z.powi(4) / (8.0 * m * (m + 2.0))
                        - z.powi(6) / (48.0 * m * (m + 2.0) * (m + 4.0)));
                assert!((j[n].re - want).abs() <= 1e-12 * want, "z={z} n={n}: {} vs {want}", j[n].re);
            }
        }
    }
}
