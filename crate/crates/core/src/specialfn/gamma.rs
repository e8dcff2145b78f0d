use std::f64::consts::PI;

use crate::error::{LiouvilleError, Result};
use crate::numerics::ComplexValue;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

// B_{2k} / (2k(2k−1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const STIRLING_MIN: f64 = 15.0;

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

/// True when `z` is exactly one of 0, −1, −2, …
pub fn is_nonpositive_integer(z: ComplexValue) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// sin(πz) with argument reduction so that zeros at integers are exact.
pub fn sin_pi(z: ComplexValue) -> ComplexValue {
    let m = z.re.round();
    let r = c(z.re - m, z.im) * PI;
    let s = r.sin();
    if (m as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn stirling(z: ComplexValue) -> ComplexValue {
    let zi = z.inv();
    let zi2 = zi * zi;
    let mut series = c(0.0, 0.0);
    let mut p = zi;
    for coef in STIRLING {
        series += p * coef;
        p *= zi2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// A logarithm of Γ(z). The imaginary part is continuous in z away from
/// the negative real axis but is not reduced to a principal range, so only
/// exp(ln_gamma) and differences of nearby values are meaningful.
pub fn ln_gamma(z: ComplexValue) -> Result<ComplexValue> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(LiouvilleError::domain(format!(
            "non-finite argument {z} to Gamma"
        )));
    }
    if is_nonpositive_integer(z) {
        return Err(LiouvilleError::pole("Gamma", z));
    }
    if z.re < -200.0 {
        // reflection keeps the recurrence short
        let s = sin_pi(z);
        return Ok(c(PI.ln(), 0.0) - s.ln() - ln_gamma(c(1.0, 0.0) - z)?);
    }
    let need = if z.im.abs() >= STIRLING_MIN {
        -z.re
    } else {
        STIRLING_MIN - z.re
    };
    let k = if need > 0.0 { need.ceil() as usize } else { 0 };
    let mut acc = c(0.0, 0.0);
    let mut prod = c(1.0, 0.0);
    for j in 0..k {
        prod *= z + j as f64;
        if j % 8 == 7 {
            acc += prod.ln();
            prod = c(1.0, 0.0);
        }
    }
    acc += prod.ln();
    Ok(stirling(z + k as f64) - acc)
}

/// Complex Γ(z).
pub fn gamma_complex(z: ComplexValue) -> Result<ComplexValue> {
    if is_nonpositive_integer(z) {
        return Err(LiouvilleError::pole("Gamma", z));
    }
    if z.re >= 0.5 {
        Ok(ln_gamma(z)?.exp())
    } else {
        let one_minus = c(1.0, 0.0) - z;
        Ok(c(PI, 0.0) / (sin_pi(z) * ln_gamma(one_minus)?.exp()))
    }
}

/// 1/Γ(z), entire; exactly zero at non-positive integers.
pub fn rgamma(z: ComplexValue) -> ComplexValue {
    if is_nonpositive_integer(z) {
        return c(0.0, 0.0);
    }
    if z.re >= 0.5 {
        match ln_gamma(z) {
            Ok(l) => (-l).exp(),
            Err(_) => c(0.0, 0.0),
        }
    } else {
        let one_minus = c(1.0, 0.0) - z;
        match ln_gamma(one_minus) {
            Ok(l) => l.exp() * sin_pi(z) / PI,
            Err(_) => c(0.0, 0.0),
        }
    }
}

/// l(z) = Γ(z)/Γ(1−z). Zero at positive integers, pole at non-positive ones.
pub fn l_ratio(z: ComplexValue) -> Result<ComplexValue> {
    if is_nonpositive_integer(z) {
        return Err(LiouvilleError::pole("l(z) = Gamma(z)/Gamma(1-z)", z));
    }
    let w = c(1.0, 0.0) - z;
    if is_nonpositive_integer(w) {
        return Ok(c(0.0, 0.0));
    }
    Ok((ln_gamma(z)? - ln_gamma(w)?).exp())
}

/// ln l(z); `None` when l(z) vanishes.
pub fn ln_l_ratio(z: ComplexValue) -> Result<Option<ComplexValue>> {
    if is_nonpositive_integer(z) {
        return Err(LiouvilleError::pole("l(z) = Gamma(z)/Gamma(1-z)", z));
    }
    let w = c(1.0, 0.0) - z;
    if is_nonpositive_integer(w) {
        return Ok(None);
    }
    Ok(Some(ln_gamma(z)? - ln_gamma(w)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn classical_values() {
        assert!(close(
            gamma_complex(c(1.0, 0.0)).unwrap(),
            c(1.0, 0.0),
            1e-14
        ));
        assert!(close(
            gamma_complex(c(0.5, 0.0)).unwrap(),
            c(PI.sqrt(), 0.0),
            1e-13
        ));
        assert!(close(
            gamma_complex(c(6.0, 0.0)).unwrap(),
            c(120.0, 0.0),
            1e-13
        ));
        assert!(close(
            gamma_complex(c(-0.5, 0.0)).unwrap(),
            c(-2.0 * PI.sqrt(), 0.0),
            1e-13
        ));
    }

    #[test]
    fn modulus_identities_on_lines() {
        for y in [0.3, 1.0, 4.0, 12.0, 40.0] {
            let g = gamma_complex(c(0.0, y)).unwrap().norm_sqr();
            let expect = PI / (y * (PI * y).sinh());
            assert!((g / expect - 1.0).abs() < 1e-13, "y={y}");
            let h = gamma_complex(c(0.5, y)).unwrap().norm_sqr();
            assert!((h * (PI * y).cosh() / PI - 1.0).abs() < 1e-13, "y={y}");
        }
    }

    #[test]
    fn poles_and_reciprocal() {
        assert!(gamma_complex(c(-3.0, 0.0)).is_err());
        assert_eq!(rgamma(c(-3.0, 0.0)), c(0.0, 0.0));
        let z = c(-2.999_999, 0.0);
        assert!(close(
            rgamma(z) * gamma_complex(z).unwrap(),
            c(1.0, 0.0),
            1e-9
        ));
    }

    #[test]
    fn l_ratio_values() {
        assert!(close(l_ratio(c(0.5, 0.0)).unwrap(), c(1.0, 0.0), 1e-14));
        let z = c(0.3, 0.0);
        let w = c(0.7, 0.0);
        assert!(close(
            l_ratio(z).unwrap() * l_ratio(w).unwrap(),
            c(1.0, 0.0),
            1e-14
        ));
        assert_eq!(l_ratio(c(2.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(l_ratio(c(0.0, 0.0)).is_err());
    }
}
