use super::double_gamma::log_double_gamma;
use super::gamma::ln_l_ratio;
use super::LiouvilleParams;
use crate::error::Result;
use crate::numerics::ComplexValue;

/// ln Υ_{γ/2}(z), or an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpsilonLog {
    Zero,
    Log(ComplexValue),
}

impl UpsilonLog {
    pub fn value(self) -> ComplexValue {
        match self {
            UpsilonLog::Zero => ComplexValue::new(0.0, 0.0),
            UpsilonLog::Log(l) => l.exp(),
        }
    }
}

/// Within a few ulps of one of 0, −1, −2, … (lattice points built from
/// γ/2 and 2/γ are not exactly representable).
fn lattice_hit(w: ComplexValue, positive: bool) -> bool {
    let n = w.re.round();
    let on_side = if positive { n >= 1.0 } else { n <= 0.0 };
    on_side && (w - n).norm() <= 8.0 * f64::EPSILON * w.norm().max(1.0)
}

/// ln of Υ(z+s)/Υ(z) for s = γ/2 (`large = false`) or s = 2/γ; `None`
/// when the factor vanishes.
fn ln_shift(z: ComplexValue, gamma: f64, large: bool) -> Result<Option<ComplexValue>> {
    let a = gamma / 2.0;
    let ln_a = a.ln();
    if large {
        let w = z * (2.0 / gamma);
        Ok(ln_l_ratio(w)?.map(|l| l + (w * 2.0 - 1.0) * ln_a))
    } else {
        let w = z * a;
        Ok(ln_l_ratio(w)?.map(|l| l + (1.0 - w * 2.0) * ln_a))
    }
}

/// Υ_{γ/2} in log form. Inside Q/4 ≤ Re z ≤ 3Q/4 the integral
/// representation is used (as −ln Γ_{γ/2}(z) − ln Γ_{γ/2}(Q−z), whose
/// integrands sum to the Υ integrand); elsewhere the Υ shift relations.
pub fn log_upsilon(z: ComplexValue, params: &LiouvilleParams) -> Result<UpsilonLog> {
    let gamma = params.gamma();
    let (a, b, q) = (gamma / 2.0, 2.0 / gamma, params.q());
    let (lo, hi) = (q / 4.0, 3.0 * q / 4.0);
    let mut x = z;
    let mut acc = ComplexValue::new(0.0, 0.0);
    while x.re < lo {
        let large = x.re + b <= hi;
        let w = if large { x * b } else { x * a };
        if lattice_hit(w, false) {
            // l has a pole, so Υ(x) = Υ(x+s)/l(..)·… vanishes
            return Ok(UpsilonLog::Zero);
        }
        match ln_shift(x, gamma, large)? {
            Some(l) => acc -= l,
            None => unreachable!("l(w) cannot vanish for Re w below the strip"),
        }
        x += if large { b } else { a };
    }
    while x.re > hi {
        let large = x.re - b >= lo;
        x -= if large { b } else { a };
        let w = if large { x * b } else { x * a };
        if lattice_hit(w, true) {
            return Ok(UpsilonLog::Zero);
        }
        match ln_shift(x, gamma, large)? {
            Some(l) => acc += l,
            None => return Ok(UpsilonLog::Zero),
        }
    }
    let inner =
        -log_double_gamma(x, params)? - log_double_gamma(ComplexValue::new(q, 0.0) - x, params)?;
    Ok(UpsilonLog::Log(inner + acc))
}

/// Υ_{γ/2}(z), entire.
pub fn upsilon(z: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    Ok(log_upsilon(z, params)?.value())
}

/// Υ'(0) = Υ(γ/2), from the γ/2 shift relation at z → 0.
pub fn upsilon_prime_zero(params: &LiouvilleParams) -> Result<ComplexValue> {
    upsilon(ComplexValue::new(params.gamma() / 2.0, 0.0), params)
}
