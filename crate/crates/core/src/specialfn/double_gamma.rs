use std::f64::consts::PI;
use std::sync::OnceLock;

use super::gamma::ln_gamma;
use super::LiouvilleParams;
use crate::error::{LiouvilleError, Result};
use crate::numerics::{expm1, integrate_adaptive, ComplexValue, QuadratureSpec};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;
const POLE_DISTANCE: f64 = 1e-8;
const SERIES_TERMS: usize = 30;

/// Which of the two shift equations the continuation prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftOrder {
    /// Steps of 2/γ while they stay inside the strip, then γ/2.
    LargeStepFirst,
    /// Steps of γ/2, with a single 2/γ step when it lands in the strip.
    SmallStepFirst,
}

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

/// B_k / k! for k < 64.
fn bernoulli_over_factorial() -> &'static [f64; 64] {
    static TABLE: OnceLock<[f64; 64]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut inv_fact = [1.0f64; 66];
        for k in 1..66 {
            inv_fact[k] = inv_fact[k - 1] / k as f64;
        }
        let mut b = [0.0f64; 64];
        b[0] = 1.0;
        for n in 1..64 {
            let mut s = 0.0;
            for (j, bj) in b.iter().enumerate().take(n) {
                s += bj * inv_fact[n - j + 1];
            }
            b[n] = -s;
        }
        // odd entries beyond B_1 vanish identically
        for (n, v) in b.iter_mut().enumerate() {
            if n > 1 && n % 2 == 1 {
                *v = 0.0;
            }
        }
        b
    })
}

#[derive(Debug, Clone, Copy)]
struct Lattice {
    a: f64,
    b: f64,
    q: f64,
}

impl Lattice {
    fn new(gamma: f64) -> Self {
        Lattice {
            a: gamma / 2.0,
            b: 2.0 / gamma,
            q: gamma / 2.0 + 2.0 / gamma,
        }
    }

    fn strip(&self) -> (f64, f64) {
        (self.q / 4.0, 3.0 * self.q / 4.0)
    }

    /// Nearest point of {−n·γ/2 − m·2/γ} if within the pole threshold.
    fn near_pole(&self, x: ComplexValue) -> Option<ComplexValue> {
        if x.re > POLE_DISTANCE || x.im.abs() > POLE_DISTANCE {
            return None;
        }
        let depth = -x.re + POLE_DISTANCE;
        let mut n = 0.0;
        while n * self.a <= depth {
            let m = ((-x.re - n * self.a) / self.b).round().max(0.0);
            let p = c(-n * self.a - m * self.b, 0.0);
            if (x - p).norm() < POLE_DISTANCE {
                return Some(p);
            }
            n += 1.0;
        }
        None
    }

    /// ln of Γ_{γ/2}(x)/Γ_{γ/2}(x+γ/2).
    fn ln_shift_small(&self, x: ComplexValue) -> Result<ComplexValue> {
        let ln_a = self.a.ln();
        Ok(ln_gamma(x * self.a)? + (0.5 - x * self.a) * ln_a - LN_SQRT_2PI)
    }

    /// ln of Γ_{γ/2}(x)/Γ_{γ/2}(x+2/γ).
    fn ln_shift_large(&self, x: ComplexValue) -> Result<ComplexValue> {
        let ln_a = self.a.ln();
        Ok(ln_gamma(x * self.b)? + (x * self.b - 0.5) * ln_a - LN_SQRT_2PI)
    }

    /// Walks x into the strip; returns (x', δ) with ln Γ(x) = ln Γ(x') + δ.
    fn walk(&self, mut x: ComplexValue, order: ShiftOrder) -> Result<(ComplexValue, ComplexValue)> {
        let (lo, hi) = self.strip();
        let mut acc = c(0.0, 0.0);
        while x.re < lo {
            let large = match order {
                ShiftOrder::LargeStepFirst => x.re + self.b <= hi,
                ShiftOrder::SmallStepFirst => x.re + self.b >= lo && x.re + self.b <= hi,
            };
            if large {
                acc += self.ln_shift_large(x)?;
                x += self.b;
            } else {
                acc += self.ln_shift_small(x)?;
                x += self.a;
            }
        }
        while x.re > hi {
            let large = match order {
                ShiftOrder::LargeStepFirst => x.re - self.b >= lo,
                ShiftOrder::SmallStepFirst => x.re - self.b >= lo && x.re - self.b <= hi,
            };
            if large {
                x -= self.b;
                acc -= self.ln_shift_large(x)?;
            } else {
                x -= self.a;
                acc -= self.ln_shift_small(x)?;
            }
        }
        Ok((x, acc))
    }

    /// Taylor coefficients h_m of the t-integrand near t = 0.
    fn series(&self, u: ComplexValue) -> [ComplexValue; SERIES_TERMS] {
        let n = SERIES_TERMS + 2;
        let bern = bernoulli_over_factorial();
        let mut e1 = vec![c(0.0, 0.0); n]; // e^{−Qt/2}
        let mut e2 = vec![c(0.0, 0.0); n]; // (e^{ut} − 1)/t
        let mut ba = vec![c(0.0, 0.0); n]; // a t/(1 − e^{−a t})
        let mut bb = vec![c(0.0, 0.0); n];
        let mut fact = 1.0;
        let mut up = u;
        for k in 0..n {
            if k > 0 {
                fact *= k as f64;
            }
            e1[k] = c((-self.q / 2.0).powi(k as i32) / fact, 0.0);
            e2[k] = up / (fact * (k + 1) as f64);
            up *= u;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            ba[k] = c(sign * bern[k] * self.a.powi(k as i32), 0.0);
            bb[k] = c(sign * bern[k] * self.b.powi(k as i32), 0.0);
        }
        let mul = |x: &[ComplexValue], y: &[ComplexValue]| -> Vec<ComplexValue> {
            let mut out = vec![c(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..(n - i) {
                    out[i + j] += x[i] * y[j];
                }
            }
            out
        };
        let s = mul(&mul(&e1, &e2), &mul(&ba, &bb));
        let half_u2 = u * u * 0.5;
        let mut h = [c(0.0, 0.0); SERIES_TERMS];
        let mut fact = 1.0;
        for (m, hm) in h.iter_mut().enumerate() {
            fact *= (m + 1) as f64;
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            *hm = s[m + 2] - half_u2 * (sign / fact);
        }
        h
    }

    /// Integral representation, valid for Re x > 0, evaluated along a ray
    /// rotated towards the decaying half-plane of e^{−xt}.
    fn ln_strip(&self, x: ComplexValue) -> Result<ComplexValue> {
        let u = self.q / 2.0 - x;
        let omega = if x.im.abs() <= 1.0 {
            c(1.0, 0.0)
        } else {
            ComplexValue::from_polar(1.0, -x.im.signum() * PI / 4.0)
        };
        let radius = 2.0 * PI / self.a.max(self.b);
        let t_s = (radius / 4.0).min(1.0 / (u.norm() + self.q / 2.0 + 1.0));

        let h = self.series(u);
        let t0 = omega * t_s;
        let mut seg = c(0.0, 0.0);
        let mut p = t0;
        for (m, hm) in h.iter().enumerate() {
            seg += hm * p / (m + 1) as f64;
            p *= t0;
        }

        let kappa = (x * omega).re.min(self.q / 2.0 * omega.re).min(omega.re);
        let scale = 1.0 + u.norm_sqr();
        let s_end = (2.0 * t_s).max((scale * 1e18).ln() / kappa + 1.0);

        let (a, b, q) = (self.a, self.b, self.q);
        let half_u2 = u * u * 0.5;
        let integrand = |s: f64| {
            let t = omega * s;
            let ratio = (-t * (q / 2.0)).exp() * expm1(u * t) / (expm1(-t * a) * expm1(-t * b));
            let bracket = ratio - half_u2 * (-t).exp() - u / t;
            bracket / t * omega
        };
        let spec = QuadratureSpec::new(1e-13, 1e-14).with_max_subdivisions(400);
        let body = integrate_adaptive(integrand, t_s, s_end, &spec)?;
        let tail = -u / (omega * s_end);
        Ok(seg + body.value + tail)
    }

    fn ln_gamma2(&self, x: ComplexValue, order: ShiftOrder) -> Result<ComplexValue> {
        if !x.re.is_finite() || !x.im.is_finite() {
            return Err(LiouvilleError::domain(format!(
                "non-finite argument {x} to double Gamma"
            )));
        }
        if let Some(p) = self.near_pole(x) {
            return Err(LiouvilleError::pole(
                "double Gamma",
                format!("{x} (lattice point {p})"),
            ));
        }
        let (xs, acc) = self.walk(x, order)?;
        Ok(self.ln_strip(xs)? + acc)
    }
}

/// ln Γ_{γ/2}(x), normalized by Γ_{γ/2}(Q/2) = 1.
pub fn log_double_gamma(x: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    log_double_gamma_with_order(x, params, ShiftOrder::LargeStepFirst)
}

/// [`log_double_gamma`] with an explicit continuation path.
pub fn log_double_gamma_with_order(
    x: ComplexValue,
    params: &LiouvilleParams,
    order: ShiftOrder,
) -> Result<ComplexValue> {
    Lattice::new(params.gamma()).ln_gamma2(x, order)
}

/// Γ_{γ/2}(x).
pub fn double_gamma(x: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    Ok(log_double_gamma(x, params)?.exp())
}

/// ln(x·Γ_{γ/2}(x)), regular at the pole x = 0.
pub fn ln_double_gamma_times_x(x: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    let lat = Lattice::new(params.gamma());
    let ln_a = lat.a.ln();
    let shifted = lat.ln_gamma2(x + lat.a, ShiftOrder::LargeStepFirst)?;
    Ok(shifted - LN_SQRT_2PI + ln_gamma(x * lat.a + 1.0)? - ln_a + (0.5 - x * lat.a) * ln_a)
}

/// ln S_{γ/2}(x); `None` on the zero lattice Q + γ/2·ℕ + 2/γ·ℕ.
pub fn log_double_sine(x: ComplexValue, params: &LiouvilleParams) -> Result<Option<ComplexValue>> {
    let lat = Lattice::new(params.gamma());
    let dual = lat.q - x;
    if lat.near_pole(dual).is_some() {
        if lat.near_pole(x).is_some() {
            return Err(LiouvilleError::pole("double sine", x));
        }
        return Ok(None);
    }
    let num = lat.ln_gamma2(x, ShiftOrder::LargeStepFirst)?;
    let den = lat.ln_gamma2(dual, ShiftOrder::LargeStepFirst)?;
    Ok(Some(num - den))
}

/// S_{γ/2}(x) = Γ_{γ/2}(x)/Γ_{γ/2}(Q−x).
pub fn double_sine(x: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    Ok(match log_double_sine(x, params)? {
        Some(l) => l.exp(),
        None => c(0.0, 0.0),
    })
}
