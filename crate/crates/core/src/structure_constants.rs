//! DOZZ three-point constant, reflection coefficient, FZZ bulk one-point
//! function and bulk-boundary correlators.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{LiouvilleError, Result};
use crate::numerics::{integrate_with_breakpoints, ComplexValue, QuadratureSpec};
use crate::specialfn::{
    l_ratio, ln_gamma, log_double_gamma, log_double_sine, log_upsilon, upsilon_prime_zero,
    LiouvilleParams, UpsilonLog,
};

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

/// A point Q + iP of the spectrum line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub p: f64,
    pub charge: ComplexValue,
}

impl SpectrumPoint {
    pub fn new(p: f64, params: &LiouvilleParams) -> Self {
        SpectrumPoint {
            p,
            charge: c(params.q(), p),
        }
    }
}

/// A real boundary charge with its Seiberg-bound flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryWeight {
    pub beta: f64,
    pub seiberg_ok: bool,
}

impl BoundaryWeight {
    pub fn new(beta: f64, params: &LiouvilleParams) -> Self {
        BoundaryWeight {
            beta,
            seiberg_ok: beta < params.q(),
        }
    }
}

/// Distance below which a point counts as sitting on a zero or pole lattice.
const LATTICE_TOL: f64 = 1e-8;

/// True if `z` lies within [`LATTICE_TOL`] of a zero of Υ, i.e. of
/// −nγ/2 − m·2/γ or Q + nγ/2 + m·2/γ.
fn near_upsilon_zero(z: ComplexValue, params: &LiouvilleParams) -> bool {
    if z.im.abs() > LATTICE_TOL {
        return false;
    }
    let (a, b, q) = (params.gamma() / 2.0, 2.0 / params.gamma(), params.q());
    let y = if z.re <= LATTICE_TOL {
        -z.re
    } else if z.re >= q - LATTICE_TOL {
        z.re - q
    } else {
        return false;
    };
    let mut m = 0.0;
    while m * b <= y + LATTICE_TOL {
        let n = ((y - m * b) / a).round().max(0.0);
        if (n * a + m * b - y).abs() < LATTICE_TOL {
            return true;
        }
        m += 1.0;
    }
    false
}

fn require_mu(params: &LiouvilleParams, what: &str) -> Result<()> {
    if params.mu() > 0.0 {
        Ok(())
    } else {
        Err(LiouvilleError::domain(format!("{what} requires mu > 0")))
    }
}

/// ln(πμ l(γ²/4)).
fn ln_cosmological(params: &LiouvilleParams) -> Result<f64> {
    let g2 = params.gamma() * params.gamma() / 4.0;
    Ok((PI * params.mu() * l_ratio(c(g2, 0.0))?.re).ln())
}

/// DOZZ structure constant C(α₁, α₂, α₃).
///
/// The charges are sorted before evaluation, so permutations give
/// bit-identical results.
pub fn dozz(
    a1: ComplexValue,
    a2: ComplexValue,
    a3: ComplexValue,
    params: &LiouvilleParams,
) -> Result<ComplexValue> {
    require_mu(params, "the DOZZ formula")?;
    let mut alphas = [a1, a2, a3];
    alphas.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let (g, q) = (params.gamma(), params.q());
    let sum = alphas[0] + alphas[1] + alphas[2];
    let half = sum / 2.0;

    let denominators = [
        half - q,
        half - alphas[0],
        half - alphas[1],
        half - alphas[2],
    ];
    let mut ln_den = c(0.0, 0.0);
    for z in denominators {
        if near_upsilon_zero(z, params) {
            return Err(LiouvilleError::pole("DOZZ denominator Upsilon", z));
        }
        match log_upsilon(z, params)? {
            UpsilonLog::Log(l) => ln_den += l,
            UpsilonLog::Zero => return Err(LiouvilleError::pole("DOZZ denominator Upsilon", z)),
        }
    }

    let mut ln_num = c(upsilon_prime_zero(params)?.re.ln(), 0.0);
    for z in alphas {
        match log_upsilon(z, params)? {
            UpsilonLog::Log(l) => ln_num += l,
            UpsilonLog::Zero => return Ok(c(0.0, 0.0)),
        }
    }

    let ln_base = ln_cosmological(params)? + (2.0 - g * g / 2.0) * (g / 2.0).ln();
    let ln_pref = (c(2.0 * q, 0.0) - sum) / g * ln_base;
    Ok((ln_pref + ln_num - ln_den).exp())
}

/// Reflection coefficient R(α), relating C(α, ·, ·) and C(2Q − α, ·, ·).
pub fn reflection(alpha: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    require_mu(params, "the reflection coefficient")?;
    let g = params.gamma();
    let x = c(params.q(), 0.0) - alpha;
    if x.norm() == 0.0 {
        // both Gamma ratios tend to −1
        return Ok(c(-1.0, 0.0));
    }
    let u = x * (g / 2.0);
    let v = x * (2.0 / g);
    let ln = x * (2.0 / g) * ln_cosmological(params)? + ln_gamma(-u)? - ln_gamma(u)?
        + ln_gamma(-v)?
        - ln_gamma(v)?;
    Ok(-ln.exp())
}

/// ln of the FZZ one-point function without its cos((α − Q)πθ) factor.
fn ln_fzz_bare(alpha: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    let (g, q) = (params.gamma(), params.q());
    let x = c(q, 0.0) - alpha;
    Ok(
        c((4.0 / g).ln(), 0.0) - alpha * alpha * (LN_2 / 2.0) + x / g * ln_cosmological(params)?
            - alpha * x * LN_2
            + ln_gamma(alpha * (g / 2.0) - g * g / 4.0)?
            + ln_gamma(alpha * (2.0 / g) - 4.0 / (g * g) - 1.0)?,
    )
}

/// FZZ bulk one-point function U_θ(α).
pub fn fzz_one_point(alpha: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    require_mu(params, "the FZZ one-point function")?;
    let theta = params.theta()?;
    let phase = ((alpha - params.q()) * theta * PI).cos();
    Ok(ln_fzz_bare(alpha, params)?.exp() * phase)
}

/// P·U_θ(Q + iP) without the cosh(πθP) factor, finite at P = 0.
fn fzz_spectrum_bare_times_p(p: f64, params: &LiouvilleParams) -> Result<ComplexValue> {
    let (g, q) = (params.gamma(), params.q());
    // P·Γ(2iP/γ) = −(iγ/2)·Γ(1 + 2iP/γ)
    let ln = c(
        -(q * q + p * p) / 2.0 * LN_2,
        -p / g * ln_cosmological(params)?,
    ) + ln_gamma(c(1.0, g * p / 2.0))?
        + ln_gamma(c(1.0, 2.0 * p / g))?;
    Ok(c(0.0, -2.0) * ln.exp())
}

/// P·U_θ(Q + iP) for real P of either sign, finite through P = 0.
pub fn fzz_spectrum_times_p(p: f64, params: &LiouvilleParams) -> Result<ComplexValue> {
    require_mu(params, "the FZZ one-point function")?;
    let theta = params.theta()?;
    Ok(fzz_spectrum_bare_times_p(p, params)? * (theta * (PI * p)).cosh())
}

/// sinh(z)/z and sin(z)/z, continued through z = 0.
fn sinhc(z: ComplexValue) -> ComplexValue {
    if z.norm() < 1e-4 {
        1.0 + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

fn sinc(z: ComplexValue) -> ComplexValue {
    if z.norm() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// (∂θ/∂μ_B)·sinh(πθP)/P. Each factor is singular or zero at θ = 0 but
/// the combination is smooth there.
fn dtheta_sinh_over_p(
    p: f64,
    theta: ComplexValue,
    params: &LiouvilleParams,
) -> Result<ComplexValue> {
    let g = params.gamma();
    let s = (PI * g * g / 4.0).sin();
    Ok(
        -4.0 / (PI * g * g) * (s / params.mu()).sqrt() * sinhc(theta * (PI * p))
            / sinc(theta * (PI * g / 2.0)),
    )
}

/// ∂U_θ(Q + iP)/∂μ_B, differentiating through θ(μ_B).
pub fn fzz_spectrum_dmu_b(p: f64, params: &LiouvilleParams) -> Result<ComplexValue> {
    require_mu(params, "the FZZ one-point function")?;
    let theta = params.theta()?;
    // ∂_θ cos(iPπθ) = −iPπ·sin(iPπθ) = πP·sinh(πθP)
    Ok(fzz_spectrum_bare_times_p(p, params)? * (PI * p) * dtheta_sinh_over_p(p, theta, params)?)
}

/// Bulk-boundary correlator G_θ(Q + iP, γ) = −∂_{μ_B}U_θ(Q + iP)/(2π) in
/// closed form. Vanishes linearly at P = 0.
pub fn g_gamma_derivative(p: f64, params: &LiouvilleParams) -> Result<ComplexValue> {
    Ok(-fzz_spectrum_dmu_b(p, params)? / (2.0 * PI))
}

fn ln_gamma_b(x: ComplexValue, params: &LiouvilleParams, what: &str) -> Result<ComplexValue> {
    log_double_gamma(x, params).map_err(|e| match e {
        LiouvilleError::Pole { location, .. } => LiouvilleError::Pole {
            factor: format!("double Gamma in {what}"),
            location,
        },
        other => other,
    })
}

/// Bulk-boundary correlator G_θ(α, β) from the double-sine contour
/// integral (conjectural at μ > 0).
///
/// The boundary parameter enters the integral through s = θ/(2i), i.e. the
/// kernel is cosh(2πθt), and the bulk normalization is |Im z|^{−2Δ_α}; with
/// these conventions G(α, β) tends to U_θ(α) as β → 0.
pub fn bulk_boundary(
    alpha: ComplexValue,
    beta: ComplexValue,
    params: &LiouvilleParams,
    spec: &QuadratureSpec,
) -> Result<ComplexValue> {
    require_mu(params, "the bulk-boundary formula")?;
    let q = params.q();
    let theta = params.theta()?;
    let kappa = bulk_boundary_decay(beta, theta, params)?;
    let ln_pref = ln_bulk_boundary_prefactor(alpha, beta, params)?
        - ln_gamma_b(c(q, 0.0) - alpha, params, "bulk-boundary prefactor")?;
    let integral = bulk_boundary_integral(alpha, beta, theta, kappa, params, spec)?;
    Ok(ln_pref.exp() * integral)
}

/// ln of the bulk-boundary prefactor without its 1/Γ_b(Q − α) factor.
fn ln_bulk_boundary_prefactor(
    alpha: ComplexValue,
    beta: ComplexValue,
    params: &LiouvilleParams,
) -> Result<ComplexValue> {
    let (g, q) = (params.gamma(), params.q());
    let what = "bulk-boundary prefactor";
    let qc = c(q, 0.0);
    let hb = beta / 2.0;
    let ln_base = ln_cosmological(params)? + (2.0 - g * g / 2.0) * (g / 2.0).ln();
    Ok(c((2.0 * PI).ln(), 0.0)
        + (qc - alpha - hb) / g * ln_base
        + 3.0 * ln_gamma_b(qc - hb, params, what)?
        - ln_gamma_b(qc, params, what)?
        - ln_gamma_b(qc - beta, params, what)?
        - ln_gamma_b(hb, params, what)?
        + ln_gamma_b(alpha - hb, params, what)?
        + ln_gamma_b(qc * 2.0 - alpha - hb, params, what)?
        - ln_gamma_b(alpha, params, what)?
        - params.weight(alpha).value * (2.0 * LN_2))
}

/// G_θ(Q + iP, β)/P, finite through P = 0 where G vanishes linearly.
pub fn bulk_boundary_spectrum_over_p(
    p: f64,
    beta: ComplexValue,
    params: &LiouvilleParams,
    spec: &QuadratureSpec,
) -> Result<ComplexValue> {
    require_mu(params, "the bulk-boundary formula")?;
    let g = params.gamma();
    let theta = params.theta()?;
    let kappa = bulk_boundary_decay(beta, theta, params)?;
    let alpha = c(params.q(), p);
    // 1/Γ_b(x) = x·(γ/2)√(2π)(γ/2)^{γx/2 − 1/2} / (Γ(1 + γx/2)Γ_b(x + γ/2)) at x = −iP
    let x = c(0.0, -p);
    let ln_inverse_over_x = c((g / 2.0).ln() + 0.5 * (2.0 * PI).ln(), 0.0)
        + (x * (g / 2.0) - 0.5) * (g / 2.0).ln()
        - ln_gamma(c(1.0, 0.0) + x * (g / 2.0))?
        - ln_gamma_b(x + g / 2.0, params, "bulk-boundary prefactor")?;
    let ln_pref = ln_bulk_boundary_prefactor(alpha, beta, params)? + ln_inverse_over_x;
    let integral = bulk_boundary_integral(alpha, beta, theta, kappa, params, spec)?;
    Ok(c(0.0, -1.0) * ln_pref.exp() * integral)
}

/// Below this momentum, spectrum-line products pairing a simple zero with
/// a simple pole go through their regularized forms.
pub const SMALL_MOMENTUM: f64 = 1e-4;

/// G_θ(Q + iP, β)·U_θ(Q − iP) for real P ≥ 0, finite at P = 0.
pub fn bulk_boundary_fzz_product(
    p: f64,
    beta: ComplexValue,
    params: &LiouvilleParams,
    spec: &QuadratureSpec,
) -> Result<ComplexValue> {
    let q = params.q();
    if p.abs() >= SMALL_MOMENTUM {
        Ok(bulk_boundary(c(q, p), beta, params, spec)? * fzz_one_point(c(q, -p), params)?)
    } else {
        // P·U(Q − iP) = −(−P)·U(Q + i(−P))
        Ok(bulk_boundary_spectrum_over_p(p, beta, params, spec)?
            * -fzz_spectrum_times_p(-p, params)?)
    }
}

/// G_θ(Q + iP, γ)·U_θ(Q − iP) from the closed forms, finite at P = 0.
pub fn g_gamma_fzz_product(p: f64, params: &LiouvilleParams) -> Result<ComplexValue> {
    require_mu(params, "the FZZ one-point function")?;
    let theta = params.theta()?;
    let pair = fzz_spectrum_bare_times_p(p, params)? * fzz_spectrum_bare_times_p(-p, params)?;
    Ok(pair * (theta * (PI * p)).cosh() * dtheta_sinh_over_p(p, theta, params)? / 2.0)
}

/// Decay rate κ of the bulk-boundary t-integrand, which falls off like
/// e^{−κ|t|}.
fn bulk_boundary_decay(
    beta: ComplexValue,
    theta: ComplexValue,
    params: &LiouvilleParams,
) -> Result<f64> {
    let kappa = PI * (2.0 * params.q() - beta.re) - 2.0 * PI * theta.re.abs();
    if kappa > 0.0 {
        Ok(kappa)
    } else {
        Err(LiouvilleError::domain(format!(
            "bulk-boundary integral diverges: need pi(2Q - Re beta) > 2 pi |Re theta| (beta = {beta}, theta = {theta})"
        )))
    }
}

fn half_arguments(alpha: ComplexValue, beta: ComplexValue, q: f64) -> (ComplexValue, ComplexValue) {
    (
        (alpha + beta / 2.0 - q) / 2.0,
        (-alpha + beta / 2.0 + q) / 2.0,
    )
}

fn integrand_at(
    s1: ComplexValue,
    s2: ComplexValue,
    theta: ComplexValue,
    t: f64,
    params: &LiouvilleParams,
) -> Result<ComplexValue> {
    let it = c(0.0, t);
    let mut ln = c(0.0, 0.0);
    for x in [s1 + it, s1 - it, s2 + it, s2 - it] {
        match log_double_sine(x, params)? {
            Some(l) => ln += l,
            None => return Ok(c(0.0, 0.0)),
        }
    }
    Ok(ln.exp() * (theta * (2.0 * PI * t)).cosh())
}

/// cosh(2πθt)·S(s₁+it)S(s₁−it)S(s₂+it)S(s₂−it), the t-integrand of
/// [`bulk_boundary`] without its prefactor.
pub fn bulk_boundary_integrand(
    alpha: ComplexValue,
    beta: ComplexValue,
    t: f64,
    params: &LiouvilleParams,
) -> Result<ComplexValue> {
    let (s1, s2) = half_arguments(alpha, beta, params.q());
    integrand_at(s1, s2, params.theta()?, t, params)
}

/// Where the t-integral of [`bulk_boundary`] is cut, with the decay rate
/// used for the tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCut {
    pub cut: f64,
    pub decay_rate: f64,
    /// Point past the integrand peaks where the envelope is anchored.
    pub anchor: f64,
    pub anchor_modulus: f64,
}

pub fn bulk_boundary_cut(
    alpha: ComplexValue,
    beta: ComplexValue,
    params: &LiouvilleParams,
    spec: &QuadratureSpec,
) -> Result<TailCut> {
    let theta = params.theta()?;
    let kappa = bulk_boundary_decay(beta, theta, params)?;
    let (s1, s2) = half_arguments(alpha, beta, params.q());
    tail_cut(s1, s2, theta, kappa, params, spec)
}

fn tail_cut(
    s1: ComplexValue,
    s2: ComplexValue,
    theta: ComplexValue,
    kappa: f64,
    params: &LiouvilleParams,
    spec: &QuadratureSpec,
) -> Result<TailCut> {
    // the integrand peaks where an argument approaches 0, i.e. t ≈ |Im s|
    let anchor = s1.im.abs().max(s2.im.abs()) + 2.0;
    let amplitude = integrand_at(s1, s2, theta, anchor, params)?
        .norm()
        .max(f64::MIN_POSITIVE);
    // envelope amplitude·e^{−κ(t − anchor)}, with a safety factor of 10
    let target = spec.abs_tol.max(f64::MIN_POSITIVE);
    let cut = anchor + ((10.0 * amplitude / (kappa * target)).ln() / kappa).max(1.0);
    if cut > anchor + spec.truncation_bound {
        return Err(LiouvilleError::NonConvergence {
            message: format!("bulk-boundary integrand needs cut at t = {cut}"),
            estimate: f64::NAN,
            error: amplitude,
            intervals: 0,
        });
    }
    Ok(TailCut {
        cut,
        decay_rate: kappa,
        anchor,
        anchor_modulus: amplitude,
    })
}

/// ∫_ℝ cosh(2πθt)·S(s₁+it)S(s₁−it)S(s₂+it)S(s₂−it) dt, using evenness in t.
fn bulk_boundary_integral(
    alpha: ComplexValue,
    beta: ComplexValue,
    theta: ComplexValue,
    kappa: f64,
    params: &LiouvilleParams,
    spec: &QuadratureSpec,
) -> Result<ComplexValue> {
    let (s1, s2) = half_arguments(alpha, beta, params.q());
    let failure = std::sync::Mutex::new(None);
    let integrand = |t: f64| -> ComplexValue {
        integrand_at(s1, s2, theta, t, params).unwrap_or_else(|e| {
            failure.lock().unwrap().get_or_insert(e);
            c(0.0, 0.0)
        })
    };
    let tail = tail_cut(s1, s2, theta, kappa, params, spec)?;
    let cut = tail.cut;
    let mut points = vec![0.0, cut];
    for (pk, w) in [(s1.im.abs(), s1.re.abs()), (s2.im.abs(), s2.re.abs())] {
        for k in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            let x = pk + k * w;
            if x > 0.0 && x < cut {
                points.push(x);
            }
        }
    }
    points.push(tail.anchor);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let r = integrate_with_breakpoints(integrand, &points, spec)?;
    if let Some(e) = failure.lock().unwrap().take() {
        return Err(e);
    }
    Ok(r.value * 2.0)
}

/// Bulk-boundary correlator at μ = 0 (closed form in μ_B).
pub fn bulk_boundary_mu0(
    alpha: ComplexValue,
    beta: ComplexValue,
    params: &LiouvilleParams,
) -> Result<ComplexValue> {
    let (g, q) = (params.gamma(), params.q());
    let mu_b = mu0_boundary(params)?;
    let qc = c(q, 0.0);
    let hb = beta / 2.0;
    let e = (qc - alpha - hb) * (2.0 / g);
    let what = "mu = 0 bulk-boundary formula";
    let ln_inner =
        (hb - alpha) * (g / 2.0 * LN_2) + (2.0 * PI).ln() - ln_gamma(c(1.0 - g * g / 4.0, 0.0))?;
    let ln = c((2.0 / g).ln(), 0.0) + ln_gamma((alpha * 2.0 + beta - qc * 2.0) / g)?
        - e * mu_b.ln()
        + e * ln_inner
        + ln_gamma(alpha * (g / 2.0) + beta * (g / 4.0) - g * g / 4.0)?
        + ln_gamma_b(alpha - hb, params, what)?
        + ln_gamma_b(alpha + hb, params, what)?
        + 2.0 * ln_gamma_b(qc - hb, params, what)?
        - ln_gamma_b(qc - beta, params, what)?
        - 2.0 * ln_gamma_b(alpha, params, what)?
        - ln_gamma_b(qc, params, what)?;
    Ok(ln.exp())
}

/// Bulk one-point function at μ = 0.
pub fn bulk_one_point_mu0(alpha: ComplexValue, params: &LiouvilleParams) -> Result<ComplexValue> {
    let (g, q) = (params.gamma(), params.q());
    let mu_b = mu0_boundary(params)?;
    let e = (c(q, 0.0) - alpha) * (2.0 / g);
    let ln_inner =
        -alpha * (g / 2.0 * LN_2) + (2.0 * PI).ln() - ln_gamma(c(1.0 - g * g / 4.0, 0.0))?;
    let ln = c((2.0 / g).ln(), 0.0) + ln_gamma((alpha - q) * (2.0 / g))? - e * mu_b.ln()
        + e * ln_inner
        + ln_gamma(alpha * (g / 2.0) - g * g / 4.0)?;
    Ok(ln.exp())
}

fn mu0_boundary(params: &LiouvilleParams) -> Result<f64> {
    if params.mu() != 0.0 {
        return Err(LiouvilleError::domain("the mu = 0 formulas require mu = 0"));
    }
    match params.boundary() {
        Some(crate::specialfn::BoundaryParam::MuBoundary(m)) => Ok(m),
        _ => Err(LiouvilleError::domain(
            "the mu = 0 formulas need mu_boundary (theta is undefined at mu = 0)",
        )),
    }
}
