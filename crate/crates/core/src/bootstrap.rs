//! Spectral integrals expressing annulus correlators through structure
//! constants and conformal blocks, and the bosonic LQG annulus partition
//! function.

use std::f64::consts::{LN_2, PI};
use std::sync::Mutex;

use serde::Serialize;

use crate::error::{LiouvilleError, Result};
use crate::numerics::{
    integrate_halfline_gaussian_with, integrate_with_breakpoints, ComplexValue, GaussianTail,
    QuadratureSpec,
};
use crate::specialfn::{ln_dedekind_eta, LiouvilleParams};
use crate::structure_constants::{
    bulk_boundary, bulk_boundary_fzz_product, bulk_boundary_spectrum_over_p, g_gamma_fzz_product,
    SMALL_MOMENTUM,
};
use crate::virasoro::{block_series_on_line, evaluate_block, BlockKind, DEFAULT_TRUNCATION};

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

/// π^{1/2}/(2^{5/2}e), the normalization shared by the annulus formulas.
pub fn annulus_prefactor() -> f64 {
    PI.sqrt() / (2f64.powf(2.5) * std::f64::consts::E)
}

/// Boundary data of the two annulus boundaries. Insertions at b, b₁ sit on
/// the outer circle; the second two-point insertion and the unmarked
/// boundary of the one-point formulas are the inner circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusBoundaries {
    pub outer: LiouvilleParams,
    pub inner: LiouvilleParams,
}

impl AnnulusBoundaries {
    /// Both boundaries share one boundary cosmological constant.
    pub fn uniform(params: LiouvilleParams) -> Self {
        AnnulusBoundaries {
            outer: params,
            inner: params,
        }
    }

    pub fn new(outer: LiouvilleParams, inner: LiouvilleParams) -> Result<Self> {
        if outer.gamma() != inner.gamma() || outer.mu() != inner.mu() {
            return Err(LiouvilleError::domain(
                "both boundaries must share gamma and mu",
            ));
        }
        Ok(AnnulusBoundaries { outer, inner })
    }

    pub fn is_uniform(&self) -> bool {
        self.outer == self.inner
    }
}

impl From<LiouvilleParams> for AnnulusBoundaries {
    fn from(params: LiouvilleParams) -> Self {
        AnnulusBoundaries::uniform(params)
    }
}

/// Tolerances of a bootstrap evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapSpec {
    /// The P integral.
    pub outer: QuadratureSpec,
    /// The t integral inside each bulk-boundary constant.
    pub inner: QuadratureSpec,
    pub truncation: usize,
    pub keep_samples: bool,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec {
            outer: QuadratureSpec::new(1e-9, 1e-13),
            inner: QuadratureSpec::new(1e-11, 1e-16),
            truncation: DEFAULT_TRUNCATION,
            keep_samples: false,
        }
    }
}

impl BootstrapSpec {
    pub fn with_truncation(mut self, n: usize) -> Self {
        self.truncation = n;
        self
    }

    pub fn with_samples(mut self, keep: bool) -> Self {
        self.keep_samples = keep;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.outer.parallel = parallel;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub value: ComplexValue,
    /// ∫₀^{P_max} of the integrand, before the prefactor.
    pub integral: ComplexValue,
    /// Factor applied to the integral once at the end.
    pub prefactor: ComplexValue,
    pub p_max: f64,
    pub quadrature_error: f64,
    /// Largest block-truncation tail bound relative to the block value.
    pub block_tail: f64,
    pub tail_warning: bool,
    pub evaluations: usize,
    /// Built on the bulk-boundary formula at μ > 0.
    pub conjectural: bool,
    /// (P, integrand) in increasing P, when requested.
    pub integrand_samples: Vec<(f64, ComplexValue)>,
}

impl BootstrapResult {
    /// CSV with columns P, re, im under a `#` comment line echoing `header`.
    pub fn samples_csv(&self, header: &str) -> String {
        let mut out = format!("# {header}\nP,re,im\n");
        for (p, v) in &self.integrand_samples {
            out.push_str(&format!("{p:e},{:e},{:e}\n", v.re, v.im));
        }
        out
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(LiouvilleError::domain(format!(
            "q must lie in (0, 1), got {q}"
        )))
    }
}

fn check_beta(beta: f64, params: &LiouvilleParams, name: &str) -> Result<()> {
    if beta > 0.0 && beta < params.q() {
        Ok(())
    } else {
        Err(LiouvilleError::domain(format!(
            "{name} must lie in (0, Q) = (0, {}), got {beta}",
            params.q()
        )))
    }
}

fn check_unit(b: ComplexValue, name: &str) -> Result<()> {
    if (b.norm() - 1.0).abs() < 1e-12 {
        Ok(())
    } else {
        Err(LiouvilleError::domain(format!(
            "{name} must have modulus 1, got {b}"
        )))
    }
}

/// Integrand values recorded during one quadrature, plus running block
/// diagnostics; the first failure aborts the integral.
#[derive(Default)]
struct Recorder {
    samples: Vec<(f64, ComplexValue)>,
    block_tail: f64,
    tail_warning: bool,
    failure: Option<LiouvilleError>,
}

struct Sampled<'a, F> {
    f: F,
    keep: bool,
    state: &'a Mutex<Recorder>,
}

/// Value of an integrand at P, with the block tail bound relative to the
/// block value and its warning flag.
type Sample = Result<(ComplexValue, f64, bool)>;

impl<F: Fn(f64) -> Sample + Sync> Sampled<'_, F> {
    fn eval(&self, p: f64) -> ComplexValue {
        match (self.f)(p) {
            Ok((v, tail, warn)) => {
                let mut s = self.state.lock().unwrap();
                s.block_tail = s.block_tail.max(tail);
                s.tail_warning |= warn;
                if self.keep {
                    s.samples.push((p, v));
                }
                v
            }
            Err(e) => {
                self.state.lock().unwrap().failure.get_or_insert(e);
                c(f64::NAN, f64::NAN)
            }
        }
    }
}

/// ∫₀^∞ f(P) q^{P²/2} dP with the Gaussian envelope sized from samples of
/// f(P) at a few momenta.
fn spectral_integral<F>(
    f: F,
    q: f64,
    breakpoints: &[f64],
    spec: &BootstrapSpec,
) -> Result<(IntegralParts, Recorder)>
where
    F: Fn(f64) -> Sample + Sync,
{
    let decay = -q.ln() / 2.0;
    let weighted = |p: f64| -> Sample {
        let (v, tail, warn) = f(p)?;
        Ok((v * (-decay * p * p).exp(), tail, warn))
    };
    let mut scale: f64 = 0.0;
    for p in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0] {
        scale = scale.max(f(p)?.0.norm());
    }
    let tail = GaussianTail::new(decay).with_scale(10.0 * scale.max(f64::MIN_POSITIVE));
    let state = Mutex::new(Recorder::default());
    let sampled = Sampled {
        f: &weighted,
        keep: spec.keep_samples,
        state: &state,
    };
    let r = integrate_halfline_gaussian_with(|p| sampled.eval(p), &tail, breakpoints, &spec.outer);
    let mut rec = state.into_inner().unwrap();
    if let Some(e) = rec.failure.take() {
        return Err(e);
    }
    let r = r?;
    let at_cut = weighted(r.upper)?.0.norm();
    if at_cut > spec.outer.abs_tol.max(f64::MIN_POSITIVE) {
        return Err(LiouvilleError::NonConvergence {
            message: format!(
                "integrand {at_cut:e} at the cut P_max = {} exceeds abs_tol",
                r.upper
            ),
            estimate: r.value.norm(),
            error: at_cut,
            intervals: r.intervals,
        });
    }
    rec.samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((
        IntegralParts {
            value: r.value,
            error: r.error,
            upper: r.upper,
            evaluations: r.evaluations,
        },
        rec,
    ))
}

struct IntegralParts {
    value: ComplexValue,
    error: f64,
    upper: f64,
    evaluations: usize,
}

fn assemble(
    parts: IntegralParts,
    rec: Recorder,
    prefactor: ComplexValue,
    conjectural: bool,
) -> BootstrapResult {
    BootstrapResult {
        value: parts.value * prefactor,
        integral: parts.value,
        prefactor,
        p_max: parts.upper,
        quadrature_error: parts.error * prefactor.norm(),
        block_tail: rec.block_tail,
        tail_warning: rec.tail_warning,
        evaluations: parts.evaluations,
        conjectural,
        integrand_samples: rec.samples,
    }
}

fn block_at(
    kind: BlockKind,
    betas: &[f64],
    p: f64,
    params: &LiouvilleParams,
    q: f64,
    b1b2: ComplexValue,
    n: usize,
) -> Result<(ComplexValue, f64, bool)> {
    let series = block_series_on_line(kind, betas, &[p], params, n)?;
    let e = evaluate_block(&series, q, b1b2)?;
    Ok((e.value, e.tail_bound / e.value.norm(), e.tail_warning))
}

/// G(Q+iP, β₁)·G(Q−iP, β₂)·F^A(Δ_{β₁}, Δ_{β₂}, Δ_{Q+iP}, q, b₁, b₂), the
/// two-point integrand without the Gaussian weight.
pub fn two_point_integrand(
    p: f64,
    betas: (f64, f64),
    b1b2: ComplexValue,
    q: f64,
    boundaries: &AnnulusBoundaries,
    spec: &BootstrapSpec,
) -> Result<(ComplexValue, f64, bool)> {
    let (outer, inner) = (&boundaries.outer, &boundaries.inner);
    let qq = outer.q();
    let (b1, b2) = (c(betas.0, 0.0), c(betas.1, 0.0));
    // both constants vanish linearly at P = 0
    let pair = if p.abs() >= SMALL_MOMENTUM {
        bulk_boundary(c(qq, p), b1, outer, &spec.inner)?
            * bulk_boundary(c(qq, -p), b2, inner, &spec.inner)?
    } else {
        -bulk_boundary_spectrum_over_p(p, b1, outer, &spec.inner)?
            * bulk_boundary_spectrum_over_p(-p, b2, inner, &spec.inner)?
            * (p * p)
    };
    let (block, tail, warn) = block_at(
        BlockKind::Annulus2pt,
        &[betas.0, betas.1],
        p,
        outer,
        q,
        b1b2,
        spec.truncation,
    )?;
    Ok((pair * block, tail, warn))
}

/// G(Q+iP, β₁)·U(Q−iP)·F^A(Δ_{β₁}, Δ_{Q+iP}, q), finite at P = 0.
pub fn one_point_integrand(
    p: f64,
    beta1: f64,
    q: f64,
    boundaries: &AnnulusBoundaries,
    spec: &BootstrapSpec,
) -> Result<(ComplexValue, f64, bool)> {
    let pair = if boundaries.is_uniform() {
        bulk_boundary_fzz_product(p, c(beta1, 0.0), &boundaries.outer, &spec.inner)?
    } else {
        // the zero of G(·, β₁) and the pole of U come from different
        // boundaries; both are taken in regularized form
        spectrum_pair(
            p,
            |x| bulk_boundary_fzz_product(x, c(beta1, 0.0), &boundaries.outer, &spec.inner),
            boundaries,
        )?
    };
    let (block, tail, warn) = block_at(
        BlockKind::Annulus1pt,
        &[beta1],
        p,
        &boundaries.outer,
        q,
        c(1.0, 0.0),
        spec.truncation,
    )?;
    Ok((pair * block, tail, warn))
}

/// Re-pairs a product G_outer·U_outer(Q − iP) into G_outer·U_inner(Q − iP)
/// via the ratio U_inner/U_outer = cosh(πθ_inner P)/cosh(πθ_outer P).
fn spectrum_pair<F>(p: f64, outer_pair: F, boundaries: &AnnulusBoundaries) -> Result<ComplexValue>
where
    F: Fn(f64) -> Result<ComplexValue>,
{
    let t_out = boundaries.outer.theta()?;
    let t_in = boundaries.inner.theta()?;
    let ratio = (t_in * (PI * p)).cosh() / (t_out * (PI * p)).cosh();
    Ok(outer_pair(p)? * ratio)
}

/// G(Q+iP, γ)·U(Q−iP) from the closed forms, finite at P = 0.
pub fn gamma_insertion_integrand(p: f64, boundaries: &AnnulusBoundaries) -> Result<ComplexValue> {
    if boundaries.is_uniform() {
        g_gamma_fzz_product(p, &boundaries.outer)
    } else {
        spectrum_pair(p, |x| g_gamma_fzz_product(x, &boundaries.outer), boundaries)
    }
}

/// Annulus two-point function ⟨V_{β₁/2}(b₁)V_{β₂/2}(q/b₂)⟩ as a spectral
/// integral over the spectrum line.
pub fn two_point_bootstrap(
    beta1: f64,
    beta2: f64,
    b1: ComplexValue,
    b2: ComplexValue,
    q: f64,
    boundaries: &AnnulusBoundaries,
    spec: &BootstrapSpec,
) -> Result<BootstrapResult> {
    check_q(q)?;
    check_beta(beta1, &boundaries.outer, "beta1")?;
    check_beta(beta2, &boundaries.outer, "beta2")?;
    check_unit(b1, "b1")?;
    check_unit(b2, "b2")?;
    let b1b2 = b1 * b2;
    // G(Q − iP, β₂) switches on over P ~ β₂
    let mut breaks: Vec<f64> = [0.25, 1.0, 4.0, 16.0].iter().map(|k| k * beta2).collect();
    breaks.extend([0.5, 1.0, 2.0]);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let f = |p: f64| two_point_integrand(p, (beta1, beta2), b1b2, q, boundaries, spec);
    let (parts, rec) = spectral_integral(f, q, &breaks, spec)?;
    let pref = c(annulus_prefactor() * q.powf(-1.0 / 12.0), 0.0);
    Ok(assemble(parts, rec, pref, boundaries.outer.mu() > 0.0))
}

/// Annulus one-point function ⟨V_{β₁/2}(b)⟩; independent of b.
pub fn one_point_bootstrap(
    beta1: f64,
    b: ComplexValue,
    q: f64,
    boundaries: &AnnulusBoundaries,
    spec: &BootstrapSpec,
) -> Result<BootstrapResult> {
    check_q(q)?;
    check_beta(beta1, &boundaries.outer, "beta1")?;
    check_unit(b, "b")?;
    let f = |p: f64| one_point_integrand(p, beta1, q, boundaries, spec);
    let (parts, rec) = spectral_integral(f, q, &[0.5, 1.0, 2.0], spec)?;
    let pref = c(annulus_prefactor() * q.powf(-1.0 / 12.0), 0.0);
    Ok(assemble(parts, rec, pref, boundaries.outer.mu() > 0.0))
}

/// Annulus one-point function of V_{γ/2}, where the block is 1/η(q²) up to
/// q^{1/12}. The eta factor is part of the final prefactor.
pub fn gamma_insertion_bootstrap(
    q: f64,
    boundaries: &AnnulusBoundaries,
    spec: &BootstrapSpec,
) -> Result<BootstrapResult> {
    check_q(q)?;
    let f = |p: f64| -> Sample { Ok((gamma_insertion_integrand(p, boundaries)?, 0.0, false)) };
    let (parts, rec) = spectral_integral(f, q, &[0.5, 1.0, 2.0], spec)?;
    let pref = c(annulus_prefactor() * (-ln_dedekind_eta(q * q)?).exp(), 0.0);
    Ok(assemble(parts, rec, pref, false))
}

/// Tolerances of the nested LQG quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LqgSpec {
    /// The P integral at fixed q.
    pub inner: QuadratureSpec,
    /// The moduli integral, done in u = −ln q.
    pub outer: QuadratureSpec,
    /// Largest q integrated; the rest of (q_cap, 1) is covered by a bound.
    pub q_cap: f64,
}

impl Default for LqgSpec {
    fn default() -> Self {
        LqgSpec {
            inner: QuadratureSpec::new(1e-10, 1e-15),
            outer: QuadratureSpec::new(1e-8, 1e-14),
            q_cap: 1.0 - 1e-6,
        }
    }
}

impl LqgSpec {
    /// Every tolerance divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        let mut s = *self;
        for q in [&mut s.inner, &mut s.outer] {
            q.rel_tol /= factor;
            q.abs_tol /= factor;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionFunctionResult {
    pub value: f64,
    /// Imaginary part left by roundoff in the integrand (zero in exact
    /// arithmetic for real boundary parameters).
    pub imaginary_residue: f64,
    pub prefactor: f64,
    /// The power 6Q² − 24 of η(q²).
    pub eta_exponent: f64,
    pub inner_p_tolerance: f64,
    pub outer_q_tolerance: f64,
    pub quadrature_error: f64,
    /// Bound on the neglected moduli ranges q < e^{−u_max} and q > q_cap.
    pub endpoint_tail: f64,
    pub q_range: (f64, f64),
    /// (q, inner P integral) at every outer node, increasing in q.
    pub q_grid_report: Vec<(f64, f64)>,
}

/// 2^{(c_m + 5)/2} with c_m = 25 − 6Q² from the Liouville central charge.
pub fn lqg_matter_factor(params: &LiouvilleParams) -> f64 {
    2f64.powf((params.c_m() + 5.0) / 2.0)
}

/// ∂_{μ_B}U(Q+iP)·U(Q−iP), the P-dependence of the LQG integrand.
pub fn lqg_spectral_density(p: f64, params: &LiouvilleParams) -> Result<ComplexValue> {
    Ok(g_gamma_fzz_product(p, params)? * (-2.0 * PI))
}

/// A constant s with |∂U(Q+iP)·U(Q−iP)| ≤ s·2^{−P²}, from samples with a
/// safety factor.
fn lqg_density_scale(params: &LiouvilleParams) -> Result<f64> {
    let mut scale: f64 = 0.0;
    for k in 0..=12 {
        let p = 0.5 * k as f64;
        scale = scale.max(lqg_spectral_density(p, params)?.norm() * 2f64.powf(p * p));
    }
    Ok(10.0 * scale.max(f64::MIN_POSITIVE))
}

/// ∫₀^∞ h(P) e^{−uP²/2} dP with q = e^{−u}.
fn lqg_inner(
    u: f64,
    params: &LiouvilleParams,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<ComplexValue> {
    let failure = Mutex::new(None::<LiouvilleError>);
    let tail = GaussianTail::new(LN_2 + u / 2.0).with_scale(scale);
    let r = integrate_halfline_gaussian_with(
        |p| match lqg_spectral_density(p, params) {
            Ok(v) => v * (-u * p * p / 2.0).exp(),
            Err(err) => {
                failure.lock().unwrap().get_or_insert(err);
                c(f64::NAN, f64::NAN)
            }
        },
        &tail,
        &[0.5, 1.0, 2.0],
        spec,
    );
    if let Some(err) = failure.into_inner().unwrap() {
        return Err(err);
    }
    Ok(r?.value)
}

/// η(q²)^{6Q²−24}·∫₀^∞ ∂U(Q+iP)U(Q−iP) q^{P²/2} dP, the integrand of the
/// moduli integral in dq (before the prefactor).
pub fn lqg_moduli_integrand(
    q: f64,
    params: &LiouvilleParams,
    spec: &LqgSpec,
) -> Result<ComplexValue> {
    if !(q > 0.0 && q < 1.0) {
        return Err(LiouvilleError::domain(format!(
            "q must lie in (0, 1), got {q}"
        )));
    }
    let e = 6.0 * params.q() * params.q() - 24.0;
    let u = -q.ln();
    let weight = (e * ln_dedekind_eta(q * q)?).exp();
    if weight == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    Ok(lqg_inner(u, params, lqg_density_scale(params)?, &spec.inner)? * weight)
}

/// Bosonic LQG partition function of the annulus.
pub fn lqg_partition(params: &LiouvilleParams, spec: &LqgSpec) -> Result<PartitionFunctionResult> {
    if !(spec.q_cap > 0.0 && spec.q_cap < 1.0) {
        return Err(LiouvilleError::domain(format!(
            "q_cap must lie in (0, 1), got {}",
            spec.q_cap
        )));
    }
    let e = 6.0 * params.q() * params.q() - 24.0;
    let scale = lqg_density_scale(params)?;
    let failure = Mutex::new(None::<LiouvilleError>);
    let report = Mutex::new(Vec::new());
    // η(q²)^e ≤ q^{e/12} and |I(q)| ≤ ∫|h| bound the small-q tail
    let h_bound = scale * (PI / LN_2).sqrt() / 2.0;
    let rate = 1.0 + e / 12.0;
    let outer_tol = spec.outer.abs_tol.max(f64::MIN_POSITIVE);
    let u_max = ((h_bound / (rate * outer_tol)).ln() / rate).max(1.0);
    let u_min = -spec.q_cap.ln();
    // near q = 1, η(q²) ≈ (π/u)^{1/2}e^{−π²/(12u)}
    let near_one =
        h_bound * u_min * ((PI / u_min).ln() * e / 2.0 - e * PI * PI / (12.0 * u_min)).exp();
    let endpoint_tail = h_bound * (-rate * u_max).exp() / rate + near_one;

    let integrand = |u: f64| -> ComplexValue {
        let result = (|| -> Result<ComplexValue> {
            let q = (-u).exp();
            let weight = (e * ln_dedekind_eta(q * q)? - u).exp();
            if weight == 0.0 {
                return Ok(c(0.0, 0.0));
            }
            let i = lqg_inner(u, params, scale, &spec.inner)?;
            report.lock().unwrap().push((q, i.re));
            Ok(i * weight)
        })();
        result.unwrap_or_else(|err| {
            failure.lock().unwrap().get_or_insert(err);
            c(f64::NAN, f64::NAN)
        })
    };
    let mut points = vec![u_min];
    points.extend(
        [0.05, 0.2, 1.0, 3.0]
            .iter()
            .copied()
            .filter(|&x| x > u_min && x < u_max),
    );
    points.push(u_max);
    let r = integrate_with_breakpoints(integrand, &points, &spec.outer);
    if let Some(err) = failure.into_inner().unwrap() {
        return Err(err);
    }
    let r = r?;
    let prefactor = -PI.sqrt() / (lqg_matter_factor(params) * std::f64::consts::E);
    let mut q_grid_report = report.into_inner().unwrap();
    q_grid_report.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PartitionFunctionResult {
        value: prefactor * r.value.re,
        imaginary_residue: prefactor * r.value.im,
        prefactor,
        eta_exponent: e,
        inner_p_tolerance: spec.inner.rel_tol,
        outer_q_tolerance: spec.outer.rel_tol,
        quadrature_error: r.error * prefactor.abs(),
        endpoint_tail: endpoint_tail * prefactor.abs(),
        q_range: ((-u_max).exp(), spec.q_cap),
        q_grid_report,
    })
}
