//! Quadrature and small complex-arithmetic helpers shared by every module.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LiouvilleError, Result};

pub type ComplexValue = Complex64;

/// Tolerances and limits for one quadrature call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Upper limit used when a nominally infinite range is truncated.
    pub truncation_bound: f64,
    /// Evaluate the nodes of freshly bisected intervals on the rayon pool.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            truncation_bound: 60.0,
            parallel: false,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn with_truncation(mut self, bound: f64) -> Self {
        self.truncation_bound = bound;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return Err(LiouvilleError::domain(format!(
                "tolerances must satisfy rel_tol > 0, abs_tol >= 0 (got {}, {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(LiouvilleError::domain(
                "max_subdivisions must be at least 1",
            ));
        }
        if !(self.truncation_bound > 0.0) {
            return Err(LiouvilleError::domain("truncation_bound must be positive"));
        }
        Ok(())
    }

    fn target(&self, value: ComplexValue) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: ComplexValue,
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
    /// Right end of the range actually integrated (differs from the
    /// requested one only for truncated half-line integrals).
    pub upper: f64,
}

// 21-point Kronrod extension of the 10-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_005_240_818,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const NODES_PER_INTERVAL: usize = 21;

fn nodes(a: f64, b: f64) -> [f64; NODES_PER_INTERVAL] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; NODES_PER_INTERVAL];
    for j in 0..10 {
        x[2 * j] = c - h * XGK[j];
        x[2 * j + 1] = c + h * XGK[j];
    }
    x[20] = c;
    x
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: ComplexValue,
    error: f64,
    /// Too narrow to bisect, or error already at the roundoff floor.
    frozen: bool,
}

fn kronrod(a: f64, b: f64, fx: &[ComplexValue]) -> Interval {
    let h = 0.5 * (b - a);
    let fc = fx[20];
    let mut res_k = fc * WGK[10];
    let mut res_g = ComplexValue::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    for j in 0..10 {
        let pair = fx[2 * j] + fx[2 * j + 1];
        res_k += pair * WGK[j];
        res_abs += WGK[j] * (fx[2 * j].norm() + fx[2 * j + 1].norm());
        if j % 2 == 1 {
            res_g += pair * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fx[2 * j] - mean).norm() + (fx[2 * j + 1] - mean).norm());
    }
    let value = res_k * h;
    let res_abs = res_abs * h.abs();
    let res_asc = res_asc * h.abs();
    let mut err = ((res_k - res_g) * h).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    let width = (b - a).abs();
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let at_floor = err <= 50.5 * f64::EPSILON * res_abs;
    Interval {
        a,
        b,
        value,
        error: err,
        frozen: at_floor || width <= 1e3 * f64::EPSILON * scale,
    }
}

fn evaluate_intervals<F>(f: &F, bounds: &[(f64, f64)], parallel: bool) -> Result<Vec<Interval>>
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    let xs: Vec<f64> = bounds.iter().flat_map(|&(a, b)| nodes(a, b)).collect();
    let fx: Vec<ComplexValue> = if parallel && xs.len() > NODES_PER_INTERVAL {
        xs.par_iter().map(|&x| f(x)).collect()
    } else {
        xs.iter().map(|&x| f(x)).collect()
    };
    if let Some(i) = fx
        .iter()
        .position(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(LiouvilleError::NonConvergence {
            message: format!("integrand is not finite at x = {:e}", xs[i]),
            estimate: f64::NAN,
            error: f64::INFINITY,
            intervals: 0,
        });
    }
    Ok(bounds
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            kronrod(
                a,
                b,
                &fx[k * NODES_PER_INTERVAL..(k + 1) * NODES_PER_INTERVAL],
            )
        })
        .collect())
}

/// Adaptive 21-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    integrate_with_breakpoints(f, &[a, b], spec)
}

/// Like [`integrate_adaptive`] but starts from the partition given by the
/// increasing sequence `points` (at least two entries). Breakpoints should
/// sit at known peaks or kinks of the integrand.
pub fn integrate_with_breakpoints<F>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    spec.validate()?;
    if points.len() < 2 {
        return Err(LiouvilleError::domain(
            "need at least two integration limits",
        ));
    }
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LiouvilleError::domain(format!(
            "integration limits must be finite and increasing: {points:?}"
        )));
    }
    let bounds: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    let mut intervals = evaluate_intervals(&f, &bounds, spec.parallel)?;
    let mut evaluations = NODES_PER_INTERVAL * intervals.len();

    loop {
        let total: ComplexValue = intervals.iter().map(|iv| iv.value).sum();
        let err: f64 = intervals.iter().map(|iv| iv.error).sum();
        let target = spec.target(total);
        let result = QuadratureResult {
            value: total,
            error: err,
            intervals: intervals.len(),
            evaluations,
            upper: points[points.len() - 1],
        };
        if err <= target {
            return Ok(result);
        }
        let worst = intervals
            .iter()
            .enumerate()
            .filter(|(_, iv)| !iv.frozen)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        if worst.is_none() && err <= 10.0 * target.max(100.0 * f64::EPSILON * total.norm()) {
            // every subinterval is at its roundoff floor
            return Ok(result);
        }
        let stuck = match worst {
            None => true,
            Some(_) => intervals.len() >= spec.max_subdivisions,
        };
        if stuck {
            return Err(LiouvilleError::NonConvergence {
                message: if worst.is_none() {
                    "roundoff limit reached on all subintervals".to_string()
                } else {
                    format!("exceeded {} subdivisions", spec.max_subdivisions)
                },
                estimate: total.norm(),
                error: err,
                intervals: intervals.len(),
            });
        }
        let i = worst.unwrap_or(0);
        let iv = intervals[i];
        let mid = 0.5 * (iv.a + iv.b);
        let halves = evaluate_intervals(&f, &[(iv.a, mid), (mid, iv.b)], spec.parallel)?;
        evaluations += 2 * NODES_PER_INTERVAL;
        intervals[i] = halves[0];
        intervals.insert(i + 1, halves[1]);
    }
}

/// Certified envelope |f(P)| <= scale·(1+P)^degree·exp(−decay_rate·P²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianTail {
    pub decay_rate: f64,
    pub scale: f64,
    pub degree: u32,
}

impl GaussianTail {
    pub fn new(decay_rate: f64) -> Self {
        GaussianTail {
            decay_rate,
            scale: 1.0,
            degree: 0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self
    }

    /// Upper bound on ∫_p^∞ of the envelope, valid once a·p² ≥ degree + 1.
    pub fn tail_bound(&self, p: f64) -> f64 {
        let a = self.decay_rate;
        self.scale * (1.0 + p).powi(self.degree as i32) * (-a * p * p).exp() / (a * p)
    }

    /// Smallest cut (on a 1/64 grid) whose tail bound is below `tol`.
    pub fn cutoff(&self, tol: f64) -> f64 {
        let a = self.decay_rate;
        let mut p = (((self.degree + 1) as f64) / a).sqrt().max(1.0 / 64.0);
        while self.tail_bound(p) > tol {
            p *= 1.25;
        }
        let (mut lo, mut hi) = (p / 1.25, p);
        while hi - lo > 1.0 / 64.0 {
            let mid = 0.5 * (lo + hi);
            if self.tail_bound(mid) > tol || a * mid * mid < (self.degree + 1) as f64 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// ∫₀^∞ f(P) dP for integrands with Gaussian decay exp(−decay_rate·P²).
pub fn integrate_halfline_gaussian<F>(
    f: F,
    decay_rate: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    integrate_halfline_gaussian_with(f, &GaussianTail::new(decay_rate), &[], spec)
}

/// Half-line integral with an explicit envelope and optional interior
/// breakpoints (those beyond the cut are dropped).
pub fn integrate_halfline_gaussian_with<F>(
    f: F,
    tail: &GaussianTail,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    if !(tail.decay_rate > 0.0) || !tail.decay_rate.is_finite() {
        return Err(LiouvilleError::InvalidDecay {
            decay_rate: tail.decay_rate,
        });
    }
    spec.validate()?;
    let cut = tail.cutoff(spec.abs_tol.max(f64::MIN_POSITIVE));
    if cut > spec.truncation_bound {
        return Err(LiouvilleError::NonConvergence {
            message: format!(
                "Gaussian tail needs P_max = {cut} beyond truncation bound {}",
                spec.truncation_bound
            ),
            estimate: f64::NAN,
            error: tail.tail_bound(spec.truncation_bound),
            intervals: 0,
        });
    }
    let mut points = vec![0.0];
    points.extend(breakpoints.iter().copied().filter(|&p| p > 0.0 && p < cut));
    points.push(cut);
    points.dedup();
    let mut r = integrate_with_breakpoints(f, &points, spec)?;
    r.error += tail.tail_bound(cut);
    r.upper = cut;
    Ok(r)
}

/// exp(z) − 1 without cancellation for small |z|.
pub fn expm1(z: ComplexValue) -> ComplexValue {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    ComplexValue::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// Relative distance |a − b| / max(|a|, |b|, tiny).
pub fn rel_diff(a: ComplexValue, b: ComplexValue) -> f64 {
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

/// Relative error against a reference value, falling back to absolute
/// error for a vanishing reference.
pub fn rel_err(value: ComplexValue, reference: ComplexValue) -> f64 {
    let r = reference.norm();
    if r == 0.0 {
        value.norm()
    } else {
        (value - reference).norm() / r
    }
}
