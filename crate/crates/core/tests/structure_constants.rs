// Oracle values carry the full precision they were generated with.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use liouville_core::numerics::QuadratureSpec;
use liouville_core::specialfn::LiouvilleParams;
use liouville_core::structure_constants::*;
use liouville_core::{ComplexValue as C, LiouvilleError};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

fn params(g: f64) -> LiouvilleParams {
    LiouvilleParams::new(g, 1.0).unwrap()
}

fn with_mu_b(g: f64, mu_b: f64) -> LiouvilleParams {
    params(g).with_mu_boundary(mu_b).unwrap()
}

// (γ, α₁, α₂, α₃, Re C, Im C) at μ = 1, from tests/oracles/structure_constants.py
const DOZZ_ORACLE: [(f64, (f64, f64), (f64, f64), (f64, f64), f64, f64); 2] = [
    (
        1.0,
        (2.0, 0.3),
        (1.8, 0.0),
        (1.9, 0.0),
        -0.013051343331827450565,
        -0.17312811950731326183,
    ),
    (
        std::f64::consts::SQRT_2,
        (1.6, 0.0),
        (1.7, 0.0),
        (1.5, 0.5),
        -0.26390797719438200474,
        -0.42828915786777455831,
    ),
];

// R(Q − 0.3 + 0.4i) at γ = 1.2, μ = 1
const REFLECTION_ORACLE: (f64, f64) = (2.0790288679100123508, 2.696275363902718302);

// (μ_B, Re U, Im U) at α = Q + 0.7i, γ = 1.2, μ = 1
const FZZ_ORACLE: [(f64, f64, f64); 2] = [
    (0.8, -0.20780139763161187915, -0.017211068374649867402),
    (1.05, -0.15318268754279622739, -0.012687295365479404784),
];

fn spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-11, 1e-16)
}

#[test]
fn dozz_matches_oracle() {
    for (g, a1, a2, a3, re, im) in DOZZ_ORACLE {
        let v = dozz(c(a1.0, a1.1), c(a2.0, a2.1), c(a3.0, a3.1), &params(g)).unwrap();
        assert!(rel(v, c(re, im)) < 1e-9, "gamma={g}: {v}");
    }
}

#[test]
fn dozz_permutation_symmetry_is_bit_exact() {
    let p = params(1.0);
    let (a, b, d) = (c(2.5, 0.5), c(0.9 * 2.5, 0.0), c(1.3, -0.2));
    let v = dozz(a, b, d, &p).unwrap();
    assert_eq!(v, dozz(d, a, b, &p).unwrap());
    assert_eq!(v, dozz(b, d, a, &p).unwrap());
}

#[test]
fn dozz_reflection_example() {
    let p = params(1.0);
    let q = p.q();
    let (a1, a2) = (c(q, 0.5), c(0.9 * q, 0.0));
    let lhs = dozz(a1, a2, a2, &p).unwrap();
    let rhs = reflection(a1, &p).unwrap() * dozz(c(2.0 * q, 0.0) - a1, a2, a2, &p).unwrap();
    assert!(rel(lhs, rhs) < 1e-8);
}

#[test]
fn dozz_pole_reports_factor() {
    let p = params(1.0);
    // ᾱ/2 − Q = 0 is a zero of the denominator
    let err = dozz(c(2.0, 0.0), c(1.5, 0.0), c(1.5, 0.0), &p).unwrap_err();
    match err {
        LiouvilleError::Pole { factor, .. } => assert!(factor.contains("DOZZ")),
        other => panic!("{other:?}"),
    }
    assert!(dozz(
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(1.0, 0.0),
        &LiouvilleParams::new(1.0, 0.0).unwrap()
    )
    .is_err());
}

#[test]
fn dozz_vanishes_at_upsilon_zero_of_numerator() {
    let p = params(1.0);
    assert_eq!(
        dozz(c(0.0, 0.0), c(1.4, 0.1), c(1.7, 0.0), &p).unwrap(),
        c(0.0, 0.0)
    );
}

#[test]
fn dozz_small_p_small_alpha_ratio() {
    let p = params(1.0);
    let q = p.q();
    let ratio = |s: f64| {
        let v = dozz(c(q, s), c(s, 0.0), c(q, -s), &p).unwrap();
        v * s * (s * s + 4.0 * s * s) / (s * s)
    };
    let values: Vec<C> = [1e-2, 5e-3, 2.5e-3].iter().map(|&s| ratio(s)).collect();
    for w in values.windows(2) {
        assert!((w[1] / w[0] - 1.0).norm() < 0.05, "{:?}", values);
    }
}

#[test]
fn reflection_matches_oracle() {
    let p = params(1.2);
    let v = reflection(c(p.q() - 0.3, 0.4), &p).unwrap();
    assert!(rel(v, c(REFLECTION_ORACLE.0, REFLECTION_ORACLE.1)) < 1e-12);
}

#[test]
fn reflection_unitary_on_spectrum_line() {
    let p = params(1.2);
    for big_p in [0.3, 1.0, 5.0] {
        let r = reflection(c(p.q(), big_p), &p).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-10, "P={big_p}");
    }
    assert_eq!(reflection(c(p.q(), 0.0), &p).unwrap(), c(-1.0, 0.0));
}

#[test]
fn reflection_is_an_involution() {
    let p = params(1.2);
    let a = c(p.q() - 0.3, 0.0);
    let product = reflection(a, &p).unwrap() * reflection(c(2.0 * p.q(), 0.0) - a, &p).unwrap();
    assert!((product - 1.0).norm() < 1e-12);
}

#[test]
fn reflection_large_imaginary_scaling() {
    let p = params(1.0);
    let (q, x) = (p.q(), 0.1);
    let r1 = reflection(c(q - x, 100.0), &p).unwrap().norm();
    let r2 = reflection(c(q - x, 200.0), &p).unwrap().norm();
    let expected = 2f64.powf(-2.0 * q * x);
    assert!((r2 / r1 / expected - 1.0).abs() < 0.02);
}

#[test]
fn fzz_matches_oracle() {
    for (mu_b, re, im) in FZZ_ORACLE {
        let p = with_mu_b(1.2, mu_b);
        let v = fzz_one_point(c(p.q(), 0.7), &p).unwrap();
        assert!(rel(v, c(re, im)) < 1e-12, "mu_B={mu_b}: {v}");
    }
}

#[test]
fn fzz_simple_pole_at_zero_momentum() {
    let p = with_mu_b(1.2, 0.8);
    let near = |big_p: f64| fzz_one_point(c(p.q(), big_p), &p).unwrap() * big_p;
    // |P·U| is even in P, so the modulus settles quadratically; the phase
    // drifts linearly in P
    assert!((near(1e-3).norm() / near(1e-2).norm() - 1.0).abs() < 0.01);
    assert!(rel(near(1e-4), near(1e-3)) < 0.01);
    let limit = fzz_spectrum_times_p(0.0, &p).unwrap();
    assert!(limit.norm() > 0.0 && limit.is_finite());
    assert!(rel(near(1e-4), limit) < 1e-3);
    assert!(rel(fzz_spectrum_times_p(1e-3, &p).unwrap(), near(1e-3)) < 1e-12);
}

#[test]
fn fzz_conjugation_real_theta() {
    let p = with_mu_b(1.2, 0.8);
    for big_p in [0.2, 1.0, 3.0] {
        let up = fzz_one_point(c(p.q(), big_p), &p).unwrap();
        let down = fzz_one_point(c(p.q(), -big_p), &p).unwrap();
        assert!(rel(down, up.conj()) < 1e-12);
    }
}

#[test]
fn fzz_requires_boundary_and_mu() {
    assert!(fzz_one_point(c(2.0, 0.5), &params(1.0))
        .unwrap_err()
        .is_domain());
    let p = LiouvilleParams::new(1.0, 0.0)
        .unwrap()
        .with_mu_boundary(1.0)
        .unwrap();
    assert!(fzz_one_point(c(2.0, 0.5), &p).unwrap_err().is_domain());
}

#[test]
fn fzz_branch_junction_is_an_error() {
    let g: f64 = 1.2;
    let junction = 1.0 / (PI * g * g / 4.0).sin().sqrt();
    let p = with_mu_b(g, junction);
    assert!(matches!(
        fzz_one_point(c(p.q(), 0.5), &p),
        Err(LiouvilleError::Branch { .. })
    ));
    assert!(matches!(
        g_gamma_derivative(0.5, &p),
        Err(LiouvilleError::Branch { .. })
    ));
}

#[test]
fn derivative_is_continuous_through_the_junction() {
    let g: f64 = 1.2;
    let junction = 1.0 / (PI * g * g / 4.0).sin().sqrt();
    let at = LiouvilleParams::new(g, 1.0)
        .unwrap()
        .with_theta(c(0.0, 0.0))
        .unwrap();
    for big_p in [0.0, 0.4, 1.3] {
        let mid = g_gamma_derivative(big_p, &at).unwrap();
        let pair = g_gamma_fzz_product(big_p, &at).unwrap();
        assert!(mid.norm().is_finite() && pair.norm().is_finite());
        for side in [1.0 - 1e-7, 1.0 + 1e-7] {
            let near = with_mu_b(g, junction * side);
            let v = g_gamma_derivative(big_p, &near).unwrap();
            assert!(
                (v - mid).norm() <= 1e-5 * mid.norm().max(1e-300) + 1e-300,
                "P={big_p}: {v} vs {mid}"
            );
            let w = g_gamma_fzz_product(big_p, &near).unwrap();
            assert!(
                (w - pair).norm() <= 1e-5 * pair.norm(),
                "P={big_p}: {w} vs {pair}"
            );
        }
    }
}

#[test]
fn derivative_matches_finite_difference() {
    let h = 1e-5;
    for (big_p, g, mu_b) in [(0.8, 1.2, 0.7), (0.3, 1.0, 0.9), (1.7, 1.6, 1.5)] {
        let u = |m: f64| {
            let p = with_mu_b(g, m);
            fzz_one_point(c(p.q(), big_p), &p).unwrap()
        };
        let fd = (u(mu_b + h) - u(mu_b - h)) / (2.0 * h);
        let exact = g_gamma_derivative(big_p, &with_mu_b(g, mu_b)).unwrap();
        assert!(rel(exact, -fd / (2.0 * PI)) < 1e-6, "P={big_p} gamma={g}");
        let dmu = fzz_spectrum_dmu_b(big_p, &with_mu_b(g, mu_b)).unwrap();
        assert!(rel(dmu, fd) < 1e-6);
    }
}

#[test]
fn derivative_vanishes_linearly() {
    let p = with_mu_b(1.2, 0.8);
    let ratio = |x: f64| g_gamma_derivative(x, &p).unwrap() / x;
    assert!((ratio(1e-3).norm() / ratio(1e-2).norm() - 1.0).abs() < 0.02);
    assert!(rel(ratio(1e-4), ratio(1e-3)) < 0.02);
    assert_eq!(g_gamma_derivative(0.0, &p).unwrap().norm(), 0.0);
}

#[test]
fn derivative_conjugate_symmetry() {
    let p = with_mu_b(1.2, 0.8);
    let plus = g_gamma_derivative(0.5, &p).unwrap();
    let minus = g_gamma_derivative(-0.5, &p).unwrap();
    // P ↦ −P conjugates the charge: real part even, imaginary part odd
    assert!(rel(minus, plus.conj()) < 1e-12);
}

#[test]
fn bulk_boundary_at_gamma_matches_derivative() {
    for (g, mu_b, big_p) in [(1.2, 0.8, 0.6), (1.0, 1.3, 1.1)] {
        let p = with_mu_b(g, mu_b);
        let integral = bulk_boundary(c(p.q(), big_p), c(g, 0.0), &p, &spec()).unwrap();
        let closed = g_gamma_derivative(big_p, &p).unwrap();
        assert!(
            rel(integral, closed) < 1e-8,
            "gamma={g}: {integral} vs {closed}"
        );
    }
}

#[test]
fn bulk_boundary_small_beta_tends_to_fzz() {
    let p = with_mu_b(1.0, 0.6);
    let alpha = c(p.q(), 0.9);
    let u = fzz_one_point(alpha, &p).unwrap();
    let gap = |beta: f64| rel(bulk_boundary(alpha, c(beta, 0.0), &p, &spec()).unwrap(), u);
    let (g1, g2) = (gap(1e-2), gap(1e-3));
    assert!(g2 < g1 && g2 < 2e-3, "{g1:e} {g2:e}");
}

#[test]
fn bulk_boundary_conjugation() {
    let p = with_mu_b(1.2, 0.8);
    let q = p.q();
    let up = bulk_boundary(c(q, 0.7), c(0.9, 0.0), &p, &spec()).unwrap();
    let down = bulk_boundary(c(q, -0.7), c(0.9, 0.0), &p, &spec()).unwrap();
    assert!(rel(down, up.conj()) < 1e-8);
}

#[test]
fn bulk_boundary_vanishes_linearly_at_gamma() {
    let p = with_mu_b(1.2, 0.8);
    let g = c(p.gamma(), 0.0);
    let ratio = |x: f64| bulk_boundary(c(p.q(), x), g, &p, &spec()).unwrap() / x;
    let (a, b) = (ratio(1e-2), ratio(1e-3));
    assert!((b.norm() / a.norm() - 1.0).abs() < 0.02);
    assert!(rel(ratio(1e-4), b) < 0.02);
}

#[test]
fn bulk_boundary_imaginary_theta() {
    let p = with_mu_b(1.0, 2.5);
    assert!(p.theta().unwrap().re == 0.0);
    let integral = bulk_boundary(c(p.q(), 0.8), c(1.0, 0.0), &p, &spec()).unwrap();
    let closed = g_gamma_derivative(0.8, &p).unwrap();
    assert!(rel(integral, closed) < 1e-8);
}

#[test]
fn bulk_boundary_divergent_kernel_is_domain_error() {
    // Re θ close to 1/γ with β near 2Q leaves no decay
    let p = params(1.0).with_theta(c(0.95, 0.0)).unwrap();
    let err = bulk_boundary(c(p.q(), 0.3), c(1.9 * p.q(), 0.0), &p, &spec()).unwrap_err();
    assert!(err.is_domain());
}

#[test]
fn bulk_boundary_cut_respects_decay_bound() {
    for (g, mu_b, big_p, beta) in [
        (1.2, 0.8, 0.6, 1.2),
        (1.0, 0.6, 2.0, 0.4),
        (1.6, 1.2, 0.1, 0.9),
    ] {
        let p = with_mu_b(g, mu_b);
        let alpha = c(p.q(), big_p);
        let s = spec();
        let tail = bulk_boundary_cut(alpha, c(beta, 0.0), &p, &s).unwrap();
        let theta = p.theta().unwrap();
        let expected = PI * (2.0 * p.q() - beta) - 2.0 * PI * theta.re.abs();
        assert!((tail.decay_rate - expected).abs() < 1e-14);
        // the sampled modulus sits under the certified envelope from the anchor on
        for k in 0..=8 {
            let t = tail.anchor + (tail.cut - tail.anchor) * k as f64 / 8.0;
            let m = bulk_boundary_integrand(alpha, c(beta, 0.0), t, &p)
                .unwrap()
                .norm();
            let envelope = tail.anchor_modulus * (-tail.decay_rate * (t - tail.anchor)).exp();
            assert!(m <= 1.5 * envelope, "t={t}: {m:e} vs {envelope:e}");
        }
        let at_cut = bulk_boundary_integrand(alpha, c(beta, 0.0), tail.cut, &p)
            .unwrap()
            .norm();
        assert!(at_cut / tail.decay_rate < s.abs_tol, "{at_cut:e}");
    }
}

#[test]
fn mu_zero_bulk_boundary_tends_to_one_point() {
    let p = LiouvilleParams::new(1.0, 0.0)
        .unwrap()
        .with_mu_boundary(0.7)
        .unwrap();
    let q = p.q();
    for alpha in [c(q, 0.3), c(q, 0.7), c(q, 1.5)] {
        let one = bulk_one_point_mu0(alpha, &p).unwrap();
        let two = bulk_boundary_mu0(alpha, c(1e-4, 0.0), &p).unwrap();
        assert!(rel(two, one) < 1e-3, "alpha={alpha}");
    }
    // the approach is linear in β, steep here because Γ(2(α − Q)/γ) sits
    // near its pole
    let alpha = c(1.1 * q - 0.2, 0.0);
    let one = bulk_one_point_mu0(alpha, &p).unwrap();
    let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-6]
        .iter()
        .map(|&b| rel(bulk_boundary_mu0(alpha, c(b, 0.0), &p).unwrap(), one))
        .collect();
    assert!(
        gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] < 1e-4,
        "{gaps:?}"
    );
    let finite = bulk_boundary_mu0(alpha, c(0.5, 0.0), &p).unwrap();
    assert!(finite.is_finite() && finite.norm() > 0.0);
}

#[test]
fn mu_zero_formulas_reject_positive_mu() {
    let p = with_mu_b(1.0, 0.7);
    assert!(bulk_one_point_mu0(c(2.5, 0.3), &p).unwrap_err().is_domain());
    let t = LiouvilleParams::new(1.0, 0.0)
        .unwrap()
        .with_theta(c(0.2, 0.0))
        .unwrap();
    assert!(bulk_boundary_mu0(c(2.5, 0.3), c(0.5, 0.0), &t)
        .unwrap_err()
        .is_domain());
}

#[test]
fn spectrum_and_boundary_types() {
    let p = params(1.3);
    let s = SpectrumPoint::new(0.4, &p);
    assert_eq!(s.charge.re, p.q());
    assert_eq!(s.charge.im, 0.4);
    assert!(BoundaryWeight::new(p.q() - 1e-9, &p).seiberg_ok);
    assert!(!BoundaryWeight::new(p.q(), &p).seiberg_ok);
}

fn grid_point() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (
        0.6f64..1.8,
        0.05f64..3.0,
        0.2f64..0.9,
        0.2f64..0.9,
        -1.0f64..1.0,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn dozz_reflection_identity(pt in grid_point()) {
        let (g, big_p, x2, x3, y) = pt;
        let p = params(g);
        let q = p.q();
        let a1 = c(q, big_p);
        let (a2, a3) = (c(x2 * q, 0.3 * y), c(x3 * q, -0.2 * y));
        let lhs = dozz(a1, a2, a3, &p).unwrap();
        let rhs = reflection(a1, &p).unwrap() * dozz(c(2.0 * q, 0.0) - a1, a2, a3, &p).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-8);
    }

    #[test]
    fn reflection_unit_modulus(g in 0.3f64..1.95, big_p in 0.01f64..20.0) {
        let p = params(g);
        prop_assert!((reflection(c(p.q(), big_p), &p).unwrap().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fzz_spectrum_product_is_conjugate_even(g in 0.5f64..1.9, mu_b in 0.1f64..3.0, big_p in 0.0f64..4.0) {
        let s = (PI * g * g / 4.0).sin();
        prop_assume!((mu_b * mu_b * s - 1.0).abs() > 1e-6);
        let p = with_mu_b(g, mu_b);
        let plus = fzz_spectrum_times_p(big_p, &p).unwrap();
        let minus = fzz_spectrum_times_p(-big_p, &p).unwrap();
        prop_assert!((minus + plus.conj()).norm() <= 1e-12 * plus.norm());
    }
}

#[test]
fn regularized_products_match_direct_forms() {
    let p = with_mu_b(1.2, 0.8);
    let q = p.q();
    let s = spec();
    let big_p = 0.5;
    let direct = g_gamma_derivative(big_p, &p).unwrap() * fzz_one_point(c(q, -big_p), &p).unwrap();
    assert!(rel(g_gamma_fzz_product(big_p, &p).unwrap(), direct) < 1e-13);
    let beta = c(0.9, 0.0);
    let g = bulk_boundary(c(q, big_p), beta, &p, &s).unwrap();
    assert!(
        rel(
            bulk_boundary_spectrum_over_p(big_p, beta, &p, &s).unwrap() * big_p,
            g
        ) < 1e-12
    );
    // both sides of the switch to the regularized form
    let below = bulk_boundary_fzz_product(0.99 * SMALL_MOMENTUM, beta, &p, &s).unwrap();
    let above = bulk_boundary_fzz_product(1.01 * SMALL_MOMENTUM, beta, &p, &s).unwrap();
    assert!(rel(below, above) < 1e-5);
    let at_zero = bulk_boundary_fzz_product(0.0, beta, &p, &s).unwrap();
    assert!(at_zero.is_finite() && rel(at_zero, below) < 1e-5);
}

#[test]
fn one_point_integrand_bounded_at_zero_momentum() {
    let p = with_mu_b(1.0, 1.0);
    let beta = c(0.8, 0.0);
    let s = spec();
    let tiny = bulk_boundary_fzz_product(1e-6, beta, &p, &s)
        .unwrap()
        .norm();
    let small = bulk_boundary_fzz_product(1e-3, beta, &p, &s)
        .unwrap()
        .norm();
    assert!(tiny < 10.0 * small);
    let g0 = g_gamma_fzz_product(0.0, &p).unwrap();
    assert!(g0.is_finite() && g0.norm() > 0.0);
    assert!(rel(g_gamma_fzz_product(1e-6, &p).unwrap(), g0) < 1e-5);
}
