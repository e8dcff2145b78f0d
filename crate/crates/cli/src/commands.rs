use clap::ValueEnum;
use liouville_core::bootstrap::{
    gamma_insertion_bootstrap, lqg_partition, one_point_bootstrap, two_point_bootstrap,
    AnnulusBoundaries, BootstrapResult, BootstrapSpec, LqgSpec,
};
use liouville_core::numerics::QuadratureSpec;
use liouville_core::specialfn::{
    double_gamma, double_sine, gamma_complex, ln_dedekind_eta, ln_gamma, log_double_gamma,
    partition_count, upsilon, BoundaryParam, LiouvilleParams,
};
use liouville_core::structure_constants::{
    bulk_boundary, bulk_boundary_mu0, dozz, fzz_one_point, reflection,
};
use liouville_core::virasoro::{
    block_series_on_line, evaluate_block, gram_condition, gram_matrix, BlockKind,
};
use liouville_core::{ComplexValue, LiouvilleError, Result};
use serde_json::{json, Map, Value};

use crate::args::{
    BlockArgs, BootstrapCommon, ChargeArgs, Command, Couplings, DozzArgs, Format, GramArgs,
    InnerBoundary, Kind, LqgArgs, Output, SpecialFunction, SpecialfnArgs, Tolerances,
};

pub const SCHEMA: &str = "1";

/// A command's JSON document and, where the command has tabular data, its
/// CSV form.
pub struct Rendered {
    pub json: Value,
    pub csv: Option<String>,
}

pub fn output_of(command: &Command) -> &Output {
    match command {
        Command::Specialfn(a) => &a.output,
        Command::Dozz(a) => &a.output,
        Command::Reflection(a) | Command::Fzz(a) => &a.output,
        Command::BulkBoundary(a) => &a.charge.output,
        Command::Gram(a) => &a.output,
        Command::Block(a) => &a.output,
        Command::Bootstrap2pt(a) => &a.common.output,
        Command::Bootstrap1pt(a) => &a.common.output,
        Command::BootstrapGamma(a) => &a.common.output,
        Command::Lqg(a) => &a.output,
    }
}

fn name_of(command: &Command) -> &'static str {
    match command {
        Command::Specialfn(_) => "specialfn",
        Command::Dozz(_) => "dozz",
        Command::Reflection(_) => "reflection",
        Command::Fzz(_) => "fzz",
        Command::BulkBoundary(_) => "bulk-boundary",
        Command::Gram(_) => "gram",
        Command::Block(_) => "block",
        Command::Bootstrap2pt(_) => "bootstrap-2pt",
        Command::Bootstrap1pt(_) => "bootstrap-1pt",
        Command::BootstrapGamma(_) => "bootstrap-gamma",
        Command::Lqg(_) => "lqg",
    }
}

pub fn run(command: &Command) -> Result<Rendered> {
    let (params, body, csv) = match command {
        Command::Specialfn(a) => specialfn(a)?,
        Command::Dozz(a) => run_dozz(a)?,
        Command::Reflection(a) => charge_function(a, reflection)?,
        Command::Fzz(a) => charge_function(a, fzz_one_point)?,
        Command::BulkBoundary(a) => run_bulk_boundary(&a.charge, a.beta, &a.tolerances)?,
        Command::Gram(a) => gram(a)?,
        Command::Block(a) => block(a)?,
        Command::Bootstrap2pt(a) => {
            let (boundaries, spec, params) = bootstrap_setup(&a.common)?;
            let g = boundaries.outer.gamma();
            let (b1, b2) = (a.beta1.resolve(g), a.beta2.resolve(g));
            let r = two_point_bootstrap(b1, b2, a.b1, a.b2, a.common.q, &boundaries, &spec)?;
            let extra =
                json!({"beta1": b1, "beta2": b2, "b1": cx(a.b1), "b2": cx(a.b2), "q": a.common.q});
            bootstrap_output(params, extra, &r, &a.common)?
        }
        Command::Bootstrap1pt(a) => {
            let (boundaries, spec, params) = bootstrap_setup(&a.common)?;
            let b1 = a.beta1.resolve(boundaries.outer.gamma());
            let r = one_point_bootstrap(b1, a.b, a.common.q, &boundaries, &spec)?;
            let extra = json!({"beta1": b1, "b": cx(a.b), "q": a.common.q});
            bootstrap_output(params, extra, &r, &a.common)?
        }
        Command::BootstrapGamma(a) => {
            let (boundaries, spec, params) = bootstrap_setup(&a.common)?;
            let r = gamma_insertion_bootstrap(a.common.q, &boundaries, &spec)?;
            bootstrap_output(params, json!({"q": a.common.q}), &r, &a.common)?
        }
        Command::Lqg(a) => lqg(a)?,
    };
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("command".into(), json!(name_of(command)));
    doc.insert("params".into(), params);
    doc.extend(body);
    Ok(Rendered {
        json: Value::Object(doc),
        csv,
    })
}

type Parts = (Value, Map<String, Value>, Option<String>);

fn cx(z: ComplexValue) -> Value {
    json!([z.re, z.im])
}

fn body(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("bodies are objects"),
    }
}

fn resolve(couplings: &Couplings) -> Result<LiouvilleParams> {
    let p = LiouvilleParams::new(couplings.gamma, couplings.mu)?;
    match (couplings.mu_b, couplings.theta) {
        (Some(mu_b), _) => p.with_mu_boundary(mu_b),
        (None, Some(theta)) => p.with_theta(theta),
        (None, None) => Ok(p),
    }
}

/// Couplings with derived quantities; θ and μ_B are resolved when a
/// boundary parameter is present.
fn echo(p: &LiouvilleParams) -> Result<Value> {
    let mut m = body(json!({
        "gamma": p.gamma(),
        "mu": p.mu(),
        "Q": p.q(),
        "c_L": p.c_l(),
        "c_m": p.c_m(),
    }));
    if let (Some(b), true) = (p.boundary(), p.mu() > 0.0) {
        let (mu_b, theta) = match b {
            BoundaryParam::MuBoundary(mu_b) => (ComplexValue::new(mu_b, 0.0), p.theta()?),
            BoundaryParam::Theta(theta) => (p.mu_boundary()?, theta),
        };
        m.insert("mu_b".into(), cx(mu_b));
        m.insert("theta".into(), cx(theta));
    } else if let Some(BoundaryParam::MuBoundary(mu_b)) = p.boundary() {
        // θ is undefined without a bulk cosmological constant
        m.insert("mu_b".into(), cx(ComplexValue::new(mu_b, 0.0)));
        m.insert("theta".into(), Value::Null);
    }
    Ok(Value::Object(m))
}

fn need<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| LiouvilleError::domain(format!("--{what} is required here")))
}

fn specialfn(a: &SpecialfnArgs) -> Result<Parts> {
    let with_gamma =
        || -> Result<LiouvilleParams> { LiouvilleParams::new(need(a.gamma, "gamma")?, 0.0) };
    let mut params = Map::new();
    let value = match a.function {
        SpecialFunction::Eta => {
            let q = need(a.q, "q")?;
            params.insert("q".into(), json!(q));
            json!(ln_dedekind_eta(q)?.exp())
        }
        SpecialFunction::Partition => {
            let n = need(a.n, "n")?;
            params.insert("n".into(), json!(n));
            json!(partition_count(n))
        }
        f => {
            let z = need(a.z, "z")?;
            params.insert("z".into(), cx(z));
            let v = match f {
                SpecialFunction::Gamma => gamma_complex(z)?,
                SpecialFunction::LogGamma => ln_gamma(z)?,
                other => {
                    let p = with_gamma()?;
                    params.insert("gamma".into(), json!(p.gamma()));
                    params.insert("Q".into(), json!(p.q()));
                    params.insert("c_L".into(), json!(p.c_l()));
                    match other {
                        SpecialFunction::DoubleGamma => double_gamma(z, &p)?,
                        SpecialFunction::LogDoubleGamma => log_double_gamma(z, &p)?,
                        SpecialFunction::DoubleSine => double_sine(z, &p)?,
                        _ => upsilon(z, &p)?,
                    }
                }
            };
            cx(v)
        }
    };
    let fname = a
        .function
        .to_possible_value()
        .map(|v| v.get_name().to_string());
    params.insert("fn".into(), json!(fname));
    let csv = value_csv(&value);
    Ok((
        Value::Object(params),
        body(json!({ "value": value })),
        Some(csv),
    ))
}

/// One-row CSV of a scalar or [re, im] value.
fn value_csv(value: &Value) -> String {
    match value {
        Value::Array(v) => format!("re,im\n{},{}\n", v[0], v[1]),
        other => format!("value\n{other}\n"),
    }
}

fn run_dozz(a: &DozzArgs) -> Result<Parts> {
    let p = resolve(&a.couplings)?;
    let v = dozz(a.a1, a.a2, a.a3, &p)?;
    let mut params = body(echo(&p)?);
    params.insert("alphas".into(), json!([cx(a.a1), cx(a.a2), cx(a.a3)]));
    Ok((
        Value::Object(params),
        body(json!({ "value": cx(v) })),
        Some(value_csv(&cx(v))),
    ))
}

fn charge_of(a: &ChargeArgs, p: &LiouvilleParams) -> Result<ComplexValue> {
    match (a.alpha, a.p) {
        (Some(alpha), _) => Ok(alpha),
        (None, Some(big_p)) => Ok(ComplexValue::new(p.q(), big_p)),
        (None, None) => Err(LiouvilleError::domain("one of --alpha or --P is required")),
    }
}

fn charge_function(
    a: &ChargeArgs,
    f: fn(ComplexValue, &LiouvilleParams) -> Result<ComplexValue>,
) -> Result<Parts> {
    let p = resolve(&a.couplings)?;
    let alpha = charge_of(a, &p)?;
    let v = f(alpha, &p)?;
    let mut params = body(echo(&p)?);
    params.insert("alpha".into(), cx(alpha));
    Ok((
        Value::Object(params),
        body(json!({ "value": cx(v) })),
        Some(value_csv(&cx(v))),
    ))
}

fn quadrature(base: QuadratureSpec, t: &Tolerances) -> QuadratureSpec {
    let mut spec = base;
    if let Some(r) = t.rel_tol {
        spec.rel_tol = r;
    }
    if let Some(a) = t.abs_tol {
        spec.abs_tol = a;
    }
    spec
}

fn run_bulk_boundary(a: &ChargeArgs, beta: ComplexValue, t: &Tolerances) -> Result<Parts> {
    let p = resolve(&a.couplings)?;
    let alpha = charge_of(a, &p)?;
    let spec = quadrature(QuadratureSpec::new(1e-11, 1e-16), t);
    let conjectural = p.mu() > 0.0;
    let v = if conjectural {
        bulk_boundary(alpha, beta, &p, &spec)?
    } else {
        bulk_boundary_mu0(alpha, beta, &p)?
    };
    let mut params = body(echo(&p)?);
    params.insert("alpha".into(), cx(alpha));
    params.insert("beta".into(), cx(beta));
    let out = json!({ "value": cx(v), "conjectural": conjectural });
    Ok((Value::Object(params), body(out), Some(value_csv(&cx(v)))))
}

fn gram(a: &GramArgs) -> Result<Parts> {
    let mut params = Map::new();
    let c = match (a.central_charge, a.gamma) {
        (Some(c), _) => c,
        (None, Some(g)) => {
            let p = LiouvilleParams::new(g, 0.0)?;
            params.insert("gamma".into(), json!(g));
            params.insert("Q".into(), json!(p.q()));
            ComplexValue::new(p.c_l(), 0.0)
        }
        (None, None) => {
            return Err(LiouvilleError::domain(
                "one of --central-charge or --gamma is required",
            ))
        }
    };
    params.insert("level".into(), json!(a.level));
    params.insert("delta".into(), cx(a.delta));
    params.insert("central_charge".into(), cx(c));
    let g = gram_matrix(a.level, a.delta, c);
    let n = g.dim();
    let entries: Vec<Vec<Value>> = (0..n)
        .map(|i| (0..n).map(|j| cx(*g.get(i, j))).collect())
        .collect();
    let condition = gram_condition(&g).ok();
    let mut csv = String::from("i,j,re,im\n");
    for i in 0..n {
        for j in 0..n {
            let z = g.get(i, j);
            csv.push_str(&format!("{i},{j},{},{}\n", z.re, z.im));
        }
    }
    let out = json!({
        "basis": g.basis,
        "entries": entries,
        "condition": condition,
        "singular": condition.is_none(),
    });
    Ok((Value::Object(params), body(out), Some(csv)))
}

fn block(a: &BlockArgs) -> Result<Parts> {
    let p = LiouvilleParams::new(a.gamma, 0.0)?;
    let kind = match a.kind {
        Kind::Torus1pt => BlockKind::Torus1pt,
        Kind::Torus2pt => BlockKind::Torus2pt,
        Kind::Annulus1pt => BlockKind::Annulus1pt,
        Kind::Annulus2pt => BlockKind::Annulus2pt,
    };
    let mut betas = vec![a.beta.resolve(a.gamma)];
    if kind.is_two_point() {
        betas.push(need(a.beta2, "beta2")?.resolve(a.gamma));
    }
    let mut ps = vec![a.p];
    if kind == BlockKind::Torus2pt {
        ps.push(a.p2.unwrap_or(a.p));
    }
    let series = block_series_on_line(kind, &betas, &ps, &p, a.n)?;
    let mut params = body(json!({
        "gamma": a.gamma,
        "Q": p.q(),
        "c_L": p.c_l(),
        "kind": kind,
        "betas": betas,
        "P": ps,
        "N": a.n,
        "weights": series.weights.iter().map(|&z| cx(z)).collect::<Vec<_>>(),
        "spectrum": series.spectrum.iter().map(|&z| cx(z)).collect::<Vec<_>>(),
    }));
    let coefficients: Value = if kind.is_two_point() {
        json!(series
            .coefficients
            .iter()
            .map(|row| row.iter().map(|&z| cx(z)).collect::<Vec<_>>())
            .collect::<Vec<_>>())
    } else {
        json!(series
            .coefficients
            .iter()
            .map(|row| cx(row[0]))
            .collect::<Vec<_>>())
    };
    let mut out = body(json!({ "coefficients": coefficients }));
    if let Some(q) = a.q {
        params.insert("q".into(), json!(q));
        if kind.is_two_point() {
            params.insert("b1b2".into(), cx(a.b1b2));
        }
        let e = evaluate_block(&series, q, a.b1b2)?;
        out.insert("value".into(), cx(e.value));
        out.insert("tail_bound".into(), json!(e.tail_bound));
        out.insert("tail_warning".into(), json!(e.tail_warning));
    }
    let mut csv = String::from("n,m,re,im\n");
    for (i, row) in series.coefficients.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            csv.push_str(&format!("{i},{j},{},{}\n", z.re, z.im));
        }
    }
    Ok((Value::Object(params), out, Some(csv)))
}

fn inner_params(outer: &LiouvilleParams, inner: &InnerBoundary) -> Result<Option<LiouvilleParams>> {
    let base = LiouvilleParams::new(outer.gamma(), outer.mu())?;
    match (inner.mu_b_inner, inner.theta_inner) {
        (Some(mu_b), _) => Ok(Some(base.with_mu_boundary(mu_b)?)),
        (None, Some(theta)) => Ok(Some(base.with_theta(theta)?)),
        (None, None) => Ok(None),
    }
}

fn bootstrap_setup(common: &BootstrapCommon) -> Result<(AnnulusBoundaries, BootstrapSpec, Value)> {
    let outer = resolve(&common.couplings)?;
    if outer.boundary().is_none() {
        return Err(LiouvilleError::domain(
            "a boundary parameter (--mu-b or --theta) is required",
        ));
    }
    let mut params = body(echo(&outer)?);
    let boundaries = match inner_params(&outer, &common.inner)? {
        Some(inner) => {
            params.insert("inner".into(), echo(&inner)?);
            params.insert("mode".into(), json!("two-mu-b"));
            AnnulusBoundaries::new(outer, inner)?
        }
        None => {
            params.insert("mode".into(), json!("single-mu-b"));
            AnnulusBoundaries::uniform(outer)
        }
    };
    let defaults = BootstrapSpec::default();
    let spec = BootstrapSpec {
        outer: quadrature(defaults.outer, &common.tolerances).with_parallel(true),
        ..defaults
    }
    .with_truncation(common.n)
    .with_samples(common.output.format == Format::Csv);
    params.insert("N".into(), json!(common.n));
    params.insert("rel_tol".into(), json!(spec.outer.rel_tol));
    params.insert("abs_tol".into(), json!(spec.outer.abs_tol));
    Ok((boundaries, spec, Value::Object(params)))
}

fn bootstrap_output(
    mut params: Value,
    extra: Value,
    r: &BootstrapResult,
    common: &BootstrapCommon,
) -> Result<Parts> {
    if let (Value::Object(m), Value::Object(e)) = (&mut params, extra) {
        m.extend(e);
    }
    let out = json!({
        "value": cx(r.value),
        "P_max": r.p_max,
        "error_estimate": r.quadrature_error,
        "integral": cx(r.integral),
        "prefactor": cx(r.prefactor),
        "block_tail": r.block_tail,
        "tail_warning": r.tail_warning,
        "evaluations": r.evaluations,
        "conjectural": r.conjectural,
    });
    let csv = (common.output.format == Format::Csv).then(|| r.samples_csv(&params.to_string()));
    Ok((params, body(out), csv))
}

fn lqg(a: &LqgArgs) -> Result<Parts> {
    let p = resolve(&a.couplings)?;
    if p.boundary().is_none() {
        return Err(LiouvilleError::domain(
            "a boundary parameter (--mu-b or --theta) is required",
        ));
    }
    let defaults = LqgSpec::default();
    let spec = LqgSpec {
        outer: quadrature(defaults.outer, &a.tolerances),
        q_cap: a.q_cap.unwrap_or(defaults.q_cap),
        ..defaults
    };
    let r = lqg_partition(&p, &spec)?;
    let mut params = body(echo(&p)?);
    params.insert("rel_tol".into(), json!(spec.outer.rel_tol));
    params.insert("abs_tol".into(), json!(spec.outer.abs_tol));
    params.insert("q_cap".into(), json!(spec.q_cap));
    let out = json!({
        "value": r.value,
        "error_estimate": r.quadrature_error,
        "endpoint_tail": r.endpoint_tail,
        "imaginary_residue": r.imaginary_residue,
        "prefactor": r.prefactor,
        "eta_exponent": r.eta_exponent,
        "q_range": [r.q_range.0, r.q_range.1],
        "inner_p_tolerance": r.inner_p_tolerance,
        "outer_q_tolerance": r.outer_q_tolerance,
        "q_grid": r.q_grid_report.iter().map(|&(q, i)| json!([q, i])).collect::<Vec<_>>(),
    });
    let mut csv = format!("# {}\nq,inner_integral\n", Value::Object(params.clone()));
    for (q, i) in &r.q_grid_report {
        csv.push_str(&format!("{q:e},{i:e}\n"));
    }
    Ok((Value::Object(params), body(out), Some(csv)))
}
