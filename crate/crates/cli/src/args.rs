use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liouville_core::ComplexValue;

/// Boundary Liouville CFT numerics on the annulus.
#[derive(Debug, Parser)]
#[command(name = "liouville", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a special function.
    Specialfn(SpecialfnArgs),
    /// Sphere three-point constant C(α₁, α₂, α₃).
    Dozz(DozzArgs),
    /// Reflection coefficient R(α).
    Reflection(ChargeArgs),
    /// Disk bulk one-point function U(α).
    Fzz(ChargeArgs),
    /// Bulk-boundary correlator G(α, β).
    BulkBoundary(BulkBoundaryArgs),
    /// Gram matrix of a Verma module at one level.
    Gram(GramArgs),
    /// Coefficients (and optionally the value) of a conformal block.
    Block(BlockArgs),
    /// Annulus two-point function.
    #[command(name = "bootstrap-2pt")]
    Bootstrap2pt(TwoPointArgs),
    /// Annulus one-point function.
    #[command(name = "bootstrap-1pt")]
    Bootstrap1pt(OnePointArgs),
    /// Annulus one-point function at β = γ, where the block is 1/η(q²).
    BootstrapGamma(GammaArgs),
    /// Bosonic LQG annulus partition function.
    Lqg(LqgArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Couplings {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Bulk cosmological constant.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu: f64,
    /// Boundary cosmological constant.
    #[arg(long = "mu-b", allow_hyphen_values = true, conflicts_with = "theta")]
    pub mu_b: Option<f64>,
    /// Boundary parameter θ instead of μ_B, as "re" or "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub theta: Option<ComplexValue>,
}

#[derive(Debug, Clone, Args)]
pub struct InnerBoundary {
    /// μ_B of the inner annulus boundary (defaults to the outer one).
    #[arg(
        long = "mu-b-inner",
        allow_hyphen_values = true,
        conflicts_with = "theta_inner"
    )]
    pub mu_b_inner: Option<f64>,
    #[arg(long = "theta-inner", value_parser = parse_complex, allow_hyphen_values = true)]
    pub theta_inner: Option<ComplexValue>,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Tolerances {
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    #[arg(long = "abs-tol")]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialFunction {
    Gamma,
    LogGamma,
    DoubleGamma,
    LogDoubleGamma,
    DoubleSine,
    Upsilon,
    Eta,
    Partition,
}

#[derive(Debug, Args)]
pub struct SpecialfnArgs {
    #[arg(long = "fn", value_enum)]
    pub function: SpecialFunction,
    /// Argument as "re" or "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub z: Option<ComplexValue>,
    /// Nome for eta.
    #[arg(long)]
    pub q: Option<f64>,
    /// Index for partition.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DozzArgs {
    #[command(flatten)]
    pub couplings: Couplings,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub a1: ComplexValue,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub a2: ComplexValue,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub a3: ComplexValue,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ChargeArgs {
    #[command(flatten)]
    pub couplings: Couplings,
    /// Charge α, as "re" or "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, required_unless_present = "p")]
    pub alpha: Option<ComplexValue>,
    /// Spectrum momentum: α = Q + iP.
    #[arg(
        long = "P",
        id = "p",
        allow_hyphen_values = true,
        conflicts_with = "alpha"
    )]
    pub p: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BulkBoundaryArgs {
    #[command(flatten)]
    pub charge: ChargeArgs,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub beta: ComplexValue,
    #[command(flatten)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[arg(long)]
    pub level: usize,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub delta: ComplexValue,
    /// Central charge; defaults to c_L = 1 + 6Q² from --gamma.
    #[arg(long = "central-charge", value_parser = parse_complex, allow_hyphen_values = true, required_unless_present = "gamma")]
    pub central_charge: Option<ComplexValue>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    #[value(name = "torus-1pt")]
    Torus1pt,
    #[value(name = "torus-2pt")]
    Torus2pt,
    #[value(name = "annulus-1pt")]
    Annulus1pt,
    #[value(name = "annulus-2pt")]
    Annulus2pt,
}

/// A boundary charge, or the keyword "gamma" for β = γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Charge {
    Gamma,
    Value(f64),
}

impl Charge {
    pub fn resolve(self, gamma: f64) -> f64 {
        match self {
            Charge::Gamma => gamma,
            Charge::Value(v) => v,
        }
    }
}

fn parse_charge(s: &str) -> Result<Charge, String> {
    if s.eq_ignore_ascii_case("gamma") {
        Ok(Charge::Gamma)
    } else {
        s.trim()
            .parse()
            .map(Charge::Value)
            .map_err(|e| format!("{e}"))
    }
}

#[derive(Debug, Args)]
pub struct BlockArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Insertion charge; "gamma" for β = γ.
    #[arg(long, value_parser = parse_charge, allow_hyphen_values = true)]
    pub beta: Charge,
    /// Second insertion charge (two-point kinds).
    #[arg(long, value_parser = parse_charge, allow_hyphen_values = true)]
    pub beta2: Option<Charge>,
    #[arg(long = "P", allow_hyphen_values = true)]
    pub p: f64,
    /// Second internal momentum (torus two-point block).
    #[arg(long = "P2", allow_hyphen_values = true)]
    pub p2: Option<f64>,
    #[arg(long = "N", default_value_t = 12)]
    pub n: usize,
    /// Evaluate the truncated series at this nome.
    #[arg(long)]
    pub q: Option<f64>,
    /// Product b₁b₂ of the insertion points (two-point kinds).
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1")]
    pub b1b2: ComplexValue,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BootstrapCommon {
    #[command(flatten)]
    pub couplings: Couplings,
    #[command(flatten)]
    pub inner: InnerBoundary,
    #[arg(long)]
    pub q: f64,
    /// Block truncation level.
    #[arg(long = "N", default_value_t = 12)]
    pub n: usize,
    #[command(flatten)]
    pub tolerances: Tolerances,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TwoPointArgs {
    #[arg(long, value_parser = parse_charge, allow_hyphen_values = true)]
    pub beta1: Charge,
    #[arg(long, value_parser = parse_charge, allow_hyphen_values = true)]
    pub beta2: Charge,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1")]
    pub b1: ComplexValue,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1")]
    pub b2: ComplexValue,
    #[command(flatten)]
    pub common: BootstrapCommon,
}

#[derive(Debug, Args)]
pub struct OnePointArgs {
    #[arg(long, value_parser = parse_charge, allow_hyphen_values = true)]
    pub beta1: Charge,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "1")]
    pub b: ComplexValue,
    #[command(flatten)]
    pub common: BootstrapCommon,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[command(flatten)]
    pub common: BootstrapCommon,
}

#[derive(Debug, Args)]
pub struct LqgArgs {
    #[command(flatten)]
    pub couplings: Couplings,
    #[command(flatten)]
    pub tolerances: Tolerances,
    /// Upper end of the moduli integral in q.
    #[arg(long = "q-cap")]
    pub q_cap: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

/// Parses "re" or "re,im".
pub fn parse_complex(s: &str) -> Result<ComplexValue, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|e| format!("invalid number {t:?}: {e}"))
    };
    match parts.as_slice() {
        [re] => Ok(ComplexValue::new(num(re)?, 0.0)),
        [re, im] => Ok(ComplexValue::new(num(re)?, num(im)?)),
        _ => Err(format!("expected \"re\" or \"re,im\", got {s:?}")),
    }
}
