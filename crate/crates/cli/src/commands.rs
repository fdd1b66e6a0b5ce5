//! Argument definitions and one runner per subcommand.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use gamma_moments::bernstein::{
    beta_bernstein, catalan_bernstein, catalan_phi, factorization_check, gamma1_bernstein, rgstable_bernstein,
    BernsteinVerdict, ClosedFn, AGREEMENT_POINTS,
};
use gamma_moments::diagnostics::{classify, FamilyInput};
use gamma_moments::idlab::{id_probe, kp16_check, levy_identity_check_tol, LevyIdentity, MAX_HANKEL_SIZE};
use gamma_moments::meldens::{
    default_grid, density_diagnostics, integral_equation_residual, mellin_density_threads, Contour, Target,
};
use gamma_moments::momentseq::{
    beta_power, binomial_family, factorial_power, gamma_order1, gamma_ratio_seq, mt_seq, rgstable_seq, BinomialKind,
    GammaRatioSpec, LogMomentSequence,
};
use gamma_moments::Error;

use crate::render::Table;

#[derive(Debug, Parser)]
#[command(name = "gmoments", version, about = "Gamma-type moment sequences and their moment problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate log μ_0..log μ_n of a family
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Seq(SeqArgs),
    /// Moment (in)determinacy verdict with evidence
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Classify(ClassifyArgs),
    /// Hankel positivity probes of powers of a sequence
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Id(IdArgs),
    /// Bernstein verdicts and factorization checks
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Bernstein(BernsteinArgs),
    /// Density of L_t or M_t by Mellin inversion
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Density(DensityArgs),
    /// Residual of an exponential representation
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Compact-support infinite-divisibility criterion for Gamma ratios
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Kp16(Kp16Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Seq(_) => "seq",
            Command::Classify(_) => "classify",
            Command::Id(_) => "id",
            Command::Bernstein(_) => "bernstein",
            Command::Density(_) => "density",
            Command::Verify(_) => "verify",
            Command::Kp16(_) => "kp16",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Seq(a) => &a.common,
            Command::Classify(a) => &a.common,
            Command::Id(a) => &a.common,
            Command::Bernstein(a) => &a.common,
            Command::Density(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Kp16(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every command; never echoed in `inputs`.
#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here; relative paths honour GMOMENTS_OUTPUT_DIR
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON object of flag values; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub threads: u64,
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be > 0"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be >= 0"))
    }
}

fn tolerance(s: &str) -> Result<f64, String> {
    let v = positive(s)?;
    if (1e-15..=1e-2).contains(&v) {
        Ok(v)
    } else {
        Err(format!("'{s}' must lie in [1e-15, 1e-2]"))
    }
}

/// `"a:A,b:B"` into pairs.
fn gamma_pairs(s: &str) -> Result<Vec<(f64, f64)>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| format!("'{item}' is not of the form a:A"))?;
            Ok((positive(a)?, positive(b)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum SeqFamily {
    Factorial,
    Beta,
    Gamma1,
    Binomial,
    Raney,
    FussCatalan,
    Mt,
    Rgstable,
    GammaRatio,
}

/// Family name plus parameters, shared by `seq` and `id`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: SeqFamily,
    /// exponent for factorial, index for mt
    #[arg(long, value_parser = positive)]
    pub t: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub a: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub b: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub s: Option<f64>,
    #[arg(long, value_parser = finite)]
    pub p: Option<f64>,
    #[arg(long, value_parser = finite)]
    pub r: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub k: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub m: Option<f64>,
    /// numerator Gamma factors "a:A,..."
    #[arg(long, allow_hyphen_values = true)]
    pub num: Option<String>,
    /// denominator Gamma factors "b:B,..."
    #[arg(long, allow_hyphen_values = true)]
    pub den: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeqArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    /// largest index
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(0..=1_000_000))]
    pub n: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ClassFamily {
    Factorial,
    Gamma1,
    Rgstable,
    Remainder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    Identity,
    Power,
    Log1p,
    Catalan,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long, value_enum)]
    pub family: ClassFamily,
    #[arg(long, value_parser = positive)]
    pub t: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub a: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub s: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub m: Option<f64>,
    /// Φ of a remainder family
    #[arg(long, value_enum)]
    pub phi: Option<PhiKind>,
    /// exponent of the power Φ, in (0, 1]
    #[arg(long, value_parser = positive)]
    pub alpha: Option<f64>,
    /// whether log R is self-decomposable (remainder families)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub selfdecomp: Option<bool>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    /// powers t at which μ_n^t is probed
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=MAX_HANKEL_SIZE as u64))]
    pub max_size: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum BernsteinFamily {
    Beta,
    Gamma1,
    Rgstable,
    Catalan,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BernsteinArgs {
    #[arg(long, value_enum)]
    pub family: BernsteinFamily,
    #[arg(long, value_parser = positive)]
    pub a: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub b: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub s: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub m: Option<f64>,
    /// factorization checked for n = 1..N
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=10_000))]
    pub n: u64,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum TargetArg {
    #[value(name = "L_t", alias = "lt")]
    #[serde(rename = "L_t")]
    Lt,
    #[value(name = "M_t", alias = "mt")]
    #[serde(rename = "M_t")]
    Mt,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub target: TargetArg,
    #[arg(long, value_parser = positive)]
    pub t: f64,
    /// explicit grid "x1,x2,..."
    #[arg(long, value_delimiter = ',', value_parser = positive, conflicts_with_all = ["x_min", "x_max"])]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_parser = positive, requires = "x_max")]
    pub x_min: Option<f64>,
    #[arg(long, value_parser = positive, requires = "x_min")]
    pub x_max: Option<f64>,
    /// number of geometric points between x-min and x-max
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..=100_000))]
    pub points: u64,
    /// "auto" or the real part of a vertical line
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub contour: String,
    #[arg(long, default_value_t = 1e-12, value_parser = tolerance)]
    pub tol: f64,
    /// add mass, moments, tail fit and the integral-equation residual
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value = "false")]
    pub diagnostics: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum IdentityArg {
    MalmstenGamma,
    MalmstenBeta,
    MtExponent,
    LogphiRepr,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub identity: IdentityArg,
    /// evaluation point for malmsten_gamma and mt_exponent, exponent for malmsten_beta
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub a: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub b: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub t: Option<f64>,
    /// evaluation point for malmsten_beta and logphi_repr
    #[arg(long, value_parser = non_negative)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub phi: Option<PhiKind>,
    #[arg(long, value_parser = positive)]
    pub alpha: Option<f64>,
    /// relative quadrature tolerance
    #[arg(long, default_value_t = 1e-12, value_parser = tolerance)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Kp16Args {
    /// numerator Gamma factors "a:A,..."
    #[arg(long)]
    pub num: String,
    /// denominator Gamma factors "b:B,..."
    #[arg(long)]
    pub den: String,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub x_min: f64,
    #[arg(long, default_value_t = 50.0, value_parser = positive)]
    pub x_max: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..=100_000))]
    pub points: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

/// Result of a command before rendering.
pub struct Outcome {
    pub inputs: Value,
    pub results: Value,
    pub warnings: Vec<String>,
    pub table: Option<Table>,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    /// invalid input (exit 2) rather than a numerical failure (exit 1)
    pub validation: bool,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { kind: "validation".into(), message: message.into(), validation: true }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Domain(_) => "domain",
            Error::Accuracy { .. } => "accuracy",
            Error::NotMomentSequence(_) => "not_moment_sequence",
            Error::Degenerate(_) => "degenerate",
            Error::NotPositiveBernstein { .. } => "not_positive_bernstein",
            Error::TransformationUnavailable(_) => "transformation_unavailable",
            Error::RgstableUndefined(_) => "rgstable_undefined",
            Error::Scaling(_) => "scaling",
            Error::NonFinite { .. } => "non_finite",
            Error::Format(_) => "format",
        };
        Failure { kind: kind.into(), message: e.to_string(), validation: e.is_validation() }
    }
}

type Run = Result<Outcome, Failure>;

fn need(v: Option<f64>, flag: &str, what: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::invalid(format!("--{flag} is required for {what}")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Echoed inputs: the parsed arguments without unset options.
fn echo<T: Serialize>(args: &T) -> Value {
    match to_value(args) {
        Value::Object(map) => Value::Object(map.into_iter().filter(|(_, v)| !v.is_null()).collect()),
        other => other,
    }
}

pub fn run(command: &Command) -> Run {
    match command {
        Command::Seq(a) => run_seq(a),
        Command::Classify(a) => run_classify(a),
        Command::Id(a) => run_id(a),
        Command::Bernstein(a) => run_bernstein(a),
        Command::Density(a) => run_density(a),
        Command::Verify(a) => run_verify(a),
        Command::Kp16(a) => run_kp16(a),
    }
}

fn build_seq(f: &FamilyArgs) -> Result<LogMomentSequence, Failure> {
    let name = format!("family {}", to_value(&f.family).as_str().unwrap_or(""));
    let seq = match f.family {
        SeqFamily::Factorial => factorial_power(f.t.unwrap_or(1.0))?,
        SeqFamily::Beta => beta_power(need(f.a, "a", &name)?, need(f.b, "b", &name)?, f.s.unwrap_or(1.0))?,
        SeqFamily::Gamma1 => gamma_order1(need(f.a, "a", &name)?, f.s.unwrap_or(1.0))?,
        SeqFamily::Binomial => binomial_family(BinomialKind::Binomial, need(f.p, "p", &name)?, need(f.r, "r", &name)?)?,
        SeqFamily::Raney => binomial_family(BinomialKind::Raney, need(f.p, "p", &name)?, need(f.r, "r", &name)?)?,
        SeqFamily::FussCatalan => binomial_family(BinomialKind::FussCatalan, 1.0, need(f.k, "k", &name)?)?,
        SeqFamily::Mt => mt_seq(need(f.t, "t", &name)?)?,
        SeqFamily::Rgstable => rgstable_seq(need(f.a, "a", &name)?, need(f.m, "m", &name)?)?,
        SeqFamily::GammaRatio => {
            let num = gamma_pairs(f.num.as_deref().unwrap_or("")).map_err(Failure::invalid)?;
            let den = gamma_pairs(f.den.as_deref().unwrap_or("")).map_err(Failure::invalid)?;
            gamma_ratio_seq(GammaRatioSpec::new(num, den)?)?
        }
    };
    Ok(seq)
}

fn seq_meta(seq: &LogMomentSequence) -> (Value, Value) {
    let params: Map<String, Value> = seq.params().iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    (json!(seq.family()), Value::Object(params))
}

fn run_seq(args: &SeqArgs) -> Run {
    let seq = build_seq(&args.family)?;
    let log_mu = seq.values(args.n)?;
    let (family, params) = seq_meta(&seq);
    let table = Table {
        header: vec!["n", "log_mu"],
        rows: log_mu.iter().enumerate().map(|(n, v)| vec![n as f64, *v]).collect(),
    };
    Ok(Outcome {
        inputs: echo(args),
        results: json!({ "family": family, "params": params, "n_max": args.n, "log_mu": log_mu }),
        warnings: Vec::new(),
        table: Some(table),
    })
}

fn remainder_phi_fn(kind: PhiKind, alpha: Option<f64>) -> Result<ClosedFn, Failure> {
    Ok(match kind {
        PhiKind::Identity => Arc::new(|l: f64| l),
        PhiKind::Power => {
            let al = need(alpha, "alpha", "phi power")?;
            if al > 1.0 {
                return Err(Failure::invalid(format!("--alpha must lie in (0, 1], got {al}")));
            }
            Arc::new(move |l: f64| l.powf(al))
        }
        PhiKind::Log1p => Arc::new(|l: f64| l.ln_1p()),
        PhiKind::Catalan => Arc::new(|l: f64| catalan_phi(l, true)),
    })
}

fn run_classify(args: &ClassifyArgs) -> Run {
    let input = match args.family {
        ClassFamily::Factorial => FamilyInput::Factorial { t: need(args.t, "t", "family factorial")? },
        ClassFamily::Gamma1 => FamilyInput::Gamma1 {
            a: need(args.a, "a", "family gamma1")?,
            s: args.s.unwrap_or(1.0),
            t: args.t.unwrap_or(1.0),
        },
        ClassFamily::Rgstable => FamilyInput::Rgstable { a: need(args.a, "a", "family rgstable")?, m: need(args.m, "m", "family rgstable")? },
        ClassFamily::Remainder => {
            let kind = args.phi.ok_or_else(|| Failure::invalid("--phi is required for family remainder"))?;
            FamilyInput::Remainder {
                phi: remainder_phi_fn(kind, args.alpha)?,
                t: need(args.t, "t", "family remainder")?,
                selfdecomp: args.selfdecomp,
                spectral: None,
            }
        }
    };
    let verdict = classify(&input)?;
    let mut warnings = Vec::new();
    if args.family == ClassFamily::Remainder && args.selfdecomp.is_none() {
        warnings.push("self-decomposability not supplied; MI rules for remainder families are disabled".into());
    }
    Ok(Outcome { inputs: echo(args), results: to_value(&verdict), warnings, table: None })
}

fn run_id(args: &IdArgs) -> Run {
    let seq = build_seq(&args.family)?;
    let grid = args.t_grid.clone().unwrap_or_else(|| vec![0.25, 0.5, 1.5]);
    if grid.is_empty() {
        return Err(Failure::invalid("--t-grid must not be empty"));
    }
    let report = id_probe(&seq, &grid, args.max_size as usize)?;
    let (family, params) = seq_meta(&seq);
    let warnings = vec![report.note.clone()];
    Ok(Outcome {
        inputs: echo(args),
        results: json!({ "family": family, "params": params, "probe": to_value(&report) }),
        warnings,
        table: None,
    })
}

fn verdict_value(v: &BernsteinVerdict) -> Value {
    let mut out = json!({
        "is_bernstein": v.is_bernstein,
        "condition": v.condition,
        "counterexample_point": v.counterexample_point,
        "jurek_class": v.jurek_class,
        "notes": v.notes,
    });
    if let Some(phi) = &v.phi {
        let values: Vec<Value> = AGREEMENT_POINTS
            .iter()
            .map(|&l| json!({ "lambda": l, "phi": phi.evaluate(l).ok() }))
            .collect();
        out["phi"] = json!({
            "killing": phi.killing,
            "drift": phi.drift,
            "has_closed_form": phi.has_closed_form(),
            "validity_note": phi.validity_note,
            "values": values,
        });
    }
    out
}

fn run_bernstein(args: &BernsteinArgs) -> Run {
    let mut warnings = Vec::new();
    let (verdict, seq) = match args.family {
        BernsteinFamily::Beta => {
            let (a, b, s) = (need(args.a, "a", "family beta")?, need(args.b, "b", "family beta")?, args.s.unwrap_or(1.0));
            (beta_bernstein(a, b, s)?, beta_power(a, b, s)?)
        }
        BernsteinFamily::Gamma1 => {
            let (a, s) = (need(args.a, "a", "family gamma1")?, args.s.unwrap_or(1.0));
            (gamma1_bernstein(a, s)?, gamma_order1(a, s)?)
        }
        BernsteinFamily::Rgstable => {
            let (a, m) = (need(args.a, "a", "family rgstable")?, need(args.m, "m", "family rgstable")?);
            (rgstable_bernstein(a, m)?, rgstable_seq(a, m)?)
        }
        BernsteinFamily::Catalan => {
            let phi = catalan_bernstein()?;
            let verdict = BernsteinVerdict {
                is_bernstein: true,
                condition: "half-shifted Catalan ratio, Levy density 6 exp(-3x/2)".into(),
                phi: Some(phi),
                counterexample_point: None,
                jurek_class: None,
                notes: vec!["factorization uses the unshifted ratio C_n / C_(n-1) against raney(2, 1)".into()],
            };
            (verdict, binomial_family(BinomialKind::Raney, 2.0, 1.0)?)
        }
    };
    let factorization = match (args.family, &verdict.phi) {
        (BernsteinFamily::Catalan, _) => {
            Some(factorization_check(&|l| Ok(catalan_phi(l, false)), &seq, args.n, args.tol)?)
        }
        (_, Some(phi)) => Some(factorization_check(&|l| phi.evaluate(l), &seq, args.n, args.tol)?),
        (_, None) => None,
    };
    if let Some(f) = &factorization {
        if !f.pass {
            warnings.push(format!("factorization error {:e} exceeds tolerance {:e}", f.max_abs_log_error, args.tol));
        }
    }
    let mut results = verdict_value(&verdict);
    results["factorization"] = to_value(&factorization);
    results["sequence"] = json!(seq.family());
    Ok(Outcome { inputs: echo(args), results, warnings, table: None })
}

fn parse_contour(s: &str) -> Result<Contour, Failure> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Contour::Auto);
    }
    finite(s).map(Contour::Fixed).map_err(|e| Failure::invalid(format!("--contour: {e}")))
}

fn run_density(args: &DensityArgs) -> Run {
    let target = match args.target {
        TargetArg::Lt => Target::Lt,
        TargetArg::Mt => Target::Mt,
    };
    let contour = parse_contour(&args.contour)?;
    let grid = match (&args.grid, args.x_min, args.x_max) {
        (Some(g), _, _) => g.clone(),
        (None, Some(lo), Some(hi)) => {
            if hi <= lo {
                return Err(Failure::invalid("--x-max must exceed --x-min"));
            }
            let n = args.points as usize;
            let ratio = hi / lo;
            (0..n).map(|i| lo * ratio.powf(i as f64 / (n - 1) as f64)).collect()
        }
        _ => default_grid(target, args.t)?,
    };
    let table = mellin_density_threads(target, args.t, &grid, contour, args.tol, args.common.threads as usize)?;
    let mut warnings = Vec::new();
    if table.clipped {
        warnings.push(format!("negative values down to -{:e} clipped to zero", table.clipped_max));
    }
    if !table.full_support {
        warnings.push("grid does not carry the full mass; mass and diagnostics are not checked".into());
    }
    let mut results = json!({ "table": to_value(&table) });
    if args.diagnostics {
        if table.full_support {
            results["diagnostics"] = to_value(&density_diagnostics(&table)?);
            if target == Target::Lt {
                results["integral_equation_residual"] = json!(integral_equation_residual(&table, args.t)?);
            }
        } else {
            warnings.push("diagnostics skipped: table is not full-support".into());
        }
    }
    let csv = Table {
        header: vec!["x", "f", "err"],
        rows: (0..table.grid.len()).map(|i| vec![table.grid[i], table.values[i], table.error_estimates[i]]).collect(),
    };
    Ok(Outcome { inputs: echo(args), results, warnings, table: Some(csv) })
}

fn run_verify(args: &VerifyArgs) -> Run {
    let (identity, point) = match args.identity {
        IdentityArg::MalmstenGamma => (LevyIdentity::MalmstenGamma, need(args.s, "s", "malmsten_gamma")?),
        IdentityArg::MalmstenBeta => (
            LevyIdentity::MalmstenBeta {
                a: need(args.a, "a", "malmsten_beta")?,
                b: need(args.b, "b", "malmsten_beta")?,
                s: args.s.unwrap_or(1.0),
            },
            need(args.lambda, "lambda", "malmsten_beta")?,
        ),
        IdentityArg::MtExponent => (LevyIdentity::MtExponent { t: need(args.t, "t", "mt_exponent")? }, need(args.s, "s", "mt_exponent")?),
        IdentityArg::LogphiRepr => {
            let kind = args.phi.ok_or_else(|| Failure::invalid("--phi is required for logphi_repr"))?;
            // Φ'/Φ = ∫ e^{-λt} κ(t) dt with constant κ for these Φ
            let kappa = match kind {
                PhiKind::Identity => 1.0,
                PhiKind::Power => need(args.alpha, "alpha", "phi power")?,
                _ => return Err(Failure::invalid("logphi_repr supports --phi identity or power")),
            };
            let phi = remainder_phi_fn(kind, args.alpha)?;
            (LevyIdentity::LogPhiRepr { phi, kappa: Arc::new(move |_| kappa) }, need(args.lambda, "lambda", "logphi_repr")?)
        }
    };
    let residual = levy_identity_check_tol(&identity, point, args.tol)?;
    Ok(Outcome {
        inputs: echo(args),
        results: json!({ "identity": to_value(&args.identity), "point": point, "residual": residual }),
        warnings: Vec::new(),
        table: None,
    })
}

fn run_kp16(args: &Kp16Args) -> Run {
    let num = gamma_pairs(&args.num).map_err(|e| Failure::invalid(format!("--num: {e}")))?;
    let den = gamma_pairs(&args.den).map_err(|e| Failure::invalid(format!("--den: {e}")))?;
    if args.x_max <= args.x_min {
        return Err(Failure::invalid("--x-max must exceed --x-min"));
    }
    let spec = GammaRatioSpec::new(num, den)?;
    let n = args.points as usize;
    let ratio = args.x_max / args.x_min;
    let grid: Vec<f64> = (0..n).map(|i| args.x_min * ratio.powf(i as f64 / (n - 1) as f64)).collect();
    let report = kp16_check(&spec, &grid)?;
    let mut warnings = Vec::new();
    if report.limit_warning {
        warnings.push("analytic limits of the kernel contradict the grid verdict".into());
    }
    Ok(Outcome { inputs: echo(args), results: to_value(&report), warnings, table: None })
}
