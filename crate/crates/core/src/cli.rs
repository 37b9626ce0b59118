//! The `gha` command line.
//!
//! Every command writes to the supplied writer and returns an exit status:
//! `0` on success, `1` when the input is inadmissible or a verification
//! fails, `2` on usage errors (bad flags or malformed values).

use std::fmt::Write as _;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::admissibility::{
    assess, beta0_bound_analytic, lambda_region_map, numeric_beta0_interval, region_of_params,
    AnalyticBound, Beta0Interval, RegionLabel, DEFAULT_N_MAX, REGION_TOL,
};
use crate::algebra::{CharacteristicFunctions, LinearParams, VacuumState};
use crate::chain::{inflate, verify_count_correspondence, SubstitutionRule};
use crate::error::GhaError;
use crate::linear_dynamics::{
    classify_spectrum_with_tol, classify_stability, eigenvalues, region_map, triangle_region,
    DEFAULT_PROBE_DEPTH,
};
use crate::rep_builder::{build_representation, casimir1, verify_relations};
use crate::spectrum::{figure4_presets, spectrum_report, SpectrumReport};

/// Significant digits of every printed number.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "gha",
    version,
    about = "Two-step generalized Heisenberg algebra toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability, triangle region and spectrum type of f(x) = r x, g(x) = s x.
    Classify(ClassifyArgs),
    /// Energy levels alpha_n, beta_n and gaps of the linear case.
    Spectrum(SpectrumArgs),
    /// Build a truncated representation and check every relation.
    Rep(RepArgs),
    /// Admissibility of a vacuum, or the lower bound on beta0.
    Admissible(AdmissibleArgs),
    /// Inflate a two-letter substitution chain.
    Chain(ChainArgs),
    /// Region maps over a square grid.
    Regions(RegionsArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Ground state used for the spectrum type.
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta0: f64,
    #[arg(long, default_value_t = DEFAULT_PROBE_DEPTH)]
    pub probe_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    #[arg(long, required_unless_present = "figure4")]
    pub r: Option<f64>,
    #[arg(long, required_unless_present = "figure4")]
    pub s: Option<f64>,
    #[arg(long, required_unless_present = "figure4")]
    pub alpha0: Option<f64>,
    #[arg(long, required_unless_present = "figure4")]
    pub beta0: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    pub format: DataFormat,
    /// Emit the five preset morphologies instead of a single parameter set.
    #[arg(long, conflicts_with_all = ["r", "s", "alpha0", "beta0"])]
    pub figure4: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RepArgs {
    /// Coefficients of f, constant term first, e.g. "0,1". Use --f=-1,2 for a leading minus.
    #[arg(long, value_parser = parse_coeffs)]
    pub f: Coeffs,
    #[arg(long, value_parser = parse_coeffs)]
    pub g: Coeffs,
    #[arg(long)]
    pub alpha0: f64,
    #[arg(long)]
    pub beta0: f64,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Include the H, J3, a† and a matrices in the output.
    #[arg(long)]
    pub matrices: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct AdmissibleArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub alpha0: f64,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub nmax: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Substitution rule "A:<word>,B:<word>".
    #[arg(long, default_value = "A:AB,B:A")]
    pub rule: String,
    #[arg(long, default_value = "A")]
    pub seed: String,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = ChainFormat::Text)]
    pub format: ChainFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Plane {
    Rs,
    Lambda,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RegionsArgs {
    #[arg(long)]
    pub grid_min: f64,
    #[arg(long)]
    pub grid_max: f64,
    #[arg(long)]
    pub grid_n: usize,
    #[arg(long, value_enum, default_value_t = Plane::Rs)]
    pub plane: Plane,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Ground state used for spectrum kinds in the (r, s) plane.
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta0: f64,
}

/// Comma-separated polynomial coefficients, constant term first.
#[derive(Debug, Clone, PartialEq)]
pub struct Coeffs(pub Vec<f64>);

fn parse_coeffs(text: &str) -> Result<Coeffs, String> {
    text.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad coefficient {c:?}: {e}"))
        })
        .collect::<Result<_, _>>()
        .map(Coeffs)
}

/// Formats `x` with [`SIG_DIGITS`] significant digits, dropping trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

/// Rounds to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().unwrap_or(x)
    } else {
        x
    }
}

/// Serializes `value` to JSON with every float rounded to [`SIG_DIGITS`] digits.
pub fn to_rounded_json<T: Serialize>(value: &T) -> serde_json::Result<Value> {
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    Ok(v)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> io::Result<()> {
    let v = to_rounded_json(value).map_err(io::Error::other)?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&v).map_err(io::Error::other)?
    )
}

/// Usage-type library errors map to exit code 2, the rest to 1.
pub fn exit_code_for(err: &GhaError) -> i32 {
    match err {
        GhaError::EmptyCoefficients(_)
        | GhaError::NonFinite { .. }
        | GhaError::InvalidArgument(_)
        | GhaError::InvalidRule(_) => 2,
        _ => 1,
    }
}

#[derive(Debug)]
pub enum CliError {
    Gha(GhaError),
    Io(io::Error),
}

impl From<GhaError> for CliError {
    fn from(e: GhaError) -> Self {
        CliError::Gha(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Gha(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Gha(e) => exit_code_for(e),
            CliError::Io(_) => 1,
        }
    }
}

/// Runs a parsed command; `Ok` carries the exit code.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<i32, CliError> {
    match &cli.command {
        Command::Classify(a) => classify(a, out),
        Command::Spectrum(a) => spectrum(a, out),
        Command::Rep(a) => rep(a, out),
        Command::Admissible(a) => admissible(a, out),
        Command::Chain(a) => chain(a, out),
        Command::Regions(a) => regions(a, out),
    }
}

fn classify<W: Write>(a: &ClassifyArgs, out: &mut W) -> Result<i32, CliError> {
    let params = LinearParams::new(a.r, a.s)?;
    let vacuum = VacuumState::new(a.alpha0, a.beta0)?;
    let class = classify_stability(params, a.tol);
    let spectrum = classify_spectrum_with_tol(params, vacuum, a.probe_depth, a.tol)?;
    let doc = json!({
        "r": a.r,
        "s": a.s,
        "stability": class.kind.to_string(),
        "spectrum": spectrum.to_string(),
        "triangle_region": triangle_region(params, a.tol).to_string(),
        "eigenvalues": class.eigenpair,
        "fixed_points": class.fixed_points,
        "discriminant": params.discriminant(),
    });
    write_json(out, &doc)?;
    Ok(0)
}

fn spectrum<W: Write>(a: &SpectrumArgs, out: &mut W) -> Result<i32, CliError> {
    let runs: Vec<(String, SpectrumReport)> = if a.figure4 {
        figure4_presets()
            .into_iter()
            .map(|p| {
                Ok((
                    p.name.to_owned(),
                    spectrum_report(p.params, p.vacuum, a.levels)?,
                ))
            })
            .collect::<Result<_, GhaError>>()?
    } else {
        let params = LinearParams::new(a.r.unwrap_or(0.0), a.s.unwrap_or(0.0))?;
        let vacuum = VacuumState::new(a.alpha0.unwrap_or(0.0), a.beta0.unwrap_or(0.0))?;
        vec![(String::new(), spectrum_report(params, vacuum, a.levels)?)]
    };
    match a.format {
        DataFormat::Csv => {
            let mut text = String::new();
            if a.figure4 {
                text.push_str("preset,");
            }
            text.push_str("n,alpha,beta,gap\n");
            for (name, report) in &runs {
                let set = &report.levels;
                for n in 0..set.alphas.len() {
                    if a.figure4 {
                        let _ = write!(text, "{name},");
                    }
                    let gap = set.gaps.get(n).map_or(String::new(), |&g| fmt_num(g));
                    let _ = writeln!(
                        text,
                        "{n},{},{},{gap}",
                        fmt_num(set.alphas[n]),
                        fmt_num(set.betas[n])
                    );
                }
            }
            out.write_all(text.as_bytes())?;
        }
        DataFormat::Json => {
            if a.figure4 {
                let doc: Vec<Value> = runs
                    .iter()
                    .map(|(name, report)| json!({ "preset": name, "report": report }))
                    .collect();
                write_json(out, &doc)?;
            } else {
                write_json(out, &runs[0].1)?;
            }
        }
    }
    Ok(0)
}

fn rep<W: Write>(a: &RepArgs, out: &mut W) -> Result<i32, CliError> {
    let funcs = CharacteristicFunctions::new(a.f.0.clone(), a.g.0.clone())?;
    let vacuum = VacuumState::new(a.alpha0, a.beta0)?;
    let rep = build_representation(&funcs, vacuum, a.dim)?;
    let relations = verify_relations(&rep, &funcs, a.tol)?;
    let casimir = casimir1(&rep, &funcs);
    let casimir_ok = casimir.constant_deviation <= a.tol && casimir.forms_difference <= a.tol;
    let passed = relations.passed && casimir_ok;
    let mut doc = json!({
        "functions": funcs,
        "vacuum": vacuum,
        "dim": a.dim,
        "passed": passed,
        "relations": relations,
        "casimir1": casimir,
    });
    if a.matrices {
        doc["matrices"] = serde_json::to_value(&rep).map_err(io::Error::other)?;
    }
    write_json(out, &doc)?;
    Ok(if passed { 0 } else { 1 })
}

fn admissible<W: Write>(a: &AdmissibleArgs, out: &mut W) -> Result<i32, CliError> {
    let params = LinearParams::new(a.r, a.s)?;
    if let Some(beta0) = a.beta0 {
        let vacuum = VacuumState::new(a.alpha0, beta0)?;
        let verdict = assess(params, vacuum, a.nmax, a.tol)?;
        let code = if verdict.admissible { 0 } else { 1 };
        let doc = json!({
            "r": a.r,
            "s": a.s,
            "alpha0": a.alpha0,
            "beta0": beta0,
            "verdict": verdict,
        });
        write_json(out, &doc)?;
        return Ok(code);
    }

    let region = region_of_params(params, REGION_TOL);
    let pair = eigenvalues(params);
    let (analytic, note) = match region {
        Some(label) if label != RegionLabel::Undefined => {
            match beta0_bound_analytic(label, pair.lambda_minus.re, pair.lambda_plus.re, a.alpha0) {
                Ok(bound) => (Some(bound), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        Some(_) => (
            None,
            Some("eigenvalues sit on a region junction".to_owned()),
        ),
        None => (None, Some("complex eigenvalues: oracle only".to_owned())),
    };
    let interval: Option<Beta0Interval> = numeric_beta0_interval(params, a.alpha0, a.nmax)?;
    let (bound, source) = match (analytic, interval) {
        (Some(AnalyticBound::LowerBound(b)), _) => (Some(b), "analytic"),
        (_, Some(iv)) if iv.lower.is_finite() => (Some(iv.lower), "numeric"),
        _ => (None, "numeric"),
    };
    let doc = json!({
        "r": a.r,
        "s": a.s,
        "alpha0": a.alpha0,
        "region": region,
        "beta0_lower_bound": bound,
        "source": source,
        "analytic": analytic,
        "note": note,
        "numeric_interval": interval.map(|iv| json!({
            "lower": finite_or_null(iv.lower),
            "upper": finite_or_null(iv.upper),
            "n_checked": iv.n_checked,
        })),
    });
    write_json(out, &doc)?;
    Ok(if interval.is_some() { 0 } else { 1 })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn chain<W: Write>(a: &ChainArgs, out: &mut W) -> Result<i32, CliError> {
    let rule: SubstitutionRule = a.rule.parse()?;
    let trace = inflate(&rule, &a.seed, a.steps)?;
    match a.format {
        ChainFormat::Text => out.write_all(trace.words_text().as_bytes())?,
        ChainFormat::Csv => out.write_all(trace.counts_csv().as_bytes())?,
        ChainFormat::Json => {
            let report = verify_count_correspondence(&rule, &a.seed, a.steps)?;
            let doc = json!({
                "rule": rule,
                "seed": a.seed,
                "steps": a.steps,
                "words": trace.words,
                "counts": trace.counts,
                "correspondence": report,
            });
            write_json(out, &doc)?;
            if !report.passed() {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn regions<W: Write>(a: &RegionsArgs, out: &mut W) -> Result<i32, CliError> {
    let mut text = String::new();
    match a.plane {
        Plane::Rs => {
            let vacuum = VacuumState::new(a.alpha0, a.beta0)?;
            let rows = region_map(a.grid_min, a.grid_max, a.grid_n, vacuum, a.tol)?;
            text.push_str("r,s,stability_kind,spectrum_kind,abs_lambda_plus,abs_lambda_minus\n");
            for row in rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    fmt_num(row.r),
                    fmt_num(row.s),
                    row.stability_kind,
                    row.spectrum_kind,
                    fmt_num(row.abs_lambda_plus),
                    fmt_num(row.abs_lambda_minus)
                );
            }
        }
        Plane::Lambda => {
            let rows = lambda_region_map(a.grid_min, a.grid_max, a.grid_n)?;
            text.push_str("lambda_minus,lambda_plus,region,bound_pos,bound_neg\n");
            let cell = |b: Option<AnalyticBound>| match b {
                Some(AnalyticBound::LowerBound(x)) => fmt_num(x),
                Some(AnalyticBound::NumericalOnly) => "numerical-only".to_owned(),
                None => String::new(),
            };
            for row in rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{}",
                    fmt_num(row.lambda_minus),
                    fmt_num(row.lambda_plus),
                    row.region,
                    cell(row.bound_pos),
                    cell(row.bound_neg)
                );
            }
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.618_033_988_749_895), "1.61803398875");
        assert_eq!(fmt_num(89.0), "89");
        assert_eq!(fmt_num(-0.5), "-0.5");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1e-7), "1e-7");
        assert_eq!(fmt_num(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_num(999_999_999_999.9), "1e12");
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let v =
            to_rounded_json(&json!({"a": 1.0000000000001, "n": 3, "xs": [2.5, 1e-20]})).unwrap();
        assert_eq!(v, json!({"a": 1.0, "n": 3, "xs": [2.5, 1e-20]}));
    }

    #[test]
    fn coefficient_lists() {
        assert_eq!(parse_coeffs("0, 1,-2.5"), Ok(Coeffs(vec![0.0, 1.0, -2.5])));
        assert!(parse_coeffs("1,,2").is_err());
    }
}
