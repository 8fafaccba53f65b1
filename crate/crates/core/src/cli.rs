//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::ald::{
    gap_sweep_with, integer_box, AldError, Baseline, IntegerBox, Relaxation, SweepRow,
};
use crate::convexsolve::{check_boundedness, SolveError, SolveStatus};
use crate::exactrho::{
    certify_empirical, certify_lambda, certify_norm, rho_bisect_empirical, rho_dual_linf, rho_sufficient, RhoCertificate, RhoError,
};
use crate::instance::{generate, instance_to_json, read_instance, GenConfig, InstanceError, MiqpInstance, Violation};
use crate::numkit::{format_rational, int, parse_rational, RatVec, Rational};
use crate::penalty::{Penalty, PenaltyError, PenaltyKind};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_ASSUMPTION: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "miqp-ald", version, about = "Exact augmented Lagrangian duality for MIQP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an instance and check that it is feasible with a bounded optimum
    Check(InstanceArgs),
    /// Print z^IP, z^NLP, the relaxation multipliers and the classical gap
    Solve(InstanceArgs),
    /// Relaxation values over a schedule of penalty weights
    Sweep(SweepArgs),
    /// Compute and certify an exact penalty weight
    Rho(RhoArgs),
    /// Write a random instance
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "linf")]
    pub penalty: String,
    /// `geom:start:factor:count` or a comma separated list
    #[arg(long, default_value = "geom:1:2:8")]
    pub rhos: String,
    /// `bar`, `zeros` or a JSON file holding an array of rationals
    #[arg(long, default_value = "bar")]
    pub lambda: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Dual ascent iterations per row for the `z_ld` column; 0 leaves it empty
    #[arg(long, default_value_t = 0)]
    pub ascent_iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "linf")]
    pub penalty: String,
    /// `sufficient`, `dual-linf`, `norm:KIND`, `shift` or `empirical`
    #[arg(long, default_value = "sufficient")]
    pub method: String,
    /// Multiplier for `shift` and `empirical`: `bar`, `zeros` or a JSON file
    #[arg(long, default_value = "bar")]
    pub lambda: String,
    /// Upper end of the bisection for `empirical` and `--verify`
    #[arg(long)]
    pub rho_max: Option<String>,
    /// Cross-check against bisection on the relaxation value
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1)]
    pub n1: usize,
    #[arg(long, default_value_t = 2)]
    pub n2: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Random rows of `E` on top of the integer box rows
    #[arg(long, default_value_t = 1)]
    pub m2: usize,
    #[arg(long, default_value_t = 2)]
    pub magnitude: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub require_feasible: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn io(err: io::Error) -> Self {
        CliError::new(EXIT_INPUT, format!("IO_ERROR: {err}"))
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::new(EXIT_INPUT, e.to_string())
    }
}

impl From<PenaltyError> for CliError {
    fn from(e: PenaltyError) -> Self {
        CliError::new(EXIT_INPUT, e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::NotPsd(_) => EXIT_ASSUMPTION,
            SolveError::IterationLimit(_) => EXIT_INVARIANT,
            SolveError::DimMismatch(..) | SolveError::Num(_) => EXIT_INPUT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<AldError> for CliError {
    fn from(e: AldError) -> Self {
        let code = match &e {
            AldError::UnboundedIntegerVar(_)
            | AldError::BoxTooLarge
            | AldError::NlpUnbounded
            | AldError::IpUnbounded => EXIT_ASSUMPTION,
            AldError::NlpInfeasible | AldError::IpInfeasible => EXIT_INFEASIBLE,
            AldError::DimMismatch { .. } | AldError::NegativeRho(_) | AldError::UnsortedSchedule => EXIT_INPUT,
            AldError::InvariantBreach(_) => EXIT_INVARIANT,
            AldError::Solve(inner) => return inner.clone().into(),
            AldError::Penalty(inner) => return inner.clone().into(),
        };
        CliError::new(code, e.to_string())
    }
}

impl From<RhoError> for CliError {
    fn from(e: RhoError) -> Self {
        match e {
            RhoError::Ald(inner) => inner.into(),
            RhoError::Penalty(inner) => inner.into(),
            RhoError::Solve(inner) => inner.into(),
            RhoError::DeltaZero(_) | RhoError::BisectionCap(_) | RhoError::NotCertified(_) => {
                CliError::new(EXIT_ASSUMPTION, e.to_string())
            }
            RhoError::InvariantBreach(_) => CliError::new(EXIT_INVARIANT, e.to_string()),
        }
    }
}

/// Parses `args` and runs the command; usage errors exit with [`EXIT_INPUT`].
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Check(a) => cmd_check(&a.instance, &mut open_out(a.out.as_deref())?),
        Command::Solve(a) => cmd_solve(&a.instance, &mut open_out(a.out.as_deref())?),
        Command::Sweep(a) => {
            let mut out = open_out(a.out.as_deref())?;
            cmd_sweep(&a, &mut out)
        }
        Command::Rho(a) => {
            let mut out = open_out(a.out.as_deref())?;
            cmd_rho(&a, &mut out)
        }
        Command::Gen(a) => {
            let mut out = open_out(a.out.as_deref())?;
            cmd_gen(&a, &mut out)
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::new(EXIT_INPUT, format!("IO_ERROR: {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::io(e.into()))?;
    writeln!(out).map_err(CliError::io)?;
    out.flush().map_err(CliError::io)
}

fn load(path: &Path) -> Result<MiqpInstance, CliError> {
    let inst = read_instance(path)?;
    if let Err(violations) = inst.validate() {
        let code = if violations.iter().any(|v| matches!(v, Violation::Dim(_))) {
            EXIT_INPUT
        } else {
            EXIT_ASSUMPTION
        };
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(CliError::new(code, text.join("; ")));
    }
    Ok(inst)
}

/// Multiplier from `bar`, `zeros` or a JSON array of rationals in a file.
pub fn parse_lambda(source: &str, m: usize, bar: impl FnOnce() -> Result<RatVec, CliError>) -> Result<RatVec, CliError> {
    let lambda = match source {
        "bar" => return bar(),
        "zeros" => RatVec::zeros(m),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(EXIT_INPUT, format!("IO_ERROR: {path}: {e}")))?;
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::new(EXIT_INPUT, format!("PARSE_ERROR: {path}: {e}")))?;
            let items = doc
                .as_array()
                .ok_or_else(|| CliError::new(EXIT_INPUT, format!("PARSE_ERROR: {path}: expected an array")))?;
            items
                .iter()
                .map(|v| {
                    let text = match v {
                        Value::String(s) => s.clone(),
                        Value::Number(n) if n.is_i64() => n.to_string(),
                        other => return Err(CliError::new(EXIT_INPUT, format!("PARSE_ERROR: {path}: {other}"))),
                    };
                    parse_rational(&text).map_err(|e| CliError::new(EXIT_INPUT, format!("PARSE_ERROR: {path}: {e}")))
                })
                .collect::<Result<RatVec, _>>()?
        }
    };
    if lambda.dim() != m {
        return Err(AldError::DimMismatch {
            expected: m,
            got: lambda.dim(),
        }
        .into());
    }
    Ok(lambda)
}

/// `geom:start:factor:count` or `r1,r2,...`; nonempty, nonnegative, strictly increasing.
pub fn parse_schedule(spec: &str) -> Result<Vec<Rational>, CliError> {
    let bad = |msg: &str| CliError::new(EXIT_INPUT, format!("bad schedule {spec:?}: {msg}"));
    let num = |s: &str| parse_rational(s.trim()).map_err(|e| bad(&e.to_string()));
    let rhos: Vec<Rational> = if let Some(rest) = spec.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [start, factor, count] = parts[..] else {
            return Err(bad("expected geom:start:factor:count"));
        };
        let (start, factor) = (num(start)?, num(factor)?);
        let count: usize = count.trim().parse().map_err(|_| bad("count is not a natural number"))?;
        let mut rho = start;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(rho.clone());
            rho *= &factor;
        }
        out
    } else {
        spec.split(',').map(num).collect::<Result<_, _>>()?
    };
    if rhos.is_empty() {
        return Err(bad("empty"));
    }
    if rhos.iter().any(Signed::is_negative) {
        return Err(bad("negative weight"));
    }
    if rhos.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("weights must be strictly increasing"));
    }
    Ok(rhos)
}

fn box_json(b: &IntegerBox) -> Value {
    json!({ "lower": b.lower, "upper": b.upper, "points": b.count() })
}

pub fn cmd_check(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = load(path)?;
    let mut checks: Vec<Value> = vec![json!({ "name": "validate", "ok": true })];
    let fail = |out: &mut dyn Write, checks: Vec<Value>, name: &str, extra: Value, err: CliError| {
        let mut report = json!({ "status": "FAILED", "failed_check": name, "checks": checks });
        if let (Value::Object(r), Value::Object(x)) = (&mut report, extra) {
            r.extend(x);
        }
        emit_json(out, &report)?;
        Err(err)
    };

    let bounded = check_boundedness(&inst)?;
    if let Err(msg) = bounded.verify(&inst) {
        return Err(CliError::new(EXIT_INVARIANT, format!("INVARIANT_BREACH: {msg}")));
    }
    checks.push(json!({ "name": "boundedness", "ok": bounded.nlp_bounded }));
    if !bounded.nlp_bounded {
        let err = CliError::new(EXIT_ASSUMPTION, "NLP_UNBOUNDED: descent ray found");
        return fail(out, checks, "boundedness", json!({ "boundedness": bounded }), err);
    }

    let ibox = match integer_box(&inst) {
        Ok(b) => b,
        Err(e) => {
            checks.push(json!({ "name": "integer_box", "ok": false }));
            let extra = json!({ "boundedness": bounded });
            return fail(out, checks, "integer_box", extra, e.into());
        }
    };
    checks.push(json!({ "name": "integer_box", "ok": true }));

    let relax = Relaxation::new(&inst)?;
    let base = match Baseline::compute(&relax) {
        Ok(b) => b,
        Err(e) => {
            checks.push(json!({ "name": "feasibility", "ok": false }));
            let extra = json!({ "boundedness": bounded, "integer_box": box_json(&ibox) });
            return fail(out, checks, "feasibility", extra, e.into());
        }
    };
    checks.push(json!({ "name": "feasibility", "ok": true }));
    emit_json(
        out,
        &json!({
            "status": "OK",
            "checks": checks,
            "boundedness": bounded,
            "integer_box": box_json(&ibox),
            "z_ip": format_rational(&base.z_ip),
            "z_nlp": format_rational(&base.nlp.z_nlp),
        }),
    )
}

pub fn cmd_solve(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = load(path)?;
    let relax = Relaxation::new(&inst)?;
    let ip = relax.solve_ip()?;
    match ip.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            emit_json(out, &json!({ "status": "INFEASIBLE" }))?;
            return Err(AldError::IpInfeasible.into());
        }
        SolveStatus::Unbounded => {
            emit_json(out, &json!({ "status": "UNBOUNDED", "ray": ip.ray }))?;
            return Err(AldError::IpUnbounded.into());
        }
    }
    let base = Baseline::compute(&relax)?;
    let p = Penalty::new(PenaltyKind::Linf, inst.m());
    let lr0 = relax.eval(&base.nlp.lambda_bar, &Rational::zero(), &p)?;
    let gap = lr0.value.finite().map(|v| format_rational(&(&base.z_ip - v)));
    emit_json(
        out,
        &json!({
            "status": "OPTIMAL",
            "z_ip": format_rational(&base.z_ip),
            "x_ip": base.x_ip,
            "z_nlp": format_rational(&base.nlp.z_nlp),
            "x_nlp": base.nlp.x,
            "lambda_bar": base.nlp.lambda_bar,
            "lambda_e": base.nlp.lambda_e,
            "z_lr0": lr0.value,
            "classical_gap": gap,
        }),
    )
}

fn opt_cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn sweep_fields(row: &SweepRow) -> [String; 6] {
    [
        format_rational(&row.rho),
        row.z_lr.to_string(),
        opt_cell(&row.z_ld),
        row.gap_lr.as_ref().map(format_rational).unwrap_or_default(),
        format_rational(&row.violation),
        row.kappa_rho.as_ref().map(format_rational).unwrap_or_default(),
    ]
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = load(&args.instance)?;
    let p = Penalty::parse(&args.penalty, inst.m())?;
    let rhos = parse_schedule(&args.rhos)?;
    let relax = Relaxation::new(&inst)?;
    let base = Baseline::compute(&relax)?;
    let lambda = parse_lambda(&args.lambda, inst.m(), || Ok(base.nlp.lambda_bar.clone()))?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io_err = |e: csv::Error| CliError::new(EXIT_INPUT, format!("IO_ERROR: {e}"));
            w.write_record(["rho", "z_lr", "z_ld", "gap_lr", "violation", "kappa_rho"])
                .map_err(io_err)?;
            gap_sweep_with(&relax, &base, &p, &lambda, &rhos, args.ascent_iters, |row| {
                w.write_record(sweep_fields(row)).map_err(io_err)?;
                w.flush().map_err(CliError::io)
            })
        }
        Format::Json => {
            write!(out, "[").map_err(CliError::io)?;
            let mut first = true;
            gap_sweep_with(&relax, &base, &p, &lambda, &rhos, args.ascent_iters, |row| {
                let sep = if first { "\n  " } else { ",\n  " };
                first = false;
                let text = serde_json::to_string(row).map_err(|e| CliError::io(e.into()))?;
                write!(out, "{sep}{text}").map_err(CliError::io)?;
                out.flush().map_err(CliError::io)
            })?;
            writeln!(out, "\n]").map_err(CliError::io)?;
            out.flush().map_err(CliError::io)
        }
    }
}

pub fn cmd_rho(args: &RhoArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = load(&args.instance)?;
    let m = inst.m();
    let p = Penalty::parse(&args.penalty, m)?;
    let usage = |msg: String| CliError::new(EXIT_INPUT, msg);
    let relax = Relaxation::new(&inst)?;
    let base = Baseline::compute(&relax)?;
    // weight at λ̄ for the norm `p`, from the L∞ dual search
    let at_bar = |p: &Penalty| -> Result<RhoCertificate, CliError> {
        let linf = rho_dual_linf(&relax, &base)?;
        if p.kind == PenaltyKind::Linf {
            Ok(linf)
        } else {
            Ok(certify_norm(&relax, &base, &linf.rho_star, p)?)
        }
    };
    let (cert, p) = match args.method.as_str() {
        "sufficient" => (rho_sufficient(&relax, &base, &p)?, p),
        "dual-linf" => {
            if p.kind != PenaltyKind::Linf {
                return Err(usage(format!("method dual-linf needs --penalty linf, got {}", p.kind)));
            }
            (rho_dual_linf(&relax, &base)?, p)
        }
        "shift" => {
            let lambda = parse_lambda(&args.lambda, m, || Ok(base.nlp.lambda_bar.clone()))?;
            let bar = at_bar(&p)?;
            (certify_lambda(&relax, &base, &bar.rho_star, &lambda, &p)?, p)
        }
        "empirical" => {
            let lambda = parse_lambda(&args.lambda, m, || Ok(base.nlp.lambda_bar.clone()))?;
            let rho_max = match &args.rho_max {
                Some(text) => parse_rational(text).map_err(|e| usage(format!("bad --rho-max: {e}")))?,
                None => int(1 << 20),
            };
            (certify_empirical(&relax, &base, &lambda, &p, &rho_max)?, p)
        }
        other => {
            let Some(kind) = other.strip_prefix("norm:") else {
                return Err(usage(format!("unknown method {other:?}")));
            };
            let target = Penalty::parse(kind, m)?;
            (at_bar(&target)?, target)
        }
    };
    emit_json(out, &cert)?;
    if args.verify {
        let rho_max = match &args.rho_max {
            Some(text) => parse_rational(text).map_err(|e| usage(format!("bad --rho-max: {e}")))?,
            None => (int(2) * &cert.rho_star).max(int(1 << 12)),
        };
        let emp = rho_bisect_empirical(&relax, &cert.z_ip, &cert.lambda_used, &p, &rho_max)?;
        let dominates = emp.achieved && cert.rho_star >= &emp.rho_min_upper - &emp.width;
        eprintln!(
            "dominance: rho_star = {} empirical upper = {} (width {}) {}",
            format_rational(&cert.rho_star),
            format_rational(&emp.rho_min_upper),
            format_rational(&emp.width),
            if dominates { "ok" } else { "FAILED" }
        );
        if !dominates {
            return Err(CliError::new(
                EXIT_INVARIANT,
                "INVARIANT_BREACH: certified weight below the empirical threshold",
            ));
        }
    }
    Ok(())
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = GenConfig {
        n1: args.n1,
        n2: args.n2,
        m: args.m,
        m2: args.m2,
        magnitude: args.magnitude,
        seed: args.seed,
        require_feasible: args.require_feasible,
    };
    if cfg.magnitude == 0 {
        return Err(CliError::new(EXIT_INPUT, "magnitude must be positive"));
    }
    out.write_all(instance_to_json(&generate(&cfg)).as_bytes())
        .map_err(CliError::io)?;
    out.flush().map_err(CliError::io)
}
