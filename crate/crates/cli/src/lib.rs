//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error (including a composite
//! modulus), 3 violated precondition, 4 a guaranteed bound failed.

pub mod setspec;

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use sumprod_core::explorer::{self, FamilySpec, ScanLimits, ScanOutcome};
use sumprod_core::mult_structure::{self, SubgroupData};
use sumprod_core::setops::{self, FieldSet};
use sumprod_core::verify::{self, VerificationReport};
use sumprod_core::witness::{self, Lemma4Floor, WitnessReport, XiChoice};
use sumprod_core::{make_field, Error, PrimeField};

/// Results larger than this are elided unless `--full` is given.
pub const ELIDE_ABOVE: usize = 10_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_BUG: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "sumprod", version, about = "Exact sum-product computations over prime fields")]
pub struct Cli {
    /// Prime modulus of the field.
    #[arg(long, global = true, value_parser = parse_field)]
    q: Option<PrimeField>,
    /// Input set, e.g. `explicit:1,2,4` or `geo:g=3,len=10`.
    #[arg(long = "set", global = true)]
    set: Option<String>,
    /// Print result sets in full even above the elision threshold.
    #[arg(long, global = true)]
    full: bool,
    /// Scan every subset instead of a single set.
    #[arg(long, global = true)]
    exhaustive: bool,
    /// Inclusive size range for exhaustive runs, `a..b` or a single size.
    #[arg(long, global = true, value_parser = parse_sizes)]
    sizes: Option<RangeInclusive<usize>>,
    /// Worker threads for scans.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// A + A
    Sumset,
    /// A · A
    Prodset,
    /// A − A
    Diffset,
    /// I(A)
    Iset,
    /// A / A
    Ratios,
    /// S_ξ(A)
    Sxi {
        #[arg(long)]
        xi: u64,
    },
    /// Σ_s f_ξ(s)² and its support size
    Energy {
        #[arg(long)]
        xi: u64,
    },
    /// Collision and dilated embedding of S_ξ(A) into I(A)
    Lemma1 {
        #[arg(long)]
        xi: u64,
    },
    /// Energy-minimising ξ over the subgroup generated by the given set
    Lemma2 {
        #[arg(long)]
        group: String,
    },
    /// ξ in the popular-ratio subgroup meeting the two-sided floor
    Lemma4,
    /// Witness for |I(A)| ≥ q/2 when |A| > √q
    Theorem3,
    /// Difference-set growth of A inside the subgroup generated by the given set
    Lemma5 {
        #[arg(long)]
        group: String,
    },
    /// Partial sums of the ordered per-coset difference counts
    Hbk {
        #[arg(long)]
        group: String,
        #[arg(long)]
        t: u64,
    },
    /// Verification report for one set, or for every subset with --exhaustive
    Verify,
    /// CSV scan over a family (--set) or every subset (--exhaustive)
    Scan {
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Overrides the seed of a random family.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_field(text: &str) -> Result<PrimeField, String> {
    let q: u64 = text.parse().map_err(|_| format!("{text:?} is not a decimal integer"))?;
    make_field(q).map_err(|e| e.to_string())
}

fn parse_sizes(text: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("expected a..b or a single size, got {text:?}");
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (text, text),
    };
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CompositeModulus(_)
            | Error::ModulusTooSmall(_)
            | Error::ResidueOutOfRange { .. }
            | Error::FieldMismatch { .. } => EXIT_PARSE,
            Error::InvariantViolation(_) => EXIT_BUG,
            _ => EXIT_PRECONDITION,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_IO, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARSE, message: message.into() }
}

impl From<setspec::SpecError> for Failure {
    fn from(e: setspec::SpecError) -> Self {
        usage(format!("invalid set specification {e}"))
    }
}

#[derive(Serialize)]
struct ComputeOutput<'a> {
    q: u64,
    input: &'a str,
    op: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<u64>,
    result_size: usize,
    result: Value,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    elided: bool,
}

#[derive(Serialize)]
struct WitnessOutput<'a> {
    q: u64,
    input: &'a str,
    target: &'a str,
    #[serde(flatten)]
    witness: WitnessReport,
}

#[derive(Serialize)]
struct Lemma2Output<'a> {
    q: u64,
    input: &'a str,
    target: &'a str,
    group_order: usize,
    #[serde(flatten)]
    choice: XiChoice,
    floor_num: u128,
    floor_den: u128,
}

#[derive(Serialize)]
struct ExhaustiveOutput<'a> {
    q: u64,
    sizes: [usize; 2],
    reports: Vec<&'a VerificationReport>,
    summary: &'a explorer::ScanSummary,
}

struct Context {
    field: PrimeField,
    spec_text: Option<String>,
    full: bool,
}

impl Context {
    fn spec(&self) -> Result<(&str, FamilySpec), Failure> {
        let text = self.spec_text.as_deref().ok_or_else(|| usage("--set is required"))?;
        Ok((text, setspec::parse(text)?))
    }

    fn set(&self) -> Result<(&str, FieldSet), Failure> {
        let (text, spec) = self.spec()?;
        Ok((text, spec.generate(self.field, 0)?))
    }

    fn group(&self, text: &str) -> Result<SubgroupData, Failure> {
        let spec = setspec::parse(text)?;
        Ok(mult_structure::generated_subgroup(&spec.generate(self.field, 0)?)?)
    }

    fn element(&self, xi: u64) -> Result<sumprod_core::FieldElement, Failure> {
        Ok(self.field.element(xi)?)
    }

    fn set_value(&self, s: &FieldSet) -> (Value, bool) {
        if s.len() > ELIDE_ABOVE && !self.full {
            (Value::Null, true)
        } else {
            (serde_json::to_value(s).expect("sets serialize"), false)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn compute(ctx: &Context, op: &str, xi: Option<u64>) -> Result<String, Failure> {
    let (input, a) = ctx.set()?;
    let (result_size, result, elided) = match op {
        "energy" => {
            let x = ctx.element(xi.expect("energy takes --xi"))?;
            let table = setops::repr_counts(&a, x)?;
            (table.support_size(), Value::from(table.sum_of_squares() as u64), false)
        }
        _ => {
            let s = match op {
                "sumset" => setops::sum_set(&a, &a)?,
                "prodset" => setops::product_set(&a, &a)?,
                "diffset" => setops::difference_set(&a, &a)?,
                "iset" => setops::i_set(&a)?,
                "ratios" => setops::ratio_set(&a, &a)?,
                "sxi" => setops::s_xi_set(&a, ctx.element(xi.expect("sxi takes --xi"))?)?,
                _ => unreachable!("unknown compute op {op}"),
            };
            let (v, elided) = ctx.set_value(&s);
            (s.len(), v, elided)
        }
    };
    Ok(to_json(&ComputeOutput {
        q: ctx.field.modulus(),
        input,
        op,
        xi,
        result_size,
        result,
        elided,
    }))
}

fn witness_json(ctx: &Context, target: &str, witness: WitnessReport) -> Result<String, Failure> {
    let (input, _) = ctx.spec()?;
    Ok(to_json(&WitnessOutput {
        q: ctx.field.modulus(),
        input,
        target,
        witness,
    }))
}

fn scan_outcome(cli: &Cli, ctx: &Context, trials: u64, seed: Option<u64>) -> Result<ScanOutcome, Failure> {
    if cli.exhaustive {
        let sizes = cli.sizes.clone().unwrap_or(1..=ctx.field.size());
        return Ok(explorer::exhaustive_scan(ctx.field, sizes, &ScanLimits::from_env(), cli.workers)?);
    }
    let (_, mut spec) = ctx.spec()?;
    if let (FamilySpec::Random { seed: s, .. }, Some(new)) = (&mut spec, seed) {
        *s = new;
    }
    Ok(explorer::family_scan(ctx.field, &spec, trials, cli.workers)?)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let field = cli.q.ok_or_else(|| usage("--q is required"))?;
    let ctx = Context {
        field,
        spec_text: cli.set.clone(),
        full: cli.full,
    };
    let command = match (&cli.command, cli.exhaustive) {
        (Some(c), _) => c,
        (None, true) => &Command::Verify,
        (None, false) => return Err(usage("no command given (try --help)")),
    };
    let text = match command {
        Command::Sumset => compute(&ctx, "sumset", None)?,
        Command::Prodset => compute(&ctx, "prodset", None)?,
        Command::Diffset => compute(&ctx, "diffset", None)?,
        Command::Iset => compute(&ctx, "iset", None)?,
        Command::Ratios => compute(&ctx, "ratios", None)?,
        Command::Sxi { xi } => compute(&ctx, "sxi", Some(*xi))?,
        Command::Energy { xi } => compute(&ctx, "energy", Some(*xi))?,
        Command::Lemma1 { xi } => {
            let (_, a) = ctx.set()?;
            witness_json(&ctx, "lemma1", witness::embed_witness(&a, ctx.element(*xi)?)?)?
        }
        Command::Lemma2 { group } => {
            let (input, a) = ctx.set()?;
            let g = ctx.group(group)?;
            let choice = witness::select_xi_lemma2(&a, &g)?;
            let floor = Lemma4Floor::new(a.len(), 1, g.order());
            to_json(&Lemma2Output {
                q: field.modulus(),
                input,
                target: "lemma2",
                group_order: g.order(),
                choice,
                floor_num: floor.averaging_num,
                floor_den: floor.averaging_den,
            })
        }
        Command::Lemma4 => {
            let (_, a) = ctx.set()?;
            witness_json(&ctx, "lemma4", witness::select_xi_lemma4(&a)?)?
        }
        Command::Theorem3 => {
            let (_, a) = ctx.set()?;
            witness_json(&ctx, "theorem3", witness::theorem3_witness(&a)?)?
        }
        Command::Lemma5 { group } => {
            let (_, b) = ctx.set()?;
            to_json(&explorer::lemma5_empirical(&b, &ctx.group(group)?)?)
        }
        Command::Hbk { group, t } => to_json(&explorer::hbk_partial_sums(&ctx.group(group)?, *t)?),
        Command::Verify if cli.exhaustive => {
            let out = scan_outcome(cli, &ctx, 1, None)?;
            let sizes = cli.sizes.clone().unwrap_or(1..=field.size());
            to_json(&ExhaustiveOutput {
                q: field.modulus(),
                sizes: [*sizes.start(), *sizes.end()],
                reports: out.records.iter().map(|r| &r.report).collect(),
                summary: &out.summary,
            })
        }
        Command::Verify => {
            let (_, a) = ctx.set()?;
            to_json(&verify::verify_all(&a)?)
        }
        Command::Scan { trials, seed, out } => {
            let outcome = scan_outcome(cli, &ctx, *trials, *seed)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(path)?;
                    explorer::write_csv(&outcome.records, std::io::BufWriter::new(file))?;
                    to_json(&outcome.summary)
                }
                None => {
                    explorer::write_csv(&outcome.records, &mut *stdout)?;
                    return Ok(());
                }
            }
        }
    };
    writeln!(stdout, "{text}")?;
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
