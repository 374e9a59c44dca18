//! Command-line frontend. Every subcommand reads its inputs, runs one
//! computation and writes a JSON (or CSV) report.
//!
//! Exit codes: 0 success, 1 input error, 2 tester reject, 3 budget
//! exhausted, 64 usage error, 70 internal error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::budget;
use crate::derivative::{direction_pool, gowers_derivative_bias};
use crate::error::{Error, Result};
use crate::factor::{
    is_function_of, region_decompose, regularize, uniformity_report, Factor, FunctionOf, Lookup,
    RegularizeConfig, StopReason,
};
use crate::field::{FieldSpec, Matrix};
use crate::poly::{parse_system, PolySystem, Polynomial};
use crate::reductions::{
    avg_to_worst, bilinear_dixon_check, rank_via_derivatives, ComputationCertificate, RankSearch,
};
use crate::spectral::{bias_estimate, bias_exact, character_spectrum};
use crate::tester::{concise_test, Decision};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_REJECT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

pub const BUDGET_ENV: &str = "POLYLAB_BUDGET_MB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "polylab",
    version,
    about = "Bias, derivative and rank computations over F_p^n"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel kernels.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Table memory cap in MiB (one byte per entry); overrides POLYLAB_BUDGET_MB.
    #[arg(long = "budget-mb", global = true)]
    budget_mb: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Args)]
struct Target {
    /// Polynomial file.
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    /// Name of the polynomial to use; defaults to the first one.
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bias of a polynomial, exact or sampled.
    Bias {
        #[command(flatten)]
        target: Target,
        /// Estimate from this many samples instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Character spectrum.
    Spectrum {
        #[command(flatten)]
        target: Target,
    },
    /// Bias of the d-fold iterated derivative.
    Gowers {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        d: usize,
    },
    /// Region sizes of a factor.
    Regions {
        /// Factor file.
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    /// Whether a polynomial is a function of a factor.
    Isfunc {
        #[command(flatten)]
        target: Target,
        /// Factor file.
        #[arg(short = 'g', long = "factor")]
        factor: PathBuf,
    },
    /// Strong-regularity refinement of a set of polynomials.
    Regularize {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        growth: usize,
        #[arg(long = "iteration-cap", default_value_t = 32)]
        iteration_cap: usize,
        #[arg(long = "rmax", default_value_t = 2)]
        r_max: usize,
        #[arg(long = "rank-budget", default_value_t = 200_000)]
        rank_budget: u64,
    },
    /// Derivative-restricted rank with a computation certificate.
    Rank {
        #[command(flatten)]
        target: Target,
        #[arg(long = "cmax")]
        c_max: usize,
        /// Write the certificate JSON here.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Turn an approximation by a factor into an exact computation.
    Reduce {
        #[command(flatten)]
        target: Target,
        #[arg(short = 'g', long = "factor")]
        factor: PathBuf,
        /// Combiner values by region index (digits, little-endian regions);
        /// defaults to the plurality value of the target on each region.
        #[arg(long)]
        lookup: Option<String>,
        #[arg(long = "cmax", default_value_t = 4)]
        c_max: usize,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Bias-rank law for the bilinear form x^T A y.
    Dixon {
        #[arg(long)]
        p: u64,
        /// Rows separated by ';', entries by spaces or commas.
        #[arg(short = 'm', long)]
        matrix: String,
    },
    /// Low-degree and bias tester on a polynomial oracle.
    Test {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        /// Write the query transcript as JSON lines here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

struct Outcome {
    result: Value,
    csv: Option<String>,
    exit: i32,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            csv: None,
            exit: EXIT_OK,
        }
    }
}

struct Inputs(Vec<(String, String)>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        self.0.push((
            path.display().to_string(),
            hex::encode(Sha256::digest(&bytes)),
        ));
        String::from_utf8(bytes)
            .map_err(|_| Error::Invalid(format!("{}: not UTF-8", path.display())))
    }

    fn system(&mut self, path: &Path) -> Result<PolySystem> {
        let text = self.read(path)?;
        parse_system(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    fn target(&mut self, t: &Target) -> Result<Polynomial> {
        let sys = self.system(&t.file)?;
        let found = match &t.poly {
            Some(name) => sys.get(name).cloned(),
            None => sys.polys.first().map(|(_, q)| q.clone()),
        };
        found.ok_or_else(|| Error::Invalid(format!("{}: no such polynomial", t.file.display())))
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match apply_budget(cli.common.budget_mb) {
        Ok(()) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads.max(1))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INTERNAL;
        }
    };
    let mut inputs = Inputs(Vec::new());
    let start = Instant::now();
    let outcome = pool.install(|| execute(&cli.command, &cli.common, &mut inputs));
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = match cli.common.format {
        Format::Csv => outcome
            .csv
            .clone()
            .unwrap_or_else(|| flatten_csv(&outcome.result)),
        Format::Json => {
            let mut report = Map::new();
            report.insert("command".into(), json!(command_name(&cli.command)));
            report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            report.insert(
                "inputs".into(),
                Value::Array(
                    inputs
                        .0
                        .iter()
                        .map(|(p, h)| json!({"path": p, "sha256": h}))
                        .collect(),
                ),
            );
            report.insert("config".into(), config_echo(&cli));
            report.insert("result".into(), outcome.result);
            if cli.common.timing {
                report.insert("timing_ms".into(), json!(elapsed.as_secs_f64() * 1e3));
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(report)).unwrap_or_default();
            s.push('\n');
            s
        }
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return EXIT_INPUT;
    }
    outcome.exit
}

fn apply_budget(flag: Option<u64>) -> std::result::Result<(), String> {
    let mb = match flag {
        Some(mb) => Some(mb),
        None => match std::env::var(BUDGET_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("{BUDGET_ENV}={v} is not an integer"))?,
            ),
            Err(_) => None,
        },
    };
    match mb {
        Some(0) => Err("table budget must be positive".into()),
        Some(mb) => {
            budget::set_table_budget(mb.saturating_mul(1 << 20));
            Ok(())
        }
        None => Ok(()),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bias { .. } => "bias",
        Command::Spectrum { .. } => "spectrum",
        Command::Gowers { .. } => "gowers",
        Command::Regions { .. } => "regions",
        Command::Isfunc { .. } => "isfunc",
        Command::Regularize { .. } => "regularize",
        Command::Rank { .. } => "rank",
        Command::Reduce { .. } => "reduce",
        Command::Dixon { .. } => "dixon",
        Command::Test { .. } => "test",
    }
}

fn config_echo(cli: &Cli) -> Value {
    let mut cfg = json!({
        "seed": cli.common.seed,
        "threads": cli.common.threads,
        "table_budget": budget::table_budget(),
    });
    let extra = match &cli.command {
        Command::Bias { target, samples } => json!({"poly": target.poly, "samples": samples}),
        Command::Spectrum { target } => json!({"poly": target.poly}),
        Command::Gowers { target, d } => json!({"poly": target.poly, "d": d}),
        Command::Regions { .. } => json!({}),
        Command::Isfunc { target, .. } => json!({"poly": target.poly}),
        Command::Regularize {
            growth,
            iteration_cap,
            r_max,
            rank_budget,
            ..
        } => {
            json!({"growth": growth, "iteration_cap": iteration_cap, "r_max": r_max, "rank_budget": rank_budget})
        }
        Command::Rank { target, c_max, .. } => json!({"poly": target.poly, "c_max": c_max}),
        Command::Reduce {
            target,
            lookup,
            c_max,
            ..
        } => json!({"poly": target.poly, "lookup": lookup, "c_max": c_max}),
        Command::Dixon { p, matrix } => json!({"p": p, "matrix": matrix}),
        Command::Test {
            target,
            degree,
            theta,
            samples,
            trials,
            ..
        } => {
            json!({"poly": target.poly, "degree": degree, "theta": theta, "samples": samples, "trials": trials})
        }
    };
    if let (Value::Object(base), Value::Object(more)) = (&mut cfg, extra) {
        base.extend(more);
    }
    cfg
}

fn execute(cmd: &Command, common: &Common, inputs: &mut Inputs) -> Result<Outcome> {
    let seed = common.seed;
    match cmd {
        Command::Bias { target, samples } => {
            let q = inputs.target(target)?;
            let result = match samples {
                Some(n) => {
                    let est = bias_estimate(
                        q.field(),
                        q.n(),
                        |x| q.field().element(q.eval_raw(x.coords())),
                        *n,
                        seed,
                    )?;
                    json!({
                        "mode": "sampled",
                        "re": est.estimate.re,
                        "im": est.estimate.im,
                        "magnitude": est.estimate.norm(),
                        "radius": est.radius,
                    })
                }
                None => {
                    let rep = bias_exact(&q.tabulate()?);
                    json!({
                        "mode": "exact",
                        "re": rep.bias_value.re,
                        "im": rep.bias_value.im,
                        "magnitude": rep.magnitude,
                        "value_distribution": rep.value_distribution,
                        "plurality_value": rep.plurality_value.value(),
                    })
                }
            };
            Ok(Outcome::ok(result))
        }
        Command::Spectrum { target } => {
            let q = inputs.target(target)?;
            let s = character_spectrum(&q.tabulate()?)?;
            let coeffs: Vec<Value> = s
                .coefficients()
                .iter()
                .map(|c| json!([c.re, c.im]))
                .collect();
            Ok(Outcome {
                result: json!({"p": q.field().modulus(), "n": q.n(), "energy": s.energy(), "coefficients": coeffs}),
                csv: Some(s.to_csv()),
                exit: EXIT_OK,
            })
        }
        Command::Gowers { target, d } => {
            let q = inputs.target(target)?;
            let value = gowers_derivative_bias(&q, *d)?;
            Ok(Outcome::ok(
                json!({"d": d, "degree": q.degree(), "value": value}),
            ))
        }
        Command::Regions { file } => {
            let g = Factor::from_system(&inputs.system(file)?)?;
            let map = region_decompose(&g)?;
            let u = uniformity_report(&g)?;
            Ok(Outcome {
                result: json!({
                    "dimension": g.dimension(),
                    "counts": map.counts(),
                    "total": map.total(),
                    "empty_regions": u.empty_regions,
                    "max_rel_dev": u.max_rel_dev,
                }),
                csv: Some(map.to_csv()),
                exit: EXIT_OK,
            })
        }
        Command::Isfunc { target, factor } => {
            let q = inputs.target(target)?;
            let g = Factor::from_system(&inputs.system(factor)?)?;
            let result = match is_function_of(&q, &g)? {
                FunctionOf::Lookup(l) => json!({"is_function": true, "lookup": lookup_json(&l)}),
                FunctionOf::Witness {
                    region,
                    first,
                    second,
                } => json!({
                    "is_function": false,
                    "region": region,
                    "first": first.coords(),
                    "second": second.coords(),
                }),
            };
            Ok(Outcome::ok(result))
        }
        Command::Regularize {
            file,
            growth,
            iteration_cap,
            r_max,
            rank_budget,
        } => {
            let sys = inputs.system(file)?;
            let polys: Vec<Polynomial> = sys.polys.iter().map(|(_, q)| q.clone()).collect();
            let cfg = RegularizeConfig {
                growth_budget: *growth,
                iteration_cap: *iteration_cap,
                r_max: *r_max,
                rank_budget: *rank_budget,
                seed,
            };
            let reg = regularize(&polys, &cfg)?;
            let members: Vec<Value> = reg
                .factor
                .polys()
                .iter()
                .zip(reg.factor.deltas())
                .zip(&reg.ids)
                .zip(&reg.provenance)
                .map(|(((q, d), id), prov)| {
                    json!({
                        "id": id,
                        "poly": q.to_string(),
                        "degree": q.degree(),
                        "delta": d,
                        "origin": prov.origin,
                        "shifts": prov.shifts.iter().map(|s| s.coords().to_vec()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let iterations: Vec<Value> = reg
                .iterations
                .iter()
                .map(|it| {
                    json!({
                        "witness_r": it.witness_r,
                        "lowered": it.lowered,
                        "lowered_degree": it.lowered_degree,
                        "new_delta": it.new_delta,
                        "added": it.added,
                    })
                })
                .collect();
            Ok(Outcome::ok(json!({
                "refined": reg.refined,
                "stop": stop_name(reg.stop),
                "members": members,
                "iterations": iterations,
                "last_search": {
                    "truncated": reg.last_search.truncated,
                    "searched_up_to": reg.last_search.searched_up_to,
                    "patterns_checked": reg.last_search.patterns_checked,
                    "oracle_checks": reg.last_search.oracle_checks,
                },
            })))
        }
        Command::Rank {
            target,
            c_max,
            cert,
        } => {
            let q = inputs.target(target)?;
            let pool = direction_pool(q.field(), q.n(), seed)?;
            let rank = rank_via_derivatives(&q, *c_max, &pool)?;
            write_cert(cert.as_deref(), rank.certificate.as_ref())?;
            Ok(Outcome::ok(rank_json(&rank)))
        }
        Command::Reduce {
            target,
            factor,
            lookup,
            c_max,
            cert,
        } => {
            let q = inputs.target(target)?;
            let g = Factor::from_system(&inputs.system(factor)?)?;
            let lookup = match lookup {
                Some(digits) => parse_lookup(digits, g.field(), g.len())?,
                None => plurality_lookup(&q, &g)?,
            };
            let pool = direction_pool(q.field(), q.n(), seed)?;
            let out = avg_to_worst(&q, g.polys(), &lookup, *c_max, &pool)?;
            write_cert(cert.as_deref(), out.certificate.as_ref())?;
            Ok(Outcome::ok(json!({
                "lookup": lookup_json(&lookup),
                "approximation_bias": out.peel.approximation_bias,
                "alphas": out.peel.alphas,
                "peeled_bias": out.peel.peeled_bias,
                "residual": out.residual.to_string(),
                "rank": rank_json(&out.rank),
                "certified": out.certificate.as_ref().is_some_and(|c| c.verified),
                "certificate": out.certificate.as_ref().map(ComputationCertificate::to_json),
            })))
        }
        Command::Dixon { p, matrix } => {
            let a = parse_matrix(matrix, FieldSpec::new(*p)?)?;
            let r = bilinear_dixon_check(&a)?;
            Ok(Outcome::ok(json!({
                "bias_mag": r.bias_mag,
                "rank_a": r.rank_a,
                "rank_sym": r.rank_sym,
                "bilinear_law_holds": r.bilinear_law_holds,
                "quadratic_bias": r.quadratic_bias,
                "quadratic_law_holds": r.quadratic_law_holds,
            })))
        }
        Command::Test {
            target,
            degree,
            theta,
            samples,
            trials,
            transcript,
        } => {
            let mut q = inputs.target(target)?;
            let v = concise_test(&mut q, *degree, *theta, *samples, *trials, seed)?;
            if let Some(path) = transcript {
                std::fs::write(path, v.transcript_jsonl())
                    .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
            }
            let accept = v.decision == Decision::Accept;
            Ok(Outcome {
                result: json!({
                    "decision": if accept { "accept" } else { "reject" },
                    "phase": v.phase.as_str(),
                    "queries_used": v.queries_used,
                    "estimate": v.estimate.map(|e| json!({"re": e.estimate.re, "im": e.estimate.im, "radius": e.radius})),
                    "margin": v.margin,
                    "vacuous": v.vacuous,
                }),
                csv: None,
                exit: if accept { EXIT_OK } else { EXIT_REJECT },
            })
        }
    }
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::NoViolation => "no_violation",
        StopReason::SearchTruncated => "search_truncated",
        StopReason::IterationCap => "iteration_cap",
        StopReason::RemovalBlocked => "removal_blocked",
    }
}

fn lookup_json(l: &Lookup) -> Value {
    json!({"arity": l.arity(), "entries": l.entries(), "empty": l.empty()})
}

fn rank_json(r: &RankSearch) -> Value {
    json!({
        "c_max": r.c_max,
        "directions": r.directions,
        "distinct_derivatives": r.distinct_derivatives,
        "subsets_checked": r.subsets_checked,
        "pool_insufficient": r.pool_insufficient,
        "rank_upper_bound": r.certificate.as_ref().map(ComputationCertificate::size),
        "certificate": r.certificate.as_ref().map(ComputationCertificate::to_json),
    })
}

fn write_cert(path: Option<&Path>, cert: Option<&ComputationCertificate>) -> Result<()> {
    if let (Some(path), Some(cert)) = (path, cert) {
        let mut text = serde_json::to_string_pretty(&cert.to_json()).unwrap_or_default();
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn parse_lookup(digits: &str, field: FieldSpec, arity: usize) -> Result<Lookup> {
    let entries = digits
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Invalid(format!("lookup: bad digit '{c}'")))
        })
        .collect::<Result<Vec<u8>>>()?;
    Lookup::from_entries(field, arity, entries, Vec::new())
}

/// Most frequent value of `q` on each region; empty regions map to 0.
fn plurality_lookup(q: &Polynomial, g: &Factor) -> Result<Lookup> {
    let p = g.field().modulus() as usize;
    let tables = g.tables()?;
    let target = q.tabulate()?;
    let regions = budget::check_table(p as u64, g.len())?;
    let mut counts = vec![0u64; regions * p];
    for (x, v) in target.values().iter().enumerate() {
        let region = tables
            .iter()
            .rev()
            .fold(0, |acc, t| acc * p + t.values()[x] as usize);
        counts[region * p + *v as usize] += 1;
    }
    let mut entries = Vec::with_capacity(regions);
    let mut empty = Vec::new();
    for (r, row) in counts.chunks(p).enumerate() {
        if row.iter().all(|&c| c == 0) {
            empty.push(r);
        }
        // First maximum: ties go to the smallest value.
        let best = row
            .iter()
            .enumerate()
            .fold(0, |b, (v, &c)| if c > row[b] { v } else { b });
        entries.push(best as u8);
    }
    Lookup::from_entries(g.field(), g.len(), entries, empty)
}

fn parse_matrix(text: &str, field: FieldSpec) -> Result<Matrix> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u64>()
                        .map_err(|_| Error::Invalid(format!("matrix: bad entry '{s}'")))
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(field, &rows)
}

/// `path,value` lines for every scalar in `v`.
fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), x, out);
                }
            }
            scalar => {
                out.push_str(prefix);
                out.push(',');
                match scalar {
                    Value::String(s) => out.push_str(s),
                    other => out.push_str(&other.to_string()),
                }
                out.push('\n');
            }
        }
    }
    let mut out = String::from("key,value\n");
    walk("", v, &mut out);
    out
}
