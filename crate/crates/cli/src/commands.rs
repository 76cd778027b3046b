//! Subcommands. Each one reads its inputs from files, writes its primary
//! artifact to `--output` (or stdout) and reports on stdout, so pipelines need
//! no state besides the files they pass along.

use crate::formats::{self, InstanceFile, Meta, ParseError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use conhalving::circuit::CircuitError;
use conhalving::gcircuit::{self, ReductionError};
use conhalving::halving::{oracle_solve, CHInstance, CutPartition, HalvingError};
use conhalving::rational::{format_rational, parse_rational, to_f64, Rational};
use conhalving::sat::{self, SatError};
use conhalving::tucker::{self, SolveOptions, Strategy, TuckerError};
use num_traits::{Signed, Zero};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_USAGE,
        }
    }
}

impl From<TuckerError> for CliError {
    fn from(e: TuckerError) -> Self {
        match e {
            TuckerError::Invariant(_) | TuckerError::NoEdge | TuckerError::StepLimit(_) => CliError::Invariant(e.to_string()),
            TuckerError::Halving(_) | TuckerError::Parameter(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<HalvingError> for CliError {
    fn from(e: HalvingError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SatError> for CliError {
    fn from(e: SatError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "conhalving", version, about = "Exact consensus-halving: reductions, solver and verifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a generalized circuit or a CNF formula as an instance file.
    Encode(EncodeArgs),
    /// Find an approximate consensus-halving partition.
    Solve(SolveArgs),
    /// Check a partition against an instance.
    Verify(VerifyArgs),
    /// Read node values or a variable assignment back from a partition.
    Decode(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Circuit file: `nodes N` then `kind in1 in2 out alpha` per line.
    #[arg(long, conflicts_with = "cnf", required_unless_present = "cnf")]
    pub circuit: Option<PathBuf>,
    /// DIMACS CNF file with at most 3 literals per clause.
    #[arg(long)]
    pub cnf: Option<PathBuf>,
    /// Circuit tolerance (for CNF input, the tolerance the Boolean gadgets are built from).
    #[arg(long, value_parser = parse_rational_arg)]
    pub eps: Rational,
    /// Instance tolerance; defaults to min(eps/11, 1/40)/2 for circuits and
    /// half the largest admissible value for formulas.
    #[arg(long, value_parser = parse_rational_arg)]
    pub eps_prime: Option<Rational>,
    /// Lay out this many independent copies of the circuit side by side.
    #[arg(long, conflicts_with = "cnf")]
    pub replicate: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Walk,
    Exhaustive,
    Oracle,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// Target discrepancy; defaults to the tolerance stored with the reduction.
    #[arg(long, value_parser = parse_rational_arg)]
    pub eps: Option<Rational>,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    /// Cut budget for the oracle (defaults to the number of agents).
    #[arg(long)]
    pub cuts: Option<usize>,
    /// Grid size: triangulation size for the Tucker solver, cell count for the oracle.
    #[arg(long)]
    pub grid: Option<u64>,
    /// Only try the requested grid, not the coarser ones first.
    #[arg(long)]
    pub no_adaptive: bool,
    /// Step limit for the path-following walk.
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write the walk trace here (walk strategy only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write columnar density and cut data here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub partition: PathBuf,
    #[arg(long, value_parser = parse_rational_arg)]
    pub eps: Option<Rational>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub instance: PathBuf,
    pub partition: PathBuf,
}

fn parse_rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parsed<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn load_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let text = read(path)?;
    parsed(path, formats::parse_instance(&text))
}

fn load_partition(path: &Path, inst: &CHInstance) -> Result<CutPartition, CliError> {
    let text = read(path)?;
    parsed(path, formats::parse_partition(&text, inst.domain()))
}

/// The tolerance to check when none is given on the command line.
fn default_eps(file: &InstanceFile, given: Option<Rational>) -> Result<Rational, CliError> {
    let eps = match (given, &file.meta) {
        (Some(e), _) => e,
        (None, Some(Meta::Circuit { meta, .. })) => meta.instance_tolerance(),
        (None, Some(Meta::Sat { eps_prime, .. })) => eps_prime.clone(),
        (None, None) => return Err(CliError::Usage("--eps is required for an instance without reduction data".into())),
    };
    if !eps.is_positive() {
        return Err(CliError::Usage(format!("eps must be positive, got {}", format_rational(&eps))));
    }
    Ok(eps)
}

fn show(r: &Rational) -> String {
    format!("{} (~{:.6})", format_rational(r), to_f64(r))
}

/// Runs one subcommand, writing its report to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut String) -> Result<i32, CliError> {
    match cli.command {
        Command::Encode(a) => encode(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Decode(a) => decode(a, out),
    }
}

/// Emits `artifact` to `output`, or to stdout ahead of the report with the
/// report lines commented out so the stream stays a valid file.
fn emit(artifact: String, output: Option<&Path>, report: String, out: &mut String) -> Result<(), CliError> {
    match output {
        Some(p) => {
            write(p, &artifact)?;
            out.push_str(&report);
        }
        None => {
            out.push_str(&artifact);
            for line in report.lines() {
                writeln!(out, "# {line}").unwrap();
            }
        }
    }
    Ok(())
}

fn encode(a: EncodeArgs, out: &mut String) -> Result<i32, CliError> {
    if !a.eps.is_positive() {
        return Err(CliError::Usage("eps must be positive".into()));
    }
    let mut report = String::new();
    let file = if let Some(path) = &a.circuit {
        let circuit = parsed(path, formats::parse_circuit(&read(path)?))?;
        let eps_prime = match a.eps_prime {
            Some(e) => e,
            None => {
                let bound = (a.eps.clone() / Rational::from_integer(11.into())).min(Rational::new(1.into(), 40.into()));
                bound / Rational::from_integer(2.into())
            }
        };
        let enc = match a.replicate {
            Some(0) => return Err(CliError::Usage("--replicate needs at least one copy".into())),
            Some(k) => gcircuit::replicate(&circuit, k, &a.eps, &eps_prime)?,
            None => gcircuit::encode(&circuit, &a.eps, &eps_prime)?,
        };
        writeln!(report, "circuit nodes {} gates {}", circuit.num_nodes, circuit.gates.len()).unwrap();
        writeln!(report, "copies {}", enc.meta.copies).unwrap();
        writeln!(report, "eps_prime {}", format_rational(&eps_prime)).unwrap();
        InstanceFile { instance: enc.instance, meta: Some(Meta::Circuit { circuit, meta: enc.meta, eps: a.eps }) }
    } else {
        let path = a.cnf.as_ref().expect("clap requires --circuit or --cnf");
        let formula = parsed(path, formats::parse_cnf(&read(path)?))?;
        let eps_prime = match a.eps_prime {
            Some(e) => e,
            None => default_sat_eps_prime(&a.eps, formula.num_clauses()),
        };
        let red = sat::encode_sat(&formula, &a.eps, &eps_prime)?;
        let l = &red.sat.ledger;
        writeln!(report, "formula {formula}").unwrap();
        writeln!(
            report,
            "nodes inputs {} bool {} phi {} rebool {} total {}",
            l.inputs,
            l.bool_stage,
            l.phi_stage,
            l.rebool_stage,
            l.total()
        )
        .unwrap();
        writeln!(report, "cut budget {}", red.cut_budget()).unwrap();
        writeln!(report, "eps_prime {}", format_rational(&eps_prime)).unwrap();
        InstanceFile { instance: red.instance, meta: Some(Meta::Sat { formula, eps: a.eps, eps_prime }) }
    };
    let inst = &file.instance;
    let report = format!(
        "agents {}\ndomain [{}, {}]\nbound {}\n{report}",
        inst.num_agents(),
        format_rational(inst.domain().lo()),
        format_rational(inst.domain().hi()),
        format_rational(inst.bound())
    );
    emit(formats::write_instance(&file), a.output.as_deref(), report, out)?;
    Ok(EXIT_OK)
}

/// Half of `min(eps/11, 1/(90 m), 1/40)`, the strict upper bound on `eps'`.
fn default_sat_eps_prime(eps: &Rational, clauses: usize) -> Rational {
    let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let m = clauses.max(1) as i64;
    let bound = (eps.clone() / r(11, 1)).min(r(1, 90 * m)).min(r(1, 40));
    bound / r(2, 1)
}

fn solve(a: SolveArgs, out: &mut String) -> Result<i32, CliError> {
    let file = load_instance(&a.instance)?;
    let inst = &file.instance;
    let eps = default_eps(&file, a.eps)?;
    let n = inst.num_agents();
    let mut report = String::new();
    let partition = if a.strategy == StrategyArg::Oracle {
        let cuts = a.cuts.unwrap_or(n);
        let cells = match a.grid {
            Some(g) => g,
            None => tucker::guaranteed_grid(inst, &eps)?.max(1) as u64,
        };
        writeln!(report, "strategy oracle").unwrap();
        writeln!(report, "cut budget {cuts}").unwrap();
        writeln!(report, "grid {cells} cells, mesh {}", format_rational(&(inst.domain().length() / Rational::from_integer(cells.into())))).unwrap();
        match oracle_solve(inst, &eps, cuts, cells)? {
            Some(p) => p,
            None => {
                writeln!(out, "NOT_FOUND: no partition with at most {cuts} cuts on a grid of {cells} cells is within {}", format_rational(&eps)).unwrap();
                out.push_str(&report);
                return Ok(EXIT_FALSE);
            }
        }
    } else {
        if let Some(k) = a.cuts {
            if k != n {
                return Err(CliError::Usage(format!(
                    "the Tucker solver always uses n = {n} cuts; use --strategy oracle for a budget of {k}"
                )));
            }
        }
        let mut opts = SolveOptions {
            strategy: match a.strategy {
                StrategyArg::Walk => Strategy::Walk,
                StrategyArg::Exhaustive => Strategy::Exhaustive,
                _ => Strategy::Auto,
            },
            adaptive: !a.no_adaptive,
            grid: a.grid.map(|g| i32::try_from(g).map_err(|_| CliError::Usage(format!("grid {g} is too large")))).transpose()?,
            ..SolveOptions::default()
        };
        opts.walk.record_trace = a.trace.is_some();
        if let Some(s) = a.max_steps {
            opts.walk.max_steps = s;
        }
        let r = tucker::solve(inst, &eps, &opts)?;
        let strategy = match r.strategy {
            Strategy::Walk => "walk",
            Strategy::Exhaustive => "exhaustive",
            Strategy::Auto => "auto",
        };
        writeln!(report, "strategy {strategy}").unwrap();
        let attempts: Vec<String> = r.attempts.iter().map(|g| g.to_string()).collect();
        writeln!(report, "grid {} (guaranteed {}, attempts {})", r.grid, r.guaranteed_grid, attempts.join(",")).unwrap();
        writeln!(report, "mesh {}", format_rational(&(inst.domain().length() / Rational::from_integer(r.grid.into())))).unwrap();
        match r.steps {
            Some(s) => writeln!(report, "walk length {s}").unwrap(),
            None => writeln!(report, "walk length -").unwrap(),
        }
        if let Some(path) = &a.trace {
            if r.trace.is_empty() && r.steps.is_none() {
                return Err(CliError::Usage("--trace needs the walk; pass --strategy walk".into()));
            }
            write(path, &formats::write_trace(&r.trace))?;
        }
        r.partition
    };
    writeln!(report, "cuts {}", partition.num_cuts()).unwrap();
    let (table, worst) = discrepancy_table(inst, &partition);
    report.push_str(&table);
    writeln!(report, "max discrepancy {} within eps {}", show(&worst), format_rational(&eps)).unwrap();
    if let Some(path) = &a.plot {
        write(path, &formats::write_plot(inst, &partition))?;
    }
    if !inst.is_eps_solution(&partition, &eps) {
        return Err(CliError::Invariant(format!("solver returned a partition with discrepancy {}", format_rational(&worst))));
    }
    emit(formats::write_partition(&partition), a.output.as_deref(), report, out)?;
    Ok(EXIT_OK)
}

/// `agent plus minus discrepancy` rows and the largest discrepancy.
fn discrepancy_table(inst: &CHInstance, p: &CutPartition) -> (String, Rational) {
    let mut s = String::from("agent plus minus discrepancy\n");
    let mut worst = Rational::zero();
    for (i, (plus, minus)) in inst.eval_partition(p).into_iter().enumerate() {
        let d = (&plus - &minus).abs();
        writeln!(s, "{i} {} {} {}", format_rational(&plus), format_rational(&minus), show(&d)).unwrap();
        if d > worst {
            worst = d;
        }
    }
    (s, worst)
}

fn verify(a: VerifyArgs, out: &mut String) -> Result<i32, CliError> {
    let file = load_instance(&a.instance)?;
    let inst = &file.instance;
    let eps = default_eps(&file, a.eps)?;
    let p = load_partition(&a.partition, inst)?;
    let (table, _) = discrepancy_table(inst, &p);
    out.push_str(&table);
    writeln!(out, "cuts {}", p.num_cuts()).unwrap();
    let worst = inst
        .discrepancies(&p)
        .into_iter()
        .enumerate()
        .max_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)));
    match worst {
        Some((i, d)) if d > eps => {
            writeln!(out, "FAIL: agent {i} has discrepancy {} > eps {}", show(&d), format_rational(&eps)).unwrap();
            Ok(EXIT_FALSE)
        }
        _ => {
            writeln!(out, "OK: every agent is within eps {}", format_rational(&eps)).unwrap();
            Ok(EXIT_OK)
        }
    }
}

fn decode(a: DecodeArgs, out: &mut String) -> Result<i32, CliError> {
    let file = load_instance(&a.instance)?;
    let p = load_partition(&a.partition, &file.instance)?;
    match &file.meta {
        None => Err(CliError::Usage("instance file carries no reduction data to decode with".into())),
        Some(Meta::Circuit { circuit, meta, eps }) => {
            let decoded = if meta.copies > 1 {
                gcircuit::extract_copy(meta, &p).map(|(copy, d)| {
                    writeln!(out, "copy {copy}").unwrap();
                    d
                })
            } else {
                gcircuit::decode(meta, &p)
            };
            let d = match decoded {
                Ok(d) => d,
                Err(e) => {
                    writeln!(out, "DECODE_FAIL: {e}").unwrap();
                    return Ok(EXIT_FALSE);
                }
            };
            for (i, x) in d.x.iter().enumerate() {
                writeln!(out, "x{i} {}", show(x)).unwrap();
            }
            let bad = circuit.check_solution(&d.x, eps)?;
            if bad.is_empty() {
                writeln!(out, "OK: every gate holds within eps {}", format_rational(eps)).unwrap();
                Ok(EXIT_OK)
            } else {
                let list: Vec<String> = bad.iter().map(|g| g.to_string()).collect();
                writeln!(out, "FAIL: gates {} are violated at eps {}", list.join(","), format_rational(eps)).unwrap();
                Ok(EXIT_FALSE)
            }
        }
        Some(Meta::Sat { formula, eps, eps_prime }) => {
            let red = sat::encode_sat(formula, eps, eps_prime)?;
            if red.instance != file.instance {
                return Err(CliError::Usage("instance does not match the encoding of its formula".into()));
            }
            let assignment = match sat::decode_assignment(&red, &p) {
                Ok(v) => v,
                Err(SatError::DecodeFail { var, value }) => {
                    let block = red.sat.inputs[var - 1];
                    writeln!(out, "DECODE_FAIL: block {block} (variable x{var}) reads {}", show(&value)).unwrap();
                    return Ok(EXIT_FALSE);
                }
                Err(SatError::Unsatisfied) => {
                    writeln!(out, "FAIL: the rounded assignment does not satisfy the formula").unwrap();
                    return Ok(EXIT_FALSE);
                }
                Err(SatError::Reduction(e)) => {
                    writeln!(out, "DECODE_FAIL: {e}").unwrap();
                    return Ok(EXIT_FALSE);
                }
                Err(e) => return Err(e.into()),
            };
            for (i, v) in assignment.iter().enumerate() {
                writeln!(out, "x{} {}", i + 1, if *v { "true" } else { "false" }).unwrap();
            }
            writeln!(out, "OK: assignment satisfies the formula").unwrap();
            Ok(EXIT_OK)
        }
    }
}
