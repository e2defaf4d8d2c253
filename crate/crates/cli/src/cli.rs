//! Argument parsing and command dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use losr_core::assemblage::AssemblageKind;
use losr_core::catalog::CatalogName;
use losr_core::functionals::{evaluate, make_sptp};
use losr_core::sdp::sample::{sample_free_with, Mixture};
use losr_core::sdp::{Alphabets, Dims, FeasibilityVerdict, Status};

use crate::engine::{convert, exit_code, free_test, membership, EngineError, RunOptions, SolverChoice};
use crate::graph::explore;
use crate::io::{to_json_string, write_assemblage, IoError};
use crate::sets::{resolve, resolve_set, SetError};

#[derive(Debug, Parser)]
#[command(name = "losr", version, about = "Free-ness, convertibility and quantum membership tests for EPR assemblages")]
pub struct Cli {
    /// Feasibility tolerance on residuals and eigenvalues.
    #[arg(long, global = true, default_value_t = losr_core::sdp::DEFAULT_EPS_FEAS)]
    pub eps_feas: f64,
    /// Seed for sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for pairwise exploration (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write every solved program in SDPA sparse format into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub dump_sdp: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = SolverChoice::Ipm)]
    pub solver: SolverChoice,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FunctionalName {
    Sptp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Channel,
    Bwi,
    Mdi,
}

impl From<KindArg> for AssemblageKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Channel => Self::Channel,
            KindArg::Bwi => Self::Bwi,
            KindArg::Mdi => Self::Mdi,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit a catalog assemblage as JSON.
    Catalog {
        name: Option<String>,
        /// List the fixed catalog names.
        #[arg(long)]
        list: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check the defining invariants of an assemblage (file or catalog name).
    Validate {
        input: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Decide whether an assemblage is LOSR-free.
    CheckFree { input: String },
    /// Decide whether one assemblage converts into another under LOSR.
    Convert {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Explore all pairwise conversions and write the graph in DOT.
    Preorder {
        #[arg(long, num_args = 1.., required = true)]
        set: Vec<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Level-1 moment-matrix membership test for MDI assemblages.
    Membership { input: String },
    /// Evaluate a linear functional on a Bob-with-input assemblage.
    Functional {
        #[arg(long, value_enum)]
        name: FunctionalName,
        input: String,
    },
    /// Draw a random LOSR-free assemblage.
    SampleFree {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 2)]
        na: usize,
        #[arg(long, default_value_t = 2)]
        nx: usize,
        #[arg(long, default_value_t = 2)]
        ny: usize,
        #[arg(long, default_value_t = 2)]
        nb: usize,
        #[arg(long, default_value_t = 2)]
        d_in: usize,
        #[arg(long, default_value_t = 2)]
        d_out: usize,
        /// Number of values of the shared variable.
        #[arg(long, default_value_t = 3)]
        lambdas: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Core(#[from] losr_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

fn report_diagnostics(out: &mut dyn Write, v: &FeasibilityVerdict) -> std::io::Result<()> {
    let d = &v.diagnostics;
    writeln!(out, "solver: {} ({} iterations, {})", d.solver, d.iterations, d.message)?;
    writeln!(out, "residual: {:e}", d.residual)?;
    writeln!(out, "min eigenvalue: {:e}", d.min_eigenvalue)?;
    if let Some(g) = v.infeasibility_gap {
        writeln!(out, "infeasibility gap: {g:e}")?;
    } else {
        writeln!(out, "phase-1 bounds: primal {:e}, dual {:e}", d.phase1_primal, d.phase1_dual)?;
    }
    Ok(())
}

fn emit(out: &mut dyn Write, text: &str, path: Option<&PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| IoError::File { path: p.clone(), source })?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Run a parsed command, returning the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let opts = RunOptions {
        eps_feas: cli.eps_feas,
        dump_dir: cli.dump_sdp.clone(),
    };
    if !(cli.eps_feas > 0.0) {
        return Err(CliError::Usage("--eps-feas must be positive".into()));
    }
    match &cli.command {
        Command::Catalog { name, list, out: path } => {
            if *list {
                for n in CatalogName::FIXED {
                    writeln!(out, "{n}")?;
                }
                writeln!(out, "r:<x|y|z>:<angle>")?;
                return Ok(0);
            }
            let name = name.as_deref().ok_or_else(|| CliError::Usage("catalog needs a name or --list".into()))?;
            let a = losr_core::catalog::catalog(name)?;
            match path {
                Some(p) => write_assemblage(&a, p)?,
                None => out.write_all(to_json_string(&a).as_bytes())?,
            }
            Ok(0)
        }
        Command::Validate { input, tol } => {
            let node = resolve(input)?;
            let report = node.assemblage.validate(*tol);
            for c in &report.checks {
                writeln!(out, "{} {}: {:e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.residual)?;
            }
            if report.all_passed() {
                writeln!(out, "valid {} assemblage", node.assemblage.kind().as_str())?;
                Ok(0)
            } else {
                writeln!(out, "invalid")?;
                Ok(1)
            }
        }
        Command::CheckFree { input } => {
            let node = resolve(input)?;
            let solver = cli.solver.instantiate()?;
            let v = free_test(&node.assemblage, &node.id, solver.as_ref(), &opts)?;
            let tag = match v.status {
                Status::Feasible => "Feasible (LOSR-free)",
                Status::Infeasible => "Infeasible (not LOSR-free)",
                Status::Indeterminate => "Indeterminate",
            };
            writeln!(out, "{tag}")?;
            report_diagnostics(out, &v)?;
            Ok(exit_code(v.status))
        }
        Command::Convert { from, to } => {
            let src = resolve(from)?;
            let dst = resolve(to)?;
            let solver = cli.solver.instantiate()?;
            let label = format!("convert_{}_to_{}", src.id, dst.id);
            let o = convert(&src.assemblage, &dst.assemblage, &label, solver.as_ref(), &opts)?;
            writeln!(out, "{}", o.verdict.status)?;
            report_diagnostics(out, &o.verdict)?;
            if let Some(dev) = o.deviation {
                writeln!(out, "witness image deviation: {dev:e}")?;
            }
            Ok(exit_code(o.verdict.status))
        }
        Command::Preorder { set, out: path } => {
            let nodes = resolve_set(set)?;
            let solver = cli.solver.instantiate()?;
            let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let g = explore(&nodes, solver.as_ref(), &opts, jobs)?;
            emit(out, &g.to_dot(), path.as_ref())?;
            let arrows = g.edges().into_iter().filter(|(i, j)| i != j).count();
            let unresolved = g.indeterminate();
            if path.is_some() {
                writeln!(out, "{} nodes, {arrows} conversions, {} indeterminate", g.ids.len(), unresolved.len())?;
            }
            for (i, j) in &unresolved {
                writeln!(out, "indeterminate: {} -> {}", g.ids[*i], g.ids[*j])?;
            }
            let violations = g.transitivity_violations();
            if !violations.is_empty() {
                let list: Vec<String> = violations
                    .iter()
                    .map(|(i, j, k)| format!("{} -> {} -> {}", g.ids[*i], g.ids[*j], g.ids[*k]))
                    .collect();
                return Err(CliError::Usage(format!("transitivity violated among Feasible verdicts: {}", list.join("; "))));
            }
            Ok(if unresolved.is_empty() { 0 } else { 2 })
        }
        Command::Membership { input } => {
            let node = resolve(input)?;
            let n = node
                .assemblage
                .as_mdi()
                .ok_or_else(|| CliError::Usage(format!("membership needs an mdi assemblage, `{input}` is {}", node.assemblage.kind().as_str())))?;
            let solver = cli.solver.instantiate()?;
            let (c, v) = membership(n, &node.id, solver.as_ref(), &opts)?;
            writeln!(out, "{}", c.as_str())?;
            report_diagnostics(out, &v)?;
            Ok(exit_code(v.status))
        }
        Command::Functional { name, input } => {
            let node = resolve(input)?;
            let s = node
                .assemblage
                .as_bwi()
                .ok_or_else(|| CliError::Usage(format!("functionals act on bwi assemblages, `{input}` is {}", node.assemblage.kind().as_str())))?;
            let f = match name {
                FunctionalName::Sptp => make_sptp(),
            };
            writeln!(out, "{:.16e}", evaluate(&f, s)?)?;
            Ok(0)
        }
        Command::SampleFree {
            kind,
            na,
            nx,
            ny,
            nb,
            d_in,
            d_out,
            lambdas,
            out: path,
        } => {
            let al = Alphabets {
                na: *na,
                nx: *nx,
                ny: *ny,
                nb: *nb,
            };
            let dims = Dims { d_in: *d_in, d_out: *d_out };
            let mix = Mixture {
                lambdas: *lambdas,
                deterministic: false,
            };
            let a = sample_free_with(&mut losr_core::random::seeded(cli.seed), (*kind).into(), &al, &dims, &mix)?;
            match path {
                Some(p) => write_assemblage(&a, p)?,
                None => out.write_all(to_json_string(&a).as_bytes())?,
            }
            Ok(0)
        }
    }
}

/// Parse `argv` and run; usage and data errors exit with 1.
pub fn main_with(argv: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(std::iter::once("losr").chain(args.iter().copied()).map(String::from), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_catalog_name_exits_with_one() {
        let (code, _, err) = run(&["catalog", "sigma-nothing"]);
        assert_eq!(code, 1);
        assert!(err.contains("unknown catalog entry `sigma-nothing`"), "{err}");
    }

    #[test]
    fn bad_flags_exit_with_one() {
        assert_eq!(run(&["convert", "--from", "sigma-pr"]).0, 1);
        assert_eq!(run(&["--eps-feas", "-1", "check-free", "sigma-chsh"]).0, 1);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn catalog_list_names_entries() {
        let (code, out, _) = run(&["catalog", "--list"]);
        assert_eq!(code, 0);
        assert!(out.lines().any(|l| l == "sigma-aq"));
    }

    #[test]
    fn functional_prints_the_value() {
        let (code, out, _) = run(&["functional", "--name", "sptp", "sigma-pr"]);
        assert_eq!(code, 0);
        assert!((out.trim().parse::<f64>().unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(run(&["functional", "--name", "sptp", "n-pr"]).0, 1);
    }

    #[test]
    fn validate_reports_catalog_entries_valid() {
        let (code, out, _) = run(&["validate", "sigma-aq"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("valid bwi assemblage"));
    }
}
