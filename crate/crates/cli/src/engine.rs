//! Solver selection, SDPA dumps and the individual tests run by the commands.

use std::path::{Path, PathBuf};

use losr_core::assemblage::{Assemblage, MdiAssemblage};
use losr_core::membership::{build_membership_test, Certificate};
use losr_core::sdp::sdpa::to_sdpa;
use losr_core::sdp::{
    build_conversion, build_free_test, solve, AlternatingProjection, ConicProblem, ConicSolver, FeasibilityVerdict, InteriorPoint, RealProblem, Status,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverChoice {
    /// Primal-dual interior-point method.
    Ipm,
    /// Alternating projections; small problems only.
    Projection,
    /// Clarabel, when built with the `clarabel` feature.
    Clarabel,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("solver `{0}` is not available in this build")]
    Unavailable(&'static str),
    #[error("cannot write {path}: {source}")]
    Dump { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] losr_core::Error),
}

impl SolverChoice {
    pub fn instantiate(self) -> Result<Box<dyn ConicSolver>, EngineError> {
        match self {
            Self::Ipm => Ok(Box::new(InteriorPoint::default())),
            Self::Projection => Ok(Box::new(AlternatingProjection::default())),
            #[cfg(feature = "clarabel")]
            Self::Clarabel => Ok(Box::new(crate::clarabel_backend::Clarabel::default())),
            #[cfg(not(feature = "clarabel"))]
            Self::Clarabel => Err(EngineError::Unavailable("clarabel")),
        }
    }
}

/// Settings shared by every solve.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub eps_feas: f64,
    pub dump_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            eps_feas: losr_core::sdp::DEFAULT_EPS_FEAS,
            dump_dir: None,
        }
    }
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Write the lowered problem as `<dir>/<label>.dat-s`.
pub fn dump(problem: &ConicProblem, dir: &Path, label: &str) -> Result<PathBuf, EngineError> {
    let path = dir.join(format!("{}.dat-s", file_stem(label)));
    let text = to_sdpa(&RealProblem::lower(problem), &format!("{label}\n{problem}"));
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(&path, text))
        .map_err(|source| EngineError::Dump { path: path.clone(), source })?;
    Ok(path)
}

fn run(problem: &ConicProblem, label: &str, solver: &dyn ConicSolver, opts: &RunOptions) -> Result<FeasibilityVerdict, EngineError> {
    if let Some(dir) = &opts.dump_dir {
        dump(problem, dir, label)?;
    }
    Ok(solve(problem, opts.eps_feas, solver))
}

pub fn free_test(a: &Assemblage, label: &str, solver: &dyn ConicSolver, opts: &RunOptions) -> Result<FeasibilityVerdict, EngineError> {
    run(&build_free_test(a)?, &format!("free_{label}"), solver, opts)
}

#[derive(Clone, Debug)]
pub struct ConversionOutcome {
    pub verdict: FeasibilityVerdict,
    /// Largest deviation of the witness image from the target, when Feasible.
    pub deviation: Option<f64>,
}

pub fn convert(src: &Assemblage, dst: &Assemblage, label: &str, solver: &dyn ConicSolver, opts: &RunOptions) -> Result<ConversionOutcome, EngineError> {
    let conv = build_conversion(src, dst)?;
    let verdict = run(conv.problem(), label, solver, opts)?;
    let deviation = match verdict.witness() {
        Some(point) => Some(conv.image_deviation(src, dst, point)?),
        None => None,
    };
    Ok(ConversionOutcome { verdict, deviation })
}

pub fn membership(n: &MdiAssemblage, label: &str, solver: &dyn ConicSolver, opts: &RunOptions) -> Result<(Certificate, FeasibilityVerdict), EngineError> {
    let v = run(&build_membership_test(n)?, &format!("membership_{label}"), solver, opts)?;
    Ok((Certificate::from_status(v.status), v))
}

pub fn exit_code(s: Status) -> i32 {
    match s {
        Status::Indeterminate => 2,
        _ => 0,
    }
}
