use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::lower::RealProblem;
use super::model::{BlockValue, ConicProblem};
use crate::error::Error;

/// Default feasibility tolerance.
pub const DEFAULT_EPS_FEAS: f64 = 1e-6;

/// A problem is declared infeasible when its minimal violation exceeds
/// this multiple of the feasibility tolerance.
pub const INFEASIBLE_FACTOR: f64 = 10.0;

/// What a solver returns for a lowered problem.
#[derive(Clone, Debug)]
pub struct RealSolution {
    pub blocks: Vec<DMatrix<f64>>,
    /// `‖A(X) - b‖₁` at the returned point.
    pub phase1_primal: f64,
    /// Lower bound on the minimal `‖A(X) - b‖₁` over `X ⪰ 0`.
    pub phase1_dual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub message: String,
}

/// A conic feasibility back end.
pub trait ConicSolver: Sync {
    fn name(&self) -> &str;
    fn solve(&self, problem: &RealProblem) -> Result<RealSolution, Error>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Feasible,
    Infeasible,
    Indeterminate,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Feasible => "Feasible",
            Self::Infeasible => "Infeasible",
            Self::Indeterminate => "Indeterminate",
        }
    }
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub solver: String,
    pub iterations: usize,
    pub converged: bool,
    /// Largest equality residual after re-substitution.
    pub residual: f64,
    /// Smallest eigenvalue over the re-substituted blocks.
    pub min_eigenvalue: f64,
    pub phase1_primal: f64,
    pub phase1_dual: f64,
    pub message: String,
}

impl Diagnostics {
    /// Minimal violation implied by the solver run.
    pub fn gap(&self) -> f64 {
        self.phase1_primal.min(self.phase1_dual)
    }
}

#[derive(Clone, Debug)]
pub struct FeasibilityVerdict {
    pub status: Status,
    /// Re-substituted point; a witness when `status` is `Feasible`.
    pub point: Option<Vec<BlockValue>>,
    pub infeasibility_gap: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl FeasibilityVerdict {
    pub fn witness(&self) -> Option<&[BlockValue]> {
        match self.status {
            Status::Feasible => self.point.as_deref(),
            _ => None,
        }
    }

    /// The status this run would receive under another tolerance.
    pub fn reclassify(&self, eps_feas: f64) -> Status {
        classify(&self.diagnostics, eps_feas)
    }

    fn from_diagnostics(diagnostics: Diagnostics, point: Option<Vec<BlockValue>>, eps_feas: f64) -> Self {
        let status = classify(&diagnostics, eps_feas);
        let infeasibility_gap = (status == Status::Infeasible).then(|| diagnostics.gap());
        Self {
            status,
            point,
            infeasibility_gap,
            diagnostics,
        }
    }
}

/// Feasible when the re-substituted point meets every equality and cone
/// constraint within `eps_feas`; Infeasible when the solver converged and
/// the minimal violation exceeds [`INFEASIBLE_FACTOR`]` · eps_feas`.
pub fn classify(d: &Diagnostics, eps_feas: f64) -> Status {
    if d.residual <= eps_feas && d.min_eigenvalue >= -eps_feas {
        Status::Feasible
    } else if d.converged && d.gap() > INFEASIBLE_FACTOR * eps_feas {
        Status::Infeasible
    } else {
        Status::Indeterminate
    }
}

pub fn solve(problem: &ConicProblem, eps_feas: f64, solver: &dyn ConicSolver) -> FeasibilityVerdict {
    let failed = |message: String| Diagnostics {
        solver: solver.name().to_string(),
        iterations: 0,
        converged: false,
        residual: f64::INFINITY,
        min_eigenvalue: f64::NEG_INFINITY,
        phase1_primal: f64::INFINITY,
        phase1_dual: f64::NEG_INFINITY,
        message,
    };
    if problem.row_count() == 0 {
        let point = problem.zero_point();
        let d = Diagnostics {
            residual: 0.0,
            min_eigenvalue: 0.0,
            phase1_primal: 0.0,
            phase1_dual: 0.0,
            converged: true,
            message: "no constraints".into(),
            ..failed(String::new())
        };
        return FeasibilityVerdict::from_diagnostics(d, Some(point), eps_feas);
    }
    let lowered = RealProblem::lower(problem);
    let sol = match solver.solve(&lowered) {
        Ok(s) => s,
        Err(e) => return FeasibilityVerdict::from_diagnostics(failed(e.to_string()), None, eps_feas),
    };
    let point = match RealProblem::lift(problem, &sol.blocks) {
        Ok(p) => p,
        Err(e) => return FeasibilityVerdict::from_diagnostics(failed(e.to_string()), None, eps_feas),
    };
    let residual = match problem.max_residual(&point) {
        Ok(r) => r,
        Err(e) => return FeasibilityVerdict::from_diagnostics(failed(e.to_string()), None, eps_feas),
    };
    let d = Diagnostics {
        solver: solver.name().to_string(),
        iterations: sol.iterations,
        converged: sol.converged,
        residual,
        min_eigenvalue: ConicProblem::min_eigenvalue(&point),
        phase1_primal: sol.phase1_primal,
        phase1_dual: sol.phase1_dual,
        message: sol.message,
    };
    FeasibilityVerdict::from_diagnostics(d, Some(point), eps_feas)
}
