//! Clarabel as a [`ConicSolver`].
//!
//! The phase-1 program `min 1ᵀ(t⁺ + t⁻)` subject to
//! `A(Y) + t⁺ − t⁻ = b`, `Y ⪰ 0`, `t± ≥ 0` is passed in Clarabel's
//! `Ax + s = b, s ∈ K` form with `Y` in scaled upper-triangular coordinates.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use losr_core::sdp::{ConicSolver, RealProblem, RealSolution};
use losr_core::DMatrix;

extern crate openblas_src;

#[derive(Clone, Debug)]
pub struct Clarabel {
    pub max_iter: u32,
    pub tol: f64,
}

impl Default for Clarabel {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-10 }
    }
}

/// Column-major upper-triangle index of `(r, s)`, `r <= s`.
fn tri(r: usize, s: usize) -> usize {
    s * (s + 1) / 2 + r
}

fn columns(triplets: &mut [(usize, usize, f64)], m: usize, n: usize) -> CscMatrix<f64> {
    triplets.sort_by_key(|&(r, c, _)| (c, r));
    let mut counts = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(triplets.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(triplets.len());
    let mut last = None;
    for &(r, c, v) in triplets.iter() {
        if last == Some((r, c)) {
            *nzval.last_mut().expect("entry") += v;
            continue;
        }
        last = Some((r, c));
        rowval.push(r);
        nzval.push(v);
        counts[c + 1] += 1;
    }
    for c in 0..n {
        counts[c + 1] += counts[c];
    }
    CscMatrix::new(m, n, counts, rowval, nzval)
}

impl ConicSolver for Clarabel {
    fn name(&self) -> &str {
        "clarabel"
    }

    fn solve(&self, p: &RealProblem) -> Result<RealSolution, losr_core::Error> {
        let sqrt2 = std::f64::consts::SQRT_2;
        let m = p.rows.len();
        let mut offsets = Vec::with_capacity(p.block_sizes.len());
        let mut nvec = 0;
        for &n in &p.block_sizes {
            offsets.push(nvec);
            nvec += n * (n + 1) / 2;
        }
        let nvar = nvec + 2 * m;
        let mut a = Vec::new();
        for (i, row) in p.rows.iter().enumerate() {
            for e in &row.entries {
                let v = if e.r == e.s { e.v } else { e.v / sqrt2 };
                a.push((i, offsets[e.block] + tri(e.r, e.s), v));
            }
            a.push((i, nvec + i, 1.0));
            a.push((i, nvec + m + i, -1.0));
        }
        for k in 0..nvec {
            a.push((m + k, k, -1.0));
        }
        for k in 0..2 * m {
            a.push((m + nvec + k, nvec + k, -1.0));
        }
        let nrows = m + nvec + 2 * m;
        let a = columns(&mut a, nrows, nvar);
        let mut b = p.rhs.clone();
        b.resize(nrows, 0.0);
        let mut c = vec![0.0; nvar];
        c[nvec..].iter_mut().for_each(|v| *v = 1.0);
        let mut cones = vec![SupportedConeT::ZeroConeT(m)];
        cones.extend(p.block_sizes.iter().map(|&n| SupportedConeT::PSDTriangleConeT(n)));
        cones.push(SupportedConeT::NonnegativeConeT(2 * m));
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(self.max_iter)
            .tol_gap_abs(self.tol)
            .tol_gap_rel(self.tol)
            .tol_feas(self.tol)
            .build()
            .map_err(|e| losr_core::Error::Solver(format!("{e:?}")))?;
        let pm = CscMatrix::zeros((nvar, nvar));
        let mut solver = DefaultSolver::new(&pm, &c, &a, &b, &cones, settings).map_err(|e| losr_core::Error::Solver(format!("{e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        let blocks: Vec<DMatrix<f64>> = p
            .block_sizes
            .iter()
            .zip(&offsets)
            .map(|(&n, &o)| {
                DMatrix::from_fn(n, n, |r, s| {
                    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
                    let v = sol.x[o + tri(lo, hi)];
                    if r == s {
                        v
                    } else {
                        v / sqrt2
                    }
                })
            })
            .collect();
        let residual = p.apply(&blocks).iter().zip(&p.rhs).map(|(x, y)| (x - y).abs()).sum();
        let converged = matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved);
        Ok(RealSolution {
            blocks,
            phase1_primal: residual,
            phase1_dual: if converged { sol.obj_val_dual } else { f64::NEG_INFINITY },
            converged,
            iterations: sol.iterations as usize,
            message: format!("{:?}", sol.status),
        })
    }
}
