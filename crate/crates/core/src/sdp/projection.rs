//! Alternating projections between the PSD cone and the affine set
//! `{X : A(X) = b}`, for cross-checking the interior-point method on
//! small instances.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::lower::RealProblem;
use super::verdict::{ConicSolver, RealSolution};
use crate::error::Error;

#[derive(Clone, Debug)]
pub struct AlternatingProjection {
    pub max_iterations: usize,
    /// Stop when successive PSD iterates differ by less than this.
    pub tolerance: f64,
    /// Refuse problems with more matrix entries than this.
    pub max_entries: usize,
}

impl Default for AlternatingProjection {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            tolerance: 1e-13,
            max_entries: 4096,
        }
    }
}

struct Layout {
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut total = 0;
        for &n in sizes {
            offsets.push(total);
            total += n * n;
        }
        Self {
            offsets,
            sizes: sizes.to_vec(),
            total,
        }
    }

    fn index(&self, b: usize, r: usize, s: usize) -> usize {
        self.offsets[b] + r * self.sizes[b] + s
    }

    fn blocks(&self, v: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.sizes
            .iter()
            .zip(&self.offsets)
            .map(|(&n, &o)| DMatrix::from_fn(n, n, |r, s| v[o + r * n + s]))
            .collect()
    }
}

fn project_psd(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.symmetric_eigen();
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

impl ConicSolver for AlternatingProjection {
    fn name(&self) -> &str {
        "alternating-projection"
    }

    fn solve(&self, p: &RealProblem) -> Result<RealSolution, Error> {
        let layout = Layout::new(&p.block_sizes);
        if layout.total > self.max_entries {
            return Err(Error::Solver(format!(
                "{} matrix entries exceed the reference limit {}",
                layout.total, self.max_entries
            )));
        }
        let m = p.rows.len();
        let mut a: DMatrix<f64> = DMatrix::zeros(m, layout.total);
        for (i, row) in p.rows.iter().enumerate() {
            for e in &row.entries {
                if e.r == e.s {
                    a[(i, layout.index(e.block, e.r, e.r))] += e.v;
                } else {
                    a[(i, layout.index(e.block, e.r, e.s))] += 0.5 * e.v;
                    a[(i, layout.index(e.block, e.s, e.r))] += 0.5 * e.v;
                }
            }
        }
        let b = DVector::from_column_slice(&p.rhs);
        let gram = (&a * a.transpose()).pseudo_inverse(1e-12).map_err(|e: &str| Error::Solver(e.into()))?;
        let project_affine = |x: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
            let u = &gram * (&a * x - &b);
            (x - a.transpose() * &u, u)
        };
        let project_cone = |x: &DVector<f64>| -> DVector<f64> {
            let blocks = layout.blocks(x);
            let mut out = DVector::zeros(layout.total);
            for (k, blk) in blocks.into_iter().enumerate() {
                let n = layout.sizes[k];
                let sym = (&blk + blk.transpose()) * 0.5;
                let q = project_psd(sym);
                for r in 0..n {
                    for s in 0..n {
                        out[layout.index(k, r, s)] = q[(r, s)];
                    }
                }
            }
            out
        };
        let mut x = project_cone(&project_affine(&DVector::zeros(layout.total)).0);
        let mut u = DVector::zeros(m);
        let mut converged = false;
        let mut iterations = 0;
        for it in 0..self.max_iterations {
            iterations = it + 1;
            let (xa, ua) = project_affine(&x);
            let next = project_cone(&xa);
            let step = (&next - &x).amax();
            x = next;
            u = ua;
            if step < self.tolerance {
                converged = true;
                break;
            }
        }
        let phase1_primal = (&a * &x - &b).abs().sum();
        // y = -u satisfies Aᵀ y ⪯ 0 at a nearest pair; scale into the ℓ∞ ball.
        let y = -&u;
        let scale = y.amax();
        let phase1_dual = if scale > 0.0 {
            let aty = layout.blocks(&(a.transpose() * &y));
            let worst = aty.iter().map(max_eigenvalue).fold(0.0f64, f64::max);
            let norm = aty.iter().map(|m| m.amax()).fold(0.0f64, f64::max);
            if worst <= 1e-6 * norm.max(1e-300) {
                b.dot(&y) / scale
            } else {
                f64::NEG_INFINITY
            }
        } else {
            0.0
        };
        Ok(RealSolution {
            blocks: layout.blocks(&x),
            phase1_primal,
            phase1_dual,
            converged,
            iterations,
            message: if converged {
                "projections converged".into()
            } else {
                "iteration limit reached".into()
            },
        })
    }
}
