//! Lowering of complex-Hermitian problems to real symmetric ones.
//!
//! A complex block `X = A + iB` becomes the real block
//! `Y = [[A, -B], [B, A]]` of twice the size; nonnegative scalars become
//! `1 × 1` blocks. Each `hvec` coordinate of `X` is written as a linear
//! functional of `Y` that averages the two redundant copies.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::model::{hvec_offdiag, BlockKind, BlockValue, ConicProblem};
use crate::error::Error;
use crate::tensor::ComplexMatrix;

/// `v · Y[r, s]` with `r <= s`, counted once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealBlockEntry {
    pub block: usize,
    pub r: usize,
    pub s: usize,
    pub v: f64,
}

/// One real equality `Σ v Y_b[r, s] = b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealRow {
    /// Sorted by `(block, r, s)`.
    pub entries: Vec<RealBlockEntry>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealProblem {
    pub block_sizes: Vec<usize>,
    pub rows: Vec<RealRow>,
    pub rhs: Vec<f64>,
}

fn coordinate(n: usize, k: usize) -> [(usize, usize, f64); 2] {
    if k < n {
        return [(k, k, 0.5), (n + k, n + k, 0.5)];
    }
    let pair = (k - n) / 2;
    let mut p = 0;
    let mut start = 0;
    while start + (n - p - 1) <= pair {
        start += n - p - 1;
        p += 1;
    }
    let q = p + 1 + (pair - start);
    debug_assert_eq!(hvec_offdiag(n, p, q), n + 2 * pair);
    if (k - n) % 2 == 0 {
        [(p, q, 0.5), (n + p, n + q, 0.5)]
    } else {
        [(q, n + p, 0.5), (p, n + q, -0.5)]
    }
}

/// Per-coordinate embedded functionals for a block.
fn coordinate_table(kind: &BlockKind, n: usize) -> Vec<[(usize, usize, f64); 2]> {
    match kind {
        BlockKind::Psd(_) => (0..n * n).map(|k| coordinate(n, k)).collect(),
        BlockKind::Nonneg => vec![[(0, 0, 1.0), (0, 0, 0.0)]],
    }
}

impl RealProblem {
    pub fn lower(p: &ConicProblem) -> Self {
        let block_sizes: Vec<usize> = p
            .blocks()
            .iter()
            .map(|b| match b.kind {
                BlockKind::Psd(_) => 2 * b.size(),
                BlockKind::Nonneg => 1,
            })
            .collect();
        let tables: Vec<_> = p.blocks().iter().map(|b| coordinate_table(&b.kind, b.size())).collect();
        let row_starts: Vec<Vec<usize>> = p
            .maps()
            .iter()
            .map(|m| {
                let mut starts = vec![0; m.out_dim() + 1];
                for &(r, _, _) in m.entries() {
                    starts[r + 1] += 1;
                }
                for i in 0..m.out_dim() {
                    starts[i + 1] += starts[i];
                }
                starts
            })
            .collect();
        let mut rows = Vec::with_capacity(p.row_count());
        let mut rhs = Vec::with_capacity(p.row_count());
        for eq in p.equalities() {
            for (o, &b) in eq.rhs.iter().enumerate() {
                let mut entries = Vec::new();
                for t in &eq.terms {
                    let map = p.map(t.map);
                    let starts = &row_starts[t.map.0];
                    for &(_, c, v) in &map.entries()[starts[o]..starts[o + 1]] {
                        for &(r, s, w) in &tables[t.block.0][c] {
                            if w != 0.0 {
                                entries.push(RealBlockEntry {
                                    block: t.block.0,
                                    r,
                                    s,
                                    v: t.scale * v * w,
                                });
                            }
                        }
                    }
                }
                entries.sort_by(|a, b| (a.block, a.r, a.s).cmp(&(b.block, b.r, b.s)));
                let mut merged: Vec<RealBlockEntry> = Vec::with_capacity(entries.len());
                for e in entries {
                    match merged.last_mut() {
                        Some(m) if m.block == e.block && m.r == e.r && m.s == e.s => m.v += e.v,
                        _ => merged.push(e),
                    }
                }
                merged.retain(|e| e.v.abs() > 1e-15);
                rows.push(RealRow { entries: merged });
                rhs.push(b);
            }
        }
        Self { block_sizes, rows, rhs }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// `⟨A_i, Y⟩` for every row.
    pub fn apply(&self, y: &[DMatrix<f64>]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.entries.iter().map(|e| e.v * y[e.block][(e.r, e.s)]).sum())
            .collect()
    }

    /// `Σ_i w_i A_i` as symmetric blocks.
    pub fn adjoint(&self, w: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.block_sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (row, &wi) in self.rows.iter().zip(w) {
            if wi == 0.0 {
                continue;
            }
            for e in &row.entries {
                if e.r == e.s {
                    out[e.block][(e.r, e.r)] += wi * e.v;
                } else {
                    let h = 0.5 * wi * e.v;
                    out[e.block][(e.r, e.s)] += h;
                    out[e.block][(e.s, e.r)] += h;
                }
            }
        }
        out
    }

    /// Lift real blocks back to complex values of `p`'s blocks.
    pub fn lift(p: &ConicProblem, y: &[DMatrix<f64>]) -> Result<Vec<BlockValue>, Error> {
        if y.len() != p.blocks().len() {
            return Err(Error::DimensionMismatch("solution has the wrong number of blocks".into()));
        }
        p.blocks()
            .iter()
            .zip(y)
            .map(|(b, m)| match &b.kind {
                BlockKind::Psd(s) => {
                    let sym = (m + m.transpose()) * 0.5;
                    Ok(BlockValue::Hermitian(ComplexMatrix::from_real_embedding(&sym, s.clone())?))
                }
                BlockKind::Nonneg => Ok(BlockValue::Scalar(m[(0, 0)])),
            })
            .collect()
    }

    /// Embed complex block values.
    pub fn embed(p: &ConicProblem, point: &[BlockValue]) -> Result<Vec<DMatrix<f64>>, Error> {
        p.blocks()
            .iter()
            .zip(point)
            .map(|(_, v)| match v {
                BlockValue::Hermitian(m) => m.real_embed(),
                BlockValue::Scalar(t) => Ok(DMatrix::from_element(1, 1, *t)),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::model::{LinearMap, Term};
    use super::*;
    use crate::tensor::{qubit, Subsystem};
    use crate::C64;

    #[test]
    fn coordinates_cover_every_offdiagonal_pair() {
        let n = 4;
        let mut seen = vec![false; n * n];
        for p in 0..n {
            for q in p + 1..n {
                let k = hvec_offdiag(n, p, q);
                assert_eq!(coordinate(n, k)[0], (p, q, 0.5));
                assert_eq!(coordinate(n, k + 1)[0], (q, n + p, 0.5));
                seen[k] = true;
                seen[k + 1] = true;
            }
        }
        assert_eq!(seen.iter().filter(|b| **b).count(), n * (n - 1));
    }

    #[test]
    fn lowered_rows_agree_with_complex_residuals() {
        let s = vec![Subsystem::new("a", 2), Subsystem::new("b", 2)];
        let mut p = ConicProblem::new("t");
        let x = p.add_psd("x", s.clone());
        let t = p.add_nonneg("t");
        let tr = p.add_map(LinearMap::from_fn(&s, &s[1..], |m| m.partial_trace(&["b"])).unwrap());
        let emb = p.add_map(LinearMap::scalar_times(&qubit::pauli_y("b")));
        p.add_equality(
            "e",
            vec![
                Term { block: x, map: tr, scale: 2.0 },
                Term {
                    block: t,
                    map: emb,
                    scale: 1.0,
                },
            ],
            &qubit::pauli_x("b"),
        )
        .unwrap();
        let rho = ComplexMatrix::from_fn(s.clone(), |i, j| {
            if i == j {
                C64::new(0.25, 0.0)
            } else {
                C64::new(0.01 * (i + 2 * j) as f64, 0.02 * (i as f64 - j as f64))
            }
        })
        .unwrap()
        .hermitian_part();
        let point = vec![BlockValue::Hermitian(rho), BlockValue::Scalar(0.3)];
        let lowered = RealProblem::lower(&p);
        let y = RealProblem::embed(&p, &point).unwrap();
        let got: Vec<f64> = lowered.apply(&y).iter().zip(&lowered.rhs).map(|(a, b)| a - b).collect();
        let want: Vec<f64> = p.residuals(&point).unwrap().concat();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
        }
        let back = RealProblem::lift(&p, &y).unwrap();
        assert_eq!(back[1], BlockValue::Scalar(0.3));
        assert!(back[0].as_matrix().unwrap().max_abs_diff(point[0].as_matrix().unwrap()) < 1e-15);
    }

    #[test]
    fn adjoint_is_transpose_of_apply() {
        let s = vec![Subsystem::new("a", 2)];
        let mut p = ConicProblem::new("t");
        let x = p.add_psd("x", s.clone());
        let id = p.add_map(LinearMap::identity(4));
        p.add_equality("e", vec![Term { block: x, map: id, scale: 1.0 }], &qubit::identity("a"))
            .unwrap();
        let lowered = RealProblem::lower(&p);
        let w = [0.3, -0.2, 0.7, 1.1];
        let adj = lowered.adjoint(&w);
        let y = DMatrix::from_fn(4, 4, |i, j| 1.0 + (i * j) as f64 + (i + j) as f64);
        let lhs: f64 = lowered.apply(&[y.clone()]).iter().zip(&w).map(|(a, b)| a * b).sum();
        let rhs = adj[0].dot(&y);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
