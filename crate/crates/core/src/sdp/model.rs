//! Complex-Hermitian feasibility problems.
//!
//! A Hermitian `n × n` matrix is coordinatised by `hvec`: the `n` real
//! diagonal entries followed by `(Re, Im)` of every upper entry `p < q` in
//! row-major order. Linear maps between Hermitian spaces are stored as
//! sparse real matrices on these coordinates.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::Error;
use crate::tensor::{ComplexMatrix, Subsystem, HERMITIAN_TOL};
use crate::C64;

/// Entries below this magnitude are dropped from map matrices.
const DROP_TOL: f64 = 1e-14;

/// Length of `hvec` for an `n × n` matrix.
pub fn hvec_len(n: usize) -> usize {
    n * n
}

fn pair_index(n: usize, p: usize, q: usize) -> usize {
    p * n - p * (p + 1) / 2 + (q - p - 1)
}

/// Coordinate of `Re X[p,q]` (`p < q`); `Im` is the next one.
pub fn hvec_offdiag(n: usize, p: usize, q: usize) -> usize {
    n + 2 * pair_index(n, p, q)
}

/// Hermitian coordinates of `m`; the anti-Hermitian part is ignored.
pub fn hvec(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let mut v = vec![0.0; n * n];
    for p in 0..n {
        v[p] = m[(p, p)].re;
        for q in p + 1..n {
            let z = (m[(p, q)] + m[(q, p)].conj()) * 0.5;
            let k = hvec_offdiag(n, p, q);
            v[k] = z.re;
            v[k + 1] = z.im;
        }
    }
    v
}

pub fn hunvec(v: &[f64], n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for p in 0..n {
        m[(p, p)] = C64::new(v[p], 0.0);
        for q in p + 1..n {
            let k = hvec_offdiag(n, p, q);
            m[(p, q)] = C64::new(v[k], v[k + 1]);
            m[(q, p)] = C64::new(v[k], -v[k + 1]);
        }
    }
    m
}

/// Hermitian basis element dual to coordinate `k`.
pub fn hbasis(n: usize, k: usize) -> DMatrix<C64> {
    let mut v = vec![0.0; n * n];
    v[k] = 1.0;
    hunvec(&v, n)
}

/// Sparse real matrix acting on `hvec` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    in_dim: usize,
    out_dim: usize,
    /// `(row, col, value)` sorted by row, then column.
    entries: Vec<(usize, usize, f64)>,
}

impl LinearMap {
    pub fn from_entries(in_dim: usize, out_dim: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self, Error> {
        if entries.iter().any(|&(r, c, _)| r >= out_dim || c >= in_dim) {
            return Err(Error::DimensionMismatch("map entry out of range".into()));
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.2.abs() > DROP_TOL);
        Ok(Self {
            in_dim,
            out_dim,
            entries: merged,
        })
    }

    /// Matrix of a Hermiticity-preserving real-linear map, obtained by
    /// evaluating it on the Hermitian basis.
    pub fn from_fn(inputs: &[Subsystem], outputs: &[Subsystem], mut f: impl FnMut(&ComplexMatrix) -> Result<ComplexMatrix, Error>) -> Result<Self, Error> {
        let n_in: usize = inputs.iter().map(|s| s.dim).product();
        let n_out: usize = outputs.iter().map(|s| s.dim).product();
        let mut entries = Vec::new();
        for k in 0..hvec_len(n_in) {
            let basis = ComplexMatrix::new(hbasis(n_in, k), inputs.to_vec())?;
            let img = f(&basis)?;
            if img.dim() != n_out {
                return Err(Error::DimensionMismatch("map output has the wrong size".into()));
            }
            let defect = img.hermiticity_defect();
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
            for (r, v) in hvec(img.data()).into_iter().enumerate() {
                if v.abs() > DROP_TOL {
                    entries.push((r, k, v));
                }
            }
        }
        Self::from_entries(hvec_len(n_in), hvec_len(n_out), entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            entries: (0..dim).map(|k| (k, k, 1.0)).collect(),
        }
    }

    /// `t ↦ t · m` from a scalar.
    pub fn scalar_times(m: &ComplexMatrix) -> Self {
        let v = hvec(m.data());
        let out_dim = v.len();
        let entries = v.into_iter().enumerate().filter(|(_, x)| x.abs() > DROP_TOL).map(|(r, x)| (r, 0, x)).collect();
        Self { in_dim: 1, out_dim, entries }
    }

    /// `X ↦ tr X` to a scalar.
    pub fn trace(n: usize) -> Self {
        Self {
            in_dim: hvec_len(n),
            out_dim: 1,
            entries: (0..n).map(|p| (0, p, 1.0)).collect(),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn apply_add(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        for &(r, c, v) in &self.entries {
            out[r] += scale * v * x[c];
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim];
        self.apply_add(x, 1.0, &mut out);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MapId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub enum BlockKind {
    /// Complex Hermitian positive semidefinite matrix.
    Psd(Vec<Subsystem>),
    /// Nonnegative real scalar.
    Nonneg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
}

impl Block {
    /// Matrix dimension (1 for scalars).
    pub fn size(&self) -> usize {
        match &self.kind {
            BlockKind::Psd(s) => s.iter().map(|s| s.dim).product(),
            BlockKind::Nonneg => 1,
        }
    }

    pub fn coords(&self) -> usize {
        hvec_len(self.size())
    }
}

/// `scale · map(block)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub block: BlockId,
    pub map: MapId,
    pub scale: f64,
}

/// `Σ terms = rhs`, an equation between Hermitian matrices (or scalars).
#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub name: String,
    pub terms: Vec<Term>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Hermitian(ComplexMatrix),
    Scalar(f64),
}

impl BlockValue {
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Self::Hermitian(m) => hvec(m.data()),
            Self::Scalar(t) => vec![*t],
        }
    }

    pub fn as_matrix(&self) -> Option<&ComplexMatrix> {
        match self {
            Self::Hermitian(m) => Some(m),
            Self::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Self::Scalar(t) => Some(*t),
            Self::Hermitian(_) => None,
        }
    }

    /// Smallest eigenvalue, or the value itself for a scalar.
    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            Self::Hermitian(m) => m.min_eigenvalue(),
            Self::Scalar(t) => *t,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConicProblem {
    pub name: String,
    blocks: Vec<Block>,
    maps: Vec<LinearMap>,
    equalities: Vec<Equality>,
}

impl ConicProblem {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn add_psd(&mut self, name: impl Into<String>, subsystems: Vec<Subsystem>) -> BlockId {
        self.blocks.push(Block {
            name: name.into(),
            kind: BlockKind::Psd(subsystems),
        });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_nonneg(&mut self, name: impl Into<String>) -> BlockId {
        self.blocks.push(Block {
            name: name.into(),
            kind: BlockKind::Nonneg,
        });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_map(&mut self, map: LinearMap) -> MapId {
        self.maps.push(map);
        MapId(self.maps.len() - 1)
    }

    /// Add `Σ terms = rhs` after checking that every term maps its block
    /// into the space of `rhs`.
    pub fn add_equality(&mut self, name: impl Into<String>, terms: Vec<Term>, rhs: &ComplexMatrix) -> Result<(), Error> {
        let defect = rhs.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        self.push_equality(name.into(), terms, hvec(rhs.data()))
    }

    pub fn add_scalar_equality(&mut self, name: impl Into<String>, terms: Vec<Term>, rhs: f64) -> Result<(), Error> {
        self.push_equality(name.into(), terms, vec![rhs])
    }

    fn push_equality(&mut self, name: String, terms: Vec<Term>, rhs: Vec<f64>) -> Result<(), Error> {
        for t in &terms {
            let block = self
                .blocks
                .get(t.block.0)
                .ok_or_else(|| Error::InvalidMap(alloc::format!("{name}: unknown block")))?;
            let map = self.maps.get(t.map.0).ok_or_else(|| Error::InvalidMap(alloc::format!("{name}: unknown map")))?;
            if map.in_dim() != block.coords() || map.out_dim() != rhs.len() {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "{name}: term on block `{}` has the wrong shape",
                    block.name
                )));
            }
        }
        self.equalities.push(Equality { name, terms, rhs });
        Ok(())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.0]
    }

    pub fn maps(&self) -> &[LinearMap] {
        &self.maps
    }

    pub fn map(&self, id: MapId) -> &LinearMap {
        &self.maps[id.0]
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    /// Number of real equality rows.
    pub fn row_count(&self) -> usize {
        self.equalities.iter().map(|e| e.rhs.len()).sum()
    }

    pub fn find_block(&self, name: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b.name == name).map(BlockId)
    }

    /// All-zero assignment.
    pub fn zero_point(&self) -> Vec<BlockValue> {
        self.blocks
            .iter()
            .map(|b| match &b.kind {
                BlockKind::Psd(s) => BlockValue::Hermitian(ComplexMatrix::zeros(s.clone()).expect("valid block")),
                BlockKind::Nonneg => BlockValue::Scalar(0.0),
            })
            .collect()
    }

    /// `Σ terms - rhs` for every equality, in `hvec` coordinates.
    pub fn residuals(&self, point: &[BlockValue]) -> Result<Vec<Vec<f64>>, Error> {
        if point.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch("point has the wrong number of blocks".into()));
        }
        let coords: Vec<Vec<f64>> = point.iter().map(BlockValue::coords).collect();
        for (c, b) in coords.iter().zip(&self.blocks) {
            if c.len() != b.coords() {
                return Err(Error::DimensionMismatch(alloc::format!("value of block `{}` has the wrong size", b.name)));
            }
        }
        Ok(self
            .equalities
            .iter()
            .map(|e| {
                let mut acc: Vec<f64> = e.rhs.iter().map(|v| -v).collect();
                for t in &e.terms {
                    self.maps[t.map.0].apply_add(&coords[t.block.0], t.scale, &mut acc);
                }
                acc
            })
            .collect())
    }

    /// Largest absolute equality residual.
    pub fn max_residual(&self, point: &[BlockValue]) -> Result<f64, Error> {
        Ok(self.residuals(point)?.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Smallest eigenvalue over all blocks (scalars count as 1 × 1 blocks).
    pub fn min_eigenvalue(point: &[BlockValue]) -> f64 {
        point.iter().map(BlockValue::min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    /// Name of the equality owning global row `row`.
    pub fn row_owner(&self, row: usize) -> Option<(&str, usize)> {
        let mut offset = 0;
        for e in &self.equalities {
            if row < offset + e.rhs.len() {
                return Some((&e.name, row - offset));
            }
            offset += e.rhs.len();
        }
        None
    }
}

impl core::fmt::Display for ConicProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let psd = self.blocks.iter().filter(|b| matches!(b.kind, BlockKind::Psd(_))).count();
        write!(
            f,
            "{}: {} psd blocks, {} scalars, {} equalities ({} rows)",
            self.name,
            psd,
            self.blocks.len() - psd,
            self.equalities.len(),
            self.row_count()
        )
    }
}
