//! Primal-dual interior-point method for the phase-1 problem
//!
//! ```text
//! min  Σ (r⁺ + r⁻) + ε Σ tr X   s.t.  A(X) - r⁺ + r⁻ = b,  X ⪰ 0,  r± ≥ 0
//! ```
//!
//! using the HKM search direction with a Mehrotra predictor-corrector.
//! The Schur complement is assembled block by block and factorised with
//! an arrow structure: rows touching few blocks are grouped into
//! independent clusters, the remaining rows form a dense border.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::lower::RealProblem;
use super::verdict::{ConicSolver, RealSolution};
use crate::error::Error;

/// Solver settings.
#[derive(Clone, Debug)]
pub struct InteriorPoint {
    /// Weight of the trace regulariser.
    pub trace_weight: f64,
    pub max_iterations: usize,
    /// Target for the infeasibilities and the complementarity gap.
    pub tolerance: f64,
    /// Stop as soon as `‖A(X) - b‖∞` falls below this value.
    pub feasibility_target: f64,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
    /// Rows touching at most this many blocks are clustered.
    pub local_row_limit: usize,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self {
            trace_weight: 1e-8,
            max_iterations: 120,
            tolerance: 1e-10,
            feasibility_target: 1e-11,
            step_fraction: 0.98,
            local_row_limit: 4,
        }
    }
}

/// Row `k` restricted to one block, with indices into its support.
struct Touch {
    row: usize,
    /// `(r, s, v, r_local, s_local)`.
    entries: Vec<(usize, usize, f64, usize, usize)>,
    support: Vec<usize>,
}

#[derive(Clone, Copy)]
enum RowClass {
    Local { cluster: usize, pos: usize },
    Global { pos: usize },
}

struct Structure {
    touches: Vec<Vec<Touch>>,
    class: Vec<RowClass>,
    cluster_sizes: Vec<usize>,
    globals: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl Structure {
    fn new(p: &RealProblem, local_limit: usize) -> Self {
        let nb = p.block_sizes.len();
        let m = p.rows.len();
        let mut touches: Vec<Vec<Touch>> = (0..nb).map(|_| Vec::new()).collect();
        let mut row_blocks: Vec<Vec<usize>> = Vec::with_capacity(m);
        for (i, row) in p.rows.iter().enumerate() {
            let mut blocks = Vec::new();
            let mut start = 0;
            while start < row.entries.len() {
                let b = row.entries[start].block;
                let mut end = start;
                while end < row.entries.len() && row.entries[end].block == b {
                    end += 1;
                }
                let mut support: Vec<usize> = row.entries[start..end].iter().flat_map(|e| [e.r, e.s]).collect();
                support.sort_unstable();
                support.dedup();
                let pos = |x: usize| support.binary_search(&x).unwrap();
                let entries = row.entries[start..end].iter().map(|e| (e.r, e.s, e.v, pos(e.r), pos(e.s))).collect();
                touches[b].push(Touch { row: i, entries, support });
                blocks.push(b);
                start = end;
            }
            row_blocks.push(blocks);
        }
        // Union blocks linked by local rows.
        let mut parent: Vec<usize> = (0..nb).collect();
        for blocks in &row_blocks {
            if blocks.len() <= local_limit {
                for w in blocks.windows(2) {
                    let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut cluster_of_root = vec![usize::MAX; nb];
        let mut cluster_sizes = Vec::new();
        let mut globals = 0;
        let mut class = Vec::with_capacity(m);
        for blocks in &row_blocks {
            if blocks.len() > local_limit {
                class.push(RowClass::Global { pos: globals });
                globals += 1;
                continue;
            }
            let cluster = match blocks.first() {
                Some(&b) => {
                    let root = find(&mut parent, b);
                    if cluster_of_root[root] == usize::MAX {
                        cluster_of_root[root] = cluster_sizes.len();
                        cluster_sizes.push(0);
                    }
                    cluster_of_root[root]
                }
                None => {
                    cluster_sizes.push(0);
                    cluster_sizes.len() - 1
                }
            };
            class.push(RowClass::Local {
                cluster,
                pos: cluster_sizes[cluster],
            });
            cluster_sizes[cluster] += 1;
        }
        Self {
            touches,
            class,
            cluster_sizes,
            globals,
        }
    }
}

/// Schur complement in arrow form.
struct Schur {
    diag: Vec<DMatrix<f64>>,
    border: Vec<DMatrix<f64>>,
    corner: DMatrix<f64>,
}

struct Factor {
    diag: Vec<Cholesky<f64, Dyn>>,
    /// `L_c⁻¹ V_c`.
    border: Vec<DMatrix<f64>>,
    corner: Option<Cholesky<f64, Dyn>>,
}

impl Schur {
    fn zeros(s: &Structure) -> Self {
        Self {
            diag: s.cluster_sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect(),
            border: s.cluster_sizes.iter().map(|&n| DMatrix::zeros(n, s.globals)).collect(),
            corner: DMatrix::zeros(s.globals, s.globals),
        }
    }

    fn add(&mut self, s: &Structure, i: usize, k: usize, v: f64) {
        match (s.class[i], s.class[k]) {
            (RowClass::Local { cluster, pos: a }, RowClass::Local { pos: b, .. }) => {
                self.diag[cluster][(a, b)] += v;
                if a != b {
                    self.diag[cluster][(b, a)] += v;
                }
            }
            (RowClass::Local { cluster, pos: a }, RowClass::Global { pos: g }) | (RowClass::Global { pos: g }, RowClass::Local { cluster, pos: a }) => {
                self.border[cluster][(a, g)] += v;
            }
            (RowClass::Global { pos: a }, RowClass::Global { pos: b }) => {
                self.corner[(a, b)] += v;
                if a != b {
                    self.corner[(b, a)] += v;
                }
            }
        }
    }

    fn add_diag(&mut self, s: &Structure, i: usize, v: f64) {
        match s.class[i] {
            RowClass::Local { cluster, pos } => self.diag[cluster][(pos, pos)] += v,
            RowClass::Global { pos } => self.corner[(pos, pos)] += v,
        }
    }

    fn factor(self) -> Result<Factor, Error> {
        let mut diag = Vec::with_capacity(self.diag.len());
        let mut border = Vec::with_capacity(self.diag.len());
        let mut corner = self.corner;
        for (d, v) in self.diag.into_iter().zip(self.border) {
            let ch = robust_cholesky(d)?;
            let w = if v.ncols() > 0 && v.nrows() > 0 {
                ch.l_dirty()
                    .solve_lower_triangular(&v)
                    .ok_or_else(|| Error::Solver("singular cluster factor".into()))?
            } else {
                v
            };
            if w.ncols() > 0 && w.nrows() > 0 {
                corner.gemm_tr(-1.0, &w, &w, 1.0);
            }
            diag.push(ch);
            border.push(w);
        }
        let corner = if corner.nrows() > 0 { Some(robust_cholesky(corner)?) } else { None };
        Ok(Factor { diag, border, corner })
    }
}

/// Cholesky with a growing diagonal shift when the matrix is numerically
/// semidefinite.
fn robust_cholesky(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, Error> {
    let n = m.nrows();
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0f64, f64::max).max(1e-300);
    let mut shift = 1e-14 * scale;
    for _ in 0..12 {
        let mut s = m.clone();
        for i in 0..n {
            s[(i, i)] += shift;
        }
        if let Some(c) = Cholesky::new(s) {
            return Ok(c);
        }
        shift *= 100.0;
    }
    Err(Error::Solver("Schur complement is not positive definite".into()))
}

impl Factor {
    fn solve(&self, s: &Structure, rhs: &[f64]) -> Vec<f64> {
        let mut local: Vec<DVector<f64>> = s.cluster_sizes.iter().map(|&n| DVector::zeros(n)).collect();
        let mut global = DVector::zeros(s.globals);
        for (i, c) in s.class.iter().enumerate() {
            match *c {
                RowClass::Local { cluster, pos } => local[cluster][pos] = rhs[i],
                RowClass::Global { pos } => global[pos] = rhs[i],
            }
        }
        let mut u: Vec<DVector<f64>> = Vec::with_capacity(local.len());
        for (c, h) in local.iter().enumerate() {
            let l = self.diag[c].l_dirty();
            let mut x = h.clone();
            l.solve_lower_triangular_mut(&mut x);
            if s.globals > 0 && x.len() > 0 {
                global.gemv_tr(-1.0, &self.border[c], &x, 1.0);
            }
            u.push(x);
        }
        if let Some(ch) = &self.corner {
            ch.solve_mut(&mut global);
        }
        let mut out = vec![0.0; rhs.len()];
        let mut yl: Vec<DVector<f64>> = Vec::with_capacity(u.len());
        for (c, mut x) in u.into_iter().enumerate() {
            if s.globals > 0 && x.len() > 0 {
                x.gemv(-1.0, &self.border[c], &global, 1.0);
            }
            let l = self.diag[c].l_dirty();
            l.tr_solve_lower_triangular_mut(&mut x);
            yl.push(x);
        }
        for (i, c) in s.class.iter().enumerate() {
            out[i] = match *c {
                RowClass::Local { cluster, pos } => yl[cluster][pos],
                RowClass::Global { pos } => global[pos],
            };
        }
        out
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α ΔX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l_dirty();
    let p = match l.solve_lower_triangular(dx) {
        Some(p) => p,
        None => return 0.0,
    };
    let w = match l.solve_lower_triangular(&p.transpose()) {
        Some(w) => w,
        None => return 0.0,
    };
    let lam = sym(&w).symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn max_step_lp(x: &[f64], dx: &[f64]) -> f64 {
    x.iter().zip(dx).filter(|(_, d)| **d < 0.0).map(|(x, d)| -x / d).fold(f64::INFINITY, f64::min)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dy: Vec<f64>,
    drp: Vec<f64>,
    drm: Vec<f64>,
    dwp: Vec<f64>,
    dwm: Vec<f64>,
}

struct State {
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    y: Vec<f64>,
    rp: Vec<f64>,
    rm: Vec<f64>,
    wp: Vec<f64>,
    wm: Vec<f64>,
}

impl InteriorPoint {
    fn assemble(&self, s: &Structure, st: &State, zinv: &[DMatrix<f64>]) -> Schur {
        let mut schur = Schur::zeros(s);
        for (b, touches) in s.touches.iter().enumerate() {
            if touches.is_empty() {
                continue;
            }
            let n = st.x[b].nrows();
            let x = &st.x[b];
            let zi = &zinv[b];
            // Rows of A_k X and A_k Z⁻¹ on the support of A_k.
            let mut ux: Vec<Vec<f64>> = Vec::with_capacity(touches.len());
            let mut uz: Vec<Vec<f64>> = Vec::with_capacity(touches.len());
            for t in touches {
                let mut a = vec![0.0; t.support.len() * n];
                let mut c = vec![0.0; t.support.len() * n];
                for &(r, sc, v, rl, sl) in &t.entries {
                    if r == sc {
                        for col in 0..n {
                            a[rl * n + col] += v * x[(r, col)];
                            c[rl * n + col] += v * zi[(r, col)];
                        }
                    } else {
                        let h = 0.5 * v;
                        for col in 0..n {
                            a[rl * n + col] += h * x[(sc, col)];
                            a[sl * n + col] += h * x[(r, col)];
                            c[rl * n + col] += h * zi[(sc, col)];
                            c[sl * n + col] += h * zi[(r, col)];
                        }
                    }
                }
                ux.push(a);
                uz.push(c);
            }
            for (ti, t) in touches.iter().enumerate() {
                for (tk, u) in touches.iter().enumerate().skip(ti) {
                    let a = &ux[ti];
                    let c = &uz[tk];
                    let mut acc = 0.0;
                    for (ai, &sa) in t.support.iter().enumerate() {
                        let arow = &a[ai * n..ai * n + n];
                        for (bi, &sb) in u.support.iter().enumerate() {
                            acc += arow[sb] * c[bi * n + sa];
                        }
                    }
                    schur.add(s, t.row, u.row, acc);
                }
            }
        }
        schur
    }

    fn direction(
        &self,
        p: &RealProblem,
        factor: &Factor,
        s: &Structure,
        st: &State,
        zinv: &[DMatrix<f64>],
        res: &Residuals,
        target: f64,
        corr: Option<&Direction>,
    ) -> Direction {
        let m = p.rows.len();
        // T_X = σμ Z⁻¹ - X - (X R_d + ΔX_a ΔZ_a) Z⁻¹.
        let tx: Vec<DMatrix<f64>> = (0..st.x.len())
            .map(|b| {
                let n = st.x[b].nrows();
                let mut inner = &st.x[b] * &res.rd[b];
                if let Some(c) = corr {
                    inner += &c.dx[b] * &c.dz[b];
                }
                let mut t = &zinv[b] * target - &st.x[b] - inner * &zinv[b];
                if n == 0 {
                    t = DMatrix::zeros(0, 0);
                }
                sym(&t)
            })
            .collect();
        let atx = p.apply(&tx);
        let cp: Vec<f64> = (0..m)
            .map(|i| target - st.rp[i] * st.wp[i] - corr.map_or(0.0, |c| c.drp[i] * c.dwp[i]))
            .collect();
        let cm: Vec<f64> = (0..m)
            .map(|i| target - st.rm[i] * st.wm[i] - corr.map_or(0.0, |c| c.drm[i] * c.dwm[i]))
            .collect();
        let rhs: Vec<f64> = (0..m)
            .map(|i| res.rprim[i] - atx[i] + (cp[i] - st.rp[i] * res.rwp[i]) / st.wp[i] - (cm[i] - st.rm[i] * res.rwm[i]) / st.wm[i])
            .collect();
        let dy = factor.solve(s, &rhs);
        let aty = p.adjoint(&dy);
        let mut dx = Vec::with_capacity(st.x.len());
        let mut dz = Vec::with_capacity(st.x.len());
        for b in 0..st.x.len() {
            let dzb = &res.rd[b] - &aty[b];
            let mut t = &zinv[b] * target - &st.x[b] - &st.x[b] * &dzb * &zinv[b];
            if let Some(c) = corr {
                t -= &c.dx[b] * &c.dz[b] * &zinv[b];
            }
            dx.push(sym(&t));
            dz.push(dzb);
        }
        let dwp: Vec<f64> = (0..m).map(|i| res.rwp[i] + dy[i]).collect();
        let dwm: Vec<f64> = (0..m).map(|i| res.rwm[i] - dy[i]).collect();
        let drp: Vec<f64> = (0..m).map(|i| (cp[i] - st.rp[i] * dwp[i]) / st.wp[i]).collect();
        let drm: Vec<f64> = (0..m).map(|i| (cm[i] - st.rm[i] * dwm[i]) / st.wm[i]).collect();
        Direction {
            dx,
            dz,
            dy,
            drp,
            drm,
            dwp,
            dwm,
        }
    }
}

struct Residuals {
    rprim: Vec<f64>,
    rd: Vec<DMatrix<f64>>,
    rwp: Vec<f64>,
    rwm: Vec<f64>,
}

fn cost(sizes: &[usize], weight: f64) -> Vec<DMatrix<f64>> {
    sizes.iter().map(|&n| DMatrix::identity(n, n) * weight).collect()
}

fn residuals(p: &RealProblem, c: &[DMatrix<f64>], st: &State) -> Residuals {
    let ax = p.apply(&st.x);
    let rprim = (0..p.rows.len()).map(|i| p.rhs[i] - ax[i] + st.rp[i] - st.rm[i]).collect();
    let aty = p.adjoint(&st.y);
    let rd = (0..st.x.len()).map(|b| &c[b] - &aty[b] - &st.z[b]).collect();
    let rwp = (0..p.rows.len()).map(|i| 1.0 + st.y[i] - st.wp[i]).collect();
    let rwm = (0..p.rows.len()).map(|i| 1.0 - st.y[i] - st.wm[i]).collect();
    Residuals { rprim, rd, rwp, rwm }
}

fn complementarity(st: &State) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (x, z) in st.x.iter().zip(&st.z) {
        total += x.dot(z);
        count += x.nrows();
    }
    for i in 0..st.rp.len() {
        total += st.rp[i] * st.wp[i] + st.rm[i] * st.wm[i];
    }
    count += 2 * st.rp.len();
    total / count.max(1) as f64
}

fn stepped(st: &State, d: &Direction, ap: f64, ad: f64) -> State {
    State {
        x: st.x.iter().zip(&d.dx).map(|(x, dx)| x + dx * ap).collect(),
        z: st.z.iter().zip(&d.dz).map(|(z, dz)| z + dz * ad).collect(),
        y: st.y.iter().zip(&d.dy).map(|(y, dy)| y + ad * dy).collect(),
        rp: st.rp.iter().zip(&d.drp).map(|(v, dv)| v + ap * dv).collect(),
        rm: st.rm.iter().zip(&d.drm).map(|(v, dv)| v + ap * dv).collect(),
        wp: st.wp.iter().zip(&d.dwp).map(|(v, dv)| v + ad * dv).collect(),
        wm: st.wm.iter().zip(&d.dwm).map(|(v, dv)| v + ad * dv).collect(),
    }
}

fn chol_all(ms: &[DMatrix<f64>]) -> Option<Vec<Cholesky<f64, Dyn>>> {
    ms.iter().map(|m| Cholesky::new(m.clone())).collect()
}

fn step_lengths(xc: &[Cholesky<f64, Dyn>], zc: &[Cholesky<f64, Dyn>], st: &State, d: &Direction) -> (f64, f64) {
    let mut ap = max_step_lp(&st.rp, &d.drp).min(max_step_lp(&st.rm, &d.drm));
    let mut ad = max_step_lp(&st.wp, &d.dwp).min(max_step_lp(&st.wm, &d.dwm));
    for b in 0..st.x.len() {
        if st.x[b].nrows() == 0 {
            continue;
        }
        ap = ap.min(max_step(&xc[b], &d.dx[b]));
        ad = ad.min(max_step(&zc[b], &d.dz[b]));
    }
    (ap, ad)
}

impl InteriorPoint {
    pub fn run(&self, p: &RealProblem) -> Result<RealSolution, Error> {
        let m = p.rows.len();
        let s = Structure::new(p, self.local_row_limit);
        let c = cost(&p.block_sizes, self.trace_weight);
        let x: Vec<DMatrix<f64>> = p.block_sizes.iter().map(|&n| DMatrix::identity(n, n)).collect();
        let ax = p.apply(&x);
        let viol: Vec<f64> = (0..m).map(|i| ax[i] - p.rhs[i]).collect();
        let mut st = State {
            z: p.block_sizes.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            x,
            y: vec![0.0; m],
            rp: viol.iter().map(|v| v.max(0.0) + 1.0).collect(),
            rm: viol.iter().map(|v| (-v).max(0.0) + 1.0).collect(),
            wp: vec![1.0; m],
            wm: vec![1.0; m],
        };
        let bnorm = 1.0 + inf_norm(&p.rhs);
        let mut converged = false;
        let mut message = String::from("iteration limit reached");
        let mut iterations = 0;
        let mut best_mu = f64::INFINITY;
        let mut stall = 0;
        for it in 0..self.max_iterations {
            iterations = it;
            let res = residuals(p, &c, &st);
            let mu = complementarity(&st);
            let pinf = inf_norm(&res.rprim) / bnorm;
            let dinf = res.rd.iter().map(|r| r.amax()).fold(inf_norm(&res.rwp).max(inf_norm(&res.rwm)), f64::max);
            let primal = primal_objective(&c, &st);
            let dual: f64 = p.rhs.iter().zip(&st.y).map(|(b, y)| b * y).sum();
            let gap = (primal - dual).abs();
            let ax = p.apply(&st.x);
            if (0..m).all(|i| (ax[i] - p.rhs[i]).abs() <= self.feasibility_target) {
                converged = true;
                message = String::from("feasible point");
                break;
            }
            if pinf < self.tolerance && dinf < self.tolerance && gap < self.tolerance * (1.0 + primal.abs()) {
                converged = true;
                message = String::from("optimal");
                break;
            }
            // A clearly positive optimum only needs modest accuracy.
            if pinf < 1e-9 && dinf < 1e-9 && dual > 1e-4 && gap < 1e-6 * (1.0 + primal.abs()) {
                converged = true;
                message = String::from("positive optimum");
                break;
            }
            if mu < best_mu * 0.9 {
                best_mu = mu;
                stall = 0;
            } else {
                stall += 1;
                if stall > 8 {
                    message = String::from("stalled");
                    break;
                }
            }
            let (Some(zc), Some(xc)) = (chol_all(&st.z), chol_all(&st.x)) else {
                converged = pinf < 1e-8 && dinf < 1e-8 && gap < 1e-8 * (1.0 + primal.abs());
                message = String::from("numerical limit");
                break;
            };
            let zinv: Vec<DMatrix<f64>> = zc.iter().map(|ch| sym(&ch.inverse())).collect();
            let mut schur = self.assemble(&s, &st, &zinv);
            for i in 0..m {
                schur.add_diag(&s, i, st.rp[i] / st.wp[i] + st.rm[i] / st.wm[i]);
            }
            let Ok(factor) = schur.factor() else {
                converged = pinf < 1e-8 && dinf < 1e-8 && gap < 1e-8 * (1.0 + primal.abs());
                message = String::from("numerical limit");
                break;
            };
            let pred = self.direction(p, &factor, &s, &st, &zinv, &res, 0.0, None);
            let (ap, ad) = step_lengths(&xc, &zc, &st, &pred);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mu_aff = complementarity(&stepped(&st, &pred, ap, ad));
            let ratio = mu_aff / mu;
            let sigma = (ratio * ratio * ratio).clamp(0.0, 1.0);
            let corr = self.direction(p, &factor, &s, &st, &zinv, &res, sigma * mu, Some(&pred));
            let (ap, ad) = step_lengths(&xc, &zc, &st, &corr);
            let ap = (self.step_fraction * ap).min(1.0);
            let ad = (self.step_fraction * ad).min(1.0);
            st = stepped(&st, &corr, ap, ad);
        }
        let ax = p.apply(&st.x);
        let phase1_primal = (0..m).map(|i| (ax[i] - p.rhs[i]).abs()).sum();
        let trace: f64 = st.x.iter().map(|x| x.trace()).sum();
        let dual: f64 = p.rhs.iter().zip(&st.y).map(|(b, y)| b * y).sum();
        Ok(RealSolution {
            blocks: st.x,
            phase1_primal,
            phase1_dual: dual - self.trace_weight * trace,
            converged,
            iterations,
            message,
        })
    }
}

fn primal_objective(c: &[DMatrix<f64>], st: &State) -> f64 {
    let lin: f64 = st.rp.iter().chain(&st.rm).sum();
    c.iter().zip(&st.x).map(|(c, x)| c.dot(x)).sum::<f64>() + lin
}

impl ConicSolver for InteriorPoint {
    fn name(&self) -> &str {
        "interior-point"
    }

    fn solve(&self, problem: &RealProblem) -> Result<RealSolution, Error> {
        self.run(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::super::model::{ConicProblem, LinearMap, Term};
    use super::super::verdict::{solve, Status};
    use super::*;
    use crate::tensor::{qubit, ComplexMatrix, Subsystem};

    fn qubit_block(p: &mut ConicProblem, name: &str) -> crate::sdp::BlockId {
        p.add_psd(name, vec![Subsystem::new("a", 2)])
    }

    #[test]
    fn empty_problem_is_feasible() {
        let mut p = ConicProblem::new("empty");
        qubit_block(&mut p, "x");
        let v = solve(&p, 1e-6, &InteriorPoint::default());
        assert_eq!(v.status, Status::Feasible);
    }

    #[test]
    fn negative_trace_is_infeasible() {
        let mut p = ConicProblem::new("neg");
        let x = qubit_block(&mut p, "x");
        let tr = p.add_map(LinearMap::trace(2));
        p.add_scalar_equality("tr x = -1", vec![Term { block: x, map: tr, scale: 1.0 }], -1.0).unwrap();
        let v = solve(&p, 1e-6, &InteriorPoint::default());
        assert_eq!(v.status, Status::Infeasible, "{:?}", v.diagnostics);
        assert!((v.infeasibility_gap.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fixed_state_is_recovered() {
        let mut p = ConicProblem::new("fix");
        let x = qubit_block(&mut p, "x");
        let id = p.add_map(LinearMap::identity(4));
        let rho = &qubit::identity("a").scale(0.5) + &qubit::pauli_y("a").scale(0.3);
        p.add_equality("x = rho", vec![Term { block: x, map: id, scale: 1.0 }], &rho).unwrap();
        let v = solve(&p, 1e-8, &InteriorPoint::default());
        assert_eq!(v.status, Status::Feasible, "{:?}", v.diagnostics);
        assert!(v.witness().unwrap()[0].as_matrix().unwrap().max_abs_diff(&rho) < 1e-8);
    }

    #[test]
    fn non_psd_target_is_infeasible() {
        let mut p = ConicProblem::new("fix");
        let x = qubit_block(&mut p, "x");
        let id = p.add_map(LinearMap::identity(4));
        let target = qubit::pauli_x("a");
        p.add_equality("x = sigma_x", vec![Term { block: x, map: id, scale: 1.0 }], &target).unwrap();
        let v = solve(&p, 1e-6, &InteriorPoint::default());
        assert_eq!(v.status, Status::Infeasible, "{:?}", v.diagnostics);
    }

    #[test]
    fn rank_one_boundary_solution() {
        let mut p = ConicProblem::new("rank-one");
        let y = qubit_block(&mut p, "y");
        let map = p.add_map(LinearMap::identity(4));
        let ones = ComplexMatrix::from_fn(vec![Subsystem::new("a", 2)], |_, _| crate::C64::new(1.0, 0.0)).unwrap();
        p.add_equality("y = J", vec![Term { block: y, map, scale: 1.0 }], &ones).unwrap();
        let v = solve(&p, 1e-7, &InteriorPoint::default());
        assert_eq!(v.status, Status::Feasible, "{:?}", v.diagnostics);
    }
}
