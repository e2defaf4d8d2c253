//! Channel, Bob-with-input and measurement-device-independent assemblages,
//! classical boxes, validity reports and generators from realisations.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::choi::ChoiOperator;
use crate::error::Error;
use crate::tensor::{ComplexMatrix, Subsystem, HERMITIAN_TOL, PSD_TOL};
use crate::C64;

/// Bob's input wire of channel and MDI assemblages.
pub const B_IN: &str = "B_in";
/// Bob's output wire of channel assemblages.
pub const B_OUT: &str = "B_out";
/// Bob's system in Bob-with-input assemblages.
pub const B: &str = "B";
/// Alice's system in realisations.
pub const A: &str = "A";

/// Default tolerance of [`Assemblage::validate`].
pub const VALIDATION_TOL: f64 = 1e-8;

/// Which scenario an assemblage belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AssemblageKind {
    Channel,
    Bwi,
    Mdi,
}

impl AssemblageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Channel => "channel",
            Self::Bwi => "bwi",
            Self::Mdi => "mdi",
        }
    }
}

impl core::str::FromStr for AssemblageKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "channel" => Ok(Self::Channel),
            "bwi" => Ok(Self::Bwi),
            "mdi" => Ok(Self::Mdi),
            other => Err(Error::InvalidAssemblage(alloc::format!("unknown kind `{other}`"))),
        }
    }
}

/// One invariant with its measured residual.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, residual: f64, tol: f64) {
        self.checks.push(InvariantCheck {
            name: name.to_string(),
            passed: residual <= tol,
            residual,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.residual)
    }
}

fn sum(ms: impl IntoIterator<Item = ComplexMatrix>) -> Option<ComplexMatrix> {
    ms.into_iter().reduce(|a, b| &a + &b)
}

fn negativity(m: &ComplexMatrix) -> f64 {
    (-m.min_eigenvalue()).max(0.0)
}

fn qubit_space(label: &str, d: usize) -> Vec<Subsystem> {
    vec![Subsystem::new(label, d)]
}

/// Instruments `J_{a|x}` on `B_out ⊗ B_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelAssemblage {
    na: usize,
    nx: usize,
    d_in: usize,
    d_out: usize,
    elements: Vec<ChoiOperator>,
}

impl ChannelAssemblage {
    /// `elements` are listed with `x` outermost: index `x * na + a`.
    pub fn new(na: usize, nx: usize, d_in: usize, d_out: usize, elements: Vec<ChoiOperator>) -> Result<Self, Error> {
        if na == 0 || nx == 0 || elements.len() != na * nx {
            return Err(Error::InvalidAssemblage("element count does not match alphabets".into()));
        }
        let mut canon = Vec::with_capacity(elements.len());
        for e in elements {
            if e.inputs() != [B_IN] || e.outputs() != [B_OUT] {
                return Err(Error::InvalidAssemblage("channel elements must map B_in to B_out".into()));
            }
            let m = e.canonical_matrix();
            if m.dims() != [d_out, d_in] {
                return Err(Error::DimensionMismatch("channel element dimensions".into()));
            }
            canon.push(ChoiOperator::new(m, &[B_IN], &[B_OUT])?);
        }
        Ok(Self {
            na,
            nx,
            d_in,
            d_out,
            elements: canon,
        })
    }

    /// Build from raw matrices on `B_out ⊗ B_in`, indexed `x * na + a`.
    pub fn from_matrices(na: usize, nx: usize, d_in: usize, d_out: usize, mats: Vec<nalgebra::DMatrix<C64>>) -> Result<Self, Error> {
        let elements = mats
            .into_iter()
            .map(|m| {
                let cm = ComplexMatrix::new(m, vec![Subsystem::new(B_OUT, d_out), Subsystem::new(B_IN, d_in)])?;
                ChoiOperator::new(cm, &[B_IN], &[B_OUT])
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(na, nx, d_in, d_out, elements)
    }

    pub fn na(&self) -> usize {
        self.na
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn d_in(&self) -> usize {
        self.d_in
    }
    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn element(&self, a: usize, x: usize) -> &ChoiOperator {
        &self.elements[x * self.na + a]
    }

    pub fn elements(&self) -> &[ChoiOperator] {
        &self.elements
    }

    /// `p(a|x) = tr J_{a|x}`.
    pub fn marginal(&self, a: usize, x: usize) -> f64 {
        self.element(a, x).matrix().trace().re
    }

    /// `Σ_a J_{a|x}`.
    pub fn bob_channel(&self, x: usize) -> ChoiOperator {
        let m = sum((0..self.na).map(|a| self.element(a, x).matrix().clone())).unwrap();
        ChoiOperator::new(m, &[B_IN], &[B_OUT]).unwrap()
    }

    /// Restrict Alice's inputs to the listed values.
    pub fn restrict_inputs(&self, xs: &[usize]) -> Result<Self, Error> {
        let mut el = Vec::new();
        for &x in xs {
            for a in 0..self.na {
                el.push(self.element(a, x).clone());
            }
        }
        Self::new(self.na, xs.len(), self.d_in, self.d_out, el)
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut r = ValidationReport::default();
        let herm = self.elements.iter().map(|e| e.matrix().hermiticity_defect()).fold(0.0, f64::max);
        r.push("hermitian", herm, HERMITIAN_TOL.max(tol));
        let neg = self.elements.iter().map(|e| negativity(e.matrix())).fold(0.0, f64::max);
        r.push("positive", neg, tol.max(PSD_TOL));
        let tp = (0..self.nx).map(|x| self.bob_channel(x).trace_preservation_defect()).fold(0.0, f64::max);
        r.push("trace-preserving", tp, tol);
        let base = self.bob_channel(0);
        let ns = (1..self.nx)
            .map(|x| self.bob_channel(x).matrix().max_abs_diff(base.matrix()))
            .fold(0.0, f64::max);
        r.push("no-signalling", ns, tol);
        let neg_p = (0..self.nx)
            .flat_map(|x| (0..self.na).map(move |a| (a, x)))
            .map(|(a, x)| (-self.marginal(a, x)).max(0.0))
            .fold(0.0, f64::max);
        r.push("distribution", neg_p, tol);
        r
    }
}

/// Subnormalised states `σ_{a|xy}` on `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct BwiAssemblage {
    na: usize,
    nx: usize,
    ny: usize,
    d: usize,
    elements: Vec<ComplexMatrix>,
}

impl BwiAssemblage {
    /// Elements indexed `(y * nx + x) * na + a`.
    pub fn new(na: usize, nx: usize, ny: usize, d: usize, elements: Vec<ComplexMatrix>) -> Result<Self, Error> {
        if na == 0 || nx == 0 || ny == 0 || elements.len() != na * nx * ny {
            return Err(Error::InvalidAssemblage("element count does not match alphabets".into()));
        }
        let elements = elements
            .into_iter()
            .map(|e| {
                if e.dim() != d {
                    return Err(Error::DimensionMismatch("assemblage element dimension".into()));
                }
                e.with_subsystems(qubit_space(B, d))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { na, nx, ny, d, elements })
    }

    /// Build from a generator `f(a, x, y)`.
    pub fn from_fn(na: usize, nx: usize, ny: usize, d: usize, mut f: impl FnMut(usize, usize, usize) -> Result<ComplexMatrix, Error>) -> Result<Self, Error> {
        let mut el = Vec::with_capacity(na * nx * ny);
        for y in 0..ny {
            for x in 0..nx {
                for a in 0..na {
                    el.push(f(a, x, y)?);
                }
            }
        }
        Self::new(na, nx, ny, d, el)
    }

    pub fn na(&self) -> usize {
        self.na
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn element(&self, a: usize, x: usize, y: usize) -> &ComplexMatrix {
        &self.elements[(y * self.nx + x) * self.na + a]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn marginal(&self, a: usize, x: usize, y: usize) -> f64 {
        self.element(a, x, y).trace().re
    }

    pub fn restrict_inputs(&self, xs: &[usize]) -> Result<Self, Error> {
        Self::from_fn(self.na, xs.len(), self.ny, self.d, |a, x, y| Ok(self.element(a, xs[x], y).clone()))
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut r = ValidationReport::default();
        let herm = self.elements.iter().map(|e| e.hermiticity_defect()).fold(0.0, f64::max);
        r.push("hermitian", herm, HERMITIAN_TOL.max(tol));
        let neg = self.elements.iter().map(negativity).fold(0.0, f64::max);
        r.push("positive", neg, tol.max(PSD_TOL));
        let mut norm: f64 = 0.0;
        let mut ns_bob: f64 = 0.0;
        let mut ns_alice: f64 = 0.0;
        for y in 0..self.ny {
            let base = sum((0..self.na).map(|a| self.element(a, 0, y).clone())).unwrap();
            for x in 0..self.nx {
                let t: f64 = (0..self.na).map(|a| self.marginal(a, x, y)).sum();
                norm = norm.max((t - 1.0).abs());
                for a in 0..self.na {
                    ns_bob = ns_bob.max((self.marginal(a, x, y) - self.marginal(a, x, 0)).abs());
                }
                let s = sum((0..self.na).map(|a| self.element(a, x, y).clone())).unwrap();
                ns_alice = ns_alice.max(s.max_abs_diff(&base));
            }
        }
        r.push("normalised", norm, tol);
        r.push("no-signalling to Alice", ns_bob, tol);
        r.push("no-signalling to Bob", ns_alice, tol);
        r
    }
}

/// Effects-valued assemblage `J_{ab|x}` on `B_in`, stored as Choi operators
/// of maps with trivial output; `Σ_b J_{ab|x} = p(a|x) I / d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MdiAssemblage {
    na: usize,
    nb: usize,
    nx: usize,
    d: usize,
    elements: Vec<ComplexMatrix>,
}

impl MdiAssemblage {
    /// Elements indexed `(x * na + a) * nb + b`.
    pub fn new(na: usize, nb: usize, nx: usize, d: usize, elements: Vec<ComplexMatrix>) -> Result<Self, Error> {
        if na == 0 || nb == 0 || nx == 0 || elements.len() != na * nb * nx {
            return Err(Error::InvalidAssemblage("element count does not match alphabets".into()));
        }
        let elements = elements
            .into_iter()
            .map(|e| {
                if e.dim() != d {
                    return Err(Error::DimensionMismatch("assemblage element dimension".into()));
                }
                e.with_subsystems(qubit_space(B_IN, d))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { na, nb, nx, d, elements })
    }

    pub fn from_fn(na: usize, nb: usize, nx: usize, d: usize, mut f: impl FnMut(usize, usize, usize) -> Result<ComplexMatrix, Error>) -> Result<Self, Error> {
        let mut el = Vec::with_capacity(na * nb * nx);
        for x in 0..nx {
            for a in 0..na {
                for b in 0..nb {
                    el.push(f(a, b, x)?);
                }
            }
        }
        Self::new(na, nb, nx, d, el)
    }

    pub fn na(&self) -> usize {
        self.na
    }
    pub fn nb(&self) -> usize {
        self.nb
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn d(&self) -> usize {
        self.d
    }

    /// Choi operator `J_{ab|x}` on `B_in`.
    pub fn element(&self, a: usize, b: usize, x: usize) -> &ComplexMatrix {
        &self.elements[(x * self.na + a) * self.nb + b]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn choi(&self, a: usize, b: usize, x: usize) -> ChoiOperator {
        ChoiOperator::new(self.element(a, b, x).clone(), &[B_IN], &[]).expect("single input")
    }

    /// Effect `Ñ_{ab|x} = d J^T` with `N_{ab|x}(ρ) = tr(Ñ ρ)`.
    pub fn effect(&self, a: usize, b: usize, x: usize) -> ComplexMatrix {
        self.element(a, b, x).transpose().scale(self.d as f64)
    }

    pub fn marginal(&self, a: usize, x: usize) -> f64 {
        (0..self.nb).map(|b| self.element(a, b, x).trace().re).sum()
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut r = ValidationReport::default();
        let herm = self.elements.iter().map(|e| e.hermiticity_defect()).fold(0.0, f64::max);
        r.push("hermitian", herm, HERMITIAN_TOL.max(tol));
        let neg = self.elements.iter().map(negativity).fold(0.0, f64::max);
        r.push("positive", neg, tol.max(PSD_TOL));
        let id = ComplexMatrix::identity(qubit_space(B_IN, self.d)).unwrap().scale(1.0 / self.d as f64);
        let mut trace_fn: f64 = 0.0;
        let mut norm: f64 = 0.0;
        let mut ns: f64 = 0.0;
        for x in 0..self.nx {
            let mut t = 0.0;
            for a in 0..self.na {
                let s = sum((0..self.nb).map(|b| self.element(a, b, x).clone())).unwrap();
                let p = s.trace().re;
                t += p;
                trace_fn = trace_fn.max(s.max_abs_diff(&id.scale(p)));
            }
            norm = norm.max((t - 1.0).abs());
            for b in 0..self.nb {
                let s = sum((0..self.na).map(|a| self.element(a, b, x).clone())).unwrap();
                let s0 = sum((0..self.na).map(|a| self.element(a, b, 0).clone())).unwrap();
                ns = ns.max(s.max_abs_diff(&s0));
            }
        }
        r.push("trace functional", trace_fn, tol);
        r.push("normalised", norm, tol);
        r.push("no-signalling", ns, tol);
        r
    }
}

/// Classical box `p(ab|xy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDistribution {
    na: usize,
    nb: usize,
    nx: usize,
    ny: usize,
    p: Vec<f64>,
}

impl BoxDistribution {
    pub fn from_fn(na: usize, nb: usize, nx: usize, ny: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut p = Vec::with_capacity(na * nb * nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                for a in 0..na {
                    for b in 0..nb {
                        p.push(f(a, b, x, y));
                    }
                }
            }
        }
        Self { na, nb, nx, ny, p }
    }

    /// Complete a binary box from Alice's marginals `p_A(1|x)`, Bob's
    /// marginals `p_B(1|y)` and the correlators `p(11|xy)`.
    pub fn binary_from_marginals(pa1: [f64; 2], pb1: [f64; 2], p11: [[f64; 2]; 2]) -> Self {
        Self::from_fn(2, 2, 2, 2, |a, b, x, y| match (a, b) {
            (1, 1) => p11[x][y],
            (1, 0) => pa1[x] - p11[x][y],
            (0, 1) => pb1[y] - p11[x][y],
            _ => 1.0 - pa1[x] - pb1[y] + p11[x][y],
        })
    }

    pub fn na(&self) -> usize {
        self.na
    }
    pub fn nb(&self) -> usize {
        self.nb
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[((x * self.ny + y) * self.na + a) * self.nb + b]
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut r = ValidationReport::default();
        let neg = self.p.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        r.push("nonnegative", neg, tol);
        let mut norm: f64 = 0.0;
        let mut ns_a: f64 = 0.0;
        let mut ns_b: f64 = 0.0;
        for x in 0..self.nx {
            for y in 0..self.ny {
                let t: f64 = (0..self.na)
                    .flat_map(|a| (0..self.nb).map(move |b| (a, b)))
                    .map(|(a, b)| self.p(a, b, x, y))
                    .sum();
                norm = norm.max((t - 1.0).abs());
                for a in 0..self.na {
                    let pa = |y: usize| (0..self.nb).map(|b| self.p(a, b, x, y)).sum::<f64>();
                    ns_a = ns_a.max((pa(y) - pa(0)).abs());
                }
                for b in 0..self.nb {
                    let pb = |x: usize| (0..self.na).map(|a| self.p(a, b, x, y)).sum::<f64>();
                    ns_b = ns_b.max((pb(x) - pb(0)).abs());
                }
            }
        }
        r.push("normalised", norm, tol);
        r.push("no-signalling from Bob", ns_a, tol);
        r.push("no-signalling from Alice", ns_b, tol);
        r
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Any of the three assemblage families.
#[derive(Clone, Debug, PartialEq)]
pub enum Assemblage {
    Channel(ChannelAssemblage),
    Bwi(BwiAssemblage),
    Mdi(MdiAssemblage),
}

impl Assemblage {
    pub fn kind(&self) -> AssemblageKind {
        match self {
            Self::Channel(_) => AssemblageKind::Channel,
            Self::Bwi(_) => AssemblageKind::Bwi,
            Self::Mdi(_) => AssemblageKind::Mdi,
        }
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        match self {
            Self::Channel(c) => c.validate(tol),
            Self::Bwi(b) => b.validate(tol),
            Self::Mdi(m) => m.validate(tol),
        }
    }

    pub fn as_channel(&self) -> Option<&ChannelAssemblage> {
        match self {
            Self::Channel(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_bwi(&self) -> Option<&BwiAssemblage> {
        match self {
            Self::Bwi(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_mdi(&self) -> Option<&MdiAssemblage> {
        match self {
            Self::Mdi(m) => Some(m),
            _ => None,
        }
    }
}

impl From<ChannelAssemblage> for Assemblage {
    fn from(c: ChannelAssemblage) -> Self {
        Self::Channel(c)
    }
}

impl From<BwiAssemblage> for Assemblage {
    fn from(b: BwiAssemblage) -> Self {
        Self::Bwi(b)
    }
}

impl From<MdiAssemblage> for Assemblage {
    fn from(m: MdiAssemblage) -> Self {
        Self::Mdi(m)
    }
}

/// Alice's measurements, indexed `[x][a]`, on factor `A`.
pub type Measurements = Vec<Vec<ComplexMatrix>>;

fn check_state(rho: &ComplexMatrix) -> Result<(), Error> {
    if rho.labels() != [A, B] {
        return Err(Error::InvalidState("shared state must live on factors A, B".into()));
    }
    if !rho.is_psd(PSD_TOL) || (rho.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("not a density matrix".into()));
    }
    Ok(())
}

/// Check that each family `povm[x]` is a POVM on a space of dimension `d`.
pub fn check_povm(povm: &[ComplexMatrix], d: usize) -> Result<(), Error> {
    let Some(first) = povm.first() else {
        return Err(Error::InvalidMeasurement("empty measurement".into()));
    };
    let mut total = ComplexMatrix::zeros(first.subsystems().to_vec())?;
    for e in povm {
        if e.dim() != d || !e.is_psd(PSD_TOL) {
            return Err(Error::InvalidMeasurement("effect is not a positive operator of the right size".into()));
        }
        total = &total + &e.clone().with_subsystems(first.subsystems().to_vec())?;
    }
    let id = ComplexMatrix::identity(first.subsystems().to_vec())?;
    if total.max_abs_diff(&id) > 1e-9 {
        return Err(Error::InvalidMeasurement("effects do not sum to the identity".into()));
    }
    Ok(())
}

/// `tr_A[(M ⊗ I) ρ_AB]` for every `(a, x)`, indexed `[x][a]`.
pub fn conditional_states(rho: &ComplexMatrix, povm: &Measurements) -> Result<Vec<Vec<ComplexMatrix>>, Error> {
    check_state(rho)?;
    let da = rho.dim_of(A)?;
    let db = rho.dim_of(B)?;
    povm.iter()
        .map(|family| {
            check_povm(family, da)?;
            family
                .iter()
                .map(|m| {
                    let m = m.clone().with_subsystems(vec![Subsystem::new(A, da)])?;
                    let id = ComplexMatrix::identity(vec![Subsystem::new(B, db)])?;
                    m.kron(&id)?.matmul(rho)?.partial_trace(&[B])
                })
                .collect()
        })
        .collect()
}

fn check_trace_preserving(map: &ChoiOperator, require_cp: bool) -> Result<(), Error> {
    if !map.is_hermitian() {
        return Err(Error::InvalidMap("map does not preserve Hermiticity".into()));
    }
    if map.trace_preservation_defect() > 1e-9 {
        return Err(Error::InvalidMap("map is not trace preserving".into()));
    }
    if require_cp && !map.is_cp(PSD_TOL) {
        return Err(Error::InvalidMap("map is not completely positive".into()));
    }
    Ok(())
}

fn channel_from(rho: &ComplexMatrix, povm: &Measurements, gamma: &ChoiOperator, require_cp: bool) -> Result<ChannelAssemblage, Error> {
    let mut ins = gamma.inputs();
    ins.sort_unstable();
    if ins != [B, B_IN] || gamma.outputs() != [B_OUT] {
        return Err(Error::InvalidMap("extension must map B ⊗ B_in to B_out".into()));
    }
    check_trace_preserving(gamma, require_cp)?;
    let states = conditional_states(rho, povm)?;
    let d_in = gamma.matrix().dim_of(B_IN)?;
    let d_out = gamma.d_out();
    let na = povm[0].len();
    let mut el = Vec::new();
    for family in &states {
        if family.len() != na {
            return Err(Error::InvalidMeasurement("all measurements need the same outcome count".into()));
        }
        for sigma in family {
            el.push(ChoiOperator::from_map(qubit_space(B_IN, d_in), qubit_space(B_OUT, d_out), |r| {
                gamma.apply(&sigma.kron(r)?)
            })?);
        }
    }
    ChannelAssemblage::new(na, povm.len(), d_in, d_out, el)
}

/// `J_{a|x}` of `ρ ↦ tr_A[(M_{a|x} ⊗ I) Γ(ρ_AB ⊗ ρ)]` for a CPTP extension `Γ`.
pub fn channel_from_quantum(rho: &ComplexMatrix, povm: &Measurements, gamma: &ChoiOperator) -> Result<ChannelAssemblage, Error> {
    channel_from(rho, povm, gamma, true)
}

/// As [`channel_from_quantum`] but only requiring `Γ` to be Hermiticity and
/// trace preserving, for post-quantum assemblages with a formal description.
pub fn channel_from_formal(rho: &ComplexMatrix, povm: &Measurements, gamma: &ChoiOperator) -> Result<ChannelAssemblage, Error> {
    channel_from(rho, povm, gamma, false)
}

fn bwi_from(rho: &ComplexMatrix, povm: &Measurements, xi: &[ChoiOperator], require_cp: bool) -> Result<BwiAssemblage, Error> {
    let states = conditional_states(rho, povm)?;
    let d = rho.dim_of(B)?;
    for m in xi {
        if m.inputs().len() != 1 || m.outputs().len() != 1 || m.d_in() != d || m.d_out() != d {
            return Err(Error::InvalidMap("Bob's maps must act on B".into()));
        }
        check_trace_preserving(m, require_cp)?;
    }
    let na = povm[0].len();
    BwiAssemblage::from_fn(na, povm.len(), xi.len(), d, |a, x, y| {
        let m = &xi[y];
        let input = states[x][a].clone().relabel(B, m.inputs()[0])?;
        m.apply(&input)?.with_subsystems(qubit_space(B, d))
    })
}

/// `σ_{a|xy} = ξ_y(tr_A[(M_{a|x} ⊗ I) ρ_AB])` for CPTP maps `ξ_y`.
pub fn bwi_from_quantum(rho: &ComplexMatrix, povm: &Measurements, xi: &[ChoiOperator]) -> Result<BwiAssemblage, Error> {
    bwi_from(rho, povm, xi, true)
}

/// As [`bwi_from_quantum`] with Hermiticity and trace preserving maps.
pub fn bwi_from_formal(rho: &ComplexMatrix, povm: &Measurements, xi: &[ChoiOperator]) -> Result<BwiAssemblage, Error> {
    bwi_from(rho, povm, xi, false)
}

/// `N_{ab|x}(ρ) = tr[(M_{a|x} ⊗ Θ_b)(ρ_AB ⊗ ρ)]` for a POVM `Θ_b` on
/// `B ⊗ B_in` (factors labelled `B`, `B_in`).
pub fn mdi_from_quantum(rho: &ComplexMatrix, povm: &Measurements, theta: &[ComplexMatrix]) -> Result<MdiAssemblage, Error> {
    let states = conditional_states(rho, povm)?;
    let db = rho.dim_of(B)?;
    let first = theta.first().ok_or_else(|| Error::InvalidMeasurement("empty measurement".into()))?;
    let d_in = first.dim() / db;
    let space = vec![Subsystem::new(B, db), Subsystem::new(B_IN, d_in)];
    let theta: Vec<ComplexMatrix> = theta.iter().map(|t| t.clone().with_subsystems(space.clone())).collect::<Result<_, _>>()?;
    check_povm(&theta, db * d_in)?;
    let na = povm[0].len();
    let id_in = ComplexMatrix::identity(qubit_space(B_IN, d_in))?;
    MdiAssemblage::from_fn(na, theta.len(), povm.len(), d_in, |a, b, x| {
        let effect = theta[b].matmul(&states[x][a].kron(&id_in)?)?.partial_trace(&[B_IN])?;
        Ok(effect.transpose().scale(1.0 / d_in as f64))
    })
}

/// `N_{ab|x}(ρ) = tr[N_b Γ(σ_{a|x} ⊗ ρ)]` for a Hermiticity and trace
/// preserving `Γ: B ⊗ B_in → B_out` followed by a POVM `N_b` on `B_out`.
pub fn mdi_from_formal(rho: &ComplexMatrix, povm: &Measurements, gamma: &ChoiOperator, measurement: &[ComplexMatrix]) -> Result<MdiAssemblage, Error> {
    let ch = channel_from_formal(rho, povm, gamma)?;
    mdi_from_channel(&ch, measurement)
}

/// Measure the output of every instrument of a channel assemblage.
pub fn mdi_from_channel(ch: &ChannelAssemblage, measurement: &[ComplexMatrix]) -> Result<MdiAssemblage, Error> {
    check_povm(measurement, ch.d_out())?;
    let meas: Vec<ComplexMatrix> = measurement
        .iter()
        .map(|n| n.clone().with_subsystems(qubit_space(B_OUT, ch.d_out())))
        .collect::<Result<_, _>>()?;
    MdiAssemblage::from_fn(ch.na(), meas.len(), ch.nx(), ch.d_in(), |a, b, x| {
        let j = ch.element(a, x).matrix();
        let id_in = ComplexMatrix::identity(qubit_space(B_IN, ch.d_in()))?;
        j.matmul(&meas[b].kron(&id_in)?)?.partial_trace(&[B_IN])
    })
}

/// Feed basis states `|y><y|` into a channel assemblage.
pub fn bwi_from_channel_on_basis(ch: &ChannelAssemblage) -> Result<BwiAssemblage, Error> {
    BwiAssemblage::from_fn(ch.na(), ch.nx(), ch.d_in(), ch.d_out(), |a, x, y| {
        let mut psi = vec![C64::new(0.0, 0.0); ch.d_in()];
        psi[y] = C64::new(1.0, 0.0);
        let basis = ComplexMatrix::projector(&psi, qubit_space(B_IN, ch.d_in()))?;
        ch.element(a, x).apply(&basis)
    })
}

/// `p(ab|xy) = tr(N_b σ_{a|xy})`.
pub fn bwi_measure_out(s: &BwiAssemblage, measurement: &[ComplexMatrix]) -> Result<BoxDistribution, Error> {
    check_povm(measurement, s.d())?;
    let mut values = Vec::new();
    for x in 0..s.nx() {
        for y in 0..s.ny() {
            for a in 0..s.na() {
                for n in measurement {
                    let n = n.clone().with_subsystems(qubit_space(B, s.d()))?;
                    values.push(n.matmul(s.element(a, x, y))?.trace().re);
                }
            }
        }
    }
    let nb = measurement.len();
    let mut it = values.into_iter();
    Ok(BoxDistribution::from_fn(s.na(), nb, s.nx(), s.ny(), |_, _, _, _| it.next().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::qubit;

    fn zx() -> Measurements {
        [2usize, 0]
            .iter()
            .map(|&axis| (0..2).map(|a| qubit::pauli_effect(axis, a, A)).collect())
            .collect()
    }

    #[test]
    fn separable_realisation_is_valid() {
        let rho = qubit::basis_projector(0, A).kron(&qubit::identity(B).scale(0.5)).unwrap();
        let xi = vec![ChoiOperator::identity_channel("B", "B'", 2).unwrap()];
        let s = bwi_from_quantum(&rho, &zx(), &xi).unwrap();
        assert!(s.validate(VALIDATION_TOL).all_passed());
    }

    #[test]
    fn signalling_family_is_reported() {
        let s = BwiAssemblage::from_fn(2, 1, 2, 2, |a, _, y| {
            let p = if y == 0 {
                0.5
            } else if a == 0 {
                0.8
            } else {
                0.2
            };
            Ok(qubit::basis_projector(a, B).scale(p))
        })
        .unwrap();
        let report = s.validate(VALIDATION_TOL);
        assert!(!report.all_passed());
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"no-signalling to Alice"));
    }

    #[test]
    fn trivial_measurement_gives_marginals() {
        let xi = vec![ChoiOperator::identity_channel("B", "B'", 2).unwrap(); 2];
        let s = bwi_from_quantum(&qubit::bell_state(A, B), &zx(), &xi).unwrap();
        let p = bwi_measure_out(&s, &[qubit::identity(B)]).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                assert!((p.p(a, 0, x, 1) - 0.5).abs() < 1e-14);
            }
        }
        assert!(bwi_measure_out(&s, &[qubit::basis_projector(0, B)]).is_err());
    }

    #[test]
    fn quantum_mdi_realisation_is_valid() {
        let theta: Vec<ComplexMatrix> = (0..2)
            .map(|b| {
                let psi = crate::random::random_pure(&mut crate::random::seeded(9), 4);
                let p = ComplexMatrix::projector(&psi, vec![Subsystem::new(B, 2), Subsystem::new(B_IN, 2)]).unwrap();
                if b == 0 {
                    p
                } else {
                    &ComplexMatrix::identity(p.subsystems().to_vec()).unwrap() - &p
                }
            })
            .collect();
        let n = mdi_from_quantum(&qubit::bell_state(A, B), &zx(), &theta).unwrap();
        assert!(n.validate(VALIDATION_TOL).all_passed());
    }

    #[test]
    fn rejects_incomplete_povm() {
        let povm = vec![vec![qubit::basis_projector(0, A)]];
        let xi = vec![ChoiOperator::identity_channel("B", "B'", 2).unwrap()];
        assert!(matches!(
            bwi_from_quantum(&qubit::bell_state(A, B), &povm, &xi),
            Err(Error::InvalidMeasurement(_))
        ));
    }
}
