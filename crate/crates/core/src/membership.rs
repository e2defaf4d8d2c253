//! Level-1 moment-matrix relaxation of the quantum set of MDI assemblages.
//!
//! The moment matrix is indexed by the operators `I`, `M_{a|x}` and
//! `F_b^{ij} = ⟨i|F_b|j⟩`, with the last outcome of each setting removed by
//! completeness. Entry `(k, m)` stands for `⟨ψ|O_k† O_m|ψ⟩`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::assemblage::{check_povm, BoxDistribution, MdiAssemblage};
use crate::error::Error;
use crate::sdp::model::hvec_offdiag;
use crate::sdp::{solve, BlockId, ConicProblem, ConicSolver, FeasibilityVerdict, LinearMap, Status, Term};
use crate::tensor::{ComplexMatrix, Subsystem};
use crate::C64;

/// Label of the moment-matrix block.
pub const MOMENT: &str = "moment";

/// Largest Bob input dimension the builder accepts.
pub const MAX_INPUT_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    Identity,
    Alice { a: usize, x: usize },
    Bob { b: usize, i: usize, j: usize },
}

/// Index bookkeeping of the level-1 moment matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    pub operators: Vec<Operator>,
    na: usize,
    nx: usize,
    nb: usize,
    d: usize,
}

impl MomentMatrix {
    pub fn new(na: usize, nx: usize, nb: usize, d: usize) -> Self {
        let mut operators = vec![Operator::Identity];
        for x in 0..nx {
            for a in 0..na.saturating_sub(1) {
                operators.push(Operator::Alice { a, x });
            }
        }
        for b in 0..nb.saturating_sub(1) {
            for i in 0..d {
                for j in 0..d {
                    operators.push(Operator::Bob { b, i, j });
                }
            }
        }
        Self { operators, na, nx, nb, d }
    }

    pub fn for_assemblage(n: &MdiAssemblage) -> Self {
        Self::new(n.na(), n.nx(), n.nb(), n.d())
    }

    pub fn size(&self) -> usize {
        self.operators.len()
    }

    pub fn index(&self, op: Operator) -> Option<usize> {
        self.operators.iter().position(|o| *o == op)
    }

    fn alice(&self, a: usize, x: usize) -> usize {
        1 + x * (self.na - 1) + a
    }

    fn bob(&self, b: usize, i: usize, j: usize) -> usize {
        1 + self.nx * (self.na - 1) + (b * self.d + i) * self.d + j
    }

    /// Moment matrix of a realisation by a pure state `psi` on `A ⊗ B`,
    /// projective measurements for Alice and projective `F_b` on `B ⊗ B_in`.
    pub fn from_realization(
        &self,
        psi: &ComplexMatrix,
        alice: &[Vec<ComplexMatrix>],
        bob: &[ComplexMatrix],
        a_label: &str,
        b_label: &str,
        in_label: &str,
    ) -> Result<ComplexMatrix, Error> {
        let da = psi.dim_of(a_label)?;
        let db = psi.dim_of(b_label)?;
        let id_a = ComplexMatrix::identity(vec![Subsystem::new(a_label, da)])?;
        let id_b = ComplexMatrix::identity(vec![Subsystem::new(b_label, db)])?;
        let order = psi.labels();
        let ops: Vec<ComplexMatrix> = self
            .operators
            .iter()
            .map(|op| {
                let m = match *op {
                    Operator::Identity => id_a.kron(&id_b)?,
                    Operator::Alice { a, x } => alice[x][a].kron(&id_b)?,
                    Operator::Bob { b, i, j } => id_a.kron(&bob_block(&bob[b], b_label, in_label, i, j)?)?,
                };
                m.permute(&order)
            })
            .collect::<Result<_, Error>>()?;
        let n = self.size();
        let mut g = nalgebra::DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for k in 0..n {
            for m in 0..n {
                g[(k, m)] = ops[k].adjoint().matmul(&ops[m])?.matmul(psi)?.trace();
            }
        }
        ComplexMatrix::new(g, vec![Subsystem::new(MOMENT, n)])
    }
}

/// `⟨i|F|j⟩` on the `input` factor, as an operator on `keep`.
fn bob_block(f: &ComplexMatrix, keep: &str, input: &str, i: usize, j: usize) -> Result<ComplexMatrix, Error> {
    let m = f.permute(&[keep, input])?;
    let d = m.dim_of(input)?;
    let dk = m.dim_of(keep)?;
    ComplexMatrix::from_fn(vec![Subsystem::new(keep, dk)], |r, c| m.get(r * d + i, c * d + j))
}

/// `Re` and `Im` of a complex linear form in the moment entries, as
/// coefficients on `hvec` coordinates.
#[derive(Clone, Debug, Default)]
struct Form {
    re: Vec<(usize, f64)>,
    im: Vec<(usize, f64)>,
}

impl Form {
    fn add(&mut self, n: usize, k: usize, m: usize, w: C64) {
        let (re, im): (Vec<(usize, f64)>, Vec<(usize, f64)>) = if k == m {
            (vec![(k, 1.0)], vec![])
        } else if k < m {
            let c = hvec_offdiag(n, k, m);
            (vec![(c, 1.0)], vec![(c + 1, 1.0)])
        } else {
            let c = hvec_offdiag(n, m, k);
            (vec![(c, 1.0)], vec![(c + 1, -1.0)])
        };
        for &(c, v) in &re {
            self.re.push((c, w.re * v));
            self.im.push((c, w.im * v));
        }
        for &(c, v) in &im {
            self.re.push((c, -w.im * v));
            self.im.push((c, w.re * v));
        }
    }
}

/// Which algebraic relations are imposed besides the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Relations {
    /// `⟨M_{a|x} M_{a'|x}⟩ = δ_{aa'} ⟨M_{a|x}⟩`.
    pub alice_projective: bool,
    /// `Σ_i ⟨F_b^{ji} F_{b'}^{ij'}⟩ = δ_{bb'} ⟨F_b^{jj'}⟩`.
    pub bob_orthogonality: bool,
}

impl Default for Relations {
    fn default() -> Self {
        Self {
            alice_projective: true,
            bob_orthogonality: true,
        }
    }
}

struct Builder {
    p: ConicProblem,
    block: BlockId,
    n: usize,
}

impl Builder {
    fn impose(&mut self, name: String, form: Form, rhs: C64) -> Result<(), Error> {
        let coords = self.n * self.n;
        for (part, entries, value) in [("re", form.re, rhs.re), ("im", form.im, rhs.im)] {
            let map = LinearMap::from_entries(coords, 1, entries.into_iter().map(|(c, v)| (0, c, v)).collect())?;
            if map.entries().is_empty() {
                if value.abs() > 1e-12 {
                    return Err(Error::InvalidAssemblage(format!("{name} ({part}) has no moment support but a nonzero value")));
                }
                continue;
            }
            let m = self.p.add_map(map);
            self.p.add_scalar_equality(
                format!("{name} [{part}]"),
                vec![Term {
                    block: self.block,
                    map: m,
                    scale: 1.0,
                }],
                value,
            )?;
        }
        Ok(())
    }

    fn pin(&mut self, name: String, k: usize, m: usize, value: C64) -> Result<(), Error> {
        let mut f = Form::default();
        f.add(self.n, k, m, C64::new(1.0, 0.0));
        self.impose(name, f, value)
    }
}

pub fn build_membership_test(n: &MdiAssemblage) -> Result<ConicProblem, Error> {
    build_membership_test_with(n, Relations::default())
}

pub fn build_membership_test_with(n: &MdiAssemblage, rel: Relations) -> Result<ConicProblem, Error> {
    if n.d() > MAX_INPUT_DIM {
        return Err(Error::DimensionMismatch(format!("input dimension {} exceeds {MAX_INPUT_DIM}", n.d())));
    }
    let mm = MomentMatrix::for_assemblage(n);
    let size = mm.size();
    let mut p = ConicProblem::new("level-1 membership");
    let block = p.add_psd("Gamma", vec![Subsystem::new(MOMENT, size)]);
    let mut bld = Builder { p, block, n: size };
    let one = C64::new(1.0, 0.0);
    bld.pin("<I> = 1".into(), 0, 0, one)?;
    let (na, nb, d) = (n.na(), n.nb(), n.d());
    let effects: Vec<ComplexMatrix> = (0..n.nx())
        .flat_map(|x| (0..na).flat_map(move |a| (0..nb).map(move |b| (a, b, x))))
        .map(|(a, b, x)| n.effect(a, b, x))
        .collect();
    let effect = |a: usize, b: usize, x: usize| &effects[(x * na + a) * nb + b];
    for x in 0..n.nx() {
        for a in 0..na - 1 {
            bld.pin(format!("<M{a}|{x}> = p(a|x)"), 0, mm.alice(a, x), C64::new(n.marginal(a, x), 0.0))?;
            for b in 0..nb - 1 {
                for i in 0..d {
                    for j in 0..d {
                        bld.pin(format!("<M{a}|{x} F{b}^{i}{j}>"), mm.alice(a, x), mm.bob(b, i, j), effect(a, b, x).get(i, j))?;
                    }
                }
            }
        }
    }
    for b in 0..nb - 1 {
        for i in 0..d {
            for j in 0..d {
                let v = (0..na).map(|a| effect(a, b, 0).get(i, j)).fold(C64::new(0.0, 0.0), |s, z| s + z);
                bld.pin(format!("<F{b}^{i}{j}>"), 0, mm.bob(b, i, j), v)?;
            }
        }
    }
    if rel.alice_projective {
        for x in 0..n.nx() {
            for a in 0..na - 1 {
                for a2 in 0..na - 1 {
                    let mut f = Form::default();
                    f.add(size, mm.alice(a, x), mm.alice(a2, x), one);
                    if a == a2 {
                        f.add(size, 0, mm.alice(a, x), -one);
                    }
                    bld.impose(format!("M{a}|{x} M{a2}|{x}"), f, C64::new(0.0, 0.0))?;
                }
            }
        }
    }
    if rel.bob_orthogonality {
        for b in 0..nb - 1 {
            for b2 in 0..nb - 1 {
                for j in 0..d {
                    for j2 in 0..d {
                        let mut f = Form::default();
                        for i in 0..d {
                            // (F_b^{ij})† F_{b'}^{ij'} is the (F_b^{ij}, F_{b'}^{ij'}) entry.
                            f.add(size, mm.bob(b, i, j), mm.bob(b2, i, j2), one);
                        }
                        if b == b2 {
                            f.add(size, 0, mm.bob(b, j, j2), -one);
                        }
                        bld.impose(format!("sum_i F{b}^i{j}† F{b2}^i{j2}"), f, C64::new(0.0, 0.0))?;
                    }
                }
            }
        }
    }
    Ok(bld.p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Certificate {
    /// Compatible with the level-1 relaxation; not a proof of quantum realisability.
    QuantumCompatibleAtLevel1,
    PostQuantum,
    Indeterminate,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::QuantumCompatibleAtLevel1 => "QuantumCompatibleAtLevel1",
            Self::PostQuantum => "PostQuantum",
            Self::Indeterminate => "Indeterminate",
        }
    }

    pub fn from_status(s: Status) -> Self {
        match s {
            Status::Feasible => Self::QuantumCompatibleAtLevel1,
            Status::Infeasible => Self::PostQuantum,
            Status::Indeterminate => Self::Indeterminate,
        }
    }
}

pub fn certify(n: &MdiAssemblage, eps_feas: f64, solver: &dyn ConicSolver) -> Result<(Certificate, FeasibilityVerdict), Error> {
    let v = solve(&build_membership_test(n)?, eps_feas, solver);
    Ok((Certificate::from_status(v.status), v))
}

/// Bob feeds the state `inputs[y]` into `B_in`: `p(ab|xy) = tr(Ñ_{ab|x} ρ_y)`.
pub fn mdi_box(n: &MdiAssemblage, inputs: &[ComplexMatrix]) -> Result<BoxDistribution, Error> {
    for rho in inputs {
        if rho.dim() != n.d() {
            return Err(Error::DimensionMismatch("input state has the wrong dimension".into()));
        }
    }
    let mut table = Vec::with_capacity(n.na() * n.nb() * n.nx() * inputs.len());
    for x in 0..n.nx() {
        for y in 0..inputs.len() {
            for a in 0..n.na() {
                for b in 0..n.nb() {
                    table.push(((a, b, x, y), n.effect(a, b, x).data().component_mul(&inputs[y].data().transpose()).sum().re));
                }
            }
        }
    }
    Ok(BoxDistribution::from_fn(n.na(), n.nb(), n.nx(), inputs.len(), |a, b, x, y| {
        table.iter().find(|(k, _)| *k == (a, b, x, y)).map_or(0.0, |(_, v)| *v)
    }))
}

/// Checks that Bob's measurement is a POVM; used before building realisations.
pub fn check_bob_measurement(bob: &[ComplexMatrix], d: usize) -> Result<(), Error> {
    check_povm(bob, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::{mdi_from_quantum, B, B_IN};
    use crate::catalog::{n_pr, n_ptp};
    use crate::sdp::InteriorPoint;
    use crate::tensor::qubit;

    #[test]
    fn index_set_has_eight_rows_for_the_standard_case() {
        let mm = MomentMatrix::new(2, 3, 2, 2);
        assert_eq!(mm.size(), 8);
        assert_eq!(mm.operators[1], Operator::Alice { a: 0, x: 0 });
        assert_eq!(mm.operators[5], Operator::Bob { b: 0, i: 0, j: 1 });
        assert_eq!(mm.index(Operator::Bob { b: 0, i: 1, j: 1 }), Some(7));
    }

    fn bell_projectors() -> Vec<ComplexMatrix> {
        let phi = qubit::bell_state(B, B_IN);
        let rest = &ComplexMatrix::identity(phi.subsystems().to_vec()).unwrap() - &phi;
        vec![phi, rest]
    }

    fn alice_paulis() -> Vec<Vec<ComplexMatrix>> {
        (0..3).map(|ax| (0..2).map(|a| qubit::pauli_effect(ax, a, "A")).collect()).collect()
    }

    #[test]
    fn realised_moment_matrix_is_a_witness() {
        let psi = qubit::bell_state("A", B);
        let bob = bell_projectors();
        let n = mdi_from_quantum(&psi, &alice_paulis(), &bob).unwrap();
        let mm = MomentMatrix::for_assemblage(&n);
        let g = mm.from_realization(&psi, &alice_paulis(), &bob, "A", B, B_IN).unwrap();
        assert!(g.min_eigenvalue() > -1e-12);
        let p = build_membership_test(&n).unwrap();
        let point = vec![crate::sdp::BlockValue::Hermitian(g)];
        assert!(p.max_residual(&point).unwrap() < 1e-12);
        let (c, _) = certify(&n, 1e-6, &InteriorPoint::default()).unwrap();
        assert_eq!(c, Certificate::QuantumCompatibleAtLevel1);
    }

    #[test]
    fn catalog_verdicts() {
        let ip = InteriorPoint::default();
        let (pr, v) = certify(&n_pr().unwrap(), 1e-6, &ip).unwrap();
        assert_eq!(pr, Certificate::PostQuantum, "{:?}", v.diagnostics);
        let (ptp, _) = certify(&n_ptp().unwrap(), 1e-6, &ip).unwrap();
        // The controlled transpose only sees B_in dephased, so N^PTP admits
        // a local model and the relaxation accepts it.
        assert_eq!(ptp, Certificate::QuantumCompatibleAtLevel1);
    }

    #[test]
    fn pr_assemblage_gives_a_pr_box() {
        let inputs = [qubit::basis_projector(0, B_IN), qubit::basis_projector(1, B_IN)];
        let bx = mdi_box(&n_pr().unwrap(), &inputs).unwrap();
        let mut chsh = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let e: f64 = (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| if a == b { bx.p(a, b, x, y) } else { -bx.p(a, b, x, y) })
                    .sum();
                chsh += if x * y == 1 { -e } else { e };
            }
        }
        assert!(chsh.abs() > 2.0 * 2f64.sqrt() + 1e-6, "{chsh}");
    }
}
