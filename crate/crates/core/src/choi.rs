//! Choi operators and the link product.
//!
//! A map `E` from factors `in` to factors `out` is stored as
//! `W = (E ⊗ I)|Ω><Ω|` with the normalised `|Ω> = d_in^{-1/2} Σ_i |ii>`,
//! laid out as `out ⊗ in`. A CPTP map therefore has `tr_out W = I / d_in`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::tensor::{ComplexMatrix, Subsystem, SubsystemLabel, HERMITIAN_TOL, PSD_TOL};
use crate::C64;

/// Tolerance of the comb factorisation test.
pub const COMB_FACTORISATION_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiOperator {
    matrix: ComplexMatrix,
    inputs: Vec<SubsystemLabel>,
    outputs: Vec<SubsystemLabel>,
}

/// Outcome of [`ChoiOperator::comb_no_signalling`].
#[derive(Clone, Debug)]
pub struct CombFactorisation {
    pub factorises: bool,
    /// Frobenius distance between the reduced comb and its best product form.
    pub distance: f64,
    /// The marginal map from the remaining inputs to the remaining outputs.
    pub marginal: ChoiOperator,
}

fn product_dim(s: &[Subsystem]) -> usize {
    s.iter().map(|s| s.dim).product()
}

impl ChoiOperator {
    /// Wrap a matrix, declaring which of its factors are inputs and which
    /// are outputs.
    pub fn new(matrix: ComplexMatrix, inputs: &[&str], outputs: &[&str]) -> Result<Self, Error> {
        let mut seen = 0;
        for l in inputs.iter().chain(outputs) {
            matrix.position(l)?;
            seen += 1;
        }
        if seen != matrix.subsystems().len() {
            return Err(Error::InvalidMap("every factor must be an input or an output".into()));
        }
        for l in inputs {
            if outputs.contains(l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        Ok(Self {
            matrix,
            inputs: inputs.iter().map(|&l| l.into()).collect(),
            outputs: outputs.iter().map(|&l| l.into()).collect(),
        })
    }

    /// Choi operator of a linear map given by its action on operators over
    /// `inputs`, returning operators over `outputs`.
    pub fn from_map<F>(inputs: Vec<Subsystem>, outputs: Vec<Subsystem>, mut apply: F) -> Result<Self, Error>
    where
        F: FnMut(&ComplexMatrix) -> Result<ComplexMatrix, Error>,
    {
        let d_in = product_dim(&inputs);
        let d_out = product_dim(&outputs);
        let mut all = outputs.clone();
        all.extend(inputs.iter().cloned());
        let mut w = ComplexMatrix::zeros(all)?.into_data();
        let norm = 1.0 / d_in as f64;
        for i in 0..d_in {
            for j in 0..d_in {
                let unit = ComplexMatrix::from_fn(inputs.clone(), |r, c| if r == i && c == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })?;
                let img = apply(&unit)?;
                if img.dim() != d_out {
                    return Err(Error::DimensionMismatch("map output has wrong dimension".into()));
                }
                for o in 0..d_out {
                    for p in 0..d_out {
                        w[(o * d_in + i, p * d_in + j)] += img.get(o, p) * norm;
                    }
                }
            }
        }
        let mut subsystems = outputs.clone();
        subsystems.extend(inputs.iter().cloned());
        let ins: Vec<&str> = inputs.iter().map(|s| s.label.as_str()).collect();
        let outs: Vec<&str> = outputs.iter().map(|s| s.label.as_str()).collect();
        Self::new(ComplexMatrix::new(w, subsystems)?, &ins, &outs)
    }

    /// Identity channel from `input` to `output`.
    pub fn identity_channel(input: &str, output: &str, d: usize) -> Result<Self, Error> {
        let out = Subsystem::new(output, d);
        Self::from_map(vec![Subsystem::new(input, d)], vec![out.clone()], |rho| {
            rho.clone().with_subsystems(vec![out.clone()])
        })
    }

    /// A state on `outputs`, viewed as a map from the trivial system.
    pub fn from_state(state: ComplexMatrix) -> Self {
        let outs: Vec<SubsystemLabel> = state.subsystems().iter().map(|s| s.label.clone()).collect();
        Self {
            matrix: state,
            inputs: Vec::new(),
            outputs: outs,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn inputs(&self) -> Vec<&str> {
        self.inputs.iter().map(|l| l.as_str()).collect()
    }

    pub fn outputs(&self) -> Vec<&str> {
        self.outputs.iter().map(|l| l.as_str()).collect()
    }

    fn subsystems_of(&self, labels: &[SubsystemLabel]) -> Vec<Subsystem> {
        labels
            .iter()
            .map(|l| self.matrix.subsystems()[self.matrix.position(l.as_str()).unwrap()].clone())
            .collect()
    }

    pub fn input_subsystems(&self) -> Vec<Subsystem> {
        self.subsystems_of(&self.inputs)
    }

    pub fn output_subsystems(&self) -> Vec<Subsystem> {
        self.subsystems_of(&self.outputs)
    }

    pub fn d_in(&self) -> usize {
        product_dim(&self.input_subsystems())
    }

    pub fn d_out(&self) -> usize {
        product_dim(&self.output_subsystems())
    }

    /// Same map with the matrix replaced (factor structure must agree).
    pub fn with_matrix(&self, matrix: ComplexMatrix) -> Result<Self, Error> {
        if matrix.subsystems() != self.matrix.subsystems() {
            return Err(Error::DimensionMismatch("factor structure differs".into()));
        }
        Ok(Self {
            matrix,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        })
    }

    pub fn relabel(mut self, from: &str, to: &str) -> Result<Self, Error> {
        self.matrix = self.matrix.relabel(from, to)?;
        for l in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            if l.as_str() == from {
                *l = SubsystemLabel::new(to);
            }
        }
        Ok(self)
    }

    /// Matrix reordered as `outputs ⊗ inputs`.
    pub fn canonical_matrix(&self) -> ComplexMatrix {
        let mut order = self.outputs();
        order.extend(self.inputs());
        self.matrix.permute(&order).expect("labels are consistent")
    }

    /// `E(rho) = d_in tr_in[W (I_out ⊗ rho^T)]`. `rho` must carry the input
    /// labels (in any order).
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        let ins = self.inputs();
        let mut rho_labels = rho.labels();
        rho_labels.sort_unstable();
        let mut want = ins.clone();
        want.sort_unstable();
        if rho_labels != want {
            return Err(Error::DimensionMismatch("operand does not live on the input factors".into()));
        }
        let rho = rho.permute(&ins)?;
        if rho.dims() != self.input_subsystems().iter().map(|s| s.dim).collect::<Vec<_>>() {
            return Err(Error::DimensionMismatch("input dimensions differ".into()));
        }
        let w = self.canonical_matrix();
        let d_in = self.d_in();
        let d_out = self.d_out();
        let mut out = ComplexMatrix::zeros(self.output_subsystems())?.into_data();
        for o in 0..d_out {
            for p in 0..d_out {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..d_in {
                    for j in 0..d_in {
                        acc += w.get(o * d_in + i, p * d_in + j) * rho.get(i, j);
                    }
                }
                out[(o, p)] = acc * d_in as f64;
            }
        }
        ComplexMatrix::new(out, self.output_subsystems())
    }

    /// Link product over all wires the two operators share, scaled by the
    /// product of the contracted dimensions.
    pub fn link(&self, other: &Self) -> Result<Self, Error> {
        let shared: Vec<&str> = self.matrix.labels().into_iter().filter(|l| other.matrix.has_label(l)).collect();
        for l in &shared {
            let out_in = self.outputs().contains(l) && other.inputs().contains(l);
            let in_out = self.inputs().contains(l) && other.outputs().contains(l);
            if !(out_in || in_out) {
                return Err(Error::InvalidMap(alloc::format!(
                    "wire {l} must be an output of one operand and an input of the other"
                )));
            }
        }
        let factor: usize = shared.iter().map(|l| self.matrix.dim_of(l).unwrap()).product();
        let m = self.matrix.link(&other.matrix)?.scale(factor as f64);
        let keep = |v: Vec<&str>| -> Vec<SubsystemLabel> { v.into_iter().filter(|l| !shared.contains(l)).map(SubsystemLabel::new).collect() };
        let mut inputs = keep(self.inputs());
        inputs.extend(keep(other.inputs()));
        let mut outputs = keep(self.outputs());
        outputs.extend(keep(other.outputs()));
        Ok(Self { matrix: m, inputs, outputs })
    }

    /// `tr_out W` on the input factors.
    pub fn output_marginal(&self) -> ComplexMatrix {
        self.matrix.partial_trace(&self.inputs()).expect("labels are consistent")
    }

    /// Max entrywise deviation of `tr_out W` from `I / d_in`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let marg = self.output_marginal();
        let id = ComplexMatrix::identity(marg.subsystems().to_vec()).unwrap().scale(1.0 / self.d_in() as f64);
        marg.max_abs_diff(&id)
    }

    pub fn is_hermitian(&self) -> bool {
        self.matrix.is_hermitian(HERMITIAN_TOL)
    }

    pub fn is_cp(&self, tol: f64) -> bool {
        self.matrix.is_psd(tol)
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.is_cp(tol.max(PSD_TOL)) && self.trace_preservation_defect() <= tol
    }

    /// CP and `tr_out W <= I / d_in`.
    pub fn is_cptni(&self, tol: f64) -> bool {
        if !self.is_cp(tol.max(PSD_TOL)) {
            return false;
        }
        let marg = self.output_marginal();
        let id = ComplexMatrix::identity(marg.subsystems().to_vec()).unwrap().scale(1.0 / self.d_in() as f64);
        (&id - &marg).min_eigenvalue() >= -tol
    }

    /// Check that tracing `discard` leaves `F ⊗ I/d` on `trivial`, i.e. the
    /// comb does not signal from `trivial` (an input) to the remaining
    /// outputs. `F` is returned as a map between the remaining wires.
    pub fn comb_no_signalling(&self, discard: &[&str], trivial: &[&str], tol: f64) -> Result<CombFactorisation, Error> {
        let reduced = self.matrix.trace_out(discard)?;
        let f = reduced.trace_out(trivial)?;
        let d_triv: usize = trivial.iter().map(|l| reduced.dim_of(l).unwrap()).product();
        let triv_sub: Vec<Subsystem> = trivial.iter().map(|l| reduced.subsystems()[reduced.position(l).unwrap()].clone()).collect();
        let id = ComplexMatrix::identity(triv_sub)?.scale(1.0 / d_triv as f64);
        let product = f.kron(&id)?.permute(&reduced.labels())?;
        let distance = (&reduced - &product).frobenius_norm();
        let left: Vec<&str> = f.labels();
        let ins: Vec<&str> = self.inputs().into_iter().filter(|l| left.contains(l)).collect();
        let outs: Vec<&str> = self.outputs().into_iter().filter(|l| left.contains(l)).collect();
        let marginal = ChoiOperator::new(f, &ins, &outs)?;
        Ok(CombFactorisation {
            factorises: distance <= tol,
            distance,
            marginal,
        })
    }
}

/// Transpose map on a single factor (Hermiticity- and trace-preserving, not CP).
pub fn transpose_map(input: &str, output: &str, d: usize) -> Result<ChoiOperator, Error> {
    let out = Subsystem::new(output, d);
    ChoiOperator::from_map(vec![Subsystem::new(input, d)], vec![out.clone()], |rho| {
        rho.transpose().with_subsystems(vec![out.clone()])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::qubit;

    fn omega_ab() -> ComplexMatrix {
        qubit::bell_state("out", "in")
    }

    fn depolarizing(input: &str, output: &str) -> ChoiOperator {
        let out = Subsystem::new(output, 2);
        ChoiOperator::from_map(vec![Subsystem::new(input, 2)], vec![out.clone()], |rho| {
            Ok(ComplexMatrix::identity(vec![out.clone()])?.scale_complex(rho.trace() * 0.5))
        })
        .unwrap()
    }

    fn random_qubit_state(seed: u64) -> ComplexMatrix {
        let mut rng = crate::random::seeded(seed);
        crate::random::random_density(&mut rng, vec![Subsystem::new("in", 2)])
    }

    #[test]
    fn identity_channel_choi_is_omega() {
        let w = ChoiOperator::identity_channel("in", "out", 2).unwrap();
        assert!(w.matrix().max_abs_diff(&omega_ab()) < 1e-15);
        assert!((w.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!(w.is_cptp(1e-12));
    }

    #[test]
    fn transpose_map_choi_is_half_swap() {
        let w = transpose_map("in", "out", 2).unwrap();
        let swap = omega_ab().partial_transpose(&["out"]).unwrap();
        assert!(w.matrix().max_abs_diff(&swap) < 1e-15);
        assert!(!w.is_cp(PSD_TOL));
        assert!(w.trace_preservation_defect() < 1e-15);
    }

    #[test]
    fn depolarizing_choi_is_maximally_mixed() {
        let w = depolarizing("in", "out");
        let id = ComplexMatrix::identity(w.matrix().subsystems().to_vec()).unwrap().scale(0.25);
        assert!(w.matrix().max_abs_diff(&id) < 1e-15);
    }

    #[test]
    fn apply_reproduces_actions() {
        let rho = random_qubit_state(3);
        let out = |m: ComplexMatrix| m.with_subsystems(vec![Subsystem::new("out", 2)]).unwrap();
        let id = ChoiOperator::identity_channel("in", "out", 2).unwrap();
        assert!(id.apply(&rho).unwrap().max_abs_diff(&out(rho.clone())) < 1e-14);
        let t = transpose_map("in", "out", 2).unwrap();
        assert!(t.apply(&rho).unwrap().max_abs_diff(&out(rho.transpose())) < 1e-14);
        let dep = depolarizing("in", "out").apply(&rho).unwrap();
        assert!(dep.max_abs_diff(&qubit::identity("out").scale(0.5)) < 1e-14);
    }

    #[test]
    fn apply_rejects_wrong_operand() {
        let id = ChoiOperator::identity_channel("in", "out", 2).unwrap();
        assert!(id.apply(&qubit::identity("x")).is_err());
    }

    fn identity_comb() -> ChoiOperator {
        // pre: B_in' -> B_in ; post: B_out -> B_out'
        let pre = ChoiOperator::identity_channel("B_in'", "B_in", 2).unwrap();
        let post = ChoiOperator::identity_channel("B_out", "B_out'", 2).unwrap();
        let m = pre.matrix().kron(post.matrix()).unwrap();
        ChoiOperator::new(m, &["B_in'", "B_out"], &["B_in", "B_out'"]).unwrap()
    }

    #[test]
    fn identity_comb_link_returns_channel() {
        let e = depolarizing("B_in", "B_out");
        let mixed = {
            let out = Subsystem::new("B_out", 2);
            let u = qubit::rotation(1, 0.7, "B_out");
            ChoiOperator::from_map(vec![Subsystem::new("B_in", 2)], vec![out.clone()], |rho| {
                let r = rho.clone().with_subsystems(vec![out.clone()])?;
                let half = &r.conjugate_by(&u)?.scale(0.5) + &r.scale(0.5);
                Ok(half)
            })
            .unwrap()
        };
        for j in [e, mixed] {
            let linked = j.link(&identity_comb()).unwrap();
            let renamed = j.clone().relabel("B_in", "B_in'").unwrap().relabel("B_out", "B_out'").unwrap();
            let a = linked.canonical_matrix();
            let b = renamed.canonical_matrix();
            assert!(a.max_abs_diff(&b) < 1e-14);
            assert_eq!(linked.inputs(), vec!["B_in'"]);
            assert_eq!(linked.outputs(), vec!["B_out'"]);
        }
    }

    #[test]
    fn unitary_postprocessing_composes() {
        let e = depolarizing("B_in", "B_out");
        let pre = ChoiOperator::identity_channel("B_in'", "B_in", 2).unwrap();
        let out = Subsystem::new("B_out'", 2);
        let x = qubit::pauli_x("B_out'");
        let post = ChoiOperator::from_map(vec![Subsystem::new("B_out", 2)], vec![out.clone()], |rho| {
            rho.clone().with_subsystems(vec![out.clone()])?.conjugate_by(&x)
        })
        .unwrap();
        let comb = ChoiOperator::new(pre.matrix().kron(post.matrix()).unwrap(), &["B_in'", "B_out"], &["B_in", "B_out'"]).unwrap();
        let linked = e.link(&comb).unwrap();
        let direct = ChoiOperator::from_map(vec![Subsystem::new("B_in'", 2)], vec![out.clone()], |rho| {
            let r = rho.clone().with_subsystems(vec![Subsystem::new("B_in", 2)])?;
            e.apply(&r)?.with_subsystems(vec![out.clone()])?.conjugate_by(&x)
        })
        .unwrap();
        assert!(linked.canonical_matrix().max_abs_diff(&direct.canonical_matrix()) < 1e-14);
    }

    #[test]
    fn comb_factorisation() {
        let f = identity_comb().comb_no_signalling(&["B_out'"], &["B_out"], COMB_FACTORISATION_TOL).unwrap();
        assert!(f.factorises);
        let id = ChoiOperator::identity_channel("B_in'", "B_in", 2).unwrap();
        assert!(f.marginal.canonical_matrix().max_abs_diff(&id.canonical_matrix()) < 1e-15);

        // Route B_out into B_in: B_in' -> B_out', B_out -> B_in.
        let a = ChoiOperator::identity_channel("B_out", "B_in", 2).unwrap();
        let b = ChoiOperator::identity_channel("B_in'", "B_out'", 2).unwrap();
        let swap = ChoiOperator::new(a.matrix().kron(b.matrix()).unwrap(), &["B_out", "B_in'"], &["B_in", "B_out'"]).unwrap();
        let g = swap.comb_no_signalling(&["B_out'"], &["B_out"], COMB_FACTORISATION_TOL).unwrap();
        assert!(!g.factorises);
        assert!(g.distance > 0.1);
    }
}
