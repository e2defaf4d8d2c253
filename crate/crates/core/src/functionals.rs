//! Linear functionals `S[Σ] = Σ_{axy} tr(F_{axy} σ_{a|xy})` on
//! Bob-with-input assemblages.

use alloc::format;
use alloc::vec::Vec;

use crate::assemblage::{BwiAssemblage, B};
use crate::error::Error;
use crate::tensor::{qubit, ComplexMatrix, HERMITIAN_TOL};

/// Coefficient operators indexed like assemblage elements, `(y * nx + x) * na + a`.
#[derive(Clone, Debug, PartialEq)]
pub struct BwiFunctional {
    na: usize,
    nx: usize,
    ny: usize,
    d: usize,
    coefficients: Vec<ComplexMatrix>,
}

impl BwiFunctional {
    pub fn new(na: usize, nx: usize, ny: usize, d: usize, coefficients: Vec<ComplexMatrix>) -> Result<Self, Error> {
        if coefficients.len() != na * nx * ny {
            return Err(Error::AlphabetMismatch("coefficient count does not match alphabets".into()));
        }
        for (k, f) in coefficients.iter().enumerate() {
            if f.dim() != d {
                return Err(Error::DimensionMismatch(format!("coefficient {k} has dimension {}", f.dim())));
            }
            if !f.is_hermitian(HERMITIAN_TOL) {
                return Err(Error::NotHermitian(f.hermiticity_defect()));
            }
        }
        Ok(Self { na, nx, ny, d, coefficients })
    }

    pub fn coefficient(&self, a: usize, x: usize, y: usize) -> &ComplexMatrix {
        &self.coefficients[(y * self.nx + x) * self.na + a]
    }
}

pub fn evaluate(f: &BwiFunctional, s: &BwiAssemblage) -> Result<f64, Error> {
    if (f.na, f.nx, f.ny) != (s.na(), s.nx(), s.ny()) {
        return Err(Error::AlphabetMismatch(format!(
            "functional has alphabets {:?}, assemblage {:?}",
            (f.na, f.nx, f.ny),
            (s.na(), s.nx(), s.ny())
        )));
    }
    if f.d != s.d() {
        return Err(Error::DimensionMismatch(format!(
            "functional acts on dimension {}, assemblage on {}",
            f.d,
            s.d()
        )));
    }
    let mut total = 0.0;
    for y in 0..f.ny {
        for x in 0..f.nx {
            for a in 0..f.na {
                let c = f.coefficient(a, x, y).data();
                let e = s.element(a, x, y).data();
                total += c.component_mul(&e.transpose()).sum().re;
            }
        }
    }
    Ok(total)
}

/// `½(I + (-1)^a σ_x)` transposed when `y = 1`, with `x ∈ {0, 1, 2}` for X, Y, Z.
fn ptp_projector(a: usize, x: usize, y: usize) -> ComplexMatrix {
    let p = qubit::pauli_effect(x, a, B);
    if y == 1 {
        p.transpose()
    } else {
        p
    }
}

/// `F_{axy} = ½(I − (−1)^a σ_x)^{T^y}`, vanishing exactly on the PTP assemblage.
pub fn make_sptp() -> BwiFunctional {
    let mut coefficients = Vec::with_capacity(12);
    for y in 0..2 {
        for x in 0..3 {
            for a in 0..2 {
                coefficients.push(ptp_projector(1 - a, x, y));
            }
        }
    }
    BwiFunctional::new(2, 3, 2, 2, coefficients).expect("PTP functional")
}

/// Whether every `σ_{a|xy}` equals `α ½(I + (−1)^a σ_x)^{T^y}` with `α ∈ [0, 1]`.
pub fn remark1_support_check(s: &BwiAssemblage, tol: f64) -> bool {
    if s.d() != 2 || s.na() != 2 || s.nx() != 3 || s.ny() != 2 {
        return false;
    }
    (0..2).all(|y| {
        (0..3).all(|x| {
            (0..2).all(|a| {
                let e = s.element(a, x, y);
                let alpha = e.trace().re;
                let target = ptp_projector(a, x, y).scale(alpha);
                alpha >= -tol && alpha <= 1.0 + tol && e.max_abs_diff(&target) <= tol
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::bwi_from_quantum;
    use crate::catalog::{sigma_aq, sigma_pr, sigma_ptp};
    use crate::random::{random_channel, random_density, random_povm, seeded};
    use crate::tensor::Subsystem;

    #[test]
    fn coefficients_are_complete_projectors() {
        let f = make_sptp();
        assert!(f.coefficient(0, 2, 0).max_abs_diff(&qubit::basis_projector(1, B)) < 1e-15);
        for y in 0..2 {
            for x in 0..3 {
                let sum = f.coefficient(0, x, y) + f.coefficient(1, x, y);
                assert!(sum.max_abs_diff(&qubit::identity(B)) < 1e-15);
                for a in 0..2 {
                    let c = f.coefficient(a, x, y);
                    assert!(c.matmul(c).unwrap().max_abs_diff(c) < 1e-15);
                    assert!(c.transpose().max_abs_diff(f.coefficient(a, x, 1 - y)) < 1e-15);
                }
            }
        }
    }

    #[test]
    fn catalog_values() {
        let f = make_sptp();
        assert!(evaluate(&f, &sigma_ptp().unwrap()).unwrap().abs() < 1e-9);
        let pr = evaluate(&f, &sigma_pr().unwrap()).unwrap();
        assert!((pr - 3.0).abs() < 1e-12, "{pr}");
        assert!(remark1_support_check(&sigma_ptp().unwrap(), 1e-9));
        assert!(!remark1_support_check(&sigma_pr().unwrap(), 1e-9));
        assert!(matches!(evaluate(&f, &sigma_aq().unwrap()), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn zero_elements_are_accepted() {
        let s = BwiAssemblage::from_fn(2, 3, 2, 2, |a, x, y| {
            Ok(if a == 0 {
                ptp_projector(a, x, y)
            } else {
                ComplexMatrix::zeros(vec![Subsystem::new(B, 2)])?
            })
        })
        .unwrap();
        assert!(remark1_support_check(&s, 1e-12));
        assert!(evaluate(&make_sptp(), &s).unwrap().abs() < 1e-15);
    }

    #[test]
    fn nonnegative_on_quantum_assemblages() {
        let mut rng = seeded(7);
        let f = make_sptp();
        for _ in 0..1000 {
            let rho = random_density(&mut rng, vec![Subsystem::new("A", 2), Subsystem::new(B, 2)]);
            let povm: Vec<Vec<ComplexMatrix>> = (0..3).map(|_| random_povm(&mut rng, 2, vec![Subsystem::new("A", 2)])).collect();
            let xi: Vec<_> = (0..2)
                .map(|_| random_channel(&mut rng, vec![Subsystem::new(B, 2)], vec![Subsystem::new("B'", 2)], 2))
                .collect();
            let s = bwi_from_quantum(&rho, &povm, &xi).unwrap();
            assert!(evaluate(&f, &s).unwrap() >= -1e-9);
        }
    }

    /// Every `(x, y)` pair gets a Pauli eigenbasis and an ordering.
    #[test]
    fn vanishing_iff_supported_on_ptp_projectors() {
        let choices: Vec<(usize, usize)> = (0..3).flat_map(|k| (0..2).map(move |s| (k, s))).collect();
        let f = make_sptp();
        let mut zeros = 0;
        for code in 0..choices.len().pow(6) {
            let mut c = code;
            let pick: Vec<(usize, usize)> = (0..6)
                .map(|_| {
                    let v = choices[c % 6];
                    c /= 6;
                    v
                })
                .collect();
            let s = BwiAssemblage::from_fn(2, 3, 2, 2, |a, x, y| {
                let (k, sign) = pick[y * 3 + x];
                let p = qubit::pauli_effect(k, (a + sign) % 2, B).scale(0.5);
                Ok(if y == 1 { p.transpose() } else { p })
            })
            .unwrap();
            let zero = evaluate(&f, &s).unwrap().abs() < 1e-12;
            assert_eq!(zero, remark1_support_check(&s, 1e-12), "{pick:?}");
            zeros += zero as usize;
        }
        assert_eq!(zeros, 1);
    }
}
