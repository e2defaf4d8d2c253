//! Seeded random states, channels and measurements.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::choi::ChoiOperator;
use crate::tensor::{ComplexMatrix, Subsystem};
use crate::C64;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Hermitian inverse square root of a positive definite matrix.
pub fn inverse_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut d = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        d[(i, i)] = C64::new(1.0 / crate::math::sqrt(eig.eigenvalues[i].max(1e-300)), 0.0);
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Isometry `d_in -> d_out` obtained by orthonormalising a Ginibre matrix.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, d_out: usize, d_in: usize) -> DMatrix<C64> {
    assert!(d_out >= d_in, "an isometry needs d_out >= d_in");
    let g = ginibre(rng, d_out, d_in);
    let gram = g.adjoint() * &g;
    g * inverse_sqrt(&gram)
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<C64> {
    random_isometry(rng, d, d)
}

/// Mixed state `G G^† / tr` from a square Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, subsystems: Vec<Subsystem>) -> ComplexMatrix {
    let n: usize = subsystems.iter().map(|s| s.dim).product();
    let g = ginibre(rng, n, n);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    ComplexMatrix::new(w.map(|z| z / tr), subsystems).expect("dimensions agree")
}

/// Random pure state vector.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let g: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = crate::math::sqrt(g.iter().map(|z| z.norm_sqr()).sum());
    g.into_iter().map(|z| z / norm).collect()
}

/// Random CPTP map from a Stinespring isometry with an environment of
/// dimension `d_env`, enlarged to at least `d_in / d_out`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, inputs: Vec<Subsystem>, outputs: Vec<Subsystem>, d_env: usize) -> ChoiOperator {
    let d_in: usize = inputs.iter().map(|s| s.dim).product();
    let d_out: usize = outputs.iter().map(|s| s.dim).product();
    let d_env = d_env.max(d_in.div_ceil(d_out));
    let v = random_isometry(rng, d_out * d_env, d_in);
    let outs = outputs.clone();
    ChoiOperator::from_map(inputs, outputs, |rho| {
        let big = &v * rho.data() * v.adjoint();
        let reduced = DMatrix::from_fn(d_out, d_out, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..d_env {
                acc += big[(i * d_env + e, j * d_env + e)];
            }
            acc
        });
        ComplexMatrix::new(reduced, outs.clone())
    })
    .expect("dimensions agree")
}

/// Random POVM with `outcomes` elements.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, outcomes: usize, subsystems: Vec<Subsystem>) -> Vec<ComplexMatrix> {
    let n: usize = subsystems.iter().map(|s| s.dim).product();
    let parts: Vec<DMatrix<C64>> = (0..outcomes)
        .map(|_| {
            let g = ginibre(rng, n, n);
            &g * g.adjoint()
        })
        .collect();
    let total = parts.iter().fold(DMatrix::from_element(n, n, C64::new(0.0, 0.0)), |acc, p| acc + p);
    let s = inverse_sqrt(&total);
    parts
        .into_iter()
        .map(|p| {
            let e = &s * p * &s;
            let e = (&e + e.adjoint()).map(|z| z * 0.5);
            ComplexMatrix::new(e, subsystems.clone()).expect("dimensions agree")
        })
        .collect()
}

/// Uniformly random point of the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -crate::math::ln(1.0 - rng.gen::<f64>())).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Random conditional distribution table `p(a|x)` indexed `[x][a]`.
pub fn random_response<R: Rng + ?Sized>(rng: &mut R, na: usize, nx: usize, deterministic: bool) -> Vec<Vec<f64>> {
    (0..nx)
        .map(|_| {
            if deterministic {
                let mut v = vec![0.0; na];
                v[rng.gen_range(0..na)] = 1.0;
                v
            } else {
                random_distribution(rng, na)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channels_are_cptp() {
        let mut rng = seeded(1);
        for env in 1..4 {
            let w = random_channel(&mut rng, vec![Subsystem::new("i", 2)], vec![Subsystem::new("o", 3)], env);
            assert!(w.is_cptp(1e-9));
        }
    }

    #[test]
    fn povms_are_complete() {
        let mut rng = seeded(2);
        let povm = random_povm(&mut rng, 3, vec![Subsystem::new("b", 2)]);
        let sum = povm.iter().skip(1).fold(povm[0].clone(), |a, b| &a + b);
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(vec![Subsystem::new("b", 2)]).unwrap()) < 1e-12);
        assert!(povm.iter().all(|e| e.is_psd(1e-12)));
    }

    #[test]
    fn densities_have_unit_trace() {
        let mut rng = seeded(3);
        let r = random_density(&mut rng, vec![Subsystem::new("a", 3)]);
        assert!((r.trace().re - 1.0).abs() < 1e-14);
        assert!(r.is_psd(1e-12));
    }
}
