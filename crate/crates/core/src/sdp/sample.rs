//! Random LOSR-free assemblages: a shared variable `λ`, Alice's response
//! `p(a|x,λ)` and Bob's process for each `λ`.

use alloc::vec::Vec;

use rand::Rng;

use crate::assemblage::{Assemblage, AssemblageKind, BwiAssemblage, ChannelAssemblage, MdiAssemblage, B, B_IN, B_OUT};
use crate::choi::ChoiOperator;
use crate::error::Error;
use crate::random::{random_channel, random_density, random_distribution, random_povm, random_response, seeded};
use crate::tensor::{ComplexMatrix, Subsystem};

/// Outcome and setting counts; `ny` is used by Bob-with-input and `nb` by
/// MDI assemblages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabets {
    pub na: usize,
    pub nx: usize,
    pub ny: usize,
    pub nb: usize,
}

impl Default for Alphabets {
    fn default() -> Self {
        Self { na: 2, nx: 2, ny: 2, nb: 2 }
    }
}

/// Bob's dimensions. Bob-with-input assemblages use `d_out`, MDI ones `d_in`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub d_in: usize,
    pub d_out: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Self { d_in: 2, d_out: 2 }
    }
}

/// Number of hidden values and whether Alice answers deterministically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mixture {
    pub lambdas: usize,
    pub deterministic: bool,
}

impl Default for Mixture {
    fn default() -> Self {
        Self {
            lambdas: 3,
            deterministic: false,
        }
    }
}

fn check(al: &Alphabets, dims: &Dims, mix: &Mixture) -> Result<(), Error> {
    if al.na == 0 || al.nx == 0 || al.ny == 0 || al.nb == 0 || dims.d_in == 0 || dims.d_out == 0 || mix.lambdas == 0 {
        return Err(Error::ParameterOutOfRange(
            "alphabets, dimensions and the number of hidden values must be positive".into(),
        ));
    }
    Ok(())
}

/// `Σ_λ p(λ) p(a|x,λ) X_λ`.
fn mix_over<T>(
    weights: &[f64],
    responses: &[Vec<Vec<f64>>],
    a: usize,
    x: usize,
    parts: &[T],
    get: impl Fn(&T) -> &ComplexMatrix,
) -> Result<ComplexMatrix, Error> {
    let first = get(&parts[0]);
    let mut acc = ComplexMatrix::zeros(first.subsystems().to_vec())?;
    for (l, part) in parts.iter().enumerate() {
        let w = weights[l] * responses[l][x][a];
        if w != 0.0 {
            acc = &acc + &get(part).scale(w);
        }
    }
    Ok(acc)
}

pub fn sample_free_with<R: Rng + ?Sized>(rng: &mut R, kind: AssemblageKind, al: &Alphabets, dims: &Dims, mix: &Mixture) -> Result<Assemblage, Error> {
    check(al, dims, mix)?;
    let weights = random_distribution(rng, mix.lambdas);
    let responses: Vec<Vec<Vec<f64>>> = (0..mix.lambdas).map(|_| random_response(rng, al.na, al.nx, mix.deterministic)).collect();
    match kind {
        AssemblageKind::Channel => {
            let ins = [Subsystem::new(B_IN, dims.d_in)];
            let outs = [Subsystem::new(B_OUT, dims.d_out)];
            let chans: Vec<ChoiOperator> = (0..mix.lambdas).map(|_| random_channel(rng, ins.to_vec(), outs.to_vec(), 2)).collect();
            let mut els = Vec::with_capacity(al.na * al.nx);
            for x in 0..al.nx {
                for a in 0..al.na {
                    let m = mix_over(&weights, &responses, a, x, &chans, |c| c.matrix())?;
                    els.push(chans[0].with_matrix(m)?);
                }
            }
            Ok(ChannelAssemblage::new(al.na, al.nx, dims.d_in, dims.d_out, els)?.into())
        }
        AssemblageKind::Bwi => {
            let subs = [Subsystem::new(B, dims.d_out)];
            let states: Vec<Vec<ComplexMatrix>> = (0..mix.lambdas)
                .map(|_| (0..al.ny).map(|_| random_density(rng, subs.to_vec())).collect())
                .collect();
            Ok(BwiAssemblage::from_fn(al.na, al.nx, al.ny, dims.d_out, |a, x, y| {
                mix_over(&weights, &responses, a, x, &states, |s| &s[y])
            })?
            .into())
        }
        AssemblageKind::Mdi => {
            let subs = [Subsystem::new(B_IN, dims.d_in)];
            let scale = 1.0 / dims.d_in as f64;
            let chois: Vec<Vec<ComplexMatrix>> = (0..mix.lambdas)
                .map(|_| random_povm(rng, al.nb, subs.to_vec()).into_iter().map(|e| e.transpose().scale(scale)).collect())
                .collect();
            Ok(MdiAssemblage::from_fn(al.na, al.nb, al.nx, dims.d_in, |a, b, x| {
                mix_over(&weights, &responses, a, x, &chois, |c| &c[b])
            })?
            .into())
        }
    }
}

/// Draw a free assemblage from a seeded generator.
pub fn sample_free(kind: AssemblageKind, al: &Alphabets, dims: &Dims, seed: u64) -> Result<Assemblage, Error> {
    sample_free_with(&mut seeded(seed), kind, al, dims, &Mixture::default())
}
