//! Free-ness and conversion programs for the three assemblage families.
//!
//! Block order is part of the API: conversion problems list, for every
//! strategy `λ` in enumeration order, the blocks that `λ` owns.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::model::{BlockId, BlockValue, ConicProblem, LinearMap, MapId, Term};
use crate::assemblage::{Assemblage, BwiAssemblage, ChannelAssemblage, MdiAssemblage, B, B_IN, B_OUT};
use crate::choi::ChoiOperator;
use crate::error::Error;
use crate::strategies::{enumerate_alice, enumerate_bwi, response_functions, AliceAlphabets, DeterministicComb};
use crate::tensor::{ComplexMatrix, Subsystem};

/// Target-side copies of Bob's systems.
pub const B_IN_TARGET: &str = "B_in'";
pub const B_OUT_TARGET: &str = "B_out'";
pub const B_TARGET: &str = "B'";

fn term(block: BlockId, map: MapId) -> Term {
    Term { block, map, scale: 1.0 }
}

fn neg(block: BlockId, map: MapId) -> Term {
    Term { block, map, scale: -1.0 }
}

fn maximally_mixed(subs: &[Subsystem]) -> Result<ComplexMatrix, Error> {
    let d: usize = subs.iter().map(|s| s.dim).product();
    Ok(ComplexMatrix::identity(subs.to_vec())?.scale(1.0 / d as f64))
}

fn labels(subs: &[Subsystem]) -> Vec<&str> {
    subs.iter().map(|s| s.label.as_str()).collect()
}

/// `X ↦ tr_remove X` and the remaining factors, in their original order.
fn trace_map(subs: &[Subsystem], remove: &[&str]) -> Result<(LinearMap, Vec<Subsystem>), Error> {
    let kept: Vec<Subsystem> = subs.iter().filter(|s| !remove.contains(&s.label.as_str())).cloned().collect();
    let map = LinearMap::from_fn(subs, &kept, |x| x.trace_out(remove))?;
    Ok((map, kept))
}

/// `X ↦ X ⊗ I/d` on `extra`, reordered to `target`.
fn pad_map(subs: &[Subsystem], extra: &[Subsystem], target: &[Subsystem]) -> Result<LinearMap, Error> {
    let pad = maximally_mixed(extra)?;
    let order = labels(target);
    LinearMap::from_fn(subs, target, |x| x.kron(&pad)?.permute(&order))
}

fn zeros(subs: &[Subsystem]) -> Result<ComplexMatrix, Error> {
    ComplexMatrix::zeros(subs.to_vec())
}

fn relabel_all(m: ComplexMatrix, pairs: &[(&str, &str)]) -> Result<ComplexMatrix, Error> {
    pairs
        .iter()
        .try_fold(m, |m, (from, to)| if m.has_label(from) { m.relabel(from, to) } else { Ok(m) })
}

fn alice_alphabets(na: usize, nx: usize, na_t: usize, nx_t: usize) -> AliceAlphabets {
    AliceAlphabets {
        na,
        nx,
        na_target: na_t,
        nx_target: nx_t,
    }
}

/// Free-ness test of a channel assemblage.
pub fn build_free_test_channel(a: &ChannelAssemblage) -> Result<ConicProblem, Error> {
    let lambdas = response_functions(a.na(), a.nx())?;
    let subs = a.element(0, 0).canonical_matrix().subsystems().to_vec();
    let mut p = ConicProblem::new("channel free test");
    let (tr_out, ins) = trace_map(&subs, &[B_OUT])?;
    let tr_out = p.add_map(tr_out);
    let id = p.add_map(LinearMap::identity(subs.iter().map(|s| s.dim).product::<usize>().pow(2)));
    let prop = p.add_map(LinearMap::scalar_times(&maximally_mixed(&ins)?));
    let mut blocks = Vec::with_capacity(lambdas.len());
    for (l, _) in lambdas.iter().enumerate() {
        let j = p.add_psd(format!("J[{l}]"), subs.clone());
        let t = p.add_nonneg(format!("t[{l}]"));
        p.add_equality(format!("tr_out J[{l}] = t I/d"), vec![term(j, tr_out), neg(t, prop)], &zeros(&ins)?)?;
        blocks.push(j);
    }
    p.add_equality("sum tr_out J = I/d", blocks.iter().map(|&j| term(j, tr_out)).collect(), &maximally_mixed(&ins)?)?;
    for x in 0..a.nx() {
        for out in 0..a.na() {
            let terms = lambdas.iter().zip(&blocks).filter(|(l, _)| l[x] == out).map(|(_, &j)| term(j, id)).collect();
            p.add_equality(format!("J[{out}|{x}]"), terms, &a.element(out, x).canonical_matrix())?;
        }
    }
    Ok(p)
}

/// Free-ness test of a Bob-with-input assemblage.
pub fn build_free_test_bwi(s: &BwiAssemblage) -> Result<ConicProblem, Error> {
    let lambdas = response_functions(s.na(), s.nx())?;
    let subs = vec![Subsystem::new(B, s.d())];
    let mut p = ConicProblem::new("bwi free test");
    let id = p.add_map(LinearMap::identity(s.d() * s.d()));
    let tr = p.add_map(LinearMap::trace(s.d()));
    let one = p.add_map(LinearMap::identity(1));
    let mut blocks = vec![Vec::with_capacity(s.ny()); lambdas.len()];
    for (l, row) in blocks.iter_mut().enumerate() {
        let t = p.add_nonneg(format!("t[{l}]"));
        for y in 0..s.ny() {
            let rho = p.add_psd(format!("rho[{l},{y}]"), subs.clone());
            p.add_scalar_equality(format!("tr rho[{l},{y}] = t"), vec![term(rho, tr), neg(t, one)], 0.0)?;
            row.push(rho);
        }
    }
    for y in 0..s.ny() {
        p.add_scalar_equality(format!("sum tr rho[.,{y}] = 1"), blocks.iter().map(|r| term(r[y], tr)).collect(), 1.0)?;
    }
    for y in 0..s.ny() {
        for x in 0..s.nx() {
            for a in 0..s.na() {
                let terms = lambdas.iter().zip(&blocks).filter(|(l, _)| l[x] == a).map(|(_, r)| term(r[y], id)).collect();
                p.add_equality(format!("sigma[{a}|{x},{y}]"), terms, s.element(a, x, y))?;
            }
        }
    }
    Ok(p)
}

/// Free-ness test of an MDI assemblage: `J_{ab|x} = Σ_λ D(a|x,λ) J_{bλ}`
/// with `Σ_b J_{bλ} ∝ I`.
pub fn build_free_test_mdi(n: &MdiAssemblage) -> Result<ConicProblem, Error> {
    let lambdas = response_functions(n.na(), n.nx())?;
    let subs = vec![Subsystem::new(B_IN, n.d())];
    let mut p = ConicProblem::new("mdi free test");
    let id = p.add_map(LinearMap::identity(n.d() * n.d()));
    let prop = p.add_map(LinearMap::scalar_times(&maximally_mixed(&subs)?));
    let mut blocks = vec![Vec::with_capacity(n.nb()); lambdas.len()];
    for (l, row) in blocks.iter_mut().enumerate() {
        let t = p.add_nonneg(format!("t[{l}]"));
        for b in 0..n.nb() {
            row.push(p.add_psd(format!("J[{b},{l}]"), subs.clone()));
        }
        let mut terms: Vec<Term> = row.iter().map(|&j| term(j, id)).collect();
        terms.push(neg(t, prop));
        p.add_equality(format!("sum_b J[b,{l}] = t I/d"), terms, &zeros(&subs)?)?;
    }
    p.add_equality("sum J = I/d", blocks.iter().flatten().map(|&j| term(j, id)).collect(), &maximally_mixed(&subs)?)?;
    for x in 0..n.nx() {
        for a in 0..n.na() {
            for b in 0..n.nb() {
                let terms = lambdas.iter().zip(&blocks).filter(|(l, _)| l[x] == a).map(|(_, r)| term(r[b], id)).collect();
                p.add_equality(format!("J[{a}{b}|{x}]"), terms, n.element(a, b, x))?;
            }
        }
    }
    Ok(p)
}

pub fn build_free_test(a: &Assemblage) -> Result<ConicProblem, Error> {
    match a {
        Assemblage::Channel(c) => build_free_test_channel(c),
        Assemblage::Bwi(s) => build_free_test_bwi(s),
        Assemblage::Mdi(n) => build_free_test_mdi(n),
    }
}

/// Channel conversion program together with its strategy bookkeeping.
#[derive(Clone, Debug)]
pub struct ChannelConversion {
    pub problem: ConicProblem,
    pub combs: Vec<DeterministicComb>,
    /// `J_{ξλ}` on `B_in ⊗ B_out' ⊗ B_in' ⊗ B_out`.
    pub xi: Vec<BlockId>,
    /// `J_{Fλ}` on `B_in ⊗ B_in'`.
    pub f: Vec<BlockId>,
    na_target: usize,
}

fn xi_subsystems(d_in: usize, d_out: usize, d_in_t: usize, d_out_t: usize) -> Vec<Subsystem> {
    vec![
        Subsystem::new(B_IN, d_in),
        Subsystem::new(B_OUT_TARGET, d_out_t),
        Subsystem::new(B_IN_TARGET, d_in_t),
        Subsystem::new(B_OUT, d_out),
    ]
}

fn xi_choi(m: &ComplexMatrix) -> Result<ChoiOperator, Error> {
    ChoiOperator::new(m.clone(), &[B_IN_TARGET, B_OUT], &[B_IN, B_OUT_TARGET])
}

/// Target element on `B_out' ⊗ B_in'`.
fn channel_target(e: &ChoiOperator) -> Result<ComplexMatrix, Error> {
    relabel_all(e.canonical_matrix(), &[(B_OUT, B_OUT_TARGET), (B_IN, B_IN_TARGET)])
}

pub fn build_channel_conversion(src: &ChannelAssemblage, dst: &ChannelAssemblage) -> Result<ChannelConversion, Error> {
    let combs = enumerate_alice(alice_alphabets(src.na(), src.nx(), dst.na(), dst.nx()))?;
    let xs = xi_subsystems(src.d_in(), src.d_out(), dst.d_in(), dst.d_out());
    let fs = vec![xs[0].clone(), xs[2].clone()];
    let mut p = ConicProblem::new("channel conversion");
    let (tr_pre, pre_space) = trace_map(&xs, &[B_OUT_TARGET, B_IN])?;
    let tr_pre = p.add_map(tr_pre);
    let prop_xi = p.add_map(LinearMap::scalar_times(&maximally_mixed(&pre_space)?));
    let (tr_f, f_in) = trace_map(&fs, &[B_IN])?;
    let tr_f = p.add_map(tr_f);
    let prop_f = p.add_map(LinearMap::scalar_times(&maximally_mixed(&f_in)?));
    let (tr_post, comb_space) = trace_map(&xs, &[B_OUT_TARGET])?;
    let tr_post = p.add_map(tr_post);
    let pad = p.add_map(pad_map(&fs, &xs[3..], &comb_space)?);
    let target_space = channel_target(dst.element(0, 0))?.subsystems().to_vec();
    let mut links = Vec::with_capacity(src.na() * src.nx());
    for x in 0..src.nx() {
        for a in 0..src.na() {
            let j = src.element(a, x);
            let order = labels(&target_space);
            let map = LinearMap::from_fn(&xs, &target_space, |m| j.link(&xi_choi(m)?)?.canonical_matrix().permute(&order))?;
            links.push(p.add_map(map));
        }
    }
    let mut xi = Vec::with_capacity(combs.len());
    let mut f = Vec::with_capacity(combs.len());
    for l in 0..combs.len() {
        let jx = p.add_psd(format!("J_xi[{l}]"), xs.clone());
        let t = p.add_nonneg(format!("t[{l}]"));
        let jf = p.add_psd(format!("J_F[{l}]"), fs.clone());
        let s = p.add_nonneg(format!("s[{l}]"));
        p.add_equality(
            format!("tr_(B_out' B_in) J_xi[{l}] = t I/d"),
            vec![term(jx, tr_pre), neg(t, prop_xi)],
            &zeros(&pre_space)?,
        )?;
        p.add_equality(format!("tr_B_in J_F[{l}] = s I/d"), vec![term(jf, tr_f), neg(s, prop_f)], &zeros(&f_in)?)?;
        p.add_equality(
            format!("tr_B_out' J_xi[{l}] = J_F[{l}] x I/d"),
            vec![term(jx, tr_post), neg(jf, pad)],
            &zeros(&comb_space)?,
        )?;
        xi.push(jx);
        f.push(jf);
    }
    p.add_equality(
        "sum tr_(B_out' B_in) J_xi = I/d",
        xi.iter().map(|&b| term(b, tr_pre)).collect(),
        &maximally_mixed(&pre_space)?,
    )?;
    p.add_equality("sum tr_B_in J_F = I/d", f.iter().map(|&b| term(b, tr_f)).collect(), &maximally_mixed(&f_in)?)?;
    for xt in 0..dst.nx() {
        for at in 0..dst.na() {
            let mut terms = Vec::new();
            for (c, &jx) in combs.iter().zip(&xi) {
                let x = c.x_of(xt);
                for a in 0..src.na() {
                    if c.a_of(a, xt) == at {
                        terms.push(term(jx, links[x * src.na() + a]));
                    }
                }
            }
            p.add_equality(format!("J'[{at}|{xt}]"), terms, &channel_target(dst.element(at, xt))?)?;
        }
    }
    Ok(ChannelConversion {
        problem: p,
        combs,
        xi,
        f,
        na_target: dst.na(),
    })
}

fn matrix_of(point: &[BlockValue], b: BlockId) -> Result<&ComplexMatrix, Error> {
    point
        .get(b.0)
        .and_then(BlockValue::as_matrix)
        .ok_or_else(|| Error::DimensionMismatch("point does not match the problem".into()))
}

impl ChannelConversion {
    /// Target elements produced by a point, computed with direct link
    /// products; indexed `x' * |A'| + a'`.
    pub fn image(&self, src: &ChannelAssemblage, point: &[BlockValue]) -> Result<Vec<ComplexMatrix>, Error> {
        let nx_t = self.combs.first().map_or(0, |c| c.x_of.len());
        let mut out = Vec::with_capacity(nx_t * self.na_target);
        for xt in 0..nx_t {
            for at in 0..self.na_target {
                let mut acc: Option<ComplexMatrix> = None;
                for (c, &jx) in self.combs.iter().zip(&self.xi) {
                    let xi = xi_choi(matrix_of(point, jx)?)?;
                    let x = c.x_of(xt);
                    for a in 0..src.na() {
                        if c.a_of(a, xt) != at {
                            continue;
                        }
                        let img = src.element(a, x).link(&xi)?.canonical_matrix();
                        acc = Some(match acc {
                            Some(m) => &m + &img.permute(&m.labels())?,
                            None => img,
                        });
                    }
                }
                out.push(acc.ok_or_else(|| Error::InvalidAssemblage("no strategy reaches this outcome".into()))?);
            }
        }
        Ok(out)
    }

    /// Largest deviation of the image of `point` from `dst`.
    pub fn image_deviation(&self, src: &ChannelAssemblage, dst: &ChannelAssemblage, point: &[BlockValue]) -> Result<f64, Error> {
        let img = self.image(src, point)?;
        let mut worst = 0.0f64;
        for xt in 0..dst.nx() {
            for at in 0..dst.na() {
                let want = channel_target(dst.element(at, xt))?;
                let got = img[xt * dst.na() + at].permute(&want.labels())?;
                worst = worst.max(got.max_abs_diff(&want));
            }
        }
        Ok(worst)
    }
}

/// Bob-with-input conversion program.
#[derive(Clone, Debug)]
pub struct BwiConversion {
    pub problem: ConicProblem,
    pub combs: Vec<DeterministicComb>,
    /// `J_{ξλy'}` on `B' ⊗ B`, indexed `[λ][y']`.
    pub xi: Vec<Vec<BlockId>>,
    na_target: usize,
}

fn bwi_choi(m: &ComplexMatrix) -> Result<ChoiOperator, Error> {
    ChoiOperator::new(m.clone(), &[B], &[B_TARGET])
}

fn bwi_target(m: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    m.clone().relabel(B, B_TARGET)
}

pub fn build_bwi_conversion(src: &BwiAssemblage, dst: &BwiAssemblage) -> Result<BwiConversion, Error> {
    let combs = enumerate_bwi(alice_alphabets(src.na(), src.nx(), dst.na(), dst.nx()), src.ny(), dst.ny())?;
    let xs = vec![Subsystem::new(B_TARGET, dst.d()), Subsystem::new(B, src.d())];
    let target_space = vec![xs[0].clone()];
    let mut p = ConicProblem::new("bwi conversion");
    let (tr_t, bspace) = trace_map(&xs, &[B_TARGET])?;
    let tr_t = p.add_map(tr_t);
    let prop = p.add_map(LinearMap::scalar_times(&maximally_mixed(&bspace)?));
    let mut applies = Vec::with_capacity(src.elements().len());
    for y in 0..src.ny() {
        for x in 0..src.nx() {
            for a in 0..src.na() {
                let sigma = src.element(a, x, y);
                applies.push(p.add_map(LinearMap::from_fn(&xs, &target_space, |m| bwi_choi(m)?.apply(sigma))?));
            }
        }
    }
    let mut xi = Vec::with_capacity(combs.len());
    for l in 0..combs.len() {
        let mut row = Vec::with_capacity(dst.ny());
        for yt in 0..dst.ny() {
            let j = p.add_psd(format!("J_xi[{l},{yt}]"), xs.clone());
            let t = p.add_nonneg(format!("t[{l},{yt}]"));
            p.add_equality(format!("tr_B' J_xi[{l},{yt}] = t I/d"), vec![term(j, tr_t), neg(t, prop)], &zeros(&bspace)?)?;
            row.push(j);
        }
        for yt in 1..dst.ny() {
            p.add_equality(
                format!("tr_B' J_xi[{l},{yt}] = tr_B' J_xi[{l},0]"),
                vec![term(row[yt], tr_t), neg(row[0], tr_t)],
                &zeros(&bspace)?,
            )?;
        }
        xi.push(row);
    }
    for yt in 0..dst.ny() {
        p.add_equality(
            format!("sum tr_B' J_xi[.,{yt}] = I/d"),
            xi.iter().map(|r| term(r[yt], tr_t)).collect(),
            &maximally_mixed(&bspace)?,
        )?;
    }
    for yt in 0..dst.ny() {
        for xt in 0..dst.nx() {
            for at in 0..dst.na() {
                let mut terms = Vec::new();
                for (c, row) in combs.iter().zip(&xi) {
                    let (x, y) = (c.x_of(xt), c.y_of(yt));
                    for a in 0..src.na() {
                        if c.a_of(a, xt) == at {
                            terms.push(term(row[yt], applies[(y * src.nx() + x) * src.na() + a]));
                        }
                    }
                }
                p.add_equality(format!("sigma'[{at}|{xt},{yt}]"), terms, &bwi_target(dst.element(at, xt, yt))?)?;
            }
        }
    }
    Ok(BwiConversion {
        problem: p,
        combs,
        xi,
        na_target: dst.na(),
    })
}

impl BwiConversion {
    /// Target elements produced by a point, indexed like
    /// [`BwiAssemblage::elements`].
    pub fn image(&self, src: &BwiAssemblage, nx_t: usize, ny_t: usize, point: &[BlockValue]) -> Result<Vec<ComplexMatrix>, Error> {
        let mut out = Vec::new();
        for yt in 0..ny_t {
            for xt in 0..nx_t {
                for at in 0..self.na_target {
                    let mut acc = ComplexMatrix::zeros(vec![Subsystem::new(B_TARGET, self.target_dim(point)?)])?;
                    for (c, row) in self.combs.iter().zip(&self.xi) {
                        let map = bwi_choi(matrix_of(point, row[yt])?)?;
                        for a in 0..src.na() {
                            if c.a_of(a, xt) == at {
                                acc = &acc + &map.apply(src.element(a, c.x_of(xt), c.y_of(yt)))?;
                            }
                        }
                    }
                    out.push(acc);
                }
            }
        }
        Ok(out)
    }

    fn target_dim(&self, point: &[BlockValue]) -> Result<usize, Error> {
        matrix_of(point, self.xi[0][0])?.dim_of(B_TARGET)
    }

    pub fn image_deviation(&self, src: &BwiAssemblage, dst: &BwiAssemblage, point: &[BlockValue]) -> Result<f64, Error> {
        let img = self.image(src, dst.nx(), dst.ny(), point)?;
        let mut worst = 0.0f64;
        for (got, want) in img.iter().zip(dst.elements()) {
            worst = worst.max(got.max_abs_diff(&bwi_target(want)?));
        }
        Ok(worst)
    }
}

/// MDI conversion program.
#[derive(Clone, Debug)]
pub struct MdiConversion {
    pub problem: ConicProblem,
    pub combs: Vec<DeterministicComb>,
    /// `J_{ζbb'λ}` on `B_in ⊗ B_in'`, indexed `[λ][b][b']`.
    pub zeta: Vec<Vec<Vec<BlockId>>>,
    na_target: usize,
}

fn zeta_choi(m: &ComplexMatrix) -> Result<ChoiOperator, Error> {
    ChoiOperator::new(m.clone(), &[B_IN_TARGET], &[B_IN])
}

fn mdi_target(m: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    m.clone().relabel(B_IN, B_IN_TARGET)
}

pub fn build_mdi_conversion(src: &MdiAssemblage, dst: &MdiAssemblage) -> Result<MdiConversion, Error> {
    let combs = enumerate_alice(alice_alphabets(src.na(), src.nx(), dst.na(), dst.nx()))?;
    let zs = vec![Subsystem::new(B_IN, src.d()), Subsystem::new(B_IN_TARGET, dst.d())];
    let target_space = vec![zs[1].clone()];
    let mut p = ConicProblem::new("mdi conversion");
    let (tr_in, in_space) = trace_map(&zs, &[B_IN])?;
    let tr_in = p.add_map(tr_in);
    let prop = p.add_map(LinearMap::scalar_times(&maximally_mixed(&in_space)?));
    let id = p.add_map(LinearMap::identity(src.d() * src.d() * dst.d() * dst.d()));
    let mut links = Vec::with_capacity(src.elements().len());
    for x in 0..src.nx() {
        for a in 0..src.na() {
            for b in 0..src.nb() {
                let n = src.choi(a, b, x);
                links.push(p.add_map(LinearMap::from_fn(&zs, &target_space, |m| Ok(n.link(&zeta_choi(m)?)?.into_matrix()))?));
            }
        }
    }
    let mut zeta = Vec::with_capacity(combs.len());
    for l in 0..combs.len() {
        let mut per_b = Vec::with_capacity(src.nb());
        for b in 0..src.nb() {
            let row: Vec<BlockId> = (0..dst.nb()).map(|bt| p.add_psd(format!("J_zeta[{b},{bt},{l}]"), zs.clone())).collect();
            let t = p.add_nonneg(format!("t[{b},{l}]"));
            let mut terms: Vec<Term> = row.iter().map(|&j| term(j, tr_in)).collect();
            terms.push(neg(t, prop));
            p.add_equality(format!("sum_b' tr_B_in J_zeta[{b},.,{l}] = t I/d"), terms, &zeros(&in_space)?)?;
            let s = p.add_psd(format!("S[{b},{l}]"), zs.clone());
            let mut terms: Vec<Term> = row.iter().map(|&j| term(j, id)).collect();
            terms.push(neg(s, id));
            p.add_equality(format!("S[{b},{l}] = sum_b' J_zeta[{b},.,{l}]"), terms, &zeros(&zs)?)?;
            per_b.push(row);
        }
        zeta.push(per_b);
    }
    for b in 0..src.nb() {
        let terms = zeta.iter().flat_map(|per_b| per_b[b].iter().map(|&j| term(j, tr_in))).collect();
        p.add_equality(format!("sum tr_B_in J_zeta[{b},.,.] = I/d"), terms, &maximally_mixed(&in_space)?)?;
    }
    for xt in 0..dst.nx() {
        for at in 0..dst.na() {
            for bt in 0..dst.nb() {
                let mut terms = Vec::new();
                for (c, per_b) in combs.iter().zip(&zeta) {
                    let x = c.x_of(xt);
                    for a in 0..src.na() {
                        if c.a_of(a, xt) != at {
                            continue;
                        }
                        for (b, row) in per_b.iter().enumerate() {
                            terms.push(term(row[bt], links[(x * src.na() + a) * src.nb() + b]));
                        }
                    }
                }
                p.add_equality(format!("J'[{at}{bt}|{xt}]"), terms, &mdi_target(dst.element(at, bt, xt))?)?;
            }
        }
    }
    Ok(MdiConversion {
        problem: p,
        combs,
        zeta,
        na_target: dst.na(),
    })
}

impl MdiConversion {
    /// Target elements produced by a point, indexed like
    /// [`MdiAssemblage::elements`].
    pub fn image(&self, src: &MdiAssemblage, nx_t: usize, nb_t: usize, point: &[BlockValue]) -> Result<Vec<ComplexMatrix>, Error> {
        let d_t = matrix_of(point, self.zeta[0][0][0])?.dim_of(B_IN_TARGET)?;
        let mut out = Vec::new();
        for xt in 0..nx_t {
            for at in 0..self.na_target {
                for bt in 0..nb_t {
                    let mut acc = ComplexMatrix::zeros(vec![Subsystem::new(B_IN_TARGET, d_t)])?;
                    for (c, per_b) in self.combs.iter().zip(&self.zeta) {
                        for a in 0..src.na() {
                            if c.a_of(a, xt) != at {
                                continue;
                            }
                            for (b, row) in per_b.iter().enumerate() {
                                let img = src.choi(a, b, c.x_of(xt)).link(&zeta_choi(matrix_of(point, row[bt])?)?)?;
                                acc = &acc + img.matrix();
                            }
                        }
                    }
                    out.push(acc);
                }
            }
        }
        Ok(out)
    }

    pub fn image_deviation(&self, src: &MdiAssemblage, dst: &MdiAssemblage, point: &[BlockValue]) -> Result<f64, Error> {
        let img = self.image(src, dst.nx(), dst.nb(), point)?;
        let mut worst = 0.0f64;
        for (got, want) in img.iter().zip(dst.elements()) {
            worst = worst.max(got.max_abs_diff(&mdi_target(want)?));
        }
        Ok(worst)
    }
}

/// A conversion program of any family.
#[derive(Clone, Debug)]
pub enum Conversion {
    Channel(ChannelConversion),
    Bwi(BwiConversion),
    Mdi(MdiConversion),
}

impl Conversion {
    pub fn problem(&self) -> &ConicProblem {
        match self {
            Self::Channel(c) => &c.problem,
            Self::Bwi(c) => &c.problem,
            Self::Mdi(c) => &c.problem,
        }
    }

    /// Re-derive the target from a point by direct composition and return
    /// the largest deviation.
    pub fn image_deviation(&self, src: &Assemblage, dst: &Assemblage, point: &[BlockValue]) -> Result<f64, Error> {
        match (self, src, dst) {
            (Self::Channel(c), Assemblage::Channel(s), Assemblage::Channel(d)) => c.image_deviation(s, d, point),
            (Self::Bwi(c), Assemblage::Bwi(s), Assemblage::Bwi(d)) => c.image_deviation(s, d, point),
            (Self::Mdi(c), Assemblage::Mdi(s), Assemblage::Mdi(d)) => c.image_deviation(s, d, point),
            _ => Err(Error::AlphabetMismatch("assemblage kinds differ from the program".into())),
        }
    }
}

pub fn build_conversion(src: &Assemblage, dst: &Assemblage) -> Result<Conversion, Error> {
    match (src, dst) {
        (Assemblage::Channel(s), Assemblage::Channel(d)) => Ok(Conversion::Channel(build_channel_conversion(s, d)?)),
        (Assemblage::Bwi(s), Assemblage::Bwi(d)) => Ok(Conversion::Bwi(build_bwi_conversion(s, d)?)),
        (Assemblage::Mdi(s), Assemblage::Mdi(d)) => Ok(Conversion::Mdi(build_mdi_conversion(s, d)?)),
        _ => Err(Error::AlphabetMismatch(format!(
            "cannot convert a {} assemblage into a {} one",
            src.kind().as_str(),
            dst.kind().as_str()
        ))),
    }
}

/// Human-readable size summary.
pub fn describe(p: &ConicProblem) -> String {
    format!("{p}")
}

#[cfg(test)]
mod tests {
    use super::super::model::BlockKind;
    use super::*;
    use crate::catalog::{i_ptp, n_ptp, r_family, sigma_chsh, Axis};

    fn omega(input: &str, output: &str, d: usize) -> ComplexMatrix {
        ChoiOperator::identity_channel(input, output, d).unwrap().into_matrix()
    }

    fn set(point: &mut [BlockValue], p: &ConicProblem, b: BlockId, m: ComplexMatrix) {
        let BlockKind::Psd(subs) = &p.block(b).kind else { panic!("scalar block") };
        point[b.0] = BlockValue::Hermitian(m.permute(&labels(subs)).unwrap());
    }

    fn set_scalar(point: &mut [BlockValue], p: &ConicProblem, name: &str, v: f64) {
        point[p.find_block(name).unwrap().0] = BlockValue::Scalar(v);
    }

    fn identity_comb(combs: &[DeterministicComb]) -> usize {
        combs
            .iter()
            .position(|c| {
                (0..c.x_of.len()).all(|x| c.x_of(x) == x && (0..2).all(|a| c.a_of(a, x) == a))
                    && c.y_of.as_ref().is_none_or(|y| y.iter().enumerate().all(|(i, &v)| i == v))
            })
            .unwrap()
    }

    #[test]
    fn channel_identity_wiring_is_a_witness() {
        let src = r_family(Axis::Y, 0.7).unwrap();
        let conv = build_channel_conversion(&src, &src).unwrap();
        assert_eq!(conv.combs.len(), 64);
        let p = &conv.problem;
        let l = identity_comb(&conv.combs);
        let mut point = p.zero_point();
        let xi = omega(B_IN_TARGET, B_IN, 2).kron(&omega(B_OUT, B_OUT_TARGET, 2)).unwrap();
        set(&mut point, p, conv.xi[l], xi);
        set(&mut point, p, conv.f[l], omega(B_IN_TARGET, B_IN, 2));
        set_scalar(&mut point, p, &format!("t[{l}]"), 1.0);
        set_scalar(&mut point, p, &format!("s[{l}]"), 1.0);
        assert!(p.max_residual(&point).unwrap() < 1e-14);
        assert!(conv.image_deviation(&src, &src, &point).unwrap() < 1e-14);
    }

    #[test]
    fn channel_zero_point_misses_the_target() {
        let src = i_ptp().unwrap();
        let dst = r_family(Axis::Z, 0.3).unwrap();
        let conv = build_channel_conversion(&r_family(Axis::X, 0.2).unwrap(), &dst).unwrap();
        assert!(conv.problem.max_residual(&conv.problem.zero_point()).unwrap() > 0.1);
        assert!(build_channel_conversion(&src, &dst).unwrap().combs.len() == 144);
    }

    #[test]
    fn bwi_identity_wiring_is_a_witness() {
        let src = sigma_chsh().unwrap();
        let conv = build_bwi_conversion(&src, &src).unwrap();
        let p = &conv.problem;
        let l = identity_comb(&conv.combs);
        let mut point = p.zero_point();
        for y in 0..2 {
            set(&mut point, p, conv.xi[l][y], omega(B, B_TARGET, 2));
            set_scalar(&mut point, p, &format!("t[{l},{y}]"), 1.0);
        }
        assert!(p.max_residual(&point).unwrap() < 1e-14);
        assert!(conv.image_deviation(&src, &src, &point).unwrap() < 1e-14);
    }

    #[test]
    fn mdi_identity_wiring_is_a_witness() {
        let src = n_ptp().unwrap();
        let conv = build_mdi_conversion(&src, &src).unwrap();
        let p = &conv.problem;
        let l = identity_comb(&conv.combs);
        let mut point = p.zero_point();
        for b in 0..src.nb() {
            set(&mut point, p, conv.zeta[l][b][b], omega(B_IN_TARGET, B_IN, 2));
            set(&mut point, p, p.find_block(&format!("S[{b},{l}]")).unwrap(), omega(B_IN_TARGET, B_IN, 2));
            set_scalar(&mut point, p, &format!("t[{b},{l}]"), 1.0);
        }
        assert!(p.max_residual(&point).unwrap() < 1e-14);
        assert!(conv.image_deviation(&src, &src, &point).unwrap() < 1e-14);
    }

    #[test]
    fn deterministic_channel_assemblage_passes_free_test_with_one_strategy() {
        let lambda = [1usize, 0];
        let els = (0..2)
            .flat_map(|x| (0..2).map(move |a| (a, x)))
            .map(|(a, x)| {
                let w = ChoiOperator::identity_channel(B_IN, B_OUT, 2).unwrap();
                w.with_matrix(w.matrix().scale(if lambda[x] == a { 1.0 } else { 0.0 })).unwrap()
            })
            .collect();
        let a = ChannelAssemblage::new(2, 2, 2, 2, els).unwrap();
        let p = build_free_test_channel(&a).unwrap();
        let l = response_functions(2, 2).unwrap().iter().position(|r| r[..] == lambda).unwrap();
        let mut point = p.zero_point();
        set(&mut point, &p, p.find_block(&format!("J[{l}]")).unwrap(), omega(B_IN, B_OUT, 2));
        set_scalar(&mut point, &p, &format!("t[{l}]"), 1.0);
        assert!(p.max_residual(&point).unwrap() < 1e-14);
    }

    #[test]
    fn free_tests_have_expected_sizes() {
        let p = build_free_test(&sigma_chsh().unwrap().into()).unwrap();
        assert_eq!(p.blocks().len(), 4 * 3);
        let p = build_free_test(&n_ptp().unwrap().into()).unwrap();
        assert_eq!(p.blocks().len(), 8 * 3);
        assert!(build_conversion(&n_ptp().unwrap().into(), &sigma_chsh().unwrap().into()).is_err());
    }
}
