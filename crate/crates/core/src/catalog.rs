//! Named example assemblages, generated from their realisations.
//!
//! Names: `r:<axis>:<theta>` (axis `x`, `y` or `z`, theta such as `pi/8`),
//! `i-ptp`, `i-pr`, `sigma-ptp`, `sigma-pr`, `sigma-pr-prime`, `sigma-aq`,
//! `sigma-chsh`, `n-ptp`, `n-pr`. The box `p-aq` is available through
//! [`catalog_box`].

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::assemblage::{
    bwi_from_channel_on_basis, bwi_from_formal, bwi_from_quantum, channel_from_formal, channel_from_quantum, mdi_from_channel, mdi_from_formal, Assemblage,
    BoxDistribution, BwiAssemblage, ChannelAssemblage, MdiAssemblage, Measurements, A, B, B_IN, B_OUT,
};
use crate::choi::{transpose_map, ChoiOperator};
use crate::error::Error;
use crate::math;
use crate::tensor::{qubit, ComplexMatrix, Subsystem};

/// Rotation axis of the controlled rotations in family R.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Self::X => 0,
            Self::Y => 1,
            Self::Z => 2,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::X => 'x',
            Self::Y => 'y',
            Self::Z => 'z',
        }
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "z" => Ok(Self::Z),
            other => Err(Error::ParameterOutOfRange(alloc::format!("axis `{other}`"))),
        }
    }
}

/// An angle remembered together with the text it was parsed from.
#[derive(Clone, Debug, PartialEq)]
pub struct Angle {
    pub value: f64,
    pub text: String,
}

impl Angle {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            text: alloc::format!("{value}"),
        }
    }
}

impl FromStr for Angle {
    type Err = Error;
    /// Accepts decimals and forms like `pi`, `pi/8`, `3pi/8`, `3*pi/8`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::ParameterOutOfRange(alloc::format!("cannot parse angle `{s}`"));
        let t = s.trim();
        let value = if let Some(idx) = t.find("pi") {
            let coef = t[..idx].trim_end_matches('*');
            let coef: f64 = if coef.is_empty() { 1.0 } else { coef.parse().map_err(|_| bad())? };
            let rest = &t[idx + 2..];
            let den: f64 = if rest.is_empty() {
                1.0
            } else if let Some(d) = rest.strip_prefix('/') {
                d.parse().map_err(|_| bad())?
            } else {
                return Err(bad());
            };
            coef * PI / den
        } else {
            t.parse().map_err(|_| bad())?
        };
        Ok(Self { value, text: t.to_string() })
    }
}

/// Every catalog entry.
#[derive(Clone, Debug, PartialEq)]
pub enum CatalogName {
    RFamily { axis: Axis, theta: Angle },
    IPtp,
    IPr,
    SigmaPtp,
    SigmaPr,
    SigmaPrPrime,
    SigmaAq,
    SigmaChsh,
    NPtp,
    NPr,
}

impl CatalogName {
    pub const FIXED: [&'static str; 9] = [
        "i-ptp",
        "i-pr",
        "sigma-ptp",
        "sigma-pr",
        "sigma-pr-prime",
        "sigma-aq",
        "sigma-chsh",
        "n-ptp",
        "n-pr",
    ];
}

impl FromStr for CatalogName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "i-ptp" => Self::IPtp,
            "i-pr" => Self::IPr,
            "sigma-ptp" => Self::SigmaPtp,
            "sigma-pr" => Self::SigmaPr,
            "sigma-pr-prime" => Self::SigmaPrPrime,
            "sigma-aq" => Self::SigmaAq,
            "sigma-chsh" => Self::SigmaChsh,
            "n-ptp" => Self::NPtp,
            "n-pr" => Self::NPr,
            other => {
                let rest = other
                    .strip_prefix("r:")
                    .or_else(|| other.strip_prefix("r-family:"))
                    .ok_or_else(|| Error::UnknownCatalogEntry(other.to_string()))?;
                let (axis, theta) = rest.split_once(':').ok_or_else(|| Error::UnknownCatalogEntry(other.to_string()))?;
                Self::RFamily {
                    axis: axis.parse()?,
                    theta: theta.parse()?,
                }
            }
        })
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RFamily { axis, theta } => write!(f, "r:{}:{}", axis.as_char(), theta.text),
            Self::IPtp => f.write_str("i-ptp"),
            Self::IPr => f.write_str("i-pr"),
            Self::SigmaPtp => f.write_str("sigma-ptp"),
            Self::SigmaPr => f.write_str("sigma-pr"),
            Self::SigmaPrPrime => f.write_str("sigma-pr-prime"),
            Self::SigmaAq => f.write_str("sigma-aq"),
            Self::SigmaChsh => f.write_str("sigma-chsh"),
            Self::NPtp => f.write_str("n-ptp"),
            Self::NPr => f.write_str("n-pr"),
        }
    }
}

/// Look up an assemblage by name.
pub fn catalog(name: &str) -> Result<Assemblage, Error> {
    build(&name.parse()?)
}

pub fn build(name: &CatalogName) -> Result<Assemblage, Error> {
    Ok(match name {
        CatalogName::RFamily { axis, theta } => r_family(*axis, theta.value)?.into(),
        CatalogName::IPtp => i_ptp()?.into(),
        CatalogName::IPr => i_pr()?.into(),
        CatalogName::SigmaPtp => sigma_ptp()?.into(),
        CatalogName::SigmaPr => sigma_pr()?.into(),
        CatalogName::SigmaPrPrime => sigma_pr()?.restrict_inputs(&[0, 1])?.into(),
        CatalogName::SigmaAq => sigma_aq()?.into(),
        CatalogName::SigmaChsh => sigma_chsh()?.into(),
        CatalogName::NPtp => n_ptp()?.into(),
        CatalogName::NPr => n_pr()?.into(),
    })
}

/// Look up a classical box by name (`p-aq`).
pub fn catalog_box(name: &str) -> Result<BoxDistribution, Error> {
    match name {
        "p-aq" => Ok(p_aq()),
        other => Err(Error::UnknownCatalogEntry(other.to_string())),
    }
}

fn effects(axes: &[usize]) -> Measurements {
    axes.iter().map(|&axis| (0..2).map(|a| qubit::pauli_effect(axis, a, A)).collect()).collect()
}

/// `σ_z` for `x = 0` and `σ_x` for `x = 1`.
fn zx_measurements() -> Measurements {
    effects(&[2, 0])
}

/// Pauli X, Y, Z for `x = 0, 1, 2`, transposed so that Bob's conditional
/// states on the Bell state are `M_{a|x} / 2`.
fn ptp_measurements() -> Measurements {
    effects(&[0, 1, 2])
        .into_iter()
        .map(|f| f.into_iter().map(|m| m.transpose()).collect())
        .collect()
}

fn bell() -> ComplexMatrix {
    qubit::bell_state(A, B)
}

fn b_and_in() -> Vec<Subsystem> {
    vec![Subsystem::new(B, 2), Subsystem::new(B_IN, 2)]
}

fn out2() -> Vec<Subsystem> {
    vec![Subsystem::new(B_OUT, 2)]
}

/// `B_in` dephased in the computational basis; branch `k` applies `branch(k, ·)` to `B`.
fn controlled_map(branch: impl Fn(usize, &ComplexMatrix) -> Result<ComplexMatrix, Error>) -> Result<ChoiOperator, Error> {
    ChoiOperator::from_map(b_and_in(), out2(), |w| {
        let mut acc = ComplexMatrix::zeros(out2())?;
        for k in 0..2 {
            let proj = qubit::identity(B).kron(&qubit::basis_projector(k, B_IN))?;
            let block = proj.matmul(w)?.matmul(&proj)?.partial_trace(&[B])?;
            let img = branch(k, &block.with_subsystems(vec![Subsystem::new(B, 2)])?)?;
            acc = &acc + &img.with_subsystems(out2())?;
        }
        Ok(acc)
    })
}

/// Controlled transpose: `B_in` controls a transpose of `B`, then `B_in` is discarded.
pub fn controlled_transpose() -> Result<ChoiOperator, Error> {
    controlled_map(|k, rho| Ok(if k == 1 { rho.transpose() } else { rho.clone() }))
}

/// Controlled rotation with `B` as control and `B_in` as target; `B` is
/// then discarded and the target becomes `B_out`.
pub fn controlled_rotation(axis: Axis, theta: f64) -> Result<ChoiOperator, Error> {
    let cr = &qubit::basis_projector(0, B).kron(&qubit::identity(B_IN))? + &qubit::basis_projector(1, B).kron(&qubit::rotation(axis.index(), theta, B_IN))?;
    ChoiOperator::from_map(b_and_in(), out2(), |w| w.conjugate_by(&cr)?.partial_trace(&[B_IN])?.with_subsystems(out2()))
}

/// Family R: Bell state, `σ_z`/`σ_x` for Alice, controlled rotation by `theta`.
pub fn r_family(axis: Axis, theta: f64) -> Result<ChannelAssemblage, Error> {
    if !(theta > 0.0 && theta <= PI / 2.0 + 1e-12) {
        return Err(Error::ParameterOutOfRange(alloc::format!("theta = {theta} must lie in (0, pi/2]")));
    }
    channel_from_quantum(&bell(), &zx_measurements(), &controlled_rotation(axis, theta)?)
}

pub fn i_ptp() -> Result<ChannelAssemblage, Error> {
    channel_from_formal(&bell(), &ptp_measurements(), &controlled_transpose()?)
}

/// Measure `B_in` with outcome `y`, flip `B` when `x y = 1`; for `x = 2`
/// prepare `a I / 2`.
pub fn i_pr() -> Result<ChannelAssemblage, Error> {
    let povm: Measurements = vec![(0..2).map(|a| qubit::basis_projector(a, A)).collect()];
    let mut el = Vec::new();
    for x in 0..3 {
        for a in 0..2 {
            let j = if x < 2 {
                let flip = controlled_map(|k, rho| if x * k == 1 { rho.conjugate_by(&qubit::pauli_x(B)) } else { Ok(rho.clone()) })?;
                channel_from_quantum(&bell(), &povm, &flip)?.element(a, 0).clone()
            } else {
                ChoiOperator::from_map(vec![Subsystem::new(B_IN, 2)], out2(), |rho| {
                    Ok(ComplexMatrix::identity(out2())?.scale_complex(rho.trace() * 0.5 * a as f64))
                })?
            };
            el.push(j);
        }
    }
    ChannelAssemblage::new(2, 3, 2, 2, el)
}

pub fn sigma_ptp() -> Result<BwiAssemblage, Error> {
    let xi = vec![ChoiOperator::identity_channel(B, "B'", 2)?, transpose_map(B, "B'", 2)?];
    bwi_from_formal(&bell(), &ptp_measurements(), &xi)
}

/// `I^PR` fed with basis states: `|a⊕xy><a⊕xy| / 2`, and `a I / 2` at `x = 2`.
pub fn sigma_pr() -> Result<BwiAssemblage, Error> {
    bwi_from_channel_on_basis(&i_pr()?)
}

/// Almost-quantum box of the catalog.
pub fn p_aq() -> BoxDistribution {
    let s2 = math::sqrt(2.0);
    BoxDistribution::binary_from_marginals(
        [9.0 / 20.0, 2.0 / 11.0],
        [2.0 / 11.0, 9.0 / 20.0],
        [[22.0 / 125.0, 37.0 / 700.0], [s2 / 9.0, 22.0 / 125.0]],
    )
}

/// `σ_{a|xy} = Σ_b p_AQ(ab|xy) |b><b|`.
pub fn sigma_aq() -> Result<BwiAssemblage, Error> {
    let p = p_aq();
    BwiAssemblage::from_fn(2, 2, 2, 2, |a, x, y| {
        let m = &qubit::basis_projector(0, B).scale(p.p(a, 0, x, y)) + &qubit::basis_projector(1, B).scale(p.p(a, 1, x, y));
        Ok(m)
    })
}

pub fn sigma_chsh() -> Result<BwiAssemblage, Error> {
    let xi = vec![ChoiOperator::identity_channel(B, "B'", 2)?; 2];
    bwi_from_quantum(&bell(), &zx_measurements(), &xi)
}

/// Bob's measurement of `N^PTP`.
pub fn n_ptp_measurement() -> Vec<ComplexMatrix> {
    let i = qubit::identity(B_OUT);
    let y = qubit::pauli_y(B_OUT);
    vec![&i.scale(1.0 / 3.0) + &y.scale(1.0 / 3.0), &i.scale(2.0 / 3.0) - &y.scale(1.0 / 3.0)]
}

pub fn n_ptp() -> Result<MdiAssemblage, Error> {
    mdi_from_formal(&bell(), &ptp_measurements(), &controlled_transpose()?, &n_ptp_measurement())
}

/// `I^PR` followed by a computational-basis measurement for `x ∈ {0,1}`,
/// and `N_{ab|2} = tr(·) / 4`.
pub fn n_pr() -> Result<MdiAssemblage, Error> {
    let measured = mdi_from_channel(&i_pr()?, &[qubit::basis_projector(0, B_OUT), qubit::basis_projector(1, B_OUT)])?;
    MdiAssemblage::from_fn(2, 2, 3, 2, |a, b, x| {
        if x < 2 {
            Ok(measured.element(a, b, x).clone())
        } else {
            Ok(qubit::identity(B_IN).scale(1.0 / 8.0))
        }
    })
}
