//! Deterministic local strategies.
//!
//! Strategy `λ` enumerates the lexicographic Cartesian product of the
//! `a_of` table, the `x_of` table and (for Bob-with-input) the `y_of`
//! table, with the first table most significant. Within a table the first
//! entry is the most significant digit; `a_of` entries are ordered by
//! `(a, x')`.

use alloc::vec;
use alloc::vec::Vec;

use crate::assemblage::BoxDistribution;
use crate::error::Error;

/// Largest enumeration allowed.
pub const MAX_STRATEGIES: u128 = 1_000_000;

/// Alphabet sizes of a source scenario and a target scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AliceAlphabets {
    pub na: usize,
    pub nx: usize,
    pub na_target: usize,
    pub nx_target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicComb {
    /// `x_of[x']`.
    pub x_of: Vec<usize>,
    /// `a_of[a * |X'| + x']`.
    pub a_of: Vec<usize>,
    /// `y_of[y']` for Bob-with-input scenarios.
    pub y_of: Option<Vec<usize>>,
    nx_target: usize,
}

impl DeterministicComb {
    pub fn new(x_of: Vec<usize>, a_of: Vec<usize>, y_of: Option<Vec<usize>>) -> Self {
        let nx_target = x_of.len();
        Self { x_of, a_of, y_of, nx_target }
    }

    pub fn x_of(&self, x_target: usize) -> usize {
        self.x_of[x_target]
    }

    pub fn a_of(&self, a: usize, x_target: usize) -> usize {
        self.a_of[a * self.nx_target + x_target]
    }

    pub fn y_of(&self, y_target: usize) -> usize {
        match &self.y_of {
            Some(t) => t[y_target],
            None => y_target,
        }
    }

    /// `D(x|x',λ)`.
    pub fn d_x(&self, x: usize, x_target: usize) -> f64 {
        (self.x_of(x_target) == x) as u8 as f64
    }

    /// `D(a'|a,x',λ)`.
    pub fn d_a(&self, a_target: usize, a: usize, x_target: usize) -> f64 {
        (self.a_of(a, x_target) == a_target) as u8 as f64
    }
}

fn pow(base: usize, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// `|A'|^(|A| |X'|) · |X|^|X'|`.
pub fn alice_count(al: AliceAlphabets) -> u128 {
    pow(al.na_target, al.na * al.nx_target).saturating_mul(pow(al.nx, al.nx_target))
}

/// `|Y|^|Y'|`.
pub fn bob_wiring_count(ny: usize, ny_target: usize) -> u128 {
    pow(ny, ny_target)
}

/// All function tables `{0..len} -> {0..range}` in lexicographic order.
pub fn function_tables(len: usize, range: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    if range == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut t = vec![0usize; len];
    loop {
        out.push(t.clone());
        let mut k = len;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            t[k] += 1;
            if t[k] < range {
                break;
            }
            t[k] = 0;
        }
    }
}

fn guard(count: u128) -> Result<(), Error> {
    if count > MAX_STRATEGIES {
        return Err(Error::TooManyStrategies { count, limit: MAX_STRATEGIES });
    }
    Ok(())
}

fn nonempty(sizes: &[usize]) -> Result<(), Error> {
    if sizes.contains(&0) {
        return Err(Error::AlphabetMismatch("alphabets must be nonempty".into()));
    }
    Ok(())
}

/// Alice's deterministic combs, in `λ` order.
pub fn enumerate_alice(al: AliceAlphabets) -> Result<Vec<DeterministicComb>, Error> {
    nonempty(&[al.na, al.nx, al.na_target, al.nx_target])?;
    guard(alice_count(al))?;
    let a_tables = function_tables(al.na * al.nx_target, al.na_target);
    let x_tables = function_tables(al.nx_target, al.nx);
    let mut out = Vec::with_capacity(a_tables.len() * x_tables.len());
    for a in &a_tables {
        for x in &x_tables {
            out.push(DeterministicComb::new(x.clone(), a.clone(), None));
        }
    }
    Ok(out)
}

/// Bob's classical input wirings `y_of: Y' -> Y`.
pub fn enumerate_bob_input_wirings(ny: usize, ny_target: usize) -> Result<Vec<Vec<usize>>, Error> {
    nonempty(&[ny, ny_target])?;
    guard(bob_wiring_count(ny, ny_target))?;
    Ok(function_tables(ny_target, ny))
}

/// Alice's combs combined with Bob's wirings, `y_of` least significant.
pub fn enumerate_bwi(al: AliceAlphabets, ny: usize, ny_target: usize) -> Result<Vec<DeterministicComb>, Error> {
    guard(alice_count(al).saturating_mul(bob_wiring_count(ny, ny_target)))?;
    let alice = enumerate_alice(al)?;
    let bob = enumerate_bob_input_wirings(ny, ny_target)?;
    let mut out = Vec::with_capacity(alice.len() * bob.len());
    for c in &alice {
        for y in &bob {
            out.push(DeterministicComb::new(c.x_of.clone(), c.a_of.clone(), Some(y.clone())));
        }
    }
    Ok(out)
}

/// Deterministic response functions `λ: X -> A` (`λ[x] = a`).
pub fn response_functions(na: usize, nx: usize) -> Result<Vec<Vec<usize>>, Error> {
    nonempty(&[na, nx])?;
    guard(pow(na, nx))?;
    Ok(function_tables(nx, na))
}

/// Wire a box: `p'(a' b|x' y') = Σ_a D(a'|a,x') p(a b|x(x'), y(y'))`.
pub fn apply_comb_to_box(comb: &DeterministicComb, p: &BoxDistribution, na_target: usize) -> Result<BoxDistribution, Error> {
    let nx_t = comb.x_of.len();
    let ny_t = comb.y_of.as_ref().map_or(p.ny(), |t| t.len());
    if comb.a_of.len() != p.na() * nx_t || comb.x_of.iter().any(|&x| x >= p.nx()) || comb.a_of.iter().any(|&a| a >= na_target) {
        return Err(Error::AlphabetMismatch("comb does not fit the box".into()));
    }
    if let Some(t) = &comb.y_of {
        if t.iter().any(|&y| y >= p.ny()) {
            return Err(Error::AlphabetMismatch("comb does not fit the box".into()));
        }
    }
    Ok(BoxDistribution::from_fn(na_target, p.nb(), nx_t, ny_t, |at, b, xt, yt| {
        (0..p.na()).map(|a| comb.d_a(at, a, xt) * p.p(a, b, comb.x_of(xt), comb.y_of(yt))).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(na: usize, nx: usize, nat: usize, nxt: usize) -> AliceAlphabets {
        AliceAlphabets {
            na,
            nx,
            na_target: nat,
            nx_target: nxt,
        }
    }

    #[test]
    fn binary_count() {
        assert_eq!(enumerate_alice(al(2, 2, 2, 2)).unwrap().len(), 64);
        assert_eq!(enumerate_alice(al(1, 3, 1, 1)).unwrap().len(), 3);
        assert_eq!(enumerate_bwi(al(2, 2, 2, 2), 2, 2).unwrap().len(), 256);
    }

    #[test]
    fn bob_wirings() {
        assert_eq!(enumerate_bob_input_wirings(2, 2).unwrap().len(), 4);
        assert_eq!(enumerate_bob_input_wirings(3, 1).unwrap().len(), 3);
        assert_eq!(enumerate_bob_input_wirings(1, 3).unwrap().len(), 1);
    }

    #[test]
    fn first_strategies_are_lexicographic() {
        let s = enumerate_alice(al(2, 2, 2, 2)).unwrap();
        assert_eq!(s[0].a_of, vec![0, 0, 0, 0]);
        assert_eq!(s[0].x_of, vec![0, 0]);
        assert_eq!(s[1].x_of, vec![0, 1]);
        assert_eq!(s[4].a_of, vec![0, 0, 0, 1]);
    }

    #[test]
    fn guard_refuses_huge_enumerations() {
        assert!(matches!(enumerate_alice(al(3, 3, 3, 5)), Err(Error::TooManyStrategies { .. })));
    }

    fn pr_box() -> BoxDistribution {
        BoxDistribution::from_fn(2, 2, 2, 2, |a, b, x, y| if (a ^ b) == x * y { 0.5 } else { 0.0 })
    }

    #[test]
    fn identity_comb_keeps_box() {
        let id = DeterministicComb::new(vec![0, 1], vec![0, 0, 1, 1], None);
        let q = apply_comb_to_box(&id, &pr_box(), 2).unwrap();
        assert!(q.max_abs_diff(&pr_box()) < 1e-15);
    }

    #[test]
    fn constant_comb_is_deterministic() {
        let c = DeterministicComb::new(vec![0, 0], vec![1, 1, 1, 1], None);
        let q = apply_comb_to_box(&c, &pr_box(), 2).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((q.p(1, 0, x, y) + q.p(1, 1, x, y) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn relabelling_preserves_pr_structure() {
        // a' = a ⊕ x' maps a⊕b = xy to a'⊕b = xy ⊕ x, another PR symmetry.
        let c = DeterministicComb::new(vec![0, 1], vec![0, 1, 1, 0], None);
        let q = apply_comb_to_box(&c, &pr_box(), 2).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let want = if (a ^ b) == (x * y) ^ x { 0.5 } else { 0.0 };
                        assert!((q.p(a, b, x, y) - want).abs() < 1e-15);
                    }
                }
            }
        }
        assert!(q.validate(1e-12).all_passed());
    }
}
