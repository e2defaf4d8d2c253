//! Sparse SDPA text dump of a lowered problem.
//!
//! Layout, one item per line after the comment lines starting with `"`:
//!
//! ```text
//! m                      number of equality rows
//! nBlocks                number of real blocks
//! n_1 n_2 ...            block sizes (scalar blocks have size 1)
//! c_1 c_2 ... c_m        right-hand sides b_i
//! i k r s v              entry (r, s), r <= s, 1-based, of F_i in block k
//! ```
//!
//! With `F_0 = 0` the SDPA dual `max ⟨F_0, Y⟩ s.t. ⟨F_i, Y⟩ = c_i, Y ⪰ 0`
//! is exactly the feasibility problem `A(Y) = b, Y ⪰ 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::lower::{RealBlockEntry, RealProblem, RealRow};
use crate::error::Error;

pub fn to_sdpa(p: &RealProblem, title: &str) -> String {
    let mut out = String::new();
    for line in title.lines() {
        let _ = writeln!(out, "\"{line}");
    }
    let _ = writeln!(out, "{}", p.rows.len());
    let _ = writeln!(out, "{}", p.block_sizes.len());
    let sizes: Vec<String> = p.block_sizes.iter().map(|n| format!("{n}")).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.rhs.iter().map(|v| format!("{v:.17e}")).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    for (i, row) in p.rows.iter().enumerate() {
        for e in &row.entries {
            let v = if e.r == e.s { e.v } else { 0.5 * e.v };
            let _ = writeln!(out, "{} {} {} {} {v:.17e}", i + 1, e.block + 1, e.r + 1, e.s + 1);
        }
    }
    out
}

/// Read a dump produced by [`to_sdpa`]; `F_0` entries are rejected.
pub fn parse_sdpa(text: &str) -> Result<RealProblem, Error> {
    let bad = |what: &str| Error::Solver(format!("malformed SDPA input: {what}"));
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let mut header = |what: &str| lines.next().ok_or_else(|| bad(what)).map(String::from);
    let m: usize = header("row count")?.parse().map_err(|_| bad("row count"))?;
    let nb: usize = header("block count")?.parse().map_err(|_| bad("block count"))?;
    let block_sizes: Vec<usize> = header("block sizes")?
        .split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '(' || c == ')')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map(|v| v.unsigned_abs() as usize))
        .collect::<Result<_, _>>()
        .map_err(|_| bad("block sizes"))?;
    if block_sizes.len() != nb {
        return Err(bad("block size list length"));
    }
    let rhs: Vec<f64> = header("right-hand side")?
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| bad("right-hand side"))?;
    if rhs.len() != m {
        return Err(bad("right-hand side length"));
    }
    let mut rows = vec_of_rows(m);
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(bad(line));
        }
        let idx: Vec<usize> = f[..4].iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(|_| bad(line))?;
        let v: f64 = f[4].parse().map_err(|_| bad(line))?;
        let (i, k, r, s) = (idx[0], idx[1], idx[2], idx[3]);
        if i == 0 || i > m || k == 0 || k > nb || r == 0 || s == 0 || r > s || s > block_sizes[k - 1] {
            return Err(bad(line));
        }
        rows[i - 1].entries.push(RealBlockEntry {
            block: k - 1,
            r: r - 1,
            s: s - 1,
            v: if r == s { v } else { 2.0 * v },
        });
    }
    for row in &mut rows {
        row.entries.sort_by(|a, b| (a.block, a.r, a.s).cmp(&(b.block, b.r, b.s)));
    }
    Ok(RealProblem { block_sizes, rows, rhs })
}

fn vec_of_rows(m: usize) -> Vec<RealRow> {
    (0..m).map(|_| RealRow::default()).collect()
}

#[cfg(test)]
mod tests {
    use super::super::builders::build_free_test;
    use super::*;
    use crate::catalog::sigma_chsh;

    #[test]
    fn dump_round_trips() {
        let p = build_free_test(&sigma_chsh().unwrap().into()).unwrap();
        let lowered = RealProblem::lower(&p);
        let text = to_sdpa(&lowered, "free test\nsigma-chsh");
        assert!(text.starts_with("\"free test\n\"sigma-chsh\n"));
        let back = parse_sdpa(&text).unwrap();
        assert_eq!(back.block_sizes, lowered.block_sizes);
        assert_eq!(back.rhs, lowered.rhs);
        for (a, b) in back.rows.iter().zip(&lowered.rows) {
            assert_eq!(a.entries.len(), b.entries.len());
            for (x, y) in a.entries.iter().zip(&b.entries) {
                assert_eq!((x.block, x.r, x.s), (y.block, y.r, y.s));
                assert!((x.v - y.v).abs() <= 1e-15 * y.v.abs());
            }
        }
    }

    #[test]
    fn rejects_lower_triangle_entries() {
        assert!(parse_sdpa("1\n1\n2\n1.0\n1 1 2 1 0.5\n").is_err());
        assert!(parse_sdpa("1\n1\n2\n1.0\n1 1 1 2 0.5\n").is_ok());
    }
}
