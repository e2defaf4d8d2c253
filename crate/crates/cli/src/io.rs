//! JSON form of assemblages.
//!
//! ```text
//! {"kind": "channel" | "bwi" | "mdi",
//!  "alphabets": {"na": .., "nx": .., ["ny": ..] | ["nb": ..]},
//!  "dims": {"d_in": .., "d_out": ..} | {"d": ..},
//!  "elements": {"<a>,<x>[,<y> | ,<b>]": {"re": [[..]], "im": [[..]]}}}
//! ```
//!
//! Channel elements are normalised Choi matrices on `B_out ⊗ B_in`,
//! Bob-with-input elements are states on `B`, MDI elements are normalised
//! Choi matrices on `B_in`. Numbers are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use losr_core::assemblage::{Assemblage, AssemblageKind, BwiAssemblage, ChannelAssemblage, MdiAssemblage};
use losr_core::tensor::{ComplexMatrix, HERMITIAN_TOL};
use losr_core::{DMatrix, C64};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{0}")]
    Core(#[from] losr_core::Error),
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// Keys with their element matrices, in storage order.
fn keyed_elements(a: &Assemblage) -> Vec<(String, &DMatrix<C64>)> {
    match a {
        Assemblage::Channel(c) => (0..c.nx())
            .flat_map(|x| (0..c.na()).map(move |a| (a, x)))
            .map(|(a, x)| (format!("{a},{x}"), c.element(a, x).matrix().data()))
            .collect(),
        Assemblage::Bwi(s) => (0..s.ny())
            .flat_map(|y| (0..s.nx()).flat_map(move |x| (0..s.na()).map(move |a| (a, x, y))))
            .map(|(a, x, y)| (format!("{a},{x},{y}"), s.element(a, x, y).data()))
            .collect(),
        Assemblage::Mdi(n) => (0..n.nx())
            .flat_map(|x| (0..n.na()).flat_map(move |a| (0..n.nb()).map(move |b| (a, b, x))))
            .map(|(a, b, x)| (format!("{a},{x},{b}"), n.element(a, b, x).data()))
            .collect(),
    }
}

fn number(v: f64) -> String {
    if v == 0.0 {
        // Avoid `-0`, which would not survive a round trip through the parser.
        return format!("{:.16e}", 0.0);
    }
    format!("{v:.16e}")
}

fn write_rows(out: &mut String, m: &DMatrix<C64>, part: impl Fn(C64) -> f64) {
    out.push('[');
    for r in 0..m.nrows() {
        if r > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for c in 0..m.ncols() {
            if c > 0 {
                out.push_str(", ");
            }
            out.push_str(&number(part(m[(r, c)])));
        }
        out.push(']');
    }
    out.push(']');
}

pub fn to_json_string(a: &Assemblage) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"kind\": \"{}\",", a.kind().as_str());
    let (alphabets, dims) = match a {
        Assemblage::Channel(c) => (
            format!("\"na\": {}, \"nx\": {}", c.na(), c.nx()),
            format!("\"d_in\": {}, \"d_out\": {}", c.d_in(), c.d_out()),
        ),
        Assemblage::Bwi(s) => (
            format!("\"na\": {}, \"nx\": {}, \"ny\": {}", s.na(), s.nx(), s.ny()),
            format!("\"d\": {}", s.d()),
        ),
        Assemblage::Mdi(n) => (
            format!("\"na\": {}, \"nx\": {}, \"nb\": {}", n.na(), n.nx(), n.nb()),
            format!("\"d\": {}", n.d()),
        ),
    };
    let _ = writeln!(out, "  \"alphabets\": {{{alphabets}}},");
    let _ = writeln!(out, "  \"dims\": {{{dims}}},");
    let _ = writeln!(out, "  \"elements\": {{");
    let els = keyed_elements(a);
    for (i, (key, m)) in els.iter().enumerate() {
        let mut line = format!("    \"{key}\": {{\"re\": ");
        write_rows(&mut line, m, |z| z.re);
        line.push_str(", \"im\": ");
        write_rows(&mut line, m, |z| z.im);
        line.push('}');
        if i + 1 < els.len() {
            line.push(',');
        }
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "  }}");
    let _ = writeln!(out, "}}");
    out
}

fn object<'a>(v: &'a Value, pointer: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| schema(pointer, "expected an object"))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, pointer: &str) -> Result<&'a Value, IoError> {
    m.get(key).ok_or_else(|| schema(pointer, format!("missing key `{key}`")))
}

fn count(m: &Map<String, Value>, key: &str, pointer: &str) -> Result<usize, IoError> {
    let p = format!("{pointer}/{key}");
    let v = field(m, key, pointer)?.as_u64().ok_or_else(|| schema(&p, "expected a positive integer"))?;
    if v == 0 || v > 64 {
        return Err(schema(p, format!("{v} is outside 1..=64")));
    }
    Ok(v as usize)
}

fn only_keys(m: &Map<String, Value>, allowed: &[&str], pointer: &str) -> Result<(), IoError> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(pointer, format!("unexpected key `{k}`"))),
        None => Ok(()),
    }
}

fn real_rows(v: &Value, n: usize, pointer: &str) -> Result<Vec<Vec<f64>>, IoError> {
    let rows = v.as_array().ok_or_else(|| schema(pointer, "expected an array of rows"))?;
    if rows.len() != n {
        return Err(schema(pointer, format!("expected {n} rows, found {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            let p = format!("{pointer}/{r}");
            let row = row.as_array().ok_or_else(|| schema(&p, "expected an array"))?;
            if row.len() != n {
                return Err(schema(&p, format!("expected {n} entries, found {}", row.len())));
            }
            row.iter()
                .enumerate()
                .map(|(c, x)| x.as_f64().ok_or_else(|| schema(format!("{p}/{c}"), "expected a number")))
                .collect()
        })
        .collect()
}

fn element(els: &Map<String, Value>, key: &str, n: usize) -> Result<DMatrix<C64>, IoError> {
    let pointer = format!("/elements/{key}");
    let e = object(field(els, key, "/elements")?, &pointer)?;
    only_keys(e, &["re", "im"], &pointer)?;
    let re = real_rows(field(e, "re", &pointer)?, n, &format!("{pointer}/re"))?;
    let im = real_rows(field(e, "im", &pointer)?, n, &format!("{pointer}/im"))?;
    let m = DMatrix::from_fn(n, n, |r, c| C64::new(re[r][c], im[r][c]));
    let defect = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > HERMITIAN_TOL {
        return Err(schema(pointer, format!("element `{key}` is not Hermitian (defect {defect:e})")));
    }
    Ok(m)
}

fn single(m: DMatrix<C64>, label: &str) -> Result<ComplexMatrix, IoError> {
    Ok(ComplexMatrix::single(m, label)?)
}

pub fn from_json_str(text: &str) -> Result<Assemblage, IoError> {
    use losr_core::assemblage::{B, B_IN};
    let root: Value = serde_json::from_str(text)?;
    let top = object(&root, "")?;
    only_keys(top, &["kind", "alphabets", "dims", "elements"], "")?;
    let kind: AssemblageKind = field(top, "kind", "")?
        .as_str()
        .ok_or_else(|| schema("/kind", "expected a string"))?
        .parse()
        .map_err(|_| schema("/kind", "expected \"channel\", \"bwi\" or \"mdi\""))?;
    let al = object(field(top, "alphabets", "")?, "/alphabets")?;
    let dims = object(field(top, "dims", "")?, "/dims")?;
    let els = object(field(top, "elements", "")?, "/elements")?;
    let na = count(al, "na", "/alphabets")?;
    let nx = count(al, "nx", "/alphabets")?;
    let expect_len = |len: usize| -> Result<(), IoError> {
        if els.len() != len {
            return Err(schema("/elements", format!("expected {len} elements, found {}", els.len())));
        }
        Ok(())
    };
    match kind {
        AssemblageKind::Channel => {
            only_keys(al, &["na", "nx"], "/alphabets")?;
            only_keys(dims, &["d_in", "d_out"], "/dims")?;
            let d_in = count(dims, "d_in", "/dims")?;
            let d_out = count(dims, "d_out", "/dims")?;
            expect_len(na * nx)?;
            let mut mats = Vec::with_capacity(na * nx);
            for x in 0..nx {
                for a in 0..na {
                    mats.push(element(els, &format!("{a},{x}"), d_in * d_out)?);
                }
            }
            Ok(ChannelAssemblage::from_matrices(na, nx, d_in, d_out, mats)?.into())
        }
        AssemblageKind::Bwi => {
            only_keys(al, &["na", "nx", "ny"], "/alphabets")?;
            only_keys(dims, &["d"], "/dims")?;
            let ny = count(al, "ny", "/alphabets")?;
            let d = count(dims, "d", "/dims")?;
            expect_len(na * nx * ny)?;
            let mut mats = Vec::with_capacity(na * nx * ny);
            for y in 0..ny {
                for x in 0..nx {
                    for a in 0..na {
                        mats.push(single(element(els, &format!("{a},{x},{y}"), d)?, B)?);
                    }
                }
            }
            Ok(BwiAssemblage::new(na, nx, ny, d, mats)?.into())
        }
        AssemblageKind::Mdi => {
            only_keys(al, &["na", "nx", "nb"], "/alphabets")?;
            only_keys(dims, &["d"], "/dims")?;
            let nb = count(al, "nb", "/alphabets")?;
            let d = count(dims, "d", "/dims")?;
            expect_len(na * nx * nb)?;
            let mut mats = Vec::with_capacity(na * nx * nb);
            for x in 0..nx {
                for a in 0..na {
                    for b in 0..nb {
                        mats.push(single(element(els, &format!("{a},{x},{b}"), d)?, B_IN)?);
                    }
                }
            }
            Ok(MdiAssemblage::new(na, nb, nx, d, mats)?.into())
        }
    }
}

pub fn read_assemblage(path: &Path) -> Result<Assemblage, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text)
}

pub fn write_assemblage(a: &Assemblage, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, to_json_string(a)).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use losr_core::catalog::catalog;

    #[test]
    fn round_trips_every_catalog_entry() {
        for name in losr_core::catalog::CatalogName::FIXED.iter().copied().chain(["r:x:pi/8"]) {
            let a = catalog(name).unwrap();
            let text = to_json_string(&a);
            let back = from_json_str(&text).unwrap();
            assert_eq!(to_json_string(&back), text, "{name}");
            for ((_, m), (_, n)) in keyed_elements(&a).iter().zip(keyed_elements(&back).iter()) {
                assert_eq!(m, n, "{name}");
            }
        }
    }

    #[test]
    fn aq_element_trace() {
        let v: Value = serde_json::from_str(&to_json_string(&catalog("sigma-aq").unwrap())).unwrap();
        let re = &v["elements"]["1,0,0"]["re"];
        let tr = re[0][0].as_f64().unwrap() + re[1][1].as_f64().unwrap();
        assert!((tr - 0.45).abs() < 1e-15);
    }

    #[test]
    fn numbers_keep_seventeen_digits() {
        let text = to_json_string(&catalog("sigma-chsh").unwrap());
        assert!(text.contains("0.0000000000000000e0"));
        assert_eq!(number(0.1), "1.0000000000000001e-1");
        assert_eq!(number(-0.0), number(0.0));
    }

    #[test]
    fn non_hermitian_element_is_named() {
        let mut v: Value = serde_json::from_str(&to_json_string(&catalog("sigma-chsh").unwrap())).unwrap();
        v["elements"]["1,0,1"]["im"][0][1] = Value::from(0.3);
        let err = from_json_str(&v.to_string()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("/elements/1,0,1") && msg.contains("not Hermitian"), "{msg}");
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let mut v: Value = serde_json::from_str(&to_json_string(&catalog("sigma-chsh").unwrap())).unwrap();
        v["elements"]["0,1,1"]["re"][1][0] = Value::from("x");
        assert!(from_json_str(&v.to_string()).unwrap_err().to_string().contains("/elements/0,1,1/re/1/0"));
        v["kind"] = Value::from("box");
        assert!(from_json_str(&v.to_string()).unwrap_err().to_string().contains("/kind"));
        assert!(matches!(from_json_str("{"), Err(IoError::Json(_))));
    }
}
