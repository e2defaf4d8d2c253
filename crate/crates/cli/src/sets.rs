//! Node sets for pre-order exploration.
//!
//! An item is a catalog name, a JSON file, or a family product
//! `r-family:{pi/2,pi/8}x{x,y,z}` expanding to every (angle, axis) pair.

use std::path::Path;

use losr_core::assemblage::Assemblage;
use losr_core::catalog::{build, Angle, Axis, CatalogName};

use crate::io::{read_assemblage, IoError};

#[derive(Clone, Debug)]
pub struct Node {
    pub id: String,
    pub assemblage: Assemblage,
    /// Angle and axis for members of the R family.
    pub rotation: Option<(f64, Axis)>,
}

#[derive(Debug, thiserror::Error)]
pub enum SetError {
    #[error("malformed family `{0}`: expected r-family:{{angles}}x{{axes}}")]
    Family(String),
    #[error("`{0}` is neither a readable file nor a catalog name ({1})")]
    Unresolved(String, losr_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] losr_core::Error),
}

fn braced(s: &str) -> Option<(Vec<&str>, &str)> {
    let inner = s.strip_prefix('{')?;
    let end = inner.find('}')?;
    let items = inner[..end].split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    Some((items, &inner[end + 1..]))
}

/// Expand one `--set` item into catalog names, or `None` when it is not a family product.
pub fn expand_family(item: &str) -> Result<Option<Vec<CatalogName>>, SetError> {
    let Some(rest) = item.strip_prefix("r-family:") else { return Ok(None) };
    if !rest.starts_with('{') {
        return Ok(None);
    }
    let bad = || SetError::Family(item.to_string());
    let (angles, rest) = braced(rest).ok_or_else(bad)?;
    let rest = rest.strip_prefix('x').ok_or_else(bad)?;
    let (axes, rest) = braced(rest).ok_or_else(bad)?;
    if !rest.is_empty() || angles.is_empty() || axes.is_empty() {
        return Err(bad());
    }
    let mut names = Vec::with_capacity(angles.len() * axes.len());
    for t in &angles {
        let theta: Angle = t.parse()?;
        for a in &axes {
            names.push(CatalogName::RFamily {
                axis: a.parse()?,
                theta: theta.clone(),
            });
        }
    }
    Ok(Some(names))
}

fn node_from_name(name: &CatalogName) -> Result<Node, SetError> {
    let rotation = match name {
        CatalogName::RFamily { axis, theta } => Some((theta.value, *axis)),
        _ => None,
    };
    Ok(Node {
        id: name.to_string(),
        assemblage: build(name)?,
        rotation,
    })
}

/// A JSON file if the path exists, otherwise a catalog name.
pub fn resolve(item: &str) -> Result<Node, SetError> {
    let path = Path::new(item);
    if path.is_file() {
        let id = path.file_stem().map_or_else(|| item.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok(Node {
            id,
            assemblage: read_assemblage(path)?,
            rotation: None,
        });
    }
    let name: CatalogName = item.parse().map_err(|e| SetError::Unresolved(item.to_string(), e))?;
    node_from_name(&name)
}

pub fn resolve_set(items: &[String]) -> Result<Vec<Node>, SetError> {
    let mut nodes = Vec::new();
    for item in items {
        match expand_family(item)? {
            Some(names) => {
                for n in &names {
                    nodes.push(node_from_name(n)?);
                }
            }
            None => nodes.push(resolve(item)?),
        }
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_product_expands_in_order() {
        let names = expand_family("r-family:{pi/2,pi/8,pi/16}x{x,y,z}").unwrap().unwrap();
        let ids: Vec<String> = names.iter().map(|n| n.to_string()).collect();
        assert_eq!(ids.len(), 9);
        assert_eq!(ids[0], "r:x:pi/2");
        assert_eq!(ids[8], "r:z:pi/16");
    }

    #[test]
    fn plain_items_are_not_families() {
        assert!(expand_family("sigma-pr").unwrap().is_none());
        assert!(expand_family("r-family:x:pi/8").unwrap().is_none());
        assert!(expand_family("r-family:{pi}x{w}").is_err());
        assert!(expand_family("r-family:{pi}{x}").is_err());
    }

    #[test]
    fn unknown_names_are_reported() {
        let err = resolve("sigma-nothing").unwrap_err();
        assert!(err.to_string().contains("sigma-nothing"));
    }
}
