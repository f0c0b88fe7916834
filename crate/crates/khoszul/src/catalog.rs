//! Bundled link catalog: small diagrams by name, plus known instanton
//! homology dimensions where the literature states them.

use serde::Deserialize;

use crate::error::KhError;
use crate::link::{LinkDiagram, Marking};

#[derive(Clone, Debug, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub pd: String,
    #[serde(default)]
    pub free_loops: usize,
    pub components: usize,
    pub khi_dim: Option<usize>,
    pub khi_source: Option<String>,
}

#[derive(Deserialize)]
struct CatalogFile {
    links: Vec<CatalogEntry>,
}

const CATALOG_JSON: &str = include_str!("catalog.json");

pub fn catalog() -> Vec<CatalogEntry> {
    let file: CatalogFile = serde_json::from_str(CATALOG_JSON).expect("bundled catalog parses");
    file.links
}

pub fn lookup(name: &str) -> Result<CatalogEntry, KhError> {
    catalog().into_iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<String> = catalog().into_iter().map(|e| e.name).collect();
        KhError::Parse(format!("unknown catalog link `{name}` (available: {})", names.join(", ")))
    })
}

impl CatalogEntry {
    pub fn diagram(&self) -> Result<LinkDiagram, KhError> {
        let records = if self.pd.trim().is_empty() {
            vec![]
        } else {
            match LinkDiagram::parse_pd(&self.pd) {
                Ok(d) => return d_with_loops(d, self.free_loops, self),
                Err(e) => return Err(e),
            }
        };
        let d = LinkDiagram::from_records(records, self.free_loops, vec![], None)?;
        check_components(&d, self)?;
        Ok(d)
    }
}

fn d_with_loops(d: LinkDiagram, free_loops: usize, entry: &CatalogEntry) -> Result<LinkDiagram, KhError> {
    if free_loops != 0 {
        return Err(KhError::Internal(format!(
            "catalog entry {} mixes a PD code with free loops",
            entry.name
        )));
    }
    check_components(&d, entry)?;
    Ok(d)
}

fn check_components(d: &LinkDiagram, entry: &CatalogEntry) -> Result<(), KhError> {
    if d.component_count() != entry.components {
        return Err(KhError::Internal(format!(
            "catalog entry {} declares {} components but its diagram has {}",
            entry.name,
            entry.components,
            d.component_count()
        )));
    }
    Ok(())
}

/// One marking per component, on the smallest arc of each, offset 0.
pub fn one_per_component(d: &LinkDiagram) -> Vec<Marking> {
    d.components()
        .iter()
        .map(|arcs| Marking { arc: *arcs.iter().min().expect("nonempty component"), offset: 0 })
        .collect()
}

/// Basepoint on the last component plus one marking per other component,
/// for the reduced inequality.
pub fn reduced_markings(d: &LinkDiagram) -> (Vec<Marking>, Marking) {
    let mut per = one_per_component(d);
    let bp = per.pop().expect("at least one component");
    (per, bp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_diagrams_all_build() {
        for entry in catalog() {
            let d = entry.diagram().unwrap_or_else(|e| panic!("{}: {e}", entry.name));
            assert_eq!(d.component_count(), entry.components, "{}", entry.name);
        }
    }

    #[test]
    fn khi_values_cover_unlinks_and_hopf_only() {
        for entry in catalog() {
            match entry.name.as_str() {
                "unknot" => assert_eq!(entry.khi_dim, Some(1)),
                "unlink:2" => assert_eq!(entry.khi_dim, Some(2)),
                "unlink:3" => assert_eq!(entry.khi_dim, Some(4)),
                "unlink:4" => assert_eq!(entry.khi_dim, Some(8)),
                "hopf" => assert_eq!(entry.khi_dim, Some(4)),
                _ => assert_eq!(entry.khi_dim, None, "{}", entry.name),
            }
            assert_eq!(entry.khi_dim.is_some(), entry.khi_source.is_some());
        }
    }

    #[test]
    fn lookup_reports_available_names() {
        let err = lookup("granny").unwrap_err();
        assert!(err.to_string().contains("hopf"));
    }

    #[test]
    fn marking_helpers() {
        let d = lookup("hopf").unwrap().diagram().unwrap();
        let per = one_per_component(&d);
        assert_eq!(per.len(), 2);
        let (rest, bp) = reduced_markings(&d);
        assert_eq!(rest.len(), 1);
        assert_ne!(rest[0].arc, bp.arc);
    }

    #[test]
    fn trefoils_are_mirrors() {
        let t = lookup("trefoil").unwrap().diagram().unwrap();
        let tl = lookup("trefoil-left").unwrap().diagram().unwrap();
        assert_eq!(t.n_plus(), 3);
        assert_eq!(tl.n_minus(), 3);
        let m = t.mirror();
        assert_eq!(m.n_minus(), 3);
    }
}
