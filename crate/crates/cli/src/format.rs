//! On-disk formats: computon files, parsing-tree sidecars and composition
//! scripts.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use computon::computon::{Class, Computon, ComputonError, ComputonParts, DeviceId};
use computon::operators::{Composite, ParsingTree};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unknown port label `{0}`")]
    UnknownLabel(String),
    #[error("inflow {0} has no relate entry")]
    Unrelated(usize),
    #[error("inflow {0} has more than one relate entry")]
    Overrelated(usize),
    #[error("relate entry [{0}, {1}] is out of range")]
    RelateRange(usize, usize),
    #[error("declared class {declared} but the computon is {actual}")]
    ClassMismatch { declared: String, actual: String },
    #[error("tree sidecar {0} does not belong to this computon")]
    ForeignTree(PathBuf),
    #[error(transparent)]
    Computon(#[from] ComputonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassHint {
    Trivial,
    Primitive,
    Composite,
}

impl From<Class> for ClassHint {
    fn from(c: Class) -> Self {
        match c {
            Class::Trivial => ClassHint::Trivial,
            Class::Primitive => ClassHint::Primitive,
            Class::Composite => ClassHint::Composite,
        }
    }
}

fn class_name(c: ClassHint) -> String {
    serde_json::to_value(c)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortEntry {
    pub label: String,
    pub colour: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InflowEntry {
    pub from: String,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutflowEntry {
    pub from: usize,
    pub to: String,
    pub device: DeviceId,
}

/// JSON form of a computon. Ports are referenced by label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputonFile {
    #[serde(default)]
    pub name: String,
    pub units: usize,
    /// Number of colours; defaults to one more than the largest port colour.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colours: Option<usize>,
    pub ports: Vec<PortEntry>,
    #[serde(default)]
    pub inflows: Vec<InflowEntry>,
    #[serde(default)]
    pub outflows: Vec<OutflowEntry>,
    /// `[inflow, outflow]` pairs, one per inflow.
    #[serde(default)]
    pub relate: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassHint>,
}

impl ComputonFile {
    pub fn from_computon(name: impl Into<String>, c: &Computon) -> Self {
        let parts = c.parts();
        let label = |p: usize| parts.port_labels[p].clone();
        ComputonFile {
            name: name.into(),
            units: parts.units,
            colours: Some(parts.types),
            ports: parts
                .port_labels
                .iter()
                .zip(&parts.colours)
                .map(|(l, &c)| PortEntry {
                    label: l.clone(),
                    colour: c,
                })
                .collect(),
            inflows: parts
                .inflows
                .iter()
                .map(|&(p, u)| InflowEntry {
                    from: label(p),
                    to: u,
                })
                .collect(),
            outflows: parts
                .outflows
                .iter()
                .map(|(u, p, d)| OutflowEntry {
                    from: *u,
                    to: label(*p),
                    device: d.clone(),
                })
                .collect(),
            relate: parts
                .relate
                .iter()
                .enumerate()
                .map(|(i, &o)| [i, o])
                .collect(),
            class: Some(c.class().into()),
        }
    }

    /// Structure maps, without semantic validation.
    pub fn parts(&self) -> Result<ComputonParts, FormatError> {
        let index: HashMap<&str, usize> = self
            .ports
            .iter()
            .enumerate()
            .map(|(p, e)| (e.label.as_str(), p))
            .collect();
        let port = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| FormatError::UnknownLabel(l.to_owned()))
        };
        let mut relate = vec![None; self.inflows.len()];
        for &[i, o] in &self.relate {
            if i >= self.inflows.len() || o >= self.outflows.len() {
                return Err(FormatError::RelateRange(i, o));
            }
            if relate[i].replace(o).is_some() {
                return Err(FormatError::Overrelated(i));
            }
        }
        let relate = relate
            .into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or(FormatError::Unrelated(i)))
            .collect::<Result<_, _>>()?;
        let max_colour = self.ports.iter().map(|p| p.colour + 1).max().unwrap_or(1);
        Ok(ComputonParts {
            units: self.units,
            types: self.colours.unwrap_or(max_colour),
            port_labels: self.ports.iter().map(|p| p.label.clone()).collect(),
            colours: self.ports.iter().map(|p| p.colour).collect(),
            inflows: self
                .inflows
                .iter()
                .map(|f| Ok((port(&f.from)?, f.to)))
                .collect::<Result<_, FormatError>>()?,
            outflows: self
                .outflows
                .iter()
                .map(|f| Ok((f.from, port(&f.to)?, f.device.clone())))
                .collect::<Result<_, FormatError>>()?,
            relate,
        })
    }

    /// Validated computon; a declared class must match.
    pub fn to_computon(&self) -> Result<Computon, FormatError> {
        let c = Computon::new(self.parts()?)?;
        if let Some(declared) = self.class {
            let actual: ClassHint = c.class().into();
            if declared != actual {
                return Err(FormatError::ClassMismatch {
                    declared: class_name(declared),
                    actual: class_name(actual),
                });
            }
        }
        Ok(c)
    }
}

/// Parsing tree stored next to a composite, tied to it by digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeFile {
    pub sha256: String,
    pub tree: ParsingTree,
}

/// Hex SHA-256 of the canonical JSON of the structure maps.
pub fn digest(c: &Computon) -> String {
    let bytes = serde_json::to_vec(&c.parts()).expect("structure maps serialise");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn tree_path(file: &Path) -> PathBuf {
    let mut s = file.as_os_str().to_owned();
    s.push(".tree.json");
    PathBuf::from(s)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value).expect("formats serialise");
    text.push('\n');
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Loads a computon file and, when present, its tree sidecar. Without a
/// sidecar the file is a single leaf named after the file's `name` (or
/// `fallback`).
pub fn load_composite(path: &Path, fallback: &str) -> Result<Composite, FormatError> {
    let file: ComputonFile = read_json(path)?;
    let computon = file.to_computon()?;
    let sidecar = tree_path(path);
    if sidecar.exists() {
        let tree: TreeFile = read_json(&sidecar)?;
        if tree.sha256 != digest(&computon) {
            return Err(FormatError::ForeignTree(sidecar));
        }
        return Ok(Composite {
            computon,
            tree: tree.tree,
        });
    }
    let name = if file.name.is_empty() {
        fallback
    } else {
        &file.name
    };
    Ok(Composite::leaf(name, computon))
}

/// Writes the computon and, for height > 0, its tree sidecar.
pub fn save_composite(path: &Path, name: &str, c: &Composite) -> Result<(), FormatError> {
    write_json(path, &ComputonFile::from_computon(name, &c.computon))?;
    if c.tree.height() > 0 {
        write_json(
            &tree_path(path),
            &TreeFile {
                sha256: digest(&c.computon),
                tree: c.tree.clone(),
            },
        )?;
    }
    Ok(())
}
