//! Versioned store of manifold facts with per-datum citations.
//!
//! The on-disk format is JSON; see `docs/catalog-schema.md` at the
//! repository root. The builtin catalog is compiled in from
//! `data/catalog.json`.

mod expr;
mod family;
mod model;
mod query;
mod validate;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

pub use expr::{Expr, ExprError};
pub use model::*;
pub use query::{query, Query};

pub const SCHEMA_VERSION: &str = "1";

const BUILTIN: &str = include_str!("../../data/catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("entry `{entry}` violates `{rule}`: {detail}")]
    InvariantViolation {
        entry: String,
        rule: String,
        detail: String,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown catalog id `{0}`")]
    UnknownId(String),
    #[error("{value} is outside the parameter domain of {family}")]
    OutsideDomain { family: String, value: String },
    #[error("cannot instantiate {family} at {value}: {message}")]
    Instantiate {
        family: String,
        value: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SchemaVersion;

impl Serialize for SchemaVersion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(SCHEMA_VERSION)
    }
}

impl<'de> Deserialize<'de> for SchemaVersion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = String::deserialize(d)?;
        if v == SCHEMA_VERSION {
            Ok(SchemaVersion)
        } else {
            Err(serde::de::Error::custom(format!(
                "unsupported schema_version `{v}`, expected `{SCHEMA_VERSION}`"
            )))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    schema_version: SchemaVersion,
    entries: Vec<Entry>,
}

/// A validated catalog, keyed by entry id.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: BTreeMap<String, Entry>,
}

/// What an id refers to.
#[derive(Debug, Clone)]
pub enum Resolved<'a> {
    Manifold {
        entry: &'a ManifoldEntry,
        /// Set when the id named a family instance stored as its own entry.
        via: Option<(&'a FamilyEntry, Rational)>,
    },
    Family(&'a FamilyEntry),
    Instance {
        id: String,
        family: &'a FamilyEntry,
        parameter: Rational,
        profile: ManifoldProfile,
    },
}

impl Resolved<'_> {
    /// Canonical id of the manifold, `None` for a whole family.
    pub fn manifold_id(&self) -> Option<String> {
        match self {
            Resolved::Manifold { entry, .. } => Some(entry.id.clone()),
            Resolved::Family(_) => None,
            Resolved::Instance { id, .. } => Some(id.clone()),
        }
    }

    pub fn profile(&self) -> Option<&ManifoldProfile> {
        match self {
            Resolved::Manifold { entry, .. } => Some(&entry.profile),
            Resolved::Family(_) => None,
            Resolved::Instance { profile, .. } => Some(profile),
        }
    }
}

impl Catalog {
    /// Builds and validates a catalog.
    pub fn new(entries: Vec<Entry>) -> Result<Self, CatalogError> {
        let mut map = BTreeMap::new();
        for e in entries {
            let id = e.id().to_string();
            if map.insert(id.clone(), e).is_some() {
                return Err(CatalogError::InvariantViolation {
                    entry: id,
                    rule: "unique-id".into(),
                    detail: "id appears twice".into(),
                });
            }
        }
        let catalog = Catalog { entries: map };
        validate::validate(&catalog)?;
        Ok(catalog)
    }

    pub fn schema_version(&self) -> &'static str {
        SCHEMA_VERSION
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.entries.values()
    }

    pub fn get(&self, id: &str) -> Option<&Entry> {
        self.entries.get(id)
    }

    pub fn families(&self) -> impl Iterator<Item = &FamilyEntry> {
        self.entries.values().filter_map(|e| match e {
            Entry::Family(f) => Some(f),
            _ => None,
        })
    }

    pub fn manifolds(&self) -> impl Iterator<Item = &ManifoldEntry> {
        self.entries.values().filter_map(|e| match e {
            Entry::Manifold(m) => Some(m),
            _ => None,
        })
    }

    /// The manifold entry standing for `family` at `x`, if any.
    pub fn override_for(&self, family: &str, x: &Rational) -> Option<&ManifoldEntry> {
        self.manifolds()
            .find(|m| m.member_of.iter().any(|mb| mb.family == family && mb.parameter == *x))
    }

    /// Looks up an entry id, an alias, a family id or a family instance name.
    pub fn resolve(&self, id: &str) -> Result<Resolved<'_>, CatalogError> {
        match self.entries.get(id) {
            Some(Entry::Manifold(m)) => return Ok(Resolved::Manifold { entry: m, via: None }),
            Some(Entry::Family(f)) => return Ok(Resolved::Family(f)),
            None => {}
        }
        if let Some(m) = self.manifolds().find(|m| m.aliases.iter().any(|a| a == id)) {
            return Ok(Resolved::Manifold { entry: m, via: None });
        }
        for f in self.families() {
            if let Some(x) = f.parse_parameter(id) {
                if self.override_for(&f.id, &x).is_some() || f.in_domain(&x) {
                    return self.instance(f, &x);
                }
            }
        }
        Err(CatalogError::UnknownId(id.to_string()))
    }

    /// The member of `family` at `x`, honouring manifold entries that stand
    /// in for special parameter values.
    pub fn instance<'a>(&'a self, family: &'a FamilyEntry, x: &Rational) -> Result<Resolved<'a>, CatalogError> {
        if let Some(m) = self.override_for(&family.id, x) {
            return Ok(Resolved::Manifold {
                entry: m,
                via: Some((family, *x)),
            });
        }
        Ok(Resolved::Instance {
            id: family.instance_id(x)?,
            family,
            parameter: *x,
            profile: family.instantiate(x)?,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: CatalogFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            CatalogError::Parse {
                line: inner.line(),
                field,
                message: inner.to_string(),
            }
        })?;
        Catalog::new(file.entries)
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            schema_version: SchemaVersion,
            entries: self.entries.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("catalog values always serialize") + "\n"
    }
}

/// The facts used by the rigidity proofs, with citations.
pub fn builtin_paper_catalog() -> Catalog {
    Catalog::from_json(BUILTIN).expect("builtin catalog is valid")
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Catalog::from_json(&text)
}

pub fn save_catalog(catalog: &Catalog, path: impl AsRef<Path>) -> Result<(), CatalogError> {
    let path = path.as_ref();
    std::fs::write(path, catalog.to_json()).map_err(|e| CatalogError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
