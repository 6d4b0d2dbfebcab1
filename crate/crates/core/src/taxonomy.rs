//! Service-type taxonomy with subclass (subsumption) reasoning.
//!
//! A [`Taxonomy`] is a DAG of named service types. `a ⊑ b` holds when `a`
//! reaches `b` by following zero or more subclass edges. Unknown names are
//! never an error: they are simply unrelated to everything but themselves.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("type `{0}` cannot be a subclass of itself")]
    SelfSubclass(String),
    #[error("edge `{child}` subClassOf `{parent}` would create a cycle")]
    Cycle { child: String, parent: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Subclass DAG over service-type names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    parents: BTreeMap<String, BTreeSet<String>>,
    children: BTreeMap<String, BTreeSet<String>>,
}

impl Taxonomy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a type with no edges. No-op if already known.
    pub fn add_type(&mut self, name: &str) {
        if !self.parents.contains_key(name) {
            self.parents.insert(name.to_owned(), BTreeSet::new());
            self.children.insert(name.to_owned(), BTreeSet::new());
        }
    }

    /// Records `child ⊑ parent`, registering both names.
    ///
    /// Fails without modifying the taxonomy if `child == parent` or if
    /// `parent` is already a subtype of `child`.
    pub fn add_subclass(&mut self, child: &str, parent: &str) -> Result<(), TaxonomyError> {
        if child == parent {
            return Err(TaxonomyError::SelfSubclass(child.to_owned()));
        }
        if self.is_subtype(parent, child) {
            return Err(TaxonomyError::Cycle {
                child: child.to_owned(),
                parent: parent.to_owned(),
            });
        }
        self.add_type(child);
        self.add_type(parent);
        self.parents.get_mut(child).unwrap().insert(parent.to_owned());
        self.children.get_mut(parent).unwrap().insert(child.to_owned());
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.parents.contains_key(name)
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.parents.keys().map(String::as_str)
    }

    /// All `(child, parent)` edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parents
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (c.as_str(), p.as_str())))
    }

    pub fn direct_parents(&self, name: &str) -> impl Iterator<Item = &str> {
        self.parents
            .get(name)
            .into_iter()
            .flat_map(|ps| ps.iter().map(String::as_str))
    }

    /// `a ⊑ b` under the reflexive-transitive closure of the subclass edges.
    pub fn is_subtype(&self, a: &str, b: &str) -> bool {
        if a == b {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![a];
        while let Some(t) = stack.pop() {
            for p in self.direct_parents(t) {
                if p == b {
                    return true;
                }
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        false
    }

    /// `{ a : a ⊑ b }`, always including `b` itself.
    pub fn subtypes_of(&self, b: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        out.insert(b.to_owned());
        let mut stack = vec![b.to_owned()];
        while let Some(t) = stack.pop() {
            if let Some(cs) = self.children.get(&t) {
                for c in cs {
                    if out.insert(c.clone()) {
                        stack.push(c.clone());
                    }
                }
            }
        }
        out
    }

    /// `{ b : a ⊑ b }`, always including `a` itself.
    pub fn supertypes_of(&self, a: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        out.insert(a.to_owned());
        let mut stack = vec![a.to_owned()];
        while let Some(t) = stack.pop() {
            if let Some(ps) = self.parents.get(&t) {
                for p in ps {
                    if out.insert(p.clone()) {
                        stack.push(p.clone());
                    }
                }
            }
        }
        out
    }
}

/// Parses the line-oriented taxonomy format:
///
/// ```text
/// # comment
/// Walking subClassOf Fitness
/// <http://example.org/Jogging> subClassOf Fitness
/// ```
///
/// Angle brackets around a name are stripped.
pub fn parse_taxonomy(text: &str) -> Result<Taxonomy, TaxonomyError> {
    let mut tax = Taxonomy::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let (child, parent) = match fields.as_slice() {
            [c, "subClassOf", p] => (strip_brackets(c), strip_brackets(p)),
            _ => {
                return Err(TaxonomyError::Parse {
                    line,
                    message: format!("expected `<child> subClassOf <parent>`, got `{trimmed}`"),
                })
            }
        };
        if child.is_empty() || parent.is_empty() {
            return Err(TaxonomyError::Parse {
                line,
                message: "empty type name".to_owned(),
            });
        }
        tax.add_subclass(child, parent).map_err(|e| match e {
            TaxonomyError::SelfSubclass(_) => TaxonomyError::Parse {
                line,
                message: e.to_string(),
            },
            other => other,
        })?;
    }
    Ok(tax)
}

fn strip_brackets(s: &str) -> &str {
    s.strip_prefix('<')
        .and_then(|s| s.strip_suffix('>'))
        .unwrap_or(s)
}

impl FromStr for Taxonomy {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_taxonomy(s)
    }
}

/// Writes the taxonomy back in the line format, one edge per line.
impl fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, p) in self.edges() {
            writeln!(f, "{c} subClassOf {p}")?;
        }
        Ok(())
    }
}
