//! Name-keyed registries for runtime-selectable variants.

use crate::error::{Error, Result};

/// Ordered map from a name to a factory (or any value) of type `F`.
pub struct Registry<F> {
    kind: &'static str,
    entries: Vec<Entry<F>>,
}

struct Entry<F> {
    name: String,
    summary: String,
    item: F,
}

impl<F> Registry<F> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Registers `item` under `name`, replacing an existing entry.
    pub fn register(&mut self, name: impl Into<String>, summary: impl Into<String>, item: F) -> &mut Self {
        let name = name.into();
        let entry = Entry {
            name: name.clone(),
            summary: summary.into(),
            item,
        };
        match self.entries.iter().position(|e| e.name == name) {
            Some(i) => self.entries[i] = entry,
            None => self.entries.push(entry),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&F> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| &e.item)
            .ok_or_else(|| Error::UnknownName {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|e| e.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    /// `(name, summary)` pairs in registration order.
    pub fn describe(&self) -> Vec<(&str, &str)> {
        self.entries.iter().map(|e| (e.name.as_str(), e.summary.as_str())).collect()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}
