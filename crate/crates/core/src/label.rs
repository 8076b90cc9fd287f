//! Label newtypes and the open label inventories they are checked against.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::Error;

macro_rules! label_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                $name(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl Deref for $name {
            type Target = str;

            fn deref(&self) -> &str {
                &self.0
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                $name(value.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(value: String) -> Self {
                $name(value)
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

label_type!(
    /// Part-of-speech tag of a terminal.
    PosTag
);
label_type!(
    /// Phrasal category of a nonterminal (S, VP, NP, ...).
    Category
);
label_type!(
    /// Grammatical function carried by the edge from a node to its parent.
    FunctionLabel
);

/// Edge label carried by children of the virtual root.
pub const ROOT_LABEL: &str = "--";
/// Edge label marking the head of a phrase.
pub const HEAD_LABEL: &str = "HD";

impl FunctionLabel {
    pub fn root() -> Self {
        FunctionLabel::new(ROOT_LABEL)
    }

    pub fn head() -> Self {
        FunctionLabel::new(HEAD_LABEL)
    }

    pub fn is_root(&self) -> bool {
        self.0 == ROOT_LABEL
    }

    pub fn is_head(&self) -> bool {
        self.0 == HEAD_LABEL
    }
}

const DEFAULT_INVENTORY: &str = include_str!("../data/default.inventory");

/// The label sets used by strict validation.
///
/// Inventories are plain data so the scheme can be refined without touching
/// code. The file format is line oriented: a `[pos]`, `[category]` or
/// `[function]` header opens a section, every following non-empty line is one
/// label, and lines starting with `%%` are comments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inventory {
    pub name: String,
    pub pos: BTreeSet<String>,
    pub categories: BTreeSet<String>,
    pub functions: BTreeSet<String>,
}

impl Inventory {
    /// STTS tags with NEGRA categories and edge labels.
    pub fn stts() -> Self {
        Self::parse("stts", DEFAULT_INVENTORY).expect("bundled inventory is well-formed")
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, Error> {
        let mut inv = Inventory {
            name: name.to_owned(),
            pos: BTreeSet::new(),
            categories: BTreeSet::new(),
            functions: BTreeSet::new(),
        };
        let mut section: Option<&mut BTreeSet<String>> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with("%%") {
                continue;
            }
            match line {
                "[pos]" => section = Some(&mut inv.pos),
                "[category]" => section = Some(&mut inv.categories),
                "[function]" => section = Some(&mut inv.functions),
                _ => match section.as_deref_mut() {
                    Some(set) => {
                        set.insert(line.to_owned());
                    }
                    None => {
                        return Err(Error::Inventory {
                            line: lineno + 1,
                            message: format!("label `{line}` outside of a section"),
                        })
                    }
                },
            }
        }
        Ok(inv)
    }

    pub fn has_pos(&self, tag: &PosTag) -> bool {
        self.pos.contains(tag.as_str())
    }

    pub fn has_category(&self, cat: &Category) -> bool {
        self.categories.contains(cat.as_str())
    }

    pub fn has_function(&self, label: &FunctionLabel) -> bool {
        self.functions.contains(label.as_str())
    }
}

impl Default for Inventory {
    fn default() -> Self {
        Inventory::stts()
    }
}
