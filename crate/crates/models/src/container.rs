//! Single-file model container.
//!
//! ```json
//! {
//!   "format": "argbank-model",
//!   "version": 1,
//!   "tagset": "stts",
//!   "sections": { "pos": {...}, "labeler": {...}, "chunker": {...} }
//! }
//! ```
//!
//! Every section is optional. Sections hold raw counts only; smoothed
//! probabilities are recomputed on load. A file whose `format` or `version`
//! differs from this build's is refused before any section is read.

use serde::{Deserialize, Serialize};

use crate::chunk::ChunkModel;
use crate::labeler::LabelerModel;
use crate::pos::TrigramModel;
use crate::ModelError;

pub const MODEL_FORMAT: &str = "argbank-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sections {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<TrigramModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeler: Option<LabelerModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunker: Option<ChunkModel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelBundle {
    pub tagset: String,
    pub sections: Sections,
}

#[derive(Serialize)]
struct FileOut<'a> {
    format: &'a str,
    version: u32,
    tagset: &'a str,
    sections: &'a Sections,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    tagset: String,
}

#[derive(Deserialize)]
struct FileIn {
    sections: Sections,
}

impl ModelBundle {
    pub fn new(tagset: impl Into<String>) -> Self {
        ModelBundle {
            tagset: tagset.into(),
            sections: Sections::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FileOut {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            tagset: &self.tagset,
            sections: &self.sections,
        })
        .expect("models serialize")
    }

    /// Loads a container. With `expected_tagset`, a container for another
    /// tagset is refused as well.
    pub fn from_json(text: &str, expected_tagset: Option<&str>) -> Result<Self, ModelError> {
        let header: Header = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if header.format != MODEL_FORMAT {
            return Err(ModelError::Format(format!("not a model file (format `{}`)", header.format)));
        }
        if header.version != MODEL_VERSION {
            return Err(ModelError::Version {
                found: header.version,
                expected: MODEL_VERSION,
            });
        }
        if let Some(t) = expected_tagset {
            if t != header.tagset {
                return Err(ModelError::Tagset {
                    found: header.tagset,
                    expected: t.to_owned(),
                });
            }
        }
        let body: FileIn = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        Ok(ModelBundle {
            tagset: header.tagset,
            sections: body.sections,
        })
    }

    pub fn pos(&self) -> Result<&TrigramModel, ModelError> {
        self.sections.pos.as_ref().ok_or(ModelError::MissingSection("pos"))
    }

    pub fn labeler(&self) -> Result<&LabelerModel, ModelError> {
        self.sections.labeler.as_ref().ok_or(ModelError::MissingSection("labeler"))
    }

    pub fn chunker(&self) -> Result<&ChunkModel, ModelError> {
        self.sections.chunker.as_ref().ok_or(ModelError::MissingSection("chunker"))
    }

    /// Stable identifier of the container contents (64-bit FNV-1a of the
    /// serialized form, hex).
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_json().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pos::train_trigram;

    fn bundle() -> ModelBundle {
        let mut b = ModelBundle::new("stts");
        b.sections.pos = Some(train_trigram(&[vec![("a".into(), "X".into())]]).unwrap());
        b
    }

    #[test]
    fn round_trip() {
        let b = bundle();
        let back = ModelBundle::from_json(&b.to_json(), Some("stts")).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.fingerprint(), b.fingerprint());
        assert!(matches!(back.labeler(), Err(ModelError::MissingSection("labeler"))));
    }

    #[test]
    fn refuses_other_versions_and_tagsets() {
        let text = bundle().to_json().replace("\"version\":1", "\"version\":2");
        assert!(matches!(
            ModelBundle::from_json(&text, None),
            Err(ModelError::Version { found: 2, expected: 1 })
        ));
        assert!(matches!(
            ModelBundle::from_json(&bundle().to_json(), Some("ptb")),
            Err(ModelError::Tagset { .. })
        ));
        assert!(ModelBundle::from_json("{}", None).is_err());
        let other = bundle().to_json().replace(MODEL_FORMAT, "something-else");
        assert!(matches!(ModelBundle::from_json(&other, None), Err(ModelError::Format(_))));
    }

    #[test]
    fn corrupt_section_is_an_error() {
        let text = bundle().to_json().replace("\"states\":1", "\"states\":7");
        assert!(ModelBundle::from_json(&text, None).is_err());
    }
}
