//! The dictionary sidecar written next to a translated formula.

use atlk_core::translate::{DictEntry, Mode, TranslationResult};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dictionary {
    pub mode: String,
    pub guarantee: String,
    /// Action atoms per member, environment last.
    pub act_sets: IndexMap<String, Vec<String>>,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub atom: String,
    pub role: String,
    pub origin: Option<String>,
}

impl From<&DictEntry> for Entry {
    fn from(d: &DictEntry) -> Entry {
        Entry { atom: d.atom.to_string(), role: d.role.to_string(), origin: d.origin.as_ref().map(|f| f.to_string()) }
    }
}

impl Dictionary {
    pub fn of(r: &TranslationResult) -> Dictionary {
        Dictionary {
            mode: r.mode.to_string(),
            guarantee: r.guarantee().to_string(),
            act_sets: r
                .act_sets
                .iter()
                .map(|(a, props)| (a.to_string(), props.iter().map(|p| p.to_string()).collect()))
                .collect(),
            entries: r.dictionary.iter().map(Entry::from).collect(),
        }
    }

    pub fn mode(&self) -> Option<Mode> {
        self.mode.parse().ok()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dictionaries serialize");
        s.push('\n');
        s
    }
}
