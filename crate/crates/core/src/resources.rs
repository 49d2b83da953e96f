//! Name lexicons and keyboard layouts used by the augmenters.
//!
//! Both are UTF-8 TSV files. Blank lines and lines starting with `#` are
//! ignored; row numbers in errors count every physical line.
//!
//! Name lexicon rows: `kind\tmode\tname\tgender` with kind `first|last`,
//! mode `danish|muslim`, gender `F|M|U` for first names and `-` for last
//! names. Duplicate rows are kept, so repeating a name weights it.
//!
//! Keyboard layout rows: `char\tneighbour,neighbour,...`, all lowercase.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_NAMES: &str = include_str!("../data/names.tsv");
const BUILTIN_LAYOUT: &str = include_str!("../data/danish_qwerty.tsv");

/// Identifier of the built-in Danish QWERTY layout.
pub const DANISH_QWERTY: &str = "danish_qwerty";

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("mode `{mode}` declares {present} but has no {missing}")]
    MissingPool { mode: String, present: &'static str, missing: &'static str },
    #[error("row {row}: `{ch}` lists itself as a neighbour")]
    SelfNeighbor { row: usize, ch: char },
    #[error("row {row}: `{ch}` has an empty neighbour list")]
    EmptyNeighbors { row: usize, ch: char },
}

fn read(path: &Path) -> Result<String, ResourceError> {
    std::fs::read_to_string(path).map_err(|source| ResourceError::Io { path: path.display().to_string(), source })
}

fn data_rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l))).filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
    U,
}

/// Name pools stored in a lexicon file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconMode {
    Danish,
    Muslim,
}

impl LexiconMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LexiconMode::Danish => "danish",
            LexiconMode::Muslim => "muslim",
        }
    }
}

/// Name substitution modes offered to the name augmenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameMode {
    Danish,
    Muslim,
    Female,
    Male,
}

impl NameMode {
    pub const ALL: [NameMode; 4] = [NameMode::Danish, NameMode::Muslim, NameMode::Female, NameMode::Male];

    pub fn as_str(&self) -> &'static str {
        match self {
            NameMode::Danish => "danish",
            NameMode::Muslim => "muslim",
            NameMode::Female => "female",
            NameMode::Male => "male",
        }
    }
}

impl fmt::Display for NameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NameLexicon {
    pub first_names: BTreeMap<LexiconMode, Vec<(String, Gender)>>,
    pub last_names: BTreeMap<LexiconMode, Vec<String>>,
}

impl NameLexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ResourceError> {
        Self::from_tsv(&read(path.as_ref())?)
    }

    /// The small illustrative lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_tsv(BUILTIN_NAMES).expect("built-in name lexicon is valid")
    }

    pub fn from_tsv(text: &str) -> Result<Self, ResourceError> {
        let mut lex = NameLexicon::default();
        for (row, line) in data_rows(text) {
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |message: String| ResourceError::Malformed { row, message };
            if cols.len() != 4 {
                return Err(bad(format!("expected 4 tab-separated columns, found {}", cols.len())));
            }
            let mode = match cols[1] {
                "danish" => LexiconMode::Danish,
                "muslim" => LexiconMode::Muslim,
                other => return Err(bad(format!("unknown mode `{other}`"))),
            };
            let name = cols[2];
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(bad(format!("name `{name}` must be a non-empty token without whitespace")));
            }
            match cols[0] {
                "first" => {
                    let gender = match cols[3] {
                        "F" => Gender::F,
                        "M" => Gender::M,
                        "U" => Gender::U,
                        other => return Err(bad(format!("first names need gender F, M or U, found `{other}`"))),
                    };
                    lex.first_names.entry(mode).or_default().push((name.to_string(), gender));
                }
                "last" => {
                    if !matches!(cols[3], "-" | "F" | "M" | "U") {
                        return Err(bad(format!("invalid gender column `{}`", cols[3])));
                    }
                    lex.last_names.entry(mode).or_default().push(name.to_string());
                }
                other => return Err(bad(format!("unknown kind `{other}`"))),
            }
        }
        for mode in [LexiconMode::Danish, LexiconMode::Muslim] {
            let firsts = lex.first_names.contains_key(&mode);
            let lasts = lex.last_names.contains_key(&mode);
            if firsts && !lasts {
                return Err(ResourceError::MissingPool { mode: mode.as_str().into(), present: "first names", missing: "last names" });
            }
            if lasts && !firsts {
                return Err(ResourceError::MissingPool { mode: mode.as_str().into(), present: "last names", missing: "first names" });
            }
        }
        if lex.first_names.is_empty() {
            return Err(ResourceError::MissingPool { mode: "any".into(), present: "no rows", missing: "name pools" });
        }
        Ok(lex)
    }

    /// First-name pool for a substitution mode. Female and male draw from the
    /// Danish names of that gender; names of unknown gender only enter the
    /// Danish pool.
    pub fn first_pool(&self, mode: NameMode) -> Vec<&str> {
        let pick = |lm: LexiconMode, keep: &dyn Fn(Gender) -> bool| -> Vec<&str> {
            self.first_names.get(&lm).map(|v| v.iter().filter(|(_, g)| keep(*g)).map(|(n, _)| n.as_str()).collect()).unwrap_or_default()
        };
        match mode {
            NameMode::Danish => pick(LexiconMode::Danish, &|_| true),
            NameMode::Muslim => pick(LexiconMode::Muslim, &|_| true),
            NameMode::Female => pick(LexiconMode::Danish, &|g| g == Gender::F),
            NameMode::Male => pick(LexiconMode::Danish, &|g| g == Gender::M),
        }
    }

    pub fn last_pool(&self, mode: NameMode) -> Vec<&str> {
        let lm = match mode {
            NameMode::Muslim => LexiconMode::Muslim,
            _ => LexiconMode::Danish,
        };
        self.last_names.get(&lm).map(|v| v.iter().map(String::as_str).collect()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyboardLayout {
    pub layout_id: String,
    pub neighbors: BTreeMap<char, Vec<char>>,
}

impl KeyboardLayout {
    /// Loads a layout; its id is the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ResourceError> {
        let path = path.as_ref();
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "layout".into());
        Self::from_tsv(id, &read(path)?)
    }

    /// Danish QWERTY letter adjacency (a-z, æ, ø, å).
    pub fn danish_qwerty() -> Self {
        Self::from_tsv(DANISH_QWERTY, BUILTIN_LAYOUT).expect("built-in layout is valid")
    }

    pub fn from_tsv(layout_id: impl Into<String>, text: &str) -> Result<Self, ResourceError> {
        let mut neighbors = BTreeMap::new();
        for (row, line) in data_rows(text) {
            let bad = |message: String| ResourceError::Malformed { row, message };
            let (key, list) = line.split_once('\t').ok_or_else(|| bad("expected `char<TAB>neighbours`".into()))?;
            let ch = single_lowercase_char(key).ok_or_else(|| bad(format!("`{key}` is not a single lowercase character")))?;
            let mut nbs = Vec::new();
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let n = single_lowercase_char(item).ok_or_else(|| bad(format!("neighbour `{item}` is not a single lowercase character")))?;
                if n == ch {
                    return Err(ResourceError::SelfNeighbor { row, ch });
                }
                nbs.push(n);
            }
            if nbs.is_empty() {
                return Err(ResourceError::EmptyNeighbors { row, ch });
            }
            if neighbors.insert(ch, nbs).is_some() {
                return Err(bad(format!("`{ch}` is listed twice")));
            }
        }
        Ok(KeyboardLayout { layout_id: layout_id.into(), neighbors })
    }

    /// Neighbours of a lowercase character, or `None` if the layout does not cover it.
    pub fn neighbors(&self, ch: char) -> Option<&[char]> {
        self.neighbors.get(&ch).map(Vec::as_slice)
    }

    pub fn covers(&self, ch: char) -> bool {
        self.neighbors.contains_key(&ch)
    }
}

fn single_lowercase_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    let c = it.next()?;
    if it.next().is_some() || c.is_uppercase() || c.is_whitespace() {
        return None;
    }
    Some(c)
}
