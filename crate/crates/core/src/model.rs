//! Model bundles: a plain `key=value` manifest grouping the artifacts a
//! trained tagger needs (lexicon, wordlist, rule files, unknown-word
//! defaults). Paths are resolved relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::context::ContextualRule;
use crate::corpus::{SymbolError, Tag};
use crate::initial::UnknownTagDefaults;
use crate::kbest::KBestRule;
use crate::lexicon::{Lexicon, LexiconFileError, Wordlist, WordlistFileError};
use crate::ruleio::{parse_rules, RuleParseError};
use crate::unknown::UnknownRule;

pub const MANIFEST_VERSION: &str = "1";

/// The parsed manifest: file paths as written, plus defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelBundle {
    pub lexicon: PathBuf,
    pub wordlist: PathBuf,
    pub unknown_rules: PathBuf,
    pub contextual_rules: PathBuf,
    pub kbest_rules: Option<PathBuf>,
    pub cap_tag: Tag,
    pub default_tag: Tag,
}

/// A bundle with every referenced file loaded and parsed.
#[derive(Debug, Clone)]
pub struct Model {
    pub lexicon: Lexicon,
    pub wordlist: Wordlist,
    pub unknown_rules: Vec<UnknownRule>,
    pub contextual_rules: Vec<ContextualRule>,
    pub kbest_rules: Option<Vec<KBestRule>>,
    pub defaults: UnknownTagDefaults,
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("manifest line {line}: expected `key=value`, got {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("manifest line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("manifest line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("manifest is missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("unsupported manifest version {0:?} (expected {MANIFEST_VERSION:?})")]
    BadVersion(String),
    #[error("manifest key {key:?}: {source}")]
    BadTag {
        key: &'static str,
        source: SymbolError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    LexiconFile {
        path: PathBuf,
        source: LexiconFileError,
    },
    #[error("{path}: {source}")]
    WordlistFile {
        path: PathBuf,
        source: WordlistFileError,
    },
    #[error("{path}: {source}")]
    RuleFile {
        path: PathBuf,
        source: RuleParseError,
    },
}

impl ModelBundle {
    pub fn parse(text: &str) -> Result<ModelBundle, BundleError> {
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        for (idx, raw_line) in text.split('\n').enumerate() {
            let line = raw_line.strip_suffix('\r').unwrap_or(raw_line).trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| BundleError::MalformedLine {
                line: lineno,
                text: line.to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "lexicon" | "wordlist" | "unknown_rules" | "contextual_rules" | "kbest_rules"
                | "cap_tag" | "default_tag" | "version" => {}
                _ => {
                    return Err(BundleError::UnknownKey {
                        line: lineno,
                        key: key.to_string(),
                    })
                }
            }
            if seen.insert(key.to_string(), value.to_string()).is_some() {
                return Err(BundleError::DuplicateKey {
                    line: lineno,
                    key: key.to_string(),
                });
            }
        }

        let version = seen.remove("version").ok_or(BundleError::MissingKey("version"))?;
        if version != MANIFEST_VERSION {
            return Err(BundleError::BadVersion(version));
        }
        let mut required = |key: &'static str| {
            seen.remove(key)
                .ok_or(BundleError::MissingKey(key))
        };
        let lexicon = PathBuf::from(required("lexicon")?);
        let wordlist = PathBuf::from(required("wordlist")?);
        let unknown_rules = PathBuf::from(required("unknown_rules")?);
        let contextual_rules = PathBuf::from(required("contextual_rules")?);
        let cap_tag = Tag::new(required("cap_tag")?)
            .map_err(|source| BundleError::BadTag { key: "cap_tag", source })?;
        let default_tag = Tag::new(required("default_tag")?)
            .map_err(|source| BundleError::BadTag { key: "default_tag", source })?;
        let kbest_rules = seen.remove("kbest_rules").map(PathBuf::from);
        Ok(ModelBundle {
            lexicon,
            wordlist,
            unknown_rules,
            contextual_rules,
            kbest_rules,
            cap_tag,
            default_tag,
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("version={MANIFEST_VERSION}\n"));
        out.push_str(&format!("lexicon={}\n", self.lexicon.display()));
        out.push_str(&format!("wordlist={}\n", self.wordlist.display()));
        out.push_str(&format!("unknown_rules={}\n", self.unknown_rules.display()));
        out.push_str(&format!("contextual_rules={}\n", self.contextual_rules.display()));
        if let Some(kbest) = &self.kbest_rules {
            out.push_str(&format!("kbest_rules={}\n", kbest.display()));
        }
        out.push_str(&format!("cap_tag={}\n", self.cap_tag));
        out.push_str(&format!("default_tag={}\n", self.default_tag));
        out
    }

    /// Read and parse every referenced file, resolving relative paths
    /// against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<Model, BundleError> {
        let read = |path: &Path| -> Result<String, BundleError> {
            let resolved = base_dir.join(path);
            fs::read_to_string(&resolved).map_err(|source| BundleError::Io {
                path: resolved.clone(),
                source,
            })
        };
        let lexicon = Lexicon::parse(&read(&self.lexicon)?).map_err(|source| {
            BundleError::LexiconFile {
                path: self.lexicon.clone(),
                source,
            }
        })?;
        let wordlist = Wordlist::parse(&read(&self.wordlist)?).map_err(|source| {
            BundleError::WordlistFile {
                path: self.wordlist.clone(),
                source,
            }
        })?;
        let unknown_rules: Vec<UnknownRule> = parse_rules(&read(&self.unknown_rules)?)
            .map_err(|source| BundleError::RuleFile {
                path: self.unknown_rules.clone(),
                source,
            })?;
        let contextual_rules: Vec<ContextualRule> = parse_rules(&read(&self.contextual_rules)?)
            .map_err(|source| BundleError::RuleFile {
                path: self.contextual_rules.clone(),
                source,
            })?;
        let kbest_rules: Option<Vec<KBestRule>> = match &self.kbest_rules {
            Some(path) => Some(parse_rules(&read(path)?).map_err(|source| {
                BundleError::RuleFile {
                    path: path.clone(),
                    source,
                }
            })?),
            None => None,
        };
        Ok(Model {
            lexicon,
            wordlist,
            unknown_rules,
            contextual_rules,
            kbest_rules,
            defaults: UnknownTagDefaults {
                capitalized_tag: self.cap_tag.clone(),
                default_tag: self.default_tag.clone(),
            },
        })
    }

    /// Parse a manifest file and load everything it references.
    pub fn load_from_file(manifest_path: &Path) -> Result<Model, BundleError> {
        let text = fs::read_to_string(manifest_path).map_err(|source| BundleError::Io {
            path: manifest_path.to_path_buf(),
            source,
        })?;
        let bundle = ModelBundle::parse(&text)?;
        let base_dir = manifest_path.parent().unwrap_or(Path::new("."));
        bundle.load(base_dir)
    }
}
