//! Run configuration: command-line flags merged over an optional TOML file.
//!
//! ```toml
//! out = "results"
//! pairs = "data/2sr.csv"
//! strategy = ["sum", "con", "con_pca"]
//! seed = 7
//!
//! [[embeddings]]
//! name = "fasttext"
//! path = "models/fasttext.txt"
//!
//! [[gold]]
//! name = "HJ"
//! path = "gold/hj.csv"
//! kind = "graded"
//! ```
//!
//! Relative paths in the file are resolved against the file's directory.
//! Seed precedence: `--seed`, then the file's `seed`, then `EMBREL_SEED`, then
//! [`embrel_core::DEFAULT_SEED`].

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use embrel_core::compose::CompositionStrategy;
use embrel_core::simeval::JudgmentKind;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const SEED_ENV: &str = "EMBREL_SEED";
pub const DEFAULT_FRACTIONS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const DEFAULT_OUT: &str = "embrel-out";

/// `name=path`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedPath {
    pub name: String,
    pub path: PathBuf,
}

impl FromStr for NamedPath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, path) = s.split_once('=').ok_or_else(|| format!("expected NAME=PATH, got {s:?}"))?;
        if name.is_empty() || path.is_empty() {
            return Err(format!("expected NAME=PATH, got {s:?}"));
        }
        Ok(NamedPath { name: name.to_string(), path: PathBuf::from(path) })
    }
}

/// `name=path:kind`; the kind is split off at the last colon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSource {
    pub name: String,
    pub path: PathBuf,
    pub kind: JudgmentKind,
}

impl FromStr for GoldSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, rest) = s.split_once('=').ok_or_else(|| format!("expected NAME=PATH:KIND, got {s:?}"))?;
        let (path, kind) = rest.rsplit_once(':').ok_or_else(|| format!("expected NAME=PATH:KIND, got {s:?}"))?;
        if name.is_empty() || path.is_empty() {
            return Err(format!("expected NAME=PATH:KIND, got {s:?}"));
        }
        Ok(GoldSource { name: name.to_string(), path: PathBuf::from(path), kind: kind.parse()? })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    embeddings: Vec<FileEmbedding>,
    #[serde(default)]
    gold: Vec<FileGold>,
    pairs: Option<PathBuf>,
    strategy: Option<Vec<String>>,
    k: Option<usize>,
    folds: Option<usize>,
    seed: Option<u64>,
    fractions: Option<Vec<f64>>,
    out: Option<PathBuf>,
    lemmas: Option<PathBuf>,
    #[serde(default)]
    keep_going: bool,
    #[serde(default)]
    swap_concat_order: bool,
    #[serde(default)]
    pca_per_fold: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEmbedding {
    name: String,
    path: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGold {
    name: String,
    path: PathBuf,
    kind: String,
}

/// Flag values before merging; `None` / empty means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub embeddings: Vec<NamedPath>,
    pub gold: Vec<GoldSource>,
    pub pairs: Option<PathBuf>,
    pub strategy: Vec<CompositionStrategy>,
    pub k: Option<usize>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub fractions: Vec<f64>,
    pub out: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub keep_going: bool,
    pub swap_concat_order: bool,
    pub pca_per_fold: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub embeddings: Vec<NamedPath>,
    pub gold: Vec<GoldSource>,
    pub pairs: Option<PathBuf>,
    pub strategies: Vec<CompositionStrategy>,
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    pub fractions: Vec<f64>,
    pub out: PathBuf,
    pub lemmas: Option<PathBuf>,
    pub keep_going: bool,
    pub swap_concat_order: bool,
    pub pca_per_fold: bool,
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Merges flags over the config file. `env_seed` is the raw `EMBREL_SEED` value, if set.
    pub fn resolve(flags: Overrides, env_seed: Option<&str>) -> Result<Self> {
        let (file, base) = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let file: FileConfig =
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };

        let embeddings = if flags.embeddings.is_empty() {
            file.embeddings.into_iter().map(|e| NamedPath { name: e.name, path: resolve(&base, e.path) }).collect()
        } else {
            flags.embeddings
        };
        let gold = if flags.gold.is_empty() {
            file.gold
                .into_iter()
                .map(|g| {
                    Ok(GoldSource { kind: g.kind.parse().map_err(Error::Config)?, name: g.name, path: resolve(&base, g.path) })
                })
                .collect::<Result<_>>()?
        } else {
            flags.gold
        };
        let strategies = if !flags.strategy.is_empty() {
            flags.strategy
        } else if let Some(list) = file.strategy {
            list.iter().map(|s| s.parse().map_err(Error::Config)).collect::<Result<_>>()?
        } else {
            CompositionStrategy::ALL.to_vec()
        };
        let env_seed = env_seed
            .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not an integer"))))
            .transpose()?;
        let seed = flags.seed.or(file.seed).or(env_seed).unwrap_or(embrel_core::DEFAULT_SEED);
        let fractions = if !flags.fractions.is_empty() {
            flags.fractions
        } else {
            file.fractions.unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec())
        };

        let config = RunConfig {
            embeddings,
            gold,
            pairs: flags.pairs.or_else(|| file.pairs.map(|p| resolve(&base, p))),
            strategies,
            k: flags.k.or(file.k).unwrap_or(3),
            folds: flags.folds.or(file.folds).unwrap_or(10),
            seed,
            fractions,
            out: flags.out.or_else(|| file.out.map(|p| resolve(&base, p))).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            lemmas: flags.lemmas.or_else(|| file.lemmas.map(|p| resolve(&base, p))),
            keep_going: flags.keep_going || file.keep_going,
            swap_concat_order: flags.swap_concat_order || file.swap_concat_order,
            pca_per_fold: flags.pca_per_fold || file.pca_per_fold,
        };
        config.check_values()?;
        Ok(config)
    }

    fn check_values(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("--k must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("--folds must be at least 2".into()));
        }
        embrel_core::classify::check_fractions(&self.fractions).map_err(|e| Error::Config(e.to_string()))?;
        let mut names: Vec<&str> = self.embeddings.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("embedding names must be unique".into()));
        }
        Ok(())
    }

    /// Checks that the inputs a command needs are configured and exist.
    pub fn require(&self, embeddings: bool, gold: bool, pairs: bool) -> Result<()> {
        if embeddings && self.embeddings.is_empty() {
            return Err(Error::Config("at least one --embeddings NAME=PATH is required".into()));
        }
        if gold && self.gold.is_empty() {
            return Err(Error::Config("at least one --gold NAME=PATH:KIND is required".into()));
        }
        if pairs && self.pairs.is_none() {
            return Err(Error::Config("--pairs PATH is required".into()));
        }
        let mut paths: Vec<&Path> = Vec::new();
        if embeddings {
            paths.extend(self.embeddings.iter().map(|e| e.path.as_path()));
        }
        if gold {
            paths.extend(self.gold.iter().map(|g| g.path.as_path()));
        }
        if pairs {
            paths.extend(self.pairs.as_deref());
            paths.extend(self.lemmas.as_deref());
        }
        for p in paths {
            if !p.is_file() {
                return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "file not found")));
            }
        }
        Ok(())
    }
}
