use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum QList {
    One(u64),
    Many(Vec<u64>),
}

impl QList {
    fn into_vec(self) -> Vec<u64> {
        match self {
            QList::One(q) => vec![q],
            QList::Many(v) => v,
        }
    }
}

/// Key-value config file; every key may be overridden on the command line.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gamma: Option<String>,
    pub psi: Option<String>,
    #[serde(rename = "Q", alias = "q")]
    pub q: Option<QList>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub delta_log: Option<String>,
    pub scale_bits: Option<u32>,
    pub output: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn q_list(&self) -> Option<Vec<u64>> {
        self.q.clone().map(QList::into_vec)
    }
}

/// Fully resolved experiment parameters, echoed into every output header.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub gamma: String,
    pub psi: String,
    #[serde(rename = "Q")]
    pub q: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub delta_log: String,
    pub scale_bits: u32,
    pub output: Option<String>,
}

impl ExperimentConfig {
    /// Hash of everything that affects results (not the output path).
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.output = None;
        let bytes = serde_json::to_vec(&keyed).expect("serializable");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// First present value among the flag and the file entry.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("missing required setting `{name}`")))
}
