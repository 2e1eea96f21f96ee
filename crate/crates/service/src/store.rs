//! Flat-file artifact storage: `<root>/<kind>/<id>` holding a JSON envelope.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ruleforge::apriori::MiningReport;
use ruleforge::dataset::parse_dataset;
use ruleforge::id3::DecisionTree;
use ruleforge::knowledge_base::parse_knb;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Dataset,
    Tree,
    Patterns,
    Kb,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::Dataset => "dataset",
            ArtifactKind::Tree => "tree",
            ArtifactKind::Patterns => "patterns",
            ArtifactKind::Kb => "kb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Dataset, Self::Tree, Self::Patterns, Self::Kb].into_iter().find(|k| k.as_str() == s)
    }

    /// Checks that `payload` is a well-formed artifact of this kind.
    fn check(self, payload: &Value) -> Result<(), String> {
        let text = || payload.as_str().ok_or_else(|| format!("{} payload must be a string", self.as_str()));
        match self {
            ArtifactKind::Dataset => parse_dataset(text()?).map(drop).map_err(|e| e.to_string()),
            ArtifactKind::Kb => parse_knb(text()?).map(drop).map_err(|e| e.to_string()),
            ArtifactKind::Tree => {
                serde_json::from_value::<DecisionTree>(payload.clone()).map(drop).map_err(|e| e.to_string())
            }
            ArtifactKind::Patterns => {
                serde_json::from_value::<MiningReport>(payload.clone()).map(drop).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredArtifact {
    pub kind: ArtifactKind,
    pub id: String,
    pub payload: Value,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no {0} artifact with id `{1}`")]
    NotFound(&'static str, String),
    #[error("invalid {0} payload: {1}")]
    Invalid(&'static str, String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone)]
pub struct ArtifactStore {
    root: PathBuf,
}

impl ArtifactStore {
    pub fn open(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Validates and writes a new artifact under a fresh id.
    pub fn put(&self, kind: ArtifactKind, payload: Value) -> Result<StoredArtifact, StoreError> {
        kind.check(&payload).map_err(|e| StoreError::Invalid(kind.as_str(), e))?;
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let artifact = StoredArtifact { kind, id: uuid::Uuid::new_v4().simple().to_string(), payload, created_at };

        let dir = self.root.join(kind.as_str());
        fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        serde_json::to_writer(&mut tmp, &artifact)?;
        tmp.write_all(b"\n")?;
        tmp.persist(dir.join(&artifact.id)).map_err(|e| e.error)?;
        Ok(artifact)
    }

    pub fn get(&self, kind: ArtifactKind, id: &str) -> Result<StoredArtifact, StoreError> {
        let valid_id = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric());
        let path = self.root.join(kind.as_str()).join(id);
        if !valid_id || !path.is_file() {
            return Err(StoreError::NotFound(kind.as_str(), id.to_string()));
        }
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn get_text(&self, kind: ArtifactKind, id: &str) -> Result<String, StoreError> {
        let artifact = self.get(kind, id)?;
        artifact
            .payload
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| StoreError::Invalid(kind.as_str(), "payload is not text".into()))
    }
}
