use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::forest::ForestHyperParams;
use crate::ingest::HeaderMode;
use crate::preprocess::{SplitMode, SplitSpec};
use crate::pv::{BundledSystem, PvSystemSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// A CSV file or a directory of yearly CSV files.
    pub path: PathBuf,
    #[serde(default)]
    pub header_mode: HeaderMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub validation_year: i32,
    pub train_fraction: f64,
    pub wet_months: Vec<u32>,
    /// Defaults to the months not listed as wet.
    pub dry_months: Option<Vec<u32>>,
    pub mode: SplitMode,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            validation_year: 2022,
            train_fraction: 0.8,
            wet_months: (5..=10).collect(),
            dry_months: None,
            mode: SplitMode::Random,
        }
    }
}

/// A bundled system name (`trina`, `canadian`) or a path to a system TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemRef(pub String);

impl SystemRef {
    /// Short name used in artifact file names.
    pub fn label(&self) -> String {
        let s = &self.0;
        match s.parse::<BundledSystem>() {
            Ok(b) => b.name().to_string(),
            Err(_) => Path::new(s)
                .file_stem()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| s.clone()),
        }
    }

    pub fn resolve(&self, base: &Path) -> Result<PvSystemSpec> {
        let s = &self.0;
        match s.parse::<BundledSystem>() {
            Ok(b) => b.spec(),
            Err(_) => PvSystemSpec::load(&base.join(s)),
        }
    }
}

fn default_systems() -> Vec<SystemRef> {
    BundledSystem::ALL
        .iter()
        .map(|b| SystemRef(b.name().to_string()))
        .collect()
}

fn default_output() -> PathBuf {
    PathBuf::from("output")
}

/// Everything a batch run needs. `seed` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub data: DataConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub forest: ForestHyperParams,
    #[serde(default = "default_systems")]
    pub systems: Vec<SystemRef>,
    /// Directory relative paths are resolved against (the config file's).
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    /// Minimal configuration with defaults for everything but data and seed.
    pub fn new(data: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, seed: u64) -> Self {
        RunConfig {
            seed,
            output_dir: output_dir.into(),
            data: DataConfig {
                path: data.into(),
                header_mode: HeaderMode::Auto,
            },
            split: SplitConfig::default(),
            forest: ForestHyperParams::default(),
            systems: default_systems(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn data_path(&self) -> PathBuf {
        self.resolve_path(&self.data.path)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve_path(&self.output_dir)
    }

    /// Split specification with the run seed as shuffle seed.
    pub fn split_spec(&self) -> Result<SplitSpec> {
        let wet = self.split.wet_months.iter().copied().collect();
        let mut spec = SplitSpec::with_wet_months(wet, self.seed);
        if let Some(dry) = &self.split.dry_months {
            spec.dry_months = dry.iter().copied().collect();
        }
        spec.validation_year = self.split.validation_year;
        spec.train_fraction = self.split.train_fraction;
        spec.mode = self.split.mode;
        spec.validate()?;
        Ok(spec)
    }

    /// Forest parameters with the run seed.
    pub fn forest_params(&self) -> ForestHyperParams {
        ForestHyperParams {
            seed: self.seed,
            ..self.forest.clone()
        }
    }

    pub fn resolve_systems(&self) -> Result<Vec<(String, PvSystemSpec)>> {
        self.systems
            .iter()
            .map(|s| Ok((s.label(), s.resolve(&self.base_dir)?)))
            .collect()
    }

    /// Checks that the referenced paths exist and parameters are valid.
    pub fn validate(&self) -> Result<()> {
        let data = self.data_path();
        if !data.exists() {
            return Err(Error::Config(format!("data path {} does not exist", data.display())));
        }
        let invalid = |e: Error| Error::Config(e.to_string());
        self.split_spec().map_err(invalid)?;
        self.forest_params().validate().map_err(invalid)?;
        if self.systems.is_empty() {
            return Err(Error::Config("at least one PV system is required".into()));
        }
        let mut labels: Vec<String> = self.systems.iter().map(SystemRef::label).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != self.systems.len() {
            return Err(Error::Config("PV system names must be unique".into()));
        }
        self.resolve_systems()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_mandatory() {
        let err = RunConfig::from_toml_str("[data]\npath = \"x.csv\"\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn defaults_and_overrides() {
        let text = "seed = 7\n[data]\npath = \"d\"\n[split]\nwet_months = [6, 7, 8]\n[forest]\nn_trees = 12\nmax_features = \"sqrt\"\n";
        let cfg = RunConfig::from_toml_str(text, Path::new("/tmp/base")).unwrap();
        assert_eq!(cfg.data_path(), PathBuf::from("/tmp/base/d"));
        let spec = cfg.split_spec().unwrap();
        assert_eq!(spec.shuffle_seed, 7);
        assert_eq!(spec.dry_months.len(), 9);
        let fp = cfg.forest_params();
        assert_eq!((fp.n_trees, fp.seed), (12, 7));
        assert_eq!(cfg.systems.len(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("seed = 1\nsed = 2\n[data]\npath = \"d\"\n", Path::new(".")).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::new("d", "o", 1);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.forest.n_trees = 5;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn toml_round_trip() {
        let a = RunConfig::new("d", "o", 3);
        let b = RunConfig::from_toml_str(&a.to_toml_string().unwrap(), Path::new(".")).unwrap();
        assert_eq!(a, b);
    }
}
