//! Bagged CART regression forests.

mod io;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use io::{read_forest, write_forest};
pub use tree::{Node, RegressionTree};

use crate::preprocess::FeatureMatrix;
use crate::{Error, Result};
use tree::{grow, GrowParams, TrainingData};

/// Number of candidate features examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "String", into = "String")]
pub enum MaxFeatures {
    #[default]
    All,
    Sqrt,
    Fraction(f64),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Fraction(f) => (f * n_features as f64).floor() as usize,
        };
        k.clamp(1, n_features.max(1))
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl TryFrom<String> for MaxFeatures {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MaxFeatures> for String {
    fn from(m: MaxFeatures) -> String {
        m.to_string()
    }
}

impl FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            other => match other.parse::<f64>() {
                Ok(f) if f > 0.0 && f <= 1.0 => Ok(MaxFeatures::Fraction(f)),
                _ => Err(Error::Config(format!(
                    "max_features '{s}' must be all, sqrt or a fraction in (0, 1]"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestHyperParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestHyperParams {
    fn default() -> Self {
        ForestHyperParams {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestHyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be positive".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidParameter("max_depth must be positive".into()));
        }
        if self.min_samples_leaf == 0 || self.min_samples_split == 0 {
            return Err(Error::InvalidParameter(
                "min_samples_leaf and min_samples_split must be positive".into(),
            ));
        }
        if let MaxFeatures::Fraction(f) = self.max_features {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidParameter(format!("max_features fraction {f} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// A fitted forest for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub target: String,
    pub feature_names: Vec<String>,
    pub params: ForestHyperParams,
    pub trees: Vec<RegressionTree>,
    /// Normalised impurity-decrease importances, or all zeros when no tree split.
    pub importances: Vec<f64>,
    /// False when every tree is a single leaf and `importances` is all zero.
    pub importances_normalized: bool,
    pub n_train: usize,
    /// Smallest and largest training target.
    pub target_range: (f64, f64),
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

impl ForestModel {
    /// Fits `params.n_trees` trees, each on a bootstrap resample (when enabled)
    /// drawn from its own seeded random stream.
    pub fn fit(
        x: &FeatureMatrix,
        y: &[f64],
        target: impl Into<String>,
        params: &ForestHyperParams,
    ) -> Result<ForestModel> {
        params.validate()?;
        let n = x.n_rows();
        if n == 0 {
            return Err(Error::EmptyInput("forest training data".into()));
        }
        if n != y.len() {
            return Err(Error::LengthMismatch { left: n, right: y.len() });
        }
        if let Some(i) = x.values().iter().position(|v| !v.is_finite()) {
            let c = x.n_cols();
            return Err(Error::NonFinite(format!("feature '{}' in row {}", x.names()[i % c], i / c)));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("target in row {i}")));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("{n} rows exceed the supported maximum")));
        }

        let columns = (0..x.n_cols()).map(|j| x.column(j)).collect();
        let data = TrainingData::new(columns, y);
        let grow_params = GrowParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            min_samples_leaf: params.min_samples_leaf,
            max_features: params.max_features.resolve(x.n_cols()),
        };
        let grown: Vec<_> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(params.seed, t);
                let weights = if params.bootstrap {
                    let mut w = vec![0u32; n];
                    for _ in 0..n {
                        w[rng.random_range(0..n)] += 1;
                    }
                    w
                } else {
                    vec![1u32; n]
                };
                grow(&data, &weights, &grow_params, &mut rng)
            })
            .collect();

        let mut importances = vec![0.0; x.n_cols()];
        for g in &grown {
            for (acc, v) in importances.iter_mut().zip(&g.importance) {
                *acc += v;
            }
        }
        for v in importances.iter_mut() {
            *v /= params.n_trees as f64;
        }
        let total: f64 = importances.iter().sum();
        let importances_normalized = total > 0.0;
        if importances_normalized {
            for v in importances.iter_mut() {
                *v /= total;
            }
        } else {
            tracing::warn!("every tree is a single leaf; importances left at zero");
        }

        let target_range = y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Ok(ForestModel {
            target: target.into(),
            feature_names: x.names().to_vec(),
            params: params.clone(),
            trees: grown.into_iter().map(|g| g.tree).collect(),
            importances,
            importances_normalized,
            n_train: n,
            target_range,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Mean of the per-tree predictions for one row.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    /// Per-tree predictions for one row, in tree order.
    pub fn tree_predictions(&self, row: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict_row(row)).collect()
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features() {
            return Err(Error::Schema(format!(
                "model '{}' expects {} features, got {}",
                self.target,
                self.n_features(),
                x.n_cols()
            )));
        }
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }

    /// `(feature name, importance)` pairs, most important first.
    pub fn ranked_importances(&self) -> Vec<(String, f64)> {
        let mut ranked: Vec<(String, f64)> = self
            .feature_names
            .iter()
            .cloned()
            .zip(self.importances.iter().copied())
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        ranked
    }
}
