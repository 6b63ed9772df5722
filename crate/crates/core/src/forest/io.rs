//! Little-endian binary model files.
//!
//! Layout: magic `SCRF`, format version (u32), header length (u64), JSON
//! header with everything but the trees, tree count (u32), then per tree a
//! node count (u32) followed by the nodes. A split node is tag 0, feature
//! (u32), threshold (f64), left (u32), right (u32); a leaf is tag 1, value (f64).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::tree::{Node, RegressionTree};
use super::{ForestHyperParams, ForestModel};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"SCRF";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    target: String,
    feature_names: Vec<String>,
    params: ForestHyperParams,
    importances: Vec<f64>,
    importances_normalized: bool,
    n_train: usize,
    target_range: (f64, f64),
}

fn io_err(e: std::io::Error) -> Error {
    Error::ModelFormat(format!("forest stream: {e}"))
}

pub fn write_forest(model: &ForestModel, mut w: impl Write) -> Result<()> {
    let header = Header {
        target: model.target.clone(),
        feature_names: model.feature_names.clone(),
        params: model.params.clone(),
        importances: model.importances.clone(),
        importances_normalized: model.importances_normalized,
        n_train: model.n_train,
        target_range: model.target_range,
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let mut buf = Vec::with_capacity(64 + json.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    buf.extend_from_slice(&(model.trees.len() as u32).to_le_bytes());
    for tree in &model.trees {
        buf.extend_from_slice(&(tree.nodes().len() as u32).to_le_bytes());
        for node in tree.nodes() {
            match *node {
                Node::Split { feature, threshold, left, right } => {
                    buf.push(0);
                    buf.extend_from_slice(&feature.to_le_bytes());
                    buf.extend_from_slice(&threshold.to_le_bytes());
                    buf.extend_from_slice(&left.to_le_bytes());
                    buf.extend_from_slice(&right.to_le_bytes());
                }
                Node::Leaf { value } => {
                    buf.push(1);
                    buf.extend_from_slice(&value.to_le_bytes());
                }
            }
        }
    }
    w.write_all(&buf).map_err(io_err)
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(io_err)?;
        Ok(b)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_forest(r: impl Read) -> Result<ForestModel> {
    let mut c = Cursor { inner: r };
    if &c.bytes::<4>()? != MAGIC {
        return Err(Error::ModelFormat("not a forest model file (bad magic)".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported forest format version {version} (expected {VERSION})"
        )));
    }
    let len = c.u64()?;
    if len > 1 << 30 {
        return Err(Error::ModelFormat(format!("implausible header length {len}")));
    }
    let mut json = vec![0u8; len as usize];
    c.inner.read_exact(&mut json).map_err(io_err)?;
    let header: Header =
        serde_json::from_slice(&json).map_err(|e| Error::ModelFormat(format!("forest header: {e}")))?;
    let n_features = header.feature_names.len() as u32;

    let n_trees = c.u32()?;
    let mut trees = Vec::with_capacity(n_trees.min(1 << 16) as usize);
    for t in 0..n_trees {
        let n_nodes = c.u32()?;
        let mut nodes = Vec::with_capacity(n_nodes.min(1 << 24) as usize);
        for _ in 0..n_nodes {
            let node = match c.u8()? {
                0 => Node::Split {
                    feature: c.u32()?,
                    threshold: c.f64()?,
                    left: c.u32()?,
                    right: c.u32()?,
                },
                1 => Node::Leaf { value: c.f64()? },
                tag => return Err(Error::ModelFormat(format!("tree {t}: unknown node tag {tag}"))),
            };
            if let Node::Split { feature, .. } = node {
                if feature >= n_features {
                    return Err(Error::ModelFormat(format!("tree {t}: feature index {feature} out of range")));
                }
            }
            nodes.push(node);
        }
        let tree = RegressionTree::from_nodes(nodes)
            .ok_or_else(|| Error::ModelFormat(format!("tree {t}: malformed node array")))?;
        trees.push(tree);
    }
    if trees.is_empty() {
        return Err(Error::ModelFormat("forest has no trees".into()));
    }
    Ok(ForestModel {
        target: header.target,
        feature_names: header.feature_names,
        params: header.params,
        trees,
        importances: header.importances,
        importances_normalized: header.importances_normalized,
        n_train: header.n_train,
        target_range: header.target_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::FeatureMatrix;

    fn model() -> ForestModel {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![f64::from(i), f64::from(i % 7) * 0.1]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0].sqrt() + r[1]).collect();
        let x = FeatureMatrix::from_rows(vec!["a".into(), "b".into()], &rows).unwrap();
        ForestModel::fit(&x, &y, "ghi", &ForestHyperParams { n_trees: 4, seed: 5, ..Default::default() }).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let mut buf = Vec::new();
        write_forest(&m, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"SCRF");
        assert_eq!(read_forest(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut buf = Vec::new();
        write_forest(&model(), &mut buf).unwrap();
        assert!(matches!(read_forest(&b"XXXX"[..]), Err(Error::ModelFormat(_))));
        assert!(matches!(read_forest(&buf[..buf.len() - 3]), Err(Error::ModelFormat(_))));
        let mut wrong_version = buf.clone();
        wrong_version[4] = 9;
        assert!(matches!(read_forest(wrong_version.as_slice()), Err(Error::ModelFormat(_))));
    }
}
