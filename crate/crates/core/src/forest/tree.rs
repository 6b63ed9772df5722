//! CART regression tree grown on presorted, weighted rows.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf { value: f64 },
}

/// Flattened regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn from_nodes(nodes: Vec<Node>) -> Option<Self> {
        let n = nodes.len() as u32;
        let ok = !nodes.is_empty()
            && nodes.iter().enumerate().all(|(i, node)| match *node {
                Node::Split { left, right, threshold, .. } => {
                    left > i as u32 && right > i as u32 && left < n && right < n && !threshold.is_nan()
                }
                Node::Leaf { value } => value.is_finite(),
            });
        ok.then_some(RegressionTree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_leaf_only(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0u32, 0usize)];
        while let Some((i, d)) = stack.pop() {
            max = max.max(d);
            if let Node::Split { left, right, .. } = self.nodes[i as usize] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        max
    }

    /// Index of the leaf reached by `row`.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature as usize] <= threshold { left } else { right } as usize;
                }
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }
}

/// Growth limits for one tree.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Candidate features per split (≤ number of features).
    pub max_features: usize,
}

/// Column-major training data with per-feature sort orders shared by all trees.
pub(crate) struct TrainingData<'a> {
    pub columns: Vec<Vec<f64>>,
    pub y: &'a [f64],
    pub sorted: Vec<Vec<u32>>,
}

impl<'a> TrainingData<'a> {
    pub fn new(columns: Vec<Vec<f64>>, y: &'a [f64]) -> Self {
        let sorted = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        TrainingData { columns, y, sorted }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }
}

/// A fitted tree plus its per-feature impurity decrease, normalised by the
/// root weight.
pub(crate) struct GrownTree {
    pub tree: RegressionTree,
    pub importance: Vec<f64>,
}

struct Best {
    feature: usize,
    threshold: f64,
    proxy: f64,
}

/// Grows one tree. `weights[i]` is the multiplicity of row `i` (0 = out of bag).
pub(crate) fn grow(
    data: &TrainingData<'_>,
    weights: &[u32],
    params: &GrowParams,
    rng: &mut impl Rng,
) -> GrownTree {
    let n_features = data.n_features();
    // Per-feature in-bag row lists, each kept sorted by its feature within
    // every node's [start, end) range.
    let mut order: Vec<Vec<u32>> = data
        .sorted
        .iter()
        .map(|idx| idx.iter().copied().filter(|&r| weights[r as usize] > 0).collect())
        .collect();
    let m = order[0].len();
    let mut goes_left = vec![false; data.y.len()];
    let mut scratch: Vec<u32> = Vec::with_capacity(m);
    let mut importance = vec![0.0; n_features];
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut root_weight = None;

    // (node index, start, end, depth)
    let mut stack = vec![(0usize, 0usize, m, 0usize)];
    while let Some((node, start, end, depth)) = stack.pop() {
        let rows = &order[0][start..end];
        let (mut w_total, mut s_total) = (0.0f64, 0.0f64);
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &r in rows {
            let w = f64::from(weights[r as usize]);
            let y = data.y[r as usize];
            w_total += w;
            s_total += w * y;
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        let w_root = *root_weight.get_or_insert(w_total);
        let value = s_total / w_total;

        let may_split = y_min != y_max
            && w_total >= params.min_samples_split as f64
            && params.max_depth.is_none_or(|d| depth < d);
        let best = if may_split {
            best_split(data, weights, &order, start, end, w_total, s_total, params, rng)
        } else {
            None
        };
        let Some(best) = best else {
            nodes[node] = Node::Leaf { value };
            continue;
        };

        importance[best.feature] += (best.proxy - s_total * s_total / w_total) / w_root;

        let col = &data.columns[best.feature];
        for &r in &order[0][start..end] {
            goes_left[r as usize] = col[r as usize] <= best.threshold;
        }
        let mut n_left = 0;
        for list in order.iter_mut() {
            n_left = stable_partition(&mut list[start..end], &goes_left, &mut scratch);
        }
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[node] = Node::Split {
            feature: best.feature as u32,
            threshold: best.threshold,
            left: left as u32,
            right: left as u32 + 1,
        };
        stack.push((left + 1, start + n_left, end, depth + 1));
        stack.push((left, start, start + n_left, depth + 1));
    }

    GrownTree {
        tree: RegressionTree { nodes },
        importance,
    }
}

fn stable_partition(slice: &mut [u32], goes_left: &[bool], scratch: &mut Vec<u32>) -> usize {
    scratch.clear();
    let mut w = 0;
    for i in 0..slice.len() {
        let r = slice[i];
        if goes_left[r as usize] {
            slice[w] = r;
            w += 1;
        } else {
            scratch.push(r);
        }
    }
    slice[w..].copy_from_slice(scratch);
    w
}

#[allow(clippy::too_many_arguments)]
fn best_split(
    data: &TrainingData<'_>,
    weights: &[u32],
    order: &[Vec<u32>],
    start: usize,
    end: usize,
    w_total: f64,
    s_total: f64,
    params: &GrowParams,
    rng: &mut impl Rng,
) -> Option<Best> {
    let n_features = data.n_features();
    let mut candidates: Vec<usize> = if params.max_features >= n_features {
        (0..n_features).collect()
    } else {
        sample(rng, n_features, params.max_features).into_vec()
    };
    candidates.sort_unstable();

    let min_leaf = params.min_samples_leaf as f64;
    let mut best: Option<Best> = None;
    for f in candidates {
        let col = &data.columns[f];
        let rows = &order[f][start..end];
        let (mut w_left, mut s_left) = (0.0f64, 0.0f64);
        for k in 0..rows.len() - 1 {
            let r = rows[k] as usize;
            let w = f64::from(weights[r]);
            w_left += w;
            s_left += w * data.y[r];
            let (a, b) = (col[r], col[rows[k + 1] as usize]);
            if a == b {
                continue;
            }
            let w_right = w_total - w_left;
            if w_left < min_leaf || w_right < min_leaf {
                continue;
            }
            let s_right = s_total - s_left;
            let proxy = s_left * s_left / w_left + s_right * s_right / w_right;
            if best.as_ref().is_none_or(|b| proxy > b.proxy) {
                let mid = a + (b - a) / 2.0;
                best = Some(Best {
                    feature: f,
                    threshold: if mid < b { mid } else { a },
                    proxy,
                });
            }
        }
    }
    best
}
