//! Multivariate-response CART regression trees and random forests, exposed
//! as binning rules whose leaf memberships define scenario weights.

use crate::error::Error;
use crate::linalg::Mat;
use crate::rng;
use crate::weights::WeightVector;
use crate::Result;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fitting controls shared by trees and forests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Maximum tree depth; `None` grows until other criteria stop it.
    pub max_depth: Option<usize>,
    /// Minimum observations in each child of a split.
    pub min_leaf: usize,
    /// Features considered per split; `None` uses all.
    pub mtry: Option<usize>,
    /// Draw an N-with-replacement bootstrap sample before fitting.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: None, min_leaf: 5, mtry: None, bootstrap: false, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf {
        leaf_id: usize,
        /// Training indices residing in the leaf, with bootstrap multiplicity.
        members: Vec<usize>,
        mean: Vec<f64>,
    },
}

/// A fitted axis-aligned regression tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    n_leaves: usize,
    n_train: usize,
    d_x: usize,
    d_y: usize,
    pub config: TreeConfig,
}

/// An ensemble of bootstrapped trees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<RegressionTree>,
    n_train: usize,
    d_y: usize,
}

struct Builder<'a> {
    x: &'a Mat,
    y: &'a Mat,
    config: &'a TreeConfig,
    rng: rand_chacha::ChaCha12Rng,
    nodes: Vec<Node>,
    n_leaves: usize,
}

impl<'a> Builder<'a> {
    /// Best (feature, threshold, sse_l + sse_r) over candidate features.
    fn best_split(&mut self, members: &[usize]) -> Option<(usize, f64, f64)> {
        let d_x = self.x.cols();
        let d_y = self.y.cols();
        let n = members.len();
        let features: Vec<usize> = match self.config.mtry {
            Some(m) if m < d_x => {
                // Sample-without-replacement subset, then ascending order for
                // a deterministic tie-break.
                let mut pool: Vec<usize> = (0..d_x).collect();
                for i in 0..m {
                    let j = self.rng.gen_range(i..d_x);
                    pool.swap(i, j);
                }
                let mut sub = pool[..m].to_vec();
                sub.sort_unstable();
                sub
            }
            _ => (0..d_x).collect(),
        };

        let total: Vec<f64> = (0..d_y)
            .map(|c| members.iter().map(|&i| self.y[(i, c)]).sum())
            .collect();
        let ssq: f64 = members
            .iter()
            .map(|&i| (0..d_y).map(|c| self.y[(i, c)] * self.y[(i, c)]).sum::<f64>())
            .sum();
        let parent_sse = ssq - total.iter().map(|t| t * t).sum::<f64>() / n as f64;

        let mut best: Option<(usize, f64, f64)> = None;
        let mut order: Vec<usize> = members.to_vec();
        let mut left_sum = vec![0.0; d_y];
        for &f in &features {
            order.sort_unstable_by(|&a, &b| {
                self.x[(a, f)].total_cmp(&self.x[(b, f)]).then(a.cmp(&b))
            });
            left_sum.iter_mut().for_each(|v| *v = 0.0);
            let mut left_ssq = 0.0;
            for pos in 0..n - 1 {
                let i = order[pos];
                for c in 0..d_y {
                    left_sum[c] += self.y[(i, c)];
                    left_ssq += self.y[(i, c)] * self.y[(i, c)];
                }
                let nl = pos + 1;
                let nr = n - nl;
                if nl < self.config.min_leaf || nr < self.config.min_leaf {
                    continue;
                }
                let xv = self.x[(i, f)];
                let xnext = self.x[(order[pos + 1], f)];
                if xnext <= xv {
                    continue; // not a distinct-value boundary
                }
                let mut sse = left_ssq - left_sum.iter().map(|s| s * s).sum::<f64>() / nl as f64;
                let mut right_sq = 0.0;
                for c in 0..d_y {
                    let rs = total[c] - left_sum[c];
                    right_sq += rs * rs;
                }
                sse += (ssq - left_ssq) - right_sq / nr as f64;
                if best.map_or(true, |(_, _, b)| sse < b - 1e-12 * (1.0 + parent_sse)) {
                    best = Some((f, 0.5 * (xv + xnext), sse));
                }
            }
        }
        // Require a strictly positive impurity decrease.
        best.filter(|&(_, _, sse)| parent_sse - sse > 1e-12 * (1.0 + parent_sse))
    }

    fn build(&mut self, members: Vec<usize>, depth: usize) -> usize {
        let can_split = members.len() >= 2 * self.config.min_leaf
            && self.config.max_depth.map_or(true, |d| depth < d);
        if can_split {
            if let Some((feature, threshold, _)) = self.best_split(&members) {
                let (mut l, mut r) = (Vec::new(), Vec::new());
                for &i in &members {
                    if self.x[(i, feature)] <= threshold {
                        l.push(i);
                    } else {
                        r.push(i);
                    }
                }
                let id = self.nodes.len();
                self.nodes.push(Node::Split { feature, threshold, left: 0, right: 0 });
                let left = self.build(l, depth + 1);
                let right = self.build(r, depth + 1);
                if let Node::Split { left: sl, right: sr, .. } = &mut self.nodes[id] {
                    *sl = left;
                    *sr = right;
                }
                return id;
            }
        }
        let d_y = self.y.cols();
        let mut mean = vec![0.0; d_y];
        for &i in &members {
            for c in 0..d_y {
                mean[c] += self.y[(i, c)];
            }
        }
        mean.iter_mut().for_each(|m| *m /= members.len() as f64);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { leaf_id: self.n_leaves, members, mean });
        self.n_leaves += 1;
        id
    }
}

/// Fits a regression tree minimizing the summed per-component variance.
pub fn fit_tree(x: &Mat, y: &Mat, config: &TreeConfig) -> Result<RegressionTree> {
    if x.rows() == 0 {
        return Err(Error::InvalidArgument("empty data".into()));
    }
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch("X and Y row counts differ".into()));
    }
    if x.rows() < 2 * config.min_leaf.max(1) && x.rows() < 1 {
        return Err(Error::InvalidArgument("too few observations".into()));
    }
    let n = x.rows();
    let mut rng = rng::rng_from_seed(config.seed);
    let members: Vec<usize> = if config.bootstrap {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut b = Builder { x, y, config, rng, nodes: Vec::new(), n_leaves: 0 };
    b.build(members, 0);
    Ok(RegressionTree {
        nodes: b.nodes,
        n_leaves: b.n_leaves,
        n_train: n,
        d_x: x.cols(),
        d_y: y.cols(),
        config: config.clone(),
    })
}

impl RegressionTree {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn leaf_node(&self, x: &[f64]) -> &Node {
        assert_eq!(x.len(), self.d_x, "query dimension mismatch");
        let mut id = 0usize;
        loop {
            match &self.nodes[id] {
                Node::Split { feature, threshold, left, right } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
                leaf => return leaf,
            }
        }
    }

    /// The binning rule: maps `x` to the identity of its leaf.
    pub fn bin(&self, x: &[f64]) -> usize {
        match self.leaf_node(x) {
            Node::Leaf { leaf_id, .. } => *leaf_id,
            _ => unreachable!(),
        }
    }

    /// Uniform weights over the training occupants of the query's leaf.
    pub fn weights(&self, x: &[f64]) -> WeightVector {
        match self.leaf_node(x) {
            Node::Leaf { members, .. } => {
                let w = 1.0 / members.len() as f64;
                let mut acc: Vec<(usize, f64)> = Vec::with_capacity(members.len());
                let mut sorted = members.clone();
                sorted.sort_unstable();
                for i in sorted {
                    match acc.last_mut() {
                        Some(last) if last.0 == i => last.1 += w,
                        _ => acc.push((i, w)),
                    }
                }
                WeightVector::new(acc, self.n_train).expect("leaf weights are valid")
            }
            _ => unreachable!(),
        }
    }

    /// Leaf mean response.
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        match self.leaf_node(x) {
            Node::Leaf { mean, .. } => mean.clone(),
            _ => unreachable!(),
        }
    }

    /// Debug dump of the node arrays; not a stability-guaranteed format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.nodes).expect("tree serializes")
    }
}

/// Fits a random forest: `t_count` trees, each on a bootstrap sample with
/// per-split feature subsets of size `mtry`.
pub fn fit_forest(x: &Mat, y: &Mat, config: &TreeConfig, t_count: usize) -> Result<Forest> {
    if t_count == 0 {
        return Err(Error::InvalidArgument("forest needs at least one tree".into()));
    }
    let trees: Vec<Result<RegressionTree>> = (0..t_count)
        .into_par_iter()
        .map(|t| {
            let mut cfg = config.clone();
            cfg.seed = rng::derive_seed(config.seed, &[rng::purpose::TREE, t as u64]);
            fit_tree(x, y, &cfg)
        })
        .collect();
    let trees = trees.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Forest { trees, n_train: x.rows(), d_y: y.cols() })
}

impl Forest {
    pub fn t_count(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Average of the per-tree leaf weights; each tree normalizes over its
    /// own bootstrap occupants.
    pub fn weights(&self, x: &[f64]) -> WeightVector {
        let mut dense = vec![0.0; self.n_train];
        let t = self.trees.len() as f64;
        for tree in &self.trees {
            if let Node::Leaf { members, .. } = tree.leaf_node(x) {
                let w = 1.0 / (members.len() as f64 * t);
                for &i in members {
                    dense[i] += w;
                }
            }
        }
        let entries: Vec<(usize, f64)> =
            dense.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, w)| (i, *w)).collect();
        WeightVector::new(entries, self.n_train).expect("forest weights are valid")
    }

    /// Average of the per-tree predictions.
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d_y];
        for tree in &self.trees {
            let p = tree.predict(x);
            for (o, v) in out.iter_mut().zip(&p) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|v| *v /= self.trees.len() as f64);
        out
    }
}
