//! UPGMA agglomerative clustering and Newick serialization.
//!
//! The naive O(P^3) algorithm is plenty here (P is at most a few dozen
//! populations): repeatedly merge the closest pair of clusters at half their
//! distance, updating inter-cluster distances as the size-weighted arithmetic
//! mean of the members' distances.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::biodistance::DistanceMatrix;
use crate::error::{Error, Result};

/// One agglomeration step. Node ids follow the usual convention: ids below
/// the leaf count are leaves (indexing the label list), id `P + k` is the
/// cluster created by the k-th merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// A rooted ultrametric merge tree over labelled leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    fn height_of(&self, node: usize) -> f64 {
        if node < self.labels.len() {
            0.0
        } else {
            self.merges[node - self.labels.len()].height
        }
    }

    /// Newick serialization with branch lengths (parent height minus child
    /// height); leaves carry their labels verbatim.
    pub fn to_newick(&self) -> String {
        let root = self.labels.len() + self.merges.len() - 1;
        format!("{};", self.newick_node(root))
    }

    fn newick_node(&self, node: usize) -> String {
        if node < self.labels.len() {
            return self.labels[node].clone();
        }
        let merge = &self.merges[node - self.labels.len()];
        format!(
            "({}:{},{}:{})",
            self.newick_node(merge.left),
            merge.height - self.height_of(merge.left),
            self.newick_node(merge.right),
            merge.height - self.height_of(merge.right),
        )
    }

    /// Plain-text indented rendering for quick inspection.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let root = self.labels.len() + self.merges.len() - 1;
        self.text_node(root, 0, &mut out);
        out
    }

    fn text_node(&self, node: usize, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        if node < self.labels.len() {
            writeln!(out, "{indent}- {}", self.labels[node]).expect("infallible write");
        } else {
            let merge = &self.merges[node - self.labels.len()];
            writeln!(out, "{indent}+ height {}", merge.height).expect("infallible write");
            self.text_node(merge.left, depth + 1, out);
            self.text_node(merge.right, depth + 1, out);
        }
    }

    // Leaf-label set under every merge node; the partition structure that
    // defines the topology.
    fn cluster_sets(&self) -> BTreeSet<BTreeSet<&str>> {
        let mut under: Vec<BTreeSet<&str>> = self
            .labels
            .iter()
            .map(|l| BTreeSet::from([l.as_str()]))
            .collect();
        let mut sets = BTreeSet::new();
        for merge in &self.merges {
            let mut combined = under[merge.left].clone();
            combined.extend(under[merge.right].iter().copied());
            sets.insert(combined.clone());
            under.push(combined);
        }
        sets
    }
}

/// UPGMA clustering of a symmetric distance matrix with zero diagonal and
/// non-negative entries. Ties on the minimum distance break toward the
/// lexicographically smallest index pair in the current cluster ordering
/// (merged clusters take the slot of their left member).
pub fn upgma(matrix: &DistanceMatrix) -> Result<Dendrogram> {
    let p = matrix.len();
    if p < 2 {
        return Err(Error::Domain(format!(
            "clustering needs at least 2 populations, got {p}"
        )));
    }
    for (i, j, v) in matrix.upper_triangle() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!(
                "distance for ('{}', '{}') is {v}; clustering needs finite non-negative input",
                matrix.labels()[i],
                matrix.labels()[j]
            )));
        }
    }

    // working copy of the distances between active clusters
    let mut dist: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| matrix.value(i, j)).collect())
        .collect();
    // (node id, cluster size) per active slot
    let mut active: Vec<(usize, usize)> = (0..p).map(|i| (i, 1)).collect();
    let mut merges = Vec::with_capacity(p - 1);

    for step in 0..p - 1 {
        let mut best = (0usize, 1usize);
        let mut best_d = f64::INFINITY;
        #[allow(clippy::needless_range_loop)] // scanning ordered (i, j) pairs
        for i in 0..active.len() {
            for j in (i + 1)..active.len() {
                if dist[i][j] < best_d {
                    best_d = dist[i][j];
                    best = (i, j);
                }
            }
        }
        let (i, j) = best;
        let (left_id, left_size) = active[i];
        let (right_id, right_size) = active[j];
        let size = left_size + right_size;
        merges.push(Merge {
            left: left_id,
            right: right_id,
            height: best_d / 2.0,
            size,
        });

        // size-weighted average linkage against every other active cluster
        let updated: Vec<f64> = (0..active.len())
            .map(|x| (left_size as f64 * dist[i][x] + right_size as f64 * dist[j][x]) / size as f64)
            .collect();
        for (x, &d) in updated.iter().enumerate() {
            dist[i][x] = d;
            dist[x][i] = d;
        }
        dist[i][i] = 0.0;
        active[i] = (p + step, size);

        dist.remove(j);
        for row in &mut dist {
            row.remove(j);
        }
        active.remove(j);
    }

    Ok(Dendrogram {
        labels: matrix.labels().to_vec(),
        merges,
    })
}

/// True when two dendrograms over the same leaves induce the same cluster
/// partitions, heights ignored.
pub fn topology_equal(a: &Dendrogram, b: &Dendrogram) -> Result<bool> {
    let leaves_a: BTreeSet<&str> = a.labels.iter().map(String::as_str).collect();
    let leaves_b: BTreeSet<&str> = b.labels.iter().map(String::as_str).collect();
    if leaves_a != leaves_b {
        return Err(Error::Mismatch(
            "dendrograms cover different leaf sets".into(),
        ));
    }
    Ok(a.cluster_sets() == b.cluster_sets())
}
