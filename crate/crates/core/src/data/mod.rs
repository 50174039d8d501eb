//! Datasets: container, directory layout, synthetic generators, k-NN graphs,
//! noise injection and random splits.
//!
//! On-disk layout of a dataset directory:
//!
//! ```text
//! meta.json      {"name": str, "n": int, "d": int, "c": int}
//! edges.tsv      one `u<TAB>v` pair per line, 0-based, u < v, sorted, unique
//! features.csv   n lines of d comma-separated decimal floats
//! labels.txt     n lines, one integer in [0, c)
//! splits.json    {"train": [ids], "val": [ids], "test": [ids]}
//! ```

mod io;
mod knn;
mod noise;
mod synth;

pub use io::{load_dataset, save_dataset};
pub use knn::{brute_force_knn, knn_graph, KdTree};
pub use noise::{add_noise, NoiseDomain, NoiseSpec};
pub use synth::{DEFAULT_NOISE_SD, erdos_renyi, random_connected_graph, two_circles, two_circles_dataset};

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::{Error, FeatureMatrix, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    pub fn get(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.val.len(), self.test.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub splits: Splits,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        features: FeatureMatrix,
        labels: Vec<usize>,
        num_classes: usize,
        splits: Splits,
    ) -> Result<Self> {
        let ds = Dataset {
            name: name.into(),
            graph,
            features,
            labels,
            num_classes,
            splits,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        if self.features.nrows() != n {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows for {n} vertices",
                self.features.nrows()
            )));
        }
        if self.labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {n} vertices",
                self.labels.len()
            )));
        }
        if let Some((i, &l)) = self
            .labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l >= self.num_classes)
        {
            return Err(Error::InvalidDataset(format!(
                "label {l} of vertex {i} is not below c = {}",
                self.num_classes
            )));
        }
        let mut seen = HashSet::new();
        for (name, ids) in [
            ("train", &self.splits.train),
            ("val", &self.splits.val),
            ("test", &self.splits.test),
        ] {
            for &i in ids {
                if i >= n {
                    return Err(Error::InvalidDataset(format!(
                        "{name} split index {i} out of range"
                    )));
                }
                if !seen.insert(i) {
                    return Err(Error::InvalidDataset(format!(
                        "vertex {i} appears twice across splits"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same graph, labels and splits with different features.
    pub fn with_features(&self, features: FeatureMatrix) -> Result<Self> {
        Dataset::new(
            self.name.clone(),
            self.graph.clone(),
            features,
            self.labels.clone(),
            self.num_classes,
            self.splits.clone(),
        )
    }
}

/// Environment variable naming the root directory of converted datasets.
pub const DATA_DIR_ENV: &str = "GFNN_DATA_DIR";

/// Locates a dataset directory: `name` itself if it holds a `meta.json`,
/// else `$GFNN_DATA_DIR/name`, else `data/name`.
pub fn resolve_dataset_dir(name: &str) -> Option<PathBuf> {
    let mut candidates = vec![PathBuf::from(name)];
    if let Some(root) = std::env::var_os(DATA_DIR_ENV) {
        candidates.push(Path::new(&root).join(name));
    }
    candidates.push(Path::new("data").join(name));
    candidates.into_iter().find(|c| c.join("meta.json").is_file())
}

/// Uniformly random disjoint train/val/test splits of the given sizes,
/// deterministic per seed. Each list is returned sorted.
pub fn random_split(dataset: &Dataset, sizes: (usize, usize, usize), seed: u64) -> Result<Dataset> {
    let (a, b, c) = sizes;
    let n = dataset.n();
    if a + b + c > n {
        return Err(Error::param(format!(
            "split sizes {a}+{b}+{c} exceed {n} vertices"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |range: std::ops::Range<usize>| {
        let mut v = order[range].to_vec();
        v.sort_unstable();
        v
    };
    let splits = Splits {
        train: take(0..a),
        val: take(a..a + b),
        test: take(a + b..a + b + c),
    };
    let mut out = dataset.clone();
    out.splits = splits;
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn toy(n: usize) -> Dataset {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Dataset::new(
            "toy",
            Graph::from_edges(n, edges).unwrap(),
            Array2::zeros((n, 2)),
            (0..n).map(|i| i % 3).collect(),
            3,
            Splits::default(),
        )
        .unwrap()
    }

    #[test]
    fn split_cardinalities_and_determinism() {
        let ds = toy(50);
        let a = random_split(&ds, (10, 5, 20), 4).unwrap();
        assert_eq!(a.splits.sizes(), (10, 5, 20));
        assert_eq!(a.splits, random_split(&ds, (10, 5, 20), 4).unwrap().splits);
        assert_ne!(a.splits, random_split(&ds, (10, 5, 20), 5).unwrap().splits);
        assert!(random_split(&ds, (30, 20, 1), 0).is_err());
    }

    #[test]
    fn overlapping_splits_rejected() {
        let mut ds = toy(5);
        ds.splits = Splits {
            train: vec![0, 1],
            val: vec![2],
            test: vec![1, 4],
        };
        assert!(matches!(ds.validate(), Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn bad_labels_rejected() {
        let mut ds = toy(5);
        ds.labels[2] = 3;
        assert!(ds.validate().is_err());
    }
}
