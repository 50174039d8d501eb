use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Dataset, Splits};
use crate::graph::Graph;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Meta {
    name: String,
    n: usize,
    d: usize,
    c: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.is_empty())
}

/// Reads and validates a dataset directory.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let meta: Meta = json(&dir.join("meta.json"))?;

    let path = dir.join("edges.tsv");
    let text = read(&path)?;
    let mut edges = Vec::new();
    for (line, l) in data_lines(&text) {
        let mut parts = l.split('\t');
        let mut next = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| parse_err(&path, line, "expected `u<TAB>v`"))?
                .trim()
                .parse()
                .map_err(|e| parse_err(&path, line, format!("{e}")))
        };
        let (u, v) = (next()?, next()?);
        if parts.next().is_some() {
            return Err(parse_err(&path, line, "more than two columns"));
        }
        if u >= v {
            return Err(parse_err(&path, line, format!("need u < v, got {u} {v}")));
        }
        if edges.last().is_some_and(|&last| last >= (u, v)) {
            return Err(parse_err(&path, line, "edges must be sorted and unique"));
        }
        edges.push((u, v));
    }
    let graph = Graph::from_edges(meta.n, edges)?;

    let path = dir.join("features.csv");
    let text = read(&path)?;
    let mut values = Vec::with_capacity(meta.n * meta.d);
    let mut rows = 0;
    for (line, l) in data_lines(&text) {
        let before = values.len();
        for field in l.split(',') {
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(&path, line, format!("{e}")))?,
            );
        }
        if values.len() - before != meta.d {
            return Err(parse_err(
                &path,
                line,
                format!("expected {} values, got {}", meta.d, values.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != meta.n {
        return Err(Error::InvalidDataset(format!(
            "features.csv has {rows} rows, meta says n = {}",
            meta.n
        )));
    }
    let features = Array2::from_shape_vec((meta.n, meta.d), values).expect("counted");

    let path = dir.join("labels.txt");
    let text = read(&path)?;
    let labels = data_lines(&text)
        .map(|(line, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|e| parse_err(&path, line, format!("{e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let splits: Splits = json(&dir.join("splits.json"))?;
    Dataset::new(meta.name, graph, features, labels, meta.c, splits)
}

/// Writes a dataset in the layout read by [`load_dataset`], creating the
/// directory if needed.
pub fn save_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let meta = Meta {
        name: dataset.name.clone(),
        n: dataset.n(),
        d: dataset.num_features(),
        c: dataset.num_classes,
    };
    write(
        &dir.join("meta.json"),
        &serde_json::to_string(&meta).expect("serializable"),
    )?;

    let mut edges = String::new();
    for (u, v) in dataset.graph.edges() {
        writeln!(edges, "{u}\t{v}").unwrap();
    }
    write(&dir.join("edges.tsv"), &edges)?;

    let mut features = String::new();
    for row in dataset.features.outer_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                features.push(',');
            }
            // `Display` for f64 is the shortest string that round-trips.
            write!(features, "{v}").unwrap();
        }
        features.push('\n');
    }
    write(&dir.join("features.csv"), &features)?;

    let mut labels = String::new();
    for l in &dataset.labels {
        writeln!(labels, "{l}").unwrap();
    }
    write(&dir.join("labels.txt"), &labels)?;

    write(
        &dir.join("splits.json"),
        &serde_json::to_string(&dataset.splits).expect("serializable"),
    )
}
