use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{adam_step, init_params, AdamState, ModelInput, ModelKind, ModelParams};
use crate::data::{Dataset, Split};
use crate::{Error, Result};

/// Optimizer and run settings. Defaults: Adam with `lr = 0.2` for 50 epochs
/// and 32 hidden units, no weight decay, `γ = 1` for GCN/SGC propagation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub hidden: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub gamma: f64,
    /// Adds a trainable bias after each layer.
    #[serde(default)]
    pub bias: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.2,
            epochs: 50,
            hidden: 32,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 0.0,
            gamma: 1.0,
            bias: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::param(format!("lr must be positive, got {}", self.lr)));
        }
        if self.epochs == 0 {
            return Err(Error::param("epochs must be at least 1"));
        }
        if self.hidden == 0 {
            return Err(Error::param("hidden width must be at least 1"));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::param("weight decay must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Validation accuracy after the epoch's update; `None` without a
    /// validation split.
    pub val_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
}

/// Full-batch training on the dataset's train split, without early stopping.
pub fn train(kind: ModelKind, dataset: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    let input = ModelInput::prepare(kind, &dataset.graph, config.gamma, dataset.features.view())?;
    train_prepared(&input, dataset, config)
}

/// Like [`train`] on an already prepared input.
pub fn train_prepared(
    input: &ModelInput<'_>,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let hidden = input.kind().is_two_layer().then_some(config.hidden);
    let mut params = init_params(input.input_dim(), hidden, dataset.num_classes, config.seed)?;
    if config.bias {
        params = params.with_bias();
    }
    let mut state = AdamState::new(&params);
    let mut history = Vec::with_capacity(config.epochs);
    let train_idx = &dataset.splits.train;
    let val_idx = &dataset.splits.val;
    for epoch in 0..config.epochs {
        let (loss, grads) = input.loss_and_grads(&params, &dataset.labels, train_idx)?;
        adam_step(&mut params, &grads, &mut state, config);
        let val_accuracy = if val_idx.is_empty() {
            None
        } else {
            Some(accuracy(&input.forward(&params)?, &dataset.labels, val_idx)?)
        };
        history.push(EpochRecord {
            epoch,
            train_loss: loss,
            val_accuracy,
        });
    }
    Ok(TrainOutcome { params, history })
}

/// Row-wise argmax, ties broken towards the lowest class index.
pub fn argmax_rows(probs: &Array2<f64>) -> Vec<usize> {
    probs
        .outer_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Fraction of `indices` whose argmax prediction equals the label.
pub fn accuracy(probs: &Array2<f64>, labels: &[usize], indices: &[usize]) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::param("accuracy over an empty split"));
    }
    let pred = argmax_rows(probs);
    let hits = indices.iter().filter(|&&i| pred[i] == labels[i]).count();
    Ok(hits as f64 / indices.len() as f64)
}

pub fn evaluate(
    input: &ModelInput<'_>,
    params: &ModelParams,
    dataset: &Dataset,
    split: Split,
) -> Result<f64> {
    let probs = input.forward(params)?;
    accuracy(&probs, &dataset.labels, dataset.splits.get(split))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn perfect_predictions() {
        let labels = [0, 2, 1];
        let probs = array![[0.9, 0.05, 0.05], [0.0, 0.0, 1.0], [0.2, 0.7, 0.1]];
        assert_eq!(accuracy(&probs, &labels, &[0, 1, 2]).unwrap(), 1.0);
        assert!(accuracy(&probs, &labels, &[]).is_err());
    }

    #[test]
    fn ties_go_to_lowest_class() {
        let probs = Array2::from_elem((4, 2), 0.5);
        assert_eq!(argmax_rows(&probs), vec![0; 4]);
        let labels = [0, 1, 1, 0];
        assert_eq!(accuracy(&probs, &labels, &[0, 1, 2, 3]).unwrap(), 0.5);
        assert_eq!(accuracy(&probs, &labels, &[1, 2, 3]).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn hand_counted_fixture() {
        // 10 vertices, 3 classes; predictions below were tallied by hand:
        // rows 0,1,3,4,7,9 are correct -> 6/10; on {2,3,5,7} only 3 and 7.
        let probs = array![
            [0.6, 0.3, 0.1],
            [0.1, 0.8, 0.1],
            [0.4, 0.4, 0.2],
            [0.2, 0.2, 0.6],
            [0.5, 0.1, 0.4],
            [0.3, 0.3, 0.4],
            [0.1, 0.1, 0.8],
            [0.1, 0.6, 0.3],
            [0.7, 0.2, 0.1],
            [0.3, 0.35, 0.35],
        ];
        let labels = [0, 1, 1, 2, 0, 1, 0, 1, 2, 1];
        let all: Vec<usize> = (0..10).collect();
        assert_eq!(accuracy(&probs, &labels, &all).unwrap(), 0.6);
        assert_eq!(accuracy(&probs, &labels, &[2, 3, 5, 7]).unwrap(), 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { lr: 0.0, ..Default::default() },
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { hidden: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
