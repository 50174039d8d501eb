use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Weight matrices of a one- or two-layer model. `w1` (`d × h`) is absent
/// for single-layer models, whose `w2` is `d × c`. The optional biases are
/// single-row matrices (`1 × h` and `1 × c`) added after each layer.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub w1: Option<Array2<f64>>,
    pub w2: Array2<f64>,
    pub b1: Option<Array2<f64>>,
    pub b2: Option<Array2<f64>>,
}

/// Glorot-uniform initialization, deterministic per seed. With `hidden =
/// None` only `w2` (`d × c`) is drawn.
pub fn init_params(d: usize, hidden: Option<usize>, c: usize, seed: u64) -> Result<ModelParams> {
    if d == 0 || c == 0 || hidden == Some(0) {
        return Err(Error::param(format!(
            "model dimensions must be positive (d={d}, h={hidden:?}, c={c})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut glorot = |rows: usize, cols: usize| {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
    };
    Ok(match hidden {
        Some(h) => {
            let w1 = glorot(d, h);
            ModelParams::new(Some(w1), glorot(h, c))
        }
        None => ModelParams::new(None, glorot(d, c)),
    })
}

impl ModelParams {
    /// Weights without biases.
    pub fn new(w1: Option<Array2<f64>>, w2: Array2<f64>) -> Self {
        ModelParams {
            w1,
            w2,
            b1: None,
            b2: None,
        }
    }

    /// Adds zero biases to every layer that lacks one.
    pub fn with_bias(mut self) -> Self {
        if let Some(w1) = &self.w1 {
            self.b1.get_or_insert_with(|| Array2::zeros((1, w1.ncols())));
        }
        let c = self.w2.ncols();
        self.b2.get_or_insert_with(|| Array2::zeros((1, c)));
        self
    }

    pub fn has_bias(&self) -> bool {
        self.b2.is_some()
    }

    pub fn input_dim(&self) -> usize {
        self.w1.as_ref().map_or(self.w2.nrows(), |w| w.nrows())
    }

    pub fn hidden_dim(&self) -> Option<usize> {
        self.w1.as_ref().map(|w| w.ncols())
    }

    pub fn num_classes(&self) -> usize {
        self.w2.ncols()
    }

    pub fn zeros_like(&self) -> Self {
        let zeros = |w: &Array2<f64>| Array2::zeros(w.raw_dim());
        ModelParams {
            w1: self.w1.as_ref().map(zeros),
            w2: zeros(&self.w2),
            b1: self.b1.as_ref().map(zeros),
            b2: self.b2.as_ref().map(zeros),
        }
    }

    /// `w1`, `w2`, `b1`, `b2`, skipping absent ones.
    pub fn tensors(&self) -> Vec<&Array2<f64>> {
        self.w1
            .iter()
            .chain(std::iter::once(&self.w2))
            .chain(self.b1.iter())
            .chain(self.b2.iter())
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        self.w1
            .iter_mut()
            .chain(std::iter::once(&mut self.w2))
            .chain(self.b1.iter_mut())
            .chain(self.b2.iter_mut())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn to_json(&self) -> String {
        let file = ParamsFile {
            format: FORMAT.to_string(),
            d: self.input_dim(),
            h: self.hidden_dim(),
            c: self.num_classes(),
            w1: self.w1.as_ref().map(Tensor::from),
            w2: Tensor::from(&self.w2),
            b1: self.b1.as_ref().map(Tensor::from),
            b2: self.b2.as_ref().map(Tensor::from),
        };
        serde_json::to_string(&file).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ParamsFile = serde_json::from_str(s).map_err(|e| Error::Json {
            path: "<params>".into(),
            source: e,
        })?;
        if file.format != FORMAT {
            return Err(Error::param(format!("unknown params format `{}`", file.format)));
        }
        let w2 = file.w2.into_array()?;
        let w1 = file.w1.map(Tensor::into_array).transpose()?;
        let b1 = file.b1.map(Tensor::into_array).transpose()?;
        let b2 = file.b2.map(Tensor::into_array).transpose()?;
        let params = ModelParams { w1, w2, b1, b2 };
        if params.input_dim() != file.d
            || params.hidden_dim() != file.h
            || params.num_classes() != file.c
            || params.w1.as_ref().is_some_and(|w| w.ncols() != params.w2.nrows())
            || !params.bias_shapes_ok()
        {
            return Err(Error::param("params shape header disagrees with tensors"));
        }
        Ok(params)
    }
}

impl ModelParams {
    pub(crate) fn bias_shapes_ok(&self) -> bool {
        let b1_ok = match (&self.w1, &self.b1) {
            (Some(w1), Some(b1)) => b1.dim() == (1, w1.ncols()),
            (None, Some(_)) => false,
            _ => true,
        };
        let b2_ok = self
            .b2
            .as_ref()
            .is_none_or(|b2| b2.dim() == (1, self.w2.ncols()));
        b1_ok && b2_ok
    }
}

const FORMAT: &str = "gfnn-params/1";

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    format: String,
    d: usize,
    h: Option<usize>,
    c: usize,
    w1: Option<Tensor>,
    w2: Tensor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b1: Option<Tensor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b2: Option<Tensor>,
}

#[derive(Serialize, Deserialize)]
struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl From<&Array2<f64>> for Tensor {
    fn from(a: &Array2<f64>) -> Self {
        Tensor {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }
}

impl Tensor {
    fn into_array(self) -> Result<Array2<f64>> {
        Array2::from_shape_vec((self.rows, self.cols), self.data)
            .map_err(|e| Error::param(format!("bad tensor: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = init_params(5, Some(4), 3, 7).unwrap();
        assert_eq!(a, init_params(5, Some(4), 3, 7).unwrap());
        assert_ne!(a, init_params(5, Some(4), 3, 8).unwrap());
    }

    #[test]
    fn glorot_bounds() {
        let p = init_params(30, Some(10), 4, 1).unwrap();
        let b1 = (6.0f64 / 40.0).sqrt();
        let b2 = (6.0f64 / 14.0).sqrt();
        assert!(p.w1.as_ref().unwrap().iter().all(|v| v.abs() <= b1));
        assert!(p.w2.iter().all(|v| v.abs() <= b2));
    }

    #[test]
    fn json_round_trip() {
        for hidden in [Some(3), None] {
            let p = init_params(4, hidden, 2, 3).unwrap();
            assert_eq!(ModelParams::from_json(&p.to_json()).unwrap(), p);
            let mut b = p.with_bias();
            b.b2.as_mut().unwrap()[[0, 1]] = 0.25;
            assert_eq!(ModelParams::from_json(&b.to_json()).unwrap(), b);
        }
        assert!(ModelParams::from_json("{\"format\":\"x\"}").is_err());
    }

    #[test]
    fn rejects_zero_dims() {
        assert!(init_params(0, Some(2), 2, 0).is_err());
        assert!(init_params(2, Some(0), 2, 0).is_err());
    }
}
