use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::ModelParams;
use crate::filters::{propagate_k, FilterKind, FilterSpec};
use crate::graph::{Graph, PropagationOperator};
use crate::linalg::check_rows;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    /// Logistic regression on the raw features.
    Lr,
    /// Two-layer GCN. `symmetric` swaps `Ã_rw` for `D̃^{-1/2}ÃD̃^{-1/2}`.
    Gcn { symmetric: bool },
    /// Logistic regression on `Ã_rw² X`.
    Sgc,
    /// MLP on filtered features.
    Gfnn { filter: FilterSpec },
}

impl ModelKind {
    pub fn is_two_layer(&self) -> bool {
        !matches!(self, ModelKind::Lr | ModelKind::Sgc)
    }

    pub fn label(&self) -> String {
        match self {
            ModelKind::Mlp => "mlp".into(),
            ModelKind::Lr => "lr".into(),
            ModelKind::Gcn { symmetric: false } => "gcn".into(),
            ModelKind::Gcn { symmetric: true } => "gcn-sym".into(),
            ModelKind::Sgc => "sgc".into(),
            ModelKind::Gfnn { filter } => format!("gfnn-{}", filter.kind),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// `mlp`, `lr`, `gcn`, `gcn-sym`, `sgc`, `gfnn` (default filter) or
    /// `gfnn-<filter>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "mlp" => Ok(ModelKind::Mlp),
            "lr" => Ok(ModelKind::Lr),
            "gcn" => Ok(ModelKind::Gcn { symmetric: false }),
            "gcn-sym" => Ok(ModelKind::Gcn { symmetric: true }),
            "sgc" => Ok(ModelKind::Sgc),
            "gfnn" => Ok(ModelKind::Gfnn {
                filter: FilterSpec::default(),
            }),
            other => match other.strip_prefix("gfnn-") {
                Some(kind) => Ok(ModelKind::Gfnn {
                    filter: FilterSpec {
                        kind: kind.parse()?,
                        ..FilterSpec::default()
                    },
                }),
                None => Err(Error::param(format!(
                    "unknown model `{s}` (expected mlp, lr, gcn, gcn-sym, sgc or gfnn)"
                ))),
            },
        }
    }
}

pub fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

pub fn log_softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}

pub fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    log_softmax_rows(z).mapv(f64::exp)
}

/// Model-specific input, prepared once: raw features for MLP/LR, filtered
/// features for SGC/gfNN, and `M X` plus the operator for GCN.
pub struct ModelInput<'g> {
    kind: ModelKind,
    features: Array2<f64>,
    propagator: Option<PropagationOperator<'g>>,
}

impl<'g> ModelInput<'g> {
    /// `gamma` is the self-loop weight of the GCN and SGC propagation.
    pub fn prepare(
        kind: ModelKind,
        graph: &'g Graph,
        gamma: f64,
        x: ArrayView2<f64>,
    ) -> Result<Self> {
        check_rows(x, graph.n())?;
        let (features, propagator) = match kind {
            ModelKind::Mlp | ModelKind::Lr => (x.to_owned(), None),
            ModelKind::Sgc => {
                let spec = FilterSpec::new(FilterKind::LeftNorm, gamma, 2);
                (propagate_k(graph, &spec, x)?, None)
            }
            ModelKind::Gfnn { filter } => (propagate_k(graph, &filter, x)?, None),
            ModelKind::Gcn { symmetric } => {
                let op_kind = if symmetric {
                    FilterKind::AugNormAdj
                } else {
                    FilterKind::LeftNorm
                };
                let op = PropagationOperator::new(graph, op_kind, gamma)?;
                (op.apply(x)?, Some(op))
            }
        };
        Ok(ModelInput {
            kind,
            features,
            propagator,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// The prepared (possibly filtered) feature matrix.
    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn input_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_vertices(&self) -> usize {
        self.features.nrows()
    }

    fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.w1.is_some() != self.kind.is_two_layer() {
            return Err(Error::param(format!(
                "{} expects {} weight matrices",
                self.kind,
                if self.kind.is_two_layer() { 2 } else { 1 }
            )));
        }
        if params.input_dim() != self.input_dim() {
            return Err(Error::dims(
                format!("input dimension {}", self.input_dim()),
                params.input_dim(),
            ));
        }
        if !params.bias_shapes_ok() {
            return Err(Error::param("bias shapes do not match the weights"));
        }
        if let Some(w1) = &params.w1 {
            if w1.ncols() != params.w2.nrows() {
                return Err(Error::dims(
                    format!("w2 with {} rows", w1.ncols()),
                    params.w2.nrows(),
                ));
            }
        }
        Ok(())
    }

    /// Pre-softmax outputs for every vertex.
    pub fn logits(&self, params: &ModelParams) -> Result<Array2<f64>> {
        self.check_params(params)?;
        let mut out = match &params.w1 {
            Some(w1) => {
                let mut pre = self.features.dot(w1);
                add_bias(&mut pre, &params.b1);
                let out = relu(&pre).dot(&params.w2);
                match &self.propagator {
                    Some(op) => op.apply(out.view())?,
                    None => out,
                }
            }
            None => self.features.dot(&params.w2),
        };
        add_bias(&mut out, &params.b2);
        Ok(out)
    }

    /// Class probabilities for every vertex; rows sum to one.
    pub fn forward(&self, params: &ModelParams) -> Result<Array2<f64>> {
        Ok(softmax_rows(&self.logits(params)?))
    }

    /// Mean cross-entropy over the `mask` vertices and its exact gradient.
    pub fn loss_and_grads(
        &self,
        params: &ModelParams,
        labels: &[usize],
        mask: &[usize],
    ) -> Result<(f64, ModelParams)> {
        self.check_params(params)?;
        if mask.is_empty() {
            return Err(Error::param("loss over an empty mask"));
        }
        if labels.len() != self.num_vertices() {
            return Err(Error::dims(
                format!("{} labels", self.num_vertices()),
                labels.len(),
            ));
        }
        let c = params.num_classes();
        if let Some(&bad) = mask.iter().find(|&&i| labels[i] >= c) {
            return Err(Error::param(format!("label {} of vertex {bad} >= {c}", labels[bad])));
        }
        let m = mask.len() as f64;

        // Gradient of the mean cross-entropy w.r.t. the logits of `rows`.
        let logit_grad = |logits: &Array2<f64>, rows: &mut dyn Iterator<Item = (usize, usize)>| {
            let logp = log_softmax_rows(logits);
            let mut grad = Array2::zeros(logits.raw_dim());
            let mut loss = 0.0;
            for (r, v) in rows {
                let y = labels[v];
                loss -= logp[[r, y]];
                for j in 0..c {
                    grad[[r, j]] = logp[[r, j]].exp() / m;
                }
                grad[[r, y]] -= 1.0 / m;
            }
            (loss / m, grad)
        };

        let bias_grad = |g: &Array2<f64>, b: &Option<Array2<f64>>| {
            b.as_ref().map(|_| g.sum_axis(Axis(0)).insert_axis(Axis(0)))
        };
        let backprop_relu = |mut d: Array2<f64>, pre: &Array2<f64>| {
            d.zip_mut_with(pre, |d, &p| {
                if p <= 0.0 {
                    *d = 0.0
                }
            });
            d
        };

        match &self.propagator {
            None => {
                let x = self.features.select(Axis(0), mask);
                match &params.w1 {
                    None => {
                        let mut logits = x.dot(&params.w2);
                        add_bias(&mut logits, &params.b2);
                        let (loss, g) = logit_grad(&logits, &mut mask.iter().copied().enumerate());
                        Ok((
                            loss,
                            ModelParams {
                                w1: None,
                                w2: x.t().dot(&g),
                                b1: None,
                                b2: bias_grad(&g, &params.b2),
                            },
                        ))
                    }
                    Some(w1) => {
                        let mut pre = x.dot(w1);
                        add_bias(&mut pre, &params.b1);
                        let hidden = relu(&pre);
                        let mut logits = hidden.dot(&params.w2);
                        add_bias(&mut logits, &params.b2);
                        let (loss, g) = logit_grad(&logits, &mut mask.iter().copied().enumerate());
                        let dh = backprop_relu(g.dot(&params.w2.t()), &pre);
                        Ok((
                            loss,
                            ModelParams {
                                w1: Some(x.t().dot(&dh)),
                                w2: hidden.t().dot(&g),
                                b1: bias_grad(&dh, &params.b1),
                                b2: bias_grad(&g, &params.b2),
                            },
                        ))
                    }
                }
            }
            Some(op) => {
                let w1 = params.w1.as_ref().expect("checked two-layer");
                let mut pre = self.features.dot(w1);
                add_bias(&mut pre, &params.b1);
                let hidden = relu(&pre);
                let mut logits = op.apply(hidden.dot(&params.w2).view())?;
                add_bias(&mut logits, &params.b2);
                let (loss, g) = logit_grad(&logits, &mut mask.iter().map(|&v| (v, v)));
                let dt = op.apply_transpose(g.view())?;
                let dh = backprop_relu(dt.dot(&params.w2.t()), &pre);
                Ok((
                    loss,
                    ModelParams {
                        w1: Some(self.features.t().dot(&dh)),
                        w2: hidden.t().dot(&dt),
                        b1: bias_grad(&dh, &params.b1),
                        b2: bias_grad(&g, &params.b2),
                    },
                ))
            }
        }
    }
}

fn add_bias(z: &mut Array2<f64>, bias: &Option<Array2<f64>>) {
    if let Some(b) = bias {
        *z += &b.row(0);
    }
}

/// `softmax(relu(X W1) W2)`.
pub fn mlp_forward(x: ArrayView2<f64>, params: &ModelParams) -> Result<Array2<f64>> {
    let g = Graph::edgeless(x.nrows());
    let kind = if params.w1.is_some() {
        ModelKind::Mlp
    } else {
        ModelKind::Lr
    };
    ModelInput::prepare(kind, &g, 1.0, x)?.forward(params)
}

/// `softmax(Ã_rw relu(Ã_rw X W1) W2)`.
pub fn gcn_forward(
    g: &Graph,
    gamma: f64,
    x: ArrayView2<f64>,
    params: &ModelParams,
) -> Result<Array2<f64>> {
    ModelInput::prepare(ModelKind::Gcn { symmetric: false }, g, gamma, x)?.forward(params)
}

/// `softmax(Ã_rw² X W2)`.
pub fn sgc_forward(
    g: &Graph,
    gamma: f64,
    x: ArrayView2<f64>,
    params: &ModelParams,
) -> Result<Array2<f64>> {
    ModelInput::prepare(ModelKind::Sgc, g, gamma, x)?.forward(params)
}

/// MLP on `filter(X)`.
pub fn gfnn_forward(
    g: &Graph,
    filter: &FilterSpec,
    x: ArrayView2<f64>,
    params: &ModelParams,
) -> Result<Array2<f64>> {
    ModelInput::prepare(ModelKind::Gfnn { filter: *filter }, g, filter.gamma, x)?.forward(params)
}
