use ndarray::Array2;

use super::{ModelParams, TrainConfig};

/// First and second moment estimates plus the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub step: u64,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros: Vec<Array2<f64>> = params
            .tensors()
            .iter()
            .map(|t| Array2::zeros(t.raw_dim()))
            .collect();
        AdamState {
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update. Weight decay, when non-zero, is added to
/// the gradient as an L2 term.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    config: &TrainConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let tensors = params.tensors_mut();
    let grads = grads.tensors();
    for (((w, g), m), v) in tensors
        .into_iter()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        ndarray::Zip::from(w)
            .and(g)
            .and(m)
            .and(v)
            .for_each(|w, &g, m, v| {
                let g = g + config.weight_decay * *w;
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *w -= config.lr * m_hat / (v_hat.sqrt() + config.adam_eps);
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::init_params;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = init_params(3, Some(2), 2, 0).unwrap();
        let before = p.clone();
        let g = p.zeros_like();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, &TrainConfig::default());
        assert_eq!(p, before);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_is_sign_scaled() {
        let mut p = init_params(2, None, 2, 0).unwrap();
        let before = p.clone();
        let mut g = p.zeros_like();
        g.w2 = ndarray::array![[0.3, -2.0], [1e-3, 0.0]];
        let cfg = TrainConfig::default();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &g, &mut s, &cfg);
        for ((w, w0), gv) in p.w2.iter().zip(before.w2.iter()).zip(g.w2.iter()) {
            let expected = -cfg.lr * gv / (gv.abs() + cfg.adam_eps);
            assert!((w - w0 - expected).abs() < 1e-12);
        }
    }
}
