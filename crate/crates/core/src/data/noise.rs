use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::spectral::SpectralBasis;
use crate::{Error, FeatureMatrix, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDomain {
    /// i.i.d. Gaussian per feature entry.
    #[default]
    Feature,
    /// i.i.d. Gaussian per graph Fourier coefficient.
    Frequency,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
    pub domain: NoiseDomain,
}

impl NoiseSpec {
    pub fn feature(sigma: f64, seed: u64) -> Self {
        NoiseSpec {
            sigma,
            seed,
            domain: NoiseDomain::Feature,
        }
    }

    pub fn frequency(sigma: f64, seed: u64) -> Self {
        NoiseSpec {
            sigma,
            seed,
            domain: NoiseDomain::Frequency,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

fn gaussian(shape: (usize, usize), sigma: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn(shape, || {
        sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    })
}

/// `X + Z`. Frequency-domain noise needs the complete basis of the graph and
/// sets `Z = U Ẑ` with Gaussian `Ẑ`.
pub fn add_noise(
    x: &FeatureMatrix,
    spec: &NoiseSpec,
    basis: Option<&SpectralBasis>,
) -> Result<FeatureMatrix> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        return Ok(x.clone());
    }
    match spec.domain {
        NoiseDomain::Feature => Ok(x + &gaussian(x.dim(), spec.sigma, spec.seed)),
        NoiseDomain::Frequency => {
            let basis = basis.ok_or_else(|| {
                Error::param("frequency-domain noise needs a spectral basis".to_string())
            })?;
            if !basis.is_full() {
                return Err(Error::param(
                    "frequency-domain noise needs the full spectrum".to_string(),
                ));
            }
            if basis.n() != x.nrows() {
                return Err(Error::dims(basis.n(), x.nrows()));
            }
            let zhat = gaussian((basis.len(), x.ncols()), spec.sigma, spec.seed);
            Ok(x + &basis.igft(zhat.view())?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let x = Array2::from_elem((3, 2), 1.5);
        assert_eq!(add_noise(&x, &NoiseSpec::feature(0.0, 1), None).unwrap(), x);
    }

    #[test]
    fn negative_sigma_rejected() {
        let x = Array2::zeros((2, 2));
        assert!(add_noise(&x, &NoiseSpec::feature(-1.0, 0), None).is_err());
    }

    #[test]
    fn frequency_without_basis_rejected() {
        let x = Array2::zeros((2, 2));
        assert!(add_noise(&x, &NoiseSpec::frequency(0.1, 0), None).is_err());
    }
}
