use nalgebra::DVector;

use super::scalar::{decode_scalar, encode_scalar, KeyWord, ShiftMirrorCodec};
use crate::dynamics::GaussianSpec;
use crate::{Error, Result};

/// Means and standard deviations of a Gaussian with diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalStandardizer {
    pub mean: DVector<f64>,
    pub sd: DVector<f64>,
}

impl DiagonalStandardizer {
    pub fn new(gaussian: &GaussianSpec) -> Result<Self> {
        let cov = &gaussian.cov;
        let n = cov.nrows();
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                if i != j && cov[(i, j)].abs() > 1e-12 * scale {
                    return Err(Error::config(format!(
                        "covariance must be diagonal, entry ({i}, {j}) is {}",
                        cov[(i, j)]
                    )));
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| !(cov[(i, i)] > 0.0)) {
            return Err(Error::config(format!(
                "diagonal covariance entry {i} must be positive, got {}",
                cov[(i, i)]
            )));
        }
        Ok(DiagonalStandardizer {
            mean: gaussian.mean.clone(),
            sd: cov.diagonal().map(f64::sqrt),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn standardize(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.mean).component_div(&self.sd)
    }

    pub fn destandardize(&self, v: &DVector<f64>) -> DVector<f64> {
        v.component_mul(&self.sd) + &self.mean
    }
}

fn check_lengths(len: usize, keys: &[KeyWord], std: &DiagonalStandardizer) -> Result<()> {
    if len != std.dim() {
        return Err(Error::dim("vector codec input", std.dim(), len));
    }
    if keys.len() != std.dim() {
        return Err(Error::dim("vector codec keys", std.dim(), keys.len()));
    }
    Ok(())
}

/// Standardizes each coordinate with the public prior and encodes it with
/// its own key word. The codeword stays in standardized units.
pub fn encode_vector(
    x: &DVector<f64>,
    keys: &[KeyWord],
    gaussian: &GaussianSpec,
    codec: &ShiftMirrorCodec,
) -> Result<DVector<f64>> {
    let std = DiagonalStandardizer::new(gaussian)?;
    check_lengths(x.len(), keys, &std)?;
    let v = std.standardize(x);
    let z: Result<Vec<f64>> = v
        .iter()
        .zip(keys)
        .map(|(&vi, &k)| encode_scalar(vi, k, codec))
        .collect();
    Ok(DVector::from_vec(z?))
}

pub fn decode_vector(
    z: &DVector<f64>,
    keys: &[KeyWord],
    gaussian: &GaussianSpec,
    codec: &ShiftMirrorCodec,
) -> Result<DVector<f64>> {
    let std = DiagonalStandardizer::new(gaussian)?;
    check_lengths(z.len(), keys, &std)?;
    let v: Result<Vec<f64>> = z
        .iter()
        .zip(keys)
        .map(|(&zi, &k)| decode_scalar(zi, k, codec))
        .collect();
    Ok(std.destandardize(&DVector::from_vec(v?)))
}
