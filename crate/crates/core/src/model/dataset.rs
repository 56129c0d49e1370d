use super::design::{gen_design, DesignMatrix};
use super::rng::RngStream;
use super::signal::{gen_signal_with, ParamSpace, SignPattern, SignalVector};
use crate::error::{Error, Result};

/// `y = X beta + sigma z` with z drawn from `rng`.
pub fn gen_response(
    x: &DesignMatrix,
    beta: &SignalVector,
    sigma: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if beta.p() != x.p() {
        return Err(Error::DimensionMismatch {
            what: "signal length vs design columns",
            expected: x.p(),
            got: beta.p(),
        });
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be >= 0, got {sigma}")));
    }
    let mut y = x.mul_vec(&beta.to_dense());
    for yi in y.iter_mut() {
        let z = rng.standard_normal();
        *yi += sigma * z;
    }
    Ok(y)
}

/// Dimensions and signal law of a simulated experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetShape {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub tau: f64,
    pub signs: SignPattern,
}

/// One realisation of the linear model.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: DesignMatrix,
    pub y: Vec<f64>,
    pub beta: SignalVector,
    pub sigma: f64,
    pub seed: u64,
    pub stream_id: u64,
}

impl Dataset {
    /// Draws X, then beta, then the noise, all from stream `(seed, stream_id)`.
    /// `sigma` may be zero for noiseless experiments.
    pub fn generate(shape: &DatasetShape, sigma: f64, seed: u64, stream_id: u64) -> Result<Self> {
        let mut rng = RngStream::new(seed, stream_id);
        let x = gen_design(shape.n, shape.p, &mut rng)?;
        // ParamSpace requires sigma > 0; the signal draw does not depend on it.
        let space = ParamSpace::new(shape.k, shape.tau, 1.0)?;
        let beta = gen_signal_with(shape.p, &space, shape.signs, &mut rng)?;
        let y = gen_response(&x, &beta, sigma, &mut rng)?;
        Ok(Self {
            x,
            y,
            beta,
            sigma,
            seed,
            stream_id,
        })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn p(&self) -> usize {
        self.x.p()
    }

    /// Implied standardized noise `(y - X beta) / sigma`.
    pub fn noise(&self) -> Option<Vec<f64>> {
        if self.sigma == 0.0 {
            return None;
        }
        let fit = self.x.mul_vec(&self.beta.to_dense());
        Some(self.y.iter().zip(fit).map(|(y, f)| (y - f) / self.sigma).collect())
    }
}
