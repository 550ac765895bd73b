use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::env::ACTION_DIM;

/// Ornstein-Uhlenbeck parameters: initial noise scale, long-term mean,
/// volatility and mean-reversion speed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OuParams {
    pub scale: f64,
    pub mu: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        OuParams {
            scale: 1.0,
            mu: 0.0,
            sigma: 0.1,
            beta: 0.9,
        }
    }
}

/// Discrete OU process with unit time step:
/// `x <- x + beta * (mu - x) + sigma * N(0, 1)`, one state per action dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct OuNoise {
    pub params: OuParams,
    state: [f64; ACTION_DIM],
}

impl OuNoise {
    pub fn new(params: OuParams) -> Self {
        OuNoise {
            params,
            state: [params.mu; ACTION_DIM],
        }
    }

    pub fn reset(&mut self) {
        self.state = [self.params.mu; ACTION_DIM];
    }

    pub fn state(&self) -> &[f64; ACTION_DIM] {
        &self.state
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [f64; ACTION_DIM] {
        let OuParams { mu, sigma, beta, .. } = self.params;
        for x in &mut self.state {
            let z: f64 = rng.sample(StandardNormal);
            *x += beta * (mu - *x) + sigma * z;
        }
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_volatility_reverts_geometrically() {
        let mut noise = OuNoise::new(OuParams {
            scale: 1.0,
            mu: 0.5,
            sigma: 0.0,
            beta: 0.9,
        });
        noise.state = [1.5; ACTION_DIM];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = noise.sample(&mut rng);
        // 1.5 + 0.9 * (0.5 - 1.5)
        assert!(x.iter().all(|&v| (v - 0.6).abs() < 1e-15));
    }

    #[test]
    fn stationary_variance_matches_ar1() {
        let params = OuParams::default();
        let mut noise = OuNoise::new(params);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            sum_sq += noise.sample(&mut rng)[0].powi(2);
        }
        // AR(1) with coefficient 1 - beta: var = sigma^2 / (1 - (1 - beta)^2)
        let expected = params.sigma.powi(2) / (1.0 - (1.0 - params.beta).powi(2));
        let var = sum_sq / n as f64;
        assert!(
            (var - expected).abs() / expected < 0.02,
            "var {var} expected {expected}"
        );
    }
}
