//! Seeded sampling for the distributions the posterior models need.

use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Dirichlet concentration parameters. Entries may be zero (the matching
/// coordinate is then exactly zero in every draw) but not all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeVector {
    alphas: Vec<f64>,
}

impl ShapeVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Domain(
                "concentration parameters must be finite and non-negative".into(),
            ));
        }
        if !alphas.iter().any(|a| *a > 0.0) {
            return Err(Error::Domain(
                "at least one concentration parameter must be positive".into(),
            ));
        }
        Ok(ShapeVector { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Domain("simplex coordinates must lie in [0, 1]".into()));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "simplex coordinates must sum to 1, got {sum}"
            )));
        }
        Ok(SimplexPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// One draw from Gamma(shape, 1). Shapes below 1 are handled by the
/// boost-and-reject scheme inside the sampler, valid for all positive shapes.
pub fn sample_gamma(shape: f64, stream: &mut Stream) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::Domain(format!("gamma shape must be positive, got {shape}")));
    }
    let g = Gamma::new(shape, 1.0)
        .map_err(|e| Error::Domain(format!("gamma parameters rejected: {e}")))?;
    Ok(g.sample(stream.inner()))
}

/// One draw from Exponential(1).
pub fn sample_exponential(stream: &mut Stream) -> f64 {
    Exp1.sample(stream.inner())
}

/// One draw from Beta(a, b) via the two-gamma construction.
pub fn sample_beta(a: f64, b: f64, stream: &mut Stream) -> Result<f64> {
    let x = sample_gamma(a, stream)?;
    let y = sample_gamma(b, stream)?;
    Ok(x / (x + y))
}

/// One Dirichlet draw. Components with concentration exactly zero come out
/// exactly zero.
pub fn sample_dirichlet(alphas: &ShapeVector, stream: &mut Stream) -> Result<SimplexPoint> {
    let mut coords = Vec::with_capacity(alphas.alphas().len());
    let mut total = 0.0;
    for &a in alphas.alphas() {
        let g = if a == 0.0 { 0.0 } else { sample_gamma(a, stream)? };
        total += g;
        coords.push(g);
    }
    for c in &mut coords {
        *c /= total;
    }
    Ok(SimplexPoint { coords })
}
