//! The Imprecise Dirichlet Model baseline and the Jeffreys-prior Bayesian
//! comparison, plus the IDM prior family for the constrained linkage model.
//!
//! For the single-cell assertion {theta_k <= theta0} the IDM posterior
//! probability ranges over Dirichlet(N + alpha) with sum(alpha) = s, and the
//! extremes are attained at alpha_k = s and alpha_k = 0. With s = 1 those
//! bounds coincide with the Dirichlet-DSM p and p + r — the two methods are
//! indistinguishable on this family of assertions.
//!
//! The linkage model has a 1-D parameter phi; IDM priors over the 4-cell
//! counts induce phi posteriors computed here by direct numerical
//! integration on a grid (no MCMC needed in one dimension).

use serde::{Deserialize, Serialize};

use crate::dsm::CountVector;
use crate::error::{Error, Result};
use crate::special::beta_cdf_extended;

/// IDM hyperparameters: Dirichlet weights `alphas` with total mass at most
/// `s` (the prior-strength cap).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdmHyper {
    alphas: Vec<f64>,
    s: f64,
}

impl IdmHyper {
    pub fn new(alphas: Vec<f64>, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("prior strength s={s} must be positive")));
        }
        if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Domain("alphas must be finite and non-negative".into()));
        }
        let sum: f64 = alphas.iter().sum();
        if sum > s + 1e-12 {
            return Err(Error::Domain(format!(
                "alphas sum to {sum}, exceeding the prior strength {s}"
            )));
        }
        Ok(IdmHyper { alphas, s })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// A lower/upper probability pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBounds {
    pub lower: f64,
    pub upper: f64,
}

/// IDM lower/upper posterior probability of {theta_k <= theta0} at prior
/// strength `s`; the extremes put all prior mass on cell k or none of it.
/// Only s = 1 is exercised by the validation suite.
pub fn idm_cell_leq_bounds(
    counts: &CountVector,
    k: usize,
    theta0: f64,
    s: f64,
) -> Result<ProbabilityBounds> {
    if k >= counts.k() {
        return Err(Error::Usage(format!("cell index {k} out of range")));
    }
    if !(0.0..=1.0).contains(&theta0) {
        return Err(Error::Usage(format!("theta0={theta0} outside [0, 1]")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("prior strength s={s} must be positive")));
    }
    let n_k = counts.counts()[k] as f64;
    let n_rest = (counts.total() - counts.counts()[k]) as f64;
    let lower = beta_cdf_extended(theta0, n_k + s, n_rest)?;
    let upper = beta_cdf_extended(theta0, n_k, n_rest + s)?;
    Ok(ProbabilityBounds { lower, upper })
}

/// Posterior probability of {theta_k <= theta0} under the Jeffreys prior
/// Dirichlet(1/2, ..., 1/2): the Beta(N_k + 1/2, N_rest + (K-1)/2) CDF.
pub fn jeffreys_prob(counts: &CountVector, k: usize, theta0: f64) -> Result<f64> {
    if k >= counts.k() {
        return Err(Error::Usage(format!("cell index {k} out of range")));
    }
    if !(0.0..=1.0).contains(&theta0) {
        return Err(Error::Usage(format!("theta0={theta0} outside [0, 1]")));
    }
    let n_k = counts.counts()[k] as f64;
    let n_rest = (counts.total() - counts.counts()[k]) as f64;
    beta_cdf_extended(theta0, n_k + 0.5, n_rest + (counts.k() as f64 - 1.0) / 2.0)
}

/// A normalized density for the linkage parameter phi on a grid in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
}

impl PhiDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Linear interpolation; zero outside the grid range.
    pub fn density_at(&self, phi: f64) -> f64 {
        let n = self.grid.len();
        if phi < self.grid[0] || phi > self.grid[n - 1] {
            return 0.0;
        }
        let i = match self.grid.binary_search_by(|g| g.partial_cmp(&phi).unwrap()) {
            Ok(i) => return self.density[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let w = (phi - x0) / (x1 - x0);
        self.density[i - 1] * (1.0 - w) + self.density[i] * w
    }

    /// Trapezoid CDF at `phi0`, clamped to [0, 1] at the grid edges.
    pub fn cdf_at(&self, phi0: f64) -> f64 {
        if phi0 <= self.grid[0] {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let (x0, x1) = (self.grid[i - 1], self.grid[i]);
            let (f0, f1) = (self.density[i - 1], self.density[i]);
            if phi0 >= x1 {
                acc += 0.5 * (f0 + f1) * (x1 - x0);
            } else {
                let f_mid = self.density_at(phi0);
                acc += 0.5 * (f0 + f_mid) * (phi0 - x0);
                break;
            }
        }
        acc.clamp(0.0, 1.0)
    }

    /// Trapezoid posterior mean.
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let (x0, x1) = (self.grid[i - 1], self.grid[i]);
            acc += 0.5 * (x0 * self.density[i - 1] + x1 * self.density[i]) * (x1 - x0);
        }
        acc
    }
}

/// Margin keeping the grid away from the integrable endpoint singularities
/// the prior exponents can create at phi in {0, 1}.
pub const PHI_GRID_EPS: f64 = 1e-6;

/// Posterior density of phi for the linkage model under an IDM prior with
/// sum(alpha) = 1: proportional to
/// `((2+phi)/4)^(N1+a1-1) * ((1-phi)/4)^(N2+N3+a2+a3-1) * (phi/4)^(N4+a4-1)`
/// evaluated in log space on a uniform grid over [eps, 1-eps] and
/// trapezoid-normalized.
pub fn linkage_idm_posterior(
    counts4: &CountVector,
    alphas: &IdmHyper,
    grid_size: usize,
) -> Result<PhiDensity> {
    if counts4.k() != 4 {
        return Err(Error::Usage("linkage model needs K = 4".into()));
    }
    if alphas.alphas().len() != 4 {
        return Err(Error::Usage("linkage prior needs 4 alphas".into()));
    }
    let asum: f64 = alphas.alphas().iter().sum();
    if (asum - 1.0).abs() > 1e-9 {
        return Err(Error::Usage("linkage prior needs sum(alpha) = 1".into()));
    }
    if grid_size < 3 {
        return Err(Error::Usage("grid_size must be at least 3".into()));
    }
    let n = counts4.counts();
    let a = alphas.alphas();
    let e1 = n[0] as f64 + a[0] - 1.0;
    let e23 = (n[1] + n[2]) as f64 + a[1] + a[2] - 1.0;
    let e4 = n[3] as f64 + a[3] - 1.0;

    let lo = PHI_GRID_EPS;
    let hi = 1.0 - PHI_GRID_EPS;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| lo + i as f64 * step).collect();
    let log_dens: Vec<f64> = grid
        .iter()
        .map(|&phi| {
            e1 * ((2.0 + phi) / 4.0).ln() + e23 * ((1.0 - phi) / 4.0).ln() + e4 * (phi / 4.0).ln()
        })
        .collect();
    let max_ld = log_dens.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max_ld.is_finite() {
        return Err(Error::Degenerate("linkage posterior is degenerate on the grid".into()));
    }
    let mut density: Vec<f64> = log_dens.iter().map(|ld| (ld - max_ld).exp()).collect();
    let mut integral = 0.0;
    for i in 1..grid_size {
        integral += 0.5 * (density[i - 1] + density[i]) * step;
    }
    if !(integral > 0.0) {
        return Err(Error::Degenerate("linkage posterior integrates to zero".into()));
    }
    for d in &mut density {
        *d /= integral;
    }
    Ok(PhiDensity { grid, density })
}

/// The default alpha grid on the face sum(alpha) = 1: the four vertices plus
/// the six edge midpoints.
pub fn default_alpha_grid() -> Vec<[f64; 4]> {
    let mut grid = Vec::with_capacity(10);
    for i in 0..4 {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        grid.push(v);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut v = [0.0; 4];
            v[i] = 0.5;
            v[j] = 0.5;
            grid.push(v);
        }
    }
    grid
}

/// The posterior-CDF envelope at `phi0` over a grid of priors, with the
/// indices of the priors attaining each side (the source analysis only
/// conjectures which vertices are extremal, so we report rather than assume).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfEnvelope {
    pub bounds: ProbabilityBounds,
    pub argmin: usize,
    pub argmax: usize,
}

/// Min/max posterior CDF at `phi0` over the alpha grid.
pub fn linkage_idm_cdf_bounds(
    counts4: &CountVector,
    phi0: f64,
    alpha_grid: &[[f64; 4]],
    grid_size: usize,
) -> Result<CdfEnvelope> {
    if alpha_grid.is_empty() {
        return Err(Error::Usage("alpha grid must be non-empty".into()));
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let (mut argmin, mut argmax) = (0, 0);
    for (i, alpha) in alpha_grid.iter().enumerate() {
        let hyper = IdmHyper::new(alpha.to_vec(), 1.0)?;
        let dens = linkage_idm_posterior(counts4, &hyper, grid_size)?;
        let c = dens.cdf_at(phi0);
        if c < lower {
            lower = c;
            argmin = i;
        }
        if c > upper {
            upper = c;
            argmax = i;
        }
    }
    Ok(CdfEnvelope { bounds: ProbabilityBounds { lower, upper }, argmin, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsm::pqr_cell_leq;

    fn cv(counts: &[u64]) -> CountVector {
        CountVector::new(counts.to_vec()).unwrap()
    }

    #[test]
    fn bounds_single_observation() {
        let b = idm_cell_leq_bounds(&cv(&[1, 0, 0]), 0, 0.6, 1.0).unwrap();
        assert!((b.lower - 0.0).abs() < 1e-9);
        assert!((b.upper - 0.6).abs() < 1e-9);
    }

    #[test]
    fn bounds_polynomial_case() {
        let b = idm_cell_leq_bounds(&cv(&[2, 1, 1]), 0, 0.5, 1.0).unwrap();
        assert!((b.lower - 0.3125).abs() < 1e-9);
        assert!((b.upper - 0.6875).abs() < 1e-9);
    }

    #[test]
    fn bounds_at_one() {
        let b = idm_cell_leq_bounds(&cv(&[3, 2]), 0, 1.0, 1.0).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }

    #[test]
    fn bounds_match_ddsm_p_and_plausibility() {
        for counts in [vec![1, 0, 0], vec![2, 1, 1], vec![25, 3, 4, 7], vec![0, 0]] {
            let c = cv(&counts);
            for k in 0..c.k() {
                for i in 1..10 {
                    let t0 = i as f64 / 10.0;
                    let b = idm_cell_leq_bounds(&c, k, t0, 1.0).unwrap();
                    let t = pqr_cell_leq(&c, k, t0).unwrap();
                    assert!(
                        (b.lower - t.p).abs() < 1e-9 && (b.upper - (t.p + t.r)).abs() < 1e-9,
                        "counts={counts:?} k={k} t0={t0}: {b:?} vs {t:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn jeffreys_no_data_symmetric() {
        // I_0.5(1/2, 1/2) = 1/2 (arcsine law)
        let v = jeffreys_prob(&cv(&[0, 0]), 0, 0.5).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
    }

    #[test]
    fn jeffreys_against_analytic_beta() {
        // K=3, counts (1,0,0), k=0: Beta(1.5, 1.0) CDF is x^1.5
        let v = jeffreys_prob(&cv(&[1, 0, 0]), 0, 0.5).unwrap();
        assert!((v - 0.5f64.powf(1.5)).abs() < 1e-9, "v = {v}");
    }

    #[test]
    fn jeffreys_monotone_with_endpoints() {
        let c = cv(&[4, 1, 2]);
        let mut last = -1.0;
        for i in 0..=50 {
            let t0 = i as f64 / 50.0;
            let v = jeffreys_prob(&c, 0, t0).unwrap();
            assert!(v >= last - 1e-12);
            last = v;
        }
        assert_eq!(jeffreys_prob(&c, 0, 0.0).unwrap(), 0.0);
        assert_eq!(jeffreys_prob(&c, 0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn linkage_posterior_normalizes() {
        let hyper = IdmHyper::new(vec![0.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        let dens = linkage_idm_posterior(&cv(&[25, 3, 4, 7]), &hyper, 4001).unwrap();
        assert!(dens.density().iter().all(|d| d.is_finite()));
        let total = dens.cdf_at(1.0);
        assert!((total - 1.0).abs() < 1e-8, "total = {total}");
    }

    #[test]
    fn linkage_prior_is_bathtub_shaped() {
        let hyper = IdmHyper::new(vec![1.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        let dens = linkage_idm_posterior(&cv(&[0, 0, 0, 0]), &hyper, 4001).unwrap();
        let low = dens.density_at(0.01);
        let mid = dens.density_at(0.5);
        let high = dens.density_at(0.99);
        assert!(low > mid && high > mid, "{low} {mid} {high}");
    }

    #[test]
    fn linkage_mean_stable_under_refinement() {
        let hyper = IdmHyper::new(vec![0.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        let counts = cv(&[25, 3, 4, 7]);
        let coarse = linkage_idm_posterior(&counts, &hyper, 20_001).unwrap();
        let fine = linkage_idm_posterior(&counts, &hyper, 100_001).unwrap();
        assert!((coarse.mean() - fine.mean()).abs() < 1e-4);
    }

    #[test]
    fn linkage_cdf_stable_under_doubling() {
        let hyper = IdmHyper::new(vec![0.25, 0.25, 0.25, 0.25], 1.0).unwrap();
        let counts = cv(&[25, 3, 4, 7]);
        let a = linkage_idm_posterior(&counts, &hyper, 8001).unwrap();
        let b = linkage_idm_posterior(&counts, &hyper, 16001).unwrap();
        for i in 1..10 {
            let phi0 = i as f64 / 10.0;
            assert!((a.cdf_at(phi0) - b.cdf_at(phi0)).abs() < 1e-6);
        }
    }

    #[test]
    fn envelope_ordering_and_boundary() {
        let counts = cv(&[25, 3, 4, 7]);
        let grid = default_alpha_grid();
        assert_eq!(grid.len(), 10);
        for i in 1..99 {
            let phi0 = i as f64 / 99.0;
            let env = linkage_idm_cdf_bounds(&counts, phi0, &grid, 2001).unwrap();
            assert!(env.bounds.lower <= env.bounds.upper + 1e-12);
        }
        let at_one = linkage_idm_cdf_bounds(&counts, 1.0, &grid, 2001).unwrap();
        assert!((at_one.bounds.lower - 1.0).abs() < 1e-8);
        assert!((at_one.bounds.upper - 1.0).abs() < 1e-8);
    }

    #[test]
    fn envelope_brackets_interior_prior() {
        let counts = cv(&[25, 3, 4, 7]);
        let grid = default_alpha_grid();
        let interior = IdmHyper::new(vec![0.25, 0.25, 0.25, 0.25], 1.0).unwrap();
        let dens = linkage_idm_posterior(&counts, &interior, 2001).unwrap();
        for i in 1..10 {
            let phi0 = i as f64 / 10.0;
            let env = linkage_idm_cdf_bounds(&counts, phi0, &grid, 2001).unwrap();
            let c = dens.cdf_at(phi0);
            assert!(env.bounds.lower <= c + 1e-9 && c <= env.bounds.upper + 1e-9);
        }
    }

    #[test]
    fn hyper_validation() {
        assert!(IdmHyper::new(vec![0.5, 0.6], 1.0).is_err());
        assert!(IdmHyper::new(vec![-0.1, 0.5], 1.0).is_err());
        assert!(IdmHyper::new(vec![0.5, 0.5], 0.0).is_err());
        assert!(IdmHyper::new(vec![0.5, 0.5], 1.0).is_ok());
    }
}
