//! Dempster's simplex-uniform posterior via acceptance-rejection sampling.
//!
//! Each observation X_i contributes a cone of constraints
//! `Z_{i,X_i} * theta_j - Z_{i,j} * theta_{X_i} <= 0` (j != X_i) built from a
//! row of i.i.d. Exponential(1) draws. A proposal is accepted when the
//! intersection of all cones with the probability simplex is non-empty,
//! decided by linear programming; assertions are then scored from the LP
//! extreme values of an objective over each accepted polytope (against iff
//! the minimum A > 0, for iff the maximum B <= 0).
//!
//! The module also carries the Monte-Carlo validators for the two structural
//! results about this posterior: the conditional lower bound of a cell
//! probability is Uniform(0,1) regardless of the remaining cell ratios
//! (neutrality), and the mass the conditional posterior leaves on the vacuous
//! interval has a closed form (commonality).

use serde::{Deserialize, Serialize};

use crate::dsm::{CountVector, SampledPqr};
use crate::error::{Error, Result};
use crate::ks::ks_distance;
use crate::lp::{self, Direction, LinearConstraint, LpProblem, LpResult};
use crate::rng::{Seed, Stream};
use crate::stats::{sample_exponential, SimplexPoint};

/// Cap on rejection-sampling proposals per requested accepted draw.
pub const MAX_PROPOSALS_PER_DRAW: u64 = 10_000_000;

/// Raw category observations, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationList {
    observations: Vec<usize>,
    n_categories: usize,
}

impl ObservationList {
    pub fn new(observations: Vec<usize>, n_categories: usize) -> Result<Self> {
        if n_categories < 2 {
            return Err(Error::Usage("need at least two categories".into()));
        }
        if observations.is_empty() {
            return Err(Error::Usage("need at least one observation".into()));
        }
        if observations.iter().any(|&x| x >= n_categories) {
            return Err(Error::Usage("observation category out of range".into()));
        }
        Ok(ObservationList { observations, n_categories })
    }

    pub fn observations(&self) -> &[usize] {
        &self.observations
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn counts(&self) -> CountVector {
        let mut c = vec![0u64; self.n_categories];
        for &x in &self.observations {
            c[x] += 1;
        }
        CountVector::new(c).expect("n_categories >= 2")
    }
}

/// An accepted focal polytope: the exponential draw matrix plus the derived
/// constraint list (guaranteed feasible on the simplex).
#[derive(Debug, Clone)]
pub struct PolytopeFocalSet {
    pub z: Vec<Vec<f64>>,
    pub constraints: Vec<LinearConstraint>,
}

fn cone_constraints(obs: &ObservationList, z: &[Vec<f64>]) -> Vec<LinearConstraint> {
    let k = obs.n_categories();
    let mut out = Vec::with_capacity(obs.n() * (k - 1));
    for (row, &x) in z.iter().zip(obs.observations()) {
        for j in 0..k {
            if j == x {
                continue;
            }
            let mut coeff = vec![0.0; k];
            coeff[j] = row[x];
            coeff[x] = -row[j];
            out.push(LinearConstraint::le(coeff, 0.0));
        }
    }
    out
}

fn propose(obs: &ObservationList, stream: &mut Stream) -> Vec<Vec<f64>> {
    (0..obs.n())
        .map(|_| (0..obs.n_categories()).map(|_| sample_exponential(stream)).collect())
        .collect()
}

/// One accepted focal polytope plus the number of rejected proposals that
/// preceded it.
pub fn sample_focal_polytope(
    obs: &ObservationList,
    seed: Seed,
) -> Result<(PolytopeFocalSet, u64)> {
    let mut stream = Stream::new(seed);
    let mut accepted = sample_accepted_from(obs, 1, &mut stream)?;
    let (polytope, rejections) = (accepted.sets.pop().unwrap(), accepted.proposals - 1);
    Ok((polytope, rejections))
}

/// A batch of accepted polytopes with the proposal count that produced them.
pub struct AcceptedBatch {
    pub sets: Vec<PolytopeFocalSet>,
    pub proposals: u64,
}

/// Draw until `n_accepted` feasible polytopes are collected.
pub fn sample_accepted(
    obs: &ObservationList,
    n_accepted: u64,
    seed: Seed,
) -> Result<AcceptedBatch> {
    let mut stream = Stream::new(seed);
    sample_accepted_from(obs, n_accepted, &mut stream)
}

fn sample_accepted_from(
    obs: &ObservationList,
    n_accepted: u64,
    stream: &mut Stream,
) -> Result<AcceptedBatch> {
    if n_accepted == 0 {
        return Err(Error::Usage("n_accepted must be positive".into()));
    }
    if obs.n_categories() > lp::MAX_DIMENSION {
        return Err(Error::Usage(format!(
            "simplex posterior limited to {} categories by the LP backend",
            lp::MAX_DIMENSION
        )));
    }
    let cap = MAX_PROPOSALS_PER_DRAW.saturating_mul(n_accepted);
    let mut sets = Vec::with_capacity(n_accepted as usize);
    let mut proposals = 0u64;
    while (sets.len() as u64) < n_accepted {
        if proposals >= cap {
            let rate = sets.len() as f64 / proposals as f64;
            return Err(Error::Resource(format!(
                "proposal cap {cap} reached with {} accepted (acceptance ~{rate:.3e})",
                sets.len()
            )));
        }
        proposals += 1;
        let z = propose(obs, stream);
        let constraints = cone_constraints(obs, &z);
        if lp::feasible(&constraints, obs.n_categories())? {
            sets.push(PolytopeFocalSet { z, constraints });
        }
    }
    Ok(AcceptedBatch { sets, proposals })
}

/// LP extreme values [A, B] of a linear objective over one polytope.
pub fn objective_extremes(
    polytope: &PolytopeFocalSet,
    objective: &[f64],
    extra: &[LinearConstraint],
) -> Result<(f64, f64)> {
    let dimension = objective.len();
    let mut constraints = polytope.constraints.clone();
    constraints.extend_from_slice(extra);
    let bound = |direction| -> Result<f64> {
        let res = lp::solve(&LpProblem {
            dimension,
            constraints: constraints.clone(),
            objective: objective.to_vec(),
            direction,
        })?;
        match res {
            LpResult::Optimal { value, .. } => Ok(value),
            LpResult::Infeasible => Err(Error::Degenerate(
                "accepted polytope became infeasible under extra constraints".into(),
            )),
        }
    };
    Ok((bound(Direction::Min)?, bound(Direction::Max)?))
}

/// Per-draw extreme values of theta_k over `n_accepted` accepted polytopes.
/// Useful for sweeping many theta0 thresholds over one sample.
pub fn cell_extremes(
    obs: &ObservationList,
    k: usize,
    n_accepted: u64,
    seed: Seed,
) -> Result<Vec<(f64, f64)>> {
    if k >= obs.n_categories() {
        return Err(Error::Usage(format!("cell index {k} out of range")));
    }
    let batch = sample_accepted(obs, n_accepted, seed)?;
    let mut objective = vec![0.0; obs.n_categories()];
    objective[k] = 1.0;
    batch
        .sets
        .iter()
        .map(|poly| objective_extremes(poly, &objective, &[]))
        .collect()
}

/// Classify [A, B] intervals against {value <= theta0}: for iff B <= theta0,
/// against iff A > theta0, with a small tolerance absorbing LP round-off
/// (extreme values can exceed exact vertex values by ~1e-12).
pub fn pqr_from_extremes(extremes: &[(f64, f64)], theta0: f64, n_draws: u64) -> SampledPqr {
    const EPS: f64 = 1e-9;
    let for_ct = extremes.iter().filter(|(_, b)| *b <= theta0 + EPS).count() as u64;
    let against_ct = extremes.iter().filter(|(a, _)| *a > theta0 + EPS).count() as u64;
    SampledPqr::from_counts(for_ct, against_ct, extremes.len() as u64, n_draws)
}

/// (p, q, r) for {theta_k <= theta0} under the simplex posterior.
pub fn pqr_cell_leq_simplex(
    obs: &ObservationList,
    k: usize,
    theta0: f64,
    n_accepted: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    if !(0.0..=1.0).contains(&theta0) {
        return Err(Error::Usage(format!("theta0={theta0} outside [0, 1]")));
    }
    let extremes = cell_extremes(obs, k, n_accepted, seed)?;
    Ok(pqr_from_extremes(&extremes, theta0, n_accepted))
}

/// (p, q, r) for {theta_2/theta_3 <= r0 | theta_1 = 0.5} (K = 3) under the
/// simplex posterior: intersect each accepted polytope with the slice
/// {theta_1 = 0.5} (skipping empty intersections) and classify the LP
/// extremes of f(theta) = theta_2 - r0 * theta_3.
pub fn pqr_conditional_ratio_simplex(
    obs: &ObservationList,
    r0: f64,
    n_accepted: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    if obs.n_categories() != 3 {
        return Err(Error::Usage("conditional ratio assertions need K = 3".into()));
    }
    if !(r0 >= 0.0) {
        return Err(Error::Usage(format!("r0={r0} must be non-negative")));
    }
    let batch = sample_accepted(obs, n_accepted, seed)?;
    let slice = LinearConstraint::eq(vec![1.0, 0.0, 0.0], 0.5);
    let objective = vec![0.0, 1.0, -r0];
    let mut basis = 0u64;
    let mut for_ct = 0u64;
    let mut against_ct = 0u64;
    for poly in &batch.sets {
        let mut with_slice = poly.constraints.clone();
        with_slice.push(slice.clone());
        if !lp::feasible(&with_slice, 3)? {
            continue;
        }
        basis += 1;
        let (a, b) = objective_extremes(poly, &objective, std::slice::from_ref(&slice))?;
        if b <= 0.0 {
            for_ct += 1;
        } else if a > 0.0 {
            against_ct += 1;
        }
    }
    if basis == 0 {
        return Err(Error::Degenerate(
            "no accepted polytope intersected the conditioning slice".into(),
        ));
    }
    Ok(SampledPqr::from_counts(for_ct, against_ct, basis, n_accepted))
}

/// Monte-Carlo check that the conditional lower bound of theta_1 given the
/// remaining cell ratios is Uniform(0,1) (neutrality). `theta_rest` holds
/// the renormalized probabilities of cells 2..K; the bound simplifies to
/// B = A/(1+A) with A = Z_1 / min_j (Z_j / theta_rest_j) over i.i.d.
/// Exponential(1) draws. Returns the KS distance to the uniform CDF.
pub fn neutrality_lower_bound_check(
    theta_rest: &SimplexPoint,
    n_draws: u64,
    seed: Seed,
) -> Result<f64> {
    if n_draws == 0 {
        return Err(Error::Usage("n_draws must be positive".into()));
    }
    let mut stream = Stream::new(seed);
    let mut bs = Vec::with_capacity(n_draws as usize);
    for _ in 0..n_draws {
        let z1 = sample_exponential(&mut stream);
        let mut min_ratio = f64::INFINITY;
        for &t in theta_rest.coords() {
            let z = sample_exponential(&mut stream);
            if t > 0.0 {
                min_ratio = min_ratio.min(z / t);
            }
        }
        let a = z1 / min_ratio;
        bs.push(a / (1.0 + a));
    }
    ks_distance(&bs, |x| x.clamp(0.0, 1.0))
}

/// Empirical and analytic mass that the conditional simplex posterior leaves
/// on the vacuous interval (commonality).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CommonalityReport {
    pub empirical: f64,
    pub analytic: f64,
    /// Binomial SE of the empirical ratio, conditional on the denominator
    /// count (the numerator event is contained in the denominator event).
    pub standard_error: f64,
    pub numerator_count: u64,
    pub denominator_count: u64,
}

/// Closed form for the conditional vacuous mass:
/// 1/(1+(K-2)(1-p1)) * 1/(1 + sum_{i=1..K-2} (1-p1)^i).
pub fn commonality_analytic(k: usize, p1: f64) -> Result<f64> {
    if k < 3 {
        return Err(Error::Usage("commonality check needs K >= 3".into()));
    }
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::Domain(format!("p1={p1} must lie in (0, 1)")));
    }
    let q = 1.0 - p1;
    let geo: f64 = (1..=k - 2).map(|i| q.powi(i as i32)).sum();
    Ok(1.0 / (1.0 + (k as f64 - 2.0) * q) / (1.0 + geo))
}

/// Estimate P(max_{j>=2} Z_1/Z_j <= p1/(1-p1)) / P(Z_1/sum(Z) <= p1) over
/// i.i.d. Exponential(1) draws and compare with [`commonality_analytic`].
pub fn commonality_vacuous_mass(
    k: usize,
    p1: f64,
    n_draws: u64,
    seed: Seed,
) -> Result<CommonalityReport> {
    if k < 3 {
        return Err(Error::Usage("commonality check needs K >= 3".into()));
    }
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::Domain(format!("p1={p1} must lie in (0, 1)")));
    }
    if n_draws == 0 {
        return Err(Error::Usage("n_draws must be positive".into()));
    }
    let analytic = commonality_analytic(k, p1)?;
    let odds = p1 / (1.0 - p1);
    let mut stream = Stream::new(seed);
    let mut num = 0u64;
    let mut den = 0u64;
    for _ in 0..n_draws {
        let z1 = sample_exponential(&mut stream);
        let mut min_rest = f64::INFINITY;
        let mut sum = z1;
        for _ in 1..k {
            let z = sample_exponential(&mut stream);
            min_rest = min_rest.min(z);
            sum += z;
        }
        if z1 / sum <= p1 {
            den += 1;
            if z1 <= odds * min_rest {
                num += 1;
            }
        }
    }
    if den == 0 {
        return Err(Error::Degenerate("denominator event never occurred".into()));
    }
    let empirical = num as f64 / den as f64;
    Ok(CommonalityReport {
        empirical,
        analytic,
        standard_error: (empirical * (1.0 - empirical) / den as f64).sqrt(),
        numerator_count: num,
        denominator_count: den,
    })
}
