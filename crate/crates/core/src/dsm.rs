//! The Dirichlet random-set posterior for multinomial data and the
//! (p, q, r) assertion engine.
//!
//! Observed counts `N = (N_1, ..., N_K)` induce the random sets
//! `{theta : theta_k >= Z_k for all k}` with `(Z_0, Z) ~ Dirichlet(1, N)`.
//! An assertion is scored by the mass of focal sets entirely inside it (`p`,
//! "for"), entirely outside it (`q`, "against"), and straddling it (`r`,
//! "don't know"). For single-cell assertions the Beta marginal laws
//! `Z_k ~ Beta(N_k, N_total+1-N_k)` and `Z_k+Z_0 ~ Beta(N_k+1, N_total-N_k)`
//! give closed forms; everything else is Monte Carlo.
//!
//! Category indices are 0-based throughout the library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::{effective_sample_size, ks_distance, ks_distance_weighted};
use crate::rng::{run_chunked, Seed, Stream};
use crate::special::{beta_cdf_extended, ln_gamma, regularized_incomplete_beta};
use crate::stats::{sample_beta, sample_exponential, sample_dirichlet, ShapeVector, SimplexPoint};

/// Multinomial cell counts. All-zero counts are allowed and represent "no
/// data" (the posterior is then vacuous).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Usage("need at least two categories".into()));
        }
        Ok(CountVector { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Posterior concentration (1, N_1, ..., N_K).
    fn posterior_shape(&self) -> ShapeVector {
        let mut alphas = Vec::with_capacity(self.counts.len() + 1);
        alphas.push(1.0);
        alphas.extend(self.counts.iter().map(|&n| n as f64));
        ShapeVector::new(alphas).expect("leading 1 keeps the shape valid")
    }

    fn check_cell(&self, k: usize) -> Result<()> {
        if k >= self.k() {
            return Err(Error::Usage(format!(
                "cell index {k} out of range for {} categories",
                self.k()
            )));
        }
        Ok(())
    }
}

/// One focal set `{theta : theta_k >= z_k}`; `z0 = 1 - sum(z)` is its size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletFocalSet {
    pub z0: f64,
    pub z: Vec<f64>,
}

impl DirichletFocalSet {
    /// True iff `theta` lies in the focal set.
    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.z.len() && self.z.iter().zip(theta).all(|(zk, tk)| tk >= zk)
    }
}

/// A "for / against / don't know" probability triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqrTriple {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl PqrTriple {
    pub fn plausibility(&self) -> f64 {
        self.p + self.r
    }
}

/// A Monte-Carlo (p, q, r) estimate with binomial standard errors. `basis`
/// is the number of draws the fractions are taken over (equals `n_draws`
/// except for conditioned assertions, which discard empty intersections).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledPqr {
    pub pqr: PqrTriple,
    pub se_p: f64,
    pub se_q: f64,
    pub se_r: f64,
    pub n_draws: u64,
    pub basis: u64,
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

impl SampledPqr {
    pub fn from_counts(for_ct: u64, against_ct: u64, basis: u64, n_draws: u64) -> SampledPqr {
        let p = for_ct as f64 / basis as f64;
        let q = against_ct as f64 / basis as f64;
        let r = 1.0 - p - q;
        SampledPqr {
            pqr: PqrTriple { p, q, r },
            se_p: binomial_se(p, basis),
            se_q: binomial_se(q, basis),
            se_r: binomial_se(r, basis),
            n_draws,
            basis,
        }
    }
}

/// An assertion about the multinomial parameter, in the forms the paper
/// treats. `theta1_fixed` values other than 0.5 are an extension; see
/// [`pqr_conditional_ratio_at`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Assertion {
    /// {theta_k <= theta0}
    CellLeq { k: usize, theta0: f64 },
    /// {theta_k = theta0}
    CellPoint { k: usize, theta0: f64 },
    /// {theta_2/theta_3 <= r0 | theta_1 = theta1_fixed} (K = 3 only)
    ConditionalRatio { r0: f64, theta1_fixed: f64 },
}

impl Assertion {
    pub fn validate(&self, n_categories: usize) -> Result<()> {
        match *self {
            Assertion::CellLeq { k, theta0 } | Assertion::CellPoint { k, theta0 } => {
                if k >= n_categories {
                    return Err(Error::Usage(format!("cell index {k} out of range")));
                }
                if !(0.0..=1.0).contains(&theta0) {
                    return Err(Error::Usage(format!("theta0={theta0} outside [0, 1]")));
                }
            }
            Assertion::ConditionalRatio { r0, theta1_fixed } => {
                if n_categories != 3 {
                    return Err(Error::Usage("conditional ratio assertions need K = 3".into()));
                }
                if !(r0 >= 0.0) {
                    return Err(Error::Usage(format!("r0={r0} must be non-negative")));
                }
                if !(theta1_fixed > 0.0 && theta1_fixed < 1.0) {
                    return Err(Error::Usage(format!(
                        "conditioning value {theta1_fixed} must lie in (0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One posterior draw `(Z_0, Z) ~ Dirichlet(1, N)` via the gamma route.
pub fn ddsm_draw(counts: &CountVector, stream: &mut Stream) -> DirichletFocalSet {
    let point = sample_dirichlet(&counts.posterior_shape(), stream)
        .expect("posterior shape is always valid");
    let coords = point.coords();
    DirichletFocalSet { z0: coords[0], z: coords[1..].to_vec() }
}

/// One posterior draw via exponential spacings: `N_total + 1` Exponential(1)
/// variates, normalized and block-summed, give Dirichlet(1, N) exactly (the
/// blocks are gamma variates with integer shapes). Cost is O(N_total)
/// independent of K, which matters when K is large and the counts are sparse
/// (the contingency-table tests). Bit-identical across thread counts but a
/// different stream layout than [`ddsm_draw`].
pub fn ddsm_draw_spacings(counts: &CountVector, stream: &mut Stream) -> DirichletFocalSet {
    let e0 = sample_exponential(stream);
    let mut total = e0;
    let mut z: Vec<f64> = counts
        .counts()
        .iter()
        .map(|&n| {
            let mut block = 0.0;
            for _ in 0..n {
                block += sample_exponential(stream);
            }
            total += block;
            block
        })
        .collect();
    for v in &mut z {
        *v /= total;
    }
    DirichletFocalSet { z0: e0 / total, z }
}

/// `n_draws` independent focal sets for the given counts.
pub fn ddsm_sample(counts: &CountVector, n_draws: u64, seed: Seed) -> Vec<DirichletFocalSet> {
    let mut stream = Stream::new(seed);
    (0..n_draws).map(|_| ddsm_draw(counts, &mut stream)).collect()
}

/// How the Theorem-1 validator produced its samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Theorem1Mode {
    /// Literal proof recipe: max-of-uniforms rejection sampling.
    Rejection { proposals: u64 },
    /// Importance sampling against the same target, used when the rejection
    /// acceptance probability is too small to be practical; `ess` is the
    /// effective sample size of the weights.
    Importance { proposals: u64, ess: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// KS distance per category between the recipe-constructed Z_k and the
    /// Dirichlet marginal Beta(N_k, N_total+1-N_k). Zero-count categories are
    /// exactly zero on both sides and reported as 0.
    pub ks: Vec<f64>,
    pub mode: Theorem1Mode,
}

/// Empirical check of the posterior construction: build `Z` by the
/// max-of-uniforms recipe (Z_k = max of the N_k uniforms landing in category
/// k, conditioned on sum(Z) <= 1) and compare each marginal against the
/// Dirichlet law it should follow.
///
/// The conditioning event has probability `prod(N_k!) / N_total!`, which
/// collapses for unbalanced counts; when the expected proposal count exceeds
/// a practical bound the check switches to importance sampling with
/// independent Beta(N_k, N_total+1-N_k) proposals. The weights use the exact
/// target density (`prod z_k^(N_k-1)` on the constrained region), so the
/// comparison stays independent of the sampler under test; the report says
/// which mode ran and, for importance sampling, the effective sample size
/// achieved (always >= n_draws on success).
pub fn theorem1_empirical_check(
    counts: &CountVector,
    n_draws: u64,
    seed: Seed,
) -> Result<Theorem1Report> {
    if counts.total() == 0 {
        return Err(Error::Usage("theorem-1 check needs at least one observation".into()));
    }
    if n_draws == 0 {
        return Err(Error::Usage("theorem-1 check needs n_draws >= 1".into()));
    }
    let n_tot = counts.total();
    let ln_accept = counts
        .counts()
        .iter()
        .map(|&n| ln_gamma(n as f64 + 1.0))
        .sum::<f64>()
        - ln_gamma(n_tot as f64 + 1.0);
    let expected_proposals = n_draws as f64 / ln_accept.exp();
    const MAX_DIRECT: f64 = 2e7;
    let mut stream = Stream::new(seed);

    if expected_proposals <= MAX_DIRECT {
        // literal recipe with rejection
        let cap = (expected_proposals * 20.0).max(1e6) as u64;
        let mut accepted: Vec<Vec<f64>> = vec![Vec::with_capacity(n_draws as usize); counts.k()];
        let mut got = 0u64;
        let mut proposals = 0u64;
        while got < n_draws {
            if proposals >= cap {
                return Err(Error::Resource(format!(
                    "theorem-1 rejection cap {cap} hit with {got}/{n_draws} accepted"
                )));
            }
            proposals += 1;
            let mut sum = 0.0;
            let mut z = Vec::with_capacity(counts.k());
            for &n in counts.counts() {
                let mut m = 0.0;
                for _ in 0..n {
                    m = f64::max(m, stream.uniform());
                }
                sum += m;
                z.push(m);
            }
            if sum <= 1.0 {
                for (store, v) in accepted.iter_mut().zip(&z) {
                    store.push(*v);
                }
                got += 1;
            }
        }
        let ks = theorem1_ks(counts, &accepted, None)?;
        return Ok(Theorem1Report { ks, mode: Theorem1Mode::Rejection { proposals } });
    }

    // importance sampling: propose each Z_k from its own target marginal
    // Beta(N_k, N_total+1-N_k); the density ratio on {sum <= 1} is
    // prod (1-z_k)^-(N_total-N_k) up to a constant.
    let batch = 4 * n_draws;
    let max_proposals = 200 * n_draws;
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); counts.k()];
    let mut log_weights: Vec<f64> = Vec::new();
    let mut proposals = 0u64;
    loop {
        for _ in 0..batch {
            proposals += 1;
            let mut sum = 0.0;
            let mut lw = 0.0;
            let mut z = Vec::with_capacity(counts.k());
            for &n in counts.counts() {
                let v = if n == 0 {
                    0.0
                } else {
                    sample_beta(n as f64, (n_tot + 1 - n) as f64, &mut stream)?
                };
                sum += v;
                lw -= (n_tot - n) as f64 * (1.0 - v).ln();
                z.push(v);
            }
            if sum <= 1.0 {
                for (store, v) in samples.iter_mut().zip(&z) {
                    store.push(*v);
                }
                log_weights.push(lw);
            }
        }
        let max_lw = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max_lw).exp()).collect();
        if effective_sample_size(&weights) >= n_draws as f64 {
            let ks = theorem1_ks(counts, &samples, Some(&weights))?;
            return Ok(Theorem1Report {
                ks,
                mode: Theorem1Mode::Importance {
                    proposals,
                    ess: effective_sample_size(&weights),
                },
            });
        }
        if proposals >= max_proposals {
            return Err(Error::Resource(format!(
                "theorem-1 importance sampler reached {proposals} proposals without \
                 effective sample size {n_draws}"
            )));
        }
    }
}

fn theorem1_ks(
    counts: &CountVector,
    samples: &[Vec<f64>],
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n_tot = counts.total();
    counts
        .counts()
        .iter()
        .zip(samples)
        .map(|(&n, xs)| {
            if n == 0 {
                // both sides are the point mass at zero
                return Ok(0.0);
            }
            let cdf = |x: f64| {
                regularized_incomplete_beta(x.clamp(0.0, 1.0), n as f64, (n_tot + 1 - n) as f64)
                    .unwrap_or(if x < 0.0 { 0.0 } else { 1.0 })
            };
            match weights {
                Some(w) => ks_distance_weighted(xs, w, cdf),
                None => ks_distance(xs, cdf),
            }
        })
        .collect()
}

/// Closed-form (p, q, r) for the assertion {theta_k <= theta0}.
///
/// Evidence for requires the whole focal set below theta0, i.e.
/// `Z_k + Z_0 <= theta0` (weak inequality, so theta0 = 1 gives p = 1);
/// evidence against requires `Z_k > theta0`. Zero-count cells use the
/// point-mass limits of the Beta laws, giving q = 0.
pub fn pqr_cell_leq(counts: &CountVector, k: usize, theta0: f64) -> Result<PqrTriple> {
    counts.check_cell(k)?;
    if !(0.0..=1.0).contains(&theta0) {
        return Err(Error::Usage(format!("theta0={theta0} outside [0, 1]")));
    }
    let n_k = counts.counts()[k] as f64;
    let n_rest = (counts.total() - counts.counts()[k]) as f64;
    // Z_k + Z_0 ~ Beta(N_k + 1, N_total - N_k)
    let p = beta_cdf_extended(theta0, n_k + 1.0, n_rest)?;
    // Z_k ~ Beta(N_k, N_total + 1 - N_k)
    let q = 1.0 - beta_cdf_extended(theta0, n_k, n_rest + 1.0)?;
    let r = (1.0 - p - q).max(0.0);
    Ok(PqrTriple { p, q, r })
}

/// Monte-Carlo cross-check of [`pqr_cell_leq`] by direct focal-set counting.
pub fn pqr_cell_leq_mc(
    counts: &CountVector,
    k: usize,
    theta0: f64,
    n_draws: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    counts.check_cell(k)?;
    if !(0.0..=1.0).contains(&theta0) {
        return Err(Error::Usage(format!("theta0={theta0} outside [0, 1]")));
    }
    if n_draws == 0 {
        return Err(Error::Usage("n_draws must be positive".into()));
    }
    let tallies = run_chunked(seed, n_draws, |_, count, mut stream| {
        let mut for_ct = 0u64;
        let mut against_ct = 0u64;
        for _ in 0..count {
            let fs = ddsm_draw(counts, &mut stream);
            if fs.z[k] + fs.z0 <= theta0 {
                for_ct += 1;
            } else if fs.z[k] > theta0 {
                against_ct += 1;
            }
        }
        (for_ct, against_ct)
    });
    let (for_ct, against_ct) = tallies
        .into_iter()
        .fold((0, 0), |(a, b), (x, y)| (a + x, b + y));
    Ok(SampledPqr::from_counts(for_ct, against_ct, n_draws, n_draws))
}

/// Monte-Carlo (p, q, r) for the point assertion {theta_k = theta0}: p = 0,
/// r is the containment fraction `Z_k <= theta0 <= Z_k + Z_0`.
pub fn pqr_cell_point(
    counts: &CountVector,
    k: usize,
    theta0: f64,
    n_draws: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    counts.check_cell(k)?;
    if !(0.0..=1.0).contains(&theta0) {
        return Err(Error::Usage(format!("theta0={theta0} outside [0, 1]")));
    }
    if n_draws == 0 {
        return Err(Error::Usage("n_draws must be positive".into()));
    }
    let tallies = run_chunked(seed, n_draws, |_, count, mut stream| {
        let mut contain_ct = 0u64;
        for _ in 0..count {
            let fs = ddsm_draw(counts, &mut stream);
            if fs.z[k] <= theta0 && theta0 <= fs.z[k] + fs.z0 {
                contain_ct += 1;
            }
        }
        contain_ct
    });
    let contain_ct: u64 = tallies.into_iter().sum();
    let against_ct = n_draws - contain_ct;
    Ok(SampledPqr::from_counts(0, against_ct, n_draws, n_draws))
}

/// Monte-Carlo (p, q, r) for {theta_2/theta_3 <= r0 | theta_1 = 0.5} with
/// K = 3, the paper's conditioning value.
pub fn pqr_conditional_ratio(
    counts: &CountVector,
    r0: f64,
    n_draws: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    pqr_conditional_ratio_at(counts, r0, 0.5, n_draws, seed)
}

/// General conditioning value t in (0, 1); only t = 0.5 is grounded in the
/// source analysis, the rest extends the same geometry: the focal set meets
/// the slice {theta_1 = t} iff `Z_1 < t < Z_0 + Z_1`; on the slice the
/// assertion reduces to `theta_3 >= (1-t)/(1+r0)`, counted for when
/// `Z_3 >= threshold` and against when `Z_2 + (1-t) <= threshold`.
pub fn pqr_conditional_ratio_at(
    counts: &CountVector,
    r0: f64,
    t: f64,
    n_draws: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    Assertion::ConditionalRatio { r0, theta1_fixed: t }.validate(counts.k())?;
    if n_draws == 0 {
        return Err(Error::Usage("n_draws must be positive".into()));
    }
    let threshold = (1.0 - t) / (1.0 + r0);
    let tallies = run_chunked(seed, n_draws, |_, count, mut stream| {
        let mut basis = 0u64;
        let mut for_ct = 0u64;
        let mut against_ct = 0u64;
        for _ in 0..count {
            let fs = ddsm_draw(counts, &mut stream);
            if !(fs.z[0] < t && t < fs.z0 + fs.z[0]) {
                continue; // empty intersection with the slice
            }
            basis += 1;
            if fs.z[2] >= threshold {
                for_ct += 1;
            } else if fs.z[1] + (1.0 - t) <= threshold {
                against_ct += 1;
            }
        }
        (basis, for_ct, against_ct)
    });
    let (basis, for_ct, against_ct) = tallies
        .into_iter()
        .fold((0, 0, 0), |(a, b, c), (x, y, z)| (a + x, b + y, c + z));
    if basis == 0 {
        return Err(Error::Degenerate(format!(
            "no focal set intersected the conditioning slice theta_1 = {t} in {n_draws} draws"
        )));
    }
    Ok(SampledPqr::from_counts(for_ct, against_ct, basis, n_draws))
}

/// A focal set of the interval posterior for a single observation `X = x`:
/// `{theta : sum_(j<x) theta_j <= u < sum_(j<=x) theta_j}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalFocal {
    pub x: usize,
    pub u: f64,
    pub n_categories: usize,
}

/// Build the symbolic interval focal set; pedagogical output.
pub fn interval_dsm_focal(x: usize, u: f64, n_categories: usize) -> Result<IntervalFocal> {
    if n_categories < 2 || x >= n_categories {
        return Err(Error::Usage(format!(
            "category {x} out of range for {n_categories} categories"
        )));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Usage(format!("u={u} outside [0, 1)")));
    }
    Ok(IntervalFocal { x, u, n_categories })
}

impl IntervalFocal {
    pub fn contains(&self, theta: &SimplexPoint) -> Result<bool> {
        if theta.dim() != self.n_categories {
            return Err(Error::Usage("dimension mismatch".into()));
        }
        let below: f64 = theta.coords()[..self.x].iter().sum();
        Ok(below <= self.u && self.u < below + theta.coords()[self.x])
    }
}

/// Pushforward of `u` under the interval-relocation map Q determined by
/// `theta` and a permutation `pi` that lists the categories in their new
/// order, with `pi[0] = x`. Partition [0,1) into consecutive intervals of
/// widths theta in original category order; Q translates each interval to
/// its position in the pi order. Bijective on [0,1) and measure-preserving,
/// and u falls in category x's original interval iff Q(u) < theta_x.
pub fn permutation_pushforward(
    theta: &SimplexPoint,
    pi: &[usize],
    x: usize,
    u: f64,
) -> Result<f64> {
    let k = theta.dim();
    if pi.len() != k {
        return Err(Error::Usage("permutation length must match dimension".into()));
    }
    let mut seen = vec![false; k];
    for &c in pi {
        if c >= k || seen[c] {
            return Err(Error::Usage("not a permutation".into()));
        }
        seen[c] = true;
    }
    if pi[0] != x {
        return Err(Error::Usage(format!("permutation must place category {x} first")));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Usage(format!("u={u} outside [0, 1)")));
    }
    // locate u's category in original order
    let coords = theta.coords();
    let mut start = 0.0;
    let mut cat = k - 1;
    for (j, &w) in coords.iter().enumerate() {
        if u < start + w || j == k - 1 {
            cat = j;
            break;
        }
        start += w;
    }
    // new start = total width of categories placed before `cat` in pi order
    let mut new_start = 0.0;
    for &c in pi {
        if c == cat {
            break;
        }
        new_start += coords[c];
    }
    Ok(new_start + (u - start))
}

/// A partition of the categories 0..K into disjoint non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
    n_categories: usize,
}

impl Partition {
    pub fn new(groups: Vec<Vec<usize>>, n_categories: usize) -> Result<Self> {
        let mut seen = vec![false; n_categories];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::Usage("partition groups must be non-empty".into()));
            }
            for &i in g {
                if i >= n_categories || seen[i] {
                    return Err(Error::Usage(
                        "partition groups must be disjoint subsets of the categories".into(),
                    ));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Usage("partition must cover every category".into()));
        }
        Ok(Partition { groups, n_categories })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Index of the group containing category `k`.
    pub fn group_of(&self, k: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&k))
    }
}

/// Group-summed counts.
pub fn aggregate_counts(counts: &CountVector, partition: &Partition) -> Result<CountVector> {
    if partition.n_categories != counts.k() {
        return Err(Error::Usage("partition does not match the count vector".into()));
    }
    if partition.groups.len() < 2 {
        return Err(Error::Usage("aggregated counts need at least two groups".into()));
    }
    let sums = partition
        .groups
        .iter()
        .map(|g| g.iter().map(|&i| counts.counts()[i]).sum())
        .collect();
    CountVector::new(sums)
}
