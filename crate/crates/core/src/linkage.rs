//! The constrained 4-cell (genetic linkage) multinomial
//! `theta = ((2+phi)/4, (1-phi)/4, (1-phi)/4, phi/4)`.
//!
//! Pushing the Dirichlet random set through the parameterization turns each
//! focal set into an interval for phi: the four cell bounds theta_k >= Z_k
//! become `phi >= 4Z_1 - 2`, `phi <= 1 - 4Z_2`, `phi <= 1 - 4Z_3` and
//! `phi >= 4Z_4`. Draws whose interval is empty (or misses the domain
//! (0, 1) entirely) are conflicts and get rejected; inference conditions on
//! acceptance.

use serde::{Deserialize, Serialize};

use crate::dsm::{ddsm_draw, CountVector, DirichletFocalSet, SampledPqr};
use crate::error::{Error, Result};
use crate::rng::{run_chunked, Seed, Stream};

/// Total proposal cap when collecting accepted intervals.
pub const MAX_PROPOSALS: u64 = 100_000_000;

/// The phi interval induced by one Dirichlet focal draw. `lo`/`hi` are the
/// raw endpoints; `accepted` additionally requires the interval to meet the
/// domain (0, 1) (the parameterization needs 0 < phi < 1; intervals entirely
/// outside are treated as conflicts, which only matters on null sets for
/// positive counts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiInterval {
    pub lo: f64,
    pub hi: f64,
    pub accepted: bool,
}

impl PhiInterval {
    /// Endpoints clipped to the phi domain (0, 1); only meaningful when
    /// accepted.
    pub fn clipped(&self) -> (f64, f64) {
        (self.lo.max(0.0), self.hi.min(1.0))
    }
}

/// The interval for an explicit focal draw; exposed for direct checks.
pub fn interval_from_focal(fs: &DirichletFocalSet) -> Result<PhiInterval> {
    if fs.z.len() != 4 {
        return Err(Error::Usage("linkage model needs K = 4".into()));
    }
    let lo = (4.0 * fs.z[0] - 2.0).max(4.0 * fs.z[3]);
    let hi = (1.0 - 4.0 * fs.z[1]).min(1.0 - 4.0 * fs.z[2]);
    let accepted = lo <= hi && hi > 0.0 && lo < 1.0;
    Ok(PhiInterval { lo, hi, accepted })
}

/// One posterior interval draw.
pub fn sample_phi_interval(counts4: &CountVector, seed: Seed) -> Result<PhiInterval> {
    check_counts(counts4)?;
    let mut stream = Stream::new(seed);
    interval_from_focal(&ddsm_draw(counts4, &mut stream))
}

fn check_counts(counts4: &CountVector) -> Result<()> {
    if counts4.k() != 4 {
        return Err(Error::Usage("linkage model needs K = 4".into()));
    }
    Ok(())
}

/// Empirical acceptance (non-conflict) rate with binomial SE and a 95%
/// Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub proposals: u64,
    pub accepted: u64,
    pub rate: f64,
    pub standard_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

pub fn acceptance_rate(
    counts4: &CountVector,
    n_proposals: u64,
    seed: Seed,
) -> Result<AcceptanceReport> {
    check_counts(counts4)?;
    if n_proposals == 0 {
        return Err(Error::Usage("n_proposals must be positive".into()));
    }
    let tallies = run_chunked(seed, n_proposals, |_, count, mut stream| {
        let mut acc = 0u64;
        for _ in 0..count {
            let fs = ddsm_draw(counts4, &mut stream);
            if interval_from_focal(&fs).expect("K checked").accepted {
                acc += 1;
            }
        }
        acc
    });
    let accepted: u64 = tallies.into_iter().sum();
    let rate = accepted as f64 / n_proposals as f64;
    let n = n_proposals as f64;
    let z = 1.959_963_984_540_054; // 97.5% normal quantile
    let denom = 1.0 + z * z / n;
    let center = (rate + z * z / (2.0 * n)) / denom;
    let half = z * (rate * (1.0 - rate) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    Ok(AcceptanceReport {
        proposals: n_proposals,
        accepted,
        rate,
        standard_error: (rate * (1.0 - rate) / n).sqrt(),
        wilson_low: (center - half).max(0.0),
        wilson_high: (center + half).min(1.0),
    })
}

/// Collect `n_accepted` accepted intervals, clipped to (0, 1).
pub fn sample_accepted_intervals(
    counts4: &CountVector,
    n_accepted: u64,
    seed: Seed,
) -> Result<Vec<(f64, f64)>> {
    check_counts(counts4)?;
    if n_accepted == 0 {
        return Err(Error::Usage("n_accepted must be positive".into()));
    }
    let mut stream = Stream::new(seed);
    let mut out = Vec::with_capacity(n_accepted as usize);
    let mut proposals = 0u64;
    while (out.len() as u64) < n_accepted {
        if proposals >= MAX_PROPOSALS {
            return Err(Error::Resource(format!(
                "proposal cap {MAX_PROPOSALS} reached with {} accepted intervals",
                out.len()
            )));
        }
        proposals += 1;
        let iv = interval_from_focal(&ddsm_draw(counts4, &mut stream))?;
        if iv.accepted {
            out.push(iv.clipped());
        }
    }
    Ok(out)
}

/// Lower and upper CDF curves for phi over the grid: lower = fraction of
/// accepted intervals entirely at or below phi0 (evidence for
/// {phi <= phi0}), upper = fraction reaching down to phi0 (plausibility).
pub fn phi_cdf_envelope(
    counts4: &CountVector,
    phi_grid: &[f64],
    n_accepted: u64,
    seed: Seed,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let intervals = sample_accepted_intervals(counts4, n_accepted, seed)?;
    let n = intervals.len() as f64;
    let mut lower = Vec::with_capacity(phi_grid.len());
    let mut upper = Vec::with_capacity(phi_grid.len());
    for &phi0 in phi_grid {
        lower.push(intervals.iter().filter(|(_, hi)| *hi <= phi0).count() as f64 / n);
        upper.push(intervals.iter().filter(|(lo, _)| *lo <= phi0).count() as f64 / n);
    }
    Ok((lower, upper))
}

/// (p, q, r) for {phi <= phi0}.
pub fn pqr_phi_leq(
    counts4: &CountVector,
    phi0: f64,
    n_accepted: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    let intervals = sample_accepted_intervals(counts4, n_accepted, seed)?;
    let for_ct = intervals.iter().filter(|(_, hi)| *hi <= phi0).count() as u64;
    let against_ct = intervals.iter().filter(|(lo, _)| *lo > phi0).count() as u64;
    Ok(SampledPqr::from_counts(for_ct, against_ct, n_accepted, n_accepted))
}

/// (p, q, r) for the point assertion {phi = phi0}: p = 0, r = containment
/// fraction.
pub fn pqr_phi_point(
    counts4: &CountVector,
    phi0: f64,
    n_accepted: u64,
    seed: Seed,
) -> Result<SampledPqr> {
    let intervals = sample_accepted_intervals(counts4, n_accepted, seed)?;
    let contain = intervals
        .iter()
        .filter(|(lo, hi)| *lo <= phi0 && phi0 <= *hi)
        .count() as u64;
    Ok(SampledPqr::from_counts(0, n_accepted - contain, n_accepted, n_accepted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::regularized_incomplete_beta;

    fn cv(counts: &[u64]) -> CountVector {
        CountVector::new(counts.to_vec()).unwrap()
    }

    fn focal(z0: f64, z: [f64; 4]) -> DirichletFocalSet {
        DirichletFocalSet { z0, z: z.to_vec() }
    }

    #[test]
    fn interval_formula_conflict_case() {
        let iv = interval_from_focal(&focal(0.1, [0.5, 0.1, 0.1, 0.2])).unwrap();
        assert!((iv.lo - 0.8).abs() < 1e-12);
        assert!((iv.hi - 0.6).abs() < 1e-12);
        assert!(!iv.accepted);
    }

    #[test]
    fn interval_formula_accepted_case() {
        let iv = interval_from_focal(&focal(0.2, [0.6, 0.05, 0.05, 0.1])).unwrap();
        assert!((iv.lo - 0.4).abs() < 1e-12);
        assert!((iv.hi - 0.8).abs() < 1e-12);
        assert!(iv.accepted);
    }

    #[test]
    fn conflict_rule_matches_direct_feasibility_scan() {
        // endpoints of the interval formula vs brute-force scan of the four
        // cell constraints over a fine phi grid
        let counts = cv(&[2, 1, 1, 1]);
        let mut stream = Stream::new(Seed(80));
        let res = 10_000;
        for _ in 0..10_000 {
            let fs = ddsm_draw(&counts, &mut stream);
            let iv = interval_from_focal(&fs).unwrap();
            let mut scan_lo = f64::INFINITY;
            let mut scan_hi = f64::NEG_INFINITY;
            for i in 1..res {
                let phi = i as f64 / res as f64;
                let theta = [
                    (2.0 + phi) / 4.0,
                    (1.0 - phi) / 4.0,
                    (1.0 - phi) / 4.0,
                    phi / 4.0,
                ];
                if theta.iter().zip(&fs.z).all(|(t, z)| t >= z) {
                    scan_lo = scan_lo.min(phi);
                    scan_hi = scan_hi.max(phi);
                }
            }
            let scan_feasible = scan_lo.is_finite();
            assert_eq!(iv.accepted, scan_feasible, "{iv:?}");
            if scan_feasible {
                let (lo, hi) = iv.clipped();
                assert!((lo - scan_lo).abs() < 2.0 / res as f64, "{lo} vs {scan_lo}");
                assert!((hi - scan_hi).abs() < 2.0 / res as f64, "{hi} vs {scan_hi}");
            }
        }
    }

    #[test]
    fn acceptance_rate_reduced_counts() {
        let rep = acceptance_rate(&cv(&[25, 3, 4, 7]), 200_000, Seed(81)).unwrap();
        assert!((rep.rate - 0.042).abs() < 0.005, "rate = {}", rep.rate);
    }

    #[test]
    fn acceptance_rate_degenerate_counts_analytic() {
        // counts (0,0,0,n): Z_1..3 = 0, conflict iff 4 Z_4 > 1 with
        // Z_4 ~ Beta(n, 1), so acceptance = (1/4)^n
        let n = 2u64;
        let rep = acceptance_rate(&cv(&[0, 0, 0, n]), 200_000, Seed(82)).unwrap();
        let exact = regularized_incomplete_beta(0.25, n as f64, 1.0).unwrap();
        assert!((exact - 0.0625).abs() < 1e-12);
        assert!((rep.rate - exact).abs() < 3.0 * rep.standard_error, "{rep:?}");
    }

    #[test]
    fn cdf_envelope_ordering_and_monotonicity() {
        let grid: Vec<f64> = (0..=99).map(|i| i as f64 / 99.0).collect();
        let (lower, upper) = phi_cdf_envelope(&cv(&[25, 3, 4, 7]), &grid, 20_000, Seed(83)).unwrap();
        for i in 0..grid.len() {
            assert!(lower[i] <= upper[i] + 1e-12);
            if i > 0 {
                assert!(lower[i] >= lower[i - 1] - 1e-12);
                assert!(upper[i] >= upper[i - 1] - 1e-12);
            }
        }
        assert!((lower[99] - 1.0).abs() < 1e-12);
        assert!((upper[99] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_and_leq_share_the_r_curve() {
        let counts = cv(&[25, 3, 4, 7]);
        for i in [10, 40, 70] {
            let phi0 = i as f64 / 100.0;
            let leq = pqr_phi_leq(&counts, phi0, 5000, Seed(84)).unwrap();
            let point = pqr_phi_point(&counts, phi0, 5000, Seed(84)).unwrap();
            // same seed, same intervals: identical containment event
            assert!((leq.pqr.r - point.pqr.r).abs() < 1e-12);
        }
    }

    #[test]
    fn point_outside_every_interval() {
        // phi0 below every accepted interval for heavily phi-loaded counts
        let s = pqr_phi_point(&cv(&[0, 0, 0, 3]), 1e-12, 2000, Seed(85)).unwrap();
        assert_eq!(s.pqr.r, 0.0);
        assert_eq!(s.pqr.q, 1.0);
    }

    #[test]
    fn wilson_interval_brackets_rate() {
        let rep = acceptance_rate(&cv(&[25, 3, 4, 7]), 50_000, Seed(86)).unwrap();
        assert!(rep.wilson_low <= rep.rate && rep.rate <= rep.wilson_high);
        assert!(rep.wilson_high - rep.wilson_low < 0.01);
    }

    #[test]
    fn needs_four_categories() {
        assert!(sample_phi_interval(&cv(&[1, 1, 1]), Seed(0)).is_err());
    }
}
