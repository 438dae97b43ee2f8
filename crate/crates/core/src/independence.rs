//! Testing independence of paired data on the unit square.
//!
//! Pairs are binned into a KxK contingency table; under independence with
//! uniform marginals the flattened cell probabilities sit at the uniform
//! point (1/K^2, ..., 1/K^2). The test statistic is the Dirichlet-DSM
//! plausibility of the near-uniform region {theta : max theta_cell <= 1/K},
//! which contains the uniform point; a focal set meets that region exactly
//! when every lower bound satisfies `Z_cell <= 1/K`, so the plausibility is
//! a plain containment fraction. Independence is rejected when it falls
//! below the level.
//!
//! The concrete region ("sufficiently far from uniform" made precise) is
//! this artifact's choice. The tighter point assertion {theta = uniform}
//! is not usable here: its plausibility requires all K^2 lower bounds to
//! fit under 1/K^2 with only the slack Z_0 ~ Beta(1, n) to spare, so it
//! collapses to zero for moderate n even when the null is true, rejecting
//! everything. The 1/K box keeps the null comfortably plausible while
//! strong dependence (which forces some cell probability past 1/K) still
//! drives the plausibility to zero.
//!
//! Posterior draws here use the exponential-spacings route, whose cost is
//! O(n) in the sample size rather than O(K^2) in the table size, so runtime
//! grows only mildly with the granularity.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dsm::{ddsm_draw_spacings, CountVector};
use crate::error::{Error, Result};
use crate::lp::{feasible, LinearConstraint};
use crate::rng::{run_chunked, Seed, Stream};
use crate::simplex_dsm::{sample_accepted, ObservationList};

/// Paired observations on the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pairs: Vec<(f64, f64)>,
}

impl PairedSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs
            .iter()
            .any(|(x, y)| !(0.0..=1.0).contains(x) || !(0.0..=1.0).contains(y))
        {
            return Err(Error::Usage("pair coordinates must lie in [0, 1]".into()));
        }
        Ok(PairedSample { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A KxK table of bin counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    granularity: usize,
    cells: Vec<Vec<u64>>,
    n: u64,
}

impl ContingencyTable {
    pub fn granularity(&self) -> usize {
        self.granularity
    }

    pub fn cells(&self) -> &[Vec<u64>] {
        &self.cells
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Row-major flattening into a K^2-category count vector.
    pub fn flatten(&self) -> CountVector {
        CountVector::new(self.cells.iter().flatten().copied().collect())
            .expect("K >= 2 gives at least 4 cells")
    }
}

fn bin(coord: f64, granularity: usize) -> usize {
    // half-open bins [i/K, (i+1)/K); 1.0 goes to the top bin
    ((coord * granularity as f64) as usize).min(granularity - 1)
}

/// Bin a paired sample at the given granularity.
pub fn discretize(sample: &PairedSample, granularity: usize) -> Result<ContingencyTable> {
    if granularity < 2 {
        return Err(Error::Usage("granularity must be at least 2".into()));
    }
    let mut cells = vec![vec![0u64; granularity]; granularity];
    for &(x, y) in sample.pairs() {
        cells[bin(x, granularity)][bin(y, granularity)] += 1;
    }
    Ok(ContingencyTable { granularity, cells, n: sample.len() as u64 })
}

/// The same binning, keeping per-observation cell indices (row-major) for
/// the simplex-posterior path.
pub fn discretize_observations(
    sample: &PairedSample,
    granularity: usize,
) -> Result<ObservationList> {
    if granularity < 2 {
        return Err(Error::Usage("granularity must be at least 2".into()));
    }
    if sample.is_empty() {
        return Err(Error::Usage("simplex path needs at least one observation".into()));
    }
    let obs = sample
        .pairs()
        .iter()
        .map(|&(x, y)| bin(x, granularity) * granularity + bin(y, granularity))
        .collect();
    ObservationList::new(obs, granularity * granularity)
}

/// Outcome of the plausibility test of uniformity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformityTest {
    /// Plausibility of the near-uniform region {theta : max theta_cell <=
    /// 1/K}: fraction of focal sets meeting it.
    pub r: f64,
    pub standard_error: f64,
    pub level: f64,
    pub reject: bool,
    pub n_draws: u64,
}

/// Dirichlet-DSM plausibility of the near-uniform region for a contingency
/// table. A focal set {theta : theta_cell >= Z_cell} meets the region
/// {theta : max theta_cell <= 1/K} exactly when every Z_cell <= 1/K (the
/// box corner then dominates Z, and the K^2 upper bounds leave room for a
/// full unit of mass).
pub fn uniformity_plausibility(
    table: &ContingencyTable,
    n_draws: u64,
    level: f64,
    seed: Seed,
) -> Result<UniformityTest> {
    if n_draws == 0 {
        return Err(Error::Usage("n_draws must be positive".into()));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::Usage(format!("level={level} outside [0, 1]")));
    }
    let counts = table.flatten();
    let bound = 1.0 / table.granularity() as f64;
    let tallies = run_chunked(seed, n_draws, |_, count, mut stream| {
        let mut contain = 0u64;
        for _ in 0..count {
            let fs = ddsm_draw_spacings(&counts, &mut stream);
            if fs.z.iter().all(|z| *z <= bound) {
                contain += 1;
            }
        }
        contain
    });
    let contain: u64 = tallies.into_iter().sum();
    let r = contain as f64 / n_draws as f64;
    Ok(UniformityTest {
        r,
        standard_error: (r * (1.0 - r) / n_draws as f64).sqrt(),
        level,
        reject: r < level,
        n_draws,
    })
}

/// Simplex-posterior counterpart: fraction of accepted focal polytopes
/// meeting the near-uniform region, decided by linear-program feasibility
/// of the cone constraints together with the K^2 cell caps theta_cell <=
/// 1/K. Acceptance collapses quickly in the sample size, so this path is
/// practical only for very small samples.
pub fn uniformity_plausibility_simplex(
    obs: &ObservationList,
    n_accepted: u64,
    level: f64,
    seed: Seed,
) -> Result<UniformityTest> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::Usage(format!("level={level} outside [0, 1]")));
    }
    let k_total = obs.n_categories();
    let granularity = (k_total as f64).sqrt().round() as usize;
    if granularity * granularity != k_total {
        return Err(Error::Usage(
            "observation list does not come from a square table".into(),
        ));
    }
    let bound = 1.0 / granularity as f64;
    let caps: Vec<LinearConstraint> = (0..k_total)
        .map(|j| {
            let mut coeff = vec![0.0; k_total];
            coeff[j] = 1.0;
            LinearConstraint::le(coeff, bound)
        })
        .collect();
    let batch = sample_accepted(obs, n_accepted, seed)?;
    let mut contain = 0u64;
    for poly in &batch.sets {
        let mut cons = poly.constraints.clone();
        cons.extend(caps.iter().cloned());
        if feasible(&cons, k_total)? {
            contain += 1;
        }
    }
    let r = contain as f64 / n_accepted as f64;
    Ok(UniformityTest {
        r,
        standard_error: (r * (1.0 - r) / n_accepted as f64).sqrt(),
        level,
        reject: r < level,
        n_draws: n_accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchMethod {
    Ddsm,
    Simplex,
}

impl BenchMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::Ddsm => "ddsm",
            BenchMethod::Simplex => "simplex",
        }
    }
}

/// One row of the runtime table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: String,
    pub granularity: usize,
    pub n: u64,
    pub n_draws: u64,
    pub repetitions: u32,
    pub mean_seconds: f64,
    /// Absent when repetitions = 1.
    pub sd_seconds: Option<f64>,
}

/// Wall-clock benchmark of the independence test across granularities,
/// single-threaded by contract (one rayon worker). Synthetic uniform pairs
/// are drawn per repetition; only the test itself is timed. The simplex
/// method is refused above granularity 3, where its rejection sampler is
/// hopeless (the reference experiments put it past two days of compute).
pub fn runtime_benchmark(
    methods: &[BenchMethod],
    granularities: &[usize],
    n: u64,
    n_draws: u64,
    repetitions: u32,
    seed: Seed,
) -> Result<Vec<BenchmarkRow>> {
    if repetitions == 0 {
        return Err(Error::Usage("repetitions must be positive".into()));
    }
    for &g in granularities {
        if g < 2 {
            return Err(Error::Usage("granularity must be at least 2".into()));
        }
    }
    if methods.contains(&BenchMethod::Simplex) {
        if let Some(&g) = granularities.iter().find(|&&g| g > 3) {
            return Err(Error::Usage(format!(
                "simplex method refused for granularity {g}: the acceptance-rejection \
                 sampler is intractable beyond granularity 3"
            )));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Resource(format!("could not build benchmark pool: {e}")))?;
    let mut rows = Vec::new();
    for &method in methods {
        for &g in granularities {
            let mut times = Vec::with_capacity(repetitions as usize);
            for rep in 0..repetitions {
                let mut stream = Stream::substream(seed, (rep as u64) + 1);
                let pairs: Vec<(f64, f64)> =
                    (0..n).map(|_| (stream.uniform(), stream.uniform())).collect();
                let sample = PairedSample::new(pairs)?;
                let start = Instant::now();
                pool.install(|| -> Result<()> {
                    match method {
                        BenchMethod::Ddsm => {
                            let table = discretize(&sample, g)?;
                            uniformity_plausibility(&table, n_draws, 0.05, seed)?;
                        }
                        BenchMethod::Simplex => {
                            let obs = discretize_observations(&sample, g)?;
                            uniformity_plausibility_simplex(&obs, n_draws, 0.05, seed)?;
                        }
                    }
                    Ok(())
                })?;
                times.push(start.elapsed().as_secs_f64());
            }
            let mean = times.iter().sum::<f64>() / times.len() as f64;
            let sd = if times.len() > 1 {
                let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>()
                    / (times.len() - 1) as f64;
                Some(var.sqrt())
            } else {
                None
            };
            rows.push(BenchmarkRow {
                method: method.name().to_string(),
                granularity: g,
                n,
                n_draws,
                repetitions,
                mean_seconds: mean,
                sd_seconds: sd,
            });
        }
    }
    Ok(rows)
}

/// Read paired samples from a two-column CSV; a non-numeric first row is
/// treated as a header.
pub fn read_pairs_csv<R: std::io::Read>(reader: R) -> Result<PairedSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(reader);
    let mut pairs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Usage(format!("CSV parse error: {e}")))?;
        if record.len() < 2 {
            return Err(Error::Usage(format!("CSV row {i} needs two columns")));
        }
        let x = record[0].trim().parse::<f64>();
        let y = record[1].trim().parse::<f64>();
        match (x, y) {
            (Ok(x), Ok(y)) => pairs.push((x, y)),
            _ if i == 0 => continue, // header row
            _ => {
                return Err(Error::Usage(format!(
                    "CSV row {i} is not a pair of numbers"
                )))
            }
        }
    }
    PairedSample::new(pairs)
}
