//! End-to-end acceptance suite. Each test prints one `criterion N PASS/FAIL`
//! line (visible with `--nocapture`) and asserts the documented tolerance.

use std::time::{Duration, Instant};

use dsmn::dsm::{
    aggregate_counts, pqr_cell_leq, pqr_cell_leq_mc, pqr_conditional_ratio,
    theorem1_empirical_check, CountVector, Partition,
};
use dsmn::idm::idm_cell_leq_bounds;
use dsmn::independence::{runtime_benchmark, BenchMethod};
use dsmn::linkage::acceptance_rate;
use dsmn::rng::{Seed, Stream};
use dsmn::simplex_dsm::{
    commonality_analytic, commonality_vacuous_mass, neutrality_lower_bound_check,
    pqr_cell_leq_simplex, pqr_conditional_ratio_simplex, ObservationList,
};
use dsmn::stats::{sample_dirichlet, ShapeVector, SimplexPoint};

fn cv(counts: &[u64]) -> CountVector {
    CountVector::new(counts.to_vec()).unwrap()
}

fn report(criterion: u32, description: &str, pass: bool) {
    let label = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion} {label}: {description}");
    assert!(pass, "criterion {criterion} failed: {description}");
}

#[test]
fn criterion_01_theorem1_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (i, counts) in [vec![1u64, 0, 0], vec![2, 1, 1], vec![25, 3, 4, 7]].iter().enumerate() {
        let rep = theorem1_empirical_check(&cv(counts), 100_000, Seed(201 + i as u64)).unwrap();
        worst = worst.max(rep.ks.iter().cloned().fold(0.0, f64::max));
    }
    let elapsed = start.elapsed();
    report(
        1,
        &format!("theorem-1 KS max {worst:.5} (< 0.01) in {elapsed:.2?} (< 30 s)"),
        worst < 0.01 && elapsed < Duration::from_secs(30),
    );
}

#[test]
fn criterion_02_trinomial_closed_form() {
    let counts = cv(&[2, 1, 1]);
    let exact = pqr_cell_leq(&counts, 0, 0.5).unwrap();
    let closed_ok = (exact.p - 0.3125).abs() < 1e-9
        && (exact.q - 0.3125).abs() < 1e-9
        && (exact.r - 0.375).abs() < 1e-9;
    let mc = pqr_cell_leq_mc(&counts, 0, 0.5, 1_000_000, Seed(202)).unwrap();
    let mc_ok = (mc.pqr.p - exact.p).abs() <= 3.0 * mc.se_p
        && (mc.pqr.q - exact.q).abs() <= 3.0 * mc.se_q;
    report(
        2,
        &format!(
            "closed form ({}, {}, {}) exact; MC gap p {:.5}, q {:.5} within 3 SE",
            exact.p,
            exact.q,
            exact.r,
            (mc.pqr.p - exact.p).abs(),
            (mc.pqr.q - exact.q).abs()
        ),
        closed_ok && mc_ok,
    );
}

#[test]
fn criterion_03_single_observation_row() {
    let counts = cv(&[1, 0, 0]);
    let mut leq_ok = true;
    for i in 1..=99u32 {
        let theta0 = i as f64 / 100.0;
        let pqr = pqr_cell_leq(&counts, 0, theta0).unwrap();
        leq_ok &= pqr.p.abs() < 1e-9 && (pqr.p + pqr.r - theta0).abs() < 1e-9;
    }
    let mut ratio_ok = true;
    for (j, r0) in [0.0625f64, 0.25, 1.0, 4.0, 16.0].iter().enumerate() {
        let s = pqr_conditional_ratio(&counts, *r0, 20_000, Seed(210 + j as u64)).unwrap();
        ratio_ok &= s.pqr.p == 0.0 && s.pqr.q == 0.0 && s.pqr.r == 1.0;
    }
    report(
        3,
        "N=(1,0,0): p = 0 and p+r = theta0 to 1e-9 on 99 grid points; ratio assertion (0,0,1)",
        leq_ok && ratio_ok,
    );
}

#[test]
fn criterion_04_idm_matches_ddsm() {
    let cases = [
        vec![2u64, 1, 1],
        vec![25, 3, 4, 7],
        vec![1, 0, 0],
        vec![3, 0, 2, 1, 4],
        vec![10, 1, 1],
    ];
    let mut worst = 0.0f64;
    for counts in &cases {
        let counts = cv(counts);
        for k in 0..3 {
            for i in 1..=9u32 {
                let theta0 = i as f64 / 10.0;
                let pqr = pqr_cell_leq(&counts, k, theta0).unwrap();
                let bounds = idm_cell_leq_bounds(&counts, k, theta0, 1.0).unwrap();
                worst = worst
                    .max((bounds.lower - pqr.p).abs())
                    .max((bounds.upper - (pqr.p + pqr.r)).abs());
            }
        }
    }
    report(
        4,
        &format!("IDM vs DDSM max gap {worst:.2e} over 5x3x9 grid (< 1e-9)"),
        worst < 1e-9,
    );
}

#[test]
fn criterion_05_linkage_acceptance_rates() {
    let t0 = Instant::now();
    let a = acceptance_rate(&cv(&[25, 3, 4, 7]), 1_000_000, Seed(220)).unwrap();
    let ta = t0.elapsed();
    let t1 = Instant::now();
    let b = acceptance_rate(&cv(&[25, 6, 2, 7]), 1_000_000, Seed(221)).unwrap();
    let tb = t1.elapsed();
    let pass = (a.rate - 0.042).abs() <= 0.005
        && (b.rate - 0.0160).abs() <= 0.003
        && ta < Duration::from_secs(10)
        && tb < Duration::from_secs(10);
    report(
        5,
        &format!(
            "rates {:.4} (0.042 +/- 0.005) in {ta:.2?}, {:.4} (0.0160 +/- 0.003) in {tb:.2?}",
            a.rate, b.rate
        ),
        pass,
    );
}

#[test]
fn criterion_06_linkage_throughput() {
    let start = Instant::now();
    let rep = acceptance_rate(&cv(&[25, 3, 4, 7]), 112_500, Seed(222)).unwrap();
    let elapsed = start.elapsed();
    report(
        6,
        &format!(
            "112,500 focal draws ({} accepted) in {elapsed:.2?} (< 5 s)",
            rep.accepted
        ),
        elapsed < Duration::from_secs(5),
    );
}

#[test]
fn criterion_07_theorem3_commonality() {
    let mut pass = true;
    let mut worst_sigma = 0.0f64;
    for (i, k) in [3usize, 4, 5].iter().enumerate() {
        for (j, p1) in [0.1f64, 0.5, 0.9].iter().enumerate() {
            let rep = commonality_vacuous_mass(*k, *p1, 100_000, Seed(230 + 3 * i as u64 + j as u64))
                .unwrap();
            let gap = (rep.empirical - rep.analytic).abs();
            pass &= gap <= 3.0 * rep.standard_error;
            worst_sigma = worst_sigma.max(gap / rep.standard_error.max(1e-300));
        }
    }
    pass &= (commonality_analytic(3, 0.5).unwrap() - 4.0 / 9.0).abs() < 1e-12;
    for k in [3usize, 5, 8] {
        let trend = ((k as f64 - 1.0).powi(2) * commonality_analytic(k, 1e-7).unwrap() - 1.0).abs();
        pass &= trend < 1e-3;
    }
    report(
        7,
        &format!("commonality worst deviation {worst_sigma:.2} SE (< 3); 4/9 and (K-1)^-2 limits hold"),
        pass,
    );
}

#[test]
fn criterion_08_theorem2_uniformity() {
    let mut config_stream = Stream::new(Seed(240));
    let mut worst = 0.0f64;
    for k in [2usize, 4, 6] {
        for rep in 0..5u64 {
            let theta_rest = if k == 2 {
                SimplexPoint::new(vec![1.0]).unwrap()
            } else {
                let alphas = ShapeVector::new(vec![1.0; k - 1]).unwrap();
                sample_dirichlet(&alphas, &mut config_stream).unwrap()
            };
            let ks =
                neutrality_lower_bound_check(&theta_rest, 100_000, Seed(241 + 10 * k as u64 + rep))
                    .unwrap();
            worst = worst.max(ks);
        }
    }
    report(
        8,
        &format!("neutrality lower-bound KS max {worst:.5} over K in {{2,4,6}} x 5 configs (< 0.01)"),
        worst < 0.01,
    );
}

#[test]
fn criterion_09_representation_invariance() {
    let mut stream = Stream::new(Seed(250));
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = 4 + (stream.uniform() * 5.0) as usize;
        let counts: Vec<u64> = (0..k).map(|_| (stream.uniform() * 21.0) as u64).collect();
        let counts = cv(&counts);
        let theta0 = 0.2 + 0.6 * stream.uniform();
        let mut rest: Vec<usize> = (1..k).collect();
        for i in (1..rest.len()).rev() {
            let j = ((stream.uniform() * (i + 1) as f64) as usize).min(i);
            rest.swap(i, j);
        }
        let cut = 1 + (stream.uniform() * (rest.len() - 1) as f64) as usize;
        let groups: Vec<Vec<usize>> = [vec![0usize], rest[..cut].to_vec(), rest[cut..].to_vec()]
            .into_iter()
            .filter(|g| !g.is_empty())
            .collect();
        let partition = Partition::new(groups, k).unwrap();
        let merged = aggregate_counts(&counts, &partition).unwrap();
        let original = pqr_cell_leq(&counts, 0, theta0).unwrap();
        let aggregated = pqr_cell_leq(&merged, 0, theta0).unwrap();
        worst = worst
            .max((original.p - aggregated.p).abs())
            .max((original.q - aggregated.q).abs())
            .max((original.r - aggregated.r).abs());
    }
    report(
        9,
        &format!("20 random mergers, max |pqr gap| {worst:.2e} (< 1e-9)"),
        worst < 1e-9,
    );
}

#[test]
fn criterion_10_simplex_qualitative() {
    // r dominance on N = (2,1,1)
    let obs = ObservationList::new(vec![0, 0, 1, 2], 3).unwrap();
    let counts = cv(&[2, 1, 1]);
    let mut dominance = true;
    for i in 0..21u32 {
        let theta0 = i as f64 / 20.0;
        let ddsm = pqr_cell_leq(&counts, 0, theta0).unwrap();
        let simp = pqr_cell_leq_simplex(&obs, 0, theta0, 4000, Seed(260 + i as u64)).unwrap();
        dominance &= simp.pqr.r >= ddsm.r - 3.0 * simp.se_r;
    }
    // non-vacuous conditional on N = (1,0,0)
    let single = ObservationList::new(vec![0], 3).unwrap();
    let mut non_vacuous = false;
    for (j, r0) in [0.25f64, 1.0, 4.0, 16.0].iter().enumerate() {
        let s = pqr_conditional_ratio_simplex(&single, *r0, 2000, Seed(280 + j as u64)).unwrap();
        non_vacuous |= s.pqr.r < 1.0 - 3.0 * s.se_r;
    }
    report(
        10,
        "simplex r >= ddsm r - 3 SE on 21-point grid; single-observation conditional non-vacuous",
        dominance && non_vacuous,
    );
}

#[test]
fn criterion_11_benchmark_scaling_and_refusal() {
    let rows = runtime_benchmark(&[BenchMethod::Ddsm], &[2, 8], 400, 10_000, 3, Seed(290)).unwrap();
    let t2 = rows[0].mean_seconds;
    let t8 = rows[1].mean_seconds;
    let scaling_ok = t8 < 10.0 * t2.max(1e-4);
    let refusal = runtime_benchmark(&[BenchMethod::Simplex], &[4], 10, 10, 1, Seed(291));
    let refusal_ok = matches!(
        &refusal,
        Err(dsmn::Error::Usage(msg)) if msg.contains("granularity")
    );
    report(
        11,
        &format!("ddsm K'=8 mean {t8:.4}s vs K'=2 mean {t2:.4}s (< 10x); simplex K'=4 refused"),
        scaling_ok && refusal_ok,
    );
}

#[test]
fn criterion_12_validator_suite() {
    let start = Instant::now();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_dsmn"))
        .args(["validate", "--all", "--seed", "17"])
        .output()
        .expect("validator binary runs");
    let elapsed = start.elapsed();
    let stderr = String::from_utf8_lossy(&output.stderr);
    report(
        12,
        &format!(
            "validate --all exit {:?} in {elapsed:.2?} (< 5 min); {} checks reported",
            output.status.code(),
            stderr.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count()
        ),
        output.status.success() && elapsed < Duration::from_secs(300),
    );
}
