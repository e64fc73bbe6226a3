//! Timing comparison of parameter composition against point-based solvers
//! on identical random problems.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CorrespondenceSet, Homography3, SquareConfig};
use crate::kernel::KernelParams;
use crate::similarity::SimilarityParams;
use crate::sks::{compose_sks, dlt_four_point, sks_four_point, HomographyParams8};

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub work: &'static str,
    pub median_ns_per_solve: f64,
    pub min_ns_per_solve: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub trials: usize,
    pub runs: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    /// DLT median time over compose median time.
    pub dlt_over_compose: f64,
    pub max_distance_compose_vs_dlt: f64,
    pub max_distance_sks_vs_dlt: f64,
}

impl BenchReport {
    pub fn row(&self, method: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<16} {:<36} {:>14} {:>14}\n",
            "method", "work", "median_ns", "min_ns"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<16} {:<36} {:>14.1} {:>14.1}\n",
                r.method, r.work, r.median_ns_per_solve, r.min_ns_per_solve
            ));
        }
        out.push_str(&format!(
            "trials={} runs={} seed={}\n",
            self.trials, self.runs, self.seed
        ));
        out.push_str(&format!("dlt/compose time ratio: {:.2}\n", self.dlt_over_compose));
        out.push_str(&format!(
            "max projective distance compose vs dlt: {:.3e}\n",
            self.max_distance_compose_vs_dlt
        ));
        out.push_str(&format!(
            "max projective distance sks vs dlt: {:.3e}\n",
            self.max_distance_sks_vs_dlt
        ));
        out
    }
}

pub struct Problem {
    pub params: HomographyParams8,
    pub correspondences: CorrespondenceSet,
}

/// Random parameter draws on a 128×128 frame with comfortable kernel
/// margins, plus the corner correspondences they induce.
pub fn random_problems(trials: usize, seed: u64) -> Result<(SquareConfig, Vec<Problem>)> {
    let cfg = SquareConfig::for_image(128.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut problems = Vec::with_capacity(trials);
    while problems.len() < trials {
        let mut d = || rng.random_range(-0.25..0.25);
        let sim = SimilarityParams::new(d(), d(), 64.0 * d(), 64.0 * d());
        let ker = KernelParams::new(d(), d(), d(), d());
        if ker.p_denominator().abs() < 0.1 || ker.q_denominator().abs() < 0.1 {
            continue;
        }
        let params = HomographyParams8::new(sim, ker);
        let h = compose_sks(&params, &cfg)?;
        let correspondences = CorrespondenceSet::from_homography(&h, &cfg.corners())?;
        problems.push(Problem {
            params,
            correspondences,
        });
    }
    Ok((cfg, problems))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_runs<F: FnMut() -> Result<()>>(runs: usize, per_run: usize, mut f: F) -> Result<(f64, f64)> {
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        f()?;
        let ns = start.elapsed().as_nanos() as f64 / per_run as f64;
        samples.push(ns.max(f64::MIN_POSITIVE));
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((median(&mut samples), min))
}

/// Times `compose_sks`, `sks_four_point` and `dlt_four_point` over the same
/// problems, `runs` times each, and records the worst disagreement.
pub fn run_bench(trials: usize, runs: usize, seed: u64) -> Result<BenchReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    let (cfg, problems) = random_problems(trials, seed)?;

    let mut max_compose = 0.0f64;
    let mut max_sks = 0.0f64;
    for p in &problems {
        let composed = compose_sks(&p.params, &cfg)?;
        let dlt = dlt_four_point(&p.correspondences)?;
        let sks = sks_four_point(&p.correspondences)?;
        max_compose = max_compose.max(composed.projective_distance(&dlt));
        max_sks = max_sks.max(sks.projective_distance(&dlt));
    }

    let run_all = |f: fn(&Problem, &SquareConfig) -> Result<Homography3>| {
        let problems = &problems;
        let cfg = &cfg;
        move || -> Result<()> {
            for p in problems {
                black_box(f(black_box(p), cfg)?);
            }
            Ok(())
        }
    };
    let compose = time_runs(runs, trials, run_all(|p, cfg| compose_sks(&p.params, cfg)))?;
    let sks = time_runs(runs, trials, run_all(|p, _| sks_four_point(&p.correspondences)))?;
    let dlt = time_runs(runs, trials, run_all(|p, _| dlt_four_point(&p.correspondences)))?;

    let rows = vec![
        BenchRow {
            method: "compose_sks",
            work: "six 3x3 products, no linear solve",
            median_ns_per_solve: compose.0,
            min_ns_per_solve: compose.1,
        },
        BenchRow {
            method: "sks_four_point",
            work: "two similarities + 4x4 LU solve",
            median_ns_per_solve: sks.0,
            min_ns_per_solve: sks.1,
        },
        BenchRow {
            method: "dlt_four_point",
            work: "conditioning + 9x9 SVD",
            median_ns_per_solve: dlt.0,
            min_ns_per_solve: dlt.1,
        },
    ];
    Ok(BenchReport {
        trials,
        runs,
        seed,
        rows,
        dlt_over_compose: dlt.0 / compose.0,
        max_distance_compose_vs_dlt: max_compose,
        max_distance_sks_vs_dlt: max_sks,
    })
}
