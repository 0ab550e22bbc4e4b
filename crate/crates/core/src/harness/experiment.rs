use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trial::{run_trial, TrialConfig, TrialReport};
use crate::construction::{count_centers_hit, ConstructionError};
use crate::rng::{stream, Purpose};
use crate::torus::{coord_from_f64, lift_euclidean_norm_sq, shell_contains, TorusPoint};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissConfig {
    pub dim: usize,
    pub k: u64,
    pub y: usize,
    pub width: f64,
    pub rho: f64,
    pub draws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissReport {
    pub draws: usize,
    pub misses: usize,
    pub empirical: f64,
    pub predicted: f64,
    /// Binomial standard deviation of the empirical fraction.
    pub sigma: f64,
    pub within_3_sigma: bool,
    /// Planted centers found within `rho/5` of the planted AP.
    pub planted_hits: usize,
}

/// `(1 - 1/(K+1))^Y`.
pub fn predicted_miss_probability(k: u64, y: usize) -> f64 {
    (1.0 - 1.0 / (k as f64 + 1.0)).powi(y as i32)
}

/// Plants `Y` centers next to the orbit points of the AP `1, 2, ..., Y`, each
/// at distance below `min(rho/5, (K+1)·width)`, then redraws the radius
/// indices `draws` times and counts draws in which no planted point falls in
/// its center's annulus.
pub fn run_miss_experiment(cfg: &MissConfig, seed: u64) -> MissReport {
    let mut rng = stream(seed, Purpose::Planted, 0);
    let theta = TorusPoint::random(cfg.dim, &mut rng);
    let reach = (cfg.rho / 5.0).min((cfg.k as f64 + 1.0) * cfg.width);
    let mut orbit = Vec::with_capacity(cfg.y);
    let mut centers = Vec::with_capacity(cfg.y);
    for j in 0..cfg.y {
        let p = theta.scale(j as u64 + 1);
        let dir: Vec<f64> = (0..cfg.dim).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let r = reach * 0.999 * rng.gen::<f64>();
        let offset = TorusPoint::new(dir.iter().map(|x| coord_from_f64(x / norm * r)).collect());
        centers.push(&p + &offset);
        orbit.push(p);
    }
    let planted_hits = count_centers_hit(&theta, 1, 1, cfg.y as u64, &centers, cfg.rho / 5.0).len();
    let dist_sq: Vec<f64> = orbit
        .iter()
        .zip(&centers)
        .map(|(p, c)| lift_euclidean_norm_sq(p, c))
        .collect();
    let misses = (0..cfg.draws)
        .into_par_iter()
        .filter(|&i| {
            let mut r = stream(seed, Purpose::Planted, i as u64 + 1);
            !dist_sq
                .iter()
                .any(|&sq| shell_contains(sq, r.gen_range(0..=cfg.k), cfg.width))
        })
        .count();
    let predicted = predicted_miss_probability(cfg.k, cfg.y);
    let empirical = misses as f64 / cfg.draws.max(1) as f64;
    let sigma = (predicted * (1.0 - predicted) / cfg.draws.max(1) as f64).sqrt();
    MissReport {
        draws: cfg.draws,
        misses,
        empirical,
        predicted,
        sigma,
        within_3_sigma: (empirical - predicted).abs() <= 3.0 * sigma,
        planted_hits,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub trials: usize,
    pub blue_free: usize,
    pub blue_free_rate: f64,
    pub theta_gap_passes: usize,
    /// Trials where the blue-freeness theorem applies, and how many of them
    /// still had a blue 3-AP (must be zero).
    pub theorem_trials: usize,
    pub theorem_exceptions: usize,
    pub red_len_min: usize,
    pub red_len_median: usize,
    pub red_len_max: usize,
    pub miss: Option<MissReport>,
    pub csv_path: Option<String>,
}

pub const CSV_HEADER: [&str; 7] = [
    "trial",
    "seed",
    "theta_gap",
    "blue_witness",
    "longest_red_len",
    "longest_red_d",
    "wall_ms",
];

/// One row per trial, in trial order. `blue_witness` is `start:diff` or empty.
pub fn experiment_csv(reports: &[TrialReport]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for (i, r) in reports.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.seed.to_string(),
            if r.theta_gap.passed { "pass" } else { "fail" }.to_string(),
            r.blue_witness.map_or(String::new(), |b| format!("{}:{}", b.start, b.diff)),
            r.longest_red.length.to_string(),
            r.longest_red.diff.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf8 csv"))
}

/// Aggregates recomputable from the CSV alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvAggregate {
    pub trials: usize,
    pub blue_free: usize,
    pub theta_gap_passes: usize,
    pub red_len_min: usize,
    pub red_len_median: usize,
    pub red_len_max: usize,
}

fn red_stats(mut lens: Vec<usize>) -> (usize, usize, usize) {
    lens.sort_unstable();
    match (lens.first(), lens.last()) {
        (Some(&lo), Some(&hi)) => (lo, lens[(lens.len() - 1) / 2], hi),
        _ => (0, 0, 0),
    }
}

pub fn aggregate_csv(text: &str) -> Result<CsvAggregate, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut trials = 0;
    let mut blue_free = 0;
    let mut passes = 0;
    let mut lens = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        trials += 1;
        if rec.get(2) == Some("pass") {
            passes += 1;
        }
        if rec.get(3).is_some_and(|s| s.is_empty()) {
            blue_free += 1;
        }
        let len = rec
            .get(4)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HarnessError::InvalidArgument("bad longest_red_len".into()))?;
        lens.push(len);
    }
    let (red_len_min, red_len_median, red_len_max) = red_stats(lens);
    Ok(CsvAggregate {
        trials,
        blue_free,
        theta_gap_passes: passes,
        red_len_min,
        red_len_median,
        red_len_max,
    })
}

pub fn summarize(reports: &[TrialReport], miss: Option<MissReport>, csv_path: Option<String>) -> ExperimentSummary {
    let trials = reports.len();
    let blue_free = reports.iter().filter(|r| r.blue_witness.is_none()).count();
    let theorem: Vec<&TrialReport> = reports.iter().filter(|r| r.theorem_applies).collect();
    let (red_len_min, red_len_median, red_len_max) =
        red_stats(reports.iter().map(|r| r.longest_red.length).collect());
    ExperimentSummary {
        trials,
        blue_free,
        blue_free_rate: if trials == 0 { 0.0 } else { blue_free as f64 / trials as f64 },
        theta_gap_passes: reports.iter().filter(|r| r.theta_gap.passed).count(),
        theorem_trials: theorem.len(),
        theorem_exceptions: theorem.iter().filter(|r| r.blue_witness.is_some()).count(),
        red_len_min,
        red_len_median,
        red_len_max,
        miss,
        csv_path,
    }
}

/// Runs trials `base_seed .. base_seed + n_trials` in parallel, writes the
/// per-trial CSV when `csv_path` is given, and runs the miss sub-experiment
/// when configured.
pub fn run_experiment(
    cfg: &TrialConfig,
    n_trials: usize,
    base_seed: u64,
    csv_path: Option<&Path>,
    miss: Option<&MissConfig>,
) -> Result<(ExperimentSummary, Vec<TrialReport>), HarnessError> {
    if n_trials < 1 {
        return Err(HarnessError::InvalidArgument("n_trials must be >= 1".into()));
    }
    let reports: Vec<TrialReport> = (0..n_trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, base_seed.wrapping_add(i as u64)))
        .collect::<Result<_, _>>()?;
    if let Some(path) = csv_path {
        fs::write(path, experiment_csv(&reports)?)?;
    }
    let miss = miss.map(|m| run_miss_experiment(m, base_seed));
    let summary = summarize(&reports, miss, csv_path.map(|p| p.display().to_string()));
    Ok((summary, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_desk_params;

    #[test]
    fn empty_planting_always_misses() {
        let cfg = MissConfig {
            dim: 4,
            k: 7,
            y: 0,
            width: 1e-4,
            rho: 1e-3,
            draws: 100,
        };
        let r = run_miss_experiment(&cfg, 1);
        assert_eq!(r.empirical, 1.0);
        assert_eq!(r.predicted, 1.0);
    }

    #[test]
    fn single_trial_summary() {
        let cfg = TrialConfig::new(default_desk_params());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.csv");
        let (s, reports) = run_experiment(&cfg, 1, 9, Some(&path), None).unwrap();
        assert_eq!(s.trials, 1);
        assert_eq!(s.red_len_min, reports[0].longest_red.length);
        let agg = aggregate_csv(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(agg.trials, 1);
        assert_eq!(agg.blue_free, s.blue_free);
        assert_eq!(agg.red_len_median, s.red_len_median);
    }
}
