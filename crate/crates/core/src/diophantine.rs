//! Desk-scale membership test for diophantine rotations.
//!
//! For an orbit multiple `n`, the residue set collects the frequencies
//! `xi` with `|xi|_inf < B` and `||n·(xi·theta)||_T < eps`. A rotation is in
//! the set when that residue set has rational rank below `rank_max` for
//! every `n` in the sampled range. "Dimension" of a set of frequencies means
//! the rank of its rational span.
//!
//! The three knobs stand in for the astronomically large bounds of the
//! asymptotic statement; the report header records the mapping.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intmat;
use crate::rng::{stream, Purpose};
use crate::torus::{coord_dist, TorusPoint, TWO_POW_64};

/// Default cap on the `(2B-1)^D` frequency box.
pub const DEFAULT_BOX_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiophantineError {
    #[error("frequency box of {size} vectors exceeds cap {cap}")]
    BoxTooLarge { size: u128, cap: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueSet {
    pub n: u64,
    pub xi_list: Vec<Vec<i64>>,
    pub rank: usize,
}

/// Rank over `Q` by fraction-free elimination.
pub fn integer_rank(vectors: &[Vec<i64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    intmat::rank_i64(vectors)
}

/// Rank of a list that may be long: keeps a greedy independent subset and
/// stops once it reaches `cap`.
fn rank_capped(vectors: &[Vec<i64>], dim: usize, cap: usize) -> usize {
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    for v in vectors {
        if basis.len() >= cap.min(dim) {
            break;
        }
        if v.iter().all(|&x| x == 0) {
            continue;
        }
        basis.push(v.iter().map(|&x| BigInt::from(x)).collect());
        if intmat::rank(&basis) < basis.len() {
            basis.pop();
        }
    }
    basis.len()
}

/// Frequency box `(-B, B)^D` with the exact phases `xi·theta`.
struct FrequencyBox {
    dim: usize,
    xis: Vec<Vec<i64>>,
    phases: Vec<u64>,
}

impl FrequencyBox {
    fn new(theta: &TorusPoint, b: i64, cap: u64) -> Result<Self, DiophantineError> {
        if b < 1 {
            return Err(DiophantineError::InvalidArgument(format!("B = {b} must be >= 1")));
        }
        let dim = theta.dim();
        let side = (2 * b - 1) as u128;
        let size = side.checked_pow(dim as u32).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(DiophantineError::BoxTooLarge { size, cap });
        }
        let mut xis = Vec::with_capacity(size as usize);
        let mut xi = vec![-(b - 1); dim];
        loop {
            xis.push(xi.clone());
            let mut i = dim;
            loop {
                if i == 0 {
                    let phases = xis.iter().map(|x| theta.dot_int(x)).collect();
                    return Ok(FrequencyBox { dim, xis, phases });
                }
                i -= 1;
                if xi[i] < b - 1 {
                    xi[i] += 1;
                    break;
                }
                xi[i] = -(b - 1);
            }
        }
    }

    fn qualifying(&self, n: u64, eps: f64) -> Vec<Vec<i64>> {
        self.xis
            .iter()
            .zip(&self.phases)
            .filter(|(_, &p)| residue_qualifies(p.wrapping_mul(n), eps))
            .map(|(x, _)| x.clone())
            .collect()
    }
}

/// `||r||_T < eps`, where an exact zero residue always qualifies (so that
/// `eps = 0` keeps exactly the frequencies with vanishing residue).
#[inline]
pub fn residue_qualifies(raw: u64, eps: f64) -> bool {
    let d = coord_dist(raw);
    d == 0 || (d as f64 / TWO_POW_64) < eps
}

pub fn residue_set(theta: &TorusPoint, n: u64, b: i64, eps: f64) -> Result<ResidueSet, DiophantineError> {
    residue_set_capped(theta, n, b, eps, DEFAULT_BOX_CAP)
}

pub fn residue_set_capped(
    theta: &TorusPoint,
    n: u64,
    b: i64,
    eps: f64,
    cap: u64,
) -> Result<ResidueSet, DiophantineError> {
    check_eps(eps)?;
    let fb = FrequencyBox::new(theta, b, cap)?;
    let xi_list = fb.qualifying(n, eps);
    let rank = rank_capped(&xi_list, fb.dim, fb.dim);
    Ok(ResidueSet { n, xi_list, rank })
}

fn check_eps(eps: f64) -> Result<(), DiophantineError> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(DiophantineError::InvalidArgument(format!("eps = {eps} outside [0, 1/2]")));
    }
    Ok(())
}

/// Which orbit multiples `n` are checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NRange {
    /// Every `n` in `[1, n_max]`.
    Exhaustive { n_max: u64 },
    /// Every `n <= cutoff`, then `count` log-spaced values up to `n_max`.
    LogSpaced { n_max: u64, cutoff: u64, count: usize },
    Explicit(Vec<u64>),
}

/// Largest `n_max` for which the default range is exhaustive.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 16;

impl NRange {
    /// Exhaustive up to `2^16`, otherwise log-spaced above `cutoff`.
    pub fn default_for(n_max: u64, cutoff: u64) -> Self {
        if n_max <= EXHAUSTIVE_LIMIT {
            NRange::Exhaustive { n_max }
        } else {
            NRange::LogSpaced {
                n_max,
                cutoff,
                count: 256,
            }
        }
    }

    pub fn values(&self) -> Vec<u64> {
        match self {
            NRange::Exhaustive { n_max } => (1..=*n_max).collect(),
            NRange::LogSpaced { n_max, cutoff, count } => {
                let cutoff = (*cutoff).min(*n_max);
                let mut v: Vec<u64> = (1..=cutoff).collect();
                if *n_max > cutoff && *count > 0 {
                    let lo = (cutoff.max(1) as f64).ln();
                    let hi = (*n_max as f64).ln();
                    for i in 1..=*count {
                        let x = (lo + (hi - lo) * i as f64 / *count as f64).exp().round() as u64;
                        v.push(x.clamp(cutoff + 1, *n_max));
                    }
                    v.sort_unstable();
                    v.dedup();
                }
                v
            }
            NRange::Explicit(v) => v.clone(),
        }
    }

    pub fn max(&self) -> u64 {
        self.values().into_iter().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaVerdict {
    pub in_theta: bool,
    pub first_bad_n: Option<u64>,
    /// Largest residue-set rank among the checked `n` (up to the first bad one).
    pub max_rank: usize,
}

pub fn theta_in_theta(
    theta: &TorusPoint,
    n_range: &NRange,
    b: i64,
    eps: f64,
    rank_max: usize,
) -> Result<ThetaVerdict, DiophantineError> {
    if rank_max < 1 {
        return Err(DiophantineError::InvalidArgument("rank_max must be >= 1".into()));
    }
    check_eps(eps)?;
    let fb = FrequencyBox::new(theta, b, DEFAULT_BOX_CAP)?;
    let mut max_rank = 0;
    for n in n_range.values() {
        let r = rank_capped(&fb.qualifying(n, eps), fb.dim, fb.dim);
        max_rank = max_rank.max(r);
        if r >= rank_max {
            return Ok(ThetaVerdict {
                in_theta: false,
                first_bad_n: Some(n),
                max_rank,
            });
        }
    }
    Ok(ThetaVerdict {
        in_theta: true,
        first_bad_n: None,
        max_rank,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub dim: usize,
    pub n_range: NRange,
    pub b: i64,
    pub eps: f64,
    pub rank_max: usize,
    pub trials: usize,
    /// `N` used for the comparison value `1 - 1/N`.
    pub n_compare: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub trial: usize,
    pub in_theta: bool,
    pub first_bad_n: Option<u64>,
    pub max_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub config: MeasureConfig,
    pub seed: u64,
    pub rows: Vec<MeasureRow>,
    pub in_count: usize,
    pub fraction: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub one_minus_inv_n: f64,
    /// Union-bound upper estimate of the failure probability.
    pub union_bound_failure: f64,
}

/// Wilson score interval at `z` standard deviations.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Union bound on `P(theta not in the set)`.
///
/// Frequencies come in `±xi` pairs with the same residue, giving
/// `R = ((2B-1)^D - 1)/2` representatives. A rank `>= r` residue set contains
/// `r` independent representatives, and for independent `xi_1..xi_r` the
/// residues of `n·xi_j·theta` are jointly uniform on `T^r`, so each such
/// tuple qualifies with probability `(2 eps)^r`. Summing over the checked `n`
/// gives `|n_range| · C(R, r) · (2 eps)^r` (not capped at 1).
pub fn union_bound_failure(dim: usize, b: i64, eps: f64, rank_max: usize, n_count: usize) -> f64 {
    if rank_max > dim {
        return 0.0;
    }
    let side = (2 * b - 1) as f64;
    let reps = ((side.powi(dim as i32) - 1.0) / 2.0).round() as u64;
    let ln_term = ln_binomial(reps, rank_max as u64) + rank_max as f64 * (2.0 * eps).ln();
    n_count as f64 * ln_term.exp()
}

pub fn measure_estimate(cfg: &MeasureConfig, seed: u64) -> Result<MeasureReport, DiophantineError> {
    if cfg.trials < 1 {
        return Err(DiophantineError::InvalidArgument("trials must be >= 1".into()));
    }
    let rows: Vec<MeasureRow> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let theta = TorusPoint::random(cfg.dim, &mut stream(seed, Purpose::Measure, t as u64));
            theta_in_theta(&theta, &cfg.n_range, cfg.b, cfg.eps, cfg.rank_max).map(|v| MeasureRow {
                trial: t,
                in_theta: v.in_theta,
                first_bad_n: v.first_bad_n,
                max_rank: v.max_rank,
            })
        })
        .collect::<Result<_, _>>()?;
    let in_count = rows.iter().filter(|r| r.in_theta).count();
    let (ci_low, ci_high) = wilson_interval(in_count, rows.len(), 1.96);
    Ok(MeasureReport {
        union_bound_failure: union_bound_failure(
            cfg.dim,
            cfg.b,
            cfg.eps,
            cfg.rank_max,
            cfg.n_range.values().len(),
        ),
        config: cfg.clone(),
        seed,
        fraction: in_count as f64 / rows.len() as f64,
        in_count,
        rows,
        ci_low,
        ci_high,
        one_minus_inv_n: 1.0 - 1.0 / cfg.n_compare.max(1) as f64,
    })
}

impl MeasureReport {
    /// Commented header followed by `trial,in_Theta,first_bad_n,max_rank` rows.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(["trial", "in_Theta", "first_bad_n", "max_rank"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                r.in_theta.to_string(),
                r.first_bad_n.map_or(String::new(), |n| n.to_string()),
                r.max_rank.to_string(),
            ])
            .expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
        format!(
            "# box |xi|_inf < B = {} (stands for D^C1); residue eps = {} (stands for D^(C1 D)/X); \
             rank bound {} (stands for D/100); D = {}, n values = {}, seed = {}\n\
             # fraction = {:.6}, 95% CI = [{:.6}, {:.6}], 1 - 1/N = {:.6}, union bound on failure = {:.6e}\n{}",
            c.b,
            c.eps,
            c.rank_max,
            c.dim,
            c.n_range.values().len(),
            self.seed,
            self.fraction,
            self.ci_low,
            self.ci_high,
            self.one_minus_inv_n,
            self.union_bound_failure,
            body
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_examples() {
        let half = TorusPoint::from_f64(&[0.5]);
        let rs = residue_set(&half, 2, 3, 0.01).unwrap();
        assert_eq!(rs.xi_list.len(), 5);
        assert_eq!(rs.rank, 1);
        let theta = TorusPoint::from_f64(&[0.3, 0.7]);
        let zero_eps = residue_set(&theta, 3, 3, 0.0).unwrap();
        assert!(zero_eps.xi_list.contains(&vec![0, 0]));
        assert!(matches!(
            residue_set_capped(&theta, 1, 100, 0.1, 1000),
            Err(DiophantineError::BoxTooLarge { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(integer_rank(&[vec![1, 0], vec![0, 1]]), 2);
        assert_eq!(integer_rank(&[vec![2, 4], vec![1, 2]]), 1);
        assert_eq!(integer_rank(&[]), 0);
    }

    #[test]
    fn theta_examples() {
        let zero = TorusPoint::zero(3);
        let v = theta_in_theta(&zero, &NRange::Exhaustive { n_max: 10 }, 2, 0.1, 3).unwrap();
        assert_eq!((v.in_theta, v.first_bad_n, v.max_rank), (false, Some(1), 3));
        let theta = TorusPoint::from_f64(&[0.123456, 0.654321]);
        let v = theta_in_theta(&theta, &NRange::Exhaustive { n_max: 50 }, 2, 0.0, 1).unwrap();
        assert!(v.in_theta);
        assert_eq!(v.max_rank, 0);
    }

    #[test]
    fn n_range_values() {
        assert_eq!(NRange::Exhaustive { n_max: 4 }.values(), vec![1, 2, 3, 4]);
        let v = NRange::LogSpaced {
            n_max: 1_000_000,
            cutoff: 100,
            count: 50,
        }
        .values();
        assert_eq!(&v[..100], &(1..=100).collect::<Vec<_>>()[..]);
        assert_eq!(*v.last().unwrap(), 1_000_000);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trivial_measures() {
        let cfg = MeasureConfig {
            dim: 2,
            n_range: NRange::Exhaustive { n_max: 20 },
            b: 3,
            eps: 0.0,
            rank_max: 1,
            trials: 20,
            n_compare: 20,
        };
        assert_eq!(measure_estimate(&cfg, 1).unwrap().fraction, 1.0);
        let vacuous = MeasureConfig {
            eps: 0.3,
            rank_max: 3,
            ..cfg
        };
        let rep = measure_estimate(&vacuous, 1).unwrap();
        assert_eq!(rep.fraction, 1.0);
        assert!(rep.to_csv().contains("trial,in_Theta,first_bad_n,max_rank"));
    }

    #[test]
    fn union_bound_single_frequency() {
        // D = 1, B = 2: representatives {1}; P(||n theta|| < eps) = 2 eps per n.
        assert!((union_bound_failure(1, 2, 0.01, 1, 10) - 0.2).abs() < 1e-12);
        assert_eq!(union_bound_failure(2, 3, 0.1, 3, 10), 0.0);
    }
}
