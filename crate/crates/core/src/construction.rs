//! Sampling of `theta`, centers and radius indices, the center conditions,
//! and the blue/red coloring of `[N]`.
//!
//! Position `n` is blue iff `n·theta` lies in `x_i + pi(A_{e_i})` for some
//! center `x_i`, where `A_k` is the Euclidean shell `k·w <= |y| < (k+1)·w`.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::ColorArray;
use crate::lattice;
use crate::params::{ConfigFile, ParameterSet, ParamsError};
use crate::rng::{stream, Purpose};
use crate::torus::{coord_dist, lift_coord, lift_euclidean_norm_sq, shell_contains, TorusPoint, TWO_POW_64};

#[derive(Debug, Error, PartialEq)]
pub enum ConstructionError {
    #[error("condition 1 still violated after {attempts} attempts, last triple {last:?}")]
    RetriesExhausted {
        attempts: u32,
        last: (usize, usize, usize),
    },
    #[error("inconsistent instance: {0}")]
    InconsistentInstance(String),
    #[error("coloring needs a desk-scale parameter set")]
    NotDeskScale,
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("malformed instance: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    IndependentRadii,
    SharedRadius,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColoringInstance {
    pub theta: TorusPoint,
    pub centers: Vec<TorusPoint>,
    pub radii: Vec<u64>,
    pub variant: Variant,
    pub params: ParameterSet,
    pub seed: u64,
}

pub fn sample_theta(dim: usize, seed: u64) -> TorusPoint {
    TorusPoint::random(dim, &mut stream(seed, Purpose::Theta, 0))
}

/// First triple `(i1, i2, i3)` (0-based, lexicographic) with not all indices
/// equal and `||x_i1 - 2 x_i2 + x_i3|| <= 10 rho`.
pub fn verify_condition1(centers: &[TorusPoint], rho: f64) -> Option<(usize, usize, usize)> {
    let m = centers.len();
    let limit = 10.0 * rho;
    for i1 in 0..m {
        for i2 in 0..m {
            let a = centers[i1].coords();
            let b = centers[i2].coords();
            for i3 in 0..m {
                if i1 == i2 && i2 == i3 {
                    continue;
                }
                let c = centers[i3].coords();
                let raw = a
                    .iter()
                    .zip(b)
                    .zip(c)
                    .map(|((&x, &y), &z)| coord_dist(x.wrapping_sub(y.wrapping_mul(2)).wrapping_add(z)))
                    .max()
                    .unwrap_or(0);
                if raw as f64 / TWO_POW_64 <= limit {
                    return Some((i1, i2, i3));
                }
            }
        }
    }
    None
}

/// `M` uniform centers passing Condition 1; attempt `a` draws the whole set
/// from its own stream.
pub fn sample_centers(
    m: usize,
    dim: usize,
    rho: f64,
    seed: u64,
    max_retries: u32,
) -> Result<Vec<TorusPoint>, ConstructionError> {
    let mut last = (0, 0, 0);
    let attempts = max_retries.max(1);
    for a in 0..attempts {
        let mut rng = stream(seed, Purpose::Centers, a as u64);
        let centers: Vec<TorusPoint> = (0..m).map(|_| TorusPoint::random(dim, &mut rng)).collect();
        match verify_condition1(&centers, rho) {
            None => return Ok(centers),
            Some(t) => last = t,
        }
    }
    Err(ConstructionError::RetriesExhausted { attempts, last })
}

pub fn sample_radii(m: usize, k: u64, seed: u64) -> Vec<u64> {
    let mut rng = stream(seed, Purpose::Radii, 0);
    (0..m).map(|_| rng.gen_range(0..=k)).collect()
}

impl ColoringInstance {
    /// Samples `theta`, centers and radii for a desk-scale parameter set.
    pub fn generate(
        params: &ParameterSet,
        variant: Variant,
        seed: u64,
        max_retries: u32,
    ) -> Result<Self, ConstructionError> {
        let desk = params.desk.ok_or(ConstructionError::NotDeskScale)?;
        let dim = params.dim as usize;
        Ok(ColoringInstance {
            theta: sample_theta(dim, seed),
            centers: sample_centers(desk.m as usize, dim, params.rho, seed, max_retries)?,
            radii: sample_radii(desk.m as usize, desk.k, seed),
            variant,
            params: params.clone(),
            seed,
        })
    }

    pub fn check(&self) -> Result<(), ConstructionError> {
        let desk = self.params.desk.ok_or(ConstructionError::NotDeskScale)?;
        let bad = |msg: String| Err(ConstructionError::InconsistentInstance(msg));
        let dim = self.params.dim as usize;
        if self.theta.dim() != dim {
            return bad(format!("theta has dimension {}, expected {dim}", self.theta.dim()));
        }
        if self.centers.len() as u64 != desk.m {
            return bad(format!("{} centers, expected M = {}", self.centers.len(), desk.m));
        }
        if self.radii.len() != self.centers.len() {
            return bad(format!("{} radii for {} centers", self.radii.len(), self.centers.len()));
        }
        if let Some(c) = self.centers.iter().find(|c| c.dim() != dim) {
            return bad(format!("center of dimension {}, expected {dim}", c.dim()));
        }
        if let Some(e) = self.radii.iter().find(|&&e| e > desk.k) {
            return bad(format!("radius index {e} exceeds K = {}", desk.k));
        }
        Ok(())
    }

    /// Radius index used for center `i` under the instance's variant.
    pub fn radius_of(&self, i: usize) -> u64 {
        match self.variant {
            Variant::IndependentRadii => self.radii[i],
            Variant::SharedRadius => self.radii[0],
        }
    }

    pub fn effective_radii(&self) -> Vec<u64> {
        (0..self.radii.len()).map(|i| self.radius_of(i)).collect()
    }

    /// First center whose annulus contains `n·theta`, with the lifted distance.
    pub fn blue_witness(&self, n: u64) -> Option<(usize, f64)> {
        let p = self.theta.scale(n);
        let w = self.params.width;
        self.centers.iter().enumerate().find_map(|(i, c)| {
            let sq = lift_euclidean_norm_sq(&p, c);
            shell_contains(sq, self.radius_of(i), w).then(|| (i, sq.sqrt()))
        })
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            params: self.params.to_config(),
            variant: self.variant,
            seed: self.seed,
            theta: self.theta.to_hex(),
            centers: self.centers.iter().map(|c| c.to_hex()).collect(),
            radii: self.radii.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ConstructionError> {
        let f: InstanceFile =
            serde_json::from_str(text).map_err(|e| ConstructionError::Malformed(e.to_string()))?;
        let parse = |s: &str| TorusPoint::from_hex(s).map_err(|e| ConstructionError::Malformed(e.0));
        let inst = ColoringInstance {
            params: ParameterSet::from_config(&f.params)?,
            variant: f.variant,
            seed: f.seed,
            theta: parse(&f.theta)?,
            centers: f.centers.iter().map(|c| parse(c)).collect::<Result<_, _>>()?,
            radii: f.radii,
        };
        inst.check()?;
        Ok(inst)
    }
}

/// Serialized instance: the parameter config plus hexadecimal coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub params: ConfigFile,
    pub variant: Variant,
    pub seed: u64,
    pub theta: String,
    pub centers: Vec<String>,
    pub radii: Vec<u64>,
}

const GRID_MIN_CENTERS: usize = 32;

/// Sparse uniform grid over `T^D` used to shortlist centers near a point.
struct CenterGrid {
    cells_per_axis: u64,
    cells: HashMap<Vec<u64>, Vec<usize>>,
    offsets: Vec<Vec<i64>>,
}

impl CenterGrid {
    fn build(centers: &[TorusPoint], reach: f64) -> Option<Self> {
        let dim = centers.first()?.dim();
        if centers.len() < GRID_MIN_CENTERS || dim == 0 || reach.is_nan() || reach <= 0.0 {
            return None;
        }
        let g = (1.0 / reach).floor();
        if g < 3.0 {
            return None;
        }
        let g = g.min(u32::MAX as f64) as u64;
        let mut grid = CenterGrid {
            cells_per_axis: g,
            cells: HashMap::new(),
            offsets: Vec::new(),
        };
        for (i, c) in centers.iter().enumerate() {
            grid.cells.entry(grid.cell_of(c.coords())).or_default().push(i);
        }
        let mut off = vec![-1i64; dim];
        loop {
            grid.offsets.push(off.clone());
            let mut k = dim;
            loop {
                if k == 0 {
                    return Some(grid);
                }
                k -= 1;
                if off[k] < 1 {
                    off[k] += 1;
                    break;
                }
                off[k] = -1;
            }
        }
    }

    fn cell_of(&self, coords: &[u64]) -> Vec<u64> {
        coords
            .iter()
            .map(|&c| ((c as u128 * self.cells_per_axis as u128) >> 64) as u64)
            .collect()
    }

    fn candidates(&self, coords: &[u64], out: &mut Vec<usize>) {
        out.clear();
        let home = self.cell_of(coords);
        let g = self.cells_per_axis as i64;
        let mut key = home.clone();
        for off in &self.offsets {
            for ((k, &h), &o) in key.iter_mut().zip(&home).zip(off) {
                *k = (h as i64 + o).rem_euclid(g) as u64;
            }
            if let Some(v) = self.cells.get(&key) {
                out.extend_from_slice(v);
            }
        }
    }
}

/// Coloring of `[n]` from raw annulus data: `radii[i]` is the shell index of
/// `centers[i]` and `width` the band width.
pub fn color_by_annuli(
    theta: &TorusPoint,
    centers: &[TorusPoint],
    radii: &[u64],
    width: f64,
    n: usize,
) -> ColorArray {
    assert_eq!(centers.len(), radii.len(), "one radius index per center");
    let max_e = radii.iter().copied().max().unwrap_or(0);
    let grid = CenterGrid::build(centers, (max_e as f64 + 1.0) * width);
    let words: Vec<u64> = (0..n.div_ceil(64))
        .into_par_iter()
        .map(|w| {
            let first = (w * 64 + 1) as u64;
            let mut p = theta.scale(first);
            let mut word = 0u64;
            let mut shortlist = Vec::new();
            for bit in 0..64 {
                if first as usize + bit > n {
                    break;
                }
                let hit = match &grid {
                    Some(g) => {
                        g.candidates(p.coords(), &mut shortlist);
                        shortlist.iter().any(|&i| {
                            shell_contains(lift_euclidean_norm_sq(&p, &centers[i]), radii[i], width)
                        })
                    }
                    None => centers
                        .iter()
                        .zip(radii)
                        .any(|(c, &e)| shell_contains(lift_euclidean_norm_sq(&p, c), e, width)),
                };
                if hit {
                    word |= 1 << bit;
                }
                p = &p + theta;
            }
            word
        })
        .collect();
    ColorArray::from_words(n, words)
}

pub fn build_coloring(inst: &ColoringInstance, n: usize) -> Result<ColorArray, ConstructionError> {
    inst.check()?;
    Ok(color_by_annuli(
        &inst.theta,
        &inst.centers,
        &inst.effective_radii(),
        inst.params.width,
        n,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterHit {
    pub center: usize,
    pub position: u64,
    pub distance: f64,
}

/// For each center, the first point of `{n0 + i·d : 0 <= i < x_len}` whose
/// orbit point lies within lifted Euclidean distance `radius` (closed).
pub fn count_centers_hit(
    theta: &TorusPoint,
    d: u64,
    n0: u64,
    x_len: u64,
    centers: &[TorusPoint],
    radius: f64,
) -> Vec<CenterHit> {
    let r_sq = radius * radius;
    let step = theta.scale(d);
    let mut p = theta.scale(n0);
    let mut found: Vec<Option<CenterHit>> = vec![None; centers.len()];
    let mut open = centers.len();
    for i in 0..x_len {
        if open == 0 {
            break;
        }
        let pos = n0.wrapping_add(i.wrapping_mul(d));
        for (j, c) in centers.iter().enumerate() {
            if found[j].is_some() {
                continue;
            }
            let sq = lift_euclidean_norm_sq(&p, c);
            if sq <= r_sq {
                found[j] = Some(CenterHit {
                    center: j,
                    position: pos,
                    distance: sq.sqrt(),
                });
                open -= 1;
            }
        }
        p = &p + &step;
    }
    found.into_iter().flatten().collect()
}

/// Settings of the sampled Condition-2 diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition2Config {
    pub dim_max: usize,
    pub xi_bound: i64,
    pub trials: usize,
    /// The `u`-grid step is `rho / grid_divisions`.
    pub grid_divisions: u32,
    pub target_y: u64,
}

impl Condition2Config {
    pub fn new(dim_max: usize, xi_bound: i64, trials: usize, target_y: u64) -> Self {
        Condition2Config {
            dim_max,
            xi_bound,
            trials,
            grid_divisions: 40,
            target_y,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition2Trial {
    pub generators: Vec<Vec<i64>>,
    pub rank: usize,
    pub xi_count: usize,
    pub x_star: String,
    pub slice: Vec<usize>,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition2Report {
    pub trials: Vec<Condition2Trial>,
    pub target_y: u64,
    pub min_count: usize,
    pub all_meet_target: bool,
}

/// Grid points `u = step·k` on the coordinates in `slice` (zero elsewhere)
/// with `|u|_2 < rho/10`.
pub fn u_grid(dim: usize, slice: &[usize], rho: f64, divisions: u32) -> Vec<Vec<f64>> {
    let step = rho / divisions as f64;
    let radius = rho / 10.0;
    let kmax = (radius / step).ceil() as i64;
    let mut out = Vec::new();
    let mut ks = vec![-kmax; slice.len()];
    loop {
        let mut u = vec![0.0; dim];
        for (&axis, &k) in slice.iter().zip(&ks) {
            u[axis] = k as f64 * step;
        }
        if u.iter().map(|x| x * x).sum::<f64>() < radius * radius {
            out.push(u);
        }
        let mut i = ks.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if ks[i] < kmax {
                ks[i] += 1;
                break;
            }
            ks[i] = -kmax;
        }
    }
}

fn frac_dist(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// Per center, whether some grid `u` gives `||xi·(x_j + u - x*)|| < 1/100`
/// for every `xi` in `xis`. The integer part `xi·(x_j - x*)` is exact.
pub fn condition2_admissible(
    centers: &[TorusPoint],
    x_star: &TorusPoint,
    xis: &[Vec<i64>],
    grid: &[Vec<f64>],
) -> Vec<bool> {
    centers
        .iter()
        .map(|c| {
            let diff = c - x_star;
            let base: Vec<f64> = xis.iter().map(|xi| lift_coord(diff.dot_int(xi))).collect();
            grid.iter().any(|u| {
                xis.iter().zip(&base).all(|(xi, &b)| {
                    let shift: f64 = xi.iter().zip(u).map(|(&a, &x)| a as f64 * x).sum();
                    frac_dist(b + shift) < 0.01
                })
            })
        })
        .collect()
}

/// Sampled check of Condition 2: per trial a random subspace `V` and point
/// `x*`, counting centers that admit a good `u`. Diagnostic only.
pub fn spot_check_condition2(
    centers: &[TorusPoint],
    rho: f64,
    cfg: &Condition2Config,
    seed: u64,
) -> Condition2Report {
    let dim = centers.first().map_or(0, |c| c.dim());
    assert!(cfg.dim_max <= dim || centers.is_empty(), "dim_max must not exceed D");
    let mut trials = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let mut rng = stream(seed, Purpose::Condition2, t as u64);
        let r = rng.gen_range(0..=cfg.dim_max);
        let mut generators: Vec<Vec<i64>> = (0..r)
            .map(|_| (0..dim).map(|_| rng.gen_range(-cfg.xi_bound..=cfg.xi_bound)).collect())
            .collect();
        if generators.is_empty() {
            generators.push(vec![0; dim]);
        }
        let rank = crate::intmat::rank_i64(&generators);
        let xis: Vec<Vec<i64>> = if dim == 0 {
            Vec::new()
        } else {
            lattice::enumerate_bounded_points(&generators, cfg.xi_bound)
                .expect("xi box within enumeration cap")
                .into_iter()
                .filter(|x| x.iter().any(|&v| v != 0))
                .collect()
        };
        let x_star = TorusPoint::random(dim, &mut rng);
        let slice: Vec<usize> = if dim > 4 {
            rand::seq::index::sample(&mut rng, dim, 2).into_vec()
        } else {
            (0..dim).collect()
        };
        let grid = u_grid(dim, &slice, rho, cfg.grid_divisions);
        let count = condition2_admissible(centers, &x_star, &xis, &grid)
            .into_iter()
            .filter(|&ok| ok)
            .count();
        trials.push(Condition2Trial {
            generators,
            rank,
            xi_count: xis.len(),
            x_star: x_star.to_hex(),
            slice,
            count,
        });
    }
    let min_count = trials.iter().map(|t| t.count).min().unwrap_or(0);
    Condition2Report {
        all_meet_target: trials.iter().all(|t| t.count as u64 >= cfg.target_y),
        trials,
        target_y: cfg.target_y,
        min_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_desk_params;

    #[test]
    fn theta_is_deterministic() {
        assert_eq!(sample_theta(3, 7), sample_theta(3, 7));
        assert_ne!(sample_theta(1, 1), sample_theta(1, 2));
        assert_eq!(sample_theta(0, 5).dim(), 0);
    }

    #[test]
    fn condition1_examples() {
        let one = vec![TorusPoint::from_f64(&[0.1, 0.2])];
        assert_eq!(verify_condition1(&one, 0.01), None);
        let dup = vec![TorusPoint::from_f64(&[0.1]), TorusPoint::from_f64(&[0.1])];
        assert_eq!(verify_condition1(&dup, 0.01), Some((0, 0, 1)));
    }

    #[test]
    fn sample_centers_examples() {
        let c = sample_centers(16, 4, 0.01, 3, 100).unwrap();
        assert_eq!(verify_condition1(&c, 0.01), None);
        assert_eq!(c, sample_centers(16, 4, 0.01, 3, 100).unwrap());
        assert!(matches!(
            sample_centers(2, 1, 0.2, 9, 1),
            Err(ConstructionError::RetriesExhausted { .. })
        ));
    }

    #[test]
    fn radii_examples() {
        assert!(sample_radii(50, 0, 1).iter().all(|&e| e == 0));
        assert_eq!(sample_radii(100, 7, 4), sample_radii(100, 7, 4));
        assert!(sample_radii(1000, 7, 4).iter().all(|&e| e <= 7));
    }

    #[test]
    fn one_dimensional_coloring() {
        let c = color_by_annuli(
            &TorusPoint::from_f64(&[0.25]),
            &[TorusPoint::zero(1)],
            &[0],
            0.3,
            4,
        );
        assert_eq!(c.blue_positions(), vec![1, 3, 4]);
        let empty = color_by_annuli(&TorusPoint::from_f64(&[0.25]), &[], &[], 0.3, 10);
        assert_eq!(empty.blue_count(), 0);
    }

    #[test]
    fn grid_matches_linear_scan() {
        let theta = sample_theta(2, 11);
        let mut rng = stream(11, Purpose::Centers, 0);
        let centers: Vec<TorusPoint> = (0..200).map(|_| TorusPoint::random(2, &mut rng)).collect();
        let radii = sample_radii(200, 3, 11);
        let width = 0.01;
        let fast = color_by_annuli(&theta, &centers, &radii, width, 3000);
        assert!(CenterGrid::build(&centers, 4.0 * width).is_some());
        let slow = ColorArray::from_fn(3000, |n| {
            let p = theta.scale(n as u64);
            let hit = centers
                .iter()
                .zip(&radii)
                .any(|(c, &e)| shell_contains(lift_euclidean_norm_sq(&p, c), e, width));
            if hit {
                crate::coloring::Color::Blue
            } else {
                crate::coloring::Color::Red
            }
        });
        assert_eq!(fast, slow);
        assert!(fast.blue_count() > 0);
    }

    #[test]
    fn build_rejects_bad_instances() {
        let p = make_desk_params(1, 8, 1, 1, 0.02, 0.06, 10, 1).unwrap();
        let mut inst = ColoringInstance {
            theta: TorusPoint::from_f64(&[0.25]),
            centers: vec![TorusPoint::zero(1)],
            radii: vec![0],
            variant: Variant::IndependentRadii,
            params: p,
            seed: 0,
        };
        assert!(build_coloring(&inst, 8).is_ok());
        inst.radii.push(0);
        assert!(matches!(
            build_coloring(&inst, 8),
            Err(ConstructionError::InconsistentInstance(_))
        ));
        inst.radii = vec![2];
        assert!(build_coloring(&inst, 8).is_err());
    }

    #[test]
    fn instance_json_round_trip() {
        let p = crate::params::default_desk_params();
        let inst = ColoringInstance::generate(&p, Variant::SharedRadius, 5, 20).unwrap();
        let back = ColoringInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn centers_hit_identity() {
        let theta = sample_theta(3, 2);
        let centers = vec![theta.scale(5), theta.scale(9), TorusPoint::from_f64(&[0.5, 0.5, 0.5])];
        let hits = count_centers_hit(&theta, 2, 1, 10, &centers, 0.0);
        assert_eq!(hits.len(), 2);
        assert_eq!((hits[0].center, hits[0].position, hits[0].distance), (0, 5, 0.0));
        assert_eq!((hits[1].center, hits[1].position), (1, 9));
    }

    #[test]
    fn condition2_trivial_cases() {
        let centers = sample_centers(8, 3, 0.01, 1, 20).unwrap();
        let cfg = Condition2Config::new(0, 2, 5, 8);
        let rep = spot_check_condition2(&centers, 0.01, &cfg, 3);
        assert!(rep.trials.iter().all(|t| t.count == 8 && t.xi_count == 0));
        assert!(rep.all_meet_target);
        // x* = x_1 with u = 0 always admits center 1.
        let grid = u_grid(3, &[0, 1, 2], 0.01, 40);
        assert!(grid.iter().any(|u| u.iter().all(|&x| x == 0.0)));
        let xis = vec![vec![1, 2, -1], vec![2, 0, 1]];
        assert!(condition2_admissible(&centers, &centers[0], &xis, &grid)[0]);
    }

    #[test]
    fn u_grid_stays_inside_open_ball() {
        let g = u_grid(4, &[0, 1, 2, 3], 0.001, 40);
        assert!(g.iter().all(|u| u.iter().map(|x| x * x).sum::<f64>() < 1e-8));
        // (rho/10) lies exactly on the boundary and is excluded.
        assert!(!g.iter().any(|u| u[0] >= 0.0001 - 1e-18));
    }
}
