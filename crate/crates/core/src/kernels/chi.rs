use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{ln_ratio, KernelError, KernelReport, Method, PropertyCheck};
use crate::rng::{stream, Purpose};
use crate::torus::TorusPoint;

/// Cap on `D·k^2`, the big-integer work of one coefficient.
pub const EXPANSION_CAP: u128 = 1_000_000_000;
/// Cap on the number of reduced tensor-grid nodes.
pub const GRID_CAP: u128 = 100_000_000;

/// Fourier coefficients of `psi = (2D + sum_i (e(x_i) + e(-x_i)))^k
/// = 4^k (sum_i cos^2(pi x_i))^k`, all nonnegative integers.
#[derive(Clone, Debug)]
pub struct PsiExpansion {
    dim: usize,
    k: usize,
    binom: Arc<Vec<Vec<BigInt>>>,
}

impl PsiExpansion {
    pub fn new(dim: usize, k: usize) -> Result<Self, KernelError> {
        let work = dim as u128 * (k as u128 + 1) * (k as u128 + 1);
        if work > EXPANSION_CAP {
            return Err(KernelError::CapExceeded {
                size: work,
                cap: EXPANSION_CAP,
            });
        }
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut row = vec![BigInt::one(); n + 1];
            for j in 1..n {
                row[j] = &rows[n - 1][j - 1] + &rows[n - 1][j];
            }
            rows.push(row);
        }
        Ok(PsiExpansion {
            dim,
            k,
            binom: Arc::new(rows),
        })
    }

    fn c(&self, n: usize, j: usize) -> &BigInt {
        &self.binom[n][j]
    }

    /// Coefficient of `e(xi·x)`: count words of length `k` over the letters
    /// `{constant, e_i^+, e_i^-}`. `dp[t]` counts placements of the first
    /// coordinates' letters in `t` of the `k` slots; the remaining `k - t`
    /// slots take the constant `2D`.
    pub fn coefficient(&self, xi: &[i64]) -> BigInt {
        assert_eq!(xi.len(), self.dim, "frequency dimension");
        let k = self.k;
        if xi.iter().map(|x| x.unsigned_abs() as u128).sum::<u128>() > k as u128 {
            return BigInt::zero();
        }
        let mut dp = vec![BigInt::zero(); k + 1];
        dp[0] = BigInt::one();
        for &a in xi {
            let a = a.unsigned_abs() as usize;
            let mut next = vec![BigInt::zero(); k + 1];
            for t in 0..=k {
                if dp[t].is_zero() {
                    continue;
                }
                let mut j = a;
                while t + j <= k {
                    let ways = self.c(k - t, j) * self.c(j, (j + a) / 2);
                    next[t + j] += &dp[t] * ways;
                    j += 2;
                }
            }
            dp = next;
        }
        let base = BigInt::from(2 * self.dim);
        let mut acc = BigInt::zero();
        let mut pow = BigInt::one();
        for t in (0..=k).rev() {
            acc += &dp[t] * &pow;
            pow *= &base;
        }
        acc
    }
}

pub fn chi_constant_term(dim: usize, k: usize) -> Result<BigInt, KernelError> {
    Ok(PsiExpansion::new(dim, k)?.coefficient(&vec![0; dim]))
}

/// `chi = (psi - 4^k tau^k) / Z` with `Z = psi^(0) - 4^k tau^k`.
#[derive(Clone, Debug)]
pub struct ChiSpec {
    pub dim: usize,
    pub k: usize,
    pub tau: BigRational,
    /// Negativity radius `sqrt(D - tau)`; may exceed 1/2 for specs built from
    /// `tau`, in which case no torus point lies outside it.
    pub s: f64,
    pub z: BigRational,
    pub const_term: BigInt,
    ln_z: f64,
    ln_tau_term: f64,
    expansion: PsiExpansion,
}

/// Kernel with negativity radius `s`, i.e. `tau = D - s^2`.
pub fn make_chi(dim: usize, k: usize, s: f64) -> Result<ChiSpec, KernelError> {
    if !(s > 0.0 && s <= 0.5) {
        return Err(KernelError::InvalidArgument(format!("s = {s} outside (0, 1/2]")));
    }
    let s_exact = BigRational::from_float(s).expect("finite s");
    let tau = BigRational::from_integer(BigInt::from(dim)) - &s_exact * &s_exact;
    build(dim, k, tau, s)
}

/// Kernel with an explicit `tau` in `(0, D)`.
pub fn make_chi_with_tau(dim: usize, k: usize, tau: BigRational) -> Result<ChiSpec, KernelError> {
    let d = BigRational::from_integer(BigInt::from(dim));
    if !(tau.is_positive() && tau < d) {
        return Err(KernelError::InvalidArgument(format!("tau = {tau} outside (0, D)")));
    }
    let s = (&d - &tau).to_f64().unwrap_or(f64::NAN).sqrt();
    build(dim, k, tau, s)
}

fn build(dim: usize, k: usize, tau: BigRational, s: f64) -> Result<ChiSpec, KernelError> {
    if dim == 0 || k == 0 {
        return Err(KernelError::InvalidArgument("D and k must be positive".into()));
    }
    let expansion = PsiExpansion::new(dim, k)?;
    let const_term = expansion.coefficient(&vec![0; dim]);
    let four_tau = BigRational::from_integer(BigInt::from(4)) * &tau;
    let tau_term = num_traits::pow(four_tau.clone(), k);
    let z = BigRational::from_integer(const_term.clone()) - &tau_term;
    if !z.is_positive() {
        return Err(KernelError::NotNormalizable { z: format!("{:e}", z.to_f64().unwrap_or(f64::NAN)) });
    }
    Ok(ChiSpec {
        ln_z: ln_ratio(&z),
        ln_tau_term: k as f64 * ln_ratio(&four_tau),
        dim,
        k,
        tau,
        s,
        z,
        const_term,
        expansion,
    })
}

impl ChiSpec {
    pub fn tau_f64(&self) -> f64 {
        self.tau.to_f64().unwrap_or(f64::NAN)
    }

    /// `chi` as a function of `c = sum_i cos^2(pi x_i)`, in log space.
    pub fn eval_from_cos_sum(&self, c: f64) -> f64 {
        let pos = if c > 0.0 {
            (self.k as f64 * (4.0 * c).ln() - self.ln_z).exp()
        } else {
            0.0
        };
        pos - (self.ln_tau_term - self.ln_z).exp()
    }

    /// `4^k tau^k / Z`.
    pub fn tau_ratio(&self) -> f64 {
        (self.ln_tau_term - self.ln_z).exp()
    }

    pub fn psi_coefficient(&self, xi: &[i64]) -> BigInt {
        self.expansion.coefficient(xi)
    }
}

pub fn cos_sum(y: &[f64]) -> f64 {
    y.iter().map(|t| (PI * t).cos().powi(2)).sum()
}

pub fn chi_eval(spec: &ChiSpec, x: &TorusPoint) -> f64 {
    chi_eval_lifted(spec, &x.lift())
}

/// `chi` at a real vector (the kernel is 1-periodic in every coordinate).
pub fn chi_eval_lifted(spec: &ChiSpec, y: &[f64]) -> f64 {
    assert_eq!(y.len(), spec.dim, "point dimension");
    spec.eval_from_cos_sum(cos_sum(y))
}

/// Exact Fourier coefficient; `chi_hat(0) = 1`.
pub fn chi_hat(spec: &ChiSpec, xi: &[i64]) -> BigRational {
    let mut num = BigRational::from_integer(spec.psi_coefficient(xi));
    if xi.iter().all(|&x| x == 0) {
        num -= num_traits::pow(BigRational::from_integer(BigInt::from(4)) * &spec.tau, spec.k);
    }
    num / &spec.z
}

pub fn chi_hat_f64(spec: &ChiSpec, xi: &[i64]) -> f64 {
    chi_hat(spec, xi).to_f64().unwrap_or(f64::NAN)
}

/// All `xi` in `Z^dim` with `||xi||_1 <= radius`, lexicographic.
pub fn xi_l1_ball(dim: usize, radius: usize) -> Vec<Vec<i64>> {
    fn rec(prefix: &mut Vec<i64>, dim: usize, left: i64, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for v in -left..=left {
            prefix.push(v);
            rec(prefix, dim, left - v.abs(), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(dim), dim, radius as i64, &mut out);
    out
}

/// `∫ chi` by the uniform tensor rule with `k + 1` nodes per axis, which is
/// exact for trigonometric polynomials of degree `<= k` per coordinate. Nodes
/// are grouped by the multiset of their `cos^2` values.
pub fn tensor_grid_integral(spec: &ChiSpec) -> Result<f64, KernelError> {
    let n = spec.k + 1;
    let half = n / 2;
    let vals: Vec<f64> = (0..=half).map(|j| (PI * j as f64 / n as f64).cos().powi(2)).collect();
    let weights: Vec<f64> = (0..=half)
        .map(|j| if j == 0 || 2 * j == n { 1.0 } else { 2.0 })
        .collect();
    let d = spec.dim;
    let groups = {
        let m = (half + 1) as u128;
        (0..d as u128).fold(1u128, |acc, i| acc * (m + i) / (i + 1))
    };
    if groups > GRID_CAP {
        return Err(KernelError::CapExceeded {
            size: groups,
            cap: GRID_CAP,
        });
    }
    let fact: Vec<f64> = (0..=d).scan(1.0, |f, i| {
        if i > 0 {
            *f *= i as f64;
        }
        Some(*f)
    }).collect();

    fn rec(
        spec: &ChiSpec,
        vals: &[f64],
        weights: &[f64],
        fact: &[f64],
        idx: &mut Vec<usize>,
        start: usize,
        acc: &mut f64,
    ) {
        if idx.len() == spec.dim {
            let c: f64 = idx.iter().map(|&i| vals[i]).sum();
            let w: f64 = idx.iter().map(|&i| weights[i]).product();
            let mut mult = fact[spec.dim];
            let mut run = 1;
            for p in 1..=idx.len() {
                if p < idx.len() && idx[p] == idx[p - 1] {
                    run += 1;
                } else {
                    mult /= fact[run];
                    run = 1;
                }
            }
            if c > 0.0 {
                *acc += mult * w * (spec.k as f64 * (4.0 * c).ln() - spec.ln_z).exp();
            }
            return;
        }
        for i in start..vals.len() {
            idx.push(i);
            rec(spec, vals, weights, fact, idx, i, acc);
            idx.pop();
        }
    }

    let total: f64 = (0..vals.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = 0.0;
            let mut idx = vec![first];
            rec(spec, &vals, &weights, &fact, &mut idx, first, &mut acc);
            acc
        })
        .sum();
    Ok(total / (n as f64).powi(d as i32) - spec.tau_ratio())
}

/// Stratified Monte Carlo estimate of `∫|chi|` with its standard error.
///
/// Uses `∫|chi| = ∫chi + 2∫chi^-` with `∫chi = chi_hat(0) = 1`; only the
/// bounded negative part `chi^- <= 4^k tau^k / Z` is sampled. Strata split the
/// first coordinate into equal slabs.
pub fn abs_integral_estimate(spec: &ChiSpec, strata: usize, per_stratum: usize, seed: u64) -> (f64, f64) {
    assert!(strata >= 1 && per_stratum >= 2);
    let stats: Vec<(f64, f64)> = (0..strata)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Quadrature, i as u64);
            let lo = -0.5 + i as f64 / strata as f64;
            let width = 1.0 / strata as f64;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut y = vec![0.0; spec.dim];
            for _ in 0..per_stratum {
                y[0] = lo + width * rng.gen::<f64>();
                for t in y.iter_mut().skip(1) {
                    *t = rng.gen::<f64>() - 0.5;
                }
                let neg = (-chi_eval_lifted(spec, &y)).max(0.0);
                sum += neg;
                sum_sq += neg * neg;
            }
            let m = per_stratum as f64;
            let mean = sum / m;
            let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
            (mean, var / m)
        })
        .collect();
    let s = strata as f64;
    let neg_mean: f64 = stats.iter().map(|(m, _)| m).sum::<f64>() / s;
    let neg_var: f64 = stats.iter().map(|(_, v)| v).sum::<f64>() / (s * s);
    (1.0 + 2.0 * neg_mean, 2.0 * neg_var.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiCheckConfig {
    pub sign_samples: usize,
    /// `Some(r)`: every `xi` with `||xi||_1 <= r`; `None`: `xi_samples` random ones.
    pub exhaustive_radius: Option<usize>,
    pub xi_samples: usize,
    pub strata: usize,
    pub per_stratum: usize,
    pub seed: u64,
}

impl ChiCheckConfig {
    pub fn for_spec(spec: &ChiSpec, seed: u64) -> Self {
        let exhaustive = xi_ball_size(spec.dim, spec.k + 2) <= 20_000;
        ChiCheckConfig {
            sign_samples: 10_000,
            exhaustive_radius: exhaustive.then_some(spec.k + 2),
            xi_samples: 200,
            strata: 64,
            per_stratum: 2_000,
            seed,
        }
    }
}

fn xi_ball_size(dim: usize, r: usize) -> u128 {
    // sum_i 2^i C(dim, i) C(r, i)
    let mut total = 0u128;
    let mut c_dim = 1u128;
    let mut c_r = 1u128;
    for i in 0..=dim.min(r) {
        if i > 0 {
            c_dim = c_dim * (dim - i + 1) as u128 / i as u128;
            c_r = c_r * (r - i + 1) as u128 / i as u128;
        }
        total = total.saturating_add((1u128 << i).saturating_mul(c_dim).saturating_mul(c_r));
    }
    total
}

/// Random point with one coordinate forced to `|t| in [s, 1/2]`.
fn sample_outside<R: Rng + ?Sized>(spec: &ChiSpec, rng: &mut R) -> Vec<f64> {
    let mut y: Vec<f64> = (0..spec.dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    let axis = rng.gen_range(0..spec.dim);
    let mag = spec.s + (0.5 - spec.s) * rng.gen::<f64>();
    y[axis] = if rng.gen::<bool>() { mag } else { -mag };
    y
}

fn random_xi<R: Rng + ?Sized>(dim: usize, max_l1: usize, rng: &mut R) -> Vec<i64> {
    let r = rng.gen_range(0..=max_l1);
    let mut xi = vec![0i64; dim];
    for _ in 0..r {
        xi[rng.gen_range(0..dim)] += 1;
    }
    for x in xi.iter_mut() {
        if rng.gen::<bool>() {
            *x = -*x;
        }
    }
    xi
}

/// Sign outside radius `s`, spectrum sign and support, `∫chi = 1`, `∫|chi| <= 3`.
pub fn verify_chi_properties(spec: &ChiSpec, cfg: &ChiCheckConfig) -> KernelReport {
    let mut props = Vec::new();
    let tau = spec.tau_f64();

    // chi <= 0 iff sum cos^2 <= tau, since k >= 1.
    let mut p1 = PropertyCheck::new("1a", Method::Exact, true, String::new());
    if spec.s > 0.5 {
        p1.detail = format!("radius s = {:.6} exceeds 1/2: no torus point lies outside", spec.s);
    } else {
        let mut rng = stream(cfg.seed, Purpose::Sampling, 0);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..cfg.sign_samples {
            let y = sample_outside(spec, &mut rng);
            let c = cos_sum(&y);
            worst = worst.max(c - tau);
            if c > tau && p1.passed {
                p1.passed = false;
                p1.failing_sample = Some(format!("x = {y:?}, sum cos^2 = {c}, tau = {tau}"));
            }
        }
        p1.detail = format!(
            "{} samples with |x|_inf >= s = {}; max(sum cos^2 - tau) = {worst:e}",
            cfg.sign_samples, spec.s
        );
    }
    props.push(p1);

    let xis: Vec<Vec<i64>> = match cfg.exhaustive_radius {
        Some(r) => xi_l1_ball(spec.dim, r),
        None => {
            let mut rng = stream(cfg.seed, Purpose::Sampling, 1);
            (0..cfg.xi_samples).map(|_| random_xi(spec.dim, spec.k + 2, &mut rng)).collect()
        }
    };
    let method = if cfg.exhaustive_radius.is_some() {
        Method::Exact
    } else {
        Method::Sampled
    };
    let mut p2 = PropertyCheck::new("2a", method, true, String::new());
    let mut p3 = PropertyCheck::new("3a", method, true, String::new());
    for xi in &xis {
        let c = spec.psi_coefficient(xi);
        let l1: u64 = xi.iter().map(|x| x.unsigned_abs()).sum();
        if c.is_negative() && p2.passed {
            p2.passed = false;
            p2.failing_sample = Some(format!("xi = {xi:?}"));
        }
        if l1 > spec.k as u64 && !c.is_zero() && p3.passed {
            p3.passed = false;
            p3.failing_sample = Some(format!("xi = {xi:?}, ||xi||_1 = {l1}"));
        }
    }
    p2.detail = format!("chi_hat(xi) >= 0 in exact arithmetic at {} frequencies", xis.len());
    p3.detail = format!("chi_hat(xi) = 0 for ||xi||_1 > {} at {} frequencies", spec.k, xis.len());
    props.push(p2);
    props.push(p3);

    props.push(PropertyCheck::new(
        "chi_hat_0",
        Method::Exact,
        chi_hat(spec, &vec![0; spec.dim]).is_one(),
        "chi_hat(0) = (const_term - 4^k tau^k) / Z = 1".into(),
    ));

    let p4 = match tensor_grid_integral(spec) {
        Ok(v) => PropertyCheck::new(
            "4a",
            Method::Quadrature,
            (v - 1.0).abs() <= 1e-6,
            format!("tensor rule with {} nodes per axis: ∫chi = {v:.12}", spec.k + 1),
        ),
        Err(e) => PropertyCheck::new("4a", Method::Quadrature, false, e.to_string()),
    };
    props.push(p4);

    let (est, se) = abs_integral_estimate(spec, cfg.strata, cfg.per_stratum, cfg.seed);
    props.push(PropertyCheck::new(
        "5a",
        Method::Quadrature,
        est + 3.0 * se <= 3.0,
        format!(
            "∫|chi| = 1 + 2∫chi^- ≈ {est:.6} ± {se:.2e} ({} strata x {} samples)",
            cfg.strata, cfg.per_stratum
        ),
    ));

    KernelReport {
        kernel: "chi".into(),
        parameters: json!({
            "D": spec.dim,
            "k": spec.k,
            "tau": spec.tau.to_string(),
            "s": spec.s,
            "const_term_digits": spec.const_term.to_string().len(),
            "Z": format!("{:e}", spec.z.to_f64().unwrap_or(f64::NAN)),
        }),
        properties: props,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn constant_terms() {
        assert_eq!(chi_constant_term(1, 1).unwrap(), BigInt::from(2));
        assert_eq!(chi_constant_term(2, 2).unwrap(), BigInt::from(20));
        assert_eq!(chi_constant_term(2, 3).unwrap(), BigInt::from(112));
        assert_eq!(chi_constant_term(3, 0).unwrap(), BigInt::from(1));
        assert!(matches!(chi_constant_term(4, 100_000), Err(KernelError::CapExceeded { .. })));
    }

    #[test]
    fn normalization_regimes() {
        assert!(matches!(make_chi(1, 1, 0.5), Err(KernelError::NotNormalizable { .. })));
        assert!(matches!(make_chi(2, 3, 0.5), Err(KernelError::NotNormalizable { .. })));
        let spec = make_chi(4, 200, 0.5).unwrap();
        assert!(spec.z.is_positive());
        assert!((spec.tau_ratio() - 0.06479100228378026).abs() < 1e-12);
    }

    #[test]
    fn hat_matches_quadrature_small() {
        let spec = make_chi_with_tau(2, 3, ratio(6, 5)).unwrap();
        let n = 16;
        for xi in [[0i64, 0], [1, 0], [1, -2], [3, 0], [2, 2]] {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let y = [a as f64 / n as f64, b as f64 / n as f64];
                    let phase = 2.0 * PI * (xi[0] as f64 * y[0] + xi[1] as f64 * y[1]);
                    acc += chi_eval_lifted(&spec, &y) * phase.cos();
                }
            }
            acc /= (n * n) as f64;
            assert!((acc - chi_hat_f64(&spec, &xi)).abs() < 1e-6, "xi = {xi:?}");
        }
    }

    #[test]
    fn symmetric_under_signed_permutations() {
        let spec = make_chi_with_tau(3, 5, ratio(3, 2)).unwrap();
        let a = chi_hat(&spec, &[1, -2, 0]);
        for xi in [[-1, 2, 0], [2, 1, 0], [0, -1, -2], [-2, 0, 1]] {
            assert_eq!(chi_hat(&spec, &xi), a);
        }
    }

    #[test]
    fn small_kernel_report() {
        let spec = make_chi_with_tau(2, 6, ratio(5, 4)).unwrap();
        let cfg = ChiCheckConfig::for_spec(&spec, 1);
        assert_eq!(cfg.exhaustive_radius, Some(8));
        let rep = verify_chi_properties(&spec, &cfg);
        assert!(rep.all_passed(), "{}", rep.to_json());
    }

    #[test]
    fn reduced_tau_breaks_sign() {
        let mut spec = make_chi(2, 30, 0.5).unwrap();
        spec.tau = ratio(4, 5);
        let cfg = ChiCheckConfig {
            sign_samples: 2000,
            ..ChiCheckConfig::for_spec(&spec, 2)
        };
        let rep = verify_chi_properties(&spec, &cfg);
        let p = rep.get("1a").unwrap();
        assert!(!p.passed);
        assert!(p.failing_sample.is_some());
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(xi_l1_ball(2, 1).len(), 5);
        assert_eq!(xi_ball_size(2, 8) as usize, xi_l1_ball(2, 8).len());
        assert_eq!(xi_ball_size(3, 4) as usize, xi_l1_ball(3, 4).len());
    }
}
