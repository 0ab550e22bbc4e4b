//! Bounded lattice points of a rational subspace, a short integral basis for
//! the lattice they generate, and certified coefficient bounds.
//!
//! The short basis follows the classical construction: pick independent short
//! vectors `v_1..v_m` from the point set, take the Hermite normal form of the
//! generated lattice in `v`-coordinates (lower triangular), size-reduce the
//! off-diagonal entries to at most half the diagonal, then sweep pairwise
//! `w_i -> w_i ± w_j` while that lowers a sup-norm. Each basis is certified
//! against `max |w_i| <= D·Q` instead of trusting the construction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::intmat::{self, IntMatrix, SpanTest};

/// Default cap on `(2Q+1)^D` box enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("enumeration box of {size} points exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("no nonzero input vectors")]
    EmptyInput,
    #[error("vector is not in the lattice")]
    NotInLattice,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("certification failed: {0}")]
    CertificationFailure(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    /// Rank `m`.
    pub dimension: usize,
    pub vectors: Vec<Vec<BigInt>>,
    pub max_norm: BigInt,
    /// Largest sup-norm among the input points.
    pub source_q: BigInt,
    /// Whether the basis also meets `max |w_i| <= (m/2) max |v_i|` for the
    /// independent short vectors `v_i` it was built from.
    pub mahler_bound_met: bool,
}

impl LatticeBasis {
    pub fn ambient_dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }

    /// `m! (D·Q)^m`.
    pub fn coefficient_bound(&self) -> BigInt {
        let m = self.dimension;
        let dq = BigInt::from(self.ambient_dim()) * &self.source_q;
        let fact: BigInt = (1..=m).map(BigInt::from).product();
        fact * num_traits::pow(dq, m)
    }
}

fn box_size(dim: usize, q: i64) -> u128 {
    let side = (2 * q as u128) + 1;
    side.checked_pow(dim as u32).unwrap_or(u128::MAX)
}

/// All `x` in `span_Q(generators) ∩ Z^D` with `|x|_inf <= q`.
pub fn enumerate_bounded_points(
    generators: &[Vec<i64>],
    q: i64,
) -> Result<Vec<Vec<i64>>, LatticeError> {
    enumerate_bounded_points_capped(generators, q, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_bounded_points_capped(
    generators: &[Vec<i64>],
    q: i64,
    cap: u64,
) -> Result<Vec<Vec<i64>>, LatticeError> {
    let dim = generators.first().ok_or(LatticeError::EmptyInput)?.len();
    for g in generators {
        if g.len() != dim {
            return Err(LatticeError::DimensionMismatch {
                expected: dim,
                found: g.len(),
            });
        }
    }
    let size = box_size(dim, q.max(0));
    if size > cap as u128 {
        return Err(LatticeError::CapExceeded { size, cap });
    }
    let span = SpanTest::new(generators, dim);
    let mut out = Vec::new();
    let mut x = vec![-q; dim];
    loop {
        if span.contains(&x) {
            out.push(x.clone());
        }
        // odometer increment
        let mut i = dim;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if x[i] < q {
                x[i] += 1;
                break;
            }
            x[i] = -q;
        }
    }
}

fn sup_i64(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Independent vectors picked greedily by ascending sup-norm (ties broken
/// lexicographically, so the choice does not depend on input order).
fn short_independent(points: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut sorted: Vec<&Vec<i64>> = points.iter().filter(|p| p.iter().any(|&x| x != 0)).collect();
    sorted.sort_by(|a, b| sup_i64(a).cmp(&sup_i64(b)).then_with(|| a.cmp(b)));
    sorted.dedup();
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    for p in sorted {
        chosen.push(p.clone());
        if intmat::rank_i64(&chosen) < chosen.len() {
            chosen.pop();
        }
    }
    chosen
}

/// First set of `m` columns (lexicographic) whose `m x m` minor is invertible.
fn invertible_minor(rows: &[Vec<BigInt>]) -> Option<(Vec<usize>, IntMatrix, BigInt)> {
    let m = rows.len();
    let dim = rows.first()?.len();
    let mut cols: Vec<usize> = (0..m).collect();
    loop {
        let minor: IntMatrix = rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let d = intmat::det(&minor);
        if !d.is_zero() {
            return Some((cols, minor, d));
        }
        // next combination
        let mut i = m;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if cols[i] < dim - m + i {
                cols[i] += 1;
                for j in i + 1..m {
                    cols[j] = cols[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lower-triangular Hermite basis of the lattice generated by `gens` in `Z^m`.
/// Row `i` has zeros past column `i` and a positive diagonal entry.
fn lower_hermite(mut gens: Vec<Vec<BigInt>>, m: usize) -> Result<IntMatrix, LatticeError> {
    let mut basis: Vec<Option<Vec<BigInt>>> = vec![None; m];
    for col in (0..m).rev() {
        loop {
            let mut nonzero: Vec<usize> = (0..gens.len()).filter(|&i| !gens[i][col].is_zero()).collect();
            if nonzero.len() <= 1 {
                if let Some(&i) = nonzero.first() {
                    let mut v = gens.swap_remove(i);
                    if v[col].is_negative() {
                        v.iter_mut().for_each(|x| *x = -x.clone());
                    }
                    basis[col] = Some(v);
                }
                break;
            }
            nonzero.sort_by(|&a, &b| gens[a][col].abs().cmp(&gens[b][col].abs()));
            let p = nonzero[0];
            let pivot_row = gens[p].clone();
            for &i in &nonzero[1..] {
                let q = gens[i][col].div_floor(&pivot_row[col]);
                for (x, y) in gens[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
            }
        }
        gens.retain(|g| g.iter().any(|x| !x.is_zero()));
    }
    basis
        .into_iter()
        .map(|r| r.ok_or(LatticeError::EmptyInput))
        .collect()
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest integer to a / b for b > 0
    let num: BigInt = a * 2 + b;
    num.div_floor(&(b * 2))
}

fn sup_big(v: &[BigInt]) -> BigInt {
    intmat::sup_norm_big(v)
}

/// Short integral basis of the lattice generated by `points`.
pub fn short_basis(points: &[Vec<i64>]) -> Result<LatticeBasis, LatticeError> {
    let dim = points.first().ok_or(LatticeError::EmptyInput)?.len();
    for p in points {
        if p.len() != dim {
            return Err(LatticeError::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
    }
    let v = short_independent(points);
    let m = v.len();
    if m == 0 {
        return Err(LatticeError::EmptyInput);
    }
    let q = points.iter().map(|p| sup_i64(p)).max().unwrap_or(0);
    let v_big = intmat::to_big(&v);
    let (cols, minor, det) = invertible_minor(&v_big).ok_or(LatticeError::EmptyInput)?;
    let adj = intmat::adjugate(&minor);
    // x = sum_j c_j v_j with c = x_S · minor^{-1}, so det·c = x_S · adj.
    let coords: Vec<Vec<BigInt>> = points
        .iter()
        .filter(|p| p.iter().any(|&x| x != 0))
        .map(|p| {
            (0..m)
                .map(|j| {
                    cols.iter()
                        .enumerate()
                        .map(|(r, &c)| BigInt::from(p[c]) * &adj[r][j])
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut tri = lower_hermite(coords, m)?;
    // size reduction: |t_ij| <= t_jj / 2 for j < i
    for i in 0..m {
        for j in (0..i).rev() {
            let qn = round_div(&tri[i][j], &tri[j][j]);
            if !qn.is_zero() {
                let row_j = tri[j].clone();
                for (x, y) in tri[i].iter_mut().zip(&row_j) {
                    *x -= &qn * y;
                }
            }
        }
    }
    let mut w: Vec<Vec<BigInt>> = Vec::with_capacity(m);
    for t in &tri {
        let mut acc = vec![BigInt::zero(); dim];
        for (coef, vj) in t.iter().zip(&v_big) {
            for (a, b) in acc.iter_mut().zip(vj) {
                *a += coef * b;
            }
        }
        let mut out = Vec::with_capacity(dim);
        for a in acc {
            let (quot, rem) = a.div_rem(&det);
            if !rem.is_zero() {
                return Err(LatticeError::CertificationFailure(
                    "basis vector is not integral".into(),
                ));
            }
            out.push(quot);
        }
        w.push(out);
    }
    greedy_sweeps(&mut w);
    let max_norm = w.iter().map(|x| sup_big(x)).max().unwrap_or_else(BigInt::zero);
    let bound = BigInt::from(dim as i64 * q);
    if max_norm > bound {
        return Err(LatticeError::CertificationFailure(format!(
            "max norm {max_norm} exceeds D*Q = {bound}"
        )));
    }
    let v_max = v.iter().map(|x| sup_i64(x)).max().unwrap_or(0);
    let mahler_bound_met = &max_norm * 2 <= BigInt::from(m as i64 * v_max);
    Ok(LatticeBasis {
        dimension: m,
        vectors: w,
        max_norm,
        source_q: BigInt::from(q),
        mahler_bound_met,
    })
}

/// Replace `w_i` by `w_i ± w_j` while that strictly lowers `|w_i|`.
fn greedy_sweeps(w: &mut [Vec<BigInt>]) {
    let m = w.len();
    loop {
        let mut improved = false;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                for sign in [1i32, -1] {
                    let cand: Vec<BigInt> = w[i]
                        .iter()
                        .zip(&w[j])
                        .map(|(a, b)| if sign > 0 { a + b } else { a - b })
                        .collect();
                    if sup_big(&cand) < sup_big(&w[i]) {
                        w[i] = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Unique integer coefficients of `x` in `basis`, solved on an invertible
/// `m x m` minor through its adjugate.
///
/// When `|x|_inf <= Q` the coefficients are checked against `m! (D·Q)^m`.
pub fn express_in_basis(x: &[i64], basis: &LatticeBasis) -> Result<Vec<BigInt>, LatticeError> {
    let dim = basis.ambient_dim();
    if x.len() != dim {
        return Err(LatticeError::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    let m = basis.dimension;
    let (cols, minor, det) =
        invertible_minor(&basis.vectors).ok_or(LatticeError::EmptyInput)?;
    let adj = intmat::adjugate(&minor);
    // x_S = sum_i n_i w_i[S]  =>  n = x_S · minor^{-1}
    let mut coeffs = Vec::with_capacity(m);
    for i in 0..m {
        let num: BigInt = cols
            .iter()
            .enumerate()
            .map(|(r, &c)| BigInt::from(x[c]) * &adj[r][i])
            .sum();
        let (quot, rem) = num.div_rem(&det);
        if !rem.is_zero() {
            return Err(LatticeError::NotInLattice);
        }
        coeffs.push(quot);
    }
    for (c, xc) in x.iter().enumerate() {
        let rebuilt: BigInt = coeffs.iter().zip(&basis.vectors).map(|(n, w)| n * &w[c]).sum();
        if rebuilt != BigInt::from(*xc) {
            return Err(LatticeError::NotInLattice);
        }
    }
    if BigInt::from(sup_i64(x)) <= basis.source_q {
        let bound = basis.coefficient_bound();
        if let Some(bad) = coeffs.iter().find(|n| n.abs() > bound) {
            return Err(LatticeError::CertificationFailure(format!(
                "coefficient {bad} exceeds m!(DQ)^m = {bound}"
            )));
        }
    }
    Ok(coeffs)
}

/// Outcome of certifying every bounded point of one subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeCertificate {
    pub points: usize,
    pub rank: usize,
    pub max_norm: BigInt,
    pub norm_bound: BigInt,
    pub max_coefficient: BigInt,
    pub coefficient_bound: BigInt,
    pub mahler_bound_met: bool,
}

/// Enumerate, reduce and express every bounded point, failing on any breach.
pub fn certify_subspace(generators: &[Vec<i64>], q: i64) -> Result<LatticeCertificate, LatticeError> {
    let points = enumerate_bounded_points(generators, q)?;
    let basis = short_basis(&points)?;
    let mut max_coefficient = BigInt::zero();
    for p in &points {
        let n = express_in_basis(p, &basis)?;
        for c in n {
            max_coefficient = max_coefficient.max(c.abs());
        }
    }
    let dim = basis.ambient_dim();
    Ok(LatticeCertificate {
        points: points.len(),
        rank: basis.dimension,
        norm_bound: BigInt::from(dim) * &basis.source_q,
        max_norm: basis.max_norm.clone(),
        coefficient_bound: basis.coefficient_bound(),
        max_coefficient,
        mahler_bound_met: basis.mahler_bound_met,
    })
}

/// Sup-norm of an integer vector as `i64`, for reporting.
pub fn norm_i64(v: &[BigInt]) -> Option<i64> {
    sup_big(v).to_i64()
}
