//! Exact integer and rational linear algebra on small dense matrices.
//!
//! Everything here runs on `BigInt`/`BigRational`; no floating point.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn to_big(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

/// Rank over `Q` by fraction-free (Bareiss) elimination.
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    let mut a: IntMatrix = rows.to_vec();
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut r = 0;
    for col in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r][col].clone();
        for i in r + 1..n_rows {
            let factor = a[i][col].clone();
            for j in col + 1..n_cols {
                let num = &a[i][j] * &pivot - &factor * &a[r][j];
                debug_assert!((&num % &prev).is_zero());
                a[i][j] = num / &prev;
            }
            a[i][col] = BigInt::zero();
        }
        prev = pivot;
        r += 1;
    }
    r
}

pub fn rank_i64(rows: &[Vec<i64>]) -> usize {
    rank(&to_big(rows))
}

/// Determinant of a square matrix by Bareiss elimination.
pub fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: IntMatrix = m.to_vec();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Adjugate (transposed cofactor matrix), so `m · adj(m) = det(m) · I`.
pub fn adjugate(m: &[Vec<BigInt>]) -> IntMatrix {
    let n = m.len();
    if n == 1 {
        return vec![vec![BigInt::one()]];
    }
    let mut adj = vec![vec![BigInt::zero(); n]; n];
    for (i, row) in adj.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            // cofactor C_{ji}
            let minor: IntMatrix = m
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != j)
                .map(|(_, r)| {
                    r.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != i)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let d = det(&minor);
            *slot = if (i + j) % 2 == 0 { d } else { -d };
        }
    }
    adj
}

/// Reduced row echelon form over `Q`; returns the nonzero rows and pivot columns.
pub fn rref(rows: &[Vec<BigInt>]) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|v| BigRational::from_integer(v.clone())).collect())
        .collect();
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][col].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n_rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n_cols {
                    let delta = &f * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Primitive integer basis of `{ y : rows · y = 0 }` in `Q^dim`.
pub fn null_space(rows: &[Vec<BigInt>], dim: usize) -> IntMatrix {
    let (red, pivots) = rref(rows);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut y = vec![BigRational::zero(); dim];
            y[f] = BigRational::one();
            for (row, &pc) in red.iter().zip(&pivots) {
                y[pc] = -row[f].clone();
            }
            primitive(&y)
        })
        .collect()
}

/// Scale a rational vector to a primitive integer vector.
pub fn primitive(y: &[BigRational]) -> Vec<BigInt> {
    let l = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = y.iter().map(|v| (v * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|v| v / &g).collect()
    }
}

/// Membership test for the rational span of a set of generators.
#[derive(Clone, Debug)]
pub struct SpanTest {
    dim: usize,
    rank: usize,
    normals: Vec<Vec<i128>>,
}

impl SpanTest {
    pub fn new(generators: &[Vec<i64>], dim: usize) -> Self {
        let big = to_big(generators);
        let rank = if generators.is_empty() { 0 } else { rank(&big) };
        let normals = if generators.is_empty() {
            (0..dim)
                .map(|i| (0..dim).map(|j| i128::from(i == j)).collect())
                .collect()
        } else {
            null_space(&big, dim)
                .into_iter()
                .map(|v| {
                    v.iter()
                        .map(|x| i128::try_from(x).expect("normal vector entry fits in i128"))
                        .collect()
                })
                .collect()
        };
        SpanTest { dim, rank, normals }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.normals
            .iter()
            .all(|n| n.iter().zip(x).map(|(a, &b)| a * b as i128).sum::<i128>() == 0)
    }
}

/// Largest absolute entry of an integer vector.
pub fn sup_norm_big(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> IntMatrix {
        to_big(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_i64(&[vec![1, 0], vec![0, 1]]), 2);
        assert_eq!(rank_i64(&[vec![2, 4], vec![1, 2]]), 1);
        assert_eq!(rank_i64(&[vec![0, 0, 0]]), 0);
        assert_eq!(rank_i64(&[vec![0, 1, 2], vec![0, 2, 4], vec![1, 0, 0]]), 2);
    }

    #[test]
    fn det_and_adjugate() {
        let m = big(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let d = det(&m);
        assert_eq!(d, BigInt::from(18));
        let adj = adjugate(&m);
        for i in 0..3 {
            for j in 0..3 {
                let s: BigInt = (0..3).map(|k| &m[i][k] * &adj[k][j]).sum();
                assert_eq!(s, if i == j { d.clone() } else { BigInt::zero() });
            }
        }
        assert_eq!(det(&big(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
    }

    #[test]
    fn span_membership() {
        let s = SpanTest::new(&[vec![1, 1, 0]], 3);
        assert!(s.contains(&[2, 2, 0]));
        assert!(!s.contains(&[1, 0, 0]));
        let full = SpanTest::new(&[vec![1, 0], vec![0, 1]], 2);
        assert!(full.contains(&[5, -3]));
        let empty = SpanTest::new(&[], 2);
        assert!(empty.contains(&[0, 0]));
        assert!(!empty.contains(&[0, 1]));
    }
}
