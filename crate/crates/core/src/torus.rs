//! Exact arithmetic on the torus `T^D = R^D / Z^D`.
//!
//! Each coordinate is an unsigned 64-bit numerator `c` standing for `c / 2^64`.
//! Addition and integer scaling wrap, which is exactly reduction mod 1, so an
//! orbit point `n·theta` carries no rounding error for any `n`. Norms leave
//! fixed point only at comparison time.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use rand::Rng;
use thiserror::Error;

/// Numerator of `1/2`.
pub const HALF: u64 = 1 << 63;
pub const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusPoint {
    coords: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bad torus point text: {0}")]
pub struct ParsePointError(pub String);

/// Distance to the nearest integer, as a numerator in `[0, 2^63]`.
#[inline]
pub fn coord_dist(c: u64) -> u64 {
    c.min(c.wrapping_neg())
}

/// Representative of one coordinate in `(-1/2, 1/2]`.
#[inline]
pub fn lift_coord(c: u64) -> f64 {
    if c == HALF {
        0.5
    } else {
        (c as i64) as f64 / TWO_POW_64
    }
}

/// Nearest numerator to `x mod 1`.
pub fn coord_from_f64(x: f64) -> u64 {
    let frac = x.rem_euclid(1.0);
    let scaled = (frac * TWO_POW_64).round();
    if scaled >= TWO_POW_64 {
        0
    } else {
        scaled as u64
    }
}

/// Multiply a numerator by a signed integer, mod 1.
#[inline]
pub fn coord_mul_signed(c: u64, k: i64) -> u64 {
    c.wrapping_mul(k as u64)
}

impl TorusPoint {
    pub fn new(coords: Vec<u64>) -> Self {
        TorusPoint { coords }
    }

    pub fn zero(dim: usize) -> Self {
        TorusPoint {
            coords: vec![0; dim],
        }
    }

    /// Projection of a real vector.
    pub fn from_f64(values: &[f64]) -> Self {
        TorusPoint {
            coords: values.iter().map(|&v| coord_from_f64(v)).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        TorusPoint {
            coords: (0..dim).map(|_| rng.gen::<u64>()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    /// Unique representative in `(-1/2, 1/2]^D`.
    pub fn lift(&self) -> Vec<f64> {
        self.coords.iter().map(|&c| lift_coord(c)).collect()
    }

    /// `max_i ||x_i||_T`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_raw() as f64 / TWO_POW_64
    }

    pub fn sup_norm_raw(&self) -> u64 {
        self.coords.iter().map(|&c| coord_dist(c)).max().unwrap_or(0)
    }

    /// `||lift(x)||_2^2`, summed in ascending coordinate order.
    pub fn lift_norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for &c in &self.coords {
            let t = lift_coord(c);
            acc += t * t;
        }
        acc
    }

    /// `n·x` mod 1.
    pub fn scale(&self, n: u64) -> Self {
        TorusPoint {
            coords: self.coords.iter().map(|&c| c.wrapping_mul(n)).collect(),
        }
    }

    pub fn scale_signed(&self, k: i64) -> Self {
        self.scale(k as u64)
    }

    /// `xi · x` mod 1 for an integer frequency vector.
    pub fn dot_int(&self, xi: &[i64]) -> u64 {
        debug_assert_eq!(xi.len(), self.coords.len());
        self.coords
            .iter()
            .zip(xi)
            .fold(0u64, |acc, (&c, &k)| acc.wrapping_add(coord_mul_signed(c, k)))
    }

    pub fn to_hex(&self) -> String {
        self.coords
            .iter()
            .map(|c| format!("{c:016x}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn from_hex(text: &str) -> Result<Self, ParsePointError> {
        text.split_whitespace()
            .map(|tok| {
                if tok.len() > 16 {
                    return Err(ParsePointError(tok.to_string()));
                }
                u64::from_str_radix(tok, 16).map_err(|_| ParsePointError(tok.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(TorusPoint::new)
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Add for &TorusPoint {
    type Output = TorusPoint;
    fn add(self, rhs: &TorusPoint) -> TorusPoint {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        TorusPoint {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a.wrapping_add(*b))
                .collect(),
        }
    }
}

impl Sub for &TorusPoint {
    type Output = TorusPoint;
    fn sub(self, rhs: &TorusPoint) -> TorusPoint {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        TorusPoint {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a.wrapping_sub(*b))
                .collect(),
        }
    }
}

impl Neg for &TorusPoint {
    type Output = TorusPoint;
    fn neg(self) -> TorusPoint {
        TorusPoint {
            coords: self.coords.iter().map(|c| c.wrapping_neg()).collect(),
        }
    }
}

pub fn lift(x: &TorusPoint) -> Vec<f64> {
    x.lift()
}

pub fn torus_sup_norm(x: &TorusPoint) -> f64 {
    x.sup_norm()
}

/// `||lift(x - center)||_2^2` without allocating the difference.
pub fn lift_euclidean_norm_sq(x: &TorusPoint, center: &TorusPoint) -> f64 {
    assert_eq!(x.dim(), center.dim(), "dimension mismatch");
    let mut acc = 0.0;
    for (a, b) in x.coords.iter().zip(&center.coords) {
        let t = lift_coord(a.wrapping_sub(*b));
        acc += t * t;
    }
    acc
}

pub fn scalar_orbit_point(n: u64, theta: &TorusPoint) -> TorusPoint {
    theta.scale(n)
}

/// Euclidean shell `{ k·width <= |y|_2 < (k+1)·width }` around a torus point.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusSpec {
    pub width: f64,
    pub index: u64,
    pub center: TorusPoint,
}

impl AnnulusSpec {
    pub fn inner_sq(&self) -> f64 {
        let r = self.index as f64 * self.width;
        r * r
    }

    pub fn outer_sq(&self) -> f64 {
        let r = (self.index as f64 + 1.0) * self.width;
        r * r
    }
}

/// Half-open shell test on squared lifted norms.
#[inline]
pub fn shell_contains(norm_sq: f64, index: u64, width: f64) -> bool {
    let inner = index as f64 * width;
    let outer = (index as f64 + 1.0) * width;
    inner * inner <= norm_sq && norm_sq < outer * outer
}

pub fn annulus_contains(a: &AnnulusSpec, x: &TorusPoint) -> bool {
    shell_contains(lift_euclidean_norm_sq(x, &a.center), a.index, a.width)
}
