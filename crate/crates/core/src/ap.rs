//! Exact arithmetic-progression scans over a [`ColorArray`], the theta-gap
//! hypothesis check, and certificate verification.

use serde::{Deserialize, Serialize};

use crate::coloring::{Color, ColorArray};
use crate::torus::{coord_dist, TorusPoint, TWO_POW_64};

/// The progression `start, start + diff, ..., start + (length - 1)·diff`.
///
/// `longest_red_ap` reports every length including 0 (no red position) and
/// 1; the blue witness always has length 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApWitness {
    pub start: usize,
    pub diff: usize,
    pub length: usize,
    pub color: Color,
}

impl ApWitness {
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.length).map(move |i| self.start + i * self.diff)
    }

    /// True iff every covered position lies in `[1, N]` and has `self.color`.
    pub fn holds_in(&self, colors: &ColorArray) -> bool {
        if self.length == 0 {
            return true;
        }
        let last = self.start + (self.length - 1) * self.diff;
        self.start >= 1
            && last <= colors.len()
            && self.positions().all(|n| colors.get(n) == self.color)
    }
}

/// First blue 3-AP in `(d, n)` lexicographic order.
///
/// For each `d`, the bitset `blue & (blue >> d) & (blue >> 2d)` is built one
/// 64-bit word at a time.
pub fn find_blue_3ap(colors: &ColorArray) -> Option<ApWitness> {
    let n = colors.len();
    if n < 3 {
        return None;
    }
    let words = colors.words();
    for d in 1..=(n - 1) / 2 {
        for (w, &word) in words.iter().enumerate() {
            if word == 0 {
                continue;
            }
            let base = w * 64;
            let hits = word & colors.window(base + d) & colors.window(base + 2 * d);
            if hits != 0 {
                let start = base + hits.trailing_zeros() as usize + 1;
                return Some(ApWitness {
                    start,
                    diff: d,
                    length: 3,
                    color: Color::Blue,
                });
            }
        }
    }
    None
}

/// Longest red AP, ties broken by smallest `d` then smallest start.
///
/// Each `d` walks its `d` residue classes once. Differences are abandoned as
/// soon as `(N - 1) / d + 1`, the longest AP any difference `>= d` can fit,
/// no longer beats the current best.
pub fn longest_red_ap(colors: &ColorArray) -> ApWitness {
    let n = colors.len();
    let mut best = ApWitness {
        start: 0,
        diff: 0,
        length: 0,
        color: Color::Red,
    };
    if n == 0 {
        return best;
    }
    let max_d = (n - 1).max(1);
    for d in 1..=max_d {
        if (n - 1) / d < best.length {
            break;
        }
        let (mut len_d, mut start_d) = (0usize, 0usize);
        for r in 1..=d.min(n) {
            let mut run = 0usize;
            let mut run_start = 0usize;
            let mut p = r;
            while p <= n {
                if colors.is_blue(p) {
                    run = 0;
                } else {
                    if run == 0 {
                        run_start = p;
                    }
                    run += 1;
                    if run > len_d || (run == len_d && run_start < start_d) {
                        len_d = run;
                        start_d = run_start;
                    }
                }
                p += d;
            }
        }
        if len_d > best.length {
            best = ApWitness {
                start: start_d,
                diff: d,
                length: len_d,
                color: Color::Red,
            };
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaGap {
    pub passed: bool,
    /// First `d` attaining the minimum of `||d·theta||`.
    pub argmin_d: u64,
    pub min_norm: f64,
    pub threshold: f64,
}

/// Checks `||d·theta||_{T^D} > (1/2) N^{-2/D}` for every `d` in `[N]`.
pub fn theta_gap_check(theta: &TorusPoint, n: u64) -> ThetaGap {
    assert!(n >= 1, "N must be positive");
    let dim = theta.dim();
    let threshold = if dim == 0 {
        0.5
    } else {
        0.5 * (n as f64).powf(-2.0 / dim as f64)
    };
    let step = theta.coords();
    let mut cur = step.to_vec();
    let mut best_raw = u64::MAX;
    let mut argmin = 1;
    for d in 1..=n {
        let raw = cur.iter().map(|&c| coord_dist(c)).max().unwrap_or(0);
        if raw < best_raw {
            best_raw = raw;
            argmin = d;
        }
        for (c, s) in cur.iter_mut().zip(step) {
            *c = c.wrapping_add(*s);
        }
    }
    let min_norm = best_raw as f64 / TWO_POW_64;
    ThetaGap {
        passed: min_norm > threshold,
        argmin_d: argmin,
        min_norm,
        threshold,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateVerdict {
    Accept,
    BlueProgression(ApWitness),
    RedProgression(ApWitness),
}

impl CertificateVerdict {
    pub fn accepted(&self) -> bool {
        matches!(self, CertificateVerdict::Accept)
    }
}

/// Accepts iff the coloring has no blue 3-AP and no red `k`-AP.
pub fn verify_certificate(colors: &ColorArray, k: usize) -> CertificateVerdict {
    if let Some(w) = find_blue_3ap(colors) {
        return CertificateVerdict::BlueProgression(w);
    }
    let red = longest_red_ap(colors);
    if red.length >= k {
        CertificateVerdict::RedProgression(ApWitness { length: k, ..red })
    } else {
        CertificateVerdict::Accept
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blue_example() {
        let c = ColorArray::from_blue_positions(5, [1, 3, 5]);
        let w = find_blue_3ap(&c).unwrap();
        assert_eq!((w.start, w.diff), (1, 2));
        assert!(w.holds_in(&c));
        assert_eq!(find_blue_3ap(&ColorArray::all_red(100)), None);
    }

    #[test]
    fn blue_scan_crosses_word_boundaries() {
        let c = ColorArray::from_blue_positions(300, [60, 130, 200]);
        let w = find_blue_3ap(&c).unwrap();
        assert_eq!((w.start, w.diff), (60, 70));
    }

    #[test]
    fn red_examples() {
        let w = longest_red_ap(&ColorArray::all_red(10));
        assert_eq!((w.start, w.diff, w.length), (1, 1, 10));
        let odd_red = ColorArray::from_blue_positions(10, [2, 4, 6, 8, 10]);
        let w = longest_red_ap(&odd_red);
        assert_eq!((w.start, w.diff, w.length), (1, 2, 5));
        let none = longest_red_ap(&ColorArray::all_blue(7));
        assert_eq!((none.start, none.diff, none.length), (0, 0, 0));
        let single = longest_red_ap(&ColorArray::all_red(1));
        assert_eq!((single.start, single.diff, single.length), (1, 1, 1));
    }

    #[test]
    fn red_ties_prefer_small_d_then_small_start() {
        // R B R B R R: d=1 run length 2 starts at 5; d=2 gives 1,3,5 (len 3).
        let c = ColorArray::from_blue_positions(6, [2, 4]);
        let w = longest_red_ap(&c);
        assert_eq!((w.start, w.diff, w.length), (1, 2, 3));
    }

    #[test]
    fn theta_gap_examples() {
        let zero = TorusPoint::zero(2);
        let g = theta_gap_check(&zero, 10);
        assert!(!g.passed);
        assert_eq!(g.argmin_d, 1);
        assert_eq!(g.min_norm, 0.0);
        let g = theta_gap_check(&TorusPoint::from_f64(&[0.25]), 2);
        assert!(g.passed);
        assert_eq!(g.min_norm, 0.25);
        assert_eq!(g.threshold, 0.125);
    }

    #[test]
    fn certificate_examples() {
        assert!(verify_certificate(&ColorArray::all_red(4), 5).accepted());
        let c = ColorArray::from_blue_positions(10, [4, 5, 6]);
        match verify_certificate(&c, 20) {
            CertificateVerdict::BlueProgression(w) => assert_eq!(w.diff, 1),
            other => panic!("unexpected {other:?}"),
        }
        match verify_certificate(&ColorArray::all_red(5), 5) {
            CertificateVerdict::RedProgression(w) => assert_eq!(w.length, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
