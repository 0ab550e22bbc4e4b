use thiserror::Error;

use crate::coloring::{Color, ColorArray};

/// Largest `k` accepted by [`brute_force_w3`].
pub const ORACLE_K_CAP: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("a valid coloring of [{n_limit}] exists; raise the limit")]
    CapExceeded { n_limit: usize },
    #[error("k = {k} outside [3, {cap}]")]
    KOutOfRange { k: usize, cap: usize },
    #[error("N_limit = {n_limit} below k = {k}")]
    LimitTooSmall { n_limit: usize, k: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub k: usize,
    /// Least `N` for which every coloring of `[N]` has a blue 3-AP or a red `k`-AP.
    pub w: usize,
    /// A valid coloring of `[w - 1]`.
    pub certificate: ColorArray,
    pub nodes: u64,
}

struct Search {
    k: usize,
    n_limit: usize,
    colors: Vec<Color>,
    best: Vec<Color>,
    nodes: u64,
}

impl Search {
    /// Would coloring position `n` (1-based, all earlier positions set) with
    /// `c` complete a forbidden progression ending at `n`?
    fn closes_ap(&self, n: usize, c: Color) -> bool {
        let len = if c == Color::Blue { 3 } else { self.k };
        let at = |p: usize| self.colors[p - 1];
        let mut d = 1;
        while (len - 1) * d < n {
            if (1..len).all(|i| at(n - i * d) == c) {
                return true;
            }
            d += 1;
        }
        false
    }

    /// Returns true once a valid coloring of `[n_limit]` is found.
    fn extend(&mut self) -> bool {
        self.nodes += 1;
        let n = self.colors.len() + 1;
        if n > self.n_limit {
            return true;
        }
        for c in [Color::Red, Color::Blue] {
            if !self.closes_ap(n, c) {
                self.colors.push(c);
                if self.colors.len() > self.best.len() {
                    self.best = self.colors.clone();
                }
                if self.extend() {
                    return true;
                }
                self.colors.pop();
            }
        }
        false
    }
}

/// Exhaustive depth-first search over colorings of `[1..]`, red first,
/// pruning on any blue 3-AP or red `k`-AP.
pub fn brute_force_w3(k: usize, n_limit: usize) -> Result<OracleResult, OracleError> {
    if !(3..=ORACLE_K_CAP).contains(&k) {
        return Err(OracleError::KOutOfRange { k, cap: ORACLE_K_CAP });
    }
    if n_limit < k {
        return Err(OracleError::LimitTooSmall { n_limit, k });
    }
    let mut s = Search {
        k,
        n_limit,
        colors: Vec::new(),
        best: Vec::new(),
        nodes: 0,
    };
    if s.extend() {
        return Err(OracleError::CapExceeded { n_limit });
    }
    let certificate = ColorArray::from_fn(s.best.len(), |n| s.best[n - 1]);
    Ok(OracleResult {
        k,
        w: s.best.len() + 1,
        certificate,
        nodes: s.nodes,
    })
}
