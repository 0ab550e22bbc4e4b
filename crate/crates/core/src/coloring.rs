//! Bit-packed blue/red colorings of `[N] = {1, ..., N}`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Red,
}

impl Color {
    pub fn as_char(self) -> char {
        match self {
            Color::Blue => 'B',
            Color::Red => 'R',
        }
    }
}

/// Bit `n - 1` is set iff position `n` is blue. Bits past `len` stay zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ColorArray {
    len: usize,
    words: Vec<u64>,
}

impl ColorArray {
    pub fn all_red(len: usize) -> Self {
        ColorArray {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn all_blue(len: usize) -> Self {
        let mut c = Self::all_red(len);
        c.words.iter_mut().for_each(|w| *w = u64::MAX);
        c.clear_tail();
        c
    }

    pub fn from_blue_positions<I: IntoIterator<Item = usize>>(len: usize, blue: I) -> Self {
        let mut c = Self::all_red(len);
        for n in blue {
            c.set(n, Color::Blue);
        }
        c
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> Color) -> Self {
        let mut c = Self::all_red(len);
        for n in 1..=len {
            if f(n) == Color::Blue {
                c.set(n, Color::Blue);
            }
        }
        c
    }

    /// Takes ownership of raw words; bits at or beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut c = ColorArray { len, words };
        c.clear_tail();
        c
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Color of position `n` (1-based).
    #[inline]
    pub fn get(&self, n: usize) -> Color {
        if self.is_blue(n) {
            Color::Blue
        } else {
            Color::Red
        }
    }

    #[inline]
    pub fn is_blue(&self, n: usize) -> bool {
        debug_assert!(n >= 1 && n <= self.len);
        let i = n - 1;
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, n: usize, color: Color) {
        assert!(n >= 1 && n <= self.len, "position {n} outside [1, {}]", self.len);
        let i = n - 1;
        let bit = 1u64 << (i % 64);
        match color {
            Color::Blue => self.words[i / 64] |= bit,
            Color::Red => self.words[i / 64] &= !bit,
        }
    }

    pub fn blue_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn blue_positions(&self) -> Vec<usize> {
        (1..=self.len).filter(|&n| self.is_blue(n)).collect()
    }

    /// 64 bits starting at 0-based bit `offset`, zero past the end.
    #[inline]
    pub(crate) fn window(&self, offset: usize) -> u64 {
        let w = offset / 64;
        let r = offset % 64;
        let lo = self.words.get(w).copied().unwrap_or(0);
        if r == 0 {
            lo
        } else {
            let hi = self.words.get(w + 1).copied().unwrap_or(0);
            (lo >> r) | (hi << (64 - r))
        }
    }

    /// `B`/`R` string, one character per position.
    pub fn to_letters(&self) -> String {
        (1..=self.len).map(|n| self.get(n).as_char()).collect()
    }
}

impl fmt::Debug for ColorArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "ColorArray({})", self.to_letters())
        } else {
            write!(f, "ColorArray(len={}, blue={})", self.len, self.blue_count())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_and_tail() {
        let mut c = ColorArray::all_red(70);
        c.set(1, Color::Blue);
        c.set(70, Color::Blue);
        assert_eq!(c.blue_positions(), vec![1, 70]);
        assert_eq!(ColorArray::all_blue(70).blue_count(), 70);
        let raw = ColorArray::from_words(3, vec![u64::MAX]);
        assert_eq!(raw.blue_count(), 3);
    }

    #[test]
    fn window_reads_across_words() {
        let c = ColorArray::from_blue_positions(130, [64, 65, 130]);
        assert_eq!(c.window(63) & 0b11, 0b11);
        assert_eq!(c.window(129), 1);
        assert_eq!(c.window(200), 0);
    }

    #[test]
    fn letters() {
        let c = ColorArray::from_blue_positions(5, [2, 5]);
        assert_eq!(c.to_letters(), "RBRRB");
    }
}
