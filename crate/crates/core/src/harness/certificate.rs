use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::coloring::{Color, ColorArray};

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("length mismatch: header says N={expected}, found {found} colors")]
    LengthMismatch { expected: usize, found: usize },
    #[error("bad character {ch:?} at position {position}")]
    BadCharacter { position: usize, ch: char },
    #[error("missing trailing newline")]
    MissingNewline,
    #[error("unexpected data after the color line")]
    TrailingData,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `VDW3 v1 N=<N> k=<k>\n` followed by `N` characters over `{B, R}` and `\n`.
pub fn render_certificate(colors: &ColorArray, k: usize) -> String {
    format!("VDW3 v1 N={} k={k}\n{}\n", colors.len(), colors.to_letters())
}

fn header_value(token: Option<&str>, key: &str) -> Result<usize, CertificateError> {
    let bad = || CertificateError::MalformedHeader(format!("expected {key}<int>"));
    let t = token.ok_or_else(bad)?;
    let digits = t.strip_prefix(key).ok_or_else(bad)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    digits.parse().map_err(|_| bad())
}

pub fn parse_certificate(text: &str) -> Result<(ColorArray, usize), CertificateError> {
    let (header, rest) = text
        .split_once('\n')
        .ok_or_else(|| CertificateError::MalformedHeader("missing header line".into()))?;
    let mut tokens = header.split(' ');
    if tokens.next() != Some("VDW3") || tokens.next() != Some("v1") {
        return Err(CertificateError::MalformedHeader(format!("{header:?}")));
    }
    let n = header_value(tokens.next(), "N=")?;
    let k = header_value(tokens.next(), "k=")?;
    if tokens.next().is_some() {
        return Err(CertificateError::MalformedHeader(format!("{header:?}")));
    }
    let (body, tail) = match rest.split_once('\n') {
        Some(parts) => parts,
        None => (rest, ""),
    };
    let mut colors = ColorArray::all_red(n);
    let mut count = 0;
    for (i, ch) in body.chars().enumerate() {
        let c = match ch {
            'B' => Color::Blue,
            'R' => Color::Red,
            _ => return Err(CertificateError::BadCharacter { position: i + 1, ch }),
        };
        if i < n {
            colors.set(i + 1, c);
        }
        count += 1;
    }
    if count != n {
        return Err(CertificateError::LengthMismatch {
            expected: n,
            found: count,
        });
    }
    if !rest.contains('\n') {
        return Err(CertificateError::MissingNewline);
    }
    if !tail.is_empty() {
        return Err(CertificateError::TrailingData);
    }
    Ok((colors, k))
}

pub fn save_certificate(colors: &ColorArray, k: usize, path: &Path) -> Result<(), CertificateError> {
    fs::write(path, render_certificate(colors, k))?;
    Ok(())
}

pub fn load_certificate(path: &Path) -> Result<(ColorArray, usize), CertificateError> {
    parse_certificate(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_text() {
        let c = ColorArray::from_blue_positions(5, [2, 5]);
        let text = render_certificate(&c, 3);
        assert_eq!(text, "VDW3 v1 N=5 k=3\nRBRRB\n");
        let (back, k) = parse_certificate(&text).unwrap();
        assert_eq!((back, k), (c, 3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_certificate("VDW3 v1 N=5 k=3\nRBRR\n"),
            Err(CertificateError::LengthMismatch { expected: 5, found: 4 })
        ));
        assert!(matches!(
            parse_certificate("VDW3 v1 N=3 k=3\nRXR\n"),
            Err(CertificateError::BadCharacter { position: 2, ch: 'X' })
        ));
        assert!(matches!(parse_certificate("VDW3 v1 N=3 k=3\nRRR"), Err(CertificateError::MissingNewline)));
        assert!(matches!(parse_certificate("VDW2 v1 N=3 k=3\nRRR\n"), Err(CertificateError::MalformedHeader(_))));
        assert!(matches!(parse_certificate("VDW3 v1 N=3 k=x\nRRR\n"), Err(CertificateError::MalformedHeader(_))));
        assert!(matches!(parse_certificate("VDW3 v1 N=3 k=3\nRRR\nB\n"), Err(CertificateError::TrailingData)));
        assert_eq!(parse_certificate("VDW3 v1 N=0 k=3\n\n").unwrap().0.len(), 0);
    }
}
