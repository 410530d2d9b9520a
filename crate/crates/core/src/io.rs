//! Text-format helpers shared by the CSV loader and the index file formats,
//! plus a magic-dispatching loader for the three index kinds.

use std::io::BufRead;

use crate::baselines::QdafnIndex;
use crate::drusilla::DrusillaIndex;
use crate::error::{Error, Result};
use crate::guaranteed::GuaranteedIndex;

/// Formats a real with 17 significant digits, enough to round-trip any f64.
pub fn fmt_real(x: f64) -> String {
    format!("{:.16e}", x)
}

pub(crate) fn join_reals(xs: &[f64]) -> String {
    xs.iter()
        .map(|&x| fmt_real(x))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Line-oriented reader that tracks line numbers for error reporting.
pub(crate) struct LineReader<R> {
    inner: R,
    line: usize,
}

impl<R: BufRead> LineReader<R> {
    pub fn new(inner: R) -> Self {
        LineReader { inner, line: 0 }
    }

    pub fn line_number(&self) -> usize {
        self.line
    }

    /// Next line without its terminator; errors at end of input.
    pub fn next_line(&mut self) -> Result<String> {
        let mut buf = String::new();
        let n = self.inner.read_line(&mut buf)?;
        if n == 0 {
            return Err(Error::BadIndexFile(format!(
                "unexpected end of file after line {}",
                self.line
            )));
        }
        self.line += 1;
        while buf.ends_with('\n') || buf.ends_with('\r') {
            buf.pop();
        }
        Ok(buf)
    }

    pub fn parse_error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }
}

pub(crate) fn parse_real(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a real number, got {token:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {token:?}"),
        });
    }
    Ok(value)
}

pub(crate) fn parse_real_vec(text: &str, expected_len: usize, line: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|tok| parse_real(tok, line))
        .collect::<Result<_>>()?;
    if values.len() != expected_len {
        return Err(Error::Parse {
            line,
            message: format!("expected {} values, got {}", expected_len, values.len()),
        });
    }
    Ok(values)
}

pub(crate) fn parse_count(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a non-negative integer, got {token:?}"),
    })
}

/// An index of any kind, loaded by dispatching on the file's magic line.
#[derive(Debug)]
pub enum AnyIndex {
    Drusilla(DrusillaIndex),
    Guaranteed(GuaranteedIndex),
    Qdafn(QdafnIndex),
}

impl AnyIndex {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyIndex::Drusilla(_) => "drusilla",
            AnyIndex::Guaranteed(_) => "guaranteed",
            AnyIndex::Qdafn(_) => "qdafn",
        }
    }
}

/// Reads an index file, selecting the concrete format from its magic line.
pub fn read_any_index(reader: impl BufRead) -> Result<AnyIndex> {
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    let magic = text.lines().next().unwrap_or("");
    match magic {
        crate::drusilla::MAGIC => Ok(AnyIndex::Drusilla(DrusillaIndex::read_from(
            text.as_bytes(),
        )?)),
        crate::guaranteed::MAGIC => Ok(AnyIndex::Guaranteed(GuaranteedIndex::read_from(
            text.as_bytes(),
        )?)),
        crate::baselines::QDAFN_MAGIC => Ok(AnyIndex::Qdafn(QdafnIndex::read_from(
            text.as_bytes(),
        )?)),
        other => Err(Error::BadIndexFile(format!(
            "unrecognized magic line {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip_is_exact() {
        for &x in &[0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 1e-300, 2.5e17, f64::MIN_POSITIVE] {
            let back: f64 = fmt_real(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "round-trip changed {x}");
        }
    }

    #[test]
    fn parse_real_rejects_non_finite() {
        assert!(parse_real("NaN", 1).is_err());
        assert!(parse_real("inf", 1).is_err());
        assert!(parse_real("abc", 1).is_err());
    }
}
