//! Complex tuples.
//!
//! A [`CVec`] is used both for root tuples `(x_1, ..., x_n)` and for the
//! coefficient vector of the monic polynomial `z^n + c_1 z^{n-1} + ... + c_n`.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UlamError};

/// An ordered tuple of complex numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVec(Vec<Complex64>);

impl CVec {
    /// Wraps `entries`, rejecting empty input.
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(UlamError::Empty);
        }
        Ok(CVec(entries))
    }

    /// Builds a tuple from real entries.
    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    /// Builds a tuple from separate real and imaginary parts.
    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(UlamError::LengthMismatch {
                expected: re.len(),
                actual: im.len(),
            });
        }
        Self::new(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        CVec(entries)
    }

    /// Degree `n` of the tuple.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.im).collect()
    }

    /// Checks the finiteness invariant, reporting the first offending index.
    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            Some(index) => Err(UlamError::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.check_finite().is_ok()
    }

    /// Max-norm `max_i |x_i|`.
    pub fn max_norm(&self) -> f64 {
        max_norm(&self.0)
    }

    /// Max-norm distance to `other`.
    ///
    /// # Panics
    /// If the lengths differ.
    pub fn dist_max(&self, other: &CVec) -> f64 {
        assert_eq!(self.len(), other.len(), "length mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Component-wise complex conjugate.
    pub fn conj(&self) -> CVec {
        CVec(self.0.iter().map(|c| c.conj()).collect())
    }

    /// Largest imaginary part in absolute value.
    pub fn max_abs_im(&self) -> f64 {
        self.0.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

impl Index<usize> for CVec {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl<'a> IntoIterator for &'a CVec {
    type Item = &'a Complex64;
    type IntoIter = std::slice::Iter<'a, Complex64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for CVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_complex(*c))?;
        }
        write!(f, ")")
    }
}

/// Formats `c` in the literal syntax accepted by [`parse_complex`].
pub fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Parses a complex literal: `re`, `re+imi`, `re-imi` or `imi`.
///
/// Exponents are allowed in both parts (`1e-3-2.5e2i`).
pub fn parse_complex(input: &str) -> Result<Complex64> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let err = |reason: &str| UlamError::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    if s.is_empty() {
        return Err(err("empty literal"));
    }
    let Some(body) = s.strip_suffix('i') else {
        let re = f64::from_str(&s).map_err(|_| err("not a real number"))?;
        return Ok(Complex64::new(re, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let re = f64::from_str(re_part).map_err(|_| err("bad real part"))?;
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => f64::from_str(other).map_err(|_| err("bad imaginary part"))?,
    };
    Ok(Complex64::new(re, im))
}

/// Parses a comma-separated list of complex literals into a tuple.
pub fn parse_tuple(input: &str) -> Result<CVec> {
    let entries = input
        .split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    let v = CVec::new(entries)?;
    v.check_finite()?;
    Ok(v)
}

impl FromStr for CVec {
    type Err = UlamError;

    fn from_str(s: &str) -> Result<Self> {
        parse_tuple(s)
    }
}
