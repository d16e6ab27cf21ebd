//! Independent checks for the homotopy solver.
//!
//! * [`multistart_newton`]: Newton from many random points; no completeness
//!   guarantee, but shares nothing with path tracking beyond the residual.
//! * [`exact_verify_rational`]: the fixed-point equations over exact
//!   rationals.
//! * [`oracle_u3`]: degree three solved by case analysis.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cvec::CVec;
use crate::enumerate::{assemble, PathStats, SolutionSet};
use crate::error::{Result, UlamError};
use crate::homotopy::{refine_endpoint, TrackerConfig};
use crate::map::residual;
use crate::polyroots::{roots_aberth, MonicPoly, RootFindConfig};

/// Default sampling radius for [`multistart_newton`].
pub const DEFAULT_BOX_RADIUS: f64 = 3.0;

/// A tuple of exact rationals (kept in lowest terms by `BigRational`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalTuple(Vec<BigRational>);

impl RationalTuple {
    pub fn new(entries: Vec<BigRational>) -> Result<Self> {
        if entries.is_empty() {
            return Err(UlamError::Empty);
        }
        Ok(RationalTuple(entries))
    }

    pub fn from_integers(entries: &[i64]) -> Result<Self> {
        Self::new(entries.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
    }

    /// Exact conversion of finite doubles.
    pub fn from_f64(entries: &[f64]) -> Result<Self> {
        entries
            .iter()
            .enumerate()
            .map(|(index, &v)| BigRational::from_float(v).ok_or(UlamError::NonFinite { index }))
            .collect::<Result<Vec<_>>>()
            .and_then(Self::new)
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Nearest doubles.
    pub fn to_cvec(&self) -> CVec {
        CVec::from_vec_unchecked(
            self.0
                .iter()
                .map(|q| Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0))
                .collect(),
        )
    }
}

impl fmt::Display for RationalTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Parses `p`, `p/q` or a decimal such as `-0.125` or `2.5e-3` exactly.
pub fn parse_rational(input: &str) -> Result<BigRational> {
    let s = input.trim();
    let err = |reason: &str| UlamError::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err("bad numerator"))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err("bad denominator"))?;
        if q.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], i32::from_str(&s[k + 1..]).map_err(|_| err("bad exponent"))?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("not a decimal number"));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).map_err(|_| err("bad digits"))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Ok(if negative { -value } else { value })
}

/// Parses a comma-separated list of rationals.
pub fn parse_rational_tuple(input: &str) -> Result<RationalTuple> {
    RationalTuple::new(input.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?)
}

/// Elementary symmetric functions over the rationals, `e_1..e_n`.
fn elem_sym_exact(x: &[BigRational]) -> Vec<BigRational> {
    let n = x.len();
    let mut e = vec![BigRational::zero(); n + 1];
    e[0] = BigRational::one();
    for (i, xi) in x.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let add = &e[j - 1] * xi;
            e[j] += add;
        }
    }
    e.split_off(1)
}

/// `(-1)^j e_j(x) == x_j` for every `j`, in exact arithmetic.
pub fn exact_verify_rational(x: &RationalTuple) -> bool {
    elem_sym_exact(&x.0)
        .into_iter()
        .zip(&x.0)
        .enumerate()
        .all(|(j, (e, xj))| if j % 2 == 0 { -e == *xj } else { e == *xj })
}

/// Newton (via `refine_endpoint`) from `num_starts` points drawn uniformly
/// from the polydisc `|x_i| <= box_radius`; converged points are deduplicated
/// and canonically ordered.
///
/// In the returned `path_stats`, `total` counts starts; starts whose Newton
/// left the divergence radius count as diverged, those that stalled short of
/// `refine_tol` as max_steps, and singular Jacobians as singular.
pub fn multistart_newton(n: usize, num_starts: usize, box_radius: f64, seed: u64) -> Result<SolutionSet> {
    if n == 0 {
        return Err(UlamError::Empty);
    }
    if num_starts == 0 {
        return Err(UlamError::InvalidParameter("num_starts must be at least 1".into()));
    }
    if !(box_radius > 0.0) {
        return Err(UlamError::InvalidParameter("box_radius must be positive".into()));
    }
    let cfg = TrackerConfig::with_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<CVec> = (0..num_starts)
        .map(|_| {
            let v = (0..n)
                .map(|_| {
                    let r = box_radius * rng.random::<f64>().sqrt();
                    Complex64::from_polar(r, TAU * rng.random::<f64>())
                })
                .collect();
            CVec::from_vec_unchecked(v)
        })
        .collect();

    let outcomes: Vec<Result<(CVec, f64, f64)>> = starts.par_iter().map(|x| refine_endpoint(x, &cfg)).collect();

    let mut stats = PathStats { total: num_starts, ..Default::default() };
    let mut converged = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok((p, res, _)) if res <= cfg.refine_tol => {
                stats.converged += 1;
                converged.push(p);
            }
            Ok((p, _, _)) if !p.is_finite() || p.max_norm() > cfg.divergence_radius => stats.diverged += 1,
            Ok(_) => stats.max_steps += 1,
            Err(_) => stats.singular += 1,
        }
    }
    Ok(assemble(n, &converged, stats, &cfg, Vec::new()))
}

/// `2 t^4 - 2 t^2 - t + 1`, highest power first.
///
/// On the branch `x_1 x_2 = -1` of degree three, substituting `x_2 = -1/x_1`
/// and `x_3 = -2 x_1 - x_2 = -2 x_1 + 1/x_1` (first equation) into the second
/// equation `x_1 x_2 + x_3 (x_1 + x_2) - x_2 = 0` gives
/// `-1 + (x_1 - 1/x_1)(-2 x_1 + 1/x_1) + 1/x_1 = 2 - 2 x_1^2 - 1/x_1^2 + 1/x_1`;
/// multiplying by `-x_1^2` yields this quartic in `x_1`.
pub const U3_QUARTIC: [i64; 5] = [2, 0, -2, -1, 1];

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Rational roots of an integer polynomial (highest power first) and the
/// remaining quotient, by the rational root test and exact division.
fn split_rational_roots(coeffs: &[i64]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut poly: Vec<BigRational> = coeffs.iter().map(|&c| rat(c)).collect();
    let divisors = |v: i64| -> Vec<i64> { (1..=v.abs()).filter(|d| v % d == 0).collect() };
    let lead = *coeffs.first().expect("nonempty polynomial");
    let constant = *coeffs.last().expect("nonempty polynomial");
    let mut candidates = Vec::new();
    for p in divisors(constant) {
        for q in divisors(lead) {
            for sign in [1, -1] {
                let c = BigRational::new(BigInt::from(sign * p), BigInt::from(q));
                if !candidates.contains(&c) {
                    candidates.push(c);
                }
            }
        }
    }
    let mut roots = Vec::new();
    for c in candidates {
        // A root may repeat; divide it out as often as it divides.
        loop {
            let (quotient, remainder) = synthetic_division(&poly, &c);
            if !remainder.is_zero() || poly.len() < 2 {
                break;
            }
            roots.push(c.clone());
            poly = quotient;
        }
    }
    (roots, poly)
}

/// Divides by `(t - c)`; returns quotient and remainder.
fn synthetic_division(poly: &[BigRational], c: &BigRational) -> (Vec<BigRational>, BigRational) {
    let mut acc = BigRational::zero();
    let mut out = Vec::with_capacity(poly.len().saturating_sub(1));
    for (i, a) in poly.iter().enumerate() {
        acc = &acc * c + a;
        if i + 1 < poly.len() {
            out.push(acc.clone());
        }
    }
    (out, acc)
}

/// Completes a branch-two point from `x_1`.
fn lift_branch_two(x1: Complex64) -> CVec {
    let x2 = -1.0 / x1;
    let x3 = -2.0 * x1 - x2;
    CVec::from_vec_unchecked(vec![x1, x2, x3])
}

/// Degree three by case analysis; every candidate is verified before it is
/// returned, exactly for rational points and by residual `< 1e-12` otherwise.
///
/// The third equation factors as `-x_3 (1 + x_1 x_2) = 0`:
/// * `x_3 = 0` leaves the degree-two system `2 x_1 + x_2 = 0`,
///   `x_2 (x_1 - 1) = 0`, with solutions `(0, 0)` and `(1, -2)`;
/// * `x_1 x_2 = -1` reduces to [`U3_QUARTIC`] in `x_1`.
pub fn oracle_u3() -> Result<SolutionSet> {
    let mut points = Vec::new();

    for exact in [[0, 0, 0], [1, -2, 0]] {
        let q = RationalTuple::from_integers(&exact)?;
        if !exact_verify_rational(&q) {
            return Err(UlamError::OracleMismatch(format!("{q} fails the exact check")));
        }
        points.push(q.to_cvec());
    }

    let (rational_roots, rest) = split_rational_roots(&U3_QUARTIC);
    for r in &rational_roots {
        let x2 = -BigRational::one() / r;
        let x3 = -rat(2) * r - &x2;
        let q = RationalTuple::new(vec![r.clone(), x2, x3])?;
        if !exact_verify_rational(&q) {
            return Err(UlamError::OracleMismatch(format!("{q} fails the exact check")));
        }
        points.push(q.to_cvec());
    }

    if rest.len() > 1 {
        let lead = rest[0].to_f64().unwrap_or(f64::NAN);
        let monic: Vec<Complex64> = rest[1..]
            .iter()
            .map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN) / lead, 0.0))
            .collect();
        let poly = MonicPoly::new(CVec::new(monic)?)?;
        let roots = roots_aberth(&poly, &RootFindConfig::default())?;
        for &t in &roots {
            // Newton on the quartic itself to squeeze out the last bits.
            let mut t = t;
            for _ in 0..3 {
                let (v, d) = U3_QUARTIC.iter().fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |(v, d), &c| {
                    (v * t + c as f64, d * t + v)
                });
                if d.norm() == 0.0 {
                    break;
                }
                t -= v / d;
            }
            let x = lift_branch_two(t);
            let res = residual(&x)?.max_norm();
            if !(res < 1e-12) {
                return Err(UlamError::OracleMismatch(format!("{x} has residual {res:e}")));
            }
            points.push(x);
        }
    }

    let cfg = TrackerConfig::default();
    let stats = PathStats {
        total: points.len(),
        converged: points.len(),
        ..Default::default()
    };
    let set = assemble(3, &points, stats, &cfg, Vec::new());
    if set.solutions.len() != points.len() {
        return Err(UlamError::OracleMismatch(format!(
            "{} candidates collapsed to {} solutions",
            points.len(),
            set.solutions.len()
        )));
    }
    Ok(set)
}

/// The exact residual `T(x) - x`.
pub fn rational_residual(x: &RationalTuple) -> Vec<BigRational> {
    elem_sym_exact(&x.0)
        .into_iter()
        .zip(&x.0)
        .enumerate()
        .map(|(j, (e, xj))| if j % 2 == 0 { -e - xj } else { e - xj })
        .collect()
}
