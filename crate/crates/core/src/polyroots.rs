//! Monic univariate polynomials and simultaneous root finding.
//!
//! Gives the inverse direction of the Ulam map (coefficients to roots) and a
//! second Ulam test that compares root and coefficient multisets.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cvec::CVec;
use crate::error::{Result, UlamError};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Highest degree accepted by [`roots_aberth`].
pub const MAX_DEGREE: usize = 32;

/// `z^n + c_1 z^{n-1} + ... + c_n`; the leading 1 is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPoly {
    coeffs: CVec,
}

impl MonicPoly {
    pub fn new(coeffs: CVec) -> Result<Self> {
        coeffs.check_finite()?;
        Ok(MonicPoly { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &CVec {
        &self.coeffs
    }

    /// `(P(z), P'(z))` from one Horner pass.
    pub fn eval_horner(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = ONE;
        let mut deriv = ZERO;
        for &c in &self.coeffs {
            deriv = deriv * z + value;
            value = value * z + c;
        }
        (value, deriv)
    }

    /// Horner evaluation of `|z|^n + |c_1| |z|^{n-1} + ...`, the scale of the
    /// rounding error in [`eval_horner`](Self::eval_horner).
    fn abs_bound(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().fold(1.0, |acc, c| acc * r + c.norm())
    }
}

/// Settings for [`roots_aberth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootFindConfig {
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub initial_radius_factor: f64,
}

impl Default for RootFindConfig {
    fn default() -> Self {
        RootFindConfig {
            max_iterations: 1000,
            convergence_tol: 1e-13,
            initial_radius_factor: 1.0,
        }
    }
}

impl RootFindConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(UlamError::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(UlamError::InvalidParameter("convergence_tol must be positive".into()));
        }
        if !(self.initial_radius_factor > 0.0) {
            return Err(UlamError::InvalidParameter("initial_radius_factor must be positive".into()));
        }
        Ok(())
    }
}

/// All roots of `p` by Ehrlich-Aberth iteration, in no particular order.
///
/// Starts from points on the circle of radius
/// `initial_radius_factor * (1 + max |c_j|)` at equally spaced angles with a
/// fixed phase offset. A root stops moving once its update drops below
/// `convergence_tol` or its residual is at the rounding level of Horner's
/// scheme; the latter is what ends iteration at multiple roots, which Aberth
/// approaches only linearly. On failure the best iterate is carried in
/// [`UlamError::NoConvergence`].
pub fn roots_aberth(p: &MonicPoly, cfg: &RootFindConfig) -> Result<CVec> {
    cfg.validate()?;
    let n = p.degree();
    if n > MAX_DEGREE {
        return Err(UlamError::DegreeOutOfRange { n, min: 1, max: MAX_DEGREE });
    }
    let radius = cfg.initial_radius_factor * (1.0 + p.coeffs.max_norm());
    let offset = 0.4;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, (TAU * k as f64 + offset) / n as f64))
        .collect();
    let mut done = vec![false; n];

    for _ in 0..cfg.max_iterations {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (value, deriv) = p.eval_horner(z[i]);
            if value.norm() <= 4.0 * f64::EPSILON * p.abs_bound(z[i]) {
                done[i] = true;
                continue;
            }
            let ratio = value / deriv;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
            let step = ratio / (ONE - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(UlamError::NoConvergence {
                    iterations: cfg.max_iterations,
                    best: CVec::from_vec_unchecked(z),
                });
            }
            z[i] -= step;
            max_step = max_step.max(step.norm());
            if step.norm() < cfg.convergence_tol {
                done[i] = true;
            }
        }
        if max_step < cfg.convergence_tol || done.iter().all(|&d| d) {
            return Ok(CVec::from_vec_unchecked(z));
        }
    }
    Err(UlamError::NoConvergence {
        iterations: cfg.max_iterations,
        best: CVec::from_vec_unchecked(z),
    })
}

/// Whether `a` and `b` agree as multisets: some bijection pairs every `a_i`
/// with a distinct `b_j` at distance at most `tol`.
///
/// Decided exactly by maximum bipartite matching on the graph of admissible
/// pairs (augmenting paths), so no greedy pairing can miss a valid bijection.
pub fn multiset_match(a: &CVec, b: &CVec, tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| (a[i] - b[j]).norm() <= tol).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];

    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }

    (0..n).all(|i| {
        let mut seen = vec![false; n];
        augment(i, &adj, &mut seen, &mut owner)
    })
}

/// Ulam test through the inverse map: the roots of the polynomial with
/// coefficient vector `c` must match `c` as a multiset.
pub fn verify_ulam_by_roots(c: &CVec, cfg: &RootFindConfig, tol: f64) -> Result<bool> {
    let p = MonicPoly::new(c.clone())?;
    let roots = roots_aberth(&p, cfg)?;
    Ok(multiset_match(&roots, c, tol))
}
