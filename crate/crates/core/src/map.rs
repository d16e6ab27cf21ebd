//! The roots-to-coefficients map and the fixed-point system built on it.
//!
//! For a root tuple `x = (x_1, ..., x_n)` the map returns the coefficient
//! vector of `(z - x_1)...(z - x_n) = z^n + c_1 z^{n-1} + ... + c_n`, so that
//! `c_j = (-1)^j e_j(x)` with `e_j` the j-th elementary symmetric function.
//! A tuple is an Ulam tuple when it is mapped to itself; the residual used
//! throughout the crate is `F(x) = T(x) - x`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cvec::{max_norm, CVec};
use crate::error::{Result, UlamError};

/// Orbit escape radius (max-norm) used by [`iterate_map`].
pub const ORBIT_DIVERGENCE_RADIUS: f64 = 1e8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The fixed-point system of a given degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UlamSystem {
    n: usize,
}

impl UlamSystem {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(UlamError::Empty);
        }
        Ok(UlamSystem { n })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Degree of equation `j` (0-based), `j + 1`.
    pub fn equation_degree(&self, j: usize) -> usize {
        j + 1
    }

    /// Bezout number of the system, `n!`.
    pub fn bezout_number(&self) -> usize {
        (1..=self.n).product()
    }

    fn check(&self, x: &CVec) -> Result<()> {
        if x.len() != self.n {
            return Err(UlamError::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        x.check_finite()
    }

    pub fn residual(&self, x: &CVec) -> Result<CVec> {
        self.check(x)?;
        residual(x)
    }

    pub fn jacobian(&self, x: &CVec) -> Result<DMatrix<Complex64>> {
        self.check(x)?;
        jacobian(x)
    }
}

/// Writes `e_0 = 1, e_1, ..., e_m` of `x` into `out[..=m]`, one factor at a time.
pub(crate) fn elem_sym_into(x: &[Complex64], out: &mut [Complex64]) {
    let m = x.len();
    debug_assert!(out.len() > m);
    out[0] = ONE;
    for e in out[1..=m].iter_mut() {
        *e = ZERO;
    }
    for (i, &xi) in x.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let prev = out[j - 1];
            out[j] += xi * prev;
        }
    }
}

/// `F(x) = T(x) - x`, written into `out`.
pub(crate) fn residual_into(x: &[Complex64], out: &mut [Complex64]) {
    let n = x.len();
    let mut e = vec![ZERO; n + 1];
    elem_sym_into(x, &mut e);
    for j in 0..n {
        let t = if j % 2 == 0 { -e[j + 1] } else { e[j + 1] };
        out[j] = t - x[j];
    }
}

/// Jacobian of the residual, written into `jac` (row = equation).
///
/// Each column needs the symmetric functions of `x` with one entry removed;
/// these are re-expanded from scratch instead of dividing the full product by
/// `(z - x_k)`, which loses accuracy when entries nearly coincide.
pub(crate) fn jacobian_into(x: &[Complex64], jac: &mut DMatrix<Complex64>) {
    let n = x.len();
    let mut reduced = Vec::with_capacity(n);
    let mut e = vec![ZERO; n];
    for k in 0..n {
        reduced.clear();
        reduced.extend(x.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, v)| *v));
        elem_sym_into(&reduced, &mut e);
        for j in 0..n {
            // d e_{j+1} / d x_k = e_j(x without x_k)
            let d = if j % 2 == 0 { -e[j] } else { e[j] };
            jac[(j, k)] = if j == k { d - ONE } else { d };
        }
    }
}

/// Directional second derivative: `D[(j, l)] = sum_k d^2 F_j / (dx_k dx_l) * v_k`,
/// i.e. the Jacobian in `x` of `J(x) v`.
pub(crate) fn jacobian_dir_derivative(x: &[Complex64], v: &[Complex64]) -> DMatrix<Complex64> {
    let n = x.len();
    let mut out = DMatrix::from_element(n, n, ZERO);
    if n < 2 {
        return out;
    }
    let mut reduced = Vec::with_capacity(n);
    let mut e = vec![ZERO; n - 1];
    for l in 0..n {
        for k in (0..n).filter(|&k| k != l) {
            reduced.clear();
            reduced.extend(x.iter().enumerate().filter(|&(i, _)| i != k && i != l).map(|(_, w)| *w));
            elem_sym_into(&reduced, &mut e);
            // d^2 e_{j+1} / (dx_k dx_l) = e_{j-1}(x without x_k, x_l)
            for j in 1..n {
                let d = if j % 2 == 0 { -e[j - 1] } else { e[j - 1] };
                out[(j, l)] += d * v[k];
            }
        }
    }
    out
}

/// Elementary symmetric functions `(e_1(x), ..., e_n(x))`.
pub fn elem_sym(x: &CVec) -> Result<CVec> {
    x.check_finite()?;
    let n = x.len();
    let mut e = vec![ZERO; n + 1];
    elem_sym_into(x.as_slice(), &mut e);
    Ok(CVec::from_vec_unchecked(e.split_off(1)))
}

/// The Ulam map: component `j` is `(-1)^j e_j(x)`, the coefficient of `z^{n-j}`
/// in `prod (z - x_i)`.
pub fn ulam_map(x: &CVec) -> Result<CVec> {
    let mut e = elem_sym(x)?;
    for (j, c) in e.as_mut_slice().iter_mut().enumerate() {
        if j % 2 == 0 {
            *c = -*c;
        }
    }
    Ok(e)
}

/// Fixed-point residual `T(x) - x`.
pub fn residual(x: &CVec) -> Result<CVec> {
    x.check_finite()?;
    let mut out = vec![ZERO; x.len()];
    residual_into(x.as_slice(), &mut out);
    Ok(CVec::from_vec_unchecked(out))
}

/// Analytic Jacobian of [`residual`]:
/// entry `(j, k)` is `(-1)^j e_{j-1}(x without x_k) - delta_{jk}` (1-based).
pub fn jacobian(x: &CVec) -> Result<DMatrix<Complex64>> {
    x.check_finite()?;
    let n = x.len();
    let mut jac = DMatrix::from_element(n, n, ZERO);
    jacobian_into(x.as_slice(), &mut jac);
    Ok(jac)
}

/// Returns whether the residual max-norm is at most `tol`, and that norm.
pub fn verify_fixed_point(x: &CVec, tol: f64) -> Result<(bool, f64)> {
    if !(tol > 0.0) {
        return Err(UlamError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let r = residual(x)?.max_norm();
    Ok((r <= tol, r))
}

/// `f(z, x) = (z^n + x_1 z^{n-1} + ... + x_n) - prod (z - x_i)`.
///
/// Vanishes for every `z` exactly when `x` is a fixed point.
///
/// Evaluated by Horner on the coefficient difference `x - T(x)`; subtracting
/// the two degree-n sides directly loses about `eps |z|^n` to cancellation.
pub fn hypersurface_f(z: Complex64, x: &CVec) -> Complex64 {
    let mut e = vec![ZERO; x.len() + 1];
    elem_sym_into(x.as_slice(), &mut e);
    x.iter().enumerate().fold(ZERO, |acc, (j, &xj)| {
        let c = if j % 2 == 0 { -e[j + 1] } else { e[j + 1] };
        acc * z + (xj - c)
    })
}

/// Appends the root 0, i.e. multiplies the polynomial by `z`.
pub fn pad_zero(x: &CVec) -> CVec {
    let mut v = x.as_slice().to_vec();
    v.push(ZERO);
    CVec::from_vec_unchecked(v)
}

/// `T(x) + x`: zero when the roots are the negated coefficients.
pub fn opposite_residual(x: &CVec) -> Result<CVec> {
    let mut t = ulam_map(x)?;
    for (a, b) in t.as_mut_slice().iter_mut().zip(x) {
        *a += b;
    }
    Ok(t)
}

/// A forward orbit `x0, T(x0), T^2(x0), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// Iterates inside the escape radius, starting with `x0`.
    pub points: Vec<CVec>,
    /// Set when an iterate left the escape radius (or overflowed); that
    /// iterate is not stored.
    pub diverged: bool,
}

/// Iterates the map `k` times from `x0` with the default escape radius.
pub fn iterate_map(x0: &CVec, k: usize) -> Result<Orbit> {
    iterate_map_with_radius(x0, k, ORBIT_DIVERGENCE_RADIUS)
}

pub fn iterate_map_with_radius(x0: &CVec, k: usize, radius: f64) -> Result<Orbit> {
    x0.check_finite()?;
    let mut points = Vec::with_capacity(k + 1);
    points.push(x0.clone());
    for _ in 0..k {
        let next = ulam_map(points.last().expect("orbit is never empty"))?;
        let norm = max_norm(next.as_slice());
        if !norm.is_finite() || norm > radius {
            return Ok(Orbit { points, diverged: true });
        }
        points.push(next);
    }
    Ok(Orbit { points, diverged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> CVec {
        CVec::from_real(v).unwrap()
    }

    fn assert_close(a: &CVec, b: &CVec, tol: f64) {
        assert!(a.dist_max(b) <= tol, "{a} != {b}");
    }

    #[test]
    fn elem_sym_examples() {
        assert_eq!(elem_sym(&real(&[1.0, -2.0])).unwrap(), real(&[-1.0, -2.0]));
        assert_eq!(elem_sym(&real(&[1.0, 1.0, 1.0])).unwrap(), real(&[3.0, 3.0, 1.0]));
        assert_eq!(elem_sym(&real(&[0.0, 0.0, 0.0])).unwrap(), real(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let x = real(&[1.0, f64::NAN]);
        assert_eq!(elem_sym(&x), Err(UlamError::NonFinite { index: 1 }));
        assert!(ulam_map(&x).is_err());
        assert!(residual(&x).is_err());
        assert!(jacobian(&x).is_err());
        assert!(verify_fixed_point(&x, 1e-10).is_err());
    }

    #[test]
    fn ulam_map_examples() {
        assert_eq!(ulam_map(&real(&[1.0, -2.0])).unwrap(), real(&[1.0, -2.0]));
        assert_eq!(ulam_map(&real(&[0.0; 4])).unwrap(), real(&[0.0; 4]));
        assert_eq!(ulam_map(&real(&[1.0, 1.0, 1.0])).unwrap(), real(&[-3.0, 3.0, -1.0]));
    }

    #[test]
    fn residual_examples() {
        assert_eq!(residual(&real(&[1.0, -2.0])).unwrap(), real(&[0.0, 0.0]));
        assert_eq!(residual(&real(&[0.0, 0.0])).unwrap(), real(&[0.0, 0.0]));
        assert_eq!(residual(&real(&[1.0, 1.0, 1.0])).unwrap(), real(&[-4.0, 2.0, -2.0]));
    }

    #[test]
    fn jacobian_examples() {
        let j = jacobian(&real(&[0.0, 0.0])).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[-2.0, -1.0, 0.0, -1.0]).map(|v| Complex64::new(v, 0.0));
        assert_eq!(j, expect);
        let j = jacobian(&real(&[1.0, -2.0])).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[-2.0, -1.0, -2.0, 0.0]).map(|v| Complex64::new(v, 0.0));
        assert_eq!(j, expect);
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let x = CVec::new(vec![
            Complex64::new(0.3, -0.7),
            Complex64::new(-1.2, 0.1),
            Complex64::new(0.5, 0.4),
            Complex64::new(-0.2, -0.9),
        ])
        .unwrap();
        let v = [
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.3, 0.2),
            Complex64::new(0.7, -1.1),
            Complex64::new(0.1, 0.0),
        ];
        let d = jacobian_dir_derivative(x.as_slice(), &v);
        let jv = |x: &CVec| jacobian(x).unwrap() * nalgebra::DVector::from_column_slice(&v);
        let eps = 1e-6;
        for l in 0..4 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[l] += eps;
            xm[l] -= eps;
            let fd = (jv(&xp) - jv(&xm)) / Complex64::new(2.0 * eps, 0.0);
            for j in 0..4 {
                assert!((fd[j] - d[(j, l)]).norm() < 1e-7, "({j}, {l})");
            }
        }
    }

    #[test]
    fn system_dimension_checks() {
        let sys = UlamSystem::new(3).unwrap();
        assert_eq!(sys.bezout_number(), 6);
        assert_eq!(sys.equation_degree(2), 3);
        assert!(matches!(
            sys.residual(&real(&[1.0, -2.0])),
            Err(UlamError::LengthMismatch { expected: 3, actual: 2 })
        ));
        assert_eq!(sys.jacobian(&real(&[0.0; 3])).unwrap().shape(), (3, 3));
        assert_eq!(UlamSystem::new(0), Err(UlamError::Empty));
    }

    #[test]
    fn verify_examples() {
        assert_eq!(verify_fixed_point(&real(&[1.0, -1.0, -1.0]), 1e-10).unwrap(), (true, 0.0));
        assert_eq!(verify_fixed_point(&real(&[1.0, -2.0, 0.0]), 1e-10).unwrap(), (true, 0.0));
        assert_eq!(verify_fixed_point(&real(&[1.0, 1.0]), 1e-10).unwrap(), (false, 3.0));
        assert!(verify_fixed_point(&real(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn hypersurface_examples() {
        let z = |v: f64| Complex64::new(v, 0.0);
        assert_eq!(hypersurface_f(z(5.0), &real(&[1.0, -2.0])), z(0.0));
        assert_eq!(hypersurface_f(z(1.0), &real(&[1.0, 1.0])), z(3.0));
        assert_eq!(hypersurface_f(z(0.0), &real(&[0.0, 1.0])), z(1.0));
    }

    #[test]
    fn hypersurface_matches_two_sided_form() {
        let x = CVec::new(vec![
            Complex64::new(0.3, -1.1),
            Complex64::new(-0.7, 0.2),
            Complex64::new(1.4, 0.5),
            Complex64::new(-0.2, -0.9),
        ])
        .unwrap();
        for z in [Complex64::new(0.5, 0.5), Complex64::new(-2.0, 1.0), Complex64::new(3.0, -4.0)] {
            let coeff_side = x.iter().fold(ONE, |acc, &c| acc * z + c);
            let root_side = x.iter().fold(ONE, |acc, &r| acc * (z - r));
            let direct = coeff_side - root_side;
            assert!((hypersurface_f(z, &x) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn pad_zero_examples() {
        assert_eq!(pad_zero(&real(&[1.0, -2.0])), real(&[1.0, -2.0, 0.0]));
        assert_eq!(pad_zero(&real(&[0.0])), real(&[0.0, 0.0]));
        let padded = pad_zero(&real(&[1.0, -1.0, -1.0]));
        assert_eq!(padded, real(&[1.0, -1.0, -1.0, 0.0]));
        assert!(verify_fixed_point(&padded, 1e-10).unwrap().0);
    }

    #[test]
    fn opposite_residual_examples() {
        assert_eq!(opposite_residual(&real(&[3.7])).unwrap(), real(&[0.0]));
        assert_eq!(opposite_residual(&real(&[1.0, -2.0])).unwrap(), real(&[2.0, -4.0]));
        assert_eq!(opposite_residual(&real(&[0.0, 0.0])).unwrap(), real(&[0.0, 0.0]));
    }

    #[test]
    fn orbit_examples() {
        let p = real(&[1.0, -2.0]);
        let orbit = iterate_map(&p, 3).unwrap();
        assert!(!orbit.diverged);
        assert_eq!(orbit.points, vec![p.clone(); 4]);

        let orbit = iterate_map(&real(&[0.5, 0.5]), 1).unwrap();
        assert_eq!(orbit.points, vec![real(&[0.5, 0.5]), real(&[-1.0, 0.25])]);

        let orbit = iterate_map(&real(&[0.0; 3]), 5).unwrap();
        assert_eq!(orbit.points.len(), 6);
        assert!(orbit.points.iter().all(|q| q.max_norm() == 0.0));
    }

    #[test]
    fn orbit_divergence_is_flagged() {
        // (3, 3) -> (-6, 9) -> (-3, -54) -> ... grows without bound
        let orbit = iterate_map(&real(&[3.0, 3.0]), 50).unwrap();
        assert!(orbit.diverged);
        assert!(orbit.points.len() < 51);
        assert!(orbit.points.iter().all(|q| q.max_norm() <= ORBIT_DIVERGENCE_RADIUS));
        assert_close(&orbit.points[1], &real(&[-6.0, 9.0]), 0.0);
    }
}
