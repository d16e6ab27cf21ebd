use num_complex::Complex64;
use proptest::prelude::*;

use ulam::map::{elem_sym, hypersurface_f, iterate_map, jacobian, opposite_residual, pad_zero, residual, ulam_map, verify_fixed_point};
use ulam::polyroots::{multiset_match, roots_aberth, MonicPoly, RootFindConfig};
use ulam::CVec;

fn complex(radius: f64) -> impl Strategy<Value = Complex64> {
    (-radius..radius, -radius..radius).prop_map(|(re, im)| Complex64::new(re, im))
}

fn tuple(min: usize, max: usize, radius: f64) -> impl Strategy<Value = CVec> {
    prop::collection::vec(complex(radius), min..=max).prop_map(|v| CVec::new(v).unwrap())
}

/// Coefficients of `prod (z - r)` with highest power first, constant 1 omitted.
fn expand(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        c.push(Complex64::new(0.0, 0.0));
        for k in (1..c.len()).rev() {
            let prev = c[k - 1];
            c[k] -= r * prev;
        }
    }
    c.split_off(1)
}

const KNOWN: &[&[f64]] = &[&[0.0], &[1.0, -2.0], &[1.0, -1.0, -1.0], &[1.0, -2.0, 0.0], &[1.0, -1.0, -1.0, 0.0]];

proptest! {
    #[test]
    fn map_matches_vieta(x in tuple(1, 7, 2.0)) {
        let t = ulam_map(&x).unwrap();
        let c = expand(x.as_slice());
        for (a, b) in t.iter().zip(&c) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn map_is_symmetric(x in tuple(2, 7, 2.0), shift in 1usize..7) {
        let mut v = x.as_slice().to_vec();
        let k = shift % v.len();
        v.rotate_left(k);
        let last = v.len() - 1;
        v.swap(0, last);
        let y = CVec::new(v).unwrap();
        prop_assert!(ulam_map(&x).unwrap().dist_max(&ulam_map(&y).unwrap()) <= 1e-11);
        let e = elem_sym(&x).unwrap();
        prop_assert!(e.dist_max(&elem_sym(&y).unwrap()) <= 1e-11);
    }

    #[test]
    fn jacobian_matches_finite_differences(x in tuple(1, 6, 2.0)) {
        let n = x.len();
        let jac = jacobian(&x).unwrap();
        let scale = jac.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for k in 0..n {
            let h = 1e-5;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (residual(&xp).unwrap(), residual(&xm).unwrap());
            for j in 0..n {
                let fd = (fp[j] - fm[j]) / (2.0 * h);
                prop_assert!((fd - jac[(j, k)]).norm() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn line_membership_off_solutions(x in tuple(1, 5, 2.0), z in complex(10.0)) {
        // f(z, x) = sum (x_j - T(x)_j) z^(n-j)
        let t = ulam_map(&x).unwrap();
        let n = x.len();
        let expected = (0..n).fold(Complex64::new(0.0, 0.0), |acc, j| acc * z + (x[j] - t[j]));
        let f = hypersurface_f(z, &x);
        prop_assert!((f - expected).norm() <= 1e-9 * (1.0 + expected.norm()));
    }

    #[test]
    fn line_membership_on_known_solutions(idx in 0usize..KNOWN.len(), z in complex(10.0)) {
        let x = CVec::from_real(KNOWN[idx]).unwrap();
        prop_assert!(hypersurface_f(z, &x).norm() < 1e-8);
    }

    #[test]
    fn padding_preserves_fixed_points(idx in 0usize..KNOWN.len(), extra in 1usize..4) {
        let mut x = CVec::from_real(KNOWN[idx]).unwrap();
        for _ in 0..extra {
            x = pad_zero(&x);
            prop_assert!(verify_fixed_point(&x, 1e-12).unwrap().0);
        }
    }

    #[test]
    fn degree_one_opposite_family(a in complex(1e3)) {
        let x = CVec::new(vec![a]).unwrap();
        prop_assert_eq!(opposite_residual(&x).unwrap()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fixed_points_have_constant_orbits(idx in 0usize..KNOWN.len(), k in 0usize..6) {
        let x = CVec::from_real(KNOWN[idx]).unwrap();
        let orbit = iterate_map(&x, k).unwrap();
        prop_assert!(!orbit.diverged);
        prop_assert_eq!(orbit.points.len(), k + 1);
        prop_assert!(orbit.points.iter().all(|p| p == &x));
    }

    #[test]
    fn roots_reconstruct_polynomial(roots in tuple(1, 8, 2.0)) {
        let c = CVec::new(expand(roots.as_slice())).unwrap();
        let p = MonicPoly::new(c.clone()).unwrap();
        let found = roots_aberth(&p, &RootFindConfig::default()).unwrap();
        let back = CVec::new(expand(found.as_slice())).unwrap();
        let scale = c.max_norm().max(1.0);
        prop_assert!(back.dist_max(&c) <= 1e-9 * scale);
    }

    #[test]
    fn separated_roots_are_recovered(base in tuple(1, 6, 1.0)) {
        // Spread the roots out so each is well conditioned.
        let roots: Vec<Complex64> = base.iter().enumerate().map(|(k, r)| r * 0.3 + Complex64::new(k as f64, 0.0)).collect();
        let roots = CVec::new(roots).unwrap();
        let p = MonicPoly::new(CVec::new(expand(roots.as_slice())).unwrap()).unwrap();
        let found = roots_aberth(&p, &RootFindConfig::default()).unwrap();
        prop_assert!(multiset_match(&found, &roots, 1e-6));
    }

    #[test]
    fn horner_matches_direct_sum(c in tuple(1, 8, 3.0), z in complex(2.0)) {
        let p = MonicPoly::new(c.clone()).unwrap();
        let (value, deriv) = p.eval_horner(z);
        let n = c.len() as i32;
        let direct = z.powi(n) + (0..c.len()).map(|j| c[j] * z.powi(n - 1 - j as i32)).sum::<Complex64>();
        let direct_d = z.powi(n - 1) * n as f64
            + (0..c.len()).filter(|&j| (j as i32) < n - 1).map(|j| c[j] * z.powi(n - 2 - j as i32) * (n - 1 - j as i32) as f64).sum::<Complex64>();
        let bound = (1.0 + c.max_norm()) * (1.0 + z.norm()).powi(n);
        prop_assert!((value - direct).norm() <= 1e-12 * bound);
        prop_assert!((deriv - direct_d).norm() <= 1e-12 * bound * n as f64);
    }
}
