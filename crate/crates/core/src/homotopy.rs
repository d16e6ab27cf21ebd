//! Total-degree homotopy continuation for the fixed-point system.
//!
//! The start system is `g_j(x) = x_j^j - c_j` with random unit-modulus `c_j`,
//! whose `1 * 2 * ... * n = n!` roots are known in closed form. Each root is
//! carried along `H(x, t) = gamma (1 - t) G(x) + t F(x)` from `t = 0` to
//! `t = 1` by a fourth-order predictor and a Newton corrector.
//!
//! Internally the tracker stores `s = 1 - t` rather than `t`, so the endgame
//! can approach `t = 1` geometrically without losing the distance to the end
//! to rounding.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvec::{max_norm, CVec};
use crate::error::{Result, UlamError};
use crate::map::{jacobian_into, residual_into};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest degree accepted by [`build_start`] and [`track_all`].
pub const MAX_TRACK_DEGREE: usize = 10;

/// Endgame step as a fraction of the remaining distance `1 - t`.
const ENDGAME_RATIO_INIT: f64 = 0.5;
const ENDGAME_RATIO_MAX: f64 = 0.9;
const ENDGAME_RATIO_MIN: f64 = 1e-3;
/// Closest approach to `t = 1` before a non-finishing path is given up on.
const ENDGAME_MIN_REMAINING: f64 = 1e-200;
/// First corrector update allowed, relative to `1 + |x|`.
const MAX_FIRST_CORRECTION: f64 = 1e-3;
const REFINE_MAX_ITERS: usize = 50;

/// Numerical settings for tracking, refinement and post-processing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub newton_tol: f64,
    pub max_corrector_iters: usize,
    pub max_steps: usize,
    pub divergence_radius: f64,
    pub endgame_start_t: f64,
    pub refine_tol: f64,
    pub seed: u64,
    /// Single-linkage radius (max-norm) for merging path endpoints.
    pub dedup_radius: f64,
    /// Largest `|Im|` for a solution to count as real, and largest `|x_n|`
    /// for it to count as trivial.
    pub real_tol: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            step_init: 0.05,
            step_min: 1e-6,
            step_max: 0.2,
            newton_tol: 1e-10,
            max_corrector_iters: 5,
            max_steps: 10_000,
            divergence_radius: 1e6,
            endgame_start_t: 0.99,
            refine_tol: 1e-12,
            seed: 0,
            dedup_radius: 1e-6,
            real_tol: 1e-8,
        }
    }
}

impl TrackerConfig {
    pub fn with_seed(seed: u64) -> Self {
        TrackerConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(UlamError::InvalidParameter(msg.to_string()));
        if !(0.0 < self.step_min && self.step_min <= self.step_init && self.step_init <= self.step_max && self.step_max <= 1.0) {
            return bad("step sizes must satisfy 0 < step_min <= step_init <= step_max <= 1");
        }
        if !(self.newton_tol > 0.0 && self.refine_tol > 0.0 && self.dedup_radius > 0.0 && self.real_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.divergence_radius > 0.0) {
            return bad("divergence_radius must be positive");
        }
        if !(0.0 < self.endgame_start_t && self.endgame_start_t < 1.0) {
            return bad("endgame_start_t must lie in (0, 1)");
        }
        if self.max_corrector_iters == 0 || self.max_steps == 0 {
            return bad("iteration budgets must be positive");
        }
        Ok(())
    }
}

/// Random start system `x_j^j = c_j` plus the homotopy twist `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct StartSystem {
    n: usize,
    constants: CVec,
    gamma: Complex64,
    seed: u64,
}

fn check_degree(n: usize) -> Result<()> {
    if (1..=MAX_TRACK_DEGREE).contains(&n) {
        Ok(())
    } else {
        Err(UlamError::DegreeOutOfRange { n, min: 1, max: MAX_TRACK_DEGREE })
    }
}

impl StartSystem {
    /// Draws `gamma` and the `c_j` uniformly on the unit circle.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        check_degree(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = Complex64::from_polar(1.0, TAU * rng.random::<f64>());
        let constants = (0..n).map(|_| Complex64::from_polar(1.0, TAU * rng.random::<f64>())).collect();
        Ok(StartSystem {
            n,
            constants: CVec::new(constants)?,
            gamma,
            seed,
        })
    }

    /// A start system with prescribed constants and twist.
    pub fn with_constants(constants: CVec, gamma: Complex64) -> Result<Self> {
        let n = constants.len();
        check_degree(n)?;
        constants.check_finite()?;
        if constants.iter().any(|c| c.norm() == 0.0) {
            return Err(UlamError::InvalidParameter("start constants must be nonzero".into()));
        }
        Ok(StartSystem { n, constants, gamma, seed: 0 })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn constants(&self) -> &CVec {
        &self.constants
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of start solutions, `n!`.
    pub fn num_paths(&self) -> usize {
        (1..=self.n).product()
    }

    /// Start solution number `index` in mixed radix: digit `k_j` in
    /// `0..j` selects the branch `c_j^{1/j} exp(2 pi i k_j / j)`.
    ///
    /// # Panics
    /// If `index >= n!`.
    pub fn start_point(&self, index: usize) -> CVec {
        assert!(index < self.num_paths(), "start index {index} out of range");
        let mut rest = index;
        let entries = (1..=self.n)
            .map(|d| {
                let k = rest % d;
                rest /= d;
                let c = self.constants[d - 1];
                let root = c.powf(1.0 / d as f64);
                root * Complex64::from_polar(1.0, TAU * k as f64 / d as f64)
            })
            .collect();
        CVec::from_vec_unchecked(entries)
    }

    /// `G(x)` with `G_j = x_j^j - c_j`.
    pub fn eval_start(&self, x: &CVec) -> CVec {
        let g = x.iter().enumerate().map(|(j, &v)| v.powu(j as u32 + 1) - self.constants[j]).collect();
        CVec::from_vec_unchecked(g)
    }
}

/// Iterator over the start solutions of a [`StartSystem`].
#[derive(Debug, Clone)]
pub struct StartPoints {
    system: StartSystem,
    next: usize,
    end: usize,
}

impl Iterator for StartPoints {
    type Item = CVec;

    fn next(&mut self) -> Option<CVec> {
        if self.next >= self.end {
            return None;
        }
        let p = self.system.start_point(self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.end - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for StartPoints {}

/// Seeded start system together with an enumerator of its `n!` roots.
pub fn build_start(n: usize, seed: u64) -> Result<(StartSystem, StartPoints)> {
    let system = StartSystem::random(n, seed)?;
    let end = system.num_paths();
    let points = StartPoints { system: system.clone(), next: 0, end };
    Ok((system, points))
}

/// `H(x, t)` and its Jacobian in `x`.
pub fn homotopy_eval(x: &CVec, t: f64, sys: &StartSystem) -> Result<(CVec, DMatrix<Complex64>)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(UlamError::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
    }
    if x.len() != sys.n {
        return Err(UlamError::LengthMismatch { expected: sys.n, actual: x.len() });
    }
    x.check_finite()?;
    let mut ws = Workspace::new(sys);
    ws.eval(x.as_slice(), 1.0 - t, false);
    Ok((CVec::from_vec_unchecked(ws.h.clone()), ws.jac.clone()))
}

/// How a path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathStatus {
    /// Reached `t = 1` and refined to `refine_tol`.
    Converged,
    /// The iterate left the divergence radius.
    Diverged,
    /// The step budget ran out.
    MaxSteps,
    /// The tracker could not continue or the final Newton stalled, typically
    /// at a Jacobian that is singular to working precision.
    SingularEndpoint,
}

/// Outcome of tracking a single path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    pub endpoint: CVec,
    /// Max-norm of `F` at the endpoint.
    pub residual_norm: f64,
    /// Accepted predictor-corrector steps.
    pub steps_taken: usize,
    /// `||J|| ||J^-1||` (infinity norm) of `F` at the endpoint.
    pub condition_estimate: f64,
    /// Homotopy parameter reached; exactly 1.0 on converged paths.
    pub t_final: f64,
}

/// Scratch buffers for one path.
struct Workspace<'a> {
    sys: &'a StartSystem,
    n: usize,
    h: Vec<Complex64>,
    dh_ds: Vec<Complex64>,
    f: Vec<Complex64>,
    jf: DMatrix<Complex64>,
    jac: DMatrix<Complex64>,
}

impl<'a> Workspace<'a> {
    fn new(sys: &'a StartSystem) -> Self {
        let n = sys.n;
        Workspace {
            sys,
            n,
            h: vec![ZERO; n],
            dh_ds: vec![ZERO; n],
            f: vec![ZERO; n],
            jf: DMatrix::from_element(n, n, ZERO),
            jac: DMatrix::from_element(n, n, ZERO),
        }
    }

    /// Evaluates `H` and `dH/dx` at `s = 1 - t`; also `dH/ds` if asked.
    #[allow(clippy::needless_range_loop)]
    fn eval(&mut self, x: &[Complex64], s: f64, want_ds: bool) {
        let gamma = self.sys.gamma;
        residual_into(x, &mut self.f);
        jacobian_into(x, &mut self.jf);
        let ws = gamma * s;
        let wf = 1.0 - s;
        for j in 0..self.n {
            let d = j as u32 + 1;
            let pow_lo = x[j].powu(d - 1);
            let g = pow_lo * x[j] - self.sys.constants[j];
            let dg = pow_lo * d as f64;
            self.h[j] = ws * g + self.f[j] * wf;
            if want_ds {
                self.dh_ds[j] = gamma * g - self.f[j];
            }
            for k in 0..self.n {
                self.jac[(j, k)] = self.jf[(j, k)] * wf;
            }
            self.jac[(j, j)] += ws * dg;
        }
    }

    /// `dx/ds` along the path at `(x, s)`.
    fn tangent(&mut self, x: &[Complex64], s: f64) -> Option<Vec<Complex64>> {
        self.eval(x, s, true);
        let lu = self.jac.clone().lu();
        let rhs = nalgebra::DVector::from_iterator(self.n, self.dh_ds.iter().map(|v| -v));
        let v = lu.solve(&rhs)?;
        finite(v.as_slice()).then(|| v.as_slice().to_vec())
    }

    /// Fourth-order Runge-Kutta prediction from `s` to `s - h`.
    fn predict(&mut self, x: &[Complex64], s: f64, h: f64) -> Option<Vec<Complex64>> {
        let axpy = |a: f64, k: &[Complex64]| -> Vec<Complex64> { x.iter().zip(k).map(|(xi, ki)| xi - ki * a).collect() };
        let k1 = self.tangent(x, s)?;
        let k2 = self.tangent(&axpy(0.5 * h, &k1), s - 0.5 * h)?;
        let k3 = self.tangent(&axpy(0.5 * h, &k2), s - 0.5 * h)?;
        let k4 = self.tangent(&axpy(h, &k3), s - h)?;
        Some(
            (0..self.n)
                .map(|i| x[i] - (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
                .collect(),
        )
    }

    /// Newton on `H(., s) = 0`. Fails on a non-contracting update, an
    /// oversized first update, a singular Jacobian or an exhausted budget.
    fn correct(&mut self, x: &mut [Complex64], s: f64, cfg: &TrackerConfig) -> bool {
        let mut prev = f64::INFINITY;
        for it in 0..cfg.max_corrector_iters {
            self.eval(x, s, false);
            let rhs = nalgebra::DVector::from_column_slice(&self.h);
            let Some(dx) = self.jac.clone().lu().solve(&rhs) else {
                return false;
            };
            let step = max_norm(dx.as_slice());
            let scale = 1.0 + max_norm(x);
            if !step.is_finite() || step >= prev || (it == 0 && step > MAX_FIRST_CORRECTION * scale) {
                return false;
            }
            for (xi, di) in x.iter_mut().zip(dx.iter()) {
                *xi -= di;
            }
            if step <= cfg.newton_tol * scale {
                return true;
            }
            prev = step;
        }
        false
    }

    /// One predictor-corrector step from `s` to `s - h`.
    fn step(&mut self, x: &[Complex64], s: f64, h: f64, cfg: &TrackerConfig) -> Option<Vec<Complex64>> {
        let target = if h >= s { 0.0 } else { s - h };
        let mut next = self.predict(x, s, s - target)?;
        self.correct(&mut next, target, cfg).then_some(next)
    }
}

fn finite(v: &[Complex64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Tracks one path from a start solution (`t = 0`) to `t = 1`.
///
/// Step control: halve on corrector failure, grow by 1.5 after three
/// consecutive successes, clamp to `[step_min, step_max]`. From
/// `endgame_start_t` on, every iteration first tries to finish in one step;
/// otherwise it advances by a fraction of the remaining distance `1 - t`, so
/// paths approaching a singular endpoint creep towards `t = 1` geometrically.
pub fn track_path(start: &CVec, sys: &StartSystem, cfg: &TrackerConfig) -> PathResult {
    let mut ws = Workspace::new(sys);
    let mut x = start.as_slice().to_vec();
    let mut s = 1.0_f64;
    let mut h = cfg.step_init;
    let mut ratio = ENDGAME_RATIO_INIT;
    let mut streak = 0usize;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let endgame_s = 1.0 - cfg.endgame_start_t;

    let stop = |status: PathStatus, x: &[Complex64], s: f64, accepted: usize| {
        let endpoint = CVec::from_vec_unchecked(x.to_vec());
        let (residual_norm, condition_estimate) = if endpoint.is_finite() {
            let mut r = vec![ZERO; endpoint.len()];
            residual_into(x, &mut r);
            (max_norm(&r), condition_estimate(&endpoint))
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        PathResult {
            status,
            endpoint,
            residual_norm,
            steps_taken: accepted,
            condition_estimate,
            t_final: 1.0 - s,
        }
    };

    while s > 0.0 {
        if attempts >= cfg.max_steps {
            return stop(PathStatus::MaxSteps, &x, s, accepted);
        }
        if s > endgame_s {
            attempts += 1;
            match ws.step(&x, s, h, cfg) {
                Some(next) => {
                    s = if h >= s { 0.0 } else { s - h };
                    x = next;
                    accepted += 1;
                    streak += 1;
                    if streak >= 3 {
                        h = (h * 1.5).min(cfg.step_max);
                        streak = 0;
                    }
                }
                None => {
                    streak = 0;
                    if h <= cfg.step_min {
                        return stop(PathStatus::SingularEndpoint, &x, s, accepted);
                    }
                    h = (h * 0.5).max(cfg.step_min);
                }
            }
        } else {
            attempts += 1;
            if let Some(next) = ws.step(&x, s, s, cfg) {
                x = next;
                accepted += 1;
                break;
            }
            if attempts >= cfg.max_steps {
                return stop(PathStatus::MaxSteps, &x, s, accepted);
            }
            attempts += 1;
            let dh = ratio * s;
            match ws.step(&x, s, dh, cfg) {
                Some(next) => {
                    s -= dh;
                    x = next;
                    accepted += 1;
                    streak += 1;
                    if streak >= 3 {
                        ratio = (ratio * 1.5).min(ENDGAME_RATIO_MAX);
                        streak = 0;
                    }
                }
                None => {
                    streak = 0;
                    ratio *= 0.5;
                    if ratio < ENDGAME_RATIO_MIN {
                        return stop(PathStatus::SingularEndpoint, &x, s, accepted);
                    }
                }
            }
            if s < ENDGAME_MIN_REMAINING {
                return stop(PathStatus::SingularEndpoint, &x, s, accepted);
            }
        }
        if max_norm(&x) > cfg.divergence_radius {
            return stop(PathStatus::Diverged, &x, s, accepted);
        }
    }

    let tracked = CVec::from_vec_unchecked(x);
    match refine_endpoint(&tracked, cfg) {
        Ok((point, residual_norm, condition_estimate)) => {
            let status = if residual_norm <= cfg.refine_tol {
                PathStatus::Converged
            } else {
                PathStatus::SingularEndpoint
            };
            PathResult {
                status,
                endpoint: point,
                residual_norm,
                steps_taken: accepted,
                condition_estimate,
                t_final: 1.0,
            }
        }
        Err(_) => stop(PathStatus::SingularEndpoint, tracked.as_slice(), 0.0, accepted),
    }
}

/// `||J||_inf * ||J^-1||_inf` for the residual Jacobian at `x`, with the
/// inverse assembled from one solve per unit column. Infinite when singular.
pub fn condition_estimate(x: &CVec) -> f64 {
    let n = x.len();
    let mut jac = DMatrix::from_element(n, n, ZERO);
    jacobian_into(x.as_slice(), &mut jac);
    let norm_inf = |m: &DMatrix<Complex64>| (0..n).map(|i| m.row(i).iter().map(|c| c.norm()).sum::<f64>()).fold(0.0, f64::max);
    let lu = jac.clone().lu();
    let mut inv = DMatrix::from_element(n, n, ZERO);
    for k in 0..n {
        let mut e = nalgebra::DVector::from_element(n, ZERO);
        e[k] = Complex64::new(1.0, 0.0);
        match lu.solve(&e) {
            Some(col) if finite(col.as_slice()) => inv.set_column(k, &col),
            _ => return f64::INFINITY,
        }
    }
    norm_inf(&jac) * norm_inf(&inv)
}

/// Newton on `F` until the residual max-norm is at most `refine_tol` or 50
/// iterations have run. Returns the point, its residual and a condition
/// estimate; a singular Jacobian is reported as an error.
pub fn refine_endpoint(x: &CVec, cfg: &TrackerConfig) -> Result<(CVec, f64, f64)> {
    x.check_finite()?;
    let n = x.len();
    let mut cur = x.as_slice().to_vec();
    let mut r = vec![ZERO; n];
    let mut jac = DMatrix::from_element(n, n, ZERO);
    for _ in 0..REFINE_MAX_ITERS {
        residual_into(&cur, &mut r);
        if max_norm(&r) <= cfg.refine_tol {
            break;
        }
        jacobian_into(&cur, &mut jac);
        let rhs = nalgebra::DVector::from_column_slice(&r);
        let dx = jac.clone().lu().solve(&rhs).ok_or(UlamError::SingularJacobian)?;
        if !finite(dx.as_slice()) {
            return Err(UlamError::SingularJacobian);
        }
        let next: Vec<Complex64> = cur.iter().zip(dx.iter()).map(|(a, b)| a - b).collect();
        if !finite(&next) {
            break;
        }
        cur = next;
    }
    residual_into(&cur, &mut r);
    let point = CVec::from_vec_unchecked(cur);
    let cond = condition_estimate(&point);
    Ok((point, max_norm(&r), cond))
}

/// Newton steps past `refine_tol`, kept only while the update keeps
/// shrinking. Components that belong at zero are driven far below rounding
/// level, which matters for the root-multiset check where a `k`-fold zero
/// root moves by `eps^(1/k)` under a coefficient error `eps`.
pub fn polish_endpoint(x: &CVec, max_iters: usize) -> CVec {
    let n = x.len();
    let mut cur = x.as_slice().to_vec();
    let mut r = vec![ZERO; n];
    let mut jac = DMatrix::from_element(n, n, ZERO);
    let mut prev = f64::INFINITY;
    for _ in 0..max_iters {
        residual_into(&cur, &mut r);
        jacobian_into(&cur, &mut jac);
        let Some(dx) = jac.clone().lu().solve(&nalgebra::DVector::from_column_slice(&r)) else {
            break;
        };
        let step = max_norm(dx.as_slice());
        if !step.is_finite() || step >= prev {
            break;
        }
        for (a, b) in cur.iter_mut().zip(dx.iter()) {
            *a -= b;
        }
        if step == 0.0 {
            break;
        }
        prev = step;
    }
    CVec::from_vec_unchecked(cur)
}

/// Refines a singular solution by one deflation step.
///
/// The augmented system `F(x) = 0, J(x) v = 0, a.v = 1` is regular at a
/// solution whose Jacobian has a one-dimensional kernel and whose
/// multiplicity is two, so Gauss-Newton on it converges quadratically where
/// plain Newton on `F` only halves the error each step. `v` starts at the
/// right singular vector of the smallest singular value. Returns `None` when
/// the iteration does not settle.
pub fn refine_singular(x: &CVec) -> Option<CVec> {
    let n = x.len();
    let mut xs = x.as_slice().to_vec();
    let mut jac = DMatrix::from_element(n, n, ZERO);
    jacobian_into(&xs, &mut jac);
    let svd = jac.clone().svd(false, true);
    let v_t = svd.v_t?;
    let (k_min, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let mut v: Vec<Complex64> = v_t.row(k_min).iter().map(|c| c.conj()).collect();
    let a: Vec<Complex64> = v.iter().map(|c| c.conj()).collect();

    let mut r = vec![ZERO; n];
    let mut prev = f64::INFINITY;
    for _ in 0..30 {
        residual_into(&xs, &mut r);
        jacobian_into(&xs, &mut jac);
        let jv = &jac * nalgebra::DVector::from_column_slice(&v);
        let av: Complex64 = a.iter().zip(&v).map(|(p, q)| p * q).sum();

        let mut g = nalgebra::DVector::from_element(2 * n + 1, ZERO);
        g.rows_mut(0, n).copy_from_slice(&r);
        g.rows_mut(n, n).copy_from(&jv);
        g[2 * n] = av - Complex64::new(1.0, 0.0);

        let mut big = DMatrix::from_element(2 * n + 1, 2 * n, ZERO);
        big.view_mut((0, 0), (n, n)).copy_from(&jac);
        big.view_mut((n, 0), (n, n))
            .copy_from(&crate::map::jacobian_dir_derivative(&xs, &v));
        big.view_mut((n, n), (n, n)).copy_from(&jac);
        for (k, &ak) in a.iter().enumerate() {
            big[(2 * n, n + k)] = ak;
        }

        let dz = big.svd(true, true).solve(&g, 0.0).ok()?;
        let step = max_norm(dz.as_slice());
        if !step.is_finite() {
            return None;
        }
        if step >= prev {
            break;
        }
        for i in 0..n {
            xs[i] -= dz[i];
            v[i] -= dz[n + i];
        }
        prev = step;
        if step <= f64::EPSILON * (1.0 + max_norm(&xs)) {
            break;
        }
    }
    let out = CVec::from_vec_unchecked(xs);
    out.is_finite().then_some(out)
}

/// Tracks all `n!` paths with the seed in `cfg`.
///
/// Paths run on the ambient rayon pool; results come back in start-index
/// order and do not depend on the thread count.
pub fn track_all(n: usize, cfg: &TrackerConfig) -> Result<Vec<PathResult>> {
    cfg.validate()?;
    let (sys, _) = build_start(n, cfg.seed)?;
    Ok((0..sys.num_paths())
        .into_par_iter()
        .map(|i| track_path(&sys.start_point(i), &sys, cfg))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{residual, verify_fixed_point};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(v: &[f64]) -> CVec {
        CVec::from_real(v).unwrap()
    }

    #[test]
    fn start_examples() {
        let one = real(&[1.0]);
        let sys = StartSystem::with_constants(one.clone(), c(1.0, 0.0)).unwrap();
        assert_eq!(sys.num_paths(), 1);
        assert_eq!(sys.start_point(0), one);

        let sys = StartSystem::with_constants(real(&[1.0, 1.0]), c(1.0, 0.0)).unwrap();
        let pts: Vec<CVec> = (0..2).map(|i| sys.start_point(i)).collect();
        assert!(pts[0].dist_max(&real(&[1.0, 1.0])) < 1e-15);
        assert!(pts[1].dist_max(&real(&[1.0, -1.0])) < 1e-15);

        let (_, pts) = build_start(3, 1).unwrap();
        assert_eq!(pts.len(), 6);
    }

    #[test]
    fn start_points_are_distinct_roots() {
        let (sys, pts) = build_start(4, 9).unwrap();
        let pts: Vec<CVec> = pts.collect();
        assert_eq!(pts.len(), 24);
        for (i, p) in pts.iter().enumerate() {
            assert!(sys.eval_start(p).max_norm() < 1e-12);
            for q in &pts[i + 1..] {
                assert!(p.dist_max(q) > 1e-3);
            }
        }
    }

    #[test]
    fn degree_range_is_enforced() {
        assert!(build_start(0, 0).is_err());
        assert!(build_start(MAX_TRACK_DEGREE + 1, 0).is_err());
    }

    #[test]
    fn start_is_deterministic() {
        let (a, _) = build_start(5, 42).unwrap();
        let (b, _) = build_start(5, 42).unwrap();
        let (d, _) = build_start(5, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.constants(), d.constants());
        assert!((a.gamma().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn homotopy_endpoints() {
        let (sys, mut pts) = build_start(2, 3).unwrap();
        let p = pts.next().unwrap();
        let (h, _) = homotopy_eval(&p, 0.0, &sys).unwrap();
        assert!(h.max_norm() < 1e-14);
        let (h, _) = homotopy_eval(&real(&[1.0, -2.0]), 1.0, &sys).unwrap();
        assert_eq!(h.max_norm(), 0.0);
        assert!(homotopy_eval(&p, 1.5, &sys).is_err());
    }

    #[test]
    fn homotopy_midpoint_matches_definition() {
        let (sys, _) = build_start(3, 5).unwrap();
        let x = CVec::new(vec![c(0.3, -0.2), c(-1.1, 0.4), c(0.7, 0.9)]).unwrap();
        let (h, _) = homotopy_eval(&x, 0.5, &sys).unwrap();
        let g = sys.eval_start(&x);
        let f = residual(&x).unwrap();
        for j in 0..3 {
            let expect = sys.gamma() * 0.5 * g[j] + 0.5 * f[j];
            assert!((h[j] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn homotopy_jacobian_matches_finite_differences() {
        let (sys, _) = build_start(4, 11).unwrap();
        let x = CVec::new(vec![c(0.3, -0.2), c(-1.1, 0.4), c(0.7, 0.9), c(-0.5, -0.6)]).unwrap();
        let t = 0.37;
        let (_, jac) = homotopy_eval(&x, t, &sys).unwrap();
        let eps = 1e-6;
        for k in 0..4 {
            let mut xp = x.clone();
            xp[k] += eps;
            let mut xm = x.clone();
            xm[k] -= eps;
            let hp = homotopy_eval(&xp, t, &sys).unwrap().0;
            let hm = homotopy_eval(&xm, t, &sys).unwrap().0;
            for j in 0..4 {
                let fd = (hp[j] - hm[j]) / (2.0 * eps);
                assert!((fd - jac[(j, k)]).norm() < 1e-7 * (1.0 + fd.norm()));
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrackerConfig::default().validate().is_ok());
        let cfg = TrackerConfig { step_min: 0.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = TrackerConfig { endgame_start_t: 1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = TrackerConfig { refine_tol: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn degree_one_path() {
        let results = track_all(1, &TrackerConfig::default()).unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].status, PathStatus::Converged);
        assert!(results[0].endpoint.max_norm() < 1e-12);
        assert_eq!(results[0].t_final, 1.0);
    }

    #[test]
    fn degree_two_paths() {
        let results = track_all(2, &TrackerConfig::with_seed(7)).unwrap();
        assert_eq!(results.len(), 2);
        assert!(results.iter().all(|r| r.status == PathStatus::Converged));
        let origin = real(&[0.0, 0.0]);
        let ulam = real(&[1.0, -2.0]);
        assert!(results.iter().any(|r| r.endpoint.dist_max(&origin) < 1e-10));
        assert!(results.iter().any(|r| r.endpoint.dist_max(&ulam) < 1e-10));
    }

    #[test]
    fn degree_three_paths_all_converge() {
        let results = track_all(3, &TrackerConfig::with_seed(1)).unwrap();
        assert_eq!(results.len(), 6);
        for r in &results {
            assert_eq!(r.status, PathStatus::Converged);
            assert!(verify_fixed_point(&r.endpoint, 1e-8).unwrap().0);
        }
    }

    #[test]
    fn refine_examples() {
        let cfg = TrackerConfig::default();
        let (p, res, _) = refine_endpoint(&real(&[1.0000001, -2.0000001]), &cfg).unwrap();
        assert!(p.dist_max(&real(&[1.0, -2.0])) < 1e-12);
        assert!(res <= 1e-12);

        let (p, res, cond) = refine_endpoint(&real(&[0.0, 0.0]), &cfg).unwrap();
        assert_eq!(p, real(&[0.0, 0.0]));
        assert_eq!(res, 0.0);
        assert!(cond.is_finite());

        let near = real(&[1.0, 1.0]);
        match refine_endpoint(&near, &cfg) {
            Ok((p, res, _)) => assert!(res > 1e-12 || p.dist_max(&near) > 0.1),
            Err(e) => assert_eq!(e, UlamError::SingularJacobian),
        }
    }

    #[test]
    fn polishing_drives_zero_components_down() {
        let x = CVec::new(vec![c(1e-13, 0.0), c(-2e-13, 1e-13), c(3e-14, 0.0)]).unwrap();
        let p = polish_endpoint(&x, 10);
        assert!(p.max_norm() < 1e-40, "{p}");
    }

    #[test]
    fn deflation_recovers_double_solution() {
        // (1, -1, -1, 0) is a double solution: the last Jacobian row vanishes.
        let exact = real(&[1.0, -1.0, -1.0, 0.0]);
        assert!(condition_estimate(&exact).is_infinite() || condition_estimate(&exact) > 1e15);
        let off = CVec::new(vec![c(1.0, 0.0), c(-1.0 + 3e-7, 2e-7), c(-1.0, 0.0), c(-3e-7, -2e-7)]).unwrap();
        let refined = refine_singular(&off).unwrap();
        assert!(refined.dist_max(&exact) < 1e-14, "{refined}");
    }

    #[test]
    fn max_steps_is_reported() {
        let cfg = TrackerConfig { max_steps: 2, ..Default::default() };
        let (sys, mut pts) = build_start(3, 0).unwrap();
        let r = track_path(&pts.next().unwrap(), &sys, &cfg);
        assert_eq!(r.status, PathStatus::MaxSteps);
        assert!(r.t_final < 1.0);
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = TrackerConfig { divergence_radius: 1e-3, ..Default::default() };
        let (sys, mut pts) = build_start(2, 0).unwrap();
        let r = track_path(&pts.next().unwrap(), &sys, &cfg);
        assert_eq!(r.status, PathStatus::Diverged);
        assert!(r.endpoint.max_norm() > cfg.divergence_radius);
    }
}
