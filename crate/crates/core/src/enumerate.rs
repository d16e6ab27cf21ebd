//! From path endpoints to the finite set of Ulam tuples of a given degree.

use std::collections::HashMap;
use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cvec::CVec;
use crate::error::{Result, UlamError};
use crate::homotopy::{
    condition_estimate, polish_endpoint, refine_endpoint, refine_singular, track_all, PathResult, PathStatus,
    TrackerConfig,
};
use crate::map::verify_fixed_point;
use crate::polyroots::{verify_ulam_by_roots, RootFindConfig};

/// Largest degree accepted by [`enumerate_ulam`].
pub const MAX_ENUMERATE_DEGREE: usize = 8;
/// Residual tolerance every reported solution must meet.
pub const REPORT_RESIDUAL_TOL: f64 = 1e-8;
/// Matching tolerance for the root-multiset check.
pub const ROOT_MATCH_TOL: f64 = 1e-6;
/// Condition estimate above which a solution is refined by deflation.
const SINGULAR_CONDITION: f64 = 1e8;
const POLISH_ITERS: usize = 10;

/// One member of the solution set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: CVec,
    pub residual_norm: f64,
    pub is_real: bool,
    /// `P(0) = 0`, i.e. `|x_n|` within the real tolerance.
    pub is_trivial: bool,
    /// Number of paths (or starts) that landed here.
    pub cluster_size: usize,
    pub condition_estimate: f64,
}

/// Path accounting; the counts partition `total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub total: usize,
    pub converged: usize,
    pub diverged: usize,
    pub max_steps: usize,
    pub singular: usize,
}

impl PathStats {
    pub fn from_results(results: &[PathResult]) -> Self {
        let mut stats = PathStats { total: results.len(), ..Default::default() };
        for r in results {
            match r.status {
                PathStatus::Converged => stats.converged += 1,
                PathStatus::Diverged => stats.diverged += 1,
                PathStatus::MaxSteps => stats.max_steps += 1,
                PathStatus::SingularEndpoint => stats.singular += 1,
            }
        }
        stats
    }

    /// Whether every path ended cleanly (no step-budget or singular failures).
    pub fn is_clean(&self) -> bool {
        self.max_steps == 0 && self.singular == 0
    }
}

/// The enumerated fixed points of one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub degree: usize,
    /// Canonically ordered, pairwise farther apart than the dedup radius.
    pub solutions: Vec<Solution>,
    pub path_stats: PathStats,
    pub seed: u64,
    pub config: TrackerConfig,
    /// Diagnostics for anything that was not clean: failed paths, dropped
    /// clusters.
    pub warnings: Vec<String>,
}

impl SolutionSet {
    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &CVec> {
        self.solutions.iter().map(|s| &s.x)
    }
}

/// Counts surfaced by [`summarize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub real: usize,
    pub real_nontrivial: usize,
    pub conjugate_pairs: usize,
    pub diverged_paths: usize,
    pub contains_origin: bool,
}

/// Single-linkage clustering at max-norm distance `radius`. Each cluster is
/// represented by its component-wise mean; clusters come out in order of
/// their first member.
pub fn dedup_cluster(points: &[CVec], radius: f64) -> Vec<(CVec, usize)> {
    let m = points.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    // Points sharing a grid cell of side radius/sqrt(2) are within radius of
    // each other; link them up front so the sweep can skip such pairs cheaply.
    let cell_side = radius / std::f64::consts::SQRT_2;
    let mut cell_ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let cell: Vec<usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let key: Option<Vec<i64>> = p
                .iter()
                .flat_map(|c| [c.re, c.im])
                .map(|v| {
                    let k = (v / cell_side).floor();
                    (k.abs() < 1e15).then_some(k as i64)
                })
                .collect();
            match key {
                Some(key) => {
                    let next = cell_ids.len();
                    *cell_ids.entry(key).or_insert(next)
                }
                // Too far out to bucket; give it a cell of its own.
                None => usize::MAX - i,
            }
        })
        .collect();
    let mut first_in_cell: HashMap<usize, usize> = HashMap::new();
    for i in 0..m {
        let leader = *first_in_cell.entry(cell[i]).or_insert(i);
        if leader != i {
            parent[i] = leader;
        }
    }

    // Sweep along a generic projection; points within `radius` of each other
    // differ there by at most `radius * spread`.
    let weights: Vec<(f64, f64)> = (0..points.first().map_or(0, |p| p.len()))
        .map(|k| (1.0 / (k as f64 + 1.618), 1.0 / (k as f64 + 2.414)))
        .collect();
    let spread: f64 = weights.iter().map(|(a, b)| a + b).sum();
    let proj: Vec<f64> = points
        .iter()
        .map(|p| p.iter().zip(&weights).map(|(c, (a, b))| a * c.re + b * c.im).sum())
        .collect();
    let window = radius * spread;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if proj[j] - proj[i] > window {
                break;
            }
            if cell[i] == cell[j] {
                continue;
            }
            if points[i].dist_max(&points[j]) <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut clusters: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..m {
        let root = find(&mut parent, i);
        match slot.get(&root) {
            Some(&k) => clusters[k].1.push(i),
            None => {
                slot.insert(root, clusters.len());
                clusters.push((root, vec![i]));
            }
        }
    }
    clusters
        .into_iter()
        .map(|(_, members)| {
            let n = points[members[0]].len();
            let k = members.len() as f64;
            let mean = (0..n)
                .map(|c| members.iter().map(|&i| points[i][c]).sum::<num_complex::Complex64>() / k)
                .collect();
            (CVec::from_vec_unchecked(mean), members.len())
        })
        .collect()
}

fn canonical_key(x: &CVec) -> Vec<f64> {
    // `+ 0.0` folds -0 into +0
    x.iter()
        .flat_map(|c| [c.re, c.im])
        .map(|v| (v * 1e9).round() + 0.0)
        .collect()
}

fn compare_keys(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// Sorts by `(Re x_1, Im x_1, Re x_2, ...)` with every component rounded to
/// nine decimals first, so sets that agree to about 1e-9 sort identically.
pub fn canonicalize(mut set: Vec<Solution>) -> Vec<Solution> {
    set.sort_by_cached_key(|s| CanonicalKey(canonical_key(&s.x)));
    set
}

#[derive(PartialEq)]
struct CanonicalKey(Vec<f64>);

impl Eq for CanonicalKey {}

impl PartialOrd for CanonicalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_keys(&self.0, &other.0)
    }
}

/// Refines a cluster representative and classifies it. Returns `None` when
/// the point fails either Ulam check.
fn finish_solution(x: &CVec, cluster_size: usize, cfg: &TrackerConfig) -> Option<Solution> {
    let mut x = match refine_endpoint(x, cfg) {
        Ok((p, _, _)) => p,
        Err(_) => x.clone(),
    };
    x = polish_endpoint(&x, POLISH_ITERS);
    let mut cond = condition_estimate(&x);
    if !(cond <= SINGULAR_CONDITION) {
        if let Some(p) = refine_singular(&x) {
            x = p;
            cond = condition_estimate(&x);
        }
    }
    let (ok, residual_norm) = verify_fixed_point(&x, REPORT_RESIDUAL_TOL).ok()?;
    let roots_ok = verify_ulam_by_roots(&x, &RootFindConfig::default(), ROOT_MATCH_TOL).unwrap_or(false);
    if !ok || !roots_ok || residual_norm > cfg.refine_tol {
        return None;
    }
    let n = x.len();
    Some(Solution {
        is_real: x.max_abs_im() <= cfg.real_tol,
        is_trivial: x[n - 1].norm() <= cfg.real_tol,
        residual_norm,
        cluster_size,
        condition_estimate: if cond.is_finite() { cond } else { f64::MAX },
        x,
    })
}

/// Dedups, refines, verifies and canonically orders candidate points.
pub(crate) fn assemble(
    degree: usize,
    candidates: &[CVec],
    path_stats: PathStats,
    cfg: &TrackerConfig,
    mut warnings: Vec<String>,
) -> SolutionSet {
    let mut solutions = Vec::new();
    for (rep, size) in dedup_cluster(candidates, cfg.dedup_radius) {
        match finish_solution(&rep, size, cfg) {
            Some(s) => solutions.push(s),
            None => warnings.push(format!("dropped cluster of {size} at {rep}: failed verification")),
        }
    }
    // Refinement can pull two representatives onto the same point.
    let mut merged: Vec<Solution> = Vec::with_capacity(solutions.len());
    for s in solutions {
        match merged.iter_mut().find(|m| m.x.dist_max(&s.x) <= cfg.dedup_radius) {
            Some(m) => m.cluster_size += s.cluster_size,
            None => merged.push(s),
        }
    }
    SolutionSet {
        degree,
        solutions: canonicalize(merged),
        path_stats,
        seed: cfg.seed,
        config: *cfg,
        warnings,
    }
}

/// Enumerates the Ulam tuples of degree `n` by tracking all `n!` paths.
///
/// Failed paths never abort the run; they are counted in `path_stats` and
/// noted in `warnings`.
pub fn enumerate_ulam(n: usize, cfg: &TrackerConfig) -> Result<SolutionSet> {
    if !(1..=MAX_ENUMERATE_DEGREE).contains(&n) {
        return Err(UlamError::DegreeOutOfRange { n, min: 1, max: MAX_ENUMERATE_DEGREE });
    }
    let results = track_all(n, cfg)?;
    Ok(from_path_results(n, &results, cfg))
}

/// Builds the solution set from already tracked paths.
pub fn from_path_results(n: usize, results: &[PathResult], cfg: &TrackerConfig) -> SolutionSet {
    let stats = PathStats::from_results(results);
    let mut warnings = Vec::new();
    if stats.max_steps > 0 {
        warnings.push(format!("{} paths exhausted the step budget", stats.max_steps));
    }
    if stats.singular > 0 {
        warnings.push(format!("{} paths ended at a singular or stalled point", stats.singular));
    }
    let converged: Vec<CVec> = results
        .iter()
        .filter(|r| r.status == PathStatus::Converged)
        .map(|r| r.endpoint.clone())
        .collect();
    assemble(n, &converged, stats, cfg, warnings)
}

/// Counts by kind. Conjugate pairs are counted among the non-real solutions.
pub fn summarize(set: &SolutionSet) -> Summary {
    let tol = set.config.real_tol;
    let real = set.solutions.iter().filter(|s| s.is_real).count();
    let real_nontrivial = set.solutions.iter().filter(|s| s.is_real && !s.is_trivial).count();
    let paired = set
        .solutions
        .iter()
        .filter(|s| !s.is_real)
        .filter(|s| {
            let c = s.x.conj();
            set.solutions.iter().any(|t| t.x.dist_max(&c) <= 100.0 * tol)
        })
        .count();
    Summary {
        total: set.solutions.len(),
        real,
        real_nontrivial,
        conjugate_pairs: paired / 2,
        diverged_paths: set.path_stats.diverged,
        contains_origin: set.solutions.iter().any(|s| s.x.max_norm() <= tol),
    }
}
