//! Orientation-invariant equivalence test for point clouds.
//!
//! A cloud is normalized by translating its centroid to the origin and
//! rotating its principal axes onto the coordinate axes. Two normalized
//! clouds are then compared by bidirectional nearest-neighbor matching
//! against a distance threshold delta, and the deviation is quantified by
//! the Chamfer distance (mean squared nearest-neighbor distance, summed
//! over both directions).
//!
//! Principal axes are ambiguous up to sign flips, and up to axis
//! permutations when eigenvalues tie. [`alignment_candidates`] enumerates
//! the proper rotations that resolve this; [`evaluate_pair`] keeps the
//! candidate minimizing Chamfer distance. Reflections are never considered:
//! a mirrored object is a different part.

mod eigen;
mod kdtree;

pub use eigen::{characteristic_poly, eigen_residual, eigen_symmetric};
pub use kdtree::KdTree;

use crate::geom::{Mat3, Vec3};
use crate::meshgen::PointCloud;
use crate::metrics::ErrorCategory;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point cloud after centroid translation and principal-axis rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCloud {
    pub points: Vec<Vec3>,
    pub centroid: Vec3,
    /// Covariance eigenvalues, descending, non-negative.
    pub eigenvalues: [f64; 3],
    /// Orthonormal, determinant +1; columns are the canonicalized
    /// principal axes.
    pub rotation: Mat3,
}

impl NormalizedCloud {
    pub fn bbox_diagonal(&self) -> f64 {
        crate::meshgen::bounding_box_of(&self.points)
            .map(|(lo, hi)| (hi - lo).norm())
            .unwrap_or(0.0)
    }
}

/// Match threshold: an absolute length in meters, or a fraction of the
/// ground-truth cloud's bounding-box diagonal after normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delta {
    Absolute(f64),
    Relative(f64),
}

/// Configuration for the equivalence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub delta: Delta,
    /// Two eigenvalues count as tied when they differ by at most this
    /// fraction of the largest eigenvalue.
    pub eigen_tie_tol: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            delta: Delta::Relative(0.005),
            eigen_tie_tol: 0.05,
        }
    }
}

impl MatchConfig {
    /// Resolve the configured delta against a normalized truth cloud.
    pub fn resolve_delta(&self, truth_bbox_diagonal: f64) -> f64 {
        match self.delta {
            Delta::Absolute(d) => d,
            Delta::Relative(f) => f * truth_bbox_diagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Result of comparing a candidate cloud against the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub verdict: Verdict,
    /// Largest nearest-neighbor distance over both match directions, meters.
    pub worst_match_distance: f64,
    /// Chamfer distance at the chosen alignment, squared meters.
    pub chamfer: f64,
    /// Index into the candidate list of the alignment minimizing Chamfer.
    pub chosen_alignment: usize,
    /// The absolute delta the verdict was decided against, meters.
    pub delta_used: f64,
    /// Bounding-box diagonal of the normalized truth cloud, meters.
    pub truth_bbox_diag: f64,
    /// Filled in by error classification; `None` until classified.
    pub error_category: Option<ErrorCategory>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("point cloud is empty")]
    EmptyCloud,
}

/// Normalize a cloud: translate the centroid to the origin and rotate the
/// principal axes onto the coordinate axes.
///
/// Eigenvector signs are canonicalized (largest-magnitude component made
/// positive), eigenvectors for numerically zero eigenvalues are completed
/// by Gram-Schmidt against the canonical axes, and a negative-determinant
/// basis is repaired by negating the third column. A single repeated point
/// yields the identity rotation. Deterministic for fixed input.
pub fn normalize(cloud: &PointCloud) -> Result<NormalizedCloud, GeomError> {
    if cloud.is_empty() {
        return Err(GeomError::EmptyCloud);
    }
    let n = cloud.points.len() as f64;
    let mut centroid = Vec3::ZERO;
    for p in &cloud.points {
        centroid = centroid + *p;
    }
    centroid = centroid * (1.0 / n);

    let mut cov = [[0.0f64; 3]; 3];
    for p in &cloud.points {
        let d = *p - centroid;
        let d = [d.x, d.y, d.z];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    for row in &mut cov {
        for x in row.iter_mut() {
            *x /= n;
        }
    }
    let covariance = Mat3 { m: cov };

    let (mut eigenvalues, vectors) = eigen_symmetric(&covariance);
    for v in &mut eigenvalues {
        *v = v.max(0.0);
    }

    let zero_tol = 1e-12 * eigenvalues[0];
    let mut columns: Vec<Vec3> = Vec::with_capacity(3);
    for k in 0..3 {
        if eigenvalues[0] > 0.0 && eigenvalues[k] > zero_tol {
            columns.push(vectors.column(k));
        }
    }
    complete_basis(&mut columns);
    let mut rotation = Mat3::from_columns(
        canonical_sign(columns[0]),
        canonical_sign(columns[1]),
        canonical_sign(columns[2]),
    );
    if rotation.det() < 0.0 {
        rotation.set_column(2, -rotation.column(2));
    }

    let rt = rotation.transpose();
    let points = cloud
        .points
        .iter()
        .map(|p| rt.apply(*p - centroid))
        .collect();
    Ok(NormalizedCloud {
        points,
        centroid,
        eigenvalues,
        rotation,
    })
}

/// Completes a partial orthonormal set to a full basis by Gram-Schmidt
/// against the canonical axes, in x, y, z order.
fn complete_basis(columns: &mut Vec<Vec3>) {
    let axes = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];
    let mut axis_iter = axes.iter();
    while columns.len() < 3 {
        let mut found = None;
        for axis in axis_iter.by_ref() {
            let mut residual = *axis;
            for c in columns.iter() {
                residual = residual - *c * c.dot(residual);
            }
            if residual.norm() > 0.5 {
                found = Some(residual.normalized());
                break;
            }
        }
        columns.push(found.expect("three canonical axes always complete a basis"));
    }
}

/// Flips a vector so its largest-magnitude component is positive; magnitude
/// ties resolve to the lowest index.
fn canonical_sign(v: Vec3) -> Vec3 {
    let a = [v.x.abs(), v.y.abs(), v.z.abs()];
    let mut idx = 0;
    for k in 1..3 {
        if a[k] > a[idx] {
            idx = k;
        }
    }
    if v.component(idx) < 0.0 {
        -v
    } else {
        v
    }
}

/// Enumerates the proper rotations that resolve principal-axis ambiguity:
/// always the four sign-flip diagonals with determinant +1, plus axis
/// permutations among eigenvalue groups tied within `eigen_tie_tol`.
/// Reflections are never emitted. The identity is always candidate 0.
pub fn alignment_candidates(norm: &NormalizedCloud, cfg: &MatchConfig) -> Vec<Mat3> {
    let tied = tie_groups(&norm.eigenvalues, cfg.eigen_tie_tol);
    let mut out = Vec::new();
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for perm in PERMS {
        // Axes may move only within their tie group.
        if perm.iter().enumerate().any(|(j, &i)| tied[i] != tied[j]) {
            continue;
        }
        for bits in 0..8u8 {
            let signs = [
                if bits & 1 == 0 { 1.0 } else { -1.0 },
                if bits & 2 == 0 { 1.0 } else { -1.0 },
                if bits & 4 == 0 { 1.0 } else { -1.0 },
            ];
            let mut m = Mat3::from_rows([0.0; 3], [0.0; 3], [0.0; 3]);
            for j in 0..3 {
                m.m[perm[j]][j] = signs[j];
            }
            if (m.det() - 1.0).abs() < 0.5 {
                out.push(m);
            }
        }
    }
    out
}

/// Group id per eigenvalue index; adjacent eigenvalues join when their gap
/// is at most `tol` times the largest eigenvalue.
fn tie_groups(eigenvalues: &[f64; 3], tol: f64) -> [usize; 3] {
    let scale = eigenvalues[0];
    let mut groups = [0usize; 3];
    for k in 1..3 {
        let gap = eigenvalues[k - 1] - eigenvalues[k];
        groups[k] = if gap <= tol * scale {
            groups[k - 1]
        } else {
            groups[k - 1] + 1
        };
    }
    groups
}

/// The worst nearest-neighbor distance and the Chamfer distance between two
/// point sets, computed in one pass per direction with exact neighbors.
fn match_stats(a: &[Vec3], b: &[Vec3]) -> (f64, f64) {
    let tree_b = KdTree::build(b);
    let tree_a = KdTree::build(a);
    match_stats_with_trees(a, &tree_a, b, &tree_b)
}

fn match_stats_with_trees(a: &[Vec3], tree_a: &KdTree, b: &[Vec3], tree_b: &KdTree) -> (f64, f64) {
    let mut worst_sq = 0.0f64;
    let mut sum_a = 0.0f64;
    for p in a {
        let d = tree_b.nearest_squared(*p);
        worst_sq = worst_sq.max(d);
        sum_a += d;
    }
    let mut sum_b = 0.0f64;
    for q in b {
        let d = tree_a.nearest_squared(*q);
        worst_sq = worst_sq.max(d);
        sum_b += d;
    }
    let chamfer = sum_a / a.len() as f64 + sum_b / b.len() as f64;
    (worst_sq.sqrt(), chamfer)
}

/// Bidirectional delta-matching: every point of each cloud must have a
/// neighbor in the other within `delta_abs` meters. Returns the verdict and
/// the worst nearest-neighbor distance over both directions.
pub fn bidirectional_match(
    source: &NormalizedCloud,
    target: &NormalizedCloud,
    delta_abs: f64,
) -> (bool, f64) {
    let (worst, _) = match_stats(&source.points, &target.points);
    (worst <= delta_abs, worst)
}

/// Chamfer distance between two normalized clouds, in squared meters:
/// mean squared nearest-neighbor distance, summed over both directions.
/// Symmetric in its arguments.
pub fn chamfer(a: &NormalizedCloud, b: &NormalizedCloud) -> f64 {
    let (_, d) = match_stats(&a.points, &b.points);
    d
}

/// Full equivalence test: normalize both clouds, resolve delta against the
/// truth cloud, try every alignment candidate applied to the candidate
/// cloud, and report the candidate minimizing Chamfer distance.
pub fn evaluate_pair(
    candidate: &PointCloud,
    truth: &PointCloud,
    cfg: &MatchConfig,
) -> Result<EvalOutcome, GeomError> {
    let norm_c = normalize(candidate)?;
    let norm_t = normalize(truth)?;

    let truth_bbox_diag = norm_t.bbox_diagonal();
    let delta_abs = cfg.resolve_delta(truth_bbox_diag);

    // The ground truth defines the admissible symmetry class.
    let candidates = alignment_candidates(&norm_t, cfg);
    let tree_t = KdTree::build(&norm_t.points);

    let mut best: Option<(f64, f64, usize)> = None;
    for (index, alignment) in candidates.iter().enumerate() {
        let rotated: Vec<Vec3> = norm_c.points.iter().map(|p| alignment.apply(*p)).collect();
        let tree_r = KdTree::build(&rotated);
        let (worst, d_cd) = match_stats_with_trees(&rotated, &tree_r, &norm_t.points, &tree_t);
        let better = match best {
            None => true,
            Some((best_cd, _, _)) => d_cd < best_cd,
        };
        if better {
            best = Some((d_cd, worst, index));
        }
    }
    let (chamfer, worst, chosen) = best.expect("candidate list is never empty");

    Ok(EvalOutcome {
        verdict: if worst <= delta_abs {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        worst_match_distance: worst,
        chamfer,
        chosen_alignment: chosen,
        delta_used: delta_abs,
        truth_bbox_diag,
        error_category: None,
    })
}
