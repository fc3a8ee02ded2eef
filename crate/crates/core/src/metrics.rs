//! Signature comparison by summed inter-vector angle, and the bottleneck
//! distance between persistence diagrams used as the reference metric.

use thiserror::Error;

use crate::persistence::PersistenceBarcode;
use crate::scalar::Scalar;
use crate::signature::{SignatureVector, TopologicalSignature};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vectors belong to different (plane, dim) slots")]
    SlotMismatch,
    #[error("signatures have different configurations or layouts")]
    ConfigMismatch,
}

/// Entry scalars the angle comparison accepts.
///
/// The integer implementation decides "angle is exactly zero" in integer
/// arithmetic (Cauchy-Schwarz equality), so the scale invariance that makes
/// signatures independent of the period count holds without rounding resid.
pub trait SignatureEntry: Copy {
    fn angle_degrees(u: &[Self], v: &[Self]) -> f64;
}

impl SignatureEntry for u64 {
    fn angle_degrees(u: &[Self], v: &[Self]) -> f64 {
        let dot: u128 = u.iter().zip(v).map(|(&a, &b)| a as u128 * b as u128).sum();
        let uu: u128 = u.iter().map(|&a| a as u128 * a as u128).sum();
        let vv: u128 = v.iter().map(|&a| a as u128 * a as u128).sum();
        match (uu == 0, vv == 0) {
            (true, true) => return 0.0,
            (true, false) | (false, true) => return 90.0,
            _ => {}
        }
        if dot == 0 {
            return 90.0;
        }
        if dot * dot == uu * vv {
            return 0.0; // exact positive scalar multiples
        }
        let cos = dot as f64 / ((uu as f64).sqrt() * (vv as f64).sqrt());
        cos.clamp(-1.0, 1.0).acos().to_degrees()
    }
}

impl SignatureEntry for f64 {
    fn angle_degrees(u: &[Self], v: &[Self]) -> f64 {
        let uu: f64 = u.iter().map(|a| a * a).sum();
        let vv: f64 = v.iter().map(|a| a * a).sum();
        match (uu == 0.0, vv == 0.0) {
            (true, true) => return 0.0,
            (true, false) | (false, true) => return 90.0,
            _ => {}
        }
        if exact_positive_multiple(u, v) {
            return 0.0;
        }
        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        let cos = dot / (uu.sqrt() * vv.sqrt());
        cos.clamp(-1.0, 1.0).acos().to_degrees()
    }
}

fn exact_positive_multiple(u: &[f64], v: &[f64]) -> bool {
    let Some(i) = v.iter().position(|&x| x != 0.0) else {
        return false;
    };
    if u[i] <= 0.0 {
        return false;
    }
    let ratio = u[i] / v[i];
    u.iter().zip(v).all(|(&a, &b)| a == ratio * b)
}

/// Angle in degrees between two vectors of the same (plane, dim) slot.
pub fn angle<E: SignatureEntry>(
    u: &SignatureVector<E>,
    v: &SignatureVector<E>,
) -> Result<f64, MetricsError> {
    if u.entries.len() != v.entries.len() {
        return Err(MetricsError::LengthMismatch(
            u.entries.len(),
            v.entries.len(),
        ));
    }
    if u.plane != v.plane || u.dim != v.dim {
        return Err(MetricsError::SlotMismatch);
    }
    Ok(E::angle_degrees(&u.entries, &v.entries))
}

/// Per-vector angles plus their sum (0 identical .. 1440 worst) and the
/// summed cosine (16 identical .. 0 worst).
#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub per_vector: Vec<f64>,
    pub total_angle: f64,
    pub total_cosine: f64,
}

pub fn compare<E: SignatureEntry>(
    a: &TopologicalSignature<E>,
    b: &TopologicalSignature<E>,
) -> Result<ComparisonResult, MetricsError> {
    if a.config != b.config || a.vectors.len() != b.vectors.len() {
        return Err(MetricsError::ConfigMismatch);
    }
    let per_vector: Vec<f64> = a
        .vectors
        .iter()
        .zip(&b.vectors)
        .map(|(u, v)| angle(u, v))
        .collect::<Result<_, _>>()?;
    let total_angle = per_vector.iter().sum();
    let total_cosine = per_vector.iter().map(|d| d.to_radians().cos()).sum();
    Ok(ComparisonResult {
        per_vector,
        total_angle,
        total_cosine,
    })
}

/// Total angle between two signatures.
pub fn total_angle<E: SignatureEntry>(
    a: &TopologicalSignature<E>,
    b: &TopologicalSignature<E>,
) -> Result<f64, MetricsError> {
    Ok(compare(a, b)?.total_angle)
}

/// A persistence diagram for one dimension: finite points plus the births
/// of infinite classes.
#[derive(Debug, Clone, Default)]
pub struct Diagram {
    pub points: Vec<(f64, f64)>,
    pub infinite_births: Vec<f64>,
}

impl Diagram {
    pub fn from_barcode<S: Scalar>(barcode: &PersistenceBarcode<S>, dim: u8) -> Diagram {
        let mut d = Diagram::default();
        for (birth, death) in barcode.bars_f64(dim) {
            match death {
                Some(death) => d.points.push((birth, death)),
                None => d.infinite_births.push(birth),
            }
        }
        d
    }

    pub fn from_points(points: Vec<(f64, f64)>) -> Diagram {
        Diagram {
            points,
            infinite_births: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BottleneckResult {
    pub distance: f64,
    /// Set when the diagrams hold different numbers of infinite classes, in
    /// which case no finite-cost matching exists and distance is +inf.
    pub infinite_mismatch: bool,
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn diagonal_cost(p: (f64, f64)) -> f64 {
    (p.1 - p.0).abs() / 2.0
}

/// Exact bottleneck distance between two diagrams.
///
/// Finite parts are matched by a threshold search: candidate thresholds are
/// the pairwise L-inf distances and the diagonal costs, and feasibility of a
/// threshold is a perfect-matching test where each point may also match the
/// diagonal. Infinite classes must pair up among themselves; their optimal
/// assignment is birth-sorted order.
pub fn bottleneck(a: &Diagram, b: &Diagram) -> BottleneckResult {
    if a.infinite_births.len() != b.infinite_births.len() {
        return BottleneckResult {
            distance: f64::INFINITY,
            infinite_mismatch: true,
        };
    }
    let mut ia = a.infinite_births.clone();
    let mut ib = b.infinite_births.clone();
    ia.sort_unstable_by(f64::total_cmp);
    ib.sort_unstable_by(f64::total_cmp);
    let infinite_part = ia
        .iter()
        .zip(&ib)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let finite_part = finite_bottleneck(&a.points, &b.points);
    BottleneckResult {
        distance: infinite_part.max(finite_part),
        infinite_mismatch: false,
    }
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = vec![0.0];
    for &p in a {
        candidates.push(diagonal_cost(p));
        for &q in b {
            candidates.push(linf(p, q));
        }
    }
    for &q in b {
        candidates.push(diagonal_cost(q));
    }
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();
    // Smallest candidate threshold admitting a perfect matching.
    let mut lo = 0;
    let mut hi = candidates.len() - 1;
    debug_assert!(matching_feasible(a, b, candidates[hi]));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if matching_feasible(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Can every point be matched (to a point of the other diagram within `t`,
/// or to the diagonal at cost within `t`)?
///
/// Left side: points of `a` then |b| diagonal slots. Right side: points of
/// `b` then |a| diagonal slots. Diagonal slots pair with each other freely.
fn matching_feasible(a: &[(f64, f64)], b: &[(f64, f64)], t: f64) -> bool {
    let (na, nb) = (a.len(), b.len());
    let total = na + nb;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (i, &p) in a.iter().enumerate() {
        for (j, &q) in b.iter().enumerate() {
            if linf(p, q) <= t {
                adjacency[i].push(j);
            }
        }
        if diagonal_cost(p) <= t {
            adjacency[i].extend(nb..total);
        }
    }
    for (i, adj) in adjacency.iter_mut().enumerate().skip(na) {
        let dummy = i - na;
        if diagonal_cost(b[dummy]) <= t {
            adj.push(dummy);
        }
        adj.extend(nb..total);
    }
    // Kuhn's augmenting paths; diagrams stay small enough for this.
    let mut matched_right: Vec<Option<usize>> = vec![None; total];
    let mut size = 0;
    for start in 0..total {
        let mut visited = vec![false; total];
        if augment(start, &adjacency, &mut matched_right, &mut visited) {
            size += 1;
        }
    }
    size == total
}

fn augment(
    u: usize,
    adjacency: &[Vec<usize>],
    matched_right: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &v in &adjacency[u] {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        if matched_right[v].is_none()
            || augment(matched_right[v].unwrap(), adjacency, matched_right, visited)
        {
            matched_right[v] = Some(u);
            return true;
        }
    }
    false
}
