//! Max-plus primitives on the tropical projective torus `R^e / R·1`.

use std::fmt;

use thiserror::Error;

use crate::newick::cmp_f64;
use crate::tol::Tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TropicalError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("torus points need at least two coordinates, got {0}")]
    TooFewCoordinates(usize),
    #[error("coordinate {0} is not finite")]
    NonFinite(usize),
}

/// A point of `R^e / R·1`, stored as one representative.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, TropicalError> {
        if coords.len() < 2 {
            return Err(TropicalError::TooFewCoordinates(coords.len()));
        }
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(TropicalError::NonFinite(i));
        }
        Ok(TorusPoint(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Representative with minimum coordinate 0.
    pub fn canonical(&self) -> Vec<f64> {
        let min = self.0.iter().copied().fold(f64::INFINITY, f64::min);
        self.0.iter().map(|x| x - min).collect()
    }

    /// Equality in the torus: tropical distance at most `tol`.
    pub fn approx_eq(&self, other: &TorusPoint, tol: Tol) -> bool {
        matches!(trop_dist(self, other), Ok(d) if d <= tol.value())
    }

    /// Adds `c` to every coordinate (same torus point).
    pub fn shifted(&self, c: f64) -> TorusPoint {
        TorusPoint(self.0.iter().map(|x| x + c).collect())
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.canonical().iter().map(|x| crate::trees::fmt_len(*x)).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn check_dims(a: &TorusPoint, b: &TorusPoint) -> Result<(), TropicalError> {
    if a.dim() != b.dim() {
        return Err(TropicalError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// `max_i(u_i - v_i) - min_i(u_i - v_i)`.
pub fn trop_dist(u: &TorusPoint, v: &TorusPoint) -> Result<f64, TropicalError> {
    check_dims(u, v)?;
    let (lo, hi) = u.0.iter().zip(&v.0).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
        let d = a - b;
        (lo.min(d), hi.max(d))
    });
    Ok(hi - lo)
}

/// Tropical linear combination `⊕_i coeffs_i ⊙ points_i`.
pub fn trop_combine(coeffs: &[f64], points: &[TorusPoint]) -> Result<TorusPoint, TropicalError> {
    if coeffs.is_empty() || points.is_empty() {
        return Err(TropicalError::Empty);
    }
    if coeffs.len() != points.len() {
        return Err(TropicalError::DimensionMismatch(coeffs.len(), points.len()));
    }
    let first = &points[0];
    for p in &points[1..] {
        check_dims(first, p)?;
    }
    let mut out = vec![f64::NEG_INFINITY; first.dim()];
    for (c, p) in coeffs.iter().zip(points) {
        for (o, x) in out.iter_mut().zip(&p.0) {
            *o = o.max(c + x);
        }
    }
    TorusPoint::new(out)
}

/// The tropical line segment between `v` (start) and `u` (end).
///
/// Bend points are the points `max(λ + u, v)` for the distinct values `λ`
/// of `v - u`, so the segment is stored as the sorted differences and bend
/// points are produced on demand. Construction is `O(e log e)`.
#[derive(Debug, Clone)]
pub struct TropicalSegment {
    u: TorusPoint,
    v: TorusPoint,
    /// `v - u` sorted ascending, ties broken by coordinate index.
    lambdas: Vec<f64>,
    /// Coordinate index for each entry of `lambdas`.
    order: Vec<usize>,
    /// First position in `lambdas` of each group of values within `tol`.
    breaks: Vec<usize>,
}

impl TropicalSegment {
    pub fn start(&self) -> &TorusPoint {
        &self.v
    }

    pub fn end(&self) -> &TorusPoint {
        &self.u
    }

    /// Sorted `λ = v - u`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Coordinate index that produced each sorted λ.
    pub fn lambda_order(&self) -> &[usize] {
        &self.order
    }

    /// Number of distinct bend points, endpoints included.
    pub fn len(&self) -> usize {
        self.breaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breaks.is_empty()
    }

    /// λ value at which bend point `k` is attained.
    pub fn bend_lambda(&self, k: usize) -> f64 {
        self.lambdas[self.breaks[k]]
    }

    /// Point of the segment for parameter `lambda`, using the representative
    /// `max(u + min(λ, 0), v - max(λ, 0))`: the tropical combination whose
    /// larger coefficient is zero. Its coordinates lie between the two
    /// endpoints' coordinates.
    pub fn point_at(&self, lambda: f64) -> TorusPoint {
        let a = lambda.min(0.0);
        let b = -lambda.max(0.0);
        TorusPoint(self.u.0.iter().zip(&self.v.0).map(|(x, y)| (x + a).max(y + b)).collect())
    }

    /// Bend point `k`; the first is exactly `v` and the last exactly `u`.
    pub fn bend_point(&self, k: usize) -> TorusPoint {
        if k == 0 {
            self.v.clone()
        } else if k + 1 == self.len() {
            self.u.clone()
        } else {
            self.point_at(self.bend_lambda(k))
        }
    }

    pub fn bend_points(&self) -> Vec<TorusPoint> {
        (0..self.len()).map(|k| self.bend_point(k)).collect()
    }

    /// Point at fraction `s ∈ [0, 1]` of the straight piece from bend point
    /// `k` to `k + 1`.
    pub fn piece_point(&self, k: usize, s: f64) -> TorusPoint {
        let lambda = (1.0 - s) * self.bend_lambda(k) + s * self.bend_lambda(k + 1);
        self.point_at(lambda)
    }

    /// Sum of tropical distances between consecutive bend points.
    pub fn path_length(&self) -> f64 {
        let pts = self.bend_points();
        pts.windows(2).map(|w| trop_dist(&w[0], &w[1]).expect("same dimension")).sum()
    }
}

/// Tropical line segment from `v` to `u` with consecutive duplicate bend
/// points (λ values within `tol`) merged.
pub fn tropical_segment(u: &TorusPoint, v: &TorusPoint, tol: Tol) -> Result<TropicalSegment, TropicalError> {
    check_dims(u, v)?;
    let diff: Vec<f64> = v.0.iter().zip(&u.0).map(|(a, b)| a - b).collect();
    let mut order: Vec<usize> = (0..diff.len()).collect();
    // Stable sort keeps coordinate order among equal values.
    order.sort_by(|&i, &j| cmp_f64(diff[i], diff[j]));
    let lambdas: Vec<f64> = order.iter().map(|&i| diff[i]).collect();
    let mut breaks = vec![0];
    let mut group_start = lambdas[0];
    for (i, &l) in lambdas.iter().enumerate().skip(1) {
        if l - group_start > tol.value() {
            breaks.push(i);
            group_start = l;
        }
    }
    Ok(TropicalSegment { u: u.clone(), v: v.clone(), lambdas, order, breaks })
}

/// Type of `x` with respect to `generators`: `Q_j` holds every generator
/// index `i` with `g^i_j - x_j = max_l (g^i_l - x_l)` (within `tol`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointType(Vec<Vec<usize>>);

impl PointType {
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.0
    }

    /// All `Q_j` nonempty.
    pub fn is_full(&self) -> bool {
        self.0.iter().all(|q| !q.is_empty())
    }
}

pub fn point_type(generators: &[TorusPoint], x: &TorusPoint, tol: Tol) -> Result<PointType, TropicalError> {
    if generators.is_empty() {
        return Err(TropicalError::Empty);
    }
    let mut sets = vec![Vec::new(); x.dim()];
    for (i, g) in generators.iter().enumerate() {
        check_dims(g, x)?;
        let diff: Vec<f64> = g.0.iter().zip(&x.0).map(|(a, b)| a - b).collect();
        let max = diff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (j, d) in diff.iter().enumerate() {
            if tol.eq(*d, max) {
                sets[j].push(i);
            }
        }
    }
    Ok(PointType(sets))
}

/// Membership in the tropical convex hull of `generators`.
pub fn in_tropical_hull(generators: &[TorusPoint], x: &TorusPoint, tol: Tol) -> Result<bool, TropicalError> {
    Ok(point_type(generators, x, tol)?.is_full())
}
