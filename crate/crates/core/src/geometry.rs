//! Exact segment and polyline geometry for manufacturing paths.
//!
//! Distances between printing segments drive the conflict set: every pair of
//! segments from two different paths whose closest approach is within the
//! clearance radius becomes a [`ConflictPair`]. Segment pairs belonging to the
//! same path are never paired, since one UAV cannot conflict with itself.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm_squared().sqrt()
    }

    /// Linear interpolation `self + t (other - self)`.
    pub fn lerp(self, other: Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A closed straight segment. `a == b` is allowed and behaves as a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point3,
    pub b: Point3,
}

impl Segment {
    pub const fn new(a: Point3, b: Point3) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn point_at(&self, t: f64) -> Point3 {
        self.a.lerp(self.b, t)
    }

    fn check_finite(&self) -> Result<()> {
        if self.a.is_finite() && self.b.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(format!("non-finite segment endpoint in {self:?}")))
        }
    }

    /// Lower and upper corners of the axis-aligned box around the segment.
    fn bounds(&self) -> (Point3, Point3) {
        (
            Point3::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y), self.a.z.min(self.b.z)),
            Point3::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y), self.a.z.max(self.b.z)),
        )
    }
}

/// Squared distance from `p` to the closed segment `s`.
fn point_segment_distance_sq(p: Point3, s: &Segment) -> f64 {
    let d = s.b - s.a;
    let len_sq = d.norm_squared();
    if len_sq == 0.0 {
        return (p - s.a).norm_squared();
    }
    let t = ((p - s.a).dot(d) / len_sq).clamp(0.0, 1.0);
    (p - s.point_at(t)).norm_squared()
}

/// Exact minimum Euclidean distance between two closed segments.
///
/// Minimizes `|a(s) - b(t)|^2` over the unit square. The quadratic is convex,
/// so its minimum is either the interior critical point or lies on one of the
/// four edges, and each edge reduces to a point-to-segment distance.
pub fn segment_min_distance(a: &Segment, b: &Segment) -> Result<f64> {
    a.check_finite()?;
    b.check_finite()?;
    Ok(segment_distance_sq(a, b).sqrt())
}

fn segment_distance_sq(p: &Segment, q: &Segment) -> f64 {
    let u = p.b - p.a;
    let v = q.b - q.a;
    let w = p.a - q.a;
    let uu = u.norm_squared();
    let vv = v.norm_squared();

    // Degenerate segments fall back to point-segment distance.
    if uu == 0.0 && vv == 0.0 {
        return w.norm_squared();
    }
    if uu == 0.0 {
        return point_segment_distance_sq(p.a, q);
    }
    if vv == 0.0 {
        return point_segment_distance_sq(q.a, p);
    }

    let mut best = point_segment_distance_sq(p.a, q)
        .min(point_segment_distance_sq(p.b, q))
        .min(point_segment_distance_sq(q.a, p))
        .min(point_segment_distance_sq(q.b, p));

    let uv = u.dot(v);
    let uw = u.dot(w);
    let vw = v.dot(w);
    let denom = uu * vv - uv * uv;
    // Parallel segments attain their minimum on an edge of the square.
    if denom > f64::EPSILON * uu * vv {
        let s = (uv * vw - vv * uw) / denom;
        let t = (uu * vw - uv * uw) / denom;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            best = best.min((p.point_at(s) - q.point_at(t)).norm_squared());
        }
    }
    best
}

/// Ordered polyline traversed at constant speed while depositing material.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintPath {
    waypoints: Vec<Point3>,
    cumulative_lengths: Vec<f64>,
}

impl PrintPath {
    pub fn new(waypoints: Vec<Point3>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "a print path needs at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if let Some(p) = waypoints.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite waypoint {p:?}")));
        }
        let mut cumulative_lengths = Vec::with_capacity(waypoints.len() - 1);
        let mut acc = 0.0;
        for w in waypoints.windows(2) {
            acc += w[0].distance(w[1]);
            cumulative_lengths.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::InvalidGeometry("print path has zero total length".into()));
        }
        Ok(Self { waypoints, cumulative_lengths })
    }

    pub fn waypoints(&self) -> &[Point3] {
        &self.waypoints
    }

    /// Path length at the end of each segment.
    pub fn cumulative_lengths(&self) -> &[f64] {
        &self.cumulative_lengths
    }

    pub fn segment_count(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn segment(&self, i: usize) -> Segment {
        Segment::new(self.waypoints[i], self.waypoints[i + 1])
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.waypoints.windows(2).map(|w| Segment::new(w[0], w[1]))
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative_lengths.last().expect("at least one segment")
    }

    /// Path length travelled when segment `i` is entered.
    pub fn entry_length(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cumulative_lengths[i - 1]
        }
    }

    /// Point reached after travelling `s` meters along the path; clamped to the ends.
    pub fn point_at_length(&self, s: f64) -> Point3 {
        if s <= 0.0 {
            return self.waypoints[0];
        }
        let i = self.cumulative_lengths.partition_point(|&c| c < s);
        if i >= self.segment_count() {
            return *self.waypoints.last().unwrap();
        }
        let start = self.entry_length(i);
        let len = self.cumulative_lengths[i] - start;
        if len <= 0.0 {
            return self.waypoints[i + 1];
        }
        self.segment(i).point_at((s - start) / len)
    }
}

/// Time offsets, relative to printing start, at which each segment is exited.
///
/// The entry time of segment `i` is `offsets[i - 1]`, or zero for the first segment.
pub fn arrival_offsets(path: &PrintPath, v_ex: f64) -> Result<Vec<f64>> {
    if !(v_ex > 0.0) || !v_ex.is_finite() {
        return Err(Error::InvalidParameter {
            name: "v_ex",
            reason: format!("printing speed must be positive, got {v_ex}"),
        });
    }
    Ok(path.cumulative_lengths().iter().map(|l| l / v_ex).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictPair {
    pub task_a: usize,
    pub task_b: usize,
    pub seg_a: usize,
    pub seg_b: usize,
    pub min_dist: f64,
}

/// The set of cross-path segment pairs whose minimum distance is within `r_c`,
/// sorted by `(task_a, task_b, seg_a, seg_b)` with `task_a < task_b`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConflictSet {
    pub pairs: Vec<ConflictPair>,
}

impl ConflictSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs between tasks `a` and `b` (in canonical orientation).
    pub fn between(&self, a: usize, b: usize) -> &[ConflictPair] {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let lo = self.pairs.partition_point(|p| (p.task_a, p.task_b) < (a, b));
        let hi = self.pairs.partition_point(|p| (p.task_a, p.task_b) <= (a, b));
        &self.pairs[lo..hi]
    }

    /// Distinct task pairs that have at least one conflicting segment pair.
    pub fn task_pairs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.pairs.iter().map(|p| (p.task_a, p.task_b)).collect();
        out.dedup();
        out
    }
}

/// Symmetric matrix of task-pair conflict probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    n: usize,
    probs: Vec<f64>,
}

impl ConflictGraph {
    pub fn from_conflicts(paths: &[PrintPath], conflicts: &ConflictSet) -> Self {
        let n = paths.len();
        let mut probs = vec![0.0; n * n];
        for (a, b) in conflicts.task_pairs() {
            let count = conflicts.between(a, b).len() as f64;
            let p = count / (paths[a].segment_count() * paths[b].segment_count()) as f64;
            probs[a * n + b] = p;
            probs[b * n + a] = p;
        }
        Self { n, probs }
    }

    pub fn probability(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.n + b]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

fn boxes_within(lo_a: Point3, hi_a: Point3, lo_b: Point3, hi_b: Point3, r: f64) -> bool {
    lo_a.x <= hi_b.x + r
        && lo_b.x <= hi_a.x + r
        && lo_a.y <= hi_b.y + r
        && lo_b.y <= hi_a.y + r
        && lo_a.z <= hi_b.z + r
        && lo_b.z <= hi_a.z + r
}

fn pair_conflicts(ta: usize, a: &PrintPath, tb: usize, b: &PrintPath, r_c: f64) -> Vec<ConflictPair> {
    let r_sq = r_c * r_c;
    let boxes_b: Vec<_> = b.segments().map(|s| s.bounds()).collect();
    let mut out = Vec::new();
    for (i, sa) in a.segments().enumerate() {
        let (lo_a, hi_a) = sa.bounds();
        for (j, sb) in b.segments().enumerate() {
            let (lo_b, hi_b) = boxes_b[j];
            if !boxes_within(lo_a, hi_a, lo_b, hi_b, r_c) {
                continue;
            }
            let d_sq = segment_distance_sq(&sa, &sb);
            if d_sq <= r_sq {
                out.push(ConflictPair { task_a: ta, task_b: tb, seg_a: i, seg_b: j, min_dist: d_sq.sqrt() });
            }
        }
    }
    out
}

/// All cross-path segment pairs with minimum distance `<= r_c`.
///
/// Task ids are the indices into `paths`. The comparison is inclusive.
pub fn detect_conflicts(paths: &[PrintPath], r_c: f64) -> Result<ConflictSet> {
    if !(r_c > 0.0) || !r_c.is_finite() {
        return Err(Error::InvalidParameter {
            name: "r_c",
            reason: format!("clearance radius must be positive, got {r_c}"),
        });
    }
    let bounds: Vec<(Point3, Point3)> = paths
        .iter()
        .map(|p| {
            p.segments().map(|s| s.bounds()).fold(
                (Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY), Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY)),
                |(lo, hi), (l, h)| {
                    (
                        Point3::new(lo.x.min(l.x), lo.y.min(l.y), lo.z.min(l.z)),
                        Point3::new(hi.x.max(h.x), hi.y.max(h.y), hi.z.max(h.z)),
                    )
                },
            )
        })
        .collect();
    let task_pairs: Vec<(usize, usize)> = (0..paths.len())
        .flat_map(|a| (a + 1..paths.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| boxes_within(bounds[a].0, bounds[a].1, bounds[b].0, bounds[b].1, r_c))
        .collect();
    let mut pairs: Vec<ConflictPair> = task_pairs
        .par_iter()
        .flat_map_iter(|&(a, b)| pair_conflicts(a, &paths[a], b, &paths[b], r_c))
        .collect();
    pairs.sort_by_key(|p| (p.task_a, p.task_b, p.seg_a, p.seg_b));
    Ok(ConflictSet { pairs })
}

/// Fraction of segment pairs between the two paths that lie within `r_c`.
pub fn conflict_probability(a: &PrintPath, b: &PrintPath, r_c: f64) -> Result<f64> {
    if !(r_c > 0.0) || !r_c.is_finite() {
        return Err(Error::InvalidParameter {
            name: "r_c",
            reason: format!("clearance radius must be positive, got {r_c}"),
        });
    }
    let count = pair_conflicts(0, a, 1, b, r_c).len();
    Ok(count as f64 / (a.segment_count() * b.segment_count()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: [f64; 3], b: [f64; 3]) -> Segment {
        Segment::new(a.into(), b.into())
    }

    fn path(points: &[[f64; 3]]) -> PrintPath {
        PrintPath::new(points.iter().map(|&p| p.into()).collect()).unwrap()
    }

    #[test]
    fn parallel_offset_segments() {
        let d = segment_min_distance(&seg([0., 0., 0.], [1., 0., 0.]), &seg([0., 1., 0.], [1., 1., 0.])).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn point_segment_on_segment() {
        let d = segment_min_distance(&seg([0., 0., 0.], [1., 0., 0.]), &seg([0.5, 0., 0.], [0.5, 0., 0.])).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn skew_diagonals_one_apart() {
        // Value confirmed by the sampling oracle in tests/geometry_oracle.rs.
        let d = segment_min_distance(&seg([0., 0., 0.], [1., 1., 0.]), &seg([1., 0., 1.], [0., 1., 1.])).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_disjoint_segments() {
        let d = segment_min_distance(&seg([0., 0., 0.], [1., 0., 0.]), &seg([3., 0., 0.], [2., 0., 0.])).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        let bad = seg([f64::NAN, 0., 0.], [1., 0., 0.]);
        assert!(matches!(segment_min_distance(&bad, &bad), Err(Error::InvalidGeometry(_))));
        assert!(PrintPath::new(vec![Point3::new(0., 0., 0.), Point3::new(f64::INFINITY, 0., 0.)]).is_err());
    }

    #[test]
    fn path_needs_length() {
        assert!(PrintPath::new(vec![Point3::default()]).is_err());
        assert!(PrintPath::new(vec![Point3::default(), Point3::default()]).is_err());
    }

    #[test]
    fn far_paths_do_not_conflict() {
        let a = path(&[[0., 0., 0.], [1., 0., 0.]]);
        let b = path(&[[0., 5., 0.], [1., 5., 0.]]);
        assert!(detect_conflicts(&[a.clone(), b.clone()], 1.0).unwrap().is_empty());
        assert_eq!(conflict_probability(&a, &b, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn identical_single_segment_paths() {
        let a = path(&[[0., 0., 0.], [1., 0., 0.]]);
        let set = detect_conflicts(&[a.clone(), a], 0.5).unwrap();
        assert_eq!(set.pairs, vec![ConflictPair { task_a: 0, task_b: 1, seg_a: 0, seg_b: 0, min_dist: 0.0 }]);
    }

    #[test]
    fn crossing_segments_conflict_at_zero() {
        let a = path(&[[-1., 0., 0.], [1., 0., 0.]]);
        let b = path(&[[0., -1., 0.], [0., 1., 0.]]);
        let set = detect_conflicts(&[a, b], 1.0).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.pairs[0].min_dist, 0.0);
    }

    #[test]
    fn conflict_inclusive_at_radius() {
        let a = path(&[[0., 0., 0.], [1., 0., 0.]]);
        let b = path(&[[0., 1., 0.], [1., 1., 0.]]);
        assert_eq!(detect_conflicts(&[a, b], 1.0).unwrap().len(), 1);
    }

    #[test]
    fn coincident_paths_probability_one() {
        let a = path(&[[0., 0., 0.], [0.1, 0., 0.], [0.2, 0., 0.]]);
        assert_eq!(conflict_probability(&a, &a.clone(), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn l_shape_against_straight_path() {
        // L: (0,0)->(2,0)->(2,2); straight: (0,1.5)->(4,1.5), split at x=1 and x=3.
        let l = path(&[[0., 0., 0.], [2., 0., 0.], [2., 2., 0.]]);
        let s = path(&[[0., 1.5, 0.], [1., 1.5, 0.], [3., 1.5, 0.], [4., 1.5, 0.]]);
        // Independent double loop over pairs, using the point-sampled distance.
        let mut count = 0;
        for a in l.segments() {
            for b in s.segments() {
                let mut best = f64::INFINITY;
                for i in 0..=400 {
                    for j in 0..=400 {
                        best = best.min(a.point_at(i as f64 / 400.0).distance(b.point_at(j as f64 / 400.0)));
                    }
                }
                if best <= 1.0 + 1e-9 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 3);
        let p = conflict_probability(&l, &s, 1.0).unwrap();
        assert_eq!(p, count as f64 / 6.0);
    }

    #[test]
    fn arrival_offsets_single_segment() {
        let p = path(&[[0., 0., 0.], [1., 0., 0.]]);
        assert_eq!(arrival_offsets(&p, 0.1).unwrap(), vec![10.0]);
    }

    #[test]
    fn arrival_offsets_two_halves() {
        let p = path(&[[0., 0., 0.], [0.5, 0., 0.], [1., 0., 0.]]);
        assert_eq!(arrival_offsets(&p, 0.1).unwrap(), vec![5.0, 10.0]);
    }

    #[test]
    fn arrival_offsets_repeat_on_duplicate_waypoint() {
        let p = path(&[[0., 0., 0.], [0.5, 0., 0.], [0.5, 0., 0.], [1., 0., 0.]]);
        assert_eq!(arrival_offsets(&p, 0.1).unwrap(), vec![5.0, 5.0, 10.0]);
        assert!(arrival_offsets(&p, 0.0).is_err());
        assert!(arrival_offsets(&p, -1.0).is_err());
    }

    #[test]
    fn point_at_length_walks_the_path() {
        let p = path(&[[0., 0., 0.], [1., 0., 0.], [1., 1., 0.]]);
        assert_eq!(p.point_at_length(0.5), Point3::new(0.5, 0., 0.));
        assert_eq!(p.point_at_length(1.5), Point3::new(1., 0.5, 0.));
        assert_eq!(p.point_at_length(5.0), Point3::new(1., 1., 0.));
        assert_eq!(p.entry_length(1), 1.0);
    }

    #[test]
    fn between_returns_task_pair_slice() {
        let a = path(&[[0., 0., 0.], [1., 0., 0.], [2., 0., 0.]]);
        let b = path(&[[0., 0.5, 0.], [2., 0.5, 0.]]);
        let c = path(&[[0., 9., 0.], [2., 9., 0.]]);
        let set = detect_conflicts(&[a, b, c], 1.0).unwrap();
        assert_eq!(set.between(1, 0).len(), 2);
        assert!(set.between(0, 2).is_empty());
        assert_eq!(set.task_pairs(), vec![(0, 1)]);
    }
}
