//! Convex bodies, lines in `(theta, offset)` coordinates, chords and slices.
//!
//! Conventions
//! - A line is `{x : x·(cos θ, sin θ) = p}` with `θ ∈ [0, π)`. The chord of a
//!   line runs along `t = (-sin θ, cos θ)`, from the lower to the upper
//!   parameter value.
//! - Bodies are closed. A supporting line that lies along a polygon edge meets
//!   the body in that edge, which is returned as a chord. A line touching the
//!   body in a single point (or in a piece shorter than
//!   `CHORD_CUTOFF * diameter`) has no chord.
//! - All arithmetic is `f64` with the absolute tolerances listed below.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Chords shorter than this fraction of the diameter are treated as absent.
pub const CHORD_CUTOFF: f64 = 1e-12;

/// Relative threshold below which an edge and a line count as parallel.
const PARALLEL_EPS: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("non-finite coordinate in body description")]
    NonFinite,
    #[error("vertices {0}, {1}, {2} do not make a strict counterclockwise turn")]
    NotStrictlyConvex(usize, usize, usize),
    #[error("vertex chain winds around more than once")]
    SelfIntersecting,
    #[error("disk radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("cannot read body file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed body file: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `angle` from the positive x-axis.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Counterclockwise rotation by π/2.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

/// Unoriented line `{x : x·(cos θ, sin θ) = offset}` with `θ ∈ [0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    theta: f64,
    offset: f64,
}

impl Line {
    /// Normalizes `(θ, p)` so that `θ ∈ [0, π)`; `(θ + π, -p)` names the same line.
    pub fn new(theta: f64, offset: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut offset = offset;
        if theta >= PI {
            theta -= PI;
            offset = -offset;
        }
        if theta >= PI {
            theta = 0.0;
            offset = -offset;
        }
        Self { theta, offset }
    }

    /// Line with unit normal `normal` at signed distance `offset` from the origin.
    pub fn from_normal(normal: Vec2, offset: f64) -> Self {
        Self::new(normal.y.atan2(normal.x), offset)
    }

    /// Line through two distinct points.
    pub fn through(p: Vec2, q: Vec2) -> Option<Self> {
        let d = q - p;
        let len = d.norm();
        if !len.is_finite() || len <= 0.0 {
            return None;
        }
        let normal = d.perp() * (1.0 / len);
        Some(Self::from_normal(normal, normal.dot(p)))
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn normal(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    /// Unit direction along the line.
    #[inline]
    pub fn direction(&self) -> Vec2 {
        self.normal().perp()
    }

    /// Same direction, offset moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            theta: self.theta,
            offset: self.offset + delta,
        }
    }

    /// Signed distance of `p` from the line, positive on the normal side.
    #[inline]
    pub fn side(&self, p: Vec2) -> f64 {
        self.normal().dot(p) - self.offset
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Line(theta={:?}, offset={:?})", self.theta, self.offset)
    }
}

/// Closed segment `[x, y]` of a line inside a body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chord {
    pub x: Vec2,
    pub y: Vec2,
    pub length: f64,
    pub direction: Vec2,
}

impl Chord {
    pub fn new(x: Vec2, y: Vec2) -> Self {
        let d = y - x;
        let length = d.norm();
        let direction = if length > 0.0 {
            d * (1.0 / length)
        } else {
            Vec2::new(1.0, 0.0)
        };
        Self {
            x,
            y,
            length,
            direction,
        }
    }
}

/// Projection of a chord onto `nu`: `(min, max)` of the endpoint projections.
#[inline]
pub fn project_interval(chord: &Chord, nu: Vec2) -> (f64, f64) {
    let px = chord.x.dot(nu);
    let py = chord.y.dot(nu);
    if px <= py {
        (px, py)
    } else {
        (py, px)
    }
}

/// Plain line segment, used for padding and grid enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Strictly convex counterclockwise vertex chain.
    Polygon(Vec<Vec2>),
    Disk {
        center: Vec2,
        radius: f64,
    },
}

/// Compact convex body with cached area, diameter and bounding box.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexBody {
    shape: Shape,
    area: f64,
    diameter: f64,
    bbox: (Vec2, Vec2),
}

impl ConvexBody {
    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        let m = vertices.len();
        if m < 3 {
            return Err(GeometryError::TooFewVertices(m));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut turning = 0.0;
        for i in 0..m {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % m], vertices[(i + 2) % m]);
            let (e1, e2) = (b - a, c - b);
            let cr = e1.cross(e2);
            if cr.is_nan() || cr <= 0.0 {
                return Err(GeometryError::NotStrictlyConvex(
                    i,
                    (i + 1) % m,
                    (i + 2) % m,
                ));
            }
            turning += cr.atan2(e1.dot(e2));
        }
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(GeometryError::SelfIntersecting);
        }

        let area = 0.5
            * (0..m)
                .map(|i| vertices[i].cross(vertices[(i + 1) % m]))
                .sum::<f64>();
        let mut diameter: f64 = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                diameter = diameter.max((vertices[i] - vertices[j]).norm());
            }
        }
        let mut lo = vertices[0];
        let mut hi = vertices[0];
        for v in &vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        Ok(Self {
            shape: Shape::Polygon(vertices),
            area,
            diameter,
            bbox: (lo, hi),
        })
    }

    pub fn disk(center: Vec2, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if radius.is_nan() || radius <= 0.0 {
            return Err(GeometryError::NonPositiveRadius(radius));
        }
        let r = Vec2::new(radius, radius);
        Ok(Self {
            shape: Shape::Disk { center, radius },
            area: PI * radius * radius,
            diameter: 2.0 * radius,
            bbox: (center - r, center + r),
        })
    }

    /// `[0, 1]²`.
    pub fn unit_square() -> Self {
        Self::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .expect("unit square is convex")
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        self.bbox
    }

    /// Polygon vertices; empty for a disk.
    pub fn vertices(&self) -> &[Vec2] {
        match &self.shape {
            Shape::Polygon(v) => v,
            Shape::Disk { .. } => &[],
        }
    }

    /// `(min, max)` of `x·nu` over the body.
    pub fn support(&self, nu: Vec2) -> (f64, f64) {
        match &self.shape {
            Shape::Polygon(vs) => {
                vs.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        let s = v.dot(nu);
                        (lo.min(s), hi.max(s))
                    })
            }
            Shape::Disk { center, radius } => {
                let c = center.dot(nu);
                let r = radius * nu.norm();
                (c - r, c + r)
            }
        }
    }

    /// Signed distance to the boundary: negative inside. Exact for disks and
    /// for points inside or near the boundary of polygons.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match &self.shape {
            Shape::Polygon(vs) => {
                let m = vs.len();
                (0..m)
                    .map(|i| {
                        let e = vs[(i + 1) % m] - vs[i];
                        -e.cross(p - vs[i]) / e.norm()
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Shape::Disk { center, radius } => (p - *center).norm() - radius,
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.signed_distance(p) <= 1e-12 * self.diameter
    }

    pub fn chord(&self, line: &Line) -> Option<Chord> {
        self.chord_at(line.normal(), line.offset())
    }

    /// Chord of the line `{x : x·normal = offset}` for a unit `normal`.
    pub fn chord_at(&self, normal: Vec2, offset: f64) -> Option<Chord> {
        let t = normal.perp();
        let base = normal * offset;
        let cutoff = CHORD_CUTOFF * self.diameter;
        let (s_lo, s_hi) = match &self.shape {
            Shape::Polygon(vs) => {
                let m = vs.len();
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for i in 0..m {
                    let e = vs[(i + 1) % m] - vs[i];
                    let elen = e.norm();
                    // interior is on the left: cross(e, x - v_i) >= 0
                    let c0 = e.cross(base - vs[i]);
                    let c1 = e.cross(t);
                    if c1.abs() <= PARALLEL_EPS * elen {
                        if c0 < -cutoff * elen {
                            return None;
                        }
                        continue;
                    }
                    let s = -c0 / c1;
                    if c1 > 0.0 {
                        lo = lo.max(s);
                    } else {
                        hi = hi.min(s);
                    }
                }
                (lo, hi)
            }
            Shape::Disk { center, radius } => {
                let d = offset - center.dot(normal);
                let h2 = radius * radius - d * d;
                if h2 <= 0.0 {
                    return None;
                }
                let half = h2.sqrt();
                let sc = center.dot(t);
                (sc - half, sc + half)
            }
        };
        if (s_hi - s_lo).is_nan() || s_hi - s_lo < cutoff {
            return None;
        }
        Some(Chord::new(base + t * s_lo, base + t * s_hi))
    }

    /// Length of `{x in body : x·nu = s}` for a unit `nu`.
    pub fn slice_length(&self, nu: Vec2, s: f64) -> f64 {
        self.chord_at(nu, s).map_or(0.0, |c| c.length)
    }

    /// Largest inscribed disk `(center, radius)`. For polygons this is the
    /// Chebyshev center, found by enumerating triples of edge constraints.
    pub fn inscribed_disk(&self) -> (Vec2, f64) {
        match &self.shape {
            Shape::Disk { center, radius } => (*center, *radius),
            Shape::Polygon(vs) => chebyshev_center(vs),
        }
    }

    pub fn spec(&self) -> BodySpec {
        match &self.shape {
            Shape::Polygon(vs) => BodySpec::Polygon(vs.iter().map(|&v| v.into()).collect()),
            Shape::Disk { center, radius } => BodySpec::Disk(DiskSpec {
                center: (*center).into(),
                radius: *radius,
            }),
        }
    }
}

fn chebyshev_center(vs: &[Vec2]) -> (Vec2, f64) {
    let m = vs.len();
    // half-planes n_i·x <= c_i with unit outward normals
    let planes: Vec<(Vec2, f64)> = (0..m)
        .map(|i| {
            let e = vs[(i + 1) % m] - vs[i];
            let n = Vec2::new(e.y, -e.x) * (1.0 / e.norm());
            (n, n.dot(vs[i]))
        })
        .collect();
    let mut best = (vs[0], 0.0);
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let rows = [planes[i], planes[j], planes[k]];
                // n·c + r = c_i for the three active constraints
                let Some((c, r)) = solve3(rows) else { continue };
                if r <= best.1 {
                    continue;
                }
                let slack = 1e-12 * (1.0 + r);
                if planes.iter().all(|(n, ci)| n.dot(c) + r <= ci + slack) {
                    best = (c, r);
                }
            }
        }
    }
    best
}

fn solve3(rows: [(Vec2, f64); 3]) -> Option<(Vec2, f64)> {
    let a = [
        [rows[0].0.x, rows[0].0.y, 1.0],
        [rows[1].0.x, rows[1].0.y, 1.0],
        [rows[2].0.x, rows[2].0.y, 1.0],
    ];
    let b = [rows[0].1, rows[1].1, rows[2].1];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-14 {
        return None;
    }
    let mut sol = [0.0; 3];
    for (col, out) in sol.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *out = det(m) / d;
    }
    Some((Vec2::new(sol[0], sol[1]), sol[2]))
}

/// On-disk body description: `{"polygon": [[x, y], ...]}` or
/// `{"disk": {"center": [x, y], "radius": r}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Polygon(Vec<[f64; 2]>),
    Disk(DiskSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody, GeometryError> {
        match self {
            BodySpec::Polygon(vs) => ConvexBody::polygon(vs.iter().map(|&v| v.into()).collect()),
            BodySpec::Disk(d) => ConvexBody::disk(d.center.into(), d.radius),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn square_vertical_chord() {
        let sq = ConvexBody::unit_square();
        let c = sq.chord(&Line::new(0.0, 0.5)).unwrap();
        assert!((c.length - 1.0).abs() < 1e-15);
        let (lo, hi) = if c.x.y < c.y.y {
            (c.x, c.y)
        } else {
            (c.y, c.x)
        };
        assert!(close(lo, Vec2::new(0.5, 0.0), 1e-15));
        assert!(close(hi, Vec2::new(0.5, 1.0), 1e-15));
    }

    #[test]
    fn disk_diameter_chord() {
        let d = ConvexBody::disk(Vec2::new(0.0, 0.0), 2.0).unwrap();
        let c = d.chord(&Line::new(PI / 2.0, 0.0)).unwrap();
        assert!((c.length - 4.0).abs() < 1e-14);
    }

    #[test]
    fn missing_and_tangent_lines_have_no_chord() {
        let d = ConvexBody::disk(Vec2::new(0.0, 0.0), 1.0).unwrap();
        assert!(d.chord(&Line::new(0.3, 1.0)).is_none());
        assert!(d.chord(&Line::new(0.3, 1.5)).is_none());
        let sq = ConvexBody::unit_square();
        // supporting line through a single vertex
        let diag = Vec2::new(1.0, 1.0) * (1.0 / 2f64.sqrt());
        assert!(sq.chord_at(diag, 2f64.sqrt()).is_none());
        assert!(sq.chord(&Line::new(0.0, 1.5)).is_none());
    }

    #[test]
    fn supporting_line_along_edge_returns_the_edge() {
        let sq = ConvexBody::unit_square();
        let c = sq.chord(&Line::new(0.0, 0.0)).unwrap();
        assert!((c.length - 1.0).abs() < 1e-15);
        // normal tilted by one ulp-scale angle, as produced by cos(π/2)
        let nu = Vec2::from_angle(PI / 2.0);
        assert!((sq.slice_length(nu, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_normalization() {
        let a = Line::new(PI + 0.25, 0.5);
        assert_eq!(a, Line::new(0.25, -0.5));
        let b = Line::new(-0.25, 1.0);
        assert!((b.theta() - (PI - 0.25)).abs() < 1e-15);
        assert_eq!(b.offset(), -1.0);
        let c = Line::new(PI, 2.0);
        assert_eq!(c.theta(), 0.0);
        assert_eq!(c.offset(), -2.0);
        for theta in [0.0, 1.0, 3.0, PI - 1e-12, 7.0, -4.0] {
            let l = Line::new(theta, 0.1);
            assert!(l.theta() >= 0.0 && l.theta() < PI);
        }
    }

    #[test]
    fn line_through_points() {
        let l = Line::through(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        assert!(l.side(Vec2::new(2.0, 2.0)).abs() < 1e-15);
        assert!(Line::through(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)).is_none());
    }

    #[test]
    fn projection_examples() {
        let c = Chord::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0));
        assert_eq!(project_interval(&c, Vec2::new(1.0, 0.0)), (0.0, 1.0));
        assert_eq!(project_interval(&c, Vec2::new(0.0, 1.0)), (0.0, 0.0));
        let swapped = Chord::new(c.y, c.x);
        assert_eq!(project_interval(&swapped, Vec2::new(1.0, 0.0)), (0.0, 1.0));
    }

    #[test]
    fn slice_examples() {
        let sq = ConvexBody::unit_square();
        assert!((sq.slice_length(Vec2::new(1.0, 0.0), 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(sq.slice_length(Vec2::new(1.0, 0.0), 1.5), 0.0);
        let d = ConvexBody::disk(Vec2::new(3.0, -1.0), 0.75).unwrap();
        let nu = Vec2::from_angle(1.1);
        let s = Vec2::new(3.0, -1.0).dot(nu);
        assert!((d.slice_length(nu, s) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn cached_measures() {
        let sq = ConvexBody::unit_square();
        assert_eq!(sq.area(), 1.0);
        assert!((sq.diameter() - 2f64.sqrt()).abs() < 1e-15);
        let d = ConvexBody::disk(Vec2::new(0.0, 0.0), 2.0).unwrap();
        assert!((d.area() - 4.0 * PI).abs() < 1e-14);
        assert_eq!(d.diameter(), 4.0);
        assert_eq!(sq.support(Vec2::new(1.0, 0.0)), (0.0, 1.0));
    }

    #[test]
    fn rejects_bad_polygons() {
        let cw = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ];
        assert!(matches!(
            ConvexBody::polygon(cw),
            Err(GeometryError::NotStrictlyConvex(..))
        ));
        let collinear = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(ConvexBody::polygon(collinear).is_err());
        assert!(matches!(
            ConvexBody::polygon(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]),
            Err(GeometryError::TooFewVertices(2))
        ));
        // pentagram: every turn is left but the chain winds twice
        let star: Vec<Vec2> = (0..5)
            .map(|i| Vec2::from_angle(4.0 * PI * i as f64 / 5.0))
            .collect();
        assert!(matches!(
            ConvexBody::polygon(star),
            Err(GeometryError::SelfIntersecting)
        ));
        assert!(ConvexBody::disk(Vec2::new(0.0, 0.0), 0.0).is_err());
        assert!(ConvexBody::disk(Vec2::new(f64::NAN, 0.0), 1.0).is_err());
    }

    #[test]
    fn inscribed_disks() {
        let (c, r) = ConvexBody::unit_square().inscribed_disk();
        assert!(close(c, Vec2::new(0.5, 0.5), 1e-12));
        assert!((r - 0.5).abs() < 1e-12);
        let tri = ConvexBody::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(0.0, 4.0),
        ])
        .unwrap();
        // 3-4-5 triangle: inradius = area / semiperimeter = 6 / 6
        let (c, r) = tri.inscribed_disk();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(close(c, Vec2::new(1.0, 1.0), 1e-12));
    }

    #[test]
    fn body_file_json() {
        let sq = BodySpec::from_json(r#"{"polygon": [[0,0],[1,0],[1,1],[0,1]]}"#).unwrap();
        assert_eq!(sq.build().unwrap(), ConvexBody::unit_square());
        let d = BodySpec::from_json(r#"{"disk": {"center": [1, 2], "radius": 0.5}}"#).unwrap();
        assert_eq!(d.build().unwrap().diameter(), 1.0);
        assert!(
            BodySpec::from_json(r#"{"disk": {"center": [1, 2], "radius": 0.5, "r": 1}}"#).is_err()
        );
        assert!(BodySpec::from_json(r#"{"ellipse": {}}"#).is_err());
        let back: BodySpec = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
