#![allow(dead_code)]

use std::f64::consts::PI;

use buffon::geometry::{ConvexBody, Line, Vec2};
use buffon::rng;
use buffon::steinhaus::SteinhausSet;
use rand_chacha::ChaCha8Rng;

/// Convex polygon with `m` vertices on a random ellipse, counterclockwise.
pub fn random_polygon(r: &mut ChaCha8Rng, m: usize) -> ConvexBody {
    let a = rng::uniform(r, 0.4, 1.2);
    let b = rng::uniform(r, 0.4, 1.2);
    let tilt = rng::uniform(r, 0.0, PI);
    let c = Vec2::new(rng::uniform(r, -0.5, 0.5), rng::uniform(r, -0.5, 0.5));
    let mut angles: Vec<f64> = (0..m).map(|_| rng::uniform(r, 0.0, 2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
    let (st, ct) = tilt.sin_cos();
    let pts = angles
        .iter()
        .map(|t| {
            let (x, y) = (a * t.cos(), b * t.sin());
            c + Vec2::new(ct * x - st * y, st * x + ct * y)
        })
        .collect();
    ConvexBody::polygon(pts).expect("points on an ellipse are strictly convex")
}

/// Five random polygons and a disk.
pub fn test_bodies(seed: u64) -> Vec<ConvexBody> {
    let mut r = rng::stream(seed, "test-bodies", 0);
    let mut bodies: Vec<ConvexBody> = [3, 4, 6, 9, 17]
        .iter()
        .map(|&m| random_polygon(&mut r, m))
        .collect();
    bodies.push(ConvexBody::disk(Vec2::new(0.3, -0.2), 0.8).unwrap());
    bodies
}

pub fn random_line(body: &ConvexBody, r: &mut ChaCha8Rng) -> Line {
    buffon::harness::random_line(body, r)
}

/// Intersection of `line` with each polygon edge, extreme hits along the
/// line direction. `None` when fewer than two distinct hits.
pub fn chord_by_edges(vertices: &[Vec2], line: &Line) -> Option<(Vec2, Vec2)> {
    let nu = line.normal();
    let t = line.direction();
    let mut hits = Vec::new();
    for i in 0..vertices.len() {
        let (p, q) = (vertices[i], vertices[(i + 1) % vertices.len()]);
        let (sp, sq) = (nu.dot(p) - line.offset(), nu.dot(q) - line.offset());
        if sp == sq {
            continue;
        }
        let s = sp / (sp - sq);
        if (0.0..=1.0).contains(&s) {
            hits.push(p + (q - p) * s);
        }
    }
    let lo = hits
        .iter()
        .copied()
        .min_by(|a, b| t.dot(*a).total_cmp(&t.dot(*b)))?;
    let hi = hits
        .iter()
        .copied()
        .max_by(|a, b| t.dot(*a).total_cmp(&t.dot(*b)))?;
    ((hi - lo).norm() > 0.0).then_some((lo, hi))
}

/// Chord of a disk by the quadratic formula.
pub fn chord_of_disk(center: Vec2, radius: f64, line: &Line) -> Option<(Vec2, Vec2)> {
    let d = line.normal().dot(center) - line.offset();
    if d.abs() >= radius {
        return None;
    }
    let half = (radius * radius - d * d).sqrt();
    let foot = center - line.normal() * d;
    Some((
        foot - line.direction() * half,
        foot + line.direction() * half,
    ))
}

/// Independent total length: every lattice line of every family clipped
/// against the body, lattice range taken from the bounding box, summed with
/// the padding lengths.
pub fn total_length_by_clipping(set: &SteinhausSet) -> f64 {
    let body = set.body();
    let (lo, hi) = body.bounding_box();
    let reach = (hi - lo).norm() + lo.norm().max(hi.norm());
    let mut total = 0.0;
    for k in 0..set.n() {
        let theta = PI * k as f64 / set.n() as f64;
        let u = set.shifts()[k];
        let q_lo = (-reach / set.eps()).floor() as i64 - 2;
        let q_hi = (reach / set.eps()).ceil() as i64 + 2;
        for q in q_lo..=q_hi {
            let line = Line::new(theta, set.eps() * (q as f64 + u));
            total += clipped_length(body, &line);
        }
    }
    total
        + set
            .padding()
            .iter()
            .map(|s| (s.b - s.a).norm())
            .sum::<f64>()
}

fn clipped_length(body: &ConvexBody, line: &Line) -> f64 {
    match body.shape() {
        buffon::geometry::Shape::Disk { center, radius } => {
            chord_of_disk(*center, *radius, line).map_or(0.0, |(a, b)| (b - a).norm())
        }
        _ => chord_by_edges(body.vertices(), line).map_or(0.0, |(a, b)| (b - a).norm()),
    }
}
