mod common;

use std::f64::consts::PI;

use buffon::counting::{count_in_interval, count_line, regularize};
use buffon::geometry::{project_interval, Chord, ConvexBody, Line, Vec2};
use buffon::rng;
use buffon::steinhaus::SteinhausSet;
use proptest::prelude::*;

use common::*;

fn body_strategy() -> impl Strategy<Value = ConvexBody> {
    (any::<u64>(), 3usize..12, any::<bool>()).prop_map(|(seed, m, disk)| {
        let mut r = rng::stream(seed, "prop-body", 0);
        if disk {
            let c = Vec2::new(
                rng::uniform(&mut r, -1.0, 1.0),
                rng::uniform(&mut r, -1.0, 1.0),
            );
            ConvexBody::disk(c, rng::uniform(&mut r, 0.1, 2.0)).unwrap()
        } else {
            random_polygon(&mut r, m)
        }
    })
}

fn brute_count(a: f64, b: f64, eps: f64, u: f64) -> i64 {
    let lo = (a / eps).floor() as i64 - 2;
    let hi = (b / eps).ceil() as i64 + 2;
    (lo..=hi)
        .filter(|&q| {
            let v = eps * (q as f64 + u);
            a <= v && v < b
        })
        .count() as i64
}

/// Keeps lattice values away from the interval ends so that the brute scan
/// and the closed formula see the same side of every tie.
fn well_separated(a: f64, b: f64, eps: f64, u: f64) -> bool {
    let off = |x: f64| {
        let f = (x / eps - u).rem_euclid(1.0);
        f.min(1.0 - f)
    };
    off(a) > 1e-9 && off(b) > 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn slices_are_concave(body in body_strategy(), theta in 0.0..PI, s1 in 0.0..1.0f64, s2 in 0.0..1.0f64, lambda in 0.0..1.0f64) {
        let nu = Vec2::from_angle(theta);
        let (lo, hi) = body.support(nu);
        let (s1, s2) = (lo + (hi - lo) * s1, lo + (hi - lo) * s2);
        let g = |s| body.slice_length(nu, s);
        let mid = g(lambda * s1 + (1.0 - lambda) * s2);
        prop_assert!(mid >= lambda * g(s1) + (1.0 - lambda) * g(s2) - 1e-9 * body.diameter());
    }

    #[test]
    fn slices_vanish_outside_support(body in body_strategy(), theta in 0.0..PI, t in 1e-6..1.0f64) {
        let nu = Vec2::from_angle(theta);
        let (lo, hi) = body.support(nu);
        prop_assert_eq!(body.slice_length(nu, hi + t), 0.0);
        prop_assert_eq!(body.slice_length(nu, lo - t), 0.0);
    }

    #[test]
    fn slice_matches_chord(body in body_strategy(), theta in 0.0..PI, s in 0.0..1.0f64) {
        let nu = Vec2::from_angle(theta);
        let (lo, hi) = body.support(nu);
        let p = lo + (hi - lo) * s;
        let h = body.chord(&Line::new(theta, p)).map_or(0.0, |c| c.length);
        prop_assert!((body.slice_length(nu, p) - h).abs() <= 1e-12 * body.diameter());
    }

    #[test]
    fn projections_are_consistent(x in prop::array::uniform2(-3.0..3.0f64), y in prop::array::uniform2(-3.0..3.0f64), phi in 0.0..(2.0 * PI)) {
        let (x, y) = (Vec2::from(x), Vec2::from(y));
        prop_assume!((y - x).norm() > 1e-6);
        let c = Chord::new(x, y);
        let nu = Vec2::from_angle(phi);
        let (a, b) = project_interval(&c, nu);
        prop_assert!(a <= b);
        let expected = c.length * c.direction.dot(nu).abs();
        prop_assert!((b - a - expected).abs() <= 1e-12 * c.length.max(1.0));
    }

    #[test]
    fn chord_endpoints_are_on_the_boundary(body in body_strategy(), theta in 0.0..PI, s in 0.0..1.0f64) {
        let (lo, hi) = body.support(Vec2::from_angle(theta));
        let line = Line::new(theta, lo + (hi - lo) * s);
        if let Some(c) = body.chord(&line) {
            for p in [c.x, c.y] {
                prop_assert!(body.signed_distance(p).abs() <= 1e-9 * body.diameter());
                prop_assert!(line.side(p).abs() <= 1e-9 * body.diameter());
            }
            prop_assert!((c.length - (c.y - c.x).norm()).abs() <= 1e-15 * c.length.max(1.0));
        } else {
            prop_assert!(body.slice_length(line.normal(), line.offset()) <= 1e-12 * body.diameter());
        }
    }

    #[test]
    fn interval_count_matches_scan(a in -50.0..50.0f64, w in 0.0..20.0f64, eps in 0.01..3.0f64, u in 0.0..1.0f64) {
        let b = a + w;
        prop_assume!(well_separated(a, b, eps, u));
        let c = count_in_interval(a, b, eps, u);
        prop_assert_eq!(c, brute_count(a, b, eps, u));
        let f = (w / eps).floor() as i64;
        prop_assert!(c == f || c == f + 1);
    }

    #[test]
    fn interval_count_is_monotone(a in -50.0..50.0f64, w in 0.0..20.0f64, da in 0.0..5.0f64, db in 0.0..5.0f64, eps in 0.01..3.0f64, u in 0.0..1.0f64) {
        let inner = count_in_interval(a, a + w, eps, u);
        prop_assert!(count_in_interval(a - da, a + w + db, eps, u) >= inner);
    }

    #[test]
    fn integer_phase_shifts_change_nothing(a in -50.0..50.0f64, w in 0.0..20.0f64, eps in 0.01..3.0f64, u in 0.0..1.0f64, m in -5i64..5) {
        let c = count_in_interval(a, a + w, eps, u);
        let t = m as f64 * eps;
        prop_assume!(well_separated(a + t, a + w + t, eps, u));
        prop_assume!(well_separated(a, a + w, eps, u));
        prop_assert_eq!(count_in_interval(a + t, a + w + t, eps, u), c);
    }

    #[test]
    fn per_family_error_is_at_most_one(body in body_strategy(), n in 1usize..40, eps in 0.005..0.3f64, seed in any::<u64>(), theta in 0.0..PI, s in 0.0..1.0f64) {
        let set = SteinhausSet::shifted(body.clone(), n, eps, seed).unwrap();
        let (lo, hi) = body.support(Vec2::from_angle(theta));
        if let Some((line, _)) = regularize(&set, Line::new(theta, lo + (hi - lo) * s)) {
            let b = count_line(&set, &line);
            if let Some(ch) = body.chord(&line) {
                for (k, &nk) in b.per_family.iter().enumerate() {
                    let (a, bk) = project_interval(&ch, set.normals()[k]);
                    prop_assert!((nk as f64 - (bk - a) / eps).abs() <= 1.0 + 1e-9);
                }
            }
            prop_assert!(b.z.abs() <= n as f64);
            prop_assert_eq!(b.total, b.per_family.iter().sum::<i64>());
        }
    }

    #[test]
    fn swapping_chord_ends_changes_nothing(n in 1usize..30, eps in 0.01..0.3f64, seed in any::<u64>(), x in prop::array::uniform2(0.0..1.0f64), y in prop::array::uniform2(0.0..1.0f64)) {
        let set = SteinhausSet::shifted(ConvexBody::unit_square(), n, eps, seed).unwrap();
        let (x, y) = (Vec2::from(x), Vec2::from(y));
        let z1 = buffon::endpoint_error(&set, x, y);
        let z2 = buffon::endpoint_error(&set, y, x);
        prop_assert_eq!(z1, z2);
        prop_assert_eq!(buffon::endpoint_error(&set, x, x), 0.0);
    }

    #[test]
    fn phases_wrapped_by_integers_give_the_same_set(n in 1usize..20, eps in 0.01..0.3f64, seed in any::<u64>(), theta in 0.0..PI, s in 0.01..0.99f64) {
        let sq = ConvexBody::unit_square();
        let set = SteinhausSet::shifted(sq.clone(), n, eps, seed).unwrap();
        let line = Line::new(theta, sq.support(Vec2::from_angle(theta)).0 + s);
        if let Some((line, c)) = regularize(&set, line) {
            // Lattice values are eps·(q + u) over all q, so u and (u + m) mod 1 agree.
            let wrapped: Vec<f64> = set.shifts().iter().map(|u| (u + 3.0).rem_euclid(1.0)).collect();
            let twin = SteinhausSet::new(sq.clone(), n, eps, wrapped).unwrap();
            let d = count_line(&twin, &line);
            prop_assert_eq!(d.total, c.total);
        }
    }
}
