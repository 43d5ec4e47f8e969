//! Crossing counts of a line against a Steinhaus set.
//!
//! The fast path works family by family in lattice coordinates: the chord
//! `[x, y]` projects onto `[a_k, b_k]` in family `k` and the number of grid
//! lines it meets is `#{q : a_k ≤ eps(q + U_k) < b_k}`. [`GridOracle`]
//! enumerates the clipped grid segments instead and tests each one with sign
//! predicates, which gives an independent answer for cross-checking.
//!
//! Lines that pass within [`EXCEPTIONAL_TOL`] of an endpoint of a grid or
//! padding segment (this includes lines lying on a grid line) form a
//! null set of the line measure and are reported as exceptional; samplers
//! move them with [`jitter_sequence`].

use thiserror::Error;

use crate::geometry::{Chord, Line, Segment, Vec2};
use crate::steinhaus::SteinhausSet;
use crate::sum::Compensated;

/// Absolute distance (length units) under which a line counts as touching
/// a segment endpoint.
pub const EXCEPTIONAL_TOL: f64 = 1e-9;

/// Jitter attempts made by [`jitter_sequence`] after the original line.
pub const JITTER_ATTEMPTS: usize = 10;

/// `#{q ∈ ℤ : a ≤ eps(q + u) < b}`.
#[inline]
pub fn count_in_interval(a: f64, b: f64, eps: f64, u: f64) -> i64 {
    ((b / eps - u).ceil() - (a / eps - u).ceil()) as i64
}

/// Why a line was set aside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exceptional {
    /// A chord endpoint sits on a grid line of this family.
    GridEndpoint { family: usize },
    /// The line passes through an endpoint of this padding segment.
    PaddingEndpoint { segment: usize },
}

/// Totals for one line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineCount {
    pub chord: Option<Chord>,
    /// Grid crossings `Σ_k N_k`.
    pub total: i64,
    /// `Σ_k (b_k - a_k)/eps`.
    pub mean_term: f64,
    /// Endpoint error `Σ_k (N_k - (b_k - a_k)/eps)`.
    pub z: f64,
    pub padding_hits: i64,
    pub exceptional: Option<Exceptional>,
}

impl LineCount {
    fn empty() -> Self {
        Self {
            chord: None,
            total: 0,
            mean_term: 0.0,
            z: 0.0,
            padding_hits: 0,
            exceptional: None,
        }
    }

    pub fn is_exceptional(&self) -> bool {
        self.exceptional.is_some()
    }
}

/// [`LineCount`] together with the per-family counts `N_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountBreakdown {
    pub per_family: Vec<i64>,
    pub total: i64,
    pub mean_term: f64,
    pub z: f64,
    pub padding_hits: i64,
    pub chord: Option<Chord>,
    pub exceptional: Option<Exceptional>,
}

impl CountBreakdown {
    pub fn is_exceptional(&self) -> bool {
        self.exceptional.is_some()
    }
}

/// Distance from `r` to the nearest integer, and that integer.
#[inline]
fn nearest(r: f64) -> (f64, f64) {
    let q = r.round();
    ((r - q).abs(), q)
}

/// Walks the families for the chord `[x, y]`, calling `each(k, N_k, d_k/eps)`.
/// With `check` set, endpoint coincidences are detected and resolved against
/// the closed-body geometry; without it the plain half-open formula is used.
fn scan<F: FnMut(usize, i64, f64)>(
    set: &SteinhausSet,
    x: Vec2,
    y: Vec2,
    check: bool,
    mut each: F,
) -> (i64, f64, f64, Option<Exceptional>) {
    let eps = set.eps();
    let inv = 1.0 / eps;
    let tol_r = EXCEPTIONAL_TOL * inv;
    let mut total = 0i64;
    let mut mean = Compensated::default();
    let mut z = Compensated::default();
    let mut exceptional = None;
    for (k, (&nu, &u)) in set.normals().iter().zip(set.shifts()).enumerate() {
        let px = x.dot(nu);
        let py = y.dot(nu);
        let (a, b, low_end) = if px <= py { (px, py, x) } else { (py, px, y) };
        let ra = a * inv - u;
        let rb = b * inv - u;
        let cb = rb.ceil();
        let mut nk = (cb - ra.ceil()) as i64;
        if check {
            let (da, qa) = nearest(ra);
            let (db, _) = nearest(rb);
            if db <= tol_r {
                exceptional.get_or_insert(Exceptional::GridEndpoint { family: k });
            } else if da <= tol_r {
                // The low endpoint is on a grid line. That is a regular crossing
                // only when the grid line runs along a boundary edge and the
                // endpoint is inside that edge; count it, as [a, b) prescribes.
                match boundary_edge(set, k, qa as i64, low_end) {
                    true => nk = (cb - qa) as i64,
                    false => {
                        exceptional.get_or_insert(Exceptional::GridEndpoint { family: k });
                    }
                }
            }
        }
        let d = (b - a) * inv;
        total += nk;
        mean.add(d);
        z.add(nk as f64 - d);
        each(k, nk, d);
    }
    (total, mean.value(), z.value(), exceptional)
}

/// Whether lattice line `q` of family `k` is a supporting line lying along
/// a boundary edge, with `p` strictly inside that edge.
fn boundary_edge(set: &SteinhausSet, k: usize, q: i64, p: Vec2) -> bool {
    let v = set.lattice_value(k, q);
    let (lo, _) = set.support(k);
    if (v - lo).abs() > EXCEPTIONAL_TOL {
        return false;
    }
    match set.body().chord_at(set.normals()[k], v) {
        Some(edge) => {
            (p - edge.x).norm() > EXCEPTIONAL_TOL && (p - edge.y).norm() > EXCEPTIONAL_TOL
        }
        None => false,
    }
}

fn padding_crossings(padding: &[Segment], line: &Line) -> (i64, Option<Exceptional>) {
    let normal = line.normal();
    let mut hits = 0;
    for (i, s) in padding.iter().enumerate() {
        let sa = normal.dot(s.a) - line.offset();
        let sb = normal.dot(s.b) - line.offset();
        if sa.abs() <= EXCEPTIONAL_TOL || sb.abs() <= EXCEPTIONAL_TOL {
            return (hits, Some(Exceptional::PaddingEndpoint { segment: i }));
        }
        if (sa < 0.0) != (sb < 0.0) {
            hits += 1;
        }
    }
    (hits, None)
}

/// Totals for `line` without the per-family vector.
pub fn count_line_totals(set: &SteinhausSet, line: &Line) -> LineCount {
    let Some(chord) = set.body().chord(line) else {
        return LineCount::empty();
    };
    let (total, mean_term, z, grid_exc) = scan(set, chord.x, chord.y, true, |_, _, _| {});
    let (padding_hits, pad_exc) = padding_crossings(set.padding(), line);
    LineCount {
        chord: Some(chord),
        total,
        mean_term,
        z,
        padding_hits,
        exceptional: grid_exc.or(pad_exc),
    }
}

/// Crossings of `line` with every family and with the padding.
pub fn count_line(set: &SteinhausSet, line: &Line) -> CountBreakdown {
    let mut per_family = vec![0; set.n()];
    let Some(chord) = set.body().chord(line) else {
        return CountBreakdown {
            per_family,
            total: 0,
            mean_term: 0.0,
            z: 0.0,
            padding_hits: 0,
            chord: None,
            exceptional: None,
        };
    };
    let (total, mean_term, z, grid_exc) =
        scan(set, chord.x, chord.y, true, |k, nk, _| per_family[k] = nk);
    let (padding_hits, pad_exc) = padding_crossings(set.padding(), line);
    CountBreakdown {
        per_family,
        total,
        mean_term,
        z,
        padding_hits,
        chord: Some(chord),
        exceptional: grid_exc.or(pad_exc),
    }
}

/// Endpoint error `Z(x, y)` of the grid for an arbitrary pair of points,
/// using the half-open counting formula as is.
pub fn endpoint_error(set: &SteinhausSet, x: Vec2, y: Vec2) -> f64 {
    scan(set, x, y, false, |_, _, _| {}).2
}

/// The line itself, then offsets moved by `±step·2^j`, alternating sides,
/// with `step = max(1e-7·eps, 1e-8)`.
pub fn jitter_sequence(line: Line, eps: f64) -> impl Iterator<Item = Line> {
    let step = (1e-7 * eps).max(10.0 * EXCEPTIONAL_TOL);
    std::iter::once(line).chain((1..=JITTER_ATTEMPTS).map(move |j| {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        line.shifted(sign * step * (1u64 << j) as f64)
    }))
}

/// First non-exceptional line of [`jitter_sequence`], with its counts.
pub fn regularize(set: &SteinhausSet, line: Line) -> Option<(Line, LineCount)> {
    jitter_sequence(line, set.eps()).find_map(|l| {
        let c = count_line_totals(set, &l);
        (!c.is_exceptional()).then_some((l, c))
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("line passes within {tol} of the endpoint {point} of a {kind} segment")]
    Exceptional {
        kind: &'static str,
        point: Vec2,
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCount {
    pub grid: i64,
    pub padding: i64,
}

/// Explicit list of the set's segments, clipped once.
pub struct GridOracle {
    grid: Vec<Segment>,
    padding: Vec<Segment>,
}

impl GridOracle {
    pub fn new(set: &SteinhausSet) -> Self {
        let grid = (0..set.n()).flat_map(|k| set.grid_segments(k)).collect();
        Self {
            grid,
            padding: set.padding().to_vec(),
        }
    }

    pub fn segment_count(&self) -> usize {
        self.grid.len()
    }

    /// Strict crossings of `line` with the grid and padding segments.
    pub fn count(&self, line: &Line) -> Result<OracleCount, OracleError> {
        let normal = line.normal();
        let p = line.offset();
        let tally = |segments: &[Segment], kind: &'static str| -> Result<i64, OracleError> {
            let mut hits = 0;
            for s in segments {
                let sa = normal.dot(s.a) - p;
                let sb = normal.dot(s.b) - p;
                for (side, point) in [(sa, s.a), (sb, s.b)] {
                    if side.abs() <= EXCEPTIONAL_TOL {
                        return Err(OracleError::Exceptional {
                            kind,
                            point,
                            tol: EXCEPTIONAL_TOL,
                        });
                    }
                }
                if (sa < 0.0) != (sb < 0.0) {
                    hits += 1;
                }
            }
            Ok(hits)
        };
        Ok(OracleCount {
            grid: tally(&self.grid, "grid")?,
            padding: tally(&self.padding, "padding")?,
        })
    }
}

/// One-shot oracle count; prefer [`GridOracle`] for many lines.
pub fn oracle_count(set: &SteinhausSet, line: &Line) -> Result<OracleCount, OracleError> {
    GridOracle::new(set).count(line)
}
