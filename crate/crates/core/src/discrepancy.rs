//! Crofton target, local discrepancy of a line, and a sampling estimator of
//! the essential supremum over all lines.
//!
//! For a non-exceptional line with chord length `h` and direction `t`, the
//! crossing count splits as
//!
//! ```text
//! #(ℓ ∩ S) = (h/ε)(2n/π) + (h/ε)(Σ_k |t·ν_k| - 2n/π) + Z + padding hits
//! ```
//!
//! and `(h/ε)(2n/π)` is the Crofton target for the nominal length `n|Ω|/ε`.
//! The triangle inequality therefore bounds the local discrepancy by the sum
//! of the quadrature term, `|Z|`, the padding hits and the change of target
//! between the nominal and the actual length. [`Decomposition`] carries the
//! four terms.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{self, Exceptional, LineCount};
use crate::geometry::{Line, Vec2};
use crate::rng;
use crate::steinhaus::SteinhausSet;

/// Number of best lines kept as refinement centers.
const TOP_K: usize = 100;
/// Half-width of a refinement patch, in fine steps.
const PATCH: i64 = 10;

#[derive(Debug, Error)]
pub enum DiscrepancyError {
    #[error("line is exceptional: {0:?}")]
    Exceptional(Exceptional),
    #[error("invalid estimator configuration: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report: {0}")]
    Parse(#[from] serde_json::Error),
}

/// `2·L·h / (π·area)`.
#[inline]
pub fn crofton_target(length: f64, area: f64, h: f64) -> f64 {
    2.0 * length * h / (PI * area)
}

/// `Σ_{k<n} |cos(θ - πk/n)|`.
pub fn angular_sum(n: usize, theta: f64) -> f64 {
    (0..n)
        .map(|k| (theta - PI * k as f64 / n as f64).cos().abs())
        .sum()
}

/// Terms bounding the local discrepancy of one line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `(h/ε)·|Σ_k |t·ν_k| - 2n/π|`.
    pub quadrature_term: f64,
    /// `|Z|`.
    pub z_term: f64,
    pub padding_term: f64,
    /// `2·|L_actual - n|Ω|/ε|·h / (π|Ω|)`.
    pub length_normalization_term: f64,
}

impl Decomposition {
    pub fn bound(&self) -> f64 {
        self.quadrature_term + self.z_term + self.padding_term + self.length_normalization_term
    }
}

/// `|#(ℓ ∩ S) - crofton_target(L_actual, |Ω|, h_ℓ)|`, counting padding.
pub fn local_discrepancy(
    set: &SteinhausSet,
    line: &Line,
    l_actual: f64,
) -> Result<f64, DiscrepancyError> {
    let c = counting::count_line_totals(set, line);
    if let Some(e) = c.exceptional {
        return Err(DiscrepancyError::Exceptional(e));
    }
    Ok(discrepancy_of(set, &c, l_actual))
}

#[inline]
fn discrepancy_of(set: &SteinhausSet, c: &LineCount, l_actual: f64) -> f64 {
    let h = c.chord.map_or(0.0, |ch| ch.length);
    ((c.total + c.padding_hits) as f64 - crofton_target(l_actual, set.body().area(), h)).abs()
}

/// Local discrepancy and its four bounding terms. The quadrature term is
/// computed from [`angular_sum`] rather than from the crossing counts.
pub fn decompose(
    set: &SteinhausSet,
    line: &Line,
    l_actual: f64,
) -> Result<(f64, Decomposition), DiscrepancyError> {
    let c = counting::count_line_totals(set, line);
    if let Some(e) = c.exceptional {
        return Err(DiscrepancyError::Exceptional(e));
    }
    let disc = discrepancy_of(set, &c, l_actual);
    let Some(chord) = c.chord else {
        return Ok((disc, Decomposition::default()));
    };
    let n = set.n() as f64;
    let h = chord.length;
    let t = chord.direction;
    let quad = h / set.eps() * (angular_sum(set.n(), t.y.atan2(t.x)) - 2.0 * n / PI).abs();
    let area = set.body().area();
    let drift = crofton_target((l_actual - set.expected_length()).abs(), area, h);
    Ok((
        disc,
        Decomposition {
            quadrature_term: quad,
            z_term: c.z.abs(),
            padding_term: c.padding_hits as f64,
            length_normalization_term: drift,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscConfig {
    pub theta_res: usize,
    pub offset_res: usize,
    pub refine_rounds: usize,
    pub seed: u64,
}

impl Default for DiscConfig {
    fn default() -> Self {
        Self {
            theta_res: 512,
            offset_res: 512,
            refine_rounds: 3,
            seed: 0,
        }
    }
}

impl DiscConfig {
    fn validate(&self) -> Result<(), DiscrepancyError> {
        if self.theta_res < 8 || self.offset_res < 8 {
            return Err(DiscrepancyError::Config(format!(
                "resolutions must be at least 8, got theta_res = {}, offset_res = {}",
                self.theta_res, self.offset_res
            )));
        }
        Ok(())
    }

    /// Resolutions `(T/2^j, P/2^j)` for `j = 0, 1, ...` while both halve
    /// evenly and stay at least 8. The chain at `(2T, 2P)` extends the chain
    /// at `(T, P)` by one level.
    pub fn targeted_levels(&self) -> Vec<(usize, usize)> {
        let mut levels = vec![(self.theta_res, self.offset_res)];
        let (mut t, mut p) = (self.theta_res, self.offset_res);
        while t % 2 == 0 && p % 2 == 0 && t / 2 >= 8 && p / 2 >= 8 {
            t /= 2;
            p /= 2;
            levels.push((t, p));
        }
        levels
    }

    /// Number of near-lattice lines sampled after the regular grid:
    /// `T_j·P_j/2` per level of [`targeted_levels`](Self::targeted_levels).
    pub fn targeted_samples(&self) -> usize {
        self.targeted_levels().iter().map(|(t, p)| t * p / 2).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub quadrature_max: f64,
    pub max_abs_z: f64,
    pub max_padding_hits: i64,
    pub padding_count: usize,
    pub normalization_drift_max: f64,
    /// `quadrature_max + max_abs_z + padding_count + normalization_drift_max`.
    pub upper_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyReport {
    /// Largest local discrepancy found; a lower bound for the ess-sup.
    pub sup_estimate: f64,
    pub witness: Line,
    pub samples_evaluated: u64,
    pub exceptional_skipped: u64,
    pub theta_resolution: usize,
    pub offset_resolution: usize,
    pub refine_rounds: usize,
    pub seed: u64,
    pub l_actual: f64,
    pub decomposition: Decomposition,
    pub envelope: Envelope,
}

impl DiscrepancyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DiscrepancyError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), DiscrepancyError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| DiscrepancyError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DiscrepancyError> {
        let text = std::fs::read_to_string(path).map_err(|source| DiscrepancyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    disc: f64,
    line: Line,
}

/// Larger discrepancy first, then smaller `(θ, p)`.
fn rank(a: &Sample, b: &Sample) -> Ordering {
    b.disc
        .total_cmp(&a.disc)
        .then(a.line.theta().total_cmp(&b.line.theta()))
        .then(a.line.offset().total_cmp(&b.line.offset()))
}

#[derive(Clone, Debug, Default)]
struct Tally {
    top: Vec<Sample>,
    evaluated: u64,
    skipped: u64,
    quad_max: f64,
    z_max: f64,
    pad_max: i64,
    drift_max: f64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.top.extend(other.top);
        self.top.sort_by(rank);
        self.top.truncate(TOP_K);
        self.evaluated += other.evaluated;
        self.skipped += other.skipped;
        self.quad_max = self.quad_max.max(other.quad_max);
        self.z_max = self.z_max.max(other.z_max);
        self.pad_max = self.pad_max.max(other.pad_max);
        self.drift_max = self.drift_max.max(other.drift_max);
        self
    }
}

struct Evaluator<'a> {
    set: &'a SteinhausSet,
    l_actual: f64,
    nominal_rate: f64,
    drift_rate: f64,
}

impl<'a> Evaluator<'a> {
    fn new(set: &'a SteinhausSet, l_actual: f64) -> Self {
        let area = set.body().area();
        Self {
            set,
            l_actual,
            // (h/ε)(2n/π) = nominal_rate·h
            nominal_rate: 2.0 * set.n() as f64 / (PI * set.eps()),
            drift_rate: crofton_target((l_actual - set.expected_length()).abs(), area, 1.0),
        }
    }

    fn tally<I: IntoParallelIterator<Item = Line>>(&self, lines: I) -> Tally {
        lines
            .into_par_iter()
            .fold(Tally::default, |mut t, line| {
                self.visit(&mut t, line);
                if t.top.len() >= 4 * TOP_K {
                    t.top.sort_by(rank);
                    t.top.truncate(TOP_K);
                }
                t
            })
            .reduce(Tally::default, Tally::merge)
    }

    fn visit(&self, t: &mut Tally, line: Line) {
        let Some((line, c)) = counting::regularize(self.set, line) else {
            t.skipped += 1;
            return;
        };
        t.evaluated += 1;
        let disc = discrepancy_of(self.set, &c, self.l_actual);
        let h = c.chord.map_or(0.0, |ch| ch.length);
        t.quad_max = t.quad_max.max((c.mean_term - self.nominal_rate * h).abs());
        t.z_max = t.z_max.max(c.z.abs());
        t.pad_max = t.pad_max.max(c.padding_hits);
        t.drift_max = t.drift_max.max(self.drift_rate * h);
        t.top.push(Sample { disc, line });
    }
}

/// Estimates `ess sup_ℓ |#(ℓ ∩ S) - (2L/π|Ω|)·h_ℓ|` from below.
///
/// Evaluates, in order:
/// 1. the grid `θ = πi/T`, `p = lo + (hi - lo)·j/P` for `0 ≤ i < T`, `0 < j < P`,
///    where `[lo, hi]` is the support interval of the body in direction `θ`;
/// 2. for each level `(T_j, P_j)` of [`DiscConfig::targeted_levels`],
///    `T_j·P_j/2` lines through pairs of points that lie within `eps/P_j` of a
///    grid segment endpoint (or of a polygon vertex), each sample drawn from
///    its own stream;
/// 3. `refine_rounds` rounds that resample a 21×21 patch around each of the
///    current best 100 lines, each round ten times finer than the last.
///
/// Stage 1 and 2 samples at resolution `(T, P)` are a subset of those at
/// `(2T, 2P)`; every round of stage 3 only adds lines.
pub fn estimate_sup(
    set: &SteinhausSet,
    l_actual: f64,
    config: &DiscConfig,
) -> Result<DiscrepancyReport, DiscrepancyError> {
    config.validate()?;
    let eval = Evaluator::new(set, l_actual);
    let body = set.body();
    let t_res = config.theta_res;
    let p_res = config.offset_res;

    let grid = (0..t_res).into_par_iter().flat_map_iter(|i| {
        let theta = PI * i as f64 / t_res as f64;
        let (lo, hi) = body.support(Vec2::from_angle(theta));
        (1..p_res).map(move |j| Line::new(theta, lo + ((hi - lo) * j as f64) / p_res as f64))
    });
    let mut tally = eval.tally(grid);

    for (t, p) in config.targeted_levels() {
        let radius = set.eps() / p as f64;
        let level_seed = rng::derive_seed(config.seed, &format!("near-lattice:{t}x{p}"));
        let targeted = (0..(t * p / 2) as u64)
            .into_par_iter()
            .filter_map(|s| near_lattice_line(set, level_seed, s, radius));
        tally = tally.merge(eval.tally(targeted));
    }

    let mut dtheta = PI / t_res as f64;
    for _ in 0..config.refine_rounds {
        let centers = tally.top.clone();
        let patch = centers.into_par_iter().flat_map_iter(|c| {
            let (lo, hi) = body.support(c.line.normal());
            let dp = (hi - lo) / p_res as f64 * (dtheta * t_res as f64 / PI);
            let (th, dt) = (c.line.theta(), dtheta / PATCH as f64);
            let dp = dp / PATCH as f64;
            (-PATCH..=PATCH).flat_map(move |a| {
                (-PATCH..=PATCH)
                    .map(move |b| Line::new(th + a as f64 * dt, c.line.offset() + b as f64 * dp))
            })
        });
        tally = tally.merge(eval.tally(patch));
        dtheta /= PATCH as f64;
    }

    let (witness, found) = match tally.top.first() {
        Some(s) => (s.line, s.disc),
        None => (Line::new(0.0, 0.0), 0.0),
    };
    let (sup_estimate, decomposition) = if tally.top.is_empty() {
        (0.0, Decomposition::default())
    } else {
        decompose(set, &witness, l_actual)?
    };
    debug_assert_eq!(sup_estimate, found);
    let padding_count = set.padding().len();
    let envelope = Envelope {
        quadrature_max: tally.quad_max,
        max_abs_z: tally.z_max,
        max_padding_hits: tally.pad_max,
        padding_count,
        normalization_drift_max: tally.drift_max,
        upper_bound: tally.quad_max + tally.z_max + padding_count as f64 + tally.drift_max,
    };
    Ok(DiscrepancyReport {
        sup_estimate,
        witness,
        samples_evaluated: tally.evaluated,
        exceptional_skipped: tally.skipped,
        theta_resolution: t_res,
        offset_resolution: p_res,
        refine_rounds: config.refine_rounds,
        seed: config.seed,
        l_actual,
        decomposition,
        envelope,
    })
}

/// Sample `s` of the near-lattice family: the line through two anchors, each
/// a grid segment endpoint (or, one time in four, a polygon vertex) moved by
/// a random vector of length below `radius`.
fn near_lattice_line(set: &SteinhausSet, seed: u64, s: u64, radius: f64) -> Option<Line> {
    let mut r = rng::stream(seed, "near-lattice", s);
    let mut anchor = || -> Option<Vec2> {
        let vertices = set.body().vertices();
        let base = if !vertices.is_empty() && rng::below(&mut r, 4) == 0 {
            vertices[rng::below(&mut r, vertices.len() as u64) as usize]
        } else {
            let k = rng::below(&mut r, set.n() as u64) as usize;
            let (q0, q1) = set.index_range(k);
            let q = q0 + rng::below(&mut r, (q1 - q0 + 1) as u64) as i64;
            let chord = set
                .body()
                .chord_at(set.normals()[k], set.lattice_value(k, q))?;
            if rng::below(&mut r, 2) == 0 {
                chord.x
            } else {
                chord.y
            }
        };
        let angle = rng::uniform(&mut r, 0.0, 2.0 * PI);
        let len = radius * rng::unit_f64(&mut r);
        Some(base + Vec2::from_angle(angle) * len)
    };
    let p = anchor()?;
    let q = anchor()?;
    Line::through(p, q)
}
