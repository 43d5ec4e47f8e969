//! Shifted Steinhaus grids: `n` families of parallel lines with spacing `eps`,
//! family `k` having unit normal `ν_k = (cos(πk/n), sin(πk/n))` and lines
//! `x·ν_k = eps·(q + U_k)`, `q ∈ ℤ`, restricted to a convex body.
//!
//! Also hosts the parameter chooser for a target length, the padding step
//! that tops the length up exactly, and the set manifest file format.

use std::f64::consts::{E, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BodySpec, ConvexBody, GeometryError, Segment, Vec2};
use crate::rng;
use crate::sum::Compensated;

/// Padding segments closer than this (relative to the diameter) do not count
/// as disjoint.
const MIN_PADDING_SPACING: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("direction index {k} out of range for n = {n}")]
    DirectionIndex { k: usize, n: usize },
    #[error("invalid grid parameters: {0}")]
    InvalidParameters(String),
    #[error("target length {target} is too small (minimal admissible length for K0 = {k0} is about {min_admissible})")]
    LengthTooSmall {
        target: f64,
        k0: f64,
        min_admissible: f64,
    },
    #[error("current length {current} already exceeds the target {target}")]
    Overshoot { current: f64, target: f64 },
    #[error("padding of length {delta} needs {segments} segments, more than fit disjointly in a disk of radius {radius}")]
    PaddingOverflow {
        delta: f64,
        segments: u64,
        radius: f64,
    },
    #[error("grid length still exceeds target {target} after {retries} K0 doublings")]
    RetriesExhausted { target: f64, retries: u32 },
    #[error("manifest is inconsistent: {0}")]
    Manifest(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Normal of family `k` among `n`.
pub fn direction(k: usize, n: usize) -> Result<Vec2, BuildError> {
    if k >= n {
        return Err(BuildError::DirectionIndex { k, n });
    }
    Ok(family_normal(k, n))
}

#[inline]
fn family_normal(k: usize, n: usize) -> Vec2 {
    Vec2::from_angle(PI * k as f64 / n as f64)
}

/// `n` independent uniform phases in `[0, 1)`, family `k` drawn from stream
/// `k` of the `"shifts"` component of `seed`.
pub fn sample_shifts(n: usize, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|k| rng::unit_f64(&mut rng::stream(seed, "shifts", k as u64)))
        .collect()
}

/// How the phases of a grid are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMode {
    /// Independent uniform phases drawn from the seed.
    Shifted,
    /// All phases zero: the classical Steinhaus grid.
    Zero,
}

impl ShiftMode {
    pub fn shifts(self, n: usize, seed: u64) -> Vec<f64> {
        match self {
            ShiftMode::Shifted => sample_shifts(n, seed),
            ShiftMode::Zero => vec![0.0; n],
        }
    }
}

/// The set `Ω ∩ ⋃_k 𝓛_k` plus optional padding segments.
#[derive(Clone, Debug)]
pub struct SteinhausSet {
    body: ConvexBody,
    n: usize,
    eps: f64,
    shifts: Vec<f64>,
    normals: Vec<Vec2>,
    supports: Vec<(f64, f64)>,
    ranges: Vec<(i64, i64)>,
    padding: Vec<Segment>,
}

impl SteinhausSet {
    pub fn new(body: ConvexBody, n: usize, eps: f64, shifts: Vec<f64>) -> Result<Self, BuildError> {
        if n == 0 {
            return Err(BuildError::InvalidParameters("n must be at least 1".into()));
        }
        if !eps.is_finite() || eps <= 0.0 {
            return Err(BuildError::InvalidParameters(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if shifts.len() != n {
            return Err(BuildError::InvalidParameters(format!(
                "expected {n} shifts, got {}",
                shifts.len()
            )));
        }
        if let Some(u) = shifts.iter().find(|u| !(0.0..1.0).contains(*u)) {
            return Err(BuildError::InvalidParameters(format!(
                "shift {u} outside [0, 1)"
            )));
        }
        let normals: Vec<Vec2> = (0..n).map(|k| family_normal(k, n)).collect();
        let supports: Vec<(f64, f64)> = normals.iter().map(|&nu| body.support(nu)).collect();
        // one extra index on each side absorbs rounding in the support values
        let ranges = supports
            .iter()
            .zip(&shifts)
            .map(|(&(lo, hi), &u)| {
                (
                    (lo / eps - u).ceil() as i64 - 1,
                    (hi / eps - u).floor() as i64 + 1,
                )
            })
            .collect();
        Ok(Self {
            body,
            n,
            eps,
            shifts,
            normals,
            supports,
            ranges,
            padding: Vec::new(),
        })
    }

    pub fn shifted(body: ConvexBody, n: usize, eps: f64, seed: u64) -> Result<Self, BuildError> {
        Self::new(body, n, eps, sample_shifts(n, seed))
    }

    pub fn unshifted(body: ConvexBody, n: usize, eps: f64) -> Result<Self, BuildError> {
        Self::new(body, n, eps, vec![0.0; n])
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    pub fn padding(&self) -> &[Segment] {
        &self.padding
    }

    /// `(min, max)` of `x·ν_k` over the body.
    pub fn support(&self, k: usize) -> (f64, f64) {
        self.supports[k]
    }

    /// Inclusive lattice index range covering the body in family `k`.
    pub fn index_range(&self, k: usize) -> (i64, i64) {
        self.ranges[k]
    }

    #[inline]
    pub fn lattice_value(&self, k: usize, q: i64) -> f64 {
        self.eps * (q as f64 + self.shifts[k])
    }

    /// Length of `Ω ∩ 𝓛_k`: sum of slice lengths over the lattice offsets.
    pub fn family_length(&self, k: usize) -> f64 {
        let nu = self.normals[k];
        let (q0, q1) = self.ranges[k];
        (q0..=q1)
            .map(|q| self.body.slice_length(nu, self.lattice_value(k, q)))
            .collect::<Compensated>()
            .value()
    }

    /// Length of the grid part, without padding.
    pub fn grid_length(&self) -> f64 {
        (0..self.n)
            .map(|k| self.family_length(k))
            .collect::<Compensated>()
            .value()
    }

    pub fn padding_length(&self) -> f64 {
        self.padding
            .iter()
            .map(Segment::length)
            .collect::<Compensated>()
            .value()
    }

    pub fn total_length(&self) -> f64 {
        self.grid_length() + self.padding_length()
    }

    /// Nominal length `n·|Ω|/eps`, the expectation of the grid length over
    /// uniform shifts.
    pub fn expected_length(&self) -> f64 {
        self.n as f64 * self.body.area() / self.eps
    }

    /// Nondegenerate grid segments of family `k`.
    pub fn grid_segments(&self, k: usize) -> impl Iterator<Item = Segment> + '_ {
        let nu = self.normals[k];
        let (q0, q1) = self.ranges[k];
        (q0..=q1).filter_map(move |q| {
            self.body
                .chord_at(nu, self.lattice_value(k, q))
                .map(|c| Segment::new(c.x, c.y))
        })
    }

    /// Unit normal of the padding segments: halfway between the first two
    /// family normals, hence parallel to none of the grid lines.
    pub fn padding_normal(&self) -> Vec2 {
        Vec2::from_angle(PI / (2.0 * self.n as f64))
    }

    /// Rebuilds the padding so the total length equals `target`: parallel
    /// segments of length at most `radius`, spaced `radius / m` apart inside
    /// the disk `(center, radius)`, with the last one shortened.
    pub fn adjust_length(
        &self,
        target: f64,
        disk: (Vec2, f64),
    ) -> Result<SteinhausSet, BuildError> {
        let (center, radius) = disk;
        if radius.is_nan() || radius <= 0.0 || !self.body.contains(center) {
            return Err(BuildError::InvalidParameters(format!(
                "padding disk center {center} radius {radius} is not inside the body"
            )));
        }
        let current = self.total_length();
        if current > target {
            return Err(BuildError::Overshoot { current, target });
        }
        let delta = target - self.grid_length();
        let mut out = self.clone();
        out.padding.clear();
        if delta <= 0.0 {
            return Ok(out);
        }
        let m = (delta / radius).ceil().max(1.0);
        let spacing = radius / m;
        if m > u32::MAX as f64 || spacing < MIN_PADDING_SPACING * self.body.diameter() {
            return Err(BuildError::PaddingOverflow {
                delta,
                segments: m as u64,
                radius,
            });
        }
        let m = m as u64;
        let normal = self.padding_normal();
        let along = normal.perp();
        let mut placed = 0.0;
        for i in 0..m {
            let len = if i + 1 == m { delta - placed } else { radius };
            placed += len;
            let mid = center + normal * ((i as f64 - (m - 1) as f64 / 2.0) * spacing);
            let half = along * (len / 2.0);
            out.padding.push(Segment::new(mid - half, mid + half));
        }
        Ok(out)
    }

    /// Replaces the padding with explicit segments, as read from a manifest.
    pub fn with_padding(mut self, padding: Vec<Segment>) -> Result<Self, BuildError> {
        let tol = 1e-9 * self.body.diameter();
        for s in &padding {
            if self.body.signed_distance(s.a) > tol || self.body.signed_distance(s.b) > tol {
                return Err(BuildError::Manifest(format!(
                    "padding segment {s:?} leaves the body"
                )));
            }
            let d = s.b - s.a;
            let len = d.norm();
            if len.is_nan() || len <= 0.0 {
                return Err(BuildError::Manifest("zero-length padding segment".into()));
            }
            // parallel to a family iff the segment direction is orthogonal to its normal
            if self
                .normals
                .iter()
                .any(|nu| (d.dot(*nu) / len).abs() < 1e-12)
            {
                return Err(BuildError::Manifest(format!(
                    "padding segment {s:?} is parallel to a grid family"
                )));
            }
        }
        self.padding = padding;
        Ok(self)
    }
}

/// Disk that hosts the padding: the Chebyshev disk of a polygon, or the
/// concentric disk of half the radius for a disk body.
pub fn padding_disk(body: &ConvexBody) -> (Vec2, f64) {
    match body.shape() {
        crate::geometry::Shape::Disk { center, radius } => (*center, radius / 2.0),
        crate::geometry::Shape::Polygon(_) => body.inscribed_disk(),
    }
}

/// `Φ(L) = L^{1/5} (ln L)^{2/5}`.
pub fn phi(length: f64) -> f64 {
    length.powf(0.2) * length.ln().powf(0.4)
}

/// How the number of directions is tied to the length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionRule {
    /// `n = ⌊M^{2/5} (ln M)^{-1/5}⌋`, tuned for shifted grids.
    Balanced,
    /// `n = ⌊L^{1/3}⌋`, the classical choice for unshifted grids.
    CubeRoot,
}

impl DirectionRule {
    pub fn for_mode(mode: ShiftMode) -> Self {
        match mode {
            ShiftMode::Shifted => DirectionRule::Balanced,
            ShiftMode::Zero => DirectionRule::CubeRoot,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildPlan {
    pub target_length: f64,
    pub expected_length: f64,
    pub n: usize,
    pub eps: f64,
    pub k0: f64,
    pub phi: f64,
    pub rule: DirectionRule,
}

/// Grid parameters for a target length `length`: expected length
/// `M = L - K0·Φ(L)`, `n = ⌊M^{2/5}(ln M)^{-1/5}⌋` and `eps = n|Ω|/M`.
pub fn plan_build(body: &ConvexBody, length: f64, k0: f64) -> Result<BuildPlan, BuildError> {
    plan_with_rule(body, length, k0, DirectionRule::Balanced)
}

pub fn plan_with_rule(
    body: &ConvexBody,
    length: f64,
    k0: f64,
    rule: DirectionRule,
) -> Result<BuildPlan, BuildError> {
    if !k0.is_finite() || k0 < 0.0 {
        return Err(BuildError::InvalidParameters(format!(
            "K0 must be non-negative, got {k0}"
        )));
    }
    if !admissible(length, k0) {
        return Err(BuildError::LengthTooSmall {
            target: length,
            k0,
            min_admissible: min_admissible_length(k0),
        });
    }
    let phi_l = phi(length);
    let m = length - k0 * phi_l;
    let n = match rule {
        DirectionRule::Balanced => (m.powf(0.4) * m.ln().powf(-0.2)).floor(),
        DirectionRule::CubeRoot => {
            let mut c = length.cbrt().floor();
            while (c + 1.0).powi(3) <= length {
                c += 1.0;
            }
            while c > 1.0 && c.powi(3) > length {
                c -= 1.0;
            }
            c
        }
    };
    let n = n.max(1.0) as usize;
    Ok(BuildPlan {
        target_length: length,
        expected_length: m,
        n,
        eps: n as f64 * body.area() / m,
        k0,
        phi: phi_l,
        rule,
    })
}

fn admissible(length: f64, k0: f64) -> bool {
    length > 1.0 && length.is_finite() && length - k0 * phi(length) > E
}

/// Approximate smallest length with `L - K0·Φ(L) > e`.
pub fn min_admissible_length(k0: f64) -> f64 {
    let mut hi = E;
    while !admissible(hi, k0) {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    if lo <= 1.0 {
        lo = 1.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid, k0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Result of [`build_to_length`].
#[derive(Clone, Debug)]
pub struct BuiltSet {
    pub set: SteinhausSet,
    pub plan: BuildPlan,
    /// Number of K0 doublings needed before the grid fit under the target.
    pub retries: u32,
}

/// Plan, build, and pad a set to exactly `length`. When the grid alone
/// already exceeds `length`, `K0` is doubled (starting from 1 if it was 0)
/// and the build repeated, at most `max_retries` times.
pub fn build_to_length(
    body: &ConvexBody,
    length: f64,
    k0: f64,
    mode: ShiftMode,
    rule: DirectionRule,
    seed: u64,
    max_retries: u32,
) -> Result<BuiltSet, BuildError> {
    let disk = padding_disk(body);
    let mut k0 = k0;
    for retries in 0..=max_retries {
        let plan = plan_with_rule(body, length, k0, rule)?;
        let grid = SteinhausSet::new(body.clone(), plan.n, plan.eps, mode.shifts(plan.n, seed))?;
        if grid.grid_length() <= length {
            let set = grid.adjust_length(length, disk)?;
            return Ok(BuiltSet { set, plan, retries });
        }
        k0 = if k0 > 0.0 { 2.0 * k0 } else { 1.0 };
    }
    Err(BuildError::RetriesExhausted {
        target: length,
        retries: max_retries,
    })
}

/// On-disk description of a built set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetManifest {
    pub body: BodySpec,
    pub n: usize,
    pub eps: f64,
    pub seed: Option<u64>,
    pub shifts: Vec<f64>,
    pub padding: Vec<Segment>,
    pub total_length: f64,
}

impl SetManifest {
    pub fn from_set(set: &SteinhausSet, seed: Option<u64>) -> Self {
        Self {
            body: set.body().spec(),
            n: set.n(),
            eps: set.eps(),
            seed,
            shifts: set.shifts().to_vec(),
            padding: set.padding().to_vec(),
            total_length: set.total_length(),
        }
    }

    /// Rebuilds the set and checks the recorded length against it.
    pub fn to_set(&self) -> Result<SteinhausSet, BuildError> {
        let body = self.body.build()?;
        let set = SteinhausSet::new(body, self.n, self.eps, self.shifts.clone())?
            .with_padding(self.padding.clone())?;
        let len = set.total_length();
        if (len - self.total_length).abs() > 1e-9 * self.total_length.abs().max(1.0) {
            return Err(BuildError::Manifest(format!(
                "recorded total_length {} but the set measures {len}",
                self.total_length
            )));
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BuildError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, BuildError> {
        let text = std::fs::read_to_string(path).map_err(|source| BuildError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), BuildError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| BuildError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
