//! Experiment drivers: length sweeps, endpoint-error tails, length
//! concentration, slope fits and CSV/gnuplot output.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{count_line_totals, endpoint_error, jitter_sequence, GridOracle};
use crate::discrepancy::{estimate_sup, DiscConfig, DiscrepancyError};
use crate::geometry::{ConvexBody, Line, Vec2};
use crate::rng;
use crate::steinhaus::{build_to_length, BuildError, DirectionRule, ShiftMode, SteinhausSet};

/// Rows with fewer directions are outside the asymptotic regime and are not
/// used in slope fits.
pub const MIN_ASYMPTOTIC_N: usize = 8;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
    #[error("slope fit needs at least 4 usable rows, got {0}")]
    TooFewPoints(usize),
    #[error("slope fit is degenerate: all x values are equal")]
    Degenerate,
    #[error("invalid study parameters: {0}")]
    InvalidParameters(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One `L` of a sweep. CSV columns follow field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L_target")]
    pub l_target: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    #[serde(rename = "L_actual")]
    pub l_actual: f64,
    pub sup_estimate: f64,
    pub max_abs_z: f64,
    pub quadrature_max: f64,
    pub padding_count: usize,
    pub wall_time_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: ShiftMode,
    pub seed: u64,
    pub k0: f64,
    pub max_retries: u32,
    pub disc: DiscConfig,
    /// Record wall-clock time per row. Off keeps the CSV byte-reproducible.
    pub record_timing: bool,
}

impl SweepConfig {
    pub fn new(mode: ShiftMode, seed: u64) -> Self {
        Self {
            mode,
            seed,
            k0: 0.5,
            max_retries: 16,
            disc: DiscConfig::default(),
            record_timing: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `(L, message)` for every row that could not be built.
    pub failures: Vec<(f64, String)>,
}

/// `count` values spaced geometrically over `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    hi
                } else {
                    lo * (hi / lo).powf(i as f64 / (count - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Seed for the row with target length `length`.
pub fn row_seed(seed: u64, length: f64) -> u64 {
    rng::derive_seed(seed, &format!("row:{:016x}", length.to_bits()))
}

/// Plans, builds, pads and measures one set per target length.
pub fn run_sweep(body: &ConvexBody, lengths: &[f64], config: &SweepConfig) -> SweepResult {
    let outcomes: Vec<Result<SweepRow, HarnessError>> = lengths
        .par_iter()
        .map(|&l| sweep_row(body, l, config))
        .collect();
    let mut result = SweepResult::default();
    for (&l, outcome) in lengths.iter().zip(outcomes) {
        match outcome {
            Ok(row) => result.rows.push(row),
            Err(e) => result.failures.push((l, e.to_string())),
        }
    }
    result
}

fn sweep_row(
    body: &ConvexBody,
    length: f64,
    config: &SweepConfig,
) -> Result<SweepRow, HarnessError> {
    let start = Instant::now();
    let seed = row_seed(config.seed, length);
    let rule = DirectionRule::for_mode(config.mode);
    let built = build_to_length(
        body,
        length,
        config.k0,
        config.mode,
        rule,
        seed,
        config.max_retries,
    )?;
    let set = &built.set;
    let l_actual = set.total_length();
    let disc_cfg = DiscConfig {
        seed: rng::derive_seed(seed, "disc"),
        ..config.disc
    };
    let report = estimate_sup(set, l_actual, &disc_cfg)?;
    let probe = adversarial_probe(set);
    Ok(SweepRow {
        l_target: length,
        m: built.plan.expected_length,
        n: set.n(),
        eps: set.eps(),
        seed,
        l_actual,
        sup_estimate: report.sup_estimate,
        max_abs_z: report.envelope.max_abs_z.max(probe),
        quadrature_max: report.envelope.quadrature_max,
        padding_count: set.padding().len(),
        wall_time_seconds: if config.record_timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        },
    })
}

/// Point where every family of the zero-phase grid has a line: the origin,
/// or the center of the inscribed disk when the origin is outside the body.
pub fn probe_anchor(body: &ConvexBody) -> Vec2 {
    let origin = Vec2::new(0.0, 0.0);
    if body.contains(origin) {
        origin
    } else {
        body.inscribed_disk().0
    }
}

/// Pairs `(x0, y)` with `x0 = probe_anchor` and `y` on a polar grid of 256
/// directions and 16 radii around it, kept when inside the body.
pub fn probe_pairs(body: &ConvexBody) -> Vec<(Vec2, Vec2)> {
    const DIRECTIONS: usize = 256;
    const RADII: usize = 16;
    let x0 = probe_anchor(body);
    let d = body.diameter();
    let mut pairs = Vec::new();
    for i in 0..DIRECTIONS {
        let dir = Vec2::from_angle(2.0 * PI * (i as f64 + 0.5) / DIRECTIONS as f64);
        for j in 1..=RADII {
            let y = x0 + dir * (d * j as f64 / RADII as f64);
            if body.contains(y) {
                pairs.push((x0, y));
            }
        }
    }
    pairs
}

/// `max |Z(x0, y)|` over [`probe_pairs`]. With zero phases every family
/// has a line through `x0`, so the rounding errors at that endpoint align.
pub fn adversarial_probe(set: &SteinhausSet) -> f64 {
    probe_pairs(set.body())
        .into_iter()
        .map(|(x, y)| endpoint_error(set, x, y).abs())
        .fold(0.0, f64::max)
}

/// Line with uniform direction and uniform offset across the body's extent.
pub fn random_line<R: rand::RngCore + ?Sized>(body: &ConvexBody, rng: &mut R) -> Line {
    let theta = rng::uniform(rng, 0.0, PI);
    let (lo, hi) = body.support(Vec2::from_angle(theta));
    Line::new(theta, rng::uniform(rng, lo, hi))
}

/// First line where the fast path and the oracle disagree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleMismatch {
    pub line: Line,
    pub fast_grid: i64,
    pub fast_padding: i64,
    pub oracle_grid: i64,
    pub oracle_padding: i64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleCheck {
    pub lines: usize,
    pub agree: usize,
    /// Lines still exceptional after every jitter attempt.
    pub unresolved: usize,
    pub mismatch: Option<OracleMismatch>,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none() && self.agree + self.unresolved == self.lines
    }
}

/// Compares [`count_line_totals`] with [`GridOracle`] on `lines` random
/// lines. Exceptional lines are jittered until both sides call them regular.
pub fn oracle_check(set: &SteinhausSet, lines: usize, seed: u64) -> OracleCheck {
    let oracle = GridOracle::new(set);
    let mut r = rng::stream(seed, "oracle-check", 0);
    let mut report = OracleCheck {
        lines,
        agree: 0,
        unresolved: 0,
        mismatch: None,
    };
    for _ in 0..lines {
        let line = random_line(set.body(), &mut r);
        let settled = jitter_sequence(line, set.eps()).find_map(|l| {
            let fast = count_line_totals(set, &l);
            if fast.is_exceptional() {
                return None;
            }
            oracle.count(&l).ok().map(|o| (l, fast, o))
        });
        match settled {
            None => report.unresolved += 1,
            Some((l, fast, o)) if fast.total != o.grid || fast.padding_hits != o.padding => {
                report.mismatch = Some(OracleMismatch {
                    line: l,
                    fast_grid: fast.total,
                    fast_padding: fast.padding_hits,
                    oracle_grid: o.grid,
                    oracle_padding: o.padding,
                });
                break;
            }
            Some(_) => report.agree += 1,
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub n: usize,
    pub eps: f64,
    pub zero_max_abs_z: f64,
    pub random_max_abs_z: f64,
    pub ratio: f64,
}

/// [`adversarial_probe`] on the zero-phase grid and on a random-phase grid,
/// for each `n` with spacing `eps_of(n)`.
pub fn coherence_study(
    body: &ConvexBody,
    ns: &[usize],
    eps_of: impl Fn(usize) -> f64,
    seed: u64,
) -> Result<Vec<CoherenceRow>, HarnessError> {
    ns.iter()
        .map(|&n| {
            let eps = eps_of(n);
            let zero = SteinhausSet::unshifted(body.clone(), n, eps)?;
            let random = SteinhausSet::shifted(
                body.clone(),
                n,
                eps,
                rng::derive_seed(seed, &format!("coherence:{n}")),
            )?;
            let z0 = adversarial_probe(&zero);
            let zr = adversarial_probe(&random);
            Ok(CoherenceRow {
                n,
                eps,
                zero_max_abs_z: z0,
                random_max_abs_z: zr,
                ratio: z0 / zr,
            })
        })
        .collect()
}

/// CSV with a header row, one line per row, columns in field order.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, HarnessError> {
    to_csv(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Columns usable in [`fit_slope`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepField {
    LTarget,
    M,
    N,
    Eps,
    LActual,
    SupEstimate,
    MaxAbsZ,
    QuadratureMax,
    PaddingCount,
}

impl SweepField {
    pub fn get(self, r: &SweepRow) -> f64 {
        match self {
            SweepField::LTarget => r.l_target,
            SweepField::M => r.m,
            SweepField::N => r.n as f64,
            SweepField::Eps => r.eps,
            SweepField::LActual => r.l_actual,
            SweepField::SupEstimate => r.sup_estimate,
            SweepField::MaxAbsZ => r.max_abs_z,
            SweepField::QuadratureMax => r.quadrature_max,
            SweepField::PaddingCount => r.padding_count as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Least squares of `ln y` on `ln x` over rows with `n ≥ 8` and positive
/// values. With `deflate = Some(c)`, `y` is first divided by `(ln L_target)^c`.
pub fn fit_slope(
    rows: &[SweepRow],
    x_field: SweepField,
    y_field: SweepField,
    deflate: Option<f64>,
) -> Result<SlopeFit, HarnessError> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= MIN_ASYMPTOTIC_N)
        .filter_map(|r| {
            let x = x_field.get(r);
            let mut y = y_field.get(r);
            if let Some(c) = deflate {
                y /= r.l_target.ln().powf(c);
            }
            (x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()).then(|| (x.ln(), y.ln()))
        })
        .collect();
    if pts.len() < 4 {
        return Err(HarnessError::TooFewPoints(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(HarnessError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(SlopeFit {
        exponent: slope,
        intercept,
        r_squared,
        points_used: pts.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub s: f64,
    pub empirical_tail: f64,
    pub hoeffding_bound: f64,
    /// Three binomial standard deviations at the bound.
    pub band: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailStudy {
    pub n: usize,
    pub eps: f64,
    pub trials: usize,
    pub mean_z: f64,
    pub rows: Vec<TailRow>,
}

impl TailStudy {
    /// Every `s` satisfies `empirical ≤ bound + band`.
    pub fn within_bounds(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.empirical_tail <= r.hoeffding_bound + r.band)
    }
}

/// Empirical `P(|Z(x, y)| > s)` over independent phase draws, against
/// `2 exp(-2 s² / n)`.
#[allow(clippy::too_many_arguments)]
pub fn z_tail_study(
    body: &ConvexBody,
    n: usize,
    eps: f64,
    x: Vec2,
    y: Vec2,
    trials: usize,
    s_values: &[f64],
    seed: u64,
) -> Result<TailStudy, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::InvalidParameters(
            "trials must be positive".into(),
        ));
    }
    SteinhausSet::unshifted(body.clone(), n, eps)?;
    let zs: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, "tails", t);
            let shifts = (0..n).map(|_| rng::unit_f64(&mut r)).collect();
            let set = SteinhausSet::new(body.clone(), n, eps, shifts).expect("valid shifts");
            endpoint_error(&set, x, y)
        })
        .collect();
    let mean_z = zs.iter().sum::<f64>() / trials as f64;
    let rows = s_values
        .iter()
        .map(|&s| {
            let exceed = zs.iter().filter(|z| z.abs() > s).count();
            let bound = 2.0 * (-2.0 * s * s / n as f64).exp();
            let p = bound.min(1.0);
            TailRow {
                s,
                empirical_tail: exceed as f64 / trials as f64,
                hoeffding_bound: bound,
                band: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(),
            }
        })
        .collect();
    Ok(TailStudy {
        n,
        eps,
        trials,
        mean_z,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthStudy {
    pub n: usize,
    pub eps: f64,
    pub trials: usize,
    pub mean_length: f64,
    /// `n·|Ω|/eps`.
    pub expected: f64,
    /// Largest `|family_length - |Ω|/eps|` over all families and trials.
    pub max_abs_deviation: f64,
    /// `2·diameter`.
    pub per_direction_bound: f64,
    pub violations: usize,
    /// `4·(4D√n)/√trials`.
    pub hoeffding_band: f64,
    /// Empirical `P(|L_U - n|Ω|/eps| > s)` against `2 exp(-2s²/(n(4D)²))`.
    pub tail: Vec<TailRow>,
}

/// Total and per-direction grid length over independent phase draws.
pub fn length_study(
    body: &ConvexBody,
    n: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<LengthStudy, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::InvalidParameters(
            "trials must be positive".into(),
        ));
    }
    SteinhausSet::unshifted(body.clone(), n, eps)?;
    let per_family = body.area() / eps;
    let bound = 2.0 * body.diameter();
    let results: Vec<(f64, f64, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, "length-study", t);
            let shifts = (0..n).map(|_| rng::unit_f64(&mut r)).collect();
            let set = SteinhausSet::new(body.clone(), n, eps, shifts).expect("valid shifts");
            let mut total = 0.0;
            let mut worst: f64 = 0.0;
            let mut violations = 0;
            for k in 0..n {
                let len = set.family_length(k);
                let dev = (len - per_family).abs();
                worst = worst.max(dev);
                if dev > bound {
                    violations += 1;
                }
                total += len;
            }
            (total, worst, violations)
        })
        .collect();
    let expected = n as f64 * per_family;
    let mean_length = results.iter().map(|r| r.0).sum::<f64>() / trials as f64;
    let d = body.diameter();
    let scale = (n as f64 * (eps.recip() * n as f64).ln().max(1.0)).sqrt();
    let tail = [0.05, 0.1, 0.2, 0.4, 0.8]
        .iter()
        .map(|c| {
            let s = c * scale;
            let exceed = results
                .iter()
                .filter(|r| (r.0 - expected).abs() > s)
                .count();
            let hb = 2.0 * (-2.0 * s * s / (n as f64 * (4.0 * d).powi(2))).exp();
            let p = hb.min(1.0);
            TailRow {
                s,
                empirical_tail: exceed as f64 / trials as f64,
                hoeffding_bound: hb,
                band: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(),
            }
        })
        .collect();
    Ok(LengthStudy {
        n,
        eps,
        trials,
        mean_length,
        expected,
        max_abs_deviation: results.iter().map(|r| r.1).fold(0.0, f64::max),
        per_direction_bound: bound,
        violations: results.iter().map(|r| r.2).sum(),
        hoeffding_band: 4.0 * (4.0 * d * (n as f64).sqrt()) / (trials as f64).sqrt(),
        tail,
    })
}

/// Writes `<stem>.dat` and a gnuplot script `<stem>.gp` plotting
/// `sup_estimate` and `max_abs_z` against `L_target` on log-log axes, the
/// first divided by `(ln L)^deflate` when requested.
pub fn write_gnuplot(
    rows: &[SweepRow],
    deflate: Option<f64>,
    stem: &Path,
) -> Result<(), HarnessError> {
    let dat = stem.with_extension("dat");
    let gp = stem.with_extension("gp");
    let c = deflate.unwrap_or(0.0);
    let mut f = std::fs::File::create(&dat)?;
    writeln!(f, "# L_target sup_estimate_deflated max_abs_z n")?;
    for r in rows {
        writeln!(
            f,
            "{} {} {} {}",
            r.l_target,
            r.sup_estimate / r.l_target.ln().powf(c),
            r.max_abs_z,
            r.n
        )?;
    }
    let name = dat
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ylabel = if c != 0.0 {
        format!("sup estimate / (ln L)^{c}")
    } else {
        "sup estimate".to_string()
    };
    let mut g = std::fs::File::create(&gp)?;
    writeln!(g, "set logscale xy")?;
    writeln!(g, "set xlabel 'L'")?;
    writeln!(g, "set ylabel '{ylabel}'")?;
    writeln!(g, "f(x) = a * x**b")?;
    writeln!(g, "a = 1; b = 0.25")?;
    writeln!(g, "fit log(f(x)) '{name}' using 1:(log($2)) via a, b")?;
    writeln!(
        g,
        "plot '{name}' using 1:2 with linespoints title 'sup estimate', \\\n     '{name}' using 1:3 with linespoints title 'max |Z|', \\\n     f(x) title sprintf('fit L^%.3f', b)"
    )?;
    Ok(())
}
