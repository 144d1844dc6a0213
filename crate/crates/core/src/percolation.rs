//! Monte Carlo experiments on the vacant set `W`, the occupied set `B` and
//! the complement `Z` of the line process: segment containment, estimates
//! of `f(r)` and its exponent, surviving ray directions, line detection,
//! the law of the exit time `S`, and the tube events `A ⊇ F ⊇ Q`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::exec::Executor;
use crate::hypgeo::{dist, Geodesic, GeodesicFrame, HPoint, Locator};
use crate::quad::Quadrature;
use crate::rng::RngStream;
use crate::sampler::{
    poisson_count, sample_lines, sample_lines_union, sample_points, Ball, BooleanSample,
    LineSample, ModelParams,
};

/// Extra radius added to point-model windows beyond `reach + R`.
pub const POINT_WINDOW_SLACK: f64 = 0.5;
/// Extra radius added to line-model windows beyond the reach.
pub const LINE_WINDOW_SLACK: f64 = 2.0;
/// Every side of a hyperbolic triangle lies within this distance of the
/// union of the other two (`ln(1 + √2)`, rounded up).
const THIN_TRIANGLE: f64 = 0.882;

/// Which random set an experiment is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `W`, the closure of the complement of the balls.
    Vacant,
    /// `B`, the union of closed balls.
    Occupied,
    /// `Z`, the complement of the union of lines.
    Lines,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Vacant => "vacant",
            Model::Occupied => "occupied",
            Model::Lines => "lines",
        }
    }

    pub fn uses_points(self) -> bool {
        !matches!(self, Model::Lines)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vacant" => Ok(Model::Vacant),
            "occupied" => Ok(Model::Occupied),
            "lines" => Ok(Model::Lines),
            other => Err(format!(
                "unknown model `{other}` (expected vacant, occupied or lines)"
            )),
        }
    }
}

/// The arc `[start, start + length]` of a frame's geodesic.
#[derive(Clone, Copy, Debug)]
pub struct Segment {
    pub frame: GeodesicFrame,
    pub start: f64,
    pub length: f64,
}

impl Segment {
    pub fn new(frame: GeodesicFrame, start: f64, length: f64) -> Result<Self> {
        check(
            length.is_finite() && length >= 0.0,
            "length",
            length,
            "segment length must be finite and nonnegative",
        )?;
        check(start.is_finite(), "start", start, "must be finite")?;
        Ok(Segment {
            frame,
            start,
            length,
        })
    }

    /// The segment of length `length` centered at the frame origin.
    pub fn centered(frame: GeodesicFrame, length: f64) -> Result<Self> {
        Segment::new(frame, -0.5 * length, length)
    }

    /// The segment from `p` to `q`.
    pub fn between(p: HPoint, q: HPoint) -> Result<Self> {
        Segment::new(GeodesicFrame::through(p, q)?, 0.0, dist(p, q))
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn endpoints(&self) -> (HPoint, HPoint) {
        (self.frame.point(self.start), self.frame.point(self.end()))
    }

    /// Distance from `p` to the segment.
    pub fn distance(&self, p: HPoint) -> f64 {
        SegmentGeometry::new(self).distance(p)
    }
}

/// A segment with its inverse chart and endpoints precomputed.
struct SegmentGeometry {
    loc: Locator,
    start: f64,
    end: f64,
    p: HPoint,
    q: HPoint,
}

impl SegmentGeometry {
    fn new(seg: &Segment) -> Self {
        let (p, q) = seg.endpoints();
        SegmentGeometry {
            loc: seg.frame.locator(),
            start: seg.start,
            end: seg.end(),
            p,
            q,
        }
    }

    #[inline]
    fn distance(&self, x: HPoint) -> f64 {
        let (foot, offset) = self.loc.locate(x);
        if foot < self.start {
            dist(x, self.p)
        } else if foot > self.end {
            dist(x, self.q)
        } else {
            offset.abs()
        }
    }

    /// No point strictly within `radius` of the segment.
    fn clear_of(&self, radius: f64, points: &[HPoint]) -> bool {
        points.iter().all(|&x| self.distance(x) >= radius)
    }

    /// The closed balls of radius `radius` around `points` cover the segment.
    fn covered_by(&self, radius: f64, points: &[HPoint]) -> bool {
        let cr = radius.cosh();
        let mut intervals: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|&x| {
                let (foot, offset) = self.loc.locate(x);
                let y = offset.abs();
                if y > radius {
                    return None;
                }
                let half = (cr / y.cosh()).max(1.0).acosh();
                (foot + half >= self.start && foot - half <= self.end)
                    .then_some((foot - half, foot + half))
            })
            .collect();
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut reach = f64::NEG_INFINITY;
        for (lo, hi) in intervals {
            let frontier = reach.max(self.start);
            if lo > frontier {
                break;
            }
            if hi >= frontier {
                reach = reach.max(hi);
            }
            if reach >= self.end {
                return true;
            }
        }
        reach >= self.end
    }
}

fn lines_clear(p: HPoint, q: HPoint, lines: &[Geodesic]) -> bool {
    !lines.iter().any(|g| g.separates(p, q))
}

/// Whether the segment lies in the vacant set: no sample point is strictly
/// within `R` of it.
pub fn segment_in_vacant(seg: &Segment, sample: &BooleanSample) -> Result<bool> {
    let (p, q) = seg.endpoints();
    sample.require_segment(p, q, sample.params.radius)?;
    Ok(SegmentGeometry::new(seg).clear_of(sample.params.radius, &sample.points))
}

/// Whether the segment lies in the union of closed balls.
pub fn segment_in_occupied(seg: &Segment, sample: &BooleanSample) -> Result<bool> {
    let (p, q) = seg.endpoints();
    sample.require_segment(p, q, sample.params.radius)?;
    Ok(SegmentGeometry::new(seg).covered_by(sample.params.radius, &sample.points))
}

/// Whether no sampled line strictly separates the segment's endpoints.
pub fn segment_avoids_lines(seg: &Segment, sample: &LineSample) -> Result<bool> {
    let (p, q) = seg.endpoints();
    sample.require_segment(p, q)?;
    Ok(lines_clear(p, q, &sample.lines))
}

/// A realization of either process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Realization {
    Points(BooleanSample),
    Lines(LineSample),
}

impl Realization {
    /// Sample the process `model` needs on `B(center, radius)`.
    pub fn sample(
        model: Model,
        params: ModelParams,
        center: HPoint,
        radius: f64,
        stream: RngStream,
    ) -> Result<Self> {
        if model.uses_points() {
            Ok(Realization::Points(sample_points(
                params, center, radius, stream,
            )?))
        } else if center == HPoint::ORIGIN {
            Ok(Realization::Lines(sample_lines(
                params.lambda,
                radius,
                stream,
            )?))
        } else {
            let ball = Ball::new(center, radius)?;
            Ok(Realization::Lines(sample_lines_union(
                params.lambda,
                &[ball],
                &mut stream.rng(),
            )?))
        }
    }

    pub fn contains_segment(&self, model: Model, seg: &Segment) -> Result<bool> {
        match (model, self) {
            (Model::Vacant, Realization::Points(s)) => segment_in_vacant(seg, s),
            (Model::Occupied, Realization::Points(s)) => segment_in_occupied(seg, s),
            (Model::Lines, Realization::Lines(s)) => segment_avoids_lines(seg, s),
            _ => Err(mismatch(model)),
        }
    }
}

fn mismatch(model: Model) -> Error {
    Error::InvalidParameter {
        name: "model",
        value: f64::NAN,
        reason: match model {
            Model::Lines => "the lines model needs a line sample",
            _ => "point models need a point sample",
        },
    }
}

/// Window radius for a point model whose queries reach distance `reach`
/// from the window center.
pub fn point_window(reach: f64, radius: f64) -> f64 {
    reach + radius + POINT_WINDOW_SLACK
}

/// Reference-ball radius for the lines model.
pub fn line_window(reach: f64) -> f64 {
    reach + LINE_WINDOW_SLACK
}

/// Weighted least-squares fit of `-log f̂(r) = c + α r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub alpha: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Minimum number of successes for an `r` value to enter the fit.
pub const MIN_FIT_SUCCESSES: u64 = 10;

/// Fit the decay exponent from success counts. Uses `r` values with at
/// least [`MIN_FIT_SUCCESSES`] successes, stopping at the first `r` with
/// none; weights are inverse delta-method variances `(1 - p)/(n p)`,
/// floored at `1/n²`.
pub fn fit_exponent(r_values: &[f64], successes: &[u64], trials: u64) -> Option<ExponentFit> {
    let n = trials as f64;
    let mut rows = Vec::new();
    for (&r, &k) in r_values.iter().zip(successes) {
        if k == 0 {
            break;
        }
        if k < MIN_FIT_SUCCESSES {
            continue;
        }
        let p = k as f64 / n;
        let var = ((1.0 - p) / (n * p)).max(1.0 / (n * n));
        rows.push((r, -p.ln(), 1.0 / var));
    }
    if rows.len() < 2 {
        return None;
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, w) in &rows {
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det <= 0.0 {
        return None;
    }
    let alpha = (sw * sxy - sx * sy) / det;
    let intercept = (sy - alpha * sx) / sw;
    Some(ExponentFit {
        alpha,
        stderr: (sw / det).sqrt(),
        intercept,
        points: rows.len(),
    })
}

/// Per-`r` containment frequencies from independent samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub model: Model,
    pub params: ModelParams,
    pub r_values: Vec<f64>,
    pub estimates: Vec<f64>,
    pub successes: Vec<u64>,
    /// Half-widths of 95% normal-approximation intervals.
    pub half_widths: Vec<f64>,
    pub trials: u64,
    pub alpha_hat: Option<f64>,
    pub alpha_stderr: Option<f64>,
    pub warnings: Vec<String>,
}

/// Estimate `f(r)` for each `r`: segments of length `r` centered at the
/// disk center, nested so that a single sample per trial serves every `r`.
pub fn estimate_f(
    model: Model,
    params: ModelParams,
    r_values: &[f64],
    trials: u64,
    seed: u64,
    exec: &Executor,
) -> Result<ExperimentResult> {
    check(
        trials >= 100,
        "trials",
        trials as f64,
        "need at least 100 trials",
    )?;
    check(
        !r_values.is_empty(),
        "r_values",
        0.0,
        "need at least one r value",
    )?;
    for &r in r_values {
        check(
            r.is_finite() && r >= 0.0,
            "r",
            r,
            "segment length must be finite and nonnegative",
        )?;
    }
    let mut rs = r_values.to_vec();
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    let rmax = *rs.last().expect("nonempty");
    let window = if model.uses_points() {
        point_window(0.5 * rmax, params.radius)
    } else {
        line_window(0.5 * rmax)
    };
    let segments: Vec<Segment> = rs
        .iter()
        .map(|&r| Segment::centered(GeodesicFrame::canonical(), r))
        .collect::<Result<_>>()?;

    let outcomes = exec.map(trials, |i| -> Result<usize> {
        let real = Realization::sample(
            model,
            params,
            HPoint::ORIGIN,
            window,
            RngStream::new(seed, i),
        )?;
        // Containment is monotone along the nested segments, so the number
        // of contained ones determines the whole outcome.
        let mut count = 0;
        for seg in &segments {
            if !real.contains_segment(model, seg)? {
                break;
            }
            count += 1;
        }
        Ok(count)
    });
    let mut successes = vec![0u64; rs.len()];
    for outcome in outcomes {
        for s in successes.iter_mut().take(outcome?) {
            *s += 1;
        }
    }
    Ok(summarize(model, params, rs, successes, trials))
}

fn summarize(
    model: Model,
    params: ModelParams,
    r_values: Vec<f64>,
    successes: Vec<u64>,
    trials: u64,
) -> ExperimentResult {
    let n = trials as f64;
    let estimates: Vec<f64> = successes.iter().map(|&k| k as f64 / n).collect();
    let half_widths = estimates
        .iter()
        .map(|&p| 1.96 * (p * (1.0 - p) / n).sqrt())
        .collect();
    let mut warnings = Vec::new();
    if let Some(k) = successes.iter().position(|&s| s == 0) {
        warnings.push(format!(
            "no trial succeeded at r = {}; the exponent is fitted on the smaller r values",
            r_values[k]
        ));
    }
    let thin: Vec<String> = r_values
        .iter()
        .zip(&successes)
        .filter(|(_, &k)| k > 0 && k < MIN_FIT_SUCCESSES)
        .map(|(r, _)| r.to_string())
        .collect();
    if !thin.is_empty() {
        warnings.push(format!(
            "fewer than {MIN_FIT_SUCCESSES} successes at r = {}; excluded from the fit",
            thin.join(", ")
        ));
    }
    let fit = fit_exponent(&r_values, &successes, trials);
    if fit.is_none() {
        warnings.push("fewer than two usable r values; no exponent fitted".into());
    }
    ExperimentResult {
        model,
        params,
        r_values,
        estimates,
        successes,
        half_widths,
        trials,
        alpha_hat: fit.map(|f| f.alpha),
        alpha_stderr: fit.map(|f| f.stderr),
        warnings,
    }
}

/// Directions `2π i / n_directions` whose ray of length `r` from the disk
/// center lies in the set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySurvival {
    pub r: f64,
    pub n_directions: u32,
    pub surviving: Vec<u32>,
}

impl RaySurvival {
    pub fn angle(&self, i: u32) -> f64 {
        2.0 * PI * i as f64 / self.n_directions as f64
    }

    pub fn is_empty(&self) -> bool {
        self.surviving.is_empty()
    }

    /// Maximal runs of consecutive surviving indices, wrapped around the
    /// circle, as `(first, len)`.
    pub fn runs(&self) -> Vec<(u32, u32)> {
        index_runs(&self.surviving, self.n_directions)
    }
}

fn index_runs(idx: &[u32], n: u32) -> Vec<(u32, u32)> {
    let mut runs: Vec<(u32, u32)> = Vec::new();
    for &i in idx {
        match runs.last_mut() {
            Some((first, len)) if *first + *len == i => *len += 1,
            _ => runs.push((i, 1)),
        }
    }
    if runs.len() > 1 {
        let (first, len) = runs[0];
        let last = *runs.last().expect("nonempty");
        if first == 0 && last.0 + last.1 == n {
            runs.pop();
            runs[0] = (last.0, last.1 + len);
        }
    }
    runs
}

/// Half-width of the set of ray directions (relative to the point's polar
/// angle) whose ray of length `r` from the center passes strictly within
/// `radius` of a point at distance `d` from the center. `None` if no
/// direction is affected; `Some(π)` if all are.
pub fn blocked_half_width(d: f64, r: f64, radius: f64) -> Option<f64> {
    if d < radius {
        return Some(PI);
    }
    if d >= r + radius || r == 0.0 {
        return None;
    }
    // Perpendicular distance `radius` to the full ray line.
    let sin1 = (radius.sinh() / d.sinh()).min(1.0);
    let delta1 = sin1.asin();
    if d.tanh() * delta1.cos() <= r.tanh() {
        return Some(delta1);
    }
    // Otherwise the nearest point is the ray's tip:
    // 1 - cos Δ = (cosh R - cosh(d - r)) / (sinh d sinh r).
    let num = 2.0 * (0.5 * (radius + d - r)).sinh() * (0.5 * (radius - d + r)).sinh();
    let half_sq = num / (2.0 * d.sinh() * r.sinh());
    Some(2.0 * half_sq.clamp(0.0, 1.0).sqrt().asin())
}

/// For a line at distance `p` from the center with foot direction `m`:
/// half-width of the ray directions, around `m`, that it crosses before
/// arclength `r`, or `None`.
pub fn line_blocked_half_width(p: f64, r: f64) -> Option<f64> {
    if p >= r {
        return None;
    }
    // 1 - cos h = 1 - tanh p / tanh r = sinh(r - p) / (sinh r cosh p)
    let half_sq = (r - p).sinh() / (2.0 * r.sinh() * p.cosh());
    Some(2.0 * half_sq.clamp(0.0, 1.0).sqrt().asin())
}

/// Distance from the disk center and foot direction of a line.
pub fn line_polar(g: &Geodesic) -> (f64, f64) {
    let (a, b) = g.disk_angles();
    let gap = (b - a).rem_euclid(2.0 * PI);
    let (short, from) = if gap <= PI {
        (gap, a)
    } else {
        (2.0 * PI - gap, b)
    };
    // cosh p = 1 / sin(short / 2)
    let p = (1.0 / (0.5 * short).sin()).max(1.0).acosh();
    (p, (from + 0.5 * short).rem_euclid(2.0 * PI))
}

/// Inclusive index ranges of grid directions strictly within `half` of
/// `center` on the circle.
fn index_window(center: f64, half: f64, n: u32) -> ([(u32, u32); 2], usize) {
    let nf = n as f64;
    if half >= PI {
        return ([(0, n - 1), (0, 0)], 1);
    }
    let step = 2.0 * PI / nf;
    let lo = ((center - half) / step).floor() as i64 + 1;
    let hi = ((center + half) / step).ceil() as i64 - 1;
    if hi < lo {
        return ([(0, 0), (0, 0)], 0);
    }
    if hi - lo + 1 >= n as i64 {
        return ([(0, n - 1), (0, 0)], 1);
    }
    let n = n as i64;
    let l = lo.rem_euclid(n);
    let h = hi.rem_euclid(n);
    if l <= h {
        ([(l as u32, h as u32), (0, 0)], 1)
    } else {
        ([(l as u32, (n - 1) as u32), (0, h as u32)], 2)
    }
}

/// Incremental ray-survival computation over a direction grid. Objects are
/// added in stages; after a stage whose points all lie within polar
/// distance `b`, coverage of rays up to arclength `b - R` is final.
struct RayEngine {
    model: Model,
    r: f64,
    radius: f64,
    n: u32,
    cand: Vec<u32>,
    alive: Vec<bool>,
    // occupied model: covered prefix length per candidate (-∞ before the
    // center is covered) and intervals not yet adjacent to it
    cover: Vec<f64>,
    pending: Vec<Vec<(f64, f64)>>,
}

impl RayEngine {
    fn new(model: Model, r: f64, radius: f64, n: u32) -> Self {
        let cand: Vec<u32> = (0..n).collect();
        let len = cand.len();
        let occupied = model == Model::Occupied;
        RayEngine {
            model,
            r,
            radius,
            n,
            cand,
            alive: vec![true; len],
            cover: if occupied {
                vec![f64::NEG_INFINITY; len]
            } else {
                Vec::new()
            },
            pending: if occupied {
                vec![Vec::new(); len]
            } else {
                Vec::new()
            },
        }
    }

    fn step(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    fn for_positions(&self, center: f64, half: f64, mut f: impl FnMut(usize)) {
        let (ranges, k) = index_window(center, half, self.n);
        for &(lo, hi) in &ranges[..k] {
            let start = self.cand.partition_point(|&i| i < lo);
            for pos in start..self.cand.len() {
                if self.cand[pos] > hi {
                    break;
                }
                f(pos);
            }
        }
    }

    fn add_point(&mut self, d: f64, psi: f64) {
        let Some(half) = blocked_half_width(d, self.r, self.radius) else {
            return;
        };
        match self.model {
            Model::Vacant => {
                let mut dead = Vec::new();
                self.for_positions(psi, half, |pos| dead.push(pos));
                for pos in dead {
                    self.alive[pos] = false;
                }
            }
            Model::Occupied => {
                let (sd, td, cr) = (d.sinh(), d.tanh(), self.radius.cosh());
                let step = self.step();
                let mut hits = Vec::new();
                self.for_positions(psi, half, |pos| hits.push(pos));
                for pos in hits {
                    if !self.alive[pos] || self.cover[pos] >= self.r {
                        continue;
                    }
                    let delta = self.cand[pos] as f64 * step - psi;
                    let y = (sd * delta.sin().abs()).asinh();
                    if y > self.radius {
                        continue;
                    }
                    let c = delta.cos();
                    let foot = if (td * c).abs() < 0.5 {
                        (td * c).atanh()
                    } else {
                        c.signum() * (d.cosh() / y.cosh()).max(1.0).acosh()
                    };
                    let l = (cr / y.cosh()).max(1.0).acosh();
                    if l > 0.0 {
                        self.absorb(pos, foot - l, foot + l);
                    }
                }
            }
            Model::Lines => unreachable!("lines are added with add_line"),
        }
    }

    fn absorb(&mut self, pos: usize, lo: f64, hi: f64) {
        let c = self.cover[pos];
        let frontier = c.max(0.0);
        if lo <= frontier && hi >= frontier {
            self.cover[pos] = c.max(hi);
        } else if lo > frontier {
            self.pending[pos].push((lo, hi));
        }
    }

    fn add_line_polar(&mut self, p: f64, m: f64) {
        if let Some(half) = line_blocked_half_width(p, self.r) {
            let mut dead = Vec::new();
            self.for_positions(m, half, |pos| dead.push(pos));
            for pos in dead {
                self.alive[pos] = false;
            }
        }
    }

    /// Settle rays up to arclength `settled` and drop dead candidates.
    fn finish_stage(&mut self, settled: f64) {
        if self.model == Model::Occupied {
            let need = settled.min(self.r);
            for pos in 0..self.cand.len() {
                if !self.alive[pos] {
                    continue;
                }
                let mut pend = std::mem::take(&mut self.pending[pos]);
                if !pend.is_empty() {
                    pend.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut rest = Vec::new();
                    for (lo, hi) in pend {
                        let c = self.cover[pos];
                        let frontier = c.max(0.0);
                        if lo <= frontier {
                            if hi >= frontier {
                                self.cover[pos] = c.max(hi);
                            }
                        } else {
                            rest.push((lo, hi));
                        }
                    }
                    self.pending[pos] = rest;
                }
                if need >= 0.0 && self.cover[pos] < need {
                    self.alive[pos] = false;
                }
            }
        }
        let mut keep = 0;
        for pos in 0..self.cand.len() {
            if self.alive[pos] {
                self.cand.swap(keep, pos);
                if self.model == Model::Occupied {
                    self.cover.swap(keep, pos);
                    self.pending.swap(keep, pos);
                }
                keep += 1;
            }
        }
        self.cand.truncate(keep);
        self.alive.truncate(keep);
        self.alive.fill(true);
        if self.model == Model::Occupied {
            self.cover.truncate(keep);
            self.pending.truncate(keep);
        }
    }

    fn into_survival(mut self) -> RaySurvival {
        self.finish_stage(f64::INFINITY);
        RaySurvival {
            r: self.r,
            n_directions: self.n,
            surviving: self.cand,
        }
    }
}

fn check_rays(r: f64, n_directions: u32) -> Result<()> {
    check(
        r.is_finite() && r > 0.0,
        "r",
        r,
        "ray length must be positive",
    )?;
    check(
        n_directions >= 8,
        "n_directions",
        n_directions as f64,
        "need at least 8 directions",
    )
}

/// Surviving directions on a given realization.
pub fn ray_survival(
    model: Model,
    real: &Realization,
    r: f64,
    n_directions: u32,
) -> Result<RaySurvival> {
    check_rays(r, n_directions)?;
    // Objects are fed nearest first, in stages of ANNULUS, so that dead
    // candidates drop out early and later objects only visit survivors.
    match (model, real) {
        (Model::Lines, Realization::Lines(s)) => {
            s.require_ball(HPoint::ORIGIN, r)?;
            let mut polar: Vec<(f64, f64)> = s.lines.iter().map(line_polar).collect();
            polar.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut e = RayEngine::new(model, r, 1.0, n_directions);
            let mut edge = ANNULUS;
            for (p, m) in polar {
                if p >= r || e.cand.is_empty() {
                    break;
                }
                if p > edge {
                    e.finish_stage(edge);
                    edge = ANNULUS * (p / ANNULUS).ceil();
                }
                e.add_line_polar(p, m);
            }
            Ok(e.into_survival())
        }
        (Model::Vacant | Model::Occupied, Realization::Points(s)) => {
            let radius = s.params.radius;
            s.require_ball(HPoint::ORIGIN, r + radius)?;
            let mut polar: Vec<(f64, f64)> = s.points.iter().map(|p| p.polar()).collect();
            polar.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut e = RayEngine::new(model, r, radius, n_directions);
            let mut edge = ANNULUS;
            for (d, psi) in polar {
                if d >= r + radius || e.cand.is_empty() {
                    break;
                }
                if d > edge {
                    e.finish_stage(edge - radius);
                    edge = ANNULUS * (d / ANNULUS).ceil();
                }
                e.add_point(d, psi);
            }
            Ok(e.into_survival())
        }
        _ => Err(mismatch(model)),
    }
}

/// Width of the annuli used by the lazy point sampler.
const ANNULUS: f64 = 0.5;

/// Angular intervals `[θ_i - m, θ_i + m]` around candidate directions,
/// merged; returns the intervals (within `[-m, 2π + m)`, not overlapping
/// modulo 2π) and their total length.
fn dilate(cand: &[u32], n: u32, m: f64) -> (Vec<(f64, f64)>, f64) {
    let step = 2.0 * PI / n as f64;
    if m >= PI || cand.is_empty() {
        let full = if cand.is_empty() {
            Vec::new()
        } else {
            vec![(0.0, 2.0 * PI)]
        };
        let len = if cand.is_empty() { 0.0 } else { 2.0 * PI };
        return (full, len);
    }
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &i in cand {
        let c = i as f64 * step;
        match out.last_mut() {
            Some(last) if c - m <= last.1 => last.1 = c + m,
            _ => out.push((c - m, c + m)),
        }
    }
    let first_start = out[0].0;
    let last = out.len() - 1;
    if out[last].1 - 2.0 * PI >= first_start {
        if last == 0 {
            return (vec![(0.0, 2.0 * PI)], 2.0 * PI);
        }
        out[last].1 = first_start + 2.0 * PI;
        if out[last].1 <= out[last].0 {
            out.pop();
        }
    }
    let total: f64 = out.iter().map(|(a, b)| b - a).sum();
    if total >= 2.0 * PI {
        return (vec![(0.0, 2.0 * PI)], 2.0 * PI);
    }
    (out, total)
}

/// Draw the Poisson points that can reach any candidate ray, annulus by
/// annulus, skipping directions already blocked. `pad` enlarges the region
/// by that much beyond `R` (used to keep every point near chords between
/// ray tips). Returns the engine before its final settlement and the drawn
/// points.
fn lazy_point_rays<G: Rng + ?Sized>(
    model: Model,
    params: ModelParams,
    r: f64,
    n: u32,
    pad: f64,
    rng: &mut G,
) -> (RayEngine, Vec<HPoint>) {
    let radius = params.radius;
    let mut engine = RayEngine::new(model, r, radius, n);
    let mut kept = Vec::new();
    let outer = r + radius + pad;
    let reach = radius + pad;
    let step = 2.0 * PI / n as f64;
    let mut a = 0.0;
    while a < outer && !engine.cand.is_empty() {
        let b = (a + ANNULUS).min(outer);
        let m = if a <= reach {
            PI
        } else {
            (reach.sinh() / a.sinh()).min(1.0).asin() + step
        };
        let (arcs, total) = dilate(&engine.cand, n, m);
        let (ca, cb) = (a.cosh(), b.cosh());
        let count = poisson_count(params.lambda * (cb - ca) * total, rng);
        let mut cum = Vec::with_capacity(arcs.len());
        let mut acc = 0.0;
        for &(lo, hi) in &arcs {
            acc += hi - lo;
            cum.push(acc);
        }
        for _ in 0..count {
            let u: f64 = rng.random::<f64>() * total;
            let k = cum.partition_point(|&c| c < u).min(arcs.len() - 1);
            let before = if k == 0 { 0.0 } else { cum[k - 1] };
            let psi = (arcs[k].0 + (u - before)).rem_euclid(2.0 * PI);
            let d = (ca + rng.random::<f64>() * (cb - ca)).acosh();
            engine.add_point(d, psi);
            kept.push(HPoint::from_polar(d, psi));
        }
        engine.finish_stage(b - radius);
        a = b;
    }
    (engine, kept)
}

/// Surviving directions of a fresh sample. Point models draw only the part
/// of the process that can reach a surviving candidate ray, which makes
/// long rays affordable; the law of the result is that of
/// [`ray_survival`] on a full sample.
pub fn surviving_directions(
    model: Model,
    params: ModelParams,
    r: f64,
    n_directions: u32,
    stream: RngStream,
) -> Result<RaySurvival> {
    check_rays(r, n_directions)?;
    if model == Model::Lines {
        let s = sample_lines(params.lambda, r, stream)?;
        return ray_survival(model, &Realization::Lines(s), r, n_directions);
    }
    let (engine, _) = lazy_point_rays(model, params, r, n_directions, 0.0, &mut stream.rng());
    Ok(engine.into_survival())
}

/// A pair of surviving directions whose tips span a chord of the set that
/// passes within `s` of the center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineDetection {
    pub found: bool,
    /// Direction indices of the two rays.
    pub witness: Option<(u32, u32)>,
    pub survivors: usize,
    pub chords_tested: usize,
}

/// Default grid for [`detect_line_through_ball`].
pub const DETECT_DIRECTIONS: u32 = 1 << 20;
/// Cap on chord containment tests per sample.
const MAX_CHORDS: usize = 4096;

/// Look for a geodesic through `B(o, s)` certified by two surviving rays of
/// length `r` whose tips are joined by a chord contained in the set. One
/// representative direction per run of consecutive survivors is tried
/// against the runs facing it.
pub fn detect_line_through_ball(
    model: Model,
    params: ModelParams,
    s: f64,
    r: f64,
    n_directions: u32,
    stream: RngStream,
) -> Result<LineDetection> {
    check(s > 0.0 && s < r, "s", s, "need 0 < s < r")?;
    check_rays(r, n_directions)?;
    let mut rng = stream.rng();
    let (survival, lines, points) = if model == Model::Lines {
        let s = crate::sampler::sample_lines_with(params.lambda, r, &mut rng)?;
        let surv = ray_survival(model, &Realization::Lines(s.clone()), r, n_directions)?;
        (surv, s.lines, Vec::new())
    } else {
        let (engine, pts) =
            lazy_point_rays(model, params, r, n_directions, THIN_TRIANGLE, &mut rng);
        (engine.into_survival(), Vec::new(), pts)
    };
    let n = n_directions;
    let mut out = LineDetection {
        found: false,
        witness: None,
        survivors: survival.surviving.len(),
        chords_tested: 0,
    };
    if survival.is_empty() {
        return Ok(out);
    }
    // Tips at angle θ apart span a chord within s of o iff
    // cos(θ/2) < tanh s / tanh r.
    let tol = 2.0 * (s.tanh() / r.tanh()).asin();
    let tol_idx = (tol / survival.angle(1)).floor() as i64;
    let runs = survival.runs();
    let idx = &survival.surviving;
    let chord_ok = |i: u32, j: u32| -> bool {
        let p = HPoint::from_polar(r, survival.angle(i));
        let q = HPoint::from_polar(r, survival.angle(j));
        let Ok(seg) = Segment::between(p, q) else {
            return false;
        };
        let geo = SegmentGeometry::new(&seg);
        if geo.distance(HPoint::ORIGIN) >= s {
            return false;
        }
        match model {
            Model::Lines => lines_clear(p, q, &lines),
            Model::Vacant => geo.clear_of(params.radius, &points),
            Model::Occupied => geo.covered_by(params.radius, &points),
        }
    };
    for &(first, len) in &runs {
        let rep = ((first as u64 + len as u64 / 2) % n as u64) as i64;
        let target = rep + n as i64 / 2;
        // survivors in (target - tol_idx, target + tol_idx), nearest first
        let mut best: Vec<(i64, u32)> = Vec::new();
        let lo = target - tol_idx;
        let hi = target + tol_idx;
        for k in [lo.div_euclid(n as i64), hi.div_euclid(n as i64)] {
            let base = k * n as i64;
            let a = (lo - base).clamp(0, n as i64 - 1) as u32;
            let b = (hi - base).clamp(0, n as i64 - 1) as u32;
            let start = idx.partition_point(|&i| i < a);
            for &j in &idx[start..] {
                if j > b {
                    break;
                }
                let off = (j as i64 + base - target).abs();
                if off <= tol_idx && !best.iter().any(|&(_, jj)| jj == j) {
                    best.push((off, j));
                }
            }
        }
        // one pick per facing run: the survivor nearest the antipode
        best.sort();
        let mut seen_runs: Vec<usize> = Vec::new();
        for (_, j) in best {
            let run_of_j = runs
                .iter()
                .position(|&(f, l)| {
                    let rel = (j as i64 - f as i64).rem_euclid(n as i64);
                    rel < l as i64
                })
                .expect("survivor belongs to a run");
            if seen_runs.contains(&run_of_j) {
                continue;
            }
            seen_runs.push(run_of_j);
            out.chords_tested += 1;
            if chord_ok(rep as u32, j) {
                out.found = true;
                out.witness = Some((rep as u32, j));
                return Ok(out);
            }
            if out.chords_tested >= MAX_CHORDS {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// Empirical law of the exit time `S` of the balls covering `γ(0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SDistribution {
    pub params: ModelParams,
    pub trials: u64,
    /// Sorted finite values of `S`, all in `(0, 2R]`.
    pub values: Vec<f64>,
    /// Trials with no ball containing `γ(0)` (`S = -∞`).
    pub empty: u64,
}

impl SDistribution {
    /// `P̂(0 < S ≤ t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.values.partition_point(|&v| v <= t) as f64 / self.trials as f64
    }

    pub fn prob_positive(&self) -> f64 {
        self.values.len() as f64 / self.trials as f64
    }

    /// Kolmogorov distance `sup_t |Ĝ(t) - G(t)|`, evaluated exactly at the
    /// jumps of the empirical distribution function.
    pub fn sup_distance(&self, q: &Quadrature) -> Result<f64> {
        let radius = self.params.radius;
        let lambda = self.params.lambda;
        let n = self.trials as f64;
        let mut area = 0.0;
        let mut prev = 0.0;
        let mut worst: f64 = 0.0;
        for (k, &t) in self.values.iter().enumerate() {
            // area(Q_t) = 4 ∫₀^{t/2} w(s) ds, accumulated between jumps
            area += 4.0
                * q.integrate(
                    |s| crate::analytic::ball_half_width(s, radius),
                    0.5 * prev,
                    0.5 * t,
                )?;
            prev = t;
            let g = -(-lambda * area).exp_m1();
            worst = worst
                .max((k as f64 / n - g).abs())
                .max(((k + 1) as f64 / n - g).abs());
        }
        let g_end = crate::analytic::prob_start_covered(self.params);
        Ok(worst.max((self.values.len() as f64 / n - g_end).abs()))
    }
}

/// The exit time for one sample: over points `x` whose ball contains
/// `γ(0)` in its interior (`u₋ < 0 < u₊`), the least `u₊`.
pub fn exit_time(frame: &GeodesicFrame, radius: f64, points: &[HPoint]) -> Option<f64> {
    let loc = frame.locator();
    let cr = radius.cosh();
    points
        .iter()
        .filter_map(|&x| {
            let (foot, offset) = loc.locate(x);
            let y = offset.abs();
            if y >= radius {
                return None;
            }
            let half = (cr / y.cosh()).acosh();
            (foot - half < 0.0 && 0.0 < foot + half).then_some(foot + half)
        })
        .min_by(f64::total_cmp)
}

pub fn estimate_s_cdf(
    params: ModelParams,
    trials: u64,
    seed: u64,
    exec: &Executor,
) -> Result<SDistribution> {
    check(
        trials >= 1,
        "trials",
        trials as f64,
        "need at least one trial",
    )?;
    let frame = GeodesicFrame::canonical();
    // X₀ lies in B(γ(0), R)
    let outcomes = exec.map(trials, |i| -> Result<Option<f64>> {
        let s = sample_points(
            params,
            HPoint::ORIGIN,
            params.radius,
            RngStream::new(seed, i),
        )?;
        Ok(exit_time(&frame, params.radius, &s.points))
    });
    let mut values = Vec::new();
    let mut empty = 0;
    for o in outcomes {
        match o? {
            Some(v) => values.push(v),
            None => empty += 1,
        }
    }
    values.sort_by(f64::total_cmp);
    Ok(SDistribution {
        params,
        trials,
        values,
        empty,
    })
}

/// The convex hull `[x, y]_s` of `B(x, s) ∪ B(y, s)` in Fermi coordinates
/// along the segment from `x` to `y`.
#[derive(Clone, Copy, Debug)]
pub struct Tube {
    pub frame: GeodesicFrame,
    pub length: f64,
    pub s: f64,
    /// `tanh` of the offset of the bitangent geodesics at the midpoint.
    tanh_h0: f64,
    /// Arclength of the tangent points' feet measured from `x`.
    tangent_foot: f64,
}

impl Tube {
    pub fn new(x: HPoint, y: HPoint, s: f64) -> Result<Self> {
        check(s > 0.0, "s", s, "tube radius must be positive")?;
        let frame = GeodesicFrame::through(x, y)?;
        let d = dist(x, y);
        check(d > 2.0 * s, "d(x, y)", d, "balls must be disjoint")?;
        let half = 0.5 * d;
        // bitangent at offset h0 over the midpoint: sinh s = sinh h0 cosh(d/2)
        let h0 = (s.sinh() / half.cosh()).asinh();
        // its tangent point sits over tanh(t) = tanh(d/2) / cosh² h0 from the midpoint
        let t = (half.tanh() / (h0.cosh() * h0.cosh())).atanh();
        Ok(Tube {
            frame,
            length: d,
            s,
            tanh_h0: h0.tanh(),
            tangent_foot: half - t,
        })
    }

    /// Largest `|offset|` of the hull at foot `t`, or `None` outside it.
    pub fn half_width(&self, t: f64) -> Option<f64> {
        let cs = self.s.cosh();
        let ball = |u: f64| -> Option<f64> {
            let c = u.cosh();
            (c < cs).then(|| (cs / c).acosh())
        };
        let mut w = ball(t)
            .into_iter()
            .chain(ball(t - self.length))
            .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))));
        if t >= self.tangent_foot && t <= self.length - self.tangent_foot {
            let u = (self.tanh_h0 * (t - 0.5 * self.length).cosh()).min(1.0 - 1e-16);
            let bt = u.atanh();
            w = Some(w.map_or(bt, |v| v.max(bt)));
        }
        w
    }

    pub fn contains(&self, p: HPoint) -> bool {
        let (t, y) = self.frame.locate(p);
        self.half_width(t).is_some_and(|w| y.abs() < w)
    }

    /// Distance from `p` to the hull (zero inside).
    pub fn distance(&self, p: HPoint) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let x = self.frame.point(0.0);
        let y = self.frame.point(self.length);
        let mut best = (dist(p, x) - self.s).min(dist(p, y) - self.s);
        let (ta, tb) = (self.tangent_foot, self.length - self.tangent_foot);
        if tb > ta {
            for sign in [1.0, -1.0] {
                let w = self.half_width(ta).unwrap_or(0.0);
                let a = self.frame.offset_point(ta, sign * w);
                let b = self.frame.offset_point(tb, sign * w);
                if let Ok(seg) = Segment::between(a, b) {
                    best = best.min(seg.distance(p));
                }
            }
        }
        best.max(0.0)
    }
}

/// Estimates of `P(A)`, `f` and `P(Q)` for a tube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub p_a: f64,
    pub f: f64,
    pub p_q: f64,
    pub half_width_a: f64,
    pub half_width_f: f64,
    pub half_width_q: f64,
    pub trials: u64,
    pub mesh: f64,
    pub nodes: usize,
}

/// Estimate `P(A(x, y, s))`, `f(d(x, y))` and `P(Q(x, y, s))`.
///
/// `F` is the exact containment of `[x, y]`. `Q` is exact for the vacant
/// and lines models (distance to the hull, resp. no line meeting it); for
/// the occupied model every node of the tube grid must be covered. `A` is
/// a 4-neighbor flood fill of the tube grid (mesh `s/8`). Since
/// `Q ⊆ F ⊆ A`, the reported events are `Q ∧ F` and `A ∨ F`, keeping the
/// ordering exact per sample.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_aq(
    x: HPoint,
    y: HPoint,
    s: f64,
    model: Model,
    params: ModelParams,
    trials: u64,
    seed: u64,
    exec: &Executor,
) -> Result<Sandwich> {
    check(
        trials >= 1,
        "trials",
        trials as f64,
        "need at least one trial",
    )?;
    let tube = Tube::new(x, y, s)?;
    let d = tube.length;
    let mesh = s / 8.0;
    // grid nodes: foot k·mesh - s, offset j·mesh
    let cols = ((d + 2.0 * s) / mesh).round() as i64;
    let rows = (s / mesh).round() as i64;
    let width = (2 * rows + 1) as usize;
    let mut node_pt: Vec<Option<HPoint>> = Vec::with_capacity((cols as usize + 1) * width);
    let mut in_bx = Vec::new();
    let mut in_by = Vec::new();
    for k in 0..=cols {
        let t = -s + k as f64 * mesh;
        let w = tube.half_width(t);
        for j in -rows..=rows {
            let off = j as f64 * mesh;
            let idx = node_pt.len();
            match w {
                Some(w) if off.abs() < w => {
                    let p = tube.frame.offset_point(t, off);
                    if dist(p, x) < s {
                        in_bx.push(idx);
                    }
                    if dist(p, y) < s {
                        in_by.push(idx);
                    }
                    node_pt.push(Some(p));
                }
                _ => node_pt.push(None),
            }
        }
    }
    let nodes = node_pt.iter().filter(|p| p.is_some()).count();
    let central = Segment::new(tube.frame, 0.0, d)?;
    let mid = tube.frame.point(0.5 * d);
    let reach = 0.5 * d + s;
    let window = if model.uses_points() {
        point_window(reach, params.radius)
    } else {
        reach + POINT_WINDOW_SLACK
    };
    let radius = params.radius;

    let outcomes = exec.map(trials, |i| -> Result<(bool, bool, bool)> {
        let real = Realization::sample(model, params, mid, window, RngStream::new(seed, i))?;
        let f = real.contains_segment(model, &central)?;
        // A needs the grid only when F fails; Q is only reported jointly with F
        let (open, q): (Option<Vec<bool>>, bool) = match &real {
            Realization::Points(sample) => {
                let geo = SegmentGeometry::new(&central);
                let near: Vec<HPoint> = sample
                    .points
                    .iter()
                    .copied()
                    .filter(|&p| geo.distance(p) < radius + s + 1e-9)
                    .collect();
                let vacant = model == Model::Vacant;
                let open = (!f || !vacant).then(|| {
                    node_pt
                        .iter()
                        .map(|p| match p {
                            None => false,
                            Some(p) if vacant => !near.iter().any(|&c| dist(c, *p) < radius),
                            Some(p) => near.iter().any(|&c| dist(c, *p) <= radius),
                        })
                        .collect::<Vec<bool>>()
                });
                let q = f
                    && match (vacant, &open) {
                        (true, _) => near.iter().all(|&c| tube.distance(c) >= radius),
                        (false, Some(open)) => {
                            node_pt.iter().zip(open).all(|(p, &o)| p.is_none() || o)
                        }
                        (false, None) => unreachable!("occupied grid is always computed"),
                    };
                (open, q)
            }
            Realization::Lines(sample) => {
                let open = (!f).then(|| node_pt.iter().map(|p| p.is_some()).collect());
                let q = f
                    && sample
                        .lines
                        .iter()
                        .all(|g| g.distance(x) >= s && g.distance(y) >= s && !g.separates(x, y));
                (open, q)
            }
        };
        let lines: &[Geodesic] = match &real {
            Realization::Lines(s) => &s.lines,
            _ => &[],
        };
        let a = f
            || flood_connects(
                &node_pt,
                open.as_deref().expect("grid computed when F fails"),
                width,
                &in_bx,
                &in_by,
                lines,
            );
        Ok((a, f, q))
    });
    let (mut na, mut nf, mut nq) = (0u64, 0u64, 0u64);
    for o in outcomes {
        let (a, f, q) = o?;
        na += a as u64;
        nf += f as u64;
        nq += q as u64;
    }
    let n = trials as f64;
    let hw = |k: u64| {
        let p = k as f64 / n;
        1.96 * (p * (1.0 - p) / n).sqrt()
    };
    Ok(Sandwich {
        p_a: na as f64 / n,
        f: nf as f64 / n,
        p_q: nq as f64 / n,
        half_width_a: hw(na),
        half_width_f: hw(nf),
        half_width_q: hw(nq),
        trials,
        mesh,
        nodes,
    })
}

/// Whether some 4-connected component of open grid nodes meets both
/// `from` and `to`. Neighboring nodes separated by a line are not joined.
fn flood_connects(
    node_pt: &[Option<HPoint>],
    open: &[bool],
    width: usize,
    from: &[usize],
    to: &[usize],
    lines: &[Geodesic],
) -> bool {
    let mut target = vec![false; node_pt.len()];
    for &t in to {
        target[t] = true;
    }
    let mut seen = vec![false; node_pt.len()];
    let mut stack: Vec<usize> = from.iter().copied().filter(|&i| open[i]).collect();
    for &i in &stack {
        seen[i] = true;
    }
    while let Some(i) = stack.pop() {
        if target[i] {
            return true;
        }
        let row = i % width;
        let mut nbrs = [usize::MAX; 4];
        if i >= width {
            nbrs[0] = i - width;
        }
        if i + width < node_pt.len() {
            nbrs[1] = i + width;
        }
        if row > 0 {
            nbrs[2] = i - 1;
        }
        if row + 1 < width {
            nbrs[3] = i + 1;
        }
        for j in nbrs {
            if j == usize::MAX || seen[j] || !open[j] {
                continue;
            }
            if !lines.is_empty() {
                let (p, q) = (node_pt[i].expect("open"), node_pt[j].expect("open"));
                if !lines_clear(p, q, lines) {
                    continue;
                }
            }
            seen[j] = true;
            stack.push(j);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mp(l: f64, r: f64) -> ModelParams {
        ModelParams::new(l, r).unwrap()
    }

    fn one_point_sample(p: HPoint, radius: f64) -> BooleanSample {
        BooleanSample::from_points(mp(1.0, radius), Ball::centered(20.0).unwrap(), vec![p]).unwrap()
    }

    #[test]
    fn vacant_threshold_at_radius() {
        let f = GeodesicFrame::canonical();
        let seg = Segment::centered(f, 2.0).unwrap();
        let near = one_point_sample(f.offset_point(0.0, 1.0 - 1e-3), 1.0);
        let far = one_point_sample(f.offset_point(0.0, 1.0 + 1e-3), 1.0);
        assert!(!segment_in_vacant(&seg, &near).unwrap());
        assert!(segment_in_vacant(&seg, &far).unwrap());
        let empty =
            BooleanSample::from_points(mp(1.0, 1.0), Ball::centered(5.0).unwrap(), vec![]).unwrap();
        assert!(segment_in_vacant(&seg, &empty).unwrap());
        assert!(!segment_in_occupied(&seg, &empty).unwrap());
    }

    #[test]
    fn vacant_uses_endpoint_distance_beyond_the_ends() {
        let f = GeodesicFrame::canonical();
        let seg = Segment::new(f, 0.0, 1.0).unwrap();
        let p = f.offset_point(1.5, 0.2);
        let d = dist(p, f.point(1.0));
        assert_abs_diff_eq!(seg.distance(p), d, epsilon = 1e-12);
        assert!(d > 0.5);
    }

    #[test]
    fn occupied_single_ball_on_the_line() {
        let f = GeodesicFrame::canonical();
        let sample = one_point_sample(f.point(0.0), 1.0);
        for (r, covered) in [(1.9, true), (2.1, false)] {
            let seg = Segment::centered(f, r).unwrap();
            assert_eq!(segment_in_occupied(&seg, &sample).unwrap(), covered);
        }
    }

    #[test]
    fn occupied_detects_small_gap() {
        let f = GeodesicFrame::canonical();
        let pts = vec![f.point(-1.0 - 5e-4), f.point(1.0 + 5e-4)];
        let s =
            BooleanSample::from_points(mp(1.0, 1.0), Ball::centered(20.0).unwrap(), pts).unwrap();
        let seg = Segment::centered(f, 3.0).unwrap();
        assert!(!segment_in_occupied(&seg, &s).unwrap());
        let pts = vec![f.point(-1.0 + 5e-4), f.point(1.0 - 5e-4)];
        let s =
            BooleanSample::from_points(mp(1.0, 1.0), Ball::centered(20.0).unwrap(), pts).unwrap();
        assert!(segment_in_occupied(&seg, &s).unwrap());
    }

    #[test]
    fn window_violation_is_reported() {
        let f = GeodesicFrame::canonical();
        let seg = Segment::centered(f, 6.0).unwrap();
        let s =
            BooleanSample::from_points(mp(1.0, 1.0), Ball::centered(2.0).unwrap(), vec![]).unwrap();
        assert!(matches!(
            segment_in_vacant(&seg, &s),
            Err(Error::Window { .. })
        ));
    }

    #[test]
    fn transversal_line_blocks() {
        let f = GeodesicFrame::canonical();
        let seg = Segment::centered(f, 2.0).unwrap();
        let g = Geodesic::from_disk_angles(0.5 * PI, 1.5 * PI).unwrap();
        let s = LineSample::from_lines(1.0, Ball::centered(3.0).unwrap(), vec![g]);
        assert!(!segment_avoids_lines(&seg, &s).unwrap());
        let s = LineSample::from_lines(1.0, Ball::centered(3.0).unwrap(), vec![]);
        assert!(segment_avoids_lines(&seg, &s).unwrap());
    }

    #[test]
    fn blocked_width_matches_brute_force() {
        let radius = 1.0;
        for &(d, r) in &[
            (0.5, 3.0),
            (1.5, 3.0),
            (2.5, 2.0),
            (3.6, 3.0),
            (6.0, 5.5),
            (12.0, 11.5),
        ] {
            let hw = blocked_half_width(d, r, radius);
            let p = HPoint::from_polar(d, 0.0);
            let brute = |delta: f64| {
                let seg = Segment::new(GeodesicFrame::from_center(delta), 0.0, r).unwrap();
                seg.distance(p) < radius
            };
            match hw {
                None => assert!(!brute(0.0)),
                Some(h) if h >= PI => assert!(brute(PI)),
                Some(h) => {
                    assert!(brute(h * (1.0 - 1e-6)), "d={d} r={r} h={h}");
                    assert!(!brute(h * (1.0 + 1e-6) + 1e-15), "d={d} r={r} h={h}");
                }
            }
        }
    }

    #[test]
    fn line_width_matches_brute_force() {
        for &(p, r) in &[(0.3f64, 2.0f64), (1.2, 2.0), (4.0, 10.0), (9.9, 10.0)] {
            let g = Geodesic::from_disk_angles(-p.tanh().acos(), p.tanh().acos());
            let g = g.unwrap();
            let (pp, m) = line_polar(&g);
            assert_abs_diff_eq!(pp, p, epsilon = 1e-9 * p.exp());
            assert_abs_diff_eq!(m.min(2.0 * PI - m), 0.0, epsilon = 1e-12);
            let h = line_blocked_half_width(p, r).unwrap();
            let hits = |delta: f64| g.separates(HPoint::ORIGIN, HPoint::from_polar(r, delta));
            assert!(hits(h * (1.0 - 1e-7)));
            assert!(!hits(h * (1.0 + 1e-7)));
        }
    }

    #[test]
    fn index_window_wraps() {
        let n = 16;
        let step = 2.0 * PI / n as f64;
        let (r, k) = index_window(0.0, 1.5 * step, n);
        assert_eq!(&r[..k], &[(15, 15), (0, 1)]);
        let (r, k) = index_window(3.0 * step, 0.5 * step, n);
        assert_eq!(&r[..k], &[(3, 3)]);
        let (_, k) = index_window(3.5 * step, 0.4 * step, n);
        assert_eq!(k, 0);
    }

    #[test]
    fn runs_wrap_around() {
        let idx = [0, 1, 5, 6, 7, 15];
        assert_eq!(index_runs(&idx, 16), vec![(15, 3), (5, 3)]);
    }

    fn brute_rays(model: Model, real: &Realization, r: f64, n: u32) -> Vec<u32> {
        (0..n)
            .filter(|&i| {
                let f = GeodesicFrame::from_center(2.0 * PI * i as f64 / n as f64);
                let seg = Segment::new(f, 0.0, r).unwrap();
                real.contains_segment(model, &seg).unwrap()
            })
            .collect()
    }

    #[test]
    fn ray_survival_matches_segment_tests() {
        let n = 720;
        for (model, params) in [
            (Model::Vacant, mp(0.15, 1.0)),
            (Model::Occupied, mp(0.8, 1.0)),
            (Model::Lines, mp(0.6, 1.0)),
        ] {
            for seed in 0..4 {
                let r = 3.0;
                let w = if model.uses_points() {
                    r + 1.5
                } else {
                    r + 0.5
                };
                let real =
                    Realization::sample(model, params, HPoint::ORIGIN, w, RngStream::new(seed, 0))
                        .unwrap();
                let fast = ray_survival(model, &real, r, n).unwrap();
                assert_eq!(
                    fast.surviving,
                    brute_rays(model, &real, r, n),
                    "{model} seed {seed}"
                );
            }
        }
    }

    #[test]
    fn lazy_rays_agree_with_their_own_points() {
        // whatever the lazy sampler skipped cannot reach a surviving ray
        for (model, params, r) in [
            (Model::Vacant, mp(0.1, 1.0), 6.0),
            (Model::Occupied, mp(1.0, 1.0), 4.0),
        ] {
            for seed in 0..6 {
                let mut rng = RngStream::new(seed, 9).rng();
                let (engine, kept) = lazy_point_rays(model, params, r, 2048, 0.0, &mut rng);
                let lazy = engine.into_survival();
                let sample =
                    BooleanSample::from_points(params, Ball::centered(r + 2.0).unwrap(), kept)
                        .unwrap();
                let full = ray_survival(model, &Realization::Points(sample), r, 2048).unwrap();
                assert_eq!(lazy.surviving, full.surviving, "{model} seed {seed}");
            }
        }
    }

    #[test]
    fn survivors_shrink_with_r() {
        let real = Realization::sample(
            Model::Vacant,
            mp(0.1, 1.0),
            HPoint::ORIGIN,
            8.0,
            RngStream::new(3, 1),
        )
        .unwrap();
        let a = ray_survival(Model::Vacant, &real, 2.0, 4096).unwrap();
        let b = ray_survival(Model::Vacant, &real, 5.0, 4096).unwrap();
        assert!(b
            .surviving
            .iter()
            .all(|i| a.surviving.binary_search(i).is_ok()));
        assert!(b.surviving.len() < a.surviving.len());
    }

    #[test]
    fn zero_intensity_keeps_everything() {
        for model in [Model::Vacant, Model::Lines] {
            let surv =
                surviving_directions(model, mp(0.0, 1.0), 5.0, 64, RngStream::new(1, 1)).unwrap();
            assert_eq!(surv.surviving.len(), 64);
            let det = detect_line_through_ball(
                model,
                mp(0.0, 1.0),
                0.1,
                10.0,
                1024,
                RngStream::new(1, 2),
            )
            .unwrap();
            assert!(det.found);
            let (i, j) = det.witness.unwrap();
            assert!((i as i64 - j as i64).rem_euclid(1024) > 400);
        }
    }

    #[test]
    fn dilation_wraps_without_double_counting() {
        let n = 100;
        let step = 2.0 * PI / n as f64;
        let (arcs, total) = dilate(&[0, 1, 99], n, 0.6 * step);
        assert_abs_diff_eq!(total, 3.0 * step + 0.2 * step, epsilon = 1e-12);
        assert_eq!(arcs.len(), 2);
        let (_, total) = dilate(&[3, 50], n, 0.25 * step);
        assert_abs_diff_eq!(total, step, epsilon = 1e-12);
    }

    #[test]
    fn exponent_fit_recovers_slope() {
        let rs = [1.0, 2.0, 3.0, 4.0];
        let n = 1_000_000u64;
        let ks: Vec<u64> = rs
            .iter()
            .map(|r: &f64| ((-0.5 - 0.7 * r).exp() * n as f64).round() as u64)
            .collect();
        let fit = fit_exponent(&rs, &ks, n).unwrap();
        assert_abs_diff_eq!(fit.alpha, 0.7, epsilon = 1e-3);
        assert_abs_diff_eq!(fit.intercept, 0.5, epsilon = 1e-2);
        assert!(fit_exponent(&rs, &[n, n, n, n], n).unwrap().alpha.abs() < 1e-12);
        assert!(fit_exponent(&rs, &[5, 0, 0, 0], n).is_none());
    }

    #[test]
    fn tube_shape() {
        let x = HPoint::ORIGIN;
        let f = GeodesicFrame::canonical();
        let y = f.point(4.0);
        let s = 0.05;
        let tube = Tube::new(x, y, s).unwrap();
        // bitangent geodesic is tangent to both balls
        let w = tube.half_width(tube.tangent_foot).unwrap();
        let a = f.offset_point(tube.tangent_foot, w);
        assert_abs_diff_eq!(dist(a, x), s, epsilon = 1e-9);
        let b = f.offset_point(4.0 - tube.tangent_foot, w);
        let g = Geodesic::through(a, b).unwrap();
        assert_abs_diff_eq!(g.distance(x), s, epsilon = 1e-9);
        assert_abs_diff_eq!(g.distance(y), s, epsilon = 1e-9);
        let mid = f.offset_point(2.0, tube.half_width(2.0).unwrap());
        assert!(g.distance(mid) < 1e-9);
        assert!(tube.contains(f.point(2.0)));
        assert!(!tube.contains(f.offset_point(2.0, 0.9 * s)));
        assert!(tube.contains(f.offset_point(0.0, 0.9 * s)));
        assert_abs_diff_eq!(
            tube.distance(f.offset_point(-1.0, 0.0)),
            1.0 - s,
            epsilon = 1e-9
        );
    }

    #[test]
    fn sandwich_trivial_at_zero_intensity() {
        let x = HPoint::ORIGIN;
        let y = GeodesicFrame::canonical().point(4.0);
        for model in [Model::Vacant, Model::Lines] {
            let sw =
                sandwich_aq(x, y, 0.05, model, mp(0.0, 1.0), 5, 1, &Executor::Sequential).unwrap();
            assert_eq!((sw.p_a, sw.f, sw.p_q), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn exit_time_of_a_centered_ball() {
        let f = GeodesicFrame::canonical();
        let s = exit_time(&f, 1.0, &[f.point(0.3)]).unwrap();
        assert_abs_diff_eq!(s, 1.3, epsilon = 1e-12);
        assert!(exit_time(&f, 1.0, &[f.point(1.2)]).is_none());
    }

    #[test]
    fn model_names_round_trip() {
        for m in [Model::Vacant, Model::Occupied, Model::Lines] {
            assert_eq!(m.name().parse::<Model>().unwrap(), m);
        }
        assert!("foo".parse::<Model>().is_err());
    }
}
