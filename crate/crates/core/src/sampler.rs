//! Exact samplers for the Poisson point process on hyperbolic balls and
//! for the isometry-invariant Poisson line process, together with the
//! invariant measure of a few sets of lines.
//!
//! Both samplers work on windows that are finite unions of balls. A union
//! is sampled ball by ball, keeping an object drawn for ball `k` only when it
//! does not meet any earlier ball; this is an exact Poisson sample of the
//! union because the pieces `B_k \ (B_0 ∪ … ∪ B_{k-1})` partition it.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::hypgeo::{ball_metrics, dist, Geodesic, HPoint, Isometry};
use crate::quad::{bisect, Quadrature};
use crate::rng::RngStream;

/// Slack for containment checks against window balls.
const WINDOW_TOL: f64 = 1e-9;

/// Intensity and ball radius of a Boolean model. The radius is ignored by
/// the line process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub radius: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, radius: f64) -> Result<Self> {
        check(
            lambda.is_finite() && lambda >= 0.0,
            "lambda",
            lambda,
            "intensity must be finite and nonnegative",
        )?;
        check(
            radius.is_finite() && radius > 0.0,
            "R",
            radius,
            "ball radius must be positive",
        )?;
        Ok(ModelParams { lambda, radius })
    }

    /// Parameters of the line process, which has no ball radius.
    pub fn lines(lambda: f64) -> Result<Self> {
        ModelParams::new(lambda, 1.0)
    }
}

/// A closed hyperbolic ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: HPoint,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: HPoint, radius: f64) -> Result<Self> {
        check(
            radius > 0.0 && radius.is_finite(),
            "radius",
            radius,
            "must be positive",
        )?;
        Ok(Ball { center, radius })
    }

    pub fn centered(radius: f64) -> Result<Self> {
        Ball::new(HPoint::ORIGIN, radius)
    }

    #[inline]
    pub fn contains(&self, p: HPoint) -> bool {
        dist(self.center, p) <= self.radius
    }

    /// Whether `B(center, radius)` lies inside this ball.
    pub fn covers(&self, center: HPoint, radius: f64) -> bool {
        dist(self.center, center) + radius <= self.radius + WINDOW_TOL
    }

    /// Smallest radius this ball would need to cover `B(center, radius)`.
    fn needed(&self, center: HPoint, radius: f64) -> f64 {
        dist(self.center, center) + radius
    }
}

fn window_error(windows: &[Ball], needed: impl Fn(&Ball) -> f64) -> Error {
    let (best_needed, available) = windows
        .iter()
        .map(|w| (needed(w), w.radius))
        .min_by(|a, b| (a.0 - a.1).total_cmp(&(b.0 - b.1)))
        .unwrap_or((f64::INFINITY, 0.0));
    Error::Window {
        needed: best_needed,
        available,
    }
}

fn require_ball(windows: &[Ball], center: HPoint, radius: f64) -> Result<()> {
    if windows.iter().any(|w| w.covers(center, radius)) {
        Ok(())
    } else {
        Err(window_error(windows, |w| w.needed(center, radius)))
    }
}

fn require_segment(windows: &[Ball], p: HPoint, q: HPoint, margin: f64) -> Result<()> {
    if windows
        .iter()
        .any(|w| w.covers(p, margin) && w.covers(q, margin))
    {
        Ok(())
    } else {
        Err(window_error(windows, |w| {
            w.needed(p, margin).max(w.needed(q, margin))
        }))
    }
}

/// A realization of the Poisson point process on a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BooleanSample {
    pub params: ModelParams,
    windows: Vec<Ball>,
    pub points: Vec<HPoint>,
}

impl BooleanSample {
    /// A sample with explicitly given points, for constructed instances.
    pub fn from_points(params: ModelParams, window: Ball, points: Vec<HPoint>) -> Result<Self> {
        for p in &points {
            check(
                window.contains(*p),
                "point distance",
                dist(window.center, *p),
                "points must lie in the window",
            )?;
        }
        Ok(BooleanSample {
            params,
            windows: vec![window],
            points,
        })
    }

    pub fn windows(&self) -> &[Ball] {
        &self.windows
    }

    pub fn window_center(&self) -> HPoint {
        self.windows[0].center
    }

    pub fn window_radius(&self) -> f64 {
        self.windows[0].radius
    }

    /// Refuses queries whose region `B(center, radius)` is not inside one
    /// window ball.
    pub fn require_ball(&self, center: HPoint, radius: f64) -> Result<()> {
        require_ball(&self.windows, center, radius)
    }

    /// Refuses queries on the segment `[p, q]` whose `margin`-neighborhood
    /// is not inside one window ball.
    pub fn require_segment(&self, p: HPoint, q: HPoint, margin: f64) -> Result<()> {
        require_segment(&self.windows, p, q, margin)
    }

    /// Independent thinning: keep each point with probability `keep`.
    pub fn thin<R: Rng + ?Sized>(&self, keep: f64, rng: &mut R) -> Result<Self> {
        check(
            (0.0..=1.0).contains(&keep),
            "keep",
            keep,
            "must be a probability",
        )?;
        let points = self
            .points
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < keep)
            .collect();
        Ok(BooleanSample {
            params: ModelParams {
                lambda: self.params.lambda * keep,
                ..self.params
            },
            windows: self.windows.clone(),
            points,
        })
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite mean");
    d.sample(rng) as u64
}

/// Uniform point of `B(o, radius)` under the invariant area measure.
pub fn uniform_in_ball<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> HPoint {
    let u: f64 = rng.random();
    let t = (1.0 + u * (radius.cosh() - 1.0)).acosh();
    let angle = 2.0 * PI * rng.random::<f64>();
    HPoint::from_polar(t, angle)
}

fn push_points_in_ball<R: Rng + ?Sized>(
    lambda: f64,
    ball: &Ball,
    rng: &mut R,
    mut keep: impl FnMut(HPoint) -> bool,
    out: &mut Vec<HPoint>,
) {
    let n = poisson_count(lambda * ball_metrics(ball.radius).0, rng);
    let to_center = Isometry::affine(ball.center.y(), ball.center.x());
    for _ in 0..n {
        let p = to_center.apply(uniform_in_ball(ball.radius, rng));
        if keep(p) {
            out.push(p);
        }
    }
}

/// Poisson point process of intensity `params.lambda` on `B(center, radius)`.
pub fn sample_points(
    params: ModelParams,
    center: HPoint,
    radius: f64,
    stream: RngStream,
) -> Result<BooleanSample> {
    sample_points_with(params, center, radius, &mut stream.rng())
}

pub fn sample_points_with<R: Rng + ?Sized>(
    params: ModelParams,
    center: HPoint,
    radius: f64,
    rng: &mut R,
) -> Result<BooleanSample> {
    let window = Ball::new(center, radius)?;
    let mut points = Vec::new();
    push_points_in_ball(params.lambda, &window, rng, |_| true, &mut points);
    Ok(BooleanSample {
        params,
        windows: vec![window],
        points,
    })
}

/// Poisson point process on a union of balls.
pub fn sample_points_union<R: Rng + ?Sized>(
    params: ModelParams,
    windows: &[Ball],
    rng: &mut R,
) -> Result<BooleanSample> {
    check(
        !windows.is_empty(),
        "windows",
        0.0,
        "need at least one window ball",
    )?;
    let mut points = Vec::new();
    for (k, ball) in windows.iter().enumerate() {
        let earlier = &windows[..k];
        push_points_in_ball(
            params.lambda,
            ball,
            rng,
            |p| !earlier.iter().any(|w| w.contains(p)),
            &mut points,
        );
    }
    Ok(BooleanSample {
        params,
        windows: windows.to_vec(),
        points,
    })
}

/// A realization of the Poisson line process, restricted to lines that meet
/// the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSample {
    pub lambda: f64,
    windows: Vec<Ball>,
    pub lines: Vec<Geodesic>,
}

impl LineSample {
    pub fn from_lines(lambda: f64, window: Ball, lines: Vec<Geodesic>) -> Self {
        LineSample {
            lambda,
            windows: vec![window],
            lines,
        }
    }

    pub fn windows(&self) -> &[Ball] {
        &self.windows
    }

    /// Radius `ρ` of the primary reference ball.
    pub fn ref_radius(&self) -> f64 {
        self.windows[0].radius
    }

    pub fn ref_center(&self) -> HPoint {
        self.windows[0].center
    }

    /// Refuses segments not contained in one window ball; only then is every
    /// line crossing the segment guaranteed to be in the sample.
    pub fn require_segment(&self, p: HPoint, q: HPoint) -> Result<()> {
        require_segment(&self.windows, p, q, 0.0)
    }

    pub fn require_ball(&self, center: HPoint, radius: f64) -> Result<()> {
        require_ball(&self.windows, center, radius)
    }

    pub fn thin<R: Rng + ?Sized>(&self, keep: f64, rng: &mut R) -> Result<Self> {
        check(
            (0.0..=1.0).contains(&keep),
            "keep",
            keep,
            "must be a probability",
        )?;
        Ok(LineSample {
            lambda: self.lambda * keep,
            windows: self.windows.clone(),
            lines: self
                .lines
                .iter()
                .copied()
                .filter(|_| rng.random::<f64>() < keep)
                .collect(),
        })
    }
}

/// Disk angles `(α, β)` of a line drawn from the invariant measure
/// restricted to lines meeting `B(o, rho)`.
///
/// With `α` uniform, the angular gap `δ = β - α` has density proportional
/// to `sin⁻²(δ/2)` on `(δ₀, 2π - δ₀)` with `sin(δ₀/2) = 1/cosh ρ`; its
/// distribution function inverts in closed form to
/// `cot(δ/2) = sinh ρ · (1 - 2u)`.
pub fn line_angles_meeting_ball<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> (f64, f64) {
    let alpha = 2.0 * PI * rng.random::<f64>();
    let u: f64 = rng.random();
    let gap = 2.0 * 1f64.atan2(rho.sinh() * (1.0 - 2.0 * u));
    (alpha, alpha + gap)
}

fn push_lines_in_ball<R: Rng + ?Sized>(
    lambda: f64,
    ball: &Ball,
    rng: &mut R,
    mut keep: impl FnMut(&Geodesic) -> bool,
    out: &mut Vec<Geodesic>,
) {
    let n = poisson_count(lambda * phi_ball(ball.radius), rng);
    let to_center = Isometry::affine(ball.center.y(), ball.center.x());
    for _ in 0..n {
        let (a, b) = line_angles_meeting_ball(ball.radius, rng);
        let Ok(g) = Geodesic::from_disk_angles(a, b) else {
            continue; // gap rounded to a full turn; probability zero
        };
        let Ok(g) = to_center.apply_geodesic(&g) else {
            continue;
        };
        if keep(&g) {
            out.push(g);
        }
    }
}

/// Poisson line process of intensity `lambda`, restricted to lines meeting
/// `B(o, rho)` where `o` is the disk center.
pub fn sample_lines(lambda: f64, rho: f64, stream: RngStream) -> Result<LineSample> {
    sample_lines_with(lambda, rho, &mut stream.rng())
}

pub fn sample_lines_with<R: Rng + ?Sized>(
    lambda: f64,
    rho: f64,
    rng: &mut R,
) -> Result<LineSample> {
    check(
        lambda.is_finite() && lambda >= 0.0,
        "lambda",
        lambda,
        "must be nonnegative",
    )?;
    let window = Ball::centered(rho)?;
    let mut lines = Vec::new();
    push_lines_in_ball(lambda, &window, rng, |_| true, &mut lines);
    Ok(LineSample {
        lambda,
        windows: vec![window],
        lines,
    })
}

/// Poisson line process restricted to lines meeting a union of balls.
pub fn sample_lines_union<R: Rng + ?Sized>(
    lambda: f64,
    windows: &[Ball],
    rng: &mut R,
) -> Result<LineSample> {
    check(
        lambda.is_finite() && lambda >= 0.0,
        "lambda",
        lambda,
        "must be nonnegative",
    )?;
    check(
        !windows.is_empty(),
        "windows",
        0.0,
        "need at least one window ball",
    )?;
    let mut lines = Vec::new();
    for (k, ball) in windows.iter().enumerate() {
        let earlier = &windows[..k];
        push_lines_in_ball(
            lambda,
            ball,
            rng,
            |g| !earlier.iter().any(|w| g.distance(w.center) < w.radius),
            &mut lines,
        );
    }
    Ok(LineSample {
        lambda,
        windows: windows.to_vec(),
        lines,
    })
}

/// Invariant measure of the lines crossing a segment of length `r`.
pub fn phi_segment(r: f64) -> Result<f64> {
    check(r >= 0.0, "r", r, "segment length must be nonnegative")?;
    Ok(r)
}

/// Numerical value of `∫∫ dx dy / (x - y)²` over endpoint pairs with
/// `1 ≤ -xy ≤ e^{2r}`, i.e. lines crossing `{(0, e^t) : 0 ≤ t ≤ r}`.
///
/// With `x = -e^u`, `y = e^v` the integrand becomes `1 / (4 cosh²((u - v)/2))`
/// on `0 ≤ u + v ≤ 2r`.
pub fn phi_segment_quadrature(r: f64, q: &Quadrature) -> Result<f64> {
    check(r >= 0.0, "r", r, "segment length must be nonnegative")?;
    let half_width = 20.0 + r;
    let mut inner_err = None;
    let value = q.integrate(
        |u| {
            let f = |v: f64| {
                let c = (0.5 * (u - v)).cosh();
                0.25 / (c * c)
            };
            match q.integrate(f, -u, 2.0 * r - u) {
                Ok(v) => v,
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            }
        },
        -half_width,
        half_width,
    )?;
    match inner_err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Measure of the lines separated by the diameters at disk angles `0` and
/// `theta`: `-2 log(sin θ / 2)`.
pub fn phi_separating(theta: f64) -> Result<f64> {
    check(
        theta > 0.0 && theta < PI,
        "theta",
        theta,
        "angle must lie in (0, π)",
    )?;
    Ok(-2.0 * (theta.sin() / 2.0).ln())
}

fn disk_density(alpha: f64, beta: f64) -> f64 {
    let s = (0.5 * (beta - alpha)).sin();
    0.25 / (s * s)
}

/// The same measure as the double integral of `|e^{iα} - e^{iβ}|⁻²` over the
/// two arc rectangles `[0,θ]×[π,π+θ]` and `[θ,π]×[π+θ,2π]`.
pub fn phi_separating_quadrature(theta: f64, q: &Quadrature) -> Result<f64> {
    check(
        theta > 0.0 && theta < PI,
        "theta",
        theta,
        "angle must lie in (0, π)",
    )?;
    let rect = |a0: f64, a1: f64, b0: f64, b1: f64| -> Result<f64> {
        let mut inner_err = None;
        let v = q.integrate(
            |a| match q.integrate(|b| disk_density(a, b), b0, b1) {
                Ok(v) => v,
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            },
            a0,
            a1,
        )?;
        match inner_err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };
    Ok(rect(0.0, theta, PI, PI + theta)? + rect(theta, PI, PI + theta, 2.0 * PI)?)
}

/// Invariant measure of the lines meeting a ball of radius `rho`: `π sinh ρ`.
///
/// The closed form is confirmed against [`phi_ball_quadrature`] by the test
/// suite before the samplers rely on it.
pub fn phi_ball(rho: f64) -> f64 {
    PI * rho.sinh()
}

/// Quadrature for the measure of lines passing within distance `rho` of
/// the disk center.
///
/// By rotation invariance the pair integral reduces to
/// `π ∫ dδ / (4 sin²(δ/2))` over the angular gaps `δ` whose line passes within
/// `rho` of the center; that set of gaps is located by bisection on the
/// geodesic distance function.
pub fn phi_ball_quadrature(rho: f64, q: &Quadrature) -> Result<f64> {
    check(rho > 0.0, "rho", rho, "radius must be positive")?;
    let gap_distance = |gap: f64| -> f64 {
        Geodesic::from_disk_angles(0.0, gap)
            .map(|g| g.distance(HPoint::ORIGIN))
            .unwrap_or(f64::INFINITY)
    };
    let (gap_min, _) = bisect(
        |g| gap_distance(g) - rho,
        1e-12 * (-rho).exp(),
        PI,
        1e-17,
        0.0,
    )?;
    let v = q.integrate(|d| disk_density(0.0, d), gap_min, 2.0 * PI - gap_min)?;
    Ok(PI * v)
}
