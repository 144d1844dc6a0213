//! Closed forms for `f(r)`, the probability that a fixed geodesic segment of
//! length `r` lies in the random set, and for its decay exponent `α`.
//!
//! The occupied set has no closed form for `α`: it is the root of
//! `∫₀^{2R} e^{αs} G′(s) ds = 1`, where `G` is the law of the first exit time
//! `S` of the balls covering the start of the segment,
//! `G(t) = 1 - exp(-λ area(Q_t))` with `Q_t = B(γ(0), R) \ B(γ(t), R)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::hypgeo::ball_metrics;
use crate::quad::{bisect, AdaptedRule, Quadrature};
use crate::sampler::ModelParams;

/// Probability that a segment of length `r` lies in the vacant set: the
/// `R`-neighborhood of the segment (a band of area `2 r sinh R` plus two
/// half-disks) must contain no point.
pub fn f_vacant(r: f64, params: ModelParams) -> Result<f64> {
    check(r >= 0.0, "r", r, "segment length must be nonnegative")?;
    let area = 2.0 * r * params.radius.sinh() + ball_metrics(params.radius).0;
    Ok((-params.lambda * area).exp())
}

/// Decay exponent of the vacant-set `f(r)`: `2 λ sinh R`.
pub fn alpha_vacant(params: ModelParams) -> f64 {
    2.0 * params.lambda * params.radius.sinh()
}

/// Intensity at which the vacant exponent crosses 1: `1 / (2 sinh R)`.
pub fn lambda_gv(radius: f64) -> Result<f64> {
    check(radius > 0.0, "R", radius, "ball radius must be positive")?;
    Ok(0.5 / radius.sinh())
}

/// Line-process containment probability `e^{-λ r}`.
pub fn f_grassmann(r: f64, lambda: f64) -> Result<f64> {
    check(r >= 0.0, "r", r, "segment length must be nonnegative")?;
    Ok((-lambda * r).exp())
}

/// Half-width `sinh(arccosh(cosh R / cosh s))` of the ball `B(γ(0), R)` at
/// foot `s`, zero for `|s| ≥ R`.
#[inline]
pub fn ball_half_width(s: f64, radius: f64) -> f64 {
    let s = s.abs();
    if s >= radius {
        return 0.0;
    }
    // cosh²R/cosh²s - 1 = (cosh R - cosh s)(cosh R + cosh s)/cosh²s
    let diff = 2.0 * (0.5 * (radius + s)).sinh() * (0.5 * (radius - s)).sinh();
    let cs = s.cosh();
    (diff * (radius.cosh() + cs)).sqrt() / cs
}

/// Area of `Q_t = B(γ(0), R) \ B(γ(t), R)`.
pub fn area_qt(t: f64, radius: f64, q: &Quadrature) -> Result<f64> {
    check(t >= 0.0, "t", t, "must be nonnegative")?;
    check(radius > 0.0, "R", radius, "ball radius must be positive")?;
    if t >= 2.0 * radius {
        return Ok(ball_metrics(radius).0);
    }
    q.integrate(|s| 2.0 * ball_half_width(s, radius), -0.5 * t, 0.5 * t)
}

/// `G(t) = P(S ∈ (0, t)) = 1 - exp(-λ area(Q_t))`.
pub fn hitting_cdf(t: f64, params: ModelParams, q: &Quadrature) -> Result<f64> {
    Ok(-(-params.lambda * area_qt(t, params.radius, q)?).exp_m1())
}

/// `H(t) = -exp(-4λ ∫₀^{t/2} sinh(arccosh(cosh R / cosh s)) ds)`, a second
/// expression for `G - 1` evaluated through the half-range integral.
pub fn hitting_h(t: f64, params: ModelParams, q: &Quadrature) -> Result<f64> {
    check(t >= 0.0, "t", t, "must be nonnegative")?;
    let upper = (0.5 * t).min(params.radius);
    let half = q.integrate(|s| ball_half_width(s, params.radius), 0.0, upper)?;
    Ok(-(-4.0 * params.lambda * half).exp())
}

/// Density `G′(s) = 2λ √(cosh²R / cosh²(s/2) - 1) · exp(-λ area(Q_s))` on `(0, 2R)`.
pub fn hitting_density(s: f64, params: ModelParams, q: &Quadrature) -> Result<f64> {
    if s <= 0.0 || s >= 2.0 * params.radius {
        return Ok(0.0);
    }
    let w = ball_half_width(0.5 * s, params.radius);
    Ok(2.0 * params.lambda * w * (-params.lambda * area_qt(s, params.radius, q)?).exp())
}

/// Root of the occupied-set integral equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha: f64,
    /// `∫₀^{2R} e^{αs} G′(s) ds - 1` at the returned root.
    pub residual: f64,
    pub iterations: usize,
}

/// `G′` tabulated on an adapted composite rule over `[0, 2R]`, so that the
/// moment generating function `β ↦ ∫ e^{βs} G′(s) ds` costs one pass over
/// the nodes.
#[derive(Clone, Debug)]
pub struct OccupiedKernel {
    pub params: ModelParams,
    nodes: Vec<f64>,
    weighted_density: Vec<f64>,
    /// `P(S > 0) = ∫ G′`, as integrated by the tabulated rule.
    pub mass: f64,
}

impl OccupiedKernel {
    pub fn new(params: ModelParams, q: &Quadrature) -> Result<Self> {
        check(
            params.lambda > 0.0,
            "lambda",
            params.lambda,
            "intensity must be positive",
        )?;
        let mut err = None;
        let rule: AdaptedRule = q.adapt(
            |s| match hitting_density(s, params, q) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            2.0 * params.radius,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        let mut nodes = Vec::with_capacity(rule.nodes().len());
        let mut weighted_density = Vec::with_capacity(rule.nodes().len());
        for (&s, &w) in rule.nodes().iter().zip(rule.weights()) {
            let g = hitting_density(s, params, q)?;
            nodes.push(s);
            weighted_density.push(w * g);
        }
        let mass = weighted_density.iter().sum();
        Ok(OccupiedKernel {
            params,
            nodes,
            weighted_density,
            mass,
        })
    }

    /// `∫₀^{2R} e^{βs} G′(s) ds`.
    pub fn mgf(&self, beta: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weighted_density)
            .map(|(&s, &w)| w * (beta * s).exp())
            .sum()
    }

    pub fn solve(&self) -> Result<AlphaResult> {
        if self.mass >= 1.0 {
            return Err(Error::Solver(format!(
                "P(S > 0) evaluates to {} at λ = {}, R = {}; no positive root exists in \
                 floating point",
                self.mass, self.params.lambda, self.params.radius
            )));
        }
        let mut hi = 1.0;
        while self.mgf(hi) < 1.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Solver(format!(
                    "no sign change for β up to 1e6 at λ = {}, R = {}",
                    self.params.lambda, self.params.radius
                )));
            }
        }
        let (alpha, iterations) = bisect(|b| self.mgf(b) - 1.0, 0.0, hi, 1e-13, 1e-14)?;
        Ok(AlphaResult {
            alpha,
            residual: self.mgf(alpha) - 1.0,
            iterations,
        })
    }
}

/// Decay exponent of `f(r)` for the occupied set.
pub fn alpha_occupied(params: ModelParams, q: &Quadrature) -> Result<AlphaResult> {
    check(
        params.lambda > 0.0,
        "lambda",
        params.lambda,
        "intensity must be positive",
    )?;
    OccupiedKernel::new(params, q)?.solve()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    pub lambda: f64,
    pub alpha: AlphaResult,
    pub iterations: usize,
}

/// Intensity at which the occupied exponent equals 1.
pub fn lambda_gc(radius: f64, q: &Quadrature) -> Result<CriticalResult> {
    check(radius > 0.0, "R", radius, "ball radius must be positive")?;
    let excess = |lambda: f64| -> Result<f64> {
        Ok(alpha_occupied(ModelParams::new(lambda, radius)?, q)?.alpha - 1.0)
    };
    // α decreases in λ; bracket geometrically from one point per ball.
    let mut lo = 1.0 / ball_metrics(radius).0;
    let mut hi = lo;
    if excess(lo)? > 0.0 {
        loop {
            hi *= 2.0;
            if excess(hi)? <= 0.0 {
                break;
            }
            lo = hi;
            if hi > 1e8 {
                return Err(Error::Solver("failed to bracket λ_gc from above".into()));
            }
        }
    } else {
        loop {
            lo *= 0.5;
            if excess(lo)? > 0.0 {
                break;
            }
            hi = lo;
            if lo < 1e-300 {
                return Err(Error::Solver("failed to bracket λ_gc from below".into()));
            }
        }
    }
    let mut failure = None;
    let (lambda, iterations) = bisect(
        |l| match excess(l) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        1e-15 * hi,
        1e-10,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let alpha = alpha_occupied(ModelParams::new(lambda, radius)?, q)?;
    Ok(CriticalResult {
        lambda,
        alpha,
        iterations,
    })
}

/// Invariant measure of lines with one endpoint in `[x, x+1]` and the other
/// in `[y, y+1]`: `log(n² / ((n-1)(n+1)))` with `n = |y - x| ≥ 2`.
pub fn lrp_edge_measure(x: i64, y: i64) -> Result<f64> {
    let n = (y - x).abs();
    check(
        n >= 2,
        "|y - x|",
        n as f64,
        "unit intervals must be disjoint and non-adjacent",
    )?;
    let n = n as f64;
    // log(n²/(n²-1)) = -log1p(-1/n²)
    Ok(-(-1.0 / (n * n)).ln_1p())
}

/// Edge probability `c (1 - e^{-λ m})` of the induced long-range model.
pub fn lrp_edge_prob(x: i64, y: i64, lambda: f64, c: f64) -> Result<f64> {
    check((0.0..=1.0).contains(&c), "c", c, "must be a probability")?;
    check(lambda >= 0.0, "lambda", lambda, "must be nonnegative")?;
    Ok(-c * (-lambda * lrp_edge_measure(x, y)?).exp_m1())
}

/// Full-ball hitting probability `P(S > 0) = 1 - e^{-λ · 2π(cosh R - 1)}`.
pub fn prob_start_covered(params: ModelParams) -> f64 {
    -(-params.lambda * 2.0 * PI * (params.radius.cosh() - 1.0)).exp_m1()
}
