//! Exact geometry of the hyperbolic plane.
//!
//! Points are carried in upper half-plane coordinates; the Poincaré disk is
//! reached through the Cayley map `w = (z - i) / (z + i)`, which sends the
//! point `i` to the disk center. Isometries are real Möbius maps; a negative
//! determinant denotes the orientation-reversing map `z ↦ (a z̄ + b)/(c z̄ + d)`,
//! so composition is always the plain matrix product.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};

/// Tolerance for "lies on the geodesic" checks, in model units.
pub const ON_GEODESIC_TOL: f64 = 1e-12;

/// A point of the hyperbolic plane in upper half-plane coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    x: f64,
    y: f64,
}

impl HPoint {
    /// The point `i`, which the Cayley map sends to the disk center.
    pub const ORIGIN: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        check(x.is_finite(), "x", x, "must be finite")?;
        check(
            y.is_finite() && y > 0.0,
            "y",
            y,
            "must be positive and finite",
        )?;
        Ok(HPoint { x, y })
    }

    pub(crate) fn from_complex(z: Complex64) -> Self {
        // Rounding can push points produced by isometries onto the real axis
        // when they sit at astronomically large distance; clamp to stay valid.
        HPoint {
            x: z.re,
            y: z.im.max(f64::MIN_POSITIVE),
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Cayley map into the unit disk.
    pub fn to_disk(self) -> (f64, f64) {
        let HPoint { x, y } = self;
        let den = x * x + (y + 1.0) * (y + 1.0);
        ((x * x + y * y - 1.0) / den, -2.0 * x / den)
    }

    /// Inverse Cayley map; rejects points outside the open unit disk.
    pub fn from_disk(u: f64, v: f64) -> Result<Self> {
        let n2 = u * u + v * v;
        check(
            n2 < 1.0,
            "|w|",
            n2.sqrt(),
            "disk point must satisfy |w| < 1",
        )?;
        let den = (1.0 - u) * (1.0 - u) + v * v;
        HPoint::new(-2.0 * v / den, (1.0 - n2) / den)
    }

    /// The point at hyperbolic distance `d` from [`HPoint::ORIGIN`] whose disk
    /// image has argument `angle`.
    pub fn from_polar(d: f64, angle: f64) -> Self {
        let up = HPoint { x: 0.0, y: d.exp() };
        Isometry::rotation(angle).apply(up)
    }

    /// Hyperbolic polar coordinates `(distance, disk angle)` about the origin.
    pub fn polar(self) -> (f64, f64) {
        let HPoint { x, y } = self;
        (
            dist(HPoint::ORIGIN, self),
            (-2.0 * x).atan2(x * x + y * y - 1.0),
        )
    }
}

/// Hyperbolic distance.
///
/// Uses `d = 2 asinh(|p - q| / (2 sqrt(p.y q.y)))`, which equals
/// `arccosh(1 + |p - q|² / (2 p.y q.y))` without cancellation near `p = q`.
pub fn dist(p: HPoint, q: HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let e = dx.hypot(dy);
    2.0 * (e / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// `(area, circumference)` of a hyperbolic ball of radius `r`.
pub fn ball_metrics(r: f64) -> (f64, f64) {
    (2.0 * PI * (r.cosh() - 1.0), 2.0 * PI * r.sinh())
}

/// A point of the ideal boundary `ℝ ∪ {∞}` of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IdealPoint {
    Finite(f64),
    Infinity,
}

impl IdealPoint {
    /// The boundary point whose disk image is `e^{iθ}`.
    pub fn from_disk_angle(theta: f64) -> Self {
        let half = 0.5 * theta;
        let s = half.sin();
        if s == 0.0 {
            IdealPoint::Infinity
        } else {
            IdealPoint::Finite(-half.cos() / s)
        }
    }

    /// Argument of the disk image, in `(-π, π]`.
    pub fn disk_angle(self) -> f64 {
        match self {
            IdealPoint::Infinity => 0.0,
            IdealPoint::Finite(x) => (-2.0 * x).atan2(x * x - 1.0),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, IdealPoint::Infinity)
    }
}

/// An unoriented hyperbolic line, stored by its ideal endpoints.
///
/// Normalized so that `a` is finite and `a < b` (with `∞` greatest).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    a: f64,
    b: IdealPoint,
}

impl Geodesic {
    pub fn new(p: IdealPoint, q: IdealPoint) -> Result<Self> {
        match (p, q) {
            (IdealPoint::Infinity, IdealPoint::Infinity) => Err(Error::InvalidParameter {
                name: "endpoints",
                value: f64::INFINITY,
                reason: "a geodesic needs two distinct ideal endpoints",
            }),
            (IdealPoint::Finite(a), IdealPoint::Infinity)
            | (IdealPoint::Infinity, IdealPoint::Finite(a)) => {
                check(a.is_finite(), "endpoint", a, "must be finite or ∞")?;
                Ok(Geodesic {
                    a,
                    b: IdealPoint::Infinity,
                })
            }
            (IdealPoint::Finite(a), IdealPoint::Finite(b)) => {
                check(a.is_finite(), "endpoint", a, "must be finite or ∞")?;
                check(b.is_finite(), "endpoint", b, "must be finite or ∞")?;
                check(a != b, "endpoint", a, "endpoints must differ")?;
                Ok(Geodesic {
                    a: a.min(b),
                    b: IdealPoint::Finite(a.max(b)),
                })
            }
        }
    }

    /// The line through two distinct points.
    pub fn through(p: HPoint, q: HPoint) -> Result<Self> {
        Ok(GeodesicFrame::through(p, q)?.geodesic())
    }

    /// The line whose disk endpoints are `e^{iα}` and `e^{iβ}`.
    pub fn from_disk_angles(alpha: f64, beta: f64) -> Result<Self> {
        Geodesic::new(
            IdealPoint::from_disk_angle(alpha),
            IdealPoint::from_disk_angle(beta),
        )
    }

    /// The imaginary axis.
    pub fn imaginary_axis() -> Self {
        Geodesic {
            a: 0.0,
            b: IdealPoint::Infinity,
        }
    }

    pub fn endpoints(&self) -> (IdealPoint, IdealPoint) {
        (IdealPoint::Finite(self.a), self.b)
    }

    /// Disk arguments of the two endpoints.
    pub fn disk_angles(&self) -> (f64, f64) {
        (IdealPoint::Finite(self.a).disk_angle(), self.b.disk_angle())
    }

    /// Signed side indicator; points on opposite sides get opposite signs and
    /// points on the line give zero.
    #[inline]
    pub fn side(&self, p: HPoint) -> f64 {
        match self.b {
            IdealPoint::Infinity => p.x - self.a,
            IdealPoint::Finite(b) => {
                // |z - c|² - ρ² = (x - a)(x - b) + y²
                (p.x - self.a) * (p.x - b) + p.y * p.y
            }
        }
    }

    /// Whether the line strictly separates `p` from `q`.
    #[inline]
    pub fn separates(&self, p: HPoint, q: HPoint) -> bool {
        let sp = self.side(p);
        let sq = self.side(q);
        (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)
    }

    /// Hyperbolic distance from `p` to the line.
    #[inline]
    pub fn distance(&self, p: HPoint) -> f64 {
        match self.b {
            IdealPoint::Infinity => ((p.x - self.a).abs() / p.y).asinh(),
            IdealPoint::Finite(b) => {
                let diam = b - self.a;
                (self.side(p).abs() / (diam * p.y)).asinh()
            }
        }
    }

    /// The frame with origin at the apex (or at height 1 for vertical lines),
    /// oriented from the finite endpoint `a` towards `b`.
    pub fn canonical_frame(&self) -> GeodesicFrame {
        let origin = match self.b {
            IdealPoint::Infinity => HPoint { x: self.a, y: 1.0 },
            IdealPoint::Finite(b) => HPoint {
                x: 0.5 * (self.a + b),
                y: 0.5 * (b - self.a),
            },
        };
        GeodesicFrame::from_parts(*self, origin, Direction::Forward)
    }
}

/// A real Möbius map acting on the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        check(
            det != 0.0 && det.is_finite(),
            "ad - bc",
            det,
            "Möbius coefficients must have nonzero determinant",
        )?;
        Ok(Isometry { a, b, c, d }.normalized())
    }

    fn normalized(self) -> Self {
        let s = (self.a * self.d - self.b * self.c).abs().sqrt().recip();
        Isometry {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
        }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn preserves_orientation(&self) -> bool {
        self.determinant() > 0.0
    }

    /// `z ↦ scale·z + shift`, the map sending `i` to `(shift, scale)`.
    pub fn affine(scale: f64, shift: f64) -> Self {
        Isometry {
            a: scale,
            b: shift,
            c: 0.0,
            d: 1.0,
        }
        .normalized()
    }

    /// Rotation about `i` by `angle`, as seen in the disk model.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Isometry {
            a: c,
            b: s,
            c: -s,
            d: c,
        }
    }

    /// Reflection in a geodesic.
    pub fn reflection(g: &Geodesic) -> Self {
        match g.b {
            IdealPoint::Infinity => Isometry {
                a: -1.0,
                b: 2.0 * g.a,
                c: 0.0,
                d: 1.0,
            },
            IdealPoint::Finite(b) => {
                let c = 0.5 * (g.a + b);
                // z ↦ c + ρ²/(z̄ - c), with ρ² - c² = -ab
                Isometry {
                    a: c,
                    b: -g.a * b,
                    c: 1.0,
                    d: -c,
                }
                .normalized()
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .normalized()
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    #[inline]
    pub fn apply(&self, p: HPoint) -> HPoint {
        let z = if self.preserves_orientation() {
            p.to_complex()
        } else {
            p.to_complex().conj()
        };
        let w = (z * self.a + self.b) / (z * self.c + self.d);
        HPoint::from_complex(w)
    }

    pub fn apply_ideal(&self, p: IdealPoint) -> IdealPoint {
        match p {
            IdealPoint::Infinity => {
                if self.c == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite(self.a / self.c)
                }
            }
            IdealPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Image of a geodesic under the boundary action.
    pub fn apply_geodesic(&self, g: &Geodesic) -> Result<Geodesic> {
        let (p, q) = g.endpoints();
        Geodesic::new(self.apply_ideal(p), self.apply_ideal(q))
    }
}

/// Reflection of `p` in the geodesic `g`.
pub fn reflect(g: &Geodesic, p: HPoint) -> HPoint {
    Isometry::reflection(g).apply(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// An arclength parametrization of a geodesic.
///
/// Internally keeps the orientation-preserving isometry (the chart) that maps
/// the imaginary axis, parametrized as `t ↦ i·e^t`, onto this parametrization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicFrame {
    gamma: Geodesic,
    origin: HPoint,
    direction: Direction,
    chart: Isometry,
}

impl GeodesicFrame {
    /// The imaginary axis with origin `i`, moving upwards.
    pub fn canonical() -> Self {
        GeodesicFrame {
            gamma: Geodesic::imaginary_axis(),
            origin: HPoint::ORIGIN,
            direction: Direction::Forward,
            chart: Isometry::IDENTITY,
        }
    }

    /// `direction` is `Forward` when the parametrization moves from the
    /// geodesic's first normalized endpoint towards the second.
    pub fn new(gamma: Geodesic, origin: HPoint, direction: Direction) -> Result<Self> {
        let off = gamma.distance(origin);
        check(
            off <= ON_GEODESIC_TOL,
            "origin offset",
            off,
            "frame origin must lie on the geodesic",
        )?;
        Ok(Self::from_parts(gamma, origin, direction))
    }

    fn from_parts(gamma: Geodesic, origin: HPoint, direction: Direction) -> Self {
        let (first, second) = gamma.endpoints();
        let (tail, head) = match direction {
            Direction::Forward => (first, second),
            Direction::Backward => (second, first),
        };
        let chart = match (tail, head) {
            (IdealPoint::Finite(t), IdealPoint::Infinity) => Isometry::affine(origin.y, t),
            (IdealPoint::Infinity, IdealPoint::Finite(h)) => {
                // z ↦ h - k/z
                Isometry {
                    a: h,
                    b: -origin.y,
                    c: 1.0,
                    d: 0.0,
                }
                .normalized()
            }
            (IdealPoint::Finite(t), IdealPoint::Finite(h)) => {
                let o = origin.to_complex();
                let k = (h - t).signum() * (o - t).norm() / (Complex64::from(h) - o).norm();
                Isometry {
                    a: h * k,
                    b: t,
                    c: k,
                    d: 1.0,
                }
                .normalized()
            }
            (IdealPoint::Infinity, IdealPoint::Infinity) => unreachable!("normalized geodesic"),
        };
        GeodesicFrame {
            gamma,
            origin,
            direction,
            chart,
        }
    }

    /// The frame with origin `p` whose positive direction points towards `q`.
    pub fn through(p: HPoint, q: HPoint) -> Result<Self> {
        check(p != q, "points", 0.0, "need two distinct points")?;
        let to_origin = Isometry::affine(p.y, p.x).inverse();
        let (u, v) = to_origin.apply(q).to_disk();
        Ok(Self::from_chart(
            Isometry::affine(p.y, p.x).compose(&Isometry::rotation(v.atan2(u))),
        ))
    }

    /// The frame with origin `p` whose (disk-model) tangent at `p` is that of
    /// the ray from the disk center at argument `angle`, transported by the
    /// affine map sending `i` to `p`.
    pub fn at(p: HPoint, angle: f64) -> Self {
        Self::from_chart(Isometry::affine(p.y, p.x).compose(&Isometry::rotation(angle)))
    }

    /// Frame of the ray from the disk center at disk argument `angle`.
    pub fn from_center(angle: f64) -> Self {
        Self::from_chart(Isometry::rotation(angle))
    }

    /// Frame obtained by pushing the canonical frame through an isometry.
    pub fn from_chart(chart: Isometry) -> Self {
        let chart = if chart.preserves_orientation() {
            chart
        } else {
            // Precompose with z ↦ -z̄, which fixes the canonical frame.
            chart.compose(&Isometry {
                a: -1.0,
                b: 0.0,
                c: 0.0,
                d: 1.0,
            })
        };
        let tail = chart.apply_ideal(IdealPoint::Finite(0.0));
        let head = chart.apply_ideal(IdealPoint::Infinity);
        let gamma = Geodesic::new(tail, head).expect("isometries are injective on the boundary");
        let direction = if gamma.endpoints().0 == tail {
            Direction::Forward
        } else {
            Direction::Backward
        };
        GeodesicFrame {
            gamma,
            origin: chart.apply(HPoint::ORIGIN),
            direction,
            chart,
        }
    }

    pub fn geodesic(&self) -> Geodesic {
        self.gamma
    }

    pub fn origin(&self) -> HPoint {
        self.origin
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn chart(&self) -> &Isometry {
        &self.chart
    }

    /// The point at signed arclength `t` from the origin.
    #[inline]
    pub fn point(&self, t: f64) -> HPoint {
        self.chart.apply(HPoint { x: 0.0, y: t.exp() })
    }

    /// The point whose foot on the geodesic is at arclength `s` and whose
    /// signed perpendicular offset is `y` (positive to the left).
    pub fn offset_point(&self, s: f64, y: f64) -> HPoint {
        let r = s.exp();
        self.chart.apply(HPoint {
            x: -r * y.tanh(),
            y: r / y.cosh(),
        })
    }

    /// `(foot, signed offset)`: arclength of the nearest point of the
    /// geodesic and the signed perpendicular distance (positive to the left).
    #[inline]
    pub fn locate(&self, p: HPoint) -> (f64, f64) {
        let q = self.chart.inverse().apply(p);
        let foot = 0.5 * (q.x * q.x + q.y * q.y).ln();
        let offset = (-q.x / q.y).asinh();
        (foot, offset)
    }

    /// A precomputed inverse chart for repeated [`GeodesicFrame::locate`] calls.
    pub fn locator(&self) -> Locator {
        Locator {
            inv: self.chart.inverse(),
        }
    }

    /// Frame moved by an isometry.
    pub fn transformed(&self, m: &Isometry) -> Self {
        Self::from_chart(m.compose(&self.chart))
    }
}

/// Fermi coordinates relative to a frame, with the chart inverted once.
#[derive(Clone, Copy, Debug)]
pub struct Locator {
    inv: Isometry,
}

impl Locator {
    /// Same as [`GeodesicFrame::locate`].
    #[inline]
    pub fn locate(&self, p: HPoint) -> (f64, f64) {
        let q = self.inv.apply(p);
        (0.5 * (q.x * q.x + q.y * q.y).ln(), (-q.x / q.y).asinh())
    }
}

/// `(distance, foot)` of `p` relative to `g`, the foot measured in
/// `g`'s canonical frame.
pub fn dist_to_geodesic(p: HPoint, g: &Geodesic) -> (f64, f64) {
    let (foot, offset) = g.canonical_frame().locate(p);
    (offset.abs(), foot)
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hp(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist(hp(0.0, 1.0), hp(0.0, 1.0)), 0.0);
        for t in [1.0, 2.5] {
            assert_abs_diff_eq!(dist(hp(0.0, 1.0), hp(0.0, f64::exp(t))), t, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            dist(hp(1.0, 1.0), hp(-1.0, 1.0)),
            3f64.acosh(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(3f64.acosh(), 1.762747174, epsilon = 1e-9);
    }

    #[test]
    fn dist_matches_arclength_integral() {
        // Geodesic from (1,1) to (-1,1) is the circle |z| = √2; integrate |ds|/y.
        let rho = 2f64.sqrt();
        let a = PI / 4.0;
        let n = 200_000;
        let h = (PI - 2.0 * a) / n as f64;
        let mut sum = 0.0;
        for k in 0..n {
            let psi = a + (k as f64 + 0.5) * h;
            sum += rho * h / (rho * psi.sin());
        }
        assert_abs_diff_eq!(sum, dist(hp(1.0, 1.0), hp(-1.0, 1.0)), epsilon = 1e-8);
    }

    #[test]
    fn dist_near_coincident_points() {
        let p = hp(0.3, 0.7);
        let q = hp(0.3 + 1e-9, 0.7);
        assert_abs_diff_eq!(dist(p, q), (q.x() - p.x()) / 0.7, epsilon = 1e-22);
    }

    #[test]
    fn canonical_frame_points() {
        let f = GeodesicFrame::canonical();
        assert_eq!(f.point(0.0), HPoint::ORIGIN);
        let p = f.point(1.0);
        assert_abs_diff_eq!(p.x(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y(), 1f64.exp(), epsilon = 1e-14);
    }

    #[test]
    fn frame_from_endpoints_matches_orientation() {
        let g = Geodesic::new(IdealPoint::Finite(-1.0), IdealPoint::Finite(3.0)).unwrap();
        let top = hp(1.0, 2.0);
        let f = GeodesicFrame::new(g, top, Direction::Forward).unwrap();
        assert_abs_diff_eq!(dist(f.point(0.0), top), 0.0, epsilon = 1e-12);
        // Moving forward heads towards the endpoint 3.
        assert!(f.point(20.0).x() > 2.9);
        let b = GeodesicFrame::new(g, top, Direction::Backward).unwrap();
        assert!(b.point(20.0).x() < -0.9);
        for t in [-3.0, 0.5, 4.0] {
            assert_abs_diff_eq!(g.distance(f.point(t)), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn frame_rejects_off_line_origin() {
        let g = Geodesic::imaginary_axis();
        assert!(GeodesicFrame::new(g, hp(0.1, 1.0), Direction::Forward).is_err());
    }

    #[test]
    fn vertical_frames_both_directions() {
        let g = Geodesic::new(IdealPoint::Infinity, IdealPoint::Finite(2.0)).unwrap();
        let f = GeodesicFrame::new(g, hp(2.0, 3.0), Direction::Forward).unwrap();
        assert!(f.point(1.0).y() > 3.0);
        let b = GeodesicFrame::new(g, hp(2.0, 3.0), Direction::Backward).unwrap();
        assert!(b.point(1.0).y() < 3.0);
        assert_abs_diff_eq!(dist(b.point(1.0), hp(2.0, 3.0)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dist_to_imaginary_axis() {
        let g = Geodesic::imaginary_axis();
        for theta in [0.2f64, 0.7, 1.3, 2.4] {
            let p = hp(theta.cos(), theta.sin());
            let (d, foot) = dist_to_geodesic(p, &g);
            assert_abs_diff_eq!(d, (theta / 2.0).tan().ln().abs(), epsilon = 1e-12);
            assert_abs_diff_eq!(foot, 0.0, epsilon = 1e-12);
        }
        let (d, _) = dist_to_geodesic(hp(0.0, 1.0), &g);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn offset_point_examples() {
        let f = GeodesicFrame::canonical();
        assert_eq!(f.offset_point(0.0, 0.0), f.point(0.0));
        let p = f.offset_point(1.0, 1.0);
        let expect = (1f64.cosh() * 1f64.cosh()).acosh();
        assert_abs_diff_eq!(dist(f.point(0.0), p), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(expect, 1.513_374, epsilon = 1e-6);
        let q = f.offset_point(0.0, 0.8);
        assert_abs_diff_eq!(dist(f.point(0.0), q), 0.8, epsilon = 1e-12);
        // positive offsets are on the left of an upward-moving axis
        assert!(q.x() < 0.0);
    }

    #[test]
    fn isometry_examples() {
        let p = hp(0.4, 2.0);
        assert_eq!(Isometry::IDENTITY.apply(p), p);
        let m = Isometry::new(2.0, 0.0, 0.0, 1.0).unwrap();
        let q = m.apply(hp(0.0, 1.0));
        assert_abs_diff_eq!(q.y(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            dist(hp(0.0, 1.0), hp(0.0, 2.0)),
            dist(hp(0.0, 2.0), hp(0.0, 4.0)),
            epsilon = 1e-15
        );
        assert!(Isometry::new(1.0, 2.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn negative_determinant_maps_stay_in_half_plane() {
        let m = Isometry::new(1.0, 2.0, 3.0, 1.0).unwrap();
        assert!(!m.preserves_orientation());
        let p = hp(0.3, 0.4);
        let q = hp(-1.2, 2.0);
        assert!(m.apply(p).y() > 0.0);
        assert_abs_diff_eq!(dist(m.apply(p), m.apply(q)), dist(p, q), epsilon = 1e-12);
    }

    #[test]
    fn reflection_examples() {
        let g = Geodesic::imaginary_axis();
        let r = reflect(&g, hp(1.0, 1.0));
        assert_abs_diff_eq!(r.x(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y(), 1.0, epsilon = 1e-15);
        let on = hp(0.0, 3.0);
        assert_eq!(reflect(&g, on), on);
        let c = Geodesic::new(IdealPoint::Finite(-2.0), IdealPoint::Finite(1.0)).unwrap();
        let p = hp(0.5, 0.2);
        let pp = reflect(&c, reflect(&c, p));
        assert_abs_diff_eq!(dist(p, pp), 0.0, epsilon = 1e-12);
        let top = hp(-0.5, 1.5);
        assert_abs_diff_eq!(dist(reflect(&c, top), top), 0.0, epsilon = 1e-12);
        assert!(c.separates(p, reflect(&c, p)));
    }

    #[test]
    fn disk_conversion() {
        assert_eq!(HPoint::ORIGIN.to_disk(), (0.0, 0.0));
        assert!(HPoint::from_disk(1.0, 0.0).is_err());
        assert!(HPoint::from_disk(0.6, 0.9).is_err());
        let p = HPoint::from_disk(0.3, -0.2).unwrap();
        let (u, v) = p.to_disk();
        assert_abs_diff_eq!(u, 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(v, -0.2, epsilon = 1e-14);
    }

    #[test]
    fn polar_round_trip() {
        for (d, a) in [(0.5, 0.3), (3.0, -2.0), (7.0, 3.0)] {
            let p = HPoint::from_polar(d, a);
            let (dd, aa) = p.polar();
            assert_abs_diff_eq!(dd, d, epsilon = 1e-10);
            assert_abs_diff_eq!(aa, a, epsilon = 1e-10);
            let (u, v) = p.to_disk();
            assert_abs_diff_eq!(u.hypot(v), (d / 2.0).tanh(), epsilon = 1e-12);
        }
    }

    #[test]
    fn ideal_points_round_trip_through_disk() {
        for theta in [0.3, 1.0, PI, 4.0, 6.0] {
            let p = IdealPoint::from_disk_angle(theta);
            assert_abs_diff_eq!(wrap_angle(p.disk_angle()), theta, epsilon = 1e-12);
        }
        assert_eq!(IdealPoint::from_disk_angle(0.0), IdealPoint::Infinity);
    }

    #[test]
    fn geodesic_normalization() {
        let g1 = Geodesic::new(IdealPoint::Finite(2.0), IdealPoint::Finite(-1.0)).unwrap();
        let g2 = Geodesic::new(IdealPoint::Finite(-1.0), IdealPoint::Finite(2.0)).unwrap();
        assert_eq!(g1, g2);
        let v1 = Geodesic::new(IdealPoint::Infinity, IdealPoint::Finite(0.5)).unwrap();
        let v2 = Geodesic::new(IdealPoint::Finite(0.5), IdealPoint::Infinity).unwrap();
        assert_eq!(v1, v2);
        assert!(Geodesic::new(IdealPoint::Finite(1.0), IdealPoint::Finite(1.0)).is_err());
        assert!(Geodesic::new(IdealPoint::Infinity, IdealPoint::Infinity).is_err());
    }

    #[test]
    fn through_two_points() {
        let p = hp(0.2, 0.5);
        let q = hp(-1.0, 3.0);
        let f = GeodesicFrame::through(p, q).unwrap();
        assert_abs_diff_eq!(dist(f.point(0.0), p), 0.0, epsilon = 1e-12);
        let d = dist(p, q);
        assert_abs_diff_eq!(dist(f.point(d), q), 0.0, epsilon = 1e-10);
        let g = f.geodesic();
        assert!(g.distance(p) < 1e-12 && g.distance(q) < 1e-10);
        // nearly vertical pair
        let f2 = GeodesicFrame::through(hp(0.0, 1.0), hp(1e-13, 5.0)).unwrap();
        assert_abs_diff_eq!(
            dist(f2.point(5f64.ln()), hp(1e-13, 5.0)),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn center_frames_follow_disk_rays() {
        for angle in [0.0, 1.0, -2.5] {
            let f = GeodesicFrame::from_center(angle);
            let (u, v) = f.point(2.0).to_disk();
            assert_abs_diff_eq!(u, (1.0f64).tanh() * angle.cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(v, (1.0f64).tanh() * angle.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn ball_metrics_examples() {
        assert_eq!(ball_metrics(0.0), (0.0, 0.0));
        let (a, c) = ball_metrics(1.0);
        assert_abs_diff_eq!(a, 3.412_276, epsilon = 1e-6);
        assert_abs_diff_eq!(c, 7.384_007, epsilon = 1e-6);
        for r in [0.3, 1.0, 2.7] {
            let h = 1e-6;
            let deriv = (ball_metrics(r + h).0 - ball_metrics(r - h).0) / (2.0 * h);
            assert_abs_diff_eq!(deriv, ball_metrics(r).1, epsilon = 1e-6);
        }
    }
}
