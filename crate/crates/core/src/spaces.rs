//! Concrete two-dimensional spaces: model planes `M_κ` and cones over
//! circles.
//!
//! All three kinds are the κ-cone over a circle of length `θ_total`
//! (κ = 0 for Euclidean cones, κ = 1 for spherical cones, `θ_total = 2π`
//! for model planes). Points are geodesic polar coordinates `(r, φ)` about
//! the origin; spherical kinds carry a second pole at `r = π/√κ`.
//!
//! Direction conventions: at a non-pole point a direction is an angle in
//! `[0, 2π)` measured from the outward radial direction toward increasing
//! `φ`. At a pole a direction is the `φ` of the emanating ray.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model_trig::{self, sn, Kappa};
use crate::quadrature::{self, QuadratureError};

// directions this close to ±radial are treated as exactly radial
const RADIAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("point does not belong to this space: {0}")]
    SpaceMismatch(String),
    #[error("geodesic leaves its domain; maximal valid length is {max_t}")]
    GeodesicDomainExceeded { max_t: f64 },
    #[error("geodesic is not unique")]
    NonUniqueGeodesic,
    #[error("degenerate: points coincide")]
    Degenerate,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SpaceRepr {
    ModelPlane { kappa: f64 },
    EuclideanCone { theta_total: f64 },
    SphericalCone { theta_total: f64 },
}

/// A built-in space. Serializes as `{"kind": ..., "kappa" | "theta_total": ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub enum Space {
    ModelPlane { kappa: f64 },
    EuclideanCone { theta_total: f64 },
    SphericalCone { theta_total: f64 },
}

impl TryFrom<SpaceRepr> for Space {
    type Error = SpaceError;
    fn try_from(r: SpaceRepr) -> Result<Self, SpaceError> {
        match r {
            SpaceRepr::ModelPlane { kappa } => Space::model_plane(kappa),
            SpaceRepr::EuclideanCone { theta_total } => Space::euclidean_cone(theta_total),
            SpaceRepr::SphericalCone { theta_total } => Space::spherical_cone(theta_total),
        }
    }
}

impl From<Space> for SpaceRepr {
    fn from(s: Space) -> Self {
        match s {
            Space::ModelPlane { kappa } => SpaceRepr::ModelPlane { kappa },
            Space::EuclideanCone { theta_total } => SpaceRepr::EuclideanCone { theta_total },
            Space::SphericalCone { theta_total } => SpaceRepr::SphericalCone { theta_total },
        }
    }
}

/// Polar coordinates `(r, φ)`; `φ` is reduced mod `θ_total` and is 0 at poles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub r: f64,
    pub phi: f64,
}

/// A direction at `base` together with a magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: SpacePoint,
    pub dir: f64,
    pub mag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Route {
    Direct(f64),
    ThroughOrigin,
    ThroughFarPole,
}

fn check_theta(theta: f64) -> Result<f64, SpaceError> {
    if theta.is_finite() && theta > 0.0 {
        Ok(theta)
    } else {
        Err(SpaceError::InvalidSpace(format!(
            "cone angle {theta} must be finite and > 0"
        )))
    }
}

impl Space {
    pub fn model_plane(kappa: f64) -> Result<Self, SpaceError> {
        if !kappa.is_finite() {
            return Err(SpaceError::InvalidSpace(format!(
                "curvature {kappa} not finite"
            )));
        }
        Ok(Space::ModelPlane { kappa })
    }

    pub fn euclidean_cone(theta_total: f64) -> Result<Self, SpaceError> {
        Ok(Space::EuclideanCone {
            theta_total: check_theta(theta_total)?,
        })
    }

    pub fn spherical_cone(theta_total: f64) -> Result<Self, SpaceError> {
        Ok(Space::SphericalCone {
            theta_total: check_theta(theta_total)?,
        })
    }

    /// Curvature of the smooth part.
    pub fn kappa_model(&self) -> Kappa {
        match *self {
            Space::ModelPlane { kappa } => Kappa(kappa),
            Space::EuclideanCone { .. } => Kappa(0.0),
            Space::SphericalCone { .. } => Kappa(1.0),
        }
    }

    /// Declared lower curvature bound; wrong for cone angles above 2π.
    pub fn curvature_lower_bound(&self) -> Kappa {
        self.kappa_model()
    }

    pub fn theta_total(&self) -> f64 {
        match *self {
            Space::ModelPlane { .. } => TAU,
            Space::EuclideanCone { theta_total } | Space::SphericalCone { theta_total } => {
                theta_total
            }
        }
    }

    /// Radius of the far pole (infinite unless κ > 0).
    pub fn max_radius(&self) -> f64 {
        self.kappa_model().diameter()
    }

    /// The origin is a manifold point.
    pub fn smooth_origin(&self) -> bool {
        self.theta_total() == TAU
    }

    pub fn origin(&self) -> SpacePoint {
        SpacePoint { r: 0.0, phi: 0.0 }
    }

    pub fn far_pole(&self) -> Option<SpacePoint> {
        let m = self.max_radius();
        m.is_finite().then_some(SpacePoint { r: m, phi: 0.0 })
    }

    /// Cone points and poles that are not manifold points.
    pub fn singular_points(&self) -> Vec<SpacePoint> {
        if self.smooth_origin() {
            return Vec::new();
        }
        let mut v = vec![self.origin()];
        v.extend(self.far_pole());
        v
    }

    /// Validated point constructor; reduces `φ` and collapses poles.
    pub fn point(&self, r: f64, phi: f64) -> Result<SpacePoint, SpaceError> {
        if !r.is_finite() || !phi.is_finite() || r < 0.0 {
            return Err(SpaceError::InvalidPoint(format!("({r}, {phi})")));
        }
        let m = self.max_radius();
        if r > m * (1.0 + 1e-14) {
            return Err(SpaceError::InvalidPoint(format!(
                "radius {r} beyond the far pole {m}"
            )));
        }
        Ok(self.make(r.min(m), phi))
    }

    fn make(&self, r: f64, phi: f64) -> SpacePoint {
        if r <= 0.0 || r >= self.max_radius() {
            return SpacePoint {
                r: r.max(0.0),
                phi: 0.0,
            };
        }
        let th = self.theta_total();
        let mut p = phi.rem_euclid(th);
        if p >= th {
            p = 0.0;
        }
        SpacePoint { r, phi: p }
    }

    pub fn contains(&self, x: &SpacePoint) -> bool {
        x.r.is_finite()
            && x.phi.is_finite()
            && x.r >= 0.0
            && x.r <= self.max_radius()
            && x.phi >= 0.0
            && x.phi < self.theta_total()
    }

    fn check(&self, x: &SpacePoint) -> Result<(), SpaceError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(SpaceError::SpaceMismatch(format!("({}, {})", x.r, x.phi)))
        }
    }

    pub fn is_origin(&self, x: &SpacePoint) -> bool {
        x.r == 0.0
    }

    pub fn is_far_pole(&self, x: &SpacePoint) -> bool {
        x.r == self.max_radius()
    }

    pub fn is_pole(&self, x: &SpacePoint) -> bool {
        self.is_origin(x) || self.is_far_pole(x)
    }

    /// Length of the circle of directions at `x`.
    pub fn directions_circle_length(&self, x: &SpacePoint) -> f64 {
        if self.is_pole(x) {
            self.theta_total()
        } else {
            TAU
        }
    }

    /// Angle between two directions at `x`.
    pub fn direction_angle(&self, x: &SpacePoint, a: f64, b: f64) -> f64 {
        let l = self.directions_circle_length(x);
        let d = (a - b).rem_euclid(l);
        d.min(l - d).min(PI)
    }

    // angular gap on the circle of length θ_total, in [0, θ_total/2]
    fn gap(&self, a: f64, b: f64) -> f64 {
        let th = self.theta_total();
        let d = (a - b).rem_euclid(th);
        d.min(th - d)
    }

    // signed gap from a to b, in [-θ/2, θ/2]
    fn signed_gap(&self, a: f64, b: f64) -> f64 {
        let th = self.theta_total();
        let d = (b - a).rem_euclid(th);
        if d > 0.5 * th {
            d - th
        } else {
            d
        }
    }

    /// Distance without membership checks.
    pub fn dist(&self, x: &SpacePoint, y: &SpacePoint) -> f64 {
        if x.r == 0.0 {
            return y.r;
        }
        if y.r == 0.0 {
            return x.r;
        }
        let g = self.gap(x.phi, y.phi).min(PI);
        model_trig::model_side_raw(self.kappa_model(), x.r, y.r, g)
    }

    pub fn distance(&self, x: &SpacePoint, y: &SpacePoint) -> Result<f64, SpaceError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.dist(x, y))
    }

    /// Point at arclength `t` along the geodesic leaving `x` in direction `dir`.
    pub fn exp(&self, x: &SpacePoint, dir: f64, t: f64) -> Result<SpacePoint, SpaceError> {
        if !(t >= 0.0) || !t.is_finite() || !dir.is_finite() {
            return Err(SpaceError::InvalidPoint(format!(
                "exp with t={t}, dir={dir}"
            )));
        }
        if t == 0.0 {
            return Ok(*x);
        }
        let m = self.max_radius();
        if self.is_origin(x) {
            if t > m {
                return Err(SpaceError::GeodesicDomainExceeded { max_t: m });
            }
            return Ok(self.make(t, dir));
        }
        if self.is_far_pole(x) {
            if t > m {
                return Err(SpaceError::GeodesicDomainExceeded { max_t: m });
            }
            return Ok(self.make(m - t, dir));
        }
        if t > m {
            return Err(SpaceError::GeodesicDomainExceeded { max_t: m });
        }
        let a = dir.rem_euclid(TAU);
        if a < RADIAL_TOL || TAU - a < RADIAL_TOL {
            let r = x.r + t;
            if r <= m {
                return Ok(self.make(r, x.phi));
            }
            if self.smooth_origin() {
                return Ok(self.make(2.0 * m - r, x.phi + PI));
            }
            return Err(SpaceError::GeodesicDomainExceeded { max_t: m - x.r });
        }
        if (a - PI).abs() < RADIAL_TOL {
            if t <= x.r {
                return Ok(self.make(x.r - t, x.phi));
            }
            if self.smooth_origin() {
                return Ok(self.make(t - x.r, x.phi + PI));
            }
            return Err(SpaceError::GeodesicDomainExceeded { max_t: x.r });
        }
        let (rho, psi) = develop(self.kappa_model().0, x.r, a, t);
        Ok(self.make(rho.min(m), x.phi + psi))
    }

    pub fn exp_vector(&self, v: &TangentVector) -> Result<SpacePoint, SpaceError> {
        self.exp(&v.base, v.dir, v.mag)
    }

    fn route(&self, x: &SpacePoint, y: &SpacePoint) -> Result<(Route, f64), SpaceError> {
        let d = self.dist(x, y);
        if d == 0.0 {
            return Err(SpaceError::Degenerate);
        }
        if self.is_origin(x) {
            if self.is_far_pole(y) {
                return Err(SpaceError::NonUniqueGeodesic);
            }
            return Ok((Route::Direct(y.phi), d));
        }
        if self.is_far_pole(x) {
            if self.is_origin(y) {
                return Err(SpaceError::NonUniqueGeodesic);
            }
            return Ok((Route::Direct(y.phi), d));
        }
        if self.is_origin(y) {
            return Ok((Route::Direct(PI), d));
        }
        if self.is_far_pole(y) {
            return Ok((Route::Direct(0.0), d));
        }
        let delta = self.signed_gap(x.phi, y.phi);
        let g = delta.abs();
        if g < PI {
            if 2.0 * g == self.theta_total() {
                return Err(SpaceError::NonUniqueGeodesic);
            }
            return Ok((
                Route::Direct(unfolded_direction(self.kappa_model().0, x.r, y.r, delta)),
                d,
            ));
        }
        let m = self.max_radius();
        if !m.is_finite() {
            return Ok((Route::ThroughOrigin, d));
        }
        let inner = x.r + y.r;
        let outer = 2.0 * m - inner;
        if inner < outer {
            Ok((Route::ThroughOrigin, d))
        } else if outer < inner {
            Ok((Route::ThroughFarPole, d))
        } else {
            Err(SpaceError::NonUniqueGeodesic)
        }
    }

    /// Initial direction of the unique geodesic from `x` to `y`, with
    /// magnitude `|xy|`.
    pub fn log_direction(
        &self,
        x: &SpacePoint,
        y: &SpacePoint,
    ) -> Result<TangentVector, SpaceError> {
        self.check(x)?;
        self.check(y)?;
        let (route, d) = self.route(x, y)?;
        let dir = match route {
            Route::Direct(a) => a,
            Route::ThroughOrigin => PI,
            Route::ThroughFarPole => 0.0,
        };
        Ok(TangentVector {
            base: *x,
            dir: dir.rem_euclid(self.directions_circle_length(x)),
            mag: d,
        })
    }

    /// Point at fraction `t` along the unique geodesic from `x` to `y`.
    pub fn geodesic_point(
        &self,
        x: &SpacePoint,
        y: &SpacePoint,
        t: f64,
    ) -> Result<SpacePoint, SpaceError> {
        if t <= 0.0 {
            return Ok(*x);
        }
        if t >= 1.0 {
            return Ok(*y);
        }
        let (route, d) = match self.route(x, y) {
            Err(SpaceError::Degenerate) => return Ok(*x),
            other => other?,
        };
        let s = t * d;
        match route {
            Route::Direct(a) => self.exp(x, a, s),
            Route::ThroughOrigin => Ok(if s <= x.r {
                self.make(x.r - s, x.phi)
            } else {
                self.make(s - x.r, y.phi)
            }),
            Route::ThroughFarPole => {
                let m = self.max_radius();
                let up = m - x.r;
                Ok(if s <= up {
                    self.make(x.r + s, x.phi)
                } else {
                    self.make(m - (s - up), y.phi)
                })
            }
        }
    }

    /// Area of the closed ball `B(x, r)` by polar quadrature.
    pub fn ball_volume(&self, x: &SpacePoint, r: f64, tol: f64) -> Result<f64, SpaceError> {
        if !(r > 0.0) {
            return Ok(0.0);
        }
        let k = self.kappa_model();
        let th = self.theta_total();
        let m = self.max_radius();
        let area = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]| {
            quadrature::integrate(|rho| sn(k, rho) * f(rho), a, b, breaks, tol, 0.0)
        };
        if self.is_origin(x) {
            return Ok(area(&|_| th, 0.0, r.min(m), &[])?);
        }
        if self.is_far_pole(x) {
            return Ok(area(&|_| th, (m - r).max(0.0), m, &[])?);
        }
        let rx = x.r;
        let slice = |rho: f64| -> f64 {
            if rho <= 0.0 {
                return 0.0;
            }
            if (rho - rx).abs() > r {
                return 0.0;
            }
            if model_trig::model_side_raw(k, rx, rho, PI) <= r {
                return th;
            }
            (2.0 * model_trig::angle_raw(k, rx, rho, r)).min(th)
        };
        let lo = (rx - r).max(0.0);
        let hi = (rx + r).min(m);
        let breaks = [r - rx, rx - r, rx + r, 2.0 * m - rx - r];
        Ok(area(&slice, lo, hi, &breaks)?)
    }
}

// Develop the geodesic from (r, 0) with direction α for length t into the
// unit-scaled model; returns the polar coordinates (ρ, ψ) of the endpoint,
// ψ ∈ (−π, π].
fn develop(k: f64, r: f64, a: f64, t: f64) -> (f64, f64) {
    let (sa, ca) = a.sin_cos();
    if k == 0.0 {
        let y0 = r + t * ca;
        let y1 = t * sa;
        return (y0.hypot(y1), y1.atan2(y0));
    }
    let s = k.abs().sqrt();
    let (rr, tt) = (s * r, s * t);
    if k > 0.0 {
        let (sr, cr) = rr.sin_cos();
        let (st, ct) = tt.sin_cos();
        let y0 = sr * ct + ca * cr * st;
        let y1 = sa * st;
        let y2 = cr * ct - ca * sr * st;
        (y0.hypot(y1).atan2(y2) / s, y1.atan2(y0))
    } else {
        let (sr, cr) = (rr.sinh(), rr.cosh());
        let (st, ct) = (tt.sinh(), tt.cosh());
        let y0 = sr * ct + ca * cr * st;
        let y1 = sa * st;
        (y0.hypot(y1).asinh() / s, y1.atan2(y0))
    }
}

// Direction at (r1, 0) of the chart geodesic toward (r2, δ), |δ| < π.
fn unfolded_direction(k: f64, r1: f64, r2: f64, delta: f64) -> f64 {
    let (sd, cd) = delta.sin_cos();
    let a = if k == 0.0 {
        (r2 * sd).atan2(r2 * cd - r1)
    } else {
        let s = k.abs().sqrt();
        let (a1, a2) = (s * r1, s * r2);
        if k > 0.0 {
            let (s1, c1) = a1.sin_cos();
            let (s2, c2) = a2.sin_cos();
            let d0 = s2 * cd - s1;
            let d1 = s2 * sd;
            let d2 = c2 - c1;
            d1.atan2(d0 * c1 - d2 * s1)
        } else {
            let (s1, c1) = (a1.sinh(), a1.cosh());
            let (s2, c2) = (a2.sinh(), a2.cosh());
            let d0 = s2 * cd - s1;
            let d1 = s2 * sd;
            let d2 = c2 - c1;
            d1.atan2(d0 * c1 - d2 * s1)
        }
    };
    a.rem_euclid(TAU)
}
