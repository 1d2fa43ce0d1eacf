//! Distance-type semiconcave fields, their differentials and gradients.

use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model_trig::{cot_kappa, Kappa};
use crate::rng;
use crate::spaces::{Space, SpaceError, SpacePoint, TangentVector};

/// Net size used for spheres that are not metric circles.
pub const DEFAULT_NET_SIZE: usize = 256;
/// |∇f| below this is a critical point.
pub const CRITICAL_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid region: {0}")]
    RegionInvalid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("gradient check failed: df(v) exceeds <v,g> by {excess}")]
    CheckFailed { gradient: Gradient, excess: f64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Set(Vec<SpacePoint>),
    Sphere {
        center: SpacePoint,
        radius: f64,
        signed_inside: bool,
        net: Option<Vec<SpacePoint>>,
    },
    Affine {
        inner: Box<ScalarField>,
        scale: f64,
        offset: f64,
    },
}

/// A distance-type function on a space, or an affine image of one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    space: Space,
    kind: Kind,
}

/// Result of a direction scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub vector: TangentVector,
    pub regular: bool,
    /// More than one separated maximizing direction was found.
    pub multiplicity: bool,
    /// `max_v df(v) − <v, g>` over the scanned directions.
    pub check_excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientOptions {
    pub resolution: usize,
    pub refine_tol: f64,
    pub check_tol: f64,
    pub tie_tol: f64,
}

impl Default for GradientOptions {
    fn default() -> Self {
        GradientOptions {
            resolution: 720,
            refine_tol: 1e-10,
            check_tol: 1e-6,
            tie_tol: 1e-9,
        }
    }
}

impl ScalarField {
    /// `d_A` for a finite nonempty set `A`.
    pub fn dist_from_set(space: Space, points: Vec<SpacePoint>) -> Result<Self, FieldError> {
        if points.is_empty() {
            return Err(FieldError::InvalidField("empty base set".into()));
        }
        for p in &points {
            if !space.contains(p) {
                return Err(SpaceError::SpaceMismatch(format!("({}, {})", p.r, p.phi)).into());
            }
        }
        Ok(ScalarField {
            space,
            kind: Kind::Set(points),
        })
    }

    /// Distance from the metric sphere `S(p, R)`.
    ///
    /// Exact when `S(p, R)` is a metric circle (p a pole, or a ball that
    /// embeds in a chart); otherwise falls back to a net of
    /// [`DEFAULT_NET_SIZE`] rays.
    pub fn dist_from_sphere(
        space: Space,
        center: SpacePoint,
        radius: f64,
        signed_inside: bool,
    ) -> Result<Self, FieldError> {
        let mut f = Self::sphere(space, center, radius, signed_inside)?;
        if !regular_ball(&space, &center, radius) {
            f.set_net(DEFAULT_NET_SIZE)?;
        }
        Ok(f)
    }

    /// Distance from a net of `S(p, R)` along `n` equally spaced rays from
    /// the origin, regardless of symmetry.
    pub fn dist_from_sphere_net(
        space: Space,
        center: SpacePoint,
        radius: f64,
        signed_inside: bool,
        n: usize,
    ) -> Result<Self, FieldError> {
        let mut f = Self::sphere(space, center, radius, signed_inside)?;
        f.set_net(n)?;
        Ok(f)
    }

    fn sphere(
        space: Space,
        center: SpacePoint,
        radius: f64,
        signed_inside: bool,
    ) -> Result<Self, FieldError> {
        if !space.contains(&center) {
            return Err(
                SpaceError::SpaceMismatch(format!("({}, {})", center.r, center.phi)).into(),
            );
        }
        if !(radius > 0.0) || radius >= space.max_radius() {
            return Err(FieldError::InvalidField(format!(
                "sphere radius {radius} out of range"
            )));
        }
        Ok(ScalarField {
            space,
            kind: Kind::Sphere {
                center,
                radius,
                signed_inside,
                net: None,
            },
        })
    }

    fn set_net(&mut self, n: usize) -> Result<(), FieldError> {
        if n == 0 {
            return Err(FieldError::InvalidField(
                "net needs at least one ray".into(),
            ));
        }
        let space = self.space;
        if let Kind::Sphere {
            center,
            radius,
            net,
            ..
        } = &mut self.kind
        {
            let pts = sphere_net(&space, center, *radius, n);
            if pts.is_empty() {
                return Err(FieldError::InvalidField("sphere net is empty".into()));
            }
            *net = Some(pts);
        }
        Ok(())
    }

    /// `a·f + b`.
    pub fn affine(self, scale: f64, offset: f64) -> Self {
        let space = self.space;
        ScalarField {
            space,
            kind: Kind::Affine {
                inner: Box::new(self),
                scale,
                offset,
            },
        }
    }

    pub fn negated(self) -> Self {
        self.affine(-1.0, 0.0)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Center of a sphere field (through positive affine wrappers).
    pub fn center(&self) -> Option<SpacePoint> {
        match &self.kind {
            Kind::Sphere { center, .. } => Some(*center),
            Kind::Affine { inner, scale, .. } if *scale > 0.0 => inner.center(),
            _ => None,
        }
    }

    /// Net points, if the field uses one.
    pub fn net(&self) -> Option<&[SpacePoint]> {
        match &self.kind {
            Kind::Sphere { net, .. } => net.as_deref(),
            Kind::Affine { inner, .. } => inner.net(),
            _ => None,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match &self.kind {
            Kind::Affine { inner, scale, .. } => scale.abs() * inner.lipschitz(),
            _ => 1.0,
        }
    }

    pub fn evaluate(&self, x: &SpacePoint) -> f64 {
        let s = &self.space;
        match &self.kind {
            Kind::Set(a) => a.iter().map(|p| s.dist(x, p)).fold(f64::INFINITY, f64::min),
            Kind::Sphere {
                center,
                radius,
                signed_inside,
                net: None,
            } => {
                let d = s.dist(center, x);
                if *signed_inside {
                    radius - d
                } else {
                    let m = s.max_radius();
                    (radius - d).abs().min(2.0 * m - radius - d)
                }
            }
            Kind::Sphere {
                center,
                radius,
                signed_inside,
                net: Some(net),
            } => {
                let m = net
                    .iter()
                    .map(|q| s.dist(x, q))
                    .fold(f64::INFINITY, f64::min);
                if *signed_inside && s.dist(center, x) > *radius {
                    -m
                } else {
                    m
                }
            }
            Kind::Affine {
                inner,
                scale,
                offset,
            } => scale * inner.evaluate(x) + offset,
        }
    }

    /// Distance from `x` to the base set (`A`, or the sphere).
    pub fn base_distance(&self, x: &SpacePoint) -> f64 {
        match &self.kind {
            Kind::Set(_) => self.evaluate(x),
            Kind::Sphere { .. } => self.evaluate(x).abs(),
            Kind::Affine { inner, .. } => inner.base_distance(x),
        }
    }

    fn base_points(&self) -> &[SpacePoint] {
        match &self.kind {
            Kind::Set(a) => a,
            Kind::Sphere { net: Some(n), .. } => n,
            Kind::Sphere { net: None, .. } => &[],
            Kind::Affine { inner, .. } => inner.base_points(),
        }
    }

    /// Concavity modulus predicted by distance comparison at `x`.
    pub fn modulus(&self, kappa: Kappa, x: &SpacePoint) -> f64 {
        match &self.kind {
            Kind::Affine { inner, scale, .. } => scale * inner.modulus(kappa, x),
            _ => cot_kappa(kappa, self.base_distance(x)),
        }
    }

    fn step_scale(&self, x: &SpacePoint) -> f64 {
        let s = &self.space;
        let m = s.max_radius();
        let mut scale: f64 = 1.0;
        if s.is_pole(x) {
            scale = scale.min(0.5 * m);
        } else {
            scale = scale.min(x.r).min(m - x.r);
        }
        let b = self.base_distance(x);
        if b > 0.0 {
            scale = scale.min(b);
        }
        scale
    }

    fn differential_from(&self, x: &SpacePoint, fx: f64, dir: f64) -> Result<f64, FieldError> {
        let mut h = 1e-4 * self.step_scale(x);
        let mut tries = 0;
        let y1 = loop {
            match self.space.exp(x, dir, h) {
                Ok(y) => break y,
                Err(SpaceError::GeodesicDomainExceeded { max_t }) if max_t > 0.0 && tries < 60 => {
                    h = (0.5 * h).min(0.5 * max_t);
                    tries += 1;
                }
                Err(e) => return Err(e.into()),
            }
        };
        let y2 = self.space.exp(x, dir, 0.5 * h)?;
        let d1 = (self.evaluate(&y1) - fx) / h;
        let d2 = (self.evaluate(&y2) - fx) / (0.5 * h);
        Ok(2.0 * d2 - d1)
    }

    // Directions toward and away from the base points (or the center).
    fn candidate_dirs(&self, x: &SpacePoint) -> Vec<f64> {
        let s = &self.space;
        let mut targets: Vec<SpacePoint> = self.base_points().to_vec();
        if let Some(c) = self.center_any() {
            targets.push(c);
        }
        let mut out = Vec::new();
        for q in targets {
            if q == *x {
                continue;
            }
            if let Ok(v) = s.log_direction(x, &q) {
                out.push(v.dir);
                if !s.is_pole(x) {
                    out.push((v.dir + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU));
                }
            }
        }
        out
    }

    fn center_any(&self) -> Option<SpacePoint> {
        match &self.kind {
            Kind::Sphere { center, .. } => Some(*center),
            Kind::Affine { inner, .. } => inner.center_any(),
            Kind::Set(_) => None,
        }
    }

    /// One-sided directional derivative `d_x f(dir)`.
    pub fn differential(&self, x: &SpacePoint, dir: f64) -> Result<f64, FieldError> {
        self.differential_from(x, self.evaluate(x), dir)
    }

    /// Direction-scan gradient without the a posteriori check.
    pub fn gradient_unchecked(
        &self,
        x: &SpacePoint,
        opts: &GradientOptions,
    ) -> Result<Gradient, FieldError> {
        if opts.resolution < 16 {
            return Err(FieldError::InvalidArgument(format!(
                "scan resolution {} below 16",
                opts.resolution
            )));
        }
        let s = &self.space;
        let n = opts.resolution;
        let len = s.directions_circle_length(x);
        let step = len / n as f64;
        let fx = self.evaluate(x);
        let dirs: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
        let ds = dirs
            .iter()
            .map(|&a| self.differential_from(x, fx, a))
            .collect::<Result<Vec<_>, _>>()?;
        let maxv = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if maxv <= 0.0 {
            return Ok(Gradient {
                vector: TangentVector {
                    base: *x,
                    dir: 0.0,
                    mag: 0.0,
                },
                regular: false,
                multiplicity: false,
                check_excess: maxv,
            });
        }
        let tied: Vec<bool> = ds.iter().map(|&d| d >= maxv - opts.tie_tol).collect();
        let kstar = tied.iter().position(|&t| t).unwrap_or(0);
        // count cyclic runs of tied indices
        let runs = (0..n)
            .filter(|&k| tied[k] && !tied[(k + n - 1) % n])
            .count();
        let all = tied.iter().all(|&t| t);
        let multiplicity = all || runs > 1;
        let lonely = !tied[(kstar + 1) % n] && !tied[(kstar + n - 1) % n];

        let (mut dir, mut val) = (dirs[kstar], ds[kstar]);
        if lonely {
            let lo = dirs[kstar] - step;
            let hi = dirs[kstar] + step;
            let wrap = |a: f64| a.rem_euclid(len);
            let eval = |a: f64| self.differential_from(x, fx, wrap(a));
            let (a, v) = golden_max(eval, lo, hi, opts.refine_tol)?;
            if v > val {
                dir = wrap(a);
                val = v;
            }
            // prefer an exact geodesic direction when it matches the peak
            let mut best: Option<(f64, f64)> = None;
            for c in self.candidate_dirs(x) {
                if s.direction_angle(x, c, dir) < 2.0 * step {
                    let v = self.differential_from(x, fx, c)?;
                    if v >= val - opts.tie_tol.max(1e-6 * val.abs()) && best.is_none_or(|b| v > b.1)
                    {
                        best = Some((c, v));
                    }
                }
            }
            if let Some((c, v)) = best {
                dir = c;
                val = v;
            }
        }
        let excess = dirs
            .iter()
            .zip(&ds)
            .map(|(&a, &d)| d - val * s.direction_angle(x, a, dir).cos())
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Gradient {
            vector: TangentVector {
                base: *x,
                dir,
                mag: val,
            },
            regular: true,
            multiplicity,
            check_excess: excess,
        })
    }

    /// Gradient with the a posteriori check `df(v) ≤ <v, g> + check_tol`.
    pub fn gradient(&self, x: &SpacePoint, opts: &GradientOptions) -> Result<Gradient, FieldError> {
        let g = self.gradient_unchecked(x, opts)?;
        if g.check_excess > opts.check_tol {
            return Err(FieldError::CheckFailed {
                gradient: g,
                excess: g.check_excess,
            });
        }
        Ok(g)
    }
}

// A ball B(p, R) with p off the poles is a chart disk (hence S(p,R) a metric
// circle) when it stays off the singular points.
fn regular_ball(space: &Space, p: &SpacePoint, radius: f64) -> bool {
    if space.is_pole(p) || space.smooth_origin() {
        return true;
    }
    let k = space.kappa_model();
    if radius >= p.r || p.r + radius >= space.max_radius() {
        return false;
    }
    let half = (crate::model_trig::sn(k, radius) / crate::model_trig::sn(k, p.r)).asin();
    2.0 * half <= space.theta_total()
}

// Points of S(p, R) on n equally spaced rays from the origin.
fn sphere_net(space: &Space, p: &SpacePoint, radius: f64, n: usize) -> Vec<SpacePoint> {
    let th = space.theta_total();
    let m = space.max_radius();
    let hi = (p.r + radius).min(m);
    let mut out = Vec::new();
    for j in 0..n {
        let phi = th * j as f64 / n as f64;
        let g = |rho: f64| {
            let q = SpacePoint {
                r: rho,
                phi: if rho <= 0.0 || rho >= m { 0.0 } else { phi },
            };
            space.dist(p, &q) - radius
        };
        // minimize along the ray, then bracket roots on each side
        let (rmin, vmin) = golden_min(&g, 0.0, hi, 1e-13);
        if vmin > 0.0 {
            continue;
        }
        let mut push = |rho: f64| {
            if let Ok(q) = space.point(rho, phi) {
                if !out.iter().any(|o: &SpacePoint| space.dist(o, &q) < 1e-12) {
                    out.push(q);
                }
            }
        };
        if g(0.0) >= 0.0 {
            push(bisect(&g, 0.0, rmin));
        }
        if g(hi) >= 0.0 {
            push(bisect(&g, rmin, hi));
        }
    }
    out
}

fn bisect<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> f64 {
    let ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        if (g(m) >= 0.0) == (ga >= 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_min<G: Fn(f64) -> f64>(g: &G, a0: f64, b0: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a0, b0);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while (b - a).abs() > tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    // the minimum may sit at an endpoint (e.g. rays through the center)
    [(c, gc), (d, gd), (a0, g(a0)), (b0, g(b0))]
        .into_iter()
        .fold((c, gc), |acc, v| if v.1 < acc.1 { v } else { acc })
}

fn golden_max<G: Fn(f64) -> Result<f64, FieldError>>(
    g: G,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64), FieldError> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while (b - a).abs() > tol {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d)?;
        }
    }
    Ok(if gc > gd { (c, gc) } else { (d, gd) })
}

// ---------------------------------------------------------------------------
// Regions and concavity verification
// ---------------------------------------------------------------------------

/// Annulus `inner ≤ |center, x| ≤ outer` (a ball when `inner = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: SpacePoint,
    #[serde(default)]
    pub inner: f64,
    pub outer: f64,
}

impl Region {
    pub fn ball(center: SpacePoint, radius: f64) -> Self {
        Region {
            center,
            inner: 0.0,
            outer: radius,
        }
    }

    pub fn annulus(center: SpacePoint, inner: f64, outer: f64) -> Self {
        Region {
            center,
            inner,
            outer,
        }
    }

    pub fn validate(&self, space: &Space) -> Result<(), FieldError> {
        if !space.contains(&self.center) {
            return Err(FieldError::RegionInvalid("center not in space".into()));
        }
        if !(self.inner >= 0.0 && self.outer > self.inner && self.outer.is_finite()) {
            return Err(FieldError::RegionInvalid(format!(
                "need 0 <= inner < outer, got {} and {}",
                self.inner, self.outer
            )));
        }
        Ok(())
    }

    pub fn contains(&self, space: &Space, x: &SpacePoint) -> bool {
        let d = space.dist(&self.center, x);
        d >= self.inner && d <= self.outer
    }

    /// Random point, uniform in flat area around the center.
    pub fn sample<R: rand::Rng>(&self, space: &Space, rng: &mut R) -> Option<SpacePoint> {
        let (a2, b2) = (self.inner * self.inner, self.outer * self.outer);
        for _ in 0..1000 {
            let rho = (a2 + rng.random::<f64>() * (b2 - a2))
                .sqrt()
                .min(space.max_radius());
            let x = if space.is_pole(&self.center) {
                let phi = rng.random::<f64>() * space.theta_total();
                if space.is_origin(&self.center) {
                    space.point(rho, phi).ok()?
                } else {
                    space.point(space.max_radius() - rho, phi).ok()?
                }
            } else {
                let a = rng.random::<f64>() * TAU;
                match space.exp(&self.center, a, rho) {
                    Ok(x) => x,
                    Err(_) => continue,
                }
            };
            if self.contains(space, &x) {
                return Some(x);
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityWitness {
    pub point: SpacePoint,
    pub direction: f64,
    pub second_difference: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    /// Modulus λ(x) at the worst sample.
    pub modulus_bound: f64,
    /// Largest `f(γ(h)) + f(γ(−h)) − 2f(γ(0)) − λ h²`.
    pub worst_violation: f64,
    /// `tol·h²`; pass iff `worst_violation ≤ tolerance`.
    pub tolerance: f64,
    pub h: f64,
    pub samples: usize,
    pub seed: u64,
    pub witness: Option<ConcavityWitness>,
    pub pass: bool,
}

/// Samples geodesic segments of length `2h` centered in `region` and tests
/// `f(γ(h)) + f(γ(−h)) − 2f(γ(0)) ≤ λ(γ(0)) h² + tol h²` with
/// `λ = cs_κ(d_A)/sn_κ(d_A)` scaled by any affine wrapper.
pub fn verify_concavity(
    f: &ScalarField,
    region: &Region,
    kappa: Kappa,
    samples: usize,
    h: f64,
    tol: f64,
    seed: u64,
) -> Result<ConcavityReport, FieldError> {
    let space = *f.space();
    region.validate(&space)?;
    if !(h > 0.0) || !(tol >= 0.0) {
        return Err(FieldError::InvalidArgument(format!(
            "need h > 0 and tol >= 0, got {h}, {tol}"
        )));
    }
    if let Some(a) = f.base_points().iter().find(|a| region.contains(&space, a)) {
        return Err(FieldError::RegionInvalid(format!(
            "region contains base point ({}, {})",
            a.r, a.phi
        )));
    }
    let cap = if kappa.0 > 0.0 {
        0.5 * kappa.diameter()
    } else {
        f64::INFINITY
    };
    let mut rng = rng::stream(seed, 0);
    let mut worst: Option<ConcavityWitness> = None;
    let mut worst_v = f64::NEG_INFINITY;
    let mut done = 0;
    let mut attempts = 0usize;
    while done < samples {
        attempts += 1;
        if attempts > 1000 * samples.max(1) {
            return Err(FieldError::RegionInvalid(
                "could not sample admissible segments".into(),
            ));
        }
        let Some(x) = region.sample(&space, &mut rng) else {
            return Err(FieldError::RegionInvalid(
                "region has no samplable points".into(),
            ));
        };
        let a = rng.random::<f64>() * TAU;
        if space.is_pole(&x) {
            continue;
        }
        let dist_a = f.base_distance(&x);
        if dist_a <= 0.0 {
            return Err(FieldError::RegionInvalid(
                "region meets the base set".into(),
            ));
        }
        if dist_a >= cap {
            return Err(FieldError::RegionInvalid(
                "region exceeds the κ > 0 distance cap".into(),
            ));
        }
        if dist_a <= 2.0 * h {
            continue;
        }
        let (Ok(yp), Ok(ym)) = (space.exp(&x, a, h), space.exp(&x, a + PI, h)) else {
            continue;
        };
        if !region.contains(&space, &yp) || !region.contains(&space, &ym) {
            continue;
        }
        let sd = f.evaluate(&yp) + f.evaluate(&ym) - 2.0 * f.evaluate(&x);
        let lam = f.modulus(kappa, &x);
        let v = sd - lam * h * h;
        if v > worst_v {
            worst_v = v;
            worst = Some(ConcavityWitness {
                point: x,
                direction: a,
                second_difference: sd,
                modulus: lam,
            });
        }
        done += 1;
    }
    let tolerance = tol * h * h;
    Ok(ConcavityReport {
        modulus_bound: worst.map_or(0.0, |w| w.modulus),
        worst_violation: worst_v,
        tolerance,
        h,
        samples,
        seed,
        witness: worst,
        pass: worst_v <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone() -> Space {
        Space::euclidean_cone(1.5 * PI).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let s = cone();
        let f = ScalarField::dist_from_sphere(s, s.origin(), 1.0, false).unwrap();
        assert_eq!(f.evaluate(&s.origin()), 1.0);
        let a = s.point(0.4, 1.0).unwrap();
        let g = ScalarField::dist_from_set(s, vec![a]).unwrap();
        assert_eq!(g.evaluate(&a), 0.0);
        let s = Space::euclidean_cone(PI).unwrap();
        let f = ScalarField::dist_from_sphere(s, s.origin(), 1.0, true).unwrap();
        assert_eq!(f.evaluate(&s.point(0.25, 2.0).unwrap()), 0.75);
    }

    #[test]
    fn differential_examples() {
        let m = Space::model_plane(0.0).unwrap();
        let a = m.point(1.0, 0.3).unwrap();
        let x = m.point(2.0, 1.1).unwrap();
        let f = ScalarField::dist_from_set(m, vec![a]).unwrap();
        let v = m.log_direction(&x, &a).unwrap();
        assert!((f.differential(&x, v.dir).unwrap() + 1.0).abs() < 1e-9);
        assert!((f.differential(&x, v.dir + PI).unwrap() - 1.0).abs() < 1e-9);
        let s = cone();
        let f = ScalarField::dist_from_sphere(s, s.origin(), 1.0, true).unwrap();
        let x = s.point(0.3, 0.2).unwrap();
        assert!((f.differential(&x, PI).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gradient_examples() {
        let s = cone();
        let f = ScalarField::dist_from_sphere(s, s.origin(), 1.0, false).unwrap();
        let opts = GradientOptions::default();
        let g = f.gradient(&s.point(0.4, 1.0).unwrap(), &opts).unwrap();
        assert!(g.regular);
        assert!((g.vector.mag - 1.0).abs() < 1e-9);
        assert!((g.vector.dir - PI).abs() < 1e-8);
        let g = f.gradient(&s.origin(), &opts).unwrap();
        assert!(!g.regular);
        assert_eq!(g.vector.mag, 0.0);
        // at the center of a point-distance the direction scan is flat
        let a = s.point(0.5, 0.5).unwrap();
        let d = ScalarField::dist_from_set(s, vec![a]).unwrap();
        match d.gradient(&a, &opts) {
            Err(FieldError::CheckFailed { gradient, .. }) => {
                assert!(gradient.regular && gradient.multiplicity);
                assert!((gradient.vector.mag - 1.0).abs() < 1e-9);
                assert_eq!(gradient.vector.dir, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sphere_net_on_pole() {
        let s = cone();
        let f = ScalarField::dist_from_sphere_net(s, s.origin(), 1.0, false, 64).unwrap();
        let net = f.net().unwrap();
        assert_eq!(net.len(), 64);
        assert!(net.iter().all(|q| (q.r - 1.0).abs() < 1e-12));
        let x = s.point(0.3, 0.0).unwrap();
        assert!((f.evaluate(&x) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn off_center_sphere_uses_net() {
        let s = cone();
        let p = s.point(0.5, 0.0).unwrap();
        let f = ScalarField::dist_from_sphere(s, p, 1.0, false).unwrap();
        let net = f.net().unwrap();
        assert!(net.iter().all(|q| (s.dist(&p, q) - 1.0).abs() < 1e-9));
        let g = ScalarField::dist_from_sphere(s, p, 0.2, false).unwrap();
        assert!(g.net().is_none());
    }

    #[test]
    fn concavity_on_cone_and_plane() {
        let s = cone();
        let f = ScalarField::dist_from_set(s, vec![s.origin()]).unwrap();
        let region = Region::annulus(s.origin(), 0.5, 1.0);
        let r = verify_concavity(&f, &region, Kappa(0.0), 500, 1e-3, 1e-6, 3).unwrap();
        assert!(r.pass, "{r:?}");
        let r = verify_concavity(&f.negated(), &region, Kappa(0.0), 500, 1e-3, 1e-6, 3).unwrap();
        assert!(!r.pass);
        assert!(r.worst_violation >= 0.9e-6);
        let inside = Region::ball(s.origin(), 1.0);
        let f = ScalarField::dist_from_set(s, vec![s.origin()]).unwrap();
        assert!(verify_concavity(&f, &inside, Kappa(0.0), 10, 1e-3, 1e-6, 3).is_err());
    }
}
