//! Gradient curves of distance-type fields and the contraction checks built
//! on them.
//!
//! Curves are integrated by explicit geodesic stepping
//! `x ← exp(x, dir ∇f, h|∇f|)` with step halving until the observed
//! increment of `f` matches `|∇f|² h`.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::semiconcave::{FieldError, GradientOptions, ScalarField, CRITICAL_THRESHOLD};
use crate::spaces::{Space, SpaceError, SpacePoint};

// snapping to the center only when the step heads within this angle of it
const SNAP_ANGLE: f64 = FRAC_PI_4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),
    #[error("gradient curve left the geodesic domain at t = {}", partial.samples.last().map_or(0.0, |s| s.t))]
    GeodesicDomainExceeded {
        partial: Box<GradientCurve>,
        max_t: f64,
    },
    #[error("certificate failed: {}", witness.kind)]
    CertificateFailed {
        certificate: Box<SllcCertificate>,
        witness: Box<CertificateWitness>,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

fn default_step_tol() -> f64 {
    1e-3
}
fn default_max_step() -> f64 {
    1e-3
}
fn default_resolution() -> usize {
    720
}

/// Parameters of the contraction construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowParams {
    pub eps: f64,
    pub delta0: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub lambda: f64,
    #[serde(default = "default_step_tol")]
    pub step_tol: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    /// Floor for step halving; `None` means `max_step / 256`. Setting it to
    /// `max_step` gives fixed-step Euler.
    #[serde(default)]
    pub min_step: Option<f64>,
    #[serde(default = "default_resolution")]
    pub scan_resolution: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams::new(0.1, 0.05, 1.0).expect("default flow parameters are valid")
    }
}

impl FlowParams {
    /// Parameters with `λ = cosh R / sinh(R(1−δ₀))` and default step controls.
    pub fn new(eps: f64, delta0: f64, radius: f64) -> Result<Self, FlowError> {
        let p = FlowParams {
            eps,
            delta0,
            radius,
            lambda: Self::lambda_bound(radius, delta0),
            step_tol: default_step_tol(),
            max_step: default_max_step(),
            min_step: None,
            scan_resolution: default_resolution(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn lambda_bound(radius: f64, delta0: f64) -> f64 {
        radius.cosh() / (radius * (1.0 - delta0)).sinh()
    }

    /// Total flow time `ℓ = δ₀R / cos ε`.
    pub fn ell(&self) -> f64 {
        self.delta0 * self.radius / self.eps.cos()
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: String| Err(FlowError::InvalidParams(m));
        if !(self.eps > 0.0 && self.eps < std::f64::consts::PI / 6.0) {
            return bad(format!("eps = {} outside (0, π/6)", self.eps));
        }
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return bad(format!("delta0 = {} outside (0, 1)", self.delta0));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("R = {} must be positive", self.radius));
        }
        let lb = Self::lambda_bound(self.radius, self.delta0);
        if !(self.lambda >= lb * (1.0 - 1e-12)) || !self.lambda.is_finite() {
            return bad(format!("lambda = {} below the bound {lb}", self.lambda));
        }
        if !(self.step_tol > 0.0) || !(self.max_step > 0.0) {
            return bad("step_tol and max_step must be positive".into());
        }
        if let Some(m) = self.min_step {
            if !(m > 0.0) {
                return bad(format!("min_step = {m} must be positive"));
            }
        }
        if self.scan_resolution < 16 {
            return bad(format!(
                "scan_resolution = {} below 16",
                self.scan_resolution
            ));
        }
        Ok(())
    }

    fn gradient_options(&self) -> GradientOptions {
        GradientOptions {
            resolution: self.scan_resolution,
            ..GradientOptions::default()
        }
    }

    pub fn min_step(&self) -> f64 {
        self.min_step
            .unwrap_or(self.max_step / 256.0)
            .min(self.max_step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxTime,
    CriticalPoint,
    DomainExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub point: SpacePoint,
    pub f_value: f64,
    pub grad_norm: f64,
    /// Direction and length of the segment leaving this sample.
    #[serde(skip)]
    dir: f64,
    #[serde(skip)]
    step_len: f64,
}

/// Time-stamped piecewise-geodesic curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCurve {
    pub samples: Vec<CurveSample>,
    pub termination: Termination,
    /// Steps accepted at the minimum step size without meeting `step_tol`.
    pub forced_steps: usize,
}

impl GradientCurve {
    pub fn end_point(&self) -> SpacePoint {
        self.samples
            .last()
            .map(|s| s.point)
            .expect("curves have at least one sample")
    }

    /// Position at `time`, following the stored geodesic segments. Constant
    /// after the last sample.
    pub fn position_at(&self, space: &Space, time: f64) -> SpacePoint {
        let s = &self.samples;
        if time <= s[0].t {
            return s[0].point;
        }
        let last = s.len() - 1;
        if time >= s[last].t {
            return s[last].point;
        }
        let i = s.partition_point(|c| c.t <= time) - 1;
        let (a, b) = (&s[i], &s[i + 1]);
        let frac = (time - a.t) / (b.t - a.t);
        if a.step_len == 0.0 || a.point == b.point {
            return a.point;
        }
        space
            .exp(&a.point, a.dir, frac * a.step_len)
            .or_else(|_| space.geodesic_point(&a.point, &b.point, frac))
            .unwrap_or(if frac < 0.5 { a.point } else { b.point })
    }

    /// First sample time at which the curve sits at `p`.
    pub fn arrival_time(&self, p: &SpacePoint) -> Option<f64> {
        self.samples.iter().find(|s| s.point == *p).map(|s| s.t)
    }

    /// CSV with columns `t,r,phi,f,grad_norm`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "r", "phi", "f", "grad_norm"])
            .expect("in-memory write");
        for s in &self.samples {
            w.write_record(
                [s.t, s.point.r, s.point.phi, s.f_value, s.grad_norm].map(|v| v.to_string()),
            )
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Integrates the gradient curve of `f` from `x0` up to time `t_max`.
pub fn integrate(
    f: &ScalarField,
    x0: &SpacePoint,
    t_max: f64,
    params: &FlowParams,
) -> Result<GradientCurve, FlowError> {
    params.validate()?;
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(FlowError::InvalidParams(format!(
            "t_max = {t_max} must be finite and >= 0"
        )));
    }
    let space = *f.space();
    if !space.contains(x0) {
        return Err(SpaceError::SpaceMismatch(format!("({}, {})", x0.r, x0.phi)).into());
    }
    let opts = params.gradient_options();
    let center = f.center();
    let mut x = *x0;
    let mut fx = f.evaluate(&x);
    let mut t = 0.0;
    let mut samples: Vec<CurveSample> = Vec::new();
    let mut forced = 0;
    let mut h_try = params.max_step;

    let freeze = |samples: &mut Vec<CurveSample>, x: SpacePoint, fx: f64, t: f64| {
        if t < t_max {
            samples.push(CurveSample {
                t: t_max,
                point: x,
                f_value: fx,
                grad_norm: 0.0,
                dir: 0.0,
                step_len: 0.0,
            });
        }
    };

    loop {
        if center == Some(x) {
            samples.push(CurveSample {
                t,
                point: x,
                f_value: fx,
                grad_norm: 0.0,
                dir: 0.0,
                step_len: 0.0,
            });
            freeze(&mut samples, x, fx, t);
            return Ok(GradientCurve {
                samples,
                termination: Termination::CriticalPoint,
                forced_steps: forced,
            });
        }
        let g = f.gradient_unchecked(&x, &opts)?;
        let gn = g.vector.mag;
        samples.push(CurveSample {
            t,
            point: x,
            f_value: fx,
            grad_norm: gn,
            dir: g.vector.dir,
            step_len: 0.0,
        });
        if gn < CRITICAL_THRESHOLD {
            freeze(&mut samples, x, fx, t);
            return Ok(GradientCurve {
                samples,
                termination: Termination::CriticalPoint,
                forced_steps: forced,
            });
        }
        if t >= t_max {
            return Ok(GradientCurve {
                samples,
                termination: Termination::MaxTime,
                forced_steps: forced,
            });
        }
        let mut h = h_try.min(t_max - t);

        // land exactly on the center when this step would reach it
        if let Some(c) = center {
            let dc = space.dist(&x, &c);
            if let Ok(v) = space.log_direction(&x, &c) {
                let beta = space.direction_angle(&x, g.vector.dir, v.dir);
                let dt = dc / (gn * beta.cos());
                let close = (beta < SNAP_ANGLE && dt <= h * (1.0 + 1e-6)) || dc <= 1e-10;
                if close && t + dt <= t_max + 1e-12 {
                    let last = samples.last_mut().expect("pushed above");
                    last.dir = v.dir;
                    last.step_len = dc;
                    t += dt;
                    x = c;
                    fx = f.evaluate(&x);
                    continue;
                }
            }
        }

        let (y, fy) = loop {
            let y = match space.exp(&x, g.vector.dir, h * gn) {
                Ok(y) => y,
                Err(SpaceError::GeodesicDomainExceeded { max_t }) => {
                    let partial = GradientCurve {
                        samples,
                        termination: Termination::DomainExit,
                        forced_steps: forced,
                    };
                    return Err(FlowError::GeodesicDomainExceeded {
                        partial: Box::new(partial),
                        max_t,
                    });
                }
                Err(e) => return Err(e.into()),
            };
            let fy = f.evaluate(&y);
            let mismatch = (fy - fx - gn * gn * h).abs();
            if mismatch <= params.step_tol * h {
                break (y, fy);
            }
            if h <= params.min_step() {
                forced += 1;
                break (y, fy);
            }
            h *= 0.5;
        };
        let last = samples.last_mut().expect("pushed above");
        last.step_len = h * gn;
        t += h;
        x = y;
        fx = fy;
        h_try = (2.0 * h).min(params.max_step);
    }
}

/// `Φ(x, t)` for each starting point.
pub fn flow_map(
    f: &ScalarField,
    xs: &[SpacePoint],
    t: f64,
    params: &FlowParams,
) -> Result<Vec<SpacePoint>, FlowError> {
    xs.par_iter()
        .map(|x| integrate(f, x, t, params).map(|c| c.end_point()))
        .collect()
}

/// `|Φ(x, s+t), Φ(Φ(x, s), t)|`.
pub fn semigroup_defect(
    f: &ScalarField,
    x: &SpacePoint,
    s: f64,
    t: f64,
    params: &FlowParams,
) -> Result<f64, FlowError> {
    let whole = integrate(f, x, s + t, params)?.end_point();
    let mid = integrate(f, x, s, params)?.end_point();
    let split = integrate(f, &mid, t, params)?.end_point();
    Ok(f.space().dist(&whole, &split))
}

/// Semigroup defects under step refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupStudy {
    pub steps: Vec<f64>,
    /// sup of the defect over all starts and `(s, t)` pairs, per step
    pub defects: Vec<f64>,
    /// `defects[i] / defects[i+1]`
    pub ratios: Vec<f64>,
    pub orders: Vec<f64>,
    pub cases: usize,
}

/// Runs fixed-step Euler (`min_step = max_step = h`) for each `h` in `steps`
/// and records the sup of [`semigroup_defect`]. For distance-type fields the
/// defect comes from zigzagging across ridges, whose size depends on the
/// phase of `s` and `t` against the step; the `(s, t)` grid should cover
/// several phases.
pub fn semigroup_study(
    f: &ScalarField,
    starts: &[SpacePoint],
    s_values: &[f64],
    t_values: &[f64],
    params: &FlowParams,
    steps: &[f64],
) -> Result<SemigroupStudy, FlowError> {
    let cases: Vec<(SpacePoint, f64, f64)> = starts
        .iter()
        .flat_map(|x| {
            s_values
                .iter()
                .flat_map(move |&s| t_values.iter().map(move |&t| (*x, s, t)))
        })
        .collect();
    let mut defects = Vec::with_capacity(steps.len());
    for &h in steps {
        let p = FlowParams {
            max_step: h,
            min_step: Some(h),
            ..*params
        };
        p.validate()?;
        let d = cases
            .par_iter()
            .map(|(x, s, t)| semigroup_defect(f, x, *s, *t, &p))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        defects.push(d);
    }
    let ratios: Vec<f64> = defects.windows(2).map(|w| w[0] / w[1]).collect();
    let orders = ratios
        .iter()
        .zip(steps.windows(2))
        .map(|(r, w)| r.ln() / (w[0] / w[1]).ln())
        .collect();
    Ok(SemigroupStudy {
        steps: steps.to_vec(),
        defects,
        ratios,
        orders,
        cases: cases.len(),
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub pairs: usize,
    pub checks: usize,
    /// max over checks of `|Φ_s x, Φ_s y| / |x, y|`
    pub max_ratio: f64,
    /// max over checks of the ratio divided by `e^{λs}`
    pub max_ratio_to_bound: f64,
    pub worst_s: f64,
    pub violations: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ContractionReport {
    fn empty(tol: f64) -> Self {
        ContractionReport {
            pairs: 0,
            checks: 0,
            max_ratio: 0.0,
            max_ratio_to_bound: 0.0,
            worst_s: 0.0,
            violations: 0,
            tolerance: tol,
            pass: true,
        }
    }

    pub fn merge(mut self, o: ContractionReport) -> Self {
        self.pairs += o.pairs;
        self.checks += o.checks;
        self.max_ratio = self.max_ratio.max(o.max_ratio);
        if o.max_ratio_to_bound > self.max_ratio_to_bound {
            self.max_ratio_to_bound = o.max_ratio_to_bound;
            self.worst_s = o.worst_s;
        }
        self.violations += o.violations;
        self.pass &= o.pass;
        self
    }
}

fn contraction_of(
    space: &Space,
    cx: &GradientCurve,
    cy: &GradientCurve,
    s_grid: &[f64],
    lambda: f64,
    tol: f64,
) -> ContractionReport {
    let mut r = ContractionReport::empty(tol);
    r.pairs = 1;
    let d0 = space.dist(&cx.samples[0].point, &cy.samples[0].point);
    for &s in s_grid {
        let ds = space.dist(&cx.position_at(space, s), &cy.position_at(space, s));
        let bound = (lambda * s).exp();
        r.checks += 1;
        let ok = if d0 > 0.0 {
            let ratio = ds / d0;
            r.max_ratio = r.max_ratio.max(ratio);
            if ratio / bound > r.max_ratio_to_bound {
                r.max_ratio_to_bound = ratio / bound;
                r.worst_s = s;
            }
            ratio <= bound * (1.0 + tol)
        } else {
            ds <= tol
        };
        if !ok {
            r.violations += 1;
            r.pass = false;
        }
    }
    r
}

/// Checks `|Φ_s x, Φ_s y| ≤ e^{λs}|x, y|(1 + tol)` on `s_grid`.
pub fn check_contraction(
    f: &ScalarField,
    x: &SpacePoint,
    y: &SpacePoint,
    s_grid: &[f64],
    params: &FlowParams,
    tol: f64,
) -> Result<ContractionReport, FlowError> {
    check_contraction_pairs(f, &[(*x, *y)], s_grid, params, tol)
}

/// Batch form of [`check_contraction`] with an order-stable merge.
pub fn check_contraction_pairs(
    f: &ScalarField,
    pairs: &[(SpacePoint, SpacePoint)],
    s_grid: &[f64],
    params: &FlowParams,
    tol: f64,
) -> Result<ContractionReport, FlowError> {
    let s_max = s_grid.iter().copied().fold(0.0, f64::max);
    let space = *f.space();
    let reports = pairs
        .par_iter()
        .map(|(x, y)| {
            let cx = integrate(f, x, s_max, params)?;
            let cy = integrate(f, y, s_max, params)?;
            Ok(contraction_of(&space, &cx, &cy, s_grid, params.lambda, tol))
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    Ok(reports
        .into_iter()
        .fold(ContractionReport::empty(tol), ContractionReport::merge))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalReport {
    pub starts: usize,
    /// max of `arrival time − |x,p|/cos ε`
    pub max_arrival_excess: f64,
    pub max_arrival_time: f64,
    /// max of `|Φ_t x, p| − (|x,p| − t cos ε)` while the bound is positive
    pub max_decay_excess: f64,
    pub all_arrived: bool,
    pub freeze_exact: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks the linear decay `|Φ_t x, p| ≤ |x,p| − t cos ε`, arrival by
/// `|x,p|/cos ε`, and that curves stay at `p` afterwards.
pub fn check_arrival(
    f: &ScalarField,
    p: &SpacePoint,
    xs: &[SpacePoint],
    params: &FlowParams,
    tol: f64,
) -> Result<ArrivalReport, FlowError> {
    let space = *f.space();
    let ce = params.eps.cos();
    let rows = xs
        .par_iter()
        .map(|x| {
            let d0 = space.dist(x, p);
            let deadline = d0 / ce;
            // run past the deadline to observe the freeze
            let c = integrate(f, x, deadline + 10.0 * params.max_step + tol, params)?;
            let mut decay: f64 = f64::NEG_INFINITY;
            for s in &c.samples {
                let bound = d0 - s.t * ce;
                if bound > 0.0 {
                    decay = decay.max(space.dist(&s.point, p) - bound);
                }
            }
            let arrival = c.arrival_time(p);
            let frozen = match c.samples.iter().position(|s| s.point == *p) {
                Some(i) => c.samples[i..].iter().all(|s| s.point == *p),
                None => false,
            };
            Ok((arrival.map(|a| (a, a - deadline)), decay, frozen))
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    let mut r = ArrivalReport {
        starts: xs.len(),
        max_arrival_excess: f64::NEG_INFINITY,
        max_arrival_time: 0.0,
        max_decay_excess: f64::NEG_INFINITY,
        all_arrived: true,
        freeze_exact: true,
        tolerance: tol,
        pass: true,
    };
    for (arr, decay, frozen) in rows {
        match arr {
            Some((a, ex)) => {
                r.max_arrival_time = r.max_arrival_time.max(a);
                r.max_arrival_excess = r.max_arrival_excess.max(ex);
            }
            None => r.all_arrived = false,
        }
        r.max_decay_excess = r.max_decay_excess.max(decay);
        r.freeze_exact &= frozen;
    }
    r.pass =
        r.all_arrived && r.freeze_exact && r.max_arrival_excess <= tol && r.max_decay_excess <= tol;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub checks: usize,
    /// max of `|Φ(x,s), Φ(y,t)| − e^{λs}|x,y| − (t − s)`
    pub max_excess: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `|Φ(x,s), Φ(y,t)| ≤ e^{λs}|x,y| + (t − s)` for `s ≤ t`.
pub fn check_homotopy_bound(
    f: &ScalarField,
    pairs: &[(SpacePoint, SpacePoint)],
    time_pairs: &[(f64, f64)],
    params: &FlowParams,
    tol: f64,
) -> Result<HomotopyReport, FlowError> {
    let space = *f.space();
    let t_max = time_pairs
        .iter()
        .map(|&(s, t)| s.max(t))
        .fold(0.0, f64::max);
    let excess = pairs
        .par_iter()
        .map(|(x, y)| {
            let cx = integrate(f, x, t_max, params)?;
            let cy = integrate(f, y, t_max, params)?;
            let d0 = space.dist(x, y);
            let mut worst = f64::NEG_INFINITY;
            for &(a, b) in time_pairs {
                let (s, t) = if a <= b { (a, b) } else { (b, a) };
                let lhs = space.dist(&cx.position_at(&space, s), &cy.position_at(&space, t));
                worst = worst.max(lhs - (params.lambda * s).exp() * d0 - (t - s));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    let max_excess = excess.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(HomotopyReport {
        checks: pairs.len() * time_pairs.len(),
        max_excess,
        tolerance: tol,
        pass: max_excess <= tol,
    })
}

// ---------------------------------------------------------------------------
// SLLC certificate
// ---------------------------------------------------------------------------

/// `h(x, u) = Φ(x, ℓu)` for `f = d(S(p, R), ·)`.
#[derive(Debug, Clone)]
pub struct FlowHomotopy {
    pub field: ScalarField,
    pub params: FlowParams,
    pub center: SpacePoint,
}

impl FlowHomotopy {
    pub fn new(space: Space, p: SpacePoint, params: FlowParams) -> Result<Self, FlowError> {
        params.validate()?;
        let field = ScalarField::dist_from_sphere(space, p, params.radius, false)?;
        Ok(FlowHomotopy {
            field,
            params,
            center: p,
        })
    }

    pub fn ell(&self) -> f64 {
        self.params.ell()
    }

    /// Curve `Φ(x, ·)` on `[0, ℓ]`.
    pub fn curve(&self, x: &SpacePoint) -> Result<GradientCurve, FlowError> {
        integrate(&self.field, x, self.ell(), &self.params)
    }

    pub fn eval_on(&self, curve: &GradientCurve, u: f64) -> SpacePoint {
        curve.position_at(self.field.space(), self.ell() * u.clamp(0.0, 1.0))
    }

    /// Two-variable Lipschitz constants `C = e^{λℓ}`, `C′ = ℓ`.
    pub fn constants(&self) -> (f64, f64) {
        ((self.params.lambda * self.ell()).exp(), self.ell())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SllcOptions {
    /// Sub-ball radius `r′`; defaults to `δ₀R`.
    pub radius: Option<f64>,
    pub base_points: usize,
    pub tol: f64,
}

impl Default for SllcOptions {
    fn default() -> Self {
        SllcOptions {
            radius: None,
            base_points: 200,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateWitness {
    pub kind: String,
    pub x: SpacePoint,
    pub y: SpacePoint,
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SllcCertificate {
    pub space: Space,
    pub p: SpacePoint,
    pub r: f64,
    pub ell: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_prime")]
    pub c_prime: f64,
    /// Empirical `max |h(x,s), h(y,s)| / |x,y|`.
    pub c_fit: f64,
    /// Empirical `max |h(x,s), h(x,t)| / |s − t|`.
    pub c_prime_fit: f64,
    pub endpoint_pass: bool,
    pub containment_pass: bool,
    pub lipschitz_pass: bool,
    pub worst_lipschitz_excess: f64,
    pub worst_containment_excess: f64,
    pub worst_endpoint_error: f64,
    pub base_points: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub surjectivity: String,
    pub pass: bool,
}

const SURJECTIVITY_NOTE: &str =
    "h(., 0) is the identity, so the image of U(p, r') x [0,1] contains U(p, r'); not sampled";

/// Certificate with default options (`r′ = δ₀R`, 200 base points, tol 1e-4).
pub fn build_sllc_certificate(
    space: Space,
    p: SpacePoint,
    params: &FlowParams,
    samples: usize,
    seed: u64,
) -> Result<SllcCertificate, FlowError> {
    build_sllc_certificate_with(space, p, params, samples, seed, &SllcOptions::default())
}

pub fn build_sllc_certificate_with(
    space: Space,
    p: SpacePoint,
    params: &FlowParams,
    samples: usize,
    seed: u64,
    opts: &SllcOptions,
) -> Result<SllcCertificate, FlowError> {
    let hom = FlowHomotopy::new(space, p, *params)?;
    let r = opts.radius.unwrap_or(params.delta0 * params.radius);
    if !(r >= 0.0) || r > params.delta0 * params.radius * (1.0 + 1e-12) {
        return Err(FlowError::InvalidParams(format!(
            "sub-ball radius {r} outside [0, δ₀R]"
        )));
    }
    let tol = opts.tol;
    let (c, c_prime) = hom.constants();

    let mut rng = rng::stream(seed, 0);
    let nb = opts.base_points.max(1);
    let mut base = vec![p];
    while base.len() < nb {
        let rho = r * rng.random::<f64>().sqrt();
        let x = if space.is_pole(&p) {
            let phi = rng.random::<f64>() * space.theta_total();
            if space.is_origin(&p) {
                space.point(rho, phi)?
            } else {
                space.point(space.max_radius() - rho, phi)?
            }
        } else {
            space.exp(&p, rng.random::<f64>() * std::f64::consts::TAU, rho)?
        };
        if space.dist(&x, &p) < r || r == 0.0 {
            base.push(if r == 0.0 { p } else { x });
        }
    }
    let curves: Vec<GradientCurve> = base
        .par_iter()
        .map(|x| hom.curve(x))
        .collect::<Result<_, _>>()?;

    let mut cert = SllcCertificate {
        space,
        p,
        r,
        ell: hom.ell(),
        lambda: params.lambda,
        c,
        c_prime,
        c_fit: 0.0,
        c_prime_fit: 0.0,
        endpoint_pass: true,
        containment_pass: true,
        lipschitz_pass: true,
        worst_lipschitz_excess: f64::NEG_INFINITY,
        worst_containment_excess: f64::NEG_INFINITY,
        worst_endpoint_error: 0.0,
        base_points: base.len(),
        samples,
        seed,
        tolerance: tol,
        surjectivity: SURJECTIVITY_NOTE.to_string(),
        pass: true,
    };
    let mut witness: Option<CertificateWitness> = None;
    let fail = |w: CertificateWitness, witness: &mut Option<CertificateWitness>| {
        if witness.is_none() {
            *witness = Some(w);
        }
    };

    // (i) endpoints and (iii) containment along every curve
    for (x, cv) in base.iter().zip(&curves) {
        let start = hom.eval_on(cv, 0.0);
        let end = hom.eval_on(cv, 1.0);
        let e0 = space.dist(&start, x);
        let e1 = space.dist(&end, &p);
        cert.worst_endpoint_error = cert.worst_endpoint_error.max(e0).max(e1);
        if e0 > 0.0 || e1 > tol {
            cert.endpoint_pass = false;
            let u = if e0 > 0.0 { 0.0 } else { 1.0 };
            fail(
                CertificateWitness {
                    kind: "endpoint".into(),
                    x: *x,
                    y: p,
                    s: u,
                    t: u,
                    lhs: e0.max(e1),
                    rhs: 0.0,
                },
                &mut witness,
            );
        }
        let dx = space.dist(x, &p);
        for s in &cv.samples {
            let ex = space.dist(&s.point, &p) - dx;
            cert.worst_containment_excess = cert.worst_containment_excess.max(ex);
            if ex > tol {
                cert.containment_pass = false;
                let u = s.t / hom.ell();
                fail(
                    CertificateWitness {
                        kind: "containment".into(),
                        x: *x,
                        y: p,
                        s: u,
                        t: u,
                        lhs: dx + ex,
                        rhs: dx,
                    },
                    &mut witness,
                );
            }
        }
    }

    // (ii) two-variable Lipschitz bound on random pairs
    for k in 0..samples {
        let i = rng.random_range(0..base.len());
        let j = match k % 4 {
            0 => i,
            _ => rng.random_range(0..base.len()),
        };
        let s: f64 = rng.random();
        let t: f64 = if k % 4 == 1 { s } else { rng.random() };
        let hx = hom.eval_on(&curves[i], s);
        let hy = hom.eval_on(&curves[j], t);
        let dxy = space.dist(&base[i], &base[j]);
        let lhs = space.dist(&hx, &hy);
        let rhs = c * dxy + c_prime * (s - t).abs();
        cert.worst_lipschitz_excess = cert.worst_lipschitz_excess.max(lhs - rhs);
        if dxy > 0.0 && s == t {
            cert.c_fit = cert.c_fit.max(lhs / dxy);
        }
        if i == j && s != t {
            cert.c_prime_fit = cert.c_prime_fit.max(lhs / (s - t).abs());
        }
        if lhs > rhs + tol {
            cert.lipschitz_pass = false;
            fail(
                CertificateWitness {
                    kind: "lipschitz".into(),
                    x: base[i],
                    y: base[j],
                    s,
                    t,
                    lhs,
                    rhs,
                },
                &mut witness,
            );
        }
    }
    cert.pass = cert.endpoint_pass
        && cert.containment_pass
        && cert.lipschitz_pass
        && cert.c.is_finite()
        && cert.c_prime.is_finite();
    match witness {
        Some(w) if !cert.pass => Err(FlowError::CertificateFailed {
            certificate: Box::new(cert),
            witness: Box::new(w),
        }),
        _ => Ok(cert),
    }
}

/// CSV of several curves with a leading `curve` index column.
pub fn curves_to_csv(curves: &[GradientCurve]) -> String {
    let mut out = String::from("curve,t,r,phi,f,grad_norm\n");
    for (i, c) in curves.iter().enumerate() {
        for s in &c.samples {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{}",
                s.t, s.point.r, s.point.phi, s.f_value, s.grad_norm
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (Space, ScalarField, FlowParams) {
        let s = Space::euclidean_cone(1.5 * PI).unwrap();
        let f = ScalarField::dist_from_sphere(s, s.origin(), 1.0, false).unwrap();
        (s, f, FlowParams::default())
    }

    #[test]
    fn default_parameters() {
        let p = FlowParams::default();
        assert!((p.lambda - 1f64.cosh() / 0.95f64.sinh()).abs() < 1e-15);
        assert!(((p.lambda * p.ell()).exp()) < 1.2);
        assert!(FlowParams::new(0.0, 0.05, 1.0).is_err());
        assert!(FlowParams::new(0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn radial_curve_on_cone() {
        let (s, f, p) = setup();
        let x = s.point(0.03, 2.0).unwrap();
        let c = integrate(&f, &x, 0.05, &p).unwrap();
        for smp in &c.samples {
            if smp.t < 0.03 {
                assert!((smp.point.r - (0.03 - smp.t)).abs() < 1e-9);
                assert_eq!(smp.point.phi, 2.0);
            }
        }
        let a = c.arrival_time(&s.origin()).unwrap();
        assert!((a - 0.03).abs() < 1e-12);
        assert_eq!(c.end_point(), s.origin());
        assert_eq!(c.termination, Termination::CriticalPoint);
        assert!(c
            .samples
            .windows(2)
            .all(|w| w[1].t > w[0].t && w[1].f_value >= w[0].f_value));
    }

    #[test]
    fn critical_start_is_constant() {
        let (s, f, p) = setup();
        let c = integrate(&f, &s.origin(), 0.1, &p).unwrap();
        assert!(c.samples.iter().all(|x| x.point == s.origin()));
    }

    #[test]
    fn plane_matches_cone_law() {
        let m = Space::model_plane(0.0).unwrap();
        let f = ScalarField::dist_from_sphere(m, m.origin(), 1.0, false).unwrap();
        let x = m.point(0.02, 4.0).unwrap();
        let c = integrate(&f, &x, 0.01, &FlowParams::default()).unwrap();
        assert!((c.end_point().r - 0.01).abs() < 1e-12);
    }

    #[test]
    fn flow_map_identity_and_arrival() {
        let (s, f, p) = setup();
        let xs = vec![s.point(0.01, 0.1).unwrap(), s.point(0.04, 3.0).unwrap()];
        assert_eq!(flow_map(&f, &xs, 0.0, &p).unwrap(), xs);
        let ys = flow_map(&f, &xs, 0.04 / p.eps.cos(), &p).unwrap();
        assert!(ys.iter().all(|y| *y == s.origin()));
    }

    #[test]
    fn contraction_and_homotopy_on_cone() {
        let (s, f, p) = setup();
        let x = s.point(0.04, 0.2).unwrap();
        let y = s.point(0.03, 1.9).unwrap();
        let r = check_contraction(&f, &x, &y, &[0.0, 0.01, 0.02, 0.05], &p, 1e-4).unwrap();
        assert!(r.pass && r.max_ratio <= 1.0 + 1e-12);
        let r = check_contraction(&f, &x, &x, &[0.01, 0.02], &p, 1e-9).unwrap();
        assert!(r.pass);
        let h = check_homotopy_bound(
            &f,
            &[(x, y), (x, x)],
            &[(0.0, 0.01), (0.01, 0.03), (0.02, 0.02)],
            &p,
            1e-9,
        )
        .unwrap();
        assert!(h.pass, "{h:?}");
    }

    #[test]
    fn arrival_report() {
        let (s, f, p) = setup();
        let xs = vec![
            s.origin(),
            s.point(0.02, 1.0).unwrap(),
            s.point(0.05, 4.0).unwrap(),
        ];
        let r = check_arrival(&f, &s.origin(), &xs, &p, 1e-4).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.max_arrival_time <= 0.05 + 1e-8, "{r:?}");
    }

    #[test]
    fn certificates() {
        let (s, _, p) = setup();
        let c = build_sllc_certificate(s, s.origin(), &p, 400, 11).unwrap();
        assert!(c.pass);
        assert!(c.c_prime_fit <= c.c_prime * (1.0 + 1e-9));
        let zero = SllcOptions {
            radius: Some(0.0),
            ..SllcOptions::default()
        };
        let c = build_sllc_certificate_with(s, s.origin(), &p, 50, 1, &zero).unwrap();
        assert!(c.pass);
        let m = Space::model_plane(0.0).unwrap();
        let c = build_sllc_certificate(m, m.origin(), &p, 400, 2).unwrap();
        assert!(c.pass && c.c_fit <= 1.0 + 1e-9);
    }

    #[test]
    fn csv_columns() {
        let (s, f, p) = setup();
        let c = integrate(&f, &s.point(0.002, 0.0).unwrap(), 0.003, &p).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("t,r,phi,f,grad_norm\n"));
        assert_eq!(csv.lines().count(), c.samples.len() + 1);
    }
}
