//! Sampled lower-curvature tests: triangle comparison and the quadruple
//! condition.
//!
//! Half of every budget is drawn near the singular points inside the
//! region, where violations live.

use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model_trig::{
    comparison_angle, comparison_point_distance, Kappa, TriangleSides, Vertex,
};
use crate::rng::{self, Rng};
use crate::semiconcave::Region;
use crate::spaces::{Space, SpaceError, SpacePoint};

/// Margins at or above `-PASS_TOL` count as a pass.
pub const PASS_TOL: f64 = 1e-9;
/// Quadruples with a pairwise distance below this are skipped.
pub const MIN_SEPARATION: f64 = 1e-6;
const BATCH: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("invalid region: {0}")]
    RegionInvalid(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Triangle,
    Quadruple,
}

/// Configuration attaining the worst margin. For triangles the points are
/// `p, q, r, x` with `x` at fraction `t` along `qr`; for quadruples they are
/// `p0..p3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureWitness {
    pub points: Vec<SpacePoint>,
    pub t: Option<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub test: TestKind,
    pub space: Space,
    pub kappa_tested: Kappa,
    pub samples: usize,
    pub tested: usize,
    pub skipped: usize,
    /// Negative means a violation.
    pub worst_margin: f64,
    pub witness: Option<CurvatureWitness>,
    pub seed: u64,
    pub pass: bool,
}

impl CurvatureReport {
    fn merge(mut self, o: CurvatureReport) -> Self {
        self.tested += o.tested;
        self.skipped += o.skipped;
        if o.worst_margin < self.worst_margin {
            self.worst_margin = o.worst_margin;
            self.witness = o.witness;
        }
        self.pass = self.worst_margin >= -PASS_TOL;
        self
    }
}

fn check_region(space: &Space, region: &Region, kappa: Kappa) -> Result<(), CurvatureError> {
    region
        .validate(space)
        .map_err(|e| CurvatureError::RegionInvalid(e.to_string()))?;
    if kappa.0 > 0.0 && 6.0 * region.outer >= TAU / kappa.0.sqrt() {
        return Err(CurvatureError::RegionInvalid(format!(
            "radius {} lets triangles exceed the perimeter cap 2π/√κ",
            region.outer
        )));
    }
    if space.kappa_model().0 > 0.0 && region.outer >= 0.5 * space.max_radius() {
        return Err(CurvatureError::RegionInvalid(format!(
            "radius {} must stay below half the diameter",
            region.outer
        )));
    }
    Ok(())
}

struct Sampler<'a> {
    space: &'a Space,
    region: &'a Region,
    singular: Vec<SpacePoint>,
    focus: f64,
}

impl<'a> Sampler<'a> {
    fn new(space: &'a Space, region: &'a Region) -> Self {
        let singular = space
            .singular_points()
            .into_iter()
            .filter(|s| space.dist(&region.center, s) <= region.outer)
            .collect();
        Sampler {
            space,
            region,
            singular,
            focus: 0.5 * region.outer,
        }
    }

    fn uniform(&self, rng: &mut Rng) -> Option<SpacePoint> {
        self.region.sample(self.space, rng)
    }

    // radius ρ·U² around the singular point: most mass close to it
    fn near(&self, s: &SpacePoint, rng: &mut Rng) -> Option<SpacePoint> {
        let sp = self.space;
        for _ in 0..100 {
            let u: f64 = rng.random();
            let rho = self.focus * u * u;
            let phi = rng.random::<f64>() * sp.theta_total();
            let x = if sp.is_origin(s) {
                sp.point(rho, phi)
            } else {
                sp.point(sp.max_radius() - rho, phi)
            };
            if let Ok(x) = x {
                if self.region.contains(sp, &x) {
                    return Some(x);
                }
            }
        }
        None
    }

    /// `n` points; focused configurations (even `k`) draw all of them near
    /// one singular point.
    fn points(&self, k: usize, n: usize, rng: &mut Rng) -> Option<Vec<SpacePoint>> {
        let focused = k.is_multiple_of(2) && !self.singular.is_empty();
        if focused {
            let s = self.singular[rng.random_range(0..self.singular.len())];
            (0..n).map(|_| self.near(&s, rng)).collect()
        } else {
            (0..n).map(|_| self.uniform(rng)).collect()
        }
    }
}

fn empty_report(
    test: TestKind,
    space: &Space,
    kappa: Kappa,
    samples: usize,
    seed: u64,
) -> CurvatureReport {
    CurvatureReport {
        test,
        space: *space,
        kappa_tested: kappa,
        samples,
        tested: 0,
        skipped: 0,
        worst_margin: f64::INFINITY,
        witness: None,
        seed,
        pass: true,
    }
}

fn run_batches<F>(
    test: TestKind,
    space: &Space,
    kappa: Kappa,
    samples: usize,
    seed: u64,
    one: F,
) -> CurvatureReport
where
    F: Fn(usize, &mut Rng) -> Option<(f64, CurvatureWitness)> + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let parts: Vec<CurvatureReport> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b as u64);
            let mut rep = empty_report(test, space, kappa, 0, seed);
            for k in b * BATCH..((b + 1) * BATCH).min(samples) {
                match one(k, &mut rng) {
                    Some((m, w)) => {
                        rep.tested += 1;
                        if m < rep.worst_margin {
                            rep.worst_margin = m;
                            rep.witness = Some(w);
                        }
                    }
                    None => rep.skipped += 1,
                }
            }
            rep
        })
        .collect();
    let mut r = parts.into_iter().fold(
        empty_report(test, space, kappa, samples, seed),
        CurvatureReport::merge,
    );
    r.pass = r.worst_margin >= -PASS_TOL;
    r
}

/// Margin `|px| − |p̃x̃|` for `x` at fraction `t` along `qr`, or `None` when
/// `qr` is not unique or the comparison triangle does not exist.
pub fn triangle_margin(
    space: &Space,
    kappa: Kappa,
    p: &SpacePoint,
    q: &SpacePoint,
    r: &SpacePoint,
    t: f64,
) -> Option<(f64, SpacePoint)> {
    let x = space.geodesic_point(q, r, t).ok()?;
    let sides =
        TriangleSides::new(kappa, space.dist(p, q), space.dist(q, r), space.dist(r, p)).ok()?;
    let model = comparison_point_distance(kappa, sides, t).ok()?;
    Some((space.dist(p, &x) - model, x))
}

/// `2π − (∠̃p₁p₀p₂ + ∠̃p₂p₀p₃ + ∠̃p₃p₀p₁)`, or `None` for degenerate input.
pub fn quadruple_margin(space: &Space, kappa: Kappa, pts: &[SpacePoint; 4]) -> Option<f64> {
    for i in 0..4 {
        for j in i + 1..4 {
            if space.dist(&pts[i], &pts[j]) < MIN_SEPARATION {
                return None;
            }
        }
    }
    let p0 = &pts[0];
    let mut sum = 0.0;
    for (a, b) in [(1, 2), (2, 3), (3, 1)] {
        let sides = TriangleSides::new(
            kappa,
            space.dist(p0, &pts[a]),
            space.dist(&pts[a], &pts[b]),
            space.dist(&pts[b], p0),
        )
        .ok()?;
        sum += comparison_angle(kappa, sides, Vertex::P).ok()?;
    }
    Some(TAU - sum)
}

/// Samples triples `(p, q, r)` and points `x` on `qr`; the margin is the
/// minimum of `|px| − |p̃x̃|`.
pub fn triangle_comparison_test(
    space: &Space,
    region: &Region,
    kappa: Kappa,
    samples: usize,
    seed: u64,
) -> Result<CurvatureReport, CurvatureError> {
    check_region(space, region, kappa)?;
    let sampler = Sampler::new(space, region);
    Ok(run_batches(
        TestKind::Triangle,
        space,
        kappa,
        samples,
        seed,
        |k, rng| {
            let pts = sampler.points(k, 3, rng)?;
            let t: f64 = rng.random();
            let (m, x) = triangle_margin(space, kappa, &pts[0], &pts[1], &pts[2], t)?;
            Some((
                m,
                CurvatureWitness {
                    points: vec![pts[0], pts[1], pts[2], x],
                    t: Some(t),
                    margin: m,
                },
            ))
        },
    ))
}

/// Samples quadruples; the margin is the minimum of `2π − Σ` comparison
/// angles at `p₀`.
pub fn quadruple_test(
    space: &Space,
    region: &Region,
    kappa: Kappa,
    samples: usize,
    seed: u64,
) -> Result<CurvatureReport, CurvatureError> {
    check_region(space, region, kappa)?;
    let sampler = Sampler::new(space, region);
    Ok(run_batches(
        TestKind::Quadruple,
        space,
        kappa,
        samples,
        seed,
        |k, rng| {
            let pts = sampler.points(k, 4, rng)?;
            let pts: [SpacePoint; 4] = [pts[0], pts[1], pts[2], pts[3]];
            let m = quadruple_margin(space, kappa, &pts)?;
            Some((
                m,
                CurvatureWitness {
                    points: pts.to_vec(),
                    t: None,
                    margin: m,
                },
            ))
        },
    ))
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub space: Space,
    pub kappa: Kappa,
    /// Region defaults to a ball about the origin (see [`default_region`]).
    #[serde(default)]
    pub region: Option<Region>,
}

impl MatrixEntry {
    pub fn new(space: Space, kappa: f64) -> Self {
        MatrixEntry {
            space,
            kappa: Kappa(kappa),
            region: None,
        }
    }

    /// Verdict predicted by the construction: cone angles up to `2π` and
    /// `κ` at most the model curvature.
    pub fn expected_pass(&self) -> bool {
        self.space.theta_total() <= TAU * (1.0 + 1e-12)
            && self.kappa.0 <= self.space.kappa_model().0
    }
}

/// Ball about the origin of radius 1.5 (1.0 when `κ > 0` is involved).
pub fn default_region(space: &Space, kappa: Kappa) -> Region {
    let r = if kappa.0 > 0.0 || space.kappa_model().0 > 0.0 {
        1.0
    } else {
        1.5
    };
    Region::ball(space.origin(), r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub space: Space,
    pub kappa: Kappa,
    pub triangle: CurvatureReport,
    pub quadruple: CurvatureReport,
    pub expected_pass: bool,
    /// Both tests agree with each other.
    pub agree: bool,
}

impl MatrixRow {
    /// Verdicts agree with each other and with the expectation. Failing
    /// rows must fail by at least `fail_margin`.
    pub fn consistent(&self, fail_margin: f64) -> bool {
        let ok = |r: &CurvatureReport| {
            if self.expected_pass {
                r.pass
            } else {
                r.worst_margin <= -fail_margin
            }
        };
        self.agree && ok(&self.triangle) && ok(&self.quadruple)
    }
}

/// The built-in pass and fail targets.
pub fn default_matrix() -> Vec<MatrixEntry> {
    let ec = |t: f64| Space::euclidean_cone(t).expect("valid cone");
    let sc = |t: f64| Space::spherical_cone(t).expect("valid cone");
    let mp = |k: f64| Space::model_plane(k).expect("valid plane");
    vec![
        MatrixEntry::new(ec(PI), 0.0),
        MatrixEntry::new(ec(1.5 * PI), 0.0),
        MatrixEntry::new(ec(TAU), 0.0),
        MatrixEntry::new(mp(-1.0), -1.0),
        MatrixEntry::new(mp(0.0), 0.0),
        MatrixEntry::new(mp(1.0), 1.0),
        MatrixEntry::new(sc(1.5 * PI), 1.0),
        MatrixEntry::new(sc(TAU), 1.0),
        MatrixEntry::new(ec(2.5 * PI), 0.0),
    ]
}

pub fn curvature_matrix(
    entries: &[MatrixEntry],
    samples: usize,
    seed: u64,
) -> Result<Vec<MatrixRow>, CurvatureError> {
    entries
        .iter()
        .map(|e| {
            let region = e
                .region
                .unwrap_or_else(|| default_region(&e.space, e.kappa));
            let triangle = triangle_comparison_test(&e.space, &region, e.kappa, samples, seed)?;
            let quadruple = quadruple_test(&e.space, &region, e.kappa, samples, seed)?;
            let agree = triangle.pass == quadruple.pass;
            Ok(MatrixRow {
                space: e.space,
                kappa: e.kappa,
                triangle,
                quadruple,
                expected_pass: e.expected_pass(),
                agree,
            })
        })
        .collect()
}

fn space_label(s: &Space) -> String {
    match s {
        Space::ModelPlane { kappa } => format!("model_plane({})", kappa),
        Space::EuclideanCone { theta_total } => format!("euclidean_cone({theta_total})"),
        Space::SphericalCone { theta_total } => format!("spherical_cone({theta_total})"),
    }
}

/// Verdict table with one row per matrix entry.
pub fn matrix_csv(rows: &[MatrixRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "space",
        "kappa",
        "triangle_margin",
        "quadruple_margin",
        "triangle_pass",
        "quadruple_pass",
        "expected_pass",
        "agree",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            space_label(&r.space),
            r.kappa.0.to_string(),
            crate::report::num(r.triangle.worst_margin),
            crate::report::num(r.quadruple.worst_margin),
            r.triangle.pass.to_string(),
            r.quadruple.pass.to_string(),
            r.expected_pass.to_string(),
            r.agree.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straddling_triangle_violates_on_wide_cone() {
        let s = Space::euclidean_cone(2.5 * PI).unwrap();
        let q = s.point(1.0, 0.0).unwrap();
        let r = s.point(1.0, PI + 0.5).unwrap();
        let p = s.point(1.0, 0.5 * (PI + 0.5)).unwrap();
        let (m, x) = triangle_margin(&s, Kappa(0.0), &p, &q, &r, 0.5).unwrap();
        assert!(s.is_origin(&x));
        // isosceles comparison triangle with legs 2 sin((π+½)/4) and base 2
        let want = 1.0 - ((2.0 * (0.25 * (PI + 0.5)).sin()).powi(2) - 1.0).sqrt();
        assert!((m - want).abs() < 1e-12 && m < -0.2, "{m}");
    }

    #[test]
    fn apex_quadruple_sums_to_cone_angle() {
        let s = Space::euclidean_cone(2.5 * PI).unwrap();
        let th = 2.5 * PI / 3.0;
        let pts = [
            s.origin(),
            s.point(1.0, 0.0).unwrap(),
            s.point(1.0, th).unwrap(),
            s.point(1.0, 2.0 * th).unwrap(),
        ];
        let m = quadruple_margin(&s, Kappa(0.0), &pts).unwrap();
        assert!((m - (TAU - 2.5 * PI)).abs() < 1e-12);
    }

    #[test]
    fn flat_quadruple_equality() {
        let s = Space::model_plane(0.0).unwrap();
        let pts = [
            s.origin(),
            s.point(1.0, 0.0).unwrap(),
            s.point(1.0, 2.0).unwrap(),
            s.point(1.0, 4.0).unwrap(),
        ];
        let m = quadruple_margin(&s, Kappa(0.0), &pts).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_triangles_are_tight() {
        let s = Space::model_plane(-1.0).unwrap();
        let r = triangle_comparison_test(&s, &Region::ball(s.origin(), 1.5), Kappa(-1.0), 2000, 3)
            .unwrap();
        assert!(r.pass && r.worst_margin.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn reports_are_deterministic() {
        let s = Space::euclidean_cone(1.5 * PI).unwrap();
        let g = Region::ball(s.origin(), 1.5);
        let a = quadruple_test(&s, &g, Kappa(0.0), 1500, 9).unwrap();
        let b = quadruple_test(&s, &g, Kappa(0.0), 1500, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tested + a.skipped, 1500);
    }

    #[test]
    fn perimeter_cap_region() {
        let s = Space::spherical_cone(PI).unwrap();
        assert!(
            triangle_comparison_test(&s, &Region::ball(s.origin(), 1.2), Kappa(1.0), 10, 0)
                .is_err()
        );
    }
}
