//! Approximate energies of maps from the unit disk, and Lipschitz fillings
//! of loops through the contraction homotopy.
//!
//! Energy densities use `ω₂ = π`, so the identity of the flat disk has
//! density 2.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowError, FlowHomotopy, SllcCertificate};
use crate::quadrature::gauss_legendre;
use crate::report::num;
use crate::spaces::{Space, SpaceError, SpacePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlateauError {
    #[error("point at distance {dist} from the boundary is not at least ε = {eps} inside")]
    MarginViolation { dist: f64, eps: f64 },
    #[error("inadmissible averaging measure: {0}")]
    InadmissibleMeasure(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("loop point {index} at distance {dist} leaves the certified ball of radius {radius}")]
    LoopEscapesBall {
        index: usize,
        dist: f64,
        radius: f64,
    },
    #[error("certificate does not apply: {0}")]
    Certificate(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A map from the closed unit disk (Cartesian coordinates) into a space.
pub trait DiskSource: Sync {
    fn space(&self) -> &Space;
    fn eval(&self, x: [f64; 2]) -> SpacePoint;
}

/// `(ρ, φ) ↦ (cρ, aφ + φ₀)` about the origin of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarMap {
    pub space: Space,
    pub radial_scale: f64,
    pub angular_scale: f64,
    #[serde(default)]
    pub phase: f64,
}

impl PolarMap {
    /// Identity onto a flat disk of radius `c` (needs `θ = 2π`).
    pub fn scaled_identity(space: Space, c: f64) -> Self {
        PolarMap {
            space,
            radial_scale: c,
            angular_scale: space.theta_total() / TAU,
            phase: 0.0,
        }
    }
}

impl DiskSource for PolarMap {
    fn space(&self) -> &Space {
        &self.space
    }
    fn eval(&self, x: [f64; 2]) -> SpacePoint {
        let rho = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]).rem_euclid(TAU);
        let r = (self.radial_scale * rho).min(self.space.max_radius());
        let th = self.space.theta_total();
        self.space
            .point(r, (self.angular_scale * phi + self.phase).rem_euclid(th))
            .unwrap_or_else(|_| self.space.origin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantMap {
    pub space: Space,
    pub value: SpacePoint,
}

impl DiskSource for ConstantMap {
    fn space(&self) -> &Space {
        &self.space
    }
    fn eval(&self, _: [f64; 2]) -> SpacePoint {
        self.value
    }
}

/// Map sampled on a polar grid: `values[i * angles.len() + j]` sits at
/// radius `radii[i]`, angle `angles[j]`. Between nodes the map is
/// interpolated along geodesics, first in angle then in radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiskMapRepr")]
pub struct DiskMap {
    space: Space,
    radii: Vec<f64>,
    angles: Vec<f64>,
    values: Vec<SpacePoint>,
}

#[derive(Deserialize)]
struct DiskMapRepr {
    space: Space,
    radii: Vec<f64>,
    angles: Vec<f64>,
    values: Vec<SpacePoint>,
}

impl TryFrom<DiskMapRepr> for DiskMap {
    type Error = PlateauError;
    fn try_from(r: DiskMapRepr) -> Result<Self, PlateauError> {
        DiskMap::new(r.space, r.radii, r.angles, r.values)
    }
}

impl DiskMap {
    pub fn new(
        space: Space,
        radii: Vec<f64>,
        angles: Vec<f64>,
        values: Vec<SpacePoint>,
    ) -> Result<Self, PlateauError> {
        let bad = |m: &str| Err(PlateauError::InvalidMap(m.into()));
        if radii.len() < 2 || radii[0] != 0.0 || *radii.last().expect("nonempty") != 1.0 {
            return bad("radii must run from 0 to 1");
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("radii must increase");
        }
        if angles.len() < 3 || angles[0] < 0.0 || *angles.last().expect("nonempty") >= TAU {
            return bad("need at least three angles in [0, 2π)");
        }
        if angles.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("angles must increase");
        }
        if values.len() != radii.len() * angles.len() {
            return bad("values do not match the grid");
        }
        if values.iter().any(|v| !space.contains(v)) {
            return bad("value outside the space");
        }
        if values[..angles.len()].iter().any(|v| *v != values[0]) {
            return bad("the center ring must be constant");
        }
        Ok(DiskMap {
            space,
            radii,
            angles,
            values,
        })
    }

    /// Samples a source on `n_r` uniform radii and `n_phi` uniform angles.
    pub fn sample(source: &dyn DiskSource, n_r: usize, n_phi: usize) -> Result<Self, PlateauError> {
        let radii: Vec<f64> = (0..n_r.max(2))
            .map(|i| i as f64 / (n_r.max(2) - 1) as f64)
            .collect();
        let angles: Vec<f64> = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();
        let mut values = Vec::with_capacity(radii.len() * angles.len());
        for &r in &radii {
            for &a in &angles {
                values.push(source.eval([r * a.cos(), r * a.sin()]));
            }
        }
        let c = values[0];
        values[..angles.len()].iter_mut().for_each(|v| *v = c);
        DiskMap::new(*source.space(), radii, angles, values)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn node(&self, i: usize, j: usize) -> SpacePoint {
        self.values[i * self.angles.len() + j]
    }

    pub fn boundary(&self) -> &[SpacePoint] {
        let n = self.angles.len();
        &self.values[self.values.len() - n..]
    }

    fn mix(&self, a: &SpacePoint, b: &SpacePoint, t: f64) -> SpacePoint {
        if t <= 0.0 || a == b {
            return *a;
        }
        if t >= 1.0 {
            return *b;
        }
        self.space
            .geodesic_point(a, b, t)
            .unwrap_or(if t < 0.5 { *a } else { *b })
    }

    fn ring_value(&self, i: usize, phi: f64) -> SpacePoint {
        let n = self.angles.len();
        let k = self.angles.partition_point(|&a| a <= phi);
        let (j0, j1, lo, hi) = if k == 0 || k == n {
            // wrap-around sector between the last and first angle
            let lo = self.angles[n - 1];
            let hi = self.angles[0] + TAU;
            (n - 1, 0, lo, hi)
        } else {
            (k - 1, k, self.angles[k - 1], self.angles[k])
        };
        let p = if phi < lo { phi + TAU } else { phi };
        self.mix(&self.node(i, j0), &self.node(i, j1), (p - lo) / (hi - lo))
    }

    /// Largest ratio `d(u(a), u(b)) / |a − b|` over grid edges.
    pub fn lipschitz(&self) -> f64 {
        let n = self.angles.len();
        let mut best: f64 = 0.0;
        for i in 1..self.radii.len() {
            let r = self.radii[i];
            for j in 0..n {
                let j1 = (j + 1) % n;
                let da = (self.angles[j1] - self.angles[j]).rem_euclid(TAU);
                let chord = 2.0 * r * (0.5 * da).sin();
                if chord > 0.0 {
                    best = best.max(self.space.dist(&self.node(i, j), &self.node(i, j1)) / chord);
                }
                let dr = r - self.radii[i - 1];
                best = best.max(self.space.dist(&self.node(i, j), &self.node(i - 1, j)) / dr);
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["ring", "index", "radius", "angle", "r", "phi"])
            .expect("in-memory write");
        for (i, &rad) in self.radii.iter().enumerate() {
            for (j, &ang) in self.angles.iter().enumerate() {
                let v = self.node(i, j);
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    num(rad),
                    num(ang),
                    num(v.r),
                    num(v.phi),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

impl DiskSource for DiskMap {
    fn space(&self) -> &Space {
        &self.space
    }
    fn eval(&self, x: [f64; 2]) -> SpacePoint {
        let rho = x[0].hypot(x[1]).min(1.0);
        let phi = x[1].atan2(x[0]).rem_euclid(TAU);
        let k = self
            .radii
            .partition_point(|&r| r <= rho)
            .clamp(1, self.radii.len() - 1);
        let (r0, r1) = (self.radii[k - 1], self.radii[k]);
        let inner = if k == 1 {
            self.node(0, 0)
        } else {
            self.ring_value(k - 1, phi)
        };
        let outer = self.ring_value(k, phi);
        self.mix(&inner, &outer, (rho - r0) / (r1 - r0))
    }
}

/// Closed curve sampled at `points`; the last point connects to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopMap {
    pub space: Space,
    pub points: Vec<SpacePoint>,
}

impl LoopMap {
    pub fn new(space: Space, points: Vec<SpacePoint>) -> Result<Self, PlateauError> {
        if points.len() < 3 {
            return Err(PlateauError::InvalidMap(
                "a loop needs at least three samples".into(),
            ));
        }
        if points.iter().any(|p| !space.contains(p)) {
            return Err(PlateauError::InvalidMap(
                "loop point outside the space".into(),
            ));
        }
        Ok(LoopMap { space, points })
    }

    /// Circle of radius `rho` about a pole, `n` samples.
    pub fn circle_about_origin(space: Space, rho: f64, n: usize) -> Result<Self, PlateauError> {
        let th = space.theta_total();
        let pts = (0..n)
            .map(|j| space.point(rho, th * j as f64 / n as f64))
            .collect::<Result<Vec<_>, _>>()?;
        LoopMap::new(space, pts)
    }

    fn edges(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..n)
            .map(|j| self.space.dist(&self.points[j], &self.points[(j + 1) % n]))
            .collect()
    }

    pub fn length(&self) -> f64 {
        self.edges().iter().sum()
    }

    /// Discrete Lipschitz constant of the arclength parametrization over
    /// `[0, 2π)`, i.e. `length / 2π` up to the largest edge ratio.
    pub fn lipschitz(&self) -> f64 {
        let e = self.edges();
        let total: f64 = e.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        // edges have parameter length 2π e_j / L, so each ratio equals L / 2π
        total / TAU
    }

    /// Disk angles of the samples under the arclength parametrization
    /// (uniform when the loop is constant).
    pub fn arclength_angles(&self) -> Vec<f64> {
        let e = self.edges();
        let total: f64 = e.iter().sum();
        let n = self.points.len();
        if total == 0.0 {
            return (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        }
        let mut out = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &ej in e.iter().take(n) {
            out.push(TAU * acc / total);
            acc += ej;
        }
        out
    }
}

/// `e_ε^u(x) = (1/π) ∫ d(u(x), u(x + ε e^{iα}))² / ε² dα` by the
/// `n`-point periodic trapezoid rule.
pub fn approx_energy_density(
    u: &dyn DiskSource,
    x: [f64; 2],
    eps: f64,
    n: usize,
) -> Result<f64, PlateauError> {
    let margin = 1.0 - x[0].hypot(x[1]);
    if !(eps > 0.0) || !(margin > eps) {
        return Err(PlateauError::MarginViolation { dist: margin, eps });
    }
    let n = n.max(4);
    let ux = u.eval(x);
    let sp = u.space();
    let sum: f64 = (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            let y = u.eval([x[0] + eps * a.cos(), x[1] + eps * a.sin()]);
            let d = sp.dist(&ux, &y);
            d * d
        })
        .sum();
    Ok(2.0 * sum / (n as f64 * eps * eps))
}

/// Averaging measure `ν` on `(0, 2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuSpec {
    /// Uniform on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Finitely many atoms `(λ, weight)`.
    Atoms { atoms: Vec<(f64, f64)> },
}

impl Default for NuSpec {
    fn default() -> Self {
        NuSpec::Uniform { a: 1.0, b: 2.0 }
    }
}

impl NuSpec {
    /// Checks `ν ≥ 0`, `ν((0,2]) = 1` and `∫ λ⁻² dν < ∞`.
    pub fn validate(&self) -> Result<(), PlateauError> {
        let bad = |m: String| Err(PlateauError::InadmissibleMeasure(m));
        match self {
            NuSpec::Uniform { a, b } => {
                if !(*a > 0.0) {
                    return bad(format!(
                        "uniform on [{a}, {b}] has ∫λ⁻² dν = ∞ unless a > 0"
                    ));
                }
                if !(b > a && *b <= 2.0) {
                    return bad(format!("need 0 < a < b <= 2, got [{a}, {b}]"));
                }
            }
            NuSpec::Atoms { atoms } => {
                if atoms.is_empty()
                    || atoms
                        .iter()
                        .any(|&(l, w)| !(l > 0.0 && l <= 2.0 && w >= 0.0))
                {
                    return bad("atoms need 0 < λ <= 2 and weights >= 0".into());
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("weights sum to {total}, not 1"));
                }
            }
        }
        Ok(())
    }

    fn nodes(&self, n: usize) -> Vec<(f64, f64)> {
        match self {
            NuSpec::Uniform { a, b } => {
                let (x, w) = gauss_legendre(n);
                x.iter()
                    .zip(&w)
                    .map(|(x, w)| (0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * w))
                    .collect()
            }
            NuSpec::Atoms { atoms } => atoms.clone(),
        }
    }
}

/// Quadrature sizes for [`averaged_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyQuadrature {
    pub lambda_nodes: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub circle_nodes: usize,
}

impl Default for EnergyQuadrature {
    fn default() -> Self {
        EnergyQuadrature {
            lambda_nodes: 4,
            radial_nodes: 16,
            angular_nodes: 32,
            circle_nodes: 64,
        }
    }
}

/// `E_ε^u = ∫_{Ω_{2ε}} ∫ e^u_{λε}(x) dν(λ) dx`.
pub fn averaged_energy(
    u: &dyn DiskSource,
    eps: f64,
    nu: &NuSpec,
    q: &EnergyQuadrature,
) -> Result<f64, PlateauError> {
    nu.validate()?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(PlateauError::MarginViolation {
            dist: 1.0 - 2.0 * eps,
            eps,
        });
    }
    let lam = nu.nodes(q.lambda_nodes.max(1));
    let big_r = 1.0 - 2.0 * eps;
    let (xr, wr) = gauss_legendre(q.radial_nodes.max(1));
    let na = q.angular_nodes.max(4);
    let cells: Vec<(f64, f64)> = xr
        .iter()
        .zip(&wr)
        .map(|(x, w)| (0.5 * big_r * (1.0 + x), 0.5 * big_r * w))
        .collect();
    let total = cells
        .par_iter()
        .map(|&(rho, wr)| {
            let mut acc = 0.0;
            for k in 0..na {
                let a = TAU * k as f64 / na as f64;
                let x = [rho * a.cos(), rho * a.sin()];
                for &(l, wl) in &lam {
                    acc += wl * approx_energy_density(u, x, l * eps, q.circle_nodes)?;
                }
            }
            Ok(acc * wr * rho * TAU / na as f64)
        })
        .collect::<Result<Vec<f64>, PlateauError>>()?
        .into_iter()
        .sum();
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillResult {
    pub map: DiskMap,
    /// Discrete Lipschitz constant over grid edges.
    pub lipschitz: f64,
    pub loop_lipschitz: f64,
    /// `(π C + 2 C′) max(1, Lip γ)`
    pub lipschitz_bound: f64,
    pub within_bound: bool,
    /// Largest distance between the boundary ring and the loop (0 by
    /// construction).
    pub boundary_error: f64,
}

/// Fills `gamma` by `g̃(v) = h(γ(v/|v|), 2(1−|v|))` for `|v| ≥ 1/2` and
/// `g̃ = p` inside; `rings` is rounded up to an odd count so that
/// `|v| = 1/2` is a ring.
pub fn fill_loop(
    gamma: &LoopMap,
    hom: &FlowHomotopy,
    cert: &SllcCertificate,
    rings: usize,
) -> Result<FillResult, PlateauError> {
    if !cert.pass {
        return Err(PlateauError::Certificate("certificate did not pass".into()));
    }
    let space = *hom.field.space();
    if cert.space != space || gamma.space != space || cert.p != hom.center {
        return Err(PlateauError::Certificate(
            "loop, homotopy and certificate disagree on the space or center".into(),
        ));
    }
    let p = hom.center;
    for (index, x) in gamma.points.iter().enumerate() {
        let dist = space.dist(x, &p);
        if dist >= cert.r && dist > 0.0 {
            return Err(PlateauError::LoopEscapesBall {
                index,
                dist,
                radius: cert.r,
            });
        }
    }
    let n_r = if rings.max(3) % 2 == 1 {
        rings.max(3)
    } else {
        rings.max(3) + 1
    };
    let radii: Vec<f64> = (0..n_r).map(|i| i as f64 / (n_r - 1) as f64).collect();
    let angles = gamma.arclength_angles();
    let n = angles.len();
    let curves = gamma
        .points
        .par_iter()
        .map(|x| hom.curve(x))
        .collect::<Result<Vec<_>, FlowError>>()?;
    let mut values = Vec::with_capacity(n_r * n);
    for &s in &radii {
        for (j, c) in curves.iter().enumerate() {
            values.push(if s <= 0.5 {
                p
            } else if s == 1.0 {
                gamma.points[j]
            } else {
                hom.eval_on(c, 2.0 * (1.0 - s))
            });
        }
    }
    let map = DiskMap::new(space, radii, angles, values)?;
    let boundary_error = map
        .boundary()
        .iter()
        .zip(&gamma.points)
        .map(|(a, b)| space.dist(a, b))
        .fold(0.0, f64::max);
    let lipschitz = map.lipschitz();
    let loop_lipschitz = gamma.lipschitz();
    let lipschitz_bound = (PI * cert.c + 2.0 * cert.c_prime) * loop_lipschitz.max(1.0);
    Ok(FillResult {
        map,
        lipschitz,
        loop_lipschitz,
        lipschitz_bound,
        within_bound: lipschitz <= lipschitz_bound * (1.0 + 1e-9),
        boundary_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCertificate {
    pub eps: f64,
    pub energy: f64,
    pub lipschitz: f64,
    /// `Lip² π`
    pub bound: f64,
    /// `2π Lip²`, which holds for every map since `e ≤ 2 Lip²` pointwise.
    pub rigorous_bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares `E_ε` of a sampled map with `Lip² π (1 + tol)`.
pub fn energy_certificate(
    map: &DiskMap,
    eps: f64,
    nu: &NuSpec,
    q: &EnergyQuadrature,
    tol: f64,
) -> Result<EnergyCertificate, PlateauError> {
    let energy = averaged_energy(map, eps, nu, q)?;
    let lipschitz = map.lipschitz();
    let bound = lipschitz * lipschitz * PI;
    Ok(EnergyCertificate {
        eps,
        energy,
        lipschitz,
        bound,
        rigorous_bound: 2.0 * bound,
        tolerance: tol,
        pass: energy <= bound * (1.0 + tol),
    })
}

/// `E_ε` over a ladder of `ε`; the limit itself is not asserted.
pub fn energy_ladder(
    u: &dyn DiskSource,
    eps: &[f64],
    nu: &NuSpec,
    q: &EnergyQuadrature,
) -> Result<Vec<(f64, f64)>, PlateauError> {
    eps.iter()
        .map(|&e| Ok((e, averaged_energy(u, e, nu, q)?)))
        .collect()
}
