//! Entropy, one-dimensional displacement interpolation, the reduced
//! curvature-dimension inequality on the line, Bishop–Gromov ratios and the
//! averaging-coefficient bound chain.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model_trig::{
    bg_profile, c_coeff, sigma, simplicial_volume_coefficient, BoundMode, CdParams, TrigError,
};
use crate::report::{extended_f64, num};
use crate::rng::Rng;
use crate::spaces::{Space, SpaceError, SpacePoint};

/// Pass threshold for CD* margins.
pub const CD_TOL: f64 = 1e-8;
const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RicciError {
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Piecewise-constant probability density on the line: `values[i]` on
/// `[grid[i], grid[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr")]
pub struct Density1D {
    grid: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct DensityRepr {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<DensityRepr> for Density1D {
    type Error = RicciError;
    fn try_from(r: DensityRepr) -> Result<Self, RicciError> {
        Density1D::new(r.grid, r.values)
    }
}

impl Density1D {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, RicciError> {
        let d = Self::unchecked(grid, values)?;
        let m = d.mass();
        if (m - 1.0).abs() > NORMALIZATION_TOL {
            return Err(RicciError::InvalidDensity(format!(
                "total mass {m} is not 1"
            )));
        }
        Ok(d)
    }

    /// Rescales the values to unit mass.
    pub fn normalized(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, RicciError> {
        let mut d = Self::unchecked(grid, values)?;
        let m = d.mass();
        if !(m > 0.0) {
            return Err(RicciError::InvalidDensity("zero total mass".into()));
        }
        d.values.iter_mut().for_each(|v| *v /= m);
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self, RicciError> {
        if !(b > a) {
            return Err(RicciError::InvalidDensity(format!(
                "empty interval [{a}, {b}]"
            )));
        }
        Self::new(vec![a, b], vec![1.0 / (b - a)])
    }

    fn unchecked(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, RicciError> {
        if grid.len() != values.len() + 1 || values.is_empty() {
            return Err(RicciError::InvalidDensity(format!(
                "{} breakpoints for {} cells",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(RicciError::InvalidDensity(
                "breakpoints must be finite and increasing".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(RicciError::InvalidDensity(
                "values must be finite and nonnegative".into(),
            ));
        }
        Ok(Density1D { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn len(&self, i: usize) -> f64 {
        self.grid[i + 1] - self.grid[i]
    }

    pub fn mass(&self) -> f64 {
        (0..self.values.len())
            .map(|i| self.values[i] * self.len(i))
            .sum()
    }

    /// Density at `x` (right-continuous, 0 outside the grid).
    pub fn density_at(&self, x: f64) -> f64 {
        if x < self.grid[0] || x >= *self.grid.last().expect("nonempty") {
            return 0.0;
        }
        let i = self.grid.partition_point(|&g| g <= x) - 1;
        self.values[i]
    }

    /// Merges adjacent cells with equal values.
    pub fn coarsen(&self) -> Density1D {
        let mut grid = vec![self.grid[0]];
        let mut values: Vec<f64> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            match values.last() {
                Some(&last) if (last - v).abs() <= 1e-12 * last.max(v) => {
                    *grid.last_mut().expect("nonempty") = self.grid[i + 1];
                }
                _ => {
                    values.push(v);
                    grid.push(self.grid[i + 1]);
                }
            }
        }
        Density1D { grid, values }
    }

    /// Random density with `cells` cells of random widths and values on a
    /// random offset, some cells possibly empty.
    pub fn random(rng: &mut Rng, cells: usize) -> Density1D {
        let cells = cells.max(1);
        let mut grid = vec![4.0 * rng.random::<f64>() - 2.0];
        let mut values = Vec::with_capacity(cells);
        for k in 0..cells {
            let w = 0.05 + 0.5 * rng.random::<f64>();
            grid.push(grid[k] + w);
            let v = if cells > 2 && rng.random::<f64>() < 0.15 {
                0.0
            } else {
                0.1 + rng.random::<f64>()
            };
            values.push(v);
        }
        if values.iter().all(|&v| v == 0.0) {
            values[0] = 1.0;
        }
        Density1D::normalized(grid, values).expect("constructed valid")
    }
}

/// `S_{N′}(ν) = −Σ ρᵢ^{1−1/N′} lenᵢ`.
pub fn renyi_entropy(nu: &Density1D, nprime: f64) -> Result<f64, RicciError> {
    if !(nprime >= 1.0) {
        return Err(RicciError::InvalidParams(format!("N' = {nprime} below 1")));
    }
    let e = 1.0 - 1.0 / nprime;
    Ok(-(0..nu.values.len())
        .filter(|&i| nu.values[i] > 0.0)
        .map(|i| nu.values[i].powf(e) * nu.len(i))
        .sum::<f64>())
}

/// Piece of the monotone coupling: `[x0a, x0b]` is sent linearly onto
/// `[x1a, x1b]`, carrying `mass`; both densities are constant on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSegment {
    pub x0a: f64,
    pub x0b: f64,
    pub x1a: f64,
    pub x1b: f64,
    pub mass: f64,
}

impl CouplingSegment {
    fn rho0(&self) -> f64 {
        self.mass / (self.x0b - self.x0a)
    }
    fn rho1(&self) -> f64 {
        self.mass / (self.x1b - self.x1a)
    }
}

/// Monotone rearrangement coupling by a two-pointer sweep over the cells.
pub fn monotone_coupling(nu0: &Density1D, nu1: &Density1D) -> Vec<CouplingSegment> {
    let cells = |d: &Density1D| -> Vec<(f64, f64, f64)> {
        (0..d.values.len())
            .filter(|&i| d.values[i] > 0.0)
            .map(|i| (d.grid[i], d.grid[i + 1], d.values[i]))
            .collect()
    };
    let (c0, c1) = (cells(nu0), cells(nu1));
    let (mut i, mut j) = (0, 0);
    let (mut a0, mut a1) = (c0[0].0, c1[0].0);
    let mut out = Vec::new();
    while i < c0.len() && j < c1.len() {
        let rem0 = (c0[i].1 - a0) * c0[i].2;
        let rem1 = (c1[j].1 - a1) * c1[j].2;
        let m = rem0.min(rem1);
        let last0 = rem0 <= rem1;
        let last1 = rem1 <= rem0;
        let b0 = if last0 { c0[i].1 } else { a0 + m / c0[i].2 };
        let b1 = if last1 { c1[j].1 } else { a1 + m / c1[j].2 };
        if m > 0.0 && b0 > a0 && b1 > a1 {
            out.push(CouplingSegment {
                x0a: a0,
                x0b: b0,
                x1a: a1,
                x1b: b1,
                mass: m,
            });
        }
        if last0 {
            i += 1;
            if i < c0.len() {
                a0 = c0[i].0;
            }
        } else {
            a0 = b0;
        }
        if last1 {
            j += 1;
            if j < c1.len() {
                a1 = c1[j].0;
            }
        } else {
            a1 = b1;
        }
    }
    out
}

/// `W₂` between the marginals of a monotone coupling.
pub fn wasserstein2(coupling: &[CouplingSegment]) -> f64 {
    coupling
        .iter()
        .map(|s| {
            let (a, b) = (s.x1a - s.x0a, s.x1b - s.x0b);
            s.mass * (a * a + a * b + b * b) / 3.0
        })
        .sum::<f64>()
        .sqrt()
}

/// Density at time `t` along the Wasserstein geodesic, with the coupling.
pub fn displacement_geodesic(
    nu0: &Density1D,
    nu1: &Density1D,
    t: f64,
) -> Result<(Density1D, Vec<CouplingSegment>), RicciError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(RicciError::InvalidParams(format!("t = {t} outside [0, 1]")));
    }
    let coupling = monotone_coupling(nu0, nu1);
    if t == 0.0 {
        return Ok((nu0.clone(), coupling));
    }
    if t == 1.0 {
        return Ok((nu1.clone(), coupling));
    }
    let mut grid: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for s in &coupling {
        let mut a = (1.0 - t) * s.x0a + t * s.x1a;
        let b = (1.0 - t) * s.x0b + t * s.x1b;
        match grid.last().copied() {
            None => grid.push(a),
            Some(prev) if a > prev => {
                values.push(0.0);
                grid.push(a);
            }
            Some(prev) => a = prev,
        }
        if b > a {
            values.push(s.mass / (b - a));
            grid.push(b);
        }
    }
    let d = Density1D::normalized(grid, values)?;
    Ok((d.coarsen(), coupling))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdStarRow {
    pub t: f64,
    pub nprime: f64,
    pub lhs: f64,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    /// `rhs − lhs`; `−∞` when a coefficient is infinite.
    #[serde(with = "extended_f64")]
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdStarReport {
    pub params: CdParams,
    pub rows: Vec<CdStarRow>,
    #[serde(with = "extended_f64")]
    pub min_margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

// −∫ [σ^{(1−t)}(d) ρ₀^{−1/N′} + σ^{(t)}(d) ρ₁^{−1/N′}] dq by the midpoint
// rule, refined until the value moves by less than 1e-8.
fn cd_rhs(coupling: &[CouplingSegment], k: f64, nprime: f64, t: f64) -> Result<f64, RicciError> {
    let p = CdParams::new(k, nprime)?;
    let coef = |w: f64, d: f64| -> Option<f64> { sigma(p, w, d).finite() };
    for s in coupling {
        let dmax = (s.x1a - s.x0a).abs().max((s.x1b - s.x0b).abs());
        if k * dmax * dmax >= nprime * std::f64::consts::PI.powi(2) {
            return Ok(f64::NEG_INFINITY);
        }
    }
    let eval = |n: usize| -> Option<f64> {
        let mut total = 0.0;
        for s in coupling {
            let (w0, w1) = (s.rho0().powf(-1.0 / nprime), s.rho1().powf(-1.0 / nprime));
            let mut acc = 0.0;
            for i in 0..n {
                let u = (i as f64 + 0.5) / n as f64;
                let x0 = s.x0a + u * (s.x0b - s.x0a);
                let x1 = s.x1a + u * (s.x1b - s.x1a);
                let d = (x1 - x0).abs();
                acc += coef(1.0 - t, d)? * w0 + coef(t, d)? * w1;
            }
            total += s.mass * acc / n as f64;
        }
        Some(-total)
    };
    let mut n = 1;
    let mut prev = match eval(n) {
        Some(v) => v,
        None => return Ok(f64::NEG_INFINITY),
    };
    loop {
        n *= 2;
        let cur = match eval(n) {
            Some(v) => v,
            None => return Ok(f64::NEG_INFINITY),
        };
        if (cur - prev).abs() < 1e-8 || n >= 1 << 16 {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Checks `S_{N′}(Γ(t)) ≤ RHS` on the `(t, N′)` grid.
pub fn cd_star_check(
    nu0: &Density1D,
    nu1: &Density1D,
    params: CdParams,
    t_grid: &[f64],
    nprime_grid: &[f64],
) -> Result<CdStarReport, RicciError> {
    if let Some(np) = nprime_grid.iter().find(|&&np| !(np >= params.n)) {
        return Err(RicciError::InvalidParams(format!(
            "N' = {np} below N = {}",
            params.n
        )));
    }
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(RicciError::InvalidParams(
            "t grid must lie in [0, 1]".into(),
        ));
    }
    let coupling = monotone_coupling(nu0, nu1);
    let cases: Vec<(f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| nprime_grid.iter().map(move |&n| (t, n)))
        .collect();
    let rows = cases
        .par_iter()
        .map(|&(t, np)| {
            let (gt, _) = displacement_geodesic(nu0, nu1, t)?;
            let lhs = renyi_entropy(&gt, np)?;
            let rhs = cd_rhs(&coupling, params.k, np, t)?;
            let margin = if rhs == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                rhs - lhs
            };
            Ok(CdStarRow {
                t,
                nprime: np,
                lhs,
                rhs,
                margin,
            })
        })
        .collect::<Result<Vec<_>, RicciError>>()?;
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(CdStarReport {
        params,
        rows,
        min_margin,
        tolerance: CD_TOL,
        pass: min_margin >= -CD_TOL,
    })
}

// ---------------------------------------------------------------------------
// Bishop–Gromov
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgReport {
    pub space: Space,
    pub center: SpacePoint,
    pub params: CdParams,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Largest `ratio[i+1] − ratio[i]`; positive values are upticks.
    pub max_uptick: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Ratios `v_x(r) / v̄_{K,N}(r)` over the radii, with the largest uptick.
pub fn bg_check(
    space: &Space,
    center: &SpacePoint,
    params: CdParams,
    radii: &[f64],
    tol: f64,
) -> Result<BgReport, RicciError> {
    if !(params.n > 1.0) {
        return Err(RicciError::InvalidParams(format!(
            "need N > 1, got {}",
            params.n
        )));
    }
    if radii.len() < 2 || radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(RicciError::InvalidParams(
            "need at least two positive increasing radii".into(),
        ));
    }
    if !space.contains(center) {
        return Err(SpaceError::SpaceMismatch(format!("({}, {})", center.r, center.phi)).into());
    }
    let rows = radii
        .par_iter()
        .map(|&r| {
            let v = space.ball_volume(center, r, 1e-12)?;
            let model = bg_profile(params, r)?;
            Ok((v, v / model))
        })
        .collect::<Result<Vec<_>, RicciError>>()?;
    let (volumes, ratios): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let max_uptick = ratios
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BgReport {
        space: *space,
        center: *center,
        params,
        radii: radii.to_vec(),
        volumes,
        ratios,
        max_uptick,
        tolerance: tol,
        pass: max_uptick <= tol,
    })
}

// ---------------------------------------------------------------------------
// Averaging operator and the bound chain
// ---------------------------------------------------------------------------

/// Cutoff `ψ(t)`: 1 up to `R − ε`, `(R − t)/ε` on the ramp, 0 from `R` on.
pub fn averaging_cutoff(big_r: f64, eps: f64, t: f64) -> Result<f64, RicciError> {
    if !(eps > 0.0 && eps < big_r) {
        return Err(RicciError::InvalidParams(format!(
            "need 0 < ε < R, got ε={eps}, R={big_r}"
        )));
    }
    Ok(if t <= big_r - eps {
        1.0
    } else if t >= big_r {
        0.0
    } else {
        (big_r - t) / eps
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub eps: f64,
    pub c: f64,
    /// `n! c^n 𝓗ⁿ`
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub params: CdParams,
    pub n: u32,
    pub hausdorff: f64,
    pub rows: Vec<BoundRow>,
    /// `n! (−(N−1)K)^{n/2}`
    pub coefficient: f64,
    pub limit_bound: f64,
    /// Curvature-mode bound with `κ = K`, for comparison.
    pub kappa_mode_bound: f64,
    /// Bounds are nonincreasing along the ladder and stay above the limit.
    pub monotone: bool,
    pub final_error: f64,
}

/// Tabulates `n! C_{K,N}(R,ε)ⁿ 𝓗ⁿ` along the paired ladders.
pub fn simplicial_volume_pipeline(
    params: CdParams,
    n: u32,
    hausdorff_n: f64,
    r_ladder: &[f64],
    eps_ladder: &[f64],
) -> Result<BoundTable, RicciError> {
    if !(params.k < 0.0 && params.n > 1.0) {
        return Err(RicciError::InvalidParams(format!(
            "need K < 0 and N > 1, got K={}, N={}",
            params.k, params.n
        )));
    }
    if r_ladder.len() != eps_ladder.len() || r_ladder.is_empty() {
        return Err(RicciError::InvalidParams(
            "R and ε ladders must be nonempty and equally long".into(),
        ));
    }
    if !(hausdorff_n >= 0.0 && hausdorff_n.is_finite()) {
        return Err(RicciError::InvalidParams(format!(
            "volume {hausdorff_n} must be finite and >= 0"
        )));
    }
    let fact: f64 = (1..=n).map(f64::from).product();
    let rows = r_ladder
        .par_iter()
        .zip(eps_ladder.par_iter())
        .map(|(&r, &e)| {
            let c = c_coeff(params, r, e)?;
            Ok(BoundRow {
                big_r: r,
                eps: e,
                c,
                bound: fact * c.powi(n as i32) * hausdorff_n,
            })
        })
        .collect::<Result<Vec<_>, RicciError>>()?;
    let coefficient = simplicial_volume_coefficient(
        n,
        BoundMode::Cd {
            k: params.k,
            n: params.n,
        },
    )?;
    let kappa_mode = simplicial_volume_coefficient(n, BoundMode::Alexandrov { kappa: params.k })?;
    let limit_bound = coefficient * hausdorff_n;
    let slack = 1e-12 * limit_bound.max(1.0);
    let monotone = rows.windows(2).all(|w| w[1].bound <= w[0].bound + slack)
        && rows.iter().all(|r| r.bound >= limit_bound - slack);
    let final_error = (rows.last().expect("nonempty").bound - limit_bound).abs();
    Ok(BoundTable {
        params,
        n,
        hausdorff: hausdorff_n,
        rows,
        coefficient,
        limit_bound,
        kappa_mode_bound: kappa_mode * hausdorff_n,
        monotone,
        final_error,
    })
}

impl BoundTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["R", "eps", "c", "bound", "limit"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                num(r.big_r),
                num(r.eps),
                num(r.c),
                num(r.bound),
                num(self.limit_bound),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

impl BgReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r", "volume", "ratio"])
            .expect("in-memory write");
        for i in 0..self.radii.len() {
            w.write_record([
                num(self.radii[i]),
                num(self.volumes[i]),
                num(self.ratios[i]),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

impl CdStarReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "nprime", "lhs", "rhs", "margin"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                num(r.t),
                num(r.nprime),
                num(r.lhs),
                num(r.rhs),
                num(r.margin),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn u(a: f64, b: f64) -> Density1D {
        Density1D::uniform(a, b).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((renyi_entropy(&u(0.0, 1.0), 2.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((renyi_entropy(&u(0.0, 2.0), 2.0).unwrap() + 2f64.sqrt()).abs() < 1e-15);
        let narrow = renyi_entropy(&u(0.0, 1e-8), 2.0).unwrap();
        assert!((narrow + 1e-4).abs() < 1e-15);
    }

    #[test]
    fn geodesic_examples() {
        let (g, _) = displacement_geodesic(&u(0.0, 1.0), &u(5.0, 6.0), 0.5).unwrap();
        assert_eq!(g.grid().len(), 2);
        assert!((g.grid()[0] - 2.5).abs() < 1e-15 && (g.grid()[1] - 3.5).abs() < 1e-15);
        let (g, c) = displacement_geodesic(&u(0.0, 1.0), &u(0.0, 2.0), 0.5).unwrap();
        assert_eq!(g.values().len(), 1);
        assert!((g.values()[0] - 2.0 / 3.0).abs() < 1e-15 && (g.grid()[1] - 1.5).abs() < 1e-15);
        assert_eq!(c.len(), 1);
        let (g0, _) = displacement_geodesic(&u(0.0, 1.0), &u(0.0, 2.0), 0.0).unwrap();
        assert_eq!(g0, u(0.0, 1.0));
    }

    #[test]
    fn gap_cells_survive() {
        let a = Density1D::normalized(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 1.0]).unwrap();
        let (g, _) = displacement_geodesic(&a, &a, 0.3).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 3);
        assert!((v[0] - 0.5).abs() < 1e-14 && v[1] == 0.0 && (v[2] - 0.5).abs() < 1e-14);
        assert!(Density1D::new(vec![0.0, 1.0], vec![0.5]).is_err());
    }

    #[test]
    fn cd_star_examples() {
        let ts = [0.25, 0.5, 0.75];
        let r = cd_star_check(
            &u(0.0, 1.0),
            &u(5.0, 6.0),
            CdParams::new(0.0, 2.0).unwrap(),
            &ts,
            &[2.0, 3.0],
        )
        .unwrap();
        assert!(r.min_margin.abs() < 1e-9 && r.pass, "{r:?}");
        let r = cd_star_check(
            &u(0.0, 1.0),
            &u(5.0, 6.0),
            CdParams::new(-1.0, 2.0).unwrap(),
            &ts,
            &[2.0],
        )
        .unwrap();
        assert!(r.min_margin > 1e-3);
        let r = cd_star_check(
            &u(0.0, 0.1),
            &u(2.0, 2.1),
            CdParams::new(1.0, 2.0).unwrap(),
            &ts,
            &[2.0],
        )
        .unwrap();
        assert!(r.min_margin <= -1e-3 && !r.pass);
        // beyond the diameter bound the right side is −∞
        let r = cd_star_check(
            &u(0.0, 0.1),
            &u(5.0, 5.1),
            CdParams::new(1.0, 2.0).unwrap(),
            &[0.5],
            &[2.0],
        )
        .unwrap();
        assert_eq!(r.min_margin, f64::NEG_INFINITY);
        assert!(serde_json::to_string(&r).unwrap().contains("\"-inf\""));
        assert!(cd_star_check(
            &u(0.0, 1.0),
            &u(1.0, 2.0),
            CdParams::new(0.0, 3.0).unwrap(),
            &ts,
            &[2.0]
        )
        .is_err());
    }

    #[test]
    fn bg_examples() {
        let c = Space::euclidean_cone(1.5 * PI).unwrap();
        let p = CdParams::new(0.0, 2.0).unwrap();
        let r = bg_check(&c, &c.origin(), p, &[0.1, 0.5, 1.0, 2.0], 1e-6).unwrap();
        assert!(
            r.pass && r.ratios.iter().all(|x| (x - 1.5 * PI).abs() < 1e-8),
            "{r:?}"
        );
        let m = Space::model_plane(0.0).unwrap();
        let r = bg_check(
            &m,
            &m.origin(),
            CdParams::new(-1.0, 2.0).unwrap(),
            &[0.5, 1.0, 2.0],
            1e-6,
        )
        .unwrap();
        assert!(r.pass && r.max_uptick < -1e-3);
    }

    #[test]
    fn cutoff() {
        assert_eq!(averaging_cutoff(2.0, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(averaging_cutoff(2.0, 0.5, 2.0).unwrap(), 0.0);
        assert!((averaging_cutoff(2.0, 0.5, 1.75).unwrap() - 0.5).abs() < 1e-15);
        assert!(averaging_cutoff(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn bound_table() {
        let p = CdParams::new(-1.0, 2.0).unwrap();
        let t =
            simplicial_volume_pipeline(p, 2, 1.0, &[2.0, 5.0, 10.0, 40.0], &[0.5, 0.1, 0.01, 1e-6])
                .unwrap();
        assert_eq!(t.limit_bound, 2.0);
        assert_eq!(t.kappa_mode_bound, 2.0);
        assert!(t.monotone && t.final_error < 1e-3, "{t:?}");
        for r in &t.rows {
            assert_eq!(r.bound, 2.0 * c_coeff(p, r.big_r, r.eps).unwrap().powi(2));
        }
    }
}
