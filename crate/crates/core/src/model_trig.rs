//! κ-trigonometry, model-plane cosine laws and the curvature-dimension
//! coefficient functions.
//!
//! Everything is scale-reduced internally: with `k = sqrt(|κ|)` the
//! functions are evaluated on the unit model and rescaled, and for
//! `|κ| t² < 1e-4` a truncated power series replaces the closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature;

const SERIES_CUTOFF: f64 = 1e-4;
const PROFILE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrigError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Curvature bound κ.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Kappa(pub f64);

impl Kappa {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Half-circumference `π/√κ` of the model sphere, infinite for κ ≤ 0.
    pub fn diameter(self) -> f64 {
        if self.0 > 0.0 {
            PI / self.0.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

impl From<f64> for Kappa {
    fn from(v: f64) -> Self {
        Kappa(v)
    }
}

/// Curvature-dimension parameters `(K, N)` with `N ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdParams {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
}

impl CdParams {
    pub fn new(k: f64, n: f64) -> Result<Self, TrigError> {
        if !k.is_finite() || !n.is_finite() || n < 1.0 {
            return Err(TrigError::InvalidParams(format!(
                "need finite K and N >= 1, got K={k}, N={n}"
            )));
        }
        Ok(CdParams { k, n })
    }
}

/// Side lengths of a triangle `pqr`: `pq`, `qr`, `rp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSides {
    pub pq: f64,
    pub qr: f64,
    pub rp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    P,
    Q,
    R,
}

impl TriangleSides {
    /// Validates the triangle inequality (with a relative slack of 1e-12)
    /// and the perimeter cap `2π/√κ` for κ > 0.
    pub fn new(kappa: Kappa, pq: f64, qr: f64, rp: f64) -> Result<Self, TrigError> {
        let s = TriangleSides { pq, qr, rp };
        s.validate(kappa)?;
        Ok(s)
    }

    fn validate(&self, kappa: Kappa) -> Result<(), TrigError> {
        let [a, b, c] = [self.pq, self.qr, self.rp];
        if !(a >= 0.0 && b >= 0.0 && c >= 0.0) || !(a + b + c).is_finite() {
            return Err(TrigError::Domain(format!("bad side lengths {a}, {b}, {c}")));
        }
        let slack = 1e-12 * (a + b + c).max(1e-300);
        if a > b + c + slack || b > a + c + slack || c > a + b + slack {
            return Err(TrigError::Domain(format!(
                "sides {a}, {b}, {c} violate the triangle inequality"
            )));
        }
        if kappa.0 > 0.0 && a + b + c > 2.0 * kappa.diameter() * (1.0 + 1e-12) {
            return Err(TrigError::Domain(format!(
                "perimeter {} exceeds 2π/√κ",
                a + b + c
            )));
        }
        Ok(())
    }

    /// (adjacent, adjacent, opposite) for a vertex.
    fn at(&self, v: Vertex) -> (f64, f64, f64) {
        match v {
            Vertex::P => (self.pq, self.rp, self.qr),
            Vertex::Q => (self.pq, self.qr, self.rp),
            Vertex::R => (self.qr, self.rp, self.pq),
        }
    }
}

/// Real number or `+∞`, kept as an explicit tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::PosInfinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }

    /// Lossy conversion for reporting.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

// ---------------------------------------------------------------------------
// sn / cs
// ---------------------------------------------------------------------------

/// Solution of `y'' + κ y = 0` with `y(0) = 0`, `y'(0) = 1`.
pub fn sn(kappa: Kappa, t: f64) -> f64 {
    let k = kappa.0;
    let x = k * t * t;
    if x.abs() < SERIES_CUTOFF {
        // t (1 - x/6 + x²/120 - x³/5040 + x⁴/362880)
        t * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0 * (1.0 - x / 72.0))))
    } else if k > 0.0 {
        let s = k.sqrt();
        (s * t).sin() / s
    } else {
        let s = (-k).sqrt();
        (s * t).sinh() / s
    }
}

/// `cs_κ = sn_κ'`.
pub fn cs(kappa: Kappa, t: f64) -> f64 {
    let k = kappa.0;
    let x = k * t * t;
    if x.abs() < SERIES_CUTOFF {
        1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0 * (1.0 - x / 56.0)))
    } else if k > 0.0 {
        (k.sqrt() * t).cos()
    } else {
        ((-k).sqrt() * t).cosh()
    }
}

/// `cs_κ(d)/sn_κ(d)`; for κ = 0 this is `1/d`.
pub fn cot_kappa(kappa: Kappa, d: f64) -> f64 {
    cs(kappa, d) / sn(kappa, d)
}

fn sn2_half(kappa: Kappa, t: f64) -> f64 {
    let s = sn(kappa, 0.5 * t);
    s * s
}

// Inverse of sn restricted to [0, π/(2√κ)]: the length ℓ with sn(ℓ/2)² = s2
// and, for κ > 0, cs(ℓ/2)² = c2 (the complement, passed separately to
// avoid cancellation near the antipode).
fn half_angle_length(kappa: Kappa, s2: f64, c2: f64) -> f64 {
    let k = kappa.0;
    let s2 = s2.max(0.0);
    if k > 0.0 {
        let r = k.sqrt();
        2.0 / r * (r * s2.sqrt()).atan2(c2.max(0.0).sqrt())
    } else if k < 0.0 {
        let r = (-k).sqrt();
        2.0 / r * (r * s2.sqrt()).asinh()
    } else {
        2.0 * s2.sqrt()
    }
}

// ---------------------------------------------------------------------------
// Model-plane laws
// ---------------------------------------------------------------------------

/// Third side of the model triangle with sides `b`, `c` enclosing angle `theta`.
pub fn model_side(kappa: Kappa, b: f64, c: f64, theta: f64) -> Result<f64, TrigError> {
    if !(b >= 0.0 && c >= 0.0) || !theta.is_finite() || !b.is_finite() || !c.is_finite() {
        return Err(TrigError::Domain(format!(
            "bad arguments b={b}, c={c}, θ={theta}"
        )));
    }
    if !(-1e-12..=PI + 1e-12).contains(&theta) {
        return Err(TrigError::Domain(format!("angle {theta} outside [0, π]")));
    }
    let theta = theta.clamp(0.0, PI);
    let diam = kappa.diameter();
    if b > diam * (1.0 + 1e-12) || c > diam * (1.0 + 1e-12) {
        return Err(TrigError::Domain(format!(
            "sides {b}, {c} not realizable in the model sphere"
        )));
    }
    Ok(model_side_raw(kappa, b, c, theta))
}

// Stable half-angle form of the cosine law:
//   sn²(ℓ/2) = sn²((b−c)/2) + sn(b) sn(c) sin²(θ/2)
//   cs²(ℓ/2) = cs²((b+c)/2) + κ sn(b) sn(c) cos²(θ/2)
pub(crate) fn model_side_raw(kappa: Kappa, b: f64, c: f64, theta: f64) -> f64 {
    let sh = (0.5 * theta).sin();
    let ch = (0.5 * theta).cos();
    let prod = sn(kappa, b) * sn(kappa, c);
    let s2 = sn2_half(kappa, b - c) + prod * sh * sh;
    let c2 = if kappa.0 > 0.0 {
        let h = cs(kappa, 0.5 * (b + c));
        h * h + kappa.0 * prod * ch * ch
    } else {
        1.0
    };
    half_angle_length(kappa, s2, c2)
}

// Angle between adjacent sides a1, a2 opposite o, without validation.
pub(crate) fn angle_raw(kappa: Kappa, a1: f64, a2: f64, o: f64) -> f64 {
    let num_s = sn2_half(kappa, o) - sn2_half(kappa, a1 - a2);
    let num_c = sn2_half(kappa, a1 + a2) - sn2_half(kappa, o);
    2.0 * num_s.max(0.0).sqrt().atan2(num_c.max(0.0).sqrt())
}

/// Angle at `vertex` of the model triangle with the given sides.
pub fn comparison_angle(
    kappa: Kappa,
    sides: TriangleSides,
    vertex: Vertex,
) -> Result<f64, TrigError> {
    sides.validate(kappa)?;
    let (a1, a2, o) = sides.at(vertex);
    if a1 <= 0.0 || a2 <= 0.0 {
        return Err(TrigError::Degenerate("an adjacent side is zero".into()));
    }
    if kappa.0 > 0.0 {
        let d = kappa.diameter();
        if a1 >= d || a2 >= d {
            return Err(TrigError::Degenerate(
                "an adjacent side reaches the antipode".into(),
            ));
        }
    }
    Ok(angle_raw(kappa, a1, a2, o))
}

/// `|p̃ x̃|` where `x̃` divides `q̃r̃` at fraction `t` from `q̃`.
pub fn comparison_point_distance(
    kappa: Kappa,
    sides: TriangleSides,
    t: f64,
) -> Result<f64, TrigError> {
    sides.validate(kappa)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(TrigError::Domain(format!("fraction {t} outside [0, 1]")));
    }
    let TriangleSides { pq, qr, rp } = sides;
    if t == 0.0 || qr == 0.0 {
        return Ok(pq);
    }
    if pq == 0.0 {
        return Ok(t * qr);
    }
    if kappa.0 > 0.0 && (pq >= kappa.diameter() || qr >= kappa.diameter()) {
        return Err(TrigError::Degenerate("side reaches the antipode".into()));
    }
    let angle = angle_raw(kappa, pq, qr, rp);
    Ok(model_side_raw(kappa, pq, t * qr, angle))
}

// ---------------------------------------------------------------------------
// Curvature-dimension coefficients
// ---------------------------------------------------------------------------

fn sigma_raw(k: f64, n: f64, t: f64, theta: f64) -> Extended {
    if k * theta * theta >= n * PI * PI {
        return Extended::PosInfinity;
    }
    if t == 0.0 {
        return Extended::Finite(0.0);
    }
    if t == 1.0 {
        return Extended::Finite(1.0);
    }
    if theta == 0.0 {
        return Extended::Finite(t);
    }
    let kn = Kappa(k / n);
    Extended::Finite(sn(kn, t * theta) / sn(kn, theta))
}

/// Distortion coefficient `σ_{K,N}^{(t)}(θ)`.
///
/// `θ = 0` is accepted and returns the limit `t`.
pub fn sigma(params: CdParams, t: f64, theta: f64) -> Extended {
    sigma_raw(params.k, params.n, t, theta)
}

/// `τ_{K,N}^{(t)}(θ) = t^{1/N} σ_{K,N−1}^{(t)}(θ)^{(N−1)/N}`; equals `t` at N = 1.
pub fn tau(params: CdParams, t: f64, theta: f64) -> Extended {
    let n = params.n;
    if n == 1.0 {
        return Extended::Finite(t);
    }
    match sigma_raw(params.k, n - 1.0, t, theta) {
        Extended::PosInfinity => Extended::PosInfinity,
        Extended::Finite(s) => Extended::Finite(t.powf(1.0 / n) * s.powf((n - 1.0) / n)),
    }
}

/// Model volume profile `v̄_{K,N}(r) = ∫₀^r sn_{K/(N−1)}(t)^{N−1} dt`.
pub fn bg_profile(params: CdParams, r: f64) -> Result<f64, TrigError> {
    check_profile_domain(params, r)?;
    profile_integral(params, 0.0, r)
}

fn check_profile_domain(params: CdParams, r: f64) -> Result<(), TrigError> {
    if params.n <= 1.0 {
        return Err(TrigError::InvalidParams(format!(
            "profile needs N > 1, got {}",
            params.n
        )));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(TrigError::Domain(format!(
            "radius {r} must be finite and >= 0"
        )));
    }
    if params.k > 0.0 && r > PI * ((params.n - 1.0) / params.k).sqrt() * (1.0 + 1e-12) {
        return Err(TrigError::Domain(format!("radius {r} beyond π√((N−1)/K)")));
    }
    Ok(())
}

fn profile_integral(params: CdParams, a: f64, b: f64) -> Result<f64, TrigError> {
    let m = params.n - 1.0;
    let kk = Kappa(params.k / m);
    quadrature::integrate(|t| sn(kk, t).max(0.0).powf(m), a, b, &[], PROFILE_TOL, 0.0)
        .map_err(|e| TrigError::Domain(e.to_string()))
}

/// Averaging coefficient `C_{K,N}(R,ε) = (v̄(R) − v̄(R−ε)) / (ε v̄(R−ε))`.
///
/// The numerator is integrated directly over `[R−ε, R]`.
pub fn c_coeff(params: CdParams, big_r: f64, eps: f64) -> Result<f64, TrigError> {
    if params.k >= 0.0 || params.n <= 1.0 {
        return Err(TrigError::InvalidParams(format!(
            "need K < 0 and N > 1, got K={}, N={}",
            params.k, params.n
        )));
    }
    if !(eps > 0.0 && eps < big_r) || !big_r.is_finite() {
        return Err(TrigError::InvalidParams(format!(
            "need 0 < ε < R, got ε={eps}, R={big_r}"
        )));
    }
    let base = profile_integral(params, 0.0, big_r - eps)?;
    // integrate in the offset u = R − t so the shell width is exactly ε
    let m = params.n - 1.0;
    let kk = Kappa(params.k / m);
    let shell = quadrature::integrate(
        |u| sn(kk, big_r - u).powf(m),
        0.0,
        eps,
        &[],
        PROFILE_TOL,
        0.0,
    )
    .map_err(|e| TrigError::Domain(e.to_string()))?;
    Ok(shell / (eps * base))
}

/// Which simplicial-volume bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BoundMode {
    /// Curvature ≥ κ: `n!(n−1)^n (−κ)^{n/2}`.
    Alexandrov { kappa: f64 },
    /// CD*(K, N): `n! (−(N−1)K)^{n/2}`.
    Cd {
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "N")]
        n: f64,
    },
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Coefficient multiplying `𝓗^n(X)` in the simplicial-volume bound.
pub fn simplicial_volume_coefficient(n: u32, mode: BoundMode) -> Result<f64, TrigError> {
    if n == 0 {
        return Err(TrigError::InvalidParams("dimension must be >= 1".into()));
    }
    let nf = f64::from(n);
    match mode {
        BoundMode::Alexandrov { kappa } => {
            if !(kappa < 0.0) {
                return Err(TrigError::InvalidParams(format!("need κ < 0, got {kappa}")));
            }
            Ok(factorial(n) * (nf - 1.0).powi(n as i32) * (-kappa).powf(nf / 2.0))
        }
        BoundMode::Cd { k, n: big_n } => {
            if !(k < 0.0) || !(big_n >= 1.0) {
                return Err(TrigError::InvalidParams(format!(
                    "need K < 0 and N >= 1, got K={k}, N={big_n}"
                )));
            }
            Ok(factorial(n) * (-(big_n - 1.0) * k).powf(nf / 2.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sn_cs_examples() {
        assert_eq!(sn(Kappa(0.0), 3.5), 3.5);
        assert!(close(sn(Kappa(1.0), PI / 2.0), 1.0, 1e-15));
        assert!(close(sn(Kappa(-1.0), 1.0), 1.175_201_193_643_801_5, 1e-15));
        assert_eq!(cs(Kappa(0.0), 7.0), 1.0);
        assert!(close(cs(Kappa(1.0), PI), -1.0, 1e-15));
        assert!(close(cs(Kappa(-1.0), 1.0), 1.543_080_634_815_243_8, 1e-15));
    }

    #[test]
    fn series_matches_closed_form_at_cutoff() {
        for k in [1.0f64, -1.0, 4.0] {
            let t = (0.999e-4f64 / k.abs()).sqrt();
            let s = k.abs().sqrt();
            let (closed_sn, closed_cs) = if k > 0.0 {
                ((s * t).sin() / s, (s * t).cos())
            } else {
                ((s * t).sinh() / s, (s * t).cosh())
            };
            assert!((sn(Kappa(k), t) - closed_sn).abs() < 1e-16);
            assert!((cs(Kappa(k), t) - closed_cs).abs() < 2e-16);
        }
    }

    #[test]
    fn model_side_examples() {
        assert!(close(
            model_side(Kappa(0.0), 3.0, 4.0, PI / 2.0).unwrap(),
            5.0,
            1e-15
        ));
        for th in [0.1, 1.0, 2.5, PI] {
            let l = model_side(Kappa(1.0), PI / 2.0, PI / 2.0, th).unwrap();
            assert!(close(l, th, 1e-14), "{l} vs {th}");
        }
        let h = model_side(Kappa(-1.0), 1.0, 1.0, PI / 2.0).unwrap();
        let expect = (1.543_080_634_815_243_8f64.powi(2)).acosh();
        assert!(close(h, expect, 1e-14));
        assert!(close(h, 1.513_374_006_596_504, 1e-14));
        assert!(model_side(Kappa(1.0), 4.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn small_sides_are_accurate() {
        let l = model_side(Kappa(-1.0), 1e-9, 1e-9, PI / 2.0).unwrap();
        assert!(close(l, 2f64.sqrt() * 1e-9, 1e-12));
        let l = model_side(Kappa(1.0), 1.0, 1.0 + 1e-13, 0.0).unwrap();
        assert!(close(l, 1e-13, 1e-3));
    }

    #[test]
    fn comparison_angle_examples() {
        let s = TriangleSides::new(Kappa(0.0), 3.0, 4.0, 5.0).unwrap();
        assert!(close(
            comparison_angle(Kappa(0.0), s, Vertex::Q).unwrap(),
            PI / 2.0,
            1e-15
        ));
        let s = TriangleSides::new(Kappa(0.0), 1.5, 3.0, 1.5).unwrap();
        assert!(close(
            comparison_angle(Kappa(0.0), s, Vertex::P).unwrap(),
            PI,
            1e-15
        ));
        let s = TriangleSides::new(Kappa(-1.0), 1.0, 1.0, 1.0).unwrap();
        let a = comparison_angle(Kappa(-1.0), s, Vertex::R).unwrap();
        assert!(close(a, 0.918_797_872_178_027_4, 1e-14));
        let s = TriangleSides::new(Kappa(0.0), 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            comparison_angle(Kappa(0.0), s, Vertex::P),
            Err(TrigError::Degenerate(_))
        ));
    }

    #[test]
    fn comparison_point_examples() {
        let s = TriangleSides::new(Kappa(0.0), 2.0, 2.0, 2.0).unwrap();
        assert_eq!(comparison_point_distance(Kappa(0.0), s, 0.0).unwrap(), 2.0);
        assert!(close(
            comparison_point_distance(Kappa(0.0), s, 0.5).unwrap(),
            3f64.sqrt(),
            1e-15
        ));
        let q = PI / 2.0;
        let s = TriangleSides::new(Kappa(1.0), q, q, q).unwrap();
        assert!(close(
            comparison_point_distance(Kappa(1.0), s, 0.5).unwrap(),
            q,
            1e-14
        ));
    }

    #[test]
    fn sigma_tau_examples() {
        let p = CdParams::new(0.0, 3.0).unwrap();
        assert_eq!(sigma(p, 0.3, 1.7), Extended::Finite(0.3));
        let p = CdParams::new(4.0, 1.0).unwrap();
        assert!(sigma(p, 0.5, PI).is_infinite());
        let p = CdParams::new(-1.0, 2.0).unwrap();
        assert!(close(
            sigma(p, 0.5, 2.0).to_f64(),
            0.396_639_090_873_193_46,
            1e-14
        ));
        assert!(close(
            tau(p, 0.5, 2.0).to_f64(),
            0.402_509_091_097_296,
            1e-14
        ));
        let p = CdParams::new(-3.0, 1.0).unwrap();
        assert_eq!(tau(p, 0.3, 1.0), Extended::Finite(0.3));
        let p = CdParams::new(0.0, 3.0).unwrap();
        assert!(close(tau(p, 0.4, 2.0).to_f64(), 0.4, 1e-15));
    }

    #[test]
    fn profile_examples() {
        let p = CdParams::new(0.0, 2.0).unwrap();
        assert!(close(bg_profile(p, 1.3).unwrap(), 1.69 / 2.0, 1e-13));
        let p = CdParams::new(0.0, 3.0).unwrap();
        assert!(close(bg_profile(p, 2.0).unwrap(), 8.0 / 3.0, 1e-13));
        let p = CdParams::new(-1.0, 2.0).unwrap();
        assert!(close(
            bg_profile(p, 1.0).unwrap(),
            0.543_080_634_815_243_8,
            1e-12
        ));
        let p = CdParams::new(1.0, 2.0).unwrap();
        assert!(bg_profile(p, 4.0).is_err());
        assert!(bg_profile(CdParams::new(0.0, 1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn c_coeff_examples() {
        let p = CdParams::new(-1.0, 2.0).unwrap();
        assert!(close(
            c_coeff(p, 10.0, 1e-6).unwrap(),
            1.000_091_304_118_398_3,
            1e-9
        ));
        assert!(close(
            c_coeff(p, 40.0, 1e-6).unwrap(),
            1.000_000_500_000_166_7,
            1e-9
        ));
        let p = CdParams::new(-4.0, 3.0).unwrap();
        assert!(close(
            c_coeff(p, 60.0, 1e-6).unwrap(),
            2.828_431_124_749_961_3,
            1e-9
        ));
        assert!(c_coeff(CdParams::new(1.0, 2.0).unwrap(), 2.0, 0.1).is_err());
        assert!(c_coeff(p, 1.0, 2.0).is_err());
    }

    #[test]
    fn bound_coefficients() {
        let cd = |k, n| BoundMode::Cd { k, n };
        assert!(close(
            simplicial_volume_coefficient(2, cd(-1.0, 2.0)).unwrap(),
            2.0,
            1e-15
        ));
        let a = BoundMode::Alexandrov { kappa: -1.0 };
        assert!(close(
            simplicial_volume_coefficient(2, a).unwrap(),
            2.0,
            1e-15
        ));
        assert!(close(
            simplicial_volume_coefficient(3, cd(-2.0, 4.0)).unwrap(),
            88.181_630_740_194_41,
            1e-14
        ));
        assert!(simplicial_volume_coefficient(2, BoundMode::Alexandrov { kappa: 0.5 }).is_err());
    }
}
