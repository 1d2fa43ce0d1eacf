//! Config-driven experiment runner.
//!
//! A config is a JSON object
//!
//! ```json
//! {"schema_version": 1, "experiment": "sllc", "seed": 7,
//!  "space": {"kind": "euclidean_cone", "theta_total": 4.71238898038469},
//!  "params": {...}, "tolerance": 1e-4, "output": {"dir": "out"}}
//! ```
//!
//! Every run writes `<out>/<experiment>.json` and `<out>/<experiment>.csv`
//! and exits 0 when all checks pass, 1 when some check fails (the report
//! is still written) and 2 on configuration or I/O errors.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::curvature_check::{
    curvature_matrix, default_matrix, matrix_csv, MatrixEntry, MatrixRow,
};
use crate::flow::{
    build_sllc_certificate_with, check_arrival, check_contraction_pairs, curves_to_csv, FlowError,
    FlowHomotopy, FlowParams, SllcOptions,
};
use crate::plateau::{
    averaged_energy, energy_certificate, fill_loop, ConstantMap, DiskMap, DiskSource,
    EnergyQuadrature, LoopMap, NuSpec, PolarMap,
};
use crate::report::num;
use crate::ricci::{bg_check, cd_star_check, simplicial_volume_pipeline, Density1D};
use crate::rng;
use crate::semiconcave::{verify_concavity, Region, ScalarField};
use crate::{CdParams, Kappa, Space, SpacePoint};

pub const SCHEMA_VERSION: u32 = 1;
/// Overrides the output directory unless `--out` is given.
pub const OUT_DIR_ENV: &str = "ALEXANDROV_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sllc,
    Contraction,
    Concavity,
    Curvature,
    Bg,
    Cd1d,
    Energy,
    Fill,
    Bound,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Sllc,
        ExperimentKind::Contraction,
        ExperimentKind::Concavity,
        ExperimentKind::Curvature,
        ExperimentKind::Bg,
        ExperimentKind::Cd1d,
        ExperimentKind::Energy,
        ExperimentKind::Fill,
        ExperimentKind::Bound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Sllc => "sllc",
            ExperimentKind::Contraction => "contraction",
            ExperimentKind::Concavity => "concavity",
            ExperimentKind::Curvature => "curvature",
            ExperimentKind::Bg => "bg",
            ExperimentKind::Cd1d => "cd1d",
            ExperimentKind::Energy => "energy",
            ExperimentKind::Fill => "fill",
            ExperimentKind::Bound => "bound",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Experiments that draw random samples and therefore need a seed.
    pub fn needs_seed(self) -> bool {
        matches!(
            self,
            ExperimentKind::Sllc
                | ExperimentKind::Contraction
                | ExperimentKind::Concavity
                | ExperimentKind::Curvature
                | ExperimentKind::Cd1d
                | ExperimentKind::Fill
        )
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            ExperimentKind::Sllc | ExperimentKind::Contraction => 1e-4,
            ExperimentKind::Concavity | ExperimentKind::Bg => 1e-6,
            ExperimentKind::Curvature => 1e-9,
            ExperimentKind::Cd1d => 1e-8,
            ExperimentKind::Energy | ExperimentKind::Fill | ExperimentKind::Bound => 1e-3,
        }
    }

    fn default_space(self) -> Space {
        match self {
            ExperimentKind::Energy => Space::ModelPlane { kappa: 0.0 },
            _ => Space::EuclideanCone {
                theta_total: 1.5 * PI,
            },
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// Parameter blocks
// ---------------------------------------------------------------------------

/// Flow parameters with every field optional; `lambda` defaults to the
/// bound `cosh R / sinh(R(1−δ₀))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub eps: f64,
    pub delta0: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub lambda: Option<f64>,
    pub step_tol: f64,
    pub max_step: f64,
    pub min_step: Option<f64>,
    pub scan_resolution: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        let p = FlowParams::default();
        FlowConfig {
            eps: p.eps,
            delta0: p.delta0,
            radius: p.radius,
            lambda: None,
            step_tol: p.step_tol,
            max_step: p.max_step,
            min_step: p.min_step,
            scan_resolution: p.scan_resolution,
        }
    }
}

impl FlowConfig {
    pub fn params(&self) -> FlowParams {
        FlowParams {
            eps: self.eps,
            delta0: self.delta0,
            radius: self.radius,
            lambda: self
                .lambda
                .unwrap_or_else(|| FlowParams::lambda_bound(self.radius, self.delta0)),
            step_tol: self.step_tol,
            max_step: self.max_step,
            min_step: self.min_step,
            scan_resolution: self.scan_resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SllcConfig {
    pub flow: FlowConfig,
    pub center: Option<SpacePoint>,
    pub samples: usize,
    pub base_points: usize,
    pub radius: Option<f64>,
    /// Gradient curves from this many base points go to the CSV.
    pub curves: usize,
}

impl Default for SllcConfig {
    fn default() -> Self {
        SllcConfig {
            flow: FlowConfig::default(),
            center: None,
            samples: 2000,
            base_points: 200,
            radius: None,
            curves: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractionConfig {
    pub flow: FlowConfig,
    pub center: Option<SpacePoint>,
    pub starts: usize,
    pub s_grid: Vec<f64>,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        ContractionConfig {
            flow: FlowConfig::default(),
            center: None,
            starts: 200,
            s_grid: vec![0.01, 0.02, 0.04],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Set {
        points: Vec<SpacePoint>,
    },
    Sphere {
        center: SpacePoint,
        radius: f64,
        #[serde(default)]
        signed_inside: bool,
        #[serde(default)]
        net: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcavityConfig {
    pub field: FieldSpec,
    pub region: Region,
    pub kappa: f64,
    pub samples: usize,
    pub h: f64,
    pub negate: bool,
}

impl Default for ConcavityConfig {
    fn default() -> Self {
        let o = SpacePoint { r: 0.0, phi: 0.0 };
        ConcavityConfig {
            field: FieldSpec::Set { points: vec![o] },
            region: Region::annulus(o, 0.5, 1.0),
            kappa: 0.0,
            samples: 2000,
            h: 1e-3,
            negate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureConfig {
    pub entries: Vec<MatrixEntry>,
    pub samples: usize,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        CurvatureConfig {
            entries: default_matrix(),
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BgConfig {
    pub centers: Vec<SpacePoint>,
    pub cd: CdParams,
    pub radii: Vec<f64>,
}

impl Default for BgConfig {
    fn default() -> Self {
        BgConfig {
            centers: vec![SpacePoint { r: 0.0, phi: 0.0 }],
            cd: CdParams { k: 0.0, n: 2.0 },
            radii: vec![0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityPair {
    pub nu0: Density1D,
    pub nu1: Density1D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cd1dConfig {
    pub cd: CdParams,
    /// Explicit pairs, checked before the random ones.
    pub pairs: Vec<DensityPair>,
    pub random_pairs: usize,
    pub cells: usize,
    pub t_grid: Vec<f64>,
    /// Defaults to `[N, N + 1, 2N]`.
    pub nprime_grid: Option<Vec<f64>>,
}

impl Default for Cd1dConfig {
    fn default() -> Self {
        Cd1dConfig {
            cd: CdParams { k: 0.0, n: 2.0 },
            pairs: Vec::new(),
            random_pairs: 20,
            cells: 6,
            t_grid: vec![0.25, 0.5, 0.75],
            nprime_grid: None,
        }
    }
}

impl Cd1dConfig {
    fn nprimes(&self) -> Vec<f64> {
        self.nprime_grid
            .clone()
            .unwrap_or_else(|| vec![self.cd.n, self.cd.n + 1.0, 2.0 * self.cd.n])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `x ↦ scale·x` about the origin, wrapped onto the whole cone.
    Identity {
        #[serde(default = "one")]
        scale: f64,
    },
    Polar {
        radial_scale: f64,
        angular_scale: f64,
        #[serde(default)]
        phase: f64,
    },
    Constant {
        value: SpacePoint,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub map: MapSpec,
    pub eps: Vec<f64>,
    pub nu: NuSpec,
    pub quadrature: EnergyQuadrature,
    /// Polar grid `[n_r, n_φ]` used for the Lipschitz estimate.
    pub grid: [usize; 2],
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            map: MapSpec::Identity { scale: 1.0 },
            eps: vec![0.1, 0.05, 0.02, 0.01],
            nu: NuSpec::default(),
            quadrature: EnergyQuadrature::default(),
            grid: [33, 64],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpec {
    /// Circle of radius `rho` about the center (a pole).
    Circle {
        rho: f64,
        samples: usize,
    },
    Points {
        points: Vec<SpacePoint>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FillConfig {
    pub flow: FlowConfig,
    pub center: Option<SpacePoint>,
    #[serde(rename = "loop")]
    pub loop_spec: LoopSpec,
    pub rings: usize,
    pub eps: f64,
    pub nu: NuSpec,
    pub quadrature: EnergyQuadrature,
    pub certificate_samples: usize,
}

impl Default for FillConfig {
    fn default() -> Self {
        FillConfig {
            flow: FlowConfig::default(),
            center: None,
            loop_spec: LoopSpec::Circle {
                rho: 0.03,
                samples: 48,
            },
            rings: 21,
            eps: 0.01,
            nu: NuSpec::default(),
            quadrature: EnergyQuadrature::default(),
            certificate_samples: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    pub cd: CdParams,
    pub n: u32,
    pub hausdorff: f64,
    #[serde(rename = "R_ladder")]
    pub r_ladder: Vec<f64>,
    pub eps_ladder: Vec<f64>,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            cd: CdParams { k: -1.0, n: 2.0 },
            n: 2,
            hausdorff: 1.0,
            r_ladder: vec![2.0, 5.0, 10.0, 20.0, 40.0],
            eps_ladder: vec![0.5, 0.1, 0.01, 1e-4, 1e-6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Sllc(SllcConfig),
    Contraction(ContractionConfig),
    Concavity(ConcavityConfig),
    Curvature(CurvatureConfig),
    Bg(BgConfig),
    Cd1d(Cd1dConfig),
    Energy(EnergyConfig),
    Fill(FillConfig),
    Bound(BoundConfig),
}

/// A parsed and checked configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: Option<u64>,
    pub space: Space,
    pub params: Params,
    pub tolerance: f64,
    pub out_dir: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Schema and invariant check without running anything. Empty on success.
pub fn validate(text: &str) -> Vec<Diagnostic> {
    match parse_config(text) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| vec![Diagnostic::new("$", format!("invalid JSON: {e}"))])?;
    parse_value(&v)
}

const TOP_LEVEL: [&str; 7] = [
    "schema_version",
    "experiment",
    "seed",
    "space",
    "params",
    "tolerance",
    "output",
];

pub fn parse_value(v: &Value) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    let Some(obj) = v.as_object() else {
        return Err(vec![Diagnostic::new("$", "config must be a JSON object")]);
    };
    let mut diags = Vec::new();
    for k in obj.keys() {
        if !TOP_LEVEL.contains(&k.as_str()) {
            diags.push(Diagnostic::new(k.as_str(), "unknown field"));
        }
    }
    match obj.get("schema_version") {
        None => diags.push(Diagnostic::new("schema_version", "missing required field")),
        Some(s) if s.as_u64() != Some(SCHEMA_VERSION as u64) => diags.push(Diagnostic::new(
            "schema_version",
            format!("unsupported version {s}, expected {SCHEMA_VERSION}"),
        )),
        _ => {}
    }
    let kind = match obj.get("experiment") {
        None => {
            diags.push(Diagnostic::new("experiment", "missing required field"));
            None
        }
        Some(e) => {
            let k = e.as_str().and_then(ExperimentKind::from_name);
            if k.is_none() {
                let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                diags.push(Diagnostic::new(
                    "experiment",
                    format!(
                        "unknown experiment {e}, expected one of {}",
                        names.join(", ")
                    ),
                ));
            }
            k
        }
    };
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(s) => {
            let r = s.as_u64();
            if r.is_none() {
                diags.push(Diagnostic::new(
                    "seed",
                    format!("must be an unsigned 64-bit integer, got {s}"),
                ));
            }
            r
        }
    };
    let tolerance = match obj.get("tolerance") {
        None | Some(Value::Null) => None,
        Some(t) => match t.as_f64() {
            Some(x) if x > 0.0 && x.is_finite() => Some(x),
            _ => {
                diags.push(Diagnostic::new(
                    "tolerance",
                    format!("must be a positive number, got {t}"),
                ));
                None
            }
        },
    };
    let out_dir = match obj.get("output") {
        None | Some(Value::Null) => None,
        Some(o) => match o.get("dir").and_then(Value::as_str) {
            Some(d) if o.as_object().is_some_and(|m| m.len() == 1) => Some(PathBuf::from(d)),
            _ => {
                diags.push(Diagnostic::new("output", "expected {\"dir\": \"<path>\"}"));
                None
            }
        },
    };
    let Some(kind) = kind else {
        return Err(diags);
    };
    if kind.needs_seed() && seed.is_none() && !obj.get("seed").is_some_and(|s| !s.is_null()) {
        diags.push(Diagnostic::new(
            "seed",
            format!("missing required field: {kind} draws random samples"),
        ));
    }
    let space = match obj.get("space") {
        None | Some(Value::Null) => Some(kind.default_space()),
        Some(s) => match serde_json::from_value::<Space>(s.clone()) {
            Ok(sp) => Some(sp),
            Err(e) => {
                diags.push(Diagnostic::new("space", e.to_string()));
                None
            }
        },
    };
    let raw = obj
        .get("params")
        .cloned()
        .unwrap_or(Value::Object(Map::new()));
    let params = match parse_params(kind, raw) {
        Ok(p) => Some(p),
        Err(e) => {
            let field = match e.path().to_string().as_str() {
                "." => "params".to_string(),
                path => format!("params.{path}"),
            };
            diags.push(Diagnostic::new(field, e.inner().to_string()));
            None
        }
    };
    if let (Some(space), Some(params)) = (&space, &params) {
        diags.extend(check_params(space, params));
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(ExperimentConfig {
        kind,
        seed,
        space: space.expect("checked"),
        params: params.expect("checked"),
        tolerance: tolerance.unwrap_or(kind.default_tolerance()),
        out_dir,
    })
}

type PathError = serde_path_to_error::Error<serde_json::Error>;

// Deserialization errors keep the path of the offending field.
fn fv<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, PathError> {
    serde_path_to_error::deserialize(v)
}

fn parse_params(kind: ExperimentKind, v: Value) -> Result<Params, PathError> {
    Ok(match kind {
        ExperimentKind::Sllc => Params::Sllc(fv(v)?),
        ExperimentKind::Contraction => Params::Contraction(fv(v)?),
        ExperimentKind::Concavity => Params::Concavity(fv(v)?),
        ExperimentKind::Curvature => Params::Curvature(fv(v)?),
        ExperimentKind::Bg => Params::Bg(fv(v)?),
        ExperimentKind::Cd1d => Params::Cd1d(fv(v)?),
        ExperimentKind::Energy => Params::Energy(fv(v)?),
        ExperimentKind::Fill => Params::Fill(fv(v)?),
        ExperimentKind::Bound => Params::Bound(fv(v)?),
    })
}

fn flow_diags(prefix: &str, f: &FlowConfig) -> Vec<Diagnostic> {
    match f.params().validate() {
        Ok(()) => Vec::new(),
        Err(e) => {
            let msg = e.to_string();
            // messages start with the offending field name
            let field = [
                "eps",
                "delta0",
                "R",
                "lambda",
                "step_tol",
                "min_step",
                "scan_resolution",
            ]
            .into_iter()
            .find(|n| msg.contains(&format!("{n} ")) || msg.contains(&format!("{n} =")))
            .unwrap_or("");
            let path = if field.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}.{field}")
            };
            vec![Diagnostic::new(path, msg)]
        }
    }
}

fn point_diag(space: &Space, field: &str, p: &Option<SpacePoint>) -> Option<Diagnostic> {
    p.filter(|p| !space.contains(p)).map(|p| {
        Diagnostic::new(
            field,
            format!("point ({}, {}) is not in the space", p.r, p.phi),
        )
    })
}

fn check_params(space: &Space, params: &Params) -> Vec<Diagnostic> {
    let mut d = Vec::new();
    let mut need = |ok: bool, field: &str, msg: &str| {
        if !ok {
            d.push(Diagnostic::new(field, msg));
        }
    };
    match params {
        Params::Sllc(c) => {
            need(c.samples >= 1, "params.samples", "must be at least 1");
            need(
                c.base_points >= 1,
                "params.base_points",
                "must be at least 1",
            );
            need(
                c.radius.is_none_or(|r| r >= 0.0),
                "params.radius",
                "must be nonnegative",
            );
            d.extend(flow_diags("params.flow", &c.flow));
            d.extend(point_diag(space, "params.center", &c.center));
        }
        Params::Contraction(c) => {
            need(c.starts >= 2, "params.starts", "must be at least 2");
            need(
                !c.s_grid.is_empty() && c.s_grid.iter().all(|&s| s >= 0.0 && s.is_finite()),
                "params.s_grid",
                "must be a nonempty list of times >= 0",
            );
            d.extend(flow_diags("params.flow", &c.flow));
            d.extend(point_diag(space, "params.center", &c.center));
        }
        Params::Concavity(c) => {
            need(c.samples >= 1, "params.samples", "must be at least 1");
            need(c.h > 0.0 && c.h.is_finite(), "params.h", "must be positive");
            need(c.kappa.is_finite(), "params.kappa", "must be finite");
            if let Err(e) = c.region.validate(space) {
                d.push(Diagnostic::new("params.region", e.to_string()));
            }
            if let Err(e) = build_field(space, &c.field) {
                d.push(Diagnostic::new("params.field", e));
            }
        }
        Params::Curvature(c) => {
            need(c.samples >= 1, "params.samples", "must be at least 1");
            need(!c.entries.is_empty(), "params.entries", "must not be empty");
        }
        Params::Bg(c) => {
            need(
                c.cd.n > 1.0 && c.cd.k.is_finite(),
                "params.cd",
                "need finite K and N > 1",
            );
            need(
                c.radii.len() >= 2 && c.radii[0] > 0.0 && c.radii.windows(2).all(|w| w[1] > w[0]),
                "params.radii",
                "need at least two increasing positive radii",
            );
            need(!c.centers.is_empty(), "params.centers", "must not be empty");
            for (i, p) in c.centers.iter().enumerate() {
                d.extend(point_diag(
                    space,
                    &format!("params.centers[{i}]"),
                    &Some(*p),
                ));
            }
        }
        Params::Cd1d(c) => {
            need(
                c.cd.n >= 1.0 && c.cd.k.is_finite(),
                "params.cd",
                "need finite K and N >= 1",
            );
            need(c.cells >= 1, "params.cells", "must be at least 1");
            need(
                c.random_pairs + c.pairs.len() >= 1,
                "params.random_pairs",
                "need at least one density pair",
            );
            need(
                !c.t_grid.is_empty() && c.t_grid.iter().all(|&t| (0.0..=1.0).contains(&t)),
                "params.t_grid",
                "need times in [0, 1]",
            );
            need(
                !c.nprimes().is_empty() && c.nprimes().iter().all(|&n| n >= c.cd.n),
                "params.nprime_grid",
                "every N' must be at least N",
            );
        }
        Params::Energy(c) => {
            need(
                !c.eps.is_empty() && c.eps.iter().all(|&e| e > 0.0 && e < 0.5),
                "params.eps",
                "need values in (0, 1/2)",
            );
            need(
                c.grid[0] >= 2 && c.grid[1] >= 3,
                "params.grid",
                "need at least 2 radii and 3 angles",
            );
            if let Err(e) = c.nu.validate() {
                d.push(Diagnostic::new("params.nu", e.to_string()));
            }
            if let MapSpec::Constant { value } = &c.map {
                d.extend(point_diag(space, "params.map.value", &Some(*value)));
            }
        }
        Params::Fill(c) => {
            need(c.rings >= 3, "params.rings", "must be at least 3");
            need(
                c.eps > 0.0 && c.eps < 0.5,
                "params.eps",
                "must lie in (0, 1/2)",
            );
            need(
                c.certificate_samples >= 1,
                "params.certificate_samples",
                "must be at least 1",
            );
            match &c.loop_spec {
                LoopSpec::Circle { rho, samples } => {
                    need(
                        *rho >= 0.0 && rho.is_finite(),
                        "params.loop.rho",
                        "must be nonnegative",
                    );
                    need(*samples >= 3, "params.loop.samples", "must be at least 3");
                }
                LoopSpec::Points { points } => {
                    need(
                        points.len() >= 3,
                        "params.loop.points",
                        "need at least three points",
                    );
                }
            }
            if let Err(e) = c.nu.validate() {
                d.push(Diagnostic::new("params.nu", e.to_string()));
            }
            d.extend(flow_diags("params.flow", &c.flow));
            d.extend(point_diag(space, "params.center", &c.center));
        }
        Params::Bound(c) => {
            need(
                c.cd.k < 0.0 && c.cd.n > 1.0,
                "params.cd",
                "need K < 0 and N > 1",
            );
            need(c.n >= 1, "params.n", "must be at least 1");
            need(
                c.hausdorff >= 0.0,
                "params.hausdorff",
                "must be nonnegative",
            );
            need(
                !c.r_ladder.is_empty() && c.r_ladder.len() == c.eps_ladder.len(),
                "params.R_ladder",
                "R and eps ladders must be nonempty and of equal length",
            );
        }
    }
    d
}

fn build_field(space: &Space, spec: &FieldSpec) -> Result<ScalarField, String> {
    match spec {
        FieldSpec::Set { points } => ScalarField::dist_from_set(*space, points.clone()),
        FieldSpec::Sphere {
            center,
            radius,
            signed_inside,
            net: None,
        } => ScalarField::dist_from_sphere(*space, *center, *radius, *signed_inside),
        FieldSpec::Sphere {
            center,
            radius,
            signed_inside,
            net: Some(n),
        } => ScalarField::dist_from_sphere_net(*space, *center, *radius, *signed_inside, *n),
    }
    .map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// One named verdict of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

fn check(name: impl Into<String>, pass: bool) -> Check {
    Check {
        name: name.into(),
        pass,
    }
}

/// Everything a run produces before it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub checks: Vec<Check>,
    pub report: Value,
    pub csv: String,
}

impl RunOutput {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(Vec<Diagnostic>),
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(d) => {
                for x in d {
                    writeln!(f, "{x}")?;
                }
                Ok(())
            }
            RunError::Io(m) => write!(f, "{m}"),
        }
    }
}

fn compute_err(field: &str, e: impl fmt::Display) -> RunError {
    RunError::Config(vec![Diagnostic::new(field, e.to_string())])
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn summary_csv(rows: &[(&str, f64)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "value"])
        .expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k.to_string(), num(*v)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Runs the experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let seed = cfg.seed.unwrap_or(0);
    let tol = cfg.tolerance;
    let space = cfg.space;
    let origin = space.origin();
    match &cfg.params {
        Params::Sllc(c) => {
            let params = c.flow.params();
            let p = c.center.unwrap_or(origin);
            let opts = SllcOptions {
                radius: c.radius,
                base_points: c.base_points,
                tol,
            };
            let (cert, witness) =
                match build_sllc_certificate_with(space, p, &params, c.samples, seed, &opts) {
                    Ok(cert) => (cert, None),
                    Err(FlowError::CertificateFailed {
                        certificate,
                        witness,
                    }) => (*certificate, Some(*witness)),
                    Err(e) => return Err(compute_err("params", e)),
                };
            let hom = FlowHomotopy::new(space, p, params).map_err(|e| compute_err("params", e))?;
            let r = cert.r;
            let th = space.theta_total();
            let starts: Vec<SpacePoint> = (0..c.curves)
                .filter_map(|k| {
                    let rho = 0.999 * r * (k + 1) as f64 / c.curves as f64;
                    if space.is_origin(&p) {
                        space.point(rho, th * k as f64 / c.curves as f64).ok()
                    } else {
                        space
                            .exp(&p, std::f64::consts::TAU * k as f64 / c.curves as f64, rho)
                            .ok()
                    }
                })
                .collect();
            let curves = starts
                .iter()
                .map(|x| hom.curve(x))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| compute_err("params", e))?;
            Ok(RunOutput {
                checks: vec![
                    check("endpoint", cert.endpoint_pass),
                    check("containment", cert.containment_pass),
                    check("lipschitz", cert.lipschitz_pass),
                ],
                report: json!({ "certificate": cert, "witness": witness }),
                csv: curves_to_csv(&curves),
            })
        }
        Params::Contraction(c) => {
            let params = c.flow.params();
            let p = c.center.unwrap_or(origin);
            let hom = FlowHomotopy::new(space, p, params).map_err(|e| compute_err("params", e))?;
            let ball = Region::ball(p, params.delta0 * params.radius * (1.0 - 1e-9));
            let mut rng = rng::stream(seed, 0);
            let starts = (0..c.starts)
                .map(|_| ball.sample(&space, &mut rng))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| compute_err("params.center", "could not sample the ball"))?;
            let pairs: Vec<_> = (0..starts.len())
                .map(|i| (starts[i], starts[(i + 1) % starts.len()]))
                .collect();
            let contraction = check_contraction_pairs(&hom.field, &pairs, &c.s_grid, &params, tol)
                .map_err(|e| compute_err("params", e))?;
            let arrival = check_arrival(&hom.field, &p, &starts, &params, tol)
                .map_err(|e| compute_err("params", e))?;
            let csv = summary_csv(&[
                ("max_ratio_to_bound", contraction.max_ratio_to_bound),
                ("max_arrival_excess", arrival.max_arrival_excess),
                ("max_arrival_time", arrival.max_arrival_time),
                ("max_decay_excess", arrival.max_decay_excess),
            ]);
            Ok(RunOutput {
                checks: vec![
                    check("contraction", contraction.pass),
                    check("arrival", arrival.all_arrived && arrival.pass),
                    check("freeze", arrival.freeze_exact),
                ],
                report: json!({ "contraction": contraction, "arrival": arrival }),
                csv,
            })
        }
        Params::Concavity(c) => {
            let mut f =
                build_field(&space, &c.field).map_err(|e| compute_err("params.field", e))?;
            if c.negate {
                f = f.negated();
            }
            let r = verify_concavity(&f, &c.region, Kappa(c.kappa), c.samples, c.h, tol, seed)
                .map_err(|e| compute_err("params", e))?;
            let csv = summary_csv(&[
                ("worst_violation", r.worst_violation),
                ("tolerance", r.tolerance),
                ("h", r.h),
            ]);
            Ok(RunOutput {
                checks: vec![check("concavity", r.pass)],
                report: to_value(&r),
                csv,
            })
        }
        Params::Curvature(c) => {
            let rows: Vec<MatrixRow> = curvature_matrix(&c.entries, c.samples, seed)
                .map_err(|e| compute_err("params.entries", e))?;
            let mut checks = Vec::new();
            for r in &rows {
                let label = format!("{:?} at kappa {}", r.space, r.kappa.0);
                checks.push(check(
                    format!("triangle {label}"),
                    r.triangle.worst_margin >= -tol,
                ));
                checks.push(check(
                    format!("quadruple {label}"),
                    r.quadruple.worst_margin >= -tol,
                ));
            }
            Ok(RunOutput {
                checks,
                report: json!({ "rows": rows }),
                csv: matrix_csv(&rows),
            })
        }
        Params::Bg(c) => {
            let mut reports = Vec::new();
            for (i, x) in c.centers.iter().enumerate() {
                reports.push(
                    bg_check(&space, x, c.cd, &c.radii, tol)
                        .map_err(|e| compute_err(&format!("params.centers[{i}]"), e))?,
                );
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["center", "r", "volume", "ratio"])
                .expect("in-memory write");
            for (i, r) in reports.iter().enumerate() {
                for k in 0..r.radii.len() {
                    w.write_record([
                        i.to_string(),
                        num(r.radii[k]),
                        num(r.volumes[k]),
                        num(r.ratios[k]),
                    ])
                    .expect("in-memory write");
                }
            }
            let csv =
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8");
            let checks = reports
                .iter()
                .enumerate()
                .map(|(i, r)| check(format!("center {i}"), r.pass))
                .collect();
            Ok(RunOutput {
                checks,
                report: json!({ "centers": reports }),
                csv,
            })
        }
        Params::Cd1d(c) => {
            let mut pairs: Vec<(Density1D, Density1D)> = c
                .pairs
                .iter()
                .map(|p| (p.nu0.clone(), p.nu1.clone()))
                .collect();
            for k in 0..c.random_pairs {
                let mut rng = rng::stream(seed, k as u64);
                let a = Density1D::random(&mut rng, c.cells);
                let b = Density1D::random(&mut rng, c.cells);
                pairs.push((a, b));
            }
            let nprimes = c.nprimes();
            let mut reports = Vec::new();
            for (a, b) in &pairs {
                reports.push(
                    cd_star_check(a, b, c.cd, &c.t_grid, &nprimes)
                        .map_err(|e| compute_err("params", e))?,
                );
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["pair", "t", "nprime", "lhs", "rhs", "margin"])
                .expect("in-memory write");
            for (i, r) in reports.iter().enumerate() {
                for row in &r.rows {
                    w.write_record([
                        i.to_string(),
                        num(row.t),
                        num(row.nprime),
                        num(row.lhs),
                        num(row.rhs),
                        num(row.margin),
                    ])
                    .expect("in-memory write");
                }
            }
            let csv =
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8");
            let checks = reports
                .iter()
                .enumerate()
                .map(|(i, r)| check(format!("pair {i}"), r.min_margin >= -tol))
                .collect();
            let rows: Vec<Value> = pairs
                .iter()
                .zip(&reports)
                .map(|((a, b), r)| json!({ "nu0": a, "nu1": b, "report": r }))
                .collect();
            Ok(RunOutput {
                checks,
                report: json!({ "pairs": rows }),
                csv,
            })
        }
        Params::Energy(c) => {
            let source: Box<dyn DiskSource> = match &c.map {
                MapSpec::Identity { scale } => Box::new(PolarMap::scaled_identity(space, *scale)),
                MapSpec::Polar {
                    radial_scale,
                    angular_scale,
                    phase,
                } => Box::new(PolarMap {
                    space,
                    radial_scale: *radial_scale,
                    angular_scale: *angular_scale,
                    phase: *phase,
                }),
                MapSpec::Constant { value } => Box::new(ConstantMap {
                    space,
                    value: *value,
                }),
            };
            let sampled = DiskMap::sample(source.as_ref(), c.grid[0], c.grid[1])
                .map_err(|e| compute_err("params.map", e))?;
            let lip = sampled.lipschitz();
            let mut rows = Vec::new();
            let mut checks = Vec::new();
            for &e in &c.eps {
                let energy = averaged_energy(source.as_ref(), e, &c.nu, &c.quadrature)
                    .map_err(|e| compute_err("params", e))?;
                let bound = 2.0 * PI * lip * lip;
                checks.push(check(
                    format!("eps {e}"),
                    energy.is_finite() && energy <= bound * (1.0 + tol),
                ));
                rows.push((e, energy, bound));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["eps", "energy", "bound"])
                .expect("in-memory write");
            for (e, en, b) in &rows {
                w.write_record([num(*e), num(*en), num(*b)])
                    .expect("in-memory write");
            }
            let csv =
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8");
            let ladder: Vec<Value> = rows
                .iter()
                .map(|(e, en, b)| json!({ "eps": e, "energy": en, "rigorous_bound": b }))
                .collect();
            Ok(RunOutput {
                checks,
                report: json!({ "lipschitz": lip, "ladder": ladder }),
                csv,
            })
        }
        Params::Fill(c) => {
            let params = c.flow.params();
            let p = c.center.unwrap_or(origin);
            let opts = SllcOptions {
                tol: SllcOptions::default().tol,
                ..SllcOptions::default()
            };
            let cert = match build_sllc_certificate_with(
                space,
                p,
                &params,
                c.certificate_samples,
                seed,
                &opts,
            ) {
                Ok(cert) => cert,
                Err(FlowError::CertificateFailed {
                    certificate,
                    witness,
                }) => {
                    return Ok(RunOutput {
                        checks: vec![check("certificate", false)],
                        report: json!({ "certificate": certificate, "witness": witness }),
                        csv: String::new(),
                    });
                }
                Err(e) => return Err(compute_err("params", e)),
            };
            let gamma = match &c.loop_spec {
                LoopSpec::Circle { rho, samples } => {
                    if space.is_origin(&p) {
                        LoopMap::circle_about_origin(space, *rho, *samples)
                    } else {
                        let pts = (0..*samples)
                            .map(|k| {
                                space.exp(
                                    &p,
                                    std::f64::consts::TAU * k as f64 / *samples as f64,
                                    *rho,
                                )
                            })
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|e| compute_err("params.loop", e))?;
                        LoopMap::new(space, pts)
                    }
                }
                LoopSpec::Points { points } => LoopMap::new(space, points.clone()),
            }
            .map_err(|e| compute_err("params.loop", e))?;
            let hom = FlowHomotopy::new(space, p, params).map_err(|e| compute_err("params", e))?;
            let fill = fill_loop(&gamma, &hom, &cert, c.rings)
                .map_err(|e| compute_err("params.loop", e))?;
            let energy = energy_certificate(&fill.map, c.eps, &c.nu, &c.quadrature, tol)
                .map_err(|e| compute_err("params", e))?;
            let csv = fill.map.to_csv();
            Ok(RunOutput {
                checks: vec![
                    check("certificate", cert.pass),
                    check("boundary", fill.boundary_error == 0.0),
                    check("lipschitz_bound", fill.within_bound),
                    check("energy_bound", energy.pass),
                ],
                report: json!({ "certificate": cert, "fill": fill, "energy": energy }),
                csv,
            })
        }
        Params::Bound(c) => {
            let t = simplicial_volume_pipeline(c.cd, c.n, c.hausdorff, &c.r_ladder, &c.eps_ladder)
                .map_err(|e| compute_err("params", e))?;
            Ok(RunOutput {
                checks: vec![
                    check("monotone", t.monotone),
                    check("converged", t.final_error <= tol),
                ],
                csv: t.to_csv(),
                report: to_value(&t),
            })
        }
    }
}

/// Result of [`run`]: verdicts and the written files.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub pass: bool,
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
}

/// Serialized report, byte-stable for a fixed config.
pub fn report_json(cfg: &ExperimentConfig, out: &RunOutput) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.kind,
        "seed": cfg.seed,
        "space": cfg.space,
        "tolerance": cfg.tolerance,
        "params": cfg.params,
        "pass": out.pass(),
        "checks": out.checks,
        "report": out.report,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

/// Runs and writes `<out_dir>/<experiment>.{json,csv}`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Outcome, RunError> {
    let out = execute(cfg)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    let json_path = out_dir.join(format!("{}.json", cfg.kind));
    let csv_path = out_dir.join(format!("{}.csv", cfg.kind));
    std::fs::write(&json_path, report_json(cfg, &out))
        .map_err(|e| RunError::Io(format!("{}: {e}", json_path.display())))?;
    std::fs::write(&csv_path, &out.csv)
        .map_err(|e| RunError::Io(format!("{}: {e}", csv_path.display())))?;
    Ok(Outcome {
        pass: out.pass(),
        checks: out.checks,
        json_path,
        csv_path,
    })
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

const AFTER_HELP: &str = "\
CSV columns:
  sllc         curve,t,r,phi,f,grad_norm  (sample gradient curves of the homotopy)
  contraction  quantity,value
  concavity    quantity,value
  curvature    space,kappa,triangle_margin,quadruple_margin,triangle_pass,quadruple_pass,expected_pass,agree
  bg           center,r,volume,ratio
  cd1d         pair,t,nprime,lhs,rhs,margin
  energy       eps,energy,bound
  fill         ring,index,radius,angle,r,phi
  bound        R,eps,c,bound,limit

Exit status: 0 all checks pass, 1 some check failed (report written), 2 configuration error.
The output directory is --out, else $ALEXANDROV_OUT_DIR, else output.dir of the config, else ./out.";

#[derive(Debug, Parser)]
#[command(name = "alexandrov", version, about = "Seeded geometry experiments with JSON reports and CSV data", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config; defaults are used for everything it leaves out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the experiment tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the Lipschitz contraction certificate of a ball.
    Sllc(RunArgs),
    /// Check the e^{λs} contraction estimate and arrival at the center.
    Contraction(RunArgs),
    /// Verify the concavity modulus of a distance-type field.
    Concavity(RunArgs),
    /// Triangle and quadruple comparison over a matrix of spaces.
    Curvature(RunArgs),
    /// Bishop-Gromov ratio monotonicity.
    Bg(RunArgs),
    /// Reduced curvature-dimension inequality for densities on the line.
    Cd1d(RunArgs),
    /// Averaged approximate energy over an ε ladder.
    Energy(RunArgs),
    /// Fill a loop through the contraction homotopy and bound its energy.
    Fill(RunArgs),
    /// Simplicial volume bound table.
    Bound(RunArgs),
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

impl Command {
    fn kind(&self) -> Option<(ExperimentKind, &RunArgs)> {
        Some(match self {
            Command::Sllc(a) => (ExperimentKind::Sllc, a),
            Command::Contraction(a) => (ExperimentKind::Contraction, a),
            Command::Concavity(a) => (ExperimentKind::Concavity, a),
            Command::Curvature(a) => (ExperimentKind::Curvature, a),
            Command::Bg(a) => (ExperimentKind::Bg, a),
            Command::Cd1d(a) => (ExperimentKind::Cd1d, a),
            Command::Energy(a) => (ExperimentKind::Energy, a),
            Command::Fill(a) => (ExperimentKind::Fill, a),
            Command::Bound(a) => (ExperimentKind::Bound, a),
            Command::Validate { .. } => return None,
        })
    }
}

/// Config value for a subcommand: the file (if any) with flag overrides.
fn assemble(kind: ExperimentKind, args: &RunArgs) -> Result<Value, Vec<Diagnostic>> {
    let mut v = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                vec![Diagnostic::new(
                    "--config",
                    format!("{}: {e}", path.display()),
                )]
            })?;
            serde_json::from_str::<Value>(&text)
                .map_err(|e| vec![Diagnostic::new("$", format!("invalid JSON: {e}"))])?
        }
        None => json!({ "schema_version": SCHEMA_VERSION, "experiment": kind.name() }),
    };
    let Some(obj) = v.as_object_mut() else {
        return Err(vec![Diagnostic::new("$", "config must be a JSON object")]);
    };
    if let Some(e) = obj.get("experiment").and_then(Value::as_str) {
        if e != kind.name() {
            return Err(vec![Diagnostic::new(
                "experiment",
                format!("config is for {e:?} but the subcommand is {kind}"),
            )]);
        }
    }
    if let Some(s) = args.seed {
        obj.insert("seed".into(), json!(s));
    }
    if let Some(t) = args.tol {
        obj.insert("tolerance".into(), json!(t));
    }
    Ok(v)
}

fn out_dir(args: &RunArgs, cfg: &ExperimentConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|s| !s.is_empty())
                .map(PathBuf::from)
        })
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Parses arguments, runs and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Command::Validate { config } = &cli.command {
        let text = match std::fs::read_to_string(config) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("--config: {}: {e}", config.display());
                return 2;
            }
        };
        let diags = validate(&text);
        for d in &diags {
            println!("{d}");
        }
        return if diags.is_empty() { 0 } else { 2 };
    }
    let (kind, args) = cli.command.kind().expect("run subcommand");
    let cfg = match assemble(kind, args).and_then(|v| parse_value(&v)) {
        Ok(c) => c,
        Err(diags) => {
            for d in &diags {
                eprintln!("{d}");
            }
            return 2;
        }
    };
    let dir = out_dir(args, &cfg);
    match run(&cfg, &dir) {
        Ok(o) => {
            for c in &o.checks {
                println!("{:<6} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
            }
            println!(
                "{}: {}  ({})",
                kind,
                if o.pass { "PASS" } else { "FAIL" },
                o.json_path.display()
            );
            if o.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprint!("{e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_seed_is_named() {
        let d = validate(r#"{"schema_version": 1, "experiment": "sllc"}"#);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "seed");
    }

    #[test]
    fn zero_eps_is_named() {
        let d = validate(
            r#"{"schema_version": 1, "experiment": "sllc", "seed": 1, "params": {"flow": {"eps": 0}}}"#,
        );
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].field, "params.flow.eps");
    }

    #[test]
    fn valid_configs_have_no_diagnostics() {
        assert!(validate(r#"{"schema_version": 1, "experiment": "bound"}"#).is_empty());
        assert!(validate(r#"{"schema_version": 1, "experiment": "bg", "space": {"kind": "euclidean_cone", "theta_total": 4.0}}"#)
            .is_empty());
    }

    #[test]
    fn schema_errors() {
        let d = validate(r#"{"experiment": "nope", "extra": 1, "tolerance": -1}"#);
        let fields: Vec<_> = d.iter().map(|d| d.field.as_str()).collect();
        assert!(fields.contains(&"schema_version") && fields.contains(&"experiment"));
        assert!(fields.contains(&"extra") && fields.contains(&"tolerance"));
        let d = validate(r#"{"schema_version": 1, "experiment": "bound", "params": {"bogus": 2}}"#);
        assert_eq!(d[0].field, "params.bogus");
        assert!(!validate(r#"{"schema_version": 1, "experiment": "energy", "params": {"nu": {"kind": "uniform", "a": 0, "b": 2}}}"#).is_empty());
    }

    #[test]
    fn bound_table_runs() {
        let cfg = parse_config(r#"{"schema_version": 1, "experiment": "bound"}"#).unwrap();
        let out = execute(&cfg).unwrap();
        assert!(out.pass());
        assert!(out.csv.starts_with("R,eps,c,bound,limit\n"));
        assert_eq!(
            report_json(&cfg, &out),
            report_json(&cfg, &execute(&cfg).unwrap())
        );
    }
}
