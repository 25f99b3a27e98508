use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::ScalarField;
use crate::mesh::{DiagonalRule, Mesh, MeshFormat, Point};
use crate::model::{params_from_theta, ModelParams};
use crate::timestepping::Gauge;
use crate::wave_setup::WavetrainParams;

use super::assets;
use super::mms::mms_bathymetry;

/// Environment variable overriding `[output] dir`.
pub const OUTPUT_DIR_ENV: &str = "BOUSSINESQ_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    MmsConvergence,
    SolitaryFlat,
    ShoalingReflection,
    Cylinder,
    SubmergedBar,
    YJunction,
    DispersionTable,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::MmsConvergence,
        ScenarioKind::SolitaryFlat,
        ScenarioKind::ShoalingReflection,
        ScenarioKind::Cylinder,
        ScenarioKind::SubmergedBar,
        ScenarioKind::YJunction,
        ScenarioKind::DispersionTable,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::MmsConvergence => "mms_convergence",
            ScenarioKind::SolitaryFlat => "solitary_flat",
            ScenarioKind::ShoalingReflection => "shoaling_reflection",
            ScenarioKind::Cylinder => "cylinder",
            ScenarioKind::SubmergedBar => "submerged_bar",
            ScenarioKind::YJunction => "y_junction",
            ScenarioKind::DispersionTable => "dispersion_table",
            ScenarioKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub theta_sq: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    Rectangle {
        x_range: [f64; 2],
        y_range: [f64; 2],
        nx: usize,
        ny: usize,
        #[serde(default = "default_rule")]
        diagonal: DiagonalRule,
    },
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<MeshFormat>,
    },
    Builtin {
        name: String,
    },
}

fn default_rule() -> DiagonalRule {
    DiagonalRule::Right
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSection {
    #[serde(flatten)]
    pub source: MeshSource,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Bathymetry {
    Flat { depth: f64 },
    /// Constant `depth` for `x ≤ toe`, then a plane beach of the given slope.
    Beach { depth: f64, toe: f64, slope: f64 },
    /// Trapezoidal bar of the wave-flume experiment.
    SubmergedBar,
    /// The tilted bottom of the manufactured solution.
    Manufactured,
}

impl Bathymetry {
    pub fn field(&self) -> ScalarField {
        match *self {
            Bathymetry::Flat { depth } => ScalarField::constant(depth),
            Bathymetry::Beach { depth, toe, slope } => ScalarField::new(move |p: Point| {
                if p[0] <= toe {
                    depth
                } else {
                    depth - slope * (p[0] - toe)
                }
            }),
            Bathymetry::SubmergedBar => ScalarField::new(|p: Point| bar_depth(p[0])),
            Bathymetry::Manufactured => mms_bathymetry(),
        }
    }

    /// Depth far from the features, used to set up the incoming wave.
    pub fn reference_depth(&self) -> f64 {
        match *self {
            Bathymetry::Flat { depth } | Bathymetry::Beach { depth, .. } => depth,
            Bathymetry::SubmergedBar => 0.4,
            Bathymetry::Manufactured => 1.5,
        }
    }
}

pub fn bar_depth(x: f64) -> f64 {
    if (6.0..12.0).contains(&x) {
        -0.05 * x + 0.7
    } else if (12.0..14.0).contains(&x) {
        0.1
    } else if (14.0..=17.0).contains(&x) {
        0.1 * x - 1.3
    } else {
        0.4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// Half length of the travelling-wave channel.
    pub half_length: f64,
    pub width: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Rest,
    AnalyticSolitary {
        /// Crest position along `direction` at `t = 0`.
        crest: f64,
        #[serde(default = "default_direction")]
        direction: [f64; 2],
    },
    Petviashvili {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        speed: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<f64>,
        crest: f64,
        #[serde(default = "default_direction")]
        direction: [f64; 2],
        channel: ChannelSection,
        #[serde(default = "default_pet_tolerance")]
        tolerance: f64,
        #[serde(default = "default_pet_iterations")]
        max_iterations: usize,
    },
    Wavetrain(WavetrainParams),
    Manufactured,
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_pet_tolerance() -> f64 {
    1e-6
}
fn default_pet_iterations() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub relaxation: bool,
    #[serde(default)]
    pub relaxation_fallback: bool,
    #[serde(default = "default_tableau")]
    pub tableau: String,
    #[serde(default = "default_one")]
    pub log_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(default = "default_divergence")]
    pub divergence_threshold: f64,
}

fn default_true() -> bool {
    true
}
fn default_tableau() -> String {
    "rk4".into()
}
fn default_one() -> usize {
    1
}
fn default_divergence() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsSection {
    /// Cells per side of each mesh in the family.
    pub cells: Vec<usize>,
    /// Use `Δt = h` instead of `[time] dt`.
    #[serde(default)]
    pub dt_equals_h: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSection {
    pub depth: f64,
    pub k_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub model: ModelSection,
    pub mesh: MeshSection,
    pub bathymetry: Bathymetry,
    pub initial: InitialCondition,
    pub time: TimeSection,
    #[serde(default)]
    pub gauges: Vec<GaugeSpec>,
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mms: Option<MmsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionSection>,
}

impl ScenarioConfig {
    /// Parse a config; a `preset` in `[scenario]` supplies defaults for
    /// every key the file leaves out.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![format!("TOML syntax: {e}")]))?;
        let preset_base = preset_table(&user)?;
        let merged = match preset_base {
            Some(mut base) => {
                merge_tables(&mut base, user);
                base
            }
            None => user,
        };
        merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))
    }

    /// The `config` object of a run manifest.
    pub fn from_manifest_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("manifest JSON: {e}")]))?;
        let config = value
            .get("config")
            .cloned()
            .ok_or_else(|| Error::Config(vec!["manifest has no config object".into()]))?;
        serde_json::from_value(config).map_err(|e| Error::Config(vec![format!("manifest config: {e}")]))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_manifest_str(&text)?
        } else {
            Self::from_toml_str(&text)?
        };
        // Relative mesh files resolve against the config's directory.
        if let MeshSource::File { path: mesh_path, .. } = &mut cfg.mesh.source {
            if mesh_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *mesh_path = dir.join(&*mesh_path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<ModelParams> {
        params_from_theta(self.model.theta_sq, self.model.g)
    }

    /// `[output] dir`, unless the environment override is set.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.dir.clone(),
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match &self.mesh.source {
            MeshSource::Rectangle {
                x_range,
                y_range,
                nx,
                ny,
                diagonal,
            } => Mesh::rectangle(*x_range, *y_range, *nx, *ny, *diagonal),
            MeshSource::File { path, format } => {
                let fmt = format.unwrap_or_else(|| MeshFormat::from_path(path));
                Mesh::read(path, fmt)
            }
            MeshSource::Builtin { name } => assets::builtin_mesh(name),
        }
    }

    pub fn gauges(&self) -> Vec<Gauge> {
        self.gauges
            .iter()
            .map(|g| Gauge {
                id: g.id.clone(),
                location: [g.x, g.y],
            })
            .collect()
    }

    /// Check everything that can be checked before computing, building the
    /// mesh to place the gauges; all problems are reported together.
    pub fn validate(&self) -> Result<Arc<Mesh>> {
        let mut errs = Vec::new();
        let m = &self.model;
        if !(m.g > 0.0 && m.g.is_finite()) {
            errs.push(format!("model.g = {} must be positive", m.g));
        }
        if let Err(e) = params_from_theta(m.theta_sq, m.g.max(f64::MIN_POSITIVE)) {
            errs.push(format!("model.theta_sq: {e}"));
        }
        if !matches!(self.mesh.degree, 1 | 2) {
            errs.push(format!("mesh.degree = {} is not supported (1 or 2)", self.mesh.degree));
        }
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            errs.push(format!("time.dt = {} must be positive", t.dt));
        }
        if !(t.t_end > 0.0 && t.t_end.is_finite()) {
            errs.push(format!("time.t_end = {} must be positive", t.t_end));
        }
        if t.log_every == 0 {
            errs.push("time.log_every must be at least 1".into());
        }
        if t.snapshot_every == Some(0) {
            errs.push("time.snapshot_every must be at least 1".into());
        }
        if !(t.divergence_threshold > 0.0) {
            errs.push(format!("time.divergence_threshold = {} must be positive", t.divergence_threshold));
        }
        if crate::timestepping::ButcherTableau::by_name(&t.tableau).is_err() {
            errs.push(format!("time.tableau = {:?} is unknown (rk4, ssp_rk3)", t.tableau));
        }
        match self.bathymetry {
            Bathymetry::Flat { depth } | Bathymetry::Beach { depth, .. } if !(depth > 0.0) => {
                errs.push(format!("bathymetry.depth = {depth} must be positive"));
            }
            _ => {}
        }
        self.validate_initial(&mut errs);
        if self.scenario.kind == ScenarioKind::MmsConvergence {
            match &self.mms {
                None => errs.push("[mms] section is required for mms_convergence".into()),
                Some(s) if s.cells.is_empty() => errs.push("mms.cells must list at least one mesh".into()),
                Some(s) if s.cells.contains(&0) => errs.push("mms.cells entries must be positive".into()),
                _ => {}
            }
        }
        if self.scenario.kind == ScenarioKind::DispersionTable {
            match &self.dispersion {
                None => errs.push("[dispersion] section is required for dispersion_table".into()),
                Some(d) => {
                    if !(d.depth > 0.0) {
                        errs.push(format!("dispersion.depth = {} must be positive", d.depth));
                    }
                    if !(d.k_max > 0.0) {
                        errs.push(format!("dispersion.k_max = {} must be positive", d.k_max));
                    }
                    if d.samples < 2 {
                        errs.push("dispersion.samples must be at least 2".into());
                    }
                }
            }
        }
        let mut ids = std::collections::HashSet::new();
        for g in &self.gauges {
            if !ids.insert(g.id.as_str()) {
                errs.push(format!("gauge id {:?} is repeated", g.id));
            }
            if g.id.is_empty() || g.id.contains(['/', '\\', ',']) {
                errs.push(format!("gauge id {:?} must be non-empty without '/', '\\' or ','", g.id));
            }
        }
        let mesh = match self.build_mesh() {
            Ok(mesh) => {
                for g in &self.gauges {
                    if mesh.locate_point([g.x, g.y]).is_none() {
                        errs.push(format!("gauge {:?} at ({}, {}) lies outside the mesh", g.id, g.x, g.y));
                    }
                }
                let depth = self.bathymetry.field();
                if let Some(p) = mesh.vertices().iter().find(|&&p| !(depth.value(p) > 0.0)) {
                    errs.push(format!("bathymetry is not positive at vertex ({}, {})", p[0], p[1]));
                }
                Some(mesh)
            }
            Err(e) => {
                errs.push(format!("mesh: {e}"));
                None
            }
        };
        if errs.is_empty() {
            Ok(Arc::new(mesh.expect("mesh built when no errors")))
        } else {
            Err(Error::Config(errs))
        }
    }

    fn validate_initial(&self, errs: &mut Vec<String>) {
        let nonzero = |d: [f64; 2]| d[0].hypot(d[1]) > 0.0;
        match &self.initial {
            InitialCondition::AnalyticSolitary { direction, .. } => {
                if !matches!(self.bathymetry, Bathymetry::Flat { .. }) {
                    errs.push("initial.kind = analytic_solitary needs a flat bathymetry".into());
                }
                let ts = self.model.theta_sq;
                if !(ts > 7.0 / 9.0 && ts < 1.0) {
                    errs.push(format!("analytic solitary waves need 7/9 < theta_sq < 1, got {ts}"));
                }
                if !nonzero(*direction) {
                    errs.push("initial.direction must be nonzero".into());
                }
            }
            InitialCondition::Petviashvili {
                speed,
                amplitude,
                direction,
                channel,
                tolerance,
                max_iterations,
                ..
            } => {
                match (speed, amplitude) {
                    (Some(_), Some(_)) | (None, None) => {
                        errs.push("initial: give exactly one of speed or amplitude".into());
                    }
                    (Some(c), None) => {
                        let crit = (self.model.g * self.bathymetry.reference_depth()).sqrt();
                        if !(*c > crit) {
                            errs.push(format!("initial.speed = {c} must exceed sqrt(g D0) = {crit}"));
                        }
                    }
                    (None, Some(a)) if !(*a > 0.0) => errs.push(format!("initial.amplitude = {a} must be positive")),
                    _ => {}
                }
                if !nonzero(*direction) {
                    errs.push("initial.direction must be nonzero".into());
                }
                if !(channel.half_length > 0.0 && channel.width > 0.0 && channel.h > 0.0) {
                    errs.push("initial.channel dimensions must be positive".into());
                }
                if let Some(d) = channel.degree {
                    if !matches!(d, 1 | 2) {
                        errs.push(format!("initial.channel.degree = {d} is not supported (1 or 2)"));
                    }
                }
                if !(*tolerance > 0.0) {
                    errs.push(format!("initial.tolerance = {tolerance} must be positive"));
                }
                if *max_iterations == 0 {
                    errs.push("initial.max_iterations must be at least 1".into());
                }
            }
            InitialCondition::Wavetrain(w) => {
                if !(w.depth > 0.0) {
                    errs.push(format!("initial.depth = {} must be positive", w.depth));
                }
                if !(w.amplitude.is_finite() && w.wavenumber.is_finite()) {
                    errs.push("initial.amplitude and wavenumber must be finite".into());
                }
            }
            InitialCondition::Manufactured => {
                if self.bathymetry != Bathymetry::Manufactured {
                    errs.push("initial.kind = manufactured needs bathymetry.kind = manufactured".into());
                }
            }
            InitialCondition::Rest => {}
        }
    }
}

fn preset_table(user: &toml::Table) -> Result<Option<toml::Table>> {
    let Some(section) = user.get("scenario").and_then(|s| s.as_table()) else {
        return Ok(None);
    };
    let Some(preset) = section.get("preset") else {
        return Ok(None);
    };
    let kind: ScenarioKind = section
        .get("kind")
        .cloned()
        .ok_or_else(|| Error::Config(vec!["scenario.kind is required with a preset".into()]))?
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("scenario.kind: {}", e.message())]))?;
    let preset: Preset = preset
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("scenario.preset: {}", e.message())]))?;
    let cfg = super::presets::preset(kind, preset)?;
    Ok(Some(toml::Table::try_from(&cfg).expect("config serializes")))
}

/// Deep merge where `over` wins; tables merge key by key, everything else
/// (including arrays) is replaced.  A tagged table whose tag changes is
/// replaced whole so stale variant fields do not leak through.
fn merge_tables(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                let tag_changed = ["kind", "source"]
                    .iter()
                    .any(|tag| o.get(*tag).is_some_and(|v| b.get(*tag) != Some(v)));
                if tag_changed {
                    *b = o;
                } else {
                    merge_tables(b, o);
                }
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
