use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{l2_project, FeSpace};
use crate::linalg::SolverConfig;
use crate::mesh::{Mesh, Point};
use crate::model::{analytic_solitary, dispersion_table, write_dispersion_csv, ModelParams};
use crate::semidiscrete::{build_operators, ConservedQuantities, DiscreteOperators, State};
use crate::timestepping::{integrate, write_vtk, ButcherTableau, IntegrateOptions, Integration};
use crate::wave_setup::{
    bar_wavetrain, channel_mesh, initial_potential, petviashvili_solve, speed_for_amplitude, PetviashviliConfig,
    Profile, TravelingWaveSolution,
};

use super::config::*;
use super::eoc::{mms_sweep, EocReport};
use super::mms::{exact_eta, exact_phi, mms_forcing};

/// Everything needed to integrate a scenario.
pub struct PreparedScenario {
    pub config: ScenarioConfig,
    pub mesh: Arc<Mesh>,
    pub ops: DiscreteOperators,
    pub initial: State,
    pub options: IntegrateOptions,
    pub wave: Option<TravelingWaveSolution>,
}

pub fn prepare(config: &ScenarioConfig) -> Result<PreparedScenario> {
    let mesh = config.validate()?;
    let params = config.params()?;
    let space = Arc::new(FeSpace::new(mesh.clone(), config.mesh.degree)?);
    let mut ops = build_operators(space.clone(), config.bathymetry.field(), params, SolverConfig::cholesky())?;
    if config.initial == InitialCondition::Manufactured {
        ops.set_forcing(Some(mms_forcing(&params)));
    }
    let (initial, wave) = initial_state(config, &params, &ops)?;
    let t = &config.time;
    let mut options = IntegrateOptions::new(t.dt, t.t_end);
    options.relaxation = t.relaxation;
    options.relaxation_fallback = t.relaxation_fallback;
    options.tableau = ButcherTableau::by_name(&t.tableau)?;
    options.gauges = config.gauges();
    options.log_every = t.log_every;
    options.snapshot_every = t.snapshot_every;
    options.divergence_threshold = t.divergence_threshold;
    Ok(PreparedScenario {
        config: config.clone(),
        mesh,
        ops,
        initial,
        options,
        wave,
    })
}

fn initial_state(
    config: &ScenarioConfig,
    params: &ModelParams,
    ops: &DiscreteOperators,
) -> Result<(State, Option<TravelingWaveSolution>)> {
    let space = ops.space();
    let depth = config.bathymetry.reference_depth();
    match &config.initial {
        InitialCondition::Rest => Ok((State::zeros(space.n_dofs()), None)),
        InitialCondition::Manufactured => Ok((ops.initial_state(&exact_eta(0.0), &exact_phi(0.0))?, None)),
        InitialCondition::AnalyticSolitary { crest, direction } => {
            let wave = analytic_solitary(params.theta_sq, depth, params.g, *direction, -crest)?;
            Ok((ops.initial_state(&wave.eta_field(0.0), &wave.potential_field(0.0))?, None))
        }
        InitialCondition::Petviashvili {
            speed,
            amplitude,
            crest,
            direction,
            channel,
            tolerance,
            max_iterations,
        } => {
            let sol = traveling_wave(
                params,
                depth,
                *speed,
                *amplitude,
                channel,
                *tolerance,
                *max_iterations,
                config.mesh.degree,
            )?;
            info!(
                "travelling wave: speed {:.6}, amplitude {:.6}, {} iterations",
                sol.speed,
                sol.amplitude(),
                sol.iterations
            );
            let samples = ((2.0 * channel.half_length / channel.h).ceil() as usize * 8).max(2000);
            let profile = sol.centerline_profile(samples);
            let state = state_from_profile(space, &profile, *direction, *crest)?;
            Ok((state, Some(sol)))
        }
        InitialCondition::Wavetrain(train) => {
            let (eta, u) = bar_wavetrain(params, train);
            let eta = l2_project(space, &eta)?;
            let phi = initial_potential(space, &u)?;
            Ok((
                State {
                    eta: eta.coeffs,
                    phi: phi.coeffs,
                    t: 0.0,
                },
                None,
            ))
        }
    }
}

/// Petviashvili solve at a given speed, or at the speed matching an amplitude.
#[allow(clippy::too_many_arguments)]
pub fn traveling_wave(
    params: &ModelParams,
    depth: f64,
    speed: Option<f64>,
    amplitude: Option<f64>,
    channel: &ChannelSection,
    tolerance: f64,
    max_iterations: usize,
    default_degree: usize,
) -> Result<TravelingWaveSolution> {
    let mesh = channel_mesh(channel.half_length, channel.width, channel.h)?;
    let space = Arc::new(FeSpace::new(Arc::new(mesh), channel.degree.unwrap_or(default_degree))?);
    let mut cfg = PetviashviliConfig::new(speed.unwrap_or(f64::NAN), depth);
    cfg.tolerance = tolerance;
    cfg.max_iterations = max_iterations;
    match (speed, amplitude) {
        (Some(_), _) => petviashvili_solve(&cfg, params, &space),
        (None, Some(a)) => {
            cfg.speed = (params.g * (depth + a)).sqrt();
            speed_for_amplitude(a, &cfg, params, &space)
        }
        (None, None) => Err(Error::Config(vec!["initial: speed or amplitude is required".into()])),
    }
}

/// Place a profile on the simulation mesh and recover the potential.
pub fn state_from_profile(space: &Arc<FeSpace>, profile: &Profile, direction: [f64; 2], crest: f64) -> Result<State> {
    let (eta, u) = profile.place(direction, crest);
    let eta = l2_project(space, &eta)?;
    let phi = initial_potential(space, &u)?;
    Ok(State {
        eta: eta.coeffs,
        phi: phi.coeffs,
        t: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub triangles: usize,
    pub h_max: f64,
    pub h_min: f64,
    pub sha256: String,
}

impl MeshSummary {
    pub fn of(mesh: &Mesh) -> Self {
        MeshSummary {
            vertices: mesh.n_vertices(),
            triangles: mesh.n_triangles(),
            h_max: mesh.h_max(),
            h_min: mesh.h_min(),
            sha256: mesh.content_hash(),
        }
    }
}

/// Run record written next to the outputs; `config` alone reproduces the run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub mesh: Option<MeshSummary>,
    #[serde(flatten)]
    pub status: RunStatus,
    pub steps: usize,
    pub t_final: f64,
    pub initial: Option<ConservedQuantities>,
    pub last: Option<ConservedQuantities>,
    pub max_gamma_deviation: Option<f64>,
    pub travelling_wave: Option<WaveSummary>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveSummary {
    pub speed: f64,
    pub amplitude: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub struct ScenarioOutcome {
    pub output_dir: PathBuf,
    pub status: RunStatus,
    pub integration: Option<Integration>,
    pub eoc: Option<EocReport>,
    pub manifest: Manifest,
}

fn write(path: &Path, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    files.push(path.file_name().map(PathBuf::from).unwrap_or_default());
    Ok(())
}

impl Manifest {
    fn new(config: &ScenarioConfig) -> Self {
        Manifest {
            program: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            mesh: None,
            status: RunStatus::Completed,
            steps: 0,
            t_final: 0.0,
            initial: None,
            last: None,
            max_gamma_deviation: None,
            travelling_wave: None,
            files: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Validate, run and write all outputs of a scenario.  An integration that
/// stops early still writes its partial logs, a `postmortem.vtk` of the last
/// accepted state and a manifest marked failed.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let dir = config.output_dir();
    match config.scenario.kind {
        ScenarioKind::MmsConvergence => run_eoc(config, &dir),
        ScenarioKind::DispersionTable => run_dispersion(config, &dir),
        _ => run_integration(config, &dir),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn run_integration(config: &ScenarioConfig, dir: &Path) -> Result<ScenarioOutcome> {
    let mut prepared = prepare(config)?;
    create_dir(dir)?;
    let mut manifest = Manifest::new(config);
    manifest.mesh = Some(MeshSummary::of(&prepared.mesh));
    let mut files = Vec::new();
    write(&dir.join("config.toml"), &config.to_toml_string(), &mut files)?;
    if let Some(sol) = &prepared.wave {
        let mut buf = Vec::new();
        let n = (sol.space.mesh().n_vertices()).max(2000);
        sol.write_profile_csv(n, &mut buf).map_err(|e| Error::io(dir.join("profile.csv"), e))?;
        write(&dir.join("profile.csv"), &String::from_utf8_lossy(&buf), &mut files)?;
        manifest.travelling_wave = Some(WaveSummary {
            speed: sol.speed,
            amplitude: sol.amplitude(),
            iterations: sol.iterations,
            residual: sol.final_residual(),
        });
    }
    if prepared.options.snapshot_every.is_some() {
        prepared.options.snapshot_dir = Some(dir.join("snapshots"));
    }
    let space = prepared.ops.space().clone();
    write_vtk(dir.join("initial.vtk"), &space, &prepared.initial.eta, &prepared.initial.phi, "initial")?;
    files.push("initial.vtk".into());
    manifest.initial = Some(prepared.ops.conserved(&prepared.initial));

    let (integration, status) = match integrate(&prepared.ops, prepared.initial.clone(), &prepared.options) {
        Ok(run) => {
            write_vtk(dir.join("final.vtk"), &space, &run.state.eta, &run.state.phi, "final")?;
            files.push("final.vtk".into());
            (run, RunStatus::Completed)
        }
        Err(failure) => {
            warn!("{failure}");
            let run = failure.partial;
            write_vtk(dir.join("postmortem.vtk"), &space, &run.state.eta, &run.state.phi, "postmortem")?;
            files.push("postmortem.vtk".into());
            (
                run,
                RunStatus::Failed {
                    reason: failure.error.to_string(),
                },
            )
        }
    };
    write(&dir.join("conservation.csv"), &integration.log.to_csv(), &mut files)?;
    for g in &integration.gauges {
        write(&dir.join(format!("gauge_{}.csv", g.id)), &g.to_csv(), &mut files)?;
    }
    if prepared.options.snapshot_every.is_some() {
        files.push("snapshots/".into());
    }
    manifest.status = status.clone();
    manifest.steps = integration.steps;
    manifest.t_final = integration.state.t;
    manifest.last = Some(prepared.ops.conserved(&integration.state));
    manifest.max_gamma_deviation = Some(integration.log.max_gamma_deviation());
    files.push("manifest.json".into());
    manifest.files = files;
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(ScenarioOutcome {
        output_dir: dir.to_path_buf(),
        status,
        integration: Some(integration),
        eoc: None,
        manifest,
    })
}

fn mms_rule(config: &ScenarioConfig) -> crate::mesh::DiagonalRule {
    match &config.mesh.source {
        MeshSource::Rectangle { diagonal, .. } => *diagonal,
        _ => crate::mesh::DiagonalRule::Right,
    }
}

/// Convergence sweep described by the `[mms]` section.
pub fn run_mms_convergence(config: &ScenarioConfig) -> Result<EocReport> {
    config.validate()?;
    let mms = config.mms.as_ref().expect("validated");
    let dt = (!mms.dt_equals_h).then_some(config.time.dt);
    Ok(mms_sweep(
        &config.params()?,
        config.mesh.degree,
        &mms.cells,
        mms_rule(config),
        dt,
        config.time.t_end,
    ))
}

fn run_eoc(config: &ScenarioConfig, dir: &Path) -> Result<ScenarioOutcome> {
    let report = run_mms_convergence(config)?;
    create_dir(dir)?;
    let mut files = Vec::new();
    write(&dir.join("config.toml"), &config.to_toml_string(), &mut files)?;
    write(&dir.join("eoc.csv"), &report.to_csv(), &mut files)?;
    write(&dir.join("eoc.txt"), &report.to_table(), &mut files)?;
    let status = match &report.failure {
        None => RunStatus::Completed,
        Some(r) => RunStatus::Failed { reason: r.clone() },
    };
    let mut manifest = Manifest::new(config);
    manifest.status = status.clone();
    manifest.steps = report.rows.len();
    manifest.t_final = config.time.t_end;
    files.push("manifest.json".into());
    manifest.files = files;
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(ScenarioOutcome {
        output_dir: dir.to_path_buf(),
        status,
        integration: None,
        eoc: Some(report),
        manifest,
    })
}

fn run_dispersion(config: &ScenarioConfig, dir: &Path) -> Result<ScenarioOutcome> {
    config.validate()?;
    let d = config.dispersion.as_ref().expect("validated");
    let rows = dispersion_table(&config.params()?, d.depth, d.k_max, d.samples - 1);
    create_dir(dir)?;
    let mut buf = Vec::new();
    write_dispersion_csv(&rows, &mut buf).map_err(|e| Error::io(dir.join("dispersion.csv"), e))?;
    let mut files = Vec::new();
    write(&dir.join("dispersion.csv"), &String::from_utf8_lossy(&buf), &mut files)?;
    let mut manifest = Manifest::new(config);
    files.push("manifest.json".into());
    manifest.files = files;
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(ScenarioOutcome {
        output_dir: dir.to_path_buf(),
        status: RunStatus::Completed,
        integration: None,
        eoc: None,
        manifest,
    })
}

/// `η` of a state at a point, `None` outside the mesh.
pub fn eta_at(ops: &DiscreteOperators, state: &State, p: Point) -> Option<f64> {
    crate::fem::FeFunction::new(ops.space().clone(), state.eta.clone()).eval(p)
}
