use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;

use boussinesq_core::mesh::{Mesh, MeshFormat};
use boussinesq_core::model::{dispersion_table, params_from_theta, write_dispersion_csv};
use boussinesq_core::scenarios::{
    builtin_mesh, builtin_names, compare_gauges, preset, run_scenario, traveling_wave, InitialCondition, MeshSummary,
    Preset, RunStatus, ScenarioConfig, ScenarioKind,
};

#[derive(Parser)]
#[command(name = "boussinesq", version, about = "Bona-Smith Boussinesq solver with conservative finite elements")]
struct Cli {
    /// Increase log verbosity (-v debug, -vv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run { config: PathBuf },
    /// Run a manufactured-solution convergence sweep and print the rate table.
    Eoc { config: PathBuf },
    /// Compute the travelling wave of a scenario and write its profile.
    Solitary { config: PathBuf },
    /// Phase-speed ratios of the model against linear water-wave theory.
    Dispersion {
        theta_sq: f64,
        depth: f64,
        k_max: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarize a mesh file or a built-in mesh name.
    MeshInfo { mesh: String },
    /// Compare a run's gauge series against a reference CSV.
    Compare { run_dir: PathBuf, reference: PathBuf },
    /// Print a shipped scenario configuration as TOML.
    Preset {
        kind: String,
        /// Full-size parameters instead of the desk-scale defaults.
        #[arg(long)]
        paper: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config } => run(&config),
        Command::Eoc { config } => eoc(&config),
        Command::Solitary { config } => solitary(&config),
        Command::Dispersion {
            theta_sq,
            depth,
            k_max,
            samples,
            output,
        } => dispersion(theta_sq, depth, k_max, samples, output.as_deref()),
        Command::MeshInfo { mesh } => mesh_info(&mesh),
        Command::Compare { run_dir, reference } => compare(&run_dir, &reference),
        Command::Preset { kind, paper } => print_preset(&kind, paper),
    }
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn status_code(status: &RunStatus) -> ExitCode {
    match status {
        RunStatus::Completed => ExitCode::SUCCESS,
        RunStatus::Failed { reason } => {
            eprintln!("run failed: {reason}");
            ExitCode::from(2)
        }
    }
}

fn run(path: &Path) -> Result<ExitCode> {
    let config = load(path)?;
    let outcome = run_scenario(&config)?;
    if let Some(report) = &outcome.eoc {
        print!("{}", report.to_table());
    }
    if let (Some(first), Some(last)) = (&outcome.manifest.initial, &outcome.manifest.last) {
        println!("steps      {}", outcome.manifest.steps);
        println!("t          {}", outcome.manifest.t_final);
        println!("mass       {:.14e} -> {:.14e}", first.mass, last.mass);
        println!("energy     {:.14e} -> {:.14e}", first.energy, last.energy);
        println!("vorticity  {:.3e}", last.vorticity);
        if let Some(g) = outcome.manifest.max_gamma_deviation {
            println!("max|g-1|   {g:.3e}");
        }
    }
    println!("outputs in {}", outcome.output_dir.display());
    Ok(status_code(&outcome.status))
}

fn eoc(path: &Path) -> Result<ExitCode> {
    let config = load(path)?;
    if config.scenario.kind != ScenarioKind::MmsConvergence {
        bail!("eoc needs a mms_convergence config, got {}", config.scenario.kind.name());
    }
    let outcome = run_scenario(&config)?;
    if let Some(report) = &outcome.eoc {
        print!("{}", report.to_table());
    }
    info!("wrote eoc.csv and eoc.txt to {}", outcome.output_dir.display());
    Ok(status_code(&outcome.status))
}

fn solitary(path: &Path) -> Result<ExitCode> {
    let config = load(path)?;
    let InitialCondition::Petviashvili {
        speed,
        amplitude,
        channel,
        tolerance,
        max_iterations,
        ..
    } = &config.initial
    else {
        bail!("solitary needs a config whose initial condition is a Petviashvili wave");
    };
    let params = config.params()?;
    let sol = traveling_wave(
        &params,
        config.bathymetry.reference_depth(),
        *speed,
        *amplitude,
        channel,
        *tolerance,
        *max_iterations,
        config.mesh.degree,
    )?;
    let dir = config.output_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let out = dir.join("profile.csv");
    let mut file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    sol.write_profile_csv(sol.space.mesh().n_vertices().max(2000), &mut file)?;
    println!("speed      {:.10}", sol.speed);
    println!("amplitude  {:.10}", sol.amplitude());
    println!("iterations {}", sol.iterations);
    println!("residual   {:.3e}", sol.final_residual());
    println!("multiplier {:.12}", sol.final_multiplier());
    println!("profile    {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn dispersion(theta_sq: f64, depth: f64, k_max: f64, samples: usize, output: Option<&Path>) -> Result<ExitCode> {
    if !(depth > 0.0 && k_max > 0.0) || samples < 2 {
        bail!("need depth > 0, k_max > 0 and at least 2 samples");
    }
    let params = params_from_theta(theta_sq, 1.0)?;
    let rows = dispersion_table(&params, depth, k_max, samples - 1);
    match output {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_dispersion_csv(&rows, file)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            write_dispersion_csv(&rows, &mut out)?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn mesh_info(name: &str) -> Result<ExitCode> {
    let path = Path::new(name);
    let mesh = if path.exists() {
        Mesh::read(path, MeshFormat::from_path(path))?
    } else if builtin_names().any(|n| n == name) {
        builtin_mesh(name)?
    } else {
        bail!("no mesh file '{name}' and no built-in mesh of that name (built-ins: {})", builtin_names().collect::<Vec<_>>().join(", "));
    };
    let s = MeshSummary::of(&mesh);
    println!("vertices        {}", s.vertices);
    println!("triangles       {}", s.triangles);
    println!("boundary edges  {}", mesh.boundary_edges().len());
    println!("boundary loops  {}", mesh.boundary_loops().len());
    println!("area            {:.10}", mesh.area());
    println!("h max           {:.6}", s.h_max);
    println!("h min           {:.6}", s.h_min);
    println!("sha256          {}", s.sha256);
    Ok(ExitCode::SUCCESS)
}

fn compare(run_dir: &Path, reference: &Path) -> Result<ExitCode> {
    let cmp = compare_gauges(run_dir, reference)?;
    println!("{:<10} {:>8} {:>14} {:>14}", "gauge", "samples", "L2", "Linf");
    for g in &cmp.gauges {
        println!("{:<10} {:>8} {:>14.6e} {:>14.6e}", g.id, g.samples, g.l2, g.linf);
    }
    println!("merged series in {}", run_dir.join("comparison.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn print_preset(kind: &str, paper: bool) -> Result<ExitCode> {
    let Some(kind) = ScenarioKind::ALL.into_iter().find(|k| k.name() == kind) else {
        let names: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
        bail!("unknown scenario '{kind}' (one of {})", names.join(", "));
    };
    let cfg = preset(kind, if paper { Preset::Paper } else { Preset::Desk })?;
    print!("{}", cfg.to_toml_string());
    Ok(ExitCode::SUCCESS)
}
