//! Config-driven experiments: manufactured-solution convergence, the
//! solitary-wave and bathymetry test cases, gauge comparison and run output.

mod assets;
mod compare;
mod config;
mod eoc;
pub mod mms;
mod presets;
mod run;

pub use assets::{builtin_mesh, builtin_names};
pub use compare::{compare_gauges, compare_records, read_csv_columns, read_gauge_csv, GaugeComparison, GaugeDiscrepancy};
pub use config::{
    bar_depth, Bathymetry, ChannelSection, DispersionSection, GaugeSpec, InitialCondition, MeshSection, MeshSource,
    MmsSection, ModelSection, OutputSection, Preset, ScenarioConfig, ScenarioKind, ScenarioSection, TimeSection,
    OUTPUT_DIR_ENV,
};
pub use eoc::{mms_errors, mms_sweep, rate, EocReport, EocRow};
pub use presets::preset;
pub use run::{
    eta_at, prepare, run_mms_convergence, run_scenario, state_from_profile, traveling_wave, Manifest, MeshSummary,
    PreparedScenario, RunStatus, ScenarioOutcome, WaveSummary,
};
