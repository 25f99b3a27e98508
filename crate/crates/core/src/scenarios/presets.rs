//! Shipped parameter sets.  `Paper` reproduces the published experiment
//! sizes; `Desk` coarsens the mesh about twofold in `h` and shortens the
//! run where the phenomenon still shows.

use std::path::PathBuf;

use crate::error::Result;
use crate::mesh::DiagonalRule;
use crate::wave_setup::WavetrainParams;

use super::config::*;

fn rectangle(x_range: [f64; 2], y_range: [f64; 2], nx: usize, ny: usize, degree: usize) -> MeshSection {
    MeshSection {
        source: MeshSource::Rectangle {
            x_range,
            y_range,
            nx,
            ny,
            diagonal: DiagonalRule::Right,
        },
        degree,
    }
}

fn builtin(name: &str, degree: usize) -> MeshSection {
    MeshSection {
        source: MeshSource::Builtin { name: name.into() },
        degree,
    }
}

fn time(dt: f64, t_end: f64, relaxation: bool, log_every: usize) -> TimeSection {
    TimeSection {
        dt,
        t_end,
        relaxation,
        relaxation_fallback: false,
        tableau: "rk4".into(),
        log_every,
        snapshot_every: None,
        divergence_threshold: 1e6,
    }
}

fn gauges(points: &[(f64, f64)]) -> Vec<GaugeSpec> {
    points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| GaugeSpec {
            id: format!("g{}", i + 1),
            x,
            y,
        })
        .collect()
}

fn section(kind: ScenarioKind, preset: Preset) -> ScenarioSection {
    ScenarioSection {
        kind,
        preset: Some(preset),
        name: None,
    }
}

fn output(kind: ScenarioKind) -> OutputSection {
    OutputSection {
        dir: PathBuf::from("output").join(kind.name()),
    }
}

const BONA_SMITH_ONE: ModelSection = ModelSection { theta_sq: 1.0, g: 9.81 };

pub fn preset(kind: ScenarioKind, preset: Preset) -> Result<ScenarioConfig> {
    let paper = preset == Preset::Paper;
    let cfg = match kind {
        ScenarioKind::MmsConvergence => ScenarioConfig {
            scenario: section(kind, preset),
            model: ModelSection { theta_sq: 1.0, g: 1.0 },
            // Crossed cells make the longest edge equal to the cell width.
            mesh: MeshSection {
                source: MeshSource::Rectangle {
                    x_range: [0.0, 1.0],
                    y_range: [0.0, 1.0],
                    nx: 8,
                    ny: 8,
                    diagonal: DiagonalRule::Crossed,
                },
                degree: 1,
            },
            bathymetry: Bathymetry::Manufactured,
            initial: InitialCondition::Manufactured,
            time: time(5e-4, 1.0, false, 100),
            gauges: Vec::new(),
            output: output(kind),
            mms: Some(MmsSection {
                cells: vec![8, 12, 16, 20, 24, 28, 32],
                dt_equals_h: false,
            }),
            dispersion: None,
        },
        ScenarioKind::SolitaryFlat => ScenarioConfig {
            scenario: section(kind, preset),
            model: ModelSection {
                theta_sq: 9.0 / 11.0,
                g: 1.0,
            },
            mesh: if paper {
                rectangle([-50.0, 50.0], [-5.0, 5.0], 525, 52, 1)
            } else {
                rectangle([-50.0, 50.0], [-5.0, 5.0], 200, 20, 1)
            },
            bathymetry: Bathymetry::Flat { depth: 1.0 },
            initial: InitialCondition::AnalyticSolitary {
                crest: -20.0,
                direction: [1.0, 0.0],
            },
            time: time(0.1, if paper { 100.0 } else { 20.0 }, true, 1),
            gauges: gauges(&[(0.0, 0.0), (20.0, 0.0)]),
            output: output(kind),
            mms: None,
            dispersion: None,
        },
        ScenarioKind::ShoalingReflection => ScenarioConfig {
            scenario: section(kind, preset),
            model: BONA_SMITH_ONE,
            mesh: if paper {
                rectangle([-50.0, 20.0], [0.0, 1.0], 306, 6, 1)
            } else {
                rectangle([-50.0, 20.0], [0.0, 1.0], 150, 3, 1)
            },
            bathymetry: Bathymetry::Beach {
                depth: 0.7,
                toe: 0.0,
                slope: 1.0 / 50.0,
            },
            initial: InitialCondition::Petviashvili {
                speed: None,
                amplitude: Some(0.07),
                crest: -30.0,
                direction: [1.0, 0.0],
                channel: ChannelSection {
                    half_length: 20.0,
                    width: 0.2,
                    h: 0.1,
                    degree: None,
                },
                tolerance: 1e-6,
                max_iterations: 50,
            },
            time: time(0.04, if paper { 40.0 } else { 30.0 }, true, 1),
            gauges: gauges(&[(0.0, 0.0), (16.25, 0.0), (17.75, 0.0)]),
            output: output(kind),
            mms: None,
            dispersion: None,
        },
        ScenarioKind::Cylinder => ScenarioConfig {
            scenario: section(kind, preset),
            model: BONA_SMITH_ONE,
            mesh: builtin(if paper { "cylinder_paper" } else { "cylinder_desk" }, 1),
            bathymetry: Bathymetry::Flat { depth: 0.15 },
            initial: InitialCondition::Petviashvili {
                speed: Some(1.356),
                amplitude: None,
                crest: -2.1,
                direction: [1.0, 0.0],
                channel: ChannelSection {
                    half_length: 12.0,
                    width: 0.1,
                    h: if paper { 0.025 } else { 0.05 },
                    degree: None,
                },
                tolerance: 1e-6,
                max_iterations: 50,
            },
            time: if paper {
                time(0.01, 10.0, true, 1)
            } else {
                time(0.02, 8.0, true, 1)
            },
            gauges: gauges(&[
                (4.4, 0.271),
                (4.5, 0.17),
                (4.5, 0.045),
                (4.6, 0.275),
                (4.975, 0.275),
                (5.375, 0.275),
            ]),
            output: output(kind),
            mms: None,
            dispersion: None,
        },
        ScenarioKind::SubmergedBar => ScenarioConfig {
            scenario: section(kind, preset),
            model: BONA_SMITH_ONE,
            mesh: if paper {
                rectangle([-100.0, 50.0], [0.0, 1.0], 1000, 12, 2)
            } else {
                rectangle([-100.0, 50.0], [0.0, 1.0], 500, 4, 2)
            },
            bathymetry: Bathymetry::SubmergedBar,
            // sqrt(g/D0) is the long-wave velocity scale; g/D0 is not a velocity.
            initial: InitialCondition::Wavetrain(WavetrainParams {
                velocity_factor: Some((9.81f64 / 0.4).sqrt()),
                ..WavetrainParams::default()
            }),
            time: time(0.05, if paper { 40.0 } else { 20.0 }, true, 1),
            gauges: gauges(&[
                (10.5, 0.5),
                (12.5, 0.5),
                (13.5, 0.5),
                (14.5, 0.5),
                (15.7, 0.5),
                (17.3, 0.5),
            ]),
            output: output(kind),
            mms: None,
            dispersion: None,
        },
        ScenarioKind::YJunction => ScenarioConfig {
            scenario: section(kind, preset),
            model: BONA_SMITH_ONE,
            mesh: builtin(if paper { "y_junction_paper" } else { "y_junction_desk" }, 2),
            bathymetry: Bathymetry::Flat { depth: 1.0 },
            initial: InitialCondition::Petviashvili {
                speed: Some(3.6),
                amplitude: None,
                crest: -10.0,
                direction: [1.0, 0.0],
                channel: ChannelSection {
                    half_length: 15.0,
                    width: 0.2,
                    h: if paper { 0.05 } else { 0.1 },
                    degree: None,
                },
                tolerance: 1e-6,
                max_iterations: 50,
            },
            time: if paper {
                time(0.01, 8.0, true, 1)
            } else {
                time(0.02, 8.0, true, 1)
            },
            gauges: gauges(&[(-5.0, 0.0), (0.0, 0.0), (7.0, -4.0), (14.0, -8.0), (0.0, -1.0), (2.0, 0.0)]),
            output: output(kind),
            mms: None,
            dispersion: None,
        },
        ScenarioKind::DispersionTable => ScenarioConfig {
            scenario: section(kind, preset),
            model: ModelSection { theta_sq: 1.0, g: 1.0 },
            mesh: rectangle([0.0, 1.0], [0.0, 1.0], 1, 1, 1),
            bathymetry: Bathymetry::Flat { depth: 1.0 },
            initial: InitialCondition::Rest,
            time: time(1.0, 1.0, false, 1),
            gauges: Vec::new(),
            output: output(kind),
            mms: None,
            dispersion: Some(DispersionSection {
                depth: 1.0,
                k_max: 10.0,
                samples: if paper { 1001 } else { 201 },
            }),
        },
        // Still water over the beach, a well-balancing check.
        ScenarioKind::Custom => ScenarioConfig {
            scenario: section(kind, preset),
            model: BONA_SMITH_ONE,
            mesh: rectangle([-50.0, 20.0], [0.0, 1.0], 150, 3, 1),
            bathymetry: Bathymetry::Beach {
                depth: 0.7,
                toe: 0.0,
                slope: 1.0 / 50.0,
            },
            initial: InitialCondition::Rest,
            time: time(0.1, 10.0, true, 10),
            gauges: gauges(&[(0.0, 0.5), (10.0, 0.5)]),
            output: output(kind),
            mms: None,
            dispersion: None,
        },
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for kind in ScenarioKind::ALL {
            for p in [Preset::Desk, Preset::Paper] {
                let cfg = preset(kind, p).unwrap();
                if let Err(e) = cfg.validate() {
                    panic!("{} {:?}: {e}", kind.name(), p);
                }
            }
        }
    }

    #[test]
    fn full_size_meshes_match_reference_counts() {
        let cfg = preset(ScenarioKind::SubmergedBar, Preset::Paper).unwrap();
        assert_eq!(cfg.build_mesh().unwrap().n_triangles(), 24_000);
        let cfg = preset(ScenarioKind::ShoalingReflection, Preset::Paper).unwrap();
        let n = cfg.build_mesh().unwrap().n_triangles();
        assert!((3600..3750).contains(&n), "{n}");
    }
}
