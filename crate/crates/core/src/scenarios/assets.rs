//! Meshes of the cylinder channel and the Y-junction, generated offline by
//! `tools/gen_meshes.py`.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, MeshFormat};

const BUILTIN: [(&str, &str); 4] = [
    ("cylinder_desk", include_str!("../../assets/cylinder_desk.tri")),
    ("cylinder_paper", include_str!("../../assets/cylinder_paper.tri")),
    ("y_junction_desk", include_str!("../../assets/y_junction_desk.tri")),
    ("y_junction_paper", include_str!("../../assets/y_junction_paper.tri")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

pub fn builtin_mesh(name: &str) -> Result<Mesh> {
    let (_, text) = BUILTIN.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        Error::Domain(format!(
            "unknown builtin mesh {name:?}; available: {}",
            builtin_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    Mesh::from_str_format(text, MeshFormat::SimpleTri)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cylinder_meshes_have_one_hole() {
        let hole = 0.5 * 20.0 * 0.08f64.powi(2) * (2.0 * PI / 20.0).sin();
        for name in ["cylinder_desk", "cylinder_paper"] {
            let m = builtin_mesh(name).unwrap();
            assert_eq!(m.euler_characteristic(), 0, "{name}");
            assert_eq!(m.boundary_loops().len(), 2, "{name}");
            let area = 24.0 * 0.55 - hole;
            assert!((m.area() - area).abs() < 1e-10 * area, "{name}: {}", m.area());
            assert!(m.locate_point([4.5, 0.275]).is_none());
            assert!(m.locate_point([4.4, 0.271]).is_some());
        }
    }

    #[test]
    fn junction_meshes_cover_the_polygon() {
        for name in ["y_junction_desk", "y_junction_paper"] {
            let m = builtin_mesh(name).unwrap();
            assert_eq!(m.euler_characteristic(), 1, "{name}");
            let area = m.boundary_polygon_area();
            assert!((m.area() - area).abs() < 1e-12 * area, "{name}");
            let corners = [
                [-20.0, -1.0],
                [0.0, -1.0],
                [20.0, -12.5],
                [22.0, -11.5],
                [2.0, 0.0],
                [22.0, 11.5],
                [20.0, 12.5],
                [0.0, 1.0],
                [-20.0, 1.0],
            ];
            for c in corners {
                assert!(m.vertices().iter().any(|v| (v[0] - c[0]).hypot(v[1] - c[1]) < 1e-9), "{c:?}");
            }
        }
    }

    #[test]
    fn unknown_builtin_lists_choices() {
        let err = builtin_mesh("nope").unwrap_err().to_string();
        assert!(err.contains("cylinder_desk"));
    }
}
