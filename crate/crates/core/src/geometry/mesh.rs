use std::fmt::Write as _;

use crate::error::{Error, Result};

/// UV triangles with less than this doubled area are treated as degenerate.
pub const UV_AREA_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub vertices: [usize; 3],
    /// Per-corner UV coordinates in `[0, 1]^2`.
    pub uvs: [[f64; 2]; 3],
}

impl Facet {
    /// Signed doubled area of the UV triangle.
    pub fn uv_area2(&self) -> f64 {
        let [a, b, c] = self.uvs;
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }

    pub fn is_uv_degenerate(&self) -> bool {
        self.uv_area2().abs() < UV_AREA_EPS
    }
}

/// Triangle mesh with per-corner UVs. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
    facets: Vec<Facet>,
}

impl Mesh {
    pub fn new(vertices: Vec<[f64; 3]>, facets: Vec<Facet>) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::Invalid("mesh has no facets".into()));
        }
        for (m, f) in facets.iter().enumerate() {
            if let Some(&v) = f.vertices.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Invalid(format!(
                    "facet {m} references vertex {v} but mesh has {} vertices",
                    vertices.len()
                )));
            }
            for uv in &f.uvs {
                if !(0.0..=1.0).contains(&uv[0]) || !(0.0..=1.0).contains(&uv[1]) {
                    return Err(Error::Invalid(format!(
                        "facet {m} has UV ({}, {}) outside the unit square",
                        uv[0], uv[1]
                    )));
                }
            }
        }
        Ok(Self { vertices, facets })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, m: usize) -> &Facet {
        &self.facets[m]
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn facet_positions(&self, m: usize) -> [[f64; 3]; 3] {
        self.facets[m].vertices.map(|v| self.vertices[v])
    }

    pub fn degenerate_facets(&self) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&m| self.facets[m].is_uv_degenerate())
            .collect()
    }

    /// Serializes as an OBJ with one `vt` per facet corner.
    pub fn to_obj_string(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.facets {
            for uv in &f.uvs {
                let _ = writeln!(s, "vt {} {}", uv[0], uv[1]);
            }
        }
        for (m, f) in self.facets.iter().enumerate() {
            let t = 3 * m + 1;
            let _ = writeln!(
                s,
                "f {}/{} {}/{} {}/{}",
                f.vertices[0] + 1,
                t,
                f.vertices[1] + 1,
                t + 1,
                f.vertices[2] + 1,
                t + 2
            );
        }
        s
    }
}
