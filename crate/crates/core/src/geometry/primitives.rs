//! Procedural meshes used by fixtures, the scene generator and the CLI.

use super::mesh::{Facet, Mesh};

/// Unit square facing +X, split along its UV diagonal into two facets that
/// together own the whole UV map. UV `u` runs along +Y, `v` along -Z, so the
/// atlas appears upright from azimuth 0.
pub fn uv_quad() -> Mesh {
    let uvs = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let vertices = uvs.iter().map(|uv| [0.0, 2.0 * uv[0] - 1.0, 1.0 - 2.0 * uv[1]]).collect();
    let facets = vec![
        Facet {
            vertices: [0, 1, 2],
            uvs: [uvs[0], uvs[1], uvs[2]],
        },
        Facet {
            vertices: [0, 2, 3],
            uvs: [uvs[0], uvs[2], uvs[3]],
        },
    ];
    Mesh::new(vertices, facets).expect("valid quad")
}

const ATLAS_PAD: f64 = 0.02;

/// Axis-aligned box centered at the origin with the given full extents.
/// Each of the six sides gets its own padded cell of a 3x2 UV atlas, and is
/// split into two facets (12 total).
pub fn box_vehicle(size: [f64; 3]) -> Mesh {
    let [hx, hy, hz] = size.map(|s| s / 2.0);
    // (s, t) in [0,1]^2 -> position on each side.
    let sides: [&dyn Fn(f64, f64) -> [f64; 3]; 6] = [
        &|s, t| [hx, -hy + 2.0 * hy * s, hz - 2.0 * hz * t],
        &|s, t| [-hx, hy - 2.0 * hy * s, hz - 2.0 * hz * t],
        &|s, t| [hx - 2.0 * hx * s, hy, hz - 2.0 * hz * t],
        &|s, t| [-hx + 2.0 * hx * s, -hy, hz - 2.0 * hz * t],
        &|s, t| [hx - 2.0 * hx * t, -hy + 2.0 * hy * s, hz],
        &|s, t| [-hx + 2.0 * hx * t, -hy + 2.0 * hy * s, -hz],
    ];
    let (cw, ch) = (1.0 / 3.0, 1.0 / 2.0);
    let mut vertices = Vec::with_capacity(24);
    let mut facets = Vec::with_capacity(12);
    for (k, side) in sides.iter().enumerate() {
        let (col, row) = ((k % 3) as f64, (k / 3) as f64);
        let uv = |s: f64, t: f64| {
            [
                col * cw + ATLAS_PAD + s * (cw - 2.0 * ATLAS_PAD),
                row * ch + ATLAS_PAD + t * (ch - 2.0 * ATLAS_PAD),
            ]
        };
        let base = vertices.len();
        let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        for &(s, t) in &corners {
            vertices.push(side(s, t));
        }
        let c = corners.map(|(s, t)| uv(s, t));
        facets.push(Facet {
            vertices: [base, base + 1, base + 2],
            uvs: [c[0], c[1], c[2]],
        });
        facets.push(Facet {
            vertices: [base, base + 2, base + 3],
            uvs: [c[0], c[2], c[3]],
        });
    }
    Mesh::new(vertices, facets).expect("valid box")
}
