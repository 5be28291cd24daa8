//! Fixtures, brute-force reference implementations and finite-difference
//! helpers shared by the integration tests.
//!
//! The references are written pixel-by-pixel and texel-by-texel from the
//! definitions and do not call any sampling or rasterization code in the
//! crate.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uvcamo::geometry::{CameraTransform, Facet, Mesh, UvMap, FAR_PLANE, NEAR_PLANE};
use uvcamo::Image;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Image {
    Image::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()])
}

pub fn random_signed(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Image {
    Image::from_fn(w, h, |_, _| {
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
    })
}

pub fn random_uv(w: usize, h: usize, rng: &mut ChaCha8Rng) -> UvMap {
    UvMap::new(random_image(w, h, rng)).unwrap()
}

fn uv_area2(t: &[[f64; 2]; 3]) -> f64 {
    (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0])
}

/// `nf` facets with random, possibly overlapping UV triangles of
/// non-negligible area and random 3D positions.
pub fn random_mesh(nf: usize, rng: &mut ChaCha8Rng) -> Mesh {
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    for m in 0..nf {
        let uvs = loop {
            let t: [[f64; 2]; 3] = std::array::from_fn(|_| [rng.gen(), rng.gen()]);
            if uv_area2(&t).abs() > 0.05 {
                break t;
            }
        };
        for _ in 0..3 {
            vertices.push([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        }
        facets.push(Facet {
            vertices: [3 * m, 3 * m + 1, 3 * m + 2],
            uvs,
        });
    }
    Mesh::new(vertices, facets).unwrap()
}

/// Flat `[m, x, y, z, c]` index.
pub fn tidx(ts: usize, m: usize, x: usize, y: usize, z: usize, c: usize) -> usize {
    ((((m * ts + x) * ts + y) * ts + z) * 3) + c
}

/// Border-clamped bilinear read at continuous pixel coords (pixel centers on
/// integers).
fn bilinear_ref(img: &Image, a: f64, b: f64) -> [f64; 3] {
    let (w, h) = img.dims();
    let mut out = [0.0; 3];
    let (fa, fb) = (a.floor(), b.floor());
    for (dx, dy) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        let (px, py) = (fa + dx, fb + dy);
        let wgt = (1.0 - (px - a).abs()) * (1.0 - (py - b).abs());
        let cx = px.clamp(0.0, (w - 1) as f64) as usize;
        let cy = py.clamp(0.0, (h - 1) as f64) as usize;
        let p = img.get(cx, cy);
        for c in 0..3 {
            out[c] += wgt * p[c];
        }
    }
    out
}

/// Where texel `(x, y, z)` of facet `m` lands on a `w x h` UV map.
fn texel_position(mesh: &Mesh, m: usize, t: [usize; 3], w: usize, h: usize) -> (f64, f64) {
    let uvs = mesh.facet(m).uvs;
    let s = (t[0] + t[1] + t[2]) as f64;
    let (u, v) = if s == 0.0 {
        (uvs[0][0], uvs[0][1])
    } else {
        let mut u = 0.0;
        let mut v = 0.0;
        for k in 0..3 {
            u += t[k] as f64 / s * uvs[k][0];
            v += t[k] as f64 / s * uvs[k][1];
        }
        (u, v)
    };
    (u * w as f64 - 0.5, v * h as f64 - 0.5)
}

/// Texel-driven gather.
pub fn oracle_tensor_traversal(uv: &Image, mesh: &Mesh, ts: usize) -> Vec<f64> {
    let nf = mesh.facet_count();
    let (w, h) = uv.dims();
    let mut out = vec![0.0; nf * ts * ts * ts * 3];
    for m in 0..nf {
        for x in 0..ts {
            for y in 0..ts {
                for z in 0..ts {
                    let (a, b) = texel_position(mesh, m, [x, y, z], w, h);
                    let v = bilinear_ref(uv, a, b);
                    for c in 0..3 {
                        out[tidx(ts, m, x, y, z, c)] = v[c];
                    }
                }
            }
        }
    }
    out
}

/// Barycentrics by Cramer's rule on `p - a = l1 (b - a) + l2 (c - a)`.
pub fn bary_ref(t: &[[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let (e1, e2) = ([t[1][0] - t[0][0], t[1][1] - t[0][1]], [t[2][0] - t[0][0], t[2][1] - t[0][1]]);
    let d = [p[0] - t[0][0], p[1] - t[0][1]];
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    let l1 = (d[0] * e2[1] - d[1] * e2[0]) / det;
    let l2 = (e1[0] * d[1] - e1[1] * d[0]) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Owner facet and barycentrics of every UV pixel: first facet (lowest id)
/// whose closed UV triangle contains the pixel center.
pub fn oracle_ownership(mesh: &Mesh, w: usize, h: usize) -> Vec<Option<(usize, [f64; 3])>> {
    let mut out = vec![None; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = [(x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / h as f64];
            for m in 0..mesh.facet_count() {
                let t = mesh.facet(m).uvs;
                if uv_area2(&t).abs() < 1e-14 {
                    continue;
                }
                let l = bary_ref(&t, p);
                if l.iter().all(|&c| c >= -1e-12) {
                    let l = l.map(|c| c.max(0.0));
                    let s: f64 = l.iter().sum();
                    out[y * w + x] = Some((m, l.map(|c| c / s)));
                    break;
                }
            }
        }
    }
    out
}

/// The 8 trilinear corners `(x, y, z, weight)` around `coord`, clamped to
/// the cube.
pub fn corners_ref(coord: [f64; 3], ts: usize) -> Vec<([usize; 3], f64)> {
    let mut out = Vec::with_capacity(8);
    let f = coord.map(f64::floor);
    for dz in 0..2 {
        for dy in 0..2 {
            for dx in 0..2 {
                let p = [f[0] + dx as f64, f[1] + dy as f64, f[2] + dz as f64];
                let mut wgt = 1.0;
                for k in 0..3 {
                    wgt *= 1.0 - (p[k] - coord[k]).abs();
                }
                out.push((p.map(|v| v.clamp(0.0, (ts - 1) as f64) as usize), wgt));
            }
        }
    }
    out
}

/// Pixel-driven scatter with weighted-mean normalization; unreached texels
/// take the texel-driven value.
pub fn oracle_uv_traversal(uv: &Image, mesh: &Mesh, ts: usize) -> Vec<f64> {
    let nf = mesh.facet_count();
    let (w, h) = uv.dims();
    let n = nf * ts * ts * ts;
    let mut sum = vec![0.0; n * 3];
    let mut weight = vec![0.0; n];
    for (i, own) in oracle_ownership(mesh, w, h).into_iter().enumerate() {
        let Some((m, l)) = own else { continue };
        let color = uv.get(i % w, i / w);
        let coord = l.map(|c| c * (ts - 1) as f64);
        for (t, wgt) in corners_ref(coord, ts) {
            let id = tidx(ts, m, t[0], t[1], t[2], 0) / 3;
            weight[id] += wgt;
            for c in 0..3 {
                sum[3 * id + c] += wgt * color[c];
            }
        }
    }
    let fallback = oracle_tensor_traversal(uv, mesh, ts);
    let mut out = vec![0.0; n * 3];
    for id in 0..n {
        for c in 0..3 {
            out[3 * id + c] = if weight[id] == 0.0 {
                fallback[3 * id + c]
            } else {
                sum[3 * id + c] / weight[id]
            };
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Screen-space vertex from the pinhole model: `(x, y, ndc depth, view depth)`.
fn project_ref(cam: &CameraTransform, p: [f64; 3]) -> Option<[f64; 4]> {
    let (az, el) = (cam.azimuth.to_radians(), cam.elevation.to_radians());
    let eye = [
        cam.distance * el.cos() * az.cos(),
        cam.distance * el.cos() * az.sin(),
        cam.distance * el.sin(),
    ];
    let norm = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        v.map(|c| c / n)
    };
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let fwd = norm(eye.map(|c| -c));
    let right = norm(cross(fwd, [0.0, 0.0, 1.0]));
    let up = cross(right, fwd);
    let d = [p[0] - eye[0], p[1] - eye[1], p[2] - eye[2]];
    let (xv, yv, depth) = (dot(d, right), dot(d, up), dot(d, fwd));
    if depth < NEAR_PLANE {
        return None;
    }
    let f = 1.0 / (cam.field_of_view.to_radians() / 2.0).tan();
    let aspect = cam.image_width as f64 / cam.image_height as f64;
    let (n, fr) = (NEAR_PLANE, FAR_PLANE);
    let zc = (fr + n) / (fr - n) * depth - 2.0 * fr * n / (fr - n);
    Some([
        (f / aspect * xv / depth + 1.0) * 0.5 * cam.image_width as f64,
        (1.0 - f * yv / depth) * 0.5 * cam.image_height as f64,
        zc / depth,
        depth,
    ])
}

pub struct RefRender {
    /// Color per pixel, `None` for background.
    pub pixels: Vec<Option<[f64; 3]>>,
    /// Pixels whose winner is numerically ambiguous (center on an edge or a
    /// depth near-tie) and are excluded from comparisons.
    pub ambiguous: Vec<bool>,
}

/// Half-space rasterizer over every pixel and every facet.
pub fn oracle_render(mesh: &Mesh, tex: &[f64], ts: usize, cam: &CameraTransform) -> RefRender {
    let (w, h) = (cam.image_width, cam.image_height);
    let proj: Vec<Option<[[f64; 4]; 3]>> = (0..mesh.facet_count())
        .map(|m| {
            let pos = mesh.facet_positions(m);
            Some([project_ref(cam, pos[0])?, project_ref(cam, pos[1])?, project_ref(cam, pos[2])?])
        })
        .collect();
    let mut pixels = vec![None; w * h];
    let mut ambiguous = vec![false; w * h];
    for py in 0..h {
        for px in 0..w {
            let p = [px as f64 + 0.5, py as f64 + 0.5];
            let mut best: Option<(f64, usize, [f64; 3])> = None;
            let mut near_edge = false;
            let mut depths = Vec::new();
            for (m, v) in proj.iter().enumerate() {
                let Some(v) = v else { continue };
                let tri = [[v[0][0], v[0][1]], [v[1][0], v[1][1]], [v[2][0], v[2][1]]];
                if uv_area2(&tri).abs() < 1e-12 {
                    continue;
                }
                let l = bary_ref(&tri, p);
                let lo = l.iter().cloned().fold(f64::INFINITY, f64::min);
                if lo.abs() < 1e-7 {
                    near_edge = true;
                }
                if lo < -1e-10 {
                    continue;
                }
                let z = l[0] * v[0][2] + l[1] * v[1][2] + l[2] * v[2][2];
                if !(-1.0..=1.0).contains(&z) {
                    continue;
                }
                depths.push(z);
                if best.map_or(true, |(bz, _, _)| z < bz - 1e-12) {
                    let q = [l[0] / v[0][3], l[1] / v[1][3], l[2] / v[2][3]];
                    let s = q[0] + q[1] + q[2];
                    best = Some((z, m, q.map(|c| c / s)));
                }
            }
            let Some((bz, m, bary)) = best else {
                ambiguous[py * w + px] = near_edge;
                continue;
            };
            depths.sort_by(f64::total_cmp);
            let tie = depths.windows(2).any(|d| (d[1] - d[0]).abs() < 1e-9 && (d[0] - bz).abs() < 1e-9);
            ambiguous[py * w + px] = near_edge || tie;
            let coord = bary.map(|c| c * (ts - 1) as f64);
            let mut color = [0.0; 3];
            for (t, wgt) in corners_ref(coord, ts) {
                for c in 0..3 {
                    color[c] += wgt * tex[tidx(ts, m, t[0], t[1], t[2], c)];
                }
            }
            pixels[py * w + px] = Some(color);
        }
    }
    RefRender { pixels, ambiguous }
}

/// Relative error with a small absolute floor so exact zeros compare equal.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

pub const FD_H: f64 = 1e-4;

/// Central difference of `f` along coordinate `i` of `x`.
pub fn central_diff(x: &[f64], i: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut xp = x.to_vec();
    xp[i] += FD_H;
    let fp = f(&xp);
    xp[i] = x[i] - FD_H;
    let fm = f(&xp);
    (fp - fm) / (2.0 * FD_H)
}

/// `n` coordinates: half drawn from where `grad` is non-zero, the rest
/// uniformly.
pub fn sample_coords(grad: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let nz: Vec<usize> = (0..grad.len()).filter(|&i| grad[i] != 0.0).collect();
    (0..n)
        .map(|k| {
            if k % 2 == 0 && !nz.is_empty() {
                nz[rng.gen_range(0..nz.len())]
            } else {
                rng.gen_range(0..grad.len())
            }
        })
        .collect()
}

/// Asserts `grad` matches central differences of `f` on `n` sampled
/// coordinates; returns the worst relative error.
pub fn check_gradient(
    name: &str,
    x: &[f64],
    grad: &[f64],
    n: usize,
    seed: u64,
    mut f: impl FnMut(&[f64]) -> f64,
) -> f64 {
    assert_eq!(x.len(), grad.len(), "{name}: gradient length");
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for i in sample_coords(grad, n, &mut r) {
        let num = central_diff(x, i, &mut f);
        let e = rel_err(grad[i], num);
        assert!(e < 1e-3, "{name}: coordinate {i}: analytic {} vs numeric {num} (rel {e})", grad[i]);
        worst = worst.max(e);
    }
    worst
}
