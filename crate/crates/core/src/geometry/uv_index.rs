//! Per-pixel ownership of the UV atlas.
//!
//! UV pixel `(x, y)` sits at the continuous UV coordinate
//! `((x + 0.5) / wt, (y + 0.5) / ht)`. A pixel is owned by the lowest-id
//! facet whose UV triangle contains that center (edges inclusive).

use std::io::{Read, Write};

use super::mesh::Mesh;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"UVIX";
const NO_OWNER: u32 = u32::MAX;
/// Slack on the inclusive point-in-triangle test, in barycentric units.
const INSIDE_EPS: f64 = 1e-12;

/// Continuous UV coordinate of a pixel center.
#[inline]
pub fn pixel_center_uv(x: usize, y: usize, wt: usize, ht: usize) -> [f64; 2] {
    [(x as f64 + 0.5) / wt as f64, (y as f64 + 0.5) / ht as f64]
}

/// Barycentric coordinates of `p` in triangle `tri`, or `None` for a
/// degenerate triangle.
pub fn barycentric_2d(tri: &[[f64; 2]; 3], p: [f64; 2]) -> Option<[f64; 3]> {
    let [a, b, c] = *tri;
    let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if area.abs() < super::mesh::UV_AREA_EPS {
        return None;
    }
    let l0 = ((b[0] - p[0]) * (c[1] - p[1]) - (b[1] - p[1]) * (c[0] - p[0])) / area;
    let l1 = ((c[0] - p[0]) * (a[1] - p[1]) - (c[1] - p[1]) * (a[0] - p[0])) / area;
    let l2 = ((a[0] - p[0]) * (b[1] - p[1]) - (a[1] - p[1]) * (b[0] - p[0])) / area;
    Some([l0, l1, l2])
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetUvIndex {
    width: usize,
    height: usize,
    owners: Vec<u32>,
    bary: Vec<[f64; 3]>,
}

impl FacetUvIndex {
    pub fn build(mesh: &Mesh, wt: usize, ht: usize) -> Result<Self> {
        if wt < 2 || ht < 2 {
            return Err(Error::Invalid(format!("UV map must be at least 2x2, got {wt}x{ht}")));
        }
        let mut owners = vec![NO_OWNER; wt * ht];
        let mut bary = vec![[0.0; 3]; wt * ht];
        for (m, facet) in mesh.facets().iter().enumerate() {
            if facet.is_uv_degenerate() {
                continue;
            }
            let tri = facet.uvs;
            // Pixel-center bounding box of the triangle.
            let (mut u0, mut u1, mut v0, mut v1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for uv in &tri {
                u0 = u0.min(uv[0]);
                u1 = u1.max(uv[0]);
                v0 = v0.min(uv[1]);
                v1 = v1.max(uv[1]);
            }
            let x0 = ((u0 * wt as f64 - 0.5).floor().max(0.0)) as usize;
            let x1 = ((u1 * wt as f64 - 0.5).ceil().max(0.0) as usize).min(wt - 1);
            let y0 = ((v0 * ht as f64 - 0.5).floor().max(0.0)) as usize;
            let y1 = ((v1 * ht as f64 - 0.5).ceil().max(0.0) as usize).min(ht - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let i = y * wt + x;
                    if owners[i] != NO_OWNER {
                        continue;
                    }
                    let p = pixel_center_uv(x, y, wt, ht);
                    let Some(l) = barycentric_2d(&tri, p) else { continue };
                    if l.iter().all(|&c| c >= -INSIDE_EPS) {
                        let clamped = l.map(|c| c.max(0.0));
                        let s: f64 = clamped.iter().sum();
                        owners[i] = m as u32;
                        bary[i] = clamped.map(|c| c / s);
                    }
                }
            }
        }
        Ok(Self {
            width: wt,
            height: ht,
            owners,
            bary,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn owner(&self, x: usize, y: usize) -> Option<usize> {
        match self.owners[y * self.width + x] {
            NO_OWNER => None,
            m => Some(m as usize),
        }
    }

    #[inline]
    pub fn barycentric(&self, x: usize, y: usize) -> [f64; 3] {
        self.bary[y * self.width + x]
    }

    pub fn owned_count(&self) -> usize {
        self.owners.iter().filter(|&&o| o != NO_OWNER).count()
    }

    /// Owned-pixel count per facet.
    pub fn owner_counts(&self, facet_count: usize) -> Vec<usize> {
        let mut counts = vec![0; facet_count];
        for &o in &self.owners {
            if o != NO_OWNER && (o as usize) < facet_count {
                counts[o as usize] += 1;
            }
        }
        counts
    }

    /// Largest facet id referenced, used to detect a mismatched mesh.
    pub fn max_owner(&self) -> Option<usize> {
        self.owners
            .iter()
            .filter(|&&o| o != NO_OWNER)
            .map(|&o| o as usize)
            .max()
    }

    /// Binary cache: `"UVIX"`, `u32` width, `u32` height, then per pixel a
    /// `u32` owner (`u32::MAX` = none) and three `f64` barycentrics, all
    /// little-endian.
    pub fn write_cache(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        w.write_all(&(self.height as u32).to_le_bytes())?;
        for (o, b) in self.owners.iter().zip(&self.bary) {
            w.write_all(&o.to_le_bytes())?;
            for c in b {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_cache(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Invalid("not a UVIX cache file".into()));
        }
        let width = read_u32(&mut r)? as usize;
        let height = read_u32(&mut r)? as usize;
        if width < 2 || height < 2 {
            return Err(Error::Invalid(format!("bad UVIX dims {width}x{height}")));
        }
        let n = width * height;
        let mut owners = Vec::with_capacity(n);
        let mut bary = Vec::with_capacity(n);
        let mut buf = [0u8; 8];
        for _ in 0..n {
            owners.push(read_u32(&mut r)?);
            let mut b = [0.0; 3];
            for c in &mut b {
                r.read_exact(&mut buf)?;
                *c = f64::from_le_bytes(buf);
            }
            bary.push(b);
        }
        Ok(Self {
            width,
            height,
            owners,
            bary,
        })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::Facet;
    use crate::geometry::primitives;

    fn single_facet(uvs: [[f64; 2]; 3]) -> Mesh {
        Mesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![Facet {
                vertices: [0, 1, 2],
                uvs,
            }],
        )
        .unwrap()
    }

    #[test]
    fn diagonal_split_covers_every_pixel() {
        let mesh = primitives::uv_quad();
        let idx = FacetUvIndex::build(&mesh, 16, 12).unwrap();
        assert_eq!(idx.owned_count(), 16 * 12);
        let counts = idx.owner_counts(2);
        assert_eq!(counts.iter().sum::<usize>(), 16 * 12);
    }

    #[test]
    fn small_facet_matches_brute_force() {
        let tri = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]];
        let idx = FacetUvIndex::build(&single_facet(tri), 8, 8).unwrap();
        // Independent inclusive sign test on all 64 centers.
        let mut expected = 0;
        for y in 0..8 {
            for x in 0..8 {
                let p = [(x as f64 + 0.5) / 8.0, (y as f64 + 0.5) / 8.0];
                let s = |a: [f64; 2], b: [f64; 2]| {
                    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
                };
                let (d0, d1, d2) = (s(tri[0], tri[1]), s(tri[1], tri[2]), s(tri[2], tri[0]));
                let inside = (d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0)
                    || (d0 <= 0.0 && d1 <= 0.0 && d2 <= 0.0);
                if inside {
                    expected += 1;
                }
                assert_eq!(idx.owner(x, y).is_some(), inside, "pixel ({x},{y})");
            }
        }
        assert_eq!(idx.owned_count(), expected);
        assert_eq!(expected, 10);
    }

    #[test]
    fn shared_edge_goes_to_lower_facet() {
        // The quad's diagonal u = v passes through centers (k, k).
        let mesh = primitives::uv_quad();
        let idx = FacetUvIndex::build(&mesh, 8, 8).unwrap();
        for k in 0..8 {
            assert_eq!(idx.owner(k, k), Some(0));
        }
    }

    #[test]
    fn degenerate_facet_owns_nothing() {
        let tri = [[0.1, 0.1], [0.2, 0.2], [0.3, 0.3]];
        let idx = FacetUvIndex::build(&single_facet(tri), 8, 8).unwrap();
        assert_eq!(idx.owned_count(), 0);
    }

    #[test]
    fn barycentrics_reconstruct_pixel_centers() {
        let mesh = primitives::box_vehicle([2.0, 1.0, 0.8]);
        let (wt, ht) = (48, 32);
        let idx = FacetUvIndex::build(&mesh, wt, ht).unwrap();
        assert!(idx.owned_count() > 0);
        for y in 0..ht {
            for x in 0..wt {
                let Some(m) = idx.owner(x, y) else { continue };
                let l = idx.barycentric(x, y);
                assert!(l.iter().all(|&c| c >= 0.0));
                assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-6);
                let uvs = mesh.facet(m).uvs;
                let p = pixel_center_uv(x, y, wt, ht);
                for axis in 0..2 {
                    let r: f64 = (0..3).map(|k| l[k] * uvs[k][axis]).sum();
                    assert!((r - p[axis]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn rejects_tiny_maps() {
        assert!(FacetUvIndex::build(&primitives::uv_quad(), 1, 8).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let mesh = primitives::box_vehicle([2.0, 1.0, 0.8]);
        let idx = FacetUvIndex::build(&mesh, 24, 16).unwrap();
        let mut buf = Vec::new();
        idx.write_cache(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"UVIX");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 24);
        assert_eq!(buf.len(), 12 + 24 * 16 * 28);
        let back = FacetUvIndex::read_cache(buf.as_slice()).unwrap();
        assert_eq!(back, idx);
        assert!(FacetUvIndex::read_cache(&b"NOPE"[..]).is_err());
    }
}
