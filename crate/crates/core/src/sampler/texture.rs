use crate::error::{Error, Result};

/// Face-aligned texture cube per facet, `[nf, ts, ts, ts, 3]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetTexture {
    nf: usize,
    ts: usize,
    data: Vec<f64>,
}

impl FacetTexture {
    pub fn zeros(nf: usize, ts: usize) -> Self {
        Self {
            nf,
            ts,
            data: vec![0.0; nf * ts * ts * ts * 3],
        }
    }

    pub fn filled(nf: usize, ts: usize, rgb: [f64; 3]) -> Self {
        let mut t = Self::zeros(nf, ts);
        for texel in t.data.chunks_exact_mut(3) {
            texel.copy_from_slice(&rgb);
        }
        t
    }

    pub fn from_vec(nf: usize, ts: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nf * ts * ts * ts * 3 {
            return Err(Error::shape(
                format!("[{nf}, {ts}, {ts}, {ts}, 3]"),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self { nf, ts, data })
    }

    pub fn facet_count(&self) -> usize {
        self.nf
    }

    pub fn texture_size(&self) -> usize {
        self.ts
    }

    pub fn texels_per_facet(&self) -> usize {
        self.ts * self.ts * self.ts
    }

    pub fn texel_count(&self) -> usize {
        self.nf * self.texels_per_facet()
    }

    /// Flat texel id of `(m, x, y, z)`.
    #[inline]
    pub fn texel_id(&self, m: usize, x: usize, y: usize, z: usize) -> usize {
        ((m * self.ts + x) * self.ts + y) * self.ts + z
    }

    #[inline]
    pub fn texel(&self, id: usize) -> [f64; 3] {
        [self.data[3 * id], self.data[3 * id + 1], self.data[3 * id + 2]]
    }

    pub fn get(&self, m: usize, x: usize, y: usize, z: usize) -> [f64; 3] {
        self.texel(self.texel_id(m, x, y, z))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn dot(&self, other: &FacetTexture) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &FacetTexture) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Trilinear read of facet `m`'s cube at continuous texel coordinate
    /// `coord`, evaluated as nested lerps (equal to the [`trilinear_taps`]
    /// weighted sum, exact for constant cubes).
    pub fn trilinear_read(&self, m: usize, coord: [f64; 3]) -> [f64; 3] {
        let last = self.ts - 1;
        let base = coord.map(|c| c.floor());
        let frac = [coord[0] - base[0], coord[1] - base[1], coord[2] - base[2]];
        let lo = base.map(|b| (b.max(0.0) as usize).min(last));
        let hi = base.map(|b| ((b + 1.0).max(0.0) as usize).min(last));
        let at = |x: usize, y: usize, z: usize| self.get(m, x, y, z);
        let lerp = super::tensor_traversal::lerp3;
        let c00 = lerp(at(lo[0], lo[1], lo[2]), at(hi[0], lo[1], lo[2]), frac[0]);
        let c10 = lerp(at(lo[0], hi[1], lo[2]), at(hi[0], hi[1], lo[2]), frac[0]);
        let c01 = lerp(at(lo[0], lo[1], hi[2]), at(hi[0], lo[1], hi[2]), frac[0]);
        let c11 = lerp(at(lo[0], hi[1], hi[2]), at(hi[0], hi[1], hi[2]), frac[0]);
        let c0 = lerp(c00, c10, frac[1]);
        let c1 = lerp(c01, c11, frac[1]);
        lerp(c0, c1, frac[2])
    }

    pub fn ensure_shape(&self, nf: usize, ts: usize) -> Result<()> {
        if self.nf != nf || self.ts != ts {
            return Err(Error::shape(
                format!("[{nf}, {ts}, {ts}, {ts}, 3]"),
                format!("[{}, {}, {}, {}, 3]", self.nf, self.ts, self.ts, self.ts),
            ));
        }
        Ok(())
    }
}

/// Accumulated scatter weights `[nf, ts, ts, ts]` from UV-traversal sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    nf: usize,
    ts: usize,
    data: Vec<f64>,
}

impl WeightTensor {
    pub fn zeros(nf: usize, ts: usize) -> Self {
        Self {
            nf,
            ts,
            data: vec![0.0; nf * ts * ts * ts],
        }
    }

    pub fn facet_count(&self) -> usize {
        self.nf
    }

    pub fn texture_size(&self) -> usize {
        self.ts
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, id: usize) -> f64 {
        self.data[id]
    }
}

/// Texel id and weight of one interpolation corner.
pub type Tap = (usize, f64);

/// Corner offsets in the order p0..p7: (0,0,0), (1,0,0), (0,1,0), (0,0,1),
/// (1,1,0), (1,0,1), (0,1,1), (1,1,1).
const CUBE_CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, 0, 1],
    [0, 1, 1],
    [1, 1, 1],
];

/// Trilinear taps of facet `m`'s cube at continuous texel coordinate
/// `coord` (each axis in `[0, ts-1]`). Corner weight is
/// `prod(1 - |corner - coord|)`; indices past the last texel clamp to `ts-1`.
pub fn trilinear_taps(m: usize, coord: [f64; 3], ts: usize) -> [Tap; 8] {
    let base = coord.map(|c| c.floor());
    let last = ts - 1;
    CUBE_CORNERS.map(|off| {
        let mut w = 1.0;
        let mut idx = [0usize; 3];
        for k in 0..3 {
            let p = base[k] + off[k] as f64;
            w *= 1.0 - (p - coord[k]).abs();
            idx[k] = (p.max(0.0) as usize).min(last);
        }
        (((m * ts + idx[0]) * ts + idx[1]) * ts + idx[2], w)
    })
}
