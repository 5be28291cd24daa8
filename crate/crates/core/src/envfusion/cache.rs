//! Content-addressed on-disk store of raw renders keyed by (camera, color).

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::CameraTransform;
use crate::imaging::{ForegroundMask, Image};
use crate::renderer::RenderedImage;

const MAGIC: &[u8; 4] = b"RIMG";

/// Renders depend only on camera and vehicle color (plus the fixed mesh and
/// texture, folded into `context`), never on placement or weather.
#[derive(Debug, Clone)]
pub struct RenderCache {
    dir: PathBuf,
    context: Vec<u8>,
}

impl RenderCache {
    pub fn new(dir: impl Into<PathBuf>, context: &[u8]) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            context: context.to_vec(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(&self, cam: &CameraTransform, color: [f64; 3]) -> String {
        let mut h = Sha256::new();
        h.update(&self.context);
        for v in [cam.azimuth, cam.elevation, cam.distance, cam.field_of_view] {
            h.update(v.to_le_bytes());
        }
        h.update((cam.image_width as u64).to_le_bytes());
        h.update((cam.image_height as u64).to_le_bytes());
        for c in color {
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.rimg"))
    }

    /// Returns the cached render, or calls `render` and stores the result.
    /// The boolean is true on a cache hit.
    pub fn get_or_render(
        &self,
        cam: &CameraTransform,
        color: [f64; 3],
        render: impl FnOnce() -> Result<RenderedImage>,
    ) -> Result<(RenderedImage, bool)> {
        let path = self.path_for(&self.key(cam, color));
        if path.exists() {
            return Ok((read_render(&path)?, true));
        }
        let img = render()?;
        write_render(&img, &path)?;
        Ok((img, false))
    }
}

pub fn write_render(img: &RenderedImage, path: impl AsRef<Path>) -> Result<()> {
    let (w, h) = img.dims();
    let mut buf = Vec::with_capacity(12 + img.image.data().len() * 8 + w * h);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(w as u32).to_le_bytes());
    buf.extend_from_slice(&(h as u32).to_le_bytes());
    for v in img.image.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend(img.foreground.bits().iter().map(|&b| b as u8));
    // Write then rename so concurrent readers never see a partial file.
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    std::fs::File::create(&tmp)?.write_all(&buf)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn read_render(path: impl AsRef<Path>) -> Result<RenderedImage> {
    let mut bytes = Vec::new();
    std::fs::File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    let bad = || Error::Invalid(format!("corrupt render cache file {}", path.as_ref().display()));
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(bad());
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n = w * h;
    if bytes.len() != 12 + n * 3 * 8 + n {
        return Err(bad());
    }
    let data = bytes[12..12 + n * 24]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let bits = bytes[12 + n * 24..].iter().map(|&b| b != 0).collect();
    Ok(RenderedImage {
        image: Image::from_vec(w, h, data)?,
        foreground: ForegroundMask::from_vec(w, h, bits)?,
    })
}
