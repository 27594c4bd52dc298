//! Field files: row-major little-endian `f64` pairs `(re, im)` with a JSON
//! sidecar `{"L": .., "n": ..}`.

use anyhow::{bail, Context, Result};
use anyonlab_core::meanfield::{ComplexField2D, GridSpec};
use num_complex::Complex64;
use std::path::{Path, PathBuf};

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `path` and its sidecar `path.with_extension("json")`.
pub fn write_field(path: &Path, u: &ComplexField2D) -> Result<()> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let mut bytes = Vec::with_capacity(16 * u.values.len());
    for z in &u.values {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    let side = sidecar_path(path);
    let meta = serde_json::to_string(&GridSpec { l: u.l, n: u.n })?;
    std::fs::write(&side, meta).with_context(|| format!("writing {}", side.display()))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ComplexField2D> {
    let side = sidecar_path(path);
    let meta: GridSpec = serde_json::from_str(
        &std::fs::read_to_string(&side).with_context(|| format!("reading {}", side.display()))?,
    )
    .with_context(|| format!("parsing {}", side.display()))?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() != 16 * meta.n * meta.n {
        bail!("{}: {} bytes, expected {} for n = {}", path.display(), bytes.len(), 16 * meta.n * meta.n, meta.n);
    }
    let mut u = ComplexField2D::zeros(meta.l, meta.n)?;
    for (z, c) in u.values.iter_mut().zip(bytes.chunks_exact(16)) {
        let re = f64::from_le_bytes(c[..8].try_into().unwrap());
        let im = f64::from_le_bytes(c[8..].try_into().unwrap());
        *z = Complex64::new(re, im);
    }
    Ok(u)
}
