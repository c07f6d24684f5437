use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{HarnessError, Scene};
use crate::imagedata::{load_pgm16, load_ppm, save_pgm16, save_ppm};

/// Writes `NNN_rgb.ppm` / `NNN_depth.pgm` pairs named by scene id.
pub fn save_dataset(dir: impl AsRef<Path>, scenes: &[Scene]) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for s in scenes {
        save_ppm(&s.rgb, dir.join(format!("{:03}_rgb.ppm", s.id)))?;
        save_pgm16(&s.depth, dir.join(format!("{:03}_depth.pgm", s.id)))?;
    }
    Ok(())
}

/// Reads every `NNN_rgb.ppm` / `NNN_depth.pgm` pair in `dir`, ordered by
/// number. A half-present pair or a size mismatch is an error.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<Scene>, HarnessError> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut found: BTreeMap<u64, (Option<String>, Option<String>)> = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let file = entry.file_name();
        let Some(name) = file.to_str() else { continue };
        let (stem, is_rgb) = if let Some(stem) = name.strip_suffix("_rgb.ppm") {
            (stem, true)
        } else if let Some(stem) = name.strip_suffix("_depth.pgm") {
            (stem, false)
        } else {
            continue;
        };
        if stem.is_empty() || !stem.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let Ok(id) = stem.parse::<u64>() else {
            continue;
        };
        let slot = found.entry(id).or_default();
        if is_rgb {
            slot.0 = Some(name.to_string());
        } else {
            slot.1 = Some(name.to_string());
        }
    }
    if found.is_empty() {
        return Err(HarnessError::Dataset(format!(
            "no NNN_rgb.ppm / NNN_depth.pgm pairs in {}",
            dir.display()
        )));
    }
    let mut scenes = Vec::with_capacity(found.len());
    for (id, (rgb, depth)) in found {
        let (Some(rgb), Some(depth)) = (&rgb, &depth) else {
            return Err(HarnessError::Dataset(format!(
                "scene {id:03} in {} is missing its {} file",
                dir.display(),
                if rgb.is_some() { "depth" } else { "rgb" }
            )));
        };
        let rgb = load_ppm(dir.join(rgb))?;
        let depth = load_pgm16(dir.join(depth))?;
        if (rgb.width(), rgb.height()) != (depth.width(), depth.height()) {
            return Err(HarnessError::Dataset(format!(
                "scene {id:03}: rgb is {}x{} but depth is {}x{}",
                rgb.width(),
                rgb.height(),
                depth.width(),
                depth.height()
            )));
        }
        scenes.push(Scene { id, rgb, depth });
    }
    Ok(scenes)
}
