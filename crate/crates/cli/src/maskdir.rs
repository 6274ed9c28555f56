//! Mask directories: `object_<i>.png`, `part_<i>_<j>.png` and an optional
//! `background.png`. Indices start at 0 and must be contiguous. Other files
//! are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use maskvec::io::read_mask;
use maskvec::masks::{derive_background, BinaryMask, MaskSet};
use maskvec::{Error, Result};

enum Entry {
    Object(usize),
    Part(usize, usize),
    Background,
}

fn classify(name: &str) -> Option<Entry> {
    let stem = name.strip_suffix(".png")?;
    if stem == "background" {
        return Some(Entry::Background);
    }
    if let Some(i) = stem.strip_prefix("object_") {
        return i.parse().ok().map(Entry::Object);
    }
    let (i, j) = stem.strip_prefix("part_")?.split_once('_')?;
    Some(Entry::Part(i.parse().ok()?, j.parse().ok()?))
}

fn contiguous<T>(map: BTreeMap<usize, T>, what: &str, dir: &Path) -> Result<Vec<T>> {
    if let Some((missing, _)) = map.keys().enumerate().find(|(i, k)| i != *k) {
        return Err(Error::CountMismatch(format!(
            "{}: {what} index {missing} is missing",
            dir.display()
        )));
    }
    Ok(map.into_values().collect())
}

/// Loads every mask in `dir`. Dimension disagreements are kept in the set
/// so that `masks::validate` can report them.
pub fn load(dir: &Path) -> Result<MaskSet> {
    let listing = std::fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut objects = BTreeMap::new();
    let mut parts: BTreeMap<usize, BTreeMap<usize, BinaryMask>> = BTreeMap::new();
    let mut background = None;
    for entry in listing {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let name = entry.file_name();
        let Some(kind) = name.to_str().and_then(classify) else {
            continue;
        };
        let mask = read_mask(entry.path())?;
        match kind {
            Entry::Object(i) => {
                objects.insert(i, mask);
            }
            Entry::Part(i, j) => {
                parts.entry(i).or_default().insert(j, mask);
            }
            Entry::Background => background = Some(mask),
        }
    }
    let object_masks = contiguous(objects, "object", dir)?;
    let Some(first) = object_masks.first() else {
        return Err(Error::Contract(format!(
            "{}: no object_<i>.png masks found",
            dir.display()
        )));
    };
    let (width, height) = first.dims();
    let mut part_masks = Vec::new();
    for (i, list) in parts {
        part_masks.resize_with(part_masks.len().max(i + 1), Vec::new);
        part_masks[i] = contiguous(list, &format!("part_{i}"), dir)?;
    }
    if part_masks.len() < object_masks.len() {
        part_masks.resize_with(object_masks.len(), Vec::new);
    }
    let background_mask = match background {
        Some(mask) => mask,
        None => {
            let same: Vec<BinaryMask> = object_masks
                .iter()
                .filter(|m| m.dims() == (width, height))
                .cloned()
                .collect();
            derive_background(&same)?
        }
    };
    Ok(MaskSet {
        width,
        height,
        object_masks,
        part_masks,
        background_mask,
    })
}
