//! Object, part and background masks.

use crate::error::{Error, Result};

/// Fraction of a part mask's pixels that must lie inside its object mask.
pub const PART_CONTAINMENT: f64 = 0.99;

/// Binary raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; (width * height) as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != (width * height) as usize {
            return Err(Error::Contract(format!(
                "{} bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[(y * self.width + x) as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

/// Grayscale probability surface with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl ImportanceMap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Contract("importance map must be non-empty".into()));
        }
        if values.len() != (width * height) as usize {
            return Err(Error::Contract(format!(
                "{} values for a {width}x{height} importance map",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Contract(format!(
                "importance value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: u32, height: u32, value: f64) -> Self {
        Self {
            width,
            height,
            values: vec![value.clamp(0.0, 1.0); (width * height) as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[(y * self.width + x) as usize]
    }

    pub fn has_mass(&self) -> bool {
        self.values.iter().any(|&v| v > 0.0)
    }
}

/// Pixelwise complement of the union of the object masks.
pub fn derive_background(object_masks: &[BinaryMask]) -> Result<BinaryMask> {
    let first = object_masks
        .first()
        .ok_or_else(|| Error::Contract("derive_background needs at least one mask".into()))?;
    let mut union = BinaryMask::new(first.width, first.height, false);
    for mask in object_masks {
        if mask.dims() != first.dims() {
            return Err(Error::dims(first.dims(), mask.dims()));
        }
        for (u, &b) in union.bits.iter_mut().zip(&mask.bits) {
            *u |= b;
        }
    }
    Ok(union.complement())
}

/// Pixel is set iff the map value strictly exceeds `threshold`.
pub fn binarize(map: &ImportanceMap, threshold: f64) -> Result<BinaryMask> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Contract(format!(
            "binarize threshold {threshold} must lie in (0, 1)"
        )));
    }
    Ok(BinaryMask {
        width: map.width,
        height: map.height,
        bits: map.values.iter().map(|&v| v > threshold).collect(),
    })
}

/// Two-level mask hierarchy: objects, their parts, and the background.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    pub width: u32,
    pub height: u32,
    pub object_masks: Vec<BinaryMask>,
    /// `part_masks[i]` holds the fine-grained masks of object `i`.
    pub part_masks: Vec<Vec<BinaryMask>>,
    pub background_mask: BinaryMask,
}

impl MaskSet {
    /// Builds a set from object and part masks, deriving the background.
    pub fn new(object_masks: Vec<BinaryMask>, part_masks: Vec<Vec<BinaryMask>>) -> Result<Self> {
        let background_mask = derive_background(&object_masks)?;
        if part_masks.len() > object_masks.len() {
            return Err(Error::CountMismatch(format!(
                "{} part lists for {} objects",
                part_masks.len(),
                object_masks.len()
            )));
        }
        let mut part_masks = part_masks;
        part_masks.resize(object_masks.len(), Vec::new());
        let (width, height) = background_mask.dims();
        for part in part_masks.iter().flatten() {
            if part.dims() != (width, height) {
                return Err(Error::dims((width, height), part.dims()));
            }
        }
        Ok(Self {
            width,
            height,
            object_masks,
            part_masks,
            background_mask,
        })
    }

    /// No objects: the background covers the whole canvas.
    pub fn whole_canvas(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            object_masks: Vec::new(),
            part_masks: Vec::new(),
            background_mask: BinaryMask::new(width, height, true),
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn object_count(&self) -> usize {
        self.object_masks.len()
    }

    pub fn part_count(&self) -> usize {
        self.part_masks.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaskViolation {
    Dimension {
        mask: String,
        expected: (u32, u32),
        got: (u32, u32),
    },
    /// Background disagrees with the complement of the object union.
    Background {
        mismatched_pixels: usize,
    },
    PartLeak {
        object: usize,
        part: usize,
        outside_fraction: f64,
    },
    PartListCount {
        objects: usize,
        part_lists: usize,
    },
}

impl std::fmt::Display for MaskViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaskViolation::Dimension {
                mask,
                expected,
                got,
            } => write!(
                f,
                "dimension: {mask} is {}x{}, canvas is {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            MaskViolation::Background { mismatched_pixels } => write!(
                f,
                "background: {mismatched_pixels} pixels differ from the complement of the object union"
            ),
            MaskViolation::PartLeak {
                object,
                part,
                outside_fraction,
            } => write!(
                f,
                "subset: part {part} of object {object} has {:.2}% of its pixels outside the object",
                outside_fraction * 100.0
            ),
            MaskViolation::PartListCount {
                objects,
                part_lists,
            } => write!(f, "count: {part_lists} part lists for {objects} objects"),
        }
    }
}

/// Checks every [`MaskSet`] invariant; an empty report means the set is well formed.
pub fn validate(set: &MaskSet) -> Vec<MaskViolation> {
    let mut report = Vec::new();
    let canvas = set.dims();
    let mut dims_ok = true;
    let mut check = |name: String, mask: &BinaryMask| {
        if mask.dims() != canvas {
            report.push(MaskViolation::Dimension {
                mask: name,
                expected: canvas,
                got: mask.dims(),
            });
            false
        } else {
            true
        }
    };
    for (i, m) in set.object_masks.iter().enumerate() {
        dims_ok &= check(format!("object {i}"), m);
    }
    for (i, parts) in set.part_masks.iter().enumerate() {
        for (j, m) in parts.iter().enumerate() {
            dims_ok &= check(format!("part {i}/{j}"), m);
        }
    }
    dims_ok &= check("background".into(), &set.background_mask);
    if set.part_masks.len() != set.object_masks.len() {
        report.push(MaskViolation::PartListCount {
            objects: set.object_masks.len(),
            part_lists: set.part_masks.len(),
        });
    }
    if !dims_ok {
        return report;
    }

    let n = (canvas.0 * canvas.1) as usize;
    let mismatched_pixels = (0..n)
        .filter(|&k| {
            let covered = set.object_masks.iter().any(|m| m.bits[k]);
            set.background_mask.bits[k] == covered
        })
        .count();
    if mismatched_pixels > 0 {
        report.push(MaskViolation::Background { mismatched_pixels });
    }

    for (i, parts) in set.part_masks.iter().enumerate() {
        let Some(object) = set.object_masks.get(i) else {
            continue;
        };
        for (j, part) in parts.iter().enumerate() {
            let total = part.count();
            if total == 0 {
                continue;
            }
            let outside = part
                .bits
                .iter()
                .zip(&object.bits)
                .filter(|(&p, &o)| p && !o)
                .count();
            let outside_fraction = outside as f64 / total as f64;
            if outside_fraction > 1.0 - PART_CONTAINMENT + 1e-12 {
                report.push(MaskViolation::PartLeak {
                    object: i,
                    part: j,
                    outside_fraction,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn left_half_background_is_right_half() {
        let left = BinaryMask::from_fn(8, 4, |x, _| x < 4);
        let bg = derive_background(&[left]).unwrap();
        assert_eq!(bg, BinaryMask::from_fn(8, 4, |x, _| x >= 4));
    }

    #[test]
    fn tiling_masks_leave_no_background() {
        let a = BinaryMask::from_fn(6, 6, |x, _| x < 3);
        let b = BinaryMask::from_fn(6, 6, |x, _| x >= 3);
        assert_eq!(derive_background(&[a, b]).unwrap().count(), 0);
    }

    #[test]
    fn background_rejects_mismatched_dims() {
        let a = BinaryMask::new(4, 4, true);
        let b = BinaryMask::new(4, 5, true);
        assert!(matches!(
            derive_background(&[a, b]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(derive_background(&[]).is_err());
    }

    #[test]
    fn binarize_is_strict() {
        let map = ImportanceMap::uniform(4, 4, 0.6);
        assert_eq!(binarize(&map, 0.5).unwrap().count(), 16);
        let map = ImportanceMap::uniform(4, 4, 0.5);
        assert_eq!(binarize(&map, 0.5).unwrap().count(), 0);
        assert!(binarize(&map, 1.0).is_err());
    }

    #[test]
    fn binarize_ramp_count() {
        let values: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let map = ImportanceMap::new(10, 10, values.clone()).unwrap();
        for t in [0.1, 0.37, 0.5, 0.93] {
            let direct = values.iter().filter(|&&v| v > t).count();
            assert_eq!(binarize(&map, t).unwrap().count(), direct);
        }
    }

    #[test]
    fn validate_reports() {
        let obj = BinaryMask::from_fn(10, 10, |x, y| x < 5 && y < 10);
        let part = BinaryMask::from_fn(10, 10, |x, y| x < 2 && y < 10);
        let good = MaskSet::new(vec![obj.clone()], vec![vec![part]]).unwrap();
        assert!(validate(&good).is_empty());

        // 20 pixels, one of them outside the object: 5% leak
        let mut leaky = BinaryMask::from_fn(10, 10, |x, y| x < 2 && y < 10);
        leaky.set(1, 0, false);
        leaky.set(7, 0, true);
        let mut bad = good.clone();
        bad.part_masks[0][0] = leaky;
        assert!(matches!(
            validate(&bad).as_slice(),
            [MaskViolation::PartLeak {
                object: 0,
                part: 0,
                ..
            }]
        ));

        let mut bad = good.clone();
        bad.object_masks.push(BinaryMask::new(9, 10, false));
        bad.part_masks.push(Vec::new());
        assert!(validate(&bad)
            .iter()
            .any(|v| matches!(v, MaskViolation::Dimension { .. })));
    }

    fn arb_masks() -> impl Strategy<Value = Vec<BinaryMask>> {
        (1usize..4).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), 48), n).prop_map(
                |sets| {
                    sets.into_iter()
                        .map(|bits| BinaryMask::from_bits(8, 6, bits).unwrap())
                        .collect()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn complement_laws(masks in arb_masks()) {
            let bg = derive_background(&masks).unwrap();
            for k in 0..48 {
                let covered = masks.iter().any(|m| m.bits()[k]);
                prop_assert!(covered || bg.bits()[k]);
                prop_assert!(!(covered && bg.bits()[k]));
            }
            // complementing twice recovers the union
            let union = derive_background(&[bg]).unwrap();
            for k in 0..48 {
                prop_assert_eq!(union.bits()[k], masks.iter().any(|m| m.bits()[k]));
            }
        }

        #[test]
        fn binarize_monotone(values in proptest::collection::vec(0.0f64..=1.0, 36),
                             t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
            let map = ImportanceMap::new(6, 6, values).unwrap();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = binarize(&map, lo).unwrap();
            let b = binarize(&map, hi).unwrap();
            for k in 0..36 {
                prop_assert!(!b.bits()[k] || a.bits()[k]);
            }
        }
    }
}
