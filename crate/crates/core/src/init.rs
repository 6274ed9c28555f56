//! Primitive initialization from an importance map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    polygon_points, Color, Point, PrimitiveKind, StyleClass, StyleConstraints, VectorPath,
};
use crate::masks::{BinaryMask, ImportanceMap};
use crate::raster::RasterImage;

/// Value of the importance map returned for images without any gradient.
pub const FLAT_IMPORTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct InitConfig {
    pub num_paths_per_region: usize,
    /// Cubic segments per path; paths carry `3 * segments + 1` points.
    pub segments_per_path: usize,
    /// Sampling radius of the non-leading control points, as a fraction of
    /// the larger canvas side.
    pub radius_fraction: f64,
    pub seed: u64,
    pub style: StyleClass,
    /// Initial width for stroke styles, in pixels.
    pub stroke_width: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            num_paths_per_region: 16,
            segments_per_path: 4,
            radius_fraction: 0.0005,
            seed: 0,
            style: StyleClass::Iconography,
            stroke_width: 1.5,
        }
    }
}

impl InitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths_per_region == 0 || self.segments_per_path == 0 {
            return Err(Error::Contract(
                "path and segment counts must be >= 1".into(),
            ));
        }
        if !(self.radius_fraction > 0.0 && self.radius_fraction < 0.1) {
            return Err(Error::Contract(format!(
                "radius_fraction {} must lie in (0, 0.1)",
                self.radius_fraction
            )));
        }
        if !(self.stroke_width > 0.0 && self.stroke_width.is_finite()) {
            return Err(Error::Contract(
                "initial stroke width must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Constraint record of a style: primitive kind and trainable attributes.
pub fn style_preset(style: StyleClass) -> StyleConstraints {
    style.constraints()
}

/// Rec. 601 luma.
fn luminance(p: [f64; 4]) -> f64 {
    0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
}

/// Sobel gradient magnitude of luminance, normalized so the maximum is 1.
///
/// Borders replicate the edge pixel. An image with no gradient at all maps
/// to the constant [`FLAT_IMPORTANCE`] so it still defines a distribution.
pub fn importance_from_image(target: &RasterImage) -> ImportanceMap {
    let (w, h) = target.dims();
    let lum: Vec<f64> = target
        .data()
        .chunks_exact(4)
        .map(|p| luminance([p[0], p[1], p[2], p[3]]))
        .collect();
    let at = |x: i64, y: i64| {
        let x = x.clamp(0, w as i64 - 1) as usize;
        let y = y.clamp(0, h as i64 - 1) as usize;
        lum[y * w as usize + x]
    };
    let mut mag = Vec::with_capacity(lum.len());
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            mag.push(gx.hypot(gy));
        }
    }
    let max = mag.iter().copied().fold(0.0, f64::max);
    if max <= 1e-12 {
        return ImportanceMap::uniform(w, h, FLAT_IMPORTANCE);
    }
    let values = mag.into_iter().map(|v| (v / max).clamp(0.0, 1.0)).collect();
    ImportanceMap::new(w, h, values).expect("normalized map is valid")
}

/// Draws pixels with probability proportional to their weight.
#[derive(Debug, Clone)]
pub(crate) struct PixelSampler {
    width: u32,
    cdf: Vec<f64>,
}

impl PixelSampler {
    /// `None` when every weight is zero.
    pub(crate) fn new(width: u32, weights: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut total = 0.0;
        let cdf: Vec<f64> = weights
            .into_iter()
            .map(|w| {
                total += w.max(0.0);
                total
            })
            .collect();
        (total > 0.0).then_some(Self { width, cdf })
    }

    /// Pixel center of one draw.
    pub(crate) fn sample(&self, rng: &mut impl Rng) -> Point {
        let total = *self.cdf.last().expect("non-empty sampler");
        let u = rng.gen::<f64>() * total;
        let k = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        let (x, y) = (k as u32 % self.width, k as u32 / self.width);
        Point::new(x as f64 + 0.5, y as f64 + 0.5)
    }
}

fn point_in_disk(center: Point, radius: f64, rng: &mut impl Rng) -> Point {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    center + Point::new(r * theta.cos(), r * theta.sin())
}

fn target_color(target: Option<&RasterImage>, at: Point) -> Color {
    match target {
        Some(img) => {
            let x = (at.x.floor().max(0.0) as u32).min(img.width() - 1);
            let y = (at.y.floor().max(0.0) as u32).min(img.height() - 1);
            let p = img.pixel(x, y);
            Color::rgba(p[0], p[1], p[2], 1.0)
        }
        None => Color::MID_GRAY,
    }
}

/// Samples one path per draw from the importance map restricted to `region`.
///
/// The leading control point is drawn from the normalized map; the other
/// points fall uniformly in a disk of radius `radius_fraction * max(W, H)`
/// around it. Square styles emit a square centered on the draw whose side
/// gives each path an equal share of the canvas. Colors come from `target`
/// under the leading point when a target is given.
pub fn sample_initial_paths(
    map: &ImportanceMap,
    region: &BinaryMask,
    cfg: &InitConfig,
    target: Option<&RasterImage>,
    seed: u64,
) -> Result<Vec<VectorPath>> {
    cfg.validate()?;
    if map.dims() != region.dims() {
        return Err(Error::dims(map.dims(), region.dims()));
    }
    if let Some(t) = target {
        if t.dims() != map.dims() {
            return Err(Error::dims(map.dims(), t.dims()));
        }
    }
    let weights = map
        .values()
        .iter()
        .zip(region.bits())
        .map(|(&v, &inside)| if inside { v } else { 0.0 });
    let sampler = PixelSampler::new(map.width(), weights)
        .ok_or_else(|| Error::ZeroMass("importance map has no mass inside the region".into()))?;

    let (w, h) = map.dims();
    let radius = cfg.radius_fraction * w.max(h) as f64;
    let side = ((w as f64 * h as f64) / cfg.num_paths_per_region as f64).sqrt();
    let constraints = style_preset(cfg.style);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut paths = Vec::with_capacity(cfg.num_paths_per_region);
    for _ in 0..cfg.num_paths_per_region {
        let first = sampler.sample(&mut rng);
        let n = 3 * cfg.segments_per_path;
        let points = match constraints.primitive {
            PrimitiveKind::Square => {
                let r = side / 2.0;
                polygon_points(&[
                    first + Point::new(-r, -r),
                    first + Point::new(r, -r),
                    first + Point::new(r, r),
                    first + Point::new(-r, r),
                ])
            }
            PrimitiveKind::ClosedCurve => {
                let mut pts = vec![first];
                pts.extend((1..n).map(|_| point_in_disk(first, radius, &mut rng)));
                pts.push(first);
                pts
            }
            PrimitiveKind::OpenCurve => {
                let mut pts = vec![first];
                pts.extend((0..n).map(|_| point_in_disk(first, radius, &mut rng)));
                pts
            }
        };
        let color = target_color(target, first);
        let path = if constraints.has_fill {
            VectorPath::filled(points, color, cfg.style)
        } else {
            let stroke = match constraints.fixed_stroke_rgb {
                Some([r, g, b]) => Color::rgba(r, g, b, 1.0),
                None => color,
            };
            VectorPath::stroked(points, stroke, cfg.stroke_width, cfg.style)
        };
        paths.push(path);
    }
    Ok(paths)
}
