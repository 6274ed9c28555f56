//! Adaptive primitive control: prune faint paths, then split or clone the
//! paths that sit under high loss gradient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clone_path, path_area, point_in_path, split_path, Point};
use crate::init::PixelSampler;
use crate::masks::ImportanceMap;
use crate::raster::{GradImage, ParamGradients, Scene};

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub tau_opacity: f64,
    /// Positional-gradient magnitude a path must exceed to be split or cloned.
    pub tau_c: f64,
    /// Area (px^2) above which a candidate is split rather than cloned.
    pub tau_a: f64,
    pub start_iter: usize,
    pub interval: usize,
    pub indicator_points: usize,
    pub max_paths: usize,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            tau_opacity: 0.05,
            tau_c: 1e-5,
            tau_a: 20_000.0,
            start_iter: 200,
            interval: 25,
            indicator_points: 16,
            max_paths: 64,
        }
    }
}

impl ControlConfig {
    /// Defaults for a canvas, with the path cap at four times the initial count.
    pub fn for_canvas(width: u32, height: u32, initial_paths: usize) -> Self {
        Self {
            tau_a: area_threshold(width, height),
            max_paths: 4 * initial_paths,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.tau_opacity, self.tau_c, self.tau_a]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive {
            return Err(Error::Contract(
                "control thresholds must be positive".into(),
            ));
        }
        if self.start_iter < 1 || self.interval < 1 {
            return Err(Error::Contract(
                "start_iter and interval must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Split threshold for a canvas: 20000 px^2 at 1024x1024 and 10000 px^2 at
/// 768x768; other canvases scale the 1024 value by area.
pub fn area_threshold(width: u32, height: u32) -> f64 {
    match (width, height) {
        (1024, 1024) => 20_000.0,
        (768, 768) => 10_000.0,
        _ => 20_000.0 * (width as f64 * height as f64) / (1024.0 * 1024.0),
    }
}

/// What one control step did, indexed by the pre-step path order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlEvent {
    pub iteration: usize,
    pub pruned: Vec<usize>,
    pub split: Vec<usize>,
    pub cloned: Vec<(usize, Point)>,
}

impl ControlEvent {
    pub fn is_empty(&self) -> bool {
        self.pruned.is_empty() && self.split.is_empty() && self.cloned.is_empty()
    }

    /// Net change in path count.
    pub fn path_delta(&self) -> isize {
        (self.split.len() + self.cloned.len()) as isize - self.pruned.len() as isize
    }

    /// For each post-step path, the pre-step index it survives from, or
    /// `None` for newly created paths.
    pub fn source_map(&self, pre_len: usize) -> Vec<Option<usize>> {
        let mut out = Vec::with_capacity(pre_len);
        for i in 0..pre_len {
            if self.pruned.contains(&i) {
                continue;
            }
            if self.split.contains(&i) {
                out.extend([None, None]);
                continue;
            }
            out.push(Some(i));
            if self.cloned.iter().any(|(j, _)| *j == i) {
                out.push(None);
            }
        }
        out
    }
}

/// Replays an event: pruned paths vanish, split paths are replaced in place
/// by their two halves, clones are inserted directly above their source.
pub fn apply_event(scene: &Scene, event: &ControlEvent) -> Result<Scene> {
    let mut paths = Vec::with_capacity(scene.paths.len());
    for (i, path) in scene.paths.iter().enumerate() {
        if event.pruned.contains(&i) {
            continue;
        }
        if event.split.contains(&i) {
            let (a, b) = split_path(path)?;
            paths.push(a);
            paths.push(b);
            continue;
        }
        paths.push(path.clone());
        if let Some((_, dir)) = event.cloned.iter().find(|(j, _)| *j == i) {
            paths.push(clone_path(path, *dir)?);
        }
    }
    Ok(Scene {
        paths,
        ..scene.clone()
    })
}

/// Per-pixel L2 norm of the gradient across channels, scaled so the maximum is 1.
pub fn gradient_intensity_map(grad_image: &GradImage) -> ImportanceMap {
    let norms: Vec<f64> = grad_image
        .data
        .chunks_exact(4)
        .map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    let values = if max > 0.0 {
        norms.into_iter().map(|v| (v / max).min(1.0)).collect()
    } else {
        norms
    };
    ImportanceMap::new(grad_image.width, grad_image.height, values)
        .expect("normalized gradient map is valid")
}

/// `n` i.i.d. pixel centers drawn proportionally to the map; empty when the map has no mass.
pub fn sample_indicator_points(map: &ImportanceMap, n: usize, seed: u64) -> Vec<Point> {
    let Some(sampler) = PixelSampler::new(map.width(), map.values().iter().copied()) else {
        return Vec::new();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

pub fn should_fire(iteration: usize, cfg: &ControlConfig) -> bool {
    iteration >= cfg.start_iter && (iteration - cfg.start_iter).is_multiple_of(cfg.interval)
}

/// Placement direction for a clone: against the mean positional gradient,
/// i.e. where descent would move the path.
fn clone_direction(grad: &crate::raster::PathGrad) -> Point {
    let mean = grad.mean_point_grad();
    if mean.length() > 0.0 {
        return -mean * (1.0 / mean.length());
    }
    let strongest = grad
        .points
        .iter()
        .copied()
        .max_by(|a, b| a.length().total_cmp(&b.length()))
        .unwrap_or_default();
    if strongest.length() > 0.0 {
        -strongest * (1.0 / strongest.length())
    } else {
        Point::new(1.0, 0.0)
    }
}

/// One round of pruning and densification.
pub fn control_step(
    scene: &Scene,
    grads: &ParamGradients,
    grad_image: &GradImage,
    cfg: &ControlConfig,
    seed: u64,
    iteration: usize,
) -> Result<(Scene, ControlEvent)> {
    if !grads.is_congruent(scene) {
        return Err(Error::Contract(
            "parameter gradients do not match the scene".into(),
        ));
    }
    if grad_image.dims() != scene.dims() {
        return Err(Error::dims(scene.dims(), grad_image.dims()));
    }
    let mut event = ControlEvent {
        iteration,
        ..Default::default()
    };
    event.pruned = scene
        .paths
        .iter()
        .enumerate()
        .filter(|(_, p)| p.opacity() < cfg.tau_opacity)
        .map(|(i, _)| i)
        .collect();

    let indicators = sample_indicator_points(
        &gradient_intensity_map(grad_image),
        cfg.indicator_points,
        seed,
    );
    let mut candidates: Vec<(usize, f64)> = scene
        .paths
        .iter()
        .enumerate()
        .filter(|(i, _)| !event.pruned.contains(i))
        .filter_map(|(i, path)| {
            let g = grads.paths[i].max_point_norm();
            (g > cfg.tau_c && indicators.iter().any(|&p| point_in_path(path, p))).then_some((i, g))
        })
        .collect();

    let survivors = scene.paths.len() - event.pruned.len();
    let room = cfg.max_paths.saturating_sub(survivors);
    if candidates.len() > room {
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        candidates.truncate(room);
        candidates.sort_by_key(|c| c.0);
    }

    for (i, _) in candidates {
        let path = &scene.paths[i];
        let area = if path.closed { path_area(path)? } else { 0.0 };
        if area > cfg.tau_a {
            event.split.push(i);
        } else {
            event.cloned.push((i, clone_direction(&grads.paths[i])));
        }
    }
    let next = apply_event(scene, &event)?;
    Ok((next, event))
}
