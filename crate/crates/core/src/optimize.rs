//! Adam, the learning-rate schedules, and the vectorization loop.

use rayon::prelude::*;

use crate::control::{control_step, should_fire, ControlConfig, ControlEvent};
use crate::error::{Error, Result};
use crate::geometry::{Color, GroupLabel};
use crate::init::{importance_from_image, sample_initial_paths, InitConfig};
use crate::io::trace::{RunTrace, TraceRecord};
use crate::loss::{hive_loss_with, psnr, sive_loss_with, LossOptions, LossReport, Psnr};
use crate::masks::{ImportanceMap, MaskSet};
use crate::raster::{
    backward_with, render_with, GradImage, ParamGradients, PathGrad, RasterImage, RenderConfig,
    Scene,
};

/// Smallest stroke width the optimizer leaves on a stroked path.
pub const MIN_STROKE_WIDTH: f64 = 1e-3;

/// PSNR is recorded on iterations that are multiples of this.
pub const PSNR_INTERVAL: usize = 25;

/// Control-point learning rate: linear warm-up, then exponential decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLrSchedule {
    pub warmup_iters: usize,
    pub warmup_start: f64,
    pub warmup_peak: f64,
    pub decay_start: f64,
    pub decay_end: f64,
    pub total_iters: usize,
}

impl Default for PointLrSchedule {
    fn default() -> Self {
        Self {
            warmup_iters: 50,
            warmup_start: 0.01,
            warmup_peak: 0.9,
            decay_start: 0.8,
            decay_end: 0.4,
            total_iters: 700,
        }
    }
}

impl PointLrSchedule {
    /// Ramps from `warmup_start` to `warmup_peak` over the warm-up (reaching
    /// the peak on its last iteration), then decays geometrically from
    /// `decay_start` toward `decay_end` at `total_iters`.
    pub fn lr(&self, iteration: usize) -> Result<f64> {
        if iteration >= self.total_iters {
            return Err(Error::Contract(format!(
                "iteration {iteration} outside the {}-iteration schedule",
                self.total_iters
            )));
        }
        if iteration < self.warmup_iters {
            let span = self.warmup_iters.saturating_sub(1).max(1) as f64;
            let frac = iteration as f64 / span;
            return Ok(self.warmup_start + (self.warmup_peak - self.warmup_start) * frac);
        }
        let decay_len = (self.total_iters - self.warmup_iters) as f64;
        let frac = (iteration - self.warmup_iters) as f64 / decay_len;
        Ok(self.decay_start * (self.decay_end / self.decay_start).powf(frac))
    }
}

/// Point learning rate under the default 700-iteration schedule.
pub fn point_lr(iteration: usize) -> Result<f64> {
    PointLrSchedule::default().lr(iteration)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRates {
    pub points: f64,
    pub color: f64,
    pub width: f64,
}

/// Adam moments congruent with a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: ParamGradients,
    pub second: ParamGradients,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(scene: &Scene) -> Self {
        Self {
            first: ParamGradients::zeros_like(scene),
            second: ParamGradients::zeros_like(scene),
            step: 0,
            beta1: 0.9,
            beta2: 0.9,
            eps: 1e-6,
        }
    }

    pub fn is_congruent(&self, scene: &Scene) -> bool {
        self.first.is_congruent(scene) && self.second.is_congruent(scene)
    }

    /// Carries moments across a control event: survivors keep theirs, new
    /// paths start from zero, removed paths are dropped.
    pub fn remap(&mut self, sources: &[Option<usize>], scene: &Scene) {
        self.first = remap_grads(&self.first, sources, scene);
        self.second = remap_grads(&self.second, sources, scene);
    }
}

/// Reorders per-path gradients after a control event; new paths get zeros.
pub fn remap_grads(
    grads: &ParamGradients,
    sources: &[Option<usize>],
    scene: &Scene,
) -> ParamGradients {
    ParamGradients {
        paths: sources
            .iter()
            .zip(&scene.paths)
            .map(|(src, path)| match src {
                Some(i) => grads.paths[*i].clone(),
                None => PathGrad::zeros_like(path),
            })
            .collect(),
    }
}

struct AdamScalar {
    beta1: f64,
    beta2: f64,
    eps: f64,
    correction1: f64,
    correction2: f64,
}

impl AdamScalar {
    fn update(&self, param: &mut f64, grad: f64, m: &mut f64, v: &mut f64, lr: f64) {
        *m = self.beta1 * *m + (1.0 - self.beta1) * grad;
        *v = self.beta2 * *v + (1.0 - self.beta2) * grad * grad;
        let m_hat = *m / self.correction1;
        let v_hat = *v / self.correction2;
        *param -= lr * m_hat / (v_hat.sqrt() + self.eps);
    }
}

/// One bias-corrected Adam update of every trainable attribute.
///
/// Which attributes move is decided by each path's style; colors are
/// clamped to `[0, 1]` and stroke widths kept positive afterwards.
pub fn adam_step(
    scene: &mut Scene,
    state: &mut AdamState,
    grads: &ParamGradients,
    lrs: &LearningRates,
) -> Result<()> {
    if !grads.is_congruent(scene) || !state.is_congruent(scene) {
        return Err(Error::Contract(
            "gradients or optimizer state do not match the scene".into(),
        ));
    }
    state.step += 1;
    let t = state.step as i32;
    let adam = AdamScalar {
        beta1: state.beta1,
        beta2: state.beta2,
        eps: state.eps,
        correction1: 1.0 - state.beta1.powi(t),
        correction2: 1.0 - state.beta2.powi(t),
    };
    for (k, path) in scene.paths.iter_mut().enumerate() {
        let g = &grads.paths[k];
        let m = &mut state.first.paths[k];
        let v = &mut state.second.paths[k];
        let trainable = path.style.constraints().trainable;
        if trainable.points {
            for (i, p) in path.points.iter_mut().enumerate() {
                adam.update(
                    &mut p.x,
                    g.points[i].x,
                    &mut m.points[i].x,
                    &mut v.points[i].x,
                    lrs.points,
                );
                adam.update(
                    &mut p.y,
                    g.points[i].y,
                    &mut m.points[i].y,
                    &mut v.points[i].y,
                    lrs.points,
                );
            }
        }
        let paints = [
            (path.fill.as_mut(), &g.fill, &mut m.fill, &mut v.fill),
            (
                path.stroke.as_mut(),
                &g.stroke,
                &mut m.stroke,
                &mut v.stroke,
            ),
        ];
        for (color, gc, mc, vc) in paints {
            let Some(color) = color else { continue };
            let mut ch = color.channels();
            for c in 0..4 {
                let train = if c == 3 {
                    trainable.opacity
                } else {
                    trainable.color
                };
                if train {
                    adam.update(&mut ch[c], gc[c], &mut mc[c], &mut vc[c], lrs.color);
                }
            }
            *color = Color::from_channels(ch).clamped();
        }
        if trainable.stroke_width && path.stroke.is_some() {
            adam.update(
                &mut path.stroke_width,
                g.stroke_width,
                &mut m.stroke_width,
                &mut v.stroke_width,
                lrs.width,
            );
            path.stroke_width = path.stroke_width.max(MIN_STROKE_WIDTH);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    Sive,
    Hive,
}

impl std::str::FromStr for LossMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sive" => Ok(LossMode::Sive),
            "hive" => Ok(LossMode::Hive),
            _ => Err(Error::Contract(format!("unknown loss mode `{s}`"))),
        }
    }
}

impl std::fmt::Display for LossMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossMode::Sive => "sive",
            LossMode::Hive => "hive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub total_iters: usize,
    pub point_lr: PointLrSchedule,
    pub color_lr: f64,
    pub width_lr: f64,
    pub control: ControlConfig,
    /// Split threshold override; derived from the canvas when `None`.
    pub area_threshold: Option<f64>,
    /// Path cap override; four times the initial path count when `None`.
    pub max_paths: Option<usize>,
    pub adaptive_control: bool,
    pub init: InitConfig,
    pub loss_mode: LossMode,
    pub loss: LossOptions,
    pub render: RenderConfig,
    /// Canvas color under all paths; the median border color of the target when `None`.
    pub background: Option<Color>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            total_iters: 700,
            point_lr: PointLrSchedule::default(),
            color_lr: 0.1,
            width_lr: 0.01,
            control: ControlConfig::default(),
            area_threshold: None,
            max_paths: None,
            adaptive_control: true,
            init: InitConfig::default(),
            loss_mode: LossMode::Sive,
            loss: LossOptions::default(),
            render: RenderConfig::default(),
            background: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_iters == 0 {
            return Err(Error::Contract("total_iters must be >= 1".into()));
        }
        let lrs = [
            self.color_lr,
            self.width_lr,
            self.point_lr.warmup_start,
            self.point_lr.warmup_peak,
            self.point_lr.decay_start,
            self.point_lr.decay_end,
        ];
        if lrs.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Contract("learning rates must be positive".into()));
        }
        if self.point_lr.total_iters != self.total_iters {
            return Err(Error::Contract(
                "point-lr schedule length differs from total_iters".into(),
            ));
        }
        if self.background.is_some_and(|c| !c.is_valid()) {
            return Err(Error::Contract("background color outside [0, 1]".into()));
        }
        self.control.validate()?;
        self.init.validate()
    }

    /// Sets the iteration budget, keeping the point schedule in step.
    pub fn with_total_iters(mut self, total_iters: usize) -> Self {
        self.total_iters = total_iters;
        self.point_lr.total_iters = total_iters;
        self
    }

    fn learning_rates(&self, iteration: usize) -> Result<LearningRates> {
        Ok(LearningRates {
            points: self.point_lr.lr(iteration)?,
            color: self.color_lr,
            width: self.width_lr,
        })
    }
}

/// Per-channel median of the outermost ring of pixels, made opaque.
pub fn border_median(image: &RasterImage) -> Color {
    let (w, h) = image.dims();
    let mut ring = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                ring.push(image.pixel(x, y));
            }
        }
    }
    let mut out = [1.0; 4];
    for (c, v) in out.iter_mut().take(3).enumerate() {
        let mut vals: Vec<f64> = ring.iter().map(|p| p[c]).collect();
        vals.sort_by(f64::total_cmp);
        *v = vals[vals.len() / 2];
    }
    Color::from_channels(out)
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Samples the initial scene: background paths first, then each object's
/// paths, each region drawn from the importance map restricted to its mask.
pub fn initialize_scene(
    target: &RasterImage,
    masks: &MaskSet,
    importance: &ImportanceMap,
    cfg: &RunConfig,
) -> Result<Scene> {
    let dims = target.dims();
    if masks.dims() != dims {
        return Err(Error::dims(dims, masks.dims()));
    }
    if importance.dims() != dims {
        return Err(Error::dims(dims, importance.dims()));
    }
    let init = InitConfig {
        seed: cfg.seed,
        ..cfg.init.clone()
    };
    let background = cfg.background.unwrap_or_else(|| border_median(target));
    let mut scene = Scene::new(dims.0, dims.1, background);
    let regions = std::iter::once((&masks.background_mask, GroupLabel::NONE)).chain(
        masks
            .object_masks
            .iter()
            .enumerate()
            .map(|(i, m)| (m, GroupLabel::object(i as u32))),
    );
    for (stream, (region, label)) in regions.enumerate() {
        if region.count() == 0 {
            continue;
        }
        let seed = derive_seed(init.seed, stream as u64);
        let paths = match sample_initial_paths(importance, region, &init, Some(target), seed) {
            Err(Error::ZeroMass(_)) => {
                let flat = ImportanceMap::uniform(dims.0, dims.1, 1.0);
                sample_initial_paths(&flat, region, &init, Some(target), seed)?
            }
            other => other?,
        };
        for mut path in paths {
            path.group = label;
            if let Some(object) = label.object {
                let anchor = path.points[0];
                let (x, y) = (anchor.x as u32, anchor.y as u32);
                path.group.part = masks.part_masks[object as usize]
                    .iter()
                    .position(|m| x < m.width() && y < m.height() && m.get(x, y))
                    .map(|j| j as u32);
            }
            scene.paths.push(path);
        }
    }
    Ok(scene)
}

/// Stateful optimization run over one target.
pub struct Vectorizer {
    target: RasterImage,
    masks: MaskSet,
    object_targets: Vec<RasterImage>,
    cfg: RunConfig,
    control: ControlConfig,
    scene: Scene,
    adam: AdamState,
    trace: RunTrace,
    last_loss: f64,
}

impl Vectorizer {
    pub fn new(target: RasterImage, masks: MaskSet, scene: Scene, cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        scene.validate()?;
        if scene.dims() != target.dims() {
            return Err(Error::dims(target.dims(), scene.dims()));
        }
        if masks.dims() != target.dims() {
            return Err(Error::dims(target.dims(), masks.dims()));
        }
        let control = ControlConfig {
            tau_a: cfg
                .area_threshold
                .unwrap_or_else(|| crate::control::area_threshold(target.width(), target.height())),
            max_paths: cfg.max_paths.unwrap_or(4 * scene.paths.len().max(1)),
            ..cfg.control.clone()
        };
        let object_targets = vec![target.clone(); masks.object_count()];
        let mut trace = RunTrace::default();
        trace.push(TraceRecord::Start {
            width: target.width(),
            height: target.height(),
            paths: scene.paths.len(),
            style: cfg.init.style,
            mode: cfg.loss_mode,
            seed: cfg.seed,
            total_iters: cfg.total_iters,
        });
        Ok(Self {
            adam: AdamState::new(&scene),
            target,
            masks,
            object_targets,
            cfg,
            control,
            scene,
            trace,
            last_loss: f64::NAN,
        })
    }

    /// Replaces the per-object targets (defaults to the full target for every object).
    pub fn set_object_targets(&mut self, targets: Vec<RasterImage>) -> Result<()> {
        if targets.len() != self.masks.object_count() {
            return Err(Error::CountMismatch(format!(
                "{} object targets for {} objects",
                targets.len(),
                self.masks.object_count()
            )));
        }
        if let Some(t) = targets.iter().find(|t| t.dims() != self.target.dims()) {
            return Err(Error::dims(self.target.dims(), t.dims()));
        }
        self.object_targets = targets;
        Ok(())
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn control_config(&self) -> &ControlConfig {
        &self.control
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    fn object_scene(&self, object: usize) -> (Scene, Vec<usize>) {
        let indices: Vec<usize> = self
            .scene
            .paths
            .iter()
            .enumerate()
            .filter(|(_, p)| p.group.object == Some(object as u32))
            .map(|(i, _)| i)
            .collect();
        let scene = Scene {
            paths: indices
                .iter()
                .map(|&i| self.scene.paths[i].clone())
                .collect(),
            ..self.scene.clone()
        };
        (scene, indices)
    }

    /// Loss and parameter gradients at the current scene.
    pub fn evaluate(&self) -> Result<(RasterImage, LossReport, ParamGradients)> {
        let rcfg = RenderConfig {
            supersample: 1,
            ..self.cfg.render
        };
        let render = render_with(&self.scene, &rcfg);
        match self.cfg.loss_mode {
            LossMode::Sive => {
                let report = sive_loss_with(&render, &self.target, &self.masks, &self.cfg.loss)?;
                let grads = backward_with(&self.scene, &report.grad_image, &rcfg)?;
                Ok((render, report, grads))
            }
            LossMode::Hive => {
                let subsets: Vec<(Scene, Vec<usize>)> = (0..self.masks.object_count())
                    .map(|i| self.object_scene(i))
                    .collect();
                let object_renders: Vec<RasterImage> = subsets
                    .par_iter()
                    .map(|(s, _)| render_with(s, &rcfg))
                    .collect();
                let mut report = hive_loss_with(
                    &render,
                    &self.target,
                    &object_renders,
                    &self.object_targets,
                    &self.masks,
                    &self.cfg.loss,
                )?;
                let mut grads = backward_with(&self.scene, &report.grad_image, &rcfg)?;
                for ((sub, indices), g) in subsets.iter().zip(&report.object_grads) {
                    let sub_grads = backward_with(sub, g, &rcfg)?;
                    for (k, &i) in indices.iter().enumerate() {
                        grads.paths[i].add_assign(&sub_grads.paths[k]);
                    }
                }
                // the gradient map for control covers both levels
                for g in &report.object_grads {
                    report.grad_image.add_assign(g);
                }
                Ok((render, report, grads))
            }
        }
    }

    /// Runs iteration `iteration`: evaluate, maybe control, then step.
    pub fn step(&mut self, iteration: usize) -> Result<Option<ControlEvent>> {
        let (render, report, mut grads) = self.evaluate()?;
        if !report.total.is_finite() || !grads.is_finite() {
            return Err(Error::NonFinite {
                iteration,
                detail: format!(
                    "loss {} with {} paths",
                    report.total,
                    self.scene.paths.len()
                ),
            });
        }
        self.last_loss = report.total;
        self.trace.push(TraceRecord::Iter {
            iteration,
            loss: report.total,
            paths: self.scene.paths.len(),
        });
        if iteration.is_multiple_of(PSNR_INTERVAL) {
            self.trace
                .push(TraceRecord::psnr(iteration, psnr(&render, &self.target)?));
        }

        let mut fired = None;
        if self.cfg.adaptive_control && should_fire(iteration, &self.control) {
            let seed = derive_seed(self.cfg.seed, 1_000_000 + iteration as u64);
            let before = self.scene.paths.len();
            let (next, event) = control_step(
                &self.scene,
                &grads,
                &report.grad_image,
                &self.control,
                seed,
                iteration,
            )?;
            let sources = event.source_map(before);
            self.adam.remap(&sources, &next);
            grads = remap_grads(&grads, &sources, &next);
            self.scene = next;
            self.trace
                .push(TraceRecord::event(&event, before, self.scene.paths.len()));
            fired = Some(event);
        }
        let lrs = self.cfg.learning_rates(iteration)?;
        adam_step(&mut self.scene, &mut self.adam, &grads, &lrs)?;
        Ok(fired)
    }

    /// Runs the full iteration budget and closes the trace.
    pub fn run(mut self) -> Result<(Scene, RunTrace)> {
        for iteration in 0..self.cfg.total_iters {
            self.step(iteration)?;
        }
        let (render, report, _) = self.evaluate()?;
        let final_psnr = psnr(&render, &self.target)?;
        self.trace.push(TraceRecord::Final {
            iteration: self.cfg.total_iters,
            paths: self.scene.paths.len(),
            loss: report.total,
            psnr: match final_psnr {
                Psnr::Exact => None,
                Psnr::Db(v) => Some(v),
            },
        });
        Ok((self.scene, self.trace))
    }
}

/// Full pipeline: initialize from the importance map, then optimize.
///
/// Without masks the whole canvas is one background region. The
/// hierarchical mode requires masks.
pub fn run_vectorize(
    target: &RasterImage,
    masks: Option<&MaskSet>,
    importance: Option<&ImportanceMap>,
    cfg: &RunConfig,
) -> Result<(Scene, RunTrace)> {
    cfg.validate()?;
    if cfg.loss_mode == LossMode::Hive && masks.is_none() {
        return Err(Error::Contract("hierarchical mode requires masks".into()));
    }
    let masks = masks
        .cloned()
        .unwrap_or_else(|| MaskSet::whole_canvas(target.width(), target.height()));
    let importance = match importance {
        Some(map) => map.clone(),
        None => importance_from_image(target),
    };
    let scene = initialize_scene(target, &masks, &importance, cfg)?;
    Vectorizer::new(target.clone(), masks, scene, cfg.clone())?.run()
}

/// Convenience for callers holding a starting scene.
pub fn run_from_scene(
    target: &RasterImage,
    masks: Option<&MaskSet>,
    scene: Scene,
    cfg: &RunConfig,
) -> Result<(Scene, RunTrace)> {
    let masks = masks
        .cloned()
        .unwrap_or_else(|| MaskSet::whole_canvas(target.width(), target.height()));
    Vectorizer::new(target.clone(), masks, scene, cfg.clone())?.run()
}

/// Gradient image of the plain canvas-mean squared error; handy for callers
/// that drive [`crate::loss::inject_gradient`] themselves.
pub fn mse_grad_image(render: &RasterImage, target: &RasterImage) -> Result<GradImage> {
    let masks = MaskSet::whole_canvas(render.width(), render.height());
    Ok(sive_loss_with(render, target, &masks, &LossOptions::default())?.grad_image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, StyleClass, VectorPath};

    #[test]
    fn schedule_endpoints() {
        assert!((point_lr(0).unwrap() - 0.01).abs() < 1e-12);
        assert!((point_lr(49).unwrap() - 0.9).abs() < 1e-12);
        assert!((point_lr(50).unwrap() - 0.8).abs() < 1e-12);
        assert!((point_lr(699).unwrap() - 0.4).abs() <= 1e-3);
        assert!(point_lr(700).is_err());
    }

    #[test]
    fn schedule_is_monotone_apart_from_the_drop() {
        let s = PointLrSchedule::default();
        for i in 1..700 {
            let (a, b) = (s.lr(i - 1).unwrap(), s.lr(i).unwrap());
            if i < 50 {
                assert!(b > a);
            } else if i > 50 {
                assert!(b < a && a - b < 1e-2);
            }
        }
    }

    fn one_path_scene() -> Scene {
        let mut scene = Scene::new(16, 16, Color::WHITE);
        scene.paths.push(VectorPath::rectangle(
            2.0,
            2.0,
            9.0,
            9.0,
            Color::rgba(0.2, 0.4, 0.6, 0.8),
        ));
        scene
    }

    fn lrs() -> LearningRates {
        LearningRates {
            points: 0.5,
            color: 0.1,
            width: 0.01,
        }
    }

    #[test]
    fn zero_gradients_leave_parameters() {
        let mut scene = one_path_scene();
        let before = scene.clone();
        let mut state = AdamState::new(&scene);
        let grads = ParamGradients::zeros_like(&scene);
        adam_step(&mut scene, &mut state, &grads, &lrs()).unwrap();
        assert_eq!(scene, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut scene = one_path_scene();
        let before = scene.clone();
        let mut state = AdamState::new(&scene);
        let mut grads = ParamGradients::zeros_like(&scene);
        grads.paths[0]
            .points
            .iter_mut()
            .for_each(|p| *p = Point::new(0.3, -2.0));
        grads.paths[0].fill = [0.05, -0.05, 0.0, 0.0];
        adam_step(&mut scene, &mut state, &grads, &lrs()).unwrap();
        for (a, b) in scene.paths[0].points.iter().zip(&before.paths[0].points) {
            // closed form: lr * g / (|g| + eps)
            assert!((a.x - (b.x - 0.5 * 0.3 / (0.3 + 1e-6))).abs() < 1e-12);
            assert!((a.y - (b.y + 0.5 * 2.0 / (2.0 + 1e-6))).abs() < 1e-12);
        }
        let fill = scene.paths[0].fill.unwrap();
        assert!((fill.r - (0.2 - 0.1 * 0.05 / (0.05 + 1e-6))).abs() < 1e-12);
        assert_eq!(fill.b, 0.6);
    }

    #[test]
    fn colors_stay_clamped() {
        let mut scene = one_path_scene();
        let mut state = AdamState::new(&scene);
        let mut grads = ParamGradients::zeros_like(&scene);
        grads.paths[0].fill = [-1.0, 1.0, -1.0, -1.0];
        for _ in 0..40 {
            adam_step(&mut scene, &mut state, &grads, &lrs()).unwrap();
            assert!(scene.paths[0].fill.unwrap().is_valid());
        }
        assert_eq!(scene.paths[0].fill.unwrap().r, 1.0);
        assert_eq!(scene.paths[0].fill.unwrap().g, 0.0);
    }

    #[test]
    fn frozen_points_do_not_move() {
        let mut scene = one_path_scene();
        scene.paths[0].style = StyleClass::PixelArt;
        let before = scene.paths[0].points.clone();
        let mut state = AdamState::new(&scene);
        let mut grads = ParamGradients::zeros_like(&scene);
        grads.paths[0]
            .points
            .iter_mut()
            .for_each(|p| *p = Point::new(1.0, 1.0));
        adam_step(&mut scene, &mut state, &grads, &lrs()).unwrap();
        assert_eq!(scene.paths[0].points, before);
    }

    #[test]
    fn incongruent_grads_are_rejected() {
        let mut scene = one_path_scene();
        let mut state = AdamState::new(&scene);
        let grads = ParamGradients::default();
        assert!(adam_step(&mut scene, &mut state, &grads, &lrs()).is_err());
    }

    #[test]
    fn hive_requires_masks() {
        let target = RasterImage::new(8, 8, Color::WHITE);
        let cfg = RunConfig {
            loss_mode: LossMode::Hive,
            ..Default::default()
        };
        assert!(matches!(
            run_vectorize(&target, None, None, &cfg),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn known_scene_is_a_fixed_point() {
        let scene = one_path_scene();
        let target = crate::raster::render(&scene);
        let cfg = RunConfig::default().with_total_iters(3);
        let (out, trace) = run_from_scene(&target, None, scene.clone(), &cfg).unwrap();
        assert_eq!(out, scene);
        assert!(trace.events().next().is_none());
        assert_eq!(trace.losses()[0], 0.0);
    }
}
