//! Masked reconstruction losses and their pixel-space gradients.
//!
//! Every masked term is the squared RGB error over the mask's support,
//! averaged over the whole canvas and the three color channels, so a term's
//! weight grows with its mask's area.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masks::{BinaryMask, MaskSet};
use crate::raster::{backward, GradImage, ParamGradients, RasterImage, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum MaskId {
    Object { object: usize },
    Background,
    Part { object: usize, part: usize },
}

impl fmt::Display for MaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskId::Object { object } => write!(f, "object-{object}"),
            MaskId::Background => f.write_str("background"),
            MaskId::Part { object, part } => write!(f, "object-{object}-part-{part}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub total: f64,
    pub per_mask: Vec<(MaskId, f64)>,
    /// Gradient with respect to the full render.
    pub grad_image: GradImage,
    /// Gradients with respect to each per-object render (hierarchical loss only).
    pub object_grads: Vec<GradImage>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOptions {
    /// Include the background mask's term.
    pub include_background: bool,
}

impl Default for LossOptions {
    fn default() -> Self {
        Self {
            include_background: true,
        }
    }
}

fn check_dims(expected: (u32, u32), got: (u32, u32)) -> Result<()> {
    if expected != got {
        return Err(Error::dims(expected, got));
    }
    Ok(())
}

/// Adds one masked term's gradient into `grad` and returns its value.
fn masked_term(
    render: &RasterImage,
    target: &RasterImage,
    mask: &BinaryMask,
    grad: &mut GradImage,
) -> f64 {
    let norm = 1.0 / (3.0 * render.width() as f64 * render.height() as f64);
    let (x, t) = (render.data(), target.data());
    let mut sum = 0.0;
    for (k, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
        for c in 0..3 {
            let i = k * 4 + c;
            let diff = x[i] - t[i];
            sum += diff * diff;
            grad.data[i] += 2.0 * diff * norm;
        }
    }
    sum * norm
}

fn object_terms(
    render: &RasterImage,
    target: &RasterImage,
    masks: &MaskSet,
    opts: &LossOptions,
    grad: &mut GradImage,
    per_mask: &mut Vec<(MaskId, f64)>,
) {
    for (i, mask) in masks.object_masks.iter().enumerate() {
        let v = masked_term(render, target, mask, grad);
        per_mask.push((MaskId::Object { object: i }, v));
    }
    if opts.include_background {
        let v = masked_term(render, target, &masks.background_mask, grad);
        per_mask.push((MaskId::Background, v));
    }
}

pub fn sive_loss(
    render: &RasterImage,
    target: &RasterImage,
    masks: &MaskSet,
) -> Result<LossReport> {
    sive_loss_with(render, target, masks, &LossOptions::default())
}

/// Object-level masked loss: one term per object mask plus the background.
pub fn sive_loss_with(
    render: &RasterImage,
    target: &RasterImage,
    masks: &MaskSet,
    opts: &LossOptions,
) -> Result<LossReport> {
    check_dims(render.dims(), target.dims())?;
    check_dims(render.dims(), masks.dims())?;
    let mut grad = GradImage::zeros(render.width(), render.height());
    let mut per_mask = Vec::new();
    object_terms(render, target, masks, opts, &mut grad, &mut per_mask);
    Ok(LossReport {
        total: per_mask.iter().map(|(_, v)| v).sum(),
        per_mask,
        grad_image: grad,
        object_grads: Vec::new(),
    })
}

pub fn hive_loss(
    render: &RasterImage,
    target: &RasterImage,
    object_renders: &[RasterImage],
    object_targets: &[RasterImage],
    masks: &MaskSet,
) -> Result<LossReport> {
    hive_loss_with(
        render,
        target,
        object_renders,
        object_targets,
        masks,
        &LossOptions::default(),
    )
}

/// Hierarchical loss: the object-level terms on the full render plus one
/// part-level term per fine-grained mask, evaluated on the render of that
/// object's paths alone.
pub fn hive_loss_with(
    render: &RasterImage,
    target: &RasterImage,
    object_renders: &[RasterImage],
    object_targets: &[RasterImage],
    masks: &MaskSet,
    opts: &LossOptions,
) -> Result<LossReport> {
    check_dims(render.dims(), target.dims())?;
    check_dims(render.dims(), masks.dims())?;
    let objects = masks.object_count();
    if object_renders.len() != objects || object_targets.len() != objects {
        return Err(Error::CountMismatch(format!(
            "{objects} objects but {} object renders and {} object targets",
            object_renders.len(),
            object_targets.len()
        )));
    }
    let mut grad = GradImage::zeros(render.width(), render.height());
    let mut per_mask = Vec::new();
    object_terms(render, target, masks, opts, &mut grad, &mut per_mask);

    let mut object_grads = Vec::with_capacity(objects);
    for i in 0..objects {
        let (x, t) = (&object_renders[i], &object_targets[i]);
        check_dims(render.dims(), x.dims())?;
        check_dims(render.dims(), t.dims())?;
        let mut g = GradImage::zeros(render.width(), render.height());
        for (j, part) in masks.part_masks[i].iter().enumerate() {
            let v = masked_term(x, t, part, &mut g);
            per_mask.push((MaskId::Part { object: i, part: j }, v));
        }
        object_grads.push(g);
    }
    Ok(LossReport {
        total: per_mask.iter().map(|(_, v)| v).sum(),
        per_mask,
        grad_image: grad,
        object_grads,
    })
}

/// Pushes an externally supplied pixel-space gradient back to the scene parameters.
pub fn inject_gradient(scene: &Scene, grad_image: &GradImage) -> Result<ParamGradients> {
    backward(scene, grad_image)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    /// Images are identical.
    Exact,
    Db(f64),
}

impl Psnr {
    pub fn db(self) -> f64 {
        match self {
            Psnr::Exact => f64::INFINITY,
            Psnr::Db(v) => v,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Exact => f.write_str("exact"),
            Psnr::Db(v) => write!(f, "{v:.3} dB"),
        }
    }
}

/// PSNR over the RGB channels of two unit-range images.
pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<Psnr> {
    check_dims(a.dims(), b.dims())?;
    let mut sum = 0.0;
    for (pa, pb) in a.data().chunks_exact(4).zip(b.data().chunks_exact(4)) {
        for c in 0..3 {
            let d = pa[c] - pb[c];
            sum += d * d;
        }
    }
    let mse = sum / (3.0 * a.width() as f64 * a.height() as f64);
    Ok(if mse == 0.0 {
        Psnr::Exact
    } else {
        Psnr::Db(10.0 * (1.0 / mse).log10())
    })
}
