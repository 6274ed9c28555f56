//! Differentiable rasterization.
//!
//! Coverage of a pixel by a path is a smoothstep of the signed distance from
//! the pixel center to the path boundary (or to the stroke centerline minus
//! half the stroke width). Paths are composited back to front with the
//! `over` operator in premultiplied space. Because every stage is a smooth
//! function of the path parameters, [`backward`] can push a per-pixel loss
//! gradient through compositing, coverage, distance and Bézier evaluation
//! analytically.
//!
//! Distances are only evaluated inside a band around each edge; pixels
//! farther away are fully inside or outside and their coverage comes from a
//! per-row nonzero winding sweep.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    polyline_distance, winding_number, Color, Point, SampledPath, VectorPath, GEOMETRY_TOLERANCE,
};

/// RGBA raster of unit-interval floats, row-major.
///
/// Images produced by [`render`] hold premultiplied color; with an opaque
/// background (the usual case) premultiplied and straight color coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, fill: Color) -> Self {
        let data = fill.channels().repeat((width * height) as usize);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_data(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Contract("image dimensions must be positive".into()));
        }
        if data.len() != (width * height * 4) as usize {
            return Err(Error::Contract(format!(
                "expected {} samples for a {width}x{height} RGBA image, got {}",
                width * height * 4,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Contract(format!("sample {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f64; 4] {
        let i = ((y * self.width + x) * 4) as usize;
        [
            self.data[i],
            self.data[i + 1],
            self.data[i + 2],
            self.data[i + 3],
        ]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, value: [f64; 4]) {
        let i = ((y * self.width + x) * 4) as usize;
        for (c, v) in value.iter().enumerate() {
            self.data[i + c] = v.clamp(0.0, 1.0);
        }
    }

    /// Box-filters `factor x factor` blocks into single pixels.
    pub fn downsample(&self, factor: u32) -> RasterImage {
        if factor <= 1 {
            return self.clone();
        }
        let (w, h) = (self.width / factor, self.height / factor);
        let norm = 1.0 / (factor * factor) as f64;
        let mut out = RasterImage::new(w, h, Color::rgba(0.0, 0.0, 0.0, 0.0));
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0; 4];
                for sy in 0..factor {
                    for sx in 0..factor {
                        let p = self.pixel(x * factor + sx, y * factor + sy);
                        for c in 0..4 {
                            acc[c] += p[c];
                        }
                    }
                }
                out.set_pixel(x, y, acc.map(|v| v * norm));
            }
        }
        out
    }
}

/// Per-pixel gradient with the same layout as a [`RasterImage`]; values are unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct GradImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl GradImage {
    pub fn zeros(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; (width * height * 4) as usize],
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn add_assign(&mut self, other: &GradImage) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub background: Color,
    /// Back-to-front paint order.
    pub paths: Vec<VectorPath>,
}

impl Scene {
    pub fn new(width: u32, height: u32, background: Color) -> Self {
        Self {
            width,
            height,
            background,
            paths: Vec::new(),
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Scene with coordinates, stroke widths and canvas scaled by an integer factor.
    pub fn scaled(&self, factor: u32) -> Scene {
        Scene {
            width: self.width * factor,
            height: self.height * factor,
            background: self.background,
            paths: self.paths.iter().map(|p| p.scaled(factor as f64)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Contract("canvas dimensions must be positive".into()));
        }
        if !self.background.is_valid() {
            return Err(Error::Contract("background color outside [0, 1]".into()));
        }
        for (i, path) in self.paths.iter().enumerate() {
            if let Some(v) = path.violations().first() {
                return Err(Error::Contract(format!("path {i}: {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    /// Half-width of the anti-aliasing ramp, in pixels.
    pub bandwidth: f64,
    /// Chord tolerance of the uniform flattening used for distances.
    pub tolerance: f64,
    /// Samples per pixel side for final renders; 1 disables supersampling.
    pub supersample: u32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            bandwidth: 1.0,
            tolerance: GEOMETRY_TOLERANCE,
            supersample: 1,
        }
    }
}

/// Gradients for one path, congruent with its parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathGrad {
    pub points: Vec<Point>,
    pub fill: [f64; 4],
    pub stroke: [f64; 4],
    pub stroke_width: f64,
}

impl PathGrad {
    pub fn zeros_like(path: &VectorPath) -> Self {
        Self {
            points: vec![Point::default(); path.points.len()],
            ..Default::default()
        }
    }

    /// Largest control-point positional gradient magnitude.
    pub fn max_point_norm(&self) -> f64 {
        self.points.iter().map(|g| g.length()).fold(0.0, f64::max)
    }

    pub fn mean_point_grad(&self) -> Point {
        let n = self.points.len().max(1) as f64;
        self.points.iter().fold(Point::default(), |acc, &g| acc + g) * (1.0 / n)
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.is_finite())
            && self.fill.iter().chain(&self.stroke).all(|v| v.is_finite())
            && self.stroke_width.is_finite()
    }

    pub fn add_assign(&mut self, other: &PathGrad) {
        for (a, b) in self.points.iter_mut().zip(&other.points) {
            *a += *b;
        }
        for c in 0..4 {
            self.fill[c] += other.fill[c];
            self.stroke[c] += other.stroke[c];
        }
        self.stroke_width += other.stroke_width;
    }
}

/// Parameter gradients mirroring a [`Scene`]'s path list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamGradients {
    pub paths: Vec<PathGrad>,
}

impl ParamGradients {
    pub fn zeros_like(scene: &Scene) -> Self {
        Self {
            paths: scene.paths.iter().map(PathGrad::zeros_like).collect(),
        }
    }

    pub fn is_congruent(&self, scene: &Scene) -> bool {
        self.paths.len() == scene.paths.len()
            && self
                .paths
                .iter()
                .zip(&scene.paths)
                .all(|(g, p)| g.points.len() == p.points.len())
    }

    pub fn is_finite(&self) -> bool {
        self.paths.iter().all(PathGrad::is_finite)
    }
}

/// Smoothstep coverage: 1 at `d <= -bandwidth`, 0 at `d >= bandwidth`.
pub fn coverage(d: f64, bandwidth: f64) -> f64 {
    let u = ((bandwidth - d) / (2.0 * bandwidth)).clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Derivative of [`coverage`] with respect to `d`.
pub fn coverage_derivative(d: f64, bandwidth: f64) -> f64 {
    let u = (bandwidth - d) / (2.0 * bandwidth);
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    -6.0 * u * (1.0 - u) / (2.0 * bandwidth)
}

/// Signed distance from `p` to a path.
///
/// Closed paths are negative inside (nonzero winding); open paths measure
/// distance to the centerline minus half the stroke width.
pub fn signed_distance(path: &VectorPath, p: Point) -> f64 {
    let sampled = SampledPath::new(path, GEOMETRY_TOLERANCE);
    let mut poly = sampled.vertices;
    if path.closed {
        if let Some(&first) = poly.first() {
            poly.push(first);
        }
        let d = polyline_distance(&poly, p);
        if winding_number(&poly, p) != 0 {
            -d
        } else {
            d
        }
    } else {
        polyline_distance(&poly, p) - path.stroke_width / 2.0
    }
}

pub fn render(scene: &Scene) -> RasterImage {
    render_with(scene, &RenderConfig::default())
}

/// Renders with explicit settings; supersampled renders are box-filtered down.
pub fn render_with(scene: &Scene, cfg: &RenderConfig) -> RasterImage {
    if cfg.supersample > 1 {
        let fine = render_with(
            &scene.scaled(cfg.supersample),
            &RenderConfig {
                supersample: 1,
                ..*cfg
            },
        );
        return fine.downsample(cfg.supersample);
    }
    let frame = Frame::build(scene, cfg);
    frame.composite(scene.background)
}

/// Gradient of `sum(grad_image * render(scene))` with respect to every path parameter.
pub fn backward(scene: &Scene, grad_image: &GradImage) -> Result<ParamGradients> {
    backward_with(scene, grad_image, &RenderConfig::default())
}

pub fn backward_with(
    scene: &Scene,
    grad_image: &GradImage,
    cfg: &RenderConfig,
) -> Result<ParamGradients> {
    if grad_image.dims() != scene.dims() {
        return Err(Error::dims(scene.dims(), grad_image.dims()));
    }
    let frame = Frame::build(
        scene,
        &RenderConfig {
            supersample: 1,
            ..*cfg
        },
    );
    Ok(frame.backward(scene, grad_image))
}

#[derive(Debug, Clone, Copy)]
enum Paint {
    Fill,
    Stroke,
}

/// One pixel touched by one layer.
#[derive(Debug, Clone, Copy)]
struct Fragment {
    pixel: u32,
    coverage: f64,
    /// d coverage / d signed distance.
    dcov: f64,
    /// Nearest polyline edge, or `u32::MAX` when the pixel is outside the band.
    edge: u32,
    /// Projection parameter along the nearest edge.
    t: f64,
    /// d distance / d projected point, i.e. minus the signed unit normal.
    normal: Point,
}

/// Coverage of a single paint (fill or stroke) of one path.
struct Layer {
    path: usize,
    paint: Paint,
    color: Color,
    sampled: SampledPath,
    /// Edges as vertex index pairs.
    edges: Vec<(u32, u32)>,
    fragments: Vec<Fragment>,
}

impl Layer {
    fn build(
        index: usize,
        path: &VectorPath,
        paint: Paint,
        color: Color,
        width: u32,
        height: u32,
        cfg: &RenderConfig,
    ) -> Layer {
        let sampled = SampledPath::new(path, cfg.tolerance);
        let n = sampled.vertices.len() as u32;
        let mut edges: Vec<(u32, u32)> = (1..n).map(|i| (i - 1, i)).collect();
        if path.closed && n > 0 {
            edges.push((n - 1, 0));
        }
        let mut layer = Layer {
            path: index,
            paint,
            color: color.clamped(),
            sampled,
            edges,
            fragments: Vec::new(),
        };
        if layer.color.a > 0.0 && n > 0 {
            let half = match paint {
                Paint::Fill => 0.0,
                Paint::Stroke => path.stroke_width.max(0.0) / 2.0,
            };
            layer.rasterize(width, height, cfg.bandwidth, half);
        }
        layer
    }

    fn rasterize(&mut self, width: u32, height: u32, bandwidth: f64, half: f64) {
        let verts = &self.sampled.vertices;
        let reach = bandwidth + half;
        let Some(bbox) = crate::geometry::Rect::from_points(verts.iter().copied()) else {
            return;
        };
        let Some((x0, x1)) = pixel_span(bbox.min.x - reach, bbox.max.x + reach, width) else {
            return;
        };
        let Some((y0, y1)) = pixel_span(bbox.min.y - reach, bbox.max.y + reach, height) else {
            return;
        };
        let rw = (x1 - x0 + 1) as usize;
        let rh = (y1 - y0 + 1) as usize;

        // nearest edge within `reach` of each pixel center
        let reach2 = reach * reach;
        let mut best_d2 = vec![reach2; rw * rh];
        let mut best_edge = vec![u32::MAX; rw * rh];
        let mut best_t = vec![0.0f64; rw * rh];
        for (e, &(ia, ib)) in self.edges.iter().enumerate() {
            let (a, b) = (verts[ia as usize], verts[ib as usize]);
            let Some((ex0, ex1)) = pixel_span(a.x.min(b.x) - reach, a.x.max(b.x) + reach, width)
            else {
                continue;
            };
            let Some((ey0, ey1)) = pixel_span(a.y.min(b.y) - reach, a.y.max(b.y) + reach, height)
            else {
                continue;
            };
            let ab = b - a;
            let len2 = ab.length_squared();
            for py in ey0.max(y0)..=ey1.min(y1) {
                let cy = py as f64 + 0.5;
                let row = (py - y0) as usize * rw;
                for px in ex0.max(x0)..=ex1.min(x1) {
                    let p = Point::new(px as f64 + 0.5, cy);
                    let ap = p - a;
                    let t = if len2 > 0.0 {
                        (ap.dot(ab) / len2).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    let d2 = (ap - ab * t).length_squared();
                    let k = row + (px - x0) as usize;
                    if d2 < best_d2[k] {
                        best_d2[k] = d2;
                        best_edge[k] = e as u32;
                        best_t[k] = t;
                    }
                }
            }
        }

        let fill = matches!(self.paint, Paint::Fill);
        let area = signed_area(verts);
        let orientation = if area > 0.0 {
            1.0
        } else if area < 0.0 {
            -1.0
        } else {
            0.0
        };
        let mut crossings: Vec<(f64, i32)> = Vec::new();
        let mut inside = vec![false; rw];
        for py in y0..=y1 {
            let cy = py as f64 + 0.5;
            if fill {
                self.row_inside(cy, x0, &mut crossings, &mut inside);
            }
            let row = (py - y0) as usize * rw;
            for px in x0..=x1 {
                let k = row + (px - x0) as usize;
                let is_inside = fill && inside[(px - x0) as usize];
                let edge = best_edge[k];
                let pixel = py * width + px;
                if edge == u32::MAX {
                    if is_inside {
                        self.fragments.push(Fragment {
                            pixel,
                            coverage: 1.0,
                            dcov: 0.0,
                            edge,
                            t: 0.0,
                            normal: Point::default(),
                        });
                    }
                    continue;
                }
                let dist = best_d2[k].sqrt();
                let (ia, ib) = self.edges[edge as usize];
                let (a, b) = (verts[ia as usize], verts[ib as usize]);
                let t = best_t[k];
                let p = Point::new(px as f64 + 0.5, cy);
                let q = a.lerp(b, t);
                let sign = if is_inside { -1.0 } else { 1.0 };
                let normal = if dist > 0.0 {
                    (p - q) * (-sign / dist)
                } else {
                    // pixel center on the outline: the signed distance still
                    // has the outward edge normal as its one-sided gradient
                    -self.outward_normal(a, b, orientation)
                };
                let d = sign * dist - half;
                let cov = coverage(d, bandwidth);
                if cov <= 0.0 {
                    continue;
                }
                self.fragments.push(Fragment {
                    pixel,
                    coverage: cov,
                    dcov: coverage_derivative(d, bandwidth),
                    edge,
                    t,
                    normal,
                });
            }
        }
    }

    /// Unit normal of edge `ab` pointing away from the interior; for
    /// degenerate edges, away from the vertex centroid.
    fn outward_normal(&self, a: Point, b: Point, orientation: f64) -> Point {
        let ab = b - a;
        let len = ab.length();
        if len > 0.0 && orientation != 0.0 {
            return Point::new(ab.y, -ab.x) * (orientation / len);
        }
        let verts = &self.sampled.vertices;
        let centroid =
            verts.iter().fold(Point::default(), |acc, &v| acc + v) * (1.0 / verts.len() as f64);
        let away = a - centroid;
        if away.length() > 0.0 {
            away * (1.0 / away.length())
        } else {
            Point::default()
        }
    }

    /// Nonzero-winding inside flags for the pixel centers of one row.
    fn row_inside(&self, cy: f64, x0: u32, crossings: &mut Vec<(f64, i32)>, inside: &mut [bool]) {
        let verts = &self.sampled.vertices;
        crossings.clear();
        for &(ia, ib) in &self.edges {
            let (a, b) = (verts[ia as usize], verts[ib as usize]);
            if (a.y <= cy) != (b.y <= cy) {
                let x = a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y);
                crossings.push((x, if b.y > a.y { 1 } else { -1 }));
            }
        }
        crossings.sort_by(|l, r| l.0.total_cmp(&r.0));
        let mut winding = 0;
        let mut next = 0;
        for (i, flag) in inside.iter_mut().enumerate() {
            let cx = (x0 + i as u32) as f64 + 0.5;
            while next < crossings.len() && crossings[next].0 < cx {
                winding += crossings[next].1;
                next += 1;
            }
            *flag = winding != 0;
        }
    }

    /// Whether a fragment projects onto the closing vertex of a closed path.
    fn at_corner(&self, frag: &Fragment) -> bool {
        let last = (self.sampled.vertices.len() - 1) as u32;
        match self.edges[frag.edge as usize] {
            (a, 0) if a == last => true,
            (0, _) => frag.t == 0.0,
            (_, b) if b == last => frag.t == 1.0,
            _ => false,
        }
    }

    /// Accumulates gradients given dL/dalpha and dL/dcolor for every fragment.
    fn accumulate(&self, path: &VectorPath, dl: &[[f64; 4]], out: &mut PathGrad) {
        let raw = match self.paint {
            Paint::Fill => path.fill,
            Paint::Stroke => path.stroke,
        }
        .unwrap_or(Color::BLACK)
        .channels();
        let mut color_grad = [0.0; 4];
        let mut vertex_grads = vec![Point::default(); self.sampled.vertices.len()];
        let mut width_grad = 0.0;
        let alpha = self.color.a;
        let verts = &self.sampled.vertices;
        let last = verts.len().saturating_sub(1);
        let shared_corner = path.closed && last > 0 && verts[0] == verts[last];
        for (frag, g) in self.fragments.iter().zip(dl) {
            let [d_alpha, dr, dg, db] = *g;
            color_grad[0] += dr;
            color_grad[1] += dg;
            color_grad[2] += db;
            color_grad[3] += d_alpha * frag.coverage;
            if frag.edge == u32::MAX || frag.dcov == 0.0 {
                continue;
            }
            let d_dist = d_alpha * alpha * frag.dcov;
            let (ia, ib) = self.edges[frag.edge as usize];
            if shared_corner && self.at_corner(frag) {
                // first and last control points coincide; either may move the corner
                let half = frag.normal * (0.5 * d_dist);
                vertex_grads[0] += half;
                vertex_grads[last] += half;
            } else {
                vertex_grads[ia as usize] += frag.normal * (d_dist * (1.0 - frag.t));
                vertex_grads[ib as usize] += frag.normal * (d_dist * frag.t);
            }
            if matches!(self.paint, Paint::Stroke) {
                width_grad -= 0.5 * d_dist;
            }
        }
        // clamped channels do not move the render
        for c in 0..4 {
            if !(0.0..=1.0).contains(&raw[c]) {
                color_grad[c] = 0.0;
            }
        }
        let target = match self.paint {
            Paint::Fill => &mut out.fill,
            Paint::Stroke => &mut out.stroke,
        };
        for c in 0..4 {
            target[c] += color_grad[c];
        }
        out.stroke_width += width_grad;
        for (i, g) in vertex_grads.iter().enumerate() {
            if *g != Point::default() {
                self.sampled.scatter(i, *g, &mut out.points);
            }
        }
    }
}

/// Inclusive range of pixel indices whose centers fall in `[lo, hi]`.
/// Shoelace signed area of a closed polyline.
fn signed_area(verts: &[Point]) -> f64 {
    let n = verts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (verts[i], verts[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

fn pixel_span(lo: f64, hi: f64, size: u32) -> Option<(u32, u32)> {
    let first = (lo - 0.5).ceil().max(0.0);
    let last = (hi - 0.5).floor().min(size as f64 - 1.0);
    if !(first <= last) {
        return None;
    }
    Some((first as u32, last as u32))
}

/// All layers of a scene plus a pixel-major index of their fragments.
struct Frame {
    width: u32,
    height: u32,
    layers: Vec<Layer>,
    /// CSR offsets into `entries`, one slot per pixel plus a sentinel.
    offsets: Vec<u32>,
    /// (layer, fragment) pairs in paint order within each pixel.
    entries: Vec<(u32, u32)>,
}

impl Frame {
    fn build(scene: &Scene, cfg: &RenderConfig) -> Frame {
        let (width, height) = scene.dims();
        let mut jobs = Vec::new();
        for (i, path) in scene.paths.iter().enumerate() {
            if let (true, Some(fill)) = (path.closed, path.fill) {
                jobs.push((i, Paint::Fill, fill));
            }
            if let Some(stroke) = path.stroke {
                jobs.push((i, Paint::Stroke, stroke));
            }
        }
        let layers: Vec<Layer> = jobs
            .into_par_iter()
            .map(|(i, paint, color)| {
                Layer::build(i, &scene.paths[i], paint, color, width, height, cfg)
            })
            .collect();

        let pixels = (width * height) as usize;
        let mut offsets = vec![0u32; pixels + 1];
        for layer in &layers {
            for f in &layer.fragments {
                offsets[f.pixel as usize + 1] += 1;
            }
        }
        for i in 0..pixels {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut entries = vec![(0u32, 0u32); offsets[pixels] as usize];
        for (li, layer) in layers.iter().enumerate() {
            for (fi, f) in layer.fragments.iter().enumerate() {
                let slot = &mut cursor[f.pixel as usize];
                entries[*slot as usize] = (li as u32, fi as u32);
                *slot += 1;
            }
        }
        Frame {
            width,
            height,
            layers,
            offsets,
            entries,
        }
    }

    fn entry_alpha_color(&self, entry: (u32, u32)) -> (f64, [f64; 3]) {
        let layer = &self.layers[entry.0 as usize];
        let frag = &layer.fragments[entry.1 as usize];
        let c = layer.color;
        (frag.coverage * c.a, [c.r, c.g, c.b])
    }

    fn composite(&self, background: Color) -> RasterImage {
        let bg = background.clamped();
        let base = [bg.r * bg.a, bg.g * bg.a, bg.b * bg.a, bg.a];
        let w = self.width as usize;
        let mut data = vec![0.0; w * self.height as usize * 4];
        data.par_chunks_mut(w * 4).enumerate().for_each(|(y, row)| {
            for x in 0..w {
                let pixel = y * w + x;
                let mut acc = base;
                let range = self.offsets[pixel] as usize..self.offsets[pixel + 1] as usize;
                for &entry in &self.entries[range] {
                    let (alpha, rgb) = self.entry_alpha_color(entry);
                    for c in 0..3 {
                        acc[c] = alpha * rgb[c] + (1.0 - alpha) * acc[c];
                    }
                    acc[3] = alpha + (1.0 - alpha) * acc[3];
                }
                for c in 0..4 {
                    row[x * 4 + c] = acc[c].clamp(0.0, 1.0);
                }
            }
        });
        RasterImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    fn backward(&self, scene: &Scene, grad: &GradImage) -> ParamGradients {
        let bg = scene.background.clamped();
        let base = [bg.r * bg.a, bg.g * bg.a, bg.b * bg.a, bg.a];
        let w = self.width as usize;

        // dL/dalpha and dL/drgb per entry, pixel-major
        let mut dl = vec![[0.0f64; 4]; self.entries.len()];
        let mut rows: Vec<&mut [[f64; 4]]> = Vec::with_capacity(self.height as usize);
        let mut rest = dl.as_mut_slice();
        for y in 0..self.height as usize {
            let len = (self.offsets[(y + 1) * w] - self.offsets[y * w]) as usize;
            let (head, tail) = rest.split_at_mut(len);
            rows.push(head);
            rest = tail;
        }
        rows.into_par_iter()
            .enumerate()
            .for_each_init(Vec::new, |below, (y, out)| {
                let row_start = self.offsets[y * w] as usize;
                for x in 0..w {
                    let pixel = y * w + x;
                    let start = self.offsets[pixel] as usize;
                    let end = self.offsets[pixel + 1] as usize;
                    if start == end {
                        continue;
                    }
                    let g = &grad.data[pixel * 4..pixel * 4 + 4];
                    below.clear();
                    let mut acc = base;
                    for &entry in &self.entries[start..end] {
                        below.push(acc);
                        let (alpha, rgb) = self.entry_alpha_color(entry);
                        for c in 0..3 {
                            acc[c] = alpha * rgb[c] + (1.0 - alpha) * acc[c];
                        }
                        acc[3] = alpha + (1.0 - alpha) * acc[3];
                    }
                    let mut transmit = 1.0;
                    for k in (start..end).rev() {
                        let (alpha, rgb) = self.entry_alpha_color(self.entries[k]);
                        let under = below[k - start];
                        let mut d_alpha = g[3] * (1.0 - under[3]);
                        for c in 0..3 {
                            d_alpha += g[c] * (rgb[c] - under[c]);
                        }
                        out[k - row_start] = [
                            transmit * d_alpha,
                            transmit * alpha * g[0],
                            transmit * alpha * g[1],
                            transmit * alpha * g[2],
                        ];
                        transmit *= 1.0 - alpha;
                    }
                }
            });

        // regroup per layer in fragment order, then accumulate per path
        let mut per_layer: Vec<Vec<[f64; 4]>> = self
            .layers
            .iter()
            .map(|l| vec![[0.0; 4]; l.fragments.len()])
            .collect();
        for (k, &(li, fi)) in self.entries.iter().enumerate() {
            per_layer[li as usize][fi as usize] = dl[k];
        }
        let partials: Vec<(usize, PathGrad)> = self
            .layers
            .par_iter()
            .zip(per_layer.par_iter())
            .map(|(layer, dl)| {
                let path = &scene.paths[layer.path];
                let mut g = PathGrad::zeros_like(path);
                layer.accumulate(path, dl, &mut g);
                (layer.path, g)
            })
            .collect();
        let mut grads = ParamGradients::zeros_like(scene);
        for (i, g) in &partials {
            grads.paths[*i].add_assign(g);
        }
        grads
    }
}
