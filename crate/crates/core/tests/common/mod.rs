#![allow(dead_code)]

use maskvec::geometry::{polygon_points, Color, GroupLabel, Point, StyleClass, VectorPath};
use maskvec::masks::{BinaryMask, MaskSet};
use maskvec::raster::Scene;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn color(rng: &mut ChaCha8Rng, alpha: std::ops::Range<f64>) -> Color {
    Color::rgba(rng.gen(), rng.gen(), rng.gen(), rng.gen_range(alpha))
}

/// Star-shaped closed blob: `segments` cubic segments around `center`.
pub fn blob(rng: &mut ChaCha8Rng, center: Point, radius: f64, segments: usize) -> Vec<Point> {
    let n = 3 * segments;
    let mut pts: Vec<Point> = (0..n)
        .map(|k| {
            let a = k as f64 / n as f64 * std::f64::consts::TAU;
            let r = radius * rng.gen_range(0.7..1.2);
            center + Point::new(a.cos() * r, a.sin() * r)
        })
        .collect();
    pts.push(pts[0]);
    pts
}

/// A random valid path of the given style inside a `size x size` canvas.
pub fn random_path(rng: &mut ChaCha8Rng, style: StyleClass, size: f64) -> VectorPath {
    let margin = size * 0.15;
    let center = Point::new(
        rng.gen_range(margin..size - margin),
        rng.gen_range(margin..size - margin),
    );
    let radius = rng.gen_range(0.08..0.25) * size;
    match style {
        StyleClass::Iconography => {
            let segs = rng.gen_range(2..5);
            VectorPath::filled(blob(rng, center, radius, segs), color(rng, 0.3..1.0), style)
        }
        StyleClass::PixelArt => {
            let r = radius * 0.7;
            let corners = [
                center + Point::new(-r, -r),
                center + Point::new(r, -r),
                center + Point::new(r, r),
                center + Point::new(-r, r),
            ];
            VectorPath::filled(polygon_points(&corners), color(rng, 0.3..1.0), style)
        }
        StyleClass::LowPoly => {
            let corners: Vec<Point> = (0..4)
                .map(|k| {
                    let a = (k as f64 + rng.gen_range(-0.2..0.2)) * std::f64::consts::FRAC_PI_2;
                    center + Point::new(a.cos(), a.sin()) * (radius * rng.gen_range(0.7..1.1))
                })
                .collect();
            VectorPath::filled(polygon_points(&corners), color(rng, 0.3..1.0), style)
        }
        StyleClass::Painting | StyleClass::Sketching | StyleClass::InkWash => {
            let segs = rng.gen_range(1..4);
            let mut pts = vec![center];
            for _ in 0..3 * segs {
                let last = *pts.last().unwrap();
                let step = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * radius;
                let next = last + step;
                pts.push(Point::new(
                    next.x.clamp(1.0, size - 1.0),
                    next.y.clamp(1.0, size - 1.0),
                ));
            }
            let paint = match style.constraints().fixed_stroke_rgb {
                Some([r, g, b]) => Color::rgba(r, g, b, rng.gen_range(0.3..1.0)),
                None => color(rng, 0.3..1.0),
            };
            VectorPath::stroked(pts, paint, rng.gen_range(1.0..4.0), style)
        }
    }
}

/// Random scene with `1..=max_paths` paths; the first path uses `lead`.
pub fn random_scene(seed: u64, size: u32, max_paths: usize, lead: StyleClass) -> Scene {
    let mut rng = rng(seed);
    let bg = Color::rgba(rng.gen(), rng.gen(), rng.gen(), 1.0);
    let mut scene = Scene::new(size, size, bg);
    let n = rng.gen_range(1..=max_paths);
    for k in 0..n {
        let style = if k == 0 {
            lead
        } else {
            StyleClass::ALL[rng.gen_range(0..6)]
        };
        let mut path = random_path(&mut rng, style, size as f64);
        if rng.gen_bool(0.5) {
            path.group = GroupLabel {
                object: Some(rng.gen_range(0..3)),
                part: if rng.gen_bool(0.5) {
                    Some(rng.gen_range(0..2))
                } else {
                    None
                },
            };
        }
        scene.paths.push(path);
    }
    scene
}

/// The fixed 16-path iconography scene used as a reconstruction oracle.
pub fn oracle_scene(size: u32) -> Scene {
    let mut rng = rng(42);
    let s = size as f64 / 256.0;
    let mut scene = Scene::new(size, size, Color::WHITE);
    for _ in 0..16 {
        let c = Point::new(
            rng.gen_range(40.0..216.0) * s,
            rng.gen_range(40.0..216.0) * s,
        );
        let r = rng.gen_range(15.0..45.0) * s;
        let pts = blob(&mut rng, c, r, 4);
        let col = Color::rgba(rng.gen(), rng.gen(), rng.gen(), 1.0);
        scene
            .paths
            .push(VectorPath::filled(pts, col, StyleClass::Iconography));
    }
    scene
}

/// Random mask set: objects are random axis-aligned boxes (possibly
/// overlapping each other), parts are sub-boxes of their object.
pub fn random_masks(seed: u64, w: u32, h: u32) -> MaskSet {
    let mut rng = rng(seed);
    let n = rng.gen_range(0..5);
    let mut objects = Vec::new();
    let mut parts = Vec::new();
    for _ in 0..n {
        let x0 = rng.gen_range(0..w);
        let y0 = rng.gen_range(0..h);
        let x1 = rng.gen_range(x0..=w);
        let y1 = rng.gen_range(y0..=h);
        objects.push(BinaryMask::from_fn(w, h, |x, y| {
            x >= x0 && x < x1 && y >= y0 && y < y1
        }));
        let k = rng.gen_range(0..3);
        parts.push(
            (0..k)
                .map(|_| {
                    let px0 = rng.gen_range(x0..=x1);
                    let py0 = rng.gen_range(y0..=y1);
                    let px1 = rng.gen_range(px0..=x1);
                    let py1 = rng.gen_range(py0..=y1);
                    BinaryMask::from_fn(w, h, |x, y| x >= px0 && x < px1 && y >= py0 && y < py1)
                })
                .collect(),
        );
    }
    if objects.is_empty() {
        return MaskSet::whole_canvas(w, h);
    }
    MaskSet::new(objects, parts).expect("masks share dimensions")
}

/// Outcome of comparing analytic and central-difference gradients.
#[derive(Debug, Default, Clone)]
pub struct GradCheck {
    pub checked: usize,
    pub passed: usize,
    pub worst: Vec<String>,
}

impl GradCheck {
    pub fn merge(&mut self, other: GradCheck) {
        self.checked += other.checked;
        self.passed += other.passed;
        self.worst.extend(other.worst);
    }
}

fn boundary_side(v: f64) -> f64 {
    if v < 2e-4 {
        1.0
    } else if v > 1.0 - 2e-4 {
        -1.0
    } else {
        0.0
    }
}

fn weighted_sum(scene: &Scene, weights: &[f64]) -> f64 {
    maskvec::raster::render(scene)
        .data()
        .iter()
        .zip(weights)
        .map(|(a, b)| a * b)
        .sum()
}

/// Checks every parameter of `scene` against central differences of the
/// linear functional `sum(w * render)` for random weights `w`.
pub fn check_gradients(scene: &Scene, seed: u64) -> GradCheck {
    use maskvec::raster::{backward, GradImage};
    let mut rng = rng(seed ^ 0xfeed);
    let n = (scene.width * scene.height * 4) as usize;
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let grad_image = GradImage {
        width: scene.width,
        height: scene.height,
        data: weights.clone(),
    };
    let analytic = backward(scene, &grad_image).expect("dims match");
    let mut out = GradCheck::default();
    // `side` is 0 for a central difference, or +-1 for a one-sided
    // second-order difference away from a clamp boundary
    let mut compare =
        |label: String, a: f64, eps: f64, side: f64, set: &dyn Fn(&mut Scene, f64)| {
            let at = |h: f64| {
                let mut s = scene.clone();
                set(&mut s, h);
                weighted_sum(&s, &weights)
            };
            let numeric = if side == 0.0 {
                (at(eps) - at(-eps)) / (2.0 * eps)
            } else {
                let h = side * eps;
                (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h)
            };
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
            out.checked += 1;
            if rel <= 1e-3 || abs <= 1e-5 {
                out.passed += 1;
            } else {
                out.worst
                    .push(format!("{label}: analytic {a:.6e} numeric {numeric:.6e}"));
            }
        };
    for (k, path) in scene.paths.iter().enumerate() {
        let g = &analytic.paths[k];
        for i in 0..path.points.len() {
            compare(
                format!("path {k} point {i}.x"),
                g.points[i].x,
                1e-3,
                0.0,
                &|s, e| s.paths[k].points[i].x += e,
            );
            compare(
                format!("path {k} point {i}.y"),
                g.points[i].y,
                1e-3,
                0.0,
                &|s, e| s.paths[k].points[i].y += e,
            );
        }
        for c in 0..4 {
            if let Some(fill) = path.fill {
                let side = boundary_side(fill.channels()[c]);
                compare(
                    format!("path {k} fill[{c}]"),
                    g.fill[c],
                    1e-4,
                    side,
                    &|s, e| {
                        let mut ch = s.paths[k].fill.unwrap().channels();
                        ch[c] += e;
                        s.paths[k].fill = Some(Color::from_channels(ch));
                    },
                );
            }
            if let Some(stroke) = path.stroke {
                let side = boundary_side(stroke.channels()[c]);
                compare(
                    format!("path {k} stroke[{c}]"),
                    g.stroke[c],
                    1e-4,
                    side,
                    &|s, e| {
                        let mut ch = s.paths[k].stroke.unwrap().channels();
                        ch[c] += e;
                        s.paths[k].stroke = Some(Color::from_channels(ch));
                    },
                );
            }
        }
        if path.stroke.is_some() {
            compare(
                format!("path {k} width"),
                g.stroke_width,
                1e-3,
                0.0,
                &|s, e| s.paths[k].stroke_width += e,
            );
        }
    }
    out
}
