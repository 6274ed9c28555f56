//! Cubic Bézier path geometry.
//!
//! A [`VectorPath`] is a chain of cubic segments sharing endpoints: points
//! `[0..=3]` form the first segment, `[3..=6]` the second, and so on. Closed
//! paths are closed by a straight edge from the last point back to the first
//! (the SVG `Z` command), which is zero-length when the two coincide.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flattening tolerance used for area, containment and bounding boxes.
pub const GEOMETRY_TOLERANCE: f64 = 0.1;

const MAX_SUBDIVISION_DEPTH: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).length()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, rhs: Point) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Straight (non-premultiplied) RGBA color with unit-interval channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Color {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub a: f64,
}

impl Color {
    pub const BLACK: Color = Color::rgba(0.0, 0.0, 0.0, 1.0);
    pub const WHITE: Color = Color::rgba(1.0, 1.0, 1.0, 1.0);
    pub const MID_GRAY: Color = Color::rgba(0.5, 0.5, 0.5, 1.0);

    pub const fn rgba(r: f64, g: f64, b: f64, a: f64) -> Self {
        Self { r, g, b, a }
    }

    pub fn channels(&self) -> [f64; 4] {
        [self.r, self.g, self.b, self.a]
    }

    pub fn from_channels(c: [f64; 4]) -> Self {
        Self::rgba(c[0], c[1], c[2], c[3])
    }

    pub fn clamped(&self) -> Color {
        Color::from_channels(self.channels().map(|v| v.clamp(0.0, 1.0)))
    }

    pub fn is_valid(&self) -> bool {
        self.channels()
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Option<Rect> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut rect = Rect {
            min: first,
            max: first,
        };
        for p in iter {
            rect.min.x = rect.min.x.min(p.x);
            rect.min.y = rect.min.y.min(p.y);
            rect.max.x = rect.max.x.max(p.x);
            rect.max.y = rect.max.y.max(p.y);
        }
        Some(rect)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point {
        self.min.lerp(self.max, 0.5)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            min: Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }
}

/// The six supported drawing styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleClass {
    Iconography,
    PixelArt,
    LowPoly,
    Painting,
    Sketching,
    InkWash,
}

/// Geometric kind of the primitives a style emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    /// Closed piecewise-cubic outline.
    ClosedCurve,
    /// Open piecewise-cubic stroke.
    OpenCurve,
    /// Square polygon encoded as four straight cubic segments.
    Square,
}

/// Which attributes of a path the optimizer may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trainable {
    pub points: bool,
    /// RGB channels of whichever paint (fill or stroke) the style uses.
    pub color: bool,
    pub opacity: bool,
    pub stroke_width: bool,
}

/// Constraint record attached to a [`StyleClass`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StyleConstraints {
    pub primitive: PrimitiveKind,
    pub closed: bool,
    pub has_fill: bool,
    pub has_stroke: bool,
    pub axis_aligned: bool,
    /// Stroke RGB pinned to this value (sketch and ink styles draw in black).
    pub fixed_stroke_rgb: Option<[f64; 3]>,
    pub trainable: Trainable,
}

impl StyleClass {
    pub const ALL: [StyleClass; 6] = [
        StyleClass::Iconography,
        StyleClass::PixelArt,
        StyleClass::LowPoly,
        StyleClass::Painting,
        StyleClass::Sketching,
        StyleClass::InkWash,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StyleClass::Iconography => "iconography",
            StyleClass::PixelArt => "pixelart",
            StyleClass::LowPoly => "lowpoly",
            StyleClass::Painting => "painting",
            StyleClass::Sketching => "sketching",
            StyleClass::InkWash => "inkwash",
        }
    }

    pub fn constraints(self) -> StyleConstraints {
        let fill = |primitive, points, axis_aligned| StyleConstraints {
            primitive,
            closed: true,
            has_fill: true,
            has_stroke: false,
            axis_aligned,
            fixed_stroke_rgb: None,
            trainable: Trainable {
                points,
                color: true,
                opacity: true,
                stroke_width: false,
            },
        };
        let stroke = |color, stroke_width, fixed| StyleConstraints {
            primitive: PrimitiveKind::OpenCurve,
            closed: false,
            has_fill: false,
            has_stroke: true,
            axis_aligned: false,
            fixed_stroke_rgb: fixed,
            trainable: Trainable {
                points: true,
                color,
                opacity: true,
                stroke_width,
            },
        };
        match self {
            StyleClass::Iconography => fill(PrimitiveKind::ClosedCurve, true, false),
            StyleClass::PixelArt => fill(PrimitiveKind::Square, false, true),
            StyleClass::LowPoly => fill(PrimitiveKind::Square, true, false),
            StyleClass::Painting => stroke(true, true, None),
            StyleClass::Sketching => stroke(false, false, Some([0.0; 3])),
            StyleClass::InkWash => stroke(false, true, Some([0.0; 3])),
        }
    }

    pub fn is_stroke_style(self) -> bool {
        self.constraints().has_stroke
    }
}

impl fmt::Display for StyleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StyleClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        StyleClass::ALL
            .into_iter()
            .find(|style| style.name() == key)
            .ok_or_else(|| Error::Contract(format!("unknown style `{s}`")))
    }
}

/// Object / part membership of a path, mirrored by SVG group nesting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GroupLabel {
    pub object: Option<u32>,
    pub part: Option<u32>,
}

impl GroupLabel {
    pub const NONE: GroupLabel = GroupLabel {
        object: None,
        part: None,
    };

    pub fn object(object: u32) -> Self {
        Self {
            object: Some(object),
            part: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorPath {
    pub points: Vec<Point>,
    pub closed: bool,
    pub fill: Option<Color>,
    pub stroke: Option<Color>,
    pub stroke_width: f64,
    pub style: StyleClass,
    pub group: GroupLabel,
}

impl VectorPath {
    /// A closed, filled path in the given style.
    pub fn filled(points: Vec<Point>, fill: Color, style: StyleClass) -> Self {
        Self {
            points,
            closed: true,
            fill: Some(fill),
            stroke: None,
            stroke_width: 0.0,
            style,
            group: GroupLabel::NONE,
        }
    }

    /// An open stroked path in the given style.
    pub fn stroked(points: Vec<Point>, stroke: Color, width: f64, style: StyleClass) -> Self {
        Self {
            points,
            closed: false,
            fill: None,
            stroke: Some(stroke),
            stroke_width: width,
            style,
            group: GroupLabel::NONE,
        }
    }

    /// Closed four-segment path tracing the rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, fill: Color) -> Self {
        let corners = [
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ];
        Self::filled(polygon_points(&corners), fill, StyleClass::Iconography)
    }

    pub fn segment_count(&self) -> usize {
        self.points.len().saturating_sub(1) / 3
    }

    pub fn segment(&self, index: usize) -> [Point; 4] {
        let base = index * 3;
        [
            self.points[base],
            self.points[base + 1],
            self.points[base + 2],
            self.points[base + 3],
        ]
    }

    /// Paint whose alpha decides pruning: fill for filled paths, stroke otherwise.
    pub fn paint(&self) -> Option<Color> {
        self.fill.or(self.stroke)
    }

    pub fn opacity(&self) -> f64 {
        self.paint().map_or(0.0, |c| c.a)
    }

    pub fn translated(&self, offset: Point) -> VectorPath {
        let mut out = self.clone();
        out.points.iter_mut().for_each(|p| *p += offset);
        out
    }

    /// Uniformly scales coordinates (and stroke width) about the origin.
    pub fn scaled(&self, factor: f64) -> VectorPath {
        let mut out = self.clone();
        out.points.iter_mut().for_each(|p| *p = *p * factor);
        out.stroke_width *= factor;
        out
    }

    /// Lists every structural or style invariant this path breaks.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.points.len();
        if n < 4 || n % 3 != 1 {
            out.push(format!("point count {n} is not 1 (mod 3) and >= 4"));
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            out.push("non-finite control point".into());
        }
        if !self.closed && self.fill.is_some() {
            out.push("open path carries a fill".into());
        }
        if self.fill.is_some() == self.stroke.is_some() {
            out.push("exactly one of fill or stroke must be present".into());
        }
        for (name, color) in [("fill", self.fill), ("stroke", self.stroke)] {
            if let Some(c) = color {
                if !c.is_valid() {
                    out.push(format!("{name} color outside the unit interval"));
                }
            }
        }
        if self.stroke.is_some() && !(self.stroke_width > 0.0 && self.stroke_width.is_finite()) {
            out.push(format!(
                "stroke width {} must be positive",
                self.stroke_width
            ));
        }
        let c = self.style.constraints();
        if c.closed != self.closed {
            out.push(format!(
                "style {} requires closed = {}",
                self.style, c.closed
            ));
        }
        if c.has_fill != self.fill.is_some() || c.has_stroke != self.stroke.is_some() {
            out.push(format!("paint kind does not match style {}", self.style));
        }
        if let (Some(rgb), Some(stroke)) = (c.fixed_stroke_rgb, self.stroke) {
            if [stroke.r, stroke.g, stroke.b] != rgb {
                out.push(format!("style {} pins the stroke color", self.style));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some(v) => Err(Error::Contract(v.clone())),
        }
    }
}

/// Control points of a closed polygon whose edges are straight cubics.
pub fn polygon_points(corners: &[Point]) -> Vec<Point> {
    let mut points = Vec::with_capacity(corners.len() * 3 + 1);
    for (i, &a) in corners.iter().enumerate() {
        let b = corners[(i + 1) % corners.len()];
        points.push(a);
        points.push(a.lerp(b, 1.0 / 3.0));
        points.push(a.lerp(b, 2.0 / 3.0));
    }
    points.push(corners[0]);
    points
}

pub fn cubic_point(seg: &[Point; 4], t: f64) -> Point {
    let w = bernstein(t);
    seg[0] * w[0] + seg[1] * w[1] + seg[2] * w[2] + seg[3] * w[3]
}

/// Cubic Bernstein basis at `t`.
pub fn bernstein(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t]
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.length_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(a + ab * t)
}

/// Adaptive de Casteljau flattening.
///
/// Each cubic is halved until both inner control points lie within
/// `tolerance` of the chord, which bounds the curve's deviation from it.
/// Closed paths return a polyline whose last point equals its first.
pub fn flatten(path: &VectorPath, tolerance: f64) -> Vec<Point> {
    assert!(tolerance > 0.0, "flatten tolerance must be positive");
    let Some(&first) = path.points.first() else {
        return Vec::new();
    };
    let mut out = vec![first];
    for i in 0..path.segment_count() {
        subdivide(&path.segment(i), tolerance, 0, &mut out);
    }
    if path.closed && out.last() != Some(&first) {
        out.push(first);
    }
    out
}

fn subdivide(seg: &[Point; 4], tolerance: f64, depth: u32, out: &mut Vec<Point>) {
    let flat = point_segment_distance(seg[1], seg[0], seg[3])
        .max(point_segment_distance(seg[2], seg[0], seg[3]));
    if flat <= tolerance || depth >= MAX_SUBDIVISION_DEPTH {
        out.push(seg[3]);
        return;
    }
    let ab = seg[0].lerp(seg[1], 0.5);
    let bc = seg[1].lerp(seg[2], 0.5);
    let cd = seg[2].lerp(seg[3], 0.5);
    let abc = ab.lerp(bc, 0.5);
    let bcd = bc.lerp(cd, 0.5);
    let mid = abc.lerp(bcd, 0.5);
    subdivide(&[seg[0], ab, abc, mid], tolerance, depth + 1, out);
    subdivide(&[mid, bcd, cd, seg[3]], tolerance, depth + 1, out);
}

/// Signed shoelace area of a polyline treated as a closed polygon.
pub fn polygon_signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum();
    0.5 * twice
}

/// Nonzero winding number of `p` with respect to a closed polygon.
pub fn winding_number(poly: &[Point], p: Point) -> i32 {
    let n = poly.len();
    let mut winding = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = (b - a).cross(p - a);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                winding += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            winding -= 1;
        }
    }
    winding
}

pub fn polyline_distance(poly: &[Point], p: Point) -> f64 {
    match poly {
        [] => f64::INFINITY,
        [only] => p.distance(*only),
        _ => poly
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Absolute area of a closed path.
pub fn path_area(path: &VectorPath) -> Result<f64> {
    if !path.closed {
        return Err(Error::Contract("path_area requires a closed path".into()));
    }
    Ok(polygon_signed_area(&flatten(path, GEOMETRY_TOLERANCE)).abs())
}

/// Containment: nonzero winding for closed paths, stroke coverage for open ones.
pub fn point_in_path(path: &VectorPath, p: Point) -> bool {
    let poly = flatten(path, GEOMETRY_TOLERANCE);
    if path.closed {
        winding_number(&poly, p) != 0
    } else {
        polyline_distance(&poly, p) <= path.stroke_width / 2.0
    }
}

pub fn path_bbox(path: &VectorPath) -> Rect {
    Rect::from_points(flatten(path, GEOMETRY_TOLERANCE)).unwrap_or(Rect {
        min: Point::default(),
        max: Point::default(),
    })
}

/// Area centroid of a closed path, falling back to the vertex mean when the
/// area vanishes.
pub fn path_centroid(path: &VectorPath) -> Point {
    let poly = flatten(path, GEOMETRY_TOLERANCE);
    let area = polygon_signed_area(&poly);
    let n = poly.len();
    if area.abs() > 1e-12 && n >= 3 {
        let mut c = Point::default();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            c += (a + b) * a.cross(b);
        }
        return c * (1.0 / (6.0 * area));
    }
    let sum = poly.iter().fold(Point::default(), |acc, &p| acc + p);
    sum * (1.0 / n.max(1) as f64)
}

/// Splits an over-represented path into two halves of half the area each.
///
/// The path is compressed by 1/2 along the longer axis of its bounding box
/// (about the box center), and the two copies are shifted by a quarter of
/// that extent in opposite directions so they tile the original footprint.
/// The first child lies toward the lower coordinate.
pub fn split_path(path: &VectorPath) -> Result<(VectorPath, VectorPath)> {
    if !path.closed {
        return Err(Error::Contract("split_path requires a closed path".into()));
    }
    let area = path_area(path)?;
    if !(area > 0.0) {
        return Err(Error::Degenerate(
            "cannot split a zero-area path; prune it instead".into(),
        ));
    }
    let bbox = path_bbox(path);
    let center = bbox.center();
    let horizontal = bbox.width() >= bbox.height();
    let quarter = if horizontal {
        Point::new(bbox.width() / 4.0, 0.0)
    } else {
        Point::new(0.0, bbox.height() / 4.0)
    };
    let squeeze = |p: Point| {
        let d = p - center;
        if horizontal {
            Point::new(center.x + 0.5 * d.x, p.y)
        } else {
            Point::new(p.x, center.y + 0.5 * d.y)
        }
    };
    let child = |offset: Point| {
        let mut out = path.clone();
        out.points = path.points.iter().map(|&p| squeeze(p) + offset).collect();
        out
    };
    Ok((child(-quarter), child(quarter)))
}

/// Duplicates a path and places the copy adjacent to it along `direction`.
///
/// The offset is the extent of the bounding box measured along the
/// direction, so axis-aligned clones abut the original.
pub fn clone_path(path: &VectorPath, direction: Point) -> Result<VectorPath> {
    let len = direction.length();
    if !direction.is_finite() || (len - 1.0).abs() > 1e-6 {
        return Err(Error::Contract(format!(
            "clone direction must be a unit vector, got ({}, {})",
            direction.x, direction.y
        )));
    }
    let bbox = path_bbox(path);
    let extent = bbox.width() * direction.x.abs() + bbox.height() * direction.y.abs();
    Ok(path.translated(direction * extent))
}

/// Uniform-parameter polyline used by the rasterizer.
///
/// Every vertex remembers the segment and parameter it was sampled at, so
/// gradients with respect to vertices can be pushed back to control points
/// through the Bernstein weights.
#[derive(Debug, Clone, Default)]
pub struct SampledPath {
    pub vertices: Vec<Point>,
    pub sources: Vec<(u32, f64)>,
}

impl SampledPath {
    /// Samples each cubic at `n` uniform steps, with `n` chosen so the chord
    /// error stays below `tolerance`.
    pub fn new(path: &VectorPath, tolerance: f64) -> Self {
        let mut out = SampledPath::default();
        let Some(&first) = path.points.first() else {
            return out;
        };
        out.vertices.push(first);
        out.sources.push((0, 0.0));
        for s in 0..path.segment_count() {
            let seg = path.segment(s);
            let n = uniform_steps(&seg, tolerance);
            for k in 1..=n {
                let t = k as f64 / n as f64;
                out.vertices.push(cubic_point(&seg, t));
                out.sources.push((s as u32, t));
            }
        }
        out
    }

    /// Adds `grad` (with respect to vertex `index`) into per-control-point gradients.
    pub fn scatter(&self, index: usize, grad: Point, point_grads: &mut [Point]) {
        let (seg, t) = self.sources[index];
        let w = bernstein(t);
        let base = seg as usize * 3;
        for (i, wi) in w.iter().enumerate() {
            if let Some(g) = point_grads.get_mut(base + i) {
                *g += grad * *wi;
            }
        }
    }
}

/// Even a tiny segment gets interior samples, so that its inner control
/// points still receive gradient and the shape can grow.
const MIN_STEPS: usize = 4;

fn uniform_steps(seg: &[Point; 4], tolerance: f64) -> usize {
    let d1 = (seg[0] - seg[1] * 2.0 + seg[2]).length();
    let d2 = (seg[1] - seg[2] * 2.0 + seg[3]).length();
    // chord error of n uniform steps <= 6 * max|second difference| / (8 n^2)
    let n = (0.75 * d1.max(d2) / tolerance).sqrt().ceil();
    if n.is_finite() {
        (n as usize).clamp(MIN_STEPS, 128)
    } else {
        MIN_STEPS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect_path() -> VectorPath {
        VectorPath::rectangle(0.0, 0.0, 100.0, 200.0, Color::rgba(1.0, 0.0, 0.0, 1.0))
    }

    /// Standard four-cubic circle approximation.
    fn circle_path(cx: f64, cy: f64, r: f64) -> VectorPath {
        let k = 0.552_284_749_8 * r;
        let pts = vec![
            Point::new(cx + r, cy),
            Point::new(cx + r, cy + k),
            Point::new(cx + k, cy + r),
            Point::new(cx, cy + r),
            Point::new(cx - k, cy + r),
            Point::new(cx - r, cy + k),
            Point::new(cx - r, cy),
            Point::new(cx - r, cy - k),
            Point::new(cx - k, cy - r),
            Point::new(cx, cy - r),
            Point::new(cx + k, cy - r),
            Point::new(cx + r, cy - k),
            Point::new(cx + r, cy),
        ];
        VectorPath::filled(pts, Color::BLACK, StyleClass::Iconography)
    }

    /// Signed crossings of a rightward horizontal ray.
    fn ray_cast_winding(poly: &[Point], p: Point) -> i32 {
        let mut winding = 0;
        let n = poly.len();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    winding += if b.y > a.y { 1 } else { -1 };
                }
            }
        }
        winding
    }

    fn ray_cast_inside(poly: &[Point], p: Point) -> bool {
        // even-odd crossing count on a horizontal ray; only used on simple shapes
        let mut inside = false;
        let n = poly.len();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    #[test]
    fn straight_cubic_flattens_to_endpoints() {
        let path = VectorPath::stroked(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(2.0, 2.0),
                Point::new(3.0, 3.0),
            ],
            Color::BLACK,
            1.0,
            StyleClass::Sketching,
        );
        assert_eq!(
            flatten(&path, 0.5),
            vec![Point::new(0.0, 0.0), Point::new(3.0, 3.0)]
        );
    }

    #[test]
    fn quarter_circle_points_stay_near_radius() {
        let k = 0.552_284_749_8;
        let path = VectorPath::stroked(
            vec![
                Point::new(1.0, 0.0),
                Point::new(1.0, k),
                Point::new(k, 1.0),
                Point::new(0.0, 1.0),
            ],
            Color::BLACK,
            1.0,
            StyleClass::Sketching,
        );
        let poly = flatten(&path, 1e-3);
        assert!(poly.len() > 4);
        for p in &poly {
            assert!(p.length() <= 1.0 + 1e-3, "{p:?}");
        }
        // dense parameter sweep: every curve sample is within tolerance of the polyline
        let seg = path.segment(0);
        for i in 0..=2000 {
            let c = cubic_point(&seg, i as f64 / 2000.0);
            assert!(polyline_distance(&poly, c) <= 1e-3 + 1e-12);
        }
    }

    #[test]
    fn closed_path_flattens_closed() {
        let poly = flatten(&circle_path(5.0, 5.0, 3.0), 0.1);
        assert_eq!(poly.first(), poly.last());
    }

    #[test]
    fn rectangle_area() {
        let area = path_area(&rect_path()).unwrap();
        assert!((area - 20000.0).abs() <= 200.0, "{area}");
    }

    #[test]
    fn degenerate_area_is_zero() {
        let path = VectorPath::filled(
            vec![Point::new(3.0, 4.0); 7],
            Color::BLACK,
            StyleClass::Iconography,
        );
        assert_eq!(path_area(&path).unwrap(), 0.0);
    }

    #[test]
    fn open_path_area_is_contract_error() {
        let mut path = rect_path();
        path.closed = false;
        assert!(matches!(path_area(&path), Err(Error::Contract(_))));
    }

    #[test]
    fn blob_area_matches_pixel_count() {
        let mut path = circle_path(50.0, 50.0, 30.0);
        path.points[4] = Point::new(30.0, 95.0);
        path.points[10] = Point::new(70.0, 10.0);
        let poly = flatten(&path, 0.1);
        let mut count = 0usize;
        let n = 4;
        for y in 0..100 * n {
            for x in 0..100 * n {
                let p = Point::new((x as f64 + 0.5) / n as f64, (y as f64 + 0.5) / n as f64);
                if ray_cast_inside(&poly, p) {
                    count += 1;
                }
            }
        }
        let raster_area = count as f64 / (n * n) as f64;
        let area = path_area(&path).unwrap();
        assert!((area - raster_area).abs() / raster_area < 0.02);
    }

    #[test]
    fn containment_basics() {
        let path = rect_path();
        assert!(point_in_path(&path, Point::new(50.0, 100.0)));
        assert!(!point_in_path(&path, Point::new(150.0, 100.0)));
    }

    #[test]
    fn self_overlapping_annulus_matches_winding() {
        // outer circle counter-clockwise, inner loop traversed the same way:
        // the hole has winding 2 under nonzero rule, so it is filled.
        let outer = circle_path(50.0, 50.0, 40.0);
        let inner = circle_path(50.0, 50.0, 15.0);
        let mut pts = outer.points.clone();
        pts.extend_from_slice(&[
            outer.points[12].lerp(inner.points[0], 1.0 / 3.0),
            outer.points[12].lerp(inner.points[0], 2.0 / 3.0),
        ]);
        pts.extend_from_slice(&inner.points);
        let path = VectorPath::filled(pts, Color::BLACK, StyleClass::Iconography);
        assert_eq!(path.points.len() % 3, 1);
        let poly = flatten(&path, 0.1);
        assert_eq!(winding_number(&poly, Point::new(50.0, 50.0)), 2);
        assert!(point_in_path(&path, Point::new(50.0, 50.0)));
        // the even-odd oracle disagrees only where winding is even and nonzero
        assert!(!ray_cast_inside(&poly, Point::new(50.0, 50.0)));
        assert!(ray_cast_inside(&poly, Point::new(50.0, 80.0)));
        assert!(point_in_path(&path, Point::new(50.0, 80.0)));
    }

    #[test]
    fn bbox_of_rectangle_and_segment() {
        let b = path_bbox(&rect_path());
        assert_eq!(b.min, Point::new(0.0, 0.0));
        assert_eq!(b.max, Point::new(100.0, 200.0));
        let seg = VectorPath::stroked(
            vec![
                Point::new(0.0, 0.0),
                Point::new(10.0, 30.0),
                Point::new(20.0, -30.0),
                Point::new(30.0, 5.0),
            ],
            Color::BLACK,
            1.0,
            StyleClass::Painting,
        );
        let b = path_bbox(&seg);
        assert!(b.contains(Point::new(0.0, 0.0)) && b.contains(Point::new(30.0, 5.0)));
    }

    #[test]
    fn split_rectangle() {
        let (a, b) = split_path(&rect_path()).unwrap();
        for child in [&a, &b] {
            let area = path_area(child).unwrap();
            assert!((area - 10000.0).abs() <= 200.0, "{area}");
            assert_eq!(child.points.len(), 13);
            assert_eq!(child.fill, rect_path().fill);
        }
        let union = path_bbox(&a).union(&path_bbox(&b));
        let orig = path_bbox(&rect_path());
        assert!((union.width() - orig.width()).abs() <= 0.1 * orig.width());
        assert!((union.height() - orig.height()).abs() <= 0.1 * orig.height());
        assert!((union.min.x - orig.min.x).abs() <= 0.1 * orig.width());
        assert!((union.min.y - orig.min.y).abs() <= 0.1 * orig.height());
    }

    #[test]
    fn split_rejects_degenerate() {
        let path = VectorPath::filled(
            vec![Point::new(1.0, 1.0); 4],
            Color::BLACK,
            StyleClass::Iconography,
        );
        assert!(matches!(split_path(&path), Err(Error::Degenerate(_))));
    }

    #[test]
    fn clone_abuts_to_the_right() {
        let path = VectorPath::rectangle(0.0, 0.0, 40.0, 20.0, Color::BLACK);
        let copy = clone_path(&path, Point::new(1.0, 0.0)).unwrap();
        let (ob, cb) = (path_bbox(&path), path_bbox(&copy));
        assert!((cb.min.x - ob.max.x).abs() <= 1.0);
        assert!(!point_in_path(&copy, path_centroid(&path)));
        assert!(matches!(
            clone_path(&path, Point::new(0.0, 0.0)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn style_round_trips_through_name() {
        for style in StyleClass::ALL {
            assert_eq!(style.name().parse::<StyleClass>().unwrap(), style);
        }
        assert_eq!(
            "Pixel-Art".parse::<StyleClass>().unwrap(),
            StyleClass::PixelArt
        );
    }

    fn arb_closed_path() -> impl Strategy<Value = VectorPath> {
        (
            1usize..4,
            proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 12),
        )
            .prop_map(|(segs, raw)| {
                let mut pts: Vec<Point> = raw
                    .into_iter()
                    .take(segs * 3)
                    .map(|(x, y)| Point::new(x, y))
                    .collect();
                pts.push(pts[0]);
                VectorPath::filled(pts, Color::MID_GRAY, StyleClass::Iconography)
            })
    }

    fn arb_convex_path() -> impl Strategy<Value = VectorPath> {
        (
            3usize..9,
            5.0f64..60.0,
            5.0f64..60.0,
            0.0f64..std::f64::consts::TAU,
        )
            .prop_map(|(n, rx, ry, phase)| {
                let corners: Vec<Point> = (0..n)
                    .map(|i| {
                        let a = phase + i as f64 * std::f64::consts::TAU / n as f64;
                        Point::new(100.0 + rx * a.cos(), 100.0 + ry * a.sin())
                    })
                    .collect();
                VectorPath::filled(
                    polygon_points(&corners),
                    Color::MID_GRAY,
                    StyleClass::LowPoly,
                )
            })
    }

    proptest! {
        #[test]
        fn flatten_is_scale_covariant(path in arb_closed_path(), s in 0.25f64..4.0) {
            let base = flatten(&path, 0.2);
            let scaled = flatten(&path.scaled(s), 0.2 * s);
            prop_assert_eq!(base.len(), scaled.len());
            for (a, b) in base.iter().zip(&scaled) {
                prop_assert!((*a * s - *b).length() <= 1e-9 * (1.0 + s * a.length()));
            }
        }

        #[test]
        fn split_conserves_convex_area(path in arb_convex_path()) {
            let area = path_area(&path).unwrap();
            let (a, b) = split_path(&path).unwrap();
            let sum = path_area(&a).unwrap() + path_area(&b).unwrap();
            prop_assert!((sum - area).abs() <= 0.05 * area);
        }

        #[test]
        fn split_and_clone_keep_structure(path in arb_closed_path(), angle in 0.0f64..6.3) {
            let dir = Point::new(angle.cos(), angle.sin());
            let copy = clone_path(&path, dir).unwrap();
            prop_assert_eq!(copy.points.len() % 3, 1);
            prop_assert!(copy.points.iter().all(|p| p.is_finite()));
            if path_area(&path).unwrap() > 0.0 {
                let (a, b) = split_path(&path).unwrap();
                for c in [a, b] {
                    prop_assert_eq!(c.points.len(), path.points.len());
                    prop_assert!(c.points.iter().all(|p| p.is_finite()));
                }
            }
        }

        #[test]
        fn containment_matches_ray_cast_on_convex(path in arb_convex_path(),
                                                    x in 30.0f64..170.0, y in 30.0f64..170.0) {
            let poly = flatten(&path, GEOMETRY_TOLERANCE);
            let p = Point::new(x, y);
            prop_assert_eq!(point_in_path(&path, p), ray_cast_inside(&poly, p));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn containment_matches_signed_ray_cast(path in arb_closed_path(),
                                               x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let poly = flatten(&path, GEOMETRY_TOLERANCE);
            let p = Point::new(x, y);
            prop_assert_eq!(point_in_path(&path, p), ray_cast_winding(&poly, p) != 0);
        }

        #[test]
        fn bbox_contains_flattened_points(path in arb_closed_path()) {
            let bbox = path_bbox(&path);
            for p in flatten(&path, GEOMETRY_TOLERANCE) {
                prop_assert!(bbox.contains(p));
            }
        }
    }
}
