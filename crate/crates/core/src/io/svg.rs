//! SVG output and the matching subset parser.
//!
//! Paths are written as absolute `M`/`C`/`Z` commands with four decimals.
//! Runs of consecutive paths that share an object become a `<g>` whose id is
//! `object-<i>`, with nested `object-<i>-part-<j>` groups for parts. An
//! object that shows up again after other paths gets a fresh group with a
//! `-run-<n>` suffix, so paint order is kept exactly.

use std::fmt::Write as _;

use crate::geometry::{Color, GroupLabel, Point, StyleClass, VectorPath};
use crate::raster::Scene;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("xml: {0}")]
    Xml(String),

    #[error(
        "line {line}, column {column}: unsupported path command `{command}` at offset {offset}"
    )]
    UnsupportedCommand {
        command: char,
        line: u32,
        column: u32,
        offset: usize,
    },

    #[error("line {line}, column {column}: {message}")]
    Malformed {
        line: u32,
        column: u32,
        message: String,
    },
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn hex(c: &Color) -> String {
    let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", q(c.r), q(c.g), q(c.b))
}

fn opacity(v: f64) -> String {
    let s = num(v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn path_data(path: &VectorPath) -> String {
    let mut d = String::new();
    let p0 = path.points[0];
    let _ = write!(d, "M {} {}", num(p0.x), num(p0.y));
    for seg in path.points[1..].chunks(3) {
        d.push_str(" C");
        for p in seg {
            let _ = write!(d, " {} {}", num(p.x), num(p.y));
        }
    }
    if path.closed {
        d.push_str(" Z");
    }
    d
}

fn write_path(out: &mut String, index: usize, path: &VectorPath, indent: usize) {
    let pad = "  ".repeat(indent);
    let _ = write!(
        out,
        "{pad}<path id=\"path-{index}\" class=\"{}\" d=\"{}\"",
        path.style.name(),
        path_data(path)
    );
    match &path.fill {
        Some(c) => {
            let _ = write!(
                out,
                " fill=\"{}\" fill-opacity=\"{}\"",
                hex(c),
                opacity(c.a)
            );
        }
        None => out.push_str(" fill=\"none\""),
    }
    match &path.stroke {
        Some(c) => {
            let _ = write!(
                out,
                " stroke=\"{}\" stroke-opacity=\"{}\" stroke-width=\"{}\" stroke-linecap=\"round\" stroke-linejoin=\"round\"",
                hex(c),
                opacity(c.a),
                num(path.stroke_width)
            );
        }
        None => out.push_str(" stroke=\"none\""),
    }
    out.push_str("/>\n");
}

/// Serializes a scene. Output depends only on the scene.
pub fn write_svg(scene: &Scene) -> String {
    let (w, h) = (scene.width, scene.height);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let bg = &scene.background;
    let _ = writeln!(
        out,
        "  <rect id=\"background\" x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"{}\" fill-opacity=\"{}\"/>",
        hex(bg),
        opacity(bg.a)
    );

    let mut object_runs: std::collections::HashMap<u32, usize> = Default::default();
    let mut part_runs: std::collections::HashMap<(u32, u32), usize> = Default::default();
    let mut i = 0;
    let paths = &scene.paths;
    while i < paths.len() {
        let Some(object) = paths[i].group.object else {
            write_path(&mut out, i, &paths[i], 1);
            i += 1;
            continue;
        };
        let run = object_runs.entry(object).or_insert(0);
        let _ = writeln!(
            out,
            "  <g id=\"{}\">",
            group_id(&format!("object-{object}"), *run)
        );
        *run += 1;
        while i < paths.len() && paths[i].group.object == Some(object) {
            match paths[i].group.part {
                None => {
                    write_path(&mut out, i, &paths[i], 2);
                    i += 1;
                }
                Some(part) => {
                    let run = part_runs.entry((object, part)).or_insert(0);
                    let base = format!("object-{object}-part-{part}");
                    let _ = writeln!(out, "    <g id=\"{}\">", group_id(&base, *run));
                    *run += 1;
                    let label = GroupLabel {
                        object: Some(object),
                        part: Some(part),
                    };
                    while i < paths.len() && paths[i].group == label {
                        write_path(&mut out, i, &paths[i], 3);
                        i += 1;
                    }
                    out.push_str("    </g>\n");
                }
            }
        }
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}

fn group_id(base: &str, run: usize) -> String {
    if run == 0 {
        base.to_string()
    } else {
        format!("{base}-run-{run}")
    }
}

struct Ctx<'a> {
    doc: &'a roxmltree::Document<'a>,
}

impl Ctx<'_> {
    fn pos(&self, node: roxmltree::Node) -> (u32, u32) {
        let p = self.doc.text_pos_at(node.range().start);
        (p.row, p.col)
    }

    fn malformed(&self, node: roxmltree::Node, message: impl Into<String>) -> SvgError {
        let (line, column) = self.pos(node);
        SvgError::Malformed {
            line,
            column,
            message: message.into(),
        }
    }

    fn attr_f64(&self, node: roxmltree::Node, name: &str) -> Result<Option<f64>, SvgError> {
        match node.attribute(name) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| self.malformed(node, format!("bad number in `{name}`: {v:?}"))),
        }
    }

    fn paint(
        &self,
        node: roxmltree::Node,
        color_attr: &str,
        opacity_attr: &str,
    ) -> Result<Option<Color>, SvgError> {
        let Some(value) = node.attribute(color_attr) else {
            return Ok(None);
        };
        if value == "none" {
            return Ok(None);
        }
        let rgb = parse_hex(value)
            .ok_or_else(|| self.malformed(node, format!("unsupported color {value:?}")))?;
        let a = self.attr_f64(node, opacity_attr)?.unwrap_or(1.0);
        if !(0.0..=1.0).contains(&a) {
            return Err(self.malformed(node, format!("`{opacity_attr}` outside [0, 1]")));
        }
        Ok(Some(Color::rgba(rgb[0], rgb[1], rgb[2], a)))
    }
}

fn parse_hex(s: &str) -> Option<[f64; 3]> {
    let h = s.strip_prefix('#')?;
    if h.len() != 6 || !h.is_ascii() {
        return None;
    }
    let mut out = [0.0; 3];
    for (i, v) in out.iter_mut().enumerate() {
        *v = u8::from_str_radix(&h[2 * i..2 * i + 2], 16).ok()? as f64 / 255.0;
    }
    Some(out)
}

/// Parses the absolute `M x y (C x y x y x y)* [Z]` subset.
fn parse_d(d: &str) -> Result<(Vec<Point>, bool), (usize, String, Option<char>)> {
    let bytes = d.as_bytes();
    let mut pos = 0;
    let mut points = Vec::new();
    let mut closed = false;
    let mut command: Option<char> = None;

    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && (bytes[*pos].is_ascii_whitespace() || bytes[*pos] == b',') {
            *pos += 1;
        }
    };
    let read_num = |pos: &mut usize| -> Result<f64, (usize, String, Option<char>)> {
        let start = *pos;
        while *pos < bytes.len()
            && matches!(bytes[*pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E')
        {
            *pos += 1;
        }
        d[start..*pos]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or((start, "expected a number".to_string(), None))
    };

    loop {
        skip_ws(&mut pos);
        if pos >= bytes.len() {
            break;
        }
        let c = bytes[pos] as char;
        if c.is_ascii_alphabetic() {
            if closed {
                return Err((pos, "commands after `Z`".into(), None));
            }
            match c {
                'M' if points.is_empty() => {}
                'M' => return Err((pos, "only one subpath is supported".into(), None)),
                'C' if !points.is_empty() => {}
                'Z' if !points.is_empty() => closed = true,
                'C' | 'Z' => return Err((pos, "path must start with `M`".into(), None)),
                other => return Err((pos, String::new(), Some(other))),
            }
            command = Some(c);
            pos += 1;
            continue;
        }
        let cmd = command.ok_or((pos, "path must start with `M`".to_string(), None))?;
        let x = read_num(&mut pos)?;
        skip_ws(&mut pos);
        let y = read_num(&mut pos)?;
        points.push(Point::new(x, y));
        if cmd == 'M' {
            // extra coordinate pairs after M would be implicit line-tos
            command = Some('L');
        }
        if cmd == 'L' {
            return Err((pos, String::new(), Some('L')));
        }
    }
    if points.is_empty() {
        return Err((0, "empty path data".into(), None));
    }
    if (points.len() - 1) % 3 != 0 || points.len() < 4 {
        return Err((
            d.len(),
            "`C` needs three coordinate pairs per segment".into(),
            None,
        ));
    }
    Ok((points, closed))
}

fn parse_group_id(id: &str) -> Option<GroupLabel> {
    let id = match id.find("-run-") {
        Some(k) => &id[..k],
        None => id,
    };
    let rest = id.strip_prefix("object-")?;
    let (object, part) = match rest.split_once("-part-") {
        Some((o, p)) => (o.parse().ok()?, Some(p.parse().ok()?)),
        None => (rest.parse().ok()?, None),
    };
    Some(GroupLabel {
        object: Some(object),
        part,
    })
}

fn walk(
    ctx: &Ctx,
    node: roxmltree::Node,
    label: GroupLabel,
    scene: &mut Scene,
) -> Result<(), SvgError> {
    for child in node.children().filter(|n| n.is_element()) {
        match child.tag_name().name() {
            "title" | "desc" | "metadata" => {}
            "rect" if child.attribute("id") == Some("background") => {
                scene.background = ctx
                    .paint(child, "fill", "fill-opacity")?
                    .unwrap_or(Color::rgba(1.0, 1.0, 1.0, 0.0));
            }
            "g" => {
                let sub = match child.attribute("id").and_then(parse_group_id) {
                    Some(l) => l,
                    None => label,
                };
                if label.object.is_some() && sub.object != label.object {
                    return Err(ctx.malformed(child, "part group outside its object"));
                }
                walk(ctx, child, sub, scene)?;
            }
            "path" => scene.paths.push(parse_path(ctx, child, label)?),
            other => return Err(ctx.malformed(child, format!("unsupported element <{other}>"))),
        }
    }
    Ok(())
}

fn parse_path(ctx: &Ctx, node: roxmltree::Node, label: GroupLabel) -> Result<VectorPath, SvgError> {
    let d = node
        .attribute("d")
        .ok_or_else(|| ctx.malformed(node, "path without `d`"))?;
    let (points, closed) = parse_d(d).map_err(|(offset, message, command)| {
        let (line, column) = ctx.pos(node);
        match command {
            Some(command) => SvgError::UnsupportedCommand {
                command,
                line,
                column,
                offset,
            },
            None => SvgError::Malformed {
                line,
                column,
                message: format!("path data at offset {offset}: {message}"),
            },
        }
    })?;
    let fill = ctx.paint(node, "fill", "fill-opacity")?;
    let stroke = ctx.paint(node, "stroke", "stroke-opacity")?;
    let stroke_width = match stroke {
        Some(_) => ctx.attr_f64(node, "stroke-width")?.unwrap_or(1.0),
        None => 0.0,
    };
    let style = match node.attribute("class") {
        Some(c) => c
            .parse::<StyleClass>()
            .map_err(|_| ctx.malformed(node, format!("unknown style class {c:?}")))?,
        None if fill.is_some() => StyleClass::Iconography,
        None => StyleClass::Painting,
    };
    Ok(VectorPath {
        points,
        closed,
        fill,
        stroke,
        stroke_width,
        style,
        group: label,
    })
}

/// Parses a document in the subset produced by [`write_svg`].
pub fn parse_svg(text: &str) -> Result<Scene, SvgError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| SvgError::Xml(e.to_string()))?;
    let ctx = Ctx { doc: &doc };
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(ctx.malformed(root, "root element is not <svg>"));
    }
    let dim = |name: &str| -> Result<u32, SvgError> {
        root.attribute(name)
            .and_then(|v| v.trim().trim_end_matches("px").parse::<u32>().ok())
            .filter(|v| *v > 0)
            .ok_or_else(|| ctx.malformed(root, format!("missing or invalid `{name}`")))
    };
    let mut scene = Scene::new(dim("width")?, dim("height")?, Color::WHITE);
    walk(&ctx, root, GroupLabel::NONE, &mut scene)?;
    Ok(scene)
}
