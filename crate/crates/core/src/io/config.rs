//! Run configuration files.
//!
//! Plain text, one `key = value` per line under `[section]` headers. Lines
//! starting with `#` or `;` are comments. Unknown sections and keys are
//! errors. Recognized keys:
//!
//! ```text
//! [run]      total_iters seed loss_mode background include_background
//! [lr]       warmup_iters point_start point_peak point_decay_start point_end color width
//! [control]  enabled tau_opacity tau_c tau_a start_iter interval indicator_points max_paths
//! [init]     paths_per_region segments_per_path radius_fraction style stroke_width
//! [render]   bandwidth tolerance supersample
//! ```

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Color, StyleClass};
use crate::optimize::{LossMode, RunConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },

    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },

    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

const SECTIONS: [&str; 5] = ["run", "lr", "control", "init", "render"];

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        message: e.to_string(),
    })
}

fn float(line: usize, key: &str, raw: &str) -> Result<f64, ConfigError> {
    let v: f64 = value(line, key, raw)?;
    if !v.is_finite() {
        return Err(ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            message: "not finite".into(),
        });
    }
    Ok(v)
}

fn boolean(line: usize, key: &str, raw: &str) -> Result<bool, ConfigError> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            message: format!("expected a boolean, got {raw:?}"),
        }),
    }
}

fn color(line: usize, key: &str, raw: &str) -> Result<Color, ConfigError> {
    let bad = || ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        message: format!("expected #rrggbb, got {raw:?}"),
    };
    let h = raw
        .strip_prefix('#')
        .filter(|h| h.len() == 6 && h.is_ascii())
        .ok_or_else(bad)?;
    let mut c = [1.0; 4];
    for (i, v) in c.iter_mut().take(3).enumerate() {
        *v = u8::from_str_radix(&h[2 * i..2 * i + 2], 16).map_err(|_| bad())? as f64 / 255.0;
    }
    Ok(Color::from_channels(c))
}

fn style(line: usize, key: &str, raw: &str) -> Result<StyleClass, ConfigError> {
    raw.parse::<StyleClass>()
        .map_err(|_| ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            message: format!("unknown style {raw:?}"),
        })
}

/// Sets one `section.key` on `cfg`. `line` is only used in errors.
pub fn apply_setting(
    cfg: &mut RunConfig,
    section: &str,
    key: &str,
    raw: &str,
    line: usize,
) -> Result<(), ConfigError> {
    let raw = raw.trim();
    match (section, key) {
        ("run", "total_iters") => {
            cfg.total_iters = value(line, key, raw)?;
            cfg.point_lr.total_iters = cfg.total_iters;
        }
        ("run", "seed") => cfg.seed = value(line, key, raw)?,
        ("run", "loss_mode") => {
            cfg.loss_mode = raw
                .parse::<LossMode>()
                .map_err(|e| ConfigError::InvalidValue {
                    line,
                    key: key.to_string(),
                    message: e.to_string(),
                })?
        }
        ("run", "background") => cfg.background = Some(color(line, key, raw)?),
        ("run", "include_background") => cfg.loss.include_background = boolean(line, key, raw)?,
        ("lr", "warmup_iters") => cfg.point_lr.warmup_iters = value(line, key, raw)?,
        ("lr", "point_start") => cfg.point_lr.warmup_start = float(line, key, raw)?,
        ("lr", "point_peak") => cfg.point_lr.warmup_peak = float(line, key, raw)?,
        ("lr", "point_decay_start") => cfg.point_lr.decay_start = float(line, key, raw)?,
        ("lr", "point_end") => cfg.point_lr.decay_end = float(line, key, raw)?,
        ("lr", "color") => cfg.color_lr = float(line, key, raw)?,
        ("lr", "width") => cfg.width_lr = float(line, key, raw)?,
        ("control", "enabled") => cfg.adaptive_control = boolean(line, key, raw)?,
        ("control", "tau_opacity") => cfg.control.tau_opacity = float(line, key, raw)?,
        ("control", "tau_c") => cfg.control.tau_c = float(line, key, raw)?,
        ("control", "tau_a") => cfg.area_threshold = Some(float(line, key, raw)?),
        ("control", "start_iter") => cfg.control.start_iter = value(line, key, raw)?,
        ("control", "interval") => cfg.control.interval = value(line, key, raw)?,
        ("control", "indicator_points") => cfg.control.indicator_points = value(line, key, raw)?,
        ("control", "max_paths") => cfg.max_paths = Some(value(line, key, raw)?),
        ("init", "paths_per_region") => cfg.init.num_paths_per_region = value(line, key, raw)?,
        ("init", "segments_per_path") => cfg.init.segments_per_path = value(line, key, raw)?,
        ("init", "radius_fraction") => cfg.init.radius_fraction = float(line, key, raw)?,
        ("init", "style") => cfg.init.style = style(line, key, raw)?,
        ("init", "stroke_width") => cfg.init.stroke_width = float(line, key, raw)?,
        ("render", "bandwidth") => cfg.render.bandwidth = float(line, key, raw)?,
        ("render", "tolerance") => cfg.render.tolerance = float(line, key, raw)?,
        ("render", "supersample") => cfg.render.supersample = value(line, key, raw)?,
        _ if !SECTIONS.contains(&section) => {
            return Err(ConfigError::UnknownSection {
                line,
                section: section.to_string(),
            })
        }
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                section: section.to_string(),
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

/// Applies a config file's settings on top of `base`.
pub fn parse_config_onto(text: &str, mut cfg: RunConfig) -> Result<RunConfig, ConfigError> {
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(ConfigError::Malformed {
                line,
                message: format!("unterminated section header {s:?}"),
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::UnknownSection {
                    line,
                    section: name.to_string(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, val) = s.split_once('=').ok_or(ConfigError::Malformed {
            line,
            message: format!("expected `key = value`, got {s:?}"),
        })?;
        let section = section.as_deref().ok_or(ConfigError::Malformed {
            line,
            message: "setting before any [section] header".into(),
        })?;
        apply_setting(&mut cfg, section, key.trim(), val, line)?;
    }
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_onto(text, RunConfig::default())
}

pub fn read_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = parse_config(&text)?;
    cfg.validate()?;
    Ok(cfg)
}
