//! File formats: SVG scenes, PNG rasters and masks, run configs, run traces.

pub mod config;
pub mod png;
pub mod svg;
pub mod trace;

pub use config::{parse_config, read_config, ConfigError};
pub use png::{read_importance, read_mask, read_png, write_png};
pub use svg::{parse_svg, write_svg, SvgError};
pub use trace::{read_trace, RunTrace, TraceRecord, TraceSummary};
