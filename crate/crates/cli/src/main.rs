//! `maskvec` command-line driver.
//!
//! Every flag can also be set through an environment variable named
//! `MASKVEC_<FLAG>`, e.g. `MASKVEC_SEED=3`. Flags beat the config file,
//! which beats the built-in defaults.
//!
//! Exit status: 0 on success, 1 when the loss stops being finite, 2 for
//! any input or usage problem. Failures print one line to stderr:
//! `error: kind=<kind>: <message>`.

mod maskdir;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maskvec::io::{self, config::apply_setting};
use maskvec::masks;
use maskvec::optimize::{run_vectorize, LossMode, RunConfig};
use maskvec::raster::{render_with, RenderConfig};
use maskvec::{Error, StyleClass};

#[derive(Parser, Debug)]
#[command(name = "maskvec", version, about = "Mask-guided image vectorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit vector paths to a PNG target and write an SVG plus a run trace.
    Vectorize(VectorizeArgs),
    /// Rasterize an SVG produced by `vectorize`.
    Render(RenderArgs),
    /// Summarize a run trace: loss statistics and control events.
    TraceReport {
        #[arg(env = "MASKVEC_TRACE")]
        trace: PathBuf,
    },
    /// Check a masks directory (object_<i>.png, part_<i>_<j>.png).
    ValidateMasks {
        #[arg(env = "MASKVEC_MASKS")]
        dir: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct VectorizeArgs {
    /// Target image (PNG).
    #[arg(env = "MASKVEC_TARGET")]
    target: PathBuf,
    /// Directory of object_<i>.png and part_<i>_<j>.png masks.
    #[arg(long, env = "MASKVEC_MASKS")]
    masks: Option<PathBuf>,
    /// Grayscale importance map (PNG); edge strength of the target otherwise.
    #[arg(long, env = "MASKVEC_IMPORTANCE")]
    importance: Option<PathBuf>,
    /// iconography, pixelart, lowpoly, painting, sketching or inkwash.
    #[arg(long, env = "MASKVEC_STYLE")]
    style: Option<StyleClass>,
    /// Run config file (`[section]` headers, `key = value` lines).
    #[arg(long, env = "MASKVEC_CONFIG")]
    config: Option<PathBuf>,
    /// Output SVG; the trace goes next to it with a .trace extension.
    #[arg(long, env = "MASKVEC_OUT", default_value = "out.svg")]
    out: PathBuf,
    /// Trace path, overriding the one derived from --out.
    #[arg(long, env = "MASKVEC_TRACE_OUT")]
    trace: Option<PathBuf>,
    #[arg(long, env = "MASKVEC_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "MASKVEC_ITERS")]
    iters: Option<usize>,
    /// sive (object level) or hive (object and part level).
    #[arg(long, env = "MASKVEC_MODE")]
    mode: Option<LossMode>,
    #[arg(long, env = "MASKVEC_PATHS_PER_REGION")]
    paths_per_region: Option<usize>,
    #[arg(long, env = "MASKVEC_SEGMENTS")]
    segments: Option<usize>,
    /// Initial stroke width; only for stroke styles.
    #[arg(long, env = "MASKVEC_STROKE_WIDTH")]
    stroke_width: Option<f64>,
    /// Disable pruning, splitting and cloning.
    #[arg(long, env = "MASKVEC_NO_CONTROL")]
    no_control: bool,
    /// Any config key as section.key=value; may be repeated.
    #[arg(
        long = "set",
        value_name = "SECTION.KEY=VALUE",
        env = "MASKVEC_SET",
        value_delimiter = ','
    )]
    settings: Vec<String>,
}

#[derive(clap::Args, Debug)]
struct RenderArgs {
    #[arg(env = "MASKVEC_SVG")]
    svg: PathBuf,
    #[arg(long, env = "MASKVEC_OUT")]
    out: PathBuf,
    /// Integer magnification of the canvas.
    #[arg(long, env = "MASKVEC_SCALE", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=64))]
    scale: u32,
    /// Samples per axis per output pixel.
    #[arg(long, env = "MASKVEC_SUPERSAMPLE", default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=16))]
    supersample: u32,
}

/// A failure with the exit status it maps to.
struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: e.kind(),
            code: if matches!(e, Error::NonFinite { .. }) {
                1
            } else {
                2
            },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        kind: "usage",
        message: message.into(),
        code: 2,
    }
}

fn build_config(args: &VectorizeArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => io::read_config(path)?,
        None => RunConfig::default(),
    };
    for (i, setting) in args.settings.iter().enumerate() {
        let (key, value) = setting
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects SECTION.KEY=VALUE, got {setting:?}")))?;
        let (section, key) = key
            .split_once('.')
            .ok_or_else(|| usage(format!("--set key {key:?} lacks a section")))?;
        apply_setting(&mut cfg, section.trim(), key.trim(), value, i + 1)
            .map_err(|e| usage(format!("--set: {e}")))?;
    }
    if let Some(style) = args.style {
        cfg.init.style = style;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(iters) = args.iters {
        cfg = cfg.with_total_iters(iters);
    }
    if let Some(mode) = args.mode {
        cfg.loss_mode = mode;
    }
    if let Some(n) = args.paths_per_region {
        cfg.init.num_paths_per_region = n;
    }
    if let Some(n) = args.segments {
        cfg.init.segments_per_path = n;
    }
    if let Some(w) = args.stroke_width {
        if !cfg.init.style.constraints().has_stroke {
            return Err(usage(format!(
                "--stroke-width conflicts with style {}, which has no strokes",
                cfg.init.style
            )));
        }
        cfg.init.stroke_width = w;
    }
    if args.no_control {
        cfg.adaptive_control = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn vectorize(args: &VectorizeArgs) -> Result<(), Failure> {
    let cfg = build_config(args)?;
    let target = io::read_png(&args.target)?;
    let mask_set = match &args.masks {
        Some(dir) => {
            let set = maskdir::load(dir)?;
            if set.dims() != target.dims() {
                return Err(Error::DimensionMismatch {
                    expected_w: target.width(),
                    expected_h: target.height(),
                    got_w: set.width,
                    got_h: set.height,
                }
                .into());
            }
            if let Some(v) = masks::validate(&set).first() {
                return Err(Failure {
                    kind: "masks",
                    message: format!("{}: {v}", dir.display()),
                    code: 2,
                });
            }
            Some(set)
        }
        None if cfg.loss_mode == LossMode::Hive => {
            return Err(usage("hive mode needs object and part masks (--masks DIR)"));
        }
        None => None,
    };
    let importance = args
        .importance
        .as_ref()
        .map(io::read_importance)
        .transpose()?;
    let (scene, trace) = run_vectorize(&target, mask_set.as_ref(), importance.as_ref(), &cfg)?;

    write_text(&args.out, &io::write_svg(&scene))?;
    let trace_path = args
        .trace
        .clone()
        .unwrap_or_else(|| args.out.with_extension("trace"));
    trace.write(&trace_path)?;
    let psnr = match trace.final_psnr() {
        Some(p) if p.is_finite() => format!("{p:.2} dB"),
        Some(_) => "exact".into(),
        None => "-".into(),
    };
    println!(
        "wrote {} ({} paths, psnr {psnr}) and {}",
        args.out.display(),
        scene.paths.len(),
        trace_path.display()
    );
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn render(args: &RenderArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.svg).map_err(|source| Error::Io {
        path: args.svg.clone(),
        source,
    })?;
    let scene = io::parse_svg(&text).map_err(Error::from)?;
    scene.validate()?;
    let cfg = RenderConfig {
        supersample: args.supersample,
        ..RenderConfig::default()
    };
    let image = render_with(&scene.scaled(args.scale), &cfg);
    io::write_png(&image, &args.out)?;
    println!(
        "wrote {} ({}x{})",
        args.out.display(),
        image.width(),
        image.height()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Vectorize(args) => vectorize(&args),
        Command::Render(args) => render(&args),
        Command::TraceReport { trace } => {
            let summary = io::read_trace(&trace)?.summary();
            println!("{summary}");
            Ok(())
        }
        Command::ValidateMasks { dir } => {
            let set = maskdir::load(&dir)?;
            let report = masks::validate(&set);
            for v in &report {
                println!("{v}");
            }
            if report.is_empty() {
                println!(
                    "ok: {} objects, {} parts, {}x{}",
                    set.object_count(),
                    set.part_count(),
                    set.width,
                    set.height
                );
                Ok(())
            } else {
                Err(Failure {
                    kind: "masks",
                    message: format!("{} violations in {}", report.len(), dir.display()),
                    code: 2,
                })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let message = f.message.replace('\n', " ");
            eprintln!("error: kind={}: {message}", f.kind);
            ExitCode::from(f.code)
        }
    }
}
