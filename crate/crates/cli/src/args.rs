//! Flag grammar for `backdrop extract`.

use std::ffi::OsString;
use std::fmt;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use backdrop_core::pipeline::ExhaustionPolicy;
use backdrop_core::provider::{FrameRate, DEFAULT_SCORE_THRESHOLD};
use backdrop_core::{AreaMetric, FitMode, ImageFilter, Rgb, SelectionSpec};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "backdrop",
    version,
    about = "Extract persons from frames and place them on a new background"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Composite selected persons from one or more sources onto a background.
    Extract(ExtractArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    Bilinear,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExhaustionArg {
    Drop,
    Freeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankArg {
    /// Bounding-box area
    Bbox,
    /// Mask pixel count
    Mask,
}

/// `--resize stretch|letterbox[:RRGGBB]`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResizeArg(pub FitMode);

impl FromStr for ResizeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stretch" => Ok(ResizeArg(FitMode::Stretch)),
            "letterbox" => Ok(ResizeArg(FitMode::Letterbox(Rgb::BLACK))),
            _ => {
                let color = s
                    .strip_prefix("letterbox:")
                    .ok_or_else(|| format!("`{s}`: expected stretch or letterbox[:RRGGBB]"))?;
                Rgb::from_hex(color)
                    .map(|c| ResizeArg(FitMode::Letterbox(c)))
                    .ok_or_else(|| format!("`{color}` is not an RRGGBB color"))
            }
        }
    }
}

impl fmt::Display for ResizeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            FitMode::Stretch => f.write_str("stretch"),
            FitMode::Letterbox(c) => write!(f, "letterbox:{c}"),
        }
    }
}

/// `WxH@fps` for raw RGB24 streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawSpec {
    pub width: u32,
    pub height: u32,
    pub frame_rate: FrameRate,
}

impl FromStr for RawSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("`{s}`: expected WIDTHxHEIGHT@FPS, e.g. 640x480@30");
        let (size, rate) = s.split_once('@').ok_or_else(bad)?;
        let (w, h) = size.split_once('x').ok_or_else(bad)?;
        let width: u32 = w.parse().map_err(|_| bad())?;
        let height: u32 = h.parse().map_err(|_| bad())?;
        if width == 0 || height == 0 {
            return Err(bad());
        }
        Ok(RawSpec {
            width,
            height,
            frame_rate: rate.parse()?,
        })
    }
}

impl fmt::Display for RawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}@{}", self.width, self.height, self.frame_rate)
    }
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ExtractArgs {
    /// Source image or frame directory (`-` reads a raw stream from stdin). Repeatable, paired with --manifest.
    #[arg(long = "source", value_name = "DIR|IMG", required = true)]
    pub sources: Vec<PathBuf>,
    /// Segmentation manifest for the source at the same position.
    #[arg(long = "manifest", value_name = "JSON", required = true)]
    pub manifests: Vec<PathBuf>,
    /// Persons to extract, per source: top:<n> or ids:<list>. One value applies to every source.
    #[arg(long = "select", value_name = "SPEC")]
    pub selects: Vec<SelectionSpec>,
    /// Background image or frame directory; defines the output size.
    #[arg(long, value_name = "DIR|IMG")]
    pub background: PathBuf,
    /// Output frame directory, or an image path for single-frame jobs (`-` with --raw-out writes stdout).
    #[arg(long, value_name = "DIR|IMG")]
    pub out: PathBuf,
    #[arg(long, value_name = "MODE", default_value = "stretch")]
    pub resize: ResizeArg,
    #[arg(long, value_enum, default_value = "bilinear")]
    pub filter: FilterArg,
    /// Parallel frame workers (defaults to the number of logical CPUs).
    #[arg(long)]
    pub workers: Option<NonZeroUsize>,
    #[arg(long, value_parser = parse_probability, default_value_t = DEFAULT_SCORE_THRESHOLD)]
    pub score_threshold: f64,
    /// What a source shows after its last frame.
    #[arg(long, value_enum, default_value = "drop")]
    pub exhaustion: ExhaustionArg,
    /// Soft-edge radius in pixels; 0 keeps exact pixel replacement.
    #[arg(long, value_name = "PX", default_value_t = 0)]
    pub feather: u32,
    /// How persons are ranked for top:<n>.
    #[arg(long, value_enum, default_value = "bbox")]
    pub rank_by: RankArg,
    /// Frame size and rate of a raw RGB24 source read from stdin.
    #[arg(long, value_name = "WxH@FPS")]
    pub raw_in: Option<RawSpec>,
    /// Write output as raw RGB24 of this size and rate.
    #[arg(long, value_name = "WxH@FPS")]
    pub raw_out: Option<RawSpec>,
    /// Ignore unknown manifest fields instead of rejecting them.
    #[arg(long)]
    pub lenient: bool,
    /// Write per-frame selected ids as JSON.
    #[arg(long, value_name = "PATH")]
    pub emit_selection: Option<PathBuf>,
    #[arg(long, short)]
    pub verbose: bool,
}

/// A fully resolved `extract` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub sources: Vec<PathBuf>,
    pub manifests: Vec<PathBuf>,
    /// One entry per source.
    pub selections: Vec<SelectionSpec>,
    pub background: PathBuf,
    pub out: PathBuf,
    pub fit: FitMode,
    pub filter: ImageFilter,
    pub workers: NonZeroUsize,
    pub score_threshold: f64,
    pub exhaustion: ExhaustionPolicy,
    pub feather: u32,
    pub metric: AreaMetric,
    pub raw_in: Option<RawSpec>,
    pub raw_out: Option<RawSpec>,
    pub lenient: bool,
    pub emit_selection: Option<PathBuf>,
    pub verbose: bool,
}

pub fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn usage(kind: ErrorKind, message: impl fmt::Display) -> clap::Error {
    let mut cmd = Cli::command();
    let sub = cmd
        .find_subcommand_mut("extract")
        .expect("extract subcommand")
        .clone();
    sub.bin_name("backdrop extract").error(kind, message)
}

impl CliConfig {
    fn resolve(args: ExtractArgs) -> Result<Self, clap::Error> {
        let n = args.sources.len();
        if args.manifests.len() != n {
            return Err(usage(
                ErrorKind::WrongNumberOfValues,
                format!(
                    "{n} --source flag(s) but {} --manifest flag(s); they pair up",
                    args.manifests.len()
                ),
            ));
        }
        let selections = match args.selects.len() {
            0 => vec![SelectionSpec::default(); n],
            1 => vec![args.selects[0].clone(); n],
            k if k == n => args.selects.clone(),
            k => {
                return Err(usage(
                    ErrorKind::WrongNumberOfValues,
                    format!("{k} --select flag(s) for {n} source(s); give one or one per source"),
                ))
            }
        };
        let stdin_sources = args.sources.iter().filter(|p| is_stdio(p)).count();
        if stdin_sources > 1 {
            return Err(usage(
                ErrorKind::ArgumentConflict,
                "only one --source can read stdin",
            ));
        }
        if stdin_sources == 1 && args.raw_in.is_none() {
            return Err(usage(
                ErrorKind::MissingRequiredArgument,
                "--source - needs --raw-in WxH@FPS",
            ));
        }
        if stdin_sources == 0 && args.raw_in.is_some() {
            return Err(usage(
                ErrorKind::ArgumentConflict,
                "--raw-in is only used with --source -",
            ));
        }
        if is_stdio(&args.background) {
            return Err(usage(
                ErrorKind::InvalidValue,
                "the background cannot be read from stdin",
            ));
        }
        if is_stdio(&args.out) && args.raw_out.is_none() {
            return Err(usage(
                ErrorKind::MissingRequiredArgument,
                "--out - needs --raw-out WxH@FPS",
            ));
        }
        let workers = args
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN));
        Ok(CliConfig {
            sources: args.sources,
            manifests: args.manifests,
            selections,
            background: args.background,
            out: args.out,
            fit: args.resize.0,
            filter: match args.filter {
                FilterArg::Bilinear => ImageFilter::Bilinear,
                FilterArg::Nearest => ImageFilter::NearestNeighbor,
            },
            workers,
            score_threshold: args.score_threshold,
            exhaustion: match args.exhaustion {
                ExhaustionArg::Drop => ExhaustionPolicy::Drop,
                ExhaustionArg::Freeze => ExhaustionPolicy::Freeze,
            },
            feather: args.feather,
            metric: match args.rank_by {
                RankArg::Bbox => AreaMetric::BoundingBox,
                RankArg::Mask => AreaMetric::MaskPixels,
            },
            raw_in: args.raw_in,
            raw_out: args.raw_out,
            lenient: args.lenient,
            emit_selection: args.emit_selection,
            verbose: args.verbose,
        })
    }

    /// Flags that re-parse to this exact configuration.
    pub fn to_args(&self) -> Vec<OsString> {
        let mut out: Vec<OsString> = vec!["backdrop".into(), "extract".into()];
        let mut flag = |name: &str, value: OsString| {
            out.push(format!("--{name}").into());
            out.push(value);
        };
        for ((source, manifest), select) in self
            .sources
            .iter()
            .zip(&self.manifests)
            .zip(&self.selections)
        {
            flag("source", source.into());
            flag("manifest", manifest.into());
            flag("select", select.to_string().into());
        }
        flag("background", self.background.clone().into());
        flag("out", self.out.clone().into());
        flag("resize", ResizeArg(self.fit).to_string().into());
        let filter = match self.filter {
            ImageFilter::Bilinear => "bilinear",
            ImageFilter::NearestNeighbor => "nearest",
        };
        flag("filter", filter.into());
        flag("workers", self.workers.to_string().into());
        flag("score-threshold", self.score_threshold.to_string().into());
        let exhaustion = match self.exhaustion {
            ExhaustionPolicy::Drop => "drop",
            ExhaustionPolicy::Freeze => "freeze",
        };
        flag("exhaustion", exhaustion.into());
        flag("feather", self.feather.to_string().into());
        let rank = match self.metric {
            AreaMetric::BoundingBox => "bbox",
            AreaMetric::MaskPixels => "mask",
        };
        flag("rank-by", rank.into());
        if let Some(raw) = self.raw_in {
            flag("raw-in", raw.to_string().into());
        }
        if let Some(raw) = self.raw_out {
            flag("raw-out", raw.to_string().into());
        }
        if let Some(path) = &self.emit_selection {
            flag("emit-selection", path.into());
        }
        if self.lenient {
            out.push("--lenient".into());
        }
        if self.verbose {
            out.push("--verbose".into());
        }
        out
    }
}

/// Parses a full argument vector (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    match cli.command {
        Command::Extract(args) => CliConfig::resolve(args),
    }
}
