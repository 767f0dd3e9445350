//! Argument definitions and command bodies for the `defocus` binary.

use std::collections::HashMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use defocus_core::exif::{parse_exif, partition_corpus, write_partition, BlurLabel, Denylist, PartitionConfig};
use defocus_core::focus::{LensOverrides, SaliencyMap};
use defocus_core::io::{encode_pfm, read_depth, read_label_stack, read_plane, read_png, write_png16};
use defocus_core::metrics::{
    blur_monotonicity, circular_energy_oracle, content_consistency, monotonicity_from_energies,
    signal_energy, ConsistencyMode, ConvKernel, EnergyDomain,
};
use defocus_core::synthetic::textured_scene;
use defocus_core::Error;

use crate::pipeline::{self, LensSettings, OutputKind, Scene};
use crate::report::Report;
use crate::service::{self, SessionStore, DEFAULT_MAX_SESSIONS};

#[derive(Debug, Parser)]
#[command(name = "defocus", version, about = "Thin-lens defocus rendering from an image and a depth map")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one defocused image.
    Render(RenderArgs),
    /// Render an aperture sweep and score its blur monotonicity.
    Sweep(SweepArgs),
    /// Evaluation metrics over image and label files.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Split a photo manifest into shallow and deep depth-of-field sets.
    Ingest(IngestArgs),
    /// Run the HTTP render service.
    Serve(ServeArgs),
    /// Write a seeded synthetic scene (PNG image, PFM depth, lens report).
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// All-in-focus PNG (8 or 16 bit, grey or RGB).
    #[arg(long)]
    pub image: PathBuf,
    /// Depth map as PFM or TLDEPTH1.
    #[arg(long)]
    pub depth: PathBuf,
    /// Saliency map as PFM or TLDEPTH1; a center prior is used when absent.
    #[arg(long)]
    pub saliency: Option<PathBuf>,
}

impl SceneArgs {
    fn load(&self) -> Result<Scene> {
        let image = read_png(&self.image).with_context(|| format!("reading {}", self.image.display()))?;
        let depth = read_depth(&self.depth).with_context(|| format!("reading {}", self.depth.display()))?;
        let saliency = match &self.saliency {
            Some(p) => Some(
                read_plane(p)
                    .and_then(SaliencyMap::from_plane)
                    .with_context(|| format!("reading {}", p.display()))?,
            ),
            None => None,
        };
        Ok(Scene::new(image, depth, saliency)?)
    }
}

#[derive(Debug, Args)]
pub struct LensArgs {
    #[arg(long)]
    pub fnumber: Option<f64>,
    /// Focal length in millimetres.
    #[arg(long)]
    pub focal: Option<f64>,
    /// Focus distance in depth units; saliency-weighted depth when absent.
    #[arg(long)]
    pub fd: Option<f64>,
    #[arg(long)]
    pub fs: Option<f64>,
    /// CoC clamp in pixels; `64 * width / 1024` when absent.
    #[arg(long)]
    pub coc_max: Option<f64>,
    /// Pixels per CoC length unit; `width / 36` when absent.
    #[arg(long)]
    pub ppu: Option<f64>,
    /// JPEG or TIFF whose EXIF supplies the f-number and focal length.
    #[arg(long)]
    pub exif: Option<PathBuf>,
    /// Fail instead of falling back to f/8 and 50 mm.
    #[arg(long)]
    pub no_defaults: bool,
}

impl LensArgs {
    fn settings(&self) -> Result<LensSettings> {
        let exif = match &self.exif {
            Some(p) => {
                let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
                Some(parse_exif(&bytes).map_err(Error::from)?)
            }
            None => None,
        };
        Ok(LensSettings {
            overrides: LensOverrides {
                focal_length: self.focal,
                f_number: self.fnumber,
                focus_distance: self.fd,
                focus_scale: self.fs,
                pixels_per_unit: self.ppu,
                coc_max_px: self.coc_max,
            },
            exif,
            allow_defaults: !self.no_defaults,
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputArg {
    Image,
    CocHeatmap,
    InFocusMask,
}

impl From<OutputArg> for OutputKind {
    fn from(o: OutputArg) -> Self {
        match o {
            OutputArg::Image => OutputKind::Image,
            OutputArg::CocHeatmap => OutputKind::CocHeatmap,
            OutputArg::InFocusMask => OutputKind::InFocusMask,
        }
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub lens: LensArgs,
    /// Output PNG (16 bit).
    #[arg(long)]
    pub out: PathBuf,
    /// Sidecar report; defaults to the output path with a `.txt` extension.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "image")]
    pub output: OutputArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub lens: LensArgs,
    /// Comma-separated ascending f-numbers.
    #[arg(long, default_value = "1.8,2.8,4,5.6,8,11,16,22", value_delimiter = ',')]
    pub apertures: Vec<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DomainArg {
    Spatial,
    Spectral,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Intersection,
    Adjacent,
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Signal energy of one PNG.
    Energy {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_enum, default_value = "spatial")]
        domain: DomainArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Blur monotonicity of PNGs given in ascending f-number order.
    Monotonicity {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Content consistency of TLSEG1 label stacks in ascending f-number order.
    Consistency {
        #[arg(required = true)]
        labels: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "intersection")]
        mode: ModeArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Energy before and after circular convolution with a blur kernel.
    TheoremCheck {
        #[arg(long)]
        image: PathBuf,
        /// Square box filter side.
        #[arg(long, conflicts_with = "kernel", required_unless_present = "kernel")]
        r#box: Option<usize>,
        /// Kernel as PFM or TLDEPTH1; rescaled to unit sum.
        #[arg(long)]
        kernel: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// One image path per line.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Camera makes to reject from the shallow set, one per line.
    #[arg(long)]
    pub denylist: Option<PathBuf>,
    /// `path<TAB>none|desirable|undesirable` lines from a blur classifier.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Receives deep.tsv, shallow.tsv, rejected.tsv and summary.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "DEFOCUS_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "DEFOCUS_BIND", default_value = "127.0.0.1")]
    pub bind: std::net::IpAddr,
    #[arg(long, env = "DEFOCUS_MAX_SESSIONS", default_value_t = DEFAULT_MAX_SESSIONS)]
    pub max_sessions: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Render(args) => render(args),
        Command::Sweep(args) => sweep(args),
        Command::Metrics(cmd) => metrics(cmd),
        Command::Ingest(args) => ingest(args),
        Command::Serve(args) => serve(args),
        Command::Synth(args) => synth(args),
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes)
        .map_err(Error::from)
        .with_context(|| format!("writing {}", path.display()))
}

/// Prints the report and mirrors it to `path` when given.
fn emit(report: &Report, path: Option<&Path>) -> Result<()> {
    print!("{report}");
    if let Some(p) = path {
        write(p, report.to_string())?;
    }
    Ok(())
}

fn render(args: RenderArgs) -> Result<()> {
    let scene = args.scene.load()?;
    let frame = pipeline::render(&scene, &args.lens.settings()?)?;
    write(&args.out, frame.encode(args.output.into())?)?;
    let sidecar = args.report.unwrap_or_else(|| args.out.with_extension("txt"));
    emit(&frame.report(), Some(&sidecar))
}

fn sweep(args: SweepArgs) -> Result<()> {
    let scene = args.scene.load()?;
    let sweep = pipeline::sweep(&scene, &args.lens.settings()?, &args.apertures)?;
    fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    for (i, frame) in sweep.frames.iter().enumerate() {
        write(&args.out_dir.join(format!("sweep_{i:02}.png")), frame.encode(OutputKind::Image)?)?;
    }
    emit(&sweep.report(), Some(&args.out_dir.join("sweep_report.txt")))
}

fn metrics(cmd: MetricsCommand) -> Result<()> {
    match cmd {
        MetricsCommand::Energy {
            image,
            domain,
            report,
        } => {
            let img = read_png(&image)?;
            let (domain, name) = match domain {
                DomainArg::Spatial => (EnergyDomain::Spatial, "spatial"),
                DomainArg::Spectral => (EnergyDomain::Spectral, "spectral"),
            };
            let mut r = Report::default();
            r.push("energy", signal_energy(&img, domain).energy).push("domain", name);
            emit(&r, report.as_deref())
        }
        MetricsCommand::Monotonicity { images, report } => {
            let imgs = images.iter().map(read_png).collect::<Result<Vec<_>, _>>()?;
            let energies: Vec<f64> = imgs
                .iter()
                .map(|i| signal_energy(i, EnergyDomain::Spatial).energy)
                .collect();
            let value = blur_monotonicity(&imgs)?;
            debug_assert_eq!(Some(value), monotonicity_from_energies(&energies).ok());
            let mut r = Report::default();
            for (i, e) in energies.iter().enumerate() {
                r.push(format!("signal_energy.{i}"), e);
            }
            r.push("blur_monotonicity", value);
            emit(&r, report.as_deref())
        }
        MetricsCommand::Consistency {
            labels,
            mode,
            report,
        } => {
            let stacks = labels.iter().map(read_label_stack).collect::<Result<Vec<_>, _>>()?;
            let (mode, name) = match mode {
                ModeArg::Intersection => (ConsistencyMode::Intersection, "intersection"),
                ModeArg::Adjacent => (ConsistencyMode::Adjacent, "adjacent"),
            };
            let mut r = Report::default();
            r.push("content_consistency", content_consistency(&stacks, mode)?)
                .push("mode", name);
            emit(&r, report.as_deref())
        }
        MetricsCommand::TheoremCheck {
            image,
            r#box,
            kernel,
            report,
        } => {
            let img = read_png(&image)?;
            let k = match (r#box, kernel) {
                (Some(side), _) => ConvKernel::box_filter(side)?,
                (None, Some(path)) => kernel_from_plane(read_plane(&path)?)?,
                (None, None) => unreachable!("clap requires --box or --kernel"),
            };
            let check = circular_energy_oracle(&img, &k)?;
            let mut r = Report::default();
            r.push("energy_before", check.energy_before)
                .push("energy_after", check.energy_after)
                .push("strict_expected", check.strict_expected)
                .push("holds", check.holds());
            emit(&r, report.as_deref())
        }
    }
}

/// Kernel files store f32 taps, so the sum is only near 1; rescale exactly.
fn kernel_from_plane(plane: defocus_core::Plane) -> Result<ConvKernel> {
    let (w, h) = plane.dims();
    let sum: f64 = plane.data().iter().sum();
    if !(sum > 0.0) {
        return Err(Error::InvalidKernel(format!("taps sum to {sum}")).into());
    }
    let taps = plane.data().iter().map(|t| t / sum).collect();
    Ok(ConvKernel::new(w, h, taps)?)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

fn ingest(args: IngestArgs) -> Result<()> {
    let paths: Vec<PathBuf> = read_lines(&args.manifest)?.into_iter().map(PathBuf::from).collect();
    let denylist = match &args.denylist {
        Some(p) => Denylist::new(read_lines(p)?),
        None => Denylist::default(),
    };
    let mut blur_labels = HashMap::new();
    if let Some(p) = &args.labels {
        for line in read_lines(p)? {
            let (path, label) = line.rsplit_once('\t').ok_or_else(|| {
                Error::InvalidParameter {
                    name: "labels",
                    reason: format!("expected `path<TAB>label`, got `{line}`"),
                }
            })?;
            let label: BlurLabel = label.parse().map_err(|reason| Error::InvalidParameter {
                name: "labels",
                reason,
            })?;
            blur_labels.insert(PathBuf::from(path), label);
        }
    }
    let report = partition_corpus(
        &paths,
        &PartitionConfig {
            denylist,
            blur_labels,
        },
    );
    fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    let create = |name: &str| -> Result<fs::File> {
        Ok(fs::File::create(args.out_dir.join(name)).map_err(Error::from)?)
    };
    write_partition(&report, create("deep.tsv")?, create("shallow.tsv")?, create("rejected.tsv")?)
        .map_err(Error::from)?;
    let summary = report.summary();
    write(&args.out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting runtime")?;
    runtime.block_on(async move {
        let store = Arc::new(SessionStore::new(args.max_sessions));
        let addr = SocketAddr::new(args.bind, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(Error::from)
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, service::router(store)).await?;
        Ok(())
    })
}

fn synth(args: SynthArgs) -> Result<()> {
    let scene = textured_scene(args.seed, args.width, args.height);
    fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    write_png16(args.out_dir.join("image.png"), &scene.image)?;
    write(&args.out_dir.join("depth.pfm"), encode_pfm(scene.depth.plane()))?;
    let l = scene.lens;
    let mut r = Report::default();
    r.push("seed", args.seed)
        .push("focal_length_mm", l.focal_length)
        .push("f_number", l.f_number)
        .push("focus_distance", l.focus_distance)
        .push("focus_scale", l.focus_scale)
        .push("pixels_per_unit", l.pixels_per_unit)
        .push("coc_max_px", l.coc_max_px);
    emit(&r, Some(&args.out_dir.join("lens.txt")))
}
