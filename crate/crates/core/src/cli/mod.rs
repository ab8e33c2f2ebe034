//! Command-line front end and the on-disk tensor format.
//!
//! Every subcommand prints its reports as JSON lines and exits with 0 when
//! all invoked checks pass, 1 when one fails or a computation errors, and 2
//! on bad arguments.

pub mod tensor_io;

use std::ffi::OsString;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layers::{sample_transformed_kernels, ArchitectureConfig, FeatureMap, GroupChoice, Network, StackMode};
use crate::learning::{accuracy, detection_rate, make_synthetic_dataset, save_checkpoint, sgd_train, TaskId, TrainOptions};
use crate::lie_groups::{AffineElement, GroupElement};
use crate::splines::{build_h_grid, build_spatial_centers, HLayout, SplineKernel};
use crate::verification::{self, GaussianInput, GradcheckOptions, PouCase, Suite, VerificationReport};
use tensor_io::{write_tensor, Dtype, Tensor};

#[derive(Debug, Parser)]
#[command(name = "gspline", version, about = "B-spline group convolutions: sampling, checks and toy training")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a spline kernel under every transform of an H grid and write it as a tensor.
    KernelSample(KernelSampleArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Partition-of-unity deviation on one grid.
    Pou(PouArgs),
    /// Train a desk network on a synthetic task.
    TrainToy(TrainArgs),
    /// Sphere texture reconstruction errors as CSV.
    ReconstructSphere(SphereArgs),
    /// Central-difference gradient check of a network config.
    Gradcheck(GradcheckArgs),
    /// Equivariance error of a network or a refinement study.
    Equivariance(EquivarianceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroupArg {
    So2,
    Scale,
}

impl GroupArg {
    fn choice(self) -> GroupChoice {
        match self {
            GroupArg::So2 => GroupChoice::So2,
            GroupArg::Scale => GroupChoice::Scale,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayoutArg {
    Global,
    Localized,
    Atrous,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Lift,
    Group,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DtypeArg {
    F32,
    F64,
}

#[derive(Debug, Args)]
struct KernelSampleArgs {
    #[arg(long, value_enum, default_value = "so2")]
    group: GroupArg,
    #[arg(long, default_value_t = 8)]
    n_h: usize,
    /// Spatial kernel size `k` (odd).
    #[arg(long, default_value_t = 5)]
    size: usize,
    #[arg(long, value_enum, default_value = "global")]
    layout: LayoutArg,
    #[arg(long, default_value_t = 3)]
    n_k: usize,
    #[arg(long, default_value_t = 2)]
    stride: usize,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    #[arg(long, value_enum, default_value = "group")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    in_channels: usize,
    #[arg(long, default_value_t = 1)]
    out_channels: usize,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DtypeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// One of all, pou, equivariance, scale-space, gauge, sphere, gradcheck.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Also write the reports to this JSON-lines file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PouGroup {
    So2,
    Scale,
    Sphere,
}

#[derive(Debug, Args)]
struct PouArgs {
    #[arg(long, value_enum, default_value = "so2")]
    group: PouGroup,
    /// Number of centers.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Basis scale; defaults to the center spacing.
    #[arg(long)]
    s_h: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TaskArg {
    RotPatterns,
    ScaleBlobs,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value = "rot-patterns")]
    task: TaskArg,
    /// Preset name or JSON path; defaults to the task's desk preset.
    #[arg(long)]
    config: Option<String>,
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 16)]
    batch: usize,
    /// Write the trained network as a checkpoint.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TextureArg {
    Band,
    Constant,
}

#[derive(Debug, Args)]
struct SphereArgs {
    /// Comma-separated center counts.
    #[arg(long, value_delimiter = ',', default_value = "50,500,5000")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, value_enum, default_value = "band")]
    texture: TextureArg,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long, default_value = "pcam_desk")]
    config: String,
    #[arg(long, default_value_t = 100)]
    probes: usize,
    #[arg(long, default_value_t = 2)]
    batch: usize,
    /// Input size such as `24x24`; defaults to the config's.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EqModeArg {
    Exact,
    Convergence,
}

#[derive(Debug, Args)]
struct EquivarianceArgs {
    #[arg(long, value_enum, default_value = "so2")]
    group: GroupArg,
    /// Rotation angle in radians or scale factor.
    #[arg(long)]
    element: Option<f64>,
    /// Integer translation `dy,dx` for exact mode.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0")]
    shift: Vec<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: EqModeArg,
    /// Network for exact mode; defaults to a lift, group correlation and projection.
    #[arg(long)]
    config: Option<String>,
    /// Coarse resolution of the refinement study; the fine one is `2n - 1`.
    #[arg(long, default_value_t = 33)]
    resolution: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads();
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::Io(_) | Error::Json(_) | Error::ConfigTypeError { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn configure_threads() {
    let n = std::env::var("GSPLINE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::KernelSample(a) => kernel_sample(&a, seed),
        Command::Verify(a) => {
            let suite = Suite::from_name(&a.suite)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {:?}; expected one of {:?}", a.suite, Suite::NAMES)))?;
            emit(&verification::run_suite(suite, seed)?, a.json.as_deref())
        }
        Command::Pou(a) => {
            let (case, default_sh) = match a.group {
                PouGroup::So2 => (PouCase::So2 { n_centers: a.n }, TAU / a.n as f64),
                PouGroup::Scale => (PouCase::ScaleInterval { n_centers: a.n }, 0.5 * 2f64.ln()),
                PouGroup::Sphere => (PouCase::Sphere { n_centers: a.n }, (4.0 * PI / a.n as f64).sqrt()),
            };
            let r = verification::partition_of_unity_deviation(case, a.degree, a.s_h.unwrap_or(default_sh), a.samples, seed)?;
            emit(&[r], a.json.as_deref())
        }
        Command::TrainToy(a) => train_toy(&a, seed),
        Command::ReconstructSphere(a) => reconstruct_sphere(&a, seed),
        Command::Gradcheck(a) => {
            let cfg = ArchitectureConfig::load(&a.config)?;
            let input_shape = a.shape.as_deref().map(parse_shape).transpose()?;
            let opts = GradcheckOptions { probes: a.probes, batch: a.batch, input_shape, ..Default::default() };
            emit(&[verification::gradcheck(&cfg, seed, &opts)?], a.json.as_deref())
        }
        Command::Equivariance(a) => equivariance(&a, seed),
    }
}

/// Prints reports as JSON lines, optionally mirrors them to `path`, and
/// returns whether all passed.
fn emit(reports: &[VerificationReport], path: Option<&Path>) -> Result<bool> {
    let mut file = path.map(std::fs::File::create).transpose()?;
    for r in reports {
        let line = r.to_json_line();
        println!("{line}");
        if let Some(f) = file.as_mut() {
            writeln!(f, "{line}")?;
        }
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn parse_shape(s: &str) -> Result<Vec<usize>> {
    s.split('x')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad shape {s:?}; expected e.g. 24x24"))))
        .collect()
}

fn kernel_sample(a: &KernelSampleArgs, seed: u64) -> Result<bool> {
    let group = a.group.choice();
    let spacing = group.default_spacing(a.n_h);
    let layout = match a.layout {
        LayoutArg::Global => HLayout::GlobalUniform,
        LayoutArg::Localized => HLayout::Localized { n_k: a.n_k },
        LayoutArg::Atrous => HLayout::Atrous { n_k: a.n_k, stride: a.stride },
    };
    let (grid, centers) = build_h_grid(group.kind(), a.n_h, spacing, layout)?;
    let (h_centers, mode) = match a.mode {
        ModeArg::Lift => (None, StackMode::Lifting),
        ModeArg::Group => (Some(centers), StackMode::Group),
    };
    let spatial = build_spatial_centers(a.size, 2, None)?;
    let mut kernel = SplineKernel::new(a.degree, group.kind(), 2, spatial, h_centers, 1.0, spacing, a.in_channels, a.out_channels)?;
    kernel.randomize(&mut ChaCha8Rng::seed_from_u64(seed), 1.0);
    let max_scale = grid.elements.iter().map(|e| if let GroupElement::ScalePos(s) = e { *s } else { 1.0 }).fold(1.0, f64::max);
    let side = match group {
        GroupChoice::So2 => a.size,
        GroupChoice::Scale => 2 * (kernel.spatial_reach() * max_scale - 1e-9).ceil() as usize + 1,
    };
    let stack = sample_transformed_kernels(&kernel, &grid, &[side, side], mode)?;
    let dims = vec![stack.n_h, stack.out_channels, stack.in_channels, stack.n_ht, side, side];
    let dtype = match a.dtype {
        DtypeArg::F32 => Dtype::F32,
        DtypeArg::F64 => Dtype::F64,
    };
    write_tensor(&a.out, &Tensor::new(dims.clone(), stack.data)?, dtype)?;
    println!("wrote {} with dims {dims:?} ([h][out][in][h~][y][x])", a.out.display());
    Ok(true)
}

fn train_toy(a: &TrainArgs, seed: u64) -> Result<bool> {
    let (task, default_cfg, epochs, lr) = match a.task {
        TaskArg::RotPatterns => (TaskId::RotPatterns, "pcam_desk", 2, 0.05),
        TaskArg::ScaleBlobs => (TaskId::ScaleBlobs, "blobs_desk", 20, 3.0),
    };
    let cfg = ArchitectureConfig::load(a.config.as_deref().unwrap_or(default_cfg))?;
    let data = make_synthetic_dataset(task, a.n_train, a.n_test, seed)?;
    let mut net = Network::new(&cfg, seed)?;
    let opts = TrainOptions { lr: a.lr.unwrap_or(lr), epochs: a.epochs.unwrap_or(epochs), batch: a.batch, seed };
    let curve = sgd_train(&mut net, &data.train, cfg.loss_kind(), opts)?;
    for (e, l) in curve.iter().enumerate() {
        println!("epoch {} loss {l:.6}", e + 1);
    }
    match task {
        TaskId::RotPatterns => {
            println!("train accuracy {:.4}", accuracy(&net, &data.train, 100)?);
            println!("test accuracy {:.4}", accuracy(&net, &data.test, 100)?);
        }
        TaskId::ScaleBlobs => {
            println!("train detection {:.4}", detection_rate(&net, &data.train, 3.0, 50)?);
            println!("test detection {:.4}", detection_rate(&net, &data.test, 3.0, 50)?);
        }
    }
    if let Some(p) = &a.save {
        save_checkpoint(&net, p)?;
    }
    Ok(true)
}

fn reconstruct_sphere(a: &SphereArgs, seed: u64) -> Result<bool> {
    if a.n.is_empty() {
        return Err(Error::InvalidArgument("--n needs at least one size".into()));
    }
    let texture = match a.texture {
        TextureArg::Band => verification::Texture::BandLimited,
        TextureArg::Constant => verification::Texture::Constant,
    };
    let opts = verification::SphereFitOptions { degree: a.degree, ..Default::default() };
    let (report, fits) = verification::sphere_reconstruction_error(texture, &a.n, &opts, seed)?;
    let mut csv = String::from("n,s_h,train_rms,rms\n");
    for f in &fits {
        csv.push_str(&format!("{},{},{},{}\n", f.n_centers, f.s_h, f.train_rms, f.rms));
    }
    match &a.out {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(report.pass)
}

fn equivariance(a: &EquivarianceArgs, seed: u64) -> Result<bool> {
    let group = a.group.choice();
    let value = a.element.unwrap_or(match group {
        GroupChoice::So2 => FRAC_PI_2,
        GroupChoice::Scale => 2.0,
    });
    let h = match group {
        GroupChoice::So2 => GroupElement::so2(value),
        GroupChoice::Scale => GroupElement::scale(value)?,
    };
    let report = match a.mode {
        EqModeArg::Exact => {
            if a.shift.len() != 2 {
                return Err(Error::InvalidArgument("--shift takes two values".into()));
            }
            let cfg = match &a.config {
                Some(c) => ArchitectureConfig::load(c)?,
                None => ArchitectureConfig::from_json(verification::suite::SE2_PIPELINE)?,
            };
            let net = Network::new(&cfg, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = match &a.config {
                None => verification::suite::central_input(&mut rng),
                Some(_) => {
                    let shape = cfg.input_shape.clone().unwrap_or_else(|| vec![9, 9]);
                    let n: usize = shape.iter().product::<usize>() * cfg.input_channels;
                    FeatureMap::from_planar(cfg.input_channels, &shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?
                }
            };
            let g = AffineElement::new(a.shift.clone(), h)?;
            verification::equivariance_error(&net, &g, &f, 1e-9)?
        }
        EqModeArg::Convergence => {
            let input = GaussianInput { center: [0.3, -0.2], sigma: [1.0, 0.7], angle: 0.4 };
            let setup = verification::suite::convergence_setup(group, seed);
            let tol = match group {
                GroupChoice::So2 => 0.1,
                GroupChoice::Scale => 1e-2,
            };
            verification::equivariance_convergence(&setup, &h, &input, (a.resolution, 2 * a.resolution - 1), tol, 0.6)?
        }
    };
    emit(&[report], a.json.as_deref())
}
