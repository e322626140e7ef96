use clap::{Args, Parser, Subcommand, ValueEnum};
use sonolink::units::{parse_quantity, Dimension};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "sonolink", version, about = "Acoustic link models for micron-scale radiators in tissue")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Write one CSV per table plus report.json into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Exit with status 3 when a safety check fails.
    #[arg(long, global = true)]
    pub enforce_safety: bool,
    /// Run sweeps and assembly on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// FEM solution cache (default: $SONOLINK_CACHE_DIR or ./.sonolink-cache).
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pulsating sphere: powers, flux, pressure and efficiency.
    Sphere(SphereArgs),
    /// FEM solve of a ringset and its flux pattern.
    Ringset(RingsetArgs),
    /// Mode-weighted sphere beam optimized toward a point on the axis.
    Beam(BeamArgs),
    /// Baffled disk null angle, gain and pattern.
    Disk(DiskArgs),
    /// Single link budget, from a received flux or a radiator model.
    Link(LinkArgs),
    /// Multi-hop relay chain along a line.
    Relay(RelayArgs),
    /// Smallest detectable angular drift of a receiver in a beam.
    Drift(DriftArgs),
    /// Safety report, resonances and heating estimates.
    Safety(SafetyArgs),
    /// Regenerate a built-in table or figure dataset.
    Reproduce(ReproduceArgs),
    /// Execute a scenario file.
    Run(RunArgs),
}

fn quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    parse_quantity(text, dim).map_err(|e| e.to_string())
}

macro_rules! parsers {
    ($($name:ident => $dim:ident),* $(,)?) => {
        $(pub fn $name(s: &str) -> Result<f64, String> { quantity(s, Dimension::$dim) })*
    };
}

parsers! {
    length => Length,
    frequency => Frequency,
    power => Power,
    flux => Flux,
    time => Time,
    energy => Energy,
    area => Area,
    pressure => Pressure,
    temperature => Temperature,
    speed => Speed,
    angle => Angle,
    stiffness => Stiffness,
    mass => Mass,
}

/// A sweep axis: `A,B,C` lists or `FROM..TO:N` log-spaced ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

impl Axis {
    pub fn parse(text: &str, dim: Dimension) -> Result<Self, String> {
        let text = text.trim();
        if text.is_empty() {
            return Err("sweep is empty".into());
        }
        if let Some((from, rest)) = text.split_once("..") {
            let (to, n) = rest.split_once(':').ok_or("ranges are written FROM..TO:POINTS")?;
            let n: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a point count"))?;
            return Ok(Axis(log_range(quantity(from, dim)?, quantity(to, dim)?, n)?));
        }
        let values = text
            .split(',')
            .map(|s| quantity(s, dim))
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(Axis(values))
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_range(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    if n == 0 {
        return Err("sweep is empty".into());
    }
    if !(lo > 0.0 && hi >= lo) {
        return Err(format!("log range needs 0 < from <= to, got {lo:e}..{hi:e}"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let span = (hi / lo).ln();
    Ok((0..n)
        .map(|j| match j {
            0 => lo,
            _ if j == n - 1 => hi,
            _ => lo * (span * j as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

macro_rules! axis_parsers {
    ($($name:ident => $dim:ident),* $(,)?) => {
        $(pub fn $name(s: &str) -> Result<Axis, String> { Axis::parse(s, Dimension::$dim) })*
    };
}

axis_parsers! {
    frequency_axis => Frequency,
    length_axis => Length,
}

#[derive(Debug, Clone, Args)]
pub struct MediumArg {
    /// Medium preset: water, low, high or lossless.
    #[arg(long, default_value = "low")]
    pub medium: String,
}

#[derive(Debug, Args)]
pub struct SphereArgs {
    #[arg(long, value_parser = length_axis, default_value = "5um")]
    pub radius: Axis,
    #[arg(long = "freq", value_parser = frequency_axis, default_value = "10MHz")]
    pub frequency: Axis,
    /// Evaluation distance from the centre.
    #[arg(long = "distance", value_parser = length_axis, default_value = "100um")]
    pub distance: Axis,
    /// Input power the amplitude is calibrated to.
    #[arg(long, value_parser = power, default_value = "100pW")]
    pub power: f64,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Surface {
    Outer,
    Inner,
    Ends,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Phase {
    Uniform,
    /// Wave travelling toward +z.
    Forward,
    /// Wave travelling toward -z.
    Backward,
}

#[derive(Debug, Args)]
pub struct RingsetArgs {
    #[arg(long = "freq", value_parser = frequency, default_value = "10MHz")]
    pub frequency: f64,
    #[arg(long, value_parser = power, default_value = "100pW")]
    pub power: f64,
    #[arg(long, value_enum, default_value = "outer")]
    pub surface: Surface,
    #[arg(long, value_enum, default_value = "uniform")]
    pub phase: Phase,
    /// Radius of the sphere the flux pattern is sampled on.
    #[arg(long, value_parser = length, default_value = "100um")]
    pub pattern_radius: f64,
    /// Multiply all element sizes (above 1 is coarser).
    #[arg(long, default_value_t = 1.0)]
    pub mesh_scale: f64,
    /// Also write the pressure snapshot within this distance of the axis origin.
    #[arg(long, value_parser = length)]
    pub snapshot: Option<f64>,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Args)]
pub struct BeamArgs {
    #[arg(long, value_parser = length, default_value = "5um")]
    pub radius: f64,
    #[arg(long = "freq", value_parser = frequency_axis, default_value = "100MHz")]
    pub frequency: Axis,
    #[arg(long, value_parser = length, default_value = "100um")]
    pub distance: f64,
    #[arg(long, value_parser = power, default_value = "100pW")]
    pub power: f64,
    /// Also locate the frequency of largest directed flux in this range (FROM..TO).
    #[arg(long)]
    pub peak: Option<String>,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Args)]
pub struct DiskArgs {
    /// Disk diameter.
    #[arg(long, value_parser = length)]
    pub d: f64,
    /// Wavelength; alternatively give --freq and a medium.
    #[arg(long, value_parser = length, conflicts_with = "frequency")]
    pub lambda: Option<f64>,
    #[arg(long = "freq", value_parser = frequency)]
    pub frequency: Option<f64>,
    #[arg(long, default_value_t = 181)]
    pub samples: usize,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Uniform,
    Directed,
    /// Travelling-phase ringset pattern from the FEM solver.
    Ringset,
}

#[derive(Debug, Clone, Args)]
pub struct ReceiverArgs {
    #[arg(long, value_parser = area, default_value = "1um2")]
    pub area: f64,
    #[arg(long, value_parser = frequency, default_value = "200kHz")]
    pub bandwidth: f64,
    #[arg(long, value_parser = temperature, default_value = "310K")]
    pub temperature: f64,
    /// Natural-log SNR of the threshold detector (dimensionless).
    #[arg(long, default_value_t = 2.0)]
    pub snr: f64,
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    /// Received flux; skips the radiator model.
    #[arg(long, value_parser = flux)]
    pub flux: Option<f64>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub model: Model,
    #[arg(long, value_parser = length, default_value = "5um")]
    pub radius: f64,
    #[arg(long, value_parser = power, default_value = "100pW")]
    pub power: f64,
    #[arg(long = "freq", value_parser = frequency, default_value = "10MHz")]
    pub frequency: f64,
    #[arg(long = "distance", value_parser = length_axis, default_value = "100um")]
    pub distance: Axis,
    /// Receiver direction from the transmitter axis.
    #[arg(long, value_parser = angle, default_value = "0deg")]
    pub angle: f64,
    /// Flow speed for bits exchanged while passing a hub.
    #[arg(long, value_parser = speed)]
    pub flow: Option<f64>,
    /// Robots sharing the hub during a passage.
    #[arg(long, default_value_t = 1)]
    pub robots: usize,
    #[command(flatten)]
    pub receiver: ReceiverArgs,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Args)]
pub struct RelayArgs {
    #[arg(long, default_value_t = 10)]
    pub hops: usize,
    #[arg(long, value_parser = length, default_value = "100um")]
    pub spacing: f64,
    #[arg(long, value_parser = power, default_value = "10pW")]
    pub power: f64,
    /// Carrier of even-numbered nodes.
    #[arg(long = "freq", value_parser = frequency, default_value = "350MHz")]
    pub frequency: f64,
    /// Carrier offset of odd-numbered nodes.
    #[arg(long, value_parser = frequency, default_value = "7MHz")]
    pub offset: f64,
    #[arg(long, value_enum, default_value = "directed")]
    pub model: Model,
    #[arg(long, value_parser = length, default_value = "5um")]
    pub radius: f64,
    /// Hops take turns instead of transmitting at once (no band separation needed).
    #[arg(long)]
    pub sequential_hops: bool,
    #[arg(long, value_parser = area, default_value = "1um2")]
    pub area: f64,
    #[arg(long, value_parser = frequency, default_value = "3.5MHz")]
    pub bandwidth: f64,
    #[arg(long, value_parser = temperature, default_value = "310K")]
    pub temperature: f64,
    #[arg(long, default_value_t = 2.0)]
    pub snr: f64,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    /// Pattern CSV (`theta_deg,flux_pW_per_um2`) instead of solving the ringset.
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// Radius the pattern CSV was sampled at.
    #[arg(long, value_parser = length, default_value = "100um")]
    pub pattern_radius: f64,
    #[arg(long = "freq", value_parser = frequency, default_value = "100MHz")]
    pub frequency: f64,
    #[arg(long, value_parser = area, default_value = "1um2")]
    pub area: f64,
    /// Integration time.
    #[arg(long, value_parser = time, default_value = "1ms")]
    pub dt: f64,
    /// Threshold energy per detection.
    #[arg(long, value_parser = energy, default_value = "30zJ")]
    pub energy: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mesh_scale: f64,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Args)]
pub struct SafetyArgs {
    /// Evaluate a pulsating sphere of this radius at --power and --freq.
    #[arg(long, value_parser = length, default_value = "5um")]
    pub radius: f64,
    #[arg(long, value_parser = power, default_value = "100pW")]
    pub power: f64,
    #[arg(long = "freq", value_parser = frequency, default_value = "10MHz")]
    pub frequency: f64,
    /// Override the largest surface flux instead of computing it.
    #[arg(long, value_parser = flux)]
    pub max_flux: Option<f64>,
    /// Override the largest pressure amplitude instead of computing it.
    #[arg(long, value_parser = pressure)]
    pub max_pressure: Option<f64>,
    /// Plane-wave intensity for the absorption heating-rate estimate.
    #[arg(long, value_parser = flux)]
    pub intensity: Option<f64>,
    #[arg(long, value_parser = length)]
    pub bubble_radius: Option<f64>,
    #[arg(long, value_parser = stiffness, requires = "mass")]
    pub stiffness: Option<f64>,
    #[arg(long, value_parser = mass, requires = "stiffness")]
    pub mass: Option<f64>,
    #[command(flatten)]
    pub medium: MediumArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Table3,
    Table5,
    FigAttenuation,
    FigEfficiency,
    FigDisk,
    FigDirected,
    FigRingsetPattern,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
}
