use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use surfhap_core::electro::Condition;
use surfhap_core::handflow::Direction;
use surfhap_core::Point;

/// Surface haptics toolkit: plate vibration maps, excitation lookup tables,
/// vibrotactile flow, electrostatic knob waveforms and gesture recognition.
#[derive(Debug, Parser)]
#[command(name = "surfhap", version)]
pub struct Cli {
    /// JSON configuration file. Defaults to $SURFHAP_CONFIG when set.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise a vibration map of the plate from its modal model.
    SimulateFrf(SimulateFrf),
    /// Write the built-in two-point fixture map.
    Fixture(Fixture),
    /// Precompute the excitation lookup table of a map.
    BuildLut(BuildLut),
    /// Vibrotactile flow stimuli.
    #[command(subcommand)]
    Flow(Flow),
    /// Replay a knob trajectory and export the electrode waveform.
    Knob(Knob),
    /// Gesture corpus generation, training and classification.
    #[command(subcommand)]
    Gesture(Gesture),
}

#[derive(Debug, Args)]
pub struct SimulateFrf {
    /// Output map file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Perturb plate and patch layout with this seed instead of using the configured plate.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid rows.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Grid columns.
    #[arg(long)]
    pub cols: Option<usize>,
    /// Grid spacing, mm.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Damping ratio of every mode.
    #[arg(long)]
    pub damping: Option<f64>,
    /// Write the five FRFs at the grid point nearest the centre as CSV.
    #[arg(long, value_name = "FILE")]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Fixture {
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildLut {
    /// Vibration map file.
    #[arg(long)]
    pub map: PathBuf,
    /// Output table file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Sensitivity curve JSON (`anchors` as [Hz, um] pairs, `jnd_db`).
    #[arg(long)]
    pub sensitivity: Option<PathBuf>,
    /// Drive voltage used by the feasibility check, Vp.
    #[arg(long)]
    pub drive_v: Option<f64>,
    /// Required sensation level of the active point, dB.
    #[arg(long)]
    pub margin_db: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Flow {
    /// Two-part flow between two points.
    Point(FlowPoint),
    /// Directional flow under a hand.
    Hand(FlowHand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WaveFormat {
    Csv,
    Pcm,
}

#[derive(Debug, Args)]
pub struct WaveOut {
    /// Waveform output file.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Waveform format: CSV (time plus one column per channel) or 16-bit PCM WAV.
    #[arg(long, value_enum, default_value_t = WaveFormat::Csv)]
    pub format: WaveFormat,
    /// Volts mapped to PCM full scale.
    #[arg(long, default_value_t = 100.0)]
    pub full_scale_v: f64,
    /// Sample rate, Hz.
    #[arg(long)]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FlowPoint {
    #[arg(long)]
    pub map: PathBuf,
    /// Lookup table; built on the fly when omitted.
    #[arg(long)]
    pub lut: Option<PathBuf>,
    /// Start point: 1-based grid index or `x,y` in mm.
    #[arg(long)]
    pub from: Site,
    /// End point: 1-based grid index or `x,y` in mm.
    #[arg(long)]
    pub to: Site,
    #[arg(long)]
    pub sensitivity: Option<PathBuf>,
    /// Duration of each part, s.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Fade-in/out length, s.
    #[arg(long)]
    pub ramp: Option<f64>,
    /// Drive available to the louder part, Vp.
    #[arg(long)]
    pub drive_v: Option<f64>,
    #[command(flatten)]
    pub wave: WaveOut,
    /// Write the plan as JSON.
    #[arg(long, value_name = "FILE")]
    pub plan_json: Option<PathBuf>,
    /// Write the five difference curves (from minus to) as CSV.
    #[arg(long, value_name = "FILE")]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowHand {
    #[arg(long)]
    pub map: PathBuf,
    /// Centre of the hand region, `x,y` in mm.
    #[arg(long, value_parser = parse_xy)]
    pub center: Point,
    /// Region side, mm.
    #[arg(long)]
    pub side: Option<f64>,
    /// l2r, r2l, u2d or d2u.
    #[arg(long)]
    pub direction: Direction,
    #[arg(long)]
    pub sensitivity: Option<PathBuf>,
    /// Drive voltage, Vp.
    #[arg(long)]
    pub drive_v: Option<f64>,
    /// Duration of each part, s.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub ramp: Option<f64>,
    /// Write the plan as JSON.
    #[arg(long, value_name = "FILE")]
    pub plan_json: Option<PathBuf>,
    #[command(flatten)]
    pub wave: WaveOut,
    /// Directory for activity and sensation-level grids of both parts.
    #[arg(long, value_name = "DIR")]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Knob {
    /// V, HD, HD+CF or HD+VF.
    #[arg(long)]
    pub condition: Option<Condition>,
    #[arg(long)]
    pub sectors: Option<usize>,
    /// Trajectory CSV (t,thumb_x,thumb_y,index_x,index_y); synthesised from the preset when omitted.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Scenario preset JSON.
    #[arg(long)]
    pub preset: Option<PathBuf>,
    #[arg(long)]
    pub start_sector: Option<i64>,
    /// Target sector; defaults to the preset target.
    #[arg(long)]
    pub target_sector: Option<i64>,
    /// Rotation from start to target centre, degrees.
    #[arg(long)]
    pub distance: Option<f64>,
    /// Rotation speed, deg/s.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Rotation past the target before turning back, degrees.
    #[arg(long)]
    pub overshoot: Option<f64>,
    #[command(flatten)]
    pub wave: WaveOut,
    /// Write metrics and crossings as JSON.
    #[arg(long, value_name = "FILE")]
    pub metrics_json: Option<PathBuf>,
    /// Write the trajectory actually replayed as CSV.
    #[arg(long, value_name = "FILE")]
    pub save_trajectory: Option<PathBuf>,
    /// Write the carrier frequency trace as CSV.
    #[arg(long, value_name = "FILE")]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Gesture {
    /// Generate a labelled synthetic corpus.
    GenCorpus(GenCorpus),
    /// Cross-validate and train a classifier on a corpus.
    Train(Train),
    /// Classify contact images with a trained model.
    Classify(Classify),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MaskFormatArg {
    Csv,
    Pgm,
}

#[derive(Debug, Args)]
pub struct GenCorpus {
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub per_class: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Mask file format.
    #[arg(long, value_enum, default_value_t = MaskFormatArg::Csv)]
    pub format: MaskFormatArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Static,
    Dynamic,
}

#[derive(Debug, Args)]
pub struct Train {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Output model file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 2)]
    pub folds: usize,
    /// Write the cross-validation report as JSON.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Classify {
    #[arg(long)]
    pub model: PathBuf,
    /// Background frame; when given the inputs are raw camera images.
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Frame files (PGM or run-length CSV masks), in time order.
    #[arg(required = true)]
    pub frames: Vec<PathBuf>,
    /// Frame interval, s.
    #[arg(long, default_value_t = 1.0 / 60.0)]
    pub frame_dt: f64,
}

/// A location on the plate given by grid index or coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Site {
    Index(usize),
    At(Point),
}

impl std::str::FromStr for Site {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains(',') {
            parse_xy(s).map(Site::At)
        } else {
            match s.trim().parse::<usize>() {
                Ok(i) if i >= 1 => Ok(Site::Index(i)),
                _ => Err(format!("expected a 1-based grid index or x,y, got {s:?}")),
            }
        }
    }
}

pub fn parse_xy(s: &str) -> Result<Point, String> {
    let mut it = s.split(',').map(|v| v.trim().parse::<f64>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(x)), Some(Ok(y)), None) if x.is_finite() && y.is_finite() => Ok(Point::new(x, y)),
        _ => Err(format!("expected x,y in mm, got {s:?}")),
    }
}
