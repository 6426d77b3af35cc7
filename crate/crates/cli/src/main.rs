//! `dronepaint`: dataset synthesis, training, evaluation, simulation, rendering,
//! metrics and the live gateway, all from one binary.

mod commands;
mod failure;

use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "dronepaint",
    version,
    about = "Gesture-driven drone light painting, headless"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Generate a labelled synthetic hand-landmark dataset (CSV).
    SynthData(SynthDataArgs),
    /// Train the gesture classifier.
    Train(TrainArgs),
    /// Report held-out accuracy and the confusion matrix of a model.
    Eval(EvalArgs),
    /// Classify hand frames from a JSON file.
    Classify(ClassifyArgs),
    /// Run a scenario: writes trace.csv, events.jsonl, painting.ppm, report.json.
    Simulate(SimulateArgs),
    /// Re-expose a recorded trace into a painting.
    Render(RenderArgs),
    /// Score drawn trajectories against a reference shape.
    Metrics(MetricsArgs),
    /// Run the live session gateway.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
pub struct SynthDataArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory; the dataset is written to DIR/dataset.csv.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Dataset recipe (classes, counts, jitter sigma, train fraction) as JSON.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Seed for weight init and shuffling, and for the synthetic dataset when --data is absent.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Dataset CSV from `synth-data`; synthesized in memory when omitted.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Hyperparameters (hidden, epochs, batch_size, learning_rate) as JSON.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory; the model is written to DIR/model.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE", default_value = "model.json")]
    pub model: PathBuf,
    /// Dataset CSV; defaults to regenerating the synthetic set the model was trained on.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Seed of the synthetic dataset (overrides the one recorded in the model).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the evaluation as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// JSON file with one frame `{"landmarks": [[x,y,z], ...]}` or a list of them; `-` reads stdin.
    pub frames: PathBuf,
    #[arg(long, value_name = "FILE", default_value = "model.json")]
    pub model: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario document (JSON).
    pub scenario: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the four artifacts.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Scenario the trace was produced from (zone and canvas settings).
    pub scenario: PathBuf,
    /// trace.csv from `simulate`.
    pub trace: PathBuf,
    /// Output directory; the painting is written to DIR/painting.ppm.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Square,
    Circle,
    Triangle,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// `x,y,t` (plane, meters) or `x,y,z,t` (world; scored in the x-z plane) files.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub shape: ShapeArg,
    /// Side length of a square or triangle, m.
    #[arg(long)]
    pub side: Option<f64>,
    /// Circle radius, m.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Shape center in the drawing plane, m.
    #[arg(long, value_name = "X,Y", value_delimiter = ',', num_args = 2, default_values_t = [0.0, 1.5])]
    pub center: Vec<f64>,
    /// Column label per file, in order (defaults to the file stem).
    #[arg(long = "method", value_name = "NAME")]
    pub methods: Vec<String>,
    /// Print reports as JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
    /// WebSocket port (endpoint `/session`).
    #[arg(long, env = "DRONEPAINT_PORT", default_value_t = 8765)]
    pub port: u16,
    /// Also serve newline-delimited JSON over plain TCP on this port.
    #[arg(long, env = "DRONEPAINT_TCP_PORT")]
    pub tcp_port: Option<u16>,
    /// Trained gesture model; without one, hand frames are rejected.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Session defaults (partial JSON, merged over built-in defaults).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every session's simulation.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| commands::run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
        Err(_) => ExitCode::from(2),
    }
}
