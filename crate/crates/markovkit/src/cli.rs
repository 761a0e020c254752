//! Argument parsing, configuration and exit codes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use markovkit_core::Tolerances;

use crate::commands;
use crate::error::{CliError, CliResult};
use crate::report::render;

/// Name of the environment variable overriding `verify_tol`.
pub const TOL_ENV: &str = "MARKOVKIT_TOL";

#[derive(Clone, Debug, Parser)]
#[command(
    name = "markovkit",
    version,
    about = "Quantum Markov structure numerics with JSON reports"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct GlobalArgs {
    /// Threshold for numerical self-checks (overrides MARKOVKIT_TOL).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Relative eigenvalue cutoff defining supports.
    #[arg(long, global = true)]
    pub support_cutoff: Option<f64>,
    /// Residual below which an algebra element counts as spanned.
    #[arg(long, global = true)]
    pub closure_tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report to this path instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for harness trials.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Layout, spectrum summary and marginal populations.
    Info(StateArgs),
    /// Conditional mutual information I(A:C|B) in bits.
    Qcmi(GroupedArgs),
    /// Koashi-Imoto decomposition of the AC marginal on A.
    Ki(GroupedArgs),
    /// QCMI, plain Petz recovery errors and the Markov verdict.
    MarkovCheck(GroupedArgs),
    /// Markov decomposition of a Markov state.
    MarkovDecompose(GroupedArgs),
    /// Recovery error of a Petz-family map.
    Recover(RecoverArgs),
    /// Single-letter Markovianizing cost and its QCMI lower bound.
    Cost(GroupedArgs),
    /// Twirl n copies of a pure state with the Koashi-Imoto ensemble.
    Markovianize(MarkovianizeArgs),
    /// Simulate the measurement-based Markovianization protocol.
    MeasureSim(MeasureArgs),
    /// Randomized bound checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Recovery errors from AB and from BC on noised Markov states.
    ProbeConjecture(ProbeArgs),
    /// Write a random state file.
    RandomState(RandomStateArgs),
}

#[derive(Clone, Debug, Args)]
pub struct StateArgs {
    /// State file.
    pub state: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct GroupedArgs {
    /// State file.
    pub state: PathBuf,
    /// Grouping such as "A1,A2|B|C".
    #[arg(long)]
    pub split: Option<String>,
    /// Conditioning subsystems; the others before them form A and after them C.
    #[arg(long, conflicts_with = "split")]
    pub cond: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    /// Recover from BC with a channel B -> AB.
    Bc,
    /// Recover from AB with a channel B -> BC.
    Ab,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Plain,
    Rotated,
    Averaged,
    /// Best of plain, rotated over the t grid, and averaged.
    Best,
}

#[derive(Clone, Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub grouped: GroupedArgs,
    #[arg(long, value_enum, default_value_t = DirectionArg::Bc)]
    pub from: DirectionArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
    pub mode: ModeArg,
    /// Rotation parameter for the rotated map.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Comma-separated rotation grid for the best-map search.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_grid: Option<Vec<f64>>,
    /// Include the Kraus operators in the report.
    #[arg(long)]
    pub emit_channel: bool,
}

#[derive(Clone, Debug, Args)]
pub struct MarkovianizeArgs {
    #[command(flatten)]
    pub grouped: GroupedArgs,
    /// Number of copies.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Include the unitaries of the ensemble.
    #[arg(long)]
    pub emit_ensemble: bool,
    /// Include the output density matrix.
    #[arg(long)]
    pub emit_state: bool,
}

#[derive(Clone, Debug, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub grouped: GroupedArgs,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Random channel candidates behind the zeta estimate.
    #[arg(long, default_value_t = 24)]
    pub zeta_budget: usize,
    /// Include the measurement operators.
    #[arg(long)]
    pub emit_measurement: bool,
}

#[derive(Clone, Debug, Subcommand)]
pub enum VerifyCommand {
    /// Recoverability from small QCMI and its converse.
    Lemma1(Lemma1Args),
    /// Squeezing-map bound on perturbed Markov states.
    AppendixA(StructuralArgs),
    /// Mutual-information bound under near state-preserving channels.
    Lemma6(StructuralArgs),
}

#[derive(Clone, Debug, Args)]
pub struct Lemma1Args {
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Dimensions d_A,d_B,d_C.
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    pub dims: Vec<usize>,
    /// Largest noise level of the perturbed Markov states.
    #[arg(long, default_value_t = 0.1)]
    pub max_eps: f64,
}

#[derive(Clone, Debug, Args)]
pub struct StructuralArgs {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    pub dims: Vec<usize>,
    /// Noise level (appendix-a, default 0.1) or channel perturbation weight (lemma6, default 0).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Copies (lemma6).
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 24)]
    pub zeta_budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub max_noise: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = ProbeFormat::Json)]
    pub format: ProbeFormat,
}

#[derive(Clone, Debug, Args)]
pub struct RandomStateArgs {
    /// Subsystem dimensions.
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    pub dims: Vec<usize>,
    /// Subsystem names (default A, B, C, ...).
    #[arg(long, value_delimiter = ',')]
    pub names: Option<Vec<String>>,
    /// Rank of the mixed state (default full).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Write a state vector.
    #[arg(long, conflicts_with = "rank")]
    pub pure: bool,
}

/// Everything a run depends on.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub tol: Tolerances,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub jobs: usize,
}

impl RunConfig {
    /// Flags take precedence over `env_tol` (the value of `MARKOVKIT_TOL`), which
    /// takes precedence over the defaults.
    pub fn resolve(cli: Cli, env_tol: Option<&str>) -> CliResult<Self> {
        let defaults = Tolerances::default();
        let env = match env_tol.map(str::trim).filter(|s| !s.is_empty()) {
            Some(s) => Some(
                s.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("{TOL_ENV}=`{s}` is not a number")))?,
            ),
            None => None,
        };
        let g = cli.global;
        let tol = Tolerances::new(
            g.support_cutoff.unwrap_or(defaults.support_cutoff_rel),
            g.closure_tol.unwrap_or(defaults.algebra_closure_tol),
            g.tol.or(env).unwrap_or(defaults.verify_tol),
        )?;
        if g.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            command: cli.command,
            tol,
            seed: g.seed,
            output: g.output,
            jobs: g.jobs,
        })
    }
}

/// Rendered report and the exit code it maps to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

pub fn run(config: &RunConfig) -> CliResult<Outcome> {
    commands::dispatch(config)
}

fn emit(text: &str, output: Option<&PathBuf>, stdout: &mut dyn Write) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn report_error(
    e: &CliError,
    output: Option<&PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let value = serde_json::to_value(e.to_report()).expect("error reports serialize");
    let _ = writeln!(stderr, "error: {e}");
    if emit(&render(&value), output, stdout).is_err() {
        let _ = stdout.write_all(render(&value).as_bytes());
    }
    e.exit_code()
}

/// Parses `args`, runs the command and writes the report. Returns the exit code:
/// 0 on success, 1 on validation errors, 2 on numerical verification failures.
pub fn main_with_args<I, T>(
    args: I,
    env_tol: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let err = CliError::Usage(first.trim_start_matches("error: ").to_string());
            let _ = write!(stderr, "{e}");
            let value = serde_json::to_value(err.to_report()).expect("error reports serialize");
            let _ = stdout.write_all(render(&value).as_bytes());
            return err.exit_code();
        }
    };
    let output = cli.global.output.clone();
    let result = RunConfig::resolve(cli, env_tol).and_then(|config| {
        let outcome = run(&config)?;
        emit(&outcome.text, config.output.as_ref(), stdout)?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => report_error(&e, output.as_ref(), stdout, stderr),
    }
}
