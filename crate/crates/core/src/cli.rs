//! Command-line front end: argument parsing, execution and JSON-lines output.
//!
//! Exit codes: 0 when every hard check passes, 2 when a hard check fails or
//! a conjecture candidate survives re-verification, 1 on usage,
//! configuration or runtime errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::entropy::LOG_BASE;
use crate::error::{Error, Result};
use crate::harness::{
    run_experiment, summarize, ConjectureSampler, Experiment, KappaMode, MeasurementFamily, MinFormSettings,
    Summary, TauMode, TrialConfig, TrialRecord,
};
use crate::rng::RNG_ALGORITHM;
use crate::state::StateKind;

/// Overrides `--parallel` when set.
pub const THREADS_ENV: &str = "QUDIT_EPI_THREADS";
pub const DEFAULT_SEED: u64 = 20_240_917;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FINDING: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qudit-epi", version, about = "Randomized checks of qudit entropy-power inequalities for the partial-swap channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Conditional majorization of the partial-swap output under local measurements
    VerifyLemma(RunArgs),
    /// Conditional entropy-power inequality, per sampled measurement pair
    VerifyTheorem(RunArgs),
    /// Unconditional majorization and entropy-power inequality
    VerifyQepi(RunArgs),
    /// Midpoint concavity of the entropy power on the simplex
    ConcavityScan(RunArgs),
    /// Search for violations of the entropy-conditioned inequality
    SearchConjecture(RunArgs),
    /// Every experiment above with one configuration
    All(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Qudit dimension d (2 to 6)
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Dimension of the first environment (1 to 4)
    #[arg(long = "env-dim1", default_value_t = 2)]
    env_dim1: usize,
    /// Dimension of the second environment (1 to 4)
    #[arg(long = "env-dim2", default_value_t = 2)]
    env_dim2: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// 'random' or a fixed value in [0, 1]
    #[arg(long, default_value = "random")]
    tau: TauMode,
    /// 'grid' (0, kappa1/2, kappa1), 'max' (kappa1) or a fixed value
    #[arg(long, default_value = "grid")]
    kappa: KappaMode,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every available core
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    /// 'ginibre', 'pure' or 'rank-k:K'
    #[arg(long = "state-kind", default_value = "ginibre")]
    state_kind: StateKind,
    /// Allow kappa above kappa1; checks there become diagnostics
    #[arg(long = "exploratory-kappa")]
    exploratory_kappa: bool,
    #[arg(long, value_enum, default_value = "haar-projective")]
    measurement: MeasurementFamily,
    /// Optimizer restarts for the min-form diagnostic; 0 disables it
    #[arg(long, default_value_t = MinFormSettings::default().restarts)]
    restarts: usize,
    #[arg(long = "refine-steps", default_value_t = MinFormSettings::default().refine_steps)]
    refine_steps: usize,
    #[arg(long = "step-scale", default_value_t = MinFormSettings::default().step_scale)]
    step_scale: f64,
    #[arg(long = "conjecture-sampler", value_enum, default_value = "markov")]
    conjecture_sampler: ConjectureSampler,
    /// Record the UTC start time in the manifest (output is then no longer byte-reproducible)
    #[arg(long)]
    stamp: bool,
}

impl RunArgs {
    fn config(&self) -> TrialConfig {
        TrialConfig {
            d: self.dim,
            d_e1: self.env_dim1,
            d_e2: self.env_dim2,
            tau: self.tau,
            kappa: self.kappa,
            state_kind: self.state_kind,
            trials: self.trials,
            seed: self.seed,
            tolerance: self.tol,
            exploratory_kappa: self.exploratory_kappa,
            measurement: self.measurement,
            min_form: MinFormSettings {
                restarts: self.restarts,
                refine_steps: self.refine_steps,
                step_scale: self.step_scale,
            },
            conjecture_sampler: self.conjecture_sampler,
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyLemma(_) => "verify-lemma",
            Command::VerifyTheorem(_) => "verify-theorem",
            Command::VerifyQepi(_) => "verify-qepi",
            Command::ConcavityScan(_) => "concavity-scan",
            Command::SearchConjecture(_) => "search-conjecture",
            Command::All(_) => "all",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::VerifyLemma(a)
            | Command::VerifyTheorem(a)
            | Command::VerifyQepi(a)
            | Command::ConcavityScan(a)
            | Command::SearchConjecture(a)
            | Command::All(a) => a,
        }
    }

    fn experiments(&self) -> Vec<Experiment> {
        match self {
            Command::VerifyLemma(_) => vec![Experiment::Lemma],
            Command::VerifyTheorem(_) => vec![Experiment::Theorem],
            Command::VerifyQepi(_) => vec![Experiment::Qepi],
            Command::ConcavityScan(_) => vec![Experiment::Concavity],
            Command::SearchConjecture(_) => vec![Experiment::Conjecture],
            Command::All(_) => Experiment::ALL.to_vec(),
        }
    }
}

/// First line of every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: TrialConfig,
    pub version: String,
    pub rng: String,
    pub log_base: String,
    /// UTC ISO-8601; absent unless requested, so reruns stay byte-identical.
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: TrialConfig, stamp: bool) -> Self {
        Self {
            command: command.to_string(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ALGORITHM.to_string(),
            log_base: LOG_BASE.to_string(),
            timestamp: stamp.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        }
    }
}

/// One line of output, tagged by `"type"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Line {
    Manifest(RunManifest),
    Trial(TrialRecord),
    Summary(Summary),
}

/// Manifest, then one line per record, then the summary.
pub fn write_lines<W: Write>(mut w: W, manifest: &RunManifest, records: &[TrialRecord], summary: &Summary) -> io::Result<()> {
    let mut put = |line: &Line| -> io::Result<()> {
        serde_json::to_writer(&mut w, line).map_err(io::Error::other)?;
        w.write_all(b"\n")
    };
    put(&Line::Manifest(manifest.clone()))?;
    for r in records {
        put(&Line::Trial(r.clone()))?;
    }
    put(&Line::Summary(summary.clone()))?;
    w.flush()
}

/// Writes the run to `out`, or to standard output when `out` is `None`.
pub fn emit(manifest: &RunManifest, records: &[TrialRecord], summary: &Summary, out: Option<&Path>) -> Result<()> {
    let io_err = |path: &str, e: io::Error| Error::IoFailure {
        path: path.to_string(),
        detail: e.to_string(),
    };
    match out {
        Some(path) => {
            let shown = path.display().to_string();
            let file = File::create(path).map_err(|e| io_err(&shown, e))?;
            write_lines(BufWriter::new(file), manifest, records, summary).map_err(|e| io_err(&shown, e))
        }
        None => {
            let stdout = io::stdout();
            write_lines(BufWriter::new(stdout.lock()), manifest, records, summary).map_err(|e| io_err("<stdout>", e))
        }
    }
}

/// Parses a JSON-lines run back into its manifest, records and summary.
pub fn parse_lines(text: &str) -> Result<(RunManifest, Vec<TrialRecord>, Summary)> {
    let mut manifest = None;
    let mut summary = None;
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let parsed: Line =
            serde_json::from_str(line).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        match parsed {
            Line::Manifest(m) => manifest = Some(m),
            Line::Trial(r) => records.push(r),
            Line::Summary(s) => summary = Some(s),
        }
    }
    let manifest = manifest.ok_or_else(|| Error::Config("missing manifest line".into()))?;
    let summary = summary.ok_or_else(|| Error::Config("missing summary line".into()))?;
    Ok((manifest, records, summary))
}

fn thread_count(flag: usize) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(flag),
    }
}

fn execute(command: &Command) -> Result<Summary> {
    let args = command.args();
    let cfg = args.config();
    cfg.validate()?;
    let threads = thread_count(args.parallel)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;

    let start = Instant::now();
    let records = pool.install(|| -> Result<Vec<TrialRecord>> {
        let mut all = Vec::with_capacity(cfg.trials * command.experiments().len());
        for e in command.experiments() {
            all.extend(run_experiment(e, &cfg)?);
        }
        Ok(all)
    })?;
    let summary = if records.is_empty() {
        Summary::empty()
    } else {
        summarize(&records)?
    };
    let manifest = RunManifest::new(command.name(), cfg, args.stamp);
    emit(&manifest, &records, &summary, args.out.as_deref())?;
    eprintln!(
        "{}: {} trials, {} violations, {} re-verified candidates in {:.2} s",
        command.name(),
        summary.trials,
        summary.violations,
        summary.reverified_candidates,
        start.elapsed().as_secs_f64()
    );
    Ok(summary)
}

fn print_help_for(subcommand: Option<&str>) {
    let mut cmd = Cli::command();
    let help = match subcommand.and_then(|name| cmd.find_subcommand_mut(name)) {
        Some(sub) => sub.render_help(),
        None => cmd.render_help(),
    };
    eprintln!("{help}");
}

/// Runs the command line `argv` (including the program name) and returns the exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let sub = argv.get(1).and_then(|s| s.to_str()).map(str::to_string);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprintln!("{e}");
            print_help_for(sub.as_deref());
            return EXIT_ERROR;
        }
    };
    match execute(&cli.command) {
        Ok(summary) if summary.has_findings() => EXIT_FINDING,
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(_)) {
                print_help_for(Some(cli.command.name()));
            }
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let m = RunManifest::new("all", TrialConfig::default(), true);
        let text = serde_json::to_string(&Line::Manifest(m.clone())).unwrap();
        assert!(text.starts_with(r#"{"type":"manifest""#));
        assert_eq!(serde_json::from_str::<Line>(&text).unwrap(), Line::Manifest(m));
    }

    #[test]
    fn emitted_lines_parse_back() {
        let cfg = TrialConfig {
            trials: 3,
            ..TrialConfig::default()
        };
        let records = run_experiment(Experiment::Qepi, &cfg).unwrap();
        let summary = summarize(&records).unwrap();
        let mut buf = Vec::new();
        write_lines(&mut buf, &RunManifest::new("verify-qepi", cfg, false), &records, &summary).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        let (_, back, s) = parse_lines(&text).unwrap();
        assert_eq!(back, records);
        assert_eq!(summarize(&back).unwrap(), s);
    }

    #[test]
    fn empty_run_has_manifest_and_summary() {
        let mut buf = Vec::new();
        write_lines(&mut buf, &RunManifest::new("all", TrialConfig::default(), false), &[], &Summary::empty()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().contains(r#""trials":0"#));
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(dispatch(["qudit-epi", "verify-lemma", "--bogus"]), EXIT_ERROR);
        assert_eq!(dispatch(["qudit-epi"]), EXIT_ERROR);
    }

    #[test]
    fn dimension_cap_is_a_config_error() {
        assert_eq!(dispatch(["qudit-epi", "verify-lemma", "--dim", "7"]), EXIT_ERROR);
    }
}
