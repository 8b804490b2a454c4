//! The `eegsel` command line.
//!
//! Every command reads one [`RunConfig`] (file plus overrides), writes its
//! outputs under a single directory and records them, with their SHA-256
//! and the config hash, in `<command>.run.json` next to them. No output
//! carries a timestamp, so reruns are byte-identical.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{parse_override, sha256_hex, RunConfig};
use crate::dataset::{builtin_setup, load_recording, save_recording, Label, Recording, SetUp};
use crate::error::{Error, Result};
use crate::eval::{
    bandpower_baseline, classify, fit_detector, make_folds, sweep, BaselineResult, BarSeries, EvalReport, Prediction,
};
use crate::eval::pipeline::recording_windows;
use crate::features::build_feature_series;
use crate::model::{load_model, save_model};
use crate::synthgen::generate_corpus;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PositiveClass {
    Alpha,
    Nonalpha,
}

impl From<PositiveClass> for Label {
    fn from(p: PositiveClass) -> Label {
        match p {
            PositiveClass::Alpha => Label::Alpha,
            PositiveClass::Nonalpha => Label::NonAlpha,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "eegsel",
    version,
    about = "Rank EEG electrode set-ups with a one-class autoencoder",
    after_help = "Any config field can be overridden with a dotted flag, e.g. --eval.k_folds=6 or --synth.alpha_amp_uv=15."
)]
pub struct Cli {
    /// JSON run configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for synthesis, training and fold assignment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory of the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub positive_class: Option<PositiveClass>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic corpus and its manifest.
    Synth,
    /// Write per-window feature CSVs for one set-up.
    Featurize {
        #[arg(long, default_value = "CzOz")]
        setup: String,
        /// Recordings to featurize; defaults to the corpus.
        #[arg(long)]
        recording: Vec<PathBuf>,
    },
    /// Train and calibrate a detector for one set-up.
    Train {
        #[arg(long, default_value = "CzOz")]
        setup: String,
        /// Training recordings; defaults to the corpus.
        #[arg(long)]
        recording: Vec<PathBuf>,
        /// Model file; defaults to `<model_dir>/<setup>_<class>.json`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Score every model window of a recording.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        recording: PathBuf,
        /// Set-up to derive channels with; defaults to the model's own.
        #[arg(long)]
        setup: Option<String>,
    },
    /// Cross-validate every configured set-up and select one.
    Sweep,
    /// Band-power baseline next to the autoencoder, per set-up.
    Baseline,
    /// Re-render a sweep report and replay the selection.
    Report {
        /// Sweep JSON; defaults to `<report_dir>/sweep_<class>.json`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Splits dotted `--a.b=v` overrides from the arguments clap understands.
pub fn split_overrides(args: Vec<OsString>) -> Result<(Vec<OsString>, Vec<(String, String)>)> {
    let mut plain = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        match a.to_str() {
            Some(s) if s.starts_with("--") && s.split('=').next().is_some_and(|k| k.contains('.')) => {
                overrides.push(parse_override(s)?);
            }
            _ => plain.push(a),
        }
    }
    Ok((plain, overrides))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let (plain, overrides) = match split_overrides(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BAD_INPUT;
        }
    };
    let cli = match Cli::try_parse_from(plain) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    match run(&cli, &overrides) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_BAD_INPUT
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

/// Resolves the effective configuration of a parsed command line.
pub fn resolve_config(cli: &Cli, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), overrides)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(p) = cli.positive_class {
        cfg.eval.positive_class = p.into();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli, overrides: &[(String, String)]) -> Result<()> {
    let cfg = resolve_config(cli, overrides)?;
    let out = |default: &Path| cli.out.clone().unwrap_or_else(|| default.to_path_buf());
    match &cli.command {
        Command::Synth => cmd_synth(&cfg, &out(&cfg.paths.data_dir)).map(|_| ()),
        Command::Featurize { setup, recording } => {
            cmd_featurize(&cfg, setup, recording, &out(&cfg.paths.data_dir.join("features")))
        }
        Command::Train { setup, recording, model } => {
            let dir = out(&cfg.paths.model_dir);
            let path = model
                .clone()
                .unwrap_or_else(|| dir.join(format!("{setup}_{}.json", cfg.eval.positive_class)));
            cmd_train(&cfg, setup, recording, &path)
        }
        Command::Score { model, recording, setup } => {
            cmd_score(&cfg, model, recording, setup.as_deref(), &out(&cfg.paths.report_dir))
        }
        Command::Sweep => cmd_sweep(&cfg, &out(&cfg.paths.report_dir)).map(|_| ()),
        Command::Baseline => cmd_baseline(&cfg, &out(&cfg.paths.report_dir)),
        Command::Report { input } => cmd_report(&cfg, input.as_deref(), &out(&cfg.paths.report_dir)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub id: String,
    pub seed: u64,
    pub n_samples: usize,
    pub sha256: String,
}

/// What `synth` wrote and how to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub config: RunConfig,
    pub recordings: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub outputs: Vec<OutputRecord>,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, body: &[u8]) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

/// Writes `<command>.run.json` listing `files` (relative to `dir`).
fn write_run_record(cfg: &RunConfig, command: &str, dir: &Path, files: &[PathBuf]) -> Result<()> {
    let outputs = files
        .iter()
        .map(|f| {
            Ok(OutputRecord {
                file: f
                    .strip_prefix(dir)
                    .unwrap_or(f)
                    .to_string_lossy()
                    .into_owned(),
                sha256: file_hash(f)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rec = RunRecord {
        command: command.to_string(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        outputs,
    };
    let body = serde_json::to_string_pretty(&rec).map_err(|e| Error::Parse(e.to_string()))?;
    write_file(&dir.join(format!("{command}.run.json")), body.as_bytes())
}

pub fn cmd_synth(cfg: &RunConfig, dir: &Path) -> Result<Manifest> {
    create_dir(dir)?;
    let corpus = generate_corpus(&cfg.synth, cfg.n_recordings)?;
    let mut entries = Vec::with_capacity(corpus.len());
    for (i, rec) in corpus.iter().enumerate() {
        let file = format!("{}.csv", rec.id);
        let path = dir.join(&file);
        save_recording(rec, &path)?;
        entries.push(ManifestEntry {
            file,
            id: rec.id.clone(),
            seed: cfg.synth.seed.wrapping_add(i as u64),
            n_samples: rec.n_samples(),
            sha256: file_hash(&path)?,
        });
    }
    let manifest = Manifest {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        recordings: entries,
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    write_file(&dir.join(MANIFEST), body.as_bytes())?;
    println!("wrote {} recordings and {MANIFEST} to {}", corpus.len(), dir.display());
    Ok(manifest)
}

/// Loads the recordings listed in `<dir>/manifest.json`, or every `*.csv`
/// in `dir` (sorted by name) when there is no manifest.
pub fn load_corpus(dir: &Path) -> Result<Vec<Recording>> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus directory not found (run `eegsel synth` first)"),
        ));
    }
    let manifest_path = dir.join(MANIFEST);
    let files: Vec<PathBuf> = if manifest_path.is_file() {
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", manifest_path.display())))?;
        m.recordings.iter().map(|r| dir.join(&r.file)).collect()
    } else {
        let mut v: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        v.sort();
        v
    };
    if files.is_empty() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no recordings found"),
        ));
    }
    files.iter().map(|p| load_recording(p)).collect()
}

fn recordings_or_corpus(cfg: &RunConfig, paths: &[PathBuf]) -> Result<Vec<Recording>> {
    if paths.is_empty() {
        load_corpus(&cfg.paths.data_dir)
    } else {
        paths.iter().map(|p| load_recording(p)).collect()
    }
}

pub fn cmd_featurize(cfg: &RunConfig, setup: &str, recordings: &[PathBuf], dir: &Path) -> Result<()> {
    let setup = builtin_setup(setup)?;
    let recs = recordings_or_corpus(cfg, recordings)?;
    create_dir(dir)?;
    let mut written = Vec::new();
    for rec in &recs {
        let series = build_feature_series(rec, &setup, &cfg.features)?;
        let path = dir.join(format!("{}__{}.csv", setup.name, rec.id));
        series.save_csv(&path)?;
        written.push(path);
    }
    write_run_record(cfg, "featurize", dir, &written)?;
    println!("wrote {} feature files to {}", written.len(), dir.display());
    Ok(())
}

pub fn cmd_train(cfg: &RunConfig, setup: &str, recordings: &[PathBuf], model_path: &Path) -> Result<()> {
    let setup = builtin_setup(setup)?;
    let recs = recordings_or_corpus(cfg, recordings)?;
    let refs: Vec<&Recording> = recs.iter().collect();
    let positive = cfg.eval.positive_class;
    let (model, _) = fit_detector(&refs, &setup, positive, &cfg.pipeline())?;
    let dir = model_path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    create_dir(dir)?;
    save_model(&model, model_path)?;
    write_run_record(cfg, "train", dir, &[model_path.to_path_buf()])?;
    let det = model.detector.as_ref().expect("fit_detector sets detector");
    println!(
        "trained {} ({} positive) on {} windows, threshold {:.6}; wrote {}",
        setup.name,
        positive,
        model.train_meta.n_train_windows,
        det.threshold,
        model_path.display()
    );
    Ok(())
}

/// One row of the score CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredWindow {
    pub window_index: usize,
    pub score: f64,
    pub label: Label,
    pub classification: Label,
}

pub fn score_recording(model_path: &Path, rec: &Recording, setup: Option<&str>) -> Result<Vec<ScoredWindow>> {
    let model = load_model(model_path)?;
    let det = model
        .detector
        .as_ref()
        .ok_or_else(|| Error::Parse(format!("{}: model has no calibrated threshold", model_path.display())))?;
    let setup: SetUp = match setup {
        Some(name) => builtin_setup(name)?,
        None => det.setup.clone(),
    };
    let windows = recording_windows(&[rec], &setup, &det.features)?;
    let scores = model.score_windows(&windows)?;
    Ok(windows
        .iter()
        .zip(scores)
        .enumerate()
        .map(|(i, (w, s))| ScoredWindow {
            window_index: i,
            score: s,
            label: w.label,
            classification: match classify(s, det.threshold) {
                Prediction::Positive => det.positive_class,
                Prediction::Negative => det.positive_class.other(),
            },
        })
        .collect())
}

pub fn cmd_score(cfg: &RunConfig, model: &Path, recording: &Path, setup: Option<&str>, dir: &Path) -> Result<()> {
    let rec = load_recording(recording)?;
    let rows = score_recording(model, &rec, setup)?;
    let mut body = String::from("window_index,score,label,classification\n");
    for r in &rows {
        body.push_str(&format!("{},{},{},{}\n", r.window_index, r.score, r.label, r.classification));
    }
    create_dir(dir)?;
    let stem = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let path = dir.join(format!("scores_{stem}__{}.csv", rec.id));
    write_file(&path, body.as_bytes())?;
    write_run_record(cfg, "score", dir, &[path.clone()])?;
    println!("scored {} windows; wrote {}", rows.len(), path.display());
    Ok(())
}

fn report_stem(cfg: &RunConfig) -> String {
    format!("sweep_{}", cfg.eval.positive_class)
}

fn sweep_outputs(dir: &Path, stem: &str) -> Vec<PathBuf> {
    ["json", "csv", "svg"].iter().map(|e| dir.join(format!("{stem}.{e}"))).collect()
}

fn baseline_path(dir: &Path, cfg: &RunConfig) -> PathBuf {
    dir.join(format!("baseline_{}.json", cfg.eval.positive_class))
}

fn load_baseline_series(path: &Path) -> Result<Option<BarSeries>> {
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let results: Vec<BaselineResult> =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(Some(BarSeries {
        name: "band power".into(),
        bars: results
            .into_iter()
            .map(|r| (r.setup_name, r.mean_fscore, r.std_fscore))
            .collect(),
    }))
}

pub fn cmd_sweep(cfg: &RunConfig, dir: &Path) -> Result<EvalReport> {
    let corpus = load_corpus(&cfg.paths.data_dir)?;
    let setups = cfg.resolve_setups()?;
    let mut report = sweep(&corpus, &setups, cfg.eval.positive_class, &cfg.pipeline(), &cfg.comfort)?;
    report.config_hash = cfg.hash();
    let stem = report_stem(cfg);
    let extra: Vec<BarSeries> = load_baseline_series(&baseline_path(dir, cfg))?.into_iter().collect();
    report.write_all(dir, &stem, &extra)?;
    write_run_record(cfg, "sweep", dir, &sweep_outputs(dir, &stem))?;
    print!("{}", report.summary_text());
    Ok(report)
}

fn load_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EvalReport::from_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn cmd_baseline(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let corpus = load_corpus(&cfg.paths.data_dir)?;
    let positive = cfg.eval.positive_class;
    let report_path = dir.join(format!("{}.json", report_stem(cfg)));
    let report = if report_path.is_file() {
        let r = load_report(&report_path)?;
        if r.config_hash != cfg.hash() {
            return Err(Error::invariant(format!(
                "{} was produced by a different config; rerun `eegsel sweep`",
                report_path.display()
            )));
        }
        r
    } else {
        cmd_sweep(cfg, dir)?
    };

    let folds = make_folds(corpus.len(), cfg.eval.k_folds, cfg.eval.seed)?;
    let mut results = Vec::new();
    let mut csv = String::from("setup,n_channels,positive_class,baseline_mean_f,baseline_std_f,ae_mean_f,ae_std_f\n");
    for setup in report.summaries().map(|s| s.setup.clone()) {
        let b = bandpower_baseline(&corpus, &setup, &folds, positive, &cfg.features)?;
        let ae = &report.per_setup[&setup.name];
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            setup.name,
            setup.m(),
            positive,
            b.mean_fscore,
            b.std_fscore,
            ae.mean_fscore,
            ae.std_fscore
        ));
        results.push(b);
    }
    create_dir(dir)?;
    let json_path = baseline_path(dir, cfg);
    let csv_path = dir.join(format!("baseline_{positive}.csv"));
    let body = serde_json::to_string_pretty(&results).map_err(|e| Error::Parse(e.to_string()))?;
    write_file(&json_path, body.as_bytes())?;
    write_file(&csv_path, csv.as_bytes())?;
    let stem = report_stem(cfg);
    let extra: Vec<BarSeries> = load_baseline_series(&json_path)?.into_iter().collect();
    report.write_all(dir, &stem, &extra)?;
    let mut outputs = vec![json_path, csv_path];
    outputs.extend(sweep_outputs(dir, &stem));
    write_run_record(cfg, "baseline", dir, &outputs)?;
    print!("{csv}");
    Ok(())
}

pub fn cmd_report(cfg: &RunConfig, input: Option<&Path>, dir: &Path) -> Result<()> {
    let default_input = cfg.paths.report_dir.join(format!("{}.json", report_stem(cfg)));
    let input = input.unwrap_or(&default_input);
    let mut report = load_report(input)?;
    report.reselect(&cfg.comfort, cfg.eval.delta)?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| report_stem(cfg));
    let baseline_json = input
        .parent()
        .unwrap_or(Path::new("."))
        .join(format!("baseline_{}.json", report.positive_class));
    let extra: Vec<BarSeries> = load_baseline_series(&baseline_json)?.into_iter().collect();
    report.write_all(dir, &stem, &extra)?;
    write_run_record(cfg, "report", dir, &sweep_outputs(dir, &stem))?;
    print!("{}", report.summary_text());
    Ok(())
}
