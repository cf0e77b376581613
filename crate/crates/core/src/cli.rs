//! The `dgnn` command line.
//!
//! Every option that shapes a model, a training run or a dataset can also be
//! given in a `key=value` config file (`--config`); keys are the long flag
//! names with `-` or `_`. Explicit flags win over the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::baseline::MlpConfig;
use crate::dataset::{
    split, DatasetError, DatasetManifest, MoleculeLibrary, PairConstraints, Split, SplitFractions, SplitProtocol,
    SyntheticLabeler,
};
use crate::error::{Error, Result};
use crate::hash::derive_seed;
use crate::molgraph::{Element, JoinStrategy};
use crate::mpnn::{Checkpoint, ModelConfig, Readout};
use crate::trainkit::{
    detect_outliers, experiment1_methods, experiment2_methods, run_experiment, ExperimentConfig, Metrics, ModelSpec,
    OutlierPolicy, TrainConfig, TrainError,
};

#[derive(Debug, Parser)]
#[command(
    name = "dgnn",
    version,
    about = "Message-passing networks on pairs of molecular graphs"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to DGNN_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// key=value settings file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pair a molecule library and write a labeled manifest.
    Gen(GenArgs),
    /// Assign train/val/test splits.
    Split(SplitArgs),
    /// Train a message-passing network.
    Train(TrainArgs),
    /// Evaluate a checkpoint on one split.
    Eval(EvalArgs),
    /// Train the fingerprint MLP.
    Baseline(BaselineArgs),
    /// Iteratively remove samples with large cross-validated residuals.
    Outliers(OutlierArgs),
    /// Compare DG, FC, GN and the MLP on random splits.
    Exp1(ExperimentArgs),
    /// Compare GN variants and the MLP on leave-alcohol-out splits.
    Exp2(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Weight of the cross term in synthetic labels.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Scale of the synthetic label noise.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Directory of molecule JSON files (default: the built-in library).
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Drop molecules with more heavy atoms.
    #[arg(long)]
    pub max_heavy_atoms: Option<usize>,
    /// Keep only these leaving halogens, e.g. Cl,Br.
    #[arg(long)]
    pub halogens: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Gnuplot data file with a label histogram (bin center, count).
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output manifest (default: overwrite the input).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// random or leave-alcohol-out.
    #[arg(long)]
    pub protocol: Option<String>,
    /// train,val,test fractions.
    #[arg(long)]
    pub fractions: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// dg, fc or gn.
    #[arg(long)]
    pub strategy: Option<String>,
    /// gated, gr or cr.
    #[arg(long)]
    pub readout: Option<String>,
    /// Normalize initial node features.
    #[arg(long)]
    pub norm: bool,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub mlp_width: Option<usize>,
    #[arg(long)]
    pub readout_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Early-stopping patience in epochs; 0 disables early stopping.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    #[arg(long)]
    pub stop_below: Option<f64>,
    /// Per-epoch JSONL log.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MlpArgs {
    /// Hidden widths, e.g. 512,128.
    #[arg(long)]
    pub mlp_hidden: Option<String>,
    #[arg(long)]
    pub fp_radius: Option<usize>,
    #[arg(long)]
    pub fp_bits: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Gnuplot data file with one `id label prediction residual` row per
    /// sample, in label units.
    #[arg(long)]
    pub scatter: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub mlp: MlpArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct OutlierArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Threshold multiplier of the MAD.
    #[arg(long)]
    pub k: Option<f64>,
    /// MAD scale factor; 1 uses the raw MAD (default 1.4826).
    #[arg(long)]
    pub mad_scale: Option<f64>,
    /// Cross-validation folds for residual scoring.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Scoring model: mpnn or mlp.
    #[arg(long)]
    pub model_kind: Option<String>,
    /// Clean manifest (default: <in>.clean.jsonl).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Outlier report CSV (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub mlp: MlpArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Labeled manifest; existing split assignments are ignored (default:
    /// generate from the library).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Summary CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-seed CSV.
    #[arg(long)]
    pub runs: Option<PathBuf>,
    /// Number of split seeds, starting at --seed.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub fractions: Option<String>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub mlp: MlpArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

fn usage(message: String) -> Error {
    Error::Train(TrainError::InvalidConfig(message))
}

/// Parsed `key=value` file. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Dataset(DatasetError::Parse {
                    location: format!("config line {}", i + 1),
                    message: format!("expected key=value, got {line:?}"),
                })
            })?;
            values.insert(k.trim().replace('-', "_"), v.trim().to_owned());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag value if given, else the file value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => s.parse().map_err(|e| usage(format!("config key {key}: {e}"))),
            None => Ok(default),
        }
    }

    fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self
                .raw(key)
                .map(|s| s.parse().map_err(|e| usage(format!("config key {key}: {e}"))))
                .transpose(),
        }
    }

    fn flag(&self, set: bool, key: &str) -> Result<bool> {
        if set {
            return Ok(true);
        }
        self.resolve(None, key, false)
    }
}

fn parse_with<T>(s: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
    f(s).map_err(usage)
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| p.trim().parse().map_err(|e| usage(format!("bad list item {p:?}: {e}"))))
        .collect()
}

struct Context {
    seed: u64,
    cfg: ConfigFile,
}

impl Context {
    fn model(&self, a: &ModelArgs) -> Result<ModelConfig> {
        let d = ModelConfig::default();
        let strategy: String = self.cfg.resolve(a.strategy.clone(), "strategy", "gn".into())?;
        let readout: String = self.cfg.resolve(a.readout.clone(), "readout", "gated".into())?;
        let hidden_dim = self.cfg.resolve(a.hidden_dim, "hidden_dim", d.hidden_dim)?;
        let c = ModelConfig {
            hidden_dim,
            steps: self.cfg.resolve(a.steps, "steps", d.steps)?,
            mlp_width: self.cfg.resolve(a.mlp_width, "mlp_width", d.mlp_width)?,
            readout_dim: self.cfg.resolve(a.readout_dim, "readout_dim", hidden_dim)?,
            readout: parse_with(&readout, Readout::from_str)?,
            strategy: parse_with(&strategy, JoinStrategy::from_str)?,
            normalize: self.cfg.flag(a.norm, "norm")?,
            seed: derive_seed(self.seed, "model"),
        };
        c.validate()?;
        Ok(c)
    }

    fn mlp(&self, a: &MlpArgs) -> Result<MlpConfig> {
        let d = MlpConfig::default();
        let hidden = match self.cfg.resolve_opt(a.mlp_hidden.clone(), "mlp_hidden")? {
            Some(s) => parse_list(&s)?,
            None => d.hidden,
        };
        let c = MlpConfig {
            radius: self.cfg.resolve(a.fp_radius, "fp_radius", d.radius)?,
            nbits: self.cfg.resolve(a.fp_bits, "fp_bits", d.nbits)?,
            hidden,
            seed: derive_seed(self.seed, "model"),
        };
        c.validate()?;
        Ok(c)
    }

    fn fit(&self, a: &FitArgs) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let patience = self.cfg.resolve(a.patience, "patience", d.patience.unwrap_or(0))?;
        let c = TrainConfig {
            epochs: self.cfg.resolve(a.epochs, "epochs", d.epochs)?,
            batch_size: self.cfg.resolve(a.batch_size, "batch_size", d.batch_size)?,
            learning_rate: self.cfg.resolve(a.lr, "lr", d.learning_rate)?,
            patience: (patience > 0).then_some(patience),
            clip_norm: self.cfg.resolve_opt(a.clip_norm, "clip_norm")?,
            stop_below: self.cfg.resolve_opt(a.stop_below, "stop_below")?,
            seed: derive_seed(self.seed, "train"),
            ..d
        };
        c.validate()?;
        Ok(c)
    }

    fn manifest(&self, a: &DataArgs) -> Result<DatasetManifest> {
        let library = match self.cfg.resolve_opt(a.library.clone(), "library")? {
            Some(dir) => MoleculeLibrary::load_dir(&dir)?,
            None => MoleculeLibrary::toy(),
        };
        let halogens = match self.cfg.resolve_opt(a.halogens.clone(), "halogens")? {
            Some(s) => Some(parse_list::<Element>(&s)?),
            None => None,
        };
        let constraints = PairConstraints {
            max_heavy_atoms: self.cfg.resolve_opt(a.max_heavy_atoms, "max_heavy_atoms")?,
            halogens,
        };
        let mut labeler = SyntheticLabeler::new(self.seed, self.cfg.resolve(a.gamma, "gamma", 1.0)?);
        labeler.noise_scale = self.cfg.resolve(a.noise, "noise", labeler.noise_scale)?;
        Ok(DatasetManifest::generate(&library, &constraints, &labeler))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn metrics_row(method: &str, split: Split, m: &Metrics) -> String {
    format!(
        "{method},{split},{:.6e},{:.6e},{:.6e},{:.6e}\n",
        m.r2, m.rmse, m.sre, m.mae
    )
}

const METRICS_HEADER: &str = "method,split,r2,rmse,sre,mae\n";

/// Trains `spec` on a split, normalized manifest, writes the checkpoint and
/// returns the metrics table.
fn train_and_save(
    spec: &ModelSpec,
    manifest: &DatasetManifest,
    fit: &TrainConfig,
    log: Option<&Path>,
    out: &Path,
) -> Result<String> {
    let mut model = spec.build()?;
    let mut log_lines = String::new();
    let report = model.train(manifest, fit, |e| {
        log_lines.push_str(&serde_json::to_string(e).expect("epoch logs serialize"));
        log_lines.push('\n');
    })?;
    if let Some(p) = log {
        fs::write(p, &log_lines)?;
    }
    eprintln!("trained {} epochs, kept epoch {}", report.log.len(), report.best_epoch);
    let label = model.label();
    let mut table = String::from(METRICS_HEADER);
    for s in Split::ALL {
        if !manifest.samples_in(s).is_empty() {
            table.push_str(&metrics_row(&label, s, &model.evaluate(manifest, s)?));
        }
    }
    Checkpoint::new(model, manifest.label_stats).save(out)?;
    Ok(table)
}

fn require_splits(manifest: &mut DatasetManifest) -> Result<()> {
    if manifest.label_stats.is_none() {
        manifest.normalize_labels()?;
    }
    Ok(())
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let seed = cfg.resolve(cli.seed, "seed", 0)?;
    let threads = cli
        .threads
        .or_else(|| std::env::var("DGNN_THREADS").ok().and_then(|v| v.parse().ok()))
        .or(cfg.resolve_opt(None, "threads")?);
    if let Some(n) = threads {
        // an already initialized pool (e.g. in tests) keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let ctx = Context { seed, cfg };

    match cli.command {
        Command::Gen(a) => {
            let m = ctx.manifest(&a.data)?;
            m.save(&a.out)?;
            if let Some(p) = &a.histogram {
                let labels: Vec<f64> = m.samples.iter().map(|s| s.label).collect();
                fs::write(p, histogram(&labels, a.bins))?;
            }
            eprintln!("wrote {} samples to {}", m.len(), a.out.display());
        }
        Command::Split(a) => {
            let m = DatasetManifest::load(&a.input)?;
            let protocol: String = ctx.cfg.resolve(a.protocol, "protocol", "random".into())?;
            let protocol = parse_with(&protocol, SplitProtocol::from_str)?;
            let fractions = match ctx.cfg.resolve_opt(a.fractions, "fractions")? {
                Some(s) => parse_with(&s, SplitFractions::from_str)?,
                None => SplitFractions::default(),
            };
            let mut out = split(&m, protocol, fractions, ctx.seed)?;
            out.normalize_labels()?;
            let path = a.out.unwrap_or(a.input);
            out.save(&path)?;
            let sizes: Vec<String> = Split::ALL
                .iter()
                .map(|&s| format!("{s}={}", out.samples_in(s).len()))
                .collect();
            eprintln!("{protocol} split: {}", sizes.join(" "));
        }
        Command::Train(a) => {
            let spec = ModelSpec::Mpnn(ctx.model(&a.model)?);
            let mut m = DatasetManifest::load(&a.input)?;
            require_splits(&mut m)?;
            let table = train_and_save(&spec, &m, &ctx.fit(&a.fit)?, a.fit.log.as_deref(), &a.out)?;
            write_output(None, &table)?;
        }
        Command::Baseline(a) => {
            let spec = ModelSpec::Mlp(ctx.mlp(&a.mlp)?);
            let mut m = DatasetManifest::load(&a.input)?;
            require_splits(&mut m)?;
            let table = train_and_save(&spec, &m, &ctx.fit(&a.fit)?, a.fit.log.as_deref(), &a.out)?;
            write_output(None, &table)?;
        }
        Command::Eval(a) => {
            let ckpt = Checkpoint::load(&a.ckpt)?;
            let mut m = DatasetManifest::load(&a.input)?;
            let split_name = parse_with(&a.split, Split::from_str)?;
            let stats = match ckpt.label_stats.or(m.label_stats) {
                Some(s) => s,
                None => {
                    return Err(usage(
                        "no label statistics: the checkpoint has none and the manifest has no train split".into(),
                    ))
                }
            };
            for s in &mut m.samples {
                s.label_norm = Some(stats.normalize(s.label));
            }
            let metrics = ckpt.model.evaluate(&m, split_name)?;
            if let Some(p) = &a.scatter {
                let samples = m.samples_in(split_name);
                let pred = ckpt.model.predict_samples(&samples)?;
                let mut text = String::from("# id label prediction residual\n");
                for (s, z) in samples.iter().zip(pred) {
                    let y = stats.denormalize(z);
                    writeln!(text, "{} {:.6e} {:.6e} {:.6e}", s.id, s.label, y, y - s.label).expect("string write");
                }
                fs::write(p, text)?;
            }
            write_output(
                None,
                &format!(
                    "{METRICS_HEADER}{}",
                    metrics_row(&ckpt.model.label(), split_name, &metrics)
                ),
            )?;
        }
        Command::Outliers(a) => {
            let m = DatasetManifest::load(&a.input)?;
            let kind: String = ctx.cfg.resolve(a.model_kind, "model_kind", "mpnn".into())?;
            let spec = match kind.as_str() {
                "mpnn" => ModelSpec::Mpnn(ctx.model(&a.model)?),
                "mlp" => ModelSpec::Mlp(ctx.mlp(&a.mlp)?),
                other => return Err(usage(format!("unknown model kind {other:?} (expected mpnn or mlp)"))),
            };
            let d = OutlierPolicy::default();
            let policy = OutlierPolicy {
                k: ctx.cfg.resolve(a.k, "k", d.k)?,
                mad_scale: ctx.cfg.resolve(a.mad_scale, "mad_scale", d.mad_scale)?,
                folds: ctx.cfg.resolve(a.folds, "folds", d.folds)?,
                seed: derive_seed(ctx.seed, "outliers"),
                ..d
            };
            let max_iters = ctx.cfg.resolve(a.max_iters, "max_iters", 3)?;
            let report = detect_outliers(&m, &spec, &ctx.fit(&a.fit)?, &policy, max_iters)?;
            let out = a.out.unwrap_or_else(|| a.input.with_extension("clean.jsonl"));
            report.clean.save(&out)?;
            for it in &report.iterations {
                eprintln!(
                    "iteration {}: {} samples, threshold {:.4} (median {:.4}, MAD {:.4}), flagged {}",
                    it.iteration, it.samples, it.threshold, it.median, it.mad, it.flagged
                );
            }
            let mut csv = String::from("id,iteration,residual\n");
            for o in &report.outliers {
                writeln!(csv, "{},{},{:.6e}", o.id, o.iteration, o.residual).expect("string write");
            }
            write_output(a.report.as_deref(), &csv)?;
        }
        Command::Exp1(a) => experiment(&ctx, a, SplitProtocol::Random)?,
        Command::Exp2(a) => experiment(&ctx, a, SplitProtocol::LeaveAlcoholOut)?,
    }
    Ok(())
}

fn experiment(ctx: &Context, a: ExperimentArgs, protocol: SplitProtocol) -> Result<()> {
    let manifest = match &a.input {
        Some(p) => DatasetManifest::load(p)?.all_train(),
        None => ctx.manifest(&a.data)?,
    };
    let template = ctx.model(&a.model)?;
    let mlp = ctx.mlp(&a.mlp)?;
    let methods = match protocol {
        SplitProtocol::Random => experiment1_methods(&template, &mlp),
        SplitProtocol::LeaveAlcoholOut => experiment2_methods(&template, &mlp),
    };
    let repeats = ctx.cfg.resolve(a.repeats, "repeats", 3)?;
    let fractions = match ctx.cfg.resolve_opt(a.fractions, "fractions")? {
        Some(s) => parse_with(&s, SplitFractions::from_str)?,
        None => SplitFractions::default(),
    };
    let config = ExperimentConfig {
        seeds: (0..repeats as u64).map(|i| ctx.seed + i).collect(),
        fractions,
        train: ctx.fit(&a.fit)?,
        methods,
    };
    let result = run_experiment(&manifest, protocol, &config)?;
    if let Some(p) = &a.runs {
        fs::write(p, result.runs_csv())?;
    }
    write_output(a.out.as_deref(), &result.to_csv())
}

/// Gnuplot-ready `center count` rows over `bins` equal-width bins.
pub fn histogram(values: &[f64], bins: usize) -> String {
    let bins = bins.max(1);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut text = String::from("# center count\n");
    if values.is_empty() {
        return text;
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    for (b, c) in counts.iter().enumerate() {
        writeln!(text, "{:.6e} {c}", lo + (b as f64 + 0.5) * width).expect("string write");
    }
    text
}

/// One-line, machine-parsable description of an error.
pub fn error_line(e: &Error) -> String {
    let message = e.to_string().replace('\n', " ");
    format!("error kind={} message={:?}", e.kind(), message)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing_and_precedence() {
        let c = ConfigFile::parse("# comment\nepochs = 20\nhidden-dim=8 # trailing\n\nlr=0.01").unwrap();
        assert_eq!(c.resolve(None, "epochs", 5usize).unwrap(), 20);
        assert_eq!(c.resolve(Some(7usize), "epochs", 5).unwrap(), 7);
        assert_eq!(c.resolve(None, "hidden_dim", 1usize).unwrap(), 8);
        assert_eq!(c.resolve(None, "steps", 3usize).unwrap(), 3);
        assert!(c.resolve::<usize>(None, "lr", 1).is_err());
        assert!(ConfigFile::parse("no equals sign").is_err());
    }

    #[test]
    fn histogram_counts_every_value() {
        let h = histogram(&[0.0, 0.1, 0.9, 1.0], 2);
        let rows: Vec<&str> = h.lines().skip(1).collect();
        assert_eq!(rows, ["2.500000e-1 2", "7.500000e-1 2"]);
        assert_eq!(histogram(&[3.0, 3.0], 4).lines().count(), 5);
    }

    #[test]
    fn error_lines_are_single_line() {
        let e = Error::Train(TrainError::InvalidConfig("a\nb".into()));
        let line = error_line(&e);
        assert!(!line.contains('\n'));
        assert!(line.starts_with("error kind=train message="));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
