//! Batch command-line front end. `dispatch` returns the process exit code:
//! 0 on success, 1 on usage errors, 2 on data errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classifier::{cross_validate, cv_table, train_mlp, write_roc_csv, STANDARD_SUBSETS};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::features::{parse_subset, read_manifest, FeatureMatrix, FEATURE_NAMES};
use crate::infotheory::mi_report;
use crate::mixed_phase::{ccd_decompose, detect_gci, write_cycles_csv};
use crate::pipeline::{build_feature_matrix, spectrogram};
use crate::signal::{estimate_f0, load_wav};
use crate::spectra::{write_csv, write_pgm, write_png, ExportFormat, SpectrogramKind};
use crate::synth::make_corpus;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "phasevoice", version, about = "Phase-aware speech analysis and voice pathology detection")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// TOML pipeline configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for file-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Reject input that is not sampled at 16 kHz instead of resampling.
    #[arg(long, global = true)]
    strict_rate: bool,
    #[arg(long, global = true)]
    modgd_alpha: Option<f64>,
    #[arg(long, global = true)]
    modgd_gamma: Option<f64>,
    #[arg(long, global = true)]
    modgd_lifter: Option<usize>,
    #[arg(long, global = true)]
    cgd_rho: Option<f64>,
    /// CCD window length in pitch periods.
    #[arg(long, global = true)]
    ccd_window: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one spectrogram of a WAV file.
    Spectrogram {
        wav: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: SpectrogramKind,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        out: ExportFormat,
        /// Output path (default: next to the input, `<stem>.<kind>.<ext>`).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Detect glottal closure instants.
    Gci {
        wav: PathBuf,
        /// GCI CSV path (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the decomposed glottal cycles here.
        #[arg(long)]
        cycles: Option<PathBuf>,
    },
    /// Build the feature matrix of a manifest.
    Features {
        manifest: PathBuf,
        #[arg(long, default_value = "features.csv")]
        out: PathBuf,
        /// Skip recordings without usable glottal cycles instead of failing.
        #[arg(long)]
        allow_partial: bool,
    },
    /// Normalised mutual information of every feature.
    Mi {
        features: PathBuf,
        /// Also evaluate every feature pair jointly.
        #[arg(long)]
        pairs: bool,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        n_bins: Option<usize>,
    },
    /// Train an MLP on the whole feature file.
    Train {
        features: PathBuf,
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        #[arg(long)]
        class_weighting: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Patient-disjoint k-fold cross-validation.
    Evaluate {
        features: PathBuf,
        /// Comma-separated feature names, `all`, or `standard` for the nine
        /// reference subsets.
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = "cv_report.json")]
        report: PathBuf,
        #[arg(long, default_value = "roc.csv")]
        roc: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        class_weighting: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic corpus with ground truth.
    Synth {
        #[arg(long)]
        normo: usize,
        #[arg(long)]
        patho: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
    },
}

fn parse_kind(s: &str) -> std::result::Result<SpectrogramKind, String> {
    SpectrogramKind::parse(s).ok_or_else(|| format!("unknown kind {s:?} (fm, smooth, modgd, ppgd, cgd)"))
}

fn parse_format(s: &str) -> std::result::Result<ExportFormat, String> {
    ExportFormat::parse(s).ok_or_else(|| format!("unknown format {s:?} (csv, png, pgm)"))
}

/// Runs the command line `argv` (program name first).
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn effective_config(g: &GlobalOpts) -> Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| match e {
            Error::NotFound(p) => Error::InvalidConfig(format!("config file not found: {}", p.display())),
            other => other,
        })?,
        None => PipelineConfig::default(),
    };
    cfg.strict_rate |= g.strict_rate;
    if let Some(v) = g.modgd_alpha {
        cfg.modgd.alpha = v;
    }
    if let Some(v) = g.modgd_gamma {
        cfg.modgd.gamma = v;
    }
    if let Some(v) = g.modgd_lifter {
        cfg.modgd.lifter_len = v;
    }
    if let Some(v) = g.cgd_rho {
        cfg.cgd.rho = v;
    }
    if let Some(v) = g.ccd_window {
        cfg.ccd.window_periods = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn subset_arg(s: &str) -> Result<Vec<usize>> {
    parse_subset(s).map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = effective_config(&cli.global)?;
    match cli.command {
        Command::Spectrogram { wav, kind, out, output } => {
            let signal = load_wav(&wav, cfg.rate_policy())?;
            let spec = spectrogram(&signal, kind, &cfg)?;
            let path = output.unwrap_or_else(|| {
                let stem = wav.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                wav.with_file_name(format!("{stem}.{}.{}", kind.name().to_lowercase(), out.extension()))
            });
            let prov = format!("{} source={}", cfg.provenance(), wav.display());
            match out {
                ExportFormat::Csv => write_csv(&path, &spec, &prov)?,
                ExportFormat::Pgm => write_pgm(&path, &spec, &prov)?,
                ExportFormat::Png => write_png(&path, &spec, &prov)?,
            }
            println!("{} {}x{} -> {}", kind, spec.n_frames(), spec.n_bins(), path.display());
        }
        Command::Gci { wav, output, cycles } => {
            let signal = load_wav(&wav, cfg.rate_policy())?;
            let grid = cfg.grid();
            let pitch = estimate_f0(&signal, grid);
            let gci = detect_gci(&signal, &pitch, grid)?;
            let prov = format!("{} source={}", cfg.provenance(), wav.display());
            match &output {
                Some(p) => gci.write_csv(p, &prov)?,
                None => {
                    println!("# {prov}\ngci_sample");
                    for g in &gci.instants {
                        println!("{g}");
                    }
                }
            }
            if let Some(p) = cycles {
                let out = ccd_decompose(&signal, &gci, &pitch, grid, &cfg.ccd)?;
                write_cycles_csv(&p, &out.cycles, &prov)?;
            }
        }
        Command::Features { manifest, out, allow_partial } => {
            let entries = read_manifest(&manifest)?;
            if entries.is_empty() {
                return Err(Error::Empty);
            }
            let (m, reports) = build_feature_matrix(&entries, &cfg, allow_partial, cli.global.jobs)?;
            m.write_csv(&out, &cfg.provenance())?;
            let skipped: Vec<_> = reports.iter().filter(|r| r.skipped.is_some()).collect();
            for r in &skipped {
                eprintln!("skipped {}: {}", r.patient_id, r.skipped.as_deref().unwrap_or(""));
            }
            let dropped: usize = reports.iter().filter_map(|r| r.stats).map(|s| s.rows_dropped).sum();
            println!(
                "{} rows from {} recordings ({} skipped, {} rows dropped) -> {}",
                m.len(),
                reports.len() - skipped.len(),
                skipped.len(),
                dropped,
                out.display()
            );
        }
        Command::Mi { features, pairs, json, n_bins } => {
            if let Some(n) = n_bins {
                cfg.n_bins = n;
                cfg.validate()?;
            }
            let (m, _) = FeatureMatrix::read_csv(&features)?;
            let report = mi_report(&m, cfg.n_bins, pairs, &cfg.provenance())?;
            if let Some(p) = json {
                write_text(&p, &report.to_json())?;
            }
            print!("{}", report.to_table());
        }
        Command::Train { features, subset, model, class_weighting, seed } => {
            cfg.train.class_weighting |= class_weighting;
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            let cols = subset_arg(&subset)?;
            let (m, _) = FeatureMatrix::read_csv(&features)?;
            m.validate()?;
            let names: Vec<String> = cols.iter().map(|&i| FEATURE_NAMES[i].to_string()).collect();
            let mut trained = train_mlp(&m.select(&cols), &m.labels, &names, &cfg.train)?;
            trained.config_hash = cfg.hash();
            write_text(&model, &trained.to_json())?;
            println!("model on {} -> {}", names.join(","), model.display());
        }
        Command::Evaluate { features, subset, k, report, roc, threshold, class_weighting, seed } => {
            cfg.train.class_weighting |= class_weighting;
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            if let Some(k) = k {
                cfg.folds = k;
            }
            if let Some(t) = threshold {
                cfg.frame_threshold = t;
            }
            cfg.validate()?;
            let subsets: Vec<Vec<usize>> = if subset.trim().eq_ignore_ascii_case("standard") {
                STANDARD_SUBSETS.iter().map(|s| subset_arg(s)).collect::<Result<_>>()?
            } else {
                vec![subset_arg(&subset)?]
            };
            let (m, _) = FeatureMatrix::read_csv(&features)?;
            let prov = cfg.provenance();
            let mut reports = Vec::new();
            let mut first_roc = None;
            for cols in &subsets {
                let out = cross_validate(&m, cfg.folds, &cfg.train, cols, cfg.frame_threshold, &prov)?;
                first_roc.get_or_insert(out.roc);
                reports.push(out.report);
            }
            let json = if reports.len() == 1 {
                reports[0].to_json()
            } else {
                serde_json::to_string_pretty(&reports).expect("reports serialise")
            };
            write_text(&report, &json)?;
            if let Some(points) = first_roc {
                write_roc_csv(&roc, &points, &prov)?;
            }
            print!("{}", cv_table(&reports));
        }
        Command::Synth { normo, patho, seed, out, duration } => {
            let corpus = make_corpus(normo, patho, seed, duration, &out, &cfg.provenance())?;
            println!("{} recordings -> {}", corpus.entries.len(), corpus.manifest_path.display());
        }
    }
    Ok(())
}
