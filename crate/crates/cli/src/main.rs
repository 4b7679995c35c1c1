use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use motivscore::data::{
    class_counts, derive_strategy_labels, load_csv, summary_statistics, synthesize_dataset,
    write_csv, write_csv_to, Validation,
};
use motivscore::experiment::{
    emit_report, flag_at_risk, flag_predictions, importance_csv, load_data, render_csv_tables,
    render_json, run_experiment, run_importance, ExperimentConfig, ExperimentReport, OutputFormat,
    TaskKind, SEED_ENV,
};
use motivscore::{Error, ErrorKind, Result};

#[derive(Parser)]
#[command(
    name = "motivscore",
    version,
    about = "Student grade and study-strategy prediction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-column mean, sd, min and max of a student CSV.
    Stats {
        csv: PathBuf,
        /// Enforce the published per-column score envelopes.
        #[arg(long)]
        strict: bool,
    },
    /// Write a synthetic student table.
    Synth {
        #[arg(long, default_value_t = 924)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive Deep/Surface labels and print class counts.
    Labels {
        csv: PathBuf,
        #[arg(long)]
        strict: bool,
        /// Also write `row,label` pairs here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the regression or classification experiment.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
        /// Models to train, e.g. RF,DT,KNN.
        #[arg(long)]
        models: Option<String>,
        #[arg(long, value_name = "paper-faithful|leakage-safe|none")]
        balance: Option<String>,
        /// Output directory; JSON goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Random-forest feature importance for a task.
    Importance {
        #[command(flatten)]
        run: RunArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Re-flag at-risk students from a regression report.
    AtRisk {
        #[arg(long)]
        model_report: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        threshold: f64,
        /// Apply the stored model to this CSV instead of the report's test rows.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    task: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Student CSV; a synthetic table is used when no data source is configured.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self, extra: Vec<(String, String)>) -> Result<ExperimentConfig> {
        let task = self
            .task
            .as_deref()
            .map(str::parse::<TaskKind>)
            .transpose()?;
        let text = match &self.config {
            Some(p) => Some(fs::read_to_string(p)?),
            None => None,
        };
        let mut pairs = Vec::new();
        if let Some(d) = &self.data {
            pairs.push(("data".to_string(), d.display().to_string()));
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        pairs.extend(extra);
        if let Some(seed) = self.seed {
            pairs.push(("seed".to_string(), seed.to_string()));
        }
        let env_seed = std::env::var(SEED_ENV).ok();
        ExperimentConfig::build(task, text.as_deref(), &pairs, env_seed.as_deref())
    }
}

fn validation(strict: bool) -> Validation {
    if strict {
        Validation::Strict
    } else {
        Validation::Relaxed
    }
}

fn write_out(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body)?,
        None => io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { csv, strict } => {
            let d = load_csv(&csv, validation(strict))?;
            let stats = summary_statistics(&d)?;
            println!(
                "{:<18} {:>8} {:>8} {:>8} {:>8}",
                "feature", "mean", "sd", "min", "max"
            );
            for s in stats {
                println!(
                    "{:<18} {:>8.3} {:>8.3} {:>8.2} {:>8.2}",
                    s.feature, s.mean, s.sd, s.min, s.max
                );
            }
            println!("n = {}", d.len());
        }
        Command::Synth { n, seed, out } => {
            if n < 10 {
                return Err(Error::Config("--n must be at least 10".into()));
            }
            let seed = match seed {
                Some(s) => s,
                None => std::env::var(SEED_ENV)
                    .ok()
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("invalid {SEED_ENV}")))
                    })
                    .transpose()?
                    .unwrap_or(motivscore::experiment::DEFAULT_SEED),
            };
            let d = synthesize_dataset(n, seed);
            match out {
                Some(p) => write_csv(&d, p)?,
                None => write_csv_to(&d, io::stdout().lock())?,
            }
        }
        Command::Labels { csv, strict, out } => {
            let d = derive_strategy_labels(&load_csv(&csv, validation(strict))?);
            let c = class_counts(&d)?;
            println!("{}", serde_json::to_string(&c)?);
            if let Some(p) = out {
                let mut body = String::from("row,label\n");
                for (i, l) in d.labels()?.iter().enumerate() {
                    body.push_str(&format!("{i},{l}\n"));
                }
                fs::write(p, body)?;
            }
        }
        Command::Experiment {
            run,
            models,
            balance,
            out,
            format,
        } => {
            let format: OutputFormat = format.parse()?;
            let mut extra = Vec::new();
            if let Some(m) = models {
                extra.push(("models".to_string(), m));
            }
            if let Some(b) = balance {
                extra.push(("balancing".to_string(), b));
            }
            let cfg = run.config(extra)?;
            let data = load_data(&cfg)?;
            let report = run_experiment(&cfg, &data)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match out {
                Some(dir) => {
                    for p in emit_report(&report, format, &dir)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => match format {
                    OutputFormat::Json => write_out(None, &render_json(&report)?)?,
                    OutputFormat::Csv => {
                        for (_, body) in render_csv_tables(&report) {
                            write_out(None, &body)?;
                        }
                    }
                },
            }
        }
        Command::Importance { run, out, format } => {
            let format: OutputFormat = format.parse()?;
            let cfg = run.config(Vec::new())?;
            let data = load_data(&cfg)?;
            let r = run_importance(&cfg, &data)?;
            let body = match format {
                OutputFormat::Json => render_json(&r)?,
                OutputFormat::Csv => importance_csv(&r.importance),
            };
            write_out(out.as_deref(), &body)?;
        }
        Command::AtRisk {
            model_report,
            threshold,
            data,
            out,
        } => {
            if !(1.0..=7.0).contains(&threshold) {
                return Err(Error::Config("--threshold must lie in [1, 7]".into()));
            }
            let text = fs::read_to_string(&model_report)?;
            let report: ExperimentReport = serde_json::from_str(&text)?;
            let section = report.at_risk.as_ref().ok_or_else(|| {
                Error::Config("report has no at-risk section (regression reports only)".into())
            })?;
            let flags = match data {
                Some(csv) => {
                    let d = load_csv(&csv, Validation::Relaxed)?;
                    let x = d.design_matrix(&report.config.features.features());
                    flag_at_risk(&section.trained_model, &x, threshold)?
                }
                None => flag_predictions(&section.test_predictions, threshold)
                    .into_iter()
                    .map(|mut f| {
                        f.index = section.test_indices[f.index];
                        f
                    })
                    .collect(),
            };
            write_out(out.as_deref(), &render_json(&flags)?)?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Data => 1,
        ErrorKind::Config => 2,
        ErrorKind::Io => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
