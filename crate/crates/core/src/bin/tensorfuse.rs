use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tensorfuse::formats::{load_checkpoint, load_tensor, save_checkpoint, save_factors};
use tensorfuse::harness::{evaluate_model, generate_synthetic, load_dataset, save_dataset, SyntheticConfig};
use tensorfuse::pipeline::{bench_forward, train, write_metrics_csv, TrainConfig};
use tensorfuse::tucker::{hooi, hosvd, reconstruction_error, DEFAULT_HOOI_MAX_SWEEPS, DEFAULT_HOOI_TOL};
use tensorfuse::{LossWeights, Result};

#[derive(Parser)]
#[command(name = "tensorfuse", version, about = "Sparse Tucker-factored identity/attribute fusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Hosvd,
    Hooi,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic dataset.
    GenData {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        input_dim: usize,
        #[arg(long)]
        attrs: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short)]
        o: PathBuf,
    },
    /// Train on the gallery part of a dataset.
    #[command(allow_negative_numbers = true)]
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_ranks, default_value = "12,12,8")]
        ranks: [usize; 3],
        #[arg(long, default_value_t = 24)]
        identity_dim: usize,
        #[arg(long, default_value_t = 12)]
        attr_dim: usize,
        #[arg(long)]
        lambda1: Option<f64>,
        #[arg(long)]
        lambda2: Option<f64>,
        #[arg(long)]
        lambda3: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_ssl: bool,
        #[arg(long)]
        no_td: bool,
        #[arg(short)]
        o: PathBuf,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Tucker-decompose a tensor file.
    Decompose {
        #[arg(long)]
        tensor_in: PathBuf,
        #[arg(long, value_parser = parse_ranks)]
        ranks: [usize; 3],
        #[arg(long, value_enum, default_value = "hooi")]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_HOOI_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_HOOI_MAX_SWEEPS)]
        max_sweeps: usize,
        #[arg(short)]
        o: PathBuf,
    },
    /// Retrieval evaluation on the query/gallery split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        report_dir: PathBuf,
    },
    /// Sparsity and compaction speedup report as CSV on stdout.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        inputs: usize,
        #[arg(long, default_value_t = 21)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_ranks(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected three comma-separated ranks, got {s:?}"));
    };
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad rank {v:?}: {e}"));
    Ok([parse(a)?, parse(b)?, parse(c)?])
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData {
            classes,
            input_dim,
            attrs,
            per_class,
            noise,
            seed,
            o,
        } => {
            let ds = generate_synthetic(&SyntheticConfig {
                classes,
                input_dim,
                attributes: attrs,
                per_class,
                noise_sigma: noise,
                seed,
            })?;
            save_dataset(&ds, &o)?;
            eprintln!("wrote {} samples to {}", ds.len(), o.display());
        }
        Command::Train {
            data,
            ranks,
            identity_dim,
            attr_dim,
            lambda1,
            lambda2,
            lambda3,
            margin,
            lr,
            batch,
            epochs,
            seed,
            no_ssl,
            no_td,
            o,
            metrics,
        } => {
            let ds = load_dataset(&data)?.gallery()?;
            let base = TrainConfig::default();
            let w = base.weights;
            let mut cfg = TrainConfig {
                ranks,
                identity_dim,
                attribute_dim: attr_dim,
                weights: LossWeights {
                    lambda1: lambda1.unwrap_or(w.lambda1),
                    lambda2: lambda2.unwrap_or(w.lambda2),
                    lambda3: lambda3.unwrap_or(w.lambda3),
                    margin: margin.unwrap_or(w.margin),
                },
                batch_size: batch.unwrap_or(base.batch_size),
                epochs: epochs.unwrap_or(base.epochs),
                seed,
                use_td: !no_td,
                use_ssl: !no_ssl,
                ..base
            };
            if let Some(lr) = lr {
                cfg.adam.learning_rate = lr;
            }
            let out = train(&ds, &cfg)?;
            save_checkpoint(&out.model, &o)?;
            if let Some(path) = metrics {
                write_metrics_csv(&out.history, path)?;
            }
            if let Some(last) = out.history.last() {
                eprintln!(
                    "epoch {} loss {:.6} train rank-1 {:.4} zero slices {:.1}/{:.1}/{:.1}%",
                    last.epoch, last.loss.total, last.train_rank1, last.zero_pct[0], last.zero_pct[1], last.zero_pct[2]
                );
            }
            if out.imposter_only_batches > 0 {
                eprintln!("warning: {} batches had no genuine pairs", out.imposter_only_batches);
            }
        }
        Command::Decompose {
            tensor_in,
            ranks,
            method,
            tol,
            max_sweeps,
            o,
        } => {
            let w = load_tensor(&tensor_in)?;
            let factors = match method {
                Method::Hosvd => hosvd(&w, ranks)?,
                Method::Hooi => {
                    let r = hooi(&w, ranks, max_sweeps, tol)?;
                    eprintln!("HOOI: {} sweeps", r.sweeps);
                    r.factors
                }
            };
            let err = reconstruction_error(&w, &factors)?;
            let rel = if w.frobenius_norm() > 0.0 { err / w.frobenius_norm() } else { err };
            eprintln!("relative reconstruction error {rel:.3e}");
            save_factors(&factors, &o)?;
        }
        Command::Eval { model, data, report_dir } => {
            let model = load_checkpoint(&model)?;
            let ds = load_dataset(&data)?;
            let report = evaluate_model(&model, &ds)?;
            report.write_dir(&report_dir)?;
            println!("rank-1 {:.4} mAP {:.4}", report.rank1(), report.map);
        }
        Command::Bench {
            model,
            inputs,
            repeats,
            seed,
        } => {
            let model = load_checkpoint(&model)?;
            print!("{}", bench_forward(&model, inputs, repeats, seed)?.to_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

