use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sena_core::imgcore::io::{read_rgb, write_gray, write_rgb};
use sena_core::imgcore::normalize_minmax;
use sena_core::iqa::{fit_niqe_model, Evaluator, NssModel};
use sena_core::{sena_enhance_traced, ImagePlane, PipelineConfig};
use sena_cli::{
    bench_latency, collect_images, run_batch, workers_from_env, CliError, Method, Result, RunManifest,
};

#[derive(Parser)]
#[command(name = "sena", version, about = "Shadow and low-light enhancement with quality metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance one image.
    Enhance {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Sena)]
        method: Method,
        /// TOML file with `[sena]` and `[clahe]` sections.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write every intermediate plane to `<output stem>_intermediates/`.
        #[arg(long)]
        dump_intermediates: bool,
    },
    /// Enhance and score a directory tree.
    Batch(BatchArgs),
    /// Print the quality metrics of one image as JSON.
    Metrics {
        input: PathBuf,
        #[arg(long)]
        niqe_model: Option<PathBuf>,
    },
    /// Fit a NIQE model to the images below a directory.
    FitNiqeModel {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time the enhancement step on one image.
    Bench {
        image: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Sena)]
        method: Method,
        #[arg(short = 'n', long, default_value_t = 100)]
        iterations: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BatchArgs {
    /// Run description; when given, the flags below are not allowed.
    #[arg(long, conflicts_with_all = ["input", "output", "methods", "report", "config", "niqe_model"])]
    manifest: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sena,clahe")]
    methods: Vec<Method>,
    /// CSV path; the JSON report goes next to it.
    #[arg(long, required_unless_present = "manifest")]
    report: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    niqe_model: Option<PathBuf>,
    /// Worker threads; the SENA_WORKERS variable takes precedence.
    #[arg(long)]
    workers: Option<usize>,
    /// Leave the timing column empty.
    #[arg(long)]
    omit_timing: bool,
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let cfg = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn enhance(input: &Path, output: &Path, method: Method, config: Option<&Path>, dump: bool) -> Result<()> {
    let cfg = load_config(config)?;
    let img = read_rgb(input)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io { path: parent.into(), source: e })?;
    }
    if !dump {
        return Ok(write_rgb(output, &method.apply(&img, &cfg)?)?);
    }
    if method != Method::Sena {
        return Err(CliError::Usage("--dump-intermediates is only available for sena".into()));
    }
    let trace = sena_enhance_traced(&img, &cfg.sena)?;
    write_rgb(output, &trace.output)?;

    let stem = output.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let dir = output.with_file_name(format!("{stem}_intermediates"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io { path: dir.clone(), source: e })?;
    let (w, h) = img.dimensions();
    let mask = ImagePlane::new(w, h, trace.mask.bits().iter().map(|&b| b as u8 as f32).collect())?;
    let lum = &trace.intermediates.luminance;
    let unit: [(&str, &ImagePlane); 10] = [
        ("mask", &mask),
        ("value", &trace.value),
        ("y", &trace.ycbcr.y),
        ("cb", &trace.ycbcr.cb),
        ("cr", &trace.ycbcr.cr),
        ("lab_a", &trace.lab_a),
        ("m_c", &trace.invariants.m_c),
        ("laplacian", &trace.invariants.laplacian),
        ("laplacian_stretched", &trace.laplacian_stretched),
        ("y_out", &lum.y_out),
    ];
    for (name, plane) in unit {
        write_gray(dir.join(format!("{name}.png")), plane)?;
    }
    // Unbounded planes are rescaled for viewing.
    let mut unbounded: Vec<(String, &ImagePlane)> = vec![
        ("y_norm_inv".into(), &lum.y_norm_inv),
        ("i_y_map".into(), &lum.i_y_map),
        ("y_pre_norm".into(), &lum.y_pre_norm),
    ];
    for (prefix, c) in [("cr", &trace.intermediates.red), ("cb", &trace.intermediates.blue)] {
        for (suffix, plane) in [
            ("inv", &c.ch_inv),
            ("map", &c.ch_map),
            ("inv_map", &c.ch_inv_map),
            ("max_inv", &c.ch_max_inv),
            ("candidate", &c.candidate),
            ("adjusted", &c.adjusted),
            ("corrected", &c.corrected),
        ] {
            unbounded.push((format!("{prefix}_{suffix}"), plane));
        }
    }
    for (name, plane) in unbounded {
        write_gray(dir.join(format!("{name}.png")), &normalize_minmax(plane, 0.0, 1.0)?)?;
    }
    write_rgb(dir.join("preprocessed.png"), &trace.preprocessed)?;
    write_rgb(dir.join("linear_output.png"), &trace.linear_output)?;
    Ok(())
}

fn batch(args: BatchArgs) -> Result<ExitCode> {
    let mut manifest = match args.manifest {
        Some(path) => RunManifest::load(path)?,
        None => {
            let mut m = RunManifest::new(
                args.input.expect("required by clap"),
                args.output.expect("required by clap"),
                args.methods,
                args.report.expect("required by clap"),
            );
            m.config_path = args.config;
            m.niqe_model = args.niqe_model;
            m
        }
    };
    if let Some(n) = args.workers {
        manifest.worker_count = n;
    }
    if args.omit_timing {
        manifest.omit_timing = true;
    }
    if let Some(n) = workers_from_env()? {
        manifest.worker_count = n;
    }
    let report = run_batch(&manifest)?;
    let failures = report.failures();
    eprintln!(
        "{} rows, {failures} failed; report written to {}",
        report.rows.len(),
        manifest.report_path.display()
    );
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Enhance {
            input,
            output,
            method,
            config,
            dump_intermediates,
        } => enhance(&input, &output, method, config.as_deref(), dump_intermediates)?,
        Command::Batch(args) => return batch(args),
        Command::Metrics { input, niqe_model } => {
            let model = niqe_model.map(NssModel::load).transpose()?;
            let img = read_rgb(&input)?;
            let evaluator = Evaluator {
                niqe_model: model.as_ref(),
                brisque_scorer: None,
            };
            println!("{}", serde_json::to_string_pretty(&evaluator.evaluate(&img)?)?);
        }
        Command::FitNiqeModel { dir, output } => {
            let files = collect_images(&dir)?;
            if files.is_empty() {
                return Err(CliError::Usage(format!("no images found under {}", dir.display())));
            }
            let images = files.iter().map(|f| read_rgb(dir.join(f))).collect::<sena_core::Result<Vec<_>>>()?;
            fit_niqe_model(&images)?.save(&output)?;
            eprintln!("model fit on {} images written to {}", images.len(), output.display());
        }
        Command::Bench {
            image,
            method,
            iterations,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let img = read_rgb(&image)?;
            let stats = bench_latency(&img, method, iterations, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
