mod args;
mod commands;
mod figures;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use cascade_qed::config::{ConfigFile, ResolvedConfig};
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Ctx;
use output::{RunManifest, Writer};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cascade_qed::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) if e.is_config() => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

const EXIT_PARTIAL: u8 = 3;

fn resolve(cli: &Cli) -> Result<ResolvedConfig> {
    let c = &cli.common;
    let mut file = match &c.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    for (section, key, value) in c.overrides() {
        file.set(section, key, &value)?;
    }
    for g in &c.grid {
        file.add_grid(g);
    }
    Ok(file.resolve()?)
}

/// Runs one labelled unit of work into its own directory and manifest.
fn execute(cli: &Cli, cfg: &ResolvedConfig, label: &str, cmd: &Command) -> Result<bool> {
    let start = Instant::now();
    let dir = cli.common.out_dir.join(label);
    let writer = Writer::new(&dir)?;
    let mut ctx = Ctx {
        cfg,
        out: &writer,
        notes: Vec::new(),
        seeds: Vec::new(),
        partial: false,
    };
    let result = commands::run(cmd, &mut ctx);
    let (notes, seeds, partial) = (ctx.notes, ctx.seeds, ctx.partial);
    let outputs = writer.finish()?;
    let status = match (&result, partial) {
        (Err(_), _) => "failed",
        (Ok(()), true) => "partial",
        (Ok(()), false) => "ok",
    };
    let manifest = RunManifest {
        command: std::env::args().collect(),
        subcommand: label.to_string(),
        preset: cfg.preset.clone(),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        seeds,
        jobs: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        status,
        notes,
        outputs,
    };
    let path = output::write_manifest(&dir, &manifest)?;
    result?;
    println!(
        "{} files -> {} ({status})",
        manifest.outputs.len(),
        path.display()
    );
    Ok(partial)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Command::Reproduce { figure, .. } = &cli.command {
        if figure == "list" {
            println!("{}", figures::FIGURES.join("\n"));
            return ExitCode::SUCCESS;
        }
    }
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = resolve(cli)?;
    if let Some(jobs) = cfg.run.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Reproduce { figure, quick } if figure == "all" => {
            let mut partial = false;
            for id in figures::FIGURES {
                let cmd = Command::Reproduce {
                    figure: id.to_string(),
                    quick: *quick,
                };
                partial |= execute(cli, &cfg, id, &cmd)?;
            }
            Ok(partial)
        }
        Command::Reproduce { figure, .. } => {
            if !figures::FIGURES.contains(&figure.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown figure `{figure}`; choose one of {}",
                    figures::FIGURES.join(", ")
                )));
            }
            execute(cli, &cfg, figure, &cli.command)
        }
        cmd => execute(cli, &cfg, cmd.name(), cmd),
    }
}
