use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Single-excitation simulations of a ring cavity coupled to a topological atom mirror.
#[derive(Debug, Parser)]
#[command(name = "cascade-qed", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Rates accept unit suffixes
/// (`8Gamma`, `20g0`, `0.7g`) and angles a `pi` suffix (`0.3pi`, `3pi/2`).
#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML file with [system], [disorder] and [run] tables
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// fig2, fig3-weak or fig3-strong
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Disorder seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Sweep grid `axis=start:stop:count`, repeatable
    #[arg(long, global = true)]
    pub grid: Vec<String>,
    /// Detuning grid `start:stop:count`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long, global = true)]
    pub t_end: Option<String>,
    #[arg(long, global = true)]
    pub points: Option<String>,
    /// R, T or S
    #[arg(long, global = true)]
    pub observable: Option<String>,

    #[arg(long, global = true)]
    pub g: Option<String>,
    #[arg(long, global = true)]
    pub kappa: Option<String>,
    #[arg(long, global = true)]
    pub gamma0: Option<String>,
    #[arg(long = "Gamma", global = true)]
    pub gamma_wg: Option<String>,
    #[arg(long = "J0", global = true)]
    pub j0: Option<String>,
    #[arg(long, global = true)]
    pub phi_dim: Option<String>,
    #[arg(long, global = true)]
    pub n_atoms: Option<String>,
    #[arg(long, global = true)]
    pub varphi: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi1: Option<String>,
    /// Comma-separated per-atom detunings
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub detunings: Option<String>,

    #[arg(long, global = true)]
    pub position_frac: Option<String>,
    #[arg(long, global = true)]
    pub coupling_frac: Option<String>,
    #[arg(long, global = true)]
    pub frequency_halfwidth: Option<String>,
    #[arg(long, global = true)]
    pub realizations: Option<String>,
    /// Allow several disorder types at once
    #[arg(long, global = true)]
    pub combined: bool,
}

impl Common {
    /// `(section, key, value)` overrides in config-file terms.
    pub fn overrides(&self) -> Vec<(&'static str, &'static str, String)> {
        let fields: [(&str, &str, &Option<String>); 19] = [
            ("run", "preset", &self.preset),
            ("run", "delta", &self.delta),
            ("run", "t_end", &self.t_end),
            ("run", "points", &self.points),
            ("run", "observable", &self.observable),
            ("system", "g", &self.g),
            ("system", "kappa", &self.kappa),
            ("system", "gamma0", &self.gamma0),
            ("system", "Gamma", &self.gamma_wg),
            ("system", "J0", &self.j0),
            ("system", "phi_dim", &self.phi_dim),
            ("system", "n_atoms", &self.n_atoms),
            ("system", "varphi", &self.varphi),
            ("system", "phi1", &self.phi1),
            ("system", "detunings", &self.detunings),
            ("disorder", "position_frac", &self.position_frac),
            ("disorder", "coupling_frac", &self.coupling_frac),
            ("disorder", "frequency_halfwidth", &self.frequency_halfwidth),
            ("disorder", "n_realizations", &self.realizations),
        ];
        let mut out: Vec<_> = fields
            .into_iter()
            .filter_map(|(s, k, v)| v.clone().map(|v| (s, k, v)))
            .collect();
        if let Some(seed) = self.seed {
            out.push(("disorder", "seed", seed.to_string()));
        }
        if let Some(jobs) = self.jobs {
            out.push(("run", "jobs", jobs.to_string()));
        }
        if self.combined {
            out.push(("disorder", "combined", "true".into()));
        }
        out
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, weights and classes of the effective Hamiltonian
    Eigen {
        /// Bare mirror instead of the full network
        #[arg(long)]
        mirror: bool,
    },
    /// Mirror bands versus spacing (`--grid d=..`); edge decay with `--grid J0=..`
    Bands,
    /// Amplitudes after exciting the emitter
    Dynamics,
    /// Emitter lifetime, or its enhancement along `varphi`, `J0` and/or `N` grids
    Lifetime,
    /// Reflection and transmission spectra
    Scatter {
        #[arg(long)]
        mirror: bool,
    },
    /// Emitter emission spectrum
    Emission,
    /// Dissipation channels and polariton channel rates
    Dissipation,
    /// Disorder ensembles along a `J0` or `d` grid
    Disorder,
    /// Observable heatmap along a `phi_dim` or `J0` grid
    Sweep,
    /// Regenerate the data behind a figure panel (`list` shows the ids)
    Reproduce {
        figure: String,
        /// Coarser grids and fewer realizations
        #[arg(long)]
        quick: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eigen { .. } => "eigen",
            Command::Bands => "bands",
            Command::Dynamics => "dynamics",
            Command::Lifetime => "lifetime",
            Command::Scatter { .. } => "scatter",
            Command::Emission => "emission",
            Command::Dissipation => "dissipation",
            Command::Disorder => "disorder",
            Command::Sweep => "sweep",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}
