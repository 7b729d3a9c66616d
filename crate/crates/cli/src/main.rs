use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Command, ExperimentConfig, Settings};

#[derive(Parser, Debug)]
#[command(name = "kp", version, about = "KP solutions from scattering data")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compute g, u or tau on a grid at one time.
    Solve(SolveArgs),
    /// Quadrature convergence study against a high-resolution reference.
    Converge(ConvergeArgs),
    /// Pseudo-spectral time stepping from GLM-CC initial data.
    Evolve(EvolveArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Soliton parameters as "a,b;a,b;...".
    #[arg(long)]
    solitons: Option<String>,
    #[arg(long = "Lx")]
    lx: Option<f64>,
    #[arg(long = "Ly")]
    ly: Option<f64>,
    #[arg(long = "Nx")]
    nx: Option<usize>,
    #[arg(long = "Ny")]
    ny: Option<usize>,
    /// Quadrature resolution (even).
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Kernel x shift, moving the pattern to the right.
    #[arg(long, allow_negative_numbers = true)]
    xshift: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    yshift: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// glm-rr, glm-cc, det-cc or analytic.
    #[arg(long)]
    method: Option<String>,
    /// g, u or tau.
    #[arg(long)]
    quantity: Option<String>,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated methods.
    #[arg(long)]
    methods: Option<String>,
    /// Smallest study exponent, M = 2^m.
    #[arg(long)]
    m_min: Option<u32>,
    #[arg(long)]
    m_max: Option<u32>,
    /// Reference exponent.
    #[arg(long)]
    reference: Option<u32>,
    /// native (g, or tau for det-cc) or u.
    #[arg(long)]
    compare: Option<String>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    /// Time span to integrate over.
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    no_window: bool,
    #[arg(long)]
    window_order: Option<f64>,
    #[arg(long)]
    window_strength: Option<f64>,
    #[arg(long)]
    window_every: Option<usize>,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            solitons: self.solitons.clone(),
            lx: self.lx,
            ly: self.ly,
            nx: self.nx,
            ny: self.ny,
            m: self.m,
            t: self.t,
            xshift: self.xshift,
            yshift: self.yshift,
            out: self.out.clone(),
            ..Settings::default()
        }
    }
}

fn settings(cli: &Cli) -> (Command, &Common, Settings) {
    match &cli.command {
        Cmd::Solve(a) => (
            Command::Solve,
            &a.common,
            Settings {
                method: a.method.clone(),
                quantity: a.quantity.clone(),
                ..a.common.settings()
            },
        ),
        Cmd::Converge(a) => (
            Command::Converge,
            &a.common,
            Settings {
                methods: a.methods.clone(),
                m_min: a.m_min,
                m_max: a.m_max,
                reference: a.reference,
                compare: a.compare.clone(),
                ..a.common.settings()
            },
        ),
        Cmd::Evolve(a) => (
            Command::Evolve,
            &a.common,
            Settings {
                t_final: a.t_final,
                steps: a.steps,
                window: a.no_window.then_some(false),
                window_order: a.window_order,
                window_strength: a.window_strength,
                window_every: a.window_every,
                ..a.common.settings()
            },
        ),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("KP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("KP_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("kp: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = configure_threads() {
        return usage_error(&msg);
    }

    let (command, common, flags) = settings(&cli);
    let base = match &common.config {
        Some(path) => match Settings::from_file(path) {
            Ok(s) => s,
            Err(msg) => return usage_error(&msg),
        },
        None => Settings::default(),
    };
    let config = match ExperimentConfig::resolve(base.overlay(flags), command) {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };

    let result = match command {
        Command::Solve => commands::solve(&config),
        Command::Converge => commands::converge(&config),
        Command::Evolve => commands::evolve(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kp: {e}");
            ExitCode::from(2)
        }
    }
}
