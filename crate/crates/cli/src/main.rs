use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dicke_cli::config::{EdSettings, Fixed, Format, PartitionSettings};
use dicke_cli::output::{emit_output, emit_to, render};
use dicke_cli::run::{evaluate_point, max_ed_dim_from_env, run_sweep, RunOptions};
use dicke_cli::{parse_beta, parse_config, Exit, Task};

#[derive(Parser)]
#[command(name = "dicke", version, about = "Full Dicke model: phase structure, spectra and exact-diagonalization checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical inverse temperature and symmetry class
    Critical(PointArgs),
    /// Gap-equation solution: phase, Omega_Delta, |b0|^2
    Gap(PointArgs),
    /// Collective excitation energies (closed form and kernel roots)
    Spectrum(PointArgs),
    /// Free energy per atom and the superradiant shift phi
    FreeEnergy(PointArgs),
    /// Asymptotic ln(Z/Z0) and its pieces
    Partition {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1000)]
        n_atoms: u64,
        /// Number of Matsubara frequencies summed explicitly
        #[arg(long, default_value_t = 2048)]
        cutoff: usize,
    },
    /// Finite-N exact diagonalization next to the mean-field values
    EdCompare {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 8)]
        n_atoms: usize,
        /// Boson Fock cutoff (default from the mean-field condensate)
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, default_value_t = 2)]
        k_gaps: usize,
    },
    /// Run a parameter sweep described by a JSON config
    Sweep {
        config: PathBuf,
        /// Worker threads (overrides the config)
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    #[arg(long = "Omega", default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0.0)]
    g1: f64,
    #[arg(long, default_value_t = 0.0)]
    g2: f64,
    /// Inverse temperature; `inf` for zero temperature
    #[arg(long, default_value = "inf", value_parser = parse_beta)]
    beta: f64,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("expected csv or json, got {s:?}")),
    }
}

impl PointArgs {
    fn fixed(&self) -> Fixed {
        Fixed { omega0: self.omega0, omega: self.omega, g1: self.g1, g2: self.g2, beta: self.beta }
    }
}

fn point(task: Task, args: &PointArgs, ed: EdSettings, partition: PartitionSettings) -> Exit {
    let fixed = args.fixed();
    if let Err(e) = fixed.params().and_then(|_| fixed.inverse_temperature()) {
        eprintln!("error: {e}");
        return Exit::Config;
    }
    let max_dim = match max_ed_dim_from_env() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Config;
        }
    };
    let table = evaluate_point(task, &fixed, ed, partition, max_dim);
    let errors = table.error_count();
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(&render(&table, args.format)).and_then(|_| stdout.flush()) {
        eprintln!("error: {e}");
        return Exit::Io;
    }
    if errors > 0 {
        Exit::RowErrors
    } else {
        Exit::Success
    }
}

fn sweep(config: PathBuf, workers: Option<usize>, out: Option<PathBuf>) -> Exit {
    let text = match std::fs::read(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return Exit::Config;
        }
    };
    let mut spec = match parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return Exit::Config;
        }
    };
    if workers == Some(0) {
        eprintln!("error: --workers must be >= 1");
        return Exit::Config;
    }
    if workers.is_some() {
        spec.workers = workers;
    }
    let opts = match RunOptions::from_env(&spec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Config;
        }
    };
    let table = run_sweep(&spec, &opts);
    let written = match &out {
        Some(dir) => emit_to(&table, dir, spec.output.format),
        None => emit_output(&table, &spec),
    };
    match written {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Io;
        }
    }
    let errors = table.error_count();
    if errors > 0 {
        eprintln!("{errors} row(s) failed; see the error column");
    }
    Exit::for_table(&table)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Config } else { Exit::Success };
            let _ = e.print();
            return code.into();
        }
    };
    let ed = EdSettings::default();
    let partition = PartitionSettings::default();
    let exit = match cli.command {
        Command::Critical(a) => point(Task::Critical, &a, ed, partition),
        Command::Gap(a) => point(Task::Gap, &a, ed, partition),
        Command::Spectrum(a) => point(Task::Spectrum, &a, ed, partition),
        Command::FreeEnergy(a) => point(Task::FreeEnergy, &a, ed, partition),
        Command::Partition { point: a, n_atoms, cutoff } => {
            point(Task::Partition, &a, ed, PartitionSettings { n_atoms, cutoff })
        }
        Command::EdCompare { point: a, n_atoms, n_max, k_gaps } => {
            point(Task::EdCompare, &a, EdSettings { n_atoms, n_max, k_gaps, ..ed }, partition)
        }
        Command::Sweep { config, workers, out } => sweep(config, workers, out),
    };
    exit.into()
}
