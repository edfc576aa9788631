use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ring_photon::config::{parse_angle, parse_grid, parse_p_list, ExperimentConfig, PartialConfig};
use ring_photon::dataset::Format;
use ring_photon::experiment::run_and_check;

/// Collective photon emission from atomic states on a ring lattice.
///
/// Lengths are in laser wavelengths, rates in single-atom decay rates.
#[derive(Parser, Debug)]
#[command(name = "ring-photon", version)]
struct Cli {
    /// intensity | intensity-perp | pair-intensity | g2-map | overlaps | modes | oracle-check
    command: Option<String>,

    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of atoms on the ring (1 to 200)
    #[arg(long)]
    n_sites: Option<usize>,

    /// Lattice spacing in λ_L.
    #[arg(long)]
    spacing: Option<f64>,

    /// Laser polar angle, e.g. 0.78 or pi/4.
    #[arg(long, allow_hyphen_values = true)]
    theta_l: Option<String>,

    /// Laser azimuth
    #[arg(long, allow_hyphen_values = true)]
    phi_l: Option<String>,

    /// Pair-state index, or a list such as 1,5,10 for overlaps.
    #[arg(long)]
    p: Option<String>,

    /// Angular grid, e.g. 64x64 or 64.
    #[arg(long)]
    grid: Option<String>,

    /// Reference direction for g2-map (default: pair-intensity maximum).
    #[arg(long, allow_hyphen_values = true)]
    ref_theta: Option<String>,

    /// Reference azimuth, given together with --ref-theta
    #[arg(long, allow_hyphen_values = true)]
    ref_phi: Option<String>,

    /// csv or json
    #[arg(long)]
    format: Option<String>,

    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Reference dataset to compare the result against.
    #[arg(long)]
    check_against: Option<PathBuf>,

    /// Relative L2 tolerance for --check-against.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl Cli {
    fn flags(&self) -> ring_photon::Result<PartialConfig> {
        let angle = |s: &Option<String>| s.as_deref().map(parse_angle).transpose();
        Ok(PartialConfig {
            command: self.command.as_deref().map(str::parse).transpose()?,
            n_sites: self.n_sites,
            spacing: self.spacing,
            theta_l: angle(&self.theta_l)?,
            phi_l: angle(&self.phi_l)?,
            p: self.p.as_deref().map(parse_p_list).transpose()?,
            grid: self.grid.as_deref().map(parse_grid).transpose()?,
            ref_theta: angle(&self.ref_theta)?,
            ref_phi: angle(&self.ref_phi)?,
            format: self.format.as_deref().map(str::parse::<Format>).transpose()?,
            out: self.out.clone(),
            check_against: self.check_against.clone(),
            tolerance: self.tolerance,
        })
    }

    fn resolve(&self) -> ring_photon::Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_toml_str(&std::fs::read_to_string(path)?)?,
            None => PartialConfig::default(),
        };
        ExperimentConfig::try_from(file.merged(self.flags()?))
    }
}

fn execute(cli: &Cli) -> ring_photon::Result<bool> {
    let config = cli.resolve()?;
    let outcome = run_and_check(&config)?;
    let text = outcome.dataset.render(config.format);
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => write_stdout(&text)?,
    }
    Ok(match outcome.golden {
        Some(report) => {
            eprint!("{report}");
            report.passed
        }
        None => true,
    })
}

// A closed pipe (e.g. `| head`) is the reader's choice, not a failure.
fn write_stdout(text: &str) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
