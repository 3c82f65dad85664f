//! Command-line interface: model descriptions, equilibrium and ray
//! atlases, trajectory integration, basin sweeps, and SVG phase
//! portraits for the two-summand flag manifold Ricci flow systems.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flagflow_core::flow::{
    basin_sweep, integrate_compactified, integrate_raw, GridSpec, IntegrationConfig,
};
use flagflow_core::models::{Family, FlagModel};

#[derive(Parser)]
#[command(
    name = "flagflow",
    version,
    about = "Global dynamics of the Ricci flow on flag manifolds with two isotropy summands"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Manifold family: I (SO-type) or II (Sp-type)
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// First structure parameter (m >= 1)
    #[arg(long)]
    m: u32,
    /// Second structure parameter
    #[arg(long)]
    k: u32,
    /// Accept out-of-range parameters with a warning
    #[arg(long)]
    no_strict: bool,
    /// Relative integration tolerance
    #[arg(long, default_value_t = 1e-9)]
    rtol: f64,
    /// Absolute integration tolerance
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    /// Maximum rescaled integration time
    #[arg(long, default_value_t = 1e3)]
    t_max: f64,
    /// Capture radius around the omega-limit equilibria
    #[arg(long, default_value_t = 1e-6)]
    capture: f64,
    /// Write output to FILE (atomically) instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of plain text (where applicable)
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the flow systems with exact rational coefficients
    Model {
        #[command(flatten)]
        common: Common,
    },
    /// Equilibria at infinity with eigenvalues and classifications
    Equilibria {
        #[command(flatten)]
        common: Common,
    },
    /// Invariant rays (Einstein directions plus the axis)
    Rays {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate one trajectory and emit it as CSV
    Flow {
        #[command(flatten)]
        common: Common,
        /// Initial x (= lambda1) > 0
        #[arg(long)]
        x0: f64,
        /// Initial y (= lambda2) > 0
        #[arg(long)]
        y0: f64,
        /// Integrate the raw system in original time instead of the
        /// compactified one
        #[arg(long)]
        raw: bool,
    },
    /// Classify a seed grid against the predicted basin structure, emit CSV
    Basin {
        #[command(flatten)]
        common: Common,
        /// Grid dimensions as NXxNY, e.g. 10x10
        #[arg(long, value_parser = parse_grid)]
        grid: (usize, usize),
        /// Largest x seed
        #[arg(long)]
        xmax: f64,
        /// Largest y seed
        #[arg(long)]
        ymax: f64,
    },
    /// Render an SVG phase portrait of the Poincaré disc quadrant
    Portrait {
        #[command(flatten)]
        common: Common,
        /// Output image width in pixels
        #[arg(long, default_value_t = 800)]
        width_px: u32,
        /// Number of deterministic streamline seeds
        #[arg(long, default_value_t = 24)]
        stream_seeds: u32,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    match s {
        "I" | "i" | "1" => Ok(Family::TypeI),
        "II" | "ii" | "2" => Ok(Family::TypeII),
        other => Err(format!("expected I or II, got {other}")),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| String::from("expected NXxNY, e.g. 10x10"))?;
    let nx: usize = a.trim().parse().map_err(|_| format!("bad grid count {a}"))?;
    let ny: usize = b.trim().parse().map_err(|_| format!("bad grid count {b}"))?;
    if nx == 0 || ny == 0 {
        return Err(String::from("grid counts must be positive"));
    }
    Ok((nx, ny))
}

enum CliError {
    /// Invalid parameters or domain violations: exit 2.
    Parameter(String),
    /// Integration or analysis failures: exit 3.
    Numerical(String),
    /// Filesystem problems: exit 1.
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parameter(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Parameter(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<flagflow_core::flow::FlowError> for CliError {
    fn from(e: flagflow_core::flow::FlowError) -> Self {
        match e {
            flagflow_core::flow::FlowError::Domain(d) => CliError::Parameter(d.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn build_model(c: &Common) -> Result<FlagModel, CliError> {
    let model = FlagModel::new(c.family, c.m, c.k, !c.no_strict)
        .map_err(|e| CliError::Parameter(e.to_string()))?;
    for w in model.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(model)
}

fn integration_config(c: &Common) -> Result<IntegrationConfig, CliError> {
    if !(c.rtol > 0.0 && c.atol > 0.0 && c.t_max > 0.0 && c.capture > 0.0) {
        return Err(CliError::Parameter(String::from(
            "tolerances, t-max, and capture radius must be positive",
        )));
    }
    Ok(IntegrationConfig {
        rtol: c.rtol,
        atol: c.atol,
        t_max: c.t_max,
        capture_radius: c.capture,
        ..IntegrationConfig::default()
    })
}

/// Whole-file atomic write: temp file in the same directory, then
/// rename over the target.
fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    if let Some(d) = dir {
        // Best effort: persist the rename itself.
        if let Ok(h) = std::fs::File::open(d) {
            let _ = h.sync_all();
        }
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_atomic(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(content.as_bytes()).and_then(|_| stdout.flush()) {
                Ok(()) => Ok(()),
                // A closed pipe (e.g. `flagflow ... | head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(CliError::Io(e.to_string())),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Model { common } => {
            let model = build_model(&common)?;
            let text = if common.json {
                report::export_model(&model)
            } else {
                report::describe_model(&model)
            };
            emit(&common.out, &text)
        }
        Cmd::Equilibria { common } => {
            let model = build_model(&common)?;
            let text = if common.json {
                report::export_equilibria(&model)?
            } else {
                report::describe_equilibria(&model)?
            };
            emit(&common.out, &text)
        }
        Cmd::Rays { common } => {
            let model = build_model(&common)?;
            let text = if common.json {
                report::export_rays(&model)
            } else {
                report::describe_rays(&model)
            };
            emit(&common.out, &text)
        }
        Cmd::Flow { common, x0, y0, raw } => {
            let model = build_model(&common)?;
            let cfg = integration_config(&common)?;
            let traj = if raw {
                integrate_raw(&model, x0, y0, &cfg)?
            } else {
                integrate_compactified(&model, x0, y0, &cfg)?
            };
            emit(&common.out, &report::export_trajectory(&traj, raw))
        }
        Cmd::Basin { common, grid, xmax, ymax } => {
            let model = build_model(&common)?;
            let cfg = integration_config(&common)?;
            let (nx, ny) = grid;
            if !(xmax > 0.0 && ymax > 0.0) {
                return Err(CliError::Parameter(String::from(
                    "xmax and ymax must be positive",
                )));
            }
            // Seeds at i/nx of the range, i = 1..=nx: the open-at-zero
            // grid (0, xmax] x (0, ymax].
            let spec = GridSpec {
                x_min: xmax / nx as f64,
                x_max: xmax,
                y_min: ymax / ny as f64,
                y_max: ymax,
                nx,
                ny,
            };
            let sweep = basin_sweep(&model, &spec, &cfg)
                .map_err(|e| CliError::Parameter(e.to_string()))?;
            emit(&common.out, &report::export_basin(&sweep))
        }
        Cmd::Portrait { common, width_px, stream_seeds } => {
            let model = build_model(&common)?;
            let cfg = integration_config(&common)?;
            if width_px == 0 || stream_seeds == 0 {
                return Err(CliError::Parameter(String::from(
                    "width and seed count must be positive",
                )));
            }
            let opts = report::PortraitOptions {
                width_px,
                n_stream_seeds: stream_seeds,
                ..Default::default()
            };
            let svg = report::render_portrait(&model, &opts, &cfg)?;
            emit(&common.out, &svg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
