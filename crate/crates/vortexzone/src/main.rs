use clap::{Args, Parser, Subcommand};
use vortexzone::config::{parse_config, preset, ExperimentConfig};
use vortexzone::experiment::{run_experiment, Pipeline};
use vortexzone::Error;

#[derive(Parser)]
#[command(
    name = "vortexzone",
    version,
    about = "Vortex-sheet dynamics and turbulence-zone diagnostics for 2D incompressible Euler"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Named preset (appendixB-const, appendixB-cos1, appendixB-cos2, figure1)
    #[arg(long)]
    preset: Option<String>,
    /// Key-value configuration file; overrides the preset
    #[arg(long)]
    config: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    /// Grid resolution for the spectral operators
    #[arg(long)]
    resolution: Option<usize>,
    /// Run the blob simulation at the full |S| = 20000
    #[arg(long, default_value_t = false)]
    full_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Dissipation functionals, maximizers and fan rates
    Dissipation(Common),
    /// Order-3 interface construction with residual and margin studies
    Construct(Common),
    /// Vortex-blob run with conservation diagnostics and zone overlays
    Simulate(Common),
    /// Macroscopic velocity field sampling over the sheet family
    Field(Common),
    /// Re-render figures from a previous run's stored data
    Report(Common),
}

fn build_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let mut cfg = parse_config(&text)?;
            // An explicit --preset must agree with the file.
            if let Some(name) = &common.preset {
                if cfg.preset.as_deref() != Some(name.as_str()) {
                    let mut from_preset = preset(name)?;
                    from_preset.out_dir = cfg.out_dir.clone();
                    cfg = from_preset;
                }
            }
            cfg
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(res) = common.resolution {
        cfg.resolution = res;
    }
    if common.full_scale {
        cfg.s_count = 20000;
    }
    Ok(cfg)
}

fn main() {
    let cli = Cli::parse();
    let (pipeline, common) = match &cli.command {
        Command::Dissipation(c) => (Pipeline::Dissipation, c),
        Command::Construct(c) => (Pipeline::Construct, c),
        Command::Simulate(c) => (Pipeline::Simulate, c),
        Command::Field(c) => (Pipeline::Field, c),
        Command::Report(c) => (Pipeline::Report, c),
    };
    let config = match build_config(common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    };
    match run_experiment(pipeline, &config) {
        Ok(manifest) => {
            println!(
                "{} finished: {} files in {}",
                manifest.pipeline,
                manifest.files.len(),
                config.out_dir
            );
            for (key, value) in &manifest.diagnostics {
                println!("  {key}: {value}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
