use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kleinian_cli::config::RunConfig;
use kleinian_cli::pipeline::{self, Params};
use kleinian_cli::report;
use kleinian_cli::{ppm, CliError};
use kleinian_core::limitset::{rasterize, Viewport};
use kleinian_core::moebius::Complex64;

#[derive(Parser)]
#[command(
    name = "kleinian",
    version,
    about = "Limit sets, component bumping, Nielsen cores and characteristic-submanifold reports for geometrically finite Kleinian groups"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for images and reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the limit harvest; 1 is the reproducibility mode.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Overrides the config's limit depth.
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Overrides the uniform stage's pair-sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Command {
    /// Limit-set image.
    Render,
    /// Component and stabilizer report.
    Components,
    /// Bumping-set report.
    Bump,
    /// Nielsen cores with the three boundary-curve checks.
    Nielsen,
    /// Uniform-domain constants per component, with a per-pair CSV.
    Uniform,
    /// Characteristic-submanifold decomposition report.
    Charsub,
    /// Every artifact above.
    All,
}

struct Wants {
    render: bool,
    components: bool,
    bumps: bool,
    nielsen: bool,
    charsub: bool,
    uniform: bool,
}

impl Wants {
    fn of(command: Command) -> Wants {
        let all = command == Command::All;
        Wants {
            render: all || command == Command::Render,
            components: all || command == Command::Components,
            bumps: all || command == Command::Bump,
            nielsen: all || command == Command::Nielsen,
            charsub: all || command == Command::Charsub,
            uniform: all || command == Command::Uniform,
        }
    }

    fn needs_components(&self) -> bool {
        self.components || self.bumps || self.nielsen || self.charsub || self.uniform
    }

    fn needs_bumps(&self) -> bool {
        self.bumps || self.nielsen || self.charsub
    }

    fn needs_nielsen(&self) -> bool {
        self.nielsen || self.charsub
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Validation("--config is required".into()))?;
    let mut config = RunConfig::load(config_path)?;
    if let Some(depth) = cli.depth {
        config.depth = depth;
    }
    if let Some(seed) = cli.seed {
        config.uniform.seed = seed;
    }
    config.validate()?;
    std::fs::create_dir_all(&cli.out)?;

    let spec = config.build_spec()?;
    let group = config.group_hash();
    let params = Params::new(&config, cli.threads);
    let wants = Wants::of(cli.command);

    let sample = pipeline::limit_sample(&spec, &params)?;
    if wants.render {
        let center = Complex64::new(config.render.center[0], config.render.center[1]);
        let viewport = Viewport::square(center, config.render.half);
        let bitmap = rasterize(
            sample.points(),
            viewport,
            config.render.resolution,
            config.render.resolution,
        );
        ppm::write_ppm(&cli.out.join("render.ppm"), &bitmap)?;
        println!("limit sample: {} points at depth {}", sample.len(), config.depth);
    }
    if !wants.needs_components() {
        return Ok(());
    }

    let (_raster, records, notes) = pipeline::component_stage(&spec, &sample, &params)?;
    let mut assumptions = notes.entries.clone();
    assumptions.push(format!(
        "limit sampling and bump harvests stop at depth {}; emptiness reads as empty at this depth",
        config.depth
    ));
    if wants.components {
        let report =
            report::components_report(&group, &spec, &sample, &records, assumptions.clone(), &params);
        report::write_json(&out_path(&cli.out, "components.json"), &report)?;
    }

    if wants.uniform {
        let estimates = pipeline::uniform_stage(
            &records,
            config.uniform.resolution,
            config.uniform.pairs,
            config.uniform.seed,
        )?;
        let report = report::uniform_report(&group, &estimates, assumptions.clone(), &params);
        report::write_json(&out_path(&cli.out, "uniform.json"), &report)?;
        std::fs::write(
            out_path(&cli.out, "uniform.csv"),
            report::uniform_csv(&estimates),
        )?;
    }
    if !wants.needs_bumps() {
        return Ok(());
    }

    let bumps = pipeline::bump_stage(&spec, &records, &params)?;
    if wants.bumps {
        let report = report::bumps_report(&group, &spec, &bumps, assumptions.clone(), &params);
        report::write_json(&out_path(&cli.out, "bumps.json"), &report)?;
    }
    if !wants.needs_nielsen() {
        return Ok(());
    }

    let (cores, nielsen_notes) = pipeline::nielsen_stage(&spec, &records, &bumps, &params)?;
    assumptions.extend(nielsen_notes);
    if wants.nielsen {
        let report = report::nielsen_report(&group, &bumps, &cores, assumptions.clone(), &params);
        report::write_json(&out_path(&cli.out, "nielsen.json"), &report)?;
    }

    if wants.charsub {
        let decomposition = pipeline::charsub_stage(&spec, &records, &bumps, &cores, &params)?;
        let report =
            report::charsub_report(&group, &bumps, &decomposition, assumptions.clone(), &params);
        report::write_json(&out_path(&cli.out, "charsub.json"), &report)?;
    }
    Ok(())
}

fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
