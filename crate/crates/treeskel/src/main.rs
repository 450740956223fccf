use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use treeskel::config::PipelineConfig;
use treeskel::stages::{Runner, Stage, StageReport};
use treeskel::Error;

/// Tree skeletons from labeled photogrammetric point clouds.
///
/// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
#[derive(Parser)]
#[command(name = "treeskel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Align to the ground plane, crop to the cameras, drop outliers and sky points.
    Restore,
    /// Estimate metric scale from marker detections and rescale cloud and poses.
    Scale,
    /// Contract the cloud (LBC or S-LBC) and extract a simplified skeleton graph.
    Skeletonize,
    /// Compare LBC and S-LBC on synthetic noisy and occluded trees.
    Eval,
    /// Run restore, scale and skeletonize in sequence.
    Pipeline,
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Args)]
struct Flags {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for RANSAC, sky clustering and synthetic data
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use semantic (trunk-weighted) contraction.
    #[arg(long, global = true)]
    semantic: bool,
    /// Trunk weight of the semantic contraction.
    #[arg(long = "lambda-t", global = true, allow_hyphen_values = true)]
    lambda_t: Option<f64>,
    /// Marker side length in meters.
    #[arg(long = "d-aruco", global = true, allow_hyphen_values = true)]
    d_aruco: Option<f64>,
    /// Skip sky-silhouette removal
    #[arg(long = "skip-sky", global = true)]
    skip_sky: bool,
    /// First pipeline stage to run; earlier outputs are read from the output directory.
    #[arg(long = "from-stage", global = true, value_enum)]
    from_stage: Option<Stage>,
    /// Number of synthetic trees for `eval`.
    #[arg(long, global = true)]
    trees: Option<usize>,
    /// Compute and report without writing files.
    #[arg(long = "dry-run", global = true)]
    dry_run: bool,
    /// Smaller synthetic trees for a fast `eval`.
    #[arg(long, global = true)]
    quick: bool,
    /// Label override file, one label code per point.
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// Input point cloud (PLY).
    #[arg(long, global = true)]
    cloud: Option<PathBuf>,
    /// COLMAP text model directory.
    #[arg(long, global = true)]
    colmap: Option<PathBuf>,
    /// Marker detection file.
    #[arg(long, global = true)]
    markers: Option<PathBuf>,
    /// Sky color sample file.
    #[arg(long, global = true)]
    sky: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set contraction.max_iterations=10`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

impl Flags {
    fn config(&self) -> Result<PipelineConfig, Error> {
        let mut c = PipelineConfig::load(self.config.as_deref(), std::env::vars(), self.set.iter().map(String::as_str))?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.semantic {
            c.contraction.semantic = true;
        }
        if let Some(l) = self.lambda_t {
            c.contraction.lambda_t = l;
        }
        if let Some(d) = self.d_aruco {
            c.scale.d_aruco = Some(d);
        }
        if self.skip_sky {
            c.restore.skip_sky = true;
        }
        if let Some(t) = self.trees {
            c.eval.trees = t;
        }
        if self.quick {
            c.eval.quick = true;
        }
        let paths = [
            (&self.labels, &mut c.input.labels),
            (&self.cloud, &mut c.input.cloud),
            (&self.colmap, &mut c.input.colmap),
            (&self.markers, &mut c.input.markers),
            (&self.sky, &mut c.input.sky),
        ];
        for (flag, slot) in paths {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        if let Some(o) = &self.out {
            c.output.dir = o.clone();
        }
        Ok(c)
    }
}

fn print(report: &StageReport) {
    print!("{}", report.text());
}

fn run(cli: &Cli) -> Result<(), Error> {
    let config = cli.flags.config()?;
    let runner = Runner {
        config,
        dry_run: cli.flags.dry_run,
    };
    let started = Instant::now();
    match cli.command {
        Command::Restore => print(&runner.restore()?.report),
        Command::Scale => print(&runner.scale()?.report),
        Command::Skeletonize => print(&runner.skeletonize()?.report),
        Command::Pipeline => {
            for report in runner.pipeline(cli.flags.from_stage.unwrap_or(Stage::Restore))? {
                print(&report);
            }
        }
        Command::Eval => {
            let report = runner.eval()?;
            print!("{}", report.summary_table());
        }
        Command::Config => print!("{}", runner.config.to_toml()),
    }
    info!("done in {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
