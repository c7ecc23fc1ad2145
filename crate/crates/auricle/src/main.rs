use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use auricle::config::{load_config, Overrides};
use auricle::descriptors::Descriptor;
use auricle::runner;

#[derive(Parser)]
#[command(
    name = "auricle",
    version,
    about = "Texture-descriptor toolbox for ear-image recognition experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract descriptor features into CSV caches under <out>/features
    Extract(RunArgs),
    /// Run the cross-validation protocol; emit curves and reports
    Evaluate(RunArgs),
    /// Render the report of a completed evaluation
    Report(RunArgs),
    /// Generate a seeded dev/test split with fold assignments
    Split(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset root with one directory per subject
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Comma-separated subset of: lbp,lpq,rilpq,bsif,poem,hog,dsift,gabor
    #[arg(long, value_delimiter = ',')]
    descriptors: Option<Vec<Descriptor>>,
    /// Split/fold list file (read by evaluate, written by split)
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Seed for split generation, fold shuffling, and learned filters
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for features, curves, and reports
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of cross-validation folds
    #[arg(long)]
    k: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            dataset: self.dataset.clone(),
            splits: self.splits.clone(),
            descriptors: self.descriptors.clone(),
            seed: self.seed,
            out: self.out.clone(),
            k: self.k,
        }
    }
}

fn run(cli: Cli) -> auricle::Result<()> {
    match cli.command {
        Command::Extract(args) => {
            let config = load_config(args.config.as_deref(), args.overrides())?;
            let outcome = runner::cmd_extract(&config)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("extracted {} images into:", outcome.n_images);
            for path in outcome.cache_files.values() {
                println!("  {}", path.display());
            }
        }
        Command::Evaluate(args) => {
            let config = load_config(args.config.as_deref(), args.overrides())?;
            let report = runner::cmd_evaluate(&config)?;
            print!("{}", runner::render_report(&report));
            println!(
                "written: {} and {}",
                config.out.join(runner::REPORT_JSON).display(),
                config.out.join(runner::REPORT_TXT).display()
            );
        }
        Command::Report(args) => {
            let config = load_config(args.config.as_deref(), args.overrides())?;
            print!("{}", runner::cmd_report(&config.out)?);
        }
        Command::Split(args) => {
            let config = load_config(args.config.as_deref(), args.overrides())?;
            let path = runner::cmd_split(&config)?;
            println!("split list written to {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
