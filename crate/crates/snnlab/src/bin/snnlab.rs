use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "snnlab",
    about = "Spiking network initialization and propagation experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Depth propagation of membrane statistics for one or more schemes
    Propagate(CommonArgs),
    /// Finite-size sweep over layer widths and thresholds
    Sweep(CommonArgs),
    /// Train MLP classifiers and compare schemes epoch by epoch
    Train(CommonArgs),
    /// Finite-difference audit of the surrogate-gradient backward pass
    Gradcheck(CommonArgs),
    /// Build an HTML index over the artifacts in the output directory
    Report(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// JSON config file; fields default when omitted
    #[arg(long)]
    config: Option<String>,
    /// Override a config field, e.g. --set propagate.depth=50
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn main() {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Propagate(a) => ("propagate", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Train(a) => ("train", a),
        Command::Gradcheck(a) => ("gradcheck", a),
        Command::Report(a) => ("report", a),
    };
    match snnlab::cli::run_command(name, args.config.as_deref(), &args.sets) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
