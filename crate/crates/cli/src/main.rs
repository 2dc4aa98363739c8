use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use computon_cli::{json_argument, Failure, RunOptions, EXIT_STRUCTURE};
use url::Url;

#[derive(Parser)]
#[command(
    name = "computon",
    version,
    about = "Validate, compose and run computons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a computon file and report every violated condition.
    Validate { file: PathBuf },
    /// Evaluate a composition script and write the exported composite.
    Compose {
        script: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Execute a computon and print its outport values.
    Run {
        file: PathBuf,
        /// Inport values as a JSON object, or @file.
        #[arg(long, default_value = "{}")]
        inputs: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Write the state trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Device id to URL map as a JSON object, or @file.
        #[arg(long)]
        devices: Option<String>,
        /// Route every builtin to `<url>devices/<name>`.
        #[arg(long)]
        remote_builtins: Option<Url>,
        /// Comma-separated type of each colour, starting with control.
        #[arg(long, value_delimiter = ',')]
        types: Option<Vec<String>>,
    },
    /// Render the port/unit graph in Graphviz format.
    ExportDot {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Serve the builtin devices over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn dispatch(cli: Cli) -> Result<Vec<String>, Failure> {
    match cli.command {
        Command::Validate { file } => computon_cli::validate(&file),
        Command::Compose { script, out } => computon_cli::compose(&script, &out),
        Command::Run {
            file,
            inputs,
            seed,
            max_steps,
            trace,
            devices,
            remote_builtins,
            types,
        } => {
            let opts = RunOptions {
                inputs: json_argument(&inputs)?,
                seed,
                max_steps,
                trace,
                devices: devices.as_deref().map(json_argument).transpose()?,
                remote_builtins,
                types,
            };
            computon_cli::run_file(&file, &opts)
        }
        Command::ExportDot { file, out } => computon_cli::export_dot(&file, out.as_deref()),
        Command::Serve { port } => computon_cli::serve(port),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_STRUCTURE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            for l in f.lines {
                eprintln!("error: {l}");
            }
            ExitCode::from(f.code as u8)
        }
    }
}
