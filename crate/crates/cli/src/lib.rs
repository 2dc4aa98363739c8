//! Library side of the `computon` command: file formats, scripts, DOT
//! export and the subcommand implementations.

pub mod dot;
pub mod format;
pub mod script;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use computon::computon::{Computon, ComputonError, DeviceId};
use computon::devnet::{DeviceRegistry, StubServer};
use computon::runtime::{compile, run, RuntimeError, DEFAULT_MAX_STEPS};
use computon::value::{TypeUniverse, ValueType};
use serde_json::Value as Json;
use url::Url;

use crate::format::{load_composite, save_composite, tree_path, ComputonFile, FormatError};
use crate::script::Script;

pub const EXIT_OK: i32 = 0;
pub const EXIT_STRUCTURE: i32 = 1;
pub const EXIT_NONTERMINATION: i32 = 2;
pub const EXIT_DEVICE: i32 = 3;

/// A failed command: message lines and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub lines: Vec<String>,
}

impl Failure {
    pub fn structure(msg: impl ToString) -> Self {
        Failure {
            code: EXIT_STRUCTURE,
            lines: vec![msg.to_string()],
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Computon(ComputonError::Invalid(vs)) => Failure {
                code: EXIT_STRUCTURE,
                lines: vs.iter().map(|v| format!("invalid: {v}")).collect(),
            },
            other => Failure::structure(other),
        }
    }
}

pub type Outcome = Result<Vec<String>, Failure>;

/// Reads `@path` as a file, anything else as inline JSON.
pub fn json_argument(arg: &str) -> Result<Json, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| Failure::structure(format!("{path}: {e}")))?
        }
        None => arg.to_owned(),
    };
    serde_json::from_str(&text).map_err(|e| Failure::structure(format!("bad JSON argument: {e}")))
}

pub fn validate(file: &Path) -> Outcome {
    let parsed: ComputonFile = format::read_json(file)?;
    let c = parsed.to_computon()?;
    let mut lines = vec![format!(
        "ok: {:?} computon, {} units, {} ports, {} inflows, {} outflows, {} colours",
        c.class(),
        c.units(),
        c.ports(),
        c.inflows(),
        c.outflows(),
        c.types()
    )
    .to_lowercase()];
    if tree_path(file).exists() {
        let composite = load_composite(file, "")?;
        lines.push(format!(
            "tree: height {}, {} leaves, {}",
            composite.tree.height(),
            composite.tree.leaves().len(),
            if composite.is_sound() {
                "sound"
            } else {
                "not sound"
            }
        ));
    }
    Ok(lines)
}

pub fn compose(script: &Path, out: &Path) -> Outcome {
    let s = Script::load(script)?;
    let base = script.parent().unwrap_or(Path::new("."));
    let result = s.evaluate(base).map_err(Failure::structure)?;
    let mut lines: Vec<String> = result
        .steps
        .iter()
        .map(|r| {
            let kind = r
                .kind
                .map(|k| format!(" ({})", format!("{k:?}").to_lowercase()))
                .unwrap_or_default();
            format!(
                "{} = {}{kind}: {} units, {} ports",
                r.result, r.op, r.units, r.ports
            )
        })
        .collect();
    save_composite(out, &result.name, &result.composite)?;
    lines.push(format!("wrote {}", out.display()));
    if result.composite.tree.height() > 0 {
        lines.push(format!("wrote {}", tree_path(out).display()));
    }
    Ok(lines)
}

/// Options of `run`.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub inputs: Json,
    pub seed: u64,
    pub max_steps: Option<usize>,
    pub trace: Option<PathBuf>,
    pub devices: Option<Json>,
    pub remote_builtins: Option<Url>,
    pub types: Option<Vec<String>>,
}

fn universe(types: &Option<Vec<String>>, c: &Computon) -> Result<TypeUniverse, Failure> {
    match types {
        None => Ok(TypeUniverse::standard(c.types())),
        Some(names) => {
            let tys = names
                .iter()
                .map(|n| {
                    ValueType::from_name(n.trim())
                        .ok_or_else(|| Failure::structure(format!("unknown type `{n}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            TypeUniverse::new(tys).map_err(Failure::structure)
        }
    }
}

fn registry(opts: &RunOptions) -> Result<DeviceRegistry, Failure> {
    let mut reg = DeviceRegistry::new();
    if let Some(base) = &opts.remote_builtins {
        reg = reg.with_remote_builtins(base).map_err(Failure::structure)?;
    }
    if let Some(map) = &opts.devices {
        let map: BTreeMap<String, String> = serde_json::from_value(map.clone())
            .map_err(|e| Failure::structure(format!("device map: {e}")))?;
        for (id, url) in map {
            let id = DeviceId::parse(&id).map_err(Failure::structure)?;
            let url = Url::parse(&url).map_err(|e| Failure::structure(format!("{url}: {e}")))?;
            reg = reg.with_endpoint(id, url);
        }
    }
    Ok(reg)
}

fn exit_code(e: &RuntimeError) -> i32 {
    match e {
        RuntimeError::StepBudget(_) => EXIT_NONTERMINATION,
        RuntimeError::Device { .. } => EXIT_DEVICE,
        _ => EXIT_STRUCTURE,
    }
}

pub fn run_file(file: &Path, opts: &RunOptions) -> Outcome {
    let composite = load_composite(file, "main")?;
    let universe = universe(&opts.types, &composite.computon)?;
    let cc = compile(&composite, &universe).map_err(Failure::structure)?;
    let inputs = cc
        .inputs_from_json(&opts.inputs)
        .map_err(Failure::structure)?;
    let devices = registry(opts)?;
    let max_steps = opts.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
    let write_trace = |trace: &computon::runtime::Trace| -> Result<(), Failure> {
        if let Some(path) = &opts.trace {
            let f = fs::File::create(path)
                .map_err(|e| Failure::structure(format!("{}: {e}", path.display())))?;
            trace
                .write_json_lines(&cc, std::io::BufWriter::new(f))
                .map_err(|e| Failure::structure(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    };
    match run(&cc, &inputs, opts.seed, max_steps, &devices) {
        Ok(result) => {
            write_trace(&result.trace)?;
            let outputs: serde_json::Map<String, Json> = cc
                .outputs(&result.state)
                .into_iter()
                .map(|(k, v)| (k, v.to_json()))
                .collect();
            Ok(vec![Json::Object(outputs).to_string()])
        }
        Err(failure) => {
            write_trace(&failure.trace)?;
            Err(Failure {
                code: exit_code(&failure.error),
                lines: vec![failure.error.to_string()],
            })
        }
    }
}

pub fn export_dot(file: &Path, out: Option<&Path>) -> Outcome {
    let parsed: ComputonFile = format::read_json(file)?;
    let c = parsed.to_computon()?;
    let name = if parsed.name.is_empty() {
        "computon"
    } else {
        &parsed.name
    };
    let text = dot::to_dot(name, &c);
    match out {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| Failure::structure(format!("{}: {e}", path.display())))?;
            Ok(vec![format!("wrote {}", path.display())])
        }
        None => Ok(vec![text.trim_end().to_owned()]),
    }
}

/// Starts the stub device server; blocks until it stops.
pub fn serve(port: u16) -> Outcome {
    let server = StubServer::start(port).map_err(|e| Failure {
        code: EXIT_DEVICE,
        lines: vec![format!("cannot bind port {port}: {e}")],
    })?;
    println!(
        "serving builtin devices at {}devices/<name>",
        server.base_url()
    );
    server.wait();
    Ok(vec![])
}
