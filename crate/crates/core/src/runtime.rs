//! Step-synchronous execution of sound computons.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::computon::{Class, Computon, DeviceId};
use crate::devnet::{Arg, DeviceError, Devices};
use crate::operators::Composite;
use crate::value::{TypeUniverse, Value, ValueError, ValueType};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("computon is invalid: {0}")]
    Invalid(String),
    #[error("computon is not sound; only composites of trivial and primitive computons run")]
    Unsound,
    #[error("colour {0} has no type in the universe")]
    Uncovered(usize),
    #[error("uncovered inport `{0}`")]
    UncoveredInport(String),
    #[error("`{0}` is not an inport")]
    ExtraInput(String),
    #[error("input `{label}`: {source}")]
    IllTypedInput { label: String, source: ValueError },
    #[error("outflow {outflow} (device {device}) produced {found}, not a {expected} value for port `{port}`")]
    IllTypedResult {
        outflow: usize,
        device: String,
        port: String,
        expected: ValueType,
        found: String,
    },
    #[error("outflow {outflow} of unit {unit}: {source}")]
    Device {
        outflow: usize,
        unit: usize,
        source: DeviceError,
    },
    #[error("port `{port}` is written by outflows {first} and {second} in the same step")]
    WriterConflict {
        port: String,
        first: usize,
        second: usize,
    },
    #[error("no final state within {0} steps")]
    StepBudget(usize),
    #[error("max_steps must be at least 1")]
    ZeroBudget,
}

/// One outflow ready for evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledOutflow {
    pub unit: usize,
    pub device: DeviceId,
    /// Argument ports, ascending, with their labels.
    pub args: Vec<(usize, String)>,
    pub target: usize,
}

/// Structure tables of a computon, precomputed for execution.
#[derive(Debug, Clone)]
pub struct CompiledComputon {
    computon: Computon,
    port_types: Vec<ValueType>,
    inports: Vec<usize>,
    outports: Vec<usize>,
    control: Vec<bool>,
    pre: Vec<Vec<usize>>,
    post: Vec<Vec<usize>>,
    unit_outflows: Vec<Vec<usize>>,
    outflows: Vec<CompiledOutflow>,
}

/// Compiles a composite whose parsing tree has only trivial and primitive
/// leaves.
pub fn compile(c: &Composite, universe: &TypeUniverse) -> Result<CompiledComputon, RuntimeError> {
    if !c.is_sound() {
        return Err(RuntimeError::Unsound);
    }
    compile_unchecked(&c.computon, universe)
}

/// Compiles a bare trivial or primitive computon.
pub fn compile_computon(
    c: &Computon,
    universe: &TypeUniverse,
) -> Result<CompiledComputon, RuntimeError> {
    if c.class() == Class::Composite {
        return Err(RuntimeError::Unsound);
    }
    compile_unchecked(c, universe)
}

fn compile_unchecked(
    c: &Computon,
    universe: &TypeUniverse,
) -> Result<CompiledComputon, RuntimeError> {
    let violations = c.validate();
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(RuntimeError::Invalid(msg.join("; ")));
    }
    let mut port_types = Vec::with_capacity(c.ports());
    for p in 0..c.ports() {
        let colour = c.colour().apply(p);
        port_types.push(
            universe
                .get(colour)
                .ok_or(RuntimeError::Uncovered(colour))?,
        );
    }
    let units = c.units();
    let pre: Vec<Vec<usize>> = (0..units)
        .map(|u| c.pre_set(u).expect("unit in range"))
        .collect();
    let post: Vec<Vec<usize>> = (0..units)
        .map(|u| c.post_set(u).expect("unit in range"))
        .collect();
    let mut unit_outflows = vec![Vec::new(); units];
    let outflows = (0..c.outflows())
        .map(|o| {
            let unit = c.out_unit().apply(o);
            unit_outflows[unit].push(o);
            CompiledOutflow {
                unit,
                device: c.device(o).clone(),
                args: c
                    .argument_ports(o)
                    .into_iter()
                    .map(|p| (p, c.label(p).to_owned()))
                    .collect(),
                target: c.tgt().apply(o),
            }
        })
        .collect();
    Ok(CompiledComputon {
        computon: c.clone(),
        port_types,
        inports: c.inports(),
        outports: c.outports(),
        control: (0..c.ports()).map(|p| c.is_control(p)).collect(),
        pre,
        post,
        unit_outflows,
        outflows,
    })
}

impl CompiledComputon {
    pub fn computon(&self) -> &Computon {
        &self.computon
    }
    pub fn units(&self) -> usize {
        self.pre.len()
    }
    pub fn inports(&self) -> &[usize] {
        &self.inports
    }
    pub fn outports(&self) -> &[usize] {
        &self.outports
    }
    pub fn pre_set(&self, u: usize) -> &[usize] {
        &self.pre[u]
    }
    pub fn post_set(&self, u: usize) -> &[usize] {
        &self.post[u]
    }
    pub fn outflow(&self, o: usize) -> &CompiledOutflow {
        &self.outflows[o]
    }
    pub fn outflows_of(&self, u: usize) -> &[usize] {
        &self.unit_outflows[u]
    }
    pub fn port_type(&self, p: usize) -> ValueType {
        self.port_types[p]
    }
    pub fn is_control(&self, p: usize) -> bool {
        self.control[p]
    }
    pub fn label(&self, p: usize) -> &str {
        self.computon.label(p)
    }

    /// Reads untyped JSON inputs (`{"go": "*", "a": 2}`) at the inports'
    /// types.
    pub fn inputs_from_json(&self, json: &Json) -> Result<BTreeMap<String, Value>, RuntimeError> {
        let obj = json
            .as_object()
            .ok_or_else(|| RuntimeError::Invalid("inputs must be a JSON object".into()))?;
        let mut out = BTreeMap::new();
        for (label, v) in obj {
            let p = self
                .computon
                .port_by_label(label)
                .filter(|p| self.inports.contains(p))
                .ok_or_else(|| RuntimeError::ExtraInput(label.clone()))?;
            let value = Value::from_json(self.port_types[p], v).map_err(|source| {
                RuntimeError::IllTypedInput {
                    label: label.clone(),
                    source,
                }
            })?;
            out.insert(label.clone(), value);
        }
        Ok(out)
    }

    /// Outport label → value.
    pub fn outputs(&self, state: &ExecState) -> BTreeMap<String, Value> {
        self.outports
            .iter()
            .map(|&p| (self.label(p).to_owned(), state.values[p].clone()))
            .collect()
    }

    pub fn is_well_typed(&self, state: &ExecState) -> bool {
        state.values.len() == self.port_types.len()
            && state
                .values
                .iter()
                .zip(&self.port_types)
                .all(|(v, &t)| v.is_absent() || v.value_type() == Some(t))
    }
}

/// Port assignment at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecState {
    pub time: usize,
    pub values: Vec<Value>,
}

pub fn initial_state(
    cc: &CompiledComputon,
    inputs: &BTreeMap<String, Value>,
) -> Result<ExecState, RuntimeError> {
    let mut values = vec![Value::Absent; cc.port_types.len()];
    for label in inputs.keys() {
        match cc.computon.port_by_label(label) {
            Some(p) if cc.inports.contains(&p) => {}
            _ => return Err(RuntimeError::ExtraInput(label.clone())),
        }
    }
    for &p in &cc.inports {
        let label = cc.label(p);
        let v = inputs
            .get(label)
            .ok_or_else(|| RuntimeError::UncoveredInport(label.to_owned()))?;
        if v.value_type() != Some(cc.port_types[p]) {
            return Err(RuntimeError::IllTypedInput {
                label: label.to_owned(),
                source: ValueError::Mismatch {
                    expected: cc.port_types[p],
                    found: v.to_string(),
                },
            });
        }
        values[p] = v.clone();
    }
    Ok(ExecState { time: 0, values })
}

/// Units whose whole pre-set is filled.
pub fn enabled_units(cc: &CompiledComputon, state: &ExecState) -> Vec<usize> {
    (0..cc.units())
        .filter(|&u| cc.pre[u].iter().all(|&p| !state.values[p].is_absent()))
        .collect()
}

/// One enabled unit per class of enabled units with equal pre-sets. Classes
/// are visited by their smallest unit; the generator is consulted only for
/// classes with more than one member.
pub fn ready_units<R: Rng + ?Sized>(
    cc: &CompiledComputon,
    state: &ExecState,
    rng: &mut R,
) -> Vec<usize> {
    let mut classes: Vec<(&[usize], Vec<usize>)> = Vec::new();
    for u in enabled_units(cc, state) {
        match classes
            .iter_mut()
            .find(|(pre, _)| *pre == cc.pre[u].as_slice())
        {
            Some((_, members)) => members.push(u),
            None => classes.push((&cc.pre[u], vec![u])),
        }
    }
    let mut ready: Vec<usize> = classes
        .into_iter()
        .map(|(_, members)| {
            if members.len() == 1 {
                members[0]
            } else {
                members[rng.random_range(0..members.len())]
            }
        })
        .collect();
    ready.sort_unstable();
    ready
}

/// Result of evaluating one outflow against a state.
pub fn evaluate<D: Devices + ?Sized>(
    cc: &CompiledComputon,
    state: &ExecState,
    outflow: usize,
    devices: &D,
) -> Result<Value, RuntimeError> {
    let of = &cc.outflows[outflow];
    let args: Vec<Arg> = of
        .args
        .iter()
        .map(|(p, label)| Arg::new(label.clone(), state.values[*p].clone()))
        .collect();
    let value = devices
        .invoke(&of.device, &args)
        .map_err(|source| RuntimeError::Device {
            outflow,
            unit: of.unit,
            source,
        })?;
    let expected = cc.port_types[of.target];
    if value.value_type() != Some(expected) {
        return Err(RuntimeError::IllTypedResult {
            outflow,
            device: of.device.to_string(),
            port: cc.label(of.target).to_owned(),
            expected,
            found: value.to_string(),
        });
    }
    Ok(value)
}

fn evaluate_units<D: Devices + ?Sized>(
    cc: &CompiledComputon,
    state: &ExecState,
    ready: &[usize],
    devices: &D,
) -> Result<Vec<(usize, Value)>, RuntimeError> {
    let unit_results = |u: usize| -> Result<Vec<(usize, Value)>, RuntimeError> {
        cc.unit_outflows[u]
            .iter()
            .map(|&o| evaluate(cc, state, o, devices).map(|v| (o, v)))
            .collect()
    };
    let remote = ready
        .iter()
        .filter(|&&u| {
            cc.unit_outflows[u]
                .iter()
                .any(|&o| devices.is_remote(&cc.outflows[o].device))
        })
        .count();
    let per_unit: Vec<Result<Vec<(usize, Value)>, RuntimeError>> = if remote > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = ready
                .iter()
                .map(|&u| s.spawn(move || unit_results(u)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("device evaluation thread panicked"))
                .collect()
        })
    } else {
        ready.iter().map(|&u| unit_results(u)).collect()
    };
    let mut out = Vec::new();
    for r in per_unit {
        out.extend(r?);
    }
    Ok(out)
}

/// Outcome of a single transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub ready: Vec<usize>,
    pub state: ExecState,
}

/// One transition: evaluate the outflows of the ready units, then assign
/// control to their control post-ports, results to written ports, keep ports
/// away from every ready unit and clear the rest.
pub fn step<R: Rng + ?Sized, D: Devices + ?Sized>(
    cc: &CompiledComputon,
    state: &ExecState,
    rng: &mut R,
    devices: &D,
) -> Result<Step, RuntimeError> {
    let ready = ready_units(cc, state, rng);
    let results = evaluate_units(cc, state, &ready, devices)?;

    let n = state.values.len();
    let mut adjacent = vec![false; n];
    let mut control_post = vec![false; n];
    for &u in &ready {
        for &p in &cc.pre[u] {
            adjacent[p] = true;
        }
        for &p in &cc.post[u] {
            adjacent[p] = true;
            if cc.control[p] {
                control_post[p] = true;
            }
        }
    }
    let mut written: Vec<Option<(usize, Value)>> = vec![None; n];
    for (o, v) in results {
        let t = cc.outflows[o].target;
        if let Some((first, _)) = &written[t] {
            return Err(RuntimeError::WriterConflict {
                port: cc.label(t).to_owned(),
                first: *first,
                second: o,
            });
        }
        written[t] = Some((o, v));
    }
    let values = (0..n)
        .map(|p| {
            if control_post[p] {
                Value::Control
            } else if let Some((_, v)) = &written[p] {
                v.clone()
            } else if !adjacent[p] {
                state.values[p].clone()
            } else {
                Value::Absent
            }
        })
        .collect();
    Ok(Step {
        ready,
        state: ExecState {
            time: state.time + 1,
            values,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub time: usize,
    /// Units that fired to reach this state; empty for the initial state.
    pub ready: Vec<usize>,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    /// One JSON object per state: time, ready units and label → value.
    pub fn to_json_lines(&self, cc: &CompiledComputon) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let state: serde_json::Map<String, Json> = e
                .values
                .iter()
                .enumerate()
                .map(|(p, v)| (cc.label(p).to_owned(), v.to_json()))
                .collect();
            let line = json!({ "time": e.time, "ready": e.ready, "state": state });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }

    pub fn write_json_lines<W: Write>(
        &self,
        cc: &CompiledComputon,
        mut w: W,
    ) -> std::io::Result<()> {
        w.write_all(self.to_json_lines(cc).as_bytes())
    }
}

/// A failed run with the trace recorded up to the failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: RuntimeError,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub state: ExecState,
    pub trace: Trace,
}

/// Runs from the initial state until every unit is idle.
pub fn run<D: Devices + ?Sized>(
    cc: &CompiledComputon,
    inputs: &BTreeMap<String, Value>,
    seed: u64,
    max_steps: usize,
    devices: &D,
) -> Result<RunResult, RunFailure> {
    let mut trace = Trace::default();
    let fail = |error, trace| Err(RunFailure { error, trace });
    if max_steps == 0 {
        return fail(RuntimeError::ZeroBudget, trace);
    }
    let mut state = match initial_state(cc, inputs) {
        Ok(s) => s,
        Err(e) => return fail(e, trace),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    trace.entries.push(TraceEntry {
        time: 0,
        ready: vec![],
        values: state.values.clone(),
    });
    loop {
        if enabled_units(cc, &state).is_empty() {
            return Ok(RunResult { state, trace });
        }
        if state.time >= max_steps {
            return fail(RuntimeError::StepBudget(max_steps), trace);
        }
        match step(cc, &state, &mut rng, devices) {
            Ok(s) => {
                trace.entries.push(TraceEntry {
                    time: s.state.time,
                    ready: s.ready,
                    values: s.state.values.clone(),
                });
                state = s.state;
            }
            Err(e) => return fail(e, trace),
        }
    }
}

/// Ports whose value differs between two consecutive states.
pub fn changed_ports(before: &ExecState, after: &ExecState) -> BTreeSet<usize> {
    before
        .values
        .iter()
        .zip(&after.values)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(p, _)| p)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::computon::PrimitiveSpec;
    use crate::devnet::DeviceRegistry;

    fn mul() -> Computon {
        Computon::primitive(PrimitiveSpec {
            ports: vec![
                ("go".into(), 0),
                ("a".into(), 1),
                ("b".into(), 1),
                ("done".into(), 0),
                ("product".into(), 1),
            ],
            inputs: vec![0, 1, 2],
            outputs: vec![
                (3, DeviceId::builtin("epsilon")),
                (4, DeviceId::builtin("mul")),
            ],
            relate: vec![0, 1, 1],
            types: None,
        })
        .unwrap()
    }

    fn inputs(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn primitive_runs_in_one_step() {
        let cc = compile_computon(&mul(), &TypeUniverse::standard(2)).unwrap();
        assert_eq!(
            cc.outflow(1).args,
            vec![(1, "a".to_string()), (2, "b".to_string())]
        );
        let ins = inputs(&[
            ("go", Value::Control),
            ("a", Value::int(2)),
            ("b", Value::int(3)),
        ]);
        let r = run(&cc, &ins, 0, 10, &DeviceRegistry::new()).unwrap();
        assert_eq!(r.state.time, 1);
        let out = cc.outputs(&r.state);
        assert_eq!(out["product"], Value::int(6));
        assert_eq!(out["done"], Value::Control);
        assert!(r.state.values[..3].iter().all(Value::is_absent));
        assert_eq!(r.trace.entries.len(), 2);
    }

    #[test]
    fn input_errors() {
        let cc = compile_computon(&mul(), &TypeUniverse::standard(2)).unwrap();
        let missing = inputs(&[("go", Value::Control), ("a", Value::int(2))]);
        assert_eq!(
            initial_state(&cc, &missing).unwrap_err(),
            RuntimeError::UncoveredInport("b".into())
        );
        let extra = inputs(&[
            ("go", Value::Control),
            ("a", Value::int(2)),
            ("b", Value::int(2)),
            ("product", Value::int(2)),
        ]);
        assert!(matches!(
            initial_state(&cc, &extra),
            Err(RuntimeError::ExtraInput(_))
        ));
        let bad = inputs(&[
            ("go", Value::Control),
            ("a", Value::Text("x".into())),
            ("b", Value::int(2)),
        ]);
        assert!(matches!(
            initial_state(&cc, &bad),
            Err(RuntimeError::IllTypedInput { .. })
        ));
    }

    #[test]
    fn ill_typed_device_result() {
        let universe = TypeUniverse::standard(2).with(1, ValueType::Float).unwrap();
        let cc = compile_computon(&mul(), &universe).unwrap();
        // floats in, float out: fine
        let ins = inputs(&[
            ("go", Value::Control),
            ("a", Value::Float(2.0)),
            ("b", Value::Float(3.0)),
        ]);
        assert!(run(&cc, &ins, 0, 10, &DeviceRegistry::new()).is_ok());

        let mut parts = mul().parts();
        parts.outflows[1].2 = DeviceId::builtin("add");
        parts.types = 3;
        parts.colours = vec![0, 1, 2, 0, 1];
        let c = Computon::primitive(PrimitiveSpec {
            ports: parts
                .port_labels
                .iter()
                .cloned()
                .zip(parts.colours.iter().copied())
                .collect(),
            inputs: vec![0, 1, 2],
            outputs: vec![
                (3, DeviceId::builtin("epsilon")),
                (4, DeviceId::builtin("add")),
            ],
            relate: vec![0, 1, 1],
            types: None,
        })
        .unwrap();
        let cc = compile_computon(&c, &TypeUniverse::standard(3)).unwrap();
        let ins = inputs(&[
            ("go", Value::Control),
            ("a", Value::int(2)),
            ("b", Value::Float(0.5)),
        ]);
        let err = run(&cc, &ins, 0, 10, &DeviceRegistry::new()).unwrap_err();
        assert!(
            matches!(err.error, RuntimeError::IllTypedResult { outflow: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn trivial_is_already_final() {
        let t = Computon::trivial(["go"], &[0]).unwrap();
        let cc = compile_computon(&t, &TypeUniverse::standard(1)).unwrap();
        let r = run(
            &cc,
            &inputs(&[("go", Value::Control)]),
            0,
            1,
            &DeviceRegistry::new(),
        )
        .unwrap();
        assert_eq!(r.state.time, 0);
        assert_eq!(cc.outputs(&r.state)["go"], Value::Control);
    }

    #[test]
    fn unsound_is_rejected() {
        let c = crate::colimit::coproduct(&mul(), &mul()).object;
        assert_eq!(
            compile_computon(&c, &TypeUniverse::standard(2)).unwrap_err(),
            RuntimeError::Unsound
        );
    }

    #[test]
    fn step_on_final_state_is_a_fixpoint() {
        let cc = compile_computon(&mul(), &TypeUniverse::standard(2)).unwrap();
        let s = ExecState {
            time: 4,
            values: vec![
                Value::Absent,
                Value::Absent,
                Value::Absent,
                Value::Control,
                Value::int(6),
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = step(&cc, &s, &mut rng, &DeviceRegistry::new()).unwrap();
        assert!(next.ready.is_empty());
        assert_eq!(next.state.values, s.values);
        assert_eq!(next.state.time, 5);
    }
}
