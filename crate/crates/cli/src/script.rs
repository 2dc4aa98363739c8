//! Composition scripts: named imports combined step by step with the
//! composition operators.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use computon::computon::Computon;
use computon::morphism::{Marker, MarkerKind, MorphismError};
use computon::operators::{self, Composite, OperatorError, SeqKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{load_composite, FormatError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Op {
    Seq,
    Async,
    Sync,
    BraOpen,
    BraClosed,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Seq => "SEQ",
            Op::Async => "ASYNC",
            Op::Sync => "SYNC",
            Op::BraOpen => "BRA_OPEN",
            Op::BraClosed => "BRA_CLOSED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub left: String,
    pub right: String,
}

/// Port identifications between the two operands, optionally with the
/// expected apex colours.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanSpec {
    pub pairs: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colours: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub op: Op,
    pub operands: Vec<String>,
    /// Glued ports for `SEQ`; shared inports for the branchings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SpanSpec>,
    /// Shared outports for `BRA_CLOSED`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_span: Option<SpanSpec>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Script {
    /// Name → computon file, relative to the script.
    pub imports: BTreeMap<String, PathBuf>,
    pub steps: Vec<Step>,
    pub export: String,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("step {step}: `{name}` is not defined")]
    Undefined { step: usize, name: String },
    #[error("step {step}: `{name}` is already defined")]
    Redefined { step: usize, name: String },
    #[error("step {step}: {op} takes exactly two operands, got {got}")]
    Arity { step: usize, op: Op, got: usize },
    #[error("step {step}: {op} needs a `{field}`")]
    MissingSpan {
        step: usize,
        op: Op,
        field: &'static str,
    },
    #[error("step {step}: apex colours {declared:?} do not match the glued ports {actual:?}")]
    ApexColours {
        step: usize,
        declared: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("step {step}: {source}")]
    Operator { step: usize, source: OperatorError },
    #[error("step {step}: {source}")]
    Marker { step: usize, source: MorphismError },
    #[error("export `{0}` is not defined")]
    Export(String),
}

/// What one step produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub result: String,
    pub op: Op,
    pub kind: Option<SeqKind>,
    pub ports: usize,
    pub units: usize,
}

#[derive(Debug, Clone)]
pub struct Composition {
    pub name: String,
    pub composite: Composite,
    pub steps: Vec<StepReport>,
}

fn label_pairs(spec: &SpanSpec) -> Vec<(&str, &str)> {
    spec.pairs
        .iter()
        .map(|p| (p.left.as_str(), p.right.as_str()))
        .collect()
}

fn check_colours(step: usize, spec: &SpanSpec, left: &Computon) -> Result<(), ScriptError> {
    let Some(declared) = &spec.colours else {
        return Ok(());
    };
    let actual: Vec<usize> = spec
        .pairs
        .iter()
        .map(|p| {
            left.port_by_label(&p.left)
                .map(|q| left.colour().apply(q))
                .unwrap_or(usize::MAX)
        })
        .collect();
    if *declared != actual {
        return Err(ScriptError::ApexColours {
            step,
            declared: declared.clone(),
            actual,
        });
    }
    Ok(())
}

/// Markers onto the inports (or outports) of both operands. Without a span,
/// interface ports are matched in index order.
fn markers(
    step: usize,
    kind: MarkerKind,
    spec: Option<&SpanSpec>,
    left: &Computon,
    right: &Computon,
) -> Result<(Marker, Marker), ScriptError> {
    let op_err = |source| ScriptError::Operator { step, source };
    let mk_err = |source| ScriptError::Marker { step, source };
    let (lp, rp): (Vec<usize>, Vec<usize>) = match spec {
        Some(spec) => {
            check_colours(step, spec, left)?;
            let span =
                operators::span_from_labels(left, right, &label_pairs(spec)).map_err(op_err)?;
            (
                span.left().m_p().table().to_vec(),
                span.right().m_p().table().to_vec(),
            )
        }
        None => match kind {
            MarkerKind::In => (left.inports(), right.inports()),
            MarkerKind::Out => (left.outports(), right.outports()),
        },
    };
    let colours: Vec<usize> = lp.iter().map(|&p| left.colour().apply(p)).collect();
    let labels: Vec<&str> = lp.iter().map(|&p| left.label(p)).collect();
    let apex =
        Computon::trivial(labels, &colours).map_err(|e| op_err(OperatorError::Computon(e)))?;
    let l = Marker::new(kind, apex.clone(), left.clone(), lp).map_err(mk_err)?;
    let r = Marker::new(kind, apex, right.clone(), rp).map_err(mk_err)?;
    Ok((l, r))
}

impl Script {
    pub fn load(path: &Path) -> Result<Script, FormatError> {
        crate::format::read_json(path)
    }

    /// Runs every step; imports are resolved against `base`.
    pub fn evaluate(&self, base: &Path) -> Result<Composition, ScriptError> {
        let mut env: HashMap<String, Composite> = HashMap::new();
        for (name, file) in &self.imports {
            env.insert(name.clone(), load_composite(&base.join(file), name)?);
        }
        let mut reports = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            let k = k + 1;
            if step.operands.len() != 2 {
                return Err(ScriptError::Arity {
                    step: k,
                    op: step.op,
                    got: step.operands.len(),
                });
            }
            let get = |name: &String| {
                env.get(name).ok_or_else(|| ScriptError::Undefined {
                    step: k,
                    name: name.clone(),
                })
            };
            let (l, r) = (get(&step.operands[0])?, get(&step.operands[1])?);
            let op_err = |source| ScriptError::Operator { step: k, source };
            let outcome = match step.op {
                Op::Seq => {
                    let spec = step.span.as_ref().ok_or(ScriptError::MissingSpan {
                        step: k,
                        op: step.op,
                        field: "span",
                    })?;
                    check_colours(k, spec, &l.computon)?;
                    let span =
                        operators::span_from_labels(&l.computon, &r.computon, &label_pairs(spec))
                            .map_err(op_err)?;
                    operators::seq(l, r, &span).map_err(op_err)?
                }
                Op::Async => operators::p_async(l, r).map_err(op_err)?,
                Op::Sync => operators::sync(l, r).map_err(op_err)?,
                Op::BraOpen => {
                    let (ml, mr) = markers(
                        k,
                        MarkerKind::In,
                        step.span.as_ref(),
                        &l.computon,
                        &r.computon,
                    )?;
                    operators::bra_open(l, r, &ml, &mr).map_err(op_err)?
                }
                Op::BraClosed => {
                    let (il, ir) = markers(
                        k,
                        MarkerKind::In,
                        step.span.as_ref(),
                        &l.computon,
                        &r.computon,
                    )?;
                    let (ol, or) = markers(
                        k,
                        MarkerKind::Out,
                        step.out_span.as_ref(),
                        &l.computon,
                        &r.computon,
                    )?;
                    operators::bra_closed(l, r, &il, &ir, &ol, &or).map_err(op_err)?
                }
            };
            if env.contains_key(&step.result) {
                return Err(ScriptError::Redefined {
                    step: k,
                    name: step.result.clone(),
                });
            }
            let c = &outcome.composite.computon;
            reports.push(StepReport {
                result: step.result.clone(),
                op: step.op,
                kind: outcome.kind,
                ports: c.ports(),
                units: c.units(),
            });
            env.insert(step.result.clone(), outcome.composite);
        }
        let composite = env
            .remove(&self.export)
            .ok_or_else(|| ScriptError::Export(self.export.clone()))?;
        Ok(Composition {
            name: self.export.clone(),
            composite,
            steps: reports,
        })
    }
}
