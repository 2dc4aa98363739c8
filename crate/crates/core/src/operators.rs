//! Control-flow composition operators and parsing trees.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colimit::{
    coproduct, pushout, unique_from_coproduct, ColimitError, ColimitResult, Span,
};
use crate::computon::{Class, Computon, ComputonError, ComputonParts, DeviceId, CONTROL};
use crate::morphism::{Marker, MarkerKind, Morphism, MorphismError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    #[serde(rename = "⊵")]
    TotalSeq,
    #[serde(rename = "▷")]
    PartialSeq,
    #[serde(rename = "+")]
    Async,
    #[serde(rename = "?")]
    OpenBranch,
    #[serde(rename = "??")]
    ClosedBranch,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::TotalSeq => "⊵",
            Operator::PartialSeq => "▷",
            Operator::Async => "+",
            Operator::OpenBranch => "?",
            Operator::ClosedBranch => "??",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqKind {
    Total,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafClass {
    Trivial,
    Primitive,
    Unknown,
}

/// Record of the operators that built a composite. Nodes carry the label
/// pairs identified by their generating span(s).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum ParsingTree {
    Leaf {
        name: String,
        class: LeafClass,
    },
    Node {
        op: Operator,
        span: Vec<(String, String)>,
        left: Box<ParsingTree>,
        right: Box<ParsingTree>,
    },
}

impl ParsingTree {
    pub fn height(&self) -> usize {
        match self {
            ParsingTree::Leaf { .. } => 0,
            ParsingTree::Node { left, right, .. } => left.height().max(right.height()) + 1,
        }
    }

    pub fn leaves(&self) -> Vec<(&str, LeafClass)> {
        match self {
            ParsingTree::Leaf { name, class } => vec![(name.as_str(), *class)],
            ParsingTree::Node { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }

    pub fn is_sound(&self) -> bool {
        self.leaves()
            .iter()
            .all(|(_, c)| matches!(c, LeafClass::Trivial | LeafClass::Primitive))
    }

    /// Operators in post-order.
    pub fn operators(&self) -> Vec<Operator> {
        match self {
            ParsingTree::Leaf { .. } => vec![],
            ParsingTree::Node {
                op, left, right, ..
            } => {
                let mut v = left.operators();
                v.extend(right.operators());
                v.push(*op);
                v
            }
        }
    }
}

/// A computon together with the parsing tree it was built by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composite {
    pub computon: Computon,
    pub tree: ParsingTree,
}

impl Composite {
    /// A height-0 composite; the leaf class is read off the computon.
    pub fn leaf(name: impl Into<String>, computon: Computon) -> Self {
        let class = match computon.class() {
            Class::Trivial => LeafClass::Trivial,
            Class::Primitive => LeafClass::Primitive,
            Class::Composite => LeafClass::Unknown,
        };
        Composite {
            computon,
            tree: ParsingTree::Leaf {
                name: name.into(),
                class,
            },
        }
    }

    pub fn is_sound(&self) -> bool {
        self.tree.is_sound()
    }
}

pub fn is_sound(c: &Composite) -> bool {
    c.is_sound()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqViolation {
    ApexNotTrivial,
    LegNotMonic {
        side: &'static str,
    },
    /// Apex ports sent to non-outports of the left operand.
    LeftNotOutports {
        ports: Vec<usize>,
    },
    /// Apex ports sent to non-inports of the right operand.
    RightNotInports {
        ports: Vec<usize>,
    },
    Types,
    Devices,
}

impl fmt::Display for SeqViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqViolation::ApexNotTrivial => write!(f, "apex is not a trivial computon"),
            SeqViolation::LegNotMonic { side } => write!(f, "{side} leg is not a monomorphism"),
            SeqViolation::LeftNotOutports { ports } => write!(
                f,
                "apex ports {ports:?} are not sent to outports of the left operand"
            ),
            SeqViolation::RightNotInports { ports } => write!(
                f,
                "apex ports {ports:?} are not sent to inports of the right operand"
            ),
            SeqViolation::Types => write!(f, "apex colours do not embed in both operands"),
            SeqViolation::Devices => write!(f, "apex devices are not shared by both operands"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("span is not sequentiable: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotSequentiable(Vec<SeqViolation>),
    #[error("the {side} leg does not target the {side} operand")]
    OperandMismatch { side: &'static str },
    #[error("expected {expected} markers")]
    MarkerKind { expected: &'static str },
    #[error("markers do not share their trivial source")]
    ApexMismatch,
    #[error("the {side} operand is not connected")]
    NotConnected { side: &'static str },
    #[error("operand has no control outport")]
    NoControlOutport,
    #[error("ports `{left}` and `{right}` have different colours")]
    ColourMismatch { left: String, right: String },
    #[error("unknown port label `{label}` in the {side} operand")]
    UnknownLabel { side: &'static str, label: String },
    #[error("composite is invalid: {0}")]
    InvalidResult(ComputonError),
    #[error(transparent)]
    Colimit(#[from] ColimitError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Computon(#[from] ComputonError),
}

/// Result of an operator: the composite, its sequencing kind where
/// applicable, and the two colimit coprojections.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub composite: Composite,
    pub kind: Option<SeqKind>,
    pub coleg_left: Morphism,
    pub coleg_right: Morphism,
}

fn span_pairs(span: &Span) -> Vec<(String, String)> {
    let (l, r) = (span.left(), span.right());
    (0..span.apex().ports())
        .map(|p| {
            (
                l.target().label(l.m_p().apply(p)).to_owned(),
                r.target().label(r.m_p().apply(p)).to_owned(),
            )
        })
        .collect()
}

fn finish(
    result: ColimitResult,
    op: Operator,
    pairs: Vec<(String, String)>,
    left: &Composite,
    right: &Composite,
    kind: Option<SeqKind>,
) -> Result<Outcome, OperatorError> {
    let computon = result
        .object
        .checked()
        .map_err(OperatorError::InvalidResult)?;
    Ok(Outcome {
        composite: Composite {
            computon,
            tree: ParsingTree::Node {
                op,
                span: pairs,
                left: Box::new(left.tree.clone()),
                right: Box::new(right.tree.clone()),
            },
        },
        kind,
        coleg_left: result.coleg_left,
        coleg_right: result.coleg_right,
    })
}

fn check_operands(span: &Span, left: &Computon, right: &Computon) -> Result<(), OperatorError> {
    if span.left().target() != left {
        return Err(OperatorError::OperandMismatch { side: "left" });
    }
    if span.right().target() != right {
        return Err(OperatorError::OperandMismatch { side: "right" });
    }
    Ok(())
}

/// Every failed sequentiability condition; empty iff sequentiable.
pub fn sequentiability(span: &Span) -> Vec<SeqViolation> {
    let mut out = Vec::new();
    let apex = span.apex();
    let (l, r) = (span.left(), span.right());
    if !apex.is_trivial() {
        out.push(SeqViolation::ApexNotTrivial);
    }
    if !l.is_monomorphism() {
        out.push(SeqViolation::LegNotMonic { side: "left" });
    }
    if !r.is_monomorphism() {
        out.push(SeqViolation::LegNotMonic { side: "right" });
    }
    let bad_left: Vec<usize> = (0..apex.ports())
        .filter(|&p| !l.target().is_outport(l.m_p().apply(p)))
        .collect();
    if !bad_left.is_empty() {
        out.push(SeqViolation::LeftNotOutports { ports: bad_left });
    }
    let bad_right: Vec<usize> = (0..apex.ports())
        .filter(|&p| !r.target().is_inport(r.m_p().apply(p)))
        .collect();
    if !bad_right.is_empty() {
        out.push(SeqViolation::RightNotInports { ports: bad_right });
    }
    if apex.types() > l.target().types().min(r.target().types()) {
        out.push(SeqViolation::Types);
    }
    let (ld, rd) = (l.target().device_set(), r.target().device_set());
    if !apex
        .device_set()
        .iter()
        .all(|d| ld.contains(d) && rd.contains(d))
    {
        out.push(SeqViolation::Devices);
    }
    out
}

pub fn is_sequentiable(span: &Span) -> bool {
    sequentiability(span).is_empty()
}

/// Kind a sequentiable span would produce.
pub fn seq_kind(span: &Span) -> SeqKind {
    let (l, r) = (span.left(), span.right());
    let total = l.m_p().image() == l.target().outports() && r.m_p().image() == r.target().inports();
    if total {
        SeqKind::Total
    } else {
        SeqKind::Partial
    }
}

/// Sequential composition: the pushout of a sequentiable span.
pub fn seq(left: &Composite, right: &Composite, span: &Span) -> Result<Outcome, OperatorError> {
    check_operands(span, &left.computon, &right.computon)?;
    let violations = sequentiability(span);
    if !violations.is_empty() {
        return Err(OperatorError::NotSequentiable(violations));
    }
    let kind = seq_kind(span);
    let op = match kind {
        SeqKind::Total => Operator::TotalSeq,
        SeqKind::Partial => Operator::PartialSeq,
    };
    let result = pushout(span)?;
    finish(result, op, span_pairs(span), left, right, Some(kind))
}

/// Asynchronous parallel composition: the coproduct.
pub fn p_async(left: &Composite, right: &Composite) -> Result<Outcome, OperatorError> {
    let result = coproduct(&left.computon, &right.computon);
    finish(result, Operator::Async, vec![], left, right, None)
}

pub const GLUE_OUTPORT: &str = "join";

/// The join primitive for `async` and the span identifying all its control
/// outports, in ascending order, with the join's inports.
pub fn mk_glue_for(async_: &Computon) -> Result<(Computon, Span), OperatorError> {
    let controls: Vec<usize> = async_
        .outports()
        .into_iter()
        .filter(|&p| async_.is_control(p))
        .collect();
    let k = controls.len();
    if k == 0 {
        return Err(OperatorError::NoControlOutport);
    }
    let mut labels: Vec<String> = (0..k).map(|j| format!("sync_{j}")).collect();
    labels.push(GLUE_OUTPORT.to_owned());
    let glue = Computon::new(ComputonParts {
        units: 1,
        types: 1,
        port_labels: labels,
        colours: vec![CONTROL; k + 1],
        inflows: (0..k).map(|j| (j, 0)).collect(),
        outflows: vec![(0, k, DeviceId::builtin("epsilon"))],
        relate: vec![0; k],
    })?;
    let apex = Computon::trivial(controls.iter().map(|&p| async_.label(p)), &vec![CONTROL; k])?;
    let left = Morphism::from_tables(
        apex.clone(),
        async_.clone(),
        vec![],
        controls,
        vec![],
        vec![],
    )?;
    let right =
        Morphism::from_tables(apex, glue.clone(), vec![], (0..k).collect(), vec![], vec![])?;
    Ok((glue, Span::new(left, right)?))
}

/// Synchronous parallel composition: async followed by sequencing into a
/// join primitive.
pub fn sync(left: &Composite, right: &Composite) -> Result<Outcome, OperatorError> {
    let par = p_async(left, right)?;
    let (glue, span) = mk_glue_for(&par.composite.computon)?;
    seq(&par.composite, &Composite::leaf("glue", glue), &span)
}

fn marker_span(a: &Marker, b: &Marker) -> Result<Span, OperatorError> {
    if a.source() != b.source() {
        return Err(OperatorError::ApexMismatch);
    }
    Ok(Span::new(a.morphism().clone(), b.morphism().clone())?)
}

/// Open branching: inports are shared, outports stay apart.
pub fn bra_open(
    left: &Composite,
    right: &Composite,
    m_left: &Marker,
    m_right: &Marker,
) -> Result<Outcome, OperatorError> {
    if m_left.kind() != MarkerKind::In || m_right.kind() != MarkerKind::In {
        return Err(OperatorError::MarkerKind { expected: "in" });
    }
    let span = marker_span(m_left, m_right)?;
    check_operands(&span, &left.computon, &right.computon)?;
    let result = pushout(&span)?;
    finish(
        result,
        Operator::OpenBranch,
        span_pairs(&span),
        left,
        right,
        None,
    )
}

/// Closed branching: inports and outports are both shared.
pub fn bra_closed(
    left: &Composite,
    right: &Composite,
    in_l: &Marker,
    in_r: &Marker,
    out_l: &Marker,
    out_r: &Marker,
) -> Result<Outcome, OperatorError> {
    if in_l.kind() != MarkerKind::In || in_r.kind() != MarkerKind::In {
        return Err(OperatorError::MarkerKind { expected: "in" });
    }
    if out_l.kind() != MarkerKind::Out || out_r.kind() != MarkerKind::Out {
        return Err(OperatorError::MarkerKind { expected: "out" });
    }
    if !left.computon.is_connected() {
        return Err(OperatorError::NotConnected { side: "left" });
    }
    if !right.computon.is_connected() {
        return Err(OperatorError::NotConnected { side: "right" });
    }
    let in_span = marker_span(in_l, in_r)?;
    let out_span = marker_span(out_l, out_r)?;
    check_operands(&in_span, &left.computon, &right.computon)?;
    check_operands(&out_span, &left.computon, &right.computon)?;
    let apex = coproduct(in_l.source(), out_l.source());
    let leg_l = unique_from_coproduct(&apex, in_l.morphism(), out_l.morphism())?;
    let leg_r = unique_from_coproduct(&apex, in_r.morphism(), out_r.morphism())?;
    let span = Span::new(leg_l, leg_r)?;
    let result = pushout(&span)?;
    let mut pairs = span_pairs(&in_span);
    pairs.extend(span_pairs(&out_span));
    finish(result, Operator::ClosedBranch, pairs, left, right, None)
}

/// Trivial computon with a single control port, the identity for
/// sequencing.
pub fn control_unit() -> Computon {
    Computon::trivial(["go"], &[CONTROL]).expect("one control port is a valid trivial computon")
}

/// Span over a trivial apex identifying `left` port `pairs[k].0` with
/// `right` port `pairs[k].1`. Apex labels come from the left operand.
pub fn span_from_pairs(
    left: &Computon,
    right: &Computon,
    pairs: &[(usize, usize)],
) -> Result<Span, OperatorError> {
    let mut colours = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        if a >= left.ports() || b >= right.ports() {
            return Err(OperatorError::Computon(ComputonError::OutOfRange {
                kind: "port",
                index: if a >= left.ports() { a } else { b },
                card: if a >= left.ports() {
                    left.ports()
                } else {
                    right.ports()
                },
            }));
        }
        let (ca, cb) = (left.colour().apply(a), right.colour().apply(b));
        if ca != cb {
            return Err(OperatorError::ColourMismatch {
                left: left.label(a).to_owned(),
                right: right.label(b).to_owned(),
            });
        }
        colours.push(ca);
    }
    let apex = Computon::trivial(pairs.iter().map(|&(a, _)| left.label(a)), &colours)?;
    let l = Morphism::from_tables(
        apex.clone(),
        left.clone(),
        vec![],
        pairs.iter().map(|p| p.0).collect(),
        vec![],
        vec![],
    )?;
    let r = Morphism::from_tables(
        apex,
        right.clone(),
        vec![],
        pairs.iter().map(|p| p.1).collect(),
        vec![],
        vec![],
    )?;
    Ok(Span::new(l, r)?)
}

/// Same as [`span_from_pairs`] with ports named by label.
pub fn span_from_labels(
    left: &Computon,
    right: &Computon,
    pairs: &[(&str, &str)],
) -> Result<Span, OperatorError> {
    let mut idx = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let pa = left
            .port_by_label(a)
            .ok_or_else(|| OperatorError::UnknownLabel {
                side: "left",
                label: a.to_owned(),
            })?;
        let pb = right
            .port_by_label(b)
            .ok_or_else(|| OperatorError::UnknownLabel {
                side: "right",
                label: b.to_owned(),
            })?;
        idx.push((pa, pb));
    }
    span_from_pairs(left, right, &idx)
}

/// The one-control-port sequentiable span: first control outport of `left`
/// glued to first control inport of `right`.
pub fn control_span(left: &Computon, right: &Computon) -> Result<Span, OperatorError> {
    let out = left
        .outports()
        .into_iter()
        .find(|&p| left.is_control(p))
        .ok_or(OperatorError::NoControlOutport)?;
    let inp = right
        .inports()
        .into_iter()
        .find(|&p| right.is_control(p))
        .ok_or(OperatorError::Computon(ComputonError::Invalid(vec![
            crate::computon::Violation::NoControlInport,
        ])))?;
    span_from_pairs(left, right, &[(out, inp)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::computon::PrimitiveSpec;
    use crate::iso::computons_isomorphic;

    fn binary(names: [&str; 5], colours: [usize; 5], device: &str) -> Computon {
        Computon::primitive(PrimitiveSpec {
            ports: names
                .iter()
                .zip(colours)
                .map(|(n, c)| (n.to_string(), c))
                .collect(),
            inputs: vec![0, 1, 2],
            outputs: vec![
                (3, DeviceId::builtin("epsilon")),
                (4, DeviceId::builtin(device)),
            ],
            relate: vec![0, 1, 1],
            types: None,
        })
        .unwrap()
    }

    fn mul() -> Computon {
        binary(
            ["go", "a", "b", "mul_done", "product"],
            [0, 1, 1, 0, 1],
            "mul",
        )
    }

    fn add() -> Computon {
        binary(["add_go", "x", "c", "done", "sum"], [0, 1, 2, 0, 2], "add")
    }

    fn unary(labels: [&str; 4], device: &str) -> Computon {
        Computon::primitive(PrimitiveSpec {
            ports: labels
                .iter()
                .zip([0, 1, 0, 1])
                .map(|(n, c)| (n.to_string(), c))
                .collect(),
            inputs: vec![0, 1],
            outputs: vec![
                (2, DeviceId::builtin("epsilon")),
                (3, DeviceId::builtin(device)),
            ],
            relate: vec![0, 1],
            types: None,
        })
        .unwrap()
    }

    #[test]
    fn partial_and_total_sequencing() {
        let (l1, l2) = (Composite::leaf("mul", mul()), Composite::leaf("add", add()));
        let span = span_from_labels(
            &l1.computon,
            &l2.computon,
            &[("mul_done", "add_go"), ("product", "x")],
        )
        .unwrap();
        let out = seq(&l1, &l2, &span).unwrap();
        assert_eq!(out.kind, Some(SeqKind::Partial));
        assert_eq!(out.composite.computon.ports(), 8);
        assert!(out.composite.computon.port_by_label("c").is_some());
        assert!(out.composite.is_sound());
        assert_eq!(out.composite.tree.height(), 1);

        let l3 = Composite::leaf("succ", unary(["s_go", "n", "s_done", "out"], "succ"));
        let span = span_from_labels(
            &l1.computon,
            &l3.computon,
            &[("mul_done", "s_go"), ("product", "n")],
        )
        .unwrap();
        let out = seq(&l1, &l3, &span).unwrap();
        assert_eq!(out.kind, Some(SeqKind::Total));
        assert_eq!(out.composite.tree.operators(), vec![Operator::TotalSeq]);
    }

    #[test]
    fn gluing_an_inport_on_the_left_is_not_sequentiable() {
        let (l1, l2) = (Composite::leaf("mul", mul()), Composite::leaf("add", add()));
        let span = span_from_labels(&l1.computon, &l2.computon, &[("go", "add_go")]).unwrap();
        let err = seq(&l1, &l2, &span).unwrap_err();
        assert_eq!(
            err,
            OperatorError::NotSequentiable(vec![SeqViolation::LeftNotOutports { ports: vec![0] }])
        );
    }

    #[test]
    fn control_unit_is_a_sequencing_identity() {
        let m = Composite::leaf("mul", mul());
        let id = Composite::leaf("id", control_unit());
        let span = control_span(&id.computon, &m.computon).unwrap();
        let left = seq(&id, &m, &span).unwrap();
        assert!(computons_isomorphic(&left.composite.computon, &m.computon));
        let span = control_span(&m.computon, &id.computon).unwrap();
        let right = seq(&m, &id, &span).unwrap();
        assert!(computons_isomorphic(&right.composite.computon, &m.computon));
    }

    #[test]
    fn async_and_sync() {
        let (l1, l2) = (Composite::leaf("mul", mul()), Composite::leaf("add", add()));
        let a = p_async(&l1, &l2).unwrap();
        assert_eq!(a.composite.computon.ports(), 10);
        let (glue, _) = mk_glue_for(&a.composite.computon).unwrap();
        assert!(glue.is_primitive());
        assert_eq!((glue.ports(), glue.units()), (3, 1));

        let s = sync(&l1, &l2).unwrap();
        let c = &s.composite.computon;
        assert_eq!(s.kind, Some(SeqKind::Partial));
        let control_out: Vec<_> = c
            .outports()
            .into_iter()
            .filter(|&p| c.is_control(p))
            .collect();
        assert_eq!(control_out.len(), 1);
        assert_eq!(c.label(control_out[0]), GLUE_OUTPORT);
        assert!(computons_isomorphic(
            c,
            &sync(&l2, &l1).unwrap().composite.computon
        ));
        assert!(s.composite.is_sound());

        let e1 = Composite::leaf("e1", unary(["g", "v", "d", "w"], "succ"));
        let pure = |n: &str| {
            Composite::leaf(
                n,
                Computon::primitive(PrimitiveSpec {
                    ports: vec![("i".into(), 0), ("o".into(), 0)],
                    inputs: vec![0],
                    outputs: vec![(1, DeviceId::builtin("epsilon"))],
                    relate: vec![0],
                    types: None,
                })
                .unwrap(),
            )
        };
        assert_eq!(
            sync(&pure("p"), &pure("q")).unwrap().kind,
            Some(SeqKind::Total)
        );
        assert_eq!(sync(&e1, &pure("q")).unwrap().kind, Some(SeqKind::Partial));
    }

    #[test]
    fn branching() {
        let s = Composite::leaf("succ", unary(["go", "n", "done", "out"], "succ"));
        let f = Composite::leaf("fact", unary(["go", "n", "done", "out"], "fact"));
        let in_s = Marker::canonical(MarkerKind::In, &s.computon).unwrap();
        let in_f = Marker::canonical(MarkerKind::In, &f.computon).unwrap();
        let out_s = Marker::canonical(MarkerKind::Out, &s.computon).unwrap();
        let out_f = Marker::canonical(MarkerKind::Out, &f.computon).unwrap();

        let open = bra_open(&s, &f, &in_s, &in_f).unwrap();
        assert_eq!(open.composite.computon.ports(), 6);
        let closed = bra_closed(&s, &f, &in_s, &in_f, &out_s, &out_f).unwrap();
        let c = &closed.composite.computon;
        assert_eq!((c.ports(), c.units()), (4, 2));
        assert_eq!(c.labels(), &["go", "n", "done", "out"]);
        assert_eq!(
            closed.composite.tree.operators(),
            vec![Operator::ClosedBranch]
        );

        let t = Composite::leaf("t", Computon::trivial(["go", "n"], &[0, 1]).unwrap());
        let in_t = Marker::canonical(MarkerKind::In, &t.computon).unwrap();
        let out_t = Marker::canonical(MarkerKind::Out, &t.computon).unwrap();
        let err = bra_closed(&t, &f, &in_t, &in_f, &out_t, &out_f).unwrap_err();
        assert_eq!(err, OperatorError::NotConnected { side: "left" });
    }

    #[test]
    fn unknown_leaves_are_unsound() {
        let (l1, l2) = (Composite::leaf("mul", mul()), Composite::leaf("add", add()));
        let a = p_async(&l1, &l2).unwrap().composite;
        let wrapped = Composite::leaf("blob", a.computon.clone());
        assert_eq!(wrapped.tree.leaves(), vec![("blob", LeafClass::Unknown)]);
        assert!(!wrapped.is_sound());
        assert!(a.is_sound());
    }
}
