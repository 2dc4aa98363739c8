//! Fixtures, generators and independent oracles shared by the integration
//! tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use computon::colimit::Span;
use computon::computon::{Computon, ComputonParts, DeviceId, PrimitiveSpec};
use computon::finset::FinMap;
use computon::morphism::{Marker, MarkerKind, Morphism};
use computon::operators::{self, Composite, Outcome, SeqKind};
use computon::runtime::{CompiledComputon, Trace};
use computon::value::Value;
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- fixtures

pub fn binary(labels: [&str; 5], colours: [usize; 5], device: &str) -> Computon {
    Computon::primitive(PrimitiveSpec {
        ports: labels
            .iter()
            .zip(colours)
            .map(|(l, c)| (l.to_string(), c))
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

pub fn unary(labels: [&str; 4], device: &str, out_colour: usize) -> Computon {
    Computon::primitive(PrimitiveSpec {
        ports: labels
            .iter()
            .zip([0, 1, 0, out_colour])
            .map(|(l, c)| (l.to_string(), c))
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

/// Multiplication: go, a, b in; mul_done, product out.
pub fn mul() -> Composite {
    Composite::leaf(
        "mul",
        binary(
            ["go", "a", "b", "mul_done", "product"],
            [0, 1, 1, 0, 1],
            "mul",
        ),
    )
}

/// Addition of an integer and a float.
pub fn add() -> Composite {
    Composite::leaf(
        "add",
        binary(["add_go", "x", "c", "done", "sum"], [0, 1, 2, 0, 2], "add"),
    )
}

pub fn succ() -> Composite {
    Composite::leaf("succ", unary(["go", "n", "done", "out"], "succ", 1))
}

pub fn fact() -> Composite {
    Composite::leaf("fact", unary(["go", "n", "done", "out"], "fact", 1))
}

/// Predecessor whose result carries colour 2.
pub fn pred() -> Composite {
    Composite::leaf("pred", unary(["go", "n", "done", "out"], "pred", 2))
}

fn seq_by_labels(l: &Composite, r: &Composite, pairs: &[(&str, &str)]) -> Outcome {
    let span = operators::span_from_labels(&l.computon, &r.computon, pairs).unwrap();
    operators::seq(l, r, &span).unwrap()
}

/// Partial sequence: the sum's float inport stays on the interface.
pub fn mul_then_add() -> Outcome {
    seq_by_labels(&mul(), &add(), &[("mul_done", "add_go"), ("product", "x")])
}

/// Total sequence of multiplication and successor.
pub fn mul_then_succ() -> Outcome {
    seq_by_labels(&mul(), &succ(), &[("mul_done", "go"), ("product", "n")])
}

pub fn mul_sync_add() -> Outcome {
    operators::sync(&mul(), &add()).unwrap()
}

pub fn succ_or_pred() -> Outcome {
    let (s, p) = (succ(), pred());
    let in_s = Marker::canonical(MarkerKind::In, &s.computon).unwrap();
    let in_p = Marker::canonical(MarkerKind::In, &p.computon).unwrap();
    operators::bra_open(&s, &p, &in_s, &in_p).unwrap()
}

pub fn succ_or_fact() -> Outcome {
    let (s, f) = (succ(), fact());
    let m = |k, c: &Composite| Marker::canonical(k, &c.computon).unwrap();
    operators::bra_closed(
        &s,
        &f,
        &m(MarkerKind::In, &s),
        &m(MarkerKind::In, &f),
        &m(MarkerKind::Out, &s),
        &m(MarkerKind::Out, &f),
    )
    .unwrap()
}

pub fn inputs(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

// ----------------------------------------------------------------- oracles

/// Pushout of finite sets by union-find over `Y ⊔ Z`, classes numbered by
/// first appearance scanning `Y` then `Z`.
pub fn uf_pushout(
    g: &[usize],
    h: &[usize],
    ny: usize,
    nz: usize,
) -> (usize, Vec<usize>, Vec<usize>) {
    let mut parent: Vec<usize> = (0..ny + nz).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (&y, &z) in g.iter().zip(h) {
        let (a, b) = (find(&mut parent, y), find(&mut parent, ny + z));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut number = HashMap::new();
    let mut classes = Vec::with_capacity(ny + nz);
    for e in 0..ny + nz {
        let root = find(&mut parent, e);
        let next = number.len();
        classes.push(*number.entry(root).or_insert(next));
    }
    (number.len(), classes[..ny].to_vec(), classes[ny..].to_vec())
}

/// Renumbers a pair of coprojections by first appearance over `Y` then `Z`.
pub fn canonical(iy: &[usize], iz: &[usize]) -> (usize, Vec<usize>, Vec<usize>) {
    let mut number = HashMap::new();
    let mut out = Vec::new();
    for &q in iy.iter().chain(iz) {
        let next = number.len();
        out.push(*number.entry(q).or_insert(next));
    }
    let (a, b) = out.split_at(iy.len());
    (number.len(), a.to_vec(), b.to_vec())
}

/// All functions `{0..n} -> {0..m}` as tables.
pub fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for t in &out {
            for v in 0..m {
                let mut t = t.clone();
                t.push(v);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

pub fn injective(t: &[usize]) -> bool {
    let mut s = t.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

pub fn finmap(cod: usize, t: &[usize]) -> FinMap {
    FinMap::from_table(cod, t.to_vec()).unwrap()
}

// ------------------------------------------------------------- generators

const DEVICES: [&str; 5] = ["epsilon", "mul", "add", "succ", "fact"];

fn device<R: Rng>(rng: &mut R) -> DeviceId {
    DeviceId::builtin(DEVICES[rng.random_range(0..DEVICES.len())])
}

/// A random valid computon with up to `max_units` units; flows may form
/// cycles and share ports.
pub fn random_computon<R: Rng>(rng: &mut R, max_units: usize) -> Computon {
    let types = rng.random_range(1..=3);
    let units = rng.random_range(0..=max_units);
    // port 0 is never written, port 1 never read
    let mut colours = vec![0usize, 0];
    for _ in 0..rng.random_range(0..=2) {
        colours.push(rng.random_range(0..types));
    }
    let mut inflows = Vec::new();
    let mut outflows = Vec::new();
    let mut relate = Vec::new();
    for u in 0..units {
        let k_out = rng.random_range(1..=2);
        let k_in = rng.random_range(k_out..=k_out + 1);
        let first_out = outflows.len();
        for j in 0..k_out {
            let target = pick_port(rng, &mut colours, types, j == 0, 0);
            outflows.push((
                u,
                target,
                if j == 0 && rng.random_bool(0.7) {
                    DeviceId::builtin("epsilon")
                } else {
                    device(rng)
                },
            ));
        }
        for j in 0..k_in {
            let source = pick_port(rng, &mut colours, types, j == 0, 1);
            inflows.push((source, u));
            relate.push(if j < k_out {
                first_out + j
            } else {
                first_out + rng.random_range(0..k_out)
            });
        }
    }
    let port_labels = (0..colours.len()).map(|p| format!("p{p}")).collect();
    Computon::new(ComputonParts {
        units,
        types,
        port_labels,
        colours,
        inflows,
        outflows,
        relate,
    })
    .unwrap()
}

/// A port other than `avoid`, control when asked; sometimes a new one.
fn pick_port<R: Rng>(
    rng: &mut R,
    colours: &mut Vec<usize>,
    types: usize,
    control: bool,
    avoid: usize,
) -> usize {
    if rng.random_bool(0.35) {
        colours.push(if control {
            0
        } else {
            rng.random_range(0..types)
        });
        return colours.len() - 1;
    }
    let candidates: Vec<usize> = (0..colours.len())
        .filter(|&p| p != avoid && (!control || colours[p] == 0))
        .collect();
    candidates[rng.random_range(0..candidates.len())]
}

/// Colour list of length `len` containing at least one control colour.
pub fn interface_colours<R: Rng>(rng: &mut R, len: usize, types: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..len).map(|_| rng.random_range(0..types)).collect();
    v[0] = 0;
    v.shuffle(rng);
    v
}

/// A primitive with the given inport and outport colours, ports shuffled.
/// Requires at least as many inports as outports.
pub fn primitive_with<R: Rng>(
    rng: &mut R,
    prefix: &str,
    ins: &[usize],
    outs: &[usize],
    types: usize,
) -> Computon {
    assert!(ins.len() >= outs.len() && !outs.is_empty());
    let n = ins.len() + outs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut ports = vec![(String::new(), 0); n];
    for (k, &slot) in order.iter().enumerate() {
        let colour = if k < ins.len() {
            ins[k]
        } else {
            outs[k - ins.len()]
        };
        ports[slot] = (format!("{prefix}{k}"), colour);
    }
    let inputs: Vec<usize> = order[..ins.len()].to_vec();
    let outputs: Vec<(usize, DeviceId)> = order[ins.len()..]
        .iter()
        .map(|&p| (p, device(rng)))
        .collect();
    let relate = (0..ins.len())
        .map(|j| {
            if j < outs.len() {
                j
            } else {
                rng.random_range(0..outs.len())
            }
        })
        .collect();
    Computon::primitive(PrimitiveSpec {
        ports,
        inputs,
        outputs,
        relate,
        types: Some(types),
    })
    .unwrap()
}

/// Pairs each port in `left_ports` with a distinct port of the same colour
/// in `right_ports`, randomly within colours. Fails if the colour multisets
/// differ.
pub fn colour_matching<R: Rng>(
    rng: &mut R,
    left: &Computon,
    left_ports: &[usize],
    right: &Computon,
    right_ports: &[usize],
) -> Option<Vec<(usize, usize)>> {
    if left_ports.len() != right_ports.len() {
        return None;
    }
    let mut pool: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &q in right_ports {
        pool.entry(right.colour().apply(q)).or_default().push(q);
    }
    for v in pool.values_mut() {
        v.shuffle(rng);
    }
    left_ports
        .iter()
        .map(|&p| {
            pool.get_mut(&left.colour().apply(p))
                .and_then(|v| v.pop())
                .map(|q| (p, q))
        })
        .collect()
}

/// Total sequentiable span: every outport of `l` against every inport of `r`.
pub fn total_span<R: Rng>(rng: &mut R, l: &Computon, r: &Computon) -> Span {
    let pairs = colour_matching(rng, l, &l.outports(), r, &r.inports()).expect("interfaces match");
    operators::span_from_pairs(l, r, &pairs).unwrap()
}

/// A connected computon with the given interface colours: a primitive, or a
/// total sequence of two primitives.
pub fn component<R: Rng>(
    rng: &mut R,
    name: &str,
    ins: &[usize],
    outs: &[usize],
    types: usize,
) -> Composite {
    if rng.random_bool(0.5) || ins.len() == 1 {
        return Composite::leaf(
            name,
            primitive_with(rng, &format!("{name}_"), ins, outs, types),
        );
    }
    let mid_len = rng.random_range(outs.len()..=ins.len());
    let mid = interface_colours(rng, mid_len, types);
    let a = Composite::leaf(
        format!("{name}a"),
        primitive_with(rng, &format!("{name}a_"), ins, &mid, types),
    );
    let b = Composite::leaf(
        format!("{name}b"),
        primitive_with(rng, &format!("{name}b_"), &mid, outs, types),
    );
    let span = total_span(rng, &a.computon, &b.computon);
    operators::seq(&a, &b, &span).unwrap().composite
}

/// Marker from `apex` onto the interface of `target` sending apex port `k`
/// to a port of equal colour, randomly within colours.
pub fn marker_onto<R: Rng>(
    rng: &mut R,
    kind: MarkerKind,
    apex: &Computon,
    target: &Computon,
) -> Marker {
    let ports = match kind {
        MarkerKind::In => target.inports(),
        MarkerKind::Out => target.outports(),
    };
    let all: Vec<usize> = (0..apex.ports()).collect();
    let pairs = colour_matching(rng, apex, &all, target, &ports).expect("interfaces match");
    let m_p = pairs.into_iter().map(|(_, q)| q).collect();
    Marker::new(kind, apex.clone(), target.clone(), m_p).unwrap()
}

// ------------------------------------------------------------------ checks

fn image(m: &Morphism, ports: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = ports.iter().map(|&p| m.m_p().apply(p)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Interface inclusions of a sequential composite, equality for total ones,
/// and monic colegs.
pub fn seq_interface_violations(left: &Computon, right: &Computon, out: &Outcome) -> Vec<String> {
    let mut v = Vec::new();
    let c = &out.composite.computon;
    let (ins, outs) = (c.inports(), c.outports());
    let li = image(&out.coleg_left, &left.inports());
    let ro = image(&out.coleg_right, &right.outports());
    if !subset(&li, &ins) {
        v.push(format!(
            "left inports {li:?} not inside composite inports {ins:?}"
        ));
    }
    if !subset(&ro, &outs) {
        v.push(format!(
            "right outports {ro:?} not inside composite outports {outs:?}"
        ));
    }
    if out.kind == Some(SeqKind::Total) {
        if li != ins {
            v.push(format!(
                "total: left inports {li:?} != composite inports {ins:?}"
            ));
        }
        if ro != outs {
            v.push(format!(
                "total: right outports {ro:?} != composite outports {outs:?}"
            ));
        }
    }
    if !out.coleg_left.is_monomorphism() || !out.coleg_right.is_monomorphism() {
        v.push("coleg is not a monomorphism".into());
    }
    v
}

/// Typing, frame and consumption conditions along a trace.
pub fn trace_violations(cc: &CompiledComputon, trace: &Trace) -> Vec<String> {
    let mut v = Vec::new();
    let typed = |values: &[Value]| {
        values
            .iter()
            .enumerate()
            .all(|(p, x)| x.is_absent() || x.value_type() == Some(cc.port_type(p)))
    };
    for e in &trace.entries {
        if !typed(&e.values) {
            v.push(format!("state at time {} is ill-typed", e.time));
        }
    }
    for w in trace.entries.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        if next.time != prev.time + 1 {
            v.push(format!("time jumps from {} to {}", prev.time, next.time));
        }
        let mut pre = vec![false; prev.values.len()];
        let mut post = vec![false; prev.values.len()];
        for &u in &next.ready {
            for &p in cc.pre_set(u) {
                pre[p] = true;
            }
            for &p in cc.post_set(u) {
                post[p] = true;
            }
        }
        for p in 0..prev.values.len() {
            if !pre[p] && !post[p] && prev.values[p] != next.values[p] {
                v.push(format!(
                    "frame: port {} changed at time {}",
                    cc.label(p),
                    next.time
                ));
            }
            if pre[p] && !post[p] && !next.values[p].is_absent() {
                v.push(format!(
                    "consumption: port {} kept at time {}",
                    cc.label(p),
                    next.time
                ));
            }
        }
    }
    v
}
