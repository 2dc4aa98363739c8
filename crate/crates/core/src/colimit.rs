//! Coproducts and pushouts of computons.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::computon::{Computon, ComputonError};
use crate::finset::{disjoint_union, find_eq, pushout_fns, DisjointUnion, FinMap, PushoutFns};
use crate::morphism::{Morphism, MorphismError};

/// Two morphisms out of a common apex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    left: Morphism,
    right: Morphism,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColimitError {
    #[error("span legs have different sources")]
    ApexMismatch,
    #[error("span is not pushable: {}", join(.0))]
    NotPushable(Vec<PushabilityViolation>),
    #[error("mediating morphisms must share a target")]
    TargetMismatch,
    #[error("mediating morphisms do not start at the coproduct operands")]
    OperandMismatch,
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Computon(#[from] ComputonError),
}

fn join(vs: &[PushabilityViolation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PushabilityViolation {
    /// Apex ports, boundary for one leg, landing inside the other operand.
    Boundary {
        side: &'static str,
        ports: Vec<usize>,
    },
    Types {
        apex: usize,
        left: usize,
        right: usize,
    },
    Devices {
        missing: Vec<String>,
    },
    /// Operand ports that the span identifies with other ports of the same
    /// operand, gaining flows while not being interface ports. Only a leg
    /// that is not injective on ports can cause this.
    Identification {
        side: &'static str,
        ports: Vec<usize>,
    },
}

impl fmt::Display for PushabilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PushabilityViolation::Boundary { side, ports } => write!(
                f,
                "boundary: apex ports {ports:?} are glued onto interior ports of the {side} operand"
            ),
            PushabilityViolation::Types { apex, left, right } => write!(
                f,
                "types: apex has {apex} colours, operands {left} and {right}"
            ),
            PushabilityViolation::Devices { missing } => {
                write!(f, "devices: apex devices {missing:?} missing from an operand")
            }
            PushabilityViolation::Identification { side, ports } => write!(
                f,
                "identification: interior ports {ports:?} of the {side} operand are merged with ports carrying other flows"
            ),
        }
    }
}

impl Span {
    pub fn new(left: Morphism, right: Morphism) -> Result<Self, ColimitError> {
        if left.source() != right.source() {
            return Err(ColimitError::ApexMismatch);
        }
        Ok(Span { left, right })
    }

    pub fn apex(&self) -> &Computon {
        self.left.source()
    }
    pub fn left(&self) -> &Morphism {
        &self.left
    }
    pub fn right(&self) -> &Morphism {
        &self.right
    }

    pub fn swapped(&self) -> Span {
        Span {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    /// Every violated pushability clause; empty iff pushable.
    pub fn pushability(&self) -> Vec<PushabilityViolation> {
        let mut out = Vec::new();
        for (side, this, other) in [
            ("left", &self.left, &self.right),
            ("right", &self.right, &self.left),
        ] {
            let target = this.target();
            let ports: Vec<usize> = other
                .boundary_ports()
                .into_iter()
                .filter(|&p| {
                    let q = this.m_p().apply(p);
                    !(target.is_inport(q) || target.is_outport(q))
                })
                .collect();
            if !ports.is_empty() {
                out.push(PushabilityViolation::Boundary { side, ports });
            }
        }
        let (a, l, r) = (
            self.apex().types(),
            self.left.target().types(),
            self.right.target().types(),
        );
        if a > l.min(r) {
            out.push(PushabilityViolation::Types {
                apex: a,
                left: l,
                right: r,
            });
        }
        let lset = self.left.target().device_set();
        let rset = self.right.target().device_set();
        let missing: Vec<String> = self
            .apex()
            .device_set()
            .into_iter()
            .filter(|d| !lset.contains(d) || !rset.contains(d))
            .map(|d| d.to_string())
            .collect();
        if !missing.is_empty() {
            out.push(PushabilityViolation::Devices { missing });
        }
        if out.is_empty() {
            out.extend(self.identification());
        }
        out
    }

    /// The boundary, types and devices clauses alone, without the
    /// identification check.
    pub fn satisfies_gluing_clauses(&self) -> bool {
        self.pushability()
            .iter()
            .all(|v| matches!(v, PushabilityViolation::Identification { .. }))
    }

    fn identification(&self) -> Vec<PushabilityViolation> {
        let Ok(raw) = pushout_raw(self) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (side, coleg) in [("left", &raw.left), ("right", &raw.right)] {
            let src = coleg.source();
            let ports: Vec<usize> = coleg
                .boundary_ports()
                .into_iter()
                .filter(|&p| !(src.is_inport(p) || src.is_outport(p)))
                .collect();
            if !ports.is_empty() {
                out.push(PushabilityViolation::Identification { side, ports });
            }
        }
        out
    }

    pub fn is_pushable(&self) -> bool {
        self.pushability().is_empty()
    }
}

/// A colimit object with its two coprojections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColimitResult {
    pub object: Computon,
    pub coleg_left: Morphism,
    pub coleg_right: Morphism,
}

/// Set-level pushout data before any validation.
#[derive(Debug, Clone)]
pub struct RawPushout {
    pub object: Computon,
    pub left: Morphism,
    pub right: Morphism,
}

/// Labels of the right operand that clash with labels already in use get a
/// `#k` suffix, `k` the smallest integer from 2 that is free.
fn disambiguate(label: &str, used: &mut HashSet<String>) -> String {
    if used.insert(label.to_owned()) {
        return label.to_owned();
    }
    let mut k = 2;
    loop {
        let candidate = format!("{label}#{k}");
        if used.insert(candidate.clone()) {
            return candidate;
        }
        k += 1;
    }
}

/// Side-by-side juxtaposition of two computons.
pub fn coproduct(a: &Computon, b: &Computon) -> ColimitResult {
    let du_u = disjoint_union(a.units().into(), b.units().into());
    let du_p = disjoint_union(a.ports().into(), b.ports().into());
    let du_i = disjoint_union(a.inflows().into(), b.inflows().into());
    let du_o = disjoint_union(a.outflows().into(), b.outflows().into());
    let sourcewise = |dom: &DisjointUnion, cod: &DisjointUnion, f: &FinMap, g: &FinMap| {
        let table = (0..dom.size).map(|x| find_eq(dom, cod, x, f, g)).collect();
        FinMap::new(dom.size, cod.size, table).expect("sourcewise map is total")
    };
    let src = sourcewise(&du_i, &du_p, a.src(), b.src());
    let tgt = sourcewise(&du_o, &du_p, a.tgt(), b.tgt());
    let in_unit = sourcewise(&du_i, &du_u, a.in_unit(), b.in_unit());
    let out_unit = sourcewise(&du_o, &du_u, a.out_unit(), b.out_unit());
    let relate = sourcewise(&du_i, &du_o, a.relate(), b.relate());
    let types = a.types().max(b.types());
    let colour = FinMap::new(
        du_p.size,
        types,
        a.colour()
            .table()
            .iter()
            .chain(b.colour().table())
            .copied()
            .collect(),
    )
    .expect("colours fit the larger type set");
    let device = a.devices().iter().chain(b.devices()).cloned().collect();
    let mut used: HashSet<String> = a.labels().iter().cloned().collect();
    let mut labels = a.labels().to_vec();
    for l in b.labels() {
        labels.push(disambiguate(l, &mut used));
    }
    let object = Computon::from_maps_unchecked(
        du_u.size, types, src, tgt, out_unit, in_unit, colour, relate, device, labels,
    )
    .expect("coproduct shapes agree");
    let coleg_left = Morphism::assemble(
        a.clone(),
        object.clone(),
        [du_u.inj_left, du_p.inj_left, du_i.inj_left, du_o.inj_left],
    );
    let coleg_right = Morphism::assemble(
        b.clone(),
        object.clone(),
        [
            du_u.inj_right,
            du_p.inj_right,
            du_i.inj_right,
            du_o.inj_right,
        ],
    );
    ColimitResult {
        object,
        coleg_left,
        coleg_right,
    }
}

/// Representative of each pushout class: lowest left preimage, else lowest
/// right preimage.
fn representatives(po: &PushoutFns) -> Vec<Result<usize, usize>> {
    let mut rep: Vec<Option<Result<usize, usize>>> = vec![None; po.size];
    for (y, &q) in po.i_y.table().iter().enumerate() {
        if rep[q].is_none() {
            rep[q] = Some(Ok(y));
        }
    }
    for (z, &q) in po.i_z.table().iter().enumerate() {
        if rep[q].is_none() {
            rep[q] = Some(Err(z));
        }
    }
    rep.into_iter()
        .map(|r| r.expect("pushout coprojections are jointly surjective"))
        .collect()
}

/// Pushout of the underlying sets and structure maps, without the
/// pushability gate. The colegs may fail morphism validation when the span
/// is not pushable.
pub fn pushout_raw(span: &Span) -> Result<RawPushout, ColimitError> {
    let (l, r) = (span.left(), span.right());
    let (a, b) = (l.target(), r.target());
    let fin = |e| ColimitError::Computon(ComputonError::from(e));
    let pu = pushout_fns(l.m_u(), r.m_u()).map_err(fin)?;
    let pp = pushout_fns(l.m_p(), r.m_p()).map_err(fin)?;
    let pi = pushout_fns(l.m_i(), r.m_i()).map_err(fin)?;
    let po = pushout_fns(l.m_o(), r.m_o()).map_err(fin)?;

    // value of a structure map at a class, read off its representative
    fn induced(
        reps: &[Result<usize, usize>],
        left_map: &FinMap,
        right_map: &FinMap,
        into: &PushoutFns,
    ) -> Vec<usize> {
        reps.iter()
            .map(|rep| match *rep {
                Ok(y) => into.i_y.apply(left_map.apply(y)),
                Err(z) => into.i_z.apply(right_map.apply(z)),
            })
            .collect()
    }
    let reps_p = representatives(&pp);
    let reps_i = representatives(&pi);
    let reps_o = representatives(&po);
    let src =
        FinMap::new(pi.size, pp.size, induced(&reps_i, a.src(), b.src(), &pp)).map_err(fin)?;
    let in_unit = FinMap::new(
        pi.size,
        pu.size,
        induced(&reps_i, a.in_unit(), b.in_unit(), &pu),
    )
    .map_err(fin)?;
    let relate = FinMap::new(
        pi.size,
        po.size,
        induced(&reps_i, a.relate(), b.relate(), &po),
    )
    .map_err(fin)?;
    let tgt =
        FinMap::new(po.size, pp.size, induced(&reps_o, a.tgt(), b.tgt(), &pp)).map_err(fin)?;
    let out_unit = FinMap::new(
        po.size,
        pu.size,
        induced(&reps_o, a.out_unit(), b.out_unit(), &pu),
    )
    .map_err(fin)?;
    let types = a.types().max(b.types());
    let colour_table = reps_p
        .iter()
        .map(|rep| match *rep {
            Ok(y) => a.colour().apply(y),
            Err(z) => b.colour().apply(z),
        })
        .collect();
    let colour = FinMap::new(pp.size, types, colour_table).map_err(fin)?;
    let device = reps_o
        .iter()
        .map(|rep| match *rep {
            Ok(y) => a.device(y).clone(),
            Err(z) => b.device(z).clone(),
        })
        .collect();
    let mut used: HashSet<String> = HashSet::new();
    let mut labels = vec![String::new(); pp.size];
    for (q, rep) in reps_p.iter().enumerate() {
        if let Ok(y) = *rep {
            labels[q] = a.label(y).to_owned();
            used.insert(labels[q].clone());
        }
    }
    for (q, rep) in reps_p.iter().enumerate() {
        if let Err(z) = *rep {
            labels[q] = disambiguate(b.label(z), &mut used);
        }
    }
    let object = Computon::from_maps_unchecked(
        pu.size, types, src, tgt, out_unit, in_unit, colour, relate, device, labels,
    )?;
    let left = Morphism::assemble(a.clone(), object.clone(), [pu.i_y, pp.i_y, pi.i_y, po.i_y]);
    let right = Morphism::assemble(b.clone(), object.clone(), [pu.i_z, pp.i_z, pi.i_z, po.i_z]);
    Ok(RawPushout {
        object,
        left,
        right,
    })
}

/// Pushout of a span; succeeds exactly when the span is pushable.
pub fn pushout(span: &Span) -> Result<ColimitResult, ColimitError> {
    let violations = span.pushability();
    if !violations.is_empty() {
        return Err(ColimitError::NotPushable(violations));
    }
    let raw = pushout_raw(span)?;
    debug_assert!(raw.left.check().is_ok(), "{:?}", raw.left.check());
    debug_assert!(raw.right.check().is_ok(), "{:?}", raw.right.check());
    Ok(ColimitResult {
        object: raw.object,
        coleg_left: raw.left,
        coleg_right: raw.right,
    })
}

/// The mediating morphism `[f, g]` out of a coproduct.
pub fn unique_from_coproduct(
    copr: &ColimitResult,
    f: &Morphism,
    g: &Morphism,
) -> Result<Morphism, ColimitError> {
    if f.target() != g.target() {
        return Err(ColimitError::TargetMismatch);
    }
    if f.source() != copr.coleg_left.source() || g.source() != copr.coleg_right.source() {
        return Err(ColimitError::OperandMismatch);
    }
    let target = f.target().clone();
    let glue = |inj_l: &FinMap, inj_r: &FinMap, fm: &FinMap, gm: &FinMap| {
        let n = inj_l.cod().card();
        let mut table = vec![usize::MAX; n];
        for (x, &y) in inj_l.table().iter().enumerate() {
            table[y] = fm.apply(x);
        }
        for (x, &y) in inj_r.table().iter().enumerate() {
            table[y] = gm.apply(x);
        }
        FinMap::new(n, fm.cod().card(), table)
    };
    let (cl, cr) = (&copr.coleg_left, &copr.coleg_right);
    let fin = |e| ColimitError::Computon(ComputonError::from(e));
    let maps = [
        glue(cl.m_u(), cr.m_u(), f.m_u(), g.m_u()).map_err(fin)?,
        glue(cl.m_p(), cr.m_p(), f.m_p(), g.m_p()).map_err(fin)?,
        glue(cl.m_i(), cr.m_i(), f.m_i(), g.m_i()).map_err(fin)?,
        glue(cl.m_o(), cr.m_o(), f.m_o(), g.m_o()).map_err(fin)?,
    ];
    let [m_u, m_p, m_i, m_o] = maps;
    Ok(Morphism::new(
        copr.object.clone(),
        target,
        m_u,
        m_p,
        m_i,
        m_o,
    )?)
}
