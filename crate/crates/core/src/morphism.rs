//! Structure-preserving maps between computons, and markers.

use std::fmt;

use thiserror::Error;

use crate::computon::{Computon, ComputonError};
use crate::finset::FinMap;

/// The commuting conditions a morphism must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Square {
    /// `in_unit ∘ m_i = m_u ∘ in_unit`
    InUnit,
    /// `out_unit ∘ m_o = m_u ∘ out_unit`
    OutUnit,
    /// `src ∘ m_i = m_p ∘ src`
    Src,
    /// `tgt ∘ m_o = m_p ∘ tgt`
    Tgt,
    /// `relate ∘ m_i = m_o ∘ relate`
    Relate,
    /// `colour ∘ m_p = colour`
    Colour,
    /// `device ∘ m_o = device`
    Device,
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Square::InUnit => "in_unit ∘ m_i = m_u ∘ in_unit",
            Square::OutUnit => "out_unit ∘ m_o = m_u ∘ out_unit",
            Square::Src => "src ∘ m_i = m_p ∘ src",
            Square::Tgt => "tgt ∘ m_o = m_p ∘ tgt",
            Square::Relate => "relate ∘ m_i = m_o ∘ relate",
            Square::Colour => "colour ∘ m_p = colour",
            Square::Device => "device ∘ m_o = device",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("component map m_{component} has shape {found}, expected {expected}")]
    Shape {
        component: &'static str,
        found: String,
        expected: String,
    },
    #[error("source has {source_types} colours but target only {target_types}")]
    TypesDecrease {
        source_types: usize,
        target_types: usize,
    },
    #[error("square `{square}` fails at element {element}")]
    Square { square: Square, element: usize },
    #[error("boundary condition violated at source ports {ports:?}")]
    Boundary { ports: Vec<usize> },
    #[error("cannot compose: target of the first morphism is not the source of the second")]
    NotComposable,
    #[error("marker source is not a trivial computon")]
    SourceNotTrivial,
    #[error("marker map is not injective")]
    NotMonic,
    #[error("marker image {image:?} differs from the {side}ports {expected:?}")]
    ImageMismatch {
        side: &'static str,
        image: Vec<usize>,
        expected: Vec<usize>,
    },
    #[error(transparent)]
    Computon(#[from] ComputonError),
}

/// A morphism `source → target` given by maps on units, ports, inflows and
/// outflows. Colours embed canonically and devices are preserved verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    source: Computon,
    target: Computon,
    m_u: FinMap,
    m_p: FinMap,
    m_i: FinMap,
    m_o: FinMap,
}

impl Morphism {
    pub fn new(
        source: Computon,
        target: Computon,
        m_u: FinMap,
        m_p: FinMap,
        m_i: FinMap,
        m_o: FinMap,
    ) -> Result<Self, MorphismError> {
        let m = Morphism {
            source,
            target,
            m_u,
            m_p,
            m_i,
            m_o,
        };
        m.check()?;
        Ok(m)
    }

    /// Builds from index tables, with codomains taken from the target.
    pub fn from_tables(
        source: Computon,
        target: Computon,
        m_u: Vec<usize>,
        m_p: Vec<usize>,
        m_i: Vec<usize>,
        m_o: Vec<usize>,
    ) -> Result<Self, MorphismError> {
        let fm = |cod, t| FinMap::from_table(cod, t).map_err(ComputonError::from);
        let m_u = fm(target.units(), m_u)?;
        let m_p = fm(target.ports(), m_p)?;
        let m_i = fm(target.inflows(), m_i)?;
        let m_o = fm(target.outflows(), m_o)?;
        Morphism::new(source, target, m_u, m_p, m_i, m_o)
    }

    /// Maps assembled without validation; [`Morphism::check`] reports the
    /// first failed condition.
    pub(crate) fn assemble(source: Computon, target: Computon, maps: [FinMap; 4]) -> Self {
        let [m_u, m_p, m_i, m_o] = maps;
        Morphism {
            source,
            target,
            m_u,
            m_p,
            m_i,
            m_o,
        }
    }

    pub fn identity(c: &Computon) -> Self {
        Morphism {
            source: c.clone(),
            target: c.clone(),
            m_u: FinMap::identity(c.units()),
            m_p: FinMap::identity(c.ports()),
            m_i: FinMap::identity(c.inflows()),
            m_o: FinMap::identity(c.outflows()),
        }
    }

    pub fn source(&self) -> &Computon {
        &self.source
    }
    pub fn target(&self) -> &Computon {
        &self.target
    }
    pub fn m_u(&self) -> &FinMap {
        &self.m_u
    }
    pub fn m_p(&self) -> &FinMap {
        &self.m_p
    }
    pub fn m_i(&self) -> &FinMap {
        &self.m_i
    }
    pub fn m_o(&self) -> &FinMap {
        &self.m_o
    }

    /// First violated morphism condition, if any.
    pub fn check(&self) -> Result<(), MorphismError> {
        let (s, t) = (&self.source, &self.target);
        for (name, map, dom, cod) in [
            ("u", &self.m_u, s.units(), t.units()),
            ("p", &self.m_p, s.ports(), t.ports()),
            ("i", &self.m_i, s.inflows(), t.inflows()),
            ("o", &self.m_o, s.outflows(), t.outflows()),
        ] {
            if map.dom().card() != dom || map.cod().card() != cod {
                return Err(MorphismError::Shape {
                    component: name,
                    found: format!("{} -> {}", map.dom().card(), map.cod().card()),
                    expected: format!("{dom} -> {cod}"),
                });
            }
        }
        if s.types() > t.types() {
            return Err(MorphismError::TypesDecrease {
                source_types: s.types(),
                target_types: t.types(),
            });
        }
        let square = |sq, el| {
            Err(MorphismError::Square {
                square: sq,
                element: el,
            })
        };
        for p in 0..s.ports() {
            if t.colour().apply(self.m_p.apply(p)) != s.colour().apply(p) {
                return square(Square::Colour, p);
            }
        }
        for o in 0..s.outflows() {
            if t.device(self.m_o.apply(o)) != s.device(o) {
                return square(Square::Device, o);
            }
        }
        for i in 0..s.inflows() {
            let mi = self.m_i.apply(i);
            if t.in_unit().apply(mi) != self.m_u.apply(s.in_unit().apply(i)) {
                return square(Square::InUnit, i);
            }
        }
        for o in 0..s.outflows() {
            let mo = self.m_o.apply(o);
            if t.out_unit().apply(mo) != self.m_u.apply(s.out_unit().apply(o)) {
                return square(Square::OutUnit, o);
            }
        }
        for i in 0..s.inflows() {
            if t.src().apply(self.m_i.apply(i)) != self.m_p.apply(s.src().apply(i)) {
                return square(Square::Src, i);
            }
        }
        for o in 0..s.outflows() {
            if t.tgt().apply(self.m_o.apply(o)) != self.m_p.apply(s.tgt().apply(o)) {
                return square(Square::Tgt, o);
            }
        }
        for i in 0..s.inflows() {
            if t.relate().apply(self.m_i.apply(i)) != self.m_o.apply(s.relate().apply(i)) {
                return square(Square::Relate, i);
            }
        }
        let outside: Vec<usize> = self
            .boundary_ports()
            .into_iter()
            .filter(|&p| !(s.is_inport(p) || s.is_outport(p)))
            .collect();
        if !outside.is_empty() {
            return Err(MorphismError::Boundary { ports: outside });
        }
        Ok(())
    }

    /// Source ports whose image gains writers not coming from the source.
    pub fn vec_i(&self) -> Vec<usize> {
        (0..self.source.ports())
            .filter(|&p| {
                let image_writers = self.target.port_pre(self.m_p.apply(p)).unwrap_or_default();
                let mapped = self
                    .m_u
                    .image_of(&self.source.port_pre(p).unwrap_or_default());
                image_writers
                    .iter()
                    .any(|u| mapped.binary_search(u).is_err())
            })
            .collect()
    }

    /// Source ports whose image gains readers not coming from the source.
    pub fn vec_o(&self) -> Vec<usize> {
        (0..self.source.ports())
            .filter(|&p| {
                let image_readers = self.target.port_post(self.m_p.apply(p)).unwrap_or_default();
                let mapped = self
                    .m_u
                    .image_of(&self.source.port_post(p).unwrap_or_default());
                image_readers
                    .iter()
                    .any(|u| mapped.binary_search(u).is_err())
            })
            .collect()
    }

    /// `vec_i ∪ vec_o`, ascending.
    pub fn boundary_ports(&self) -> Vec<usize> {
        let mut v = self.vec_i();
        v.extend(self.vec_o());
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn is_monomorphism(&self) -> bool {
        self.m_u.is_injective()
            && self.m_p.is_injective()
            && self.m_i.is_injective()
            && self.m_o.is_injective()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Morphism) -> Result<Morphism, MorphismError> {
        if self.target != next.source {
            return Err(MorphismError::NotComposable);
        }
        let c = |a: &FinMap, b: &FinMap| a.then(b).map_err(ComputonError::from);
        Morphism::new(
            self.source.clone(),
            next.target.clone(),
            c(&self.m_u, &next.m_u)?,
            c(&self.m_p, &next.m_p)?,
            c(&self.m_i, &next.m_i)?,
            c(&self.m_o, &next.m_o)?,
        )
    }

    /// Ports of the source whose image is an inport (resp. outport) of the
    /// target are themselves inports (resp. outports).
    pub fn reflects_interface(&self) -> bool {
        (0..self.source.ports()).all(|p| {
            let q = self.m_p.apply(p);
            (!self.target.is_inport(q) || self.source.is_inport(p))
                && (!self.target.is_outport(q) || self.source.is_outport(p))
        })
    }
}

/// `β ∘ α`.
pub fn compose(alpha: &Morphism, beta: &Morphism) -> Result<Morphism, MorphismError> {
    alpha.then(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    In,
    Out,
}

/// A monomorphism from a trivial computon onto exactly the inports or
/// exactly the outports of its target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marker {
    kind: MarkerKind,
    mono: Morphism,
}

impl Marker {
    pub fn new(
        kind: MarkerKind,
        trivial: Computon,
        target: Computon,
        m_p: Vec<usize>,
    ) -> Result<Self, MorphismError> {
        if !trivial.is_trivial() {
            return Err(MorphismError::SourceNotTrivial);
        }
        let mono = Morphism::from_tables(trivial, target, vec![], m_p, vec![], vec![])?;
        if !mono.is_monomorphism() {
            return Err(MorphismError::NotMonic);
        }
        let mut image = mono.m_p.image();
        image.sort_unstable();
        let (side, expected) = match kind {
            MarkerKind::In => ("in", mono.target.inports()),
            MarkerKind::Out => ("out", mono.target.outports()),
        };
        if image != expected {
            return Err(MorphismError::ImageMismatch {
                side,
                image,
                expected,
            });
        }
        Ok(Marker { kind, mono })
    }

    pub fn in_marker(
        trivial: Computon,
        target: Computon,
        m_p: Vec<usize>,
    ) -> Result<Self, MorphismError> {
        Marker::new(MarkerKind::In, trivial, target, m_p)
    }

    pub fn out_marker(
        trivial: Computon,
        target: Computon,
        m_p: Vec<usize>,
    ) -> Result<Self, MorphismError> {
        Marker::new(MarkerKind::Out, trivial, target, m_p)
    }

    /// Marker whose trivial source copies the target's interface ports in
    /// ascending order, labels and colours included.
    pub fn canonical(kind: MarkerKind, target: &Computon) -> Result<Self, MorphismError> {
        let ports = match kind {
            MarkerKind::In => target.inports(),
            MarkerKind::Out => target.outports(),
        };
        let labels: Vec<&str> = ports.iter().map(|&p| target.label(p)).collect();
        let colours: Vec<usize> = ports.iter().map(|&p| target.colour().apply(p)).collect();
        let trivial = Computon::trivial(labels, &colours)?;
        Marker::new(kind, trivial, target.clone(), ports)
    }

    pub fn kind(&self) -> MarkerKind {
        self.kind
    }

    pub fn morphism(&self) -> &Morphism {
        &self.mono
    }

    pub fn into_morphism(self) -> Morphism {
        self.mono
    }

    pub fn source(&self) -> &Computon {
        &self.mono.source
    }

    pub fn target(&self) -> &Computon {
        &self.mono.target
    }
}
