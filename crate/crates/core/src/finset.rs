//! Finite sets as cardinalities and total functions between them.
//!
//! A finite set is identified with `{0, .., card - 1}`. Everything the colimit
//! layer needs (images, fibers, coproducts, unions and pushouts of spans) is
//! computed here on plain index tables.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinError {
    #[error("table entry {value} at position {position} is outside a codomain of size {cod}")]
    OutOfCodomain {
        position: usize,
        value: usize,
        cod: usize,
    },
    #[error("table has length {len} but the domain has {dom} elements")]
    TableLength { len: usize, dom: usize },
    #[error("element {element} is outside a set of size {card}")]
    NotAnElement { element: usize, card: usize },
    #[error("cannot compose {first} with {second}: codomain and domain differ")]
    NotComposable { first: String, second: String },
    #[error("span legs have different apexes ({left} vs {right} elements)")]
    ApexMismatch { left: usize, right: usize },
}

/// The finite set `{0, .., card - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinSet(usize);

impl FinSet {
    pub const EMPTY: FinSet = FinSet(0);

    pub fn new(card: usize) -> Self {
        FinSet(card)
    }

    pub fn card(self) -> usize {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, element: usize) -> bool {
        element < self.0
    }

    pub fn elements(self) -> std::ops::Range<usize> {
        0..self.0
    }
}

impl From<usize> for FinSet {
    fn from(card: usize) -> Self {
        FinSet(card)
    }
}

/// A total function between finite sets, stored as its value table.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFinMap", into = "RawFinMap")]
pub struct FinMap {
    dom: FinSet,
    cod: FinSet,
    table: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawFinMap {
    cod: usize,
    table: Vec<usize>,
}

impl TryFrom<RawFinMap> for FinMap {
    type Error = FinError;

    fn try_from(raw: RawFinMap) -> Result<Self, Self::Error> {
        FinMap::new(raw.table.len(), raw.cod, raw.table)
    }
}

impl From<FinMap> for RawFinMap {
    fn from(map: FinMap) -> Self {
        RawFinMap {
            cod: map.cod.card(),
            table: map.table,
        }
    }
}

impl fmt::Debug for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {} -> {}", self.table, self.dom.0, self.cod.0)
    }
}

impl FinMap {
    pub fn new(dom: usize, cod: usize, table: Vec<usize>) -> Result<Self, FinError> {
        if table.len() != dom {
            return Err(FinError::TableLength {
                len: table.len(),
                dom,
            });
        }
        if let Some((position, &value)) = table.iter().enumerate().find(|(_, &v)| v >= cod) {
            return Err(FinError::OutOfCodomain {
                position,
                value,
                cod,
            });
        }
        Ok(FinMap {
            dom: FinSet(dom),
            cod: FinSet(cod),
            table,
        })
    }

    /// Builds a map whose domain is the table length.
    pub fn from_table(cod: usize, table: Vec<usize>) -> Result<Self, FinError> {
        FinMap::new(table.len(), cod, table)
    }

    pub fn identity(card: usize) -> Self {
        FinMap {
            dom: FinSet(card),
            cod: FinSet(card),
            table: (0..card).collect(),
        }
    }

    /// The unique map out of the empty set.
    pub fn empty(cod: usize) -> Self {
        FinMap {
            dom: FinSet::EMPTY,
            cod: FinSet(cod),
            table: Vec::new(),
        }
    }

    /// The map `k -> k + offset` into a set of size `cod`.
    pub fn shift(dom: usize, offset: usize, cod: usize) -> Result<Self, FinError> {
        FinMap::new(dom, cod, (offset..offset + dom).collect())
    }

    pub fn constant(dom: usize, cod: usize, value: usize) -> Result<Self, FinError> {
        FinMap::new(dom, cod, vec![value; dom])
    }

    pub fn dom(&self) -> FinSet {
        self.dom
    }

    pub fn cod(&self) -> FinSet {
        self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Panics when `x` is outside the domain.
    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.table.get(x).copied()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FinMap) -> Result<FinMap, FinError> {
        if self.cod != next.dom {
            return Err(FinError::NotComposable {
                first: format!("{self:?}"),
                second: format!("{next:?}"),
            });
        }
        Ok(FinMap {
            dom: self.dom,
            cod: next.cod,
            table: self.table.iter().map(|&y| next.table[y]).collect(),
        })
    }

    /// Same table read into a larger codomain.
    pub fn widen(&self, cod: usize) -> Result<FinMap, FinError> {
        FinMap::new(self.dom.0, cod, self.table.clone())
    }

    /// Sorted, duplicate-free list of attained values.
    pub fn image(&self) -> Vec<usize> {
        let mut hit = vec![false; self.cod.0];
        for &y in &self.table {
            hit[y] = true;
        }
        hit.iter()
            .enumerate()
            .filter_map(|(y, &h)| h.then_some(y))
            .collect()
    }

    /// Ascending preimage of `y`.
    pub fn fiber(&self, y: usize) -> Result<Vec<usize>, FinError> {
        if !self.cod.contains(y) {
            return Err(FinError::NotAnElement {
                element: y,
                card: self.cod.0,
            });
        }
        Ok(self.fiber_unchecked(y))
    }

    pub(crate) fn fiber_unchecked(&self, y: usize) -> Vec<usize> {
        self.table
            .iter()
            .enumerate()
            .filter_map(|(x, &v)| (v == y).then_some(x))
            .collect()
    }

    /// Preimage of a set of codomain elements, ascending.
    pub fn preimage(&self, ys: &[usize]) -> Vec<usize> {
        let mut wanted = vec![false; self.cod.0];
        for &y in ys {
            if y < wanted.len() {
                wanted[y] = true;
            }
        }
        self.table
            .iter()
            .enumerate()
            .filter_map(|(x, &v)| wanted[v].then_some(x))
            .collect()
    }

    /// Image of a set of domain elements, sorted and deduplicated.
    pub fn image_of(&self, xs: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = xs.iter().map(|&x| self.table[x]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.0];
        for &y in &self.table {
            if std::mem::replace(&mut seen[y], true) {
                return false;
            }
        }
        true
    }

    pub fn is_surjective(&self) -> bool {
        self.image().len() == self.cod.0
    }

    /// Left inverse of an injective map: `Some(x)` for attained values.
    pub fn partial_inverse(&self) -> Vec<Option<usize>> {
        let mut inv = vec![None; self.cod.0];
        for (x, &y) in self.table.iter().enumerate() {
            inv[y].get_or_insert(x);
        }
        inv
    }
}

/// Canonical coproduct `left ⊔ right` with tagging implicit in the injections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointUnion {
    pub left: FinSet,
    pub right: FinSet,
    pub size: usize,
    pub inj_left: FinMap,
    pub inj_right: FinMap,
}

impl DisjointUnion {
    /// Which side an element came from, with its index there.
    pub fn untag(&self, element: usize) -> Option<Side> {
        if element < self.left.card() {
            Some(Side::Left(element))
        } else if element < self.size {
            Some(Side::Right(element - self.left.card()))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left(usize),
    Right(usize),
}

/// Union of two initial segments of the naturals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionSet {
    pub left: FinSet,
    pub right: FinSet,
    pub size: usize,
    pub inj_left: FinMap,
    pub inj_right: FinMap,
}

/// Pushout object size plus the two induced maps `i_y: Y -> Y ⊔_X Z`, `i_z: Z -> Y ⊔_X Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutFns {
    pub size: usize,
    pub i_y: FinMap,
    pub i_z: FinMap,
}

pub fn disjoint_union(a: FinSet, b: FinSet) -> DisjointUnion {
    let size = a.card() + b.card();
    DisjointUnion {
        left: a,
        right: b,
        size,
        inj_left: FinMap::shift(a.card(), 0, size).expect("prefix embedding"),
        inj_right: FinMap::shift(b.card(), a.card(), size).expect("suffix embedding"),
    }
}

pub fn union(a: FinSet, b: FinSet) -> UnionSet {
    let size = a.card().max(b.card());
    UnionSet {
        left: a,
        right: b,
        size,
        inj_left: FinMap::shift(a.card(), 0, size).expect("identity embedding"),
        inj_right: FinMap::shift(b.card(), 0, size).expect("identity embedding"),
    }
}

/// Pushout of the span `Y <-g- X -h-> Z`.
///
/// Classes of the equivalence generated by `g(x) ~ h(x)` are found by a
/// breadth-first walk of the bipartite identification graph; they are numbered
/// in order of first appearance scanning `Y` ascending, then the `Z` elements
/// not yet reached.
pub fn pushout_fns(g: &FinMap, h: &FinMap) -> Result<PushoutFns, FinError> {
    if g.dom() != h.dom() {
        return Err(FinError::ApexMismatch {
            left: g.dom().card(),
            right: h.dom().card(),
        });
    }
    let ny = g.cod().card();
    let nz = h.cod().card();

    // Adjacency Y -> Z and Z -> Y through the apex.
    let mut y_adj = vec![Vec::new(); ny];
    let mut z_adj = vec![Vec::new(); nz];
    for x in g.dom().elements() {
        y_adj[g.apply(x)].push(h.apply(x));
        z_adj[h.apply(x)].push(g.apply(x));
    }

    let mut class_y: Vec<Option<usize>> = vec![None; ny];
    let mut class_z: Vec<Option<usize>> = vec![None; nz];
    let mut next = 0;
    let mut queue = VecDeque::new();

    for start in 0..ny {
        if class_y[start].is_some() {
            continue;
        }
        class_y[start] = Some(next);
        queue.push_back(Side::Left(start));
        while let Some(node) = queue.pop_front() {
            match node {
                Side::Left(y) => {
                    for &z in &y_adj[y] {
                        if class_z[z].is_none() {
                            class_z[z] = Some(next);
                            queue.push_back(Side::Right(z));
                        }
                    }
                }
                Side::Right(z) => {
                    for &y in &z_adj[z] {
                        if class_y[y].is_none() {
                            class_y[y] = Some(next);
                            queue.push_back(Side::Left(y));
                        }
                    }
                }
            }
        }
        next += 1;
    }
    for slot in class_z.iter_mut() {
        // Z elements outside the image of h are singleton classes; elements in
        // the image were reached from Y above.
        if slot.is_none() {
            *slot = Some(next);
            next += 1;
        }
    }

    let i_y = FinMap::new(ny, next, class_y.into_iter().map(Option::unwrap).collect())?;
    let i_z = FinMap::new(nz, next, class_z.into_iter().map(Option::unwrap).collect())?;
    Ok(PushoutFns {
        size: next,
        i_y,
        i_z,
    })
}

/// Literal transcription of the published incremental pushout procedure.
///
/// Only correct when no `Y`-fiber bridges two previously distinct `Z`-classes;
/// kept as a conformance reference for [`pushout_fns`].
#[allow(clippy::needless_range_loop)]
pub fn incremental_pushout_fns(g: &FinMap, h: &FinMap) -> Result<PushoutFns, FinError> {
    if g.dom() != h.dom() {
        return Err(FinError::ApexMismatch {
            left: g.dom().card(),
            right: h.dom().card(),
        });
    }
    let ny = g.cod().card();
    let nz = h.cod().card();
    let mut i_y: Vec<Option<usize>> = vec![None; ny];
    let mut i_z: Vec<Option<usize>> = vec![None; nz];
    let mut current = 0;

    for y in 0..ny {
        let fiber = g.fiber_unchecked(y);
        let mut eq = current;
        for &x in &fiber {
            if let Some(existing) = i_z[h.apply(x)] {
                eq = existing;
                break;
            }
        }
        for &x in &fiber {
            i_z[h.apply(x)] = Some(eq);
        }
        i_y[y] = Some(eq);
        if eq == current {
            current += 1;
        }
    }
    for slot in i_z.iter_mut() {
        if slot.is_none() {
            *slot = Some(current);
            current += 1;
        }
    }

    Ok(PushoutFns {
        size: current,
        i_y: FinMap::new(ny, current, i_y.into_iter().map(Option::unwrap).collect())?,
        i_z: FinMap::new(nz, current, i_z.into_iter().map(Option::unwrap).collect())?,
    })
}

/// Sourcewise value of `g1 ⊔ g2` at `a ∈ A1 ⊔ A2`, landing in `B1 ⊔ B2`.
pub fn find_eq(
    du_a: &DisjointUnion,
    du_b: &DisjointUnion,
    a: usize,
    g1: &FinMap,
    g2: &FinMap,
) -> usize {
    match du_a.untag(a) {
        Some(Side::Left(a1)) => du_b.inj_left.apply(g1.apply(a1)),
        Some(Side::Right(a2)) => du_b.inj_right.apply(g2.apply(a2)),
        None => panic!("element {a} outside a disjoint union of size {}", du_a.size),
    }
}
