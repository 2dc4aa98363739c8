//! Isomorphism testing for computons.
//!
//! A computon is encoded as a vertex-labelled graph whose vertices are its
//! units, ports, inflows and outflows, and whose labelled edges are the
//! structure maps. Search is colour refinement plus individualisation.

use std::collections::BTreeMap;

use crate::computon::Computon;
use crate::morphism::Morphism;

struct Graph {
    n: usize,
    initial: Vec<(u8, String)>,
    out: Vec<Vec<(u8, usize)>>,
    inn: Vec<Vec<(u8, usize)>>,
}

const SRC: u8 = 0;
const IN_UNIT: u8 = 1;
const RELATE: u8 = 2;
const TGT: u8 = 3;
const OUT_UNIT: u8 = 4;

impl Graph {
    fn of(c: &Computon) -> Graph {
        let (nu, np, ni, no) = (c.units(), c.ports(), c.inflows(), c.outflows());
        let n = nu + np + ni + no;
        let (port, inflow, outflow) = (|p| nu + p, |i| nu + np + i, |o| nu + np + ni + o);
        let mut initial = Vec::with_capacity(n);
        initial.extend((0..nu).map(|_| (0u8, String::new())));
        initial.extend((0..np).map(|p| (1u8, c.colour().apply(p).to_string())));
        initial.extend((0..ni).map(|_| (2u8, String::new())));
        initial.extend((0..no).map(|o| (3u8, c.device(o).to_string())));
        let mut g = Graph {
            n,
            initial,
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
        };
        let mut edge = |from: usize, label: u8, to: usize| {
            g.out[from].push((label, to));
            g.inn[to].push((label, from));
        };
        for i in 0..ni {
            edge(inflow(i), SRC, port(c.src().apply(i)));
            edge(inflow(i), IN_UNIT, c.in_unit().apply(i));
            edge(inflow(i), RELATE, outflow(c.relate().apply(i)));
        }
        for o in 0..no {
            edge(outflow(o), TGT, port(c.tgt().apply(o)));
            edge(outflow(o), OUT_UNIT, c.out_unit().apply(o));
        }
        g
    }
}

type Signature = (usize, Vec<(u8, usize)>, Vec<(u8, usize)>);

fn signature(g: &Graph, colours: &[usize], v: usize) -> Signature {
    let mut out: Vec<(u8, usize)> = g.out[v].iter().map(|&(l, w)| (l, colours[w])).collect();
    let mut inn: Vec<(u8, usize)> = g.inn[v].iter().map(|&(l, w)| (l, colours[w])).collect();
    out.sort_unstable();
    inn.sort_unstable();
    (colours[v], out, inn)
}

fn histogram(colours: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &c in colours {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

/// Refines both colourings jointly to a stable partition; false when the
/// colour histograms disagree.
fn refine(a: &Graph, b: &Graph, ca: &mut Vec<usize>, cb: &mut Vec<usize>) -> bool {
    let mut classes = histogram(ca).len();
    loop {
        let sa: Vec<Signature> = (0..a.n).map(|v| signature(a, ca, v)).collect();
        let sb: Vec<Signature> = (0..b.n).map(|v| signature(b, cb, v)).collect();
        let mut ids: BTreeMap<&Signature, usize> = BTreeMap::new();
        for s in sa.iter().chain(&sb) {
            let next = ids.len();
            ids.entry(s).or_insert(next);
        }
        *ca = sa.iter().map(|s| ids[s]).collect();
        *cb = sb.iter().map(|s| ids[s]).collect();
        if histogram(ca) != histogram(cb) {
            return false;
        }
        let now = ids.len();
        if now == classes {
            return true;
        }
        classes = now;
    }
}

fn preserves(a: &Graph, b: &Graph, map: &[usize]) -> bool {
    (0..a.n).all(|v| {
        let w = map[v];
        if a.initial[v] != b.initial[w] || a.out[v].len() != b.out[w].len() {
            return false;
        }
        a.out[v]
            .iter()
            .all(|&(l, x)| b.out[w].contains(&(l, map[x])))
    })
}

fn search(a: &Graph, b: &Graph, mut ca: Vec<usize>, mut cb: Vec<usize>) -> Option<Vec<usize>> {
    if !refine(a, b, &mut ca, &mut cb) {
        return None;
    }
    let hist = histogram(&ca);
    let cell = hist
        .iter()
        .filter(|(_, &n)| n > 1)
        .min_by_key(|(_, &n)| n)
        .map(|(&c, _)| c);
    match cell {
        None => {
            let mut where_b = BTreeMap::new();
            for (w, &c) in cb.iter().enumerate() {
                where_b.insert(c, w);
            }
            let map: Vec<usize> = ca.iter().map(|c| where_b[c]).collect();
            preserves(a, b, &map).then_some(map)
        }
        Some(c) => {
            let v = ca.iter().position(|&x| x == c).expect("cell is non-empty");
            let fresh = ca.iter().chain(&cb).max().map_or(0, |m| m + 1);
            for w in (0..b.n).filter(|&w| cb[w] == c) {
                let (mut na, mut nb) = (ca.clone(), cb.clone());
                na[v] = fresh;
                nb[w] = fresh;
                if let Some(m) = search(a, b, na, nb) {
                    return Some(m);
                }
            }
            None
        }
    }
}

/// An isomorphism `a → b`, as a morphism whose components are bijections.
/// Port labels are ignored; colours and devices must match exactly.
pub fn isomorphism(a: &Computon, b: &Computon) -> Option<Morphism> {
    if (a.units(), a.ports(), a.inflows(), a.outflows(), a.types())
        != (b.units(), b.ports(), b.inflows(), b.outflows(), b.types())
    {
        return None;
    }
    let (ga, gb) = (Graph::of(a), Graph::of(b));
    let mut ids: BTreeMap<&(u8, String), usize> = BTreeMap::new();
    for s in ga.initial.iter().chain(&gb.initial) {
        let next = ids.len();
        ids.entry(s).or_insert(next);
    }
    let ca = ga.initial.iter().map(|s| ids[s]).collect();
    let cb = gb.initial.iter().map(|s| ids[s]).collect();
    let map = search(&ga, &gb, ca, cb)?;

    let (nu, np, ni) = (a.units(), a.ports(), a.inflows());
    let m_u = map[..nu].to_vec();
    let m_p = map[nu..nu + np].iter().map(|x| x - nu).collect();
    let m_i = map[nu + np..nu + np + ni]
        .iter()
        .map(|x| x - nu - np)
        .collect();
    let m_o = map[nu + np + ni..]
        .iter()
        .map(|x| x - nu - np - ni)
        .collect();
    let m = Morphism::from_tables(a.clone(), b.clone(), m_u, m_p, m_i, m_o)
        .expect("graph isomorphism induces a computon morphism");
    Some(m)
}

pub fn computons_isomorphic(a: &Computon, b: &Computon) -> bool {
    isomorphism(a, b).is_some()
}
