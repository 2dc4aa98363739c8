mod common;

use common::*;
use computon::colimit::{coproduct, pushout, Span};
use computon::computon::{Computon, ComputonParts};
use computon::devnet::{decode_args, encode_args, Arg};
use computon::finset::pushout_fns;
use computon::iso::{computons_isomorphic, isomorphism};
use computon::morphism::{Morphism, MorphismError, Square};
use computon::operators;
use computon::value::{Value, ValueType};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn computon_from(seed: u64) -> Computon {
    random_computon(&mut ChaCha8Rng::seed_from_u64(seed), 3)
}

/// Same computon with every component renumbered.
fn shuffled(c: &Computon, seed: u64) -> Computon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = c.parts();
    let perm = |n: usize, rng: &mut ChaCha8Rng| {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        v
    };
    let pu = perm(parts.units, &mut rng);
    let pp = perm(parts.port_labels.len(), &mut rng);
    let pi = perm(parts.inflows.len(), &mut rng);
    let po = perm(parts.outflows.len(), &mut rng);
    let mut labels = vec![String::new(); pp.len()];
    let mut colours = vec![0; pp.len()];
    for (p, &q) in pp.iter().enumerate() {
        labels[q] = parts.port_labels[p].clone();
        colours[q] = parts.colours[p];
    }
    let mut inflows = vec![(0, 0); pi.len()];
    let mut relate = vec![0; pi.len()];
    for (i, &j) in pi.iter().enumerate() {
        let (p, u) = parts.inflows[i];
        inflows[j] = (pp[p], pu[u]);
        relate[j] = po[parts.relate[i]];
    }
    let mut outflows = vec![None; po.len()];
    for (o, &k) in po.iter().enumerate() {
        let (u, p, ref d) = parts.outflows[o];
        outflows[k] = Some((pu[u], pp[p], d.clone()));
    }
    Computon::new(ComputonParts {
        units: parts.units,
        types: parts.types,
        port_labels: labels,
        colours,
        inflows,
        outflows: outflows.into_iter().map(Option::unwrap).collect(),
        relate,
    })
    .unwrap()
}

fn trivial_span(seed: u64) -> Option<Span> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_computon(&mut rng, 2);
    let b = random_computon(&mut rng, 2);
    let a_ctrl: Vec<usize> = (0..a.ports()).filter(|&p| a.is_control(p)).collect();
    let b_ctrl: Vec<usize> = (0..b.ports()).filter(|&p| b.is_control(p)).collect();
    let mut pairs = vec![(
        a_ctrl[rng.random_range(0..a_ctrl.len())],
        b_ctrl[rng.random_range(0..b_ctrl.len())],
    )];
    if rng.random_bool(0.5) {
        let p = rng.random_range(0..a.ports());
        let same: Vec<usize> = (0..b.ports())
            .filter(|&q| b.colour().apply(q) == a.colour().apply(p))
            .collect();
        if let Some(&q) = same.first() {
            pairs.push((p, q));
        }
    }
    operators::span_from_pairs(&a, &b, &pairs).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pushout_matches_union_find(
        ny in 1usize..7,
        nz in 1usize..7,
        raw in prop::collection::vec((0usize..100, 0usize..100), 0..7),
    ) {
        let g: Vec<usize> = raw.iter().map(|&(a, _)| a % ny).collect();
        let h: Vec<usize> = raw.iter().map(|&(_, b)| b % nz).collect();
        let po = pushout_fns(&finmap(ny, &g), &finmap(nz, &h)).unwrap();
        prop_assert_eq!(
            canonical(po.i_y.table(), po.i_z.table()),
            uf_pushout(&g, &h, ny, nz)
        );
        // the square commutes
        for x in 0..g.len() {
            prop_assert_eq!(po.i_y.apply(g[x]), po.i_z.apply(h[x]));
        }
    }

    #[test]
    fn renumbering_preserves_isomorphism(seed in any::<u64>(), perm in any::<u64>()) {
        let c = computon_from(seed);
        let d = shuffled(&c, perm);
        let w = isomorphism(&c, &d);
        prop_assert!(w.is_some());
        let w = w.unwrap();
        prop_assert!(w.check().is_ok());
        prop_assert!(w.is_monomorphism());
        prop_assert_eq!(w.m_p().cod().card(), c.ports());
    }

    #[test]
    fn labels_do_not_matter(seed in any::<u64>()) {
        let c = computon_from(seed);
        let renamed = c
            .with_labels((0..c.ports()).map(|p| format!("q{p}")).collect())
            .unwrap();
        prop_assert!(computons_isomorphic(&c, &renamed));
    }

    #[test]
    fn parts_round_trip(seed in any::<u64>()) {
        let c = computon_from(seed);
        prop_assert_eq!(Computon::new(c.parts()).unwrap(), c);
    }

    #[test]
    fn coproduct_is_disjoint_union(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (computon_from(a), computon_from(b));
        let r = coproduct(&x, &y);
        prop_assert!(r.object.is_valid());
        prop_assert!(r.coleg_left.check().is_ok() && r.coleg_right.check().is_ok());
        prop_assert_eq!(r.object.ports(), x.ports() + y.ports());
        prop_assert_eq!(r.object.units(), x.units() + y.units());
        prop_assert_eq!(r.object.inflows(), x.inflows() + y.inflows());
        prop_assert_eq!(r.object.outflows(), x.outflows() + y.outflows());
        prop_assert_eq!(r.object.types(), x.types().max(y.types()));
        prop_assert!(computons_isomorphic(&r.object, &coproduct(&y, &x).object));
        // mediating morphism into the coproduct itself is the identity
        let h = computon::colimit::unique_from_coproduct(&r, &r.coleg_left, &r.coleg_right).unwrap();
        prop_assert_eq!(h, Morphism::identity(&r.object));
    }

    #[test]
    fn pushout_is_symmetric(seed in any::<u64>()) {
        if let Some(span) = trivial_span(seed) {
            let l = pushout(&span);
            let r = pushout(&span.swapped());
            prop_assert_eq!(l.is_ok(), r.is_ok());
            if let (Ok(l), Ok(r)) = (l, r) {
                prop_assert!(computons_isomorphic(&l.object, &r.object));
                let a = span.left().then(&l.coleg_left).unwrap();
                let b = span.right().then(&l.coleg_right).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn composition_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (computon_from(a), computon_from(b), computon_from(c));
        let f = coproduct(&x, &y).coleg_left;
        let g = coproduct(f.target(), &z).coleg_left;
        let h = Morphism::identity(g.target());
        prop_assert_eq!(f.then(&g).unwrap().then(&h).unwrap(), f.then(&g.then(&h).unwrap()).unwrap());
        prop_assert_eq!(Morphism::identity(&x).then(&f).unwrap(), f.clone());
        prop_assert!(f.then(&g).unwrap().check().is_ok());
    }

    #[test]
    fn recolouring_breaks_the_colour_square(seed in any::<u64>(), pick in any::<usize>()) {
        let x = computon_from(seed);
        let f = coproduct(&x, &x).coleg_left;
        let p = pick % x.ports();
        let target = f.target();
        let other = (0..target.ports())
            .find(|&q| target.colour().apply(q) != x.colour().apply(p));
        if let Some(q) = other {
            let mut table = f.m_p().table().to_vec();
            table[p] = q;
            let err = Morphism::from_tables(
                x.clone(),
                target.clone(),
                f.m_u().table().to_vec(),
                table,
                f.m_i().table().to_vec(),
                f.m_o().table().to_vec(),
            )
            .unwrap_err();
            prop_assert_eq!(err, MorphismError::Square { square: Square::Colour, element: p });
        }
    }

    #[test]
    fn values_round_trip(n in any::<i64>(), wide in any::<u128>(), x in -1e300f64..1e300, s in ".*", b in any::<bool>()) {
        let big = BigInt::from(wide) * BigInt::from(n);
        for (ty, v) in [
            (ValueType::Integer, Value::int(n)),
            (ValueType::Integer, Value::Integer(big)),
            (ValueType::Float, Value::Float(x)),
            (ValueType::Text, Value::Text(s.clone())),
            (ValueType::Boolean, Value::Boolean(b)),
            (ValueType::Control, Value::Control),
        ] {
            prop_assert_eq!(Value::from_json(ty, &v.to_json()).unwrap(), v.clone());
            let typed = v.to_typed_json(Some(&s)).unwrap();
            prop_assert_eq!(Value::from_typed_json(&typed).unwrap(), v);
        }
    }

    #[test]
    fn wire_arguments_round_trip(ns in prop::collection::vec(any::<i64>(), 0..5), label in "[a-z]{1,6}") {
        let mut args: Vec<Arg> = ns.iter().map(|&n| Arg::new(label.clone(), Value::int(n))).collect();
        args.push(Arg::new("go", Value::Control));
        let body = encode_args(&args).unwrap();
        prop_assert_eq!(decode_args(&body).unwrap(), args);
    }
}
