use std::collections::BTreeSet;
use std::sync::Arc;

use dendron::finset_cat::*;
use dendron::tree_cat::*;
use proptest::prelude::*;

fn pm(a: usize, b: usize, map: &[Option<usize>]) -> PartialMap {
    PartialMap::new(FinSet::skeleton(a), FinSet::skeleton(b), map.to_vec()).unwrap()
}

#[test]
fn composition_examples() {
    let f = pm(2, 1, &[Some(0), None]);
    let g = pm(1, 2, &[Some(0)]);
    let gf = g.after(&f).unwrap();
    assert_eq!(gf.domain(), vec![0]);
    assert_eq!(gf.map, vec![Some(0), None]);

    let id = PartialMap::identity(&FinSet::skeleton(2));
    let id1 = PartialMap::identity(&FinSet::skeleton(1));
    assert_eq!(id1.after(&f).unwrap(), f);
    assert_eq!(f.after(&id).unwrap(), f);
    let none = PartialMap::undefined(&FinSet::skeleton(1), &FinSet::skeleton(3));
    assert!(none.after(&f).unwrap().domain().is_empty());
    assert!(g.after(&g).is_err());
}

#[test]
fn gamma_factorizations() {
    // A bijection splits into two isomorphisms.
    let b = pm(2, 2, &[Some(1), Some(0)]);
    let fac = reedy_factorize_gamma(&b);
    assert!(fac.surjection.is_bijection() && fac.injection.is_bijection());

    // An inert surjection A ⊔ B ⇸ A is already positive.
    let inert = pm(3, 2, &[Some(0), Some(1), None]);
    let fac = reedy_factorize_gamma(&inert);
    assert_eq!(fac.surjection.map, inert.map);
    assert_eq!(fac.injection, PartialMap::identity(&FinSet::skeleton(2)));

    let fold = pm(2, 1, &[Some(0), Some(0)]);
    let fac = reedy_factorize_gamma(&fold);
    assert_eq!(fac.surjection.map, fold.map);
    assert!(fac.injection.is_bijection());
}

#[test]
fn factorization_classes_over_all_small_maps() {
    for a in 0..=3 {
        for b in 0..=3 {
            for f in all_partial_maps(&FinSet::skeleton(a), &FinSet::skeleton(b)) {
                let fac = reedy_factorize_gamma(&f);
                assert!(fac.positive().dual_is_positive());
                assert!(fac.negative().dual_is_negative());
                assert_eq!(fac.injection.after(&fac.surjection).unwrap().map, f.map);
            }
        }
    }
}

#[test]
fn partial_map_counts() {
    for a in 0..=3 {
        for b in 0..=3 {
            let n = all_partial_maps(&FinSet::skeleton(a), &FinSet::skeleton(b)).len();
            assert_eq!(n, (b + 1).pow(a as u32));
        }
    }
}

fn by_names(s: &Tree, t: &Tree, pairs: &[(&str, &str)]) -> OmegaMorphism {
    let map = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    OmegaMorphism::from_names(s, t, &map).unwrap()
}

#[test]
fn lambda_of_a_top_face_is_total() {
    let t = Tree::new(&["r", "x", "a", "c", "d"], "r", &[("x", "r"), ("a", "r"), ("c", "a"), ("d", "a")], &[]).unwrap();
    let s = Tree::new(&["r", "x", "a"], "r", &[("x", "r"), ("a", "r")], &[]).unwrap();
    let face = by_names(&s, &t, &[("r", "r"), ("x", "x"), ("a", "a")]);
    assert_eq!(face.classify(), Some(Elementary::TopFace));
    let l = leaf_functor(&face).unwrap();
    assert!(l.is_total());
    let json = l.to_json();
    assert_eq!(json.map.get("c").map(String::as_str), Some("a"));
    assert_eq!(json.map.get("d").map(String::as_str), Some("a"));
    assert_eq!(json.map.get("x").map(String::as_str), Some("x"));
}

#[test]
fn lambda_of_the_figure_root_face_is_partial() {
    let t = Arc::new(figure_tree());
    let (_, root_face) = faces(&t).into_iter().find(|(k, _)| *k == Elementary::RootFace).unwrap();
    let l = leaf_functor(&root_face).unwrap();
    let json = l.to_json();
    assert!(!l.is_total());
    assert_eq!(json.map.get("a"), None);
    assert_eq!(json.map.get("b").map(String::as_str), Some("b"));
    assert_eq!(json.map.get("c").map(String::as_str), Some("c"));
}

#[test]
fn lambda_of_inner_faces_and_degeneracies_is_bijective() {
    for t in trees_up_to(3, 6).into_iter().map(Arc::new) {
        for (kind, f) in faces(&t) {
            let l = leaf_functor(&f).unwrap();
            match kind {
                Elementary::InnerFace => assert!(l.is_bijection(), "{f:?}"),
                Elementary::TopFace => assert!(l.is_total(), "{f:?}"),
                _ => {}
            }
        }
        for d in degeneracies(&t) {
            assert!(leaf_functor(&d).unwrap().is_bijection());
        }
        for a in automorphisms(&t) {
            assert!(leaf_functor(&a).unwrap().is_bijection());
        }
    }
}

#[test]
fn lambda_is_contravariantly_functorial_on_small_trees() {
    let trees: Vec<Arc<Tree>> = trees_up_to(3, 5).into_iter().map(Arc::new).collect();
    for a in &trees {
        for b in &trees {
            let fs = enumerate_homs(a, b, 12).unwrap();
            if fs.is_empty() {
                continue;
            }
            for c in &trees {
                for g in enumerate_homs(b, c, 12).unwrap() {
                    for f in &fs {
                        let lhs = leaf_functor(&g.after(f).unwrap()).unwrap();
                        let rhs = leaf_functor(f).unwrap().after(&leaf_functor(&g).unwrap()).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }
}

#[test]
fn inv_examples() {
    let id = PartialMap::identity(&FinSet::skeleton(3));
    assert_eq!(inv_functor(&id).unwrap(), id);
    let m = pm(1, 2, &[Some(0)]);
    let i = inv_functor(&m).unwrap();
    assert_eq!(i.map, vec![Some(0), None]);
    assert!(i.is_inert());
    assert!(inv_functor(&pm(2, 1, &[Some(0), Some(0)])).is_err());
}

#[test]
fn inv_is_functorial_faithful_and_hits_exactly_the_inert_maps() {
    for a in 0..=4 {
        for b in 0..=4 {
            let (sa, sb) = (FinSet::skeleton(a), FinSet::skeleton(b));
            let injs = all_injections(&sa, &sb);
            let images: BTreeSet<Vec<Option<usize>>> =
                injs.iter().map(|m| inv_functor(m).unwrap().map).collect();
            assert_eq!(images.len(), injs.len());
            let inert: BTreeSet<Vec<Option<usize>>> = all_partial_maps(&sb, &sa)
                .into_iter()
                .filter(|f| f.is_inert())
                .map(|f| f.map)
                .collect();
            assert_eq!(images, inert);
            for c in 0..=4 {
                for n in all_injections(&sb, &FinSet::skeleton(c)) {
                    for m in &injs {
                        let lhs = inv_functor(&n.after(m).unwrap()).unwrap();
                        let rhs = inv_functor(m).unwrap().after(&inv_functor(&n).unwrap()).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }
}

#[test]
fn json_round_trip() {
    let f = pm(3, 2, &[Some(1), None, Some(0)]);
    assert_eq!(PartialMap::from_json(&f.to_json()).unwrap(), f);
}

fn arb_map(a: usize, b: usize) -> impl Strategy<Value = PartialMap> {
    proptest::collection::vec(proptest::option::of(0..b.max(1)), a).prop_map(move |m| {
        let m = if b == 0 { vec![None; a] } else { m };
        PartialMap::new(FinSet::skeleton(a), FinSet::skeleton(b), m).unwrap()
    })
}

proptest! {
    #[test]
    fn composition_is_associative(
        (f, g, h) in (0usize..5, 0usize..5, 0usize..5, 0usize..5)
            .prop_flat_map(|(a, b, c, d)| (arb_map(a, b), arb_map(b, c), arb_map(c, d)))
    ) {
        let left = h.after(&g).unwrap().after(&f).unwrap();
        let right = h.after(&g.after(&f).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let id = PartialMap::identity(&f.source);
        prop_assert_eq!(f.after(&id).unwrap(), f.clone());
    }
}
