use std::collections::BTreeSet;
use std::sync::Arc;

use dendron::tree_cat::*;
use proptest::prelude::*;

/// Independent reading of the validity condition: the edges on or above the
/// image of the output that are not strictly above an input image form a
/// subtree; its open ends must be exactly the input images.
fn oracle_valid(s: &Tree, t: &Tree, map: &[usize]) -> bool {
    for v in s.vertices() {
        let out = map[v];
        let ins: Vec<usize> = s.children(v).iter().map(|&a| map[a]).collect();
        if ins.iter().collect::<BTreeSet<_>>().len() != ins.len() {
            return false;
        }
        let strictly_above_input =
            |x: usize| ins.iter().any(|&i| x != i && t.is_above(x, i));
        let region: Vec<usize> = (0..t.len())
            .filter(|&x| t.is_above(x, out) && !strictly_above_input(x))
            .collect();
        if !ins.iter().all(|i| region.contains(i)) {
            return false;
        }
        if ins.len() == 1 && ins[0] == out {
            continue;
        }
        if ins.contains(&out) {
            return false;
        }
        let ends: BTreeSet<usize> = region
            .iter()
            .copied()
            .filter(|&x| ins.contains(&x) || t.is_leaf(x))
            .collect();
        if ends != ins.iter().copied().collect() {
            return false;
        }
    }
    true
}

fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| (0..m).map(move |y| {
                let mut q = p.clone();
                q.push(y);
                q
            }))
            .collect();
    }
    out
}

fn arcs(v: usize, e: usize) -> Vec<Arc<Tree>> {
    trees_up_to(v, e).into_iter().map(Arc::new).collect()
}

#[test]
fn enumeration_matches_brute_force_over_all_edge_maps() {
    let trees = arcs(3, 4);
    for s in &trees {
        for t in &trees {
            let brute: Vec<Vec<usize>> = all_maps(s.len(), t.len())
                .into_iter()
                .filter(|m| oracle_valid(s, t, m))
                .collect();
            let found: Vec<Vec<usize>> = enumerate_homs(s, t, 12).unwrap().into_iter().map(|f| f.map).collect();
            assert_eq!(found, brute, "{s:?} -> {t:?}");
        }
    }
}

#[test]
fn validate_agrees_with_oracle_on_every_map_into_the_figure_tree() {
    let t = Arc::new(figure_tree());
    let s = Arc::new(Tree::corolla(2));
    for m in all_maps(s.len(), t.len()) {
        let ok = validate_morphism(s.clone(), t.clone(), m.clone()).is_ok();
        assert_eq!(ok, oracle_valid(&s, &t, &m), "{m:?}");
    }
}

#[test]
fn hom_from_eta_counts_edges() {
    let eta = Arc::new(Tree::eta());
    for t in arcs(4, 8) {
        assert_eq!(enumerate_homs(&eta, &t, 12).unwrap().len(), t.len(), "{t:?}");
    }
}

#[test]
fn corolla_automorphisms_are_leaf_permutations() {
    let mut fact = 1;
    for n in 0..=5 {
        if n > 0 {
            fact *= n;
        }
        let c = Arc::new(Tree::corolla(n));
        let auts = automorphisms(&c);
        assert_eq!(auts.len(), fact);
        assert!(auts.iter().all(|a| a.map[0] == 0));
        let homs = enumerate_homs(&c, &c, 12).unwrap();
        assert!(homs.len() >= fact);
    }
}

#[test]
fn automorphism_groups_are_closed() {
    for t in arcs(4, 6) {
        let auts = automorphisms(&t);
        let set: BTreeSet<Vec<usize>> = auts.iter().map(|a| a.map.clone()).collect();
        for a in &auts {
            assert!(set.contains(&a.inverse().unwrap().map));
            for b in &auts {
                assert!(set.contains(&a.after(b).unwrap().map));
            }
        }
    }
}

#[test]
fn small_automorphism_groups() {
    assert_eq!(automorphisms(&Arc::new(Tree::eta())).len(), 1);
    for n in 0..5 {
        assert_eq!(automorphisms(&Arc::new(Tree::linear(n))).len(), 1);
    }
    // The figure tree has no symmetry: its ternary vertex has three
    // distinct branches.
    assert_eq!(automorphisms(&Arc::new(figure_tree())).len(), 1);
}

#[test]
fn identity_and_invalid_maps() {
    let c2 = Arc::new(Tree::corolla(2));
    assert!(validate_morphism(c2.clone(), c2.clone(), vec![0, 1, 2]).is_ok());
    let err = validate_morphism(c2.clone(), c2.clone(), vec![0, 1, 1]).unwrap_err();
    assert!(err.to_string().contains("not distinct"), "{err}");
    // The unary corolla maps onto η by its degeneracy; other corollas do not.
    let eta = Arc::new(Tree::eta());
    let down = enumerate_homs(&Arc::new(Tree::corolla(1)), &eta, 12).unwrap();
    assert_eq!(down.len(), 1);
    assert_eq!(down[0].classify(), Some(Elementary::Degeneracy));
    for n in [0, 2, 3] {
        assert!(enumerate_homs(&Arc::new(Tree::corolla(n)), &eta, 12).unwrap().is_empty());
    }
}

#[test]
fn enumeration_respects_the_bound() {
    let big = Arc::new(Tree::corolla(12));
    assert!(enumerate_homs(&big, &big, 12).is_err());
}

#[test]
fn canonical_forms() {
    let a = Tree::new(&["r", "x", "y", "z"], "r", &[("x", "r"), ("y", "r"), ("z", "r")], &[]).unwrap();
    let b = Tree::new(&["q", "z", "w", "u"], "q", &[("u", "q"), ("z", "q"), ("w", "q")], &[]).unwrap();
    assert_eq!(a.canonical_form().0, b.canonical_form().0);

    let fig = figure_tree();
    let other = Tree::new(
        &["s", "f", "c", "v", "w", "g", "h"],
        "h",
        &[("g", "h"), ("f", "h"), ("s", "f"), ("c", "f"), ("v", "f"), ("w", "v")],
        &["s"],
    )
    .unwrap();
    let (c1, iso1) = fig.canonical_form();
    let (c2, iso2) = other.canonical_form();
    assert_eq!(c1, c2);
    assert!(validate_morphism(iso1.source.clone(), iso1.target.clone(), iso1.map.clone()).is_ok());
    assert!(validate_morphism(iso2.source.clone(), iso2.target.clone(), iso2.map.clone()).is_ok());
    assert_eq!(fig.len(), 7);
    assert_eq!(fig.degree(), 4);
    assert_eq!(fig.leaves().len(), 3);
}

#[test]
fn distinct_codes_are_not_isomorphic() {
    let trees = arcs(4, 6);
    for (i, s) in trees.iter().enumerate() {
        for t in &trees[i + 1..] {
            assert_ne!(s.encoding(), t.encoding());
            if s.len() == t.len() && s.degree() == t.degree() {
                let isos = enumerate_homs(s, t, 12).unwrap().into_iter().filter(|f| f.is_iso()).count();
                assert_eq!(isos, 0, "{s:?} {t:?}");
            }
        }
    }
}

#[test]
fn factorization_of_isos_and_degeneracies() {
    let c3 = Arc::new(Tree::corolla(3));
    for a in automorphisms(&c3) {
        let (neg, pos) = reedy_factorize(&a);
        assert_eq!(neg.map, a.map);
        assert_eq!(pos.map, vec![0, 1, 2, 3]);
    }
    let lin = Arc::new(Tree::linear(2));
    for d in degeneracies(&lin) {
        let (neg, pos) = reedy_factorize(&d);
        assert!(pos.is_iso());
        assert_eq!(neg.map, d.map);
    }
}

#[test]
fn factorization_recovers_degeneracy_then_face() {
    // Compose a degeneracy out of a 3-vertex tree with every injective map
    // into a 2-vertex tree and factor back.
    let t = Arc::new(Tree::from_code("((|)|)").unwrap());
    let up = Arc::new(Tree::from_code("(((|))|)").unwrap());
    for sigma in degeneracies(&up) {
        let into_t: Vec<_> = enumerate_homs(&sigma.target, &t, 12)
            .unwrap()
            .into_iter()
            .filter(|m| m.is_injective())
            .collect();
        for m in into_t {
            let f = m.after(&sigma).unwrap();
            let (neg, pos) = reedy_factorize(&f);
            assert!(pos.is_injective());
            assert!(neg.is_surjective());
            assert!(neg.target.is_isomorphic(&sigma.target));
            assert_eq!(pos.after(&neg).unwrap().map, f.map);
        }
    }
}

#[test]
fn every_morphism_decomposes_into_generators() {
    let trees = arcs(4, 5);
    for s in &trees {
        for t in &trees {
            for f in enumerate_homs(s, t, 12).unwrap() {
                let steps = decompose(&f);
                for (kind, g) in &steps {
                    assert!(validate_morphism(g.source.clone(), g.target.clone(), g.map.clone()).is_ok());
                    assert_eq!(g.classify(), Some(*kind), "{g:?}");
                }
                let maps: Vec<OmegaMorphism> = steps.into_iter().map(|(_, g)| g).collect();
                match compose_all(&maps) {
                    Some(c) => assert_eq!(c.map, f.map),
                    None => assert!(f.map == (0..s.len()).collect::<Vec<_>>() && s == t),
                }
            }
        }
    }
}

#[test]
fn degree_is_monotone_along_the_two_classes() {
    let trees = arcs(4, 5);
    for s in &trees {
        for t in &trees {
            for f in enumerate_homs(s, t, 12).unwrap() {
                if f.is_positive() {
                    assert!(s.degree() <= t.degree());
                }
                if f.is_negative() {
                    assert!(s.degree() >= t.degree());
                }
                if f.is_positive() && f.is_negative() {
                    assert!(f.is_iso());
                }
                let (neg, pos) = reedy_factorize(&f);
                assert!(neg.is_negative() && pos.is_positive(), "{f:?}");
                assert_eq!(pos.after(&neg).unwrap().map, f.map);
            }
        }
    }
}

#[test]
fn degeneracies_have_sections() {
    for t in arcs(4, 6) {
        for d in degeneracies(&t) {
            let sections = enumerate_homs(&d.target, &t, 12)
                .unwrap()
                .into_iter()
                .filter(|s| d.after(s).unwrap().map == (0..d.target.len()).collect::<Vec<_>>())
                .count();
            assert!(sections >= 1, "{d:?}");
        }
    }
}

#[test]
fn faces_of_the_figure_tree() {
    let t = Arc::new(figure_tree());
    let fs = faces(&t);
    let kinds: Vec<Elementary> = fs.iter().map(|(k, _)| *k).collect();
    // Inner edges e, f, s; top vertices v and the stump; no root face since
    // the root vertex has an inner edge and a leaf.
    assert_eq!(kinds.iter().filter(|k| **k == Elementary::InnerFace).count(), 3);
    assert_eq!(kinds.iter().filter(|k| **k == Elementary::TopFace).count(), 2);
    assert_eq!(kinds.iter().filter(|k| **k == Elementary::RootFace).count(), 1);
    for (k, f) in fs {
        assert_eq!(f.classify(), Some(k));
        assert_eq!(f.source.degree() + 1, t.degree());
    }
    assert_eq!(degeneracies(&t).len(), 1);
}

#[test]
fn json_round_trip() {
    let t = figure_tree();
    let back = Tree::from_json(&t.to_json()).unwrap();
    assert_eq!(t, back);
    let bad = TreeJson { edges: vec!["a".into(), "b".into()], root: "a".into(), parent: Default::default(), capped: vec![] };
    assert!(Tree::from_json(&bad).is_err());
}

fn composable_triple() -> impl Strategy<Value = (OmegaMorphism, OmegaMorphism, OmegaMorphism)> {
    let trees = arcs(3, 5);
    let n = trees.len();
    (0..n, 0..n, 0..n, 0..n, any::<u64>()).prop_filter_map("empty hom set", move |(a, b, c, d, seed)| {
        let homs = |x: usize, y: usize| enumerate_homs(&trees[x], &trees[y], 12).unwrap();
        let (f, g, h) = (homs(a, b), homs(b, c), homs(c, d));
        if f.is_empty() || g.is_empty() || h.is_empty() {
            return None;
        }
        let s = seed as usize;
        Some((f[s % f.len()].clone(), g[(s / 7) % g.len()].clone(), h[(s / 49) % h.len()].clone()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composition_is_associative_and_valid((f, g, h) in composable_triple()) {
        let left = h.after(&g).unwrap().after(&f).unwrap();
        let right = h.after(&g.after(&f).unwrap()).unwrap();
        prop_assert_eq!(&left.map, &right.map);
        prop_assert!(validate_morphism(left.source.clone(), left.target.clone(), left.map.clone()).is_ok());
    }

    #[test]
    fn relabelled_trees_share_canonical_forms(idx in 0usize..103, salt in 0u32..1000) {
        let trees = trees_up_to(4, 6);
        let t = &trees[idx % trees.len()];
        let renamed = t.relabel(|e, _| format!("x{}_{}", salt, t.len() - e));
        prop_assert_eq!(renamed.canonical_form().0, t.canonical_form().0);
    }
}
