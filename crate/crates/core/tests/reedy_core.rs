use std::sync::Arc;

use dendron::finset_cat::*;
use dendron::reedy_core::*;
use dendron::tree_cat::*;
use proptest::prelude::*;

fn omega() -> OmegaCategory {
    OmegaCategory::truncated(3, 6)
}

#[test]
fn omega_truncation_satisfies_the_axioms() {
    let om = omega();
    let report = check_reedy_axioms(&om.cat);
    assert!(report.passed(), "{report:#?}");
    assert_eq!(report.verdicts.len(), 5);
}

#[test]
fn gamma_and_m_satisfy_the_axioms() {
    let gamma = SetCategory::gamma(4);
    let report = check_reedy_axioms(&gamma.cat);
    assert!(report.passed(), "{report:#?}");
    let m = SetCategory::injections(4);
    let report = check_reedy_axioms(&m.cat);
    assert!(report.passed(), "{report:#?}");
    for f in 0..m.cat.num_morphisms() {
        assert!(m.cat.is_plus(f));
        assert_eq!(m.cat.is_minus(f), m.cat.is_iso(f));
    }
}

#[test]
fn morphism_counts_of_set_categories() {
    let gamma = SetCategory::gamma(3);
    for a in 0..=3 {
        for b in 0..=3 {
            assert_eq!(gamma.cat.hom(a, b).len(), (a + 1).pow(b as u32));
        }
    }
    let m = SetCategory::injections(3);
    assert_eq!(m.cat.hom(2, 3).len(), 6);
    assert_eq!(m.cat.hom(3, 2).len(), 0);
}

#[test]
fn composition_tables_are_associative() {
    OmegaCategory::truncated(3, 5).cat.check_associativity().unwrap();
    SetCategory::gamma(3).cat.check_associativity().unwrap();
    SetCategory::injections(3).cat.check_associativity().unwrap();
}

#[test]
fn a_face_reclassified_as_negative_is_caught() {
    let om = omega();
    let face = (0..om.cat.num_morphisms())
        .find(|&f| om.morphisms[f].classify() == Some(Elementary::TopFace))
        .unwrap();
    let bad = om.cat.reclassified(face, false, true);
    let report = check_reedy_axioms(&bad);
    assert!(!report.passed());
    let deg = report.verdict(CHECK_DEGREE).unwrap();
    assert!(!deg.passed);
    assert!(deg.witness.as_ref().unwrap().contains(om.cat.label(face)));

    let gamma = SetCategory::gamma(3);
    let inj = gamma.morphism_index(&PartialMap::new(FinSet::skeleton(1), FinSet::skeleton(2), vec![Some(0)]).unwrap());
    let bad = gamma.cat.reclassified(inj.unwrap(), true, true);
    let report = check_reedy_axioms(&bad);
    assert!(!report.verdict(CHECK_ISOS).unwrap().passed);
}

#[test]
fn tabulated_factorization_agrees_with_tree_factorization() {
    let om = omega();
    for f in 0..om.cat.num_morphisms() {
        let (e, m) = factorize(&om.cat, f).unwrap();
        let (neg, pos) = reedy_factorize(&om.morphisms[f]);
        assert!(om.trees[om.cat.target(e)].is_isomorphic(&neg.target));
        assert_eq!(pos.after(&neg).unwrap().map, om.morphisms[om.cat.compose(m, e)].map);
    }
}

fn category_json(src: &str) -> FiniteCategory {
    FiniteCategory::from_json(&serde_json::from_str(src).unwrap()).unwrap()
}

#[test]
fn json_presentation_round_trip_and_errors() {
    let cat = category_json(
        r#"{"name":"span","objects":[{"name":"r","degree":1},{"name":"s","degree":0},{"name":"t","degree":0}],
            "morphisms":[{"name":"g","source":"r","target":"s","minus":true},
                         {"name":"h","source":"r","target":"t","minus":true}]}"#,
    );
    assert_eq!(cat.num_morphisms(), 5);
    let again = FiniteCategory::from_json(&cat.to_json()).unwrap();
    assert_eq!(again.to_json(), cat.to_json());

    let missing = r#"{"name":"x","objects":[{"name":"a","degree":0}],
        "morphisms":[{"name":"e","source":"a","target":"a"}]}"#;
    let err = FiniteCategory::from_json(&serde_json::from_str(missing).unwrap()).unwrap_err();
    assert!(err.to_string().contains("no composite"));
}

#[test]
fn latching_examples() {
    let om = omega();
    let eta = om.tree_index(&Tree::eta()).unwrap();
    let c1 = om.tree_index(&Tree::corolla(1)).unwrap();
    let rep_eta = TabulatedPresheaf::representable(&om.cat, eta);
    assert!(latching_object(&rep_eta, eta).unwrap().classes.is_empty());

    let rep_c1 = TabulatedPresheaf::representable(&om.cat, c1);
    let l = latching_object(&rep_c1, c1).unwrap();
    // Endomorphisms of C_1 factoring through η: the two constant edge maps.
    let through_eta: Vec<usize> = om
        .cat
        .hom(c1, c1)
        .iter()
        .enumerate()
        .filter(|(_, &f)| om.morphisms[f].map[0] == om.morphisms[f].map[1])
        .map(|(i, _)| i)
        .collect();
    assert_eq!(through_eta.len(), 2);
    let mut image = l.to_x.clone();
    image.sort();
    assert_eq!(image, through_eta);

    let constant = TabulatedPresheaf::constant(&om.cat, 3);
    let l = latching_object(&constant, c1).unwrap();
    let mut image = l.to_x.clone();
    image.sort();
    assert_eq!(image, vec![0, 1, 2]);
}

#[test]
fn latching_maps_of_representables_are_injective_onto_degenerate_elements() {
    let om = OmegaCategory::truncated(2, 5);
    for r in 0..om.cat.num_objects() {
        let x = TabulatedPresheaf::representable(&om.cat, r);
        for s in 0..om.cat.num_objects() {
            let l = latching_object(&x, s).unwrap();
            assert!(l.is_injective());
            let deg = degenerate_elements(&x, s);
            assert_eq!(l.classes.len(), deg.iter().filter(|&&b| b).count());
        }
    }
    // In Γ a map A → 2̲ is degenerate iff its partial map 2̲ ⇸ A misses a point.
    let gamma = SetCategory::gamma(3);
    let x = TabulatedPresheaf::representable(&gamma.cat, 2);
    for a in 0..=3 {
        let l = latching_object(&x, a).unwrap();
        assert!(l.is_injective());
        let expected = gamma.cat.hom(a, 2).iter().filter(|&&f| !gamma.maps[f].is_surjective()).count();
        assert_eq!(l.classes.len(), expected);
    }
}

/// Compatible families by brute force over all tuples.
fn families_by_brute_force(x: &TabulatedPresheaf, sieve: &[usize]) -> usize {
    let cat = x.category().clone();
    let mut count = 0;
    let mut choice = vec![0usize; sieve.len()];
    loop {
        let ok = sieve.iter().enumerate().all(|(i, &f)| {
            cat.arrows_into(cat.source(f)).iter().all(|&u| {
                let fu = cat.compose(f, u);
                let j = sieve.iter().position(|&g| g == fu).unwrap();
                choice[j] == x.act(u, choice[i])
            })
        });
        if ok {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == sieve.len() {
                return count;
            }
            choice[i] += 1;
            if choice[i] < x.size(cat.source(sieve[i])) {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn matching_object_of_the_corolla_boundary_matches_brute_force() {
    let om = OmegaCategory::truncated(2, 4);
    let c2 = om.tree_index(&Tree::corolla(2)).unwrap();
    let x = TabulatedPresheaf::representable(&om.cat, c2);
    let m = matching_object(&x, c2, None).unwrap();
    assert_eq!(m.families.len(), families_by_brute_force(&x, &m.sieve));
    let full = boundary_sieve(&om.cat, c2);
    let with_v = matching_object(&x, c2, Some(&full)).unwrap();
    assert_eq!(with_v, m);

    let empty = matching_object(&x, c2, Some(&[])).unwrap();
    assert_eq!(empty.families.len(), 1);
    assert_eq!(empty.from_x, vec![0; x.size(c2)]);
}

#[test]
fn matching_families_of_a_nerve_like_presheaf_match_brute_force() {
    let om = OmegaCategory::truncated(2, 4);
    let x = TabulatedPresheaf::constant(&om.cat, 2);
    for r in 0..om.cat.num_objects() {
        let m = matching_object(&x, r, None).unwrap();
        if m.sieve.len() > 12 {
            continue;
        }
        assert_eq!(m.families.len(), families_by_brute_force(&x, &m.sieve));
    }
}

#[test]
fn matching_rejects_non_sieves() {
    let om = OmegaCategory::truncated(2, 4);
    let c2 = om.tree_index(&Tree::corolla(2)).unwrap();
    let x = TabulatedPresheaf::terminal(&om.cat);
    let full = boundary_sieve(&om.cat, c2);
    // A single face from η is not closed under precomposition with C_1 → η.
    let eta = om.tree_index(&Tree::eta()).unwrap();
    let one = *full.iter().find(|&&f| om.cat.source(f) == eta).unwrap();
    assert!(matches!(matching_object(&x, c2, Some(&[one])), Err(dendron::Error::NotSieve(_))));
    let id = om.cat.identity(c2);
    assert!(matches!(matching_object(&x, c2, Some(&[id])), Err(dendron::Error::NotSieve(_))));
}

#[test]
fn cofibration_hypotheses_hold_for_omega_and_gamma() {
    let om = omega();
    assert!(check_cofibration_hypotheses(&om.cat).hold());
    let gamma = SetCategory::gamma(3);
    assert!(check_cofibration_hypotheses(&gamma.cat).hold());
}

#[test]
fn absolute_pushout_examples() {
    let om = omega();
    let l2 = Arc::new(Tree::linear(2));
    let r = om.tree_index(&l2).unwrap();
    let id = om.cat.identity(r);
    let w = has_absolute_pushout(&om.cat, id, id).unwrap().unwrap();
    assert!(verify_pushout_witness(&om.cat, &w));

    let degs: Vec<usize> = degeneracies(&l2).iter().map(|d| om.canonical_morphism_index(d).unwrap()).collect();
    assert_eq!(degs.len(), 2);
    assert_ne!(degs[0], degs[1]);
    let w = has_absolute_pushout(&om.cat, degs[0], degs[1]).unwrap().unwrap();
    assert!(verify_pushout_witness(&om.cat, &w));
    assert_eq!(om.trees[om.cat.target(w.p)].degree(), 0);

    let span = category_json(
        r#"{"name":"span","objects":[{"name":"r","degree":1},{"name":"s","degree":0},{"name":"t","degree":0}],
            "morphisms":[{"name":"g","source":"r","target":"s","minus":true},
                         {"name":"h","source":"r","target":"t","minus":true}]}"#,
    );
    let (g, h) = (span.morphism_index("g").unwrap(), span.morphism_index("h").unwrap());
    assert_eq!(has_absolute_pushout(&span, g, h).unwrap(), None);
    assert!(!check_cofibration_hypotheses(&span).hold());
}

#[test]
fn normal_monomorphisms() {
    let om = omega();
    let hyp = check_cofibration_hypotheses(&om.cat);
    for r in 0..om.cat.num_objects() {
        let y = TabulatedPresheaf::representable(&om.cat, r);
        let empty = TabulatedPresheaf::empty(&om.cat);
        let f = PresheafMap { components: vec![Vec::new(); om.cat.num_objects()] };
        assert!(is_normal_mono(&empty, &y, &f, &hyp).unwrap().normal());
    }
    // Ω[C_2] modulo the swap of its leaves.
    let c2 = om.tree_index(&Tree::corolla(2)).unwrap();
    let y = TabulatedPresheaf::representable(&om.cat, c2);
    let autos = om.cat.automorphisms(c2);
    let pos = |f: usize| om.cat.hom(c2, c2).iter().position(|&g| g == f).unwrap();
    let (q, _) = y.quotient(&[(c2, pos(autos[0]), pos(autos[1]))]);
    let empty = TabulatedPresheaf::empty(&om.cat);
    let f = PresheafMap { components: vec![Vec::new(); om.cat.num_objects()] };
    let v = is_normal_mono(&empty, &q, &f, &hyp).unwrap();
    assert!(!v.normal());
    assert!(v.witness.is_some());

    let span = category_json(
        r#"{"name":"span","objects":[{"name":"r","degree":1},{"name":"s","degree":0}],
            "morphisms":[{"name":"g","source":"r","target":"s","minus":true}]}"#,
    );
    let hyp = check_cofibration_hypotheses(&span);
    let x = TabulatedPresheaf::empty(&Arc::new(span));
    let f = PresheafMap { components: vec![Vec::new(); 2] };
    assert!(is_normal_mono(&x, &x, &f, &hyp).is_err());
}

#[test]
fn quotient_and_restriction_are_presheaves() {
    let gamma = SetCategory::gamma(2);
    let y = TabulatedPresheaf::representable(&gamma.cat, 1);
    let (q, proj) = y.quotient(&[(1, 0, 1)]);
    q.check_functorial().unwrap();
    proj.check_natural(&y, &q).unwrap();
    assert!(proj.is_surjective(&q));
    let sub = Subobject::generated(&y, &[(0, 0)]);
    let (s, inc) = y.restrict_to(&sub).unwrap();
    s.check_functorial().unwrap();
    inc.check_natural(&s, &y).unwrap();
    assert!(inc.is_injective(&y));
    assert!(y.restrict_to(&Subobject { mask: vec![vec![false], vec![true, false], vec![false; 3]] }).is_err());
}

#[test]
fn natural_maps_out_of_a_representable_are_elements() {
    let om = OmegaCategory::truncated(2, 4);
    let x = TabulatedPresheaf::constant(&om.cat, 2).coproduct(&TabulatedPresheaf::representable(&om.cat, 0));
    for r in 0..om.cat.num_objects() {
        let rep = TabulatedPresheaf::representable(&om.cat, r);
        assert_eq!(NaturalMapSearch::new(&rep, &x).count(), x.size(r));
    }
}

#[test]
fn lifting_against_an_isomorphism_and_an_exhausted_square() {
    let gamma = SetCategory::gamma(2);
    let cat = gamma.cat.clone();
    let b = TabulatedPresheaf::representable(&cat, 1);
    let x = TabulatedPresheaf::constant(&cat, 2);
    let y = TabulatedPresheaf::terminal(&cat);
    let to_point = |p: &TabulatedPresheaf| PresheafMap { components: p.sizes().iter().map(|&s| vec![0; s]).collect() };
    // i = identity: the filler is f.
    let f = NaturalMapSearch::new(&b, &x).first().unwrap();
    let id = PresheafMap::identity(&b);
    let sq = LiftingSquare { a: &b, b: &b, x: &x, y: &y, i: &id, p: &to_point(&x), f: &f, g: &to_point(&b) };
    assert_eq!(solve_lifting(&sq).unwrap(), Lifting::Filler(f.clone()));

    // p: ∅ → 1 cannot be lifted against ∅ → B when B is non-empty.
    let empty = TabulatedPresheaf::empty(&cat);
    let none = PresheafMap { components: vec![Vec::new(); cat.num_objects()] };
    let sq = LiftingSquare { a: &empty, b: &b, x: &empty, y: &y, i: &none, p: &none, f: &none, g: &to_point(&b) };
    assert!(matches!(solve_lifting(&sq).unwrap(), Lifting::Exhausted { .. }));

    // A square that does not commute is rejected.
    let two = TabulatedPresheaf::constant(&cat, 2);
    let swap = PresheafMap { components: two.sizes().iter().map(|_| vec![1, 0]).collect() };
    let idt = PresheafMap::identity(&two);
    let sq = LiftingSquare { a: &two, b: &two, x: &two, y: &two, i: &idt, p: &idt, f: &idt, g: &swap };
    assert!(solve_lifting(&sq).is_err());
}

/// A random presheaf: a coproduct of representables modulo random relations.
fn random_presheaf(cat: &Arc<FiniteCategory>, reps: &[usize], rel: &[(usize, usize, usize)]) -> TabulatedPresheaf {
    let mut x = TabulatedPresheaf::empty(cat);
    for &r in reps {
        x = x.coproduct(&TabulatedPresheaf::representable(cat, r % cat.num_objects()));
    }
    let pairs: Vec<(usize, usize, usize)> = rel
        .iter()
        .filter_map(|&(o, a, b)| {
            let o = o % cat.num_objects();
            let n = x.size(o);
            (n > 0).then(|| (o, a % n, b % n))
        })
        .collect();
    x.quotient(&pairs).0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn latching_and_matching_maps_are_natural(
        reps in proptest::collection::vec(0usize..8, 1..3),
        rel in proptest::collection::vec((0usize..8, 0usize..16, 0usize..16), 0..3),
        use_gamma in any::<bool>(),
    ) {
        let cat = if use_gamma { SetCategory::gamma(2).cat } else { OmegaCategory::truncated(2, 4).cat };
        let x = random_presheaf(&cat, &reps, &rel);
        x.check_functorial().unwrap();
        for r in 0..cat.num_objects() {
            let l = latching_object(&x, r).unwrap();
            let m = matching_object(&x, r, None).unwrap();
            // Along a negative u: r' → r, [g, y] ↦ [g u, y].
            for &u in cat.arrows_into(r) {
                if !cat.is_minus(u) {
                    continue;
                }
                let r2 = cat.source(u);
                let l2 = latching_object(&x, r2).unwrap();
                for (c, &(g, y)) in l.classes.iter().enumerate() {
                    let image = x.act(u, l.to_x[c]);
                    let gu = cat.compose(g, u);
                    prop_assert!(cat.is_properly_minus(gu));
                    let expected = x.act(gu, y);
                    prop_assert_eq!(image, expected);
                    prop_assert!(l2.to_x.contains(&image));
                }
            }
            // Along a positive u: r → r', families restrict by precomposition.
            for &u in cat.arrows_out(r) {
                if !cat.is_plus(u) {
                    continue;
                }
                let m2 = matching_object(&x, cat.target(u), None).unwrap();
                for a in 0..x.size(cat.target(u)) {
                    let fam2 = &m2.families[m2.from_x[a]];
                    let restricted: Vec<usize> = m.sieve.iter().map(|&h| {
                        let uh = cat.compose(u, h);
                        fam2[m2.sieve.iter().position(|&k| k == uh).unwrap()]
                    }).collect();
                    prop_assert_eq!(&restricted, &m.families[m.from_x[x.act(u, a)]]);
                }
            }
        }
    }
}
