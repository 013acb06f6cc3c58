use std::sync::Arc;

use dendron::presheaf::*;
use dendron::reedy_core::*;
use dendron::tree_cat::*;

fn omega() -> OmegaCategory {
    OmegaCategory::truncated(3, 6)
}

fn idx(om: &OmegaCategory, code: &str) -> usize {
    om.tree_index(&Tree::from_code(code).unwrap()).unwrap()
}

#[test]
fn representable_of_eta_counts_maps_into_eta() {
    let om = omega();
    let eta = om.tree_index(&Tree::eta()).unwrap();
    let x = representable(&om.cat, eta);
    let target = Arc::new(Tree::eta());
    for (s, t) in om.trees.iter().enumerate() {
        // Oracle: the constant edge map is the only candidate.
        let valid = validate_morphism(t.clone(), target.clone(), vec![0; t.len()]).is_ok();
        assert_eq!(x.size(s), valid as usize, "{}", t.encoding());
    }
    x.check_functorial().unwrap();
}

#[test]
fn representable_values() {
    let om = omega();
    let eta = om.tree_index(&Tree::eta()).unwrap();
    let c2 = om.tree_index(&Tree::corolla(2)).unwrap();
    assert_eq!(representable(&om.cat, c2).size(eta), 3);
    let gamma = SetCategory::gamma(4);
    let f1 = representable(&gamma.cat, 1);
    for a in 0..=4 {
        assert_eq!(f1.size(a), a + 1);
    }
}

#[test]
fn segal_core_boundary_and_horn_examples() {
    let om = omega();
    for n in 0..=3 {
        let c = om.tree_index(&Tree::corolla(n)).unwrap();
        let sc = boundary_horn_core(&om, c, Which::SegalCore).unwrap();
        assert_eq!(sc.selected, Subobject::full(&sc.ambient));
    }
    let eta = om.tree_index(&Tree::eta()).unwrap();
    assert_eq!(boundary_horn_core(&om, eta, Which::Boundary).unwrap().selected.count(), 0);

    // C_2 grafted onto the leaf of C_1.
    let t = idx(&om, "((||))");
    assert_eq!(om.trees[t].degree(), 2);
    let c2 = om.tree_index(&Tree::corolla(2)).unwrap();
    let sc = boundary_horn_core(&om, t, Which::SegalCore).unwrap();
    // Only degenerate endomorphisms (through the top corolla) lie in Sc[T](T).
    let degenerate = degenerate_elements(&sc.ambient, t);
    assert!(sc.selected.count_at(t) > 0);
    assert!((0..sc.ambient.size(t)).all(|a| !sc.selected.contains(t, a) || degenerate[a]));
    assert_eq!(sc.ambient.size(c2), 4);
    assert_eq!(sc.selected.count_at(c2), 2);

    let leaf = om.trees[t].leaves()[0];
    assert!(boundary_horn_core(&om, t, Which::Horn(leaf)).is_err());
}

#[test]
fn subobjects_are_sieves_and_nest() {
    let om = omega();
    for t in 0..om.trees.len() {
        let omega_t = representable(&om.cat, t);
        let full = Subobject::full(&omega_t);
        let sc = boundary_horn_core(&om, t, Which::SegalCore).unwrap();
        let bd = boundary_horn_core(&om, t, Which::Boundary).unwrap();
        sc.selected.check_closed(&omega_t).unwrap();
        bd.selected.check_closed(&omega_t).unwrap();
        assert!(bd.selected.is_subset_of(&full));
        assert!(!bd.selected.contains(t, om.cat.hom(t, t).iter().position(|&f| om.cat.is_identity(f)).unwrap()));
        let mut sieve = boundary_sieve(&om.cat, t);
        sieve.sort();
        assert_eq!(sieve.len(), bd.selected.count());
        for e in om.trees[t].inner_edges() {
            let horn = boundary_horn_core(&om, t, Which::Horn(e)).unwrap();
            horn.selected.check_closed(&omega_t).unwrap();
            assert!(sc.selected.is_subset_of(&horn.selected));
            assert!(horn.selected.is_subset_of(&bd.selected));
        }
    }
}

#[test]
fn strict_segal_verdicts() {
    let om = omega();
    assert!(check_strict_segal(&om, &TabulatedPresheaf::terminal(&om.cat)).unwrap().passed);
    // Representables are operad nerves and hence strictly Segal.
    for t in 0..om.trees.len() {
        let rep = representable(&om.cat, t);
        let report = check_strict_segal(&om, &rep).unwrap();
        assert!(report.passed, "{}: {:?}", om.trees[t].encoding(), report.witness);
        assert!(report.strict_only);
    }
    // Segal cores and horns of trees with inner edges are not.
    for t in 0..om.trees.len() {
        if om.trees[t].inner_edges().is_empty() {
            continue;
        }
        let sc = boundary_horn_core(&om, t, Which::SegalCore).unwrap();
        let (x, _) = sc.ambient.restrict_to(&sc.selected).unwrap();
        assert!(!check_strict_segal(&om, &x).unwrap().passed);
        let e = om.trees[t].inner_edges()[0];
        let horn = boundary_horn_core(&om, t, Which::Horn(e)).unwrap();
        let (x, _) = horn.ambient.restrict_to(&horn.selected).unwrap();
        assert!(!check_strict_segal(&om, &x).unwrap().passed);
    }
}

#[test]
fn corolla_families_agree_with_the_generic_limit() {
    let om = OmegaCategory::truncated(3, 5);
    let c2 = om.tree_index(&Tree::corolla(2)).unwrap();
    let t = idx(&om, "((||))");
    let sc = boundary_horn_core(&om, t, Which::SegalCore).unwrap();
    let (core, _) = sc.ambient.restrict_to(&sc.selected).unwrap();
    let fixtures = [
        TabulatedPresheaf::terminal(&om.cat),
        TabulatedPresheaf::constant(&om.cat, 2),
        representable(&om.cat, c2),
        representable(&om.cat, t),
        core,
    ];
    for x in &fixtures {
        for tree in 0..om.trees.len() {
            let (count, _) = segal_families(&om, x, tree).unwrap();
            assert_eq!(count, segal_core_maps(&om, x, tree).unwrap(), "{}", om.trees[tree].encoding());
        }
    }
}

fn lambda() -> LeafFunctor {
    LeafFunctor::standard(3, 5, 4).unwrap()
}

#[test]
fn lambda_star_examples() {
    let l = lambda();
    let y = representable(&l.gamma.cat, 2);
    let ly = l.pullback(&y);
    ly.check_functorial().unwrap();
    let eta = l.omega.tree_index(&Tree::eta()).unwrap();
    assert_eq!(ly.size(eta), y.size(1));
    assert!(LeafFunctor::standard(2, 5, 2).is_err());
}

#[test]
fn lambda_shriek_of_representables() {
    let l = lambda();
    for (t, tree) in l.omega.trees.iter().enumerate() {
        let ext = l.left_kan(&representable(&l.omega.cat, t));
        ext.presheaf.check_functorial().unwrap();
        let n = tree.leaves().len();
        let target = representable(&l.gamma.cat, n);
        // [S, α, ψ] ↦ λ(α) ∘ ψ is an isomorphism onto F(λT, −).
        let iso = PresheafMap {
            components: ext
                .representatives
                .iter()
                .map(|reps| {
                    reps.iter()
                        .map(|&(s, el, psi)| {
                            let alpha = l.omega.cat.hom(s, t)[el];
                            let a = l.gamma.cat.source(psi);
                            let m = l.gamma.cat.compose(l.on_morphisms[alpha], psi);
                            l.gamma.cat.hom(a, n).iter().position(|&g| g == m).unwrap()
                        })
                        .collect()
                })
                .collect(),
        };
        iso.check_natural(&ext.presheaf, &target).unwrap();
        assert!(iso.is_injective(&target) && iso.is_surjective(&target), "{}", tree.encoding());
    }
}

#[test]
fn lambda_shriek_of_two_points_is_not_f_of_two() {
    let l = lambda();
    let eta = l.omega.tree_index(&Tree::eta()).unwrap();
    let two = representable(&l.omega.cat, eta).coproduct(&representable(&l.omega.cat, eta));
    let ext = l.left_kan(&two);
    for a in 0..=4 {
        assert_eq!(ext.presheaf.size(a), 2 * (a + 1));
    }
    assert_eq!(ext.presheaf.size(2), 6);
    assert_eq!(representable(&l.gamma.cat, 2).size(2), 9);
}

#[test]
fn adjunction_on_fixture_pairs() {
    let l = LeafFunctor::standard(2, 4, 3).unwrap();
    let om = l.omega.cat.clone();
    let eta = l.omega.tree_index(&Tree::eta()).unwrap();
    let c2 = l.omega.tree_index(&Tree::corolla(2)).unwrap();
    let xs = [
        representable(&om, eta),
        representable(&om, c2),
        representable(&om, eta).coproduct(&representable(&om, eta)),
        TabulatedPresheaf::terminal(&om),
    ];
    let g = l.gamma.cat.clone();
    let ys = [representable(&g, 1), representable(&g, 2), TabulatedPresheaf::terminal(&g)];
    for x in &xs {
        for y in &ys {
            let report = check_adjunction(&l, x, y);
            assert!(report.passed(), "{report:?}");
        }
    }
}

#[test]
fn segal_core_inclusions_and_representables_are_normal() {
    let om = omega();
    let hyp = check_cofibration_hypotheses(&om.cat);
    for t in 0..om.trees.len() {
        let sc = boundary_horn_core(&om, t, Which::SegalCore).unwrap();
        let (core, inc) = sc.ambient.restrict_to(&sc.selected).unwrap();
        assert!(is_normal_mono(&core, &sc.ambient, &inc, &hyp).unwrap().normal());
    }
    let gamma = SetCategory::gamma(3);
    let hyp = check_cofibration_hypotheses(&gamma.cat);
    for l in 0..=3 {
        let y = representable(&gamma.cat, l);
        let empty = TabulatedPresheaf::empty(&gamma.cat);
        let f = PresheafMap { components: vec![Vec::new(); 4] };
        assert!(is_normal_mono(&empty, &y, &f, &hyp).unwrap().normal());
    }
}

#[test]
fn presheaf_json_round_trip() {
    let gamma = SetCategory::gamma(2);
    let y = representable(&gamma.cat, 1);
    let json = presheaf_to_json(&y);
    let back = presheaf_from_json(&gamma.cat, &json).unwrap();
    assert_eq!(presheaf_to_json(&back), json);
    let text = serde_json::to_string(&json).unwrap();
    let parsed: PresheafJson = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, json);
}
