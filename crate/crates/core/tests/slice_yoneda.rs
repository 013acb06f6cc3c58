#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use dendron::operad::*;
use dendron::reedy_core::*;
use dendron::slice_yoneda::*;
use dendron::tree_cat::*;
use dendron::Error;
use proptest::prelude::*;

fn tree(code: &str) -> Arc<Tree> {
    Arc::new(Tree::from_code(code).unwrap())
}

fn eta() -> Arc<Tree> {
    Arc::new(Tree::eta())
}

#[test]
fn attachment_groupoid_examples() {
    let g = attachment_groupoid(&eta(), 2);
    assert_eq!(g.num_objects(), 3);
    let auts: Vec<usize> = (0..3).map(|o| g.automorphisms(o).len()).collect();
    assert_eq!(auts, vec![1, 1, 2]);
    assert_eq!(g.num_components(), 3);

    let g = attachment_groupoid(&Arc::new(Tree::corolla(2)), 1);
    assert_eq!(g.num_objects(), 4);
    assert!((0..4).all(|o| g.automorphisms(o).len() == 1));

    // A leafless tree has only the trivial attachment.
    let g = attachment_groupoid(&tree("(())"), 3);
    assert_eq!(g.num_objects(), 1);

    let om = OmegaCategory::truncated(2, 4);
    for t in &om.trees {
        for b in 0..=2 {
            let g = attachment_groupoid(t, b);
            assert_eq!(g.num_objects(), (b + 1).pow(t.leaves().len() as u32));
            g.check_closed().unwrap();
        }
    }
}

#[test]
fn automorphisms_are_the_isomorphisms_under_t() {
    // Oracle: every endomorphism of T♯ that is a bijection fixing T.
    for (code, arities) in [("|", vec![3]), ("(||)", vec![2, 1]), ("(|(||))", vec![2, 0, 2]), ("((|)|)", vec![1, 2])] {
        let t = tree(code);
        let att = CorollaAttachment::new(&t, &arities).unwrap();
        let brute: BTreeSet<Vec<usize>> = enumerate_homs(&att.sharp, &att.sharp, att.sharp.len())
            .unwrap()
            .into_iter()
            .filter(|f| f.is_iso() && (0..t.len()).all(|e| f.map[e] == e))
            .map(|f| f.map)
            .collect();
        let ours: BTreeSet<Vec<usize>> =
            att.automorphisms().iter().map(|p| att.automorphism(p).unwrap().map).collect();
        assert_eq!(ours, brute, "{code} {arities:?}");
    }
}

#[test]
fn attachment_shape() {
    let t = Arc::new(figure_tree());
    let att = CorollaAttachment::new(&t, &[1, 2, 0]).unwrap();
    assert_eq!(att.leaf_count(), 3);
    assert_eq!(att.sharp.len(), t.len() + 3);
    let leaves: BTreeSet<usize> = att.sharp.leaves().into_iter().collect();
    assert_eq!(leaves, att.sharp_leaves().into_iter().collect());
    // An arity-0 corolla caps the leaf.
    let c = t.edge("c").unwrap();
    assert!(att.sharp.is_capped(c));
    assert!(CorollaAttachment::new(&t, &[1, 2]).is_err());
}

#[test]
fn attachments_are_functorial() {
    let om = OmegaCategory::truncated(3, 5);
    let start = Instant::now();
    let r = check_attachment_functoriality(&om, 1).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.pairs_checked > 0 && r.squares_checked > 0);
    eprintln!("functoriality on Ω≤(3,5), b = 1: {} pairs in {:?}", r.pairs_checked, start.elapsed());

    let om = OmegaCategory::truncated(2, 4);
    let r = check_attachment_functoriality(&om, 3).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn figure_tree_faces() {
    let t = Arc::new(figure_tree());
    let (a, b, c, f, s) = ["a", "b", "c", "f", "s"].map(|n| t.edge(n).unwrap()).into();
    let leaves = t.leaves();
    assert_eq!(leaves, vec![a, b, c]);
    let att = CorollaAttachment::new(&t, &[1, 2, 3]).unwrap();
    let mut seen = BTreeSet::new();
    for (kind, alpha) in faces(&t) {
        let (restricted, pushed) = attachment_restrict(&alpha, &att).unwrap();
        assert_eq!(restricted.leaf_count(), restricted.sharp_leaves().len());
        assert!(pushed.map.iter().collect::<HashSet<_>>().len() == pushed.map.len());
        let arity_of = |e: usize| {
            let s_leaves = alpha.source.leaves();
            let i = s_leaves.iter().position(|&l| alpha.map[l] == e).unwrap();
            restricted.arities[i]
        };
        match kind {
            Elementary::TopFace if !alpha.map.contains(&c) => {
                // The unary vertex over f goes: f inherits the corolla of c.
                assert_eq!(arity_of(f), 3);
                seen.insert("f");
            }
            Elementary::TopFace if alpha.map.len() == t.len() => {
                // The stump goes: s is a new leaf with nothing above it.
                assert_eq!(arity_of(s), 0);
                assert_eq!(arity_of(a), 1);
                seen.insert("s");
            }
            Elementary::InnerFace => {
                assert_eq!(restricted.arities, vec![1, 2, 3]);
                seen.insert("e");
            }
            Elementary::RootFace => {
                assert_eq!(restricted.arities, vec![2, 3]);
                seen.insert("root");
            }
            _ => {}
        }
    }
    assert_eq!(seen, ["e", "f", "root", "s"].into_iter().collect());
}

/// Orbits of all compatible triples on one attachment, by breadth-first
/// search under the automorphisms.
fn brute_orbits<X: DendroidalSet>(x: &X, sigma: &[X::Element], att: &CorollaAttachment) -> usize {
    let leaves = att.sharp_leaves();
    let mut triples = BTreeSet::new();
    for a in x.elements(&att.sharp).unwrap() {
        let mut xis = vec![Vec::new()];
        for &l in &leaves {
            let v = x.restrict(&dendron::presheaf::edge_inclusion(&att.sharp, l), &a).unwrap();
            let us: Vec<usize> = (0..sigma.len()).filter(|&u| sigma[u] == v).collect();
            xis = xis
                .into_iter()
                .flat_map(|xi: Vec<usize>| {
                    us.iter().map(move |&u| {
                        let mut n = xi.clone();
                        n.push(u);
                        n
                    })
                })
                .collect();
        }
        for xi in xis {
            triples.insert((a.clone(), xi));
        }
    }
    let auts = att.automorphisms();
    let mut seen = BTreeSet::new();
    let mut orbits = 0;
    for t in &triples {
        if seen.contains(t) {
            continue;
        }
        orbits += 1;
        let mut queue = VecDeque::from([t.clone()]);
        seen.insert(t.clone());
        while let Some((a, xi)) = queue.pop_front() {
            for p in &auts {
                let tau = att.automorphism(p).unwrap();
                let next = (x.restrict(&tau, &a).unwrap(), p.iter().map(|&q| xi[q]).collect::<Vec<_>>());
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    orbits
}

#[test]
fn classes_match_brute_force_orbits() {
    let ass = ass_operad(4);
    let nerve = OperadNerve(&ass);
    let sigma = nerve.elements(&eta()).unwrap();
    let two = vec![sigma[0].clone(), sigma[0].clone()];
    let com = com_operad(4);
    let cnerve = OperadNerve(&com);
    let csigma = cnerve.elements(&eta()).unwrap();
    for code in ["|", "(||)", "(|())", "((||))"] {
        let t = tree(code);
        let classes = slice_classes(&nerve, &two, &t, 3).unwrap();
        let cclasses = slice_classes(&cnerve, &csigma, &t, 3).unwrap();
        for arities in arity_functions(t.leaves().len(), 3) {
            if arities.iter().sum::<usize>() > 3 {
                continue;
            }
            let att = CorollaAttachment::new(&t, &arities).unwrap();
            let ours = classes.iter().filter(|c| c.attachment.arities == arities).count();
            assert_eq!(ours, brute_orbits(&nerve, &two, &att), "{code} {arities:?}");
            let ours = cclasses.iter().filter(|c| c.attachment.arities == arities).count();
            assert_eq!(ours, brute_orbits(&cnerve, &csigma, &att), "{code} {arities:?}");
        }
    }
    // Com has one operation in each positive arity and none in arity 0.
    let cl = slice_classes(&cnerve, &csigma, &eta(), 3).unwrap();
    let arities: Vec<Vec<usize>> = cl.iter().map(|c| c.attachment.arities.clone()).collect();
    assert_eq!(arities, vec![vec![1], vec![2], vec![3]]);
}

#[test]
fn canonical_form_is_stable_under_relabelling() {
    let ass = ass_operad(4);
    let nerve = OperadNerve(&ass);
    let t = tree("(||)");
    let att = CorollaAttachment::new(&t, &[2, 1]).unwrap();
    for a in nerve.elements(&att.sharp).unwrap() {
        for xi in [vec![0, 1, 2], vec![2, 2, 0], vec![1, 0, 1]] {
            let base = canonical_triple(&nerve, &att, &a, &xi).unwrap();
            for p in att.automorphisms() {
                let tau = att.automorphism(&p).unwrap();
                let moved = nerve.restrict(&tau, &a).unwrap();
                let mxi: Vec<usize> = p.iter().map(|&q| xi[q]).collect();
                assert_eq!(canonical_triple(&nerve, &att, &moved, &mxi).unwrap(), base);
            }
        }
    }
}

#[test]
fn slice_of_ass_nerve() {
    let om = OmegaCategory::truncated(2, 4);
    let ass = ass_operad(4);
    let nerve = OperadNerve(&ass);
    let sigma = nerve.elements(&eta()).unwrap();
    let slice = slice_construction(&nerve, &sigma, &om, 2).unwrap();
    slice.presheaf.check_functorial().unwrap();
    slice.projection.check_natural(&slice.presheaf, &slice.base).unwrap();
    assert!(slice.segal_verified);
    assert!(slice.leafless_bijective(&om));
    let r = check_slice_covariance(&slice, &om).unwrap();
    assert!(r.passed && r.bound_relative && r.base_segal, "{r:?}");
    assert!(r.corollas_checked >= 3);

    let lift = canonical_lift(&nerve, &sigma, &slice, &om).unwrap();
    let eta_i = om.tree_index(&Tree::eta()).unwrap();
    for (u, &c) in lift.iter().enumerate() {
        let x = slice.projection.apply(eta_i, c);
        assert_eq!(slice.base_elements[eta_i][x], sigma[u]);
    }
}

#[test]
fn slice_with_several_units() {
    let om = OmegaCategory::truncated(2, 4);
    let com = com_operad(4);
    let nerve = OperadNerve(&com);
    let s = nerve.elements(&eta()).unwrap()[0].clone();
    let sigma = vec![s.clone(), s];
    let slice = slice_construction(&nerve, &sigma, &om, 2).unwrap();
    slice.presheaf.check_functorial().unwrap();
    slice.projection.check_natural(&slice.presheaf, &slice.base).unwrap();
    let r = check_slice_covariance(&slice, &om).unwrap();
    assert!(r.passed, "{r:?}");
    let lift = canonical_lift(&nerve, &sigma, &slice, &om).unwrap();
    assert_ne!(lift[0], lift[1]);

    // A corrupted projection breaks injectivity over the corollas.
    let mut broken = slice.clone();
    let c2 = om.tree_index(&Tree::corolla(2)).unwrap();
    let n = broken.presheaf.size(c2);
    let mut action: Vec<Vec<usize>> = (0..om.cat.num_morphisms()).map(|f| broken.presheaf.action(f).to_vec()).collect();
    for f in 0..om.cat.num_morphisms() {
        if om.cat.target(f) == c2 && n > 1 {
            action[f][1] = action[f][0];
        }
    }
    broken.presheaf = TabulatedPresheaf::new_unchecked(om.cat.clone(), broken.presheaf.sizes().to_vec(), action);
    broken.projection.components[c2][1] = broken.projection.components[c2][0];
    let r = check_slice_covariance(&broken, &om).unwrap();
    assert!(!r.passed);
    assert!(r.witness.is_some());
}

#[test]
fn empty_unit_set() {
    let om = OmegaCategory::truncated(2, 4);
    let slice = slice_construction(&TerminalSet, &[], &om, 2).unwrap();
    for (t, cs) in slice.classes.iter().enumerate() {
        assert!(cs.iter().all(|c| c.attachment.arities.iter().all(|&n| n == 0)));
        // Only the attachment capping every leaf remains, so π is a bijection.
        assert_eq!(cs.len(), slice.base.size(t));
    }
    assert!(check_slice_covariance(&slice, &om).unwrap().passed);
    // Non-unital Ass has nothing on capped trees.
    let ass = ass_operad(4);
    let slice = slice_construction(&OperadNerve(&ass), &[], &om, 2).unwrap();
    let leafy = om.trees.iter().position(|t| !t.leaves().is_empty()).unwrap();
    assert!(slice.classes[leafy].is_empty());
}

#[test]
fn slice_of_representable_eta() {
    let om = OmegaCategory::truncated(2, 4);
    let x = RepresentableSet(eta());
    let sigma = x.elements(&eta()).unwrap();
    assert_eq!(sigma.len(), 1);
    let slice = slice_construction(&x, &sigma, &om, 3).unwrap();
    let e = om.tree_index(&Tree::eta()).unwrap();
    // Hom(C_n, η) is empty unless n = 1.
    assert_eq!(slice.classes[e].len(), 1);
    assert_eq!(slice.classes[e][0].attachment.arities, vec![1]);
    assert_eq!(canonical_lift(&x, &sigma, &slice, &om).unwrap(), vec![0]);
    slice.presheaf.check_functorial().unwrap();
    assert!(check_slice_covariance(&slice, &om).unwrap().passed);
}

#[test]
fn slice_of_terminal() {
    let om = OmegaCategory::truncated(2, 4);
    let slice = slice_construction(&TerminalSet, &[()], &om, 2).unwrap();
    let e = om.tree_index(&Tree::eta()).unwrap();
    // One class per arity 0..=2 over η.
    assert_eq!(slice.classes[e].len(), 3);
    assert!(check_slice_covariance(&slice, &om).unwrap().passed);
}

#[test]
fn tabulated_input_agrees_and_bounds_are_reported() {
    let small = OmegaCategory::truncated(1, 3);
    let ass = ass_operad(4);
    let nerve = OperadNerve(&ass);
    let (tab, _) = tabulate_dendroidal(&nerve, &small).unwrap();
    tab.check_functorial().unwrap();
    let x = TabulatedSet { omega: &small, presheaf: &tab };
    // C_1 with a unary corolla on top has two vertices.
    let err = slice_construction(&x, &[0], &small, 1).unwrap_err();
    assert!(matches!(err, Error::BoundExceeded { ref what, limit: 1, actual: 2 } if what == "tree vertices"), "{err:?}");
    // With room for T♯, the counts agree with the nerve itself.
    let big = OmegaCategory::truncated(3, 5);
    let (tab, _) = tabulate_dendroidal(&nerve, &big).unwrap();
    let x = TabulatedSet { omega: &big, presheaf: &tab };
    let direct = slice_construction(&nerve, &nerve.elements(&eta()).unwrap(), &small, 1).unwrap();
    let via = slice_construction(&x, &[0], &small, 1).unwrap();
    assert_eq!(direct.presheaf.sizes(), via.presheaf.sizes());
    assert!(canonical_lift(&x, &[0], &slice_construction(&x, &[0], &small, 0).unwrap(), &small).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn restriction_preserves_total_leaves(n in 0usize..=3, arity in proptest::collection::vec(0usize..=2, 3)) {
        let t = Arc::new(Tree::corolla(n));
        let att = CorollaAttachment::new(&t, &arity[..n]).unwrap();
        for (_, alpha) in faces(&t) {
            let (r, pushed) = attachment_restrict(&alpha, &att).unwrap();
            prop_assert!(r.leaf_count() <= att.leaf_count());
            // i_*α extends α.
            prop_assert_eq!(&pushed.map[..alpha.source.len()], &alpha.map[..]);
        }
    }
}
