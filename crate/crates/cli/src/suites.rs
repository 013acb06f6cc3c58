use std::path::Path;
use std::sync::Arc;

use dendron::finset_cat::{leaf_functor, FinSet, PartialMap};
use dendron::gamma_bpq::*;
use dendron::operad::{check_strict_covariant_fibration, compare_g_constructions, dendroidal_nerve, tree_operad, underline_g};
use dendron::presheaf::{boundary_horn_core, check_adjunction, check_strict_segal, LeafFunctor, Which};
use dendron::reedy_core::*;
use dendron::slice_yoneda::*;
use dendron::tree_cat::*;

use crate::bounds::{Bounds, Resolver};
use crate::fixtures::{self, Fixtures};
use crate::report::{CheckResult, VerificationReport};

pub const SUITES: [&str; 9] = [
    "omega-combinatorics",
    "reedy-axioms",
    "segal",
    "covariant",
    "slice",
    "lambda-adjunction",
    "bpq-special",
    "bpq-cofibrant",
    "lstar-pushout",
];

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`; registered suites: {list}", list = SUITES.join(", "))]
    Unknown(String),
    #[error(transparent)]
    Core(#[from] dendron::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Runs a registered suite and, given a path, writes its JSON report there.
pub fn run_suite(name: &str, bounds: &Bounds, fixtures: &Fixtures, output: Option<&Path>) -> Result<VerificationReport, SuiteError> {
    let mut r = Resolver::new(bounds);
    let checks = match name {
        "omega-combinatorics" => omega_combinatorics(&mut r)?,
        "reedy-axioms" => reedy_axioms(&mut r)?,
        "segal" => segal(&mut r, fixtures)?,
        "covariant" => covariant(&mut r, fixtures)?,
        "slice" => slice(&mut r, fixtures)?,
        "lambda-adjunction" => lambda_adjunction(&mut r)?,
        "bpq-special" => bpq_special(&mut r)?,
        "bpq-cofibrant" => bpq_cofibrant(&mut r)?,
        "lstar-pushout" => lstar_pushout(&mut r)?,
        _ => return Err(SuiteError::Unknown(name.to_string())),
    };
    let report = VerificationReport::new(name, r.used, checks);
    if let Some(path) = output {
        std::fs::write(path, report.to_json()).map_err(|source| SuiteError::Io { path: path.display().to_string(), source })?;
    }
    Ok(report)
}

/// Accumulates cases and keeps the first failure.
struct Tally {
    name: String,
    cases: usize,
    witness: Option<String>,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Tally { name: name.into(), cases: 0, witness: None }
    }

    fn case(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn done(self) -> CheckResult {
        CheckResult::new(self.name, self.witness.is_none(), self.cases, self.witness)
    }
}

fn set(n: usize) -> FinSet {
    FinSet::skeleton(n)
}

fn omega_combinatorics(r: &mut Resolver) -> dendron::Result<Vec<CheckResult>> {
    let v = r.take("tree-vertices", 4);
    let e = r.take("tree-edges", 6);
    let n = r.take("arity", 4);
    let trees: Vec<Arc<Tree>> = trees_up_to(v, e).into_iter().map(Arc::new).collect();
    let eta = Arc::new(Tree::eta());
    let mut out = Vec::new();

    let mut t = Tally::new("hom-eta-counts-edges");
    for tree in &trees {
        let homs = enumerate_homs(&eta, tree, usize::MAX)?.len();
        t.case(homs == tree.len(), || format!("|Hom(η, {})| = {homs}, edges {}", tree.encoding(), tree.len()));
    }
    out.push(t.done());

    let mut t = Tally::new("aut-corolla-factorial");
    for k in 0..=n {
        let auts = automorphisms(&Arc::new(Tree::corolla(k))).len();
        let fact: usize = (1..=k).product();
        t.case(auts == fact, || format!("|Aut(C_{k})| = {auts}, expected {fact}"));
    }
    out.push(t.done());

    let mut dec = Tally::new("decomposition-into-generators");
    let mut fac = Tally::new("reedy-factorization");
    for s in &trees {
        for tt in &trees {
            for f in enumerate_homs(s, tt, usize::MAX)? {
                let steps = decompose(&f);
                let valid = steps.iter().all(|(kind, g)| {
                    validate_morphism(g.source.clone(), g.target.clone(), g.map.clone()).is_ok() && g.classify() == Some(*kind)
                });
                let maps: Vec<OmegaMorphism> = steps.into_iter().map(|(_, g)| g).collect();
                let composed = match compose_all(&maps) {
                    Some(c) => c.map == f.map,
                    None => f.is_iso() && f.map.iter().enumerate().all(|(i, &j)| i == j),
                };
                dec.case(valid && composed, || format!("{} → {}: {:?}", s.encoding(), tt.encoding(), f.map));
                let (neg, pos) = reedy_factorize(&f);
                let ok = neg.is_negative() && pos.is_positive() && pos.after(&neg).map(|c| c.map == f.map).unwrap_or(false);
                fac.case(ok, || format!("{} → {}: {:?}", s.encoding(), tt.encoding(), f.map));
            }
        }
    }
    out.push(dec.done());
    out.push(fac.done());
    Ok(out)
}

fn reedy_axioms(r: &mut Resolver) -> dendron::Result<Vec<CheckResult>> {
    let v = r.take("tree-vertices", 3);
    let e = r.take("tree-edges", 6);
    let n = r.take("set-size", 4);
    let om = OmegaCategory::truncated(v, e);
    let gamma = SetCategory::gamma(n);
    let inj = SetCategory::injections(n);
    let mut out = Vec::new();
    for (label, cat) in [("omega", &om.cat), ("gamma", &gamma.cat), ("injections", &inj.cat)] {
        let report = check_reedy_axioms(cat);
        for verdict in report.verdicts {
            out.push(CheckResult::new(format!("{label}/{}", verdict.check), verdict.passed, verdict.cases, verdict.witness));
        }
    }
    let first_witness = |rep: &ReedyReport| rep.verdicts.iter().find_map(|v| v.witness.clone());
    match fixtures::omega_face_as_negative(&om) {
        Some((bad, _)) => {
            let rep = check_reedy_axioms(&bad);
            out.push(CheckResult::detects("mutation/omega-face-as-negative", !rep.passed(), first_witness(&rep)));
        }
        None => out.push(CheckResult::new("mutation/omega-face-as-negative", false, 0, Some("no top face in the truncation".into()))),
    }
    match fixtures::gamma_injection_as_both(&gamma) {
        Some(bad) => {
            let rep = check_reedy_axioms(&bad);
            out.push(CheckResult::detects("mutation/gamma-injection-as-both", !rep.passed(), first_witness(&rep)));
        }
        None => out.push(CheckResult::new("mutation/gamma-injection-as-both", false, 0, Some("set-size below 2".into()))),
    }
    Ok(out)
}

fn segal(r: &mut Resolver, fx: &Fixtures) -> dendron::Result<Vec<CheckResult>> {
    let v = r.take("tree-vertices", 3);
    let e = r.take("tree-edges", 6);
    let om = OmegaCategory::truncated(v, e);
    let mut out = Vec::new();
    for name in ["ass-operad", "com-operad"] {
        let p = fx.operad(name)?;
        let nerve = dendroidal_nerve(p.as_ref(), &om)?;
        let rep = check_strict_segal(&om, &nerve.presheaf)?;
        out.push(CheckResult::new(format!("strict-segal/{name}-nerve"), rep.passed, rep.trees_checked, rep.witness));
    }

    // N(Ω(S)) ≅ Ω[S] through the edge maps of the labellings.
    let mut t = Tally::new("nerve-yoneda");
    for (s, tree) in om.trees.iter().enumerate() {
        let nerve = dendroidal_nerve(&tree_operad(tree), &om)?;
        let rep = TabulatedPresheaf::representable(&om.cat, s);
        let components: Option<Vec<Vec<usize>>> = (0..om.trees.len())
            .map(|t| {
                nerve.elements[t]
                    .iter()
                    .map(|l| {
                        let f = OmegaMorphism::new_unchecked(om.trees[t].clone(), tree.clone(), l.colours.clone());
                        let f = om.morphism_index(&f)?;
                        om.cat.hom(t, s).iter().position(|&g| g == f)
                    })
                    .collect()
            })
            .collect();
        let ok = components.is_some_and(|components| {
            let iso = PresheafMap { components };
            iso.check_natural(&nerve.presheaf, &rep).is_ok() && iso.is_injective(&rep) && iso.is_surjective(&rep)
        });
        t.case(ok, || format!("N(Ω({})) is not Ω[{}]", tree.encoding(), tree.encoding()));
    }
    out.push(t.done());

    let mut t = Tally::new("strict-segal/representables");
    for s in 0..om.trees.len() {
        let rep = check_strict_segal(&om, &TabulatedPresheaf::representable(&om.cat, s))?;
        t.case(rep.passed, || rep.witness.clone().unwrap_or_default());
    }
    out.push(t.done());

    let mut t = Tally::new("segal-cores-and-horns-rejected");
    for s in 0..om.trees.len() {
        let inner = om.trees[s].inner_edges();
        let Some(&edge) = inner.first() else { continue };
        for which in [Which::SegalCore, Which::Horn(edge)] {
            let sub = boundary_horn_core(&om, s, which)?;
            let (x, _) = sub.ambient.restrict_to(&sub.selected)?;
            let rep = check_strict_segal(&om, &x)?;
            t.case(!rep.passed && rep.witness.is_some(), || format!("{:?} of {} passed", which, om.trees[s].encoding()));
        }
    }
    out.push(t.done());
    Ok(out)
}

fn covariant(r: &mut Resolver, fx: &Fixtures) -> dendron::Result<Vec<CheckResult>> {
    let v = r.take("tree-vertices", 3);
    let e = r.take("tree-edges", 5);
    let ass = fx.operad("ass-operad")?;
    let om = OmegaCategory::truncated(v, e);
    let smaller = OmegaCategory::truncated(v, e.saturating_sub(1).max(1));
    let mut out = Vec::new();
    for (name, on) in [("free-ass-x", &om), ("free-ass-xy", &smaller)] {
        let a = fx.free_algebra(name)?;
        let rep = compare_g_constructions(&ass, &a, on)?;
        out.push(CheckResult::new(format!("g-identity/{name}"), rep.passed(), rep.elements, rep.witness));
    }
    let np = dendroidal_nerve(ass.as_ref(), &om)?;
    for name in ["free-ass-x", "free-ass-xy"] {
        let a = fx.free_algebra(name)?;
        let g = underline_g(&a, &np, &om)?;
        let rep = check_strict_covariant_fibration(&om, &g.presheaf, &np.presheaf, &g.projection)?;
        out.push(CheckResult::new(format!("g-covariant/{name}"), rep.passed && rep.base_segal, rep.corollas_checked, rep.witness));
    }
    let id = PresheafMap::identity(&np.presheaf);
    let rep = check_strict_covariant_fibration(&om, &np.presheaf, &np.presheaf, &id)?;
    out.push(CheckResult::new("identity-covariant", rep.passed, rep.corollas_checked, rep.witness));
    let (two, fold) = fixtures::fold(&np.presheaf);
    let rep = check_strict_covariant_fibration(&om, &two, &np.presheaf, &fold)?;
    out.push(CheckResult::detects("mutation/nerve-fold", !rep.passed, rep.witness));
    Ok(out)
}

/// π covariant at corollas, bijective at leafless trees, and s_σ a section
/// with distinct values on distinct σ(u).
fn slice_checks<X: DendroidalSet>(label: &str, x: &X, sigma: &[X::Element], om: &OmegaCategory, bound: usize) -> dendron::Result<Vec<CheckResult>> {
    let slice = slice_construction(x, sigma, om, bound)?;
    let mut out = Vec::new();
    let functorial = slice.presheaf.check_functorial().and_then(|_| slice.projection.check_natural(&slice.presheaf, &slice.base));
    out.push(CheckResult::new(format!("slice-presheaf/{label}"), functorial.is_ok(), om.cat.num_morphisms(), functorial.err().map(|e| e.to_string())));
    let rep = check_slice_covariance(&slice, om)?;
    out.push(CheckResult::new(format!("slice-covariant/{label}"), rep.passed && rep.base_segal, rep.corollas_checked, rep.witness.or_else(|| (!rep.base_segal).then(|| "X is not strictly Segal".into()))));
    let leafless = om.trees.iter().filter(|t| t.leaves().is_empty()).count();
    out.push(CheckResult::new(format!("leafless-bijective/{label}"), slice.leafless_bijective(om), leafless, Some("π is not a bijection at a leafless tree".into())));
    let eta = om.tree_index(&Tree::eta()).ok_or_else(|| dendron::Error::Usage("η is outside the truncation".into()))?;
    let lift = canonical_lift(x, sigma, &slice, om)?;
    let mut t = Tally::new(format!("canonical-lift/{label}"));
    for (u, &c) in lift.iter().enumerate() {
        let back = &slice.base_elements[eta][slice.projection.apply(eta, c)];
        t.case(*back == sigma[u], || format!("π s({u}) ≠ σ({u})"));
        for (w, &d) in lift.iter().enumerate().skip(u + 1) {
            t.case(sigma[u] == sigma[w] || c != d, || format!("s({u}) = s({w}) with σ({u}) ≠ σ({w})"));
        }
    }
    out.push(t.done());
    Ok(out)
}

fn slice(r: &mut Resolver, fx: &Fixtures) -> dendron::Result<Vec<CheckResult>> {
    let v = r.take("tree-vertices", 3);
    let e = r.take("tree-edges", 5);
    let b = r.take("arity", 2);
    let om = OmegaCategory::truncated(v, e);
    let mut out = Vec::new();

    let mut t = Tally::new("attachment-count");
    for tree in &om.trees {
        for k in 0..=b {
            let g = attachment_groupoid(tree, k);
            let expected = (k + 1).pow(tree.leaves().len() as u32);
            let closed = g.check_closed().is_ok();
            t.case(g.num_objects() == expected && closed, || format!("C({}) at bound {k}: {} objects, expected {expected}", tree.encoding(), g.num_objects()));
        }
    }
    out.push(t.done());

    let rep = check_attachment_functoriality(&om, b.min(1))?;
    out.push(CheckResult::new("attachment-functoriality", rep.passed, rep.pairs_checked + rep.squares_checked, rep.witness));

    let fig = fx.tree("fig-tree-4v")?;
    let att = CorollaAttachment::new(&fig, &vec![1; fig.leaves().len()])?;
    let mut t = Tally::new("attachment-faces/fig-tree-4v");
    for (kind, alpha) in faces(&fig) {
        let ok = attachment_restrict(&alpha, &att).map(|(s, _)| s.leaf_count() <= att.leaf_count());
        t.case(matches!(ok, Ok(true)), || format!("{kind:?} {:?}", alpha.map));
    }
    out.push(t.done());

    let slice_om = OmegaCategory::truncated(v.saturating_sub(1).max(1), e.saturating_sub(1).max(2));
    let eta = Arc::new(Tree::eta());
    for name in ["ass-operad", "com-operad"] {
        let p = fx.operad(name)?;
        let nerve = OperadNerve(p.as_ref());
        let sigma = nerve.elements(&eta)?;
        let label = format!("{}-nerve", name.trim_end_matches("-operad"));
        out.extend(slice_checks(&label, &nerve, &sigma, &slice_om, b)?);
        if name == "com-operad" && !sigma.is_empty() {
            let two = vec![sigma[0].clone(), sigma[0].clone()];
            out.extend(slice_checks("com-nerve-two-units", &nerve, &two, &slice_om, b)?);
        }
    }
    let rep_eta = RepresentableSet(eta.clone());
    let sigma = rep_eta.elements(&eta)?;
    out.extend(slice_checks("representable-eta", &rep_eta, &sigma, &slice_om, b)?);
    out.extend(slice_checks("terminal", &TerminalSet, &[()], &slice_om, b)?);
    out.extend(slice_checks("terminal-no-units", &TerminalSet, &[], &slice_om, b)?);

    let ass = fx.operad("ass-operad")?;
    let nerve = OperadNerve(ass.as_ref());
    let s = nerve.elements(&eta)?;
    let mut broken = slice_construction(&nerve, &s, &slice_om, b)?;
    let rejected = collapse_two_classes(&mut broken, &slice_om) && {
        let rep = check_slice_covariance(&broken, &slice_om)?;
        !rep.passed && rep.witness.is_some()
    };
    out.push(CheckResult::detects("mutation/slice-collapsed-projection", rejected, rejected.then(String::new)));
    Ok(out)
}

/// Merges the first two classes over C_2 of a slice, in π and in the action.
fn collapse_two_classes<E>(s: &mut Slice<E>, om: &OmegaCategory) -> bool {
    let Some(c2) = om.tree_index(&Tree::corolla(2)) else { return false };
    if s.presheaf.size(c2) < 2 {
        return false;
    }
    let action: Vec<Vec<usize>> = (0..om.cat.num_morphisms())
        .map(|f| {
            let mut row = s.presheaf.action(f).to_vec();
            if om.cat.target(f) == c2 {
                row[1] = row[0];
            }
            row
        })
        .collect();
    s.presheaf = TabulatedPresheaf::new_unchecked(om.cat.clone(), s.presheaf.sizes().to_vec(), action);
    s.projection.components[c2][1] = s.projection.components[c2][0];
    true
}

fn lambda_adjunction(r: &mut Resolver) -> dendron::Result<Vec<CheckResult>> {
    let v = r.take("tree-vertices", 4);
    let e = r.take("tree-edges", 5);
    let n = r.take("set-size", 3);
    let om = OmegaCategory::truncated(v, e);
    let mut out = Vec::new();

    let lambdas: Vec<PartialMap> = om.morphisms.iter().map(leaf_functor).collect::<dendron::Result<_>>()?;
    let mut t = Tally::new("lambda-functorial");
    for g in 0..om.cat.num_morphisms() {
        for &f in om.cat.arrows_into(om.cat.source(g)) {
            let gf = om.cat.compose(g, f);
            let ok = lambdas[f].after(&lambdas[g]).map(|c| c == lambdas[gf]).unwrap_or(false);
            t.case(ok, || format!("λ({}) ≠ λ({}) λ({})", om.cat.label(gf), om.cat.label(f), om.cat.label(g)));
        }
    }
    out.push(t.done());

    let mut t = Tally::new("lambda-generator-images");
    let mut partial_root_faces = 0;
    for tree in &om.trees {
        for (kind, f) in faces(tree) {
            let l = leaf_functor(&f)?;
            match kind {
                Elementary::InnerFace => t.case(l.is_bijection(), || format!("inner face {:?} of {}", f.map, tree.encoding())),
                Elementary::TopFace => t.case(l.is_total(), || format!("top face {:?} of {}", f.map, tree.encoding())),
                Elementary::RootFace => {
                    t.cases += 1;
                    partial_root_faces += !l.is_total() as usize;
                }
                _ => {}
            }
        }
        for d in degeneracies(tree).iter().chain(&automorphisms(tree)) {
            let l = leaf_functor(d)?;
            t.case(l.is_bijection(), || format!("{:?} on {}", d.map, tree.encoding()));
        }
    }
    t.case(partial_root_faces > 0, || "no root face with a partial leaf map".into());
    out.push(t.done());

    // Fixture pairs on a smaller truncation; both Hom sets are enumerated.
    let l = LeafFunctor::standard(2, 4, n)?;
    let oc = l.omega.cat.clone();
    let eta = l.omega.tree_index(&Tree::eta()).expect("η is in every truncation");
    let c2 = l.omega.tree_index(&Tree::corolla(2)).expect("C_2 has three edges");
    let xs = [
        ("Ω[η]", TabulatedPresheaf::representable(&oc, eta)),
        ("Ω[C_2]", TabulatedPresheaf::representable(&oc, c2)),
        ("Ω[η]⊔Ω[η]", TabulatedPresheaf::representable(&oc, eta).coproduct(&TabulatedPresheaf::representable(&oc, eta))),
        ("*", TabulatedPresheaf::terminal(&oc)),
    ];
    let gc = l.gamma.cat.clone();
    let ys = [
        ("F(1,-)", TabulatedPresheaf::representable(&gc, 1)),
        ("F(2,-)", TabulatedPresheaf::representable(&gc, 2.min(n))),
        ("*", TabulatedPresheaf::terminal(&gc)),
    ];
    let mut hom = Tally::new("adjunction-hom-bijection");
    let mut tri = Tally::new("adjunction-triangles");
    for (xn, x) in &xs {
        for (yn, y) in &ys {
            let rep = check_adjunction(&l, x, y);
            hom.case(rep.bijective && rep.left_homs == rep.right_homs, || format!("X = {xn}, Y = {yn}: {} vs {}", rep.left_homs, rep.right_homs));
            tri.case(rep.triangle_left && rep.triangle_right, || format!("X = {xn}, Y = {yn}"));
        }
    }
    out.push(hom.done());
    out.push(tri.done());
    Ok(out)
}

fn bpq_special(r: &mut Resolver) -> dendron::Result<Vec<CheckResult>> {
    let n = r.take("set-size", 3);
    let c = r.take("carrier", 4);
    let mut out = Vec::new();
    let mut t = Tally::new("pi0-census");
    for a in 0..=n {
        for l in 1..=2 {
            let rep = pi0_census(&set(a), &set(l), c);
            t.case(rep.passed, || format!("|A| = {a}, |L| = {l}: {} classes, expected {}", rep.classes, rep.expected));
        }
    }
    out.push(t.done());
    let mut t = Tally::new("gamma-functoriality");
    let pairs = check_gamma_functoriality(&set(1), n.min(3), c.min(3));
    t.case(pairs.is_ok(), || format!("{:?}", pairs.as_ref().err()));
    out.push(t.done());
    let mut t = Tally::new("special");
    for a in 0..=n {
        for b in 0..=n {
            let rep = check_special(&set(a), &set(b), c)?;
            t.case(rep.passed(), || rep.witness.clone().unwrap_or_else(|| format!("|A| = {a}, |B| = {b}")));
        }
    }
    out.push(t.done());
    let mut cmp = special_comparison(&set(1), &set(1), &set(1), c.min(3))?;
    for (m, gm) in cmp.sum.groupoid.morphisms.iter().enumerate() {
        let (s, t) = (cmp.to_left.objects[gm.source], cmp.to_left.objects[gm.target]);
        cmp.to_left.morphisms[m] = cmp.left.groupoid.hom(s, t)[0];
        let (s, t) = (cmp.to_right.objects[gm.source], cmp.to_right.objects[gm.target]);
        cmp.to_right.morphisms[m] = cmp.right.groupoid.hom(s, t)[0];
    }
    let rep = check_comparison(&cmp);
    out.push(CheckResult::detects("mutation/wrong-special-action", !rep.passed(), rep.witness));
    Ok(out)
}

fn bpq_cofibrant(r: &mut Resolver) -> dendron::Result<Vec<CheckResult>> {
    let n = r.take("set-size", 3);
    let c = r.take("carrier", 3);
    let d = r.take("nerve-degree", 3);
    let mut out = Vec::new();
    let mut t = Tally::new("bsigma-cofibrant");
    for a in 0..=n {
        let rep = check_bsigma_cofibrant(&set(a), c, d);
        t.case(rep.passed, || rep.witness.clone().unwrap_or_default());
    }
    out.push(t.done());
    let mut t = Tally::new("unit-map");
    for l in 1..=n {
        let rep = check_unit_map(&set(l), c)?;
        t.case(rep.passed(), || rep.witness.clone().unwrap_or_else(|| format!("|L| = {l}")));
    }
    out.push(t.done());
    let rep = check_bsigma_cofibrant_with(&set(2), 2, 1, &fixtures::symmetric_collapse);
    out.push(CheckResult::detects("mutation/symmetric-collapse", !rep.passed, rep.witness));
    Ok(out)
}

fn lstar_pushout(r: &mut Resolver) -> dendron::Result<Vec<CheckResult>> {
    let n = r.take("set-size", 3);
    let mut out = Vec::new();
    let mut t = Tally::new("wedge");
    for l in 1..=n {
        let rep = check_wedge(&set(l), n);
        t.case(rep.natural && rep.bijective, || format!("|L| = {l}: {rep:?}"));
    }
    out.push(t.done());
    let mut t = Tally::new("pushout-square");
    for a in 0..=n {
        for l in 0..=n {
            let rep = check_lstar_pushout(a, l);
            let count = rep.total == (a * l + 1).pow(2);
            t.case(rep.passed() && count, || format!("|A| = {a}, |L| = {l}: {rep:?}"));
        }
    }
    out.push(t.done());
    let g = SetCategory::gamma(n.min(3));
    let mut t = Tally::new("lstar-representable");
    for l in 1..=n {
        let x = lstar_representable(&g, 2, &set(l));
        let sizes = (0..=g.max_size).all(|a| x.size(a) == (l * a + 1).pow(2));
        t.case(x.check_functorial().is_ok() && sizes, || format!("|L| = {l}: sizes {:?}", x.sizes()));
    }
    out.push(t.done());
    Ok(out)
}
