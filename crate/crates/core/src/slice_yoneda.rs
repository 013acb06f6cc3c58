//! The groupoid C(T) of corolla attachments, its functoriality in T, and the
//! discrete σ/X construction with its projection π: σ/X → X.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma_bpq::{GroupoidMorphism, GroupoidPresentation};
use crate::operad::{labellings, permutations, restrict_labelling, Labelling, Operad};
use crate::presheaf::{check_strict_segal, edge_inclusion};
use crate::reedy_core::{OmegaCategory, PresheafMap, TabulatedPresheaf};
use crate::tree_cat::{degeneracy_at, enumerate_homs, validate_morphism, OmegaMorphism, Tree};

/// A dendroidal set that can be evaluated on any tree, not only on the
/// trees of a fixed truncation.
pub trait DendroidalSet {
    type Element: Clone + Eq + Hash + Ord + Debug;

    fn elements(&self, t: &Arc<Tree>) -> Result<Vec<Self::Element>>;
    /// f*(x) for f: S → T and x ∈ X(T).
    fn restrict(&self, f: &OmegaMorphism, x: &Self::Element) -> Result<Self::Element>;

    fn element_name(&self, x: &Self::Element) -> String {
        format!("{x:?}")
    }
}

/// NP for an operad P.
pub struct OperadNerve<'a, P: Operad>(pub &'a P);

impl<P: Operad> DendroidalSet for OperadNerve<'_, P> {
    type Element = Labelling<P::Op>;

    fn elements(&self, t: &Arc<Tree>) -> Result<Vec<Self::Element>> {
        Ok(labellings(self.0, t))
    }

    fn restrict(&self, f: &OmegaMorphism, x: &Self::Element) -> Result<Self::Element> {
        restrict_labelling(self.0, f, x)
    }

    fn element_name(&self, x: &Self::Element) -> String {
        let ops: Vec<String> = x.ops.iter().flatten().map(|p| self.0.op_name(p)).collect();
        let colours: Vec<String> = x.colours.iter().map(|&c| self.0.colour_name(c)).collect();
        format!("[{};{}]", colours.join(","), ops.join(","))
    }
}

/// Ω[R]; an element is the edge map of a morphism into R.
pub struct RepresentableSet(pub Arc<Tree>);

impl DendroidalSet for RepresentableSet {
    type Element = Vec<usize>;

    fn elements(&self, t: &Arc<Tree>) -> Result<Vec<Vec<usize>>> {
        let bound = t.len().max(self.0.len());
        Ok(enumerate_homs(t, &self.0, bound)?.into_iter().map(|f| f.map).collect())
    }

    fn restrict(&self, f: &OmegaMorphism, x: &Vec<usize>) -> Result<Vec<usize>> {
        Ok(f.map.iter().map(|&e| x[e]).collect())
    }

    fn element_name(&self, x: &Vec<usize>) -> String {
        let names: Vec<&str> = x.iter().map(|&e| self.0.name(e)).collect();
        format!("[{}]", names.join(","))
    }
}

/// The terminal dendroidal set.
pub struct TerminalSet;

impl DendroidalSet for TerminalSet {
    type Element = ();

    fn elements(&self, _: &Arc<Tree>) -> Result<Vec<()>> {
        Ok(vec![()])
    }

    fn restrict(&self, _: &OmegaMorphism, _: &()) -> Result<()> {
        Ok(())
    }
}

/// A presheaf tabulated on a truncation; X(T) is read off at the canonical
/// representative of T.
pub struct TabulatedSet<'a> {
    pub omega: &'a OmegaCategory,
    pub presheaf: &'a TabulatedPresheaf,
}

impl DendroidalSet for TabulatedSet<'_> {
    type Element = usize;

    fn elements(&self, t: &Arc<Tree>) -> Result<Vec<usize>> {
        let i = self.omega.tree_index(t).ok_or_else(|| outside(self.omega, t))?;
        Ok((0..self.presheaf.size(i)).collect())
    }

    fn restrict(&self, f: &OmegaMorphism, x: &usize) -> Result<usize> {
        let m = self.omega.canonical_morphism_index(f).ok_or_else(|| {
            let t = if self.omega.tree_index(&f.source).is_none() { &f.source } else { &f.target };
            outside(self.omega, t)
        })?;
        Ok(self.presheaf.act(m, *x))
    }
}

fn outside(om: &OmegaCategory, t: &Tree) -> Error {
    let vertices = t.vertices().len();
    if vertices > om.max_vertices {
        Error::BoundExceeded { what: "tree vertices".into(), limit: om.max_vertices, actual: vertices }
    } else {
        Error::BoundExceeded { what: "tree edges".into(), limit: om.max_edges, actual: t.len() }
    }
}

/// X on the trees of `om`, with the elements behind each index.
pub fn tabulate_dendroidal<X: DendroidalSet>(x: &X, om: &OmegaCategory) -> Result<(TabulatedPresheaf, Vec<Vec<X::Element>>)> {
    let elements: Vec<Vec<X::Element>> = om.trees.iter().map(|t| x.elements(t)).collect::<Result<_>>()?;
    let index: Vec<HashMap<&X::Element, usize>> =
        elements.iter().map(|els| els.iter().enumerate().map(|(i, e)| (e, i)).collect()).collect();
    let mut action = Vec::with_capacity(om.morphisms.len());
    for (f, alpha) in om.morphisms.iter().enumerate() {
        let s = om.cat.source(f);
        let row = elements[om.cat.target(f)]
            .iter()
            .map(|e| {
                let r = x.restrict(alpha, e)?;
                index[s].get(&r).copied().ok_or_else(|| Error::Inconsistent("restriction left X".into()))
            })
            .collect::<Result<Vec<usize>>>()?;
        action.push(row);
    }
    let names = elements.iter().map(|els| els.iter().map(|e| x.element_name(e)).collect()).collect();
    let sizes = elements.iter().map(Vec::len).collect();
    Ok((TabulatedPresheaf::new_unchecked(om.cat.clone(), sizes, action).with_names(names), elements))
}

// ---------------------------------------------------------------------------
// Corolla attachments

/// T ↪ T♯, with a corolla of arity `arities[i]` grafted on the i-th leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorollaAttachment {
    pub base: Arc<Tree>,
    pub arities: Vec<usize>,
    pub sharp: Arc<Tree>,
    /// The new edges above each leaf of T, in order.
    pub new_edges: Vec<Vec<usize>>,
    pub embedding: OmegaMorphism,
}

impl CorollaAttachment {
    pub fn new(base: &Arc<Tree>, arities: &[usize]) -> Result<CorollaAttachment> {
        let leaves = base.leaves();
        if leaves.len() != arities.len() {
            return Err(Error::Mismatch(format!("{} arities for {} leaves", arities.len(), leaves.len())));
        }
        let pairs: Vec<(usize, usize)> = leaves.into_iter().zip(arities.iter().copied()).collect();
        let (sharp, new_edges) = base.graft_corollas(&pairs);
        let sharp = Arc::new(sharp);
        let embedding = OmegaMorphism::new_unchecked(base.clone(), sharp.clone(), (0..base.len()).collect());
        Ok(CorollaAttachment { base: base.clone(), arities: arities.to_vec(), sharp, new_edges, embedding })
    }

    /// |λ(T♯)|.
    pub fn leaf_count(&self) -> usize {
        self.arities.iter().sum()
    }

    /// λ(T♯), in the order of the corollas.
    pub fn sharp_leaves(&self) -> Vec<usize> {
        self.new_edges.concat()
    }

    /// The automorphisms of T♯ under T, as permutations of `sharp_leaves`
    /// preserving each corolla: ∏ Σ_{n_ℓ}.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        let mut offset = 0;
        for &n in &self.arities {
            let perms = permutations(n);
            out = out
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    perms.iter().map(move |q| {
                        let mut r = p.clone();
                        r.extend(q.iter().map(|&i| i + offset));
                        r
                    })
                })
                .collect();
            offset += n;
        }
        out
    }

    /// The automorphism of T♯ fixing T and moving the p-th leaf to the
    /// `perm[p]`-th.
    pub fn automorphism(&self, perm: &[usize]) -> Result<OmegaMorphism> {
        let leaves = self.sharp_leaves();
        if perm.len() != leaves.len() {
            return Err(Error::Mismatch("permutation length differs from |λ(T♯)|".into()));
        }
        let mut map: Vec<usize> = (0..self.sharp.len()).collect();
        for (p, &q) in perm.iter().enumerate() {
            map[leaves[p]] = leaves[q];
        }
        validate_morphism(self.sharp.clone(), self.sharp.clone(), map)
    }
}

/// All arity functions λ(T) → {0..bound}, lexicographically.
pub fn arity_functions(leaves: usize, bound: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..leaves {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=bound).map(move |n| {
                    let mut q = p.clone();
                    q.push(n);
                    q
                })
            })
            .collect();
    }
    out
}

/// C(T) with arities at most `bound`: objects are arity functions and the
/// morphisms are the automorphisms ∏ Σ_{n_ℓ}, since an isomorphism under T
/// preserves the corolla on each leaf.
pub fn attachment_groupoid(t: &Arc<Tree>, bound: usize) -> GroupoidPresentation {
    let objects = arity_functions(t.leaves().len(), bound);
    let mut morphisms = Vec::new();
    for (o, arities) in objects.iter().enumerate() {
        let att = CorollaAttachment::new(t, arities).expect("arity list matches the leaves");
        for perm in att.automorphisms() {
            morphisms.push(GroupoidMorphism { source: o, target: o, perm });
        }
    }
    let names = objects.iter().map(|a| format!("{a:?}")).collect();
    GroupoidPresentation::new_unchecked(format!("C({})", t.encoding()), names, morphisms)
        .expect("automorphism groups form a groupoid")
}

/// α*i for α: S → T: each leaf e of S gets the corolla whose inputs are the
/// leaves of T♯ above α(e) (in pre-order). Returns α*i and i_*α: S♯ → T♯.
pub fn attachment_restrict(alpha: &OmegaMorphism, att: &CorollaAttachment) -> Result<(CorollaAttachment, OmegaMorphism)> {
    if *alpha.target != *att.base {
        return Err(Error::Mismatch("the morphism does not end at the attachment's base".into()));
    }
    let s = &alpha.source;
    let sharp = &att.sharp;
    let targets: Vec<Vec<usize>> = s
        .leaves()
        .into_iter()
        .map(|e| sharp.above(alpha.map[e]).into_iter().filter(|&x| sharp.is_leaf(x)).collect())
        .collect();
    let arities: Vec<usize> = targets.iter().map(Vec::len).collect();
    let restricted = CorollaAttachment::new(s, &arities)?;
    let mut map = alpha.map.clone();
    map.resize(restricted.sharp.len(), 0);
    for (edges, images) in restricted.new_edges.iter().zip(&targets) {
        for (&e, &img) in edges.iter().zip(images) {
            map[e] = img;
        }
    }
    let pushed = validate_morphism(restricted.sharp.clone(), sharp.clone(), map)?;
    Ok((restricted, pushed))
}

/// α*τ for an automorphism τ of T♯ under T (as a permutation of λ(T♯)):
/// the unique automorphism of S♯ under S with i_*α ∘ α*τ = τ ∘ i_*α.
pub fn restrict_automorphism(alpha: &OmegaMorphism, att: &CorollaAttachment, perm: &[usize]) -> Result<Vec<usize>> {
    let (restricted, pushed) = attachment_restrict(alpha, att)?;
    let t_leaves = att.sharp_leaves();
    let t_pos: HashMap<usize, usize> = t_leaves.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let s_leaves = restricted.sharp_leaves();
    let s_of_t: HashMap<usize, usize> = s_leaves.iter().enumerate().map(|(i, &e)| (pushed.map[e], i)).collect();
    s_leaves
        .iter()
        .map(|&e| {
            let moved = t_leaves[perm[t_pos[&pushed.map[e]]]];
            s_of_t.get(&moved).copied().ok_or_else(|| Error::Inconsistent("τ does not preserve the image of S♯".into()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctorialityReport {
    pub trees: usize,
    pub attachments: usize,
    pub identities_checked: usize,
    pub pairs_checked: usize,
    pub squares_checked: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Exhaustive check over a truncation and an arity bound:
/// id*i = i; (αβ)*i = β*(α*i) with i_*α ∘ i_*β agreeing with i_*(αβ) up to
/// an automorphism of R♯ under R; and i_*α ∘ α*τ = τ ∘ i_*α with τ ↦ α*τ a
/// homomorphism.
pub fn check_attachment_functoriality(om: &OmegaCategory, bound: usize) -> Result<FunctorialityReport> {
    let mut report = FunctorialityReport {
        trees: om.trees.len(),
        attachments: 0,
        identities_checked: 0,
        pairs_checked: 0,
        squares_checked: 0,
        passed: true,
        witness: None,
    };
    let fail = |report: &mut FunctorialityReport, msg: String| {
        report.passed = false;
        report.witness.get_or_insert(msg);
    };
    let cat = &om.cat;
    for (t, tree) in om.trees.iter().enumerate() {
        for arities in arity_functions(tree.leaves().len(), bound) {
            let att = CorollaAttachment::new(tree, &arities)?;
            report.attachments += 1;
            let id = OmegaMorphism::identity(tree);
            let (same, pushed) = attachment_restrict(&id, &att)?;
            report.identities_checked += 1;
            if same.arities != att.arities || pushed.map.iter().enumerate().any(|(i, &j)| i != j) {
                fail(&mut report, format!("id* changes {arities:?} on {}", tree.encoding()));
            }
            let auts = att.automorphisms();
            for &fa in cat.arrows_into(t) {
                let alpha = &om.morphisms[fa];
                let (restricted, pushed_a) = attachment_restrict(alpha, &att)?;
                // The square for each τ and the homomorphism property.
                let images: Vec<Vec<usize>> =
                    auts.iter().map(|p| restrict_automorphism(alpha, &att, p)).collect::<Result<_>>()?;
                for (p, img) in auts.iter().zip(&images) {
                    report.squares_checked += 1;
                    let lhs = pushed_a.after_unchecked(&restricted.automorphism(img)?);
                    let rhs = att.automorphism(p)?.after_unchecked(&pushed_a);
                    if lhs.map != rhs.map {
                        fail(&mut report, format!("i_*α ∘ α*τ ≠ τ ∘ i_*α on {} for τ = {p:?}", tree.encoding()));
                    }
                }
                if auts.len() <= 24 {
                    for (p, ip) in auts.iter().zip(&images) {
                        for (q, iq) in auts.iter().zip(&images) {
                            let pq: Vec<usize> = q.iter().map(|&i| p[i]).collect();
                            let ipq: Vec<usize> = iq.iter().map(|&i| ip[i]).collect();
                            if restrict_automorphism(alpha, &att, &pq)? != ipq {
                                fail(&mut report, format!("α*(τ'τ) ≠ α*τ' α*τ on {}", tree.encoding()));
                            }
                        }
                    }
                }
                let s = cat.source(fa);
                for &fb in cat.arrows_into(s) {
                    let beta = &om.morphisms[fb];
                    report.pairs_checked += 1;
                    let (twice, pushed_b) = attachment_restrict(beta, &restricted)?;
                    let composite = alpha.after_unchecked(beta);
                    let (once, pushed_ab) = attachment_restrict(&composite, &att)?;
                    if twice.arities != once.arities {
                        fail(&mut report, format!("(αβ)* ≠ β*α* on arities over {}", tree.encoding()));
                        continue;
                    }
                    let via = pushed_a.after_unchecked(&pushed_b);
                    let r = &beta.source;
                    let base_ok = (0..r.len()).all(|e| via.map[e] == pushed_ab.map[e]);
                    let blocks_ok = once.new_edges.iter().all(|edges| {
                        let a: BTreeSet<usize> = edges.iter().map(|&e| via.map[e]).collect();
                        let b: BTreeSet<usize> = edges.iter().map(|&e| pushed_ab.map[e]).collect();
                        a == b
                    });
                    if !base_ok || !blocks_ok {
                        fail(&mut report, format!("i_*(αβ) and i_*α i_*β differ beyond C(R) on {}", tree.encoding()));
                    }
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// σ/X

/// A triple (T ↪ T♯, a ∈ X(T♯), ξ: λ(T♯) → U) with σ ξ(ℓ) = ℓ*(a).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceDendrex<E> {
    pub attachment: CorollaAttachment,
    pub dendrex: E,
    /// ξ on `attachment.sharp_leaves()`.
    pub labelling: Vec<usize>,
}

/// (arities, canonical dendrex, canonical labelling).
pub type ClassKey<E> = (Vec<usize>, E, Vec<usize>);

impl<E: Ord + Clone> SliceDendrex<E> {
    pub fn key(&self) -> ClassKey<E> {
        (self.attachment.arities.clone(), self.dendrex.clone(), self.labelling.clone())
    }
}

/// The least (τ*a, ξ∘τ) over the automorphisms τ of T♯ under T.
pub fn canonical_triple<X: DendroidalSet>(
    x: &X,
    att: &CorollaAttachment,
    a: &X::Element,
    xi: &[usize],
) -> Result<(X::Element, Vec<usize>)> {
    let mut best: Option<(X::Element, Vec<usize>)> = None;
    for perm in att.automorphisms() {
        let tau = att.automorphism(&perm)?;
        let cand = (x.restrict(&tau, a)?, perm.iter().map(|&q| xi[q]).collect::<Vec<_>>());
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    Ok(best.expect("the identity is an automorphism"))
}

/// (σ/X)(T): classes of compatible triples with |λ(T♯)| ≤ `leaf_bound`, as
/// canonical representatives in increasing order.
pub fn slice_classes<X: DendroidalSet>(
    x: &X,
    sigma: &[X::Element],
    t: &Arc<Tree>,
    leaf_bound: usize,
) -> Result<Vec<SliceDendrex<X::Element>>> {
    let mut out = Vec::new();
    for arities in arity_functions(t.leaves().len(), leaf_bound) {
        if arities.iter().sum::<usize>() > leaf_bound {
            continue;
        }
        let att = CorollaAttachment::new(t, &arities)?;
        let leaves = att.sharp_leaves();
        let inclusions: Vec<OmegaMorphism> = leaves.iter().map(|&l| edge_inclusion(&att.sharp, l)).collect();
        let auts: Vec<(Vec<usize>, OmegaMorphism)> =
            att.automorphisms().into_iter().map(|p| Ok((p.clone(), att.automorphism(&p)?))).collect::<Result<_>>()?;
        let mut classes = BTreeSet::new();
        for a in x.elements(&att.sharp)? {
            let values: Vec<X::Element> = inclusions.iter().map(|l| x.restrict(l, &a)).collect::<Result<_>>()?;
            let choices: Vec<Vec<usize>> =
                values.iter().map(|v| (0..sigma.len()).filter(|&u| sigma[u] == *v).collect()).collect();
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            let moved: Vec<X::Element> = auts.iter().map(|(_, tau)| x.restrict(tau, &a)).collect::<Result<_>>()?;
            let mut xi = vec![0; leaves.len()];
            let mut idx = vec![0; leaves.len()];
            loop {
                for p in 0..leaves.len() {
                    xi[p] = choices[p][idx[p]];
                }
                let key = auts
                    .iter()
                    .zip(&moved)
                    .map(|((perm, _), b)| (b.clone(), perm.iter().map(|&q| xi[q]).collect::<Vec<_>>()))
                    .min()
                    .expect("the identity is an automorphism");
                classes.insert(key);
                // Odometer over the label choices.
                let mut p = leaves.len();
                loop {
                    if p == 0 {
                        break;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < choices[p].len() {
                        break;
                    }
                    idx[p] = 0;
                    if p == 0 {
                        p = usize::MAX;
                        break;
                    }
                }
                if p == usize::MAX || leaves.is_empty() {
                    break;
                }
            }
        }
        out.extend(classes.into_iter().map(|(dendrex, labelling)| SliceDendrex {
            attachment: att.clone(),
            dendrex,
            labelling,
        }));
    }
    Ok(out)
}

/// σ/X and π: σ/X → X tabulated on a truncation.
#[derive(Debug, Clone)]
pub struct Slice<E> {
    pub leaf_bound: usize,
    pub units: usize,
    pub presheaf: TabulatedPresheaf,
    pub base: TabulatedPresheaf,
    pub projection: PresheafMap,
    pub classes: Vec<Vec<SliceDendrex<E>>>,
    pub base_elements: Vec<Vec<E>>,
    /// X passed the strict Segal check on the truncation.
    pub segal_verified: bool,
}

/// σ/X for σ: U → X(η), U = {0, ..., |σ| - 1}. The bound is on |λ(T♯)|,
/// which can only drop under restriction.
pub fn slice_construction<X: DendroidalSet>(
    x: &X,
    sigma: &[X::Element],
    om: &OmegaCategory,
    leaf_bound: usize,
) -> Result<Slice<X::Element>> {
    let eta = Arc::new(Tree::eta());
    let eta_elements = x.elements(&eta)?;
    if let Some(u) = sigma.iter().position(|s| !eta_elements.contains(s)) {
        return Err(Error::Mismatch(format!("σ({u}) is not an element of X(η)")));
    }
    let (base, base_elements) = tabulate_dendroidal(x, om)?;
    let base_index: Vec<HashMap<&X::Element, usize>> =
        base_elements.iter().map(|els| els.iter().enumerate().map(|(i, e)| (e, i)).collect()).collect();
    let classes: Vec<Vec<SliceDendrex<X::Element>>> =
        om.trees.iter().map(|t| slice_classes(x, sigma, t, leaf_bound)).collect::<Result<_>>()?;
    let index: Vec<HashMap<ClassKey<X::Element>, usize>> =
        classes.iter().map(|cs| cs.iter().enumerate().map(|(i, c)| (c.key(), i)).collect()).collect();
    let mut action = Vec::with_capacity(om.morphisms.len());
    for (f, alpha) in om.morphisms.iter().enumerate() {
        let s = om.cat.source(f);
        let row = classes[om.cat.target(f)]
            .iter()
            .map(|c| {
                let r = restrict_class(x, alpha, c)?;
                index[s].get(&r.key()).copied().ok_or_else(|| Error::Inconsistent("restricted class is missing".into()))
            })
            .collect::<Result<Vec<usize>>>()?;
        action.push(row);
    }
    let names = classes
        .iter()
        .map(|cs| {
            cs.iter()
                .map(|c| format!("{:?}:{}:{:?}", c.attachment.arities, x.element_name(&c.dendrex), c.labelling))
                .collect()
        })
        .collect();
    let presheaf =
        TabulatedPresheaf::new_unchecked(om.cat.clone(), classes.iter().map(Vec::len).collect(), action).with_names(names);
    let components = classes
        .iter()
        .enumerate()
        .map(|(t, cs)| {
            cs.iter()
                .map(|c| {
                    let a = x.restrict(&c.attachment.embedding, &c.dendrex)?;
                    base_index[t].get(&a).copied().ok_or_else(|| Error::Inconsistent("π left X".into()))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<_>>()?;
    let segal_verified = check_strict_segal(om, &base)?.passed;
    Ok(Slice {
        leaf_bound,
        units: sigma.len(),
        presheaf,
        base,
        projection: PresheafMap { components },
        classes,
        base_elements,
        segal_verified,
    })
}

/// α* of a class: (α*i, (i_*α)*a, ξ ∘ λ(i_*α)), made canonical.
pub fn restrict_class<X: DendroidalSet>(x: &X, alpha: &OmegaMorphism, c: &SliceDendrex<X::Element>) -> Result<SliceDendrex<X::Element>> {
    let (att, pushed) = attachment_restrict(alpha, &c.attachment)?;
    let a = x.restrict(&pushed, &c.dendrex)?;
    let t_pos: HashMap<usize, usize> = c.attachment.sharp_leaves().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let xi: Vec<usize> = att.sharp_leaves().iter().map(|&e| c.labelling[t_pos[&pushed.map[e]]]).collect();
    let (dendrex, labelling) = canonical_triple(x, &att, &a, &xi)?;
    Ok(SliceDendrex { attachment: att, dendrex, labelling })
}

/// s_σ(u): the class of (η ↪ C_1, the degenerate dendrex on σ(u), u).
pub fn canonical_lift<X: DendroidalSet>(x: &X, sigma: &[X::Element], slice: &Slice<X::Element>, om: &OmegaCategory) -> Result<Vec<usize>> {
    let eta = om.tree_index(&Tree::eta()).ok_or_else(|| Error::Usage("η is outside the truncation".into()))?;
    if slice.leaf_bound < 1 {
        return Err(Error::BoundExceeded { what: "leaf bound".into(), limit: slice.leaf_bound, actual: 1 });
    }
    let att = CorollaAttachment::new(&om.trees[eta], &[1])?;
    let degeneracy = degeneracy_at(&att.sharp, att.sharp.root());
    let index: HashMap<ClassKey<X::Element>, usize> =
        slice.classes[eta].iter().enumerate().map(|(i, c)| (c.key(), i)).collect();
    sigma
        .iter()
        .enumerate()
        .map(|(u, s)| {
            let a = x.restrict(&degeneracy, s)?;
            let (dendrex, labelling) = canonical_triple(x, &att, &a, &[u])?;
            index
                .get(&(vec![1], dendrex, labelling))
                .copied()
                .ok_or_else(|| Error::Inconsistent("the lift is not a class of σ/X".into()))
        })
        .collect()
}

impl<E> Slice<E> {
    /// π is a bijection at every tree without leaves.
    pub fn leafless_bijective(&self, om: &OmegaCategory) -> bool {
        om.trees.iter().enumerate().filter(|(_, t)| t.leaves().is_empty()).all(|(t, _)| {
            let mut img = self.projection.components[t].clone();
            img.sort();
            img.dedup();
            img.len() == self.projection.components[t].len() && img.len() == self.base.size(t)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SliceCovariantReport {
    pub passed: bool,
    pub corollas_checked: usize,
    pub leaf_bound: usize,
    pub base_segal: bool,
    pub strict_only: bool,
    /// The pullback is cut to families with at most `leaf_bound` leaves in
    /// total, the part the truncated σ/X can reach.
    pub bound_relative: bool,
    pub witness: Option<String>,
}

/// At each corolla C_n of the truncation, (σ/X)(C_n) maps injectively onto
/// the part of X(C_n) ×_{X_η^n} ((σ/X)_η)^n whose attachments have at most
/// `leaf_bound` leaves in total.
pub fn check_slice_covariance<E>(slice: &Slice<E>, om: &OmegaCategory) -> Result<SliceCovariantReport> {
    let eta = om.tree_index(&Tree::eta()).ok_or_else(|| Error::Usage("η is outside the truncation".into()))?;
    let mut report = SliceCovariantReport {
        passed: true,
        corollas_checked: 0,
        leaf_bound: slice.leaf_bound,
        base_segal: slice.segal_verified,
        strict_only: true,
        bound_relative: true,
        witness: None,
    };
    let b = slice.leaf_bound;
    // For each x ∈ X(η): how many classes over it have k leaves.
    let mut by_leaves = vec![vec![0usize; b + 1]; slice.base.size(eta)];
    for (i, c) in slice.classes[eta].iter().enumerate() {
        by_leaves[slice.projection.components[eta][i]][c.attachment.leaf_count()] += 1;
    }
    for n in 0..om.max_edges {
        let Some(t) = om.tree_index(&Tree::corolla(n)) else { continue };
        report.corollas_checked += 1;
        let tree = &om.trees[t];
        let leaf_maps: Vec<usize> = tree
            .leaves()
            .iter()
            .map(|&l| om.canonical_morphism_index(&edge_inclusion(tree, l)).ok_or_else(|| Error::Inconsistent("leaf inclusion missing".into())))
            .collect::<Result<_>>()?;
        let mut expected = 0;
        for xt in 0..slice.base.size(t) {
            // Families over xt by total leaf count, cut at b.
            let mut poly = vec![0usize; b + 1];
            poly[0] = 1;
            for &l in &leaf_maps {
                let f = &by_leaves[slice.base.act(l, xt)];
                let mut next = vec![0usize; b + 1];
                for (i, &p) in poly.iter().enumerate() {
                    for (j, &q) in f.iter().enumerate() {
                        if i + j <= b {
                            next[i + j] += p * q;
                        }
                    }
                }
                poly = next;
            }
            expected += poly.iter().sum::<usize>();
        }
        let mut seen = HashMap::new();
        for c in 0..slice.presheaf.size(t) {
            let key = (slice.projection.apply(t, c), leaf_maps.iter().map(|&l| slice.presheaf.act(l, c)).collect::<Vec<_>>());
            if let Some(prev) = seen.insert(key, c) {
                report.passed = false;
                report.witness = Some(format!(
                    "at {}: {} and {} have the same image and leaves",
                    tree.encoding(),
                    slice.presheaf.element_name(t, prev),
                    slice.presheaf.element_name(t, c)
                ));
                return Ok(report);
            }
        }
        if seen.len() != expected {
            report.passed = false;
            report.witness = Some(format!("at {}: {} classes but the cut pullback has {expected}", tree.encoding(), seen.len()));
            return Ok(report);
        }
    }
    Ok(report)
}
