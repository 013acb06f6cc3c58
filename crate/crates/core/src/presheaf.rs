//! Dendroidal sets and Γ-sets as tabulated presheaves: representables,
//! boundaries, horns and Segal cores, the strict Segal condition, and the
//! adjunction λ_! ⊣ λ* induced by the leaf functor.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset_cat::{leaf_functor, FinSet, PartialMap};
use crate::reedy_core::{
    FiniteCategory, NaturalMapSearch, OmegaCategory, PresheafMap, SetCategory, Subobject, TabulatedPresheaf,
    UnionFind,
};
use crate::tree_cat::{faces, Elementary, OmegaMorphism, Tree};

pub use crate::reedy_core::TabulatedPresheaf as Presheaf;

/// R(−, r).
pub fn representable(cat: &Arc<FiniteCategory>, r: usize) -> TabulatedPresheaf {
    TabulatedPresheaf::representable(cat, r)
}

/// The element of R(−, target f) given by the morphism `f`.
pub fn element_of(cat: &FiniteCategory, f: usize) -> (usize, usize) {
    let s = cat.source(f);
    let pos = cat.hom(s, cat.target(f)).iter().position(|&g| g == f).expect("f is in its hom-set");
    (s, pos)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Boundary,
    /// The horn omitting the inner face that contracts this edge.
    Horn(usize),
    SegalCore,
}

/// A selection of elements of Ω[T], closed under restriction.
#[derive(Debug, Clone)]
pub struct SubobjectSpec {
    pub tree: usize,
    pub which: Which,
    pub ambient: TabulatedPresheaf,
    pub selected: Subobject,
}

fn tree_morphism(om: &OmegaCategory, f: &OmegaMorphism) -> Result<usize> {
    om.canonical_morphism_index(f).ok_or_else(|| Error::BoundExceeded {
        what: "tree outside the truncation".into(),
        limit: om.max_edges,
        actual: f.source.len().max(f.target.len()),
    })
}

/// The inclusion of the corolla at vertex `v` of `t`.
pub fn corolla_inclusion(t: &Arc<Tree>, v: usize) -> OmegaMorphism {
    let kids = t.children(v);
    let c = Arc::new(Tree::corolla(kids.len()));
    let mut map = vec![v];
    map.extend_from_slice(kids);
    OmegaMorphism::new_unchecked(c, t.clone(), map)
}

/// The inclusion η → T of edge `e`.
pub fn edge_inclusion(t: &Arc<Tree>, e: usize) -> OmegaMorphism {
    OmegaMorphism::new_unchecked(Arc::new(Tree::eta()), t.clone(), vec![e])
}

/// ∂Ω[T], Λ^e[T] or Sc[T] for the tree with index `tree` in the truncation.
pub fn boundary_horn_core(om: &OmegaCategory, tree: usize, which: Which) -> Result<SubobjectSpec> {
    let t = om.trees[tree].clone();
    let ambient = representable(&om.cat, tree);
    let mut gens = Vec::new();
    match which {
        Which::Boundary | Which::Horn(_) => {
            if let Which::Horn(e) = which {
                if e >= t.len() || !t.is_inner(e) {
                    return Err(Error::Usage(format!("edge {e} is not an inner edge")));
                }
            }
            for (kind, f) in faces(&t) {
                if let Which::Horn(e) = which {
                    if kind == Elementary::InnerFace && !f.map.contains(&e) {
                        continue;
                    }
                }
                gens.push(element_of(&om.cat, tree_morphism(om, &f)?));
            }
        }
        Which::SegalCore => {
            for v in t.vertices() {
                gens.push(element_of(&om.cat, tree_morphism(om, &corolla_inclusion(&t, v))?));
            }
            for e in 0..t.len() {
                gens.push(element_of(&om.cat, tree_morphism(om, &edge_inclusion(&t, e))?));
            }
        }
    }
    let selected = Subobject::generated(&ambient, &gens);
    Ok(SubobjectSpec { tree, which, ambient, selected })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegalReport {
    pub passed: bool,
    pub max_vertices: usize,
    pub max_edges: usize,
    pub trees_checked: usize,
    /// The check is the strict bijection X(T) ≅ lim over Sc[T]; it agrees
    /// with the derived condition only for discrete presheaves.
    pub strict_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// The number of compatible corolla families at T and the restriction
/// X(T) → families, via edge compatibility between adjacent vertices.
pub fn segal_families(om: &OmegaCategory, x: &TabulatedPresheaf, tree: usize) -> Result<(usize, Vec<Vec<usize>>)> {
    let t = om.trees[tree].clone();
    let verts = t.bfs().into_iter().filter(|&v| t.is_vertex(v)).collect::<Vec<_>>();
    if verts.is_empty() {
        let all = (0..x.size(tree)).map(|a| vec![a]).collect();
        return Ok((x.size(tree), all));
    }
    let mut incl = Vec::new();
    let mut leaf_edge = Vec::new();
    let mut root_edge = Vec::new();
    for &v in &verts {
        let iota = corolla_inclusion(&t, v);
        let c = iota.source.clone();
        incl.push(tree_morphism(om, &iota)?);
        root_edge.push(tree_morphism(om, &edge_inclusion(&c, 0))?);
        let leaves: Vec<usize> =
            (1..c.len()).map(|j| tree_morphism(om, &edge_inclusion(&c, j))).collect::<Result<_>>()?;
        leaf_edge.push(leaves);
    }
    // parent[i] = (index of the vertex below, input position).
    let parent: Vec<Option<(usize, usize)>> = verts
        .iter()
        .map(|&v| {
            let p = t.parent(v)?;
            let i = verts.iter().position(|&w| w == p)?;
            Some((i, t.children(p).iter().position(|&c| c == v)?))
        })
        .collect();
    let corolla_obj: Vec<usize> = incl.iter().map(|&f| om.cat.source(f)).collect();
    let mut count = 0;
    let mut choice = vec![0; verts.len()];
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        x: &TabulatedPresheaf,
        corolla_obj: &[usize],
        parent: &[Option<(usize, usize)>],
        leaf_edge: &[Vec<usize>],
        root_edge: &[usize],
        choice: &mut Vec<usize>,
        count: &mut usize,
    ) {
        if i == choice.len() {
            *count += 1;
            return;
        }
        for a in 0..x.size(corolla_obj[i]) {
            if let Some((p, j)) = parent[i] {
                if x.act(leaf_edge[p][j], choice[p]) != x.act(root_edge[i], a) {
                    continue;
                }
            }
            choice[i] = a;
            go(i + 1, x, corolla_obj, parent, leaf_edge, root_edge, choice, count);
        }
    }
    go(0, x, &corolla_obj, &parent, &leaf_edge, &root_edge, &mut choice, &mut count);
    let restrictions = (0..x.size(tree)).map(|a| incl.iter().map(|&f| x.act(f, a)).collect()).collect();
    Ok((count, restrictions))
}

/// Checks X(T) ≅ lim_{Sc[T]} X for every tree of the truncation.
pub fn check_strict_segal(om: &OmegaCategory, x: &TabulatedPresheaf) -> Result<SegalReport> {
    let mut report = SegalReport {
        passed: true,
        max_vertices: om.max_vertices,
        max_edges: om.max_edges,
        trees_checked: 0,
        strict_only: true,
        witness: None,
    };
    for tree in 0..om.trees.len() {
        report.trees_checked += 1;
        let (count, restrictions) = segal_families(om, x, tree)?;
        let mut sorted = restrictions.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != restrictions.len() {
            report.passed = false;
            report.witness =
                Some(format!("at {} two elements have the same corolla restrictions", om.trees[tree].encoding()));
            break;
        }
        if count != restrictions.len() {
            report.passed = false;
            report.witness = Some(format!(
                "at {}: {} elements but {} compatible corolla families",
                om.trees[tree].encoding(),
                restrictions.len(),
                count
            ));
            break;
        }
    }
    Ok(report)
}

/// |Hom(Sc[T], X)| computed by the generic natural-map search.
pub fn segal_core_maps(om: &OmegaCategory, x: &TabulatedPresheaf, tree: usize) -> Result<usize> {
    let sc = boundary_horn_core(om, tree, Which::SegalCore)?;
    Ok(NaturalMapSearch::new(&sc.ambient, x).on(&sc.selected).count())
}

// ---------------------------------------------------------------------------
// The leaf functor on truncations

/// λ: Ω≤ → Γ≤ tabulated on morphisms.
#[derive(Debug, Clone)]
pub struct LeafFunctor {
    pub omega: OmegaCategory,
    pub gamma: SetCategory,
    /// λ on objects: the number of leaves.
    pub on_objects: Vec<usize>,
    pub on_morphisms: Vec<usize>,
}

impl LeafFunctor {
    pub fn new(omega: OmegaCategory, gamma: SetCategory) -> Result<LeafFunctor> {
        let on_objects: Vec<usize> = omega.trees.iter().map(|t| t.leaves().len()).collect();
        let most = on_objects.iter().copied().max().unwrap_or(0);
        if most > gamma.max_size {
            return Err(Error::BoundExceeded { what: "leaf count".into(), limit: gamma.max_size, actual: most });
        }
        let mut on_morphisms = Vec::with_capacity(omega.morphisms.len());
        for f in &omega.morphisms {
            let l = leaf_functor(f)?;
            let skeletal = PartialMap::new(FinSet::skeleton(l.source.len()), FinSet::skeleton(l.target.len()), l.map)?;
            let id = gamma
                .morphism_index(&skeletal)
                .ok_or_else(|| Error::Inconsistent("leaf map missing from the Γ truncation".into()))?;
            on_morphisms.push(id);
        }
        Ok(LeafFunctor { omega, gamma, on_objects, on_morphisms })
    }

    pub fn standard(max_vertices: usize, max_edges: usize, max_size: usize) -> Result<LeafFunctor> {
        LeafFunctor::new(OmegaCategory::truncated(max_vertices, max_edges), SetCategory::gamma(max_size))
    }

    /// λ*(Y) = Y ∘ λ.
    pub fn pullback(&self, y: &TabulatedPresheaf) -> TabulatedPresheaf {
        let sizes = self.on_objects.iter().map(|&n| y.size(n)).collect();
        TabulatedPresheaf::from_fn(self.omega.cat.clone(), sizes, |f, a| y.act(self.on_morphisms[f], a))
    }

    /// λ*(g) for a map of Γ-presheaves.
    pub fn pullback_map(&self, g: &PresheafMap) -> PresheafMap {
        PresheafMap { components: self.on_objects.iter().map(|&n| g.components[n].clone()).collect() }
    }

    /// λ_!(X) as the colimit of F(λT, −) over the elements of X.
    pub fn left_kan(&self, x: &TabulatedPresheaf) -> LeftKanExtension {
        let om = &self.omega.cat;
        let gm = &self.gamma.cat;
        let n_a = gm.num_objects();
        // Triples (T, x, ψ) with ψ: A → λT, laid out per A.
        let mut offsets: Vec<HashMap<(usize, usize), usize>> = vec![HashMap::new(); n_a];
        let mut triples: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n_a];
        for a in 0..n_a {
            for t in 0..om.num_objects() {
                for el in 0..x.size(t) {
                    offsets[a].insert((t, el), triples[a].len());
                    for &psi in gm.hom(a, self.on_objects[t]) {
                        triples[a].push((t, el, psi));
                    }
                }
            }
        }
        let mut class_of: Vec<Vec<usize>> = Vec::with_capacity(n_a);
        let mut reps: Vec<Vec<(usize, usize, usize)>> = Vec::with_capacity(n_a);
        for a in 0..n_a {
            let mut uf = UnionFind::new(triples[a].len());
            let pos = |t: usize, el: usize, psi: usize| {
                let base = offsets[a][&(t, el)];
                base + gm.hom(a, self.on_objects[t]).iter().position(|&p| p == psi).unwrap()
            };
            for alpha in 0..om.num_morphisms() {
                let (s, t) = (om.source(alpha), om.target(alpha));
                let la = self.on_morphisms[alpha];
                for el in 0..x.size(t) {
                    let restricted = x.act(alpha, el);
                    for &psi in gm.hom(a, self.on_objects[s]) {
                        uf.union(pos(s, restricted, psi), pos(t, el, gm.compose(la, psi)));
                    }
                }
            }
            let mut seen = HashMap::new();
            let mut classes = Vec::with_capacity(triples[a].len());
            let mut r = Vec::new();
            for i in 0..triples[a].len() {
                let root = uf.find(i);
                let next = seen.len();
                let c = *seen.entry(root).or_insert(next);
                if c == r.len() {
                    r.push(triples[a][i]);
                }
                classes.push(c);
            }
            class_of.push(classes);
            reps.push(r);
        }
        let index = |a: usize, t: usize, el: usize, psi: usize| {
            let base = offsets[a][&(t, el)];
            class_of[a][base + gm.hom(a, self.on_objects[t]).iter().position(|&p| p == psi).unwrap()]
        };
        let sizes = reps.iter().map(Vec::len).collect();
        let presheaf = TabulatedPresheaf::from_fn(gm.clone(), sizes, |phi, c| {
            let (t, el, psi) = reps[gm.target(phi)][c];
            index(gm.source(phi), t, el, gm.compose(psi, phi))
        });
        let unit = PresheafMap {
            components: (0..om.num_objects())
                .map(|t| {
                    let lt = self.on_objects[t];
                    (0..x.size(t)).map(|el| index(lt, t, el, gm.identity(lt))).collect()
                })
                .collect(),
        };
        LeftKanExtension { presheaf, representatives: reps, unit }
    }

    /// The counit λ_! λ* Y → Y: [T, y, ψ] ↦ Y(ψ)(y).
    pub fn counit(&self, y: &TabulatedPresheaf, ext: &LeftKanExtension) -> PresheafMap {
        PresheafMap {
            components: ext
                .representatives
                .iter()
                .map(|reps| reps.iter().map(|&(_, el, psi)| y.act(psi, el)).collect())
                .collect(),
        }
    }

    /// The adjunct X → λ*Y of φ: λ_! X → Y.
    pub fn transpose_left(&self, ext: &LeftKanExtension, phi: &PresheafMap) -> PresheafMap {
        PresheafMap {
            components: ext
                .unit
                .components
                .iter()
                .enumerate()
                .map(|(t, comp)| comp.iter().map(|&c| phi.components[self.on_objects[t]][c]).collect())
                .collect(),
        }
    }

    /// The adjunct λ_! X → Y of χ: X → λ*Y.
    pub fn transpose_right(&self, y: &TabulatedPresheaf, ext: &LeftKanExtension, chi: &PresheafMap) -> PresheafMap {
        PresheafMap {
            components: ext
                .representatives
                .iter()
                .map(|reps| reps.iter().map(|&(t, el, psi)| y.act(psi, chi.components[t][el])).collect())
                .collect(),
        }
    }
}

/// λ_!(X) with representatives `(T, x, ψ)` per class and the unit
/// X → λ* λ_! X.
#[derive(Debug, Clone)]
pub struct LeftKanExtension {
    pub presheaf: TabulatedPresheaf,
    pub representatives: Vec<Vec<(usize, usize, usize)>>,
    pub unit: PresheafMap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjunctionReport {
    pub left_homs: usize,
    pub right_homs: usize,
    pub bijective: bool,
    pub triangle_left: bool,
    pub triangle_right: bool,
}

impl AdjunctionReport {
    pub fn passed(&self) -> bool {
        self.left_homs == self.right_homs && self.bijective && self.triangle_left && self.triangle_right
    }
}

/// Hom(λ_! X, Y) ≅ Hom(X, λ* Y) by enumerating both sides and transposing,
/// plus both triangle identities.
pub fn check_adjunction(lambda: &LeafFunctor, x: &TabulatedPresheaf, y: &TabulatedPresheaf) -> AdjunctionReport {
    let ext = lambda.left_kan(x);
    let ly = lambda.pullback(y);
    let left = NaturalMapSearch::new(&ext.presheaf, y).all();
    let right = NaturalMapSearch::new(x, &ly).all();
    let mut bijective = left.len() == right.len();
    if bijective {
        let right_set: std::collections::HashSet<&PresheafMap> = right.iter().collect();
        for phi in &left {
            let chi = lambda.transpose_left(&ext, phi);
            if !right_set.contains(&chi) || lambda.transpose_right(y, &ext, &chi) != *phi {
                bijective = false;
                break;
            }
        }
    }
    // ε_{λ_! X} ∘ λ_!(η_X) = id.
    let lx = lambda.pullback(&ext.presheaf);
    let ext2 = lambda.left_kan(&lx);
    let bang_unit = PresheafMap {
        components: ext
            .representatives
            .iter()
            .map(|reps| {
                reps.iter().map(|&(t, el, psi)| find_class(&ext2, t, ext.unit.components[t][el], psi)).collect()
            })
            .collect(),
    };
    let eps = lambda.counit(&ext.presheaf, &ext2);
    let triangle_left = eps.after(&bang_unit) == PresheafMap::identity(&ext.presheaf);
    // λ*(ε_Y) ∘ η_{λ* Y} = id.
    let ext3 = lambda.left_kan(&ly);
    let eps_y = lambda.counit(y, &ext3);
    let composite = lambda.pullback_map(&eps_y).after(&ext3.unit);
    let triangle_right = composite == PresheafMap::identity(&ly);
    AdjunctionReport { left_homs: left.len(), right_homs: right.len(), bijective, triangle_left, triangle_right }
}

/// The class of the triple (T, el, ψ) in λ_!(X): ψ*[T, el, id].
fn find_class(ext: &LeftKanExtension, t: usize, el: usize, psi: usize) -> usize {
    ext.presheaf.act(psi, ext.unit.components[t][el])
}

// ---------------------------------------------------------------------------
// JSON

/// Values per object and actions per morphism label (`target element →
/// source element`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafJson {
    pub category: String,
    pub values: BTreeMap<String, Vec<String>>,
    pub actions: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn presheaf_to_json(x: &TabulatedPresheaf) -> PresheafJson {
    let cat = x.category();
    let values = (0..cat.num_objects())
        .map(|o| (cat.objects()[o].name.clone(), (0..x.size(o)).map(|a| x.element_name(o, a)).collect()))
        .collect();
    let actions = (0..cat.num_morphisms())
        .filter(|&f| !cat.is_identity(f))
        .map(|f| {
            let (s, t) = (cat.source(f), cat.target(f));
            let m = (0..x.size(t)).map(|a| (x.element_name(t, a), x.element_name(s, x.act(f, a)))).collect();
            (cat.label(f).to_string(), m)
        })
        .collect();
    PresheafJson { category: cat.name.clone(), values, actions }
}

pub fn presheaf_from_json(cat: &Arc<FiniteCategory>, json: &PresheafJson) -> Result<TabulatedPresheaf> {
    let mut names = Vec::new();
    for o in cat.objects() {
        names.push(json.values.get(&o.name).cloned().unwrap_or_default());
    }
    let mut action = Vec::new();
    for f in 0..cat.num_morphisms() {
        let (s, t) = (cat.source(f), cat.target(f));
        if cat.is_identity(f) {
            action.push((0..names[t].len()).collect());
            continue;
        }
        let table = json
            .actions
            .get(cat.label(f))
            .ok_or_else(|| Error::Inconsistent(format!("no action for {}", cat.label(f))))?;
        let mut row = Vec::new();
        for a in &names[t] {
            let b = table.get(a).ok_or_else(|| Error::Inconsistent(format!("{} is undefined on {a}", cat.label(f))))?;
            row.push(
                names[s].iter().position(|n| n == b).ok_or_else(|| Error::Inconsistent(format!("unknown element {b}")))?,
            );
        }
        action.push(row);
    }
    let sizes = names.iter().map(Vec::len).collect();
    Ok(TabulatedPresheaf::new(cat.clone(), sizes, action)?.with_names(names))
}
