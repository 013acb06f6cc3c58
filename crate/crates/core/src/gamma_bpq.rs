//! Groupoids of finite sets over a base and the Γ-sets built from them:
//! Σ^L(A) and Σ_F(A), truncated nerves, specialness and Reedy cofibrancy of
//! BΣ, the unit map u, L*, inv*/pow/ρ and the reduced collapse ρ_!.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset_cat::{all_partial_maps, FinSet, PartialMap};
use crate::operad::permutations;
use crate::reedy_core::{
    PresheafMap, SetCategory, SetCategoryKind, TabulatedPresheaf, UnionFind,
};

// ---------------------------------------------------------------------------
// Permutation groupoids

/// A bijection between the carriers of two objects: `perm[i]` is the image
/// of the i-th element of the source carrier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupoidMorphism {
    pub source: usize,
    pub target: usize,
    pub perm: Vec<usize>,
}

/// A finite groupoid whose objects carry finite sets and whose morphisms are
/// bijections between them, composed as functions.
#[derive(Debug, Clone)]
pub struct GroupoidPresentation {
    pub name: String,
    pub objects: Vec<String>,
    pub morphisms: Vec<GroupoidMorphism>,
    carriers: Vec<usize>,
    identities: Vec<usize>,
    out: Vec<Vec<usize>>,
    index: HashMap<(usize, usize, Vec<usize>), usize>,
}

fn compose_perm(g: &[usize], f: &[usize]) -> Vec<usize> {
    f.iter().map(|&i| g[i]).collect()
}

fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

fn is_identity_perm(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &j)| i == j)
}

impl GroupoidPresentation {
    /// Checks identities, inverses and closure under composition.
    pub fn new(name: impl Into<String>, objects: Vec<String>, morphisms: Vec<GroupoidMorphism>) -> Result<Self> {
        let g = Self::new_unchecked(name, objects, morphisms)?;
        g.check_closed()?;
        Ok(g)
    }

    /// Indexes the morphisms and checks identities and carrier sizes only.
    pub fn new_unchecked(
        name: impl Into<String>,
        objects: Vec<String>,
        morphisms: Vec<GroupoidMorphism>,
    ) -> Result<Self> {
        let n = objects.len();
        let mut identities = vec![usize::MAX; n];
        let mut carriers = vec![usize::MAX; n];
        let mut out = vec![Vec::new(); n];
        let mut index = HashMap::new();
        for (id, m) in morphisms.iter().enumerate() {
            if m.source >= n || m.target >= n {
                return Err(Error::Mismatch(format!("morphism {id} has an endpoint outside the object list")));
            }
            let mut seen = vec![false; m.perm.len()];
            for &j in &m.perm {
                if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::Inconsistent(format!("morphism {id} is not a bijection")));
                }
            }
            if m.source == m.target && is_identity_perm(&m.perm) {
                identities[m.source] = id;
                carriers[m.source] = m.perm.len();
            }
            if index.insert((m.source, m.target, m.perm.clone()), id).is_some() {
                return Err(Error::Inconsistent(format!("morphism {id} is listed twice")));
            }
            out[m.source].push(id);
        }
        if let Some(o) = identities.iter().position(|&i| i == usize::MAX) {
            return Err(Error::Inconsistent(format!("object `{}` has no identity", objects[o])));
        }
        for (id, m) in morphisms.iter().enumerate() {
            if m.perm.len() != carriers[m.source] || m.perm.len() != carriers[m.target] {
                return Err(Error::Mismatch(format!("morphism {id} does not match the carrier sizes")));
            }
        }
        Ok(GroupoidPresentation { name: name.into(), objects, morphisms, carriers, identities, out, index })
    }

    pub fn check_closed(&self) -> Result<()> {
        for (f, mf) in self.morphisms.iter().enumerate() {
            if self.find(mf.target, mf.source, &invert_perm(&mf.perm)).is_none() {
                return Err(Error::Inconsistent(format!("morphism {f} has no inverse")));
            }
            for &g in &self.out[mf.target] {
                if self.compose(g, f).is_none() {
                    return Err(Error::Inconsistent(format!("{g} ∘ {f} is missing")));
                }
            }
        }
        Ok(())
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn carrier(&self, o: usize) -> usize {
        self.carriers[o]
    }

    pub fn identity(&self, o: usize) -> usize {
        self.identities[o]
    }

    pub fn find(&self, source: usize, target: usize, perm: &[usize]) -> Option<usize> {
        self.index.get(&(source, target, perm.to_vec())).copied()
    }

    /// g ∘ f, if the two are composable and the composite is listed.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        let (mg, mf) = (&self.morphisms[g], &self.morphisms[f]);
        if mf.target != mg.source {
            return None;
        }
        self.find(mf.source, mg.target, &compose_perm(&mg.perm, &mf.perm))
    }

    pub fn inverse(&self, f: usize) -> Option<usize> {
        let m = &self.morphisms[f];
        self.find(m.target, m.source, &invert_perm(&m.perm))
    }

    pub fn arrows_out(&self, o: usize) -> &[usize] {
        &self.out[o]
    }

    pub fn hom(&self, s: usize, t: usize) -> Vec<usize> {
        self.out[s].iter().copied().filter(|&f| self.morphisms[f].target == t).collect()
    }

    pub fn automorphisms(&self, o: usize) -> Vec<usize> {
        self.hom(o, o)
    }

    /// The connected component of each object, numbered in order of first
    /// appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.objects.len());
        for m in &self.morphisms {
            uf.union(m.source, m.target);
        }
        let mut label = HashMap::new();
        (0..self.objects.len())
            .map(|o| {
                let root = uf.find(o);
                let next = label.len();
                *label.entry(root).or_insert(next)
            })
            .collect()
    }

    pub fn num_components(&self) -> usize {
        self.components().iter().max().map_or(0, |&c| c + 1)
    }

    /// Objects as nodes, non-identity morphisms as labelled edges.
    pub fn to_dot(&self) -> String {
        let mut s = format!("digraph \"{}\" {{\n", self.name.replace('"', "'"));
        for (o, name) in self.objects.iter().enumerate() {
            let _ = writeln!(s, "  o{o} [label=\"{}\"];", name.replace('"', "'"));
        }
        for m in &self.morphisms {
            if m.source == m.target && is_identity_perm(&m.perm) {
                continue;
            }
            let perm: Vec<String> = m.perm.iter().map(|j| (j + 1).to_string()).collect();
            let _ = writeln!(s, "  o{} -> o{} [label=\"[{}]\"];", m.source, m.target, perm.join(","));
        }
        s.push_str("}\n");
        s
    }
}

/// A functor between two presentations, given on objects and morphisms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupoidFunctor {
    pub objects: Vec<usize>,
    pub morphisms: Vec<usize>,
}

impl GroupoidFunctor {
    pub fn identity(g: &GroupoidPresentation) -> GroupoidFunctor {
        GroupoidFunctor { objects: (0..g.num_objects()).collect(), morphisms: (0..g.morphisms.len()).collect() }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &GroupoidFunctor) -> GroupoidFunctor {
        GroupoidFunctor {
            objects: first.objects.iter().map(|&o| self.objects[o]).collect(),
            morphisms: first.morphisms.iter().map(|&m| self.morphisms[m]).collect(),
        }
    }

    /// Endpoints, identities and composites are preserved.
    pub fn check(&self, source: &GroupoidPresentation, target: &GroupoidPresentation) -> Result<()> {
        for (f, m) in source.morphisms.iter().enumerate() {
            let img = &target.morphisms[self.morphisms[f]];
            if img.source != self.objects[m.source] || img.target != self.objects[m.target] {
                return Err(Error::Mismatch(format!("image of morphism {f} has the wrong endpoints")));
            }
        }
        for o in 0..source.num_objects() {
            if self.morphisms[source.identity(o)] != target.identity(self.objects[o]) {
                return Err(Error::Inconsistent(format!("identity of `{}` is not preserved", source.objects[o])));
            }
        }
        for f in 0..source.morphisms.len() {
            for &g in source.arrows_out(source.morphisms[f].target) {
                let gf = source.compose(g, f).expect("closed presentation");
                if target.compose(self.morphisms[g], self.morphisms[f]) != Some(self.morphisms[gf]) {
                    return Err(Error::Inconsistent(format!("composite {g} ∘ {f} is not preserved")));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Truncated nerves

/// A chain of composable morphisms starting at `start`; a 0-simplex has no
/// arrows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Simplex {
    pub start: usize,
    pub arrows: Vec<usize>,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.arrows.len()
    }

    /// The j-th vertex U_j.
    pub fn vertex(&self, g: &GroupoidPresentation, j: usize) -> usize {
        if j == 0 {
            self.start
        } else {
            g.morphisms[self.arrows[j - 1]].target
        }
    }

    pub fn face(&self, g: &GroupoidPresentation, i: usize) -> Simplex {
        let n = self.dim();
        assert!(n > 0 && i <= n, "face d_{i} of a {n}-simplex");
        let mut arrows = self.arrows.clone();
        if i == 0 {
            let first = arrows.remove(0);
            Simplex { start: g.morphisms[first].target, arrows }
        } else if i == n {
            arrows.pop();
            Simplex { start: self.start, arrows }
        } else {
            let composite = g.compose(arrows[i], arrows[i - 1]).expect("closed presentation");
            arrows.splice(i - 1..=i, [composite]);
            Simplex { start: self.start, arrows }
        }
    }

    pub fn degeneracy(&self, g: &GroupoidPresentation, i: usize) -> Simplex {
        let mut arrows = self.arrows.clone();
        arrows.insert(i, g.identity(self.vertex(g, i)));
        Simplex { start: self.start, arrows }
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedNerve {
    /// `simplices[k]` lists the k-simplices in lexicographic order.
    pub simplices: Vec<Vec<Simplex>>,
}

pub const DEFAULT_NERVE_DEGREE: usize = 3;

pub fn nerve_truncate(g: &GroupoidPresentation, n: usize) -> TruncatedNerve {
    let mut simplices: Vec<Vec<Simplex>> =
        vec![(0..g.num_objects()).map(|o| Simplex { start: o, arrows: Vec::new() }).collect()];
    for k in 1..=n {
        let mut next = Vec::new();
        for s in &simplices[k - 1] {
            let last = s.vertex(g, k - 1);
            for &f in g.arrows_out(last) {
                let mut arrows = s.arrows.clone();
                arrows.push(f);
                next.push(Simplex { start: s.start, arrows });
            }
        }
        next.sort();
        simplices.push(next);
    }
    TruncatedNerve { simplices }
}

impl TruncatedNerve {
    pub fn degree(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices[k].len()
    }

    /// Checks every simplicial identity among faces and degeneracies that
    /// stays within the truncation. Returns the number of cases.
    pub fn check_simplicial_identities(&self, g: &GroupoidPresentation) -> Result<usize> {
        let mut cases = 0;
        let fail = |what: &str, s: &Simplex| Err(Error::Inconsistent(format!("{what} fails at {s:?}")));
        for n in 0..=self.degree() {
            for x in &self.simplices[n] {
                // d_i d_j = d_{j-1} d_i for i < j.
                if n >= 2 {
                    for j in 0..=n {
                        for i in 0..j {
                            cases += 1;
                            if x.face(g, j).face(g, i) != x.face(g, i).face(g, j - 1) {
                                return fail(&format!("d_{i} d_{j} = d_{} d_{i}", j - 1), x);
                            }
                        }
                    }
                }
                if n < self.degree() {
                    for j in 0..=n {
                        let sj = x.degeneracy(g, j);
                        // d_i s_j.
                        for i in 0..=n + 1 {
                            cases += 1;
                            let lhs = sj.face(g, i);
                            let rhs = if i == j || i == j + 1 {
                                x.clone()
                            } else if i < j {
                                x.face(g, i).degeneracy(g, j - 1)
                            } else {
                                x.face(g, i - 1).degeneracy(g, j)
                            };
                            if lhs != rhs {
                                return fail(&format!("d_{i} s_{j}"), x);
                            }
                        }
                    }
                }
                // s_i s_j = s_{j+1} s_i for i ≤ j.
                if n + 2 <= self.degree() {
                    for j in 0..=n {
                        for i in 0..=j {
                            cases += 1;
                            if x.degeneracy(g, j).degeneracy(g, i) != x.degeneracy(g, i).degeneracy(g, j + 1) {
                                return fail(&format!("s_{i} s_{j}"), x);
                            }
                        }
                    }
                }
            }
        }
        Ok(cases)
    }
}

// ---------------------------------------------------------------------------
// Σ^L(A)

/// The groupoid of finite sets U = {1..k}, k ≤ `size_bound`, with a map
/// U → A × L, and bijections over A × L. The pair (a, l) is coded a·|L| + l.
#[derive(Debug, Clone)]
pub struct SigmaGroupoid {
    pub base: FinSet,
    pub labels: FinSet,
    pub size_bound: usize,
    pub objects: Vec<Vec<usize>>,
    pub groupoid: GroupoidPresentation,
    index: HashMap<Vec<usize>, usize>,
}

pub fn sigma_groupoid(a: &FinSet, l: &FinSet, size_bound: usize) -> SigmaGroupoid {
    let colours = a.len() * l.len();
    let mut objects: Vec<Vec<usize>> = Vec::new();
    for k in 0..=size_bound {
        let mut level = vec![Vec::new()];
        for _ in 0..k {
            level = level
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..colours).map(move |c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        objects.extend(level);
    }
    let index: HashMap<Vec<usize>, usize> = objects.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
    let perms: Vec<Vec<Vec<usize>>> = (0..=size_bound).map(permutations).collect();
    let mut morphisms = Vec::new();
    for (s, f) in objects.iter().enumerate() {
        for sigma in &perms[f.len()] {
            // g ∘ σ = f.
            let mut g = vec![0; f.len()];
            for (i, &j) in sigma.iter().enumerate() {
                g[j] = f[i];
            }
            morphisms.push(GroupoidMorphism { source: s, target: index[&g], perm: sigma.clone() });
        }
    }
    let names = objects.iter().map(|f| object_name(a, l, f)).collect();
    let name = format!("Sigma^{}({})", l.len(), a.len());
    let groupoid = GroupoidPresentation::new_unchecked(name, names, morphisms).expect("Σ is a groupoid");
    SigmaGroupoid { base: a.clone(), labels: l.clone(), size_bound, objects, groupoid, index }
}

fn object_name(a: &FinSet, l: &FinSet, f: &[usize]) -> String {
    let parts: Vec<String> = f
        .iter()
        .map(|&c| {
            let (x, y) = (c / l.len(), c % l.len());
            if l.len() == 1 {
                a.elements()[x].clone()
            } else {
                format!("{}/{}", a.elements()[x], l.elements()[y])
            }
        })
        .collect();
    format!("[{}]", parts.join(","))
}

impl SigmaGroupoid {
    pub fn object_index(&self, f: &[usize]) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn colour(&self, a: usize, l: usize) -> usize {
        a * self.labels.len() + l
    }

    /// Cardinality of each fibre over A × L.
    pub fn fibre_sizes(&self, o: usize) -> Vec<usize> {
        let mut n = vec![0; self.base.len() * self.labels.len()];
        for &c in &self.objects[o] {
            n[c] += 1;
        }
        n
    }

    /// φ_* on an object: the kept positions of U and the new structure map.
    fn push_object(&self, phi: &PartialMap, f: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let nl = self.labels.len();
        let mut kept = Vec::new();
        let mut g = Vec::new();
        for (i, &c) in f.iter().enumerate() {
            if let Some(b) = phi.map[c / nl] {
                kept.push(i);
                g.push(b * nl + c % nl);
            }
        }
        (kept, g)
    }
}

/// The functor φ_*: Σ^L(A) → Σ^L(B) for φ: A ⇸ B, restricting φ ∘ f to
/// f⁻¹(dom φ) with the induced order on the carrier.
pub fn gamma_action(phi: &PartialMap, source: &SigmaGroupoid, target: &SigmaGroupoid) -> Result<GroupoidFunctor> {
    if phi.source.len() != source.base.len() || phi.target.len() != target.base.len() {
        return Err(Error::Mismatch("partial map does not match the groupoid bases".into()));
    }
    if source.labels.len() != target.labels.len() {
        return Err(Error::Mismatch("label sets differ".into()));
    }
    let mut objects = Vec::with_capacity(source.objects.len());
    let mut kept = Vec::with_capacity(source.objects.len());
    for f in &source.objects {
        let (k, g) = source.push_object(phi, f);
        let o = target.object_index(&g).ok_or_else(|| Error::BoundExceeded {
            what: "carrier size".into(),
            limit: target.size_bound,
            actual: g.len(),
        })?;
        objects.push(o);
        kept.push(k);
    }
    let mut morphisms = Vec::with_capacity(source.groupoid.morphisms.len());
    for m in &source.groupoid.morphisms {
        let (ks, kt) = (&kept[m.source], &kept[m.target]);
        let pos: HashMap<usize, usize> = kt.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        let perm: Vec<usize> = ks.iter().map(|&i| pos[&m.perm[i]]).collect();
        let id = target
            .groupoid
            .find(objects[m.source], objects[m.target], &perm)
            .ok_or_else(|| Error::Inconsistent("restricted bijection is not over the target".into()))?;
        morphisms.push(id);
    }
    Ok(GroupoidFunctor { objects, morphisms })
}

/// Exhaustive check that φ ↦ φ_* respects identities and composition for
/// all partial maps between sets of size ≤ `max_size`. Returns the number of
/// composable pairs checked.
pub fn check_gamma_functoriality(labels: &FinSet, max_size: usize, size_bound: usize) -> Result<usize> {
    let sets: Vec<FinSet> = (0..=max_size).map(FinSet::skeleton).collect();
    let sigmas: Vec<SigmaGroupoid> = sets.iter().map(|a| sigma_groupoid(a, labels, size_bound)).collect();
    let mut pushed: HashMap<(usize, usize, Vec<Option<usize>>), GroupoidFunctor> = HashMap::new();
    for a in 0..=max_size {
        for b in 0..=max_size {
            for phi in all_partial_maps(&sets[a], &sets[b]) {
                let f = gamma_action(&phi, &sigmas[a], &sigmas[b])?;
                if a == b && phi == PartialMap::identity(&sets[a]) && f != GroupoidFunctor::identity(&sigmas[a].groupoid) {
                    return Err(Error::Inconsistent(format!("id_{a} does not act as the identity")));
                }
                pushed.insert((a, b, phi.map), f);
            }
        }
    }
    let mut pairs = 0;
    for a in 0..=max_size {
        for b in 0..=max_size {
            for c in 0..=max_size {
                for phi in all_partial_maps(&sets[a], &sets[b]) {
                    for psi in all_partial_maps(&sets[b], &sets[c]) {
                        let composite = psi.after_unchecked(&phi);
                        let lhs = &pushed[&(a, c, composite.map.clone())];
                        let rhs = pushed[&(b, c, psi.map.clone())].after(&pushed[&(a, b, phi.map.clone())]);
                        if *lhs != rhs {
                            return Err(Error::Inconsistent(format!(
                                "(ψ∘φ)_* ≠ ψ_* φ_* for φ = {phi:?}, ψ = {psi:?}"
                            )));
                        }
                        pairs += 1;
                    }
                }
            }
        }
    }
    Ok(pairs)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub base: usize,
    pub labels: usize,
    pub carrier_bound: usize,
    pub classes: usize,
    /// Tuples in ℕ^{A×L} with sum at most the bound.
    pub expected: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Iso classes of Σ^L(A) against fibre-size tuples, and |Aut| = ∏ n_c!.
pub fn pi0_census(a: &FinSet, l: &FinSet, size_bound: usize) -> CensusReport {
    let s = sigma_groupoid(a, l, size_bound);
    let comps = s.groupoid.components();
    let classes = comps.iter().max().map_or(0, |&c| c + 1);
    let m = a.len() * l.len();
    let expected = binomial(size_bound + m, m);
    let mut witness = None;
    let mut tuple_of: Vec<Option<Vec<usize>>> = vec![None; classes];
    let mut seen = BTreeSet::new();
    for o in 0..s.objects.len() {
        let n = s.fibre_sizes(o);
        let aut = s.groupoid.automorphisms(o).len();
        let expected_aut: usize = n.iter().map(|&k| factorial(k)).product();
        if aut != expected_aut && witness.is_none() {
            witness = Some(format!("|Aut({})| = {aut}, expected {expected_aut}", s.groupoid.objects[o]));
        }
        match &tuple_of[comps[o]] {
            Some(t) if *t != n && witness.is_none() => {
                witness = Some(format!("class of {} mixes fibre sizes", s.groupoid.objects[o]));
            }
            Some(_) => {}
            None => {
                if !seen.insert(n.clone()) && witness.is_none() {
                    witness = Some(format!("fibre sizes {n:?} occur in two classes"));
                }
                tuple_of[comps[o]] = Some(n);
            }
        }
    }
    if witness.is_none() && classes != expected {
        witness = Some(format!("{classes} classes, expected {expected}"));
    }
    CensusReport {
        base: a.len(),
        labels: l.len(),
        carrier_bound: size_bound,
        classes,
        expected,
        passed: witness.is_none(),
        witness,
    }
}

// ---------------------------------------------------------------------------
// Specialness

/// Σ^L(A ⊔ B) with its two inert projections to Σ^L(A) and Σ^L(B).
#[derive(Debug, Clone)]
pub struct SpecialComparison {
    pub sum: SigmaGroupoid,
    pub left: SigmaGroupoid,
    pub right: SigmaGroupoid,
    pub to_left: GroupoidFunctor,
    pub to_right: GroupoidFunctor,
}

pub fn special_comparison(a: &FinSet, b: &FinSet, l: &FinSet, size_bound: usize) -> Result<SpecialComparison> {
    let (na, nb) = (a.len(), b.len());
    let ab = FinSet::new(
        a.elements().iter().map(|x| format!("{x}.0")).chain(b.elements().iter().map(|x| format!("{x}.1"))),
    )?;
    let sum = sigma_groupoid(&ab, l, size_bound);
    let left = sigma_groupoid(a, l, size_bound);
    let right = sigma_groupoid(b, l, size_bound);
    let p1 = PartialMap::new(ab.clone(), a.clone(), (0..na + nb).map(|i| (i < na).then_some(i)).collect())?;
    let p2 = PartialMap::new(ab, b.clone(), (0..na + nb).map(|i| (i >= na).then(|| i - na)).collect())?;
    let to_left = gamma_action(&p1, &sum, &left)?;
    let to_right = gamma_action(&p2, &sum, &right)?;
    Ok(SpecialComparison { sum, left, right, to_left, to_right })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecialReport {
    pub left: usize,
    pub right: usize,
    pub labels: usize,
    /// Essential surjectivity is relative to this carrier bound.
    pub carrier_bound: usize,
    pub classes_checked: usize,
    pub hom_sets_checked: usize,
    pub essentially_surjective: bool,
    pub fully_faithful: bool,
    pub witness: Option<String>,
}

impl SpecialReport {
    pub fn passed(&self) -> bool {
        self.essentially_surjective && self.fully_faithful
    }
}

/// Σ(A ⊔ B) → Σ(A) × Σ(B) is a groupoid equivalence within the bound.
pub fn check_special(a: &FinSet, b: &FinSet, size_bound: usize) -> Result<SpecialReport> {
    let l = FinSet::skeleton(1);
    Ok(check_comparison(&special_comparison(a, b, &l, size_bound)?))
}

pub fn check_comparison(cmp: &SpecialComparison) -> SpecialReport {
    let (sum, left, right) = (&cmp.sum.groupoid, &cmp.left.groupoid, &cmp.right.groupoid);
    let mut witness: Option<String> = None;
    let mut fully_faithful = true;
    let mut hom_sets = 0;
    let hom_count = |g: &GroupoidPresentation, s: usize, t: usize| g.hom(s, t).len();
    'outer: for f in 0..sum.num_objects() {
        let mut by_target: HashMap<usize, Vec<usize>> = HashMap::new();
        for &m in sum.arrows_out(f) {
            by_target.entry(sum.morphisms[m].target).or_default().push(m);
        }
        let mut targets: Vec<_> = by_target.into_iter().collect();
        targets.sort();
        for (g, ms) in targets {
            hom_sets += 1;
            let (f1, g1) = (cmp.to_left.objects[f], cmp.to_left.objects[g]);
            let (f2, g2) = (cmp.to_right.objects[f], cmp.to_right.objects[g]);
            let expected = hom_count(left, f1, g1) * hom_count(right, f2, g2);
            let images: BTreeSet<(usize, usize)> =
                ms.iter().map(|&m| (cmp.to_left.morphisms[m], cmp.to_right.morphisms[m])).collect();
            if images.len() != ms.len() || ms.len() != expected {
                fully_faithful = false;
                witness = Some(format!(
                    "Hom({}, {}) has {} elements with {} distinct images; the product Hom-set has {}",
                    sum.objects[f],
                    sum.objects[g],
                    ms.len(),
                    images.len(),
                    expected
                ));
                break 'outer;
            }
        }
    }
    // Non-isomorphic objects must stay non-isomorphic.
    let (cs, cl, cr) = (sum.components(), left.components(), right.components());
    let mut class_image: HashMap<(usize, usize), usize> = HashMap::new();
    for f in 0..sum.num_objects() {
        let key = (cl[cmp.to_left.objects[f]], cr[cmp.to_right.objects[f]]);
        match class_image.get(&key) {
            Some(&g) if cs[g] != cs[f] => {
                if fully_faithful {
                    fully_faithful = false;
                    witness = Some(format!(
                        "{} and {} are not isomorphic but their images are",
                        sum.objects[g], sum.objects[f]
                    ));
                }
            }
            Some(_) => {}
            None => {
                class_image.insert(key, f);
            }
        }
    }
    // Every pair of classes with total carrier within the bound is hit.
    let reps = |g: &GroupoidPresentation, comps: &[usize]| {
        let mut r: Vec<usize> = Vec::new();
        for o in 0..g.num_objects() {
            if comps[o] == r.len() {
                r.push(o);
            }
        }
        r
    };
    let (rl, rr) = (reps(left, &cl), reps(right, &cr));
    let mut essentially_surjective = true;
    let mut classes = 0;
    for (c1, &x) in rl.iter().enumerate() {
        for (c2, &y) in rr.iter().enumerate() {
            if left.carrier(x) + right.carrier(y) > cmp.sum.size_bound {
                continue;
            }
            classes += 1;
            if !class_image.contains_key(&(c1, c2)) && essentially_surjective {
                essentially_surjective = false;
                if witness.is_none() {
                    witness = Some(format!("no object over ({}, {})", left.objects[x], right.objects[y]));
                }
            }
        }
    }
    SpecialReport {
        left: cmp.left.base.len(),
        right: cmp.right.base.len(),
        labels: cmp.sum.labels.len(),
        carrier_bound: cmp.sum.size_bound,
        classes_checked: classes,
        hom_sets_checked: hom_sets,
        essentially_surjective,
        fully_faithful,
        witness,
    }
}

// ---------------------------------------------------------------------------
// Reedy cofibrancy of BΣ

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CofibrancyReport {
    pub base: usize,
    pub carrier_bound: usize,
    pub nerve_degree: usize,
    pub group_order: usize,
    /// Simplices whose structure map is surjective.
    pub simplices_checked: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Aut(A) acts freely on the simplices of BΣ(A) outside the union of the
/// BΣ(B), B ⊊ A, i.e. on chains of surjections U ↠ A.
pub fn check_bsigma_cofibrant(a: &FinSet, size_bound: usize, degree: usize) -> CofibrancyReport {
    check_bsigma_cofibrant_with(a, size_bound, degree, &|pi, f| f.iter().map(|&x| pi[x]).collect())
}

/// An action of a permutation of A on a chain of object indices.
pub type ChainAction = dyn Fn(&[usize], &[usize]) -> Vec<usize>;

/// As `check_bsigma_cofibrant`, with the action of π ∈ Aut(A) on structure
/// maps supplied by the caller.
pub fn check_bsigma_cofibrant_with(
    a: &FinSet,
    size_bound: usize,
    degree: usize,
    act: &ChainAction,
) -> CofibrancyReport {
    let s = sigma_groupoid(a, &FinSet::skeleton(1), size_bound);
    let g = &s.groupoid;
    let nerve = nerve_truncate(g, degree);
    let group: Vec<Vec<usize>> = permutations(a.len()).into_iter().filter(|p| !is_identity_perm(p)).collect();
    let surjective = |o: usize| s.fibre_sizes(o).iter().all(|&k| k > 0);
    let mut checked = 0;
    let mut witness = None;
    'outer: for level in &nerve.simplices {
        for x in level {
            if !surjective(x.start) {
                continue;
            }
            checked += 1;
            let vertices: Vec<&Vec<usize>> = (0..=x.dim()).map(|j| &s.objects[x.vertex(g, j)]).collect();
            for pi in &group {
                if vertices.iter().all(|f| act(pi, f) == **f) {
                    let names: Vec<&str> = (0..=x.dim()).map(|j| g.objects[x.vertex(g, j)].as_str()).collect();
                    witness = Some(format!("{pi:?} fixes the {}-simplex through {}", x.dim(), names.join(" -> ")));
                    break 'outer;
                }
            }
        }
    }
    CofibrancyReport {
        base: a.len(),
        carrier_bound: size_bound,
        nerve_degree: degree,
        group_order: group.len() + 1,
        simplices_checked: checked,
        passed: witness.is_none(),
        witness,
    }
}

// ---------------------------------------------------------------------------
// The unit map u: F(L, −) → BΣ^L

/// u(φ) for each φ: L ⇸ A in `all_partial_maps` order: the carrier dom φ
/// with structure map l ↦ (φ(l), l).
pub fn unit_map_u(l: &FinSet, sigma: &SigmaGroupoid) -> Result<Vec<usize>> {
    if sigma.labels.len() != l.len() {
        return Err(Error::Mismatch("label set of Σ^L(A) differs from L".into()));
    }
    if sigma.size_bound < l.len() {
        return Err(Error::BoundExceeded { what: "carrier bound".into(), limit: sigma.size_bound, actual: l.len() });
    }
    all_partial_maps(l, &sigma.base)
        .iter()
        .map(|phi| {
            let f: Vec<usize> =
                phi.map.iter().enumerate().filter_map(|(x, y)| y.map(|a| sigma.colour(a, x))).collect();
            sigma.object_index(&f).ok_or_else(|| Error::Inconsistent("u(φ) is not listed".into()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitReport {
    pub labels: usize,
    pub max_size: usize,
    pub maps_checked: usize,
    pub squares_checked: usize,
    pub injective: bool,
    pub pushforward: bool,
    pub natural: bool,
    pub witness: Option<String>,
}

impl UnitReport {
    pub fn passed(&self) -> bool {
        self.injective && self.pushforward && self.natural
    }
}

/// Injectivity of u, u(φ) = φ_*(id object), and u(ψ∘φ) = ψ_* u(φ) for all
/// ψ: A ⇸ B with |A|, |B| ≤ `max_size`.
pub fn check_unit_map(l: &FinSet, max_size: usize) -> Result<UnitReport> {
    let sets: Vec<FinSet> = (0..=max_size).map(FinSet::skeleton).collect();
    let bound = l.len();
    let sigmas: Vec<SigmaGroupoid> = sets.iter().map(|a| sigma_groupoid(a, l, bound)).collect();
    let units: Vec<Vec<usize>> = sigmas.iter().map(|s| unit_map_u(l, s)).collect::<Result<_>>()?;
    let sigma_l = sigma_groupoid(l, l, bound);
    let id_object = unit_map_u(l, &sigma_l)?[all_partial_maps(l, l)
        .iter()
        .position(|p| *p == PartialMap::identity(l))
        .expect("identity is a partial map")];
    let mut report = UnitReport {
        labels: l.len(),
        max_size,
        maps_checked: 0,
        squares_checked: 0,
        injective: true,
        pushforward: true,
        natural: true,
        witness: None,
    };
    for (a, set) in sets.iter().enumerate() {
        let maps = all_partial_maps(l, set);
        report.maps_checked += maps.len();
        let distinct: BTreeSet<usize> = units[a].iter().copied().collect();
        if distinct.len() != maps.len() && report.injective {
            report.injective = false;
            report.witness.get_or_insert_with(|| format!("u is not injective at |A| = {a}"));
        }
        for (i, phi) in maps.iter().enumerate() {
            let pushed = gamma_action(phi, &sigma_l, &sigmas[a])?;
            if pushed.objects[id_object] != units[a][i] && report.pushforward {
                report.pushforward = false;
                report.witness.get_or_insert_with(|| format!("u({phi:?}) ≠ φ_*(id)"));
            }
        }
        for (b, tset) in sets.iter().enumerate() {
            let targets = all_partial_maps(l, tset);
            let pos: HashMap<Vec<Option<usize>>, usize> =
                targets.iter().enumerate().map(|(i, p)| (p.map.clone(), i)).collect();
            for psi in all_partial_maps(set, tset) {
                let push = gamma_action(&psi, &sigmas[a], &sigmas[b])?;
                for (i, phi) in maps.iter().enumerate() {
                    report.squares_checked += 1;
                    let j = pos[&psi.after_unchecked(phi).map];
                    if push.objects[units[a][i]] != units[b][j] && report.natural {
                        report.natural = false;
                        report.witness.get_or_insert_with(|| format!("u(ψ∘φ) ≠ ψ_* u(φ) for φ = {phi:?}, ψ = {psi:?}"));
                    }
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// L*

fn product_map(phi: &PartialMap, l: usize) -> PartialMap {
    let (a, b) = (phi.source.len(), phi.target.len());
    let map = (0..a * l).map(|c| phi.map[c / l].map(|y| y * l + c % l)).collect();
    PartialMap { source: FinSet::skeleton(a * l), target: FinSet::skeleton(b * l), map }
}

/// L*(X)(A) = X(A × L), for X a Γ-set on `gamma`, tabulated on sets of size
/// at most `max_size`.
pub fn l_star(x: &TabulatedPresheaf, gamma: &SetCategory, l: &FinSet, max_size: usize) -> Result<(SetCategory, TabulatedPresheaf)> {
    if gamma.kind != SetCategoryKind::Gamma {
        return Err(Error::Mismatch("L* acts on Γ-sets".into()));
    }
    if max_size * l.len() > gamma.max_size {
        return Err(Error::BoundExceeded {
            what: "|A|·|L|".into(),
            limit: gamma.max_size,
            actual: max_size * l.len(),
        });
    }
    let small = SetCategory::gamma(max_size);
    let n = l.len();
    let lift: Vec<usize> = small
        .maps
        .iter()
        .map(|phi| gamma.morphism_index(&product_map(phi, n)).expect("A × L is within the bound"))
        .collect();
    let sizes = (0..=max_size).map(|a| x.size(a * n)).collect();
    let y = TabulatedPresheaf::from_fn(small.cat.clone(), sizes, |f, e| x.act(lift[f], e));
    Ok((small, y))
}

/// ⋁_L F(1, −): a basepoint plus one copy of A per label.
pub fn wedge_of_points(gamma: &SetCategory, l: usize) -> TabulatedPresheaf {
    let cat = gamma.cat.clone();
    let sizes = (0..=gamma.max_size).map(|a| 1 + l * a).collect();
    TabulatedPresheaf::from_fn(cat.clone(), sizes, |f, e| {
        if e == 0 {
            return 0;
        }
        // f: A → B is stored as B ⇸ A; the element (l, b) of the wedge at B.
        let b_size = cat.target(f);
        let a_size = cat.source(f);
        let (copy, b) = ((e - 1) / b_size, (e - 1) % b_size);
        match gamma.maps[f].map[b] {
            Some(a) => 1 + copy * a_size + a,
            None => 0,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WedgeReport {
    pub labels: usize,
    pub max_size: usize,
    pub natural: bool,
    pub bijective: bool,
}

/// L*F(k, −) = F(k, − × L) on `gamma`, computed from partial maps without
/// tabulating Γ on the larger sets. Elements follow `all_partial_maps`.
pub fn lstar_representable(gamma: &SetCategory, k: usize, l: &FinSet) -> TabulatedPresheaf {
    let n = l.len();
    let values: Vec<Vec<PartialMap>> =
        (0..=gamma.max_size).map(|a| all_partial_maps(&FinSet::skeleton(k), &FinSet::skeleton(a * n))).collect();
    let pos: Vec<HashMap<Vec<Option<usize>>, usize>> = values
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, p)| (p.map.clone(), i)).collect())
        .collect();
    TabulatedPresheaf::from_fn(gamma.cat.clone(), values.iter().map(Vec::len).collect(), |f, e| {
        let phi = product_map(&gamma.maps[f], n);
        let psi = &values[gamma.cat.target(f)][e];
        pos[gamma.cat.source(f)][&phi.after_unchecked(psi).map]
    })
}

/// L*F(1, −) ≅ ⋁_L F(1, −), checked as a natural bijection.
pub fn check_wedge(l: &FinSet, max_size: usize) -> WedgeReport {
    let n = l.len();
    let small = SetCategory::gamma(max_size);
    let lf1 = lstar_representable(&small, 1, l);
    let wedge = wedge_of_points(&small, n);
    let components = (0..=max_size)
        .map(|a| {
            all_partial_maps(&FinSet::skeleton(1), &FinSet::skeleton(a * n))
                .iter()
                .map(|p| match p.map[0] {
                    None => 0,
                    Some(c) => 1 + (c % n) * a + c / n,
                })
                .collect()
        })
        .collect();
    let iso = PresheafMap { components };
    WedgeReport {
        labels: n,
        max_size,
        natural: iso.check_natural(&lf1, &wedge).is_ok(),
        bijective: iso.is_injective(&wedge) && iso.is_surjective(&wedge),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PushoutReport {
    pub base: usize,
    pub labels: usize,
    /// |F(2, A × L)|.
    pub total: usize,
    pub expected: usize,
    /// Total maps 2 → A × L.
    pub total_maps: usize,
    /// ⋁_L F(1, A) ∨ ⋁_L F(1, A).
    pub wedge_part: usize,
    /// ⋁_{L²} F⁻(2, A).
    pub glue: usize,
    pub pushout: usize,
    pub commutes: bool,
    pub bijective: bool,
}

impl PushoutReport {
    pub fn passed(&self) -> bool {
        self.commutes && self.bijective && self.total == self.expected && self.pushout == self.total
    }
}

/// Strict pushout of sets
///   ⋁_{L²} F⁻(2,A) → ⋁_{L²} F(2,A)
///         ↓                 ↓
///   ⋁_L F(1,A) ∨ ⋁_L F(1,A) → F(2, A × L).
pub fn check_lstar_pushout(a: usize, l: usize) -> PushoutReport {
    let two = FinSet::skeleton(2);
    let f2a = all_partial_maps(&two, &FinSet::skeleton(a));
    let target = all_partial_maps(&two, &FinSet::skeleton(a * l));
    let tpos: HashMap<Vec<Option<usize>>, usize> = target.iter().enumerate().map(|(i, p)| (p.map.clone(), i)).collect();
    let relabel = |phi: &PartialMap, l1: usize, l2: usize| -> Vec<Option<usize>> {
        vec![phi.map[0].map(|x| x * l + l1), phi.map[1].map(|x| x * l + l2)]
    };
    // Top left: the basepoint, then (l1, l2, φ) for φ not undefined.
    let mut tl: Vec<Vec<Option<usize>>> = vec![vec![None, None]];
    let mut tl_index = HashMap::new();
    // Bottom left inside top left.
    let mut bl_to_tl = vec![0];
    let mut bl_to_br = vec![0];
    // Bottom right: basepoint, (first, l, x), (second, l, x).
    let br_of = |which: usize, lab: usize, x: usize| 1 + which * l * a + lab * a + x;
    let br_size = 1 + 2 * l * a;
    let mut br_image = vec![0; br_size];
    br_image[0] = tpos[&vec![None, None]];
    for lab in 0..l {
        for x in 0..a {
            br_image[br_of(0, lab, x)] = tpos[&vec![Some(x * l + lab), None]];
            br_image[br_of(1, lab, x)] = tpos[&vec![None, Some(x * l + lab)]];
        }
    }
    for l1 in 0..l {
        for l2 in 0..l {
            for phi in &f2a {
                if phi.map.iter().all(Option::is_none) {
                    continue;
                }
                let id = tl.len();
                tl.push(relabel(phi, l1, l2));
                tl_index.insert((l1, l2, phi.map.clone()), id);
                match (phi.map[0], phi.map[1]) {
                    (Some(x), None) => {
                        bl_to_tl.push(id);
                        bl_to_br.push(br_of(0, l1, x));
                    }
                    (None, Some(x)) => {
                        bl_to_tl.push(id);
                        bl_to_br.push(br_of(1, l2, x));
                    }
                    _ => {}
                }
            }
        }
    }
    let tl_image: Vec<usize> = tl.iter().map(|m| tpos[m]).collect();
    let commutes = bl_to_tl.iter().zip(&bl_to_br).all(|(&t, &b)| tl_image[t] == br_image[b]);
    let mut uf = UnionFind::new(tl.len() + br_size);
    for (&t, &b) in bl_to_tl.iter().zip(&bl_to_br) {
        uf.union(t, tl.len() + b);
    }
    let mut class_image: HashMap<usize, usize> = HashMap::new();
    let mut well_defined = true;
    for i in 0..tl.len() + br_size {
        let img = if i < tl.len() { tl_image[i] } else { br_image[i - tl.len()] };
        let root = uf.find(i);
        if *class_image.entry(root).or_insert(img) != img {
            well_defined = false;
        }
    }
    let pushout = class_image.len();
    let hit: BTreeSet<usize> = class_image.values().copied().collect();
    PushoutReport {
        base: a,
        labels: l,
        total: target.len(),
        expected: (a * l + 1).pow(2),
        total_maps: (a * l).pow(2),
        wedge_part: br_size,
        glue: bl_to_tl.len(),
        pushout,
        commutes: commutes && well_defined,
        bijective: well_defined && hit.len() == pushout && pushout == target.len(),
    }
}

// ---------------------------------------------------------------------------
// inv*, pow and ρ

/// inv*(X), pow(X) and ρ: inv*(X) → pow(X) as presheaves on M.
#[derive(Debug, Clone)]
pub struct InvPowRho {
    pub m: SetCategory,
    pub inv: TabulatedPresheaf,
    pub pow: TabulatedPresheaf,
    pub rho: PresheafMap,
    /// pow(X)(A) as pairs (z ∈ X(∅), family in X(1̲)^A over z).
    pub pow_elements: Vec<Vec<(usize, Vec<usize>)>>,
}

fn gamma_morphism(gamma: &SetCategory, map: Vec<Option<usize>>, target: usize) -> usize {
    let source = map.len();
    let pm = PartialMap { source: FinSet::skeleton(source), target: FinSet::skeleton(target), map };
    gamma.morphism_index(&pm).expect("sets within the bound")
}

pub fn inv_pow_rho(x: &TabulatedPresheaf, gamma: &SetCategory) -> Result<InvPowRho> {
    if gamma.kind != SetCategoryKind::Gamma {
        return Err(Error::Mismatch("inv* and pow act on Γ-sets".into()));
    }
    let n = gamma.max_size;
    let m = SetCategory::injections(n);
    if n == 0 {
        return Err(Error::BoundExceeded { what: "set size".into(), limit: 0, actual: 1 });
    }
    // inv(i) for i: A ↪ B is the Γ-morphism A → B stored as B ⇸ A.
    let inv_index: Vec<usize> = m
        .maps
        .iter()
        .map(|i| {
            let mut map = vec![None; i.target.len()];
            for (a, y) in i.map.iter().enumerate() {
                map[y.expect("total")] = Some(a);
            }
            gamma_morphism(gamma, map, i.source.len())
        })
        .collect();
    let inv = TabulatedPresheaf::from_fn(m.cat.clone(), x.sizes().to_vec(), |f, e| x.act(inv_index[f], e));
    // X(1̲) → X(∅).
    let to_empty = gamma_morphism(gamma, vec![None], 0);
    let mut pow_elements: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    for a in 0..=n {
        let mut elems = Vec::new();
        for z in 0..x.size(0) {
            let fibre: Vec<usize> = (0..x.size(1)).filter(|&e| x.act(to_empty, e) == z).collect();
            let mut families = vec![Vec::new()];
            for _ in 0..a {
                families = families
                    .into_iter()
                    .flat_map(|p: Vec<usize>| {
                        fibre.iter().map(move |&e| {
                            let mut q = p.clone();
                            q.push(e);
                            q
                        })
                    })
                    .collect();
            }
            elems.extend(families.into_iter().map(|fam| (z, fam)));
        }
        pow_elements.push(elems);
    }
    let pos: Vec<HashMap<(usize, Vec<usize>), usize>> = pow_elements
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect())
        .collect();
    let pow = TabulatedPresheaf::from_fn(m.cat.clone(), pow_elements.iter().map(Vec::len).collect(), |f, e| {
        let i = &m.maps[f];
        let (z, fam) = &pow_elements[i.target.len()][e];
        let restricted: Vec<usize> = i.map.iter().map(|y| fam[y.expect("total")]).collect();
        pos[i.source.len()][&(*z, restricted)]
    });
    let components = (0..=n)
        .map(|a| {
            let to_z = gamma_morphism(gamma, vec![None; a], 0);
            let projections: Vec<usize> = (0..a)
                .map(|k| gamma_morphism(gamma, (0..a).map(|j| (j == k).then_some(0)).collect(), 1))
                .collect();
            (0..x.size(a))
                .map(|e| {
                    let z = x.act(to_z, e);
                    let fam = projections.iter().map(|&p| x.act(p, e)).collect();
                    pos[a][&(z, fam)]
                })
                .collect()
        })
        .collect();
    Ok(InvPowRho { m, inv, pow, rho: PresheafMap { components }, pow_elements })
}

/// X(A) = M^A for a commutative monoid M on {0..k-1}: a partial map
/// B ⇸ A sums over fibres. These Γ-sets are strictly special.
pub fn monoid_gamma_set(gamma: &SetCategory, k: usize, zero: usize, add: impl Fn(usize, usize) -> usize) -> TabulatedPresheaf {
    let sizes: Vec<usize> = (0..=gamma.max_size).map(|a| k.pow(a as u32)).collect();
    let digits = |mut e: usize, len: usize| {
        let mut d = vec![0; len];
        for slot in d.iter_mut().rev() {
            *slot = e % k;
            e /= k;
        }
        d
    };
    TabulatedPresheaf::from_fn(gamma.cat.clone(), sizes, |f, e| {
        let phi = &gamma.maps[f];
        let from = digits(e, phi.source.len());
        let mut to = vec![zero; phi.target.len()];
        for (b, y) in phi.map.iter().enumerate() {
            if let Some(a) = y {
                to[*a] = add(to[*a], from[b]);
            }
        }
        to.iter().fold(0, |acc, &d| acc * k + d)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitReport {
    pub size: usize,
    /// Compatible families over the proper subsets.
    pub families: usize,
    pub surjective: bool,
    pub injective: bool,
}

/// X(A) → lim_{B ⊊ A} X(B) along the inert restrictions.
pub fn restriction_limit(x: &TabulatedPresheaf, gamma: &SetCategory, a: usize) -> Result<LimitReport> {
    if a > gamma.max_size || a >= usize::BITS as usize {
        return Err(Error::BoundExceeded { what: "set size".into(), limit: gamma.max_size, actual: a });
    }
    let full = (1usize << a) - 1;
    let subsets: Vec<usize> = (0..full).filter(|s| s & !full == 0).collect();
    let members = |s: usize| (0..a).filter(|i| s >> i & 1 == 1).collect::<Vec<_>>();
    // Γ-morphism B' → B restricting X(B) to X(B') for B' ⊆ B.
    let restrict = |big: usize, small: usize| {
        let (mb, ms) = (members(big), members(small));
        let map = mb.iter().map(|i| ms.iter().position(|j| j == i)).collect();
        gamma_morphism(gamma, map, ms.len())
    };
    let mut order = subsets.clone();
    order.sort_by_key(|s| s.count_ones());
    let mut families: Vec<HashMap<usize, usize>> = vec![HashMap::new()];
    for &s in &order {
        let size = x.size(s.count_ones() as usize);
        let below: Vec<(usize, usize)> =
            order.iter().copied().filter(|&t| t != s && t & s == t).map(|t| (t, restrict(s, t))).collect();
        let mut next = Vec::new();
        for fam in &families {
            for e in 0..size {
                if below.iter().all(|&(t, r)| x.act(r, e) == fam[&t]) {
                    let mut f = fam.clone();
                    f.insert(s, e);
                    next.push(f);
                }
            }
        }
        families = next;
    }
    let key = |f: &HashMap<usize, usize>| subsets.iter().map(|s| f[s]).collect::<Vec<_>>();
    let all: BTreeSet<Vec<usize>> = families.iter().map(key).collect();
    let maps: Vec<(usize, usize)> = subsets.iter().map(|&s| (s, restrict(full, s))).collect();
    let images: Vec<Vec<usize>> =
        (0..x.size(a)).map(|e| maps.iter().map(|&(_, r)| x.act(r, e)).collect()).collect();
    let distinct: BTreeSet<&Vec<usize>> = images.iter().collect();
    Ok(LimitReport {
        size: a,
        families: all.len(),
        surjective: all.iter().all(|f| distinct.contains(f)),
        injective: distinct.len() == images.len(),
    })
}

// ---------------------------------------------------------------------------
// Reduced collapse ρ_!

/// ρ_!(X): X(r) with the image of X(t) collapsed to one point, t terminal.
pub fn reduce_pointed(x: &TabulatedPresheaf, basepoint: Option<usize>) -> Result<(TabulatedPresheaf, PresheafMap)> {
    let cat = x.category();
    let n = cat.num_objects();
    let t = (0..n)
        .find(|&t| (0..n).all(|r| cat.hom(r, t).len() == 1))
        .ok_or_else(|| Error::Hypothesis("the category has no terminal object".into()))?;
    let x0 = basepoint.ok_or_else(|| Error::Hypothesis("a basepoint in X(t) is required".into()))?;
    if x0 >= x.size(t) {
        return Err(Error::Hypothesis(format!("basepoint {x0} is not an element of X(t)")));
    }
    let mut pairs = Vec::new();
    for r in 0..n {
        let pi = cat.hom(r, t)[0];
        let base = x.act(pi, x0);
        for z in 0..x.size(t) {
            pairs.push((r, x.act(pi, z), base));
        }
    }
    Ok(x.quotient(&pairs))
}

// ---------------------------------------------------------------------------
// Σ_F(A)

/// Pairs (f: U → A, x ∈ F(U)) for a presheaf F on M, with the morphisms of
/// Σ(A) that carry one decoration to the other.
#[derive(Debug, Clone)]
pub struct SigmaF {
    pub base: SigmaGroupoid,
    pub presheaf: TabulatedPresheaf,
    pub m: SetCategory,
    /// (object of Σ(A), element of F(U)).
    pub objects: Vec<(usize, usize)>,
    pub groupoid: GroupoidPresentation,
    pub projection: GroupoidFunctor,
    index: HashMap<(usize, usize), usize>,
}

pub fn sigma_f(f: &TabulatedPresheaf, m: &SetCategory, a: &FinSet, size_bound: usize) -> Result<SigmaF> {
    if m.kind != SetCategoryKind::Injections {
        return Err(Error::Mismatch("Σ_F needs a presheaf on M".into()));
    }
    if size_bound > m.max_size {
        return Err(Error::BoundExceeded { what: "carrier bound".into(), limit: m.max_size, actual: size_bound });
    }
    let base = sigma_groupoid(a, &FinSet::skeleton(1), size_bound);
    let mut objects = Vec::new();
    let mut index = HashMap::new();
    for o in 0..base.objects.len() {
        for x in 0..f.size(base.objects[o].len()) {
            index.insert((o, x), objects.len());
            objects.push((o, x));
        }
    }
    let mut morphisms = Vec::new();
    let mut projection = Vec::new();
    for (id, bm) in base.groupoid.morphisms.iter().enumerate() {
        let k = bm.perm.len();
        let sigma = m
            .morphism_index(&PartialMap {
                source: FinSet::skeleton(k),
                target: FinSet::skeleton(k),
                map: bm.perm.iter().map(|&j| Some(j)).collect(),
            })
            .expect("bijections are injections");
        for y in 0..f.size(k) {
            let x = f.act(sigma, y);
            morphisms.push(GroupoidMorphism {
                source: index[&(bm.source, x)],
                target: index[&(bm.target, y)],
                perm: bm.perm.clone(),
            });
            projection.push(id);
        }
    }
    let names = objects
        .iter()
        .map(|&(o, x)| format!("{}:{}", base.groupoid.objects[o], f.element_name(base.objects[o].len(), x)))
        .collect();
    let groupoid = GroupoidPresentation::new_unchecked(format!("Sigma_F({})", a.len()), names, morphisms)?;
    let projection = GroupoidFunctor { objects: objects.iter().map(|&(o, _)| o).collect(), morphisms: projection };
    Ok(SigmaF { base, presheaf: f.clone(), m: m.clone(), objects, groupoid, projection, index })
}

impl SigmaF {
    pub fn object_index(&self, o: usize, x: usize) -> Option<usize> {
        self.index.get(&(o, x)).copied()
    }

    /// Every morphism of Σ(A) has exactly one lift with a given decoration
    /// on its target.
    pub fn check_discrete_fibration(&self) -> Result<()> {
        let mut lifts: HashMap<(usize, usize), usize> = HashMap::new();
        for (m, gm) in self.groupoid.morphisms.iter().enumerate() {
            *lifts.entry((self.projection.morphisms[m], gm.target)).or_insert(0) += 1;
        }
        for (bm, b) in self.base.groupoid.morphisms.iter().enumerate() {
            for x in 0..self.presheaf.size(self.base.objects[b.target].len()) {
                let t = self.index[&(b.target, x)];
                let count = lifts.get(&(bm, t)).copied().unwrap_or(0);
                if count != 1 {
                    return Err(Error::Inconsistent(format!(
                        "{count} lifts of morphism {bm} ending at {}",
                        self.groupoid.objects[t]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// φ_*: Σ_F(A) → Σ_F(B), restricting the decoration along f⁻¹(dom φ) ⊆ U.
pub fn gamma_action_f(phi: &PartialMap, source: &SigmaF, target: &SigmaF) -> Result<GroupoidFunctor> {
    let base = gamma_action(phi, &source.base, &target.base)?;
    let restriction: Vec<usize> = source
        .base
        .objects
        .iter()
        .map(|f| {
            let (kept, _) = source.base.push_object(phi, f);
            source
                .m
                .morphism_index(&PartialMap {
                    source: FinSet::skeleton(kept.len()),
                    target: FinSet::skeleton(f.len()),
                    map: kept.iter().map(|&i| Some(i)).collect(),
                })
                .expect("inclusions are injections")
        })
        .collect();
    let objects: Vec<usize> = source
        .objects
        .iter()
        .map(|&(o, x)| {
            let y = source.presheaf.act(restriction[o], x);
            target.object_index(base.objects[o], y).ok_or_else(|| Error::Inconsistent("image object missing".into()))
        })
        .collect::<Result<_>>()?;
    let morphisms = source
        .groupoid
        .morphisms
        .iter()
        .enumerate()
        .map(|(id, m)| {
            let img = &target.base.groupoid.morphisms[base.morphisms[source.projection.morphisms[id]]];
            target
                .groupoid
                .find(objects[m.source], objects[m.target], &img.perm)
                .ok_or_else(|| Error::Inconsistent("image morphism missing".into()))
        })
        .collect::<Result<_>>()?;
    Ok(GroupoidFunctor { objects, morphisms })
}
