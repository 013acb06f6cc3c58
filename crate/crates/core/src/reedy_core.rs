//! Finite generalized Reedy categories: tabulated categories with a degree
//! function and two classes of maps R⁺ and R⁻, presheaves of finite sets on
//! them, latching and matching objects, normal monomorphisms and lifting
//! problems.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset_cat::{all_injections, all_partial_maps, FinSet, PartialMap};
use crate::tree_cat::{enumerate_homs, trees_up_to, OmegaMorphism, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectInfo {
    pub name: String,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismInfo {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub plus: bool,
    pub minus: bool,
}

/// A finite category with composition stored per middle object: for
/// `f: a → b` and `g: b → c` the composite `g ∘ f` sits in `comp[b]` at
/// `(pos_in[f], pos_out[g])`.
#[derive(Clone)]
pub struct FiniteCategory {
    pub name: String,
    objects: Vec<ObjectInfo>,
    morphisms: Vec<MorphismInfo>,
    identity: Vec<usize>,
    hom: Vec<Vec<Vec<usize>>>,
    into: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
    pos_in: Vec<usize>,
    pos_out: Vec<usize>,
    comp: Vec<Vec<u32>>,
    inverse: Vec<Option<usize>>,
}

impl fmt::Debug for FiniteCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteCategory({}: {} objects, {} morphisms)", self.name, self.objects.len(), self.morphisms.len())
    }
}

impl FiniteCategory {
    /// Tabulates a category. `identity[o]` is the identity of object `o`;
    /// `compose(g, f)` returns the id of `g ∘ f` for every composable pair.
    pub fn build(
        name: impl Into<String>,
        objects: Vec<ObjectInfo>,
        morphisms: Vec<MorphismInfo>,
        identity: Vec<usize>,
        mut compose: impl FnMut(usize, usize) -> Option<usize>,
    ) -> Result<FiniteCategory> {
        let n = objects.len();
        if identity.len() != n {
            return Err(Error::Inconsistent("one identity per object is required".into()));
        }
        for m in &morphisms {
            if m.source >= n || m.target >= n {
                return Err(Error::Inconsistent(format!("morphism `{}` has an unknown endpoint", m.label)));
            }
        }
        for (o, &id) in identity.iter().enumerate() {
            let m = morphisms.get(id).ok_or_else(|| Error::Inconsistent("identity out of range".into()))?;
            if m.source != o || m.target != o {
                return Err(Error::Inconsistent(format!("identity of `{}` is not an endomorphism", objects[o].name)));
            }
        }
        let mut hom = vec![vec![Vec::new(); n]; n];
        let mut into = vec![Vec::new(); n];
        let mut out = vec![Vec::new(); n];
        let mut pos_in = vec![0; morphisms.len()];
        let mut pos_out = vec![0; morphisms.len()];
        for (i, m) in morphisms.iter().enumerate() {
            hom[m.source][m.target].push(i);
            pos_in[i] = into[m.target].len();
            into[m.target].push(i);
            pos_out[i] = out[m.source].len();
            out[m.source].push(i);
        }
        let mut comp = Vec::with_capacity(n);
        for b in 0..n {
            let mut table = Vec::with_capacity(into[b].len() * out[b].len());
            for &f in &into[b] {
                for &g in &out[b] {
                    let c = compose(g, f).ok_or_else(|| {
                        Error::Inconsistent(format!(
                            "no composite for `{}` ∘ `{}`",
                            morphisms[g].label, morphisms[f].label
                        ))
                    })?;
                    let cm = morphisms.get(c).ok_or_else(|| Error::Inconsistent("composite out of range".into()))?;
                    if cm.source != morphisms[f].source || cm.target != morphisms[g].target {
                        return Err(Error::Inconsistent(format!(
                            "composite `{}` ∘ `{}` has the wrong endpoints",
                            morphisms[g].label, morphisms[f].label
                        )));
                    }
                    table.push(c as u32);
                }
            }
            comp.push(table);
        }
        let mut cat = FiniteCategory {
            name: name.into(),
            objects,
            morphisms,
            identity,
            hom,
            into,
            out,
            pos_in,
            pos_out,
            comp,
            inverse: Vec::new(),
        };
        for f in 0..cat.morphisms.len() {
            let (s, t) = (cat.source(f), cat.target(f));
            if cat.compose(cat.identity[t], f) != f || cat.compose(f, cat.identity[s]) != f {
                return Err(Error::Inconsistent(format!("identity law fails at `{}`", cat.morphisms[f].label)));
            }
        }
        cat.inverse = (0..cat.morphisms.len())
            .map(|f| {
                let (s, t) = (cat.source(f), cat.target(f));
                cat.hom[t][s]
                    .iter()
                    .copied()
                    .find(|&g| cat.compose(g, f) == cat.identity[s] && cat.compose(f, g) == cat.identity[t])
            })
            .collect();
        Ok(cat)
    }

    pub fn objects(&self) -> &[ObjectInfo] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[MorphismInfo] {
        &self.morphisms
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    pub fn morphism_index(&self, label: &str) -> Option<usize> {
        self.morphisms.iter().position(|m| m.label == label)
    }

    pub fn degree(&self, o: usize) -> usize {
        self.objects[o].degree
    }

    pub fn source(&self, f: usize) -> usize {
        self.morphisms[f].source
    }

    pub fn target(&self, f: usize) -> usize {
        self.morphisms[f].target
    }

    pub fn label(&self, f: usize) -> &str {
        &self.morphisms[f].label
    }

    pub fn identity(&self, o: usize) -> usize {
        self.identity[o]
    }

    pub fn is_identity(&self, f: usize) -> bool {
        self.identity[self.source(f)] == f
    }

    pub fn hom(&self, s: usize, t: usize) -> &[usize] {
        &self.hom[s][t]
    }

    /// Morphisms with target `t`.
    pub fn arrows_into(&self, t: usize) -> &[usize] {
        &self.into[t]
    }

    /// Morphisms with source `s`.
    pub fn arrows_out(&self, s: usize) -> &[usize] {
        &self.out[s]
    }

    /// `g ∘ f`; panics unless `target(f) == source(g)`.
    pub fn compose(&self, g: usize, f: usize) -> usize {
        let b = self.morphisms[f].target;
        assert_eq!(b, self.morphisms[g].source, "composing non-composable morphisms");
        self.comp[b][self.pos_in[f] * self.out[b].len() + self.pos_out[g]] as usize
    }

    pub fn try_compose(&self, g: usize, f: usize) -> Option<usize> {
        (self.target(f) == self.source(g)).then(|| self.compose(g, f))
    }

    pub fn is_plus(&self, f: usize) -> bool {
        self.morphisms[f].plus
    }

    pub fn is_minus(&self, f: usize) -> bool {
        self.morphisms[f].minus
    }

    pub fn is_iso(&self, f: usize) -> bool {
        self.inverse[f].is_some()
    }

    pub fn inverse(&self, f: usize) -> Option<usize> {
        self.inverse[f]
    }

    pub fn is_properly_plus(&self, f: usize) -> bool {
        self.is_plus(f) && !self.is_iso(f)
    }

    pub fn is_properly_minus(&self, f: usize) -> bool {
        self.is_minus(f) && !self.is_iso(f)
    }

    pub fn automorphisms(&self, o: usize) -> Vec<usize> {
        self.hom[o][o].iter().copied().filter(|&f| self.is_iso(f)).collect()
    }

    /// A copy with the class tags of `f` replaced.
    pub fn reclassified(&self, f: usize, plus: bool, minus: bool) -> FiniteCategory {
        let mut c = self.clone();
        c.name = format!("{} (mutated at {})", self.name, self.morphisms[f].label);
        c.morphisms[f].plus = plus;
        c.morphisms[f].minus = minus;
        c
    }

    /// Exhaustive associativity check over composable triples.
    pub fn check_associativity(&self) -> Result<()> {
        for g in 0..self.morphisms.len() {
            let (b, c) = (self.source(g), self.target(g));
            for &f in &self.into[b] {
                let gf = self.compose(g, f);
                for &h in &self.out[c] {
                    if self.compose(h, gf) != self.compose(self.compose(h, g), f) {
                        return Err(Error::Inconsistent(format!(
                            "composition is not associative at ({}, {}, {})",
                            self.label(h),
                            self.label(g),
                            self.label(f)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(json: &CategoryJson) -> Result<FiniteCategory> {
        let objects = json.objects.clone();
        let obj = |name: &str| {
            objects
                .iter()
                .position(|o| o.name == name)
                .ok_or_else(|| Error::Inconsistent(format!("unknown object `{name}`")))
        };
        let mut morphisms = Vec::new();
        let mut identity = Vec::new();
        for o in &objects {
            identity.push(morphisms.len());
            let i = morphisms.len();
            morphisms.push(MorphismInfo { label: format!("id_{}", o.name), source: i, target: i, plus: true, minus: true });
        }
        for (o, &i) in identity.iter().enumerate() {
            morphisms[i].source = o;
            morphisms[i].target = o;
        }
        for m in &json.morphisms {
            if morphisms.iter().any(|x| x.label == m.name) {
                return Err(Error::Inconsistent(format!("duplicate morphism `{}`", m.name)));
            }
            morphisms.push(MorphismInfo {
                label: m.name.clone(),
                source: obj(&m.source)?,
                target: obj(&m.target)?,
                plus: m.plus,
                minus: m.minus,
            });
        }
        let id_of = |label: &str| {
            morphisms
                .iter()
                .position(|m| m.label == label)
                .ok_or_else(|| Error::Inconsistent(format!("unknown morphism `{label}`")))
        };
        let mut table = HashMap::new();
        for [g, f, gf] in &json.composition {
            table.insert((id_of(g)?, id_of(f)?), id_of(gf)?);
        }
        let ids = identity.clone();
        let cat = FiniteCategory::build(json.name.clone(), objects.clone(), morphisms.clone(), identity, |g, f| {
            if ids.contains(&g) {
                Some(f)
            } else if ids.contains(&f) {
                Some(g)
            } else {
                table.get(&(g, f)).copied()
            }
        })?;
        cat.check_associativity()?;
        Ok(cat)
    }

    pub fn to_json(&self) -> CategoryJson {
        let morphisms = (0..self.morphisms.len())
            .filter(|&f| !self.is_identity(f))
            .map(|f| MorphismJson {
                name: self.morphisms[f].label.clone(),
                source: self.objects[self.source(f)].name.clone(),
                target: self.objects[self.target(f)].name.clone(),
                plus: self.is_plus(f),
                minus: self.is_minus(f),
            })
            .collect();
        let mut composition = Vec::new();
        for g in 0..self.morphisms.len() {
            for &f in &self.into[self.source(g)] {
                if !self.is_identity(f) && !self.is_identity(g) {
                    let gf = self.compose(g, f);
                    composition.push([self.label(g).to_string(), self.label(f).to_string(), self.label(gf).to_string()]);
                }
            }
        }
        CategoryJson { name: self.name.clone(), objects: self.objects.clone(), morphisms, composition }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub plus: bool,
    #[serde(default)]
    pub minus: bool,
}

/// Category presentation. Identities are implicit (`id_<object>`, in both
/// classes); `composition` lists `[g, f, g∘f]` for non-identity pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryJson {
    pub name: String,
    pub objects: Vec<ObjectInfo>,
    pub morphisms: Vec<MorphismJson>,
    #[serde(default)]
    pub composition: Vec<[String; 3]>,
}

// ---------------------------------------------------------------------------
// Concrete truncations

/// Ω truncated to trees with bounded vertices and edges. Objects are the
/// canonical trees; morphisms are all valid edge maps between them.
#[derive(Debug, Clone)]
pub struct OmegaCategory {
    pub cat: Arc<FiniteCategory>,
    pub trees: Vec<Arc<Tree>>,
    pub morphisms: Vec<OmegaMorphism>,
    pub max_vertices: usize,
    pub max_edges: usize,
    index: HashMap<(usize, usize, Vec<usize>), usize>,
    by_code: HashMap<String, usize>,
}

impl OmegaCategory {
    pub fn truncated(max_vertices: usize, max_edges: usize) -> OmegaCategory {
        let trees: Vec<Arc<Tree>> = trees_up_to(max_vertices, max_edges).into_iter().map(Arc::new).collect();
        let by_code: HashMap<String, usize> = trees.iter().enumerate().map(|(i, t)| (t.encoding(), i)).collect();
        let objects = trees.iter().map(|t| ObjectInfo { name: t.encoding(), degree: t.degree() }).collect();
        let mut morphisms = Vec::new();
        let mut infos = Vec::new();
        let mut index = HashMap::new();
        let mut identity = vec![0; trees.len()];
        let mut ends = Vec::new();
        for (s, ts) in trees.iter().enumerate() {
            for (t, tt) in trees.iter().enumerate() {
                for f in enumerate_homs(ts, tt, usize::MAX).expect("no bound") {
                    let id = morphisms.len();
                    if s == t && f.map.iter().enumerate().all(|(i, &j)| i == j) {
                        identity[s] = id;
                    }
                    infos.push(MorphismInfo {
                        label: omega_label(&f),
                        source: s,
                        target: t,
                        plus: f.is_positive(),
                        minus: f.is_negative(),
                    });
                    index.insert((s, t, f.map.clone()), id);
                    ends.push((s, t));
                    morphisms.push(f);
                }
            }
        }
        let name = format!("Omega(v<={max_vertices},e<={max_edges})");
        let cat = FiniteCategory::build(name, objects, infos, identity, |g, f| {
            let map: Vec<usize> = morphisms[f].map.iter().map(|&x| morphisms[g].map[x]).collect();
            index.get(&(ends[f].0, ends[g].1, map)).copied()
        })
        .expect("Omega truncations are closed under composition");
        OmegaCategory { cat: Arc::new(cat), trees, morphisms, max_vertices, max_edges, index, by_code }
    }

    /// Index of the canonical representative of `t`, if in the truncation.
    pub fn tree_index(&self, t: &Tree) -> Option<usize> {
        self.by_code.get(&t.encoding()).copied()
    }

    /// Index of a morphism between canonical trees of the truncation.
    pub fn morphism_index(&self, f: &OmegaMorphism) -> Option<usize> {
        let s = self.tree_index(&f.source)?;
        let t = self.tree_index(&f.target)?;
        if *self.trees[s] != *f.source || *self.trees[t] != *f.target {
            return None;
        }
        self.index.get(&(s, t, f.map.clone())).copied()
    }

    /// Transports a morphism between arbitrary trees to the canonical ones.
    pub fn canonical_morphism_index(&self, f: &OmegaMorphism) -> Option<usize> {
        let (_, is) = f.source.canonical_form();
        let (_, it) = f.target.canonical_form();
        let s = self.tree_index(&f.source)?;
        let t = self.tree_index(&f.target)?;
        let mut map = vec![0; f.source.len()];
        for e in 0..f.source.len() {
            map[is.map[e]] = it.map[f.map[e]];
        }
        self.index.get(&(s, t, map)).copied()
    }
}

fn omega_label(f: &OmegaMorphism) -> String {
    let m: Vec<String> = f.map.iter().map(|x| x.to_string()).collect();
    format!("{}->{}[{}]", f.source.encoding(), f.target.encoding(), m.join(","))
}

/// Which of the two categories of finite sets is tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetCategoryKind {
    /// Γ: a morphism A → B is a partial map B ⇸ A.
    Gamma,
    /// M: finite sets and injections.
    Injections,
}

/// Γ or M restricted to the skeletal sets 0̲, ..., n̲.
#[derive(Debug, Clone)]
pub struct SetCategory {
    pub cat: Arc<FiniteCategory>,
    pub kind: SetCategoryKind,
    pub max_size: usize,
    /// For Γ: the partial map target ⇸ source. For M: the injection.
    pub maps: Vec<PartialMap>,
    index: HashMap<(usize, usize, Vec<Option<usize>>), usize>,
}

impl SetCategory {
    pub fn gamma(max_size: usize) -> SetCategory {
        Self::tabulate(SetCategoryKind::Gamma, max_size)
    }

    pub fn injections(max_size: usize) -> SetCategory {
        Self::tabulate(SetCategoryKind::Injections, max_size)
    }

    fn tabulate(kind: SetCategoryKind, n: usize) -> SetCategory {
        let objects = (0..=n).map(|k| ObjectInfo { name: k.to_string(), degree: k }).collect();
        let mut maps = Vec::new();
        let mut infos = Vec::new();
        let mut index = HashMap::new();
        let mut identity = vec![0; n + 1];
        for a in 0..=n {
            for b in 0..=n {
                let (sa, sb) = (FinSet::skeleton(a), FinSet::skeleton(b));
                let list = match kind {
                    SetCategoryKind::Gamma => all_partial_maps(&sb, &sa),
                    SetCategoryKind::Injections => all_injections(&sa, &sb),
                };
                for m in list {
                    let id = maps.len();
                    if a == b && m.map.iter().enumerate().all(|(i, &y)| y == Some(i)) {
                        identity[a] = id;
                    }
                    let (plus, minus) = match kind {
                        SetCategoryKind::Gamma => (m.dual_is_positive(), m.dual_is_negative()),
                        SetCategoryKind::Injections => (true, m.is_bijection()),
                    };
                    infos.push(MorphismInfo { label: set_label(a, b, &m), source: a, target: b, plus, minus });
                    index.insert((a, b, m.map.clone()), id);
                    maps.push(m);
                }
            }
        }
        let name = match kind {
            SetCategoryKind::Gamma => format!("Gamma(n<={n})"),
            SetCategoryKind::Injections => format!("M(n<={n})"),
        };
        let cat = FiniteCategory::build(name, objects, infos, identity, |g, f| {
            let (mf, mg) = (&maps[f], &maps[g]);
            let (a, c) = (infos_src(&maps, f, kind), infos_tgt(&maps, g, kind));
            let composite = match kind {
                SetCategoryKind::Gamma => mf.after_unchecked(mg),
                SetCategoryKind::Injections => mg.after_unchecked(mf),
            };
            index.get(&(a, c, composite.map)).copied()
        })
        .expect("finite set categories are closed under composition");
        SetCategory { cat: Arc::new(cat), kind, max_size: n, maps, index }
    }

    /// The id of the morphism represented by `m` (the Γ-convention stores a
    /// morphism A → B as a partial map B ⇸ A).
    pub fn morphism_index(&self, m: &PartialMap) -> Option<usize> {
        let (a, b) = match self.kind {
            SetCategoryKind::Gamma => (m.target.len(), m.source.len()),
            SetCategoryKind::Injections => (m.source.len(), m.target.len()),
        };
        self.index.get(&(a, b, m.map.clone())).copied()
    }
}

fn infos_src(maps: &[PartialMap], f: usize, kind: SetCategoryKind) -> usize {
    match kind {
        SetCategoryKind::Gamma => maps[f].target.len(),
        SetCategoryKind::Injections => maps[f].source.len(),
    }
}

fn infos_tgt(maps: &[PartialMap], f: usize, kind: SetCategoryKind) -> usize {
    match kind {
        SetCategoryKind::Gamma => maps[f].source.len(),
        SetCategoryKind::Injections => maps[f].target.len(),
    }
}

fn set_label(a: usize, b: usize, m: &PartialMap) -> String {
    let parts: Vec<String> = m
        .map
        .iter()
        .map(|y| match y {
            Some(y) => (y + 1).to_string(),
            None => "_".into(),
        })
        .collect();
    format!("{a}->{b}[{}]", parts.join(","))
}

// ---------------------------------------------------------------------------
// Axiom verification

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Verdict {
    fn new(check: &str) -> Verdict {
        Verdict { check: check.into(), passed: true, cases: 0, witness: None }
    }

    fn fail(&mut self, witness: String) {
        if self.passed {
            self.passed = false;
            self.witness = Some(witness);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReedyReport {
    pub category: String,
    pub objects: usize,
    pub morphisms: usize,
    pub verdicts: Vec<Verdict>,
}

impl ReedyReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }
}

pub const CHECK_CLASSES: &str = "classes";
pub const CHECK_DEGREE: &str = "axiom-1-degree";
pub const CHECK_FACTORIZATION: &str = "axiom-2-factorization";
pub const CHECK_ISOS: &str = "axiom-3-isomorphisms";
pub const CHECK_RIGIDITY: &str = "axiom-4-rigidity";

/// Checks the four axioms of a generalized Reedy category, plus closure of
/// the two classes under composition and identities.
pub fn check_reedy_axioms(cat: &FiniteCategory) -> ReedyReport {
    let n = cat.num_morphisms();
    let lbl = |f: usize| cat.label(f).to_string();

    let mut classes = Verdict::new(CHECK_CLASSES);
    for o in 0..cat.num_objects() {
        classes.cases += 1;
        let id = cat.identity(o);
        if !cat.is_plus(id) || !cat.is_minus(id) {
            classes.fail(format!("identity {} is not in both classes", lbl(id)));
        }
    }
    for g in 0..n {
        for &f in cat.arrows_into(cat.source(g)) {
            classes.cases += 1;
            let gf = cat.compose(g, f);
            if cat.is_plus(g) && cat.is_plus(f) && !cat.is_plus(gf) {
                classes.fail(format!("{} ∘ {} leaves the positive class", lbl(g), lbl(f)));
            }
            if cat.is_minus(g) && cat.is_minus(f) && !cat.is_minus(gf) {
                classes.fail(format!("{} ∘ {} leaves the negative class", lbl(g), lbl(f)));
            }
        }
    }

    let mut degree = Verdict::new(CHECK_DEGREE);
    for f in 0..n {
        degree.cases += 1;
        let (ds, dt) = (cat.degree(cat.source(f)), cat.degree(cat.target(f)));
        if cat.is_plus(f) && ds > dt {
            degree.fail(format!("positive {} lowers the degree {ds} -> {dt}", lbl(f)));
        }
        if cat.is_minus(f) && ds < dt {
            degree.fail(format!("negative {} raises the degree {ds} -> {dt}", lbl(f)));
        }
    }

    let mut factor = Verdict::new(CHECK_FACTORIZATION);
    let mut facts: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for e in (0..n).filter(|&e| cat.is_minus(e)) {
        for &m in cat.arrows_out(cat.target(e)) {
            if cat.is_plus(m) {
                facts[cat.compose(m, e)].push((e, m));
            }
        }
    }
    for f in 0..n {
        factor.cases += 1;
        let Some(&(e0, m0)) = facts[f].first() else {
            factor.fail(format!("{} has no factorization m ∘ e", lbl(f)));
            continue;
        };
        let mid0 = cat.target(e0);
        for &(e, m) in &facts[f][1..] {
            let mid = cat.target(e);
            let linked = cat.hom(mid0, mid).iter().any(|&theta| {
                cat.is_iso(theta) && cat.compose(theta, e0) == e && cat.compose(m, theta) == m0
            });
            if !linked {
                factor.fail(format!(
                    "{} has factorizations ({}, {}) and ({}, {}) not related by an isomorphism",
                    lbl(f),
                    lbl(e0),
                    lbl(m0),
                    lbl(e),
                    lbl(m)
                ));
                break;
            }
        }
    }

    let mut isos = Verdict::new(CHECK_ISOS);
    for f in 0..n {
        isos.cases += 1;
        let both = cat.is_plus(f) && cat.is_minus(f);
        if both != cat.is_iso(f) {
            isos.fail(if both {
                format!("{} lies in both classes but is not an isomorphism", lbl(f))
            } else {
                format!("isomorphism {} is missing from a class", lbl(f))
            });
        }
        let preserving = cat.degree(cat.source(f)) == cat.degree(cat.target(f));
        if preserving && (cat.is_plus(f) || cat.is_minus(f)) && !cat.is_iso(f) {
            isos.fail(format!("{} preserves the degree but is not an isomorphism", lbl(f)));
        }
    }

    let mut rigid = Verdict::new(CHECK_RIGIDITY);
    for o in 0..cat.num_objects() {
        for theta in cat.automorphisms(o) {
            if cat.is_identity(theta) {
                continue;
            }
            for &f in cat.arrows_out(o) {
                rigid.cases += 1;
                if cat.is_plus(f) && cat.compose(f, theta) == f {
                    rigid.fail(format!("positive {} satisfies f θ = f for θ = {}", lbl(f), lbl(theta)));
                }
            }
            for &g in cat.arrows_into(o) {
                rigid.cases += 1;
                if cat.is_minus(g) && cat.compose(theta, g) == g {
                    rigid.fail(format!("negative {} satisfies θ g = g for θ = {}", lbl(g), lbl(theta)));
                }
            }
        }
    }

    ReedyReport {
        category: cat.name.clone(),
        objects: cat.num_objects(),
        morphisms: n,
        verdicts: vec![classes, degree, factor, isos, rigid],
    }
}

/// Reedy factorization inside a tabulated category: the first `(e, m)`
/// with `f = m ∘ e`, e negative and m positive.
pub fn factorize(cat: &FiniteCategory, f: usize) -> Option<(usize, usize)> {
    let a = cat.source(f);
    for &e in cat.arrows_out(a) {
        if !cat.is_minus(e) {
            continue;
        }
        for &m in cat.hom(cat.target(e), cat.target(f)) {
            if cat.is_plus(m) && cat.compose(m, e) == f {
                return Some((e, m));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Presheaves

/// A presheaf of finite sets: `action[f]` maps X(target f) to X(source f).
#[derive(Clone)]
pub struct TabulatedPresheaf {
    cat: Arc<FiniteCategory>,
    sizes: Vec<usize>,
    action: Vec<Vec<usize>>,
    names: Option<Vec<Vec<String>>>,
}

impl fmt::Debug for TabulatedPresheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TabulatedPresheaf({:?} on {})", self.sizes, self.cat.name)
    }
}

impl TabulatedPresheaf {
    pub fn new(cat: Arc<FiniteCategory>, sizes: Vec<usize>, action: Vec<Vec<usize>>) -> Result<TabulatedPresheaf> {
        let x = Self::new_unchecked(cat, sizes, action);
        x.check_functorial()?;
        Ok(x)
    }

    pub fn new_unchecked(cat: Arc<FiniteCategory>, sizes: Vec<usize>, action: Vec<Vec<usize>>) -> TabulatedPresheaf {
        TabulatedPresheaf { cat, sizes, action, names: None }
    }

    pub fn from_fn(
        cat: Arc<FiniteCategory>,
        sizes: Vec<usize>,
        mut act: impl FnMut(usize, usize) -> usize,
    ) -> TabulatedPresheaf {
        let action = (0..cat.num_morphisms())
            .map(|f| (0..sizes[cat.target(f)]).map(|x| act(f, x)).collect())
            .collect();
        TabulatedPresheaf { cat, sizes, action, names: None }
    }

    pub fn with_names(mut self, names: Vec<Vec<String>>) -> TabulatedPresheaf {
        self.names = Some(names);
        self
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.cat
    }

    pub fn size(&self, o: usize) -> usize {
        self.sizes[o]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total_size(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// f*(x) for `x ∈ X(target f)`.
    pub fn act(&self, f: usize, x: usize) -> usize {
        self.action[f][x]
    }

    pub fn action(&self, f: usize) -> &[usize] {
        &self.action[f]
    }

    pub fn element_name(&self, o: usize, x: usize) -> String {
        match &self.names {
            Some(n) => n[o][x].clone(),
            None => format!("x{x}"),
        }
    }

    pub fn check_functorial(&self) -> Result<()> {
        let cat = &self.cat;
        if self.sizes.len() != cat.num_objects() || self.action.len() != cat.num_morphisms() {
            return Err(Error::Inconsistent("presheaf tables do not match the category".into()));
        }
        for f in 0..cat.num_morphisms() {
            let (s, t) = (cat.source(f), cat.target(f));
            if self.action[f].len() != self.sizes[t] || self.action[f].iter().any(|&y| y >= self.sizes[s]) {
                return Err(Error::Inconsistent(format!("action of {} has the wrong shape", cat.label(f))));
            }
        }
        for o in 0..cat.num_objects() {
            let id = cat.identity(o);
            if self.action[id].iter().enumerate().any(|(x, &y)| x != y) {
                return Err(Error::Inconsistent(format!("identity of `{}` acts nontrivially", cat.objects()[o].name)));
            }
        }
        for g in 0..cat.num_morphisms() {
            for &f in cat.arrows_into(cat.source(g)) {
                let gf = cat.compose(g, f);
                for x in 0..self.sizes[cat.target(g)] {
                    if self.action[gf][x] != self.action[f][self.action[g][x]] {
                        return Err(Error::Inconsistent(format!(
                            "(g∘f)* ≠ f* g* for g = {}, f = {}",
                            cat.label(g),
                            cat.label(f)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The representable presheaf R(−, r); elements are morphism ids,
    /// listed in the order of `hom(s, r)`.
    pub fn representable(cat: &Arc<FiniteCategory>, r: usize) -> TabulatedPresheaf {
        let n = cat.num_objects();
        let sizes: Vec<usize> = (0..n).map(|s| cat.hom(s, r).len()).collect();
        let pos: HashMap<usize, usize> =
            (0..n).flat_map(|s| cat.hom(s, r).iter().enumerate().map(|(i, &f)| (f, i))).collect();
        let names = (0..n).map(|s| cat.hom(s, r).iter().map(|&f| cat.label(f).to_string()).collect()).collect();
        Self::from_fn(cat.clone(), sizes, |u, x| {
            let f = cat.hom(cat.target(u), r)[x];
            pos[&cat.compose(f, u)]
        })
        .with_names(names)
    }

    pub fn terminal(cat: &Arc<FiniteCategory>) -> TabulatedPresheaf {
        Self::constant(cat, 1)
    }

    pub fn constant(cat: &Arc<FiniteCategory>, n: usize) -> TabulatedPresheaf {
        Self::from_fn(cat.clone(), vec![n; cat.num_objects()], |_, x| x)
    }

    pub fn empty(cat: &Arc<FiniteCategory>) -> TabulatedPresheaf {
        Self::constant(cat, 0)
    }

    pub fn coproduct(&self, other: &TabulatedPresheaf) -> TabulatedPresheaf {
        let sizes: Vec<usize> = self.sizes.iter().zip(&other.sizes).map(|(a, b)| a + b).collect();
        TabulatedPresheaf::from_fn(self.cat.clone(), sizes, |f, x| {
            let s = self.cat.source(f);
            let t = self.cat.target(f);
            if x < self.sizes[t] {
                self.action[f][x]
            } else {
                self.sizes[s] + other.action[f][x - self.sizes[t]]
            }
        })
    }

    /// The sub-presheaf on a closed selection, with its inclusion.
    pub fn restrict_to(&self, sub: &Subobject) -> Result<(TabulatedPresheaf, PresheafMap)> {
        sub.check_closed(self)?;
        let n = self.cat.num_objects();
        let keep: Vec<Vec<usize>> =
            (0..n).map(|o| (0..self.sizes[o]).filter(|&x| sub.mask[o][x]).collect()).collect();
        let mut back = vec![HashMap::new(); n];
        for o in 0..n {
            for (i, &x) in keep[o].iter().enumerate() {
                back[o].insert(x, i);
            }
        }
        let sizes = keep.iter().map(Vec::len).collect();
        let y = TabulatedPresheaf::from_fn(self.cat.clone(), sizes, |f, i| {
            let x = keep[self.cat.target(f)][i];
            back[self.cat.source(f)][&self.action[f][x]]
        });
        let y = match &self.names {
            Some(names) => {
                let nm = (0..n).map(|o| keep[o].iter().map(|&x| names[o][x].clone()).collect()).collect();
                y.with_names(nm)
            }
            None => y,
        };
        Ok((y, PresheafMap { components: keep }))
    }

    /// The smallest quotient identifying each given pair `(object, a, b)`.
    pub fn quotient(&self, pairs: &[(usize, usize, usize)]) -> (TabulatedPresheaf, PresheafMap) {
        let n = self.cat.num_objects();
        let offset: Vec<usize> = self.sizes.iter().scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        }).collect();
        let mut uf = UnionFind::new(self.total_size());
        let mut work: Vec<(usize, usize, usize)> = pairs.to_vec();
        while let Some((o, a, b)) = work.pop() {
            if uf.union(offset[o] + a, offset[o] + b) {
                for &f in self.cat.arrows_into(o) {
                    let s = self.cat.source(f);
                    work.push((s, self.action[f][a], self.action[f][b]));
                }
            }
        }
        let mut class_of = vec![Vec::new(); n];
        let mut reps = vec![Vec::new(); n];
        for o in 0..n {
            let mut seen = HashMap::new();
            for x in 0..self.sizes[o] {
                let root = uf.find(offset[o] + x);
                let next = seen.len();
                let c = *seen.entry(root).or_insert(next);
                if c == reps[o].len() {
                    reps[o].push(x);
                }
                class_of[o].push(c);
            }
        }
        let sizes = reps.iter().map(Vec::len).collect();
        let q = TabulatedPresheaf::from_fn(self.cat.clone(), sizes, |f, c| {
            let x = reps[self.cat.target(f)][c];
            class_of[self.cat.source(f)][self.action[f][x]]
        });
        (q, PresheafMap { components: class_of })
    }
}

/// A natural transformation, one function per object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PresheafMap {
    pub components: Vec<Vec<usize>>,
}

impl PresheafMap {
    pub fn identity(x: &TabulatedPresheaf) -> PresheafMap {
        PresheafMap { components: x.sizes.iter().map(|&s| (0..s).collect()).collect() }
    }

    pub fn apply(&self, o: usize, x: usize) -> usize {
        self.components[o][x]
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PresheafMap) -> PresheafMap {
        PresheafMap {
            components: first
                .components
                .iter()
                .enumerate()
                .map(|(o, c)| c.iter().map(|&x| self.components[o][x]).collect())
                .collect(),
        }
    }

    pub fn check_natural(&self, x: &TabulatedPresheaf, y: &TabulatedPresheaf) -> Result<()> {
        let cat = x.category();
        for o in 0..cat.num_objects() {
            if self.components[o].len() != x.size(o) || self.components[o].iter().any(|&v| v >= y.size(o)) {
                return Err(Error::Inconsistent(format!("component at `{}` has the wrong shape", cat.objects()[o].name)));
            }
        }
        for f in 0..cat.num_morphisms() {
            let (s, t) = (cat.source(f), cat.target(f));
            for a in 0..x.size(t) {
                if self.components[s][x.act(f, a)] != y.act(f, self.components[t][a]) {
                    return Err(Error::Inconsistent(format!("not natural along {}", cat.label(f))));
                }
            }
        }
        Ok(())
    }

    pub fn is_injective(&self, y: &TabulatedPresheaf) -> bool {
        self.components.iter().enumerate().all(|(o, c)| {
            let mut seen = vec![false; y.size(o)];
            c.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        })
    }

    pub fn is_surjective(&self, y: &TabulatedPresheaf) -> bool {
        self.components.iter().enumerate().all(|(o, c)| {
            let mut seen = vec![false; y.size(o)];
            for &v in c {
                seen[v] = true;
            }
            seen.into_iter().all(|b| b)
        })
    }
}

/// A selection of elements of a presheaf, per object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subobject {
    pub mask: Vec<Vec<bool>>,
}

impl Subobject {
    pub fn empty(x: &TabulatedPresheaf) -> Subobject {
        Subobject { mask: x.sizes.iter().map(|&s| vec![false; s]).collect() }
    }

    pub fn full(x: &TabulatedPresheaf) -> Subobject {
        Subobject { mask: x.sizes.iter().map(|&s| vec![true; s]).collect() }
    }

    /// The smallest closed selection containing the generators.
    pub fn generated(x: &TabulatedPresheaf, generators: &[(usize, usize)]) -> Subobject {
        let mut sub = Subobject::empty(x);
        for &(o, g) in generators {
            for &f in x.category().arrows_into(o) {
                sub.mask[x.category().source(f)][x.act(f, g)] = true;
            }
        }
        sub
    }

    pub fn contains(&self, o: usize, x: usize) -> bool {
        self.mask[o][x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().flatten().filter(|&&b| b).count()
    }

    pub fn count_at(&self, o: usize) -> usize {
        self.mask[o].iter().filter(|&&b| b).count()
    }

    pub fn union(&self, other: &Subobject) -> Subobject {
        Subobject {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x || *y).collect())
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Subobject) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| a.iter().zip(b).all(|(x, y)| !*x || *y))
    }

    pub fn check_closed(&self, x: &TabulatedPresheaf) -> Result<()> {
        let cat = x.category();
        for f in 0..cat.num_morphisms() {
            let (s, t) = (cat.source(f), cat.target(f));
            for a in 0..x.size(t) {
                if self.mask[t][a] && !self.mask[s][x.act(f, a)] {
                    return Err(Error::NotSieve(format!(
                        "element {} restricted along {} leaves the selection",
                        x.element_name(t, a),
                        cat.label(f)
                    )));
                }
            }
        }
        Ok(())
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the classes were distinct.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

// ---------------------------------------------------------------------------
// Natural maps by backtracking

/// Enumerates natural maps `source|mask → target` subject to a per-element
/// filter and a partial prescription. Assigning a value at `r` propagates
/// along every morphism into `r`; branching goes by descending degree.
pub struct NaturalMapSearch<'a> {
    source: &'a TabulatedPresheaf,
    target: &'a TabulatedPresheaf,
    mask: Option<&'a Subobject>,
    allowed: Option<&'a dyn Fn(usize, usize, usize) -> bool>,
    fixed: Vec<(usize, usize, usize)>,
    pub branches: usize,
}

/// Marks elements outside the mask in a found map.
pub const UNASSIGNED: usize = usize::MAX;

impl<'a> NaturalMapSearch<'a> {
    pub fn new(source: &'a TabulatedPresheaf, target: &'a TabulatedPresheaf) -> Self {
        NaturalMapSearch { source, target, mask: None, allowed: None, fixed: Vec::new(), branches: 0 }
    }

    pub fn on(mut self, mask: &'a Subobject) -> Self {
        self.mask = Some(mask);
        self
    }

    /// Only values `x` with `allowed(object, a, x)` are used.
    pub fn filter(mut self, allowed: &'a dyn Fn(usize, usize, usize) -> bool) -> Self {
        self.allowed = Some(allowed);
        self
    }

    pub fn fix(mut self, o: usize, a: usize, x: usize) -> Self {
        self.fixed.push((o, a, x));
        self
    }

    /// Calls `visit` on each natural map until it returns false.
    pub fn run(&mut self, mut visit: impl FnMut(&[Vec<usize>]) -> bool) {
        let cat = self.source.category().clone();
        let n = cat.num_objects();
        let mut assign: Vec<Vec<usize>> = (0..n).map(|o| vec![UNASSIGNED; self.source.size(o)]).collect();
        let mut trail = Vec::new();
        let fixed = self.fixed.clone();
        for (o, a, x) in fixed {
            if !self.set(&cat, &mut assign, &mut trail, o, a, x) {
                return;
            }
        }
        let mut order: Vec<(usize, usize)> = (0..n)
            .flat_map(|o| (0..self.source.size(o)).map(move |a| (o, a)))
            .filter(|&(o, a)| self.mask.is_none_or(|m| m.mask[o][a]))
            .collect();
        order.sort_by_key(|&(o, a)| (std::cmp::Reverse(cat.degree(o)), o, a));
        let mut stop = false;
        self.descend(&cat, &order, 0, &mut assign, &mut trail, &mut visit, &mut stop);
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &mut self,
        cat: &FiniteCategory,
        order: &[(usize, usize)],
        mut idx: usize,
        assign: &mut Vec<Vec<usize>>,
        trail: &mut Vec<(usize, usize)>,
        visit: &mut impl FnMut(&[Vec<usize>]) -> bool,
        stop: &mut bool,
    ) {
        while idx < order.len() && assign[order[idx].0][order[idx].1] != UNASSIGNED {
            idx += 1;
        }
        if idx == order.len() {
            if !visit(assign) {
                *stop = true;
            }
            return;
        }
        let (o, a) = order[idx];
        for x in 0..self.target.size(o) {
            self.branches += 1;
            let mark = trail.len();
            if self.set(cat, assign, trail, o, a, x) {
                self.descend(cat, order, idx + 1, assign, trail, visit, stop);
            }
            while trail.len() > mark {
                let (p, b) = trail.pop().unwrap();
                assign[p][b] = UNASSIGNED;
            }
            if *stop {
                return;
            }
        }
    }

    fn set(
        &self,
        cat: &FiniteCategory,
        assign: &mut [Vec<usize>],
        trail: &mut Vec<(usize, usize)>,
        o: usize,
        a: usize,
        x: usize,
    ) -> bool {
        let mut stack = vec![(o, a, x)];
        while let Some((o, a, x)) = stack.pop() {
            let cur = assign[o][a];
            if cur != UNASSIGNED {
                if cur != x {
                    return false;
                }
                continue;
            }
            if let Some(allowed) = self.allowed {
                if !allowed(o, a, x) {
                    return false;
                }
            }
            assign[o][a] = x;
            trail.push((o, a));
            for &f in cat.arrows_into(o) {
                stack.push((cat.source(f), self.source.act(f, a), self.target.act(f, x)));
            }
        }
        true
    }

    pub fn all(mut self) -> Vec<PresheafMap> {
        let mut out = Vec::new();
        self.run(|m| {
            out.push(PresheafMap { components: m.to_vec() });
            true
        });
        out
    }

    pub fn first(mut self) -> Option<PresheafMap> {
        let mut out = None;
        self.run(|m| {
            out = Some(PresheafMap { components: m.to_vec() });
            false
        });
        out
    }

    pub fn count(mut self) -> usize {
        let mut n = 0;
        self.run(|_| {
            n += 1;
            true
        });
        n
    }
}

// ---------------------------------------------------------------------------
// Latching and matching objects

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatchingObject {
    /// One representative `(g, y)` per class, g: r → s properly negative
    /// and y ∈ X(s).
    pub classes: Vec<(usize, usize)>,
    /// The canonical map deg(X)(r) → X(r).
    pub to_x: Vec<usize>,
}

impl LatchingObject {
    pub fn is_injective(&self) -> bool {
        let mut seen = self.to_x.clone();
        seen.sort();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

/// deg(X)(r) as the colimit over properly negative maps out of r.
pub fn latching_object(x: &TabulatedPresheaf, r: usize) -> Result<LatchingObject> {
    let cat = x.category();
    let gs: Vec<usize> = cat.arrows_out(r).iter().copied().filter(|&g| cat.is_properly_minus(g)).collect();
    let mut offset = HashMap::new();
    let mut total = 0;
    for &g in &gs {
        offset.insert(g, total);
        total += x.size(cat.target(g));
    }
    let mut uf = UnionFind::new(total);
    for &g in &gs {
        let s = cat.target(g);
        for &h in cat.arrows_out(s) {
            let g2 = cat.compose(h, g);
            let Some(&o2) = offset.get(&g2) else { continue };
            for y2 in 0..x.size(cat.target(h)) {
                uf.union(o2 + y2, offset[&g] + x.act(h, y2));
            }
        }
    }
    let mut classes = Vec::new();
    let mut to_x = Vec::new();
    let mut image_of_root: HashMap<usize, usize> = HashMap::new();
    for &g in &gs {
        for y in 0..x.size(cat.target(g)) {
            let root = uf.find(offset[&g] + y);
            let value = x.act(g, y);
            match image_of_root.get(&root) {
                Some(&v) if v != value => {
                    return Err(Error::Inconsistent("latching map is not well defined".into()));
                }
                Some(_) => {}
                None => {
                    image_of_root.insert(root, value);
                    if root == offset[&g] + y {
                        classes.push((g, y));
                        to_x.push(value);
                    }
                }
            }
        }
    }
    Ok(LatchingObject { classes, to_x })
}

/// Elements of X(r) in the image of the latching map.
pub fn degenerate_elements(x: &TabulatedPresheaf, r: usize) -> Vec<bool> {
    let cat = x.category();
    let mut deg = vec![false; x.size(r)];
    for &g in cat.arrows_out(r) {
        if cat.is_properly_minus(g) {
            for y in 0..x.size(cat.target(g)) {
                deg[x.act(g, y)] = true;
            }
        }
    }
    deg
}

/// The sieve ∂R(−, r): morphisms into r factoring through a properly
/// positive morphism.
pub fn boundary_sieve(cat: &FiniteCategory, r: usize) -> Vec<usize> {
    let mut member = vec![false; cat.num_morphisms()];
    for &p in cat.arrows_into(r) {
        if cat.is_properly_plus(p) {
            for &u in cat.arrows_into(cat.source(p)) {
                member[cat.compose(p, u)] = true;
            }
        }
    }
    (0..cat.num_morphisms()).filter(|&f| member[f]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingObject {
    /// The morphisms `f: s → r` indexing each family.
    pub sieve: Vec<usize>,
    /// Compatible families, one value `x_f ∈ X(s)` per sieve member.
    pub families: Vec<Vec<usize>>,
    /// The canonical map X(r) → X(∂_V r).
    pub from_x: Vec<usize>,
}

/// X(∂_V r): compatible families over the sieve V (by default all of
/// ∂R(−, r)).
pub fn matching_object(x: &TabulatedPresheaf, r: usize, v: Option<&[usize]>) -> Result<MatchingObject> {
    let cat = x.category();
    let full = boundary_sieve(cat, r);
    let sieve: Vec<usize> = match v {
        None => full,
        Some(v) => {
            let mut member = vec![false; cat.num_morphisms()];
            for &f in v {
                if cat.target(f) != r {
                    return Err(Error::NotSieve(format!("{} does not end at the object", cat.label(f))));
                }
                if full.binary_search(&f).is_err() {
                    return Err(Error::NotSieve(format!(
                        "{} does not factor through a properly positive map",
                        cat.label(f)
                    )));
                }
                member[f] = true;
            }
            for &f in v {
                for &u in cat.arrows_into(cat.source(f)) {
                    if !member[cat.compose(f, u)] {
                        return Err(Error::NotSieve(format!(
                            "{} ∘ {} is missing",
                            cat.label(f),
                            cat.label(u)
                        )));
                    }
                }
            }
            let mut s: Vec<usize> = v.to_vec();
            s.sort();
            s.dedup();
            s
        }
    };
    let rep = TabulatedPresheaf::representable(cat, r);
    let mut mask = Subobject::empty(&rep);
    let mut slot = HashMap::new();
    for &f in &sieve {
        let s = cat.source(f);
        let i = cat.hom(s, r).iter().position(|&g| g == f).unwrap();
        mask.mask[s][i] = true;
        slot.insert(f, (s, i));
    }
    let families: Vec<Vec<usize>> = NaturalMapSearch::new(&rep, x)
        .on(&mask)
        .all()
        .into_iter()
        .map(|m| sieve.iter().map(|f| m.components[slot[f].0][slot[f].1]).collect())
        .collect();
    let index: HashMap<&Vec<usize>, usize> = families.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let from_x = (0..x.size(r))
        .map(|a| {
            let fam: Vec<usize> = sieve.iter().map(|&f| x.act(f, a)).collect();
            index[&fam]
        })
        .collect();
    Ok(MatchingObject { sieve, families, from_x })
}

// ---------------------------------------------------------------------------
// Sections, absolute pushouts, normal monomorphisms

/// A witness for the absolute pushout of a span `s ← r → t` (legs g, h)
/// completed by `p: s → q`, `k: t → q`. The identities
/// `g g' = 1, k k' = 1, h h' = 1, h g' = k' p, h w = k' k, g w = g h'`
/// are equations, so every functor preserves the pushout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushoutWitness {
    pub g: usize,
    pub h: usize,
    pub p: usize,
    pub k: usize,
    pub g_section: usize,
    pub h_section: usize,
    pub k_section: usize,
    pub w: usize,
}

fn sections(cat: &FiniteCategory, f: usize) -> Vec<usize> {
    let (s, t) = (cat.source(f), cat.target(f));
    cat.hom(t, s).iter().copied().filter(|&g| cat.compose(f, g) == cat.identity(t)).collect()
}

/// Searches for an absolute-pushout witness of the span of negative maps
/// `g: r → s`, `h: r → t`, trying both orientations.
pub fn has_absolute_pushout(cat: &FiniteCategory, g: usize, h: usize) -> Result<Option<PushoutWitness>> {
    if cat.source(g) != cat.source(h) {
        return Err(Error::Mismatch("the legs of a span need a common source".into()));
    }
    if !cat.is_minus(g) || !cat.is_minus(h) {
        return Err(Error::Hypothesis("both legs must be negative".into()));
    }
    Ok(oriented_witness(cat, g, h).or_else(|| oriented_witness(cat, h, g)))
}

fn oriented_witness(cat: &FiniteCategory, g: usize, h: usize) -> Option<PushoutWitness> {
    let (r, s, t) = (cat.source(g), cat.target(g), cat.target(h));
    let sec_g = sections(cat, g);
    let sec_h = sections(cat, h);
    if sec_g.is_empty() || sec_h.is_empty() {
        return None;
    }
    for q in 0..cat.num_objects() {
        for &p in cat.hom(s, q) {
            let pg = cat.compose(p, g);
            for &k in cat.hom(t, q) {
                if cat.compose(k, h) != pg {
                    continue;
                }
                for k_section in sections(cat, k) {
                    let kk = cat.compose(k_section, k);
                    let kp = cat.compose(k_section, p);
                    for &g_section in &sec_g {
                        if cat.compose(h, g_section) != kp {
                            continue;
                        }
                        for &h_section in &sec_h {
                            let gh = cat.compose(g, h_section);
                            for &w in cat.hom(t, r) {
                                if cat.compose(h, w) == kk && cat.compose(g, w) == gh {
                                    return Some(PushoutWitness { g, h, p, k, g_section, h_section, k_section, w });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Verifies a witness equationally.
pub fn verify_pushout_witness(cat: &FiniteCategory, w: &PushoutWitness) -> bool {
    let c = |a: usize, b: usize| cat.try_compose(a, b);
    let id = |f: usize| cat.identity(cat.target(f));
    c(w.p, w.g).is_some()
        && c(w.p, w.g) == c(w.k, w.h)
        && c(w.g, w.g_section) == Some(id(w.g))
        && c(w.h, w.h_section) == Some(id(w.h))
        && c(w.k, w.k_section) == Some(id(w.k))
        && c(w.h, w.g_section) == c(w.k_section, w.p)
        && c(w.h, w.w) == c(w.k_section, w.k)
        && c(w.g, w.w) == c(w.g, w.h_section)
}

/// The hypotheses under which normal monomorphisms are the Reedy
/// cofibrations: negative maps have sections and negative spans have
/// absolute pushouts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CofibrationHypotheses {
    pub sections: Verdict,
    pub pushouts: Verdict,
}

impl CofibrationHypotheses {
    pub fn hold(&self) -> bool {
        self.sections.passed && self.pushouts.passed
    }
}

pub fn check_cofibration_hypotheses(cat: &FiniteCategory) -> CofibrationHypotheses {
    let mut sec = Verdict::new("negative-sections");
    let negatives: Vec<usize> = (0..cat.num_morphisms()).filter(|&f| cat.is_minus(f)).collect();
    for &f in &negatives {
        sec.cases += 1;
        if sections(cat, f).is_empty() {
            sec.fail(format!("negative {} has no section", cat.label(f)));
        }
    }
    let mut po = Verdict::new("negative-absolute-pushouts");
    for r in 0..cat.num_objects() {
        let legs: Vec<usize> = cat.arrows_out(r).iter().copied().filter(|&f| cat.is_minus(f)).collect();
        for (i, &g) in legs.iter().enumerate() {
            for &h in &legs[i..] {
                po.cases += 1;
                if !matches!(has_absolute_pushout(cat, g, h), Ok(Some(_))) {
                    po.fail(format!("no absolute pushout witness for {} and {}", cat.label(g), cat.label(h)));
                }
            }
        }
    }
    CofibrationHypotheses { sections: sec, pushouts: po }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalityVerdict {
    pub injective: bool,
    pub free: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl NormalityVerdict {
    pub fn normal(&self) -> bool {
        self.injective && self.free
    }
}

/// Whether `f: X → Y` is a normal monomorphism: objectwise injective with
/// Aut(r) acting freely on the complement of deg(Y)(r) ∪ X(r) in Y(r).
pub fn is_normal_mono(
    x: &TabulatedPresheaf,
    y: &TabulatedPresheaf,
    f: &PresheafMap,
    hypotheses: &CofibrationHypotheses,
) -> Result<NormalityVerdict> {
    if !hypotheses.hold() {
        return Err(Error::Hypothesis(
            "negative maps need sections and negative spans need absolute pushouts".into(),
        ));
    }
    f.check_natural(x, y)?;
    let cat = y.category();
    if !f.is_injective(y) {
        return Ok(NormalityVerdict { injective: false, free: false, witness: Some("not objectwise injective".into()) });
    }
    for r in 0..cat.num_objects() {
        let mut covered = degenerate_elements(y, r);
        for &v in &f.components[r] {
            covered[v] = true;
        }
        for theta in cat.automorphisms(r) {
            if cat.is_identity(theta) {
                continue;
            }
            for el in 0..y.size(r) {
                if !covered[el] && y.act(theta, el) == el {
                    return Ok(NormalityVerdict {
                        injective: true,
                        free: false,
                        witness: Some(format!(
                            "{} at `{}` is fixed by {}",
                            y.element_name(r, el),
                            cat.objects()[r].name,
                            cat.label(theta)
                        )),
                    });
                }
            }
        }
    }
    Ok(NormalityVerdict { injective: true, free: true, witness: None })
}

// ---------------------------------------------------------------------------
// Lifting problems

/// A commutative square `p ∘ f = g ∘ i` with `i: A → B`, `p: X → Y`.
pub struct LiftingSquare<'a> {
    pub a: &'a TabulatedPresheaf,
    pub b: &'a TabulatedPresheaf,
    pub x: &'a TabulatedPresheaf,
    pub y: &'a TabulatedPresheaf,
    pub i: &'a PresheafMap,
    pub p: &'a PresheafMap,
    pub f: &'a PresheafMap,
    pub g: &'a PresheafMap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lifting {
    Filler(PresheafMap),
    Exhausted { branches: usize },
}

/// Finds a diagonal `d: B → X` with `d ∘ i = f` and `p ∘ d = g`.
pub fn solve_lifting(sq: &LiftingSquare<'_>) -> Result<Lifting> {
    sq.i.check_natural(sq.a, sq.b)?;
    sq.p.check_natural(sq.x, sq.y)?;
    sq.f.check_natural(sq.a, sq.x)?;
    sq.g.check_natural(sq.b, sq.y)?;
    if sq.p.after(sq.f) != sq.g.after(sq.i) {
        return Err(Error::Inconsistent("the square does not commute".into()));
    }
    let allowed = |o: usize, b: usize, x: usize| sq.p.components[o][x] == sq.g.components[o][b];
    let mut search = NaturalMapSearch::new(sq.b, sq.x).filter(&allowed);
    for o in 0..sq.a.category().num_objects() {
        for a in 0..sq.a.size(o) {
            search = search.fix(o, sq.i.components[o][a], sq.f.components[o][a]);
        }
    }
    let mut found = None;
    search.run(|m| {
        found = Some(PresheafMap { components: m.to_vec() });
        false
    });
    Ok(match found {
        Some(d) => Lifting::Filler(d),
        None => Lifting::Exhausted { branches: search.branches },
    })
}
