//! The category Ω of finite rooted trees.
//!
//! Trees carry named edges. A vertex is identified with its output edge; an
//! edge without children is a leaf unless it is flagged as capped, in which
//! case it is the output of a nullary vertex (a stump).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default limit on the number of edges for exhaustive enumeration.
pub const DEFAULT_EDGE_BOUND: usize = 12;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    names: Vec<String>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    capped: Vec<bool>,
    root: usize,
}

/// External JSON form of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub edges: Vec<String>,
    pub root: String,
    #[serde(default)]
    pub parent: BTreeMap<String, String>,
    #[serde(default)]
    pub capped: Vec<String>,
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({})", self.encoding())
    }
}

impl Tree {
    /// Builds a tree from edge names, a root and a parent map. Every edge except
    /// the root must appear in `parent`.
    pub fn new(
        edges: &[&str],
        root: &str,
        parent: &[(&str, &str)],
        capped: &[&str],
    ) -> Result<Tree> {
        let json = TreeJson {
            edges: edges.iter().map(|s| s.to_string()).collect(),
            root: root.to_string(),
            parent: parent
                .iter()
                .map(|(c, p)| (c.to_string(), p.to_string()))
                .collect(),
            capped: capped.iter().map(|s| s.to_string()).collect(),
        };
        Tree::from_json(&json)
    }

    pub fn from_json(json: &TreeJson) -> Result<Tree> {
        if json.edges.is_empty() {
            return Err(Error::InvalidTree("the edge set is empty".into()));
        }
        let mut index = HashMap::new();
        for (i, e) in json.edges.iter().enumerate() {
            if index.insert(e.as_str(), i).is_some() {
                return Err(Error::InvalidTree(format!("duplicate edge `{e}`")));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownEdge(name.to_string()))
        };
        let root = lookup(&json.root)?;
        let n = json.edges.len();
        let mut parent = vec![None; n];
        for (c, p) in &json.parent {
            let (c, p) = (lookup(c)?, lookup(p)?);
            if c == root {
                return Err(Error::InvalidTree("the root has a parent".into()));
            }
            parent[c] = Some(p);
        }
        let mut capped = vec![false; n];
        for c in &json.capped {
            capped[lookup(c)?] = true;
        }
        Tree::from_parts(json.edges.clone(), parent, capped, root)
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            edges: self.names.clone(),
            root: self.names[self.root].clone(),
            parent: (0..self.len())
                .filter_map(|e| self.parent[e].map(|p| (self.names[e].clone(), self.names[p].clone())))
                .collect(),
            capped: (0..self.len())
                .filter(|&e| self.capped[e])
                .map(|e| self.names[e].clone())
                .collect(),
        }
    }

    fn from_parts(
        names: Vec<String>,
        parent: Vec<Option<usize>>,
        capped: Vec<bool>,
        root: usize,
    ) -> Result<Tree> {
        let n = names.len();
        let mut children = vec![Vec::new(); n];
        for e in 0..n {
            match parent[e] {
                Some(p) => children[p].push(e),
                None if e != root => {
                    return Err(Error::InvalidTree(format!(
                        "edge `{}` has no parent and is not the root",
                        names[e]
                    )))
                }
                None => {}
            }
        }
        for e in 0..n {
            // Walk down; a path longer than n edges means a cycle.
            let mut x = e;
            let mut steps = 0;
            while let Some(p) = parent[x] {
                x = p;
                steps += 1;
                if steps > n {
                    return Err(Error::InvalidTree(format!(
                        "edge `{}` does not reach the root",
                        names[e]
                    )));
                }
            }
            if capped[e] && !children[e].is_empty() {
                return Err(Error::InvalidTree(format!(
                    "capped edge `{}` has children",
                    names[e]
                )));
            }
        }
        Ok(Tree { names, parent, children, capped, root })
    }

    /// The tree η with a single edge and no vertices.
    pub fn eta() -> Tree {
        Tree::from_parts(vec!["r".into()], vec![None], vec![false], 0).unwrap()
    }

    /// The corolla C_n with root `r` and leaves `l1..ln`.
    pub fn corolla(n: usize) -> Tree {
        let mut names = vec!["r".to_string()];
        let mut parent = vec![None];
        for i in 1..=n {
            names.push(format!("l{i}"));
            parent.push(Some(0));
        }
        let mut capped = vec![false; n + 1];
        capped[0] = n == 0;
        Tree::from_parts(names, parent, capped, 0).unwrap()
    }

    /// The linear tree [n] with n unary vertices and edges `e0` (root) to `en`.
    pub fn linear(n: usize) -> Tree {
        let names = (0..=n).map(|i| format!("e{i}")).collect();
        let parent = (0..=n).map(|i| if i == 0 { None } else { Some(i - 1) }).collect();
        Tree::from_parts(names, parent, vec![false; n + 1], 0).unwrap()
    }

    /// Parses a canonical code: `|` is a leaf, `(..)` a vertex with the
    /// enclosed children; `()` is a stump. Edges are named `e0, e1, ..` in
    /// pre-order.
    pub fn from_code(code: &str) -> Result<Tree> {
        let bytes = code.as_bytes();
        let mut names = Vec::new();
        let mut parent = Vec::new();
        let mut capped = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut pos = 0;
        let mut has_child: Vec<bool> = Vec::new();
        while pos < bytes.len() {
            let c = bytes[pos];
            match c {
                b'|' | b'(' => {
                    let id = names.len();
                    names.push(format!("e{id}"));
                    parent.push(stack.last().copied());
                    capped.push(false);
                    has_child.push(false);
                    if let Some(&p) = stack.last() {
                        has_child[p] = true;
                    } else if id != 0 {
                        return Err(Error::InvalidTree(format!("code `{code}` has two roots")));
                    }
                    if c == b'(' {
                        stack.push(id);
                    }
                }
                b')' => {
                    let v = stack
                        .pop()
                        .ok_or_else(|| Error::InvalidTree(format!("unbalanced code `{code}`")))?;
                    if !has_child[v] {
                        capped[v] = true;
                    }
                }
                _ => return Err(Error::InvalidTree(format!("bad character in code `{code}`"))),
            }
            pos += 1;
        }
        if !stack.is_empty() || names.is_empty() {
            return Err(Error::InvalidTree(format!("unbalanced code `{code}`")));
        }
        Tree::from_parts(names, parent, capped, 0)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edge(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parent(&self, e: usize) -> Option<usize> {
        self.parent[e]
    }

    pub fn children(&self, e: usize) -> &[usize] {
        &self.children[e]
    }

    pub fn is_capped(&self, e: usize) -> bool {
        self.capped[e]
    }

    pub fn is_leaf(&self, e: usize) -> bool {
        self.children[e].is_empty() && !self.capped[e]
    }

    /// Whether `e` is the output edge of a vertex.
    pub fn is_vertex(&self, e: usize) -> bool {
        !self.is_leaf(e)
    }

    /// Inner edges are outputs of a vertex and inputs of another one.
    pub fn is_inner(&self, e: usize) -> bool {
        self.parent[e].is_some() && self.is_vertex(e)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.is_leaf(e)).collect()
    }

    pub fn vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.is_vertex(e)).collect()
    }

    pub fn inner_edges(&self) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.is_inner(e)).collect()
    }

    /// The degree d(T), the number of vertices.
    pub fn degree(&self) -> usize {
        (0..self.len()).filter(|&e| self.is_vertex(e)).count()
    }

    pub fn max_arity(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether `x` lies on or above `y`, i.e. the path from `x` to the root
    /// passes through `y`.
    pub fn is_above(&self, x: usize, y: usize) -> bool {
        let mut z = x;
        loop {
            if z == y {
                return true;
            }
            match self.parent[z] {
                Some(p) => z = p,
                None => return false,
            }
        }
    }

    /// Edges on or above `e`, in pre-order.
    pub fn above(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![e];
        while let Some(x) = stack.pop() {
            out.push(x);
            for &c in self.children[x].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Edges in breadth-first order from the root.
    pub fn bfs(&self) -> Vec<usize> {
        let mut out = vec![self.root];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    /// Whether Ω(T) has an operation with the given inputs and output: a
    /// subtree rooted at `output` whose leaf set is exactly `inputs`.
    pub fn has_operation(&self, inputs: &[usize], output: usize) -> bool {
        for (i, &a) in inputs.iter().enumerate() {
            if !self.is_above(a, output) {
                return false;
            }
            for &b in &inputs[..i] {
                if a == b {
                    return false;
                }
            }
        }
        if inputs.contains(&output) {
            return inputs.len() == 1;
        }
        for (i, &a) in inputs.iter().enumerate() {
            for &b in &inputs[i + 1..] {
                if self.is_above(a, b) || self.is_above(b, a) {
                    return false;
                }
            }
        }
        let mut stack = vec![output];
        while let Some(x) = stack.pop() {
            if inputs.contains(&x) {
                continue;
            }
            if self.is_leaf(x) {
                return false;
            }
            stack.extend_from_slice(&self.children[x]);
        }
        true
    }

    fn code_at(&self, e: usize) -> String {
        if self.is_leaf(e) {
            return "|".into();
        }
        let mut codes: Vec<String> = self.children[e].iter().map(|&c| self.code_at(c)).collect();
        codes.sort();
        format!("({})", codes.concat())
    }

    /// Isomorphism-invariant encoding of the tree.
    pub fn encoding(&self) -> String {
        self.code_at(self.root)
    }

    /// Canonical representative of the isomorphism class, plus the
    /// isomorphism from `self` onto it.
    pub fn canonical_form(&self) -> (Tree, OmegaMorphism) {
        let canon = Tree::from_code(&self.encoding()).expect("encodings parse");
        // Walk both trees in pre-order with children sorted by code; this
        // matches the numbering used by `from_code`.
        let mut map = vec![0; self.len()];
        let mut next = 0;
        self.assign_preorder(self.root, &mut map, &mut next);
        let iso = OmegaMorphism::new_unchecked(Arc::new(self.clone()), Arc::new(canon.clone()), map);
        (canon, iso)
    }

    fn assign_preorder(&self, e: usize, map: &mut [usize], next: &mut usize) {
        map[e] = *next;
        *next += 1;
        let mut kids: Vec<(String, usize)> =
            self.children[e].iter().map(|&c| (self.code_at(c), c)).collect();
        kids.sort();
        for (_, c) in kids {
            self.assign_preorder(c, map, next);
        }
    }

    pub fn is_isomorphic(&self, other: &Tree) -> bool {
        self.encoding() == other.encoding()
    }

    /// Renames edges; `rename` must be injective.
    pub fn relabel(&self, rename: impl Fn(usize, &str) -> String) -> Tree {
        let names = (0..self.len()).map(|e| rename(e, &self.names[e])).collect();
        Tree::from_parts(names, self.parent.clone(), self.capped.clone(), self.root).unwrap()
    }

    /// Grafts a corolla with `arities[i]` inputs onto the i-th leaf. New
    /// edges are named `<leaf>.1`, `<leaf>.2`, ...; an arity of zero caps the
    /// leaf.
    pub fn graft_corollas(&self, arities: &[(usize, usize)]) -> (Tree, Vec<Vec<usize>>) {
        let mut names = self.names.clone();
        let mut parent = self.parent.clone();
        let mut capped = self.capped.clone();
        let mut new_edges = Vec::new();
        for &(leaf, n) in arities {
            let mut added = Vec::new();
            if n == 0 {
                capped[leaf] = true;
            }
            for j in 1..=n {
                added.push(names.len());
                names.push(format!("{}.{j}", self.names[leaf]));
                parent.push(Some(leaf));
                capped.push(false);
            }
            new_edges.push(added);
        }
        (Tree::from_parts(names, parent, capped, self.root).unwrap(), new_edges)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  rankdir=BT;\n  node [shape=point];\n");
        out.push_str("  base [shape=none,label=\"\"];\n");
        for e in 0..self.len() {
            let top = if self.is_leaf(e) {
                format!("top{e}")
            } else {
                format!("v{e}")
            };
            if self.is_leaf(e) {
                out.push_str(&format!("  {top} [shape=none,label=\"\"];\n"));
            } else {
                out.push_str(&format!("  {top};\n"));
            }
            let bottom = match self.parent[e] {
                Some(p) => format!("v{p}"),
                None => "base".to_string(),
            };
            out.push_str(&format!(
                "  {bottom} -> {top} [arrowhead=none,label=\"{}\"];\n",
                self.names[e].replace('"', "\\\"")
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// A morphism of Ω, stored as its edge map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OmegaMorphism {
    pub source: Arc<Tree>,
    pub target: Arc<Tree>,
    pub map: Vec<usize>,
}

impl fmt::Debug for OmegaMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = (0..self.source.len())
            .map(|e| format!("{}->{}", self.source.name(e), self.target.name(self.map[e])))
            .collect();
        write!(f, "{:?} => {:?} [{}]", self.source, self.target, pairs.join(", "))
    }
}

/// Names the kinds of elementary morphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Elementary {
    Iso,
    InnerFace,
    TopFace,
    RootFace,
    Degeneracy,
}

impl OmegaMorphism {
    pub fn new_unchecked(source: Arc<Tree>, target: Arc<Tree>, map: Vec<usize>) -> Self {
        OmegaMorphism { source, target, map }
    }

    pub fn identity(t: &Arc<Tree>) -> Self {
        OmegaMorphism::new_unchecked(t.clone(), t.clone(), (0..t.len()).collect())
    }

    /// Validates an edge map given by names.
    pub fn from_names(source: &Tree, target: &Tree, map: &BTreeMap<String, String>) -> Result<Self> {
        for k in map.keys() {
            if source.edge(k).is_none() {
                return Err(Error::UnknownEdge(k.clone()));
            }
        }
        let mut m = Vec::with_capacity(source.len());
        for e in 0..source.len() {
            let image = map
                .get(source.name(e))
                .ok_or_else(|| Error::NonTotal(source.name(e).to_string()))?;
            m.push(target.edge(image).ok_or_else(|| Error::UnknownEdge(image.clone()))?);
        }
        validate_morphism(Arc::new(source.clone()), Arc::new(target.clone()), m)
    }

    pub fn names_map(&self) -> BTreeMap<String, String> {
        (0..self.source.len())
            .map(|e| (self.source.name(e).to_string(), self.target.name(self.map[e]).to_string()))
            .collect()
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &OmegaMorphism) -> Result<OmegaMorphism> {
        if *first.target != *self.source {
            return Err(Error::Mismatch("target of the first morphism is not the source of the second".into()));
        }
        Ok(self.after_unchecked(first))
    }

    pub fn after_unchecked(&self, first: &OmegaMorphism) -> OmegaMorphism {
        OmegaMorphism::new_unchecked(
            first.source.clone(),
            self.target.clone(),
            first.map.iter().map(|&e| self.map[e]).collect(),
        )
    }

    pub fn is_injective(&self) -> bool {
        let set: BTreeSet<_> = self.map.iter().collect();
        set.len() == self.map.len()
    }

    pub fn is_surjective(&self) -> bool {
        let set: BTreeSet<_> = self.map.iter().collect();
        set.len() == self.target.len()
    }

    /// Membership in Ω⁺: injective on edges.
    pub fn is_positive(&self) -> bool {
        self.is_injective()
    }

    /// Membership in Ω⁻: surjective on edges and on vertices. A map can be
    /// bijective on edges without being invertible when it deletes a stump,
    /// so stumps of the target must be hit by stumps.
    pub fn is_negative(&self) -> bool {
        self.is_surjective()
            && (0..self.target.len()).filter(|&y| self.target.is_capped(y)).all(|y| {
                (0..self.source.len()).any(|x| self.map[x] == y && self.source.is_capped(x))
            })
    }

    pub fn is_iso(&self) -> bool {
        self.source.len() == self.target.len()
            && self.is_injective()
            && self.source.degree() == self.target.degree()
    }

    pub fn inverse(&self) -> Option<OmegaMorphism> {
        if !self.is_iso() {
            return None;
        }
        let mut inv = vec![0; self.map.len()];
        for (e, &f) in self.map.iter().enumerate() {
            inv[f] = e;
        }
        Some(OmegaMorphism::new_unchecked(self.target.clone(), self.source.clone(), inv))
    }

    /// Classifies an elementary morphism; `None` for composites.
    pub fn classify(&self) -> Option<Elementary> {
        let (s, t) = (&self.source, &self.target);
        if self.is_iso() {
            return Some(Elementary::Iso);
        }
        if self.is_injective() && s.degree() + 1 == t.degree() {
            if self.map[s.root()] != t.root() {
                return Some(Elementary::RootFace);
            }
            let image: BTreeSet<usize> = self.map.iter().copied().collect();
            let missing: Vec<usize> = (0..t.len()).filter(|e| !image.contains(e)).collect();
            if missing.len() == 1 && t.is_inner(missing[0]) {
                return Some(Elementary::InnerFace);
            }
            return Some(Elementary::TopFace);
        }
        if self.is_surjective() && s.len() == t.len() + 1 && s.degree() == t.degree() + 1 {
            return Some(Elementary::Degeneracy);
        }
        None
    }
}

/// Checks the operad-map condition at every source vertex.
pub fn validate_morphism(source: Arc<Tree>, target: Arc<Tree>, map: Vec<usize>) -> Result<OmegaMorphism> {
    if map.len() != source.len() {
        return Err(Error::NonTotal(
            source.name(map.len().min(source.len().saturating_sub(1))).to_string(),
        ));
    }
    if let Some(&bad) = map.iter().find(|&&e| e >= target.len()) {
        return Err(Error::UnknownEdge(format!("#{bad}")));
    }
    for v in source.bfs() {
        if !source.is_vertex(v) {
            continue;
        }
        let inputs: Vec<usize> = source.children(v).iter().map(|&a| map[a]).collect();
        if !target.has_operation(&inputs, map[v]) {
            let distinct: BTreeSet<_> = inputs.iter().collect();
            let reason = if distinct.len() < inputs.len() {
                "input images are not distinct".to_string()
            } else {
                format!(
                    "no subtree of the target rooted at `{}` has leaves {{{}}}",
                    target.name(map[v]),
                    inputs.iter().map(|&i| target.name(i)).collect::<Vec<_>>().join(", ")
                )
            };
            return Err(Error::InvalidMorphism { vertex: source.name(v).to_string(), reason });
        }
    }
    Ok(OmegaMorphism::new_unchecked(source, target, map))
}

/// All morphisms S → T, ordered lexicographically by edge images.
pub fn enumerate_homs(s: &Arc<Tree>, t: &Arc<Tree>, edge_bound: usize) -> Result<Vec<OmegaMorphism>> {
    for tree in [s, t] {
        if tree.len() > edge_bound {
            return Err(Error::BoundExceeded {
                what: "tree edges".into(),
                limit: edge_bound,
                actual: tree.len(),
            });
        }
    }
    Ok(enumerate_homs_unbounded(s, t))
}

pub(crate) fn enumerate_homs_unbounded(s: &Arc<Tree>, t: &Arc<Tree>) -> Vec<OmegaMorphism> {
    let order = s.bfs();
    // `check_at[i]` lists vertices whose inputs are all assigned once
    // `order[i]` is.
    let mut check_at = vec![Vec::new(); order.len()];
    let pos: Vec<usize> = {
        let mut p = vec![0; s.len()];
        for (i, &e) in order.iter().enumerate() {
            p[e] = i;
        }
        p
    };
    for v in 0..s.len() {
        if s.is_vertex(v) {
            let last = s.children(v).iter().map(|&c| pos[c]).max().unwrap_or(pos[v]);
            check_at[last].push(v);
        }
    }
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; s.len()];
    let mut scratch = Vec::new();
    homs_rec(s, t, &order, &check_at, 0, &mut map, &mut scratch, &mut out);
    out.sort_by(|a, b| a.map.cmp(&b.map));
    out
}

#[allow(clippy::too_many_arguments)]
fn homs_rec(
    s: &Arc<Tree>,
    t: &Arc<Tree>,
    order: &[usize],
    check_at: &[Vec<usize>],
    i: usize,
    map: &mut Vec<usize>,
    scratch: &mut Vec<usize>,
    out: &mut Vec<OmegaMorphism>,
) {
    if i == order.len() {
        out.push(OmegaMorphism::new_unchecked(s.clone(), t.clone(), map.clone()));
        return;
    }
    let e = order[i];
    let candidates: Vec<usize> = match s.parent(e) {
        None => (0..t.len()).collect(),
        Some(p) => t.above(map[p]),
    };
    for y in candidates {
        if let Some(p) = s.parent(e) {
            // Necessary conditions at the parent vertex, checked early.
            let siblings = s.children(p);
            if y == map[p] && siblings.len() > 1 {
                continue;
            }
            let clash = siblings.iter().any(|&b| {
                b != e && map[b] != usize::MAX && (t.is_above(y, map[b]) || t.is_above(map[b], y))
            });
            if clash {
                continue;
            }
        }
        map[e] = y;
        let ok = check_at[i].iter().all(|&v| {
            scratch.clear();
            scratch.extend(s.children(v).iter().map(|&a| map[a]));
            t.has_operation(scratch, map[v])
        });
        if ok {
            homs_rec(s, t, order, check_at, i + 1, map, scratch, out);
        }
    }
    map[e] = usize::MAX;
}

pub fn automorphisms(t: &Arc<Tree>) -> Vec<OmegaMorphism> {
    enumerate_homs_unbounded(t, t)
        .into_iter()
        .filter(|f| f.is_iso())
        .collect()
}

/// Factors `f = positive ∘ negative` with the negative part surjective on
/// edges and the positive part an inclusion of a face. The middle tree uses
/// the target's edge names, so an isomorphism factors as `(f, id)`.
pub fn reedy_factorize(f: &OmegaMorphism) -> (OmegaMorphism, OmegaMorphism) {
    let (s, t) = (&f.source, &f.target);
    let mut image: Vec<usize> = f.map.clone();
    image.sort();
    image.dedup();
    let local = |x: usize| image.binary_search(&x).unwrap();
    let mut parent = vec![None; image.len()];
    let mut capped = vec![false; image.len()];
    for v in s.vertices() {
        let kids = s.children(v);
        if kids.len() == 1 && f.map[kids[0]] == f.map[v] {
            continue;
        }
        if kids.is_empty() {
            capped[local(f.map[v])] = true;
        }
        for &a in kids {
            parent[local(f.map[a])] = Some(local(f.map[v]));
        }
    }
    let names = image.iter().map(|&x| t.name(x).to_string()).collect();
    let mid = Arc::new(
        Tree::from_parts(names, parent, capped, local(f.map[s.root()]))
            .expect("image of a morphism is a tree"),
    );
    let negative = OmegaMorphism::new_unchecked(s.clone(), mid.clone(), f.map.iter().map(|&x| local(x)).collect());
    let positive = OmegaMorphism::new_unchecked(mid, t.clone(), image.clone());
    (negative, positive)
}

/// Elementary faces of `t`, as morphisms into `t`.
pub fn faces(t: &Arc<Tree>) -> Vec<(Elementary, OmegaMorphism)> {
    let mut out = Vec::new();
    let build = |keep: &[usize], parent_of: &dyn Fn(usize) -> Option<usize>, capped_of: &dyn Fn(usize) -> bool, root: usize| {
        let local = |x: usize| keep.iter().position(|&k| k == x).unwrap();
        let names = keep.iter().map(|&x| t.name(x).to_string()).collect();
        let parent = keep.iter().map(|&x| parent_of(x).map(local)).collect();
        let capped = keep.iter().map(|&x| capped_of(x)).collect();
        let tree = Tree::from_parts(names, parent, capped, local(root)).expect("faces are trees");
        OmegaMorphism::new_unchecked(Arc::new(tree), t.clone(), keep.to_vec())
    };
    for e in t.inner_edges() {
        let keep: Vec<usize> = (0..t.len()).filter(|&x| x != e).collect();
        let pe = t.parent(e);
        let f = build(
            &keep,
            &|x| match t.parent(x) {
                Some(p) if p == e => pe,
                other => other,
            },
            &|x| t.is_capped(x) || (Some(x) == pe && t.children(x) == [e] && t.is_capped(e)),
            t.root(),
        );
        out.push((Elementary::InnerFace, f));
    }
    for v in t.vertices() {
        if !t.children(v).iter().all(|&c| t.is_leaf(c)) {
            continue;
        }
        let keep: Vec<usize> = (0..t.len()).filter(|x| !t.children(v).contains(x)).collect();
        let f = build(&keep, &|x| t.parent(x), &|x| x != v && t.is_capped(x), t.root());
        out.push((Elementary::TopFace, f));
    }
    let r = t.root();
    if t.is_vertex(r) {
        for &e in t.children(r) {
            if t.children(r).iter().all(|&c| c == e || t.is_leaf(c)) {
                let keep: Vec<usize> = (0..t.len()).filter(|&x| x != r && t.is_above(x, e)).collect();
                let f = build(&keep, &|x| if x == e { None } else { t.parent(x) }, &|x| t.is_capped(x), e);
                out.push((Elementary::RootFace, f));
            }
        }
    }
    out
}

/// Elementary degeneracies out of `s`, one per unary vertex.
pub fn degeneracies(s: &Arc<Tree>) -> Vec<OmegaMorphism> {
    s.vertices()
        .into_iter()
        .filter(|&v| s.children(v).len() == 1)
        .map(|v| degeneracy_at(s, v))
        .collect()
}

/// The degeneracy σ_v collapsing the unary vertex `v` of `s`; the merged
/// edge keeps the name of `v`.
pub fn degeneracy_at(s: &Arc<Tree>, v: usize) -> OmegaMorphism {
    assert_eq!(s.children(v).len(), 1, "degeneracies need a unary vertex");
    let c = s.children(v)[0];
    let keep: Vec<usize> = (0..s.len()).filter(|&x| x != c).collect();
    let local = |x: usize| keep.iter().position(|&k| k == x).unwrap();
    let names = keep.iter().map(|&x| s.name(x).to_string()).collect();
    let parent = keep
        .iter()
        .map(|&x| match s.parent(x) {
            Some(p) if p == c => Some(local(v)),
            Some(p) => Some(local(p)),
            None => None,
        })
        .collect();
    let capped = keep.iter().map(|&x| if x == v { s.is_capped(c) } else { s.is_capped(x) }).collect();
    let tree = Arc::new(Tree::from_parts(names, parent, capped, local(s.root())).unwrap());
    let map = (0..s.len()).map(|x| if x == c { local(v) } else { local(x) }).collect();
    OmegaMorphism::new_unchecked(s.clone(), tree, map)
}

/// Writes `f` as a composite of elementary morphisms. The list is in
/// application order: the first entry is applied first.
pub fn decompose(f: &OmegaMorphism) -> Vec<(Elementary, OmegaMorphism)> {
    let (neg, pos) = reedy_factorize(f);
    let mut steps = Vec::new();
    // Negative part: peel off degeneracies at collapsed unary vertices.
    let mut rest = neg;
    loop {
        let collapsed = (0..rest.source.len()).find(|&x| {
            rest.source.parent(x).is_some_and(|p| {
                rest.source.children(p).len() == 1 && rest.map[x] == rest.map[p]
            })
        });
        let next = collapsed.map(|x| degeneracy_at(&rest.source, rest.source.parent(x).unwrap()));
        let Some(d) = next else { break };
        // rest = rest' ∘ d where rest' sends the merged edge to the common image.
        let mut map = vec![0; d.target.len()];
        for x in 0..d.source.len() {
            map[d.map[x]] = rest.map[x];
        }
        steps.push((Elementary::Degeneracy, d.clone()));
        rest = OmegaMorphism::new_unchecked(d.target.clone(), rest.target.clone(), map);
    }
    // `rest` is now bijective onto the middle tree, hence an isomorphism.
    let mut positive_steps = Vec::new();
    let mut m = pos;
    while !m.is_iso() {
        let step = faces(&m.target).into_iter().find_map(|(kind, face)| {
            let back: Option<Vec<usize>> = m
                .map
                .iter()
                .map(|&y| face.map.iter().position(|&z| z == y))
                .collect();
            let back = back?;
            let lifted = validate_morphism(m.source.clone(), face.source.clone(), back).ok()?;
            Some((kind, face, lifted))
        });
        let (kind, face, lifted) = step.expect("every non-invertible injective morphism factors through a face");
        positive_steps.push((kind, face));
        m = lifted;
    }
    let iso = m.after_unchecked(&rest);
    if iso.map != (0..iso.source.len()).collect::<Vec<_>>() || *iso.source != *iso.target {
        steps.push((Elementary::Iso, iso));
    }
    positive_steps.reverse();
    steps.extend(positive_steps);
    steps
}

/// Composes a list of morphisms given in application order.
pub fn compose_all(steps: &[OmegaMorphism]) -> Option<OmegaMorphism> {
    let mut it = steps.iter();
    let mut acc = it.next()?.clone();
    for g in it {
        acc = g.after(&acc).ok()?;
    }
    Some(acc)
}

/// Canonical codes of all trees with at most `max_vertices` vertices and
/// `max_edges` edges, sorted by (edges, code).
pub fn trees_up_to(max_vertices: usize, max_edges: usize) -> Vec<Tree> {
    // planted[e] lists (code, vertices) with exactly e edges.
    let mut planted: Vec<Vec<(String, usize)>> = vec![Vec::new(); max_edges + 1];
    if max_edges == 0 {
        return Vec::new();
    }
    planted[1].push(("|".into(), 0));
    if max_vertices >= 1 {
        planted[1].push(("()".into(), 1));
    }
    for e in 2..=max_edges {
        // A vertex at the root with children totalling e - 1 edges.
        let pool: Vec<(String, usize, usize)> = (1..e)
            .flat_map(|k| planted[k].iter().map(move |(c, v)| (c.clone(), *v, k)))
            .collect();
        let mut found = Vec::new();
        let mut chosen = Vec::new();
        multisets(&pool, 0, e - 1, max_vertices.saturating_sub(1), &mut chosen, &mut found);
        if max_vertices >= 1 {
            for (codes, v) in found {
                planted[e].push((format!("({})", codes), v + 1));
            }
        }
        planted[e].sort();
        planted[e].dedup();
    }
    let mut out = Vec::new();
    for list in planted.iter().skip(1) {
        for (code, v) in list {
            if *v <= max_vertices {
                out.push(Tree::from_code(code).unwrap());
            }
        }
    }
    out
}

fn multisets(
    pool: &[(String, usize, usize)],
    start: usize,
    edges_left: usize,
    vertices_left: usize,
    chosen: &mut Vec<usize>,
    found: &mut Vec<(String, usize)>,
) {
    if edges_left == 0 {
        let mut codes: Vec<&str> = chosen.iter().map(|&i| pool[i].0.as_str()).collect();
        codes.sort();
        let v = chosen.iter().map(|&i| pool[i].1).sum();
        found.push((codes.concat(), v));
        return;
    }
    for i in start..pool.len() {
        let (_, v, e) = &pool[i];
        if *e <= edges_left && *v <= vertices_left {
            chosen.push(i);
            multisets(pool, i, edges_left - e, vertices_left - v, chosen, found);
            chosen.pop();
        }
    }
}

/// The tree of the standard picture of elementary morphisms: a root vertex
/// `r` with a leaf `a` and an inner edge `e` to a ternary vertex carrying a
/// leaf `b`, an edge `f` into a unary vertex `v` with leaf `c`, and a stump
/// `s`.
pub fn figure_tree() -> Tree {
    Tree::new(
        &["root", "a", "e", "b", "f", "c", "s"],
        "root",
        &[("a", "root"), ("e", "root"), ("b", "e"), ("f", "e"), ("c", "f"), ("s", "e")],
        &["s"],
    )
    .unwrap()
}
