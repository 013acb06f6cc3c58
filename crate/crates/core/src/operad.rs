//! Coloured operads in sets, their dendroidal nerves, algebras and free
//! algebras, the dendroidal set G(A) over NP, and the strict covariant
//! fibration check.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::presheaf::{check_strict_segal, edge_inclusion};
use crate::reedy_core::{OmegaCategory, PresheafMap, TabulatedPresheaf};
use crate::tree_cat::{OmegaMorphism, Tree};

/// The interface the nerve construction needs from an operad. The i-th input
/// of `permute(p, τ)` is the τ(i)-th input of `p`.
pub trait Operad {
    type Op: Clone + Eq + Hash + Ord + fmt::Debug;

    fn num_colours(&self) -> usize;
    fn colour_name(&self, c: usize) -> String;
    fn op_name(&self, p: &Self::Op) -> String;
    fn output(&self, p: &Self::Op) -> usize;
    fn inputs(&self, p: &Self::Op) -> Vec<usize>;
    fn unit(&self, c: usize) -> Self::Op;
    /// Every operation with the given output colour and arity.
    fn operations(&self, output: usize, arity: usize) -> Vec<Self::Op>;
    /// γ(p; q_1, ..., q_n), whose inputs are those of q_1, then q_2, ...
    fn compose(&self, p: &Self::Op, qs: &[Self::Op]) -> Result<Self::Op>;
    fn permute(&self, p: &Self::Op, tau: &[usize]) -> Self::Op;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub inputs: Vec<usize>,
    pub output: usize,
}

/// A coloured operad with tabulated operations up to `max_arity`.
#[derive(Clone)]
pub struct ColoredOperad {
    pub name: String,
    colours: Vec<String>,
    ops: Vec<Operation>,
    units: Vec<usize>,
    max_arity: usize,
    /// (p, i, q) ↦ p ∘_i q.
    circ: HashMap<(usize, usize, usize), usize>,
    /// action[p][rank of τ] = p·τ.
    action: Vec<Vec<usize>>,
    by_signature: HashMap<(usize, usize), Vec<usize>>,
    by_name: HashMap<String, usize>,
}

impl fmt::Debug for ColoredOperad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ColoredOperad({}, {} colours, {} operations)", self.name, self.colours.len(), self.ops.len())
    }
}

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    (0..n).permutations(n).collect()
}

/// Position of `tau` in `permutations(tau.len())`.
pub fn permutation_rank(tau: &[usize]) -> usize {
    let n = tau.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = tau[i + 1..].iter().filter(|&&t| t < tau[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

fn compose_perm(tau: &[usize], rho: &[usize]) -> Vec<usize> {
    rho.iter().map(|&i| tau[i]).collect()
}

impl ColoredOperad {
    /// Tabulates an operad from its operations, units, partial compositions
    /// `circ(p, i, q) = p ∘_i q` and action `act(p, τ) = p·τ`. Every partial
    /// composite of arity at most `max_arity` must be defined.
    pub fn build(
        name: impl Into<String>,
        colours: Vec<String>,
        ops: Vec<Operation>,
        units: Vec<usize>,
        max_arity: usize,
        mut circ: impl FnMut(usize, usize, usize) -> Option<usize>,
        mut act: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<ColoredOperad> {
        let name = name.into();
        if units.len() != colours.len() {
            return Err(Error::Mismatch(format!("{} colours but {} units", colours.len(), units.len())));
        }
        for op in &ops {
            if op.inputs.len() > max_arity {
                return Err(Error::BoundExceeded {
                    what: format!("arity of {}", op.name),
                    limit: max_arity,
                    actual: op.inputs.len(),
                });
            }
            if op.output >= colours.len() || op.inputs.iter().any(|&c| c >= colours.len()) {
                return Err(Error::InvalidMap(format!("operation {} uses an unknown colour", op.name)));
            }
        }
        let mut by_signature: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut by_name = HashMap::new();
        for (p, op) in ops.iter().enumerate() {
            by_signature.entry((op.output, op.inputs.len())).or_default().push(p);
            if by_name.insert(op.name.clone(), p).is_some() {
                return Err(Error::Mismatch(format!("duplicate operation {}", op.name)));
            }
        }
        let mut table = HashMap::new();
        for p in 0..ops.len() {
            for i in 0..ops[p].inputs.len() {
                let candidates = ops.iter().enumerate().filter(|(_, q)| q.output == ops[p].inputs[i]);
                for (q, qop) in candidates {
                    if ops[p].inputs.len() + qop.inputs.len() - 1 > max_arity {
                        continue;
                    }
                    let r = circ(p, i, q).ok_or_else(|| {
                        Error::Inconsistent(format!("{} ∘_{} {} is missing", ops[p].name, i + 1, qop.name))
                    })?;
                    let mut expected = ops[p].inputs.clone();
                    expected.splice(i..=i, qop.inputs.iter().copied());
                    if ops[r].inputs != expected || ops[r].output != ops[p].output {
                        return Err(Error::Inconsistent(format!(
                            "{} ∘_{} {} = {} has the wrong signature",
                            ops[p].name,
                            i + 1,
                            qop.name,
                            ops[r].name
                        )));
                    }
                    table.insert((p, i, q), r);
                }
            }
        }
        let mut action = Vec::with_capacity(ops.len());
        for p in 0..ops.len() {
            let n = ops[p].inputs.len();
            let row: Vec<usize> = permutations(n).iter().map(|tau| act(p, tau)).collect();
            for (tau, &r) in permutations(n).iter().zip(&row) {
                let expected: Vec<usize> = tau.iter().map(|&j| ops[p].inputs[j]).collect();
                if ops[r].inputs != expected || ops[r].output != ops[p].output {
                    return Err(Error::Inconsistent(format!(
                        "{}·{tau:?} = {} has the wrong signature",
                        ops[p].name, ops[r].name
                    )));
                }
            }
            action.push(row);
        }
        Ok(ColoredOperad { name, colours, ops, units, max_arity, circ: table, action, by_signature, by_name })
    }

    pub fn colours(&self) -> &[String] {
        &self.colours
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, p: usize) -> &Operation {
        &self.ops[p]
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn arity(&self, p: usize) -> usize {
        self.ops[p].inputs.len()
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn circ(&self, p: usize, i: usize, q: usize) -> Option<usize> {
        self.circ.get(&(p, i, q)).copied()
    }

    pub fn act(&self, p: usize, tau: &[usize]) -> usize {
        self.action[p][permutation_rank(tau)]
    }

    pub fn signature(&self, output: usize, arity: usize) -> &[usize] {
        self.by_signature.get(&(output, arity)).map_or(&[], Vec::as_slice)
    }

    /// Checks the unit, associativity and equivariance laws on every
    /// composite inside the arity bound.
    pub fn check_axioms(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Inconsistent(what));
        for (p, op) in self.ops.iter().enumerate() {
            if self.circ(self.units[op.output], 0, p) != Some(p) {
                return bad(format!("left unit fails at {}", op.name));
            }
            for (i, &c) in op.inputs.iter().enumerate() {
                if self.circ(p, i, self.units[c]) != Some(p) {
                    return bad(format!("right unit fails at {} slot {}", op.name, i + 1));
                }
            }
        }
        for (&(p, i, q), &pq) in &self.circ {
            let m = self.arity(q);
            let n = self.arity(p);
            for (r, rop) in self.ops.iter().enumerate() {
                if n + m + rop.inputs.len() > self.max_arity + 2 {
                    continue;
                }
                // Sequential: (p ∘_i q) ∘_j r = p ∘_i (q ∘_{j-i} r).
                for j in i..i + m {
                    if self.ops[pq].inputs[j] != rop.output {
                        continue;
                    }
                    let lhs = self.circ(pq, j, r);
                    let rhs = self.circ(q, j - i, r).and_then(|qr| self.circ(p, i, qr));
                    if lhs != rhs {
                        return bad(format!("associativity fails at {} ∘ {} ∘ {}", self.ops[p].name, self.ops[q].name, rop.name));
                    }
                }
                // Parallel: (p ∘_i q) ∘_{j+m-1} r = (p ∘_j r) ∘_i q for i < j.
                for j in i + 1..n {
                    if self.ops[p].inputs[j] != rop.output {
                        continue;
                    }
                    let lhs = self.circ(pq, j + m - 1, r);
                    let rhs = self.circ(p, j, r).and_then(|pr| self.circ(pr, i, q));
                    if lhs != rhs {
                        return bad(format!("parallel composition fails at {} with {} and {}", self.ops[p].name, self.ops[q].name, rop.name));
                    }
                }
            }
        }
        for (p, op) in self.ops.iter().enumerate() {
            let n = op.inputs.len();
            let perms = permutations(n);
            if self.action[p][0] != p {
                return bad(format!("the identity permutation moves {}", op.name));
            }
            for tau in &perms {
                for rho in &perms {
                    if self.act(self.act(p, tau), rho) != self.act(p, &compose_perm(tau, rho)) {
                        return bad(format!("the action on {} is not a right action", op.name));
                    }
                }
            }
        }
        // Equivariance of ∘_i in both variables.
        for (&(p, i, q), &pq) in &self.circ {
            let n = self.arity(p);
            let m = self.arity(q);
            for tau in permutations(n) {
                let ptau = self.act(p, &tau);
                // Slots of (p·τ) ∘_i q listed by their position in p ∘_{τ(i)} q.
                let mut slots = Vec::new();
                for j in 0..n {
                    if j == i {
                        slots.extend((0..m).map(|t| tau[i] + t));
                    } else if tau[j] < tau[i] {
                        slots.push(tau[j]);
                    } else {
                        slots.push(tau[j] + m - 1);
                    }
                }
                let lhs = self.circ(ptau, i, q);
                let rhs = self.circ(p, tau[i], q).map(|r| self.act(r, &slots));
                if lhs != rhs {
                    return bad(format!("equivariance fails at {}·{tau:?} ∘_{} {}", self.ops[p].name, i + 1, self.ops[q].name));
                }
            }
            for rho in permutations(m) {
                let slots: Vec<usize> =
                    (0..i).chain(rho.iter().map(|&t| i + t)).chain(i + m..n + m - 1).collect();
                let lhs = self.circ(p, i, self.act(q, &rho));
                if lhs != Some(self.act(pq, &slots)) {
                    return bad(format!("equivariance fails at {} ∘_{} {}·{rho:?}", self.ops[p].name, i + 1, self.ops[q].name));
                }
            }
        }
        Ok(())
    }

    /// Whether every Σ_n acts freely: p·τ = p only for τ = id.
    pub fn sigma_free_witness(&self) -> Option<(usize, Vec<usize>)> {
        for p in 0..self.ops.len() {
            for (k, tau) in permutations(self.arity(p)).into_iter().enumerate().skip(1) {
                if self.action[p][k] == p {
                    return Some((p, tau));
                }
            }
        }
        None
    }

    pub fn is_sigma_free(&self) -> bool {
        self.sigma_free_witness().is_none()
    }

    pub fn to_json(&self) -> OperadJson {
        let mut compositions: Vec<(String, usize, String, String)> = self
            .circ
            .iter()
            .map(|(&(p, i, q), &r)| (self.ops[p].name.clone(), i + 1, self.ops[q].name.clone(), self.ops[r].name.clone()))
            .collect();
        compositions.sort();
        let mut actions = Vec::new();
        for p in 0..self.ops.len() {
            for (tau, &r) in permutations(self.arity(p)).iter().zip(&self.action[p]).skip(1) {
                actions.push((self.ops[p].name.clone(), tau.iter().map(|t| t + 1).collect(), self.ops[r].name.clone()));
            }
        }
        OperadJson {
            name: self.name.clone(),
            colours: self.colours.clone(),
            operations: self
                .ops
                .iter()
                .map(|op| OperationJson {
                    name: op.name.clone(),
                    inputs: op.inputs.iter().map(|&c| self.colours[c].clone()).collect(),
                    output: self.colours[op.output].clone(),
                })
                .collect(),
            units: self.units.iter().map(|&u| self.ops[u].name.clone()).collect(),
            max_arity: self.max_arity,
            compositions,
            actions,
        }
    }

    pub fn from_json(json: &OperadJson) -> Result<ColoredOperad> {
        let colour = |name: &str| {
            json.colours
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::InvalidMap(format!("unknown colour {name}")))
        };
        let mut ops = Vec::new();
        for op in &json.operations {
            ops.push(Operation {
                name: op.name.clone(),
                inputs: op.inputs.iter().map(|c| colour(c)).collect::<Result<_>>()?,
                output: colour(&op.output)?,
            });
        }
        let index: HashMap<&str, usize> = ops.iter().enumerate().map(|(i, o)| (o.name.as_str(), i)).collect();
        let op = |name: &str| index.get(name).copied().ok_or_else(|| Error::InvalidMap(format!("unknown operation {name}")));
        let units = json.units.iter().map(|u| op(u)).collect::<Result<Vec<_>>>()?;
        let mut circ = HashMap::new();
        for (p, i, q, r) in &json.compositions {
            if *i == 0 {
                return Err(Error::InvalidMap("composition slots are numbered from 1".into()));
            }
            circ.insert((op(p)?, i - 1, op(q)?), op(r)?);
        }
        let mut action = HashMap::new();
        for (p, tau, r) in &json.actions {
            let tau: Vec<usize> = tau.iter().map(|t| t.wrapping_sub(1)).collect();
            action.insert((op(p)?, tau), op(r)?);
        }
        for (p, o) in ops.iter().enumerate() {
            for tau in permutations(o.inputs.len()).into_iter().skip(1) {
                if !action.contains_key(&(p, tau.clone())) {
                    return Err(Error::Inconsistent(format!("no action entry for {}·{tau:?}", o.name)));
                }
            }
        }
        let operad = ColoredOperad::build(
            json.name.clone(),
            json.colours.clone(),
            ops,
            units,
            json.max_arity,
            |p, i, q| circ.get(&(p, i, q)).copied(),
            |p, tau| action.get(&(p, tau.to_vec())).copied().unwrap_or(p),
        )?;
        operad.check_axioms()?;
        Ok(operad)
    }
}

impl Operad for ColoredOperad {
    type Op = usize;

    fn num_colours(&self) -> usize {
        self.colours.len()
    }

    fn colour_name(&self, c: usize) -> String {
        self.colours[c].clone()
    }

    fn op_name(&self, p: &usize) -> String {
        self.ops[*p].name.clone()
    }

    fn output(&self, p: &usize) -> usize {
        self.ops[*p].output
    }

    fn inputs(&self, p: &usize) -> Vec<usize> {
        self.ops[*p].inputs.clone()
    }

    fn unit(&self, c: usize) -> usize {
        self.units[c]
    }

    fn operations(&self, output: usize, arity: usize) -> Vec<usize> {
        self.signature(output, arity).to_vec()
    }

    fn compose(&self, p: &usize, qs: &[usize]) -> Result<usize> {
        if qs.len() != self.arity(*p) {
            return Err(Error::Mismatch(format!("{} takes {} inputs", self.ops[*p].name, self.arity(*p))));
        }
        let mut r = *p;
        for (i, &q) in qs.iter().enumerate().rev() {
            r = self.circ(r, i, q).ok_or_else(|| Error::BoundExceeded {
                what: format!("composite in {}", self.name),
                limit: self.max_arity,
                actual: self.arity(r) + self.arity(q) - 1,
            })?;
        }
        Ok(r)
    }

    fn permute(&self, p: &usize, tau: &[usize]) -> usize {
        self.act(*p, tau)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationJson {
    pub name: String,
    pub inputs: Vec<String>,
    pub output: String,
}

/// Operad tables: compositions as `[p, i, q, p ∘_i q]` with slots from 1,
/// actions as `[p, τ, p·τ]` with τ in one-line notation from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperadJson {
    pub name: String,
    pub colours: Vec<String>,
    pub operations: Vec<OperationJson>,
    pub units: Vec<String>,
    pub max_arity: usize,
    pub compositions: Vec<(String, usize, String, String)>,
    pub actions: Vec<(String, Vec<usize>, String)>,
}

// ---------------------------------------------------------------------------
// Fixtures

fn word_name(w: &[usize]) -> String {
    if w.is_empty() {
        return "e".into();
    }
    w.iter().map(|i| format!("x{}", i + 1)).collect()
}

/// The non-unital associative operad: Ass(n) = Σ_n for 1 ≤ n ≤ max_arity.
/// The operation ω multiplies its inputs in the order ω(1), ω(2), ...
pub fn ass_operad(max_arity: usize) -> ColoredOperad {
    let mut ops = Vec::new();
    let mut index = HashMap::new();
    for n in 1..=max_arity {
        for w in permutations(n) {
            index.insert(w.clone(), ops.len());
            ops.push((w.clone(), Operation { name: word_name(&w), inputs: vec![0; n], output: 0 }));
        }
    }
    let words: Vec<Vec<usize>> = ops.iter().map(|(w, _)| w.clone()).collect();
    let circ = |p: usize, i: usize, q: usize| {
        let (w, v) = (&words[p], &words[q]);
        let m = v.len();
        let mut out = Vec::new();
        for &a in w {
            if a == i {
                out.extend(v.iter().map(|&b| b + i));
            } else if a < i {
                out.push(a);
            } else {
                out.push(a + m - 1);
            }
        }
        index.get(&out).copied()
    };
    let act = |p: usize, tau: &[usize]| {
        // The i-th input of ω·τ is the τ(i)-th input of ω, so ω·τ = τ⁻¹ ∘ ω.
        let mut inv = vec![0; tau.len()];
        for (i, &t) in tau.iter().enumerate() {
            inv[t] = i;
        }
        index[&words[p].iter().map(|&a| inv[a]).collect::<Vec<_>>()]
    };
    ColoredOperad::build(
        "Ass",
        vec!["*".into()],
        ops.iter().map(|(_, o)| o.clone()).collect(),
        vec![0],
        max_arity,
        circ,
        act,
    )
    .expect("Ass is an operad")
}

/// The non-unital commutative operad: one operation in each arity 1..=max_arity.
pub fn com_operad(max_arity: usize) -> ColoredOperad {
    let ops = (1..=max_arity)
        .map(|n| Operation { name: format!("m{n}"), inputs: vec![0; n], output: 0 })
        .collect();
    ColoredOperad::build(
        "Com",
        vec!["*".into()],
        ops,
        vec![0],
        max_arity,
        |p, _, q| Some(p + q),
        |p, _| p,
    )
    .expect("Com is an operad")
}

/// The one-colour operad with only the unit.
pub fn trivial_operad() -> ColoredOperad {
    ColoredOperad::build(
        "I",
        vec!["*".into()],
        vec![Operation { name: "id".into(), inputs: vec![0], output: 0 }],
        vec![0],
        1,
        |_, _, _| Some(0),
        |p, _| p,
    )
    .expect("the unit operad is an operad")
}

/// Leaf cuts of the subtree above `e`: sets of edges meeting every maximal
/// upward path from `e` exactly once.
fn cuts(t: &Tree, e: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![e]];
    if t.is_vertex(e) {
        let mut partial = vec![Vec::new()];
        for &c in t.children(e) {
            let below = cuts(t, c);
            partial = partial
                .iter()
                .flat_map(|p| {
                    below.iter().map(move |b| {
                        let mut v: Vec<usize> = p.clone();
                        v.extend_from_slice(b);
                        v
                    })
                })
                .collect();
        }
        out.extend(partial);
    }
    out
}

/// The free coloured operad Ω(T): colours are edges, operations are
/// subtrees given by a root edge and an ordered leaf cut, composition is
/// grafting.
pub fn tree_operad(t: &Tree) -> ColoredOperad {
    let mut ops = Vec::new();
    for e in 0..t.len() {
        for cut in cuts(t, e) {
            for order in cut.iter().copied().permutations(cut.len()) {
                ops.push(Operation {
                    name: format!("{}<-({})", t.name(e), order.iter().map(|&a| t.name(a)).join(",")),
                    inputs: order,
                    output: e,
                });
            }
        }
    }
    let index: HashMap<(Vec<usize>, usize), usize> =
        ops.iter().enumerate().map(|(i, o)| ((o.inputs.clone(), o.output), i)).collect();
    let units = (0..t.len()).map(|e| index[&(vec![e], e)]).collect();
    let max_arity = ops.iter().map(|o| o.inputs.len()).max().unwrap_or(0);
    let sigs: Vec<(Vec<usize>, usize)> = ops.iter().map(|o| (o.inputs.clone(), o.output)).collect();
    ColoredOperad::build(
        format!("Ω({})", t.encoding()),
        t.names().to_vec(),
        ops,
        units,
        max_arity,
        |p, i, q| {
            let mut inputs = sigs[p].0.clone();
            inputs.splice(i..=i, sigs[q].0.iter().copied());
            index.get(&(inputs, sigs[p].1)).copied()
        },
        |p, tau| index[&(tau.iter().map(|&j| sigs[p].0[j]).collect(), sigs[p].1)],
    )
    .expect("Ω(T) is an operad")
}

// ---------------------------------------------------------------------------
// Dendroidal nerves

/// An operad map Ω(T) → P: a colour for each edge and an operation for each
/// vertex, with inputs in the order of the vertex's children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Labelling<Op> {
    pub colours: Vec<usize>,
    pub ops: Vec<Option<Op>>,
}

/// All operad maps Ω(T) → P.
pub fn labellings<P: Operad>(operad: &P, t: &Tree) -> Vec<Labelling<P::Op>> {
    let order: Vec<usize> = t.bfs().into_iter().filter(|&e| t.is_vertex(e)).collect();
    let mut cache: HashMap<(usize, usize), Vec<P::Op>> = HashMap::new();
    let mut out = Vec::new();
    for c in 0..operad.num_colours() {
        let mut lab = Labelling { colours: vec![usize::MAX; t.len()], ops: vec![None; t.len()] };
        lab.colours[t.root()] = c;
        extend(operad, t, &order, 0, &mut lab, &mut cache, &mut out);
    }
    out
}

fn extend<P: Operad>(
    operad: &P,
    t: &Tree,
    order: &[usize],
    i: usize,
    lab: &mut Labelling<P::Op>,
    cache: &mut HashMap<(usize, usize), Vec<P::Op>>,
    out: &mut Vec<Labelling<P::Op>>,
) {
    if i == order.len() {
        out.push(lab.clone());
        return;
    }
    let v = order[i];
    let kids = t.children(v);
    let key = (lab.colours[v], kids.len());
    let candidates = cache.entry(key).or_insert_with(|| operad.operations(key.0, key.1)).clone();
    for p in candidates {
        for (&k, c) in kids.iter().zip(operad.inputs(&p)) {
            lab.colours[k] = c;
        }
        lab.ops[v] = Some(p);
        extend(operad, t, order, i + 1, lab, cache, out);
    }
    lab.ops[v] = None;
}

/// The operation of P obtained by evaluating `lab` on the subtree above `e`
/// cut at `cut`, with its inputs listed in the order they are reached.
fn evaluate<P: Operad>(operad: &P, t: &Tree, lab: &Labelling<P::Op>, e: usize, cut: &[usize]) -> Result<(P::Op, Vec<usize>)> {
    if cut.contains(&e) {
        return Ok((operad.unit(lab.colours[e]), vec![e]));
    }
    let p = lab.ops[e].as_ref().ok_or_else(|| Error::InvalidMorphism {
        vertex: t.name(e).to_string(),
        reason: "leaf reached outside the cut".into(),
    })?;
    let mut qs = Vec::new();
    let mut order = Vec::new();
    for &c in t.children(e) {
        let (q, o) = evaluate(operad, t, lab, c, cut)?;
        qs.push(q);
        order.extend(o);
    }
    Ok((operad.compose(p, &qs)?, order))
}

/// α*(lab) for α: S → T.
pub fn restrict_labelling<P: Operad>(operad: &P, alpha: &OmegaMorphism, lab: &Labelling<P::Op>) -> Result<Labelling<P::Op>> {
    let s = &alpha.source;
    let t = &alpha.target;
    let colours = alpha.map.iter().map(|&e| lab.colours[e]).collect();
    let mut ops = vec![None; s.len()];
    for v in s.vertices() {
        let images: Vec<usize> = s.children(v).iter().map(|&a| alpha.map[a]).collect();
        let (op, order) = evaluate(operad, t, lab, alpha.map[v], &images)?;
        let tau: Vec<usize> = images
            .iter()
            .map(|x| order.iter().position(|y| y == x))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Inconsistent("edge map is not an operad map".into()))?;
        ops[v] = Some(operad.permute(&op, &tau));
    }
    Ok(Labelling { colours, ops })
}

/// A nerve tabulated over a truncation of Ω, with its elements.
#[derive(Debug, Clone)]
pub struct Nerve<Op> {
    pub presheaf: TabulatedPresheaf,
    pub elements: Vec<Vec<Labelling<Op>>>,
}

/// NP on the trees of `om`.
pub fn dendroidal_nerve<P: Operad>(operad: &P, om: &OmegaCategory) -> Result<Nerve<P::Op>> {
    let elements: Vec<Vec<Labelling<P::Op>>> = om.trees.iter().map(|t| labellings(operad, t)).collect();
    let index: Vec<HashMap<&Labelling<P::Op>, usize>> =
        elements.iter().map(|els| els.iter().enumerate().map(|(i, l)| (l, i)).collect()).collect();
    let cat = om.cat.clone();
    let mut action = Vec::with_capacity(cat.num_morphisms());
    for (f, alpha) in om.morphisms.iter().enumerate() {
        let (s, t) = (cat.source(f), cat.target(f));
        let mut row = Vec::with_capacity(elements[t].len());
        for lab in &elements[t] {
            let r = restrict_labelling(operad, alpha, lab)?;
            row.push(*index[s].get(&r).ok_or_else(|| Error::Inconsistent("restriction left the nerve".into()))?);
        }
        action.push(row);
    }
    let names = elements
        .iter()
        .zip(&om.trees)
        .map(|(els, t)| els.iter().map(|l| labelling_name(operad, t, l)).collect())
        .collect();
    let sizes = elements.iter().map(Vec::len).collect();
    let presheaf = TabulatedPresheaf::new_unchecked(cat, sizes, action).with_names(names);
    Ok(Nerve { presheaf, elements })
}

fn labelling_name<P: Operad>(operad: &P, t: &Tree, lab: &Labelling<P::Op>) -> String {
    let colours = (0..t.len()).map(|e| format!("{}={}", t.name(e), operad.colour_name(lab.colours[e]))).join(",");
    let ops = t
        .bfs()
        .into_iter()
        .filter_map(|e| lab.ops[e].as_ref().map(|p| format!("{}:{}", t.name(e), operad.op_name(p))))
        .join(",");
    if ops.is_empty() {
        format!("[{colours}]")
    } else {
        format!("[{colours};{ops}]")
    }
}

/// The natural map Ω[r] → X classifying `x ∈ X(r)`.
pub fn yoneda_map(x: &TabulatedPresheaf, r: usize, a: usize) -> PresheafMap {
    let cat = x.category();
    PresheafMap {
        components: (0..cat.num_objects()).map(|s| cat.hom(s, r).iter().map(|&f| x.act(f, a)).collect()).collect(),
    }
}

// ---------------------------------------------------------------------------
// Algebras

/// An algebra over a tabulated operad.
pub trait Algebra {
    fn carrier_size(&self, colour: usize) -> usize;
    fn element_name(&self, colour: usize, x: usize) -> String;
    /// m(p; x_1, ..., x_n).
    fn multiply(&self, p: usize, args: &[usize]) -> usize;
}

/// An algebra with every multiplication stored as a table indexed in mixed
/// radix by the arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedAlgebra {
    pub carriers: Vec<Vec<String>>,
    pub tables: Vec<Vec<usize>>,
    radices: Vec<Vec<usize>>,
}

impl TabulatedAlgebra {
    pub fn new(operad: &ColoredOperad, carriers: Vec<Vec<String>>, mut mult: impl FnMut(usize, &[usize]) -> usize) -> TabulatedAlgebra {
        let mut tables = Vec::new();
        let mut radices = Vec::new();
        for op in operad.ops() {
            let radix: Vec<usize> = op.inputs.iter().map(|&c| carriers[c].len()).collect();
            let table = radix.iter().map(|&n| 0..n).multi_cartesian_product().map(|args| mult(tables.len(), &args));
            let table: Vec<usize> = if radix.is_empty() { vec![mult(tables.len(), &[])] } else { table.collect() };
            tables.push(table);
            radices.push(radix);
        }
        TabulatedAlgebra { carriers, tables, radices }
    }

    /// Every carrier a singleton.
    pub fn terminal(operad: &ColoredOperad) -> TabulatedAlgebra {
        let carriers = operad.colours().iter().map(|_| vec!["*".to_string()]).collect();
        TabulatedAlgebra::new(operad, carriers, |_, _| 0)
    }

    pub fn tabulate(operad: &ColoredOperad, algebra: &impl Algebra) -> TabulatedAlgebra {
        let carriers = (0..operad.colours().len())
            .map(|c| (0..algebra.carrier_size(c)).map(|x| algebra.element_name(c, x)).collect())
            .collect();
        TabulatedAlgebra::new(operad, carriers, |p, args| algebra.multiply(p, args))
    }
}

impl Algebra for TabulatedAlgebra {
    fn carrier_size(&self, colour: usize) -> usize {
        self.carriers[colour].len()
    }

    fn element_name(&self, colour: usize, x: usize) -> String {
        self.carriers[colour][x].clone()
    }

    fn multiply(&self, p: usize, args: &[usize]) -> usize {
        let mut k = 0;
        for (&a, &n) in args.iter().zip(&self.radices[p]) {
            k = k * n + a;
        }
        self.tables[p][k]
    }
}

fn argument_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    if sizes.is_empty() {
        return vec![Vec::new()];
    }
    sizes.iter().map(|&n| 0..n).multi_cartesian_product().collect()
}

/// Checks the unit, associativity and equivariance laws of an algebra on
/// every composite of arity at most `arity_bound`.
pub fn check_algebra(operad: &ColoredOperad, a: &impl Algebra, arity_bound: usize) -> Result<()> {
    let sizes = |cs: &[usize]| cs.iter().map(|&c| a.carrier_size(c)).collect::<Vec<_>>();
    for c in 0..operad.colours().len() {
        for x in 0..a.carrier_size(c) {
            if a.multiply(operad.units()[c], &[x]) != x {
                return Err(Error::Inconsistent(format!("unit of {} moves {}", operad.colours()[c], a.element_name(c, x))));
            }
        }
    }
    for p in 0..operad.ops().len() {
        let op = operad.op(p);
        if op.inputs.len() > arity_bound {
            continue;
        }
        for i in 0..op.inputs.len() {
            for q in 0..operad.ops().len() {
                let Some(pq) = operad.circ(p, i, q) else { continue };
                if operad.arity(pq) > arity_bound {
                    continue;
                }
                let m = operad.arity(q);
                for args in argument_tuples(&sizes(&operad.op(pq).inputs)) {
                    let inner = a.multiply(q, &args[i..i + m]);
                    let mut outer: Vec<usize> = args[..i].to_vec();
                    outer.push(inner);
                    outer.extend_from_slice(&args[i + m..]);
                    if a.multiply(pq, &args) != a.multiply(p, &outer) {
                        return Err(Error::Inconsistent(format!(
                            "associativity fails at {} ∘_{} {}",
                            op.name,
                            i + 1,
                            operad.op(q).name
                        )));
                    }
                }
            }
        }
        for tau in permutations(op.inputs.len()) {
            let ptau = operad.act(p, &tau);
            for args in argument_tuples(&sizes(&operad.op(ptau).inputs)) {
                let mut moved = vec![0; args.len()];
                for (i, &t) in tau.iter().enumerate() {
                    moved[t] = args[i];
                }
                if a.multiply(ptau, &args) != a.multiply(p, &moved) {
                    return Err(Error::Inconsistent(format!("equivariance fails at {}·{tau:?}", op.name)));
                }
            }
        }
    }
    Ok(())
}

/// The free algebra on coloured generators, truncated to terms with at most
/// `size_bound` generator occurrences. Longer terms are collapsed into one
/// absorbing element per colour, which keeps the result an algebra.
#[derive(Debug, Clone)]
pub struct FreeAlgebra {
    pub operad: Arc<ColoredOperad>,
    pub generators: Vec<(String, usize)>,
    pub size_bound: usize,
    /// terms[c] lists orbit representatives (operation, generator tuple).
    pub terms: Vec<Vec<(usize, Vec<usize>)>>,
    /// The absorbing element at each colour, if one is needed.
    pub overflow: Vec<Option<usize>>,
    index: HashMap<(usize, Vec<usize>), usize>,
}

pub fn free_algebra(operad: Arc<ColoredOperad>, generators: &[(&str, usize)], size_bound: usize) -> Result<FreeAlgebra> {
    if let Some((p, tau)) = operad.sigma_free_witness() {
        return Err(Error::Hypothesis(format!("{} is not Σ-free: {}·{tau:?} = {}", operad.name, operad.op(p).name, operad.op(p).name)));
    }
    if size_bound > operad.max_arity() {
        return Err(Error::BoundExceeded {
            what: "free algebra term size beyond the operad's arity bound".into(),
            limit: operad.max_arity(),
            actual: size_bound,
        });
    }
    let ncol = operad.colours().len();
    if let Some((g, _)) = generators.iter().find(|(_, c)| *c >= ncol) {
        return Err(Error::InvalidMap(format!("generator {g} has an unknown colour")));
    }
    let mut terms: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); ncol];
    let mut index = HashMap::new();
    for p in 0..operad.ops().len() {
        let op = operad.op(p);
        if op.inputs.len() > size_bound {
            continue;
        }
        let choices: Vec<Vec<usize>> = op
            .inputs
            .iter()
            .map(|&c| (0..generators.len()).filter(|&g| generators[g].1 == c).collect())
            .collect();
        let tuples: Vec<Vec<usize>> =
            if choices.is_empty() { vec![Vec::new()] } else { choices.into_iter().multi_cartesian_product().collect() };
        for u in tuples {
            let rep = orbit_rep(&operad, p, &u);
            if rep == (p, u.clone()) {
                index.insert(rep.clone(), terms[op.output].len());
                terms[op.output].push(rep);
            }
        }
    }
    // An absorbing element is needed wherever a product can grow past the
    // bound or absorb one from an input.
    let max_size: Vec<Option<usize>> =
        terms.iter().map(|ts| ts.iter().map(|(_, u)| u.len()).max()).collect();
    let mut has_bot = vec![false; ncol];
    loop {
        let mut changed = false;
        for op in operad.ops() {
            if has_bot[op.output] || op.inputs.is_empty() {
                continue;
            }
            let inhabited = op.inputs.iter().all(|&c| max_size[c].is_some() || has_bot[c]);
            let grows = op.inputs.iter().map(|&c| max_size[c].unwrap_or(0)).sum::<usize>() > size_bound;
            if inhabited && (grows || op.inputs.iter().any(|&c| has_bot[c])) {
                has_bot[op.output] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let overflow = (0..ncol).map(|c| has_bot[c].then_some(terms[c].len())).collect();
    Ok(FreeAlgebra {
        operad,
        generators: generators.iter().map(|(g, c)| (g.to_string(), *c)).collect(),
        size_bound,
        terms,
        overflow,
        index,
    })
}

/// The least (operation, tuple) in the Σ_n-orbit of (p; u), where
/// (p·τ; u) ~ (p; v) whenever u_i = v_{τ(i)}.
fn orbit_rep(operad: &ColoredOperad, p: usize, v: &[usize]) -> (usize, Vec<usize>) {
    permutations(v.len())
        .into_iter()
        .map(|tau| (operad.act(p, &tau), tau.iter().map(|&t| v[t]).collect::<Vec<_>>()))
        .min()
        .expect("Σ_n is non-empty")
}

impl FreeAlgebra {
    /// Number of terms, not counting absorbing elements.
    pub fn term_count(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    /// The element represented by the generator `g`.
    pub fn generator(&self, g: usize) -> usize {
        let c = self.generators[g].1;
        self.index[&(self.operad.units()[c], vec![g])]
    }

    pub fn term(&self, colour: usize, x: usize) -> Option<&(usize, Vec<usize>)> {
        self.terms[colour].get(x)
    }
}

impl Algebra for FreeAlgebra {
    fn carrier_size(&self, colour: usize) -> usize {
        self.terms[colour].len() + self.overflow[colour].is_some() as usize
    }

    fn element_name(&self, colour: usize, x: usize) -> String {
        match self.terms[colour].get(x) {
            None => "⊥".into(),
            Some((p, u)) => {
                let args: Vec<&str> = u.iter().map(|&g| self.generators[g].0.as_str()).collect();
                let op = self.operad.op(*p);
                if op.inputs.len() == 1 && self.operad.units()[op.output] == *p {
                    args[0].to_string()
                } else {
                    format!("{}({})", op.name, args.join(","))
                }
            }
        }
    }

    fn multiply(&self, p: usize, args: &[usize]) -> usize {
        let out = self.operad.op(p).output;
        let bot = || self.overflow[out].expect("overflow was predicted");
        let inputs = &self.operad.op(p).inputs;
        let mut qs = Vec::with_capacity(args.len());
        let mut u = Vec::new();
        for (&c, &x) in inputs.iter().zip(args) {
            match self.terms[c].get(x) {
                None => return bot(),
                Some((q, v)) => {
                    qs.push(*q);
                    u.extend_from_slice(v);
                }
            }
        }
        if u.len() > self.size_bound {
            return bot();
        }
        let r = self.operad.compose(&p, &qs).expect("in-bound composites are tabulated");
        self.index[&orbit_rep(&self.operad, r, &u)]
    }
}

// ---------------------------------------------------------------------------
// G(A) over NP

/// The operad W whose colours are pairs (c, x ∈ A(c)) and whose operations
/// from (c_i, x_i) to (d, y) are the z ∈ P(c_1..c_n; d) with m(z; x) = y.
pub struct AlgebraOperad<'a, A: Algebra> {
    pub operad: &'a ColoredOperad,
    pub algebra: &'a A,
    offsets: Vec<usize>,
    colour_of: Vec<(usize, usize)>,
}

impl<'a, A: Algebra> AlgebraOperad<'a, A> {
    pub fn new(operad: &'a ColoredOperad, algebra: &'a A) -> Self {
        let mut offsets = Vec::new();
        let mut colour_of = Vec::new();
        for c in 0..operad.colours().len() {
            offsets.push(colour_of.len());
            colour_of.extend((0..algebra.carrier_size(c)).map(|x| (c, x)));
        }
        AlgebraOperad { operad, algebra, offsets, colour_of }
    }

    pub fn colour(&self, c: usize, x: usize) -> usize {
        self.offsets[c] + x
    }

    pub fn split(&self, w: usize) -> (usize, usize) {
        self.colour_of[w]
    }
}

impl<A: Algebra> Operad for AlgebraOperad<'_, A> {
    /// A P-operation with its input elements.
    type Op = (usize, Vec<usize>);

    fn num_colours(&self) -> usize {
        self.colour_of.len()
    }

    fn colour_name(&self, w: usize) -> String {
        let (c, x) = self.colour_of[w];
        format!("({},{})", self.operad.colours()[c], self.algebra.element_name(c, x))
    }

    fn op_name(&self, (p, _): &Self::Op) -> String {
        self.operad.op(*p).name.clone()
    }

    fn output(&self, (p, x): &Self::Op) -> usize {
        self.colour(self.operad.op(*p).output, self.algebra.multiply(*p, x))
    }

    fn inputs(&self, (p, x): &Self::Op) -> Vec<usize> {
        self.operad.op(*p).inputs.iter().zip(x).map(|(&c, &a)| self.colour(c, a)).collect()
    }

    fn unit(&self, w: usize) -> Self::Op {
        let (c, x) = self.colour_of[w];
        (self.operad.units()[c], vec![x])
    }

    fn operations(&self, output: usize, arity: usize) -> Vec<Self::Op> {
        let (d, y) = self.colour_of[output];
        let mut out = Vec::new();
        for &z in self.operad.signature(d, arity) {
            let sizes: Vec<usize> = self.operad.op(z).inputs.iter().map(|&c| self.algebra.carrier_size(c)).collect();
            for x in argument_tuples(&sizes) {
                if self.algebra.multiply(z, &x) == y {
                    out.push((z, x));
                }
            }
        }
        out
    }

    fn compose(&self, (p, x): &Self::Op, qs: &[Self::Op]) -> Result<Self::Op> {
        let mut zs = Vec::with_capacity(qs.len());
        let mut args = Vec::new();
        for (i, (q, y)) in qs.iter().enumerate() {
            if x.get(i) != Some(&self.algebra.multiply(*q, y)) {
                return Err(Error::Mismatch(format!("input {} of a W-composite does not match", i + 1)));
            }
            zs.push(*q);
            args.extend_from_slice(y);
        }
        Ok((self.operad.compose(p, &zs)?, args))
    }

    fn permute(&self, (p, x): &Self::Op, tau: &[usize]) -> Self::Op {
        (self.operad.act(*p, tau), tau.iter().map(|&t| x[t]).collect())
    }
}

/// G(A) computed as the pullback NP_T ×_{map(λT, NP_η)} map(λT, G(A)_η):
/// an element is a labelling ξ of T with a value in A for each leaf.
#[derive(Debug, Clone)]
pub struct GConstruction {
    pub presheaf: TabulatedPresheaf,
    /// elements[T] = (index of ξ in NP(T), leaf values in `leaves()` order).
    pub elements: Vec<Vec<(usize, Vec<usize>)>>,
    /// The projection G(A) → NP.
    pub projection: PresheafMap,
}

/// The value in A of every edge of T: leaves carry `leaf_values`, a vertex
/// multiplies the values of its inputs by its operation.
pub fn edge_values(t: &Tree, lab: &Labelling<usize>, leaf_values: &[usize], algebra: &impl Algebra) -> Vec<usize> {
    let leaves = t.leaves();
    let mut values = vec![usize::MAX; t.len()];
    for e in t.bfs().into_iter().rev() {
        values[e] = match &lab.ops[e] {
            None => leaf_values[leaves.iter().position(|&l| l == e).expect("edge without operation is a leaf")],
            Some(p) => {
                let args: Vec<usize> = t.children(e).iter().map(|&c| values[c]).collect();
                algebra.multiply(*p, &args)
            }
        };
    }
    values
}

pub fn underline_g(algebra: &impl Algebra, nerve: &Nerve<usize>, om: &OmegaCategory) -> Result<GConstruction> {
    let mut elements = Vec::new();
    for (t, tree) in om.trees.iter().enumerate() {
        let leaves = tree.leaves();
        let mut els = Vec::new();
        for (k, lab) in nerve.elements[t].iter().enumerate() {
            let sizes: Vec<usize> = leaves.iter().map(|&l| algebra.carrier_size(lab.colours[l])).collect();
            for x in argument_tuples(&sizes) {
                els.push((k, x));
            }
        }
        elements.push(els);
    }
    let index: Vec<HashMap<&(usize, Vec<usize>), usize>> =
        elements.iter().map(|els| els.iter().enumerate().map(|(i, e)| (e, i)).collect()).collect();
    let cat = om.cat.clone();
    let mut action = Vec::with_capacity(cat.num_morphisms());
    for (f, alpha) in om.morphisms.iter().enumerate() {
        let (s, t) = (cat.source(f), cat.target(f));
        let s_leaves = om.trees[s].leaves();
        let mut row = Vec::with_capacity(elements[t].len());
        for (k, x) in &elements[t] {
            let values = edge_values(&om.trees[t], &nerve.elements[t][*k], x, algebra);
            let key = (nerve.presheaf.act(f, *k), s_leaves.iter().map(|&l| values[alpha.map[l]]).collect());
            row.push(*index[s].get(&key).ok_or_else(|| Error::Inconsistent("restriction left G(A)".into()))?);
        }
        action.push(row);
    }
    let names = elements
        .iter()
        .enumerate()
        .map(|(t, els)| {
            let leaves = om.trees[t].leaves();
            els.iter()
                .map(|(k, x)| {
                    let lab = &nerve.elements[t][*k];
                    let vals = leaves.iter().zip(x).map(|(&l, &a)| algebra.element_name(lab.colours[l], a)).join(",");
                    format!("{}|{}", nerve.presheaf.element_name(t, *k), vals)
                })
                .collect()
        })
        .collect();
    let projection = PresheafMap { components: elements.iter().map(|els| els.iter().map(|(k, _)| *k).collect()).collect() };
    let sizes = elements.iter().map(Vec::len).collect();
    let presheaf = TabulatedPresheaf::new_unchecked(cat, sizes, action).with_names(names);
    Ok(GConstruction { presheaf, elements, projection })
}

/// Compares the W-nerve with the pullback description of G(A): the map
/// forgetting inner values must be a natural bijection over NP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GIdentityReport {
    pub trees: usize,
    pub elements: usize,
    pub bijective: bool,
    pub natural: bool,
    pub over_np: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl GIdentityReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.natural && self.over_np
    }
}

pub fn compare_g_constructions(
    operad: &ColoredOperad,
    algebra: &impl Algebra,
    om: &OmegaCategory,
) -> Result<GIdentityReport> {
    let np = dendroidal_nerve(operad, om)?;
    let g = underline_g(algebra, &np, om)?;
    let w = AlgebraOperad::new(operad, algebra);
    let wn = dendroidal_nerve(&w, om)?;
    let mut report = GIdentityReport {
        trees: om.trees.len(),
        elements: g.presheaf.total_size(),
        bijective: true,
        natural: true,
        over_np: true,
        witness: None,
    };
    let mut components = Vec::new();
    for (t, tree) in om.trees.iter().enumerate() {
        let leaves = tree.leaves();
        let np_index: HashMap<&Labelling<usize>, usize> = np.elements[t].iter().enumerate().map(|(i, l)| (l, i)).collect();
        let g_index: HashMap<&(usize, Vec<usize>), usize> = g.elements[t].iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut comp = Vec::new();
        let mut hit = vec![false; g.presheaf.size(t)];
        for lab in &wn.elements[t] {
            let xi = Labelling {
                colours: lab.colours.iter().map(|&c| w.split(c).0).collect(),
                ops: lab.ops.iter().map(|o| o.as_ref().map(|(p, _)| *p)).collect(),
            };
            let k = np_index[&xi];
            let x: Vec<usize> = leaves.iter().map(|&l| w.split(lab.colours[l]).1).collect();
            let image = g_index[&(k, x)];
            if hit[image] && report.bijective {
                report.bijective = false;
                report.witness = Some(format!("two W-labellings of {} have the same leaf data", tree.encoding()));
            }
            hit[image] = true;
            comp.push(image);
        }
        if !hit.iter().all(|&h| h) && report.bijective {
            report.bijective = false;
            report.witness = Some(format!("a pullback element at {} is not a W-labelling", tree.encoding()));
        }
        components.push(comp);
    }
    let map = PresheafMap { components };
    if let Err(e) = map.check_natural(&wn.presheaf, &g.presheaf) {
        report.natural = false;
        report.witness.get_or_insert(e.to_string());
    }
    if let Err(e) = g.projection.check_natural(&g.presheaf, &np.presheaf) {
        report.over_np = false;
        report.witness.get_or_insert(e.to_string());
    }
    Ok(report)
}

/// The unit Ω[T] → G(Free_P(λ(ξ))) at ξ ∈ NP(T), given as the element of
/// G(A)(T) over ξ whose leaves carry the generators.
#[derive(Debug, Clone)]
pub struct FreeUnit {
    pub algebra: FreeAlgebra,
    pub g: GConstruction,
    pub element: usize,
}

pub fn free_unit(
    operad: Arc<ColoredOperad>,
    om: &OmegaCategory,
    nerve: &Nerve<usize>,
    tree: usize,
    xi: usize,
    size_bound: usize,
) -> Result<FreeUnit> {
    let t = &om.trees[tree];
    let lab = &nerve.elements[tree][xi];
    let names: Vec<String> = t.leaves().iter().map(|&l| t.name(l).to_string()).collect();
    let generators: Vec<(&str, usize)> =
        t.leaves().iter().zip(&names).map(|(&l, n)| (n.as_str(), lab.colours[l])).collect();
    let algebra = free_algebra(operad, &generators, size_bound.max(1))?;
    let g = underline_g(&algebra, nerve, om)?;
    let key = (xi, (0..generators.len()).map(|k| algebra.generator(k)).collect::<Vec<_>>());
    let element = g.elements[tree].iter().position(|e| *e == key).expect("every leaf labelling lies in G(A)");
    Ok(FreeUnit { algebra, g, element })
}

// ---------------------------------------------------------------------------
// Covariant fibrations

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariantReport {
    pub passed: bool,
    pub corollas_checked: usize,
    pub max_vertices: usize,
    pub max_edges: usize,
    /// The base was verified strictly Segal before the check.
    pub base_segal: bool,
    pub strict_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Checks that for each corolla T of the truncation the square
/// X_T → map(λT, X_η) over B_T → map(λT, B_η) is a pullback of sets.
pub fn check_strict_covariant_fibration(
    om: &OmegaCategory,
    x: &TabulatedPresheaf,
    b: &TabulatedPresheaf,
    f: &PresheafMap,
) -> Result<CovariantReport> {
    let segal = check_strict_segal(om, b)?;
    if !segal.passed {
        return Err(Error::Hypothesis(format!(
            "the base is not strictly Segal: {}",
            segal.witness.unwrap_or_default()
        )));
    }
    f.check_natural(x, b)?;
    let eta = om.tree_index(&Tree::eta()).ok_or_else(|| Error::Usage("η is outside the truncation".into()))?;
    let mut report = CovariantReport {
        passed: true,
        corollas_checked: 0,
        max_vertices: om.max_vertices,
        max_edges: om.max_edges,
        base_segal: true,
        strict_only: true,
        witness: None,
    };
    for n in 0..om.max_edges {
        let Some(t) = om.tree_index(&Tree::corolla(n)) else { continue };
        report.corollas_checked += 1;
        let tree = &om.trees[t];
        let leaf_maps: Vec<usize> = tree
            .leaves()
            .iter()
            .map(|&l| {
                om.canonical_morphism_index(&edge_inclusion(tree, l))
                    .ok_or_else(|| Error::Inconsistent("leaf inclusion outside the truncation".into()))
            })
            .collect::<Result<_>>()?;
        let mut fibre: BTreeMap<usize, usize> = BTreeMap::new();
        for a in 0..x.size(eta) {
            *fibre.entry(f.apply(eta, a)).or_default() += 1;
        }
        let expected: usize = (0..b.size(t))
            .map(|bt| leaf_maps.iter().map(|&l| fibre.get(&b.act(l, bt)).copied().unwrap_or(0)).product::<usize>())
            .sum();
        let mut seen = HashMap::new();
        for a in 0..x.size(t) {
            let key = (f.apply(t, a), leaf_maps.iter().map(|&l| x.act(l, a)).collect::<Vec<_>>());
            if let Some(prev) = seen.insert(key, a) {
                report.passed = false;
                report.witness = Some(format!(
                    "at {}: {} and {} have the same image and leaves",
                    tree.encoding(),
                    x.element_name(t, prev),
                    x.element_name(t, a)
                ));
                return Ok(report);
            }
        }
        if seen.len() != expected {
            report.passed = false;
            report.witness = Some(format!(
                "at {}: {} elements but the pullback has {}",
                tree.encoding(),
                seen.len(),
                expected
            ));
            return Ok(report);
        }
    }
    Ok(report)
}
