//! The category F of finite sets and partial maps, its opposite Γ, the
//! category M of finite sets and injections, the leaf functor λ: Ω → Γ and
//! the functor inv: M → Γ.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree_cat::OmegaMorphism;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSet {
    elements: Vec<String>,
}

impl FinSet {
    pub fn new<S: Into<String>>(elements: impl IntoIterator<Item = S>) -> Result<FinSet> {
        let elements: Vec<String> = elements.into_iter().map(Into::into).collect();
        for (i, e) in elements.iter().enumerate() {
            if elements[..i].contains(e) {
                return Err(Error::InvalidMap(format!("duplicate element `{e}`")));
            }
        }
        Ok(FinSet { elements })
    }

    /// The skeletal set n̲ = {1, ..., n}.
    pub fn skeleton(n: usize) -> FinSet {
        FinSet { elements: (1..=n).map(|i| i.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index_of(&self, e: &str) -> Option<usize> {
        self.elements.iter().position(|x| x == e)
    }
}

/// A partial map, stored as a total map into the target plus a bottom
/// element (`None`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialMap {
    pub source: FinSet,
    pub target: FinSet,
    pub map: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialMapJson {
    pub source: Vec<String>,
    pub target: Vec<String>,
    #[serde(default)]
    pub map: BTreeMap<String, String>,
}

impl fmt::Debug for PartialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .map
            .iter()
            .enumerate()
            .map(|(i, y)| match y {
                Some(y) => format!("{}->{}", self.source.elements[i], self.target.elements[*y]),
                None => format!("{}->_", self.source.elements[i]),
            })
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl PartialMap {
    pub fn new(source: FinSet, target: FinSet, map: Vec<Option<usize>>) -> Result<PartialMap> {
        if map.len() != source.len() {
            return Err(Error::InvalidMap("map length differs from the source size".into()));
        }
        if map.iter().flatten().any(|&y| y >= target.len()) {
            return Err(Error::InvalidMap("image outside the target".into()));
        }
        Ok(PartialMap { source, target, map })
    }

    pub fn from_json(json: &PartialMapJson) -> Result<PartialMap> {
        let source = FinSet::new(json.source.clone())?;
        let target = FinSet::new(json.target.clone())?;
        let mut map = vec![None; source.len()];
        for (x, y) in &json.map {
            let i = source.index_of(x).ok_or_else(|| Error::InvalidMap(format!("unknown source element `{x}`")))?;
            let j = target.index_of(y).ok_or_else(|| Error::InvalidMap(format!("unknown target element `{y}`")))?;
            map[i] = Some(j);
        }
        Ok(PartialMap { source, target, map })
    }

    pub fn to_json(&self) -> PartialMapJson {
        PartialMapJson {
            source: self.source.elements.clone(),
            target: self.target.elements.clone(),
            map: self
                .map
                .iter()
                .enumerate()
                .filter_map(|(i, y)| y.map(|y| (self.source.elements[i].clone(), self.target.elements[y].clone())))
                .collect(),
        }
    }

    pub fn identity(a: &FinSet) -> PartialMap {
        PartialMap { source: a.clone(), target: a.clone(), map: (0..a.len()).map(Some).collect() }
    }

    pub fn undefined(a: &FinSet, b: &FinSet) -> PartialMap {
        PartialMap { source: a.clone(), target: b.clone(), map: vec![None; a.len()] }
    }

    /// `self ∘ f`, defined on f⁻¹(dom self) ∩ dom f.
    pub fn after(&self, f: &PartialMap) -> Result<PartialMap> {
        if f.target != self.source {
            return Err(Error::Mismatch("target of the first map is not the source of the second".into()));
        }
        Ok(self.after_unchecked(f))
    }

    pub fn after_unchecked(&self, f: &PartialMap) -> PartialMap {
        PartialMap {
            source: f.source.clone(),
            target: self.target.clone(),
            map: f.map.iter().map(|y| y.and_then(|y| self.map[y])).collect(),
        }
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&i| self.map[i].is_some()).collect()
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &y in self.map.iter().flatten() {
            if seen[y] {
                return false;
            }
            seen[y] = true;
        }
        true
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &y in self.map.iter().flatten() {
            seen[y] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_bijection(&self) -> bool {
        self.is_total() && self.is_injective() && self.is_surjective()
    }

    /// Inert maps: every point of the target has exactly one preimage.
    pub fn is_inert(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// The dual of `self` lies in Γ⁺ (partial surjections).
    pub fn dual_is_positive(&self) -> bool {
        self.is_surjective()
    }

    /// The dual of `self` lies in Γ⁻ (total injections).
    pub fn dual_is_negative(&self) -> bool {
        self.is_total() && self.is_injective()
    }

    pub fn image(&self) -> Vec<usize> {
        let mut im: Vec<usize> = self.map.iter().flatten().copied().collect();
        im.sort();
        im.dedup();
        im
    }
}

/// Reedy factorization read in F: `f = injection ∘ surjection` with the
/// surjection a partial surjection onto the image and the injection total.
/// In Γ the dual of the surjection is the positive part and the dual of the
/// injection is the negative part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaFactorization {
    pub surjection: PartialMap,
    pub injection: PartialMap,
}

impl GammaFactorization {
    pub fn positive(&self) -> &PartialMap {
        &self.surjection
    }

    pub fn negative(&self) -> &PartialMap {
        &self.injection
    }
}

pub fn reedy_factorize_gamma(f: &PartialMap) -> GammaFactorization {
    let image = f.image();
    let mid = FinSet { elements: image.iter().map(|&y| f.target.elements[y].clone()).collect() };
    let surjection = PartialMap {
        source: f.source.clone(),
        target: mid.clone(),
        map: f.map.iter().map(|y| y.map(|y| image.binary_search(&y).unwrap())).collect(),
    };
    let injection = PartialMap { source: mid, target: f.target.clone(), map: image.into_iter().map(Some).collect() };
    GammaFactorization { surjection, injection }
}

/// All partial maps between two sets, in lexicographic order with the
/// undefined value first.
pub fn all_partial_maps(a: &FinSet, b: &FinSet) -> Vec<PartialMap> {
    let mut out = vec![Vec::with_capacity(a.len())];
    for _ in 0..a.len() {
        let mut next = Vec::with_capacity(out.len() * (b.len() + 1));
        for prefix in &out {
            for y in std::iter::once(None).chain((0..b.len()).map(Some)) {
                let mut p: Vec<Option<usize>> = prefix.clone();
                p.push(y);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|map| PartialMap { source: a.clone(), target: b.clone(), map })
        .collect()
}

/// The leaf set λ(T) of the source or target of a morphism, as a finite set
/// of edge names.
pub fn leaf_set(t: &crate::tree_cat::Tree) -> FinSet {
    FinSet { elements: t.leaves().iter().map(|&e| t.name(e).to_string()).collect() }
}

/// λ(α): λ(T) ⇸ λ(S) for α: S → T. A leaf e of T goes to the leaf d of S
/// whose image lies on the path from e down to the root.
pub fn leaf_functor(alpha: &OmegaMorphism) -> Result<PartialMap> {
    let (s, t) = (&alpha.source, &alpha.target);
    crate::tree_cat::validate_morphism(s.clone(), t.clone(), alpha.map.clone())?;
    let s_leaves = s.leaves();
    let t_leaves = t.leaves();
    let mut map = Vec::with_capacity(t_leaves.len());
    for &e in &t_leaves {
        let hits: Vec<usize> = (0..s_leaves.len())
            .filter(|&i| t.is_above(e, alpha.map[s_leaves[i]]))
            .collect();
        match hits.as_slice() {
            [] => map.push(None),
            [i] => map.push(Some(*i)),
            _ => {
                return Err(Error::Inconsistent(format!(
                    "leaf `{}` lies above the images of several leaves",
                    t.name(e)
                )))
            }
        }
    }
    Ok(PartialMap { source: leaf_set(t), target: leaf_set(s), map })
}

/// inv(m): the inverse A ⇸ B of a total injection m: B ↪ A.
pub fn inv_functor(m: &PartialMap) -> Result<PartialMap> {
    if !m.is_total() || !m.is_injective() {
        return Err(Error::InvalidMap("inv needs a total injection".into()));
    }
    let mut map = vec![None; m.target.len()];
    for (b, y) in m.map.iter().enumerate() {
        map[y.unwrap()] = Some(b);
    }
    Ok(PartialMap { source: m.target.clone(), target: m.source.clone(), map })
}

/// All total injections between two sets.
pub fn all_injections(a: &FinSet, b: &FinSet) -> Vec<PartialMap> {
    all_partial_maps(a, b)
        .into_iter()
        .filter(|f| f.is_total() && f.is_injective())
        .collect()
}
