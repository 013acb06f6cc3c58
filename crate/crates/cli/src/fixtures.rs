use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dendron::operad::{ass_operad, com_operad, free_algebra, ColoredOperad, FreeAlgebra, OperadJson};
use dendron::reedy_core::{FiniteCategory, OmegaCategory, PresheafMap, SetCategory, TabulatedPresheaf};
use dendron::finset_cat::{FinSet, PartialMap};
use dendron::tree_cat::{figure_tree, Elementary, Tree, TreeJson};
use dendron::{Error, Result};

/// Environment variable naming a directory of fixture overrides.
pub const FIXTURES_ENV: &str = "DENDRON_FIXTURES";

#[derive(Debug, Clone)]
pub enum Fixture {
    Tree(Arc<Tree>),
    Operad(Arc<ColoredOperad>),
    /// The free algebra on `generators` (all of colour 0) cut at term size
    /// `bound`.
    FreeAlgebra { operad: String, generators: Vec<String>, bound: usize },
    /// Ω[T] for each tree code.
    Representables(Vec<String>),
    Mutation,
}

impl Fixture {
    pub fn kind(&self) -> &'static str {
        match self {
            Fixture::Tree(_) => "tree",
            Fixture::Operad(_) => "operad",
            Fixture::FreeAlgebra { .. } => "algebra",
            Fixture::Representables(_) => "presheaves",
            Fixture::Mutation => "mutation",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub fixture: Fixture,
    pub description: String,
}

#[derive(Debug, Clone)]
pub struct Fixtures {
    entries: BTreeMap<String, Entry>,
    pub overrides: Option<PathBuf>,
}

fn entry(fixture: Fixture, description: &str) -> Entry {
    Entry { fixture, description: description.to_string() }
}

impl Fixtures {
    pub fn builtin() -> Fixtures {
        let mut entries = BTreeMap::new();
        let mut add = |name: &str, e: Entry| {
            entries.insert(name.to_string(), e);
        };
        add("fig-tree-4v", entry(Fixture::Tree(Arc::new(figure_tree())), "root vertex, a ternary vertex with a stump, a unary vertex"));
        add("corolla-3", entry(Fixture::Tree(Arc::new(Tree::corolla(3))), "the corolla C_3"));
        add("ass-operad", entry(Fixture::Operad(Arc::new(ass_operad(5))), "non-unital Ass, arities 1..=5, Σ-free"));
        add("com-operad", entry(Fixture::Operad(Arc::new(com_operad(5))), "non-unital Com, arities 1..=5, not Σ-free"));
        add(
            "free-ass-x",
            entry(Fixture::FreeAlgebra { operad: "ass-operad".into(), generators: vec!["x".into()], bound: 3 }, "Free_Ass({x}) cut at size 3"),
        );
        add(
            "free-ass-xy",
            entry(
                Fixture::FreeAlgebra { operad: "ass-operad".into(), generators: vec!["x".into(), "y".into()], bound: 2 },
                "Free_Ass({x, y}) cut at size 2",
            ),
        );
        add(
            "representables",
            entry(Fixture::Representables(["|", "()", "(|)", "(||)", "((||)|)"].map(String::from).to_vec()), "Ω[T] for small T"),
        );
        for (name, what) in [
            ("omega-face-as-negative", "a face of Ω moved into the negative class"),
            ("gamma-injection-as-both", "a non-invertible map of Γ put in both classes"),
            ("nerve-fold", "the fold NP ⊔ NP → NP, not a covariant fibration"),
            ("symmetric-collapse", "the Aut(A)-action on BΣ chains composed with a sort"),
            ("wrong-special-action", "the specialness comparison with a constant action on morphisms"),
            ("slice-collapsed-projection", "σ/X with two classes over C_2 merged"),
        ] {
            add(name, entry(Fixture::Mutation, what));
        }
        Fixtures { entries, overrides: None }
    }

    /// The builtin registry, with `<name>.tree.json` and `<name>.operad.json`
    /// from `$DENDRON_FIXTURES` replacing or adding entries.
    pub fn load() -> Result<Fixtures> {
        match std::env::var_os(FIXTURES_ENV) {
            Some(dir) => Fixtures::builtin().with_overrides(Path::new(&dir)),
            None => Ok(Fixtures::builtin()),
        }
    }

    pub fn with_overrides(mut self, dir: &Path) -> Result<Fixtures> {
        let read = std::fs::read_dir(dir).map_err(|e| Error::Usage(format!("cannot read {}: {e}", dir.display())))?;
        let mut paths: Vec<PathBuf> = read.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths {
            let Some(file) = path.file_name().and_then(|f| f.to_str()) else { continue };
            let text = || std::fs::read_to_string(&path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())));
            let bad = |e: serde_json::Error| Error::Usage(format!("{}: {e}", path.display()));
            if let Some(name) = file.strip_suffix(".tree.json") {
                let json: TreeJson = serde_json::from_str(&text()?).map_err(bad)?;
                let t = Tree::from_json(&json)?;
                self.entries.insert(name.into(), entry(Fixture::Tree(Arc::new(t)), &format!("from {}", path.display())));
            } else if let Some(name) = file.strip_suffix(".operad.json") {
                let json: OperadJson = serde_json::from_str(&text()?).map_err(bad)?;
                let p = ColoredOperad::from_json(&json)?;
                p.check_axioms()?;
                self.entries.insert(name.into(), entry(Fixture::Operad(Arc::new(p)), &format!("from {}", path.display())));
            }
        }
        self.overrides = Some(dir.to_path_buf());
        Ok(self)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &Entry)> {
        self.entries.iter()
    }

    pub fn get(&self, name: &str) -> Result<&Entry> {
        self.entries.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.entries.keys().map(String::as_str).collect();
            Error::Usage(format!("unknown fixture `{name}`; known: {}", known.join(", ")))
        })
    }

    pub fn tree(&self, name: &str) -> Result<Arc<Tree>> {
        match &self.get(name)?.fixture {
            Fixture::Tree(t) => Ok(t.clone()),
            other => Err(Error::Usage(format!("fixture `{name}` is a {}, not a tree", other.kind()))),
        }
    }

    pub fn operad(&self, name: &str) -> Result<Arc<ColoredOperad>> {
        match &self.get(name)?.fixture {
            Fixture::Operad(p) => Ok(p.clone()),
            other => Err(Error::Usage(format!("fixture `{name}` is a {}, not an operad", other.kind()))),
        }
    }

    pub fn free_algebra(&self, name: &str) -> Result<FreeAlgebra> {
        match &self.get(name)?.fixture {
            Fixture::FreeAlgebra { operad, generators, bound } => {
                let gens: Vec<(&str, usize)> = generators.iter().map(|g| (g.as_str(), 0)).collect();
                free_algebra(self.operad(operad)?, &gens, *bound)
            }
            other => Err(Error::Usage(format!("fixture `{name}` is a {}, not an algebra", other.kind()))),
        }
    }

    pub fn representables(&self, name: &str, om: &OmegaCategory) -> Result<Vec<(String, TabulatedPresheaf)>> {
        match &self.get(name)?.fixture {
            Fixture::Representables(codes) => codes
                .iter()
                .filter_map(|c| {
                    let t = Tree::from_code(c).ok()?;
                    om.tree_index(&t).map(|i| Ok((t.encoding(), TabulatedPresheaf::representable(&om.cat, i))))
                })
                .collect(),
            other => Err(Error::Usage(format!("fixture `{name}` is a {}, not a presheaf list", other.kind()))),
        }
    }
}

// Mutation builders.

/// Ω with its first top face reclassified as negative.
pub fn omega_face_as_negative(om: &OmegaCategory) -> Option<(FiniteCategory, String)> {
    let face = (0..om.cat.num_morphisms()).find(|&f| om.morphisms[f].classify() == Some(Elementary::TopFace))?;
    Some((om.cat.reclassified(face, false, true), om.cat.label(face).to_string()))
}

/// Γ with the injection 1 → 2 placed in both classes.
pub fn gamma_injection_as_both(g: &SetCategory) -> Option<FiniteCategory> {
    let inj = PartialMap::new(FinSet::skeleton(1), FinSet::skeleton(2), vec![Some(0)]).ok()?;
    Some(g.cat.reclassified(g.morphism_index(&inj)?, true, true))
}

/// X ⊔ X with the fold onto X.
pub fn fold(x: &TabulatedPresheaf) -> (TabulatedPresheaf, PresheafMap) {
    let two = x.coproduct(x);
    let n = x.category().num_objects();
    let map = PresheafMap { components: (0..n).map(|t| (0..two.size(t)).map(|e| e % x.size(t).max(1)).collect()).collect() };
    (two, map)
}

/// Pushes a chain along π, then sorts it: a non-free action.
pub fn symmetric_collapse(pi: &[usize], f: &[usize]) -> Vec<usize> {
    let mut g: Vec<usize> = f.iter().map(|&x| pi[x]).collect();
    g.sort();
    g
}
