use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dendron::finset_cat::{leaf_functor, reedy_factorize_gamma, PartialMap, PartialMapJson};
use dendron::gamma_bpq::*;
use dendron::operad::{
    check_strict_covariant_fibration, compare_g_constructions, dendroidal_nerve, Algebra, ColoredOperad, OperadJson,
    underline_g,
};
use dendron::presheaf::{boundary_horn_core, check_strict_segal, LeafFunctor, Which};
use dendron::reedy_core::*;
use dendron::slice_yoneda::*;
use dendron::tree_cat::*;
use dendron::{Error, Result};
use dendron_cli::{run_suite, Bounds, Fixtures, SuiteError, SUITES};

#[derive(Parser)]
#[command(name = "dendron", version, about = "Finite checks for trees, dendroidal sets and Γ-sets")]
struct Cli {
    /// Truncation bounds, e.g. tree-vertices=3,set-size=4,nerve-degree=3,carrier=4
    #[arg(long, global = true, default_value = "")]
    bounds: Bounds,

    /// Print JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Print Graphviz DOT where the command supports it
    #[arg(long, global = true)]
    dot: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trees and morphisms of Ω
    Tree {
        #[command(subcommand)]
        cmd: TreeCmd,
    },
    /// Finite sets and partial maps
    Fset {
        #[command(subcommand)]
        cmd: FsetCmd,
    },
    /// Generalized Reedy structure
    Reedy {
        #[command(subcommand)]
        cmd: ReedyCmd,
    },
    /// Dendroidal presheaves
    Psh {
        #[command(subcommand)]
        cmd: PshCmd,
    },
    /// Operads, nerves and algebras
    Op {
        #[command(subcommand)]
        cmd: OpCmd,
    },
    /// Corolla attachments and σ/X
    Slice {
        #[command(subcommand)]
        cmd: SliceCmd,
    },
    /// Σ^L(A), specialness and L*
    Bpq {
        #[command(subcommand)]
        cmd: BpqCmd,
    },
    /// Run a verification suite, or all of them
    Suite {
        /// Suite name, or `all`
        name: Option<String>,
        /// Write the JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// List the registered suites
        #[arg(long)]
        list: bool,
    },
    /// List the fixture registry
    Fixtures,
}

/// Trees are given as a canonical code such as `(|(||))`, a JSON file, or a
/// fixture name.
#[derive(Subcommand)]
enum TreeCmd {
    /// Canonical form
    Canon { tree: String },
    /// All morphisms S → T
    Homs { source: String, target: String },
    /// The automorphism group
    Aut { tree: String },
    /// Reedy factorization and elementary decomposition of an edge map
    Factorize {
        source: String,
        target: String,
        /// Edge map as `a=x,b=y,...`
        map: String,
    },
}

#[derive(Subcommand)]
enum FsetCmd {
    /// g ∘ f for partial maps given as JSON (inline or a file)
    Compose { f: String, g: String },
    /// λ of an edge map S → T
    Lambda { source: String, target: String, map: String },
    /// Surjection-injection factorization in Γ
    Factorize { f: String },
}

#[derive(Subcommand)]
enum ReedyCmd {
    /// Check the axioms on `omega`, `gamma`, `injections` or a category JSON file
    Check { category: String },
    /// The latching object of Ω[of] at a tree
    Latch { tree: String, of: String },
    /// The matching object of Ω[of] at a tree
    Match { tree: String, of: String },
    /// Lift Sc[T] ↪ Ω[T] against NAss → * for every map Sc[T] → NAss
    Lift { tree: String },
}

/// Presheaves: `ass-nerve`, `com-nerve`, `terminal`, `rep:CODE`, `core:CODE`,
/// `horn:CODE`.
#[derive(Subcommand)]
enum PshCmd {
    /// Strict Segal check
    Segal { presheaf: String },
    /// Sizes of the boundary, horns and Segal core of Ω[T]
    Boundary { tree: String },
    /// λ_! Ω[T] on Γ
    Lambda { tree: String },
}

#[derive(Subcommand)]
enum OpCmd {
    /// |NP(T)| for the trees in bound
    Nerve { operad: String },
    /// Terms of a free algebra
    Free {
        operad: String,
        /// Generator names, comma separated, all of colour 0
        #[arg(long, default_value = "x")]
        generators: String,
        #[arg(long, default_value_t = 3)]
        size: usize,
    },
    /// The two G(A) constructions compared on an algebra fixture
    Galg { algebra: String },
    /// Strict covariance of G(A) → NP on an algebra fixture
    Covcheck { algebra: String },
}

/// X is `ass-nerve`, `com-nerve`, `terminal` or `eta`; σ picks the first
/// element of X(η) for every unit.
#[derive(Subcommand)]
enum SliceCmd {
    /// Classes of σ/X per tree
    Build {
        x: String,
        #[arg(long, default_value_t = 1)]
        units: usize,
    },
    /// Bound-relative covariance of π: σ/X → X
    CheckCov {
        x: String,
        #[arg(long, default_value_t = 1)]
        units: usize,
    },
}

#[derive(Subcommand)]
enum BpqCmd {
    /// Σ^L(A) up to the carrier bound
    Sigma { a: usize, #[arg(default_value_t = 1)] l: usize },
    /// Σ(A ⊔ B) ≃ Σ(A) × Σ(B)
    Special { a: usize, b: usize },
    /// Free Aut(A)-action on BΣ(A)
    Cofib { a: usize },
    /// The F(2, A × L) pushout square
    Lstar { a: usize, l: usize },
    /// Reduce F(k, −) ⊔ F(0, −) at a basepoint of X(∅)
    Reduce {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        basepoint: usize,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<SuiteError> for Failure {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Core(e) => Failure::Core(e),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

struct Ctx {
    bounds: Bounds,
    json: bool,
    dot: bool,
    fixtures: Fixtures,
}

impl Ctx {
    fn get(&self, key: &str, default: usize) -> usize {
        self.bounds.get(key).unwrap_or(default)
    }

    fn omega(&self, v: usize, e: usize) -> OmegaCategory {
        OmegaCategory::truncated(self.get("tree-vertices", v), self.get("tree-edges", e))
    }

    fn emit<T: Serialize>(&self, value: &T, human: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
        } else {
            print!("{}", human());
        }
    }

    fn tree(&self, s: &str) -> Result<Arc<Tree>> {
        if Path::new(s).is_file() {
            let json = read_json(s)?;
            return Ok(Arc::new(Tree::from_json(&json)?));
        }
        if s.starts_with('(') || s.starts_with('|') {
            return Ok(Arc::new(Tree::from_code(s)?));
        }
        self.fixtures.tree(s)
    }

    fn operad(&self, s: &str) -> Result<Arc<ColoredOperad>> {
        if Path::new(s).is_file() {
            let json: OperadJson = read_json(s)?;
            let p = ColoredOperad::from_json(&json)?;
            p.check_axioms()?;
            return Ok(Arc::new(p));
        }
        self.fixtures.operad(s)
    }
}

/// JSON from a file, or the argument itself when it is not a file.
fn read_json<T: serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    let text = if Path::new(s).is_file() {
        std::fs::read_to_string(s).map_err(|e| Error::Usage(format!("cannot read {s}: {e}")))?
    } else {
        s.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("bad JSON: {e}")))
}

fn edge_map(s: &str) -> Result<BTreeMap<String, String>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p.split_once('=').ok_or_else(|| Error::Usage(format!("`{p}` is not of the form edge=edge")))?;
            Ok((a.trim().to_string(), b.trim().to_string()))
        })
        .collect()
}

fn show_map(f: &OmegaMorphism) -> String {
    let parts: Vec<String> = f.names_map().into_iter().map(|(a, b)| format!("{a}->{b}")).collect();
    parts.join(" ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fixtures = match Fixtures::load() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let ctx = Ctx { bounds: cli.bounds, json: cli.json, dot: cli.dot, fixtures };
    let outcome = match cli.command {
        Command::Tree { cmd } => tree_cmd(&ctx, cmd),
        Command::Fset { cmd } => fset_cmd(&ctx, cmd),
        Command::Reedy { cmd } => reedy_cmd(&ctx, cmd),
        Command::Psh { cmd } => psh_cmd(&ctx, cmd),
        Command::Op { cmd } => op_cmd(&ctx, cmd),
        Command::Slice { cmd } => slice_cmd(&ctx, cmd),
        Command::Bpq { cmd } => bpq_cmd(&ctx, cmd),
        Command::Suite { name, out, list } => suite_cmd(&ctx, name, out, list),
        Command::Fixtures => fixtures_cmd(&ctx),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn tree_cmd(ctx: &Ctx, cmd: TreeCmd) -> Outcome {
    match cmd {
        TreeCmd::Canon { tree } => {
            let t = ctx.tree(&tree)?;
            let canon = Tree::from_code(&t.encoding())?;
            if ctx.dot {
                print!("{}", canon.to_dot());
                return Ok(true);
            }
            #[derive(Serialize)]
            struct Out {
                code: String,
                tree: TreeJson,
            }
            ctx.emit(&Out { code: canon.encoding(), tree: canon.to_json() }, || format!("{}\n", canon.encoding()));
        }
        TreeCmd::Homs { source, target } => {
            let (s, t) = (ctx.tree(&source)?, ctx.tree(&target)?);
            let homs = enumerate_homs(&s, &t, ctx.get("tree-edges", 12))?;
            let maps: Vec<BTreeMap<String, String>> = homs.iter().map(OmegaMorphism::names_map).collect();
            ctx.emit(&maps, || {
                let mut out = format!("{} morphisms\n", homs.len());
                for f in &homs {
                    out += &format!("  {}  [{}]\n", show_map(f), f.classify().map_or("composite".into(), |k| format!("{k:?}")));
                }
                out
            });
        }
        TreeCmd::Aut { tree } => {
            let t = ctx.tree(&tree)?;
            let auts = automorphisms(&t);
            let maps: Vec<BTreeMap<String, String>> = auts.iter().map(OmegaMorphism::names_map).collect();
            ctx.emit(&maps, || {
                let mut out = format!("|Aut({})| = {}\n", t.encoding(), auts.len());
                for a in &auts {
                    out += &format!("  {}\n", show_map(a));
                }
                out
            });
        }
        TreeCmd::Factorize { source, target, map } => {
            let (s, t) = (ctx.tree(&source)?, ctx.tree(&target)?);
            let f = OmegaMorphism::from_names(&s, &t, &edge_map(&map)?)?;
            let (neg, pos) = reedy_factorize(&f);
            let steps = decompose(&f);
            #[derive(Serialize)]
            struct Out {
                middle: String,
                negative: BTreeMap<String, String>,
                positive: BTreeMap<String, String>,
                steps: Vec<(String, BTreeMap<String, String>)>,
            }
            let out = Out {
                middle: neg.target.encoding(),
                negative: neg.names_map(),
                positive: pos.names_map(),
                steps: steps.iter().map(|(k, g)| (format!("{k:?}"), g.names_map())).collect(),
            };
            ctx.emit(&out, || {
                let mut s = format!("through {}\n  negative: {}\n  positive: {}\n", out.middle, show_map(&neg), show_map(&pos));
                for (k, g) in &steps {
                    s += &format!("  {k:?}: {}\n", show_map(g));
                }
                s
            });
        }
    }
    Ok(true)
}

fn fset_cmd(ctx: &Ctx, cmd: FsetCmd) -> Outcome {
    let pm = |s: &str| -> Result<PartialMap> { PartialMap::from_json(&read_json::<PartialMapJson>(s)?) };
    match cmd {
        FsetCmd::Compose { f, g } => {
            let (f, g) = (pm(&f)?, pm(&g)?);
            let c = g.after(&f)?;
            ctx.emit(&c.to_json(), || format!("{c:?}\n"));
        }
        FsetCmd::Lambda { source, target, map } => {
            let (s, t) = (ctx.tree(&source)?, ctx.tree(&target)?);
            let f = OmegaMorphism::from_names(&s, &t, &edge_map(&map)?)?;
            let l = leaf_functor(&f)?;
            let kind = if l.is_bijection() { "bijection" } else if l.is_total() { "total" } else { "partial" };
            ctx.emit(&l.to_json(), || format!("{l:?} ({kind})\n"));
        }
        FsetCmd::Factorize { f } => {
            let f = pm(&f)?;
            let fac = reedy_factorize_gamma(&f);
            let out = [fac.surjection.to_json(), fac.injection.to_json()];
            ctx.emit(&out, || format!("surjection {:?}\ninjection {:?}\n", fac.surjection, fac.injection));
        }
    }
    Ok(true)
}

fn category(ctx: &Ctx, name: &str) -> Result<Arc<FiniteCategory>> {
    let n = ctx.get("set-size", 4);
    match name {
        "omega" => Ok(ctx.omega(3, 6).cat),
        "gamma" => Ok(SetCategory::gamma(n).cat),
        "injections" => Ok(SetCategory::injections(n).cat),
        path => Ok(Arc::new(FiniteCategory::from_json(&read_json(path)?)?)),
    }
}

fn reedy_cmd(ctx: &Ctx, cmd: ReedyCmd) -> Outcome {
    match cmd {
        ReedyCmd::Check { category: name } => {
            let cat = category(ctx, &name)?;
            let rep = check_reedy_axioms(&cat);
            ctx.emit(&rep, || {
                let mut s = format!("{}: {} objects, {} morphisms\n", rep.category, rep.objects, rep.morphisms);
                for v in &rep.verdicts {
                    s += &format!("  {} {} ({} cases)\n", if v.passed { "ok  " } else { "FAIL" }, v.check, v.cases);
                    if let Some(w) = &v.witness {
                        s += &format!("       witness: {w}\n");
                    }
                }
                s
            });
            Ok(rep.passed())
        }
        ReedyCmd::Latch { tree, of } => {
            let om = ctx.omega(3, 6);
            let (r, x) = tree_and_representable(&om, ctx, &tree, &of)?;
            let l = latching_object(&x, r)?;
            ctx.emit(&l, || format!("deg(Ω[{of}])({tree}): {} classes, injective: {}\n", l.classes.len(), l.is_injective()));
            Ok(true)
        }
        ReedyCmd::Match { tree, of } => {
            let om = ctx.omega(3, 6);
            let (r, x) = tree_and_representable(&om, ctx, &tree, &of)?;
            let m = matching_object(&x, r, None)?;
            ctx.emit(&m, || format!("Ω[{of}](∂{tree}): {} families, |X| = {}\n", m.families.len(), x.size(r)));
            Ok(true)
        }
        ReedyCmd::Lift { tree } => {
            let om = ctx.omega(3, 5);
            let t = om.tree_index(&*ctx.tree(&tree)?).ok_or_else(|| Error::Usage("tree outside the truncation".into()))?;
            let ass = ctx.fixtures.operad("ass-operad")?;
            let np = dendroidal_nerve(ass.as_ref(), &om)?.presheaf;
            let sc = boundary_horn_core(&om, t, Which::SegalCore)?;
            let (a, i) = sc.ambient.restrict_to(&sc.selected)?;
            let y = TabulatedPresheaf::terminal(&om.cat);
            let to_point = |x: &TabulatedPresheaf| PresheafMap { components: x.sizes().iter().map(|&n| vec![0; n]).collect() };
            let (p, g) = (to_point(&np), to_point(&sc.ambient));
            let (mut filled, mut total) = (0, 0);
            for f in NaturalMapSearch::new(&a, &np).all() {
                total += 1;
                let sq = LiftingSquare { a: &a, b: &sc.ambient, x: &np, y: &y, i: &i, p: &p, f: &f, g: &g };
                if let Lifting::Filler(_) = solve_lifting(&sq)? {
                    filled += 1;
                }
            }
            #[derive(Serialize)]
            struct Out {
                squares: usize,
                filled: usize,
            }
            ctx.emit(&Out { squares: total, filled }, || format!("{filled} of {total} squares have a filler\n"));
            Ok(filled == total)
        }
    }
}

fn tree_and_representable(om: &OmegaCategory, ctx: &Ctx, tree: &str, of: &str) -> Result<(usize, TabulatedPresheaf)> {
    let find = |s: &str| -> Result<usize> {
        om.tree_index(&*ctx.tree(s)?).ok_or_else(|| Error::Usage(format!("`{s}` is outside the truncation")))
    };
    Ok((find(tree)?, TabulatedPresheaf::representable(&om.cat, find(of)?)))
}

fn named_presheaf(ctx: &Ctx, om: &OmegaCategory, name: &str) -> Result<TabulatedPresheaf> {
    let index = |code: &str| om.tree_index(&Tree::from_code(code)?).ok_or_else(|| Error::Usage(format!("`{code}` is outside the truncation")));
    let sub = |code: &str, which: &dyn Fn(&Tree) -> Result<Which>| -> Result<TabulatedPresheaf> {
        let t = index(code)?;
        let part = boundary_horn_core(om, t, which(&om.trees[t])?)?;
        Ok(part.ambient.restrict_to(&part.selected)?.0)
    };
    match name.split_once(':') {
        None if name.ends_with("-nerve") => {
            let op = ctx.fixtures.operad(&format!("{}-operad", name.trim_end_matches("-nerve")))?;
            Ok(dendroidal_nerve(op.as_ref(), om)?.presheaf)
        }
        None if name == "terminal" => Ok(TabulatedPresheaf::terminal(&om.cat)),
        Some(("rep", code)) => Ok(TabulatedPresheaf::representable(&om.cat, index(code)?)),
        Some(("core", code)) => sub(code, &|_| Ok(Which::SegalCore)),
        Some(("horn", code)) => sub(code, &|t| {
            t.inner_edges().first().map(|&e| Which::Horn(e)).ok_or_else(|| Error::Usage("no inner edge".into()))
        }),
        _ => Err(Error::Usage(format!("unknown presheaf `{name}`"))),
    }
}

fn psh_cmd(ctx: &Ctx, cmd: PshCmd) -> Outcome {
    match cmd {
        PshCmd::Segal { presheaf } => {
            let om = ctx.omega(3, 6);
            let x = named_presheaf(ctx, &om, &presheaf)?;
            let rep = check_strict_segal(&om, &x)?;
            ctx.emit(&rep, || {
                let verdict = if rep.passed { "strictly Segal" } else { "not strictly Segal" };
                let w = rep.witness.as_deref().map(|w| format!("\n  witness: {w}")).unwrap_or_default();
                format!("{presheaf}: {verdict} on {} trees (strict check){w}\n", rep.trees_checked)
            });
            return Ok(rep.passed);
        }
        PshCmd::Boundary { tree } => {
            let om = ctx.omega(3, 6);
            let t = om.tree_index(&*ctx.tree(&tree)?).ok_or_else(|| Error::Usage("tree outside the truncation".into()))?;
            let mut parts = vec![("boundary".to_string(), Which::Boundary), ("segal-core".to_string(), Which::SegalCore)];
            for e in om.trees[t].inner_edges() {
                parts.push((format!("horn-{}", om.trees[t].name(e)), Which::Horn(e)));
            }
            let mut sizes = BTreeMap::new();
            for (name, which) in parts {
                let part = boundary_horn_core(&om, t, which)?;
                sizes.insert(name, part.selected.count());
            }
            sizes.insert("representable".into(), TabulatedPresheaf::representable(&om.cat, t).sizes().iter().sum());
            ctx.emit(&sizes, || sizes.iter().map(|(k, v)| format!("{k}: {v} elements\n")).collect());
        }
        PshCmd::Lambda { tree } => {
            let l = LeafFunctor::standard(ctx.get("tree-vertices", 2), ctx.get("tree-edges", 4), ctx.get("set-size", 3))?;
            let t = l.omega.tree_index(&*ctx.tree(&tree)?).ok_or_else(|| Error::Usage("tree outside the truncation".into()))?;
            let ext = l.left_kan(&TabulatedPresheaf::representable(&l.omega.cat, t));
            let sizes = ext.presheaf.sizes().to_vec();
            ctx.emit(&sizes, || sizes.iter().enumerate().map(|(a, n)| format!("λ_!(Ω[{tree}])({a}) has {n} elements\n")).collect());
        }
    }
    Ok(true)
}

fn op_cmd(ctx: &Ctx, cmd: OpCmd) -> Outcome {
    match cmd {
        OpCmd::Nerve { operad } => {
            let p = ctx.operad(&operad)?;
            let om = ctx.omega(3, 5);
            let nerve = dendroidal_nerve(p.as_ref(), &om)?;
            let sizes: BTreeMap<String, usize> = om.trees.iter().enumerate().map(|(i, t)| (t.encoding(), nerve.presheaf.size(i))).collect();
            ctx.emit(&sizes, || sizes.iter().map(|(t, n)| format!("{t}: {n}\n")).collect());
        }
        OpCmd::Free { operad, generators, size } => {
            let p = ctx.operad(&operad)?;
            let gens: Vec<(&str, usize)> = generators.split(',').map(|g| (g.trim(), 0)).collect();
            let a = dendron::operad::free_algebra(p, &gens, size)?;
            let names: Vec<String> = (0..a.carrier_size(0)).map(|x| a.element_name(0, x)).collect();
            ctx.emit(&names, || format!("{} elements\n{}\n", names.len(), names.join("\n")));
        }
        OpCmd::Galg { algebra } => {
            let ass = ctx.fixtures.operad("ass-operad")?;
            let a = ctx.fixtures.free_algebra(&algebra)?;
            let rep = compare_g_constructions(&ass, &a, &ctx.omega(3, 4))?;
            ctx.emit(&rep, || format!("{rep:?}\n"));
            return Ok(rep.passed());
        }
        OpCmd::Covcheck { algebra } => {
            let ass = ctx.fixtures.operad("ass-operad")?;
            let om = ctx.omega(3, 5);
            let np = dendroidal_nerve(ass.as_ref(), &om)?;
            let a = ctx.fixtures.free_algebra(&algebra)?;
            let g = underline_g(&a, &np, &om)?;
            let rep = check_strict_covariant_fibration(&om, &g.presheaf, &np.presheaf, &g.projection)?;
            ctx.emit(&rep, || format!("{rep:?}\n"));
            return Ok(rep.passed);
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct ClassJson {
    arities: Vec<usize>,
    sharp: String,
    dendrex: String,
    labelling: Vec<usize>,
}

fn with_slice<X: DendroidalSet>(ctx: &Ctx, x: &X, units: usize, check: bool) -> Outcome {
    let om = ctx.omega(2, 4);
    let b = ctx.get("arity", 2);
    let eta = Arc::new(Tree::eta());
    let first = x.elements(&eta)?.into_iter().next().ok_or_else(|| Error::Usage("X(η) is empty".into()))?;
    let sigma = vec![first; units];
    let slice = slice_construction(x, &sigma, &om, b)?;
    if check {
        let rep = check_slice_covariance(&slice, &om)?;
        ctx.emit(&rep, || format!("{rep:?}\n"));
        return Ok(rep.passed);
    }
    let classes: BTreeMap<String, Vec<ClassJson>> = om
        .trees
        .iter()
        .zip(&slice.classes)
        .map(|(t, cs)| {
            let cs = cs
                .iter()
                .map(|c| ClassJson {
                    arities: c.attachment.arities.clone(),
                    sharp: c.attachment.sharp.encoding(),
                    dendrex: x.element_name(&c.dendrex),
                    labelling: c.labelling.clone(),
                })
                .collect();
            (t.encoding(), cs)
        })
        .collect();
    ctx.emit(&classes, || {
        classes
            .iter()
            .map(|(t, cs)| {
                let mut s = format!("{t}: {} classes\n", cs.len());
                for c in cs {
                    s += &format!("  {} {:?} {} {:?}\n", c.sharp, c.arities, c.dendrex, c.labelling);
                }
                s
            })
            .collect()
    });
    Ok(true)
}

fn slice_cmd(ctx: &Ctx, cmd: SliceCmd) -> Outcome {
    let (x, units, check) = match cmd {
        SliceCmd::Build { x, units } => (x, units, false),
        SliceCmd::CheckCov { x, units } => (x, units, true),
    };
    match x.as_str() {
        "terminal" => with_slice(ctx, &TerminalSet, units, check),
        "eta" => with_slice(ctx, &RepresentableSet(Arc::new(Tree::eta())), units, check),
        name if name.ends_with("-nerve") => {
            let p = ctx.fixtures.operad(&format!("{}-operad", name.trim_end_matches("-nerve")))?;
            with_slice(ctx, &OperadNerve(p.as_ref()), units, check)
        }
        other => Err(Failure::Usage(format!("unknown X `{other}`; use ass-nerve, com-nerve, terminal or eta"))),
    }
}

fn bpq_cmd(ctx: &Ctx, cmd: BpqCmd) -> Outcome {
    let set = dendron::finset_cat::FinSet::skeleton;
    match cmd {
        BpqCmd::Sigma { a, l } => {
            let s = sigma_groupoid(&set(a), &set(l), ctx.get("carrier", 3));
            if ctx.dot {
                print!("{}", s.groupoid.to_dot());
                return Ok(true);
            }
            #[derive(Serialize)]
            struct Out {
                objects: Vec<Vec<usize>>,
                morphisms: usize,
                components: usize,
            }
            let out = Out { objects: s.objects.clone(), morphisms: s.groupoid.morphisms.len(), components: s.groupoid.num_components() };
            ctx.emit(&out, || format!("{} objects, {} morphisms, {} components\n", out.objects.len(), out.morphisms, out.components));
        }
        BpqCmd::Special { a, b } => {
            let rep = check_special(&set(a), &set(b), ctx.get("carrier", 4))?;
            ctx.emit(&rep, || format!("{rep:?}\n"));
            return Ok(rep.passed());
        }
        BpqCmd::Cofib { a } => {
            let rep = check_bsigma_cofibrant(&set(a), ctx.get("carrier", 3), ctx.get("nerve-degree", 3));
            ctx.emit(&rep, || format!("{rep:?}\n"));
            return Ok(rep.passed);
        }
        BpqCmd::Lstar { a, l } => {
            let rep = check_lstar_pushout(a, l);
            ctx.emit(&rep, || format!("{rep:?}\n"));
            return Ok(rep.passed());
        }
        BpqCmd::Reduce { k, basepoint } => {
            let g = SetCategory::gamma(ctx.get("set-size", 3));
            let x = TabulatedPresheaf::representable(&g.cat, k.min(g.max_size)).coproduct(&TabulatedPresheaf::representable(&g.cat, 0));
            let (y, q) = reduce_pointed(&x, Some(basepoint))?;
            q.check_natural(&x, &y)?;
            let sizes = (x.sizes().to_vec(), y.sizes().to_vec());
            ctx.emit(&sizes, || format!("before {:?}\nafter  {:?}\n", sizes.0, sizes.1));
        }
    }
    Ok(true)
}

fn suite_cmd(ctx: &Ctx, name: Option<String>, out: Option<PathBuf>, list: bool) -> Outcome {
    if list {
        println!("{}", SUITES.join("\n"));
        return Ok(true);
    }
    let name = name.ok_or_else(|| Failure::Usage(format!("name a suite: {} or all", SUITES.join(", "))))?;
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name.as_str()] };
    let mut passed = true;
    let mut reports = Vec::new();
    for n in names {
        let start = std::time::Instant::now();
        let report = run_suite(n, &ctx.bounds, &ctx.fixtures, None)?;
        if !ctx.json {
            print!("{}", report.render());
            println!("  ({:.2?})", start.elapsed());
        }
        passed &= report.passed;
        reports.push(report);
    }
    let json = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        serde_json::to_string_pretty(&reports).expect("serializable") + "\n"
    };
    if ctx.json {
        print!("{json}");
    }
    if let Some(path) = out {
        std::fs::write(&path, json).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(passed)
}

fn fixtures_cmd(ctx: &Ctx) -> Outcome {
    let rows: BTreeMap<&String, (&str, &String)> = ctx.fixtures.entries().map(|(n, e)| (n, (e.fixture.kind(), &e.description))).collect();
    ctx.emit(&rows, || rows.iter().map(|(n, (k, d))| format!("{n:28} {k:10} {d}\n")).collect());
    Ok(true)
}
