use std::path::PathBuf;
use std::process::{Command, Output};

use dendron::operad::Algebra;
use dendron_cli::{run_suite, Bounds, Fixtures, SuiteError, SUITES};

fn dendron(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dendron")).args(args).env_remove("DENDRON_FIXTURES").output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dendron-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bounds_parse_and_print() {
    let b: Bounds = "tree-vertices=3,set-size=4,nerve-degree=3,carrier=4".parse().unwrap();
    assert_eq!(b.get("tree-vertices"), Some(3));
    assert_eq!(b.get("carrier"), Some(4));
    assert_eq!(b.get("arity"), None);
    assert_eq!(b.to_string().parse::<Bounds>().unwrap(), b);
    assert_eq!("".parse::<Bounds>().unwrap(), Bounds::default());

    for bad in ["tree-vertices", "height=2", "set-size=two", "carrier=1,carrier=2"] {
        assert!(bad.parse::<Bounds>().is_err(), "{bad} parsed");
    }
    let msg = "height=2".parse::<Bounds>().unwrap_err().to_string();
    assert!(msg.contains("tree-vertices") && msg.contains("carrier"), "{msg}");
}

#[test]
fn unknown_suite_lists_the_suites() {
    let err = run_suite("nope", &Bounds::default(), &Fixtures::builtin(), None).unwrap_err();
    assert!(matches!(err, SuiteError::Unknown(_)));
    let msg = err.to_string();
    for s in SUITES {
        assert!(msg.contains(s), "{msg} misses {s}");
    }
}

#[test]
fn reedy_axioms_on_small_omega() {
    let bounds: Bounds = "tree-vertices=3".parse().unwrap();
    let rep = run_suite("reedy-axioms", &bounds, &Fixtures::builtin(), None).unwrap();
    assert!(rep.passed, "{}", rep.render());
    assert_eq!(rep.bounds["tree-vertices"], 3);
    assert!(rep.replay.is_empty());
    for name in ["mutation/omega-face-as-negative", "mutation/gamma-injection-as-both"] {
        assert!(rep.check(name).unwrap().passed);
    }
}

#[test]
fn bpq_special_small() {
    let bounds: Bounds = "set-size=2,carrier=3".parse().unwrap();
    let rep = run_suite("bpq-special", &bounds, &Fixtures::builtin(), None).unwrap();
    assert!(rep.passed, "{}", rep.render());
    assert_eq!(rep.bounds["set-size"], 2);
    assert_eq!(rep.bounds["carrier"], 3);
    // |A|, |B| in 0..=2
    assert_eq!(rep.check("special").unwrap().cases, 9);
}

#[test]
fn report_is_written_and_deterministic() {
    let dir = scratch("report");
    let path = dir.join("lstar.json");
    let fx = Fixtures::builtin();
    let rep = run_suite("lstar-pushout", &Bounds::default(), &fx, Some(&path)).unwrap();
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, rep.to_json());
    assert_eq!(run_suite("lstar-pushout", &Bounds::default(), &fx, None).unwrap().to_json(), written);
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["schema"], "dendron-report/1");
    assert_eq!(v["suite"], "lstar-pushout");
    assert_eq!(v["passed"], true);
}

#[test]
fn builtin_fixtures() {
    let fx = Fixtures::builtin();
    let t = fx.tree("fig-tree-4v").unwrap();
    assert_eq!(t.vertices().len(), 4);
    assert!(fx.operad("ass-operad").unwrap().is_sigma_free());
    let com = fx.operad("com-operad").unwrap();
    assert!(!com.is_sigma_free());
    assert!(com.sigma_free_witness().is_some());
    assert_eq!(fx.free_algebra("free-ass-x").unwrap().carrier_size(0), 4);
    assert!(fx.tree("ass-operad").is_err());
    let err = fx.get("missing").unwrap_err().to_string();
    assert!(err.contains("fig-tree-4v"), "{err}");
    let kinds: Vec<&str> = fx.entries().map(|(_, e)| e.fixture.kind()).collect();
    assert!(kinds.iter().filter(|k| **k == "mutation").count() >= 6);
}

#[test]
fn fixture_directory_overrides() {
    let dir = scratch("fixtures");
    std::fs::write(
        dir.join("fig-tree-4v.tree.json"),
        r#"{"edges":["r","a","b"],"root":"r","parent":{"a":"r","b":"r"},"capped":[]}"#,
    )
    .unwrap();
    let fx = Fixtures::builtin().with_overrides(&dir).unwrap();
    assert_eq!(fx.tree("fig-tree-4v").unwrap().encoding(), "(||)");
    assert_eq!(fx.overrides.as_deref(), Some(dir.as_path()));

    let out = Command::new(env!("CARGO_BIN_EXE_dendron"))
        .args(["tree", "canon", "fig-tree-4v"])
        .env("DENDRON_FIXTURES", &dir)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "(||)");

    std::fs::write(dir.join("broken.tree.json"), "{").unwrap();
    assert!(Fixtures::builtin().with_overrides(&dir).is_err());
    let out = Command::new(env!("CARGO_BIN_EXE_dendron")).arg("fixtures").env("DENDRON_FIXTURES", &dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(dendron(&["suite", "lstar-pushout"]).status.code(), Some(0));
    assert_eq!(dendron(&["psh", "segal", "ass-nerve"]).status.code(), Some(0));
    // A Segal core is not strictly Segal.
    let out = dendron(&["psh", "segal", "core:((||)|)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("witness"));

    let out = dendron(&["suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bpq-special"));
    assert_eq!(dendron(&["--bounds", "height=2", "suite", "segal"]).status.code(), Some(2));
    assert_eq!(dendron(&["tree", "canon", "(|"]).status.code(), Some(2));
}

#[test]
fn json_output() {
    let out = dendron(&["--json", "suite", "lstar-pushout"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suite"], "lstar-pushout");

    let out = dendron(&["--json", "tree", "aut", "corolla-3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);

    let out = dendron(&["--json", "tree", "homs", "|", "fig-tree-4v"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 7);
}

#[test]
fn tree_commands() {
    let out = dendron(&["tree", "canon", "(|(||))"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "((||)|)");
    let out = dendron(&["--dot", "tree", "canon", "corolla-3"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("digraph"));
    let out = dendron(&["tree", "factorize", "(||)", "((||)|)", "e0=e1,e1=e2,e2=e3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("RootFace"));
}

#[test]
fn fset_commands() {
    let f = r#"{"source":["a","b"],"target":["x","y"],"map":{"a":"y","b":"x"}}"#;
    let g = r#"{"source":["x","y"],"target":["p"],"map":{"x":"p"}}"#;
    let out = dendron(&["--json", "fset", "compose", f, g]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["map"], serde_json::json!({"b": "p"}));

    let out = dendron(&["fset", "lambda", "(||)", "((||)|)", "e0=e1,e1=e2,e2=e3"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("partial"));
}

#[test]
fn bpq_and_slice_commands() {
    let out = dendron(&["bpq", "lstar", "2", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let out = dendron(&["--json", "bpq", "lstar", "3", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["total"], 100);
    assert_eq!(dendron(&["slice", "check-cov", "com-nerve", "--units", "2"]).status.code(), Some(0));
    assert_eq!(dendron(&["slice", "build", "nowhere"]).status.code(), Some(2));
}
