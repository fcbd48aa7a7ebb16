use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coherence::experiment::{preset_names, ExperimentConfig};
use coherence::table::Table;

const CONSENSUS: &str = r#"kind = "consensus_static"
dim = 1
arrays.F = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }
"#;

const SKEW: &str = r#"kind = "consensus_dynamic"
dim = 1
arrays.A = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }
arrays.B = { entries = [{ offset = [-1], value = -0.5 }, { offset = [1], value = 0.5 }] }
arrays.F = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }
"#;

const MEMORYLESS: &str = r#"kind = "consensus_dynamic"
dim = 1
arrays.A = { entries = [{ offset = [0], value = -1.0 }] }
arrays.B = { entries = [] }
arrays.F = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coherence"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cons.toml"), CONSENSUS).unwrap();
    fs::write(dir.path().join("skew.toml"), SKEW).unwrap();
    fs::write(dir.path().join("dyn.toml"), MEMORYLESS).unwrap();
    dir
}

fn without_stamp(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    let (first, rest) = text.split_once('\n').unwrap();
    assert!(first.starts_with("# generated-unix-time: "), "{first}");
    rest.to_string()
}

#[test]
fn density_samples_the_symbol() {
    let dir = setup();
    assert!(run(dir.path(), &["density", "--model", "cons.toml", "--grid", "4"])
        .status
        .success());
    let t = Table::read(&dir.path().join("out/density.csv")).unwrap();
    assert_eq!(t.header, ["theta_1", "p_hat", "status"]);
    // the origin is left out
    assert_eq!(t.rows.len(), 3);
    let last = t.rows.len() - 1;
    assert_eq!(t.float(last, "theta_1"), Some(std::f64::consts::PI));
    assert_eq!(t.float(last, "p_hat"), Some(0.125));

    assert!(run(
        dir.path(),
        &["density", "--model", "cons.toml", "--grid", "0", "--out", "empty"]
    )
    .status
    .success());
    assert!(Table::read(&dir.path().join("empty/density.csv"))
        .unwrap()
        .rows
        .is_empty());
}

#[test]
fn variance_dedups_sizes_and_checks_the_oracle() {
    let dir = setup();
    assert!(run(
        dir.path(),
        &["variance", "--model", "cons.toml", "--L", "8,3,3", "--oracle"]
    )
    .status
    .success());
    let t = Table::read(&dir.path().join("out/variance.csv")).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.float(0, "L"), Some(3.0));
    assert!((t.float(0, "v_exact").unwrap() - 1.0 / 9.0).abs() < 1e-15);
    let (v, o) = (t.float(1, "v_exact").unwrap(), t.float(1, "v_oracle").unwrap());
    assert!((v - o).abs() <= 1e-10 * v);
}

#[test]
fn too_small_lattice_is_an_error() {
    let dir = setup();
    let out = run(dir.path(), &["variance", "--model", "cons.toml", "--L", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("L = 2"));
}

#[test]
fn inadmissible_model_exits_nonzero_with_citation() {
    let dir = setup();
    let out = run(dir.path(), &["admissible", "--model", "skew.toml", "--l-max", "64"]);
    assert!(!out.status.success());
    let record: toml::Table = toml::from_str(&without_stamp(&dir.path().join("out/admissible.toml"))).unwrap();
    assert_eq!(record["citation"].as_str(), Some("Theorem 3"));
    assert!(record["l_crit"].as_integer().is_some());
    assert!(record["witness"]["eigenvalue_re"].as_float().unwrap() > 0.0);

    assert!(run(dir.path(), &["admissible", "--model", "dyn.toml"]).status.success());
}

#[test]
fn effort_meets_the_bound_with_equality() {
    let dir = setup();
    assert!(run(dir.path(), &["effort", "--model", "dyn.toml", "--L", "4"])
        .status
        .success());
    let t = Table::read(&dir.path().join("out/effort.csv")).unwrap();
    assert!((t.float(0, "effort").unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(t.float(0, "bound_f"), Some(1.0));
}

#[test]
fn simulation_is_reproducible() {
    let dir = setup();
    let args = |out: &'static str| {
        [
            "simulate",
            "--model",
            "cons.toml",
            "--L",
            "8",
            "--topology",
            "string",
            "--seed",
            "3",
            "--dt",
            "0.05",
            "--t-end",
            "1000",
            "--warmup",
            "400",
            "--trajectories",
            "2",
            "--stride",
            "500",
            "--out",
            out,
        ]
    };
    assert!(run(dir.path(), &args("a")).status.success());
    assert!(run(dir.path(), &args("b")).status.success());
    for name in [
        "simulate_summary.csv",
        "simulate_trace_L8.csv",
        "simulate_positions_L8.csv",
    ] {
        let (a, b) = (dir.path().join("a").join(name), dir.path().join("b").join(name));
        assert_eq!(without_stamp(&a), without_stamp(&b), "{name}");
    }
    let s = Table::read(&dir.path().join("a/simulate_summary.csv")).unwrap();
    assert_eq!(s.rows[0][1], "string");
    assert_eq!(
        Table::read(&dir.path().join("a/simulate_trace_L8.csv"))
            .unwrap()
            .rows
            .len(),
        8 * 24
    );
}

#[test]
fn config_runs_every_experiment() {
    let dir = setup();
    let config = r#"
seed = 5

[models.line]
kind = "consensus_static"
dim = 1
arrays.F = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }

[[experiment]]
id = "v"
command = "variance"
model = "line"
L = [4, 8]

[[experiment]]
id = "s"
command = "scaling"
model = "cons.toml"
L = [8, 16, 32, 64]

[[experiment]]
id = "bad"
command = "admissible"
model = "skew.toml"
l_max = 32
"#;
    fs::write(dir.path().join("run.toml"), config).unwrap();
    let out = run(dir.path(), &["run", "--config", "run.toml", "--out", "res"]);
    // the inadmissible experiment fails the run but the others still write
    assert!(!out.status.success());
    for f in ["v.csv", "s.csv", "s_samples.csv", "bad.toml"] {
        assert!(dir.path().join("res").join(f).is_file(), "{f}");
    }
    let s = Table::read(&dir.path().join("res/s.csv")).unwrap();
    assert!((s.float(0, "slope").unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn bad_configs_are_refused() {
    let dir = setup();
    let base = "[models.m]\nkind = \"consensus_static\"\ndim = 1\narrays.F = { entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }\n";
    let cases = [
        ("[[experiment]]\nid = \"a\"\ncommand = \"variance\"\nmodel = \"m\"\nL = [2]\n", "L = 2"),
        ("[[experiment]]\nid = \"a\"\ncommand = \"variance\"\nmodel = \"m\"\n", "needs at least one L"),
        ("[[experiment]]\nid = \"a\"\ncommand = \"fly\"\nmodel = \"m\"\n", "unknown command"),
        ("[[experiment]]\nid = \"a\"\ncommand = \"density\"\nmodel = \"nope\"\n", "neither"),
        (
            "[[experiment]]\nid = \"a\"\ncommand = \"density\"\nmodel = \"m\"\n[[experiment]]\nid = \"a\"\ncommand = \"density\"\nmodel = \"m\"\n",
            "duplicate",
        ),
        (
            "[[experiment]]\nid = \"a\"\ncommand = \"simulate\"\nmodel = \"m\"\nL = [8]\nsim = { topology = \"torus\" }\n",
            "topology",
        ),
    ];
    for (tail, needle) in cases {
        let err = ExperimentConfig::parse(Path::new("t.toml"), &format!("{base}{tail}"), dir.path()).unwrap_err();
        assert!(err.to_string().contains(needle), "{needle}: {err}");
    }
}

#[test]
fn every_preset_parses() {
    let names = preset_names();
    assert!(!names.is_empty());
    for name in names {
        let cfg = ExperimentConfig::preset(name).unwrap();
        assert!(!cfg.experiments.is_empty(), "{name}");
    }
    let dir = setup();
    let out = run(dir.path(), &["presets"]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).lines().count(),
        preset_names().len()
    );
}

#[test]
fn scaling_table_preset_reproduces_the_exponents() {
    let dir = setup();
    assert!(run(dir.path(), &["run", "--preset", "theorem1_table"]).status.success());
    let expected = [
        ("consensus_1d", 1.0),
        ("vehicular_relative_1d", 3.0),
        ("vehicular_absolute_1d", 1.0),
        ("vehicular_dynamic_relative_1d", 3.0),
        ("dapi_1d", 0.0),
    ];
    for (id, slope) in expected {
        let t = Table::read(&dir.path().join(format!("out/{id}.csv"))).unwrap();
        let got = t.float(0, "slope").unwrap();
        assert!((got - slope).abs() < 0.1, "{id}: {got}");
    }
}
