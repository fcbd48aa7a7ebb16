use coherence::format::{array_to_toml, load_array, load_model, model_to_toml, ModelDoc};
use coherence::table::Table;
use coherence_core::sample::{random_laplacian, random_model};
use coherence_core::Template;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::Path;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_round_trips(seed in any::<u64>(), t in 0..Template::ALL.len(), d in 1..=2usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, Template::ALL[t], d, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        fs::write(&path, model_to_toml(&model)).unwrap();
        prop_assert_eq!(load_model(&path).unwrap(), model);
    }

    #[test]
    fn array_round_trips(seed in any::<u64>(), d in 1..=3usize, radius in 1..=2usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_laplacian(&mut rng, d, radius, -1.0, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.toml");
        fs::write(&path, array_to_toml(&a)).unwrap();
        prop_assert_eq!(load_array(&path).unwrap().to_array(None).unwrap(), a);
    }

    #[test]
    fn table_round_trips(cells in prop::collection::vec(prop::collection::vec("[a-z0-9 ,\"._-]{0,8}", 3), 0..6)) {
        let mut t = Table::new(["x", "y, z", "w"]);
        for row in cells {
            t.push(row);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        t.write(&path).unwrap();
        prop_assert_eq!(Table::read(&path).unwrap(), t);
    }
}

#[test]
fn array_files_resolve_next_to_the_model() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("arrays")).unwrap();
    fs::write(
        dir.path().join("arrays/f.toml"),
        "dim = 1\nentries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }]\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("m.toml"),
        "kind = \"consensus_static\"\ndim = 1\narrays.F = { file = \"arrays/f.toml\" }\n",
    )
    .unwrap();
    let m = load_model(&dir.path().join("m.toml")).unwrap();
    assert_eq!(m.support_radius(), 1);
}

fn parse_err(text: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.toml");
    fs::write(&path, text).unwrap();
    load_model(Path::new(&path)).unwrap_err().to_string()
}

#[test]
fn malformed_models_are_refused() {
    let lap =
        "{ entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -2.0 }, { offset = [1], value = 1.0 }] }";
    assert!(parse_err(&format!("kind = \"swarm\"\ndim = 1\narrays.F = {lap}\n")).contains("unknown kind"));
    assert!(parse_err(&format!("kind = \"consensus_static\"\ndim = 1\narrays.Q = {lap}\n")).contains("unknown array"));
    assert!(parse_err(&format!("kind = \"consensus_static\"\ndim = 2\narrays.F = {lap}\n")).contains("coordinates"));
    assert!(parse_err(&format!("kind = \"consensus_static\"\ndim = 1\narrays.G = {lap}\n")).contains("not used"));
    // F must sum to zero
    let bad =
        "{ entries = [{ offset = [-1], value = 1.0 }, { offset = [0], value = -3.0 }, { offset = [1], value = 1.0 }] }";
    assert!(parse_err(&format!("kind = \"consensus_static\"\ndim = 1\narrays.F = {bad}\n")).contains("relative"));
    let unchecked: ModelDoc = toml::from_str(&format!(
        "kind = \"consensus_static\"\ndim = 1\nchecked = false\narrays.F = {bad}\n"
    ))
    .unwrap();
    assert!(unchecked.to_model(Path::new(".")).is_ok());
}
