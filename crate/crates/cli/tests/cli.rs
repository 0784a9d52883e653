use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topmix::{hold_out_split, SchemaSpec, SplitMode, SplitSpec};
use topmix_cli::{run_classify, run_distances, ExperimentConfig, KSelection, Pipeline, Stage, SymmetryVectorSpec};

const SCHEMA: &str = r#"
[[attributes]]
name = "a"
kind = "numeric"

[[attributes]]
name = "b"
kind = "numeric"

[[attributes]]
name = "c"
kind = "categorical"
domain = ["x", "y", "z"]

[target]
name = "y"
positive_rule = { kind = "greater_than", threshold = 0.0 }
"#;

/// Forty rows where the class shifts the numeric attributes, so k-NN has
/// something to find. One row has a missing value.
fn synthetic_rows() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut text = String::new();
    for i in 0..40 {
        let y = i % 2;
        let a: f64 = rng.gen_range(0.0..10.0) + 4.0 * y as f64;
        let b: f64 = rng.gen_range(0.0..10.0) - 3.0 * y as f64;
        let c = ["x", "y", "z"][rng.gen_range(0..3)];
        text.push_str(&format!("{a},{b},{c},{y}\n"));
    }
    text.push_str("1.0,?,x,0\n");
    text
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new(data: &str, extra_config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        fs::write(root.join("schema.toml"), SCHEMA).unwrap();
        fs::write(root.join("data.csv"), data).unwrap();
        fs::write(
            root.join("run.toml"),
            format!("data_path = \"data.csv\"\nschema_path = \"schema.toml\"\n{extra_config}"),
        )
        .unwrap();
        Self { _dir: dir, root }
    }

    fn config(&self) -> ExperimentConfig {
        ExperimentConfig::load(&self.root.join("run.toml")).unwrap()
    }

    fn topmix(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_topmix"))
            .arg("--config")
            .arg(self.root.join("run.toml"))
            .args(args)
            .env("RUST_LOG", "info")
            .output()
            .unwrap()
    }

    fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.root.join(rel)).unwrap()
    }
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

const NUMERIC_SCHEMA: &str = "[[attributes]]\nname = \"a\"\nkind = \"numeric\"\n\
                              [[attributes]]\nname = \"b\"\nkind = \"numeric\"\n\
                              [target]\nname = \"y\"\npositive_rule = { kind = \"greater_than\", threshold = 0.0 }\n";

#[test]
fn diagrams_on_two_rows() {
    let fx = Fixture::new("1,2,0\n2,1,1\n", "");
    fs::write(fx.root.join("schema.toml"), NUMERIC_SCHEMA).unwrap();
    ok(&fx.topmix(&["diagrams"]));
    let text = fx.read("out/diagrams.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,dimension,birth,death");
    // Two columns, so three points and three pairs per row.
    assert_eq!(lines.len(), 1 + 2 * 3);
    for row in ["0", "1"] {
        let deaths: Vec<f64> = lines[1..]
            .iter()
            .filter(|l| l.split(',').next() == Some(row))
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(deaths.len(), 3);
        assert!(deaths.windows(2).all(|w| w[0] <= w[1]));
    }
    let manifest = fx.read("cache/full.diagrams.manifest");
    assert!(manifest.contains("maxscale="));
    assert!(manifest.contains("config_hash="));
}

#[test]
fn distances_are_byte_identical_across_runs() {
    let fx = Fixture::new(&synthetic_rows(), "");
    ok(&fx.topmix(&["distances", "--threads", "1"]));
    let first = fx.read("out/distances.csv");
    fs::remove_dir_all(fx.root.join("cache")).unwrap();
    ok(&fx.topmix(&["distances", "--threads", "3"]));
    assert_eq!(fx.read("out/distances.csv"), first);
    assert_eq!(first.lines().count(), 40);
}

#[test]
fn zero_symmetry_vector_cannot_tell_swapped_records_apart() {
    // Two numeric columns only: the rows standardize to (-1, 1) and (1, -1),
    // which are reflections of each other.
    let distance = |sv: SymmetryVectorSpec| {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("s.toml"), NUMERIC_SCHEMA).unwrap();
        fs::write(dir.path().join("d.csv"), "1,2,0\n2,1,1\n").unwrap();
        let mut cfg = ExperimentConfig::new(dir.path().join("d.csv"), dir.path().join("s.toml"));
        cfg.cache_dir = dir.path().join("cache");
        cfg.out_dir = dir.path().join("out");
        cfg.symmetry_vector = sv;
        run_distances(cfg).unwrap();
        fs::read_to_string(dir.path().join("out/distances.csv")).unwrap()
    };
    assert_eq!(distance(SymmetryVectorSpec::Zero), "0,0\n0,0\n");
    let shifted = distance(SymmetryVectorSpec::Default);
    let d: f64 = shifted
        .lines()
        .next()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(d > 0.0, "{shifted}");
    let explicit = distance(SymmetryVectorSpec::Explicit { values: vec![5.0, 6.0] });
    assert_eq!(explicit, shifted);
}

#[test]
fn inspect_lists_nearest_training_rows_in_distance_order() {
    let fx = Fixture::new(&synthetic_rows(), "");
    ok(&fx.topmix(&["distances"]));
    let dm: Vec<Vec<f64>> = fx
        .read("out/distances.csv")
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let cfg = fx.config();
    let labels = Pipeline::load(cfg.clone()).unwrap().labels().to_vec();
    let split = hold_out_split(&labels, &cfg.split).unwrap();

    for row in [0usize, 7, 39] {
        let out = ok(&fx.topmix(&["inspect", "--row", &row.to_string(), "--k", "5"]));
        assert!(out.contains("cloud: 6 points in dimension 5"), "{out}");
        let listed: Vec<(usize, f64)> = out
            .lines()
            .skip_while(|l| *l != "rank,row,label,distance")
            .skip(1)
            .take_while(|l| !l.starts_with("vote"))
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[1].parse().unwrap(), f[3].parse().unwrap())
            })
            .collect();
        let mut expected: Vec<(usize, f64)> = split
            .train
            .iter()
            .filter(|&&r| r != row)
            .map(|&r| (r, dm[row][r]))
            .collect();
        expected.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        expected.truncate(5);
        assert_eq!(listed, expected, "row {row}");
    }
}

#[test]
fn warm_classify_matches_cold_without_recomputation() {
    let fx = Fixture::new(&synthetic_rows(), "");
    let cold = run_classify(fx.config()).unwrap();
    assert_eq!((cold.diagrams_computed, cold.distances_computed), (1, 1));
    let cold_files = read_dir(&fx.root.join("out"));
    let warm = run_classify(fx.config()).unwrap();
    assert_eq!((warm.diagrams_computed, warm.distances_computed), (0, 0));
    assert_eq!(read_dir(&fx.root.join("out")), cold_files);
    let names: Vec<&str> = cold_files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "config.toml",
            "manifest.txt",
            "predictions.csv",
            "report.kv",
            "report.txt"
        ]
    );
}

#[test]
fn changing_p_recomputes_only_distances() {
    let fx = Fixture::new(&synthetic_rows(), "");
    run_classify(fx.config()).unwrap();
    let mut cfg = fx.config();
    cfg.p = 2.0;
    let run = run_classify(cfg).unwrap();
    assert_eq!((run.diagrams_computed, run.distances_computed), (0, 1));
    assert!(fx.read("cache/full.distances.manifest").contains("p=2"));
}

#[test]
fn stale_cache_is_logged_and_recomputed() {
    let fx = Fixture::new(&synthetic_rows(), "");
    ok(&fx.topmix(&["distances"]));
    let out = fx.topmix(&["distances", "--maxscale-safety", "2"]);
    ok(&out);
    let log = String::from_utf8_lossy(&out.stderr);
    assert!(log.contains("stale"), "{log}");
    assert!(log.contains("stage distances"), "{log}");
    assert!(fx.read("cache/full.diagrams.manifest").contains("safety=2"));
}

#[test]
fn overrides_reach_the_report() {
    let fx = Fixture::new(&synthetic_rows(), "");
    let out = ok(&fx.topmix(&["classify", "--k", "3", "--seed", "9"]));
    assert!(out.contains("seed 9"), "{out}");
    let kv = fx.read("out/report.kv");
    assert!(kv.contains("test.k=3\n") && kv.contains("test.seed=9\n"), "{kv}");
    let manifest = fx.read("out/manifest.txt");
    assert!(manifest.contains("seed=9\n") && manifest.contains("rows=40\n") && manifest.contains("dropped_rows=1\n"));
    assert_eq!(fx.read("out/predictions.csv").lines().count(), 1 + 8);
}

#[test]
fn config_hash_ignores_directories_but_not_seed() {
    let fx = Fixture::new(&synthetic_rows(), "");
    let base = Pipeline::load(fx.config()).unwrap().config_hash();
    let mut moved = fx.config();
    moved.out_dir = fx.root.join("elsewhere");
    moved.threads = 2;
    assert_eq!(Pipeline::load(moved).unwrap().config_hash(), base);
    let mut reseeded = fx.config();
    reseeded.split.seed = 1;
    assert_ne!(Pipeline::load(reseeded).unwrap().config_hash(), base);
}

#[test]
fn kfold_modes() {
    let fx = Fixture::new(&synthetic_rows(), "[split]\nmode = \"k_fold\"\nfolds = 4\nseed = 3\n");
    let pooled = run_classify(fx.config()).unwrap();
    assert_eq!(pooled.outcome.report.predictions.len(), 40);
    assert_eq!(pooled.outcome.scores.len(), 10);
    assert_eq!(pooled.outcome.report.folds.len(), 4);

    let mut nested = fx.config();
    nested.knn.selection = KSelection::Nested;
    let run = run_classify(nested).unwrap();
    assert_eq!(run.outcome.report.fold_k.len(), 4);

    let mut fixed = fx.config();
    fixed.knn.k = Some(5);
    let run = run_classify(fixed).unwrap();
    assert_eq!(run.outcome.report.k, 5);
    assert!(run.outcome.scores.is_empty());
}

#[test]
fn train_only_kfold_fits_each_fold_separately() {
    let fx = Fixture::new(
        &synthetic_rows(),
        "fit_scope = \"train_only\"\n[split]\nmode = \"k_fold\"\nfolds = 4\nseed = 3\n[knn]\nk = 3\n",
    );
    let run = run_classify(fx.config()).unwrap();
    assert_eq!(run.distances_computed, 4);
    assert_eq!(run.outcome.maxscales.len(), 4);
    assert_eq!(run.outcome.report.predictions.len(), 40);
    for i in 0..4 {
        assert!(fx.root.join(format!("cache/fold{i}.distances.csv")).exists());
    }
    let written = run_distances(fx.config()).unwrap();
    assert_eq!(written.len(), 4);

    let mut nested = fx.config();
    nested.knn.selection = KSelection::Nested;
    assert!(run_classify(nested).is_err());
}

#[test]
fn train_only_hold_out_fits_on_training_rows() {
    let fx = Fixture::new(&synthetic_rows(), "fit_scope = \"train_only\"\n");
    let run = run_classify(fx.config()).unwrap();
    assert_eq!(run.outcome.maxscales[0].0, "holdout");
    assert!(fx.root.join("cache/holdout.diagrams.csv").exists());
}

#[test]
fn errors_carry_their_stage_and_exit_nonzero() {
    let fx = Fixture::new("1,2,x,0\n1,2,w,1\n", "");
    let out = fx.topmix(&["classify"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[ingest]"));
    let err = Pipeline::load(fx.config()).err().unwrap();
    assert_eq!(err.stage(), Some(Stage::Ingest));

    // Column c never varies, so standardization fails.
    let fx = Fixture::new("1,2,x,0\n2,1,x,1\n", "");
    let p = Pipeline::load(fx.config()).unwrap();
    let fits = p.fits().unwrap();
    assert_eq!(p.distances(&fits[0]).err().unwrap().stage(), Some(Stage::Standardize));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let fx = Fixture::new("1,2,x,0\n", "");
    let out = fx.topmix(&["frobnicate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bundled_configs_and_schema_load() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let text = fs::read_to_string(root.join("data/cleveland.schema.toml")).unwrap();
    let schema = SchemaSpec::from_toml_str(&text).unwrap();
    assert_eq!(SchemaSpec::from_toml_str(&schema.to_toml_string()).unwrap(), schema);

    let hold_out = ExperimentConfig::load(&root.join("configs/cleveland.toml")).unwrap();
    assert_eq!(hold_out.split.mode, SplitMode::default_hold_out());
    // The bundled hold-out config spells out the defaults.
    assert_eq!(hold_out.canonical(), ExperimentConfig::new("d", "s").canonical());
    let kfold = ExperimentConfig::load(&root.join("configs/cleveland-kfold.toml")).unwrap();
    assert_eq!(
        kfold.split,
        SplitSpec {
            mode: SplitMode::KFold { folds: 10 },
            seed: 0,
            stratified: false
        }
    );
    assert_eq!(kfold.knn.k, Some(16));
    assert!(hold_out.data_path.exists() && kfold.schema_path.exists());
}
