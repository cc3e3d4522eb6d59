use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use seqcsg::cli::{run, RunManifest, EXIT_CONFIG, EXIT_DATA, EXIT_NOTHING_TO_VISUALIZE, EXIT_OK, LOCK_FILE};
use seqcsg::corpus::{load_scene_graphs, load_split, SplitName};
use seqcsg::harness::parse_table;
use seqcsg::viz::HeatmapWeights;

fn seqcsg(args: &[&str]) -> i32 {
    run(std::iter::once("seqcsg").chain(args.iter().copied()))
}

/// Writes a small generated dataset as `<root>/demo` and returns the root.
fn synth(dir: &Path) -> PathBuf {
    let root = dir.join("data");
    let out = root.join("demo");
    assert_eq!(
        seqcsg(&[
            "synth",
            "--out",
            out.to_str().unwrap(),
            "--sizes",
            "12,6,6",
            "--feature-dim",
            "4"
        ]),
        EXIT_OK
    );
    root
}

fn data_args(root: &Path) -> Vec<String> {
    vec![
        "--data-root".into(),
        root.to_str().unwrap().into(),
        "--dataset".into(),
        "demo".into(),
    ]
}

fn with(base: &[&str], root: &Path, extra: &[&str]) -> i32 {
    let mut args: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    args.extend(data_args(root));
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    seqcsg(&refs)
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_seqcsg");
    let status = Command::new(bin).arg("no-such-command").output().unwrap().status;
    assert_eq!(status.code(), Some(EXIT_CONFIG));
    let status = Command::new(bin).arg("--help").output().unwrap().status;
    assert_eq!(status.code(), Some(EXIT_OK));

    let dir = tempfile::tempdir().unwrap();
    let caps = dir.path().join("captions.jsonl");
    fs::write(
        &caps,
        "{\"image_id\":\"i\",\"caption\":\"a\"}\n{\"image_id\":\"i\",\"caption\":\"b\"}\n",
    )
    .unwrap();
    let out = Command::new(bin).arg("validate").arg(&caps).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"i\""));
}

#[test]
fn validate_clean_and_broken_data() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    assert_eq!(with(&["validate"], &root, &[]), EXIT_OK);

    let graphs = root.join("demo/scene_graphs.jsonl");
    let text = fs::read_to_string(&graphs).unwrap();
    let broken = text.replacen("\"region_id\":\"r0\"", "\"region_id\":\"r77\"", 1);
    assert_ne!(broken, text, "demo graphs should cite region r0");
    fs::write(&graphs, broken).unwrap();
    assert_eq!(with(&["validate"], &root, &[]), EXIT_DATA);
    assert_eq!(seqcsg(&["validate", graphs.to_str().unwrap()]), EXIT_DATA);
    assert_eq!(
        seqcsg(&["validate", dir.path().join("x.bin").to_str().unwrap()]),
        EXIT_CONFIG
    );
}

#[test]
fn train_eval_and_manifest_immutability() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    let run_dir = dir.path().join("run");
    let r = run_dir.to_str().unwrap();
    let train = ["train", "--out", r, "--epochs", "1", "--max-steps", "2", "--lr", "1e-3"];
    assert_eq!(with(&train, &root, &[]), EXIT_OK);
    let manifest = RunManifest::load(&run_dir).unwrap();
    assert_eq!(manifest.command, "train");
    assert_eq!(manifest.inputs.len(), 5);
    for file in manifest.artifacts.values() {
        assert!(run_dir.join(file).exists(), "{file}");
    }
    assert!(!run_dir.join(LOCK_FILE).exists());
    assert_eq!(manifest.config["train"]["epochs"], 1);

    // same inputs again: refused without --force
    assert_eq!(with(&train, &root, &[]), EXIT_CONFIG);
    assert_eq!(with(&train, &root, &["--force"]), EXIT_OK);

    let checkpoint = run_dir.join("checkpoint.json");
    let eval_dir = dir.path().join("eval");
    let eval = [
        "eval",
        "--checkpoint",
        checkpoint.to_str().unwrap(),
        "--split",
        "dev",
        "--out",
        eval_dir.to_str().unwrap(),
    ];
    assert_eq!(with(&eval, &root, &[]), EXIT_OK);
    let predictions = fs::read_to_string(eval_dir.join("predictions.jsonl")).unwrap();
    assert_eq!(predictions.lines().count(), 6);

    // fine-tune from the checkpoint; shapes must agree with the configuration
    let tuned = dir.path().join("tuned");
    let init = [
        "train",
        "--out",
        tuned.to_str().unwrap(),
        "--init",
        checkpoint.to_str().unwrap(),
        "--epochs",
        "1",
        "--max-steps",
        "1",
    ];
    assert_eq!(with(&init, &root, &[]), EXIT_OK);
    let digests = RunManifest::load(&tuned).unwrap().inputs;
    assert!(digests.iter().any(|d| d.path == checkpoint));
    let wider = dir.path().join("wider");
    let mut mismatch = init;
    mismatch[2] = wider.to_str().unwrap();
    assert_eq!(with(&mismatch, &root, &["--preset", "base"]), EXIT_CONFIG);
    let abl = dir.path().join("abl");
    assert_eq!(
        with(
            &[
                "ablate",
                "--out",
                abl.to_str().unwrap(),
                "--init",
                checkpoint.to_str().unwrap()
            ],
            &root,
            &[]
        ),
        EXIT_CONFIG
    );

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[train]\nepochz = 1\n").unwrap();
    let other = dir.path().join("other");
    assert_eq!(
        with(
            &[
                "train",
                "--out",
                other.to_str().unwrap(),
                "--config",
                bad.to_str().unwrap()
            ],
            &root,
            &[]
        ),
        EXIT_CONFIG
    );
}

#[test]
fn ablate_gives_five_rows_and_sweep_eleven() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    let ablate_dir = dir.path().join("ablate");
    let quick = ["--epochs", "1", "--max-steps", "1"];
    assert_eq!(
        with(&["ablate", "--out", ablate_dir.to_str().unwrap()], &root, &quick),
        EXIT_OK
    );
    let rows = parse_table(&fs::read_to_string(ablate_dir.join("ablation.tsv")).unwrap()).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "w/o caption",
            "w/o adjacency matrix",
            "w/o adjacency matrix & scene graph",
            "w/o prompt",
            "w/o freeze"
        ]
    );

    let sweep_dir = dir.path().join("sweep");
    assert_eq!(
        with(&["sweep", "--out", sweep_dir.to_str().unwrap()], &root, &quick),
        EXIT_OK
    );
    let table = sweep_dir.join("sweep.tsv");
    let rows = parse_table(&fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(rows.len(), 11);
    let svg = dir.path().join("sweep.svg");
    assert_eq!(
        seqcsg(&[
            "plot",
            "--table",
            table.to_str().unwrap(),
            "--output",
            svg.to_str().unwrap()
        ]),
        EXIT_OK
    );
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let too_far = dir.path().join("too-far");
    assert_eq!(
        with(
            &["sweep", "--out", too_far.to_str().unwrap(), "--k", "3,11"],
            &root,
            &quick
        ),
        EXIT_CONFIG
    );
}

#[test]
fn visualize_renders_and_refuses_image_free_samples() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    let run_dir = dir.path().join("run");
    assert_eq!(
        with(
            &[
                "train",
                "--out",
                run_dir.to_str().unwrap(),
                "--epochs",
                "1",
                "--max-steps",
                "1"
            ],
            &root,
            &[]
        ),
        EXIT_OK
    );
    let checkpoint = run_dir.join("checkpoint.json");

    // a test sample whose image has region triples
    let graphs = load_scene_graphs(root.join("demo/scene_graphs.jsonl")).unwrap();
    let test = load_split(root.join("demo/test.tsv"), SplitName::Test).unwrap();
    let sample = test
        .samples
        .iter()
        .find(|s| {
            graphs
                .records
                .iter()
                .any(|g| g.image_id == s.image_id && !g.image_object.is_empty())
        })
        .expect("a sample with regions");
    let viz_dir = dir.path().join("viz");
    let viz = [
        "visualize",
        "--checkpoint",
        checkpoint.to_str().unwrap(),
        "--sample-id",
        sample.sample_id.as_str(),
        "--out",
        viz_dir.to_str().unwrap(),
    ];
    assert_eq!(with(&viz, &root, &[]), EXIT_OK);
    let weights = HeatmapWeights::load(&viz_dir.join("weights.json")).unwrap();
    assert!(!weights.attention.is_empty());
    for s in weights.attention.row_sums.iter().flatten() {
        assert!((s - 1.0).abs() <= 1e-6);
    }
    let again = dir.path().join("again.png");
    assert_eq!(
        seqcsg(&[
            "render",
            "--weights",
            viz_dir.join("weights.json").to_str().unwrap(),
            "--output",
            again.to_str().unwrap()
        ]),
        EXIT_OK
    );
    assert_eq!(
        fs::read(&again).unwrap(),
        fs::read(viz_dir.join("heatmap.png")).unwrap()
    );

    // a sample whose image has no scene graph at all
    let mut tsv = fs::read_to_string(root.join("demo/test.tsv")).unwrap();
    tsv.push_str("lonely\tneutral\tAnn\t$T$ waves\tblank\n");
    fs::write(root.join("demo/test.tsv"), tsv).unwrap();
    let mut caps = fs::read_to_string(root.join("demo/captions.jsonl")).unwrap();
    caps.push_str("{\"image_id\":\"blank\",\"caption\":\"an empty room\"}\n");
    fs::write(root.join("demo/captions.jsonl"), caps).unwrap();
    let empty_dir = dir.path().join("viz-empty");
    let viz = [
        "visualize",
        "--checkpoint",
        checkpoint.to_str().unwrap(),
        "--sample-id",
        "lonely",
        "--out",
        empty_dir.to_str().unwrap(),
    ];
    assert_eq!(with(&viz, &root, &[]), EXIT_NOTHING_TO_VISUALIZE);
    assert!(!empty_dir.join("manifest.json").exists());
}

#[test]
fn matrix_writes_byte_block() {
    let dir = tempfile::tempdir().unwrap();
    let root = synth(dir.path());
    let bytes = dir.path().join("m.bin");
    let train = load_split(root.join("demo/train.tsv"), SplitName::Train).unwrap();
    let id = train.samples[0].sample_id.clone();
    assert_eq!(
        with(
            &["matrix", "--sample-id", &id, "--bytes", bytes.to_str().unwrap()],
            &root,
            &[]
        ),
        EXIT_OK
    );
    let block = fs::read(&bytes).unwrap();
    let n = (block.len() as f64).sqrt() as usize;
    assert_eq!(n * n, block.len());
    assert!(block.iter().all(|&b| b <= 1));
    assert!((0..n).all(|i| block[i * n + i] == 1));
    assert_eq!(with(&["matrix", "--sample-id", "nope"], &root, &[]), EXIT_DATA);
}
