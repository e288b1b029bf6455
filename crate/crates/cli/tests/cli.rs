//! Exit codes and file contracts of the `phishlens` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::Utc;
use phishlens::ml::Prediction;
use phishlens::{FeatureVector, Label};
use phishlens_cli::history::HistoryLog;
use phishlens_cli::{UserAction, Verdict};

const BIN: &str = env!("CARGO_BIN_EXE_phishlens");

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/corpus")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PHISHLENS_CONFIG")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ingest_counts_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    let feed = dir.path().join("feed.txt");
    let text: String = (0..100)
        .map(|i| format!("http://site{i}.example/page\n"))
        .collect();
    fs::write(&feed, text).unwrap();
    let out = dir.path().join("urls.csv");

    let o = run(&[
        "ingest",
        "--feed",
        s(&feed),
        "--label",
        "phish",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "ingested 100 urls");

    let o = run(&[
        "ingest",
        "--feed",
        s(&feed),
        "--label",
        "legit",
        "--out",
        s(&out),
        "--limit",
        "10",
    ]);
    assert_eq!(stdout(&o).trim(), "ingested 10 urls");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 11);

    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let o = run(&[
        "ingest",
        "--feed",
        s(&empty),
        "--label",
        "phish",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "ingest",
        "--feed",
        "/no/such/feed",
        "--label",
        "phish",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "ingest",
        "--feed",
        s(&feed),
        "--label",
        "maybe",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_is_order_preserving_and_needs_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let urls = corpus().join("urls.csv");
    let mut outs = Vec::new();
    for par in ["1", "8"] {
        let out = dir.path().join(format!("m{par}.csv"));
        let o = run(&[
            "extract",
            "--in",
            s(&urls),
            "--out",
            s(&out),
            "--offline",
            "--evidence-dir",
            s(&corpus()),
            "--parallel",
            par,
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).starts_with("extracted 40/40 urls"));
        outs.push(fs::read(out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    assert_eq!(
        outs[0],
        fs::read(corpus().join("golden_matrix.csv")).unwrap()
    );

    let out = dir.path().join("x.csv");
    for args in [
        vec!["--offline", "--evidence-dir", "/no/such/dir"],
        vec!["--offline"],
        vec!["--evidence-dir", s(&corpus())],
    ] {
        let mut full = vec!["extract", "--in", s(&urls), "--out", s(&out)];
        full.extend(args.iter().copied());
        assert_eq!(run(&full).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn train_rejects_single_class_and_bad_grids() {
    let dir = tempfile::tempdir().unwrap();
    let golden = fs::read_to_string(corpus().join("golden_matrix.csv")).unwrap();
    let mut lines = golden.lines();
    let header = lines.next().unwrap();
    let phish: String = lines
        .filter(|l| l.ends_with(",1"))
        .map(|l| format!("{l}\n"))
        .collect();
    let one = dir.path().join("one.csv");
    fs::write(&one, format!("{header}\n{phish}")).unwrap();
    let out = dir.path().join("m.model");

    let o = run(&[
        "train",
        "--matrix",
        s(&one),
        "--model-kind",
        "nb",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SingleClassData"));

    let grid = dir.path().join("grid.txt");
    fs::write(&grid, "smoothing = -1\n").unwrap();
    let m = corpus().join("golden_matrix.csv");
    let o = run(&[
        "train",
        "--matrix",
        s(&m),
        "--model-kind",
        "nb",
        "--grid",
        s(&grid),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "train",
        "--matrix",
        s(&m),
        "--model-kind",
        "all",
        "--grid",
        s(&grid),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "train",
        "--matrix",
        s(&m),
        "--model-kind",
        "svm",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn report_row(path: &Path, scope: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[1], "Classifier");
    let metric_cols: Vec<&str> = headers.iter().skip(4).take(4).collect();
    assert_eq!(metric_cols, ["Accuracy", "Precision", "Recall", "F1-score"]);
    rdr.records()
        .map(|r| r.unwrap())
        .find(|r| &r[0] == scope)
        .unwrap()
        .iter()
        .map(str::to_string)
        .collect()
}

#[test]
fn evaluate_reproduces_the_training_row() {
    let dir = tempfile::tempdir().unwrap();
    let m = corpus().join("golden_matrix.csv");
    let model = dir.path().join("lr.model");
    let report = dir.path().join("train.csv");
    let grid = dir.path().join("grid.txt");
    fs::write(&grid, "# one point\nlearning_rate = 0.1\nl2 = 0.001\n").unwrap();
    let o = run(&[
        "train",
        "--matrix",
        s(&m),
        "--model-kind",
        "logistic",
        "--grid",
        s(&grid),
        "--seed",
        "3",
        "--folds",
        "5",
        "--out",
        s(&model),
        "--report",
        s(&report),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("Logistic Regression"));

    let eval = dir.path().join("eval.csv");
    let o = run(&[
        "evaluate",
        "--matrix",
        s(&m),
        "--model",
        s(&model),
        "--report",
        s(&eval),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Accuracy"));

    let (t, e) = (report_row(&report, "train"), report_row(&eval, "eval"));
    assert_eq!(t[1..], e[1..]);
    let cv = report_row(&report, "cv");
    assert_eq!(cv[3], "5");
    assert_eq!(cv[15], "1");
}

#[test]
fn predict_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("rf.model");
    let grid = dir.path().join("grid.txt");
    fs::write(&grid, "n_trees = 25\n").unwrap();
    let m = corpus().join("golden_matrix.csv");
    let o = run(&[
        "train",
        "--matrix",
        s(&m),
        "--model-kind",
        "rf",
        "--grid",
        s(&grid),
        "--folds",
        "4",
        "--out",
        s(&model),
    ]);
    assert_eq!(o.status.code(), Some(0));

    let ev = corpus();
    let pred = |url: &str| {
        run(&[
            "predict",
            "--url",
            url,
            "--model",
            s(&model),
            "--offline",
            "--evidence-dir",
            s(&ev),
        ])
    };
    let phish = "http://paypal-secure-login.com/webscr/cmd=login";
    let o = pred(phish);
    assert_eq!(o.status.code(), Some(10));
    let line = stdout(&o);
    let cols: Vec<&str> = line.trim_end().split('\t').collect();
    assert_eq!(cols[..2], [phish, "deceptive"]);
    assert!(cols[2].parse::<f64>().unwrap() >= 0.5);

    let o = pred("https://www.wikipedia.org/");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\tsafe\t"));

    assert_eq!(pred("http://exa mple.com/").status.code(), Some(2));
    assert_eq!(
        run(&[
            "predict",
            "--url",
            phish,
            "--model",
            "/no/model",
            "--offline",
            "--evidence-dir",
            s(&ev)
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(run(&["predict"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("nb.model");
    let m = corpus().join("golden_matrix.csv");
    let o = run(&[
        "train",
        "--matrix",
        s(&m),
        "--model-kind",
        "nb",
        "--out",
        s(&model),
    ]);
    assert_eq!(o.status.code(), Some(0));

    let cfg = dir.path().join("phishlens.toml");
    fs::write(
        &cfg,
        format!(
            "model = {:?}\noffline = true\nevidence-dir = {:?}\n",
            s(&model),
            s(&corpus())
        ),
    )
    .unwrap();
    let o = Command::new(BIN)
        .args(["predict", "--url", "https://www.wikipedia.org/"])
        .env("PHISHLENS_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    fs::write(&cfg, "modle = 'typo'\n").unwrap();
    let o = Command::new(BIN)
        .args(["history", "--history-dir", s(dir.path())])
        .env("PHISHLENS_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn history_lists_newest_first() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["history", "--history-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("no history"));

    let log = HistoryLog::open(dir.path(), 1 << 20).unwrap();
    for (i, action) in [UserAction::Visited, UserAction::Declined, UserAction::None]
        .into_iter()
        .enumerate()
    {
        let v = Verdict::new(
            &format!("http://h{i}.example/"),
            FeatureVector::default(),
            Prediction {
                label: Label::Legitimate,
                score: 0.25,
            },
            "m",
            1.0,
            Utc::now(),
        );
        log.append(v, action).unwrap();
    }
    let o = run(&["history", "--history-dir", s(dir.path()), "--limit", "2"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("none") && lines[1].ends_with("http://h2.example/"));
    assert!(lines[2].contains("declined") && lines[2].ends_with("http://h1.example/"));

    let o = run(&["history", "--history-dir", s(dir.path()), "--json"]);
    assert_eq!(stdout(&o).lines().count(), 3);
}
