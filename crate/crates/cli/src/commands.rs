use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::Utc;

use phishlens::dataset::synth::{generate, SynthConfig};
use phishlens::dataset::{
    extract_all, extract_url, ingest_feed, load_labeled, load_matrix, save_labeled, save_matrix,
    ExtractConfig, FeatureRow,
};
use phishlens::ml::cv::{default_grid, grid_search, parse_grid, Grid};
use phishlens::ml::{evaluate, load_model, save_model, train, Metrics, MetricsSummary, ModelKind};
use phishlens::reputation::ReputationConfig;
use phishlens::Label;

use crate::args::*;
use crate::config::{default_history_dir, EvidenceOptions, FileConfig};
use crate::error::{CliError, EXIT_DECEPTIVE, EXIT_OK};
use crate::history::{read_history, HistoryLog, DEFAULT_MAX_BYTES};
use crate::service::{
    self, AppState, ServeOptions, DEFAULT_DEADLINE, DEFAULT_HISTORY_LIMIT, DEFAULT_PORT,
};
use crate::verdict::{Class, Verdict};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_FOLDS: usize = 10;

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Extract(a) => extract(a, &cfg),
        Command::Train(a) => train_cmd(a, &cfg),
        Command::Evaluate(a) => evaluate_cmd(a, &cfg),
        Command::Predict(a) => predict(a, &cfg),
        Command::Serve(a) => serve(a, &cfg),
        Command::History(a) => history(a, &cfg),
        Command::Synth(a) => synth(a, &cfg),
    }
}

fn evidence_options(a: &EvidenceArgs, cfg: &FileConfig) -> EvidenceOptions {
    EvidenceOptions {
        offline: a.offline || cfg.offline.unwrap_or(false),
        evidence_dir: a.evidence_dir.clone().or_else(|| cfg.evidence_dir.clone()),
        cache_dir: a.cache_dir.clone().or_else(|| cfg.cache_dir.clone()),
        rank_snapshot: a
            .rank_snapshot
            .clone()
            .or_else(|| cfg.rank_snapshot.clone()),
        timeout: a.timeout_ms.or(cfg.timeout_ms).map(Duration::from_millis),
    }
}

fn extract_config(a: &EvidenceArgs, cfg: &FileConfig, parallel: usize) -> ExtractConfig {
    ExtractConfig {
        parallelism: parallel,
        reputation: ReputationConfig {
            web_traffic_literal: a.web_traffic_literal || cfg.web_traffic_literal.unwrap_or(false),
        },
        ..Default::default()
    }
}

fn model_path(flag: &Option<PathBuf>, cfg: &FileConfig) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| cfg.model.clone())
        .ok_or_else(|| CliError::usage("--model is required"))
}

fn ingest(a: IngestArgs) -> Result<u8, CliError> {
    let label: Label = match a.label.as_str() {
        "phish" | "phishing" => Label::Phishing,
        "legit" | "legitimate" => Label::Legitimate,
        other => {
            return Err(CliError::usage(format!(
                "--label must be phish or legit, not {other:?}"
            )))
        }
    };
    let items = ingest_feed(&a.feed, label, a.limit)?;
    save_labeled(&items, &a.out)?;
    println!("ingested {} urls", items.len());
    Ok(EXIT_OK)
}

fn extract(a: ExtractArgs, cfg: &FileConfig) -> Result<u8, CliError> {
    let items = load_labeled(&a.input)?;
    let evidence = evidence_options(&a.evidence, cfg).build()?;
    let xcfg = extract_config(&a.evidence, cfg, a.parallel.or(cfg.parallel).unwrap_or(0));
    let (rows, report) = extract_all(&items, evidence.as_ref(), &xcfg)?;
    for (url, why) in &report.skipped {
        eprintln!("skipped {url}: {why}");
    }
    save_matrix(&rows, &a.out)?;
    println!("{report}");
    Ok(EXIT_OK)
}

const REPORT_HEADER: [&str; 17] = [
    "scope",
    "Classifier",
    "params",
    "folds",
    "Accuracy",
    "Precision",
    "Recall",
    "F1-score",
    "Accuracy_std",
    "Precision_std",
    "Recall_std",
    "F1-score_std",
    "Macro_Precision",
    "Macro_Recall",
    "Macro_F1",
    "best",
    "model_id",
];

fn cv_record(kind: ModelKind, params: &str, s: &MetricsSummary, best: bool) -> Vec<String> {
    vec![
        "cv".into(),
        kind.display_name().into(),
        params.into(),
        s.folds.to_string(),
        s.accuracy.to_string(),
        s.precision.to_string(),
        s.recall.to_string(),
        s.f1.to_string(),
        s.accuracy_std.to_string(),
        s.precision_std.to_string(),
        s.recall_std.to_string(),
        s.f1_std.to_string(),
        s.macro_precision.to_string(),
        s.macro_recall.to_string(),
        s.macro_f1.to_string(),
        if best { "1" } else { "0" }.into(),
        String::new(),
    ]
}

/// One row for metrics on a single pass (training fit or evaluation).
fn point_record(
    scope: &str,
    kind: ModelKind,
    params: &str,
    m: &Metrics,
    model_id: &str,
) -> Vec<String> {
    vec![
        scope.into(),
        kind.display_name().into(),
        params.into(),
        String::new(),
        m.accuracy.to_string(),
        m.precision.to_string(),
        m.recall.to_string(),
        m.f1.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        m.macro_precision.to_string(),
        m.macro_recall.to_string(),
        m.macro_f1.to_string(),
        String::new(),
        model_id.into(),
    ]
}

fn write_report(path: &Path, records: &[Vec<String>]) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::data(format!("report {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(REPORT_HEADER).map_err(fail)?;
    for r in records {
        w.write_record(r).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| CliError::data(format!("report {}: {e}", path.display())))
}

fn pm(mean: f64, std: f64) -> String {
    format!("{mean:.4}±{std:.4}")
}

fn train_cmd(a: TrainArgs, cfg: &FileConfig) -> Result<u8, CliError> {
    let kinds: Vec<ModelKind> = if a.model_kind.eq_ignore_ascii_case("all") {
        ModelKind::ALL.to_vec()
    } else {
        vec![a.model_kind.parse().map_err(CliError::usage)?]
    };
    let grid_spec = a
        .grid
        .clone()
        .or_else(|| cfg.grid.clone())
        .unwrap_or_else(|| "default".into());
    let custom: Option<Grid> = if grid_spec == "default" {
        None
    } else {
        if kinds.len() > 1 {
            return Err(CliError::usage(
                "a grid file applies to one model kind; pick one with --model-kind",
            ));
        }
        let text = std::fs::read_to_string(&grid_spec)
            .map_err(|e| CliError::usage(format!("grid {grid_spec}: {e}")))?;
        Some(parse_grid(&text)?)
    };
    let seed = a.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let folds = a.folds.or(cfg.folds).unwrap_or(DEFAULT_FOLDS);
    if folds < 2 {
        return Err(CliError::usage("--folds must be at least 2"));
    }

    let rows = load_matrix(&a.matrix)?;
    if kinds.len() > 1 {
        std::fs::create_dir_all(&a.out)
            .map_err(|e| CliError::data(format!("{}: {e}", a.out.display())))?;
    }

    let mut records = Vec::new();
    println!(
        "{:<20} {:<72} {:>15} {:>15} {:>15} {:>15}",
        "Classifier", "params", "Accuracy", "Precision", "Recall", "F1-score"
    );
    for kind in kinds.iter().copied() {
        let grid = custom.clone().unwrap_or_else(|| default_grid(kind));
        let result = grid_search(&rows, kind, &grid, folds, seed)?;
        for (i, row) in result.table.iter().enumerate() {
            let s = &row.cv.summary;
            let params = row.config.params.describe();
            let best = i == result.best;
            println!(
                "{:<20} {:<72} {:>15} {:>15} {:>15} {:>15}{}",
                kind.display_name(),
                params,
                pm(s.accuracy, s.accuracy_std),
                pm(s.precision, s.precision_std),
                pm(s.recall, s.recall_std),
                pm(s.f1, s.f1_std),
                if best { "  *" } else { "" }
            );
            records.push(cv_record(kind, &params, s, best));
        }

        let best = result.best_row();
        let mut model = train(&rows, &best.config)?;
        model.metadata.cv_metrics = Some(best.cv.summary);
        let out = if kinds.len() > 1 {
            a.out.join(format!("{kind}.model"))
        } else {
            a.out.clone()
        };
        let id = save_model(&model, &out)?;
        records.push(point_record(
            "train",
            kind,
            &best.config.params.describe(),
            &model.metadata.train_metrics,
            &id,
        ));
        println!("saved {kind} model {id} to {}", out.display());
    }
    if let Some(report) = &a.report {
        write_report(report, &records)?;
    }
    Ok(EXIT_OK)
}

fn evaluate_cmd(a: EvaluateArgs, cfg: &FileConfig) -> Result<u8, CliError> {
    let rows = load_matrix(&a.matrix)?;
    let (model, id) = load_model(&model_path(&a.model, cfg)?)?;
    let m = evaluate(&model, &rows)?;
    let c = m.confusion;
    println!("Classifier       {}", model.kind().display_name());
    println!("model_id         {id}");
    println!("rows             {}", rows.len());
    println!("Accuracy         {:.4}", m.accuracy);
    println!("Precision        {:.4}", m.precision);
    println!("Recall           {:.4}", m.recall);
    println!("F1-score         {:.4}", m.f1);
    println!("Macro_Precision  {:.4}", m.macro_precision);
    println!("Macro_Recall     {:.4}", m.macro_recall);
    println!("Macro_F1         {:.4}", m.macro_f1);
    println!(
        "confusion        tp={} fp={} tn={} fn={}",
        c.tp, c.fp, c.tn, c.fn_
    );
    if let Some(report) = &a.report {
        let params = model.metadata.config.params.describe();
        write_report(
            report,
            &[point_record("eval", model.kind(), &params, &m, &id)],
        )?;
    }
    Ok(EXIT_OK)
}

fn predict(a: PredictArgs, cfg: &FileConfig) -> Result<u8, CliError> {
    let url = a.url.trim();
    phishlens::parse_url(url)?;
    let (model, id) = load_model(&model_path(&a.model, cfg)?)?;
    let evidence = evidence_options(&a.evidence, cfg).build()?;
    let started = Instant::now();
    let x = extract_url(url, evidence.as_ref(), &extract_config(&a.evidence, cfg, 1))?;
    let v = Verdict::new(
        url,
        x.features,
        model.predict(&x.features),
        &id,
        started.elapsed().as_secs_f64() * 1000.0,
        Utc::now(),
    );
    println!("{}\t{}\t{:.6}", v.url, v.class, v.score);
    Ok(match v.class {
        Class::Safe => EXIT_OK,
        Class::Deceptive => EXIT_DECEPTIVE,
    })
}

fn serve(a: ServeArgs, cfg: &FileConfig) -> Result<u8, CliError> {
    let model_path = model_path(&a.model, cfg)?;
    let host = a
        .host
        .clone()
        .or_else(|| cfg.host.clone())
        .unwrap_or_else(|| Ipv4Addr::LOCALHOST.to_string());
    let host: IpAddr = host
        .parse()
        .map_err(|_| CliError::usage(format!("--host {host:?} is not an IP address")))?;
    let port = a.port.or(cfg.port).unwrap_or(DEFAULT_PORT);
    let history_dir = a
        .history_dir
        .clone()
        .or_else(|| cfg.history_dir.clone())
        .unwrap_or_else(default_history_dir);
    let max_bytes = a
        .history_max_bytes
        .or(cfg.history_max_bytes)
        .unwrap_or(DEFAULT_MAX_BYTES);
    let deadline = a
        .deadline_ms
        .or(cfg.deadline_ms)
        .map_or(DEFAULT_DEADLINE, Duration::from_millis);
    let mut allow_origins = a.allow_origin.clone();
    if allow_origins.is_empty() {
        if let Some(o) = cfg.allow_origin.clone() {
            allow_origins = o.into_vec();
        }
    }

    let evidence = evidence_options(&a.evidence, cfg).build()?;
    let history = HistoryLog::open(&history_dir, max_bytes)
        .map_err(|e| CliError::data(format!("history dir {}: {e}", history_dir.display())))?;
    let state = Arc::new(AppState::new(
        evidence,
        extract_config(&a.evidence, cfg, 1),
        deadline,
        Arc::new(history),
    ));
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(CliError::internal)?;
    let opts = ServeOptions {
        addr: SocketAddr::new(host, port),
        model_path,
        allow_origins,
    };
    rt.block_on(service::serve(state, opts)).map_err(|e| {
        match e.downcast::<CliError>() {
            Ok(c) => c,
            Err(e) => match e.downcast_ref::<std::io::Error>() {
                // A taken port is an operator problem, not a crash.
                Some(io) if io.kind() == std::io::ErrorKind::AddrInUse => {
                    CliError::usage(e.to_string())
                }
                _ => CliError::internal(e),
            },
        }
    })?;
    Ok(EXIT_OK)
}

fn history(a: HistoryArgs, cfg: &FileConfig) -> Result<u8, CliError> {
    let dir = a
        .history_dir
        .clone()
        .or_else(|| cfg.history_dir.clone())
        .unwrap_or_else(default_history_dir);
    let limit = a.limit.or(cfg.limit).unwrap_or(DEFAULT_HISTORY_LIMIT);
    let entries = read_history(&dir, limit)
        .map_err(|e| CliError::data(format!("history dir {}: {e}", dir.display())))?;
    if a.json {
        for e in &entries {
            println!("{}", serde_json::to_string(e).map_err(CliError::internal)?);
        }
        return Ok(EXIT_OK);
    }
    if entries.is_empty() {
        println!("no history in {}", dir.display());
        return Ok(EXIT_OK);
    }
    println!(
        "{:<25} {:<9} {:<10} {:>7}  url",
        "recorded", "action", "class", "score"
    );
    for e in &entries {
        println!(
            "{:<25} {:<9} {:<10} {:>7.4}  {}",
            e.recorded_at.format("%Y-%m-%dT%H:%M:%SZ"),
            e.user_action.as_str(),
            e.verdict.class.as_str(),
            e.verdict.score,
            e.verdict.url
        );
    }
    Ok(EXIT_OK)
}

fn synth(a: SynthArgs, cfg: &FileConfig) -> Result<u8, CliError> {
    if !(0.0..=1.0).contains(&a.phishing_fraction) || !(0.0..=1.0).contains(&a.label_noise) {
        return Err(CliError::usage(
            "--phishing-fraction and --label-noise must lie in [0, 1]",
        ));
    }
    let mut rows: Vec<FeatureRow> = match &a.prepend {
        Some(p) => load_matrix(p)?,
        None => Vec::new(),
    };
    let defaults = SynthConfig::default();
    rows.extend(generate(&SynthConfig {
        rows: a.rows,
        phishing_fraction: a.phishing_fraction,
        label_noise: a.label_noise,
        seed: a.seed.or(cfg.seed).unwrap_or(defaults.seed),
    }));
    save_matrix(&rows, &a.out)?;
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(EXIT_OK)
}
