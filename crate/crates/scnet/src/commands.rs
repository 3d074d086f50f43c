//! The command implementations behind the `scnet` binary. Each command reads
//! a [`RunConfig`], writes its artifacts under an output directory and
//! returns a summary.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::seq::index;
use scnet_core::baselines::{OccupancyChecker, SphereChecker};
use scnet_core::dataset::{generate_grasp_queries, generate_record, DatasetConfig, QueryBatch, QueryObject};
use scnet_core::metrics::{average_precision_free, interpolated_pr, summarize_at};
use scnet_core::net::{CollisionModel, ModelKind, StepStats, Trainer};
use scnet_core::planner::{
    audit_episode, generate_scenario, run_rearrangement, tabletop_robot, CheckerPredictor, CollisionPredictor, EpisodeLog,
    LearnedPredictor, OraclePredictor, Gripper, Scenario,
};
use scnet_core::rng::{derive_seed, substream};
use scnet_core::scene::{sample_scene, GeneratedShape};
use serde::{Deserialize, Serialize};

use crate::config::{thread_count, RunConfig, CODE_VERSION};
use crate::error::{CliError, CliResult};
use crate::formats::{decode_checkpoint, encode_checkpoint, read_dataset, write_dataset, Checkpoint, DatasetManifest, TrainingState};
use crate::report::{
    benchmark_csv, markdown, pr_csv, pr_svg, rollout_csv, timing_svg, BenchmarkReport, CheckerResult, EpisodeSummary,
    LabelAudit, ReportInput, RolloutSummary,
};

/// Collision predictor choice on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Predictor {
    Scnet,
    PointnetGrid,
    Sphere,
    Occupancy,
    Oracle,
}

impl Predictor {
    pub fn name(self) -> &'static str {
        match self {
            Predictor::Scnet => "scnet",
            Predictor::PointnetGrid => "pointnet-grid",
            Predictor::Sphere => "sphere",
            Predictor::Occupancy => "occupancy",
            Predictor::Oracle => "oracle",
        }
    }

    pub fn model_kind(self) -> Option<ModelKind> {
        match self {
            Predictor::Scnet => Some(ModelKind::SceneCollisionNet),
            Predictor::PointnetGrid => Some(ModelKind::PointnetGrid),
            _ => None,
        }
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, v: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    write_file(path, text)
}

fn jsonl(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("log records serialize")
}

/// `f(i)` for `i in 0..n` on `threads` workers, in index order.
fn parallel_map<T: Send>(n: usize, threads: usize, f: impl Fn(usize) -> CliResult<T> + Sync) -> CliResult<Vec<T>> {
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut parts: Vec<Vec<(usize, CliResult<T>)>> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..threads.min(n))
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= n {
                            break out;
                        }
                        out.push((i, f(i)));
                    }
                })
            })
            .collect();
        workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
    });
    let mut all: Vec<(usize, CliResult<T>)> = parts.iter_mut().flat_map(std::mem::take).collect();
    all.sort_by_key(|(i, _)| *i);
    all.into_iter().map(|(_, r)| r).collect()
}

/// Generator settings stored in every dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSnapshot {
    pub split: String,
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub grasp_offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    pub records: u64,
    pub queries: u64,
    pub positives: u64,
    pub positive_rate: f64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenDataSummary {
    pub code_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub datasets: Vec<DatasetEntry>,
    pub seconds: f64,
}

pub const TRAIN_DATA: &str = "train.scnq";
pub const EVAL_DATA: &str = "eval.scnq";

/// Root seed of a named dataset split.
pub fn split_seed(seed: u64, split: &str) -> u64 {
    derive_seed(seed, "dataset-split", split.bytes().fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(u64::from(b))))
}

/// Generates the train and eval query datasets, plus gripper query sets at
/// every configured offset when `data.grasp_scenes > 0`.
pub fn gen_data(cfg: &RunConfig, out: &Path) -> CliResult<GenDataSummary> {
    let start = Instant::now();
    create_dir(out)?;
    let threads = thread_count()?;
    let d = &cfg.data;
    let mut datasets = Vec::new();
    let mut write = |name: &str, records: &[QueryBatch], snapshot: GeneratorSnapshot| -> CliResult<()> {
        let path = out.join(name);
        let value = serde_json::to_value(&snapshot).map_err(|e| CliError::Data(e.to_string()))?;
        let m = write_dataset(&path, records, value).map_err(|e| CliError::format(&path, e))?;
        datasets.push(DatasetEntry {
            name: name.into(),
            path,
            records: m.count,
            queries: m.queries,
            positives: m.positives,
            positive_rate: m.positive_rate,
            sha256: m.sha256,
        });
        Ok(())
    };
    for (name, split, count) in [(TRAIN_DATA, "train", d.train_scenes), (EVAL_DATA, "eval", d.eval_scenes)] {
        let seed = split_seed(cfg.seed, split);
        let records = parallel_map(count as usize, threads, |i| Ok(generate_record(&d.dataset, seed, i as u64)?))?;
        write(name, &records, GeneratorSnapshot { split: split.into(), seed, dataset: d.dataset.clone(), grasp_offset: None })?;
    }
    if d.grasp_scenes > 0 {
        let seed = split_seed(cfg.seed, "grasp");
        let gripper = Gripper::default();
        let sets = parallel_map(d.grasp_scenes as usize, threads, |i| {
            let scene = sample_scene(&d.dataset.scene, derive_seed(seed, "grasp-scene", i as u64))?;
            let bodies = scene.bodies()?;
            let set = generate_grasp_queries(
                &scene,
                &bodies,
                &gripper,
                &d.grasp_offsets,
                d.grasps_per_object,
                d.dataset.object_points as usize,
                derive_seed(seed, "grasp-queries", i as u64),
            )?;
            Ok(set.batches)
        })?;
        for (k, &offset) in d.grasp_offsets.iter().enumerate() {
            let records: Vec<QueryBatch> = sets.iter().map(|b| b[k].clone()).filter(|b| !b.is_empty()).collect();
            let name = grasp_dataset_name(offset);
            let snapshot = GeneratorSnapshot { split: "grasp".into(), seed, dataset: d.dataset.clone(), grasp_offset: Some(offset) };
            write(&name, &records, snapshot)?;
        }
    }
    let summary = GenDataSummary {
        code_version: CODE_VERSION.into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        datasets,
        seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join("gen-data.json"), &summary)?;
    Ok(summary)
}

/// `grasp-50mm.scnq` for a 5 cm offset.
pub fn grasp_dataset_name(offset: f64) -> String {
    format!("grasp-{}mm.scnq", (offset * 1000.0).round() as i64)
}

fn load_dataset(path: &Path) -> CliResult<(Vec<QueryBatch>, DatasetManifest)> {
    read_dataset(path).map_err(|e| CliError::format(path, e))
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> CliResult<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::Config(format!("paths.{key} is not set")))
}

pub fn load_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_checkpoint(&bytes).map_err(|e| CliError::format(path, e))
}

pub fn save_checkpoint(path: &Path, c: &Checkpoint) -> CliResult<()> {
    let bytes = encode_checkpoint(c).map_err(|e| CliError::format(path, e))?;
    write_file(path, bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub code_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub model: String,
    pub start_step: u64,
    pub steps: u64,
    pub final_loss: Option<f64>,
    pub checkpoint: PathBuf,
    pub seconds: f64,
}

pub const CHECKPOINT_FILE: &str = "checkpoint.scwt";
pub const METRICS_FILE: &str = "metrics.jsonl";

/// Trains on `paths.train_data` until `train.steps` total steps, optionally
/// resuming from `paths.resume`. `kind` overrides the configured model.
pub fn train(cfg: &RunConfig, kind: Option<ModelKind>, out: &Path) -> CliResult<TrainSummary> {
    let start = Instant::now();
    let data_path = required(&cfg.paths.train_data, "train_data")?;
    let (records, _) = load_dataset(data_path)?;
    if records.is_empty() {
        return Err(CliError::Data(format!("{}: no training records", data_path.display())));
    }
    create_dir(out)?;
    let (mut trainer, train_seed) = match &cfg.paths.resume {
        Some(p) => {
            let c = load_checkpoint(p)?;
            if kind.is_some_and(|k| k != c.net.kind) {
                return Err(CliError::Config(format!("{} holds a {} model", p.display(), c.net.kind.name())));
            }
            let state = c.training.clone().ok_or_else(|| CliError::Data(format!("{} has no training state", p.display())))?;
            let model = c.model()?;
            (Trainer::resume(model, cfg.train.clone(), state.seed, state.step, state.velocity)?, state.seed)
        }
        None => {
            let mut net = cfg.net.clone();
            if let Some(k) = kind {
                net.kind = k;
            }
            let model = CollisionModel::<f32>::new(net, derive_seed(cfg.seed, "model-init", 0))?;
            let seed = derive_seed(cfg.seed, "train", 0);
            (Trainer::new(model, cfg.train.clone(), seed)?, seed)
        }
    };
    let start_step = trainer.steps_done();
    let mut lines = String::new();
    let mut last: Option<StepStats> = None;
    trainer.fit(&records, |s| {
        lines.push_str(&jsonl(s));
        lines.push('\n');
        last = Some(s.clone());
    })?;
    write_file(&out.join(METRICS_FILE), lines)?;
    let checkpoint = Checkpoint {
        net: trainer.model().config().clone(),
        params: trainer.model().params().clone(),
        training: Some(TrainingState {
            config: trainer.config().clone(),
            seed: train_seed,
            step: trainer.steps_done(),
            velocity: trainer.velocity().to_vec(),
        }),
    };
    let path = out.join(CHECKPOINT_FILE);
    save_checkpoint(&path, &checkpoint)?;
    let summary = TrainSummary {
        code_version: CODE_VERSION.into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        model: trainer.model().kind().name().into(),
        start_step,
        steps: trainer.steps_done(),
        final_loss: last.map(|s| s.full_loss),
        checkpoint: path,
        seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join("train-summary.json"), &summary)?;
    Ok(summary)
}

/// Model of the requested kind among the configured checkpoints.
pub fn find_model(cfg: &RunConfig, kind: ModelKind) -> CliResult<CollisionModel<f32>> {
    for p in &cfg.paths.checkpoints {
        let c = load_checkpoint(p)?;
        if c.net.kind == kind {
            return Ok(c.model()?);
        }
    }
    Err(CliError::Config(format!("no {} checkpoint among paths.checkpoints", kind.name())))
}

/// Scores and per-record per-query times (ms) of one checker over a dataset.
type Scored = (Vec<f32>, Vec<f64>);

fn score_model(model: &CollisionModel<f32>, records: &[QueryBatch]) -> CliResult<Scored> {
    let mut scores = Vec::new();
    let mut times = Vec::new();
    for r in records {
        let s = model.encode_scene(&r.scene_cloud)?;
        let o = model.encode_object(&r.object_cloud)?;
        let t = Instant::now();
        let out = model.classify(&s, &o, &r.transforms);
        times.push(per_query_ms(t, r.len()));
        scores.extend(out.probs);
    }
    Ok((scores, times))
}

fn per_query_ms(t: Instant, n: usize) -> f64 {
    1e3 * t.elapsed().as_secs_f64() / n.max(1) as f64
}

fn score_sphere(radius: f64, records: &[QueryBatch]) -> CliResult<Scored> {
    let c = SphereChecker::new(radius)?;
    let mut scores = Vec::new();
    let mut times = Vec::new();
    for r in records {
        let idx = c.prepare(&r.scene_cloud)?;
        let t = Instant::now();
        scores.extend(r.transforms.iter().map(|q| f32::from(u8::from(c.check(&idx, &r.object_cloud, q)))));
        times.push(per_query_ms(t, r.len()));
    }
    Ok((scores, times))
}

fn score_occupancy(pitch: f64, records: &[QueryBatch]) -> CliResult<Scored> {
    let c = OccupancyChecker::new(pitch)?;
    let mut scores = Vec::new();
    let mut times = Vec::new();
    for r in records {
        let occ = c.prepare(&r.scene_cloud);
        let t = Instant::now();
        scores.extend(r.transforms.iter().map(|q| f32::from(u8::from(c.check(&occ, &r.object_cloud, q)))));
        times.push(per_query_ms(t, r.len()));
    }
    Ok((scores, times))
}

fn generator(manifest: &DatasetManifest) -> Option<GeneratorSnapshot> {
    serde_json::from_value(manifest.config.clone()).ok()
}

/// Exact mesh labels recomputed from each record's generation metadata.
fn score_oracle(records: &[QueryBatch], manifest: &DatasetManifest) -> CliResult<Scored> {
    let g = generator(manifest).ok_or_else(|| CliError::Data("dataset manifest has no generator settings".into()))?;
    let mut scores = Vec::new();
    let mut times = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let meta = r.meta.as_ref().ok_or_else(|| CliError::Data(format!("record {i} has no generation metadata")))?;
        let bodies = sample_scene(&g.dataset.scene, meta.scene_seed)?.bodies()?;
        let object = QueryObject::new(GeneratedShape::from_instance(meta.object.clone()), meta.canonical)?;
        let t = Instant::now();
        scores.extend(r.transforms.iter().map(|q| f32::from(u8::from(bodies.collides(&object.posed(q))))));
        times.push(per_query_ms(t, r.len()));
    }
    Ok((scores, times))
}

pub const PR_POINTS: usize = 21;

pub fn checker_result(name: &str, scores: &[f32], labels: &[u8], times: &[f64], threshold: f32) -> CheckerResult {
    let s = summarize_at(scores, labels, threshold);
    let c = s.confusion;
    let n = times.len().max(1) as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    CheckerResult {
        checker: name.into(),
        queries: c.total(),
        tp: c.tp,
        fp: c.fp,
        tn: c.tn,
        fn_: c.fn_,
        accuracy: s.accuracy,
        majority_accuracy: c.majority_accuracy(),
        ap: s.ap,
        precision: s.precision,
        recall: s.recall,
        ap_free: average_precision_free(scores, labels),
        precision_free: s.precision_free,
        recall_free: s.recall_free,
        mean_ms_per_query: mean,
        std_ms_per_query: var.sqrt(),
        pr_curve: interpolated_pr(scores, labels, PR_POINTS),
    }
}

/// Re-checks `fraction` of the stored labels, drawn uniformly, against the
/// oracle. `None` when the dataset carries no generation metadata.
pub fn audit_labels(records: &[QueryBatch], manifest: &DatasetManifest, fraction: f64, seed: u64) -> CliResult<Option<LabelAudit>> {
    let Some(g) = generator(manifest) else {
        return Ok(None);
    };
    if fraction <= 0.0 || records.iter().any(|r| r.meta.is_none()) {
        return Ok(None);
    }
    let total: usize = records.iter().map(QueryBatch::len).sum();
    let k = ((total as f64 * fraction).ceil() as usize).min(total);
    let mut picked = index::sample(&mut substream(seed, "label-audit", 0), total, k).into_vec();
    picked.sort_unstable();
    let mut mismatches = 0u64;
    let mut base = 0usize;
    let mut it = picked.iter().peekable();
    for r in records {
        let mut local = Vec::new();
        while let Some(&&i) = it.peek() {
            if i >= base + r.len() {
                break;
            }
            local.push(i - base);
            it.next();
        }
        if !local.is_empty() {
            mismatches += scnet_core::dataset::audit_record(&g.dataset, r, &local)?.len() as u64;
        }
        base += r.len();
    }
    Ok(Some(LabelAudit { checked: k as u64, mismatches }))
}

/// Benchmarks the requested predictors on `paths.eval_data`. With none
/// requested, every baseline setting and every configured checkpoint runs.
pub fn eval(cfg: &RunConfig, predictors: &[Predictor], out: &Path) -> CliResult<BenchmarkReport> {
    let data_path = required(&cfg.paths.eval_data, "eval_data")?;
    let (records, manifest) = load_dataset(data_path)?;
    let labels: Vec<u8> = records.iter().flat_map(|r| r.labels.iter().copied()).collect();
    if labels.is_empty() {
        return Err(CliError::Data(format!("{}: dataset has no labeled queries", data_path.display())));
    }
    create_dir(out)?;
    let e = &cfg.eval;
    let mut runs: Vec<(String, Scored)> = Vec::new();
    let wanted = |p: Predictor| predictors.is_empty() || predictors.contains(&p);
    if wanted(Predictor::Sphere) {
        let mut radii = vec![e.sphere_radius];
        if predictors.is_empty() {
            radii.extend(&e.sphere_sweep);
        }
        for r in radii {
            runs.push((format!("sphere(r={r:.3})"), score_sphere(r, &records)?));
        }
    }
    if wanted(Predictor::Occupancy) {
        let mut pitches = vec![e.occupancy_pitch];
        if predictors.is_empty() {
            pitches.extend(&e.occupancy_sweep);
        }
        for p in pitches {
            runs.push((format!("occupancy(p={p:.3})"), score_occupancy(p, &records)?));
        }
    }
    if predictors.is_empty() {
        for p in &cfg.paths.checkpoints {
            let model = load_checkpoint(p)?.model()?;
            runs.push((model.kind().name().into(), score_model(&model, &records)?));
        }
    } else {
        for &p in predictors {
            if let Some(kind) = p.model_kind() {
                let model = find_model(cfg, kind)?;
                runs.push((kind.name().into(), score_model(&model, &records)?));
            }
        }
    }
    if predictors.contains(&Predictor::Oracle) {
        runs.push(("oracle".into(), score_oracle(&records, &manifest)?));
    }
    let results = runs.iter().map(|(n, (s, t))| checker_result(n, s, &labels, t, e.threshold)).collect();
    let report = BenchmarkReport {
        code_version: CODE_VERSION.into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        dataset: data_path.file_name().map_or_else(|| data_path.display().to_string(), |n| n.to_string_lossy().into_owned()),
        dataset_sha256: manifest.sha256.clone(),
        threshold: e.threshold,
        results,
        audit: audit_labels(&records, &manifest, e.audit_fraction, cfg.seed)?,
    };
    let suffix = if predictors.is_empty() { "all".to_string() } else { predictors.iter().map(|p| p.name()).collect::<Vec<_>>().join("+") };
    write_json(&out.join(format!("eval-{suffix}.json")), &report)?;
    Ok(report)
}

fn build_predictor(cfg: &RunConfig, p: Predictor) -> CliResult<Box<dyn CollisionPredictor>> {
    Ok(match p {
        Predictor::Oracle => Box::new(OraclePredictor::new()),
        Predictor::Sphere => Box::new(CheckerPredictor::new(Box::new(SphereChecker::new(cfg.eval.sphere_radius)?))),
        Predictor::Occupancy => Box::new(CheckerPredictor::new(Box::new(OccupancyChecker::new(cfg.eval.occupancy_pitch)?))),
        Predictor::Scnet | Predictor::PointnetGrid => {
            let kind = p.model_kind().expect("learned predictor");
            Box::new(LearnedPredictor::new(find_model(cfg, kind)?, cfg.rollout.threshold))
        }
    })
}

/// Scenario of episode `e`: the fixed scenario file, or a generated one.
pub fn episode_scenario(cfg: &RunConfig, e: u32) -> CliResult<Scenario> {
    match &cfg.paths.scenario {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|err| CliError::io(p, err))?;
            serde_json::from_str(&text).map_err(|err| CliError::Data(format!("{}: {err}", p.display())))
        }
        None => Ok(generate_scenario(&cfg.rollout.scenario, derive_seed(cfg.seed, "rollout-scenario", u64::from(e)))?),
    }
}

fn tagged(kind: &str, episode: u32, v: &impl Serialize) -> serde_json::Value {
    let mut v = serde_json::to_value(v).expect("log records serialize");
    if let serde_json::Value::Object(m) = &mut v {
        m.insert("type".into(), kind.into());
        m.insert("episode".into(), episode.into());
    }
    v
}

/// Log lines of one episode: header, each attempt's ticks followed by the
/// attempt itself, the oracle audit and the episode summary.
pub fn episode_lines(episode: u32, seed: u64, scenario: &Scenario, log: &EpisodeLog, summary: &EpisodeSummary, failures: &[usize]) -> Vec<String> {
    #[derive(Serialize)]
    struct Header<'a> {
        seed: u64,
        predictor: &'a str,
        objects: Vec<u32>,
        fixed: &'a [u32],
        targets: &'a [u32],
    }
    #[derive(Serialize)]
    struct AuditLine<'a> {
        checked: u64,
        failures: &'a [usize],
    }
    let header = Header {
        seed,
        predictor: &log.predictor,
        objects: scenario.scene.objects.iter().map(|o| o.id).collect(),
        fixed: &scenario.fixed,
        targets: &log.targets,
    };
    let mut lines = vec![jsonl(&tagged("episode", episode, &header))];
    for a in &log.attempts {
        for t in log.ticks.iter().filter(|t| t.target == a.target && t.attempt == a.attempt) {
            lines.push(jsonl(&tagged("tick", episode, t)));
        }
        lines.push(jsonl(&tagged("attempt", episode, a)));
    }
    lines.push(jsonl(&tagged("audit", episode, &AuditLine { checked: summary.audit_checked, failures })));
    lines.push(jsonl(&tagged("summary", episode, summary)));
    lines
}

/// Runs `rollout.episodes` pick-and-place episodes and audits each one with
/// the exact oracle.
pub fn rollout(cfg: &RunConfig, predictor: Predictor, out: &Path) -> CliResult<RolloutSummary> {
    create_dir(out)?;
    let robot = tabletop_robot();
    let start = Instant::now();
    let clock = move || start.elapsed().as_secs_f64();
    let mut lines = Vec::new();
    let mut episodes = Vec::new();
    let mut pred = build_predictor(cfg, predictor)?;
    for e in 0..cfg.rollout.episodes {
        let scenario = episode_scenario(cfg, e)?;
        let seed = derive_seed(cfg.seed, "rollout-episode", u64::from(e));
        let log = run_rearrangement(&robot, &scenario, &cfg.policy, pred.as_mut(), seed, &clock)?;
        let audit = audit_episode(&robot, &scenario.scene, &log)?;
        let summary = EpisodeSummary {
            episode: e,
            seed,
            objects: log.targets.len() as u32,
            attempts: log.attempts.len() as u32,
            grasps: log.grasps,
            placements: log.placements,
            audit_checked: audit.checked as u64,
            audit_failures: audit.failures.len() as u64,
            seconds: log.seconds,
            phase_seconds: log.phase_seconds.iter().map(|(p, s)| (p.name().to_string(), *s)).collect(),
        };
        lines.extend(episode_lines(e, seed, &scenario, &log, &summary, &audit.failures));
        episodes.push(summary);
    }
    let summary = RolloutSummary {
        code_version: CODE_VERSION.into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        predictor: pred.name(),
        episodes,
    };
    let mut text = lines.join("\n");
    text.push('\n');
    write_file(&out.join(format!("episodes-{}.jsonl", predictor.name())), text)?;
    write_json(&out.join(format!("rollout-{}.json", predictor.name())), &summary)?;
    Ok(summary)
}

pub const REPORT_FILES: &[&str] = &["report.md", "benchmark.csv", "pr_curves.csv", "rollout.csv", "pr_curves.svg", "timing.svg"];

/// Renders eval reports and rollout summaries into Markdown, CSV and SVG.
pub fn report(inputs: &[PathBuf], out: &Path) -> CliResult<()> {
    if inputs.is_empty() {
        return Err(CliError::Config("report needs at least one input file".into()));
    }
    let mut benches = Vec::new();
    let mut rollouts = Vec::new();
    for p in inputs {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        match serde_json::from_str::<ReportInput>(&text) {
            Ok(ReportInput::Benchmark(b)) => benches.push(b),
            Ok(ReportInput::Rollout(r)) => rollouts.push(r),
            Err(_) => return Err(CliError::Data(format!("{}: neither an eval report nor a rollout summary", p.display()))),
        }
    }
    create_dir(out)?;
    let files = [
        markdown(&benches, &rollouts),
        benchmark_csv(&benches),
        pr_csv(&benches),
        rollout_csv(&rollouts),
        pr_svg(&benches),
        timing_svg(&benches),
    ];
    for (name, body) in REPORT_FILES.iter().zip(files) {
        write_file(&out.join(name), body)?;
    }
    Ok(())
}
