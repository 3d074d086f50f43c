//! Benchmark and rollout summaries, and their Markdown, CSV and SVG renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Fields holding wall-clock measurements; everything else in a report or log
/// is a deterministic function of (config, seed).
pub const TIMING_FIELDS: &[&str] =
    &["mean_ms_per_query", "std_ms_per_query", "predictor_seconds", "seconds", "phase_seconds", "minutes"];

/// Replaces every timing field (at any depth) with `null`.
pub fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m.iter_mut() {
                if TIMING_FIELDS.contains(&k.as_str()) {
                    *x = serde_json::Value::Null;
                } else {
                    strip_timing(x);
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckerResult {
    pub checker: String,
    pub queries: u64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub majority_accuracy: f64,
    /// Collision as the positive class.
    pub ap: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    /// Collision-free as the positive class.
    pub ap_free: Option<f64>,
    pub precision_free: f64,
    pub recall_free: f64,
    /// Per-query classification time, excluding scene and object encoding.
    pub mean_ms_per_query: f64,
    pub std_ms_per_query: f64,
    /// Interpolated `(recall, precision)` on an even recall grid.
    pub pr_curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelAudit {
    pub checked: u64,
    pub mismatches: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkReport {
    pub code_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub dataset: String,
    pub dataset_sha256: String,
    pub threshold: f32,
    pub results: Vec<CheckerResult>,
    pub audit: Option<LabelAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSummary {
    pub episode: u32,
    pub seed: u64,
    pub objects: u32,
    pub attempts: u32,
    pub grasps: u32,
    pub placements: u32,
    pub audit_checked: u64,
    pub audit_failures: u64,
    pub seconds: f64,
    pub phase_seconds: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloutSummary {
    pub code_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub predictor: String,
    pub episodes: Vec<EpisodeSummary>,
}

impl RolloutSummary {
    pub fn objects(&self) -> u32 {
        self.episodes.iter().map(|e| e.objects).sum()
    }

    pub fn grasps(&self) -> u32 {
        self.episodes.iter().map(|e| e.grasps).sum()
    }

    pub fn placements(&self) -> u32 {
        self.episodes.iter().map(|e| e.placements).sum()
    }

    pub fn audit_failures(&self) -> u64 {
        self.episodes.iter().map(|e| e.audit_failures).sum()
    }

    pub fn audit_checked(&self) -> u64 {
        self.episodes.iter().map(|e| e.audit_checked).sum()
    }

    pub fn minutes(&self) -> f64 {
        self.episodes.iter().map(|e| e.seconds).sum::<f64>() / 60.0
    }

    /// Wall time per phase summed over episodes, in first-seen order.
    pub fn phase_seconds(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for (p, s) in self.episodes.iter().flat_map(|e| &e.phase_seconds) {
            match out.iter_mut().find(|(q, _)| q == p) {
                Some(e) => e.1 += s,
                None => out.push((p.clone(), *s)),
            }
        }
        out
    }
}

/// Any report input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportInput {
    Benchmark(BenchmarkReport),
    Rollout(RolloutSummary),
}

/// Published reference numbers shown next to desk-scale results.
pub struct Reference {
    pub checker: &'static str,
    pub accuracy: &'static str,
    pub ap: &'static str,
    pub ms_per_query: &'static str,
}

pub const BENCHMARK_REFERENCE: &[Reference] = &[
    Reference { checker: "MC+SDFO", accuracy: "70.2%", ap: "0.651", ms_per_query: "27 ± 12" },
    Reference { checker: "MC+SDFS", accuracy: "80.0%", ap: "0.781", ms_per_query: "24 ± 2" },
    Reference { checker: "MC+FCL (10x)", accuracy: "75.4%", ap: "0.824", ms_per_query: "0.49 ± 0.06" },
    Reference { checker: "MC+FCL (10x, FO)", accuracy: "83.4%", ap: "0.832", ms_per_query: "0.74 ± 0.13" },
    Reference { checker: "pointnet-grid", accuracy: "76.7%", ap: "0.928", ms_per_query: "0.026 ± 0.035" },
    Reference { checker: "scene-collision-net", accuracy: "93.2%", ap: "0.990", ms_per_query: "0.010 ± 0.002" },
];

/// Grasp benchmark reference at 0 cm / 5 cm offsets: accuracy, precision,
/// recall, time (ms).
pub const GRASP_REFERENCE: &[(&str, &str, &str, &str, &str)] = &[
    ("MC+SDFO", "90.8 / 81.2", "31.1 / 59.2", "95.4 / 98.9", "62"),
    ("MC+SDFS", "94.4 / 78.2", "32.0 / 63.2", "12.0 / 58.6", "37"),
    ("MC+FCL (10x)", "94.4 / 80.4", "27.8 / 63.6", "10.8 / 68.8", "0.27"),
    ("scene-collision-net", "92.4 / 82.7", "21.2 / 73.0", "19.3 / 71.8", "0.018"),
];

/// Simulated rearrangement reference: grasps, placements, minutes over 10
/// scenes of 10 objects.
pub const ROLLOUT_REFERENCE: &[(&str, u32, u32, u32)] = &[("MC+FCL (10x)", 109, 92, 164), ("scene-collision-net", 110, 99, 100)];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.4}"))
}

pub const BENCHMARK_CSV_HEADER: &str = "dataset,checker,queries,tp,fp,tn,fn,accuracy,majority_accuracy,ap,precision,recall,ap_free,precision_free,recall_free,mean_ms_per_query,std_ms_per_query";

pub fn benchmark_csv(reports: &[BenchmarkReport]) -> String {
    let mut s = String::from(BENCHMARK_CSV_HEADER);
    s.push('\n');
    for rep in reports {
        for r in &rep.results {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{:.6},{:.6},{},{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6}",
                csv_field(&rep.dataset),
                csv_field(&r.checker),
                r.queries,
                r.tp,
                r.fp,
                r.tn,
                r.fn_,
                r.accuracy,
                r.majority_accuracy,
                r.ap.map_or_else(String::new, |v| format!("{v:.6}")),
                r.precision,
                r.recall,
                r.ap_free.map_or_else(String::new, |v| format!("{v:.6}")),
                r.precision_free,
                r.recall_free,
                r.mean_ms_per_query,
                r.std_ms_per_query
            );
        }
    }
    s
}

pub const PR_CSV_HEADER: &str = "dataset,checker,recall,precision";

pub fn pr_csv(reports: &[BenchmarkReport]) -> String {
    let mut s = String::from(PR_CSV_HEADER);
    s.push('\n');
    for rep in reports {
        for r in &rep.results {
            for (rc, p) in &r.pr_curve {
                let _ = writeln!(s, "{},{},{rc:.4},{p:.6}", csv_field(&rep.dataset), csv_field(&r.checker));
            }
        }
    }
    s
}

pub const ROLLOUT_CSV_HEADER: &str = "predictor,episode,seed,objects,attempts,grasps,placements,audit_checked,audit_failures,minutes";

pub fn rollout_csv(rollouts: &[RolloutSummary]) -> String {
    let mut s = String::from(ROLLOUT_CSV_HEADER);
    s.push('\n');
    for r in rollouts {
        for e in &r.episodes {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{:.4}",
                csv_field(&r.predictor),
                e.episode,
                e.seed,
                e.objects,
                e.attempts,
                e.grasps,
                e.placements,
                e.audit_checked,
                e.audit_failures,
                e.seconds / 60.0
            );
        }
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn markdown(reports: &[BenchmarkReport], rollouts: &[RolloutSummary]) -> String {
    let mut s = String::from("# Collision benchmark report\n\n");
    let _ = writeln!(s, "Code version {}.\n", crate::config::CODE_VERSION);
    for rep in reports {
        let _ = writeln!(s, "## Queries: `{}`\n", rep.dataset);
        let _ = writeln!(
            s,
            "Config hash `{}`, seed {}, dataset sha256 `{}`, threshold {}.\n",
            rep.config_hash, rep.seed, rep.dataset_sha256, rep.threshold
        );
        if let Some(a) = &rep.audit {
            let _ = writeln!(s, "Label re-audit: {} of {} stored labels disagree with the oracle.\n", a.mismatches, a.checked);
        }
        s.push_str("Collision is the positive class in the first AP/precision/recall block; collision-free in the second.\n\n");
        s.push_str("| Checker | Queries | Accuracy | Majority | AP | Precision | Recall | AP (free) | Precision (free) | Recall (free) | ms / query |\n");
        s.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
        for r in &rep.results {
            let _ = writeln!(
                s,
                "| {} | {} | {:.1}% | {:.1}% | {} | {:.3} | {:.3} | {} | {:.3} | {:.3} | {:.4} ± {:.4} |",
                r.checker,
                r.queries,
                100.0 * r.accuracy,
                100.0 * r.majority_accuracy,
                opt(r.ap),
                r.precision,
                r.recall,
                opt(r.ap_free),
                r.precision_free,
                r.recall_free,
                r.mean_ms_per_query,
                r.std_ms_per_query
            );
        }
        s.push('\n');
    }
    if !reports.is_empty() {
        s.push_str("## Published reference values\n\n");
        s.push_str("Trajectory queries (1000 scene/object pairs, 2,048,000 queries, GPU timing):\n\n");
        s.push_str("| Checker | Accuracy | AP | ms / query |\n|---|---:|---:|---:|\n");
        for r in BENCHMARK_REFERENCE {
            let _ = writeln!(s, "| {} | {} | {} | {} |", r.checker, r.accuracy, r.ap, r.ms_per_query);
        }
        s.push_str("\nGrasp queries at 0 cm / 5 cm approach offsets:\n\n");
        s.push_str("| Checker | Accuracy | Precision | Recall | ms |\n|---|---:|---:|---:|---:|\n");
        for (c, a, p, r, t) in GRASP_REFERENCE {
            let _ = writeln!(s, "| {c} | {a} | {p} | {r} | {t} |");
        }
        s.push_str("\nMesh-reconstruction baselines (MC+SDF, MC+FCL) are not implemented here; their rows are reference only.\n\n");
    }
    if !rollouts.is_empty() {
        s.push_str("## Rearrangement rollouts\n\n");
        s.push_str("| Predictor | Config hash | Episodes | Objects | Grasps | Placements | Audit failures | Time (min) |\n");
        s.push_str("|---|---|---:|---:|---:|---:|---:|---:|\n");
        for r in rollouts {
            let _ = writeln!(
                s,
                "| {} | `{}` | {} | {} | {} | {} | {} / {} | {:.2} |",
                r.predictor,
                &r.config_hash[..r.config_hash.len().min(12)],
                r.episodes.len(),
                r.objects(),
                r.grasps(),
                r.placements(),
                r.audit_failures(),
                r.audit_checked(),
                r.minutes()
            );
        }
        s.push_str("\nWall time per phase (s):\n\n| Predictor |");
        let phases: Vec<String> = rollouts.iter().flat_map(|r| r.phase_seconds()).map(|(p, _)| p).fold(Vec::new(), |mut v, p| {
            if !v.contains(&p) {
                v.push(p);
            }
            v
        });
        for p in &phases {
            let _ = write!(s, " {p} |");
        }
        s.push_str("\n|---|");
        s.push_str(&"---:|".repeat(phases.len()));
        s.push('\n');
        for r in rollouts {
            let ps = r.phase_seconds();
            let _ = write!(s, "| {} |", r.predictor);
            for p in &phases {
                let v = ps.iter().find(|(q, _)| q == p).map_or(0.0, |x| x.1);
                let _ = write!(s, " {v:.2} |");
            }
            s.push('\n');
        }
        s.push_str("\nReference (10 simulated scenes × 10 objects):\n\n| Predictor | Grasps | Placements | Time (min) |\n|---|---:|---:|---:|\n");
        for (p, g, pl, t) in ROLLOUT_REFERENCE {
            let _ = writeln!(s, "| {p} | {g} | {pl} | {t} |");
        }
    }
    s
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Interpolated PR curves of every checker, one polyline each.
pub fn pr_svg(reports: &[BenchmarkReport]) -> String {
    let (w, h, m) = (480.0, 360.0, 40.0);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n");
    let _ = writeln!(s, "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", w - 2.0 * m, h - 2.0 * m);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">recall</text>", w / 2.0, h - 10.0);
    let _ = writeln!(s, "<text x=\"12\" y=\"{}\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">precision</text>", h / 2.0, h / 2.0);
    let mut k = 0;
    for rep in reports {
        for r in &rep.results {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = r
                .pr_curve
                .iter()
                .map(|(rc, p)| format!("{:.1},{:.1}", m + rc * (w - 2.0 * m), h - m - p * (h - 2.0 * m)))
                .collect();
            let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{color}\" points=\"{}\"/>", pts.join(" "));
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{} ({})</text>",
                m + 8.0,
                h - m - 8.0 - 14.0 * k as f64,
                xml(&r.checker),
                xml(&rep.dataset)
            );
            k += 1;
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Mean per-query time of every checker as horizontal bars.
pub fn timing_svg(reports: &[BenchmarkReport]) -> String {
    let rows: Vec<(String, f64)> = reports
        .iter()
        .flat_map(|rep| rep.results.iter().map(move |r| (format!("{} ({})", r.checker, rep.dataset), r.mean_ms_per_query)))
        .collect();
    let (w, bar, label) = (560.0, 18.0, 220.0);
    let h = 30.0 + bar * 1.5 * rows.len() as f64;
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max).max(1e-9);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n");
    for (i, (name, v)) in rows.iter().enumerate() {
        let y = 10.0 + bar * 1.5 * i as f64;
        let len = (w - label - 90.0) * v / max;
        let _ = writeln!(s, "<text x=\"4\" y=\"{:.1}\">{}</text>", y + 13.0, xml(name));
        let _ = writeln!(s, "<rect x=\"{label}\" y=\"{y:.1}\" width=\"{len:.1}\" height=\"{bar}\" fill=\"{}\"/>", PALETTE[i % PALETTE.len()]);
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\">{v:.4} ms</text>", label + len + 4.0, y + 13.0);
    }
    s.push_str("</svg>\n");
    s
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(name: &str) -> CheckerResult {
        CheckerResult {
            checker: name.into(),
            queries: 10,
            tp: 3,
            fp: 1,
            tn: 5,
            fn_: 1,
            accuracy: 0.8,
            majority_accuracy: 0.6,
            ap: Some(0.75),
            precision: 0.75,
            recall: 0.75,
            ap_free: None,
            precision_free: 5.0 / 6.0,
            recall_free: 5.0 / 6.0,
            mean_ms_per_query: 0.01,
            std_ms_per_query: 0.002,
            pr_curve: vec![(0.0, 1.0), (0.5, 0.8), (1.0, 0.5)],
        }
    }

    fn report() -> BenchmarkReport {
        BenchmarkReport {
            code_version: "0".into(),
            config_hash: "ab".into(),
            seed: 1,
            dataset: "eval, held out".into(),
            dataset_sha256: "cd".into(),
            threshold: 0.5,
            results: vec![result("sphere(r=0.010)"), result("scene-collision-net")],
            audit: Some(LabelAudit { checked: 20, mismatches: 0 }),
        }
    }

    #[test]
    fn csv_rows_match_header_width() {
        let reps = [report()];
        for (csv, header) in [(benchmark_csv(&reps), BENCHMARK_CSV_HEADER), (pr_csv(&reps), PR_CSV_HEADER)] {
            let width = header.split(',').count();
            let mut lines = csv.lines();
            assert_eq!(lines.next(), Some(header));
            for l in lines {
                // the dataset name is quoted because it holds a comma
                let unquoted = l.replacen("\"eval, held out\"", "x", 1);
                assert_eq!(unquoted.split(',').count(), width, "{l}");
            }
        }
    }

    #[test]
    fn inputs_deserialize_by_shape() {
        let b = serde_json::to_string(&report()).unwrap();
        assert!(matches!(serde_json::from_str::<ReportInput>(&b).unwrap(), ReportInput::Benchmark(_)));
        let r = RolloutSummary { code_version: "0".into(), config_hash: "ff".into(), seed: 0, predictor: "oracle".into(), episodes: vec![] };
        let j = serde_json::to_string(&r).unwrap();
        assert!(matches!(serde_json::from_str::<ReportInput>(&j).unwrap(), ReportInput::Rollout(_)));
    }

    #[test]
    fn timing_fields_are_stripped_everywhere() {
        let mut v = serde_json::to_value(report()).unwrap();
        strip_timing(&mut v);
        assert!(v["results"][0]["mean_ms_per_query"].is_null());
        assert_eq!(v["results"][0]["tp"], 3);
    }

    #[test]
    fn markdown_mentions_every_checker_and_reference() {
        let md = markdown(&[report()], &[]);
        assert!(md.contains("sphere(r=0.010)") && md.contains("0.990") && md.contains("0.928"));
        assert!(pr_svg(&[report()]).starts_with("<svg") && timing_svg(&[report()]).ends_with("</svg>\n"));
    }
}
