//! Sweep reports: JSON, flat CSV and an SVG bar chart.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::folds::Fold;
use super::metrics::ThresholdRule;
use super::pipeline::PipelineConfig;
use super::select::{select_optimal, Candidate, ComfortRanking, TraceEntry};
use crate::dataset::{Label, SetUp, REFERENCE_SETUP};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold_id: usize,
    pub setup_name: String,
    pub positive_class: Label,
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    /// `None` for skipped folds (no positive test windows).
    pub fscore: Option<f64>,
    /// Best F-score any threshold could reach on this fold's test scores.
    pub oracle_fscore: Option<f64>,
    pub skipped: bool,
}

impl FoldResult {
    pub fn n_windows(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupSummary {
    pub setup: SetUp,
    pub n_channels: usize,
    /// Mean over scored folds; NaN (`null` in JSON) when none were scored.
    #[serde(with = "nan_as_null")]
    pub mean_fscore: f64,
    /// Population standard deviation over scored folds.
    #[serde(with = "nan_as_null")]
    pub std_fscore: f64,
    #[serde(with = "nan_as_null")]
    pub mean_oracle_fscore: f64,
    pub skipped_folds: Vec<usize>,
    pub folds: Vec<FoldResult>,
}

pub(crate) mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl SetupSummary {
    pub fn from_folds(setup: SetUp, mut folds: Vec<FoldResult>) -> Self {
        folds.sort_by_key(|f| f.fold_id);
        let scored: Vec<f64> = folds.iter().filter_map(|f| f.fscore).collect();
        let oracle: Vec<f64> = folds.iter().filter_map(|f| f.oracle_fscore).collect();
        let (mean_fscore, std_fscore) = mean_std(&scored);
        SetupSummary {
            n_channels: setup.m(),
            setup,
            mean_fscore,
            std_fscore,
            mean_oracle_fscore: mean_std(&oracle).0,
            skipped_folds: folds.iter().filter(|f| f.skipped).map(|f| f.fold_id).collect(),
            folds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub positive_class: Label,
    pub threshold_rule: ThresholdRule,
    /// Set when F-scores use the test-label oracle threshold.
    pub oracle_threshold_diagnostic: bool,
    pub reference_setup: String,
    /// Set-up names in evaluation order.
    pub setup_order: Vec<String>,
    pub per_setup: BTreeMap<String, SetupSummary>,
    pub folds: Vec<Fold>,
    pub delta: f64,
    pub selected_setup: String,
    pub selection_flagged: bool,
    pub selection_trace: Vec<TraceEntry>,
    /// Hash of the run configuration that produced this report.
    #[serde(default)]
    pub config_hash: String,
}

impl EvalReport {
    pub fn build(
        setups: &[SetUp],
        results: Vec<FoldResult>,
        positive: Label,
        cfg: &PipelineConfig,
        comfort: &ComfortRanking,
        folds: Vec<Fold>,
    ) -> Result<Self> {
        let mut grouped: BTreeMap<String, Vec<FoldResult>> = BTreeMap::new();
        for r in results {
            grouped.entry(r.setup_name.clone()).or_default().push(r);
        }
        let per_setup: BTreeMap<String, SetupSummary> = setups
            .iter()
            .map(|s| {
                let f = grouped.remove(&s.name).unwrap_or_default();
                (s.name.clone(), SetupSummary::from_folds(s.clone(), f))
            })
            .collect();

        let mut report = EvalReport {
            positive_class: positive,
            threshold_rule: cfg.eval.threshold,
            oracle_threshold_diagnostic: cfg.eval.threshold.is_oracle(),
            reference_setup: REFERENCE_SETUP.to_string(),
            setup_order: setups.iter().map(|s| s.name.clone()).collect(),
            per_setup,
            folds,
            delta: cfg.eval.delta,
            selected_setup: String::new(),
            selection_flagged: false,
            selection_trace: Vec::new(),
            config_hash: String::new(),
        };
        report.reselect(comfort, cfg.eval.delta)?;
        Ok(report)
    }

    /// Reruns the selection rule on the stored means.
    pub fn reselect(&mut self, comfort: &ComfortRanking, delta: f64) -> Result<()> {
        let candidates: Vec<Candidate> = self
            .setup_order
            .iter()
            .map(|n| {
                let s = &self.per_setup[n];
                Candidate {
                    setup: s.setup.clone(),
                    mean_fscore: if s.mean_fscore.is_nan() { 0.0 } else { s.mean_fscore },
                }
            })
            .collect();
        let sel = select_optimal(&candidates, &self.reference_setup, comfort, delta)?;
        self.delta = delta;
        self.selected_setup = sel.selected;
        self.selection_flagged = sel.flagged;
        self.selection_trace = sel.trace;
        Ok(())
    }

    pub fn summaries(&self) -> impl Iterator<Item = &SetupSummary> {
        self.setup_order.iter().map(|n| &self.per_setup[n])
    }

    pub fn all_folds(&self) -> impl Iterator<Item = &FoldResult> {
        self.summaries().flat_map(|s| s.folds.iter())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))
    }

    /// `setup,fold,positive_class,threshold,tp,fp,fn,tn,fscore`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("setup,fold,positive_class,threshold,tp,fp,fn,tn,fscore\n");
        for f in self.all_folds() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                f.setup_name,
                f.fold_id,
                f.positive_class,
                f.threshold,
                f.tp,
                f.fp,
                f.fn_,
                f.tn,
                f.fscore.map(|v| v.to_string()).unwrap_or_default()
            );
        }
        out
    }

    pub fn bar_series(&self, name: &str) -> BarSeries {
        BarSeries {
            name: name.to_string(),
            bars: self
                .summaries()
                .map(|s| (s.setup.name.clone(), s.mean_fscore, s.std_fscore))
                .collect(),
        }
    }

    /// Prints the per-set-up table and the selection trace.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "positive class: {}", self.positive_class);
        let _ = writeln!(out, "{:<10} {:>3} {:>8} {:>8} {:>8}", "setup", "m", "mean F", "std F", "oracle F");
        for s in self.summaries() {
            let _ = writeln!(
                out,
                "{:<10} {:>3} {:>8.4} {:>8.4} {:>8.4}",
                s.setup.name, s.n_channels, s.mean_fscore, s.std_fscore, s.mean_oracle_fscore
            );
        }
        let _ = writeln!(out, "selection trace:");
        for t in &self.selection_trace {
            let mark = if t.kept { "keep" } else { "drop" };
            let _ = writeln!(out, "  [{mark}] {:<10} {:<12} {}", t.setup, t.rule, t.reason);
        }
        let flag = if self.selection_flagged { " (flagged: nothing passed the gate)" } else { "" };
        let _ = writeln!(out, "selected set-up: {}{flag}", self.selected_setup);
        out
    }

    /// Writes `<stem>.json`, `<stem>.csv` and `<stem>.svg` into `dir`.
    pub fn write_all(&self, dir: &Path, stem: &str, extra: &[BarSeries]) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |ext: &str, body: String| {
            let p = dir.join(format!("{stem}.{ext}"));
            fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        write("json", self.to_json()?)?;
        write("csv", self.to_csv())?;
        let mut series = vec![self.bar_series("one-class AE")];
        series.extend(extra.iter().cloned());
        let title = format!("F-score per set-up ({} positive)", self.positive_class);
        write("svg", render_svg(&title, &series, &self.config_hash))
    }
}

/// One method's `(setup, mean, std)` bars.
#[derive(Debug, Clone, PartialEq)]
pub struct BarSeries {
    pub name: String,
    pub bars: Vec<(String, f64, f64)>,
}

const PALETTE: [&str; 4] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52"];

/// Grouped bar chart of F-scores with ±std whiskers, one group per set-up.
pub fn render_svg(title: &str, series: &[BarSeries], config_hash: &str) -> String {
    let setups: Vec<&str> = series
        .first()
        .map(|s| s.bars.iter().map(|b| b.0.as_str()).collect())
        .unwrap_or_default();
    let (w, h) = (720.0, 400.0);
    let (left, right, top, bottom) = (60.0, 20.0, 40.0, 70.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let y = |v: f64| top + plot_h * (1.0 - v.clamp(0.0, 1.0));
    let group_w = plot_w / setups.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    if !config_hash.is_empty() {
        let _ = writeln!(s, "<!-- config_hash: {config_hash} -->");
    }
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#, w / 2.0);
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{0:.1}" x2="{1}" y2="{0:.1}" stroke="#ddd"/><text x="{2}" y="{3:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.1}</text>"##,
            y(v),
            w - right,
            left - 6.0,
            y(v) + 4.0
        );
    }
    for (si, ser) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        for (gi, (name, mean, std)) in ser.bars.iter().enumerate() {
            let x0 = left + gi as f64 * group_w + group_w * 0.1 + si as f64 * bar_w;
            let m = if mean.is_finite() { *mean } else { 0.0 };
            let sd = if std.is_finite() { *std } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}"><title>{}: {name} {m:.3} ± {sd:.3}</title></rect>"#,
                y(m),
                bar_w * 0.9,
                y(0.0) - y(m),
                ser.name
            );
            let cx = x0 + bar_w * 0.45;
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
                y(m - sd),
                y(m + sd)
            );
        }
    }
    for (gi, name) in setups.iter().enumerate() {
        let cx = left + (gi as f64 + 0.5) * group_w;
        let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{name}</text>"#, h - bottom + 18.0);
    }
    for (si, ser) in series.iter().enumerate() {
        let lx = left + si as f64 * 160.0;
        let ly = h - 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{ly}" font-family="sans-serif" font-size="12">{}</text>"#,
            ly - 10.0,
            PALETTE[si % PALETTE.len()],
            lx + 16.0,
            ser.name
        );
    }
    s.push_str("</svg>\n");
    s
}
