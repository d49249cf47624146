use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::tables::{AuditRow, FrequencyRow, UnivariateRow};
use super::{ExperimentError, Unit};
use crate::conllu::{LanguagePair, Mode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapRow {
    pub feature: String,
    pub weight: f64,
    pub mean_abs: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Macro-F1 on the held-out fold.
    pub score: f64,
    pub n_after_filters: usize,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub mode: Mode,
    pub lpair: LanguagePair,
    pub unit: Unit,
    pub seed: u64,
    pub k: usize,
    pub inner_k: usize,
    pub shuffled: bool,
    pub n_org: usize,
    pub n_tgt: usize,
    pub n_features: usize,
    pub n_after_filters: usize,
    pub selected: Vec<String>,
    pub fold_f1: Vec<f64>,
    pub f1_mean: f64,
    pub f1_sd: f64,
    pub pooled_f1: f64,
    pub rfecv_scores: Vec<(usize, f64)>,
    pub shap: Vec<ShapRow>,
    pub folds: Vec<FoldSummary>,
    pub frequency: Vec<FrequencyRow>,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub subset: String,
    pub n_input: usize,
    pub n_after_filters: usize,
    pub n_selected: usize,
    pub selected: Vec<String>,
    pub rho: Option<f64>,
    pub rho_p: Option<f64>,
    pub r2: Option<f64>,
    pub mae: f64,
    pub fold_r2: Vec<Option<f64>>,
    pub fold_rho: Vec<Option<f64>>,
    pub r2_mean: f64,
    pub r2_sd: f64,
    pub shap: Vec<ShapRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub mode: Mode,
    pub lpair: LanguagePair,
    pub unit: Unit,
    pub seed: u64,
    pub k: usize,
    pub inner_k: usize,
    pub shuffled: bool,
    pub n_rows: usize,
    pub n_unscored: usize,
    pub subsets: Vec<RegressionRow>,
    pub univariate: Vec<UnivariateRow>,
    pub audit: Option<Vec<AuditRow>>,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum Report {
    Classify(ClassificationReport),
    Regress(RegressionReport),
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "NA".into()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "NA".into())
}

fn file_stem(subset: &str) -> String {
    subset
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn shap_tsv(out: &mut String, prefix: Option<&str>, rows: &[ShapRow]) {
    for r in rows {
        if let Some(p) = prefix {
            let _ = write!(out, "{p}\t");
        }
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.feature,
            num(r.weight),
            num(r.mean_abs),
            num(r.mean)
        );
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses a report and rejects empty ones.
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let r: Report =
            serde_json::from_str(text).map_err(|e| ExperimentError::Report(e.to_string()))?;
        let empty = match &r {
            Report::Classify(c) => c.fold_f1.is_empty(),
            Report::Regress(g) => g.subsets.is_empty(),
        };
        if empty {
            return Err(ExperimentError::Report("report has no results".into()));
        }
        Ok(r)
    }

    pub fn set_inputs(&mut self, inputs: Vec<InputDigest>) {
        match self {
            Report::Classify(c) => c.inputs = inputs,
            Report::Regress(r) => r.inputs = inputs,
        }
    }

    /// Named TSV tables.
    pub fn tables(&self) -> Vec<(String, String)> {
        match self {
            Report::Classify(c) => {
                let mut perf = String::from(
                    "lpair\tmode\tunit\tn_org\tn_tgt\tselected/input\tf1_mean\tf1_sd\tpooled_f1\n",
                );
                let _ = writeln!(
                    perf,
                    "{}\t{}\t{}\t{}\t{}\t{}/{}\t{:.2}\t{:.2}\t{:.2}",
                    c.lpair.as_str(),
                    c.mode.as_str(),
                    unit_str(c.unit),
                    c.n_org,
                    c.n_tgt,
                    c.selected.len(),
                    c.n_after_filters,
                    100.0 * c.f1_mean,
                    100.0 * c.f1_sd,
                    100.0 * c.pooled_f1
                );
                let mut freq = String::from("feature\torg_mean\ttgt_mean\tdirection\tp_value\tf1\n");
                for r in &c.frequency {
                    let _ = writeln!(
                        freq,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        r.feature,
                        opt(r.org_mean),
                        opt(r.tgt_mean),
                        r.direction.arrow(),
                        opt(r.p_value),
                        opt(r.f1)
                    );
                }
                let mut shap = String::from("feature\tweight\tmean_abs_shap\tmean_shap\n");
                shap_tsv(&mut shap, None, &c.shap);
                let mut folds = String::from("fold\tn_train\tn_test\tf1\tn_after_filters\tn_selected\n");
                for f in &c.folds {
                    let _ = writeln!(
                        folds,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        f.fold,
                        f.n_train,
                        f.n_test,
                        num(f.score),
                        f.n_after_filters,
                        f.selected.len()
                    );
                }
                vec![
                    ("performance.tsv".into(), perf),
                    ("frequency.tsv".into(), freq),
                    ("shap.tsv".into(), shap),
                    ("folds.tsv".into(), folds),
                ]
            }
            Report::Regress(g) => {
                let mut reg = String::from(
                    "lpair\tmode\tapproach\trho\trho_p\tR2\tMAE\tselected/input\tR2_fold_mean\tR2_fold_sd\n",
                );
                for r in &g.subsets {
                    let _ = writeln!(
                        reg,
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}/{}\t{}\t{}",
                        g.lpair.as_str(),
                        g.mode.as_str(),
                        r.subset,
                        opt(r.rho),
                        opt(r.rho_p),
                        opt(r.r2),
                        num(r.mae),
                        r.n_selected,
                        r.n_input,
                        num(r.r2_mean),
                        num(r.r2_sd)
                    );
                }
                let mut uni = String::from("feature\tmean\txy_corr\tbold\n");
                for r in &g.univariate {
                    let _ = writeln!(uni, "{}\t{}\t{}\t{}", r.feature, opt(r.mean), opt(r.xy_corr), r.bold);
                }
                let mut shap = String::from("approach\tfeature\tweight\tmean_abs_shap\tmean_shap\n");
                for r in &g.subsets {
                    shap_tsv(&mut shap, Some(&r.subset), &r.shap);
                }
                let mut out = vec![
                    ("regression.tsv".into(), reg),
                    ("univariate.tsv".into(), uni),
                    ("shap.tsv".into(), shap),
                ];
                if let Some(audit) = &g.audit {
                    let mut a = String::from("translationese\tdifficulty\trho\tflagged\n");
                    for r in audit {
                        let _ = writeln!(a, "{}\t{}\t{}\t{}", r.translationese, r.difficulty, opt(r.rho), r.flagged);
                    }
                    out.push(("audit.tsv".into(), a));
                }
                out
            }
        }
    }

    /// Named SVG figures.
    pub fn svgs(&self) -> Vec<(String, String)> {
        match self {
            Report::Classify(c) => {
                let shap: Vec<(String, f64)> =
                    c.shap.iter().map(|r| (r.feature.clone(), r.mean_abs)).collect();
                let folds: Vec<(String, f64)> =
                    c.folds.iter().map(|f| (format!("fold {}", f.fold), f.score)).collect();
                vec![
                    ("shap.svg".into(), bar_chart_svg("mean |SHAP| per selected feature", &shap)),
                    ("folds.svg".into(), bar_chart_svg("macro-F1 per fold", &folds)),
                ]
            }
            Report::Regress(g) => {
                let r2: Vec<(String, f64)> = g
                    .subsets
                    .iter()
                    .map(|r| (r.subset.clone(), r.r2.unwrap_or(f64::NAN)))
                    .collect();
                let mut out = vec![("r2.svg".to_string(), bar_chart_svg("out-of-fold R^2 per subset", &r2))];
                for r in &g.subsets {
                    let bars: Vec<(String, f64)> =
                        r.shap.iter().map(|s| (s.feature.clone(), s.mean)).collect();
                    out.push((
                        format!("shap_{}.svg", file_stem(&r.subset)),
                        bar_chart_svg(&format!("mean SHAP, {}", r.subset), &bars),
                    ));
                }
                if let Some(audit) = &g.audit {
                    out.push(("audit.svg".into(), heatmap_svg("cross-set Spearman rho", audit)));
                }
                out
            }
        }
    }
}

fn unit_str(u: Unit) -> &'static str {
    match u {
        Unit::Segment => "segment",
        Unit::Document => "document",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal bar chart; negative values extend left of the axis.
pub fn bar_chart_svg(title: &str, bars: &[(String, f64)]) -> String {
    const LABEL: f64 = 220.0;
    const PLOT: f64 = 400.0;
    const ROW: f64 = 20.0;
    let finite: Vec<f64> = bars.iter().map(|b| b.1).filter(|v| v.is_finite()).collect();
    let max = finite.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let has_neg = finite.iter().any(|v| *v < 0.0);
    let zero = if has_neg { LABEL + PLOT / 2.0 } else { LABEL };
    let span = if has_neg { PLOT / 2.0 } else { PLOT };
    let height = 40.0 + ROW * bars.len() as f64 + 10.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        LABEL + PLOT + 80.0
    );
    let _ = writeln!(s, "<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>", escape(title));
    for (i, (label, v)) in bars.iter().enumerate() {
        let y = 35.0 + ROW * i as f64;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            LABEL - 6.0,
            y + 13.0,
            escape(label)
        );
        if v.is_finite() {
            let w = v.abs() / max * span;
            let x = if *v < 0.0 { zero - w } else { zero };
            let fill = if *v < 0.0 { "#c0504d" } else { "#4f81bd" };
            let _ = writeln!(
                s,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{}\" fill=\"{fill}\"/>",
                ROW - 4.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{}\">{v:.3}</text>",
                zero.max(x + w) + 4.0,
                y + 13.0
            );
        } else {
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">NA</text>", zero + 4.0, y + 13.0);
        }
    }
    let _ = writeln!(
        s,
        "<line x1=\"{zero}\" y1=\"30\" x2=\"{zero}\" y2=\"{}\" stroke=\"#333\"/>",
        height - 10.0
    );
    s.push_str("</svg>\n");
    s
}

/// Diverging heatmap of correlations, translationese rows by difficulty columns.
pub fn heatmap_svg(title: &str, cells: &[AuditRow]) -> String {
    let mut rows: Vec<&str> = Vec::new();
    let mut cols: Vec<&str> = Vec::new();
    for c in cells {
        if !rows.contains(&c.translationese.as_str()) {
            rows.push(&c.translationese);
        }
        if !cols.contains(&c.difficulty.as_str()) {
            cols.push(&c.difficulty);
        }
    }
    const CELL: f64 = 16.0;
    const LEFT: f64 = 180.0;
    const TOP: f64 = 140.0;
    let width = LEFT + CELL * cols.len() as f64 + 20.0;
    let height = TOP + CELL * rows.len() as f64 + 20.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"10\">\n"
    );
    let _ = writeln!(s, "<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>", escape(title));
    for (j, c) in cols.iter().enumerate() {
        let x = LEFT + CELL * j as f64 + CELL / 2.0;
        let _ = writeln!(
            s,
            "<text transform=\"translate({x:.1},{}) rotate(-60)\">{}</text>",
            TOP - 4.0,
            escape(c)
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            LEFT - 4.0,
            TOP + CELL * i as f64 + 12.0,
            escape(r)
        );
    }
    for c in cells {
        let i = rows.iter().position(|r| *r == c.translationese).expect("row listed");
        let j = cols.iter().position(|d| *d == c.difficulty).expect("column listed");
        let fill = match c.rho {
            Some(r) => {
                let t = r.clamp(-1.0, 1.0);
                let fade = |v: f64| (255.0 * (1.0 - v.abs())).round() as u8;
                if t >= 0.0 {
                    format!("rgb(255,{},{})", fade(t), fade(t))
                } else {
                    format!("rgb({},{},255)", fade(t), fade(t))
                }
            }
            None => "#ccc".into(),
        };
        let stroke = if c.flagged { " stroke=\"#000\" stroke-width=\"2\"" } else { "" };
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\"{stroke}/>",
            LEFT + CELL * j as f64,
            TOP + CELL * i as f64
        );
    }
    s.push_str("</svg>\n");
    s
}
