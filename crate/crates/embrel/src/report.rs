//! CSV and aligned-text renderings of evaluation results.

use embrel_core::classify::{CvResult, LearningCurve};
use embrel_core::compose::CompositionStrategy;
use embrel_core::dataset::AgreementStats;
use embrel_core::simeval::SimEvalReport;

/// One (model, strategy) cell of the relatedness grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RelatednessRow {
    pub model: String,
    pub strategy: CompositionStrategy,
    pub dim: usize,
    pub folds: usize,
    pub k: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub all_oov_posts: usize,
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 input")
}

/// Left-aligns the first column, right-aligns the rest.
fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let render = |cells: &mut dyn Iterator<Item = &str>| {
        let mut line = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            let pad = w - cell.chars().count();
            if i == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str("  ");
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        line.trim_end().to_string()
    };
    let mut out = render(&mut header.iter().copied());
    out.push('\n');
    for row in rows {
        out.push_str(&render(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

pub const SIMILARITY_HEADER: [&str; 6] = ["model", "dataset", "metric", "value", "pairs_total", "pairs_dropped"];

pub fn similarity_csv(reports: &[SimEvalReport]) -> String {
    csv_string(
        &SIMILARITY_HEADER,
        reports.iter().map(|r| {
            vec![
                r.model.clone(),
                r.dataset.clone(),
                r.metric.to_string(),
                r.value.to_string(),
                r.pairs_total.to_string(),
                r.pairs_dropped.to_string(),
            ]
        }),
    )
}

pub fn similarity_table(reports: &[SimEvalReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.model.clone(),
                r.dataset.clone(),
                r.metric.to_string(),
                format!("{:.4}", r.value),
                r.pairs_total.to_string(),
                r.pairs_dropped.to_string(),
                format!("{:.1}%", 100.0 * r.drop_fraction()),
            ]
        })
        .collect();
    let mut out = String::from(
        "# system score: cosine similarity (Spearman rho against cosine distance has the opposite sign)\n",
    );
    out.push_str(&aligned(&["model", "dataset", "metric", "value", "pairs", "dropped", "drop"], &rows));
    out
}

pub fn relatedness_csv(rows: &[RelatednessRow]) -> String {
    csv_string(
        &["model", "strategy", "dim", "folds", "k", "mean_f1", "std_f1", "all_oov_posts"],
        rows.iter().map(|r| {
            vec![
                r.model.clone(),
                r.strategy.to_string(),
                r.dim.to_string(),
                r.folds.to_string(),
                r.k.to_string(),
                r.mean_f1.to_string(),
                r.std_f1.to_string(),
                r.all_oov_posts.to_string(),
            ]
        }),
    )
}

/// Models down, strategies across: `mean ± std (dim)`.
pub fn relatedness_table(rows: &[RelatednessRow]) -> String {
    let mut models: Vec<&str> = Vec::new();
    let mut strategies: Vec<CompositionStrategy> = Vec::new();
    for r in rows {
        if !models.contains(&r.model.as_str()) {
            models.push(&r.model);
        }
        if !strategies.contains(&r.strategy) {
            strategies.push(r.strategy);
        }
    }
    let mut header = vec!["model".to_string()];
    header.extend(strategies.iter().map(|s| s.to_string()));
    let body: Vec<Vec<String>> = models
        .iter()
        .map(|m| {
            let mut line = vec![m.to_string()];
            for s in &strategies {
                let cell = rows
                    .iter()
                    .find(|r| r.model == *m && r.strategy == *s)
                    .map_or_else(|| "-".to_string(), |r| format!("{:.3} ± {:.3} ({})", r.mean_f1, r.std_f1, r.dim));
                line.push(cell);
            }
            line
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = String::from("# mean F1 ± std over folds (feature dimension)\n");
    out.push_str(&aligned(&header, &body));
    out
}

pub fn cv_csv(cv: &CvResult) -> String {
    csv_string(&["fold", "f1"], cv.fold_f1.iter().enumerate().map(|(i, f)| vec![(i + 1).to_string(), f.to_string()]))
}

pub fn curve_csv(curve: &LearningCurve) -> String {
    csv_string(
        &["fraction", "mean_f1", "std_f1"],
        curve.points.iter().map(|p| vec![p.fraction.to_string(), p.mean_f1.to_string(), p.std_f1.to_string()]),
    )
}

pub fn agreement_text(stats: &AgreementStats, labels: &[(String, bool)]) -> String {
    let related = labels.iter().filter(|l| l.1).count();
    let rows = vec![
        vec!["pairs".to_string(), stats.pairs.to_string()],
        vec!["annotators".to_string(), stats.annotators.to_string()],
        vec!["unanimous_fraction".to_string(), format!("{:.4}", stats.unanimity)],
        vec!["pairwise_agreement".to_string(), format!("{:.4}", stats.pairwise_agreement)],
        vec!["related".to_string(), related.to_string()],
        vec!["unrelated".to_string(), (labels.len() - related).to_string()],
    ];
    aligned(&["statistic", "value"], &rows)
}
