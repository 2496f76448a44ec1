//! On-disk artifacts for an [`ExperimentReport`].
//!
//! | file | content |
//! |---|---|
//! | `report.json` | the whole report, schema `pcasmote-report/1` |
//! | `report.csv` | one row per method per seed, then one `mean` row per method |
//! | `table2.csv` | method, feature count, sample count, class counts |
//! | `fig3_accuracy.csv` .. `fig7_misclassified.csv` | method vs value |
//! | `run_meta.json` | creation time; the only file that differs between runs |
//!
//! Figure files hold the mean over seeds, except `fig7_misclassified.csv`
//! which holds the median count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentReport, StepResult};

pub struct Figure {
    pub file_stem: &'static str,
    pub title: &'static str,
    pub value: fn(&StepResult) -> f64,
}

pub const FIGURES: [Figure; 5] = [
    Figure {
        file_stem: "fig3_accuracy",
        title: "Weighted accuracy",
        value: |s| s.evaluation.mean.accuracy,
    },
    Figure {
        file_stem: "fig4_fp_rate",
        title: "Weighted FP rate",
        value: |s| s.evaluation.mean.fp_rate,
    },
    Figure {
        file_stem: "fig5_precision",
        title: "Weighted precision",
        value: |s| s.evaluation.mean.precision,
    },
    Figure {
        file_stem: "fig6_recall",
        title: "Weighted recall",
        value: |s| s.evaluation.mean.recall,
    },
    Figure {
        file_stem: "fig7_misclassified",
        title: "Misclassified samples (median over seeds)",
        value: |s| s.evaluation.median_misclassified,
    },
];

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn report_csv(report: &ExperimentReport) -> String {
    let scope = report
        .config
        .get("eval.resample_scope")
        .map_or("", String::as_str);
    let mut out =
        String::from("method,seed,n_features,n_samples,accuracy,fp_rate,precision,recall,misclassified,resample_scope\n");
    for step in &report.steps {
        let rows = step
            .evaluation
            .per_seed
            .iter()
            .map(|s| (s.seed.to_string(), &s.row))
            .chain(std::iter::once(("mean".to_string(), &step.evaluation.mean)));
        for (seed, r) in rows {
            writeln!(
                out,
                "{},{seed},{},{},{},{},{},{},{},{scope}",
                step.method,
                r.n_features,
                r.n_samples,
                r.accuracy,
                r.fp_rate,
                r.precision,
                r.recall,
                r.misclassified
            )
            .unwrap();
        }
    }
    out
}

pub fn table2_csv(report: &ExperimentReport) -> String {
    let class_names: Vec<&str> = report
        .steps
        .first()
        .map(|s| {
            s.evaluation
                .mean
                .per_class
                .iter()
                .map(|p| p.class.as_str())
                .collect()
        })
        .unwrap_or_default();
    let mut out = String::from("method,features,samples");
    for c in &class_names {
        write!(out, ",{c}").unwrap();
    }
    out.push('\n');
    for s in &report.steps {
        write!(out, "{},{},{}", s.method, s.n_features, s.n_samples).unwrap();
        for n in &s.class_counts {
            write!(out, ",{n}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn figure_csv(report: &ExperimentReport, fig: &Figure) -> String {
    let mut out = String::from("method,value\n");
    for s in &report.steps {
        writeln!(out, "{},{}", s.method, (fig.value)(s)).unwrap();
    }
    out
}

/// A standalone bar chart, one bar per method.
pub fn figure_svg(report: &ExperimentReport, fig: &Figure) -> String {
    const W: f64 = 480.0;
    const H: f64 = 300.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 40.0;
    let values: Vec<(&str, f64)> = report
        .steps
        .iter()
        .map(|s| (s.method.as_str(), (fig.value)(s)))
        .collect();
    let max = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let scale = if max > 0.0 {
        (H - TOP - BOTTOM) / max
    } else {
        0.0
    };
    let slot = W / values.len().max(1) as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        fig.title
    );
    for (i, (name, v)) in values.iter().enumerate() {
        let h = v * scale;
        let x = i as f64 * slot + slot * 0.15;
        let y = H - BOTTOM - h;
        writeln!(
            svg,
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{h:.1}\" fill=\"#4a7ab5\"/>",
            slot * 0.7
        )
        .unwrap();
        let cx = i as f64 * slot + slot / 2.0;
        writeln!(
            svg,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{v:.3}</text>",
            y - 4.0
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{name}</text>",
            H - BOTTOM + 16.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn write(dir: &Path, name: &str, content: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes every artifact into `dir`, creating it if needed. Returns the
/// paths written, in order.
pub fn write_report(report: &ExperimentReport, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    write(dir, "report.json", &report_json(report)?, &mut written)?;
    write(dir, "report.csv", &report_csv(report), &mut written)?;
    write(dir, "table2.csv", &table2_csv(report), &mut written)?;
    for fig in &FIGURES {
        write(
            dir,
            &format!("{}.csv", fig.file_stem),
            &figure_csv(report, fig),
            &mut written,
        )?;
        if svg {
            write(
                dir,
                &format!("{}.svg", fig.file_stem),
                &figure_svg(report, fig),
                &mut written,
            )?;
        }
    }
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "created_unix": created,
        "toolkit_version": report.environment.toolkit_version,
    });
    write(dir, "run_meta.json", &format!("{meta:#}\n"), &mut written)?;
    Ok(written)
}
