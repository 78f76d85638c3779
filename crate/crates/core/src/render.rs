//! Text, TSV and JSON renderings of pipeline results.
//!
//! Scores render with four decimals and requestor averages with two in the
//! text and TSV forms. JSON carries the unrounded values.

use serde::Serialize;

use crate::assessment::RequestorScore;
use crate::classify::{Basis, Census, ClassifiedTable};
use crate::metrics::RiskScore;
use crate::selection::SelectionReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

/// Lays out `rows` under `header` in space-padded columns.
pub fn aligned(header: &[&str], align: &[Align], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut out = String::new();
        for (i, cell) in cells.enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let pad = widths[i].saturating_sub(cell.chars().count());
            match align.get(i).copied().unwrap_or(Align::Left) {
                Align::Left => {
                    out.push_str(cell);
                    out.push_str(&" ".repeat(pad));
                }
                Align::Right => {
                    out.push_str(&" ".repeat(pad));
                    out.push_str(cell);
                }
            }
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
        out
    };
    let mut out = line(&mut header.iter().copied());
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

pub fn fixed4(value: f64) -> String {
    format!("{value:.4}")
}

fn opt4(value: Option<f64>) -> String {
    value.map(fixed4).unwrap_or_else(|| "-".to_owned())
}

/// Scores for one table, tagged with the table name.
#[derive(Debug, Clone, Copy)]
pub struct TableScores<'a> {
    pub table: &'a str,
    pub scores: &'a [RiskScore],
}

const SCORE_HEADER: [&str; 5] = ["table", "column", "uniqueness", "influence", "sum"];

pub fn scores_tsv(tables: &[TableScores<'_>]) -> String {
    let mut out = SCORE_HEADER.join("\t");
    out.push('\n');
    for t in tables {
        for s in t.scores {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                t.table,
                s.column,
                fixed4(s.uniqueness),
                fixed4(s.influence),
                fixed4(s.sum)
            ));
        }
    }
    out
}

pub fn scores_text(tables: &[TableScores<'_>]) -> String {
    let rows: Vec<Vec<String>> = tables
        .iter()
        .flat_map(|t| {
            t.scores.iter().map(move |s| {
                vec![
                    t.table.to_owned(),
                    s.column.clone(),
                    fixed4(s.uniqueness),
                    fixed4(s.influence),
                    fixed4(s.sum),
                ]
            })
        })
        .collect();
    use Align::*;
    aligned(&SCORE_HEADER, &[Left, Left, Right, Right, Right], &rows)
}

#[derive(Serialize)]
struct ScoreRow<'a> {
    table: &'a str,
    column: &'a str,
    position: usize,
    uniqueness: f64,
    influence: f64,
    sum: f64,
}

pub fn scores_json(tables: &[TableScores<'_>]) -> String {
    let rows: Vec<ScoreRow<'_>> = tables
        .iter()
        .flat_map(|t| {
            t.scores.iter().map(move |s| ScoreRow {
                table: t.table,
                column: &s.column,
                position: s.position,
                uniqueness: s.uniqueness,
                influence: s.influence,
                sum: s.sum,
            })
        })
        .collect();
    to_json(&rows)
}

fn basis_label(basis: &Basis) -> String {
    match basis {
        Basis::Declared => "declared".to_owned(),
        Basis::Rule { pattern, .. } => format!("rule {pattern}"),
        Basis::Default => "default".to_owned(),
    }
}

pub fn classification_tsv(tables: &[ClassifiedTable]) -> String {
    let mut out = String::from("table\tcolumn\tclass\tbasis\n");
    for t in tables {
        for a in t.assignments() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                t.table().name(),
                a.column,
                a.class,
                basis_label(&a.basis)
            ));
        }
    }
    out.push('\n');
    out.push_str(&census_tsv(tables));
    out
}

pub fn census_tsv(tables: &[ClassifiedTable]) -> String {
    let mut out = String::from("no\ttable\tDID\tQI\tSA\tNSA\n");
    for (i, t) in tables.iter().enumerate() {
        let c = t.census();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            i + 1,
            t.table().name(),
            c.did,
            c.qi,
            c.sa,
            c.nsa
        ));
    }
    out
}

pub fn census_text(tables: &[ClassifiedTable]) -> String {
    let rows: Vec<Vec<String>> = tables
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let c = t.census();
            vec![
                (i + 1).to_string(),
                t.table().name().to_owned(),
                c.did.to_string(),
                c.qi.to_string(),
                c.sa.to_string(),
                c.nsa.to_string(),
            ]
        })
        .collect();
    use Align::*;
    aligned(
        &["No", "Table", "DID", "QI", "SA", "NSA"],
        &[Right, Left, Right, Right, Right, Right],
        &rows,
    )
}

pub fn classification_text(tables: &[ClassifiedTable]) -> String {
    let mut out = String::new();
    for t in tables {
        out.push_str(&format!("{}\n", t.table().name()));
        let rows: Vec<Vec<String>> = t
            .assignments()
            .iter()
            .map(|a| vec![a.column.clone(), a.class.to_string(), basis_label(&a.basis)])
            .collect();
        for line in aligned(&["column", "class", "basis"], &[], &rows).lines() {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str(&census_text(tables));
    out
}

#[derive(Serialize)]
struct ClassifiedJson<'a> {
    table: &'a str,
    columns: &'a [crate::classify::Assignment],
    primary_qis: Vec<&'a str>,
    census: Census,
}

pub fn classification_json(tables: &[ClassifiedTable]) -> String {
    let rows: Vec<ClassifiedJson<'_>> = tables
        .iter()
        .map(|t| ClassifiedJson {
            table: t.table().name(),
            columns: t.assignments(),
            primary_qis: t.primary_qis(),
            census: t.census(),
        })
        .collect();
    to_json(&rows)
}

pub fn requestor_text(score: &RequestorScore) -> String {
    let rows = vec![
        vec![
            "Probability of data linkage".to_owned(),
            score.linkage_points.to_string(),
        ],
        vec![
            "Re-identification ability".to_owned(),
            score.reid_ability_points.to_string(),
        ],
        vec![
            "User understanding".to_owned(),
            score.understanding_points.to_string(),
        ],
        vec![
            "Average score".to_owned(),
            format!("{} {}", score.average_display(), score.grade),
        ],
    ];
    use Align::*;
    aligned(&["component", "score"], &[Left, Right], &rows)
}

pub fn requestor_tsv(score: &RequestorScore) -> String {
    format!(
        "linkage\treid_ability\tunderstanding\taverage\tgrade\n{}\t{}\t{}\t{}\t{}\n",
        score.linkage_points,
        score.reid_ability_points,
        score.understanding_points,
        score.average_display(),
        score.grade
    )
}

pub fn requestor_json(score: &RequestorScore) -> String {
    to_json(score)
}

fn threshold_line(report: &SelectionReport) -> String {
    let t = &report.threshold;
    match t.override_value {
        Some(o) => format!(
            "threshold: {} (override; grade-derived {})",
            o.value(),
            t.grade_derived.value()
        ),
        None => format!("threshold: {} (grade-derived)", t.grade_derived.value()),
    }
}

pub fn report_text(report: &SelectionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("table: {}\n", report.table_name));
    out.push_str(&format!(
        "requestor: linkage {}, re-identification ability {}, understanding {}, average {} ({})\n",
        report.requestor.linkage_points,
        report.requestor.reid_ability_points,
        report.requestor.understanding_points,
        report.requestor.average_display(),
        report.grade
    ));
    out.push_str(&threshold_line(report));
    out.push('\n');
    if let Some(ts) = &report.generated_at {
        out.push_str(&format!("generated: {ts}\n"));
    }
    out.push('\n');
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.column.clone(),
                e.class.to_string(),
                opt4(e.uniqueness),
                opt4(e.influence),
                opt4(e.sum),
                if e.selected { "yes" } else { "" }.to_owned(),
                e.disposition.label().to_owned(),
            ]
        })
        .collect();
    use Align::*;
    out.push_str(&aligned(
        &[
            "column",
            "class",
            "uniqueness",
            "influence",
            "sum",
            "selected",
            "disposition",
        ],
        &[Left, Left, Right, Right, Right, Left, Left],
        &rows,
    ));
    out.push('\n');
    out.push_str(&format!("final QIs: {}\n", list_or_none(&report.final_qis)));
    let removals: Vec<String> = report
        .mandatory_removals()
        .into_iter()
        .map(str::to_owned)
        .collect();
    out.push_str(&format!("mandatory removal: {}\n", list_or_none(&removals)));
    out
}

fn list_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".to_owned()
    } else {
        items.join(", ")
    }
}

pub fn report_tsv(report: &SelectionReport) -> String {
    let mut out = String::from(
        "table\tcolumn\tclass\tuniqueness\tinfluence\tsum\tthreshold\tselected\tdisposition\n",
    );
    let threshold = report.threshold.effective().value();
    for e in &report.entries {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            report.table_name,
            e.column,
            e.class,
            opt4(e.uniqueness),
            opt4(e.influence),
            opt4(e.sum),
            threshold,
            e.selected,
            e.disposition.label()
        ));
    }
    out
}

pub fn report_json(report: &SelectionReport) -> String {
    to_json(report)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
