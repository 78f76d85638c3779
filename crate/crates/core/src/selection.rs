//! Final quasi-identifier selection against a grade-derived threshold.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assessment::{RequestorScore, UserGrade};
use crate::classify::{ClassifiedTable, ColumnClass};
use crate::error::{Error, Result};
use crate::metrics::{secondary_qis, RiskScore};

/// Minimum re-identifiability score for a column to be selected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SelectionThreshold(f64);

impl SelectionThreshold {
    pub const MAX: f64 = 2.0;

    /// An explicit threshold in `[0, 2]`.
    pub fn custom(value: f64) -> Result<SelectionThreshold> {
        if value.is_finite() && (0.0..=Self::MAX).contains(&value) {
            Ok(SelectionThreshold(value))
        } else {
            Err(Error::InvalidThreshold(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for SelectionThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn threshold_for(grade: UserGrade) -> SelectionThreshold {
    SelectionThreshold(match grade {
        UserGrade::High => 0.25,
        UserGrade::Middle => 0.5,
        UserGrade::Low => 0.75,
    })
}

/// Columns whose unrounded sum is at least the threshold, in input order.
pub fn select_final_qis(scores: &[RiskScore], threshold: SelectionThreshold) -> Vec<String> {
    scores
        .iter()
        .filter(|s| s.sum >= threshold.value())
        .map(|s| s.column.clone())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdUse {
    pub grade_derived: SelectionThreshold,
    #[serde(rename = "override", skip_serializing_if = "Option::is_none")]
    pub override_value: Option<SelectionThreshold>,
}

impl ThresholdUse {
    pub fn effective(&self) -> SelectionThreshold {
        self.override_value.unwrap_or(self.grade_derived)
    }
}

/// What the report recommends for a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    /// Direct identifier; always deleted.
    MandatoryRemoval,
    /// Sensitive attribute; deleted unless the research purpose needs it.
    DeleteUnlessResearchRelevant,
    /// Secondary QI at or above the threshold.
    QuasiIdentifier,
    /// Secondary QI below the threshold.
    BelowThreshold,
    /// Primary QI with zero uniqueness and zero influence.
    NoMeasuredRisk,
    Retain,
}

impl Disposition {
    pub fn label(self) -> &'static str {
        match self {
            Disposition::MandatoryRemoval => "mandatory removal",
            Disposition::DeleteUnlessResearchRelevant => "delete unless research-relevant",
            Disposition::QuasiIdentifier => "final QI",
            Disposition::BelowThreshold => "below threshold",
            Disposition::NoMeasuredRisk => "no measured risk",
            Disposition::Retain => "retain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub column: String,
    pub position: usize,
    pub class: ColumnClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub influence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum: Option<f64>,
    pub secondary: bool,
    pub selected: bool,
    pub mandatory_removal: bool,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub table_name: String,
    pub grade: UserGrade,
    pub requestor: RequestorScore,
    pub threshold: ThresholdUse,
    pub entries: Vec<ReportEntry>,
    pub primary_qis: Vec<String>,
    pub secondary_qis: Vec<String>,
    pub final_qis: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl SelectionReport {
    pub fn with_timestamp(mut self, generated_at: impl Into<String>) -> SelectionReport {
        self.generated_at = Some(generated_at.into());
        self
    }

    pub fn mandatory_removals(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.mandatory_removal)
            .map(|e| e.column.as_str())
            .collect()
    }
}

/// Assembles the per-column evidence trail and the final QI set.
///
/// `scores` must hold exactly one score per primary QI of `classified`.
/// `threshold_override`, when given, replaces the grade-derived threshold
/// for selection; both are recorded.
pub fn build_report(
    classified: &ClassifiedTable,
    scores: &[RiskScore],
    requestor: &RequestorScore,
    threshold_override: Option<f64>,
) -> Result<SelectionReport> {
    let table = classified.table();
    let override_value = threshold_override
        .map(SelectionThreshold::custom)
        .transpose()?;
    let threshold = ThresholdUse {
        grade_derived: threshold_for(requestor.grade),
        override_value,
    };

    let mut by_position: Vec<Option<&RiskScore>> = vec![None; table.column_count()];
    for score in scores {
        let idx = table.column_index(&score.column)?;
        if classified.class_at(idx) != ColumnClass::Qi {
            return Err(Error::Inconsistent(format!(
                "score given for {}, which is classified {}",
                score.column,
                classified.class_at(idx)
            )));
        }
        if by_position[idx].replace(score).is_some() {
            return Err(Error::Inconsistent(format!(
                "two scores for {}",
                score.column
            )));
        }
    }

    let primary: Vec<String> = classified
        .primary_qis()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut ordered: Vec<RiskScore> = Vec::with_capacity(primary.len());
    for a in classified.assignments() {
        if a.class == ColumnClass::Qi {
            match by_position[a.position] {
                Some(s) => ordered.push(s.clone()),
                None => {
                    return Err(Error::Inconsistent(format!(
                        "no score for primary QI {}",
                        a.column
                    )))
                }
            }
        }
    }
    let secondary = secondary_qis(&ordered);
    let secondary_scores: Vec<RiskScore> = ordered
        .iter()
        .filter(|s| secondary.contains(&s.column))
        .cloned()
        .collect();
    let final_qis = select_final_qis(&secondary_scores, threshold.effective());

    let entries = classified
        .assignments()
        .iter()
        .map(|a| {
            let score = by_position[a.position];
            let is_secondary = score.is_some_and(|s| secondary.contains(&s.column));
            let selected = is_secondary && final_qis.contains(&a.column);
            let disposition = match a.class {
                ColumnClass::Did => Disposition::MandatoryRemoval,
                ColumnClass::Sa => Disposition::DeleteUnlessResearchRelevant,
                ColumnClass::Nsa => Disposition::Retain,
                ColumnClass::Qi if selected => Disposition::QuasiIdentifier,
                ColumnClass::Qi if is_secondary => Disposition::BelowThreshold,
                ColumnClass::Qi => Disposition::NoMeasuredRisk,
            };
            ReportEntry {
                column: a.column.clone(),
                position: a.position,
                class: a.class,
                uniqueness: score.map(|s| s.uniqueness),
                influence: score.map(|s| s.influence),
                sum: score.map(|s| s.sum),
                secondary: is_secondary,
                selected,
                mandatory_removal: a.class == ColumnClass::Did,
                disposition,
            }
        })
        .collect();

    Ok(SelectionReport {
        table_name: table.name().to_owned(),
        grade: requestor.grade,
        requestor: requestor.clone(),
        threshold,
        entries,
        primary_qis: primary,
        secondary_qis: secondary,
        final_qis,
        generated_at: None,
    })
}
