//! Requestor grading from the data-linkage, re-identification-ability and
//! data-understanding questionnaires.
//!
//! Each component is an integer score; the grade comes from their mean:
//! High at 7 or above, Middle strictly between 4 and 7, Low at 4 or below.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REFERENCE_INSTITUTIONS: &str = include_str!("../data/institutions.json");

/// How readily the requestor's institution can link the data to other sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkageGrade {
    Low,
    Mid,
    High,
}

impl LinkageGrade {
    pub fn points(self) -> u8 {
        score_linkage(self)
    }
}

impl FromStr for LinkageGrade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "high" => Ok(LinkageGrade::High),
            "mid" | "middle" => Ok(LinkageGrade::Mid),
            "low" => Ok(LinkageGrade::Low),
            other => Err(Error::InvalidForm(format!(
                "unknown linkage grade {other:?}"
            ))),
        }
    }
}

pub fn score_linkage(grade: LinkageGrade) -> u8 {
    match grade {
        LinkageGrade::High => 10,
        LinkageGrade::Mid => 5,
        LinkageGrade::Low => 1,
    }
}

/// Questionnaire answers; `true` means "Yes".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentForm {
    pub linkage: LinkageGrade,
    /// Shaming frame, monetary-benefit frame, no re-identification prohibition in the contract.
    pub intent: [bool; 3],
    /// Combinable data available publicly (Internet, SNS, open-data portals).
    pub external_linkage: bool,
    /// Security agreements/training, data management plan, safe transfer,
    /// intrusion blocking/prevention, access management, periodic security checks.
    pub protection: [bool; 6],
    /// Relevant knowledge or degree, resources to re-identify, access to linkable databases.
    pub knowledge: [bool; 3],
    pub tenure_years: f64,
}

impl AssessmentForm {
    pub fn from_json(text: &str) -> Result<Self> {
        let form: AssessmentForm =
            serde_json::from_str(text).map_err(|e| Error::InvalidForm(e.to_string()))?;
        form.validate()?;
        Ok(form)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidForm(format!("{}: {e}", path.display())))?;
        AssessmentForm::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tenure_years.is_finite() || self.tenure_years < 0.0 {
            return Err(Error::InvalidForm(format!(
                "tenure_years must be a non-negative number, got {}",
                self.tenure_years
            )));
        }
        Ok(())
    }
}

/// Yes answers among intent and external linkage, plus No answers among protection.
pub fn score_reid_ability(
    intent: &[bool; 3],
    external_linkage: bool,
    protection: &[bool; 6],
) -> u8 {
    let risky_intent = intent.iter().filter(|&&yes| yes).count() + usize::from(external_linkage);
    let missing_protection = protection.iter().filter(|&&yes| !yes).count();
    (risky_intent + missing_protection) as u8
}

fn tenure_points(tenure_years: f64) -> u8 {
    match tenure_years {
        t if t >= 10.0 => 7,
        t if t >= 7.0 => 5,
        t if t >= 3.0 => 3,
        _ => 0,
    }
}

pub fn score_understanding(knowledge: &[bool; 3], tenure_years: f64) -> Result<u8> {
    if !tenure_years.is_finite() || tenure_years < 0.0 {
        return Err(Error::InvalidForm(format!(
            "tenure_years must be a non-negative number, got {tenure_years}"
        )));
    }
    let yes = knowledge.iter().filter(|&&k| k).count() as u8;
    Ok(yes + tenure_points(tenure_years))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UserGrade {
    Low,
    Middle,
    High,
}

impl UserGrade {
    pub fn from_average(average: f64) -> UserGrade {
        if average >= 7.0 {
            UserGrade::High
        } else if average > 4.0 {
            UserGrade::Middle
        } else {
            UserGrade::Low
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UserGrade::High => "High",
            UserGrade::Middle => "Middle",
            UserGrade::Low => "Low",
        }
    }
}

impl fmt::Display for UserGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestorScore {
    pub linkage_points: u8,
    pub reid_ability_points: u8,
    pub understanding_points: u8,
    /// Unrounded mean of the three components.
    pub average: f64,
    pub grade: UserGrade,
}

impl RequestorScore {
    /// Grades three already-computed component scores.
    pub fn from_components(linkage: u8, reid_ability: u8, understanding: u8) -> RequestorScore {
        // Grading on the integer total keeps the 7 and 4 boundaries exact.
        let total = u32::from(linkage) + u32::from(reid_ability) + u32::from(understanding);
        let grade = if total >= 21 {
            UserGrade::High
        } else if total > 12 {
            UserGrade::Middle
        } else {
            UserGrade::Low
        };
        RequestorScore {
            linkage_points: linkage,
            reid_ability_points: reid_ability,
            understanding_points: understanding,
            average: f64::from(total) / 3.0,
            grade,
        }
    }

    /// The average as reported: two decimals.
    pub fn average_display(&self) -> String {
        format!("{:.2}", self.average)
    }
}

pub fn grade_requestor(form: &AssessmentForm) -> Result<RequestorScore> {
    form.validate()?;
    let linkage = score_linkage(form.linkage);
    let reid = score_reid_ability(&form.intent, form.external_linkage, &form.protection);
    let understanding = score_understanding(&form.knowledge, form.tenure_years)?;
    Ok(RequestorScore::from_components(
        linkage,
        reid,
        understanding,
    ))
}

/// Example institution categories and their linkage grades.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionEntry {
    pub category: String,
    pub institutions: Vec<String>,
    pub grade: LinkageGrade,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionMap {
    pub entries: Vec<InstitutionEntry>,
}

impl InstitutionMap {
    pub fn reference() -> InstitutionMap {
        serde_json::from_str(REFERENCE_INSTITUTIONS).expect("shipped institution map is valid")
    }

    /// Grade for an institution named in the map, case-insensitively.
    pub fn lookup(&self, institution: &str) -> Option<LinkageGrade> {
        let wanted = institution.trim();
        self.entries
            .iter()
            .find(|e| {
                e.institutions
                    .iter()
                    .any(|i| i.eq_ignore_ascii_case(wanted))
            })
            .map(|e| e.grade)
    }
}
