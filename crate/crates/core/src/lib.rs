//! Quasi-identifier selection for tabular clinical data.
//!
//! The pipeline runs in four stages, each usable on its own:
//!
//! 1. [`classify`] assigns every column DID, QI, SA or NSA from ordered name
//!    rules; the QI columns are the primary quasi-identifiers.
//! 2. [`metrics`] scores each primary QI by uniqueness plus equivalence-class
//!    influence; columns with a positive sum are the secondary QIs.
//! 3. [`assessment`] grades the data requestor from a questionnaire.
//! 4. [`selection`] keeps the secondary QIs whose score reaches the
//!    threshold for that grade and builds the evidence report.
//!
//! ```
//! use qi_sentry::{classify, ingest_delimited, metrics, ClassificationRules, IngestOptions, Rule, ColumnClass};
//!
//! let csv = "Weight,Age\n72,45\n72,45\n58,21\n45,21\n45,64\n";
//! let table = ingest_delimited(csv.as_bytes(), &IngestOptions::default()).unwrap();
//! let rules = ClassificationRules::new(vec![Rule::new("*", ColumnClass::Qi).unwrap()]);
//! let classified = classify(table, &rules);
//! let scores = metrics::score_columns(&classified, metrics::UniversePolicy::AllColumns).unwrap();
//! assert_eq!(scores[0].uniqueness, 0.2);
//! ```

pub mod assessment;
pub mod classify;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod render;
pub mod selection;
pub mod synth;
pub mod table;

pub use assessment::{
    grade_requestor, score_linkage, score_reid_ability, score_understanding, AssessmentForm,
    InstitutionMap, LinkageGrade, RequestorScore, UserGrade,
};
pub use classify::{
    classification_census, classify, Census, ClassificationRules, ClassifiedTable, ColumnClass,
    NameMatcher, Rule,
};
pub use error::{Error, Result};
pub use metrics::{
    equivalence_class_count, influence, score_columns, secondary_qis, uniqueness, Execution,
    RiskScore, UniversePolicy,
};
pub use selection::{
    build_report, select_final_qis, threshold_for, Disposition, SelectionReport, SelectionThreshold,
};
pub use synth::{generate, SyntheticSpec};
pub use table::{ingest_delimited, write_delimited, CellValue, ColumnMeta, IngestOptions, Table};
