//! Column classification into direct identifiers, quasi-identifiers,
//! sensitive attributes and non-sensitive attributes.
//!
//! The judgment "can this column identify someone when combined with other
//! information?" is not computable from the data, so it is expressed as an
//! ordered list of name rules. For each column the decision is:
//!
//! 1. a declared class on the column (manual override), else
//! 2. the class of the first rule whose matcher accepts the name, else
//! 3. the rule set's default class.
//!
//! Name matching is case-insensitive. A matcher containing `*`, `?` or `[`
//! is a glob pattern; anything else must equal the column name.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table;

const BUILTIN_RULES: &str = include_str!("../data/default_rules.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColumnClass {
    #[serde(rename = "DID")]
    Did,
    #[serde(rename = "QI")]
    Qi,
    #[serde(rename = "SA")]
    Sa,
    #[serde(rename = "NSA")]
    Nsa,
}

impl ColumnClass {
    pub const ALL: [ColumnClass; 4] = [
        ColumnClass::Did,
        ColumnClass::Qi,
        ColumnClass::Sa,
        ColumnClass::Nsa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnClass::Did => "DID",
            ColumnClass::Qi => "QI",
            ColumnClass::Sa => "SA",
            ColumnClass::Nsa => "NSA",
        }
    }
}

impl fmt::Display for ColumnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColumnClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ColumnClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidRules(format!("unknown column class {s:?}")))
    }
}

/// Exact or glob matcher over column names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NameMatcher {
    pattern: String,
    lowered: Vec<char>,
    is_glob: bool,
}

impl NameMatcher {
    pub fn new(pattern: impl Into<String>) -> Result<Self> {
        let pattern = pattern.into();
        if pattern.trim().is_empty() {
            return Err(Error::InvalidRules("empty rule matcher".into()));
        }
        let lowered: Vec<char> = pattern.to_lowercase().chars().collect();
        let is_glob = lowered.iter().any(|c| matches!(c, '*' | '?' | '['));
        if is_glob {
            validate_brackets(&lowered)
                .map_err(|msg| Error::InvalidRules(format!("pattern {pattern:?}: {msg}")))?;
        }
        Ok(NameMatcher {
            pattern,
            lowered,
            is_glob,
        })
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    pub fn is_glob(&self) -> bool {
        self.is_glob
    }

    pub fn matches(&self, name: &str) -> bool {
        let name: Vec<char> = name.to_lowercase().chars().collect();
        if self.is_glob {
            glob_match(&self.lowered, &name)
        } else {
            self.lowered == name
        }
    }
}

impl TryFrom<String> for NameMatcher {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        NameMatcher::new(value)
    }
}

impl From<NameMatcher> for String {
    fn from(m: NameMatcher) -> String {
        m.pattern
    }
}

fn validate_brackets(pattern: &[char]) -> std::result::Result<(), &'static str> {
    let mut i = 0;
    while i < pattern.len() {
        if pattern[i] == '[' {
            match pattern[i + 1..].iter().position(|&c| c == ']') {
                Some(0) | None => return Err("unterminated or empty character class"),
                Some(off) => i += off + 1,
            }
        }
        i += 1;
    }
    Ok(())
}

/// Returns the index just past a `[...]` class starting at `start` and whether `c` is in it.
fn match_class(pattern: &[char], start: usize, c: char) -> (usize, bool) {
    let mut i = start + 1;
    let negate = matches!(pattern.get(i), Some('!') | Some('^'));
    if negate {
        i += 1;
    }
    let mut hit = false;
    while pattern[i] != ']' {
        if pattern.get(i + 1) == Some(&'-') && pattern.get(i + 2).is_some_and(|&e| e != ']') {
            if pattern[i] <= c && c <= pattern[i + 2] {
                hit = true;
            }
            i += 3;
        } else {
            if pattern[i] == c {
                hit = true;
            }
            i += 1;
        }
    }
    (i + 1, hit != negate)
}

/// Iterative glob matching with single-star backtracking.
fn glob_match(pattern: &[char], text: &[char]) -> bool {
    let (mut p, mut t) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while t < text.len() {
        match pattern.get(p) {
            Some('*') => {
                star = Some((p, t));
                p += 1;
                continue;
            }
            Some('?') => {
                p += 1;
                t += 1;
                continue;
            }
            Some('[') => {
                let (next, hit) = match_class(pattern, p, text[t]);
                if hit {
                    p = next;
                    t += 1;
                    continue;
                }
            }
            Some(&c) if c == text[t] => {
                p += 1;
                t += 1;
                continue;
            }
            _ => {}
        }
        match star {
            Some((sp, st)) => {
                p = sp + 1;
                t = st + 1;
                star = Some((sp, st + 1));
            }
            None => return false,
        }
    }
    pattern[p..].iter().all(|&c| c == '*')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    #[serde(rename = "match")]
    pub matcher: NameMatcher,
    #[serde(rename = "class")]
    pub assign: ColumnClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Rule {
    pub fn new(pattern: &str, assign: ColumnClass) -> Result<Rule> {
        Ok(Rule {
            matcher: NameMatcher::new(pattern)?,
            assign,
            note: None,
        })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Rule {
        self.note = Some(note.into());
        self
    }
}

fn default_class() -> ColumnClass {
    ColumnClass::Nsa
}

/// Ordered rule list; the first matching rule wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationRules {
    #[serde(rename = "default", default = "default_class")]
    pub default_class: ColumnClass,
    #[serde(default)]
    pub rules: Vec<Rule>,
}

impl Default for ClassificationRules {
    fn default() -> Self {
        ClassificationRules {
            default_class: ColumnClass::Nsa,
            rules: Vec::new(),
        }
    }
}

impl ClassificationRules {
    pub fn new(rules: Vec<Rule>) -> Self {
        ClassificationRules {
            default_class: ColumnClass::Nsa,
            rules,
        }
    }

    /// The shipped rule set modelled on the HIPAA Safe Harbor identifier list.
    pub fn builtin() -> Self {
        ClassificationRules::from_json(BUILTIN_RULES).expect("shipped rules file is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRules(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidRules(format!("{}: {e}", path.display())))?;
        ClassificationRules::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rules serialize")
    }

    /// Index of the first rule accepting `name`.
    pub fn first_match(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.matcher.matches(name))
    }
}

/// Why a column received its class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Basis {
    Declared,
    Rule {
        index: usize,
        pattern: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub column: String,
    pub position: usize,
    pub class: ColumnClass,
    #[serde(flatten)]
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedTable {
    table: Table,
    assignments: Vec<Assignment>,
}

impl ClassifiedTable {
    pub fn table(&self) -> &Table {
        &self.table
    }

    /// One assignment per column, in column order.
    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn class_of(&self, column: &str) -> Result<ColumnClass> {
        let idx = self.table.column_index(column)?;
        Ok(self.assignments[idx].class)
    }

    pub fn class_at(&self, position: usize) -> ColumnClass {
        self.assignments[position].class
    }

    pub fn columns_of(&self, class: ColumnClass) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|a| a.class == class)
            .map(|a| a.column.as_str())
            .collect()
    }

    /// Columns classified QI, in column order.
    pub fn primary_qis(&self) -> Vec<&str> {
        self.columns_of(ColumnClass::Qi)
    }

    pub fn census(&self) -> Census {
        classification_census(self)
    }

    pub fn into_table(self) -> Table {
        self.table
    }
}

pub fn classify(table: Table, rules: &ClassificationRules) -> ClassifiedTable {
    let assignments = table
        .columns()
        .iter()
        .map(|col| {
            let (class, basis) = if let Some(class) = col.declared_class() {
                (class, Basis::Declared)
            } else if let Some(index) = rules.first_match(col.name()) {
                let rule = &rules.rules[index];
                let basis = Basis::Rule {
                    index,
                    pattern: rule.matcher.pattern().to_owned(),
                    note: rule.note.clone(),
                };
                (rule.assign, basis)
            } else {
                (rules.default_class, Basis::Default)
            };
            Assignment {
                column: col.name().to_owned(),
                position: col.position(),
                class,
                basis,
            }
        })
        .collect();
    ClassifiedTable { table, assignments }
}

/// Per-class column counts for one table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub did: usize,
    pub qi: usize,
    pub sa: usize,
    pub nsa: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.did + self.qi + self.sa + self.nsa
    }
}

pub fn classification_census(classified: &ClassifiedTable) -> Census {
    let mut census = Census::default();
    for a in &classified.assignments {
        match a.class {
            ColumnClass::Did => census.did += 1,
            ColumnClass::Qi => census.qi += 1,
            ColumnClass::Sa => census.sa += 1,
            ColumnClass::Nsa => census.nsa += 1,
        }
    }
    census
}
