//! Immutable column-major tables of canonicalized cell values.
//!
//! Every column is dictionary encoded at construction time: `codes[row]`
//! indexes into the column's dictionary, and dictionary entries are ordered
//! by first appearance. Two cells are equal exactly when their codes are
//! equal, which is what the grouping engine in [`crate::metrics`] relies on.

use std::fmt;
use std::io::{Read, Write};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::classify::ColumnClass;
use crate::error::{Error, Result};

pub const DEFAULT_NA_TOKEN: &str = "NA";

/// A single canonical cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellValue {
    Present(String),
    Missing,
}

impl CellValue {
    /// Trims ASCII whitespace; empty text and the `na_token` become [`CellValue::Missing`].
    pub fn canonical(raw: &str, na_token: &str) -> CellValue {
        let trimmed = raw.trim_ascii();
        if trimmed.is_empty() || trimmed == na_token {
            CellValue::Missing
        } else {
            CellValue::Present(trimmed.to_owned())
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            CellValue::Present(s) => Some(s),
            CellValue::Missing => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, CellValue::Missing)
    }
}

impl From<&str> for CellValue {
    fn from(raw: &str) -> Self {
        CellValue::canonical(raw, DEFAULT_NA_TOKEN)
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Present(s) => f.write_str(s),
            CellValue::Missing => f.write_str(DEFAULT_NA_TOKEN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    /// Manual classification that outranks every pattern rule.
    pub declared_class: Option<ColumnClass>,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    meta: ColumnMeta,
    dictionary: Vec<CellValue>,
    codes: Vec<u32>,
}

impl Column {
    fn encode(meta: ColumnMeta, cells: impl IntoIterator<Item = CellValue>) -> Column {
        let mut index: FxHashMap<CellValue, u32> = FxHashMap::default();
        let mut dictionary = Vec::new();
        let codes = cells
            .into_iter()
            .map(|cell| {
                *index.entry(cell).or_insert_with_key(|cell| {
                    dictionary.push(cell.clone());
                    (dictionary.len() - 1) as u32
                })
            })
            .collect();
        Column {
            meta,
            dictionary,
            codes,
        }
    }

    /// Builds a column from pre-assigned codes into `symbols`, renumbering so
    /// that the dictionary is dense and ordered by first appearance.
    fn from_codes(meta: ColumnMeta, symbols: &[CellValue], raw_codes: &[u32]) -> Column {
        const UNSEEN: u32 = u32::MAX;
        let mut remap = vec![UNSEEN; symbols.len()];
        let mut dictionary = Vec::new();
        let codes = raw_codes
            .iter()
            .map(|&raw| {
                let slot = &mut remap[raw as usize];
                if *slot == UNSEEN {
                    *slot = dictionary.len() as u32;
                    dictionary.push(symbols[raw as usize].clone());
                }
                *slot
            })
            .collect();
        Column {
            meta,
            dictionary,
            codes,
        }
    }

    pub fn meta(&self) -> &ColumnMeta {
        &self.meta
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn position(&self) -> usize {
        self.meta.position
    }

    pub fn declared_class(&self) -> Option<ColumnClass> {
        self.meta.declared_class
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn value(&self, row: usize) -> &CellValue {
        &self.dictionary[self.codes[row] as usize]
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = &CellValue> + '_ {
        self.codes.iter().map(|&c| &self.dictionary[c as usize])
    }

    /// Dense per-row symbol codes in `0..cardinality()`.
    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    /// Number of distinct symbols (all Missing cells share one symbol).
    pub fn cardinality(&self) -> usize {
        self.dictionary.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    row_count: usize,
}

impl Table {
    /// Builds a table from named columns of already-canonical cells.
    pub fn from_columns<N, C>(name: impl Into<String>, columns: Vec<(N, C)>) -> Result<Table>
    where
        N: Into<String>,
        C: IntoIterator<Item = CellValue>,
    {
        let name = name.into();
        let mut built = Vec::with_capacity(columns.len());
        for (position, (col_name, cells)) in columns.into_iter().enumerate() {
            let meta = ColumnMeta {
                name: col_name.into(),
                declared_class: None,
                position,
            };
            built.push(Column::encode(meta, cells));
        }
        Table::assemble(name, built)
    }

    /// Builds a table from columns given as codes into per-column symbol lists.
    pub fn from_coded_columns(
        name: impl Into<String>,
        columns: Vec<(String, Vec<CellValue>, Vec<u32>)>,
    ) -> Result<Table> {
        let mut built = Vec::with_capacity(columns.len());
        for (position, (col_name, symbols, codes)) in columns.into_iter().enumerate() {
            if let Some(bad) = codes.iter().find(|&&c| c as usize >= symbols.len()) {
                return Err(Error::ingest(
                    None,
                    format!(
                        "column {col_name}: code {bad} outside its {} symbols",
                        symbols.len()
                    ),
                ));
            }
            let meta = ColumnMeta {
                name: col_name,
                declared_class: None,
                position,
            };
            built.push(Column::from_codes(meta, &symbols, &codes));
        }
        Table::assemble(name.into(), built)
    }

    /// Builds a table from row-major cells under `header`.
    pub fn from_rows<H: AsRef<str>>(
        name: impl Into<String>,
        header: &[H],
        rows: Vec<Vec<CellValue>>,
    ) -> Result<Table> {
        let mut columns: Vec<Vec<CellValue>> = vec![Vec::with_capacity(rows.len()); header.len()];
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != header.len() {
                return Err(Error::ingest(
                    Some(i + 1),
                    format!("expected {} fields, found {}", header.len(), row.len()),
                ));
            }
            for (col, cell) in columns.iter_mut().zip(row) {
                col.push(cell);
            }
        }
        let named = header
            .iter()
            .map(|h| h.as_ref().to_owned())
            .zip(columns)
            .collect();
        Table::from_columns(name, named)
    }

    fn assemble(name: String, columns: Vec<Column>) -> Result<Table> {
        if columns.is_empty() {
            return Err(Error::ingest(None, "table has zero columns"));
        }
        let mut seen: FxHashMap<String, &str> = FxHashMap::default();
        for col in &columns {
            if col.name().is_empty() {
                return Err(Error::ingest(
                    None,
                    format!("column at position {} has an empty name", col.position()),
                ));
            }
            if let Some(prev) = seen.insert(col.name().to_lowercase(), col.name()) {
                return Err(Error::ingest(
                    None,
                    format!(
                        "duplicate column name {:?} (conflicts with {prev:?})",
                        col.name()
                    ),
                ));
            }
        }
        let row_count = columns[0].len();
        if let Some(bad) = columns.iter().find(|c| c.len() != row_count) {
            return Err(Error::ingest(
                None,
                format!(
                    "column {} has {} cells, expected {row_count}",
                    bad.name(),
                    bad.len()
                ),
            ));
        }
        Ok(Table {
            name,
            columns,
            row_count,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.columns.iter().map(Column::name)
    }

    /// Position of `name`, compared case-insensitively.
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name() == name)
            .or_else(|| {
                let lowered = name.to_lowercase();
                self.columns
                    .iter()
                    .position(|c| c.name().to_lowercase() == lowered)
            })
            .ok_or_else(|| Error::NoSuchColumn(name.to_owned()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.column_index(name).map(|i| &self.columns[i])
    }

    /// The cells of `name` in row order.
    pub fn column_values(&self, name: &str) -> Result<Vec<CellValue>> {
        Ok(self.column(name)?.values().cloned().collect())
    }

    pub fn row(&self, row: usize) -> Vec<&CellValue> {
        self.columns.iter().map(|c| c.value(row)).collect()
    }

    /// Row-major copy of every cell.
    pub fn rows(&self) -> Vec<Vec<CellValue>> {
        (0..self.row_count)
            .map(|r| self.columns.iter().map(|c| c.value(r).clone()).collect())
            .collect()
    }

    /// Returns a copy with `column` pinned to `class`.
    pub fn with_declared_class(mut self, column: &str, class: ColumnClass) -> Result<Table> {
        let idx = self.column_index(column)?;
        self.columns[idx].meta.declared_class = Some(class);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Table {
        self.name = name.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub table_name: String,
    pub na_token: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: b',',
            has_header: true,
            table_name: "table".to_owned(),
            na_token: DEFAULT_NA_TOKEN.to_owned(),
        }
    }
}

impl IngestOptions {
    pub fn named(table_name: impl Into<String>) -> Self {
        IngestOptions {
            table_name: table_name.into(),
            ..Default::default()
        }
    }
}

const UTF8_BOM: &[u8] = b"\xEF\xBB\xBF";

/// Parses RFC-4180 delimited text into a canonicalized [`Table`].
///
/// Ragged rows are reported with their 1-based data row number (the header
/// line is not counted).
pub fn ingest_delimited<R: Read>(mut source: R, options: &IngestOptions) -> Result<Table> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let body = bytes.strip_prefix(UTF8_BOM).unwrap_or(&bytes);

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(body);

    let mut records = reader.records();
    let mut header: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<CellValue>> = Vec::new();
    let mut data_row = 0usize;

    if options.has_header {
        match records.next() {
            Some(rec) => {
                let rec = rec.map_err(|e| Error::ingest(None, format!("header: {e}")))?;
                let names: Vec<String> = rec.iter().map(|f| f.trim_ascii().to_owned()).collect();
                columns = vec![Vec::new(); names.len()];
                header = Some(names);
            }
            None => return Err(Error::ingest(None, "table has zero columns")),
        }
    }

    for rec in records {
        data_row += 1;
        let rec = rec.map_err(|e| Error::ingest(Some(data_row), e.to_string()))?;
        if header.is_none() {
            let names = (0..rec.len())
                .map(|i| format!("col_{i}"))
                .collect::<Vec<_>>();
            columns = vec![Vec::new(); names.len()];
            header = Some(names);
        }
        let width = columns.len();
        if rec.len() != width {
            return Err(Error::ingest(
                Some(data_row),
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            col.push(CellValue::canonical(field, &options.na_token));
        }
    }

    let header = header.ok_or_else(|| Error::ingest(None, "table has zero columns"))?;
    Table::from_columns(
        options.table_name.clone(),
        header.into_iter().zip(columns).collect(),
    )
}

/// Writes `table` as delimited text with a header line; Missing cells are
/// written as `na_token`.
pub fn write_delimited<W: Write>(
    table: &Table,
    sink: W,
    delimiter: u8,
    na_token: &str,
) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(sink);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(table.column_names()).map_err(io)?;
    let mut record: Vec<&str> = Vec::with_capacity(table.column_count());
    for r in 0..table.row_count() {
        record.clear();
        record.extend(
            table
                .columns()
                .iter()
                .map(|c| c.value(r).as_str().unwrap_or(na_token)),
        );
        writer.write_record(&record).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}
