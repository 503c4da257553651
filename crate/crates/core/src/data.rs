//! Typed clinical tables.
//!
//! A [`Dataset`] is an immutable column store loaded from CSV plus a TOML
//! schema sidecar. Categorical cells (binary and ordinal) are stored as the
//! index of their level in the declared level order, so every cell is
//! numeric-codable without further lookups. Missing cells are `None`.
//!
//! [`DatasetView`] is an index overlay (selected columns, selected rows) over a
//! borrowed dataset; views never copy cells.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Category tag reserved for the outcome column.
pub const OUTCOME_CATEGORY: &str = "outcome";

#[derive(Error, Debug)]
pub enum DataError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("bad cell at row {row}, column `{column}`: `{value}` ({reason})")]
    BadCell {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("column `{column}` has a missing cell at row {row}; build a complete-case view first")]
    MissingCell { column: String, row: usize },
    #[error("dataset has no outcome column")]
    NoOutcome,
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema parse error: {0}")]
    SchemaParse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Binary,
    Ordinal,
    Continuous,
}

impl Kind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, Kind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: Kind,
    pub category: String,
    /// Admissible codes in their declared order. Empty for continuous columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub units: String,
    /// Outcome only: the level counted as the positive (event) class.
    /// Defaults to the first declared level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<String>,
}

impl ColumnSchema {
    pub fn continuous(name: &str, category: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: Kind::Continuous,
            category: category.to_string(),
            levels: Vec::new(),
            units: String::new(),
            positive: None,
        }
    }

    pub fn binary(name: &str, category: &str) -> Self {
        Self::categorical(name, category, 2)
    }

    /// Categorical column with levels `"0"`, `"1"`, ... Two levels make it binary.
    pub fn categorical(name: &str, category: &str, n_levels: usize) -> Self {
        Self {
            name: name.to_string(),
            kind: if n_levels == 2 { Kind::Binary } else { Kind::Ordinal },
            category: category.to_string(),
            levels: (0..n_levels).map(|l| l.to_string()).collect(),
            units: String::new(),
            positive: None,
        }
    }

    pub fn is_outcome(&self) -> bool {
        self.category == OUTCOME_CATEGORY
    }

    fn validate(&self) -> Result<(), DataError> {
        let bad = |msg: &str| Err(DataError::InvalidSchema(format!("column `{}`: {msg}", self.name)));
        if self.name.trim().is_empty() {
            return Err(DataError::InvalidSchema("empty column name".into()));
        }
        if self.category.trim().is_empty() {
            return bad("empty category");
        }
        match self.kind {
            Kind::Binary if self.levels.len() != 2 => return bad("binary columns need exactly 2 levels"),
            Kind::Ordinal if self.levels.len() < 2 => return bad("ordinal columns need at least 2 levels"),
            Kind::Continuous if !self.levels.is_empty() => return bad("continuous columns take no levels"),
            _ => {}
        }
        let distinct: HashSet<&String> = self.levels.iter().collect();
        if distinct.len() != self.levels.len() {
            return bad("duplicate levels");
        }
        if let Some(p) = &self.positive {
            if !self.levels.contains(p) {
                return bad("positive level is not one of the declared levels");
            }
        }
        Ok(())
    }
}

/// The sidecar schema file: a TOML document with one `[[column]]` table per column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    #[serde(rename = "column", default)]
    pub columns: Vec<ColumnSchema>,
}

impl Schema {
    pub fn from_toml_str(text: &str) -> Result<Self, DataError> {
        toml::from_str(text).map_err(|e| DataError::SchemaParse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    columns: Vec<Vec<Option<f64>>>,
    n_rows: usize,
    index: HashMap<String, usize>,
}

impl Dataset {
    /// Builds a dataset from column-major cells. Categorical cells hold level indices.
    pub fn new(schema: Vec<ColumnSchema>, columns: Vec<Vec<Option<f64>>>) -> Result<Self, DataError> {
        if schema.len() != columns.len() {
            return Err(DataError::SchemaMismatch(format!(
                "{} schema entries for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let mut index = HashMap::new();
        for (j, col) in schema.iter().enumerate() {
            col.validate()?;
            if index.insert(col.name.clone(), j).is_some() {
                return Err(DataError::InvalidSchema(format!("duplicate column `{}`", col.name)));
            }
        }
        if schema.iter().filter(|c| c.is_outcome()).count() > 1 {
            return Err(DataError::InvalidSchema("more than one outcome column".into()));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if n_rows == 0 {
            return Err(DataError::InvalidSchema("dataset has no rows".into()));
        }
        for (col, cells) in schema.iter().zip(&columns) {
            if cells.len() != n_rows {
                return Err(DataError::SchemaMismatch(format!("column `{}` has {} rows, expected {n_rows}", col.name, cells.len())));
            }
            for (row, cell) in cells.iter().enumerate() {
                if let Some(v) = cell {
                    let ok = match col.kind {
                        Kind::Continuous => v.is_finite(),
                        _ => v.fract() == 0.0 && *v >= 0.0 && (*v as usize) < col.levels.len(),
                    };
                    if !ok {
                        return Err(DataError::BadCell {
                            row,
                            column: col.name.clone(),
                            value: v.to_string(),
                            reason: "value does not conform to the column kind".into(),
                        });
                    }
                }
            }
        }
        Ok(Self { schema, columns, n_rows, index })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn column_schema(&self, col: usize) -> &ColumnSchema {
        &self.schema[col]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schema.iter().map(|c| c.name.as_str())
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DataError> {
        self.index.get(name).copied().ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, col: usize) -> &[Option<f64>] {
        &self.columns[col]
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.columns[col][row]
    }

    pub fn missing_count(&self, col: usize) -> usize {
        self.columns[col].iter().filter(|c| c.is_none()).count()
    }

    pub fn outcome_index(&self) -> Result<usize, DataError> {
        self.schema.iter().position(|c| c.is_outcome()).ok_or(DataError::NoOutcome)
    }

    /// Level index of the positive class of a categorical column.
    pub fn positive_code(&self, col: usize) -> usize {
        let c = &self.schema[col];
        c.positive.as_ref().and_then(|p| c.levels.iter().position(|l| l == p)).unwrap_or(0)
    }

    /// View over every row and the named columns, missing cells included.
    pub fn view<S: AsRef<str>>(&self, cols: &[S]) -> Result<DatasetView<'_>, DataError> {
        let columns = cols.iter().map(|c| self.column_index(c.as_ref())).collect::<Result<Vec<_>, _>>()?;
        Ok(DatasetView { source: self, columns, rows: (0..self.n_rows).collect() })
    }

    pub fn view_all(&self) -> DatasetView<'_> {
        DatasetView { source: self, columns: (0..self.n_cols()).collect(), rows: (0..self.n_rows).collect() }
    }

    /// Rows with no missing cell among `cols`, in original order.
    pub fn complete_cases<S: AsRef<str>>(&self, cols: &[S]) -> Result<DatasetView<'_>, DataError> {
        self.view(cols)?.complete_cases()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.names())?;
        for row in 0..self.n_rows {
            let record: Vec<String> = (0..self.n_cols()).map(|col| self.format_cell(row, col)).collect();
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_schema(&self) -> Schema {
        Schema { columns: self.schema.clone() }
    }

    fn format_cell(&self, row: usize, col: usize) -> String {
        match (self.columns[col][row], self.schema[col].kind) {
            (None, _) => String::new(),
            (Some(v), Kind::Continuous) => format!("{v}"),
            (Some(v), _) => self.schema[col].levels[v as usize].clone(),
        }
    }
}

fn parse_cell(col: &ColumnSchema, raw: &str) -> Result<Option<f64>, String> {
    let text = raw.trim();
    if text.is_empty() || text == "NA" {
        return Ok(None);
    }
    match col.kind {
        Kind::Continuous => match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err("not a finite number".into()),
        },
        _ => col
            .levels
            .iter()
            .position(|l| l == text)
            .map(|i| Some(i as f64))
            .ok_or_else(|| format!("not one of the levels {:?}", col.levels)),
    }
}

/// Loads a CSV file (header row, comma separated) validated against a TOML schema.
///
/// Empty cells and the literal `NA` are missing; any other unparseable or
/// out-of-level cell is an error naming its 1-based data row and column.
pub fn load_csv(path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let schema = Schema::load(schema_path)?;
    let file = fs::File::open(path)?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: Schema) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let declared: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    let header_set: HashSet<&str> = header.iter().map(String::as_str).collect();
    if header.len() != declared.len() || declared.iter().any(|n| !header_set.contains(n)) {
        let missing: Vec<&&str> = declared.iter().filter(|n| !header_set.contains(**n)).collect();
        let extra: Vec<&String> = header.iter().filter(|h| !declared.contains(&h.as_str())).collect();
        return Err(DataError::SchemaMismatch(format!(
            "header and schema disagree (missing from header: {missing:?}, not in schema: {extra:?})"
        )));
    }
    // schema order wins; map each schema column to its CSV position
    let positions: Vec<usize> = declared.iter().map(|n| header.iter().position(|h| h == n).unwrap()).collect();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); declared.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for (j, col) in schema.columns.iter().enumerate() {
            let raw = record.get(positions[j]).unwrap_or("");
            let cell = parse_cell(col, raw).map_err(|reason| DataError::BadCell {
                row: row + 1,
                column: col.name.clone(),
                value: raw.to_string(),
                reason,
            })?;
            columns[j].push(cell);
        }
    }
    Dataset::new(schema.columns, columns)
}

/// Index overlay selecting columns and rows of a borrowed [`Dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetView<'a> {
    source: &'a Dataset,
    columns: Vec<usize>,
    rows: Vec<usize>,
}

impl<'a> DatasetView<'a> {
    pub fn source(&self) -> &'a Dataset {
        self.source
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Dataset column indices of the selected columns.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn name(&self, col: usize) -> &'a str {
        &self.source.schema[self.columns[col]].name
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.n_cols()).map(|c| self.name(c).to_string()).collect()
    }

    pub fn schema(&self, col: usize) -> &'a ColumnSchema {
        &self.source.schema[self.columns[col]]
    }

    pub fn position(&self, name: &str) -> Result<usize, DataError> {
        self.columns
            .iter()
            .position(|&c| self.source.schema[c].name == name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.source.value(self.rows[row], self.columns[col])
    }

    /// Numeric coding of a column; fails on the first missing cell.
    pub fn numeric_column(&self, col: usize) -> Result<Vec<f64>, DataError> {
        let data = self.source.column(self.columns[col]);
        self.rows
            .iter()
            .map(|&r| data[r].ok_or_else(|| DataError::MissingCell { column: self.name(col).to_string(), row: r }))
            .collect()
    }

    /// Level indices of a categorical column; fails on the first missing cell.
    pub fn codes(&self, col: usize) -> Result<Vec<usize>, DataError> {
        Ok(self.numeric_column(col)?.into_iter().map(|v| v as usize).collect())
    }

    pub fn n_levels(&self, col: usize) -> usize {
        self.schema(col).levels.len()
    }

    pub fn is_complete(&self) -> bool {
        self.columns.iter().all(|&c| {
            let data = self.source.column(c);
            self.rows.iter().all(|&r| data[r].is_some())
        })
    }

    /// Keeps the rows with no missing cell among this view's columns.
    pub fn complete_cases(&self) -> Result<DatasetView<'a>, DataError> {
        let rows = self
            .rows
            .iter()
            .copied()
            .filter(|&r| self.columns.iter().all(|&c| self.source.value(r, c).is_some()))
            .collect();
        Ok(DatasetView { source: self.source, columns: self.columns.clone(), rows })
    }

    /// Same rows, a different column selection.
    pub fn with_columns<S: AsRef<str>>(&self, cols: &[S]) -> Result<DatasetView<'a>, DataError> {
        let columns = cols.iter().map(|c| self.source.column_index(c.as_ref())).collect::<Result<Vec<_>, _>>()?;
        Ok(DatasetView { source: self.source, columns, rows: self.rows.clone() })
    }

    /// Same columns, a subset of rows given as positions within this view.
    pub fn select_rows(&self, positions: &[usize]) -> DatasetView<'a> {
        DatasetView {
            source: self.source,
            columns: self.columns.clone(),
            rows: positions.iter().map(|&p| self.rows[p]).collect(),
        }
    }
}

/// Column-standardized numeric matrix (rows = subjects) with the moments used.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    pub names: Vec<String>,
    pub data: DMatrix<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl StandardizedMatrix {
    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn column(&self, j: usize) -> nalgebra::DVectorView<'_, f64> {
        self.data.column(j)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Inverts the affine map, recovering the raw numeric coding.
    pub fn unstandardize(&self) -> DMatrix<f64> {
        let mut raw = self.data.clone();
        for (j, mut col) in raw.column_iter_mut().enumerate() {
            col.iter_mut().for_each(|v| *v = *v * self.sds[j] + self.means[j]);
        }
        raw
    }

    /// Sample correlation matrix of the (already standardized) columns.
    pub fn correlation(&self) -> DMatrix<f64> {
        let n = self.n_rows() as f64;
        let mut c = self.data.tr_mul(&self.data) / (n - 1.0);
        for i in 0..c.nrows() {
            c[(i, i)] = 1.0;
        }
        c
    }
}

/// Standardizes each selected column to sample mean 0 and sd 1 (n−1 denominator).
pub fn standardize(v: &DatasetView<'_>) -> Result<StandardizedMatrix, DataError> {
    let n = v.n_rows();
    let p = v.n_cols();
    let mut data = DMatrix::zeros(n, p);
    let mut means = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(p);
    for j in 0..p {
        let col = v.numeric_column(j)?;
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let sd = var.sqrt();
        if n < 2 || !(sd > 0.0) || sd <= 1e-12 * mean.abs() {
            return Err(DataError::ZeroVariance(v.name(j).to_string()));
        }
        for (i, x) in col.iter().enumerate() {
            data[(i, j)] = (x - mean) / sd;
        }
        means.push(mean);
        sds.push(sd);
    }
    Ok(StandardizedMatrix { names: v.names(), data, means, sds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: String,
    pub total: usize,
    /// (positive, negative) outcome classes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub by_class: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub category: String,
    pub kind: Kind,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub units: String,
    pub available: usize,
    /// Non-missing counts among (positive, negative) outcome subjects.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub available_by_class: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    /// Labels of the (positive, negative) outcome levels, when split by outcome.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<(String, String)>,
    pub n_subjects: usize,
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1).then(|| (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), sd)
}

/// Per-column availability and distribution summary.
///
/// With `by_outcome`, subjects whose outcome is missing are left out so the
/// two class counts always add up to the column total.
pub fn summarize(d: &Dataset, by_outcome: bool) -> Result<SummaryTable, DataError> {
    let outcome = if by_outcome { Some(d.outcome_index()?) } else { None };
    let positive = outcome.map(|o| d.positive_code(o) as f64);
    let rows: Vec<usize> = match outcome {
        Some(o) => (0..d.n_rows()).filter(|&r| d.value(r, o).is_some()).collect(),
        None => (0..d.n_rows()).collect(),
    };
    let class_of = |r: usize| -> Option<bool> { outcome.map(|o| d.value(r, o) == positive) };
    let mut out = Vec::with_capacity(d.n_cols());
    for (j, col) in d.schema().iter().enumerate() {
        let present: Vec<usize> = rows.iter().copied().filter(|&r| d.value(r, j).is_some()).collect();
        let split = |subset: &[usize]| -> (usize, usize) {
            let pos = subset.iter().filter(|&&r| class_of(r) == Some(true)).count();
            (pos, subset.len() - pos)
        };
        let available_by_class = outcome.map(|_| split(&present));
        let (mean, sd, levels) = match col.kind {
            Kind::Continuous => {
                let values: Vec<f64> = present.iter().map(|&r| d.value(r, j).unwrap()).collect();
                let (m, s) = mean_sd(&values);
                (m, s, Vec::new())
            }
            _ => {
                let levels = col
                    .levels
                    .iter()
                    .enumerate()
                    .map(|(li, level)| {
                        let with_level: Vec<usize> =
                            present.iter().copied().filter(|&r| d.value(r, j) == Some(li as f64)).collect();
                        LevelCount {
                            level: level.clone(),
                            total: with_level.len(),
                            by_class: outcome.map(|_| split(&with_level)),
                        }
                    })
                    .collect();
                (None, None, levels)
            }
        };
        out.push(SummaryRow {
            name: col.name.clone(),
            category: col.category.clone(),
            kind: col.kind,
            units: col.units.clone(),
            available: present.len(),
            available_by_class,
            mean,
            sd,
            levels,
        });
    }
    let classes = outcome.map(|o| {
        let c = d.column_schema(o);
        let p = d.positive_code(o);
        let negative = (0..c.levels.len()).find(|&l| l != p).unwrap_or(0);
        (c.levels[p].clone(), c.levels[negative].clone())
    });
    Ok(SummaryTable { classes, n_subjects: rows.len(), rows: out })
}

/// Feature columns grouped by category, in order of first appearance. The outcome is excluded.
pub fn categories(d: &Dataset) -> Vec<(String, Vec<String>)> {
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();
    for c in d.schema().iter().filter(|c| !c.is_outcome()) {
        match groups.iter_mut().find(|(cat, _)| *cat == c.category) {
            Some((_, cols)) => cols.push(c.name.clone()),
            None => groups.push((c.category.clone(), vec![c.name.clone()])),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = r#"
[[column]]
name = "AGE"
kind = "continuous"
category = "demographic"
units = "years"

[[column]]
name = "COPD"
kind = "binary"
category = "respiratory"
levels = ["0", "1"]

[[column]]
name = "OUTCOME"
kind = "binary"
category = "outcome"
levels = ["0", "1"]
"#;

    fn load(csv: &str) -> Result<Dataset, DataError> {
        read_csv(csv.as_bytes(), Schema::from_toml_str(SCHEMA).unwrap())
    }

    #[test]
    fn loads_three_rows() {
        let d = load("AGE,COPD,OUTCOME\n70,1,0\n55,0,1\n61.5,0,1\n").unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_cols(), 3);
        assert_eq!(d.value(2, 0), Some(61.5));
        assert_eq!(d.outcome_index().unwrap(), 2);
    }

    #[test]
    fn out_of_level_cell_is_reported() {
        let err = load("AGE,COPD,OUTCOME\n70,1,0\n55,2,1\n").unwrap_err();
        match err {
            DataError::BadCell { row, column, value, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "COPD");
                assert_eq!(value, "2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_and_na_cells_are_missing() {
        let d = load("AGE,COPD,OUTCOME\n,1,0\nNA,0,1\n40,,1\n").unwrap();
        assert_eq!(d.value(0, 0), None);
        assert_eq!(d.value(1, 0), None);
        assert_eq!(d.value(2, 1), None);
        assert_eq!(d.missing_count(0), 2);
    }

    #[test]
    fn garbage_in_continuous_column_is_an_error() {
        assert!(matches!(load("AGE,COPD,OUTCOME\nold,1,0\n"), Err(DataError::BadCell { .. })));
    }

    #[test]
    fn header_mismatch() {
        assert!(matches!(load("AGE,COPD,DEATH\n1,1,0\n"), Err(DataError::SchemaMismatch(_))));
    }

    #[test]
    fn header_order_may_differ_from_schema() {
        let d = load("OUTCOME,AGE,COPD\n1,50,0\n").unwrap();
        assert_eq!(d.value(0, 0), Some(50.0));
        assert_eq!(d.value(0, 2), Some(1.0));
    }

    #[test]
    fn schema_invariants() {
        let mut s = Schema::from_toml_str(SCHEMA).unwrap();
        s.columns[1].levels.push("2".into());
        assert!(matches!(Dataset::new(s.columns, vec![vec![Some(1.0)]; 3]), Err(DataError::InvalidSchema(_))));
    }

    #[test]
    fn complete_cases_drops_missing_rows() {
        let d = load("AGE,COPD,OUTCOME\n1,0,0\n2,0,0\n,1,1\n4,1,1\n5,0,1\n").unwrap();
        let v = d.complete_cases(&["AGE"]).unwrap();
        assert_eq!(v.rows(), &[0, 1, 3, 4]);
        let all = d.complete_cases::<&str>(&[]).unwrap();
        assert_eq!(all.n_rows(), 5);
        assert!(matches!(d.complete_cases(&["NOPE"]), Err(DataError::UnknownColumn(_))));
    }

    #[test]
    fn standardize_symmetric_column() {
        let d = Dataset::new(
            vec![ColumnSchema::continuous("x", "c")],
            vec![vec![Some(1.0), Some(2.0), Some(3.0)]],
        )
        .unwrap();
        let m = standardize(&d.view_all()).unwrap();
        let col: Vec<f64> = m.column(0).iter().copied().collect();
        assert_eq!(col, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn standardize_constant_column_fails() {
        let d = Dataset::new(
            vec![ColumnSchema::continuous("x", "c"), ColumnSchema::continuous("k", "c")],
            vec![vec![Some(1.0), Some(2.0), Some(3.0)], vec![Some(5.0); 3]],
        )
        .unwrap();
        match standardize(&d.view_all()) {
            Err(DataError::ZeroVariance(name)) => assert_eq!(name, "k"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn summarize_counts_by_class() {
        // 10 positive (death, level "0") and 20 negative subjects, feature all 1s
        let outcome: Vec<Option<f64>> = (0..30).map(|i| Some(if i < 10 { 0.0 } else { 1.0 })).collect();
        let d = Dataset::new(
            vec![
                ColumnSchema::binary("F", "symptoms"),
                ColumnSchema::continuous("EMPTY", "blood"),
                ColumnSchema::binary("OUTCOME", OUTCOME_CATEGORY),
            ],
            vec![vec![Some(1.0); 30], vec![None; 30], outcome],
        )
        .unwrap();
        let t = summarize(&d, true).unwrap();
        assert_eq!(t.rows[0].available_by_class, Some((10, 20)));
        assert_eq!(t.rows[0].levels[1].by_class, Some((10, 20)));
        assert_eq!(t.rows[1].available_by_class, Some((0, 0)));
        assert_eq!(t.rows[1].mean, None);
        assert_eq!(t.classes, Some(("0".into(), "1".into())));
    }
}
