//! CSV tables: one column per schema variable plus the target column.

use takeover_core::schema::{self, merged_schema, study_schema, TIME_BUDGET};
use takeover_core::{Dataset, DatasetError, Provenance, Sample, VariableSpec};

/// Default name of the target column.
pub const TARGET_COLUMN: &str = "takeover_time";

/// Parses a comma-separated table whose header names every schema variable
/// once plus the `target` column, in any order. Empty cells are missing
/// values. Rows keep file order; the dataset keeps `schema` order. Row
/// numbers in errors count data rows from 1.
pub fn parse_table(text: &str, schema: &[VariableSpec], target: &str, provenance: Provenance) -> Result<Dataset, DatasetError> {
    schema::validate_schema(schema)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| DatasetError::Malformed { row: 0, message: e.to_string() })?.clone();

    // slots[c] = Some(j) for schema column j, None for the target.
    let mut slots: Vec<Option<usize>> = Vec::with_capacity(header.len());
    let mut target_at = None;
    let mut seen = vec![false; schema.len()];
    for (c, name) in header.iter().enumerate() {
        if name == target {
            if target_at.replace(c).is_some() {
                return Err(DatasetError::HeaderMismatch(format!("column `{name}` appears twice")));
            }
            slots.push(None);
            continue;
        }
        let j = schema::index_of(schema, name).ok_or_else(|| DatasetError::HeaderMismatch(format!("unknown column `{name}`")))?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(DatasetError::HeaderMismatch(format!("column `{name}` appears twice")));
        }
        slots.push(Some(j));
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        return Err(DatasetError::HeaderMismatch(format!("missing column `{}`", schema[j].name)));
    }
    target_at.ok_or_else(|| DatasetError::HeaderMismatch(format!("missing target column `{target}`")))?;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DatasetError::Malformed { row, message: e.to_string() })?;
        if record.len() != header.len() {
            return Err(DatasetError::Arity { row, expected: header.len(), found: record.len() });
        }
        let mut values = vec![None; schema.len()];
        let mut y = None;
        for (c, cell) in record.iter().enumerate() {
            let column = || header[c].to_string();
            let value = if cell.is_empty() {
                None
            } else {
                Some(cell.parse::<f64>().map_err(|_| DatasetError::NotNumeric { row, column: column(), cell: cell.to_string() })?)
            };
            match slots[c] {
                Some(j) => values[j] = value,
                None => y = Some(value.ok_or(DatasetError::MissingTarget { row })?),
            }
        }
        rows.push(Sample::new(values, y.ok_or(DatasetError::MissingTarget { row })?));
    }
    Dataset::new(schema.to_vec(), rows, provenance)
}

/// Picks the built-in schema a header belongs to: the merged schema when it
/// names the combined time budget, the eighteen-variable study schema otherwise.
pub fn infer_schema(text: &str) -> Vec<VariableSpec> {
    let header = text.lines().next().unwrap_or("");
    if header.split(',').any(|c| c.trim() == TIME_BUDGET) {
        merged_schema()
    } else {
        study_schema()
    }
}

/// Writes `d` in schema order with the target last. Numbers use the shortest
/// decimal form that parses back to the same value; missing cells are empty.
pub fn write_table(d: &Dataset, target: &str) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = d.feature_names();
    header.push(target.to_string());
    // Writing to a Vec cannot fail.
    writer.write_record(&header).expect("in-memory write");
    for row in d.rows() {
        let cells = row.values.iter().map(|v| v.map(number).unwrap_or_default()).chain(std::iter::once(number(row.target)));
        writer.write_record(cells).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Shortest round-trip decimal representation.
pub fn number(x: f64) -> String {
    format!("{x}")
}
