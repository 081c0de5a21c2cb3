//! Parsers for CSV and KEEL-style `.dat` files.
//!
//! Both formats yield a [`Dataset`] with labels remapped to contiguous ids in
//! first-appearance order; the original label strings are kept as class
//! names. Feature cells must be numeric; `?` cells are rejected rather than
//! imputed, and nominal input attributes in KEEL files are rejected rather
//! than encoded.

use std::path::Path;

use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Input file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Csv,
    Keel,
}

impl SourceFormat {
    /// Infer the format from a file extension (`.dat` -> KEEL, else CSV).
    pub fn from_path(path: &Path) -> SourceFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("dat") => SourceFormat::Keel,
            _ => SourceFormat::Csv,
        }
    }
}

/// Label column selector for CSV inputs; the default is the last column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Parse a CLI/config selector: digits are an index, anything else a name.
    pub fn parse(text: &str) -> LabelColumn {
        match text.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(text.to_string()),
        }
    }
}

/// SHA-256 of the raw input bytes, hex-encoded; recorded in reports so a
/// result can be tied to the exact file that produced it.
pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Load a dataset from a file, inferring the format from the extension.
pub fn load_path(path: &Path, label: Option<&LabelColumn>) -> Result<Dataset> {
    let bytes = std::fs::read(path)?;
    match SourceFormat::from_path(path) {
        SourceFormat::Csv => parse_csv(&bytes, label),
        SourceFormat::Keel => parse_keel(&bytes),
    }
}

fn parse_err(line: usize, column: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: column.to_string(),
        reason: reason.into(),
    }
}

/// Trim whitespace and one pair of surrounding double quotes.
fn clean_cell(cell: &str) -> &str {
    let cell = cell.trim();
    cell.strip_prefix('"')
        .and_then(|c| c.strip_suffix('"'))
        .unwrap_or(cell)
}

fn parse_feature(cell: &str, line: usize, column: &str) -> Result<f64> {
    if cell == "?" {
        return Err(parse_err(line, column, "missing value `?` is not supported"));
    }
    let value: f64 = cell
        .parse()
        .map_err(|_| parse_err(line, column, format!("expected a number, got `{cell}`")))?;
    if !value.is_finite() {
        return Err(parse_err(line, column, format!("non-finite value `{cell}`")));
    }
    Ok(value)
}

/// Intern a label string, assigning class ids in first-appearance order.
fn intern_label(names: &mut Vec<String>, label: &str) -> usize {
    match names.iter().position(|n| n == label) {
        Some(id) => id,
        None => {
            names.push(label.to_string());
            names.len() - 1
        }
    }
}

/// Parse comma-separated UTF-8 text with a mandatory header row.
///
/// `label` selects the label column by name or zero-based index; `None`
/// means the last column. Lines may end in LF or CRLF; cells may be quoted
/// and carry surrounding whitespace.
pub fn parse_csv(bytes: &[u8], label: Option<&LabelColumn>) -> Result<Dataset> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| parse_err(0, "-", format!("not valid UTF-8: {e}")))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "-", "empty file"))?;
    let columns: Vec<String> = header.split(',').map(|c| clean_cell(c).to_string()).collect();
    let arity = columns.len();

    let label_idx = match label {
        None => arity - 1,
        Some(LabelColumn::Index(i)) => {
            if *i >= arity {
                return Err(Error::Label(format!("index {i} out of {arity} columns")));
            }
            *i
        }
        Some(LabelColumn::Name(name)) => columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Label(name.clone()))?,
    };
    if arity < 2 {
        return Err(parse_err(1, "-", "need at least one feature and a label column"));
    }

    let feature_cols: Vec<usize> = (0..arity).filter(|&j| j != label_idx).collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&j| columns[j].clone()).collect();

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut n_rows = 0usize;

    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(clean_cell).collect();
        if cells.len() != arity {
            return Err(parse_err(
                line_no,
                "-",
                format!("expected {arity} cells, found {}", cells.len()),
            ));
        }
        for &j in &feature_cols {
            values.push(parse_feature(cells[j], line_no, &columns[j])?);
        }
        labels.push(intern_label(&mut class_names, cells[label_idx]));
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(parse_err(1, "-", "no data rows after the header"));
    }

    let features = Array2::from_shape_vec((n_rows, feature_cols.len()), values)?;
    Dataset::new(
        features,
        labels,
        feature_names,
        class_names,
        columns[label_idx].clone(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeelType {
    Numeric,
    Nominal,
}

/// Parse a KEEL `.dat` file: `@relation`, one `@attribute` per column,
/// optional `@inputs`/`@outputs`, then `@data` rows.
///
/// The `@outputs` attribute (default: the last one) becomes the label.
/// Directives are case-insensitive and `%` lines are comments.
pub fn parse_keel(bytes: &[u8]) -> Result<Dataset> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| parse_err(0, "-", format!("not valid UTF-8: {e}")))?;

    let mut attr_names: Vec<String> = Vec::new();
    let mut attr_types: Vec<KeelType> = Vec::new();
    let mut outputs: Option<Vec<String>> = None;
    let mut in_data = false;
    let mut saw_relation = false;

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut n_rows = 0usize;
    // Resolved lazily once the header is complete.
    let mut label_idx: Option<usize> = None;
    let mut feature_cols: Vec<usize> = Vec::new();

    for (line_no, raw) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data && line.starts_with('@') {
            let (directive, rest) = match line.find(char::is_whitespace) {
                Some(pos) => (&line[..pos], line[pos..].trim()),
                None => (line, ""),
            };
            match directive.to_ascii_lowercase().as_str() {
                "@relation" => saw_relation = true,
                "@attribute" => {
                    let name_end = rest
                        .find(|c: char| c.is_whitespace() || c == '{')
                        .unwrap_or(rest.len());
                    let name = rest[..name_end].trim();
                    if name.is_empty() {
                        return Err(parse_err(line_no, "-", "@attribute without a name"));
                    }
                    let type_spec = rest[name_end..].trim().to_ascii_lowercase();
                    let kind = if type_spec.starts_with('{') {
                        KeelType::Nominal
                    } else if type_spec.starts_with("real")
                        || type_spec.starts_with("integer")
                        || type_spec.starts_with("numeric")
                    {
                        KeelType::Numeric
                    } else {
                        return Err(parse_err(
                            line_no,
                            name,
                            format!("unknown attribute type `{}`", rest[name_end..].trim()),
                        ));
                    };
                    attr_names.push(name.to_string());
                    attr_types.push(kind);
                }
                "@inputs" => {
                    // Informative only; the output declaration drives labeling.
                }
                "@outputs" | "@output" => {
                    outputs = Some(
                        rest.split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect(),
                    );
                }
                "@data" => {
                    if attr_names.is_empty() {
                        return Err(parse_err(line_no, "-", "@data before any @attribute"));
                    }
                    let idx = match &outputs {
                        Some(outs) => {
                            if outs.len() != 1 {
                                return Err(parse_err(
                                    line_no,
                                    "-",
                                    format!("expected exactly one output attribute, got {}", outs.len()),
                                ));
                            }
                            attr_names
                                .iter()
                                .position(|n| n == &outs[0])
                                .ok_or_else(|| Error::Label(outs[0].clone()))?
                        }
                        None => attr_names.len() - 1,
                    };
                    for (j, kind) in attr_types.iter().enumerate() {
                        if j != idx && *kind == KeelType::Nominal {
                            return Err(parse_err(
                                line_no,
                                &attr_names[j],
                                "nominal input attributes are not supported",
                            ));
                        }
                    }
                    label_idx = Some(idx);
                    feature_cols = (0..attr_names.len()).filter(|&j| j != idx).collect();
                    in_data = true;
                }
                other => {
                    return Err(parse_err(line_no, "-", format!("unknown directive `{other}`")));
                }
            }
            continue;
        }
        if !in_data {
            return Err(parse_err(line_no, "-", "data row before @data"));
        }
        let idx = label_idx.expect("set when @data was seen");
        let cells: Vec<&str> = line.split(',').map(clean_cell).collect();
        if cells.len() != attr_names.len() {
            return Err(parse_err(
                line_no,
                "-",
                format!("expected {} cells, found {}", attr_names.len(), cells.len()),
            ));
        }
        for &j in &feature_cols {
            values.push(parse_feature(cells[j], line_no, &attr_names[j])?);
        }
        labels.push(intern_label(&mut class_names, cells[idx]));
        n_rows += 1;
    }

    if !in_data {
        return Err(parse_err(0, "-", "missing @data section"));
    }
    if !saw_relation {
        return Err(parse_err(0, "-", "missing @relation directive"));
    }
    if n_rows == 0 {
        return Err(parse_err(0, "-", "no data rows after @data"));
    }

    let idx = label_idx.expect("set when @data was seen");
    let features = Array2::from_shape_vec((n_rows, feature_cols.len()), values)?;
    Dataset::new(
        features,
        labels,
        feature_cols.iter().map(|&j| attr_names[j].clone()).collect(),
        class_names,
        attr_names[idx].clone(),
    )
}
