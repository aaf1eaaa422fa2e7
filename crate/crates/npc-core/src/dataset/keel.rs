//! KEEL `.dat` reader and writer.
//!
//! The layout is `@relation`, a list of `@attribute` lines, optional
//! `@inputs`/`@outputs`, then `@data` followed by comma-separated rows.
//! Lines starting with `%` are comments. Attribute kinds `real` and
//! `integer` (with or without a `[min, max]` range) are accepted for
//! features; the class attribute must be nominal with exactly two values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use super::{minority_class_value, parse_feature, ClassLabel, DataError, Dataset, FeatureMatrix};

#[derive(Debug, Clone, PartialEq)]
enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug)]
struct Attribute {
    name: String,
    kind: AttributeKind,
    line: usize,
}

/// Parses a KEEL `.dat` stream into a [`Dataset`].
pub fn parse_keel(reader: impl BufRead) -> Result<Dataset, DataError> {
    let mut relation = String::new();
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut outputs: Option<(Vec<String>, usize)> = None;
    let mut in_data = false;

    let mut feature_rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    // Resolved once the header ends.
    let mut class_index: usize = 0;
    let mut class_values: Vec<String> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }

        if !in_data {
            let lower = text.to_ascii_lowercase();
            if let Some(rest) = strip_directive(text, &lower, "@relation") {
                relation = rest.trim().to_string();
            } else if let Some(rest) = strip_directive(text, &lower, "@attribute") {
                attributes.push(parse_attribute(rest, line_no)?);
            } else if let Some(rest) = strip_directive(text, &lower, "@inputs")
                .or_else(|| strip_directive(text, &lower, "@input"))
            {
                // Inputs are informational; the class is taken from @outputs
                // (or the last attribute), so just sanity-check the names.
                check_known_names(rest, &attributes, line_no)?;
            } else if let Some(rest) = strip_directive(text, &lower, "@outputs")
                .or_else(|| strip_directive(text, &lower, "@output"))
            {
                let names = split_names(rest);
                if names.len() != 1 {
                    return Err(DataError::Header {
                        line: line_no,
                        message: format!("expected a single output attribute, found {}", names.len()),
                    });
                }
                check_known_names(rest, &attributes, line_no)?;
                outputs = Some((names, line_no));
            } else if lower == "@data" {
                (class_index, class_values) =
                    resolve_class_attribute(&attributes, outputs.as_ref(), line_no)?;
                in_data = true;
            } else {
                return Err(DataError::Header {
                    line: line_no,
                    message: format!("unrecognized directive {text:?}"),
                });
            }
            continue;
        }

        let tokens: Vec<&str> = text.split(',').collect();
        if tokens.len() != attributes.len() {
            return Err(DataError::RowArity {
                line: line_no,
                expected: attributes.len(),
                found: tokens.len(),
            });
        }
        let mut row = Vec::with_capacity(attributes.len() - 1);
        for (col, token) in tokens.iter().enumerate() {
            if col == class_index {
                let value = token.trim();
                let matched = class_values
                    .iter()
                    .find(|v| v.as_str() == value || v.eq_ignore_ascii_case(value));
                let Some(matched) = matched else {
                    return Err(DataError::UnknownClassValue {
                        line: line_no,
                        token: value.to_string(),
                    });
                };
                *counts.entry(matched.clone()).or_insert(0) += 1;
                raw_labels.push(matched.clone());
            } else {
                row.push(parse_feature(token, line_no)?);
            }
        }
        feature_rows.push(row);
    }

    if !in_data {
        return Err(DataError::Header {
            line: 0,
            message: "missing @data section".to_string(),
        });
    }
    if feature_rows.is_empty() {
        return Err(DataError::Empty);
    }

    // The declared pair decides the mapping, so evaluation slices whose
    // data happens to hold a single class (a rare-class test fold) still
    // parse; training entry points reject single-class label vectors.
    let minority_value = minority_class_value(
        &class_values[0],
        &class_values[1],
        counts.get(&class_values[0]).copied().unwrap_or(0),
        counts.get(&class_values[1]).copied().unwrap_or(0),
    );
    let labels: Vec<ClassLabel> = raw_labels
        .iter()
        .map(|v| {
            if v == minority_value {
                ClassLabel::Minority
            } else {
                ClassLabel::Majority
            }
        })
        .collect();
    let feature_names: Vec<String> = attributes
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != class_index)
        .map(|(_, a)| a.name.clone())
        .collect();
    let features = FeatureMatrix::from_rows(&feature_rows)?;
    Dataset::new(relation, features, labels, feature_names)
}

/// Serializes a dataset back to KEEL text. Labels are written with the
/// `positive`/`negative` convention, so parsing the output reproduces the
/// input dataset exactly.
pub fn write_keel(dataset: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}", dataset.name);
    for name in &dataset.feature_names {
        let _ = writeln!(out, "@attribute {name} real");
    }
    let _ = writeln!(out, "@attribute class {{negative, positive}}");
    let _ = writeln!(out, "@inputs {}", dataset.feature_names.join(", "));
    let _ = writeln!(out, "@outputs class");
    let _ = writeln!(out, "@data");
    for (row, label) in dataset.features.iter_rows().zip(&dataset.labels) {
        for value in row {
            let _ = write!(out, "{value}, ");
        }
        let tag = if label.is_minority() { "positive" } else { "negative" };
        let _ = writeln!(out, "{tag}");
    }
    out
}

fn strip_directive<'a>(text: &'a str, lower: &str, directive: &str) -> Option<&'a str> {
    if lower.starts_with(directive) {
        let rest = &text[directive.len()..];
        if rest.is_empty() || rest.starts_with(char::is_whitespace) {
            return Some(rest);
        }
    }
    None
}

fn split_names(rest: &str) -> Vec<String> {
    rest.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn check_known_names(rest: &str, attributes: &[Attribute], line: usize) -> Result<(), DataError> {
    for name in split_names(rest) {
        if !attributes.iter().any(|a| a.name == name) {
            return Err(DataError::Header {
                line,
                message: format!("unknown attribute {name:?}"),
            });
        }
    }
    Ok(())
}

fn parse_attribute(rest: &str, line: usize) -> Result<Attribute, DataError> {
    let rest = rest.trim();
    if rest.is_empty() {
        return Err(DataError::Header {
            line,
            message: "attribute line has no name".to_string(),
        });
    }
    // Nominal values may be glued to the name: `class{negative,positive}`.
    if let Some(brace) = rest.find('{') {
        let name = rest[..brace].trim();
        let body = rest[brace..].trim();
        if name.is_empty() {
            return Err(DataError::Header {
                line,
                message: "nominal attribute has no name".to_string(),
            });
        }
        let Some(inner) = body.strip_prefix('{').and_then(|b| b.strip_suffix('}')) else {
            return Err(DataError::Header {
                line,
                message: "unterminated nominal value list".to_string(),
            });
        };
        let values = split_names(inner);
        if values.is_empty() {
            return Err(DataError::Header {
                line,
                message: "nominal attribute has no values".to_string(),
            });
        }
        return Ok(Attribute {
            name: name.to_string(),
            kind: AttributeKind::Nominal(values),
            line,
        });
    }

    let mut parts = rest.splitn(2, char::is_whitespace);
    let name = parts.next().unwrap_or_default().trim();
    let spec = parts.next().unwrap_or("").trim();
    // Ranges may be glued to the kind: `real[0.5,25.3]`.
    let kind_token = spec.split('[').next().unwrap_or("").trim().to_ascii_lowercase();
    match kind_token.as_str() {
        "real" | "integer" => Ok(Attribute {
            name: name.to_string(),
            kind: AttributeKind::Numeric,
            line,
        }),
        "" => Err(DataError::Header {
            line,
            message: format!("attribute {name:?} has no type"),
        }),
        other => Err(DataError::Header {
            line,
            message: format!("unsupported attribute type {other:?} for {name:?}"),
        }),
    }
}

/// Works out which attribute carries the class and validates it is a
/// two-valued nominal. Returns (column index, declared values).
fn resolve_class_attribute(
    attributes: &[Attribute],
    outputs: Option<&(Vec<String>, usize)>,
    data_line: usize,
) -> Result<(usize, Vec<String>), DataError> {
    if attributes.len() < 2 {
        return Err(DataError::Header {
            line: data_line,
            message: "need at least one feature attribute and a class attribute".to_string(),
        });
    }
    let index = match outputs {
        Some((names, line)) => attributes
            .iter()
            .position(|a| &a.name == &names[0])
            .ok_or_else(|| DataError::Header {
                line: *line,
                message: format!("unknown output attribute {:?}", names[0]),
            })?,
        None => attributes.len() - 1,
    };
    let class = &attributes[index];
    match &class.kind {
        AttributeKind::Nominal(values) => {
            if values.len() != 2 {
                return Err(DataError::ClassValueCount {
                    found: values.len(),
                    line: Some(class.line),
                });
            }
            Ok((index, values.clone()))
        }
        AttributeKind::Numeric => Err(DataError::Header {
            line: class.line,
            message: format!("class attribute {:?} must be nominal", class.name),
        }),
    }
}
