use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{ColumnKind, Dataset, FeatureColumn, FeatureOrigin, Schema, MAX_LEVELS};
use crate::error::{Error, Result};

/// Load a comma-separated file with a header row according to `schema`.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    read_csv(File::open(path)?, schema)
}

enum Slot {
    Numeric { col: usize },
    Categorical { levels: Vec<String>, codes: Vec<usize> },
    Target,
    TrueProb,
    Ignore,
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    for spec in schema.columns() {
        if !header.iter().any(|h| h == &spec.name) {
            return Err(Error::Schema {
                column: spec.name.clone(),
                reason: "missing from header".into(),
            });
        }
    }

    let mut numeric_count = 0;
    let mut slots = Vec::with_capacity(header.len());
    for name in &header {
        let kind = schema.kind_of(name).ok_or_else(|| Error::Schema {
            column: name.clone(),
            reason: "not declared in schema".into(),
        })?;
        slots.push(match kind {
            ColumnKind::Numeric => {
                numeric_count += 1;
                Slot::Numeric {
                    col: numeric_count - 1,
                }
            }
            ColumnKind::Categorical => Slot::Categorical {
                levels: Vec::new(),
                codes: Vec::new(),
            },
            ColumnKind::Target => Slot::Target,
            ColumnKind::TrueProbability => Slot::TrueProb,
            ColumnKind::Ignore => Slot::Ignore,
        });
    }

    let has_prob = slots.iter().any(|s| matches!(s, Slot::TrueProb));
    let mut numeric: Vec<f64> = Vec::new();
    let mut target = Vec::new();
    let mut true_prob = Vec::new();

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        // row numbers are 1-based data rows, matching what a spreadsheet shows below the header
        let line = row + 1;
        for ((cell, slot), name) in record.iter().zip(slots.iter_mut()).zip(&header) {
            match slot {
                Slot::Numeric { .. } => numeric.push(parse_real(cell, line, name)?),
                Slot::Categorical { levels, codes } => {
                    if cell.is_empty() {
                        return Err(Error::Parse {
                            row: line,
                            column: name.clone(),
                            reason: "missing value".into(),
                        });
                    }
                    let code = match levels.iter().position(|l| l == cell) {
                        Some(code) => code,
                        None => {
                            if levels.len() == MAX_LEVELS {
                                return Err(Error::Schema {
                                    column: name.clone(),
                                    reason: format!("more than {MAX_LEVELS} distinct levels"),
                                });
                            }
                            levels.push(cell.to_string());
                            levels.len() - 1
                        }
                    };
                    codes.push(code);
                }
                Slot::Target => {
                    let y = parse_real(cell, line, name)?;
                    if y != 0.0 && y != 1.0 {
                        return Err(Error::Domain(format!(
                            "target `{name}` at row {line} is {cell}, expected 0 or 1"
                        )));
                    }
                    target.push(y);
                }
                Slot::TrueProb => {
                    let p = parse_real(cell, line, name)?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::Domain(format!(
                            "true probability `{name}` at row {line} is {cell}, outside [0, 1]"
                        )));
                    }
                    true_prob.push(p);
                }
                Slot::Ignore => {}
            }
        }
    }

    let n = target.len();
    let mut columns = Vec::new();
    for (slot, name) in slots.iter().zip(&header) {
        match slot {
            Slot::Numeric { .. } => columns.push(FeatureColumn::numeric(name.clone())),
            Slot::Categorical { levels, .. } => {
                columns.extend(levels.iter().map(|l| FeatureColumn::indicator(name, l)))
            }
            _ => {}
        }
    }
    let p = columns.len();
    let mut features = vec![0.0; n * p];
    let mut offset = 0;
    for slot in &slots {
        match slot {
            Slot::Numeric { col } => {
                for i in 0..n {
                    features[i * p + offset] = numeric[i * numeric_count + col];
                }
                offset += 1;
            }
            Slot::Categorical { levels, codes } => {
                for (i, &code) in codes.iter().enumerate() {
                    features[i * p + offset + code] = 1.0;
                }
                offset += levels.len();
            }
            _ => {}
        }
    }

    Dataset::new(features, columns, target, has_prob.then_some(true_prob))
}

fn parse_real(cell: &str, row: usize, column: &str) -> Result<f64> {
    let parse_err = |reason: String| Error::Parse {
        row,
        column: column.to_string(),
        reason,
    };
    if cell.is_empty() {
        return Err(parse_err("missing value".into()));
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_err(format!("cannot parse `{cell}` as a number")))?;
    if !v.is_finite() {
        return Err(parse_err(format!("non-finite value `{cell}`")));
    }
    Ok(v)
}

/// Write `ds` as CSV. One-hot indicator groups are collapsed back to a single
/// categorical column holding the level label.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let groups = collapse_groups(ds);
    let mut header: Vec<String> = groups.iter().map(|g| g.name().to_string()).collect();
    header.push("y".into());
    if ds.true_prob().is_some() {
        header.push("true_probability".into());
    }
    w.write_record(&header)?;

    let mut record = Vec::with_capacity(header.len());
    for i in 0..ds.n() {
        record.clear();
        let row = ds.row(i);
        for g in &groups {
            match g {
                Group::Numeric { col, .. } => record.push(format!("{}", row[*col])),
                Group::Categorical { cols, levels, .. } => {
                    let hot = cols.iter().position(|&c| row[c] == 1.0).unwrap_or(0);
                    record.push(levels[hot].clone());
                }
            }
        }
        record.push(format!("{}", ds.target()[i]));
        if let Some(p) = ds.true_prob() {
            record.push(format!("{}", p[i]));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Schema matching the layout produced by [`write_csv`].
pub fn write_schema(ds: &Dataset) -> Schema {
    use super::ColumnSpec;
    let mut cols: Vec<ColumnSpec> = collapse_groups(ds)
        .iter()
        .map(|g| match g {
            Group::Numeric { name, .. } => ColumnSpec::new(name.clone(), ColumnKind::Numeric),
            Group::Categorical { name, .. } => {
                ColumnSpec::new(name.clone(), ColumnKind::Categorical)
            }
        })
        .collect();
    cols.push(ColumnSpec::new("y", ColumnKind::Target));
    if ds.true_prob().is_some() {
        cols.push(ColumnSpec::new("true_probability", ColumnKind::TrueProbability));
    }
    Schema::new(cols).expect("generated schema has a single target")
}

enum Group {
    Numeric {
        name: String,
        col: usize,
    },
    Categorical {
        name: String,
        cols: Vec<usize>,
        levels: Vec<String>,
    },
}

impl Group {
    fn name(&self) -> &str {
        match self {
            Group::Numeric { name, .. } | Group::Categorical { name, .. } => name,
        }
    }
}

fn collapse_groups(ds: &Dataset) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for (j, c) in ds.columns().iter().enumerate() {
        match &c.origin {
            FeatureOrigin::Numeric => groups.push(Group::Numeric {
                name: c.name.clone(),
                col: j,
            }),
            FeatureOrigin::Indicator { variable, level } => {
                if let Some(Group::Categorical { name, cols, levels }) = groups.last_mut() {
                    if name == variable {
                        cols.push(j);
                        levels.push(level.clone());
                        continue;
                    }
                }
                groups.push(Group::Categorical {
                    name: variable.clone(),
                    cols: vec![j],
                    levels: vec![level.clone()],
                });
            }
        }
    }
    groups
}
