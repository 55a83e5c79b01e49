//! Environment CSV format.
//!
//! ```text
//! id,<cue1>,...,<cueN>,<criterion>
//! direction,+1,-1,...,          (optional; criterion cell left empty)
//! o1,0.5,1,...,1
//! ```
//!
//! Cues keep file column order. A cue whose values are all 0 or 1 is
//! recorded as binary, anything else as numeric.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::environment::{CueDefinition, CueKind, Direction, Environment};
use super::EnvError;

pub fn load_environment(path: impl AsRef<Path>, criterion_column: &str) -> Result<Environment, EnvError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| EnvError::Io(format!("{}: {e}", path.display())))?;
    read_environment(file, criterion_column)
}

pub fn read_environment<R: Read>(reader: R, criterion_column: &str) -> Result<Environment, EnvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| EnvError::Parse(e.to_string()))?
        .clone();
    if headers.get(0) != Some("id") {
        return Err(EnvError::Schema {
            row: Some(1),
            column: headers.get(0).unwrap_or("").to_string(),
            message: "first column must be `id`".into(),
        });
    }
    let crit_col = headers
        .iter()
        .position(|h| h == criterion_column)
        .ok_or_else(|| EnvError::Schema {
            row: Some(1),
            column: criterion_column.to_string(),
            message: "criterion column not found in header".into(),
        })?;
    let cue_cols: Vec<usize> = (1..headers.len()).filter(|&c| c != crit_col).collect();
    let mut directions = vec![Direction::Positive; cue_cols.len()];

    let mut objects = Vec::new();
    let mut values = Vec::new();
    let mut criterion = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        // Row numbers are 1-based file lines, counting the header.
        let line = n + 2;
        let record = record.map_err(|e| EnvError::Parse(format!("line {line}: {e}")))?;
        if record.len() != headers.len() {
            return Err(EnvError::Parse(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        if n == 0 && &record[0] == "direction" {
            for (slot, &col) in directions.iter_mut().zip(&cue_cols) {
                *slot = match &record[col] {
                    "+1" | "1" => Direction::Positive,
                    "-1" => Direction::Negative,
                    other => {
                        return Err(EnvError::Schema {
                            row: Some(line),
                            column: headers[col].to_string(),
                            message: format!("direction must be +1 or -1, found `{other}`"),
                        })
                    }
                };
            }
            continue;
        }
        objects.push(record[0].to_string());
        for &col in &cue_cols {
            let cell = &record[col];
            let v: f64 = cell.parse().map_err(|_| EnvError::Schema {
                row: Some(line),
                column: headers[col].to_string(),
                message: format!("non-numeric cell `{cell}`"),
            })?;
            if !v.is_finite() {
                return Err(EnvError::Schema {
                    row: Some(line),
                    column: headers[col].to_string(),
                    message: format!("non-finite cell `{cell}`"),
                });
            }
            values.push(v);
        }
        criterion.push(match &record[crit_col] {
            "1" => true,
            "0" => false,
            other => {
                return Err(EnvError::Schema {
                    row: Some(line),
                    column: criterion_column.to_string(),
                    message: format!("criterion must be 0 or 1, found `{other}`"),
                })
            }
        });
    }

    let width = cue_cols.len();
    let cues = cue_cols
        .iter()
        .enumerate()
        .map(|(k, &col)| {
            let binary = values
                .iter()
                .skip(k)
                .step_by(width.max(1))
                .all(|&v| v == 0.0 || v == 1.0);
            let kind = if binary { CueKind::Binary } else { CueKind::Numeric };
            CueDefinition::new(&headers[col], kind, directions[k])
        })
        .collect();
    Environment::new(objects, cues, values, criterion)
}

pub fn write_environment<W: Write>(env: &Environment, writer: W, criterion_column: &str) -> Result<(), EnvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| EnvError::Io(e.to_string());
    let mut header = vec!["id".to_string()];
    header.extend(env.cue_names());
    header.push(criterion_column.to_string());
    wtr.write_record(&header).map_err(io)?;
    if env.cues().iter().any(|c| c.direction == Direction::Negative) {
        let mut row = vec!["direction".to_string()];
        row.extend(env.cues().iter().map(|c| c.direction.to_string()));
        row.push(String::new());
        wtr.write_record(&row).map_err(io)?;
    }
    for i in 0..env.n_objects() {
        let mut row = vec![env.objects()[i].clone()];
        row.extend(env.row(i).iter().map(|v| v.to_string()));
        row.push(if env.criterion()[i] { "1" } else { "0" }.to_string());
        wtr.write_record(&row).map_err(io)?;
    }
    wtr.flush().map_err(|e| EnvError::Io(e.to_string()))
}

pub fn save_environment(env: &Environment, path: impl AsRef<Path>, criterion_column: &str) -> Result<(), EnvError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| EnvError::Io(format!("{}: {e}", path.display())))?;
    write_environment(env, file, criterion_column)
}
