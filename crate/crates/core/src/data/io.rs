use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, Gender, StudentRecord};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 12] = [
    "intrinsic",
    "extrinsic",
    "autonomy",
    "relatedness",
    "competence",
    "self_esteem",
    "deep_strategy",
    "surface_strategy",
    "study_year",
    "age",
    "gender",
    "performance",
];

/// Observed envelopes of the eight scale scores in the published cohort.
const STRICT_SCORE_BOUNDS: [(f64, f64); 8] = [
    (2.17, 6.58),
    (2.42, 7.00),
    (2.00, 6.25),
    (1.50, 6.25),
    (2.25, 6.25),
    (1.75, 7.00),
    (2.00, 6.25),
    (1.50, 6.25),
];
const SCALE_BOUNDS: (f64, f64) = (1.0, 7.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    /// Scores must sit inside the published cohort's min/max envelopes.
    Strict,
    /// Scores only need to lie on the 1 to 7 scale.
    #[default]
    Relaxed,
}

pub fn load_csv(path: impl AsRef<Path>, validation: Validation) -> Result<Dataset> {
    read_csv(File::open(path)?, validation)
}

pub fn read_csv<R: Read>(reader: R, validation: Validation) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_string())
        .collect();
    let mut positions = [0usize; 12];
    for (slot, name) in positions.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let cell = |col: usize| -> &str { row.get(positions[col]).unwrap_or("") };
        let parse_err = |col: usize| Error::RowParse {
            line,
            column: CSV_COLUMNS[col].to_string(),
        };
        let range_err = |col: usize, raw: &str| Error::RangeViolation {
            line,
            column: CSV_COLUMNS[col].to_string(),
            value: raw.to_string(),
        };

        let mut scores = [0.0; 8];
        for (col, score) in scores.iter_mut().enumerate() {
            let raw = cell(col);
            let v: f64 = raw.parse().map_err(|_| parse_err(col))?;
            if !v.is_finite() {
                return Err(parse_err(col));
            }
            let (lo, hi) = match validation {
                Validation::Strict => STRICT_SCORE_BOUNDS[col],
                Validation::Relaxed => SCALE_BOUNDS,
            };
            if v < lo || v > hi {
                return Err(range_err(col, raw));
            }
            *score = v;
        }

        let study_year = parse_int(cell(8)).ok_or_else(|| parse_err(8))?;
        if !(1..=6).contains(&study_year) {
            return Err(range_err(8, cell(8)));
        }
        let age = parse_int(cell(9)).ok_or_else(|| parse_err(9))?;
        if !(16..=u8::MAX as i64).contains(&age) {
            return Err(range_err(9, cell(9)));
        }
        let gender = match cell(10) {
            "F" | "f" => Gender::Female,
            "M" | "m" => Gender::Male,
            _ => return Err(parse_err(10)),
        };
        let performance: f64 = cell(11).parse().map_err(|_| parse_err(11))?;
        if !performance.is_finite() {
            return Err(parse_err(11));
        }
        if !(SCALE_BOUNDS.0..=SCALE_BOUNDS.1).contains(&performance) {
            return Err(range_err(11, cell(11)));
        }

        records.push(StudentRecord {
            intrinsic: scores[0],
            extrinsic: scores[1],
            autonomy: scores[2],
            relatedness: scores[3],
            competence: scores[4],
            self_esteem: scores[5],
            deep_strategy: scores[6],
            surface_strategy: scores[7],
            study_year: study_year as u8,
            age: age as u8,
            gender,
            performance,
        });
    }
    Ok(Dataset::new(records))
}

/// Accepts "3" as well as integral reals such as "3.0".
fn parse_int(raw: &str) -> Option<i64> {
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    let v: f64 = raw.parse().ok()?;
    (v.is_finite() && v.fract() == 0.0).then_some(v as i64)
}

pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let f = File::create(path)?;
    write_csv_to(d, f)
}

pub fn write_csv_to<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for r in &d.records {
        let gender = match r.gender {
            Gender::Female => "F",
            Gender::Male => "M",
        };
        w.write_record([
            r.intrinsic.to_string(),
            r.extrinsic.to_string(),
            r.autonomy.to_string(),
            r.relatedness.to_string(),
            r.competence.to_string(),
            r.self_esteem.to_string(),
            r.deep_strategy.to_string(),
            r.surface_strategy.to_string(),
            r.study_year.to_string(),
            r.age.to_string(),
            gender.to_string(),
            r.performance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
