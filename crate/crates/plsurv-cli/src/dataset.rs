//! CSV dataset ingestion with row-accurate validation errors.
//!
//! A dataset needs `time_years` and `event` columns; everything else
//! (`id`, `name`, `accession`, `province`, `era`, `dynasty`, `cause`, or
//! any other attribute) is carried through untouched so group comparisons
//! can key on it and re-emission loses nothing. Row numbers in errors are
//! physical file lines, header included.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use plsurv::SurvivalSample;

/// A validation or parse failure, with the offending row in the message.
#[derive(Debug)]
pub struct DataError(pub String);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A validated dataset: raw fields for lossless re-emission plus the
/// parsed survival samples.
#[derive(Debug)]
pub struct Dataset {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
    samples: Vec<SurvivalSample>,
}

impl Dataset {
    pub fn from_path(path: &Path) -> Result<Dataset, DataError> {
        let file = std::fs::File::open(path)
            .map_err(|e| DataError(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn from_reader(input: impl Read) -> Result<Dataset, DataError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| DataError(format!("header row: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let Some(time_col) = find("time_years") else {
            return Err(DataError("missing required column time_years".into()));
        };
        let Some(event_col) = find("event") else {
            return Err(DataError("missing required column event".into()));
        };
        let id_col = find("id");

        let mut rows = Vec::new();
        let mut samples = Vec::new();
        let mut seen_ids = HashSet::new();
        for record in reader.records() {
            let record = record.map_err(|e| DataError(e.to_string()))?;
            let row = record.position().map_or(0, |p| p.line());
            let fields: Vec<String> = record.iter().map(str::to_owned).collect();
            let time: f64 = fields[time_col].parse().map_err(|_| {
                DataError(format!(
                    "row {row}: time_years must be a number, got {:?}",
                    fields[time_col]
                ))
            })?;
            if !time.is_finite() || time <= 0.0 {
                return Err(DataError(format!(
                    "row {row}: time_years must be positive, got {time}"
                )));
            }
            let event = match fields[event_col].as_str() {
                "1" => true,
                "0" => false,
                other => {
                    return Err(DataError(format!(
                        "row {row}: event must be 0 or 1, got {other:?}"
                    )))
                }
            };
            if let Some(c) = id_col {
                let id = &fields[c];
                if !id.is_empty() && !seen_ids.insert(id.clone()) {
                    return Err(DataError(format!("row {row}: duplicate id {id:?}")));
                }
            }
            samples.push(SurvivalSample::new(time, event).expect("validated above"));
            rows.push(fields);
        }
        if samples.is_empty() {
            return Err(DataError("no data rows".into()));
        }
        Ok(Dataset { headers, rows, samples })
    }

    /// Builds a synthetic dataset (`id`, `time_years`, `event`) from
    /// samples, so emitted files share the ingestion schema.
    pub fn from_samples(samples: &[SurvivalSample]) -> Dataset {
        Dataset {
            headers: ["id", "time_years", "event"].map(str::to_owned).to_vec(),
            rows: samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    vec![(i + 1).to_string(), s.time.to_string(), u8::from(s.event).to_string()]
                })
                .collect(),
            samples: samples.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[SurvivalSample] {
        &self.samples
    }

    /// Raw values of a column, matched case-insensitively.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.headers.iter().position(|h| h.eq_ignore_ascii_case(name))?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// Re-emit the dataset with the original columns and order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}
