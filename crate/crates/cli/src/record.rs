//! Result records and their CSV / JSON-lines encodings.

use std::io::{self, Write};

use kacrice_core::{Estimate, EstimateFlag};
use serde::Serialize;

use crate::config::Format;

/// CSV header; the column order is fixed.
pub const CSV_COLUMNS: [&str; 13] = [
    "experiment",
    "x",
    "formula",
    "oracle_mean",
    "oracle_se",
    "discrepancy_se",
    "n",
    "seed",
    "method",
    "value",
    "std_error",
    "oracle_n",
    "flag",
];

/// One output row.
///
/// `value`, `std_error`, `n`, `seed` and `method` describe the row's primary
/// estimate. `formula` is the closed-form side when one exists, the oracle
/// columns the Monte Carlo side, and `discrepancy_se` the distance between
/// the oracle and the formula (or the primary estimate) in combined
/// standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub experiment: String,
    pub x: Option<f64>,
    pub formula: Option<f64>,
    pub oracle_mean: Option<f64>,
    pub oracle_se: Option<f64>,
    pub discrepancy_se: Option<f64>,
    pub n: u64,
    pub seed: u64,
    pub method: String,
    pub value: f64,
    pub std_error: f64,
    pub oracle_n: Option<u64>,
    pub flag: Option<String>,
}

pub(crate) fn flag_name(flag: EstimateFlag) -> &'static str {
    match flag {
        EstimateFlag::Unresolved => "unresolved",
        EstimateFlag::Diverged => "diverged",
    }
}

impl Record {
    /// A row whose primary estimate is `est`.
    pub fn from_estimate(experiment: &str, x: Option<f64>, est: &Estimate) -> Self {
        Record {
            experiment: experiment.to_string(),
            x,
            formula: None,
            oracle_mean: None,
            oracle_se: None,
            discrepancy_se: None,
            n: est.n,
            seed: est.seed,
            method: est.method.clone(),
            value: est.value,
            std_error: est.std_error,
            oracle_n: None,
            flag: est.flag.map(|f| flag_name(f).to_string()),
        }
    }

    /// Records the closed-form value `formula` (with its error bar, zero when exact).
    pub fn with_formula(mut self, formula: f64) -> Self {
        self.formula = Some(formula);
        self
    }

    /// Attaches the oracle side and compares it with the formula when present,
    /// otherwise with the primary estimate.
    pub fn with_oracle(mut self, oracle: &Estimate, reference_se: f64) -> Self {
        let reference = self.formula.unwrap_or(self.value);
        self.oracle_mean = Some(oracle.value);
        self.oracle_se = Some(oracle.std_error);
        self.oracle_n = Some(oracle.n);
        self.discrepancy_se = Some(oracle.discrepancy_se(reference, reference_se));
        if self.flag.is_none() {
            self.flag = oracle.flag.map(|f| flag_name(f).to_string());
        }
        self
    }

    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }

    fn csv_fields(&self) -> [String; 13] {
        fn opt(v: Option<f64>) -> String {
            v.map(num).unwrap_or_default()
        }
        [
            csv_escape(&self.experiment),
            opt(self.x),
            opt(self.formula),
            opt(self.oracle_mean),
            opt(self.oracle_se),
            opt(self.discrepancy_se),
            self.n.to_string(),
            self.seed.to_string(),
            csv_escape(&self.method),
            num(self.value),
            num(self.std_error),
            self.oracle_n.map(|n| n.to_string()).unwrap_or_default(),
            self.flag.as_deref().map(csv_escape).unwrap_or_default(),
        ]
    }
}

/// Shortest round-trip decimal, the same text JSON uses for finite values.
fn num(v: f64) -> String {
    if v.is_finite() {
        serde_json::Number::from_f64(v).map(|n| n.to_string()).unwrap_or_default()
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `records` in the requested format, LF line endings.
pub fn write_records<W: Write>(out: &mut W, records: &[Record], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", CSV_COLUMNS.join(","))?;
            for r in records {
                writeln!(out, "{}", r.csv_fields().join(","))?;
            }
        }
        Format::Json => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Record {
        let est = Estimate::new(9.9, 0.1, 4096, 7, "expected_count");
        let oracle = Estimate::new(10.2, 0.1, 2000, 7, "oracle_mc");
        Record::from_estimate("point_count", None, &est)
            .with_formula(10.0)
            .with_oracle(&oracle, 0.0)
    }

    #[test]
    fn csv_and_json_carry_the_same_fields() {
        let r = sample();
        let mut csv = Vec::new();
        write_records(&mut csv, std::slice::from_ref(&r), Format::Csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header, CSV_COLUMNS);
        assert_eq!(row.len(), header.len());

        let mut json = Vec::new();
        write_records(&mut json, &[r], Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        let obj = v.as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        let mut sorted_header = header.clone();
        sorted_header.sort_unstable();
        let mut sorted_keys = keys.clone();
        sorted_keys.sort_unstable();
        assert_eq!(sorted_keys, sorted_header);
        for (h, cell) in header.iter().zip(&row) {
            let j = &obj[*h];
            match j {
                serde_json::Value::Null => assert_eq!(*cell, ""),
                serde_json::Value::String(s) => assert_eq!(cell, s),
                serde_json::Value::Number(n) => {
                    assert_eq!(cell.parse::<f64>().unwrap(), n.as_f64().unwrap())
                }
                other => panic!("unexpected {other}"),
            }
        }
    }

    #[test]
    fn discrepancy_is_in_standard_errors() {
        let r = sample();
        assert!((r.discrepancy_se.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(r.oracle_n, Some(2000));
        assert!(!r.is_flagged());
    }

    #[test]
    fn oracle_flag_propagates() {
        let est = Estimate::new(1.0, 0.1, 10, 0, "a");
        let oracle = Estimate::new(1.0, 0.1, 10, 0, "oracle_mc").with_flag(Some(EstimateFlag::Unresolved));
        let r = Record::from_estimate("e", None, &est).with_oracle(&oracle, est.std_error);
        assert_eq!(r.flag.as_deref(), Some("unresolved"));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, 8.748557434046234e-14, -2.5e300, 1.0 / 3.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn commas_are_quoted() {
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("plain"), "plain");
    }
}
