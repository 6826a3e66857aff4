//! Cohort CSV ingestion and shared number formatting.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{validate_record, IllnessDeathRecord, RawRecord};

/// Significant digits used for every number written to CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with [`SIGNIFICANT_DIGITS`] significant digits, trailing
/// zeros removed, switching to exponent notation outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Reads a cohort CSV with header `id,entry,exit0,cause0,exit1,cause1`
/// (`entry` optional). Errors carry the 1-based file line number.
pub fn read_cohort<R: Read>(input: R) -> Result<Vec<IllnessDeathRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_reader(input);
    let headers = reader.headers()?.clone();
    for required in ["id", "exit0", "cause0"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::MalformedRecord { line: Some(1), reason: format!("missing column {required}") });
        }
    }
    let mut cohort = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::MalformedRecord { line, reason: e.to_string() }
        })?;
        let line = row.position().map(|p| p.line() as usize);
        let record = row
            .deserialize::<RawRecord>(Some(&headers))
            .map_err(|e| Error::MalformedRecord { line, reason: e.to_string() })
            .and_then(|raw| validate_record(&raw))
            .map_err(|e| match e {
                Error::MalformedRecord { reason, .. } => Error::MalformedRecord { line, reason },
                other => other,
            })?;
        cohort.push(record);
    }
    Ok(cohort)
}

pub fn read_cohort_path(path: impl AsRef<Path>) -> Result<Vec<IllnessDeathRecord>> {
    read_cohort(std::fs::File::open(path)?)
}

/// Writes a cohort in the same schema `read_cohort` accepts.
pub fn write_cohort<W: std::io::Write>(cohort: &[IllnessDeathRecord], mut out: W) -> Result<()> {
    writeln!(out, "id,entry,exit0,cause0,exit1,cause1")?;
    for r in cohort {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.id(),
            format_number(r.entry()),
            format_number(r.exit0()),
            r.cause0().code(),
            r.exit1().map(format_number).unwrap_or_default(),
            r.cause1().map(|c| c.code().to_string()).unwrap_or_default(),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-7.02e-3), "-0.00702");
        assert_eq!(format_number(1.11e-7), "1.11e-7");
        assert_eq!(format_number(100.0), "100");
        assert_eq!(format_number(123456.789), "123456.789");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn formatting_keeps_twelve_significant_digits() {
        for x in [std::f64::consts::PI, 1.0 / 7.0, 0.00012345678901234, 98765.4321012345, 3.3e-9] {
            let back: f64 = format_number(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12, "{x} -> {back}");
        }
    }

    #[test]
    fn reads_cohort_with_optional_fields() {
        let csv = "id,entry,exit0,cause0,exit1,cause1\nA,0,1,1,4,2\nB,,2,2,,\nC,-3,2.5,0,,\n";
        let cohort = read_cohort(csv.as_bytes()).unwrap();
        assert_eq!(cohort.len(), 3);
        assert_eq!(cohort[2].entry(), 0.0);
        let mut out = Vec::new();
        write_cohort(&cohort, &mut out).unwrap();
        assert_eq!(read_cohort(out.as_slice()).unwrap(), cohort);
    }

    #[test]
    fn reads_cohort_without_entry_column() {
        let csv = "id,exit0,cause0,exit1,cause1\nA,1,1,4,2\nB,2,2,,\n";
        assert_eq!(read_cohort(csv.as_bytes()).unwrap().len(), 2);
    }

    #[test]
    fn malformed_row_reports_line() {
        let csv = "id,entry,exit0,cause0,exit1,cause1\nA,0,1,1,4,2\nB,3,2,2,,\n";
        match read_cohort(csv.as_bytes()) {
            Err(Error::MalformedRecord { line: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
