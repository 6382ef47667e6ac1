//! Dataset and trade-off curve file formats.
//!
//! Datasets are UTF-8 CSV with a header row: feature columns named `f:<name>`
//! followed by a final `ranking` column holding `>`-separated label names,
//! most preferred first:
//!
//! ```text
//! f:x1,f:x2,ranking
//! 0.1,2.3,L2>L1>L3
//! ```
//!
//! The label set is taken from the first data row. Label indices follow the
//! natural sort order of the names (`L2` before `L10`).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::eval::{CrossValidation, Method, TradeoffCurve, TradeoffPoint};
use crate::learners::Dataset;
use crate::perm::Ranking;

const FEATURE_PREFIX: &str = "f:";
const RANKING_COLUMN: &str = "ranking";

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

/// Compares names chunk-wise so that embedded numbers sort numerically.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(&cb) {
        let ord = if *da && *db {
            let (ta, tb) = (sa.trim_start_matches('0'), sb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
        } else {
            sa.cmp(sb)
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let file =
        std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_dataset(file)
}

pub fn parse_dataset(reader: impl Read) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = csv.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| format_err(1, e.to_string()))?,
        None => return Err(format_err(1, "missing header")),
    };
    let columns: Vec<&str> = header.iter().map(str::trim).collect();
    let Some((last, feature_cols)) = columns.split_last() else {
        return Err(format_err(1, "empty header"));
    };
    if *last != RANKING_COLUMN {
        return Err(format_err(1, format!("last column must be {RANKING_COLUMN:?}, found {last:?}")));
    }
    if feature_cols.is_empty() {
        return Err(format_err(1, "no feature columns"));
    }
    let mut feature_names = Vec::with_capacity(feature_cols.len());
    for col in feature_cols {
        match col.strip_prefix(FEATURE_PREFIX) {
            Some(name) if !name.is_empty() => {
                if feature_names.iter().any(|n: &String| n == name) {
                    return Err(format_err(1, format!("duplicate feature column {col:?}")));
                }
                feature_names.push(name.to_string());
            }
            _ => return Err(format_err(1, format!("feature column {col:?} must be named f:<name>"))),
        }
    }
    let d = feature_names.len();

    let mut features = Vec::new();
    let mut raw_rankings: Vec<(usize, Vec<String>)> = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| format_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != d + 1 {
            return Err(format_err(line, format!("expected {} columns, found {}", d + 1, rec.len())));
        }
        let mut x = Vec::with_capacity(d);
        for (c, cell) in rec.iter().take(d).enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| format_err(line, format!("column {:?}: non-numeric feature {cell:?}", feature_cols[c])))?;
            if !v.is_finite() {
                return Err(format_err(line, format!("column {:?}: non-finite feature {cell:?}", feature_cols[c])));
            }
            x.push(v);
        }
        let labels: Vec<String> = rec[d].split('>').map(|s| s.trim().to_string()).collect();
        if labels.iter().any(String::is_empty) {
            return Err(format_err(line, format!("column \"ranking\": empty label in {:?}", &rec[d])));
        }
        features.push(x);
        raw_rankings.push((line, labels));
    }
    let Some((first_line, first)) = raw_rankings.first() else {
        return Err(format_err(2, "no data rows"));
    };

    let mut label_names: Vec<String> = first.clone();
    label_names.sort_by(|a, b| natural_cmp(a, b));
    if let Some(w) = label_names.windows(2).find(|w| w[0] == w[1]) {
        return Err(format_err(*first_line, format!("column \"ranking\": duplicate label {:?}", w[0])));
    }
    let index: HashMap<&str, usize> = label_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let m = label_names.len();

    let mut rankings = Vec::with_capacity(raw_rankings.len());
    for (line, labels) in &raw_rankings {
        let mut order = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        for name in labels {
            let Some(&idx) = index.get(name.as_str()) else {
                return Err(format_err(*line, format!("column \"ranking\": unknown label {name:?}")));
            };
            if seen[idx] {
                return Err(format_err(*line, format!("column \"ranking\": duplicate label {name:?}")));
            }
            seen[idx] = true;
            order.push(idx);
        }
        if order.len() < m {
            return Err(format_err(
                *line,
                format!("column \"ranking\": incomplete ranking, {} of {m} labels", order.len()),
            ));
        }
        rankings.push(Ranking::new(order)?);
    }
    Dataset::new(features, rankings, label_names, feature_names)
}

pub fn ranking_to_names(ranking: &Ranking, names: &[String]) -> String {
    ranking.order().iter().map(|&l| names[l].as_str()).collect::<Vec<_>>().join(">")
}

/// Writes features with round-trip precision so that parsing the output
/// reproduces the dataset exactly.
pub fn write_dataset(data: &Dataset, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = data.feature_names().iter().map(|n| format!("{FEATURE_PREFIX}{n}")).collect();
    header.push(RANKING_COLUMN.into());
    csv.write_record(&header).map_err(csv_err)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data.row(i).iter().map(|v| format!("{v:?}")).collect();
        row.push(ranking_to_names(data.ranking(i), data.label_names()));
        csv.write_record(&row).map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// `%.<digits>g`-style formatting: `digits` significant digits, trailing
/// zeros dropped, scientific notation outside `[1e-5, 1e<digits>)`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    // Round first; the exponent can move (9.9999996 -> 10.0000).
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sig6(x: f64) -> String {
    format_sig(x, 6)
}

/// One line of a curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub method: Method,
    /// Fold index, or -1 for the aggregate curve.
    pub fold: i64,
    pub point: TradeoffPoint,
}

pub fn curve_rows(curve: &TradeoffCurve, fold: i64) -> Vec<CurveRow> {
    curve.points.iter().map(|p| CurveRow { method: curve.method, fold, point: p.clone() }).collect()
}

/// Per-fold rows followed by the cross-fold mean (`fold = -1`).
pub fn cross_validation_rows(cv: &CrossValidation) -> Vec<CurveRow> {
    let mut rows: Vec<CurveRow> = cv.folds.iter().enumerate().flat_map(|(f, c)| curve_rows(c, f as i64)).collect();
    rows.extend(curve_rows(&cv.mean, -1));
    rows
}

pub const CURVE_COLUMNS: [&str; 6] = ["method", "fold", "q", "completeness", "correctness", "n_evaluated"];

pub fn write_curves_csv(rows: &[CurveRow], writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(CURVE_COLUMNS).map_err(csv_err)?;
    for row in rows {
        let p = &row.point;
        csv.write_record([
            row.method.tag().to_string(),
            row.fold.to_string(),
            sig6(p.q.value()),
            sig6(p.completeness),
            p.correctness.map(sig6).unwrap_or_default(),
            p.n_evaluated.to_string(),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

/// Numbers pass through the same 6-digit formatting as the CSV output.
fn sig6_value(x: f64) -> Value {
    json!(sig6(x).parse::<f64>().expect("formatted float parses"))
}

pub fn curves_json(rows: &[CurveRow]) -> String {
    let records: Vec<Value> = rows
        .iter()
        .map(|row| {
            let p = &row.point;
            json!({
                "method": row.method.tag(),
                "fold": row.fold,
                "q": sig6_value(p.q.value()),
                "completeness": sig6_value(p.completeness),
                "correctness": p.correctness.map_or(Value::Null, sig6_value),
                "n_evaluated": p.n_evaluated,
            })
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&Value::Array(records)).expect("json values serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        parse_dataset(text.as_bytes())
    }

    #[test]
    fn parses_well_formed_file() {
        let data = parse("f:x1,f:x2,ranking\n0.1,2.3,L2>L1>L3\n1,-4,L3>L2>L1\n").unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.dims(), 2);
        assert_eq!(data.label_names(), ["L1", "L2", "L3"]);
        assert_eq!(data.feature_names(), ["x1", "x2"]);
        assert_eq!(data.ranking(0).order(), [1, 0, 2]);
        assert_eq!(data.row(1), [1.0, -4.0]);
    }

    fn error_line(text: &str) -> (usize, String) {
        match parse(text) {
            Err(Error::Format { line, message }) => (line, message),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn reports_row_of_first_violation() {
        let (line, msg) = error_line("f:a,ranking\n1,L1>L2>L3\n2,L2>L2>L1\n");
        assert_eq!(line, 3);
        assert!(msg.contains("duplicate label"), "{msg}");

        let (line, msg) = error_line("f:a,ranking\n1,L1>L2>L3\n2,L2>L1\n");
        assert_eq!(line, 3);
        assert!(msg.contains("incomplete"), "{msg}");

        let (line, msg) = error_line("f:a,ranking\n1,L1>L2\n2,L2>L9\n");
        assert_eq!(line, 3);
        assert!(msg.contains("unknown label"), "{msg}");

        let (line, msg) = error_line("f:a,f:b,ranking\n1,2,L1>L2\n3,x,L2>L1\n");
        assert_eq!(line, 3);
        assert!(msg.contains("non-numeric") && msg.contains("f:b"), "{msg}");

        let (line, msg) = error_line("f:a,f:b,ranking\n1,inf,L1>L2\n");
        assert_eq!(line, 2);
        assert!(msg.contains("non-finite"), "{msg}");
    }

    #[test]
    fn rejects_malformed_headers() {
        for bad in ["a,ranking\n", "f:a,f:b\n", "ranking\n", "f:a,f:a,ranking\n", "f:,ranking\n", ""] {
            let (line, _) = error_line(&format!("{bad}1,2,L1>L2\n"));
            assert_eq!(line, 1, "{bad:?}");
        }
    }

    #[test]
    fn natural_label_order() {
        let data = parse("f:a,ranking\n1,L10>L2>L1\n").unwrap();
        assert_eq!(data.label_names(), ["L1", "L2", "L10"]);
        assert_eq!(natural_cmp("x2", "x10"), Ordering::Less);
        assert_eq!(natural_cmp("b", "a10"), Ordering::Greater);
    }

    #[test]
    fn write_then_parse() {
        let text = "f:x1,f:x2,ranking\n0.1,2.3,L2>L1>L3\n1e-7,-4.25,L3>L2>L1\n";
        let data = parse(text).unwrap();
        let mut buf = Vec::new();
        write_dataset(&data, &mut buf).unwrap();
        assert_eq!(parse_dataset(buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.5, 6), "0.5");
        assert_eq!(format_sig(0.95, 6), "0.95");
        assert_eq!(format_sig(2.0 / 3.0, 6), "0.666667");
        assert_eq!(format_sig(-1.0, 6), "-1");
        assert_eq!(format_sig(0.99999996, 6), "1");
        assert_eq!(format_sig(123456.7, 6), "123457");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(1.5e-7, 6), "1.5e-07");
        assert_eq!(format_sig(0.0001234567, 6), "0.000123457");
    }
}
