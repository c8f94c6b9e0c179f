//! Reading grid functions from CSV (`n,value`) or JSON (`{a, lo, hi, values}`).

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use nabla_frac::{Grid, GridFunction};

use crate::CliError;

/// Read `path` (or stdin for `-`), picking the format from the extension:
/// `.json` is JSON, anything else is CSV.
pub fn read_grid_function(path: &Path, a: f64) -> Result<GridFunction, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
    };
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || (path == Path::new("-") && text.trim_start().starts_with('{'));
    let parsed = if is_json { parse_json(&text, a) } else { parse_csv(&text, a) };
    parsed.map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_json(text: &str, a: f64) -> Result<GridFunction, CliError> {
    let f: GridFunction =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("JSON: {e}")))?;
    if f.grid().base() != a {
        return Err(CliError::Input(format!(
            "JSON base a = {} does not match --a {a}",
            f.grid().base()
        )));
    }
    Ok(f)
}

/// Rows are numbered from 1 with the header as row 1.
pub fn parse_csv(text: &str, a: f64) -> Result<GridFunction, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| CliError::Input(format!("row 1: {e}")))?,
        None => return Err(CliError::Input("empty CSV, expected header n,value".into())),
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["n", "value"] {
        return Err(CliError::Input(format!(
            "row 1: header must be n,value, got {}",
            names.join(",")
        )));
    }
    let mut points: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    for (i, rec) in records.enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| CliError::Input(format!("row {row}: {e}")))?;
        if rec.len() != 2 {
            return Err(CliError::Input(format!(
                "row {row}: expected 2 fields, got {}",
                rec.len()
            )));
        }
        let n: i64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("row {row}: offset {:?} is not an integer", &rec[0])))?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("row {row}: value {:?} is not a number", &rec[1])))?;
        if !v.is_finite() {
            return Err(CliError::Input(format!("row {row}: value {v} is not finite")));
        }
        if let Some((first, _)) = points.insert(n, (row, v)) {
            return Err(CliError::Input(format!(
                "row {row}: duplicate offset n = {n} (first given on row {first})"
            )));
        }
    }
    let (Some((&lo, _)), Some((&hi, _))) = (points.first_key_value(), points.last_key_value()) else {
        return Err(CliError::Input("no data rows".into()));
    };
    let missing: Vec<String> = (lo..=hi)
        .filter(|n| !points.contains_key(n))
        .map(|n| n.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Input(format!(
            "offsets {lo}..={hi} have gaps, missing n = {}",
            missing.join(", ")
        )));
    }
    let grid = Grid::new(a, lo, hi).map_err(CliError::Lib)?;
    GridFunction::new(grid, points.into_values().map(|(_, v)| v).collect()).map_err(CliError::Lib)
}

pub fn grid_function_csv(f: &GridFunction) -> String {
    let mut out = String::from("n,value\n");
    for (n, v) in f.iter() {
        out.push_str(&format!("{n},{v:?}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_constant_function() {
        let f = parse_csv("n,value\n1,1.0\n2,1.0", 0.0).unwrap();
        assert_eq!((f.grid().lo(), f.grid().hi()), (1, 2));
        assert_eq!(f.values(), &[1.0, 1.0]);
    }

    #[test]
    fn csv_rows_may_come_unordered() {
        let f = parse_csv("n,value\n3,3\n1,1\n2,2\n", 0.0).unwrap();
        assert_eq!(f.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_duplicate_names_row() {
        let e = parse_csv("n,value\n1,1.0\n1,2.0\n", 0.0).unwrap_err().to_string();
        assert!(e.contains("row 3"), "{e}");
    }

    #[test]
    fn csv_gap_lists_missing_offsets() {
        let e = parse_csv("n,value\n1,1\n4,1\n", 0.0).unwrap_err().to_string();
        assert!(e.contains("missing n = 2, 3"), "{e}");
    }

    #[test]
    fn csv_bad_fields() {
        assert!(parse_csv("x,y\n1,1\n", 0.0).unwrap_err().to_string().contains("row 1"));
        assert!(parse_csv("n,value\n1,abc\n", 0.0).unwrap_err().to_string().contains("row 2"));
        assert!(parse_csv("n,value\n1.5,1\n", 0.0).unwrap_err().to_string().contains("row 2"));
        assert!(parse_csv("n,value\n1,1,1\n", 0.0).is_err());
        assert!(parse_csv("n,value\n", 0.0).is_err());
    }

    #[test]
    fn json_six_points() {
        let f = parse_json(r#"{"a":0,"lo":-2,"hi":3,"values":[0,0,0,1,2,3]}"#, 0.0).unwrap();
        assert_eq!(f.grid().len(), 6);
        assert_eq!(f.get(3).unwrap(), 3.0);
        assert!(parse_json(r#"{"a":1,"lo":-2,"hi":3,"values":[0,0,0,1,2,3]}"#, 0.0).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = Grid::new(0.0, -1, 3).unwrap();
        let f = GridFunction::new(g, vec![0.1, 1.0 / 3.0, -2.5e-300, 7.0, f64::MAX]).unwrap();
        let back = parse_json(&serde_json::to_string(&f).unwrap(), 0.0).unwrap();
        assert_eq!(back, f);
    }
}
