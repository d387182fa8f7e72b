//! CSV rows and JSON summaries written by the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// One JSON summary per command or estimate case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub case: String,
    pub parameters: Value,
    pub n_list: Vec<usize>,
    pub max_ratio: Option<f64>,
    pub stable: bool,
    pub rows_csv: String,
    pub pass: bool,
    pub details: Value,
}

/// File stem for a case label, e.g. `E4(eps=0.5,p=4)` -> `E4_eps_0.5_p_4`.
pub fn file_stem(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    Ok(serde_json::to_value(value)?)
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`.
pub fn emit<T: Serialize>(dir: &Path, stem: &str, rows: &[T], mut summary: Summary) -> Result<Summary> {
    let csv_path = dir.join(format!("{stem}.csv"));
    write_csv(&csv_path, rows)?;
    summary.rows_csv = csv_path.display().to_string();
    write_summary(&dir.join(format!("{stem}.json")), &summary)?;
    Ok(summary)
}

/// Every summary in `dir` except `report.json`, sorted by file name.
pub fn read_summaries(dir: &Path) -> Result<Vec<(PathBuf, Summary)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "report.json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p)?;
            let s: Summary = serde_json::from_str(&text)
                .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Ok((p, s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(file_stem("E4(eps=0.5,p=4)"), "E4_eps_0.5_p_4");
        assert_eq!(file_stem("check-geometry"), "check-geometry");
    }

    #[test]
    fn summary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        #[derive(Serialize)]
        struct Row {
            a: u32,
            b: Option<f64>,
        }
        let s = Summary {
            case: "E1".into(),
            parameters: serde_json::json!({"seed": 3}),
            n_list: vec![16, 24],
            max_ratio: Some(1.5),
            stable: true,
            rows_csv: String::new(),
            pass: true,
            details: Value::Null,
        };
        let out = emit(dir.path(), "E1", &[Row { a: 1, b: None }, Row { a: 2, b: Some(0.5) }], s).unwrap();
        let csv = fs::read_to_string(dir.path().join("E1.csv")).unwrap();
        assert_eq!(csv, "a,b\n1,\n2,0.5\n");
        let back = read_summaries(dir.path()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].1, out);
    }
}
