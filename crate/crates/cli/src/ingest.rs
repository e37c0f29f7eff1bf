//! Reading test statistics from plain-text or CSV files.

use std::fs;
use std::path::Path;

use ebnull_core::StatSample;

use crate::error::{CliError, Result};

/// Statistics read from a file, with optional identifiers from an `id` column.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistics {
    pub sample: StatSample,
    pub ids: Option<Vec<String>>,
}

impl Statistics {
    /// Identifier of record `i`: the `id` column when present, else the 1-based position.
    pub fn id(&self, i: usize) -> String {
        match &self.ids {
            Some(ids) => ids[i].clone(),
            None => (i + 1).to_string(),
        }
    }
}

/// Parses a decimal number, also accepting the Unicode minus sign.
pub fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    let value: f64 = if let Some(rest) = text.strip_prefix('\u{2212}') {
        -rest.parse::<f64>().ok()?
    } else {
        text.parse().ok()?
    };
    Some(value)
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Reads statistics. A file whose first data line is a number is read as
/// plain text (one value per line, blank and `#` lines skipped); otherwise the
/// first data line is a CSV header that must name a `statistic` column.
pub fn ingest_statistics(path: &Path) -> Result<Statistics> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let stats = match text.lines().find(|l| !is_skipped(l)) {
        Some(line) if parse_number(line).is_none() => read_csv(path, &text)?,
        _ => read_plain(path, &text)?,
    };
    if stats.sample.is_empty() {
        return Err(CliError::Input {
            path: path.into(),
            message: "no statistics found".into(),
        });
    }
    Ok(stats)
}

fn checked(path: &Path, line: usize, text: &str) -> Result<f64> {
    let value = parse_number(text).ok_or_else(|| CliError::Parse {
        path: path.into(),
        line,
        message: format!("cannot parse {:?} as a number", text.trim()),
    })?;
    if !value.is_finite() {
        return Err(CliError::Parse {
            path: path.into(),
            line,
            message: format!("non-finite value {:?}", text.trim()),
        });
    }
    Ok(value)
}

fn read_plain(path: &Path, text: &str) -> Result<Statistics> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if !is_skipped(line) {
            values.push(checked(path, i + 1, line)?);
        }
    }
    Ok(Statistics {
        sample: StatSample::new(values)?,
        ids: None,
    })
}

fn read_csv(path: &Path, text: &str) -> Result<Statistics> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error(path, &e))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let stat_col = column("statistic").ok_or_else(|| CliError::Input {
        path: path.into(),
        message: "CSV header has no \"statistic\" column".into(),
    })?;
    let id_col = column("id");
    let mut values = Vec::new();
    let mut ids = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = record.get(stat_col).ok_or_else(|| CliError::Parse {
            path: path.into(),
            line,
            message: "missing statistic field".into(),
        })?;
        values.push(checked(path, line, field)?);
        if let Some(c) = id_col {
            ids.push(record.get(c).unwrap_or_default().to_string());
        }
    }
    Ok(Statistics {
        sample: StatSample::new(values)?,
        ids: id_col.map(|_| ids),
    })
}

fn csv_error(path: &Path, e: &csv::Error) -> CliError {
    match e.position() {
        Some(p) => CliError::Parse {
            path: path.into(),
            line: p.line() as usize,
            message: e.to_string(),
        },
        None => CliError::Input {
            path: path.into(),
            message: e.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn plain_text() {
        let f = file("1.0\n\u{2212}2.5\n# comment\n0.0\n\n");
        let s = ingest_statistics(f.path()).unwrap();
        assert_eq!(s.sample.values(), &[1.0, -2.5, 0.0]);
        assert!(s.ids.is_none());
        assert_eq!(s.id(2), "3");
    }

    #[test]
    fn csv_with_ids() {
        let f = file("id,statistic\nA,1.2\nB,\u{2212}0.3\n");
        let s = ingest_statistics(f.path()).unwrap();
        assert_eq!(s.sample.values(), &[1.2, -0.3]);
        assert_eq!(
            s.ids.as_deref(),
            Some(&["A".to_string(), "B".to_string()][..])
        );
    }

    #[test]
    fn csv_statistic_only() {
        let f = file("statistic\n0.5\n-1\n");
        let s = ingest_statistics(f.path()).unwrap();
        assert_eq!(s.sample.values(), &[0.5, -1.0]);
    }

    #[test]
    fn errors_name_the_line() {
        let err = ingest_statistics(file("1.0\nabc\n").path()).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("line 2"));

        let err = ingest_statistics(file("id,statistic\nA,1\nB,x\n").path()).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");

        let err = ingest_statistics(file("1.0\ninf\n").path()).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
        assert!(ingest_statistics(file("# only a comment\n\n").path()).is_err());
        assert!(ingest_statistics(file("id,value\nA,1\n").path()).is_err());
        assert!(ingest_statistics(Path::new("/nonexistent/stats.txt")).is_err());
    }
}
