//! Two-sample t-statistics per row of a feature-by-sample matrix.

use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::ingest::parse_number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variance {
    /// Separate group variances (Welch).
    #[default]
    Welch,
    /// Pooled variance (Student).
    Pooled,
}

/// `(mean(a) − mean(b)) / se`; `None` when either group has fewer than two
/// values or the standard error is zero.
pub fn two_sample_t(a: &[f64], b: &[f64], variance: Variance) -> Option<f64> {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let ss = |x: &[f64], m: f64| x.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    let (va, vb) = (ss(a, ma) / (na - 1.0), ss(b, mb) / (nb - 1.0));
    let se = match variance {
        Variance::Welch => (va / na + vb / nb).sqrt(),
        Variance::Pooled => {
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            (pooled * (1.0 / na + 1.0 / nb)).sqrt()
        }
    };
    let t = (ma - mb) / se;
    (se > 0.0 && t.is_finite()).then_some(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TStatTable {
    pub ids: Vec<String>,
    pub statistics: Vec<f64>,
    /// Identifiers of rows left out for lack of data or zero variance.
    pub skipped: Vec<String>,
}

/// Reads a CSV whose first column identifies features and whose header names
/// the sample columns; `group_a` and `group_b` list the columns of each group.
/// Empty, `NA` and `NaN` cells count as missing.
pub fn tstats_from_csv(
    path: &Path,
    group_a: &[String],
    group_b: &[String],
    variance: Variance,
) -> Result<TStatTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input {
            path: path.into(),
            message: e.to_string(),
        })?
        .clone();
    let columns = |names: &[String]| -> Result<Vec<usize>> {
        if names.is_empty() {
            return Err(CliError::Argument(
                "each group needs at least one column".into(),
            ));
        }
        names
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .skip(1)
                    .position(|h| h == name)
                    .map(|p| p + 1)
                    .ok_or_else(|| CliError::Input {
                        path: path.into(),
                        message: format!("no column named {name:?}"),
                    })
            })
            .collect()
    };
    let (cols_a, cols_b) = (columns(group_a)?, columns(group_b)?);

    let mut table = TStatTable {
        ids: Vec::new(),
        statistics: Vec::new(),
        skipped: Vec::new(),
    };
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input {
            path: path.into(),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let values = |cols: &[usize]| -> Result<Vec<f64>> {
            let mut out = Vec::new();
            for &c in cols {
                let cell = record.get(c).unwrap_or("");
                if cell.is_empty()
                    || cell.eq_ignore_ascii_case("na")
                    || cell.eq_ignore_ascii_case("nan")
                {
                    continue;
                }
                let v = parse_number(cell)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Parse {
                        path: path.into(),
                        line,
                        message: format!("cannot parse {cell:?} in column {:?}", &headers[c]),
                    })?;
                out.push(v);
            }
            Ok(out)
        };
        let id = record.get(0).unwrap_or("").to_string();
        match two_sample_t(&values(&cols_a)?, &values(&cols_b)?, variance) {
            Some(t) => {
                table.ids.push(id);
                table.statistics.push(t);
            }
            None => table.skipped.push(id),
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn welch_and_pooled() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.0, 0.5, 1.0];
        // mean diff 2.5 - 0.5 = 2; var a 5/3, var b 0.25
        let welch = two_sample_t(&a, &b, Variance::Welch).unwrap();
        assert!((welch - 2.0 / (5.0 / 12.0 + 0.25 / 3.0f64).sqrt()).abs() < 1e-12);
        let pooled = two_sample_t(&a, &b, Variance::Pooled).unwrap();
        let sp2 = (3.0 * 5.0 / 3.0 + 2.0 * 0.25) / 5.0;
        assert!((pooled - 2.0 / (sp2 * (0.25 + 1.0 / 3.0f64)).sqrt()).abs() < 1e-12);
        // Equal group sizes make the two coincide.
        let c = [2.0, 4.0, 9.0, 1.0];
        let w = two_sample_t(&a, &c, Variance::Welch).unwrap();
        let p = two_sample_t(&a, &c, Variance::Pooled).unwrap();
        assert!((w - p).abs() < 1e-12);
    }

    #[test]
    fn degenerate_groups() {
        assert_eq!(two_sample_t(&[1.0], &[1.0, 2.0], Variance::Welch), None);
        assert_eq!(
            two_sample_t(&[1.0, 1.0], &[2.0, 2.0], Variance::Welch),
            None
        );
    }

    #[test]
    fn reads_matrix() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            "site,a1,a2,b1,b2,b3\ns1,1,2,0,0.5,1\ns2,1,NA,0,1,2\ns3,3,5,,1,2\n"
        )
        .unwrap();
        let group = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let t = tstats_from_csv(
            f.path(),
            &group(&["a1", "a2"]),
            &group(&["b1", "b2", "b3"]),
            Variance::Welch,
        )
        .unwrap();
        assert_eq!(t.ids, vec!["s1", "s3"]);
        assert_eq!(t.skipped, vec!["s2"]);
        assert!(t.statistics[0] > 0.0);
        assert!(
            tstats_from_csv(f.path(), &group(&["zz"]), &group(&["b1"]), Variance::Welch).is_err()
        );
    }
}
