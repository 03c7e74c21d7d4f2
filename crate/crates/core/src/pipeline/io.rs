//! Trajectory files (one JSON record per line) and CSV plot data.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::knowledge::KnowledgeReport;
use crate::learnability::LearnabilityReport;
use crate::trajectory::Trajectory;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Write `{dt, states, inputs}` records, one per line.
pub fn write_trajectories(path: &Path, data: &[Trajectory]) -> Result<()> {
    let mut out = create(path)?;
    for t in data {
        let line = serde_json::to_string(&t.clone().without_disturbances()).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Read a trajectory file; blank lines are skipped.
pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Trajectory = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: format!("line {}: {e}", no + 1),
        })?;
        data.push(t);
    }
    Ok(data)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_rows<I, R>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn num(v: f64) -> String {
    // shortest round-trip representation
    format!("{v:?}")
}

/// Columns `batch, eta`.
pub fn write_eta_history(path: &Path, report: &KnowledgeReport) -> Result<()> {
    let header = ["batch".to_string(), "eta".to_string()];
    write_rows(
        path,
        &header,
        report.history.iter().enumerate().map(|(b, e)| vec![b.to_string(), num(*e)]),
    )
}

/// Columns `batch, index, i, j, cost_nominal, cost_oracle, delta, delta_raw`.
pub fn write_deltas(path: &Path, report: &KnowledgeReport) -> Result<()> {
    let header: Vec<String> = ["batch", "index", "i", "j", "cost_nominal", "cost_oracle", "delta", "delta_raw"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    write_rows(
        path,
        &header,
        report.scenarios.iter().map(|s| {
            vec![
                s.batch.to_string(),
                s.index.to_string(),
                s.i.to_string(),
                s.j.to_string(),
                num(s.cost_nominal),
                num(s.cost_oracle),
                num(s.delta),
                num(s.delta_raw),
            ]
        }),
    )
}

/// Columns `k, x0.., u0.., w0.., controller` for every recorded scenario,
/// prefixed by `batch, index`.
pub fn write_scenario_trajectories(path: &Path, report: &KnowledgeReport) -> Result<()> {
    let Some(first) = report.trajectories.first() else {
        return write_rows(path, &["batch".into(), "index".into(), "k".into(), "controller".into()], Vec::<Vec<String>>::new());
    };
    let n = first.nominal.state_dim();
    let m = first.nominal.input_dim().unwrap_or(0);
    let d = first.nominal.disturbances().and_then(|w| w.first()).map_or(0, Vec::len);
    let mut header: Vec<String> = vec!["batch".into(), "index".into(), "k".into()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..m).map(|i| format!("u{i}")));
    header.extend((0..d).map(|i| format!("w{i}")));
    header.push("controller".into());
    let mut rows = Vec::new();
    for st in &report.trajectories {
        for (tag, t) in [("nominal", &st.nominal), ("oracle", &st.oracle)] {
            for k in 0..t.states().len() {
                let mut row = vec![st.batch.to_string(), st.index.to_string(), k.to_string()];
                row.extend(t.states()[k].iter().map(|v| num(*v)));
                // the final state has no input or disturbance
                let blank = |len: usize| std::iter::repeat_n(String::new(), len);
                match t.inputs().get(k) {
                    Some(u) => row.extend(u.iter().map(|v| num(*v))),
                    None => row.extend(blank(m)),
                }
                match t.disturbances().and_then(|w| w.get(k)) {
                    Some(w) => row.extend(w.iter().map(|v| num(*v))),
                    None => row.extend(blank(d)),
                }
                row.push(tag.into());
                rows.push(row);
            }
        }
    }
    write_rows(path, &header, rows)
}

/// Residual-versus-regressor scatter data: columns `r0.., x0.., u0..`.
pub fn write_residual_scatter(path: &Path, report: &LearnabilityReport, state_dim: usize) -> Result<()> {
    let (r, z) = (&report.residuals, &report.regressors);
    let mut header: Vec<String> = (0..r.ncols()).map(|i| format!("r{i}")).collect();
    header.extend((0..z.ncols()).map(|j| if j < state_dim { format!("x{j}") } else { format!("u{}", j - state_dim) }));
    write_rows(
        path,
        &header,
        (0..r.nrows()).map(|i| r.row(i).iter().chain(z.row(i).iter()).map(|v| num(*v)).collect::<Vec<_>>()),
    )
}

/// Dependence matrix with residual rows and regressor columns.
pub fn write_per_pair(path: &Path, report: &LearnabilityReport, state_dim: usize) -> Result<()> {
    let cols = report.per_pair.first().map_or(0, Vec::len);
    let mut header = vec!["residual".to_string()];
    header.extend((0..cols).map(|j| if j < state_dim { format!("x{j}") } else { format!("u{}", j - state_dim) }));
    write_rows(
        path,
        &header,
        report.per_pair.iter().enumerate().map(|(i, row)| {
            std::iter::once(format!("r{i}")).chain(row.iter().map(|v| num(*v))).collect::<Vec<_>>()
        }),
    )
}

/// Numeric CSV with a header row, as `(header, m x d matrix)`.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    read_csv_columns(path, None)
}

/// Like [`read_numeric_csv`] but parses only the named columns (header
/// names, or zero-based indices), in the order given. Other columns may
/// hold text.
pub fn read_csv_columns(path: &Path, columns: Option<&[String]>) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let all: Vec<String> = rdr.headers().map_err(csv_err(path))?.iter().map(|s| s.trim().to_string()).collect();
    let picked: Vec<usize> = match columns {
        None => (0..all.len()).collect(),
        Some(wanted) => wanted
            .iter()
            .map(|w| {
                let w = w.trim();
                all.iter()
                    .position(|h| h == w)
                    .or_else(|| w.parse::<usize>().ok().filter(|&i| i < all.len()))
                    .ok_or_else(|| Error::Parse {
                        path: path.display().to_string(),
                        message: format!("no column `{w}` (have: {})", all.join(", ")),
                    })
            })
            .collect::<Result<_>>()?,
    };
    let mut values = Vec::new();
    let mut rows = 0;
    for (no, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        for &c in &picked {
            let field = rec.get(c).unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                message: format!("row {}, column `{}`: `{field}` is not a number", no + 2, all[c]),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let header = picked.iter().map(|&c| all[c].clone()).collect();
    Ok((header, DMatrix::from_row_slice(rows, picked.len(), &values)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/data.jsonl");
        let t = Trajectory::new(
            vec![vec![0.1, 0.2], vec![0.3, 0.4]],
            vec![vec![1.0]],
            Some(vec![vec![0.5]]),
            0.1,
        )
        .unwrap();
        write_trajectories(&path, &[t.clone(), t.clone()]).unwrap();
        let back = read_trajectories(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], t.without_disturbances());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("{\"dt\":0.1,\"states\""));
    }

    #[test]
    fn bad_lines_are_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"dt\":0.1,\"states\":[[0.0],[1.0]],\"inputs\":[[0.0]]}\nnot json\n").unwrap();
        match read_trajectories(&path) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("line 2"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_trajectories(&dir.path().join("missing")), Err(Error::Io { .. })));
    }

    #[test]
    fn numeric_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "a, b\n1,2\n3,4.5\n").unwrap();
        let (h, m) = read_numeric_csv(&path).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(m[(1, 1)], 4.5);
        std::fs::write(&path, "a,tag\n1,x\n2,y\n").unwrap();
        assert!(read_numeric_csv(&path).is_err());
        let (h, m) = read_csv_columns(&path, Some(&["0".to_string()])).unwrap();
        assert_eq!((h, m.as_slice().to_vec()), (vec!["a".to_string()], vec![1.0, 2.0]));
        assert!(read_csv_columns(&path, Some(&["zzz".to_string()])).is_err());
    }
}
