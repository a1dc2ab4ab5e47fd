//! Plain-text file formats.
//!
//! Edge lists hold one undirected edge per line as two whitespace-separated
//! 0-based vertex ids. Lines starting with `#` are comments, except that a
//! `# vertices: N` comment fixes the vertex count so trailing isolated
//! vertices survive a round trip. Label and vertex-list files hold one
//! integer per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

const VERTEX_HEADER: &str = "vertices:";

pub fn parse_edge_list(text: &str, path: &Path) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_id: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix(VERTEX_HEADER) {
                let n = count.trim().parse::<usize>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("bad vertex count: {e}"),
                })?;
                declared = Some(n);
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            let tok = tok.ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: "expected two vertex ids".into(),
            })?;
            tok.parse::<usize>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("`{tok}` is not a vertex id"),
            })
        };
        let (i, j) = (parse(fields.next())?, parse(fields.next())?);
        if fields.next().is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: "trailing fields after edge".into(),
            });
        }
        if i == j {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("self-loop at vertex {i}"),
            });
        }
        max_id = Some(max_id.map_or(i.max(j), |m: usize| m.max(i).max(j)));
        edges.push((i, j, line_no));
    }
    let inferred = max_id.map_or(0, |m| m + 1);
    let n = match declared {
        Some(n) if n < inferred => {
            let (_, _, line) = edges.iter().find(|(i, j, _)| *i >= n || *j >= n).unwrap();
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                msg: format!("vertex id exceeds declared count {n}"),
            });
        }
        Some(n) => n,
        None => inferred,
    };
    Graph::from_edges(n, edges.into_iter().map(|(i, j, _)| (i, j)))
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text, path)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("# {VERTEX_HEADER} {}\n", g.n());
    for (i, j) in g.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}

pub fn write_edge_list(path: impl AsRef<Path>, g: &Graph) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

fn read_integers(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.parse::<usize>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: format!("`{line}` is not a non-negative integer"),
        })?);
    }
    Ok(out)
}

/// Reads one integer label per line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    read_integers(path.as_ref())
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a vertex-id list (queries), one id per line.
pub fn read_vertex_list(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    read_integers(path.as_ref())
}

/// Reads whitespace-separated vertex-id pairs, one pair per line.
pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ids: Vec<_> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let bad = || Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: "expected two vertex ids".into(),
        };
        if ids.len() != 2 {
            return Err(bad());
        }
        let a = ids[0].parse().map_err(|_| bad())?;
        let b = ids[1].parse().map_err(|_| bad())?;
        out.push((a, b));
    }
    Ok(out)
}

/// Formats a float with enough digits to round-trip.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// CSV with a header row followed by one matrix row per line.
pub fn format_matrix_csv(header: &[String], m: &DMatrix<f64>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_f64(m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a headered numeric CSV back into a matrix.
pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        msg: "missing header".into(),
    })?;
    let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
    let cols = header.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (idx, line) in lines {
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != cols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("expected {cols} fields, found {}", vals.len()),
            });
        }
        for v in vals {
            data.push(v.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("`{v}` is not a number"),
            })?);
        }
        rows += 1;
    }
    Ok((header, DMatrix::from_row_slice(rows, cols, &data)))
}

pub fn write_json<T: serde::Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
