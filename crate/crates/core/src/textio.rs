//! Plain-text formats shared by the generator, fitters and evaluator.
//!
//! Both formats start with optional `# key=value` header lines.
//!
//! * Dense matrix: one row per line, space-separated floats written with
//!   shortest round-trip precision.
//! * Label file: one line per document, space-separated topic labels; an
//!   empty document is an empty line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub type Header = Vec<(String, String)>;

fn write_header<W: Write>(out: &mut W, header: &[(String, String)]) -> std::io::Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn parse_header_line(line: &str) -> Option<(String, String)> {
    let body = line.strip_prefix('#')?.trim();
    let (k, v) = body.split_once('=')?;
    Some((k.trim().to_string(), v.trim().to_string()))
}

pub fn header_value<'a>(header: &'a [(String, String)], key: &str) -> Option<&'a str> {
    header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

pub fn write_matrix<W: Write>(
    out: W,
    header: &[(String, String)],
    cols: usize,
    data: &[f64],
) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    write_header(&mut out, header)?;
    if cols > 0 {
        for row in data.chunks(cols) {
            let mut first = true;
            for x in row {
                if !first {
                    out.write_all(b" ")?;
                }
                first = false;
                write!(out, "{x:e}")?;
            }
            out.write_all(b"\n")?;
        }
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub header: Header,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<DenseMatrix> {
    let mut header = Vec::new();
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::format(line_no, e.to_string()))?;
        if line.starts_with('#') {
            if let Some(kv) = parse_header_line(&line) {
                header.push(kv);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for f in line.split_whitespace() {
            let x = f
                .parse::<f64>()
                .map_err(|_| Error::format(line_no, format!("{f:?} is not a number")))?;
            data.push(x);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::format(line_no, format!("row has {width} entries, expected {c}")));
            }
            _ => {}
        }
        rows += 1;
    }
    Ok(DenseMatrix { header, rows, cols: cols.unwrap_or(0), data })
}

pub fn write_labels<W: Write>(
    out: W,
    header: &[(String, String)],
    labels: &[Vec<usize>],
) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    write_header(&mut out, header)?;
    for doc in labels {
        let mut first = true;
        for z in doc {
            if !first {
                out.write_all(b" ")?;
            }
            first = false;
            write!(out, "{z}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_labels<R: BufRead>(input: R) -> Result<(Header, Vec<Vec<usize>>)> {
    let mut header = Vec::new();
    let mut docs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::format(line_no, e.to_string()))?;
        if line.starts_with('#') {
            if let Some(kv) = parse_header_line(&line) {
                header.push(kv);
            }
            continue;
        }
        let doc = line
            .split_whitespace()
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| Error::format(line_no, format!("{f:?} is not a topic label")))
            })
            .collect::<Result<Vec<_>>>()?;
        docs.push(doc);
    }
    Ok((header, docs))
}

pub fn write_key_values<W: Write>(out: W, pairs: &[(String, String)]) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for (k, v) in pairs {
        writeln!(out, "{k}={v}")?;
    }
    out.flush()
}

pub fn read_key_values<R: BufRead>(input: R) -> Result<Header> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::format(i + 1, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(i + 1, format!("expected key=value, found {line:?}")))?;
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub(crate) fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn save_labels(path: &Path, header: &[(String, String)], labels: &[Vec<usize>]) -> Result<()> {
    let f = create(path)?;
    write_labels(f, header, labels).map_err(|e| Error::io(path, e))
}

pub fn load_labels(path: &Path) -> Result<(Header, Vec<Vec<usize>>)> {
    read_labels(open(path)?)
}

pub fn save_matrix(path: &Path, header: &[(String, String)], cols: usize, data: &[f64]) -> Result<()> {
    let f = create(path)?;
    write_matrix(f, header, cols, data).map_err(|e| Error::io(path, e))
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    read_matrix(open(path)?)
}

pub fn save_key_values(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    let f = create(path)?;
    write_key_values(f, pairs).map_err(|e| Error::io(path, e))
}

pub fn load_key_values(path: &Path) -> Result<Header> {
    read_key_values(open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matrix_round_trip_is_bit_exact(
            rows in 1usize..5,
            cols in 1usize..6,
            seed in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 30),
        ) {
            let data: Vec<f64> = seed.iter().cycle().take(rows * cols).copied().collect();
            let header = vec![("k".to_string(), "v".to_string())];
            let mut buf = Vec::new();
            write_matrix(&mut buf, &header, cols, &data).unwrap();
            let back = read_matrix(buf.as_slice()).unwrap();
            prop_assert_eq!(back.rows, rows);
            prop_assert_eq!(back.cols, cols);
            prop_assert_eq!(back.header, header);
            for (a, b) in back.data.iter().zip(&data) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn labels_round_trip(docs in proptest::collection::vec(proptest::collection::vec(0usize..50, 0..8), 0..6)) {
            let mut buf = Vec::new();
            write_labels(&mut buf, &[], &docs).unwrap();
            let (_, back) = read_labels(buf.as_slice()).unwrap();
            prop_assert_eq!(back, docs);
        }
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        assert!(read_matrix("1 2\n3\n".as_bytes()).is_err());
    }
}
