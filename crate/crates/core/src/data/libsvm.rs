//! libsvm text format: `label idx:val idx:val …` with 1-based indices.
//!
//! Labels `+1`/`1` and `-1` are read as is. A file labelled with `{0, 1}` is
//! mapped to `{−1, +1}` and reported through [`Loaded::labels_remapped`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Loaded {
    pub data: Dataset,
    /// The file used `{0, 1}` labels and `0` was mapped to `−1`.
    pub labels_remapped: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum RawLabel {
    Pos,
    Neg,
    Zero,
}

pub fn load_libsvm(path: impl AsRef<Path>, d_hint: Option<usize>) -> Result<Loaded> {
    parse_libsvm(BufReader::new(File::open(path)?), d_hint)
}

/// Parses libsvm text. `d` is the largest index seen, or `d_hint` if larger.
pub fn parse_libsvm<R: BufRead>(reader: R, d_hint: Option<usize>) -> Result<Loaded> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut raw_labels = Vec::new();
    let mut max_index = 0;
    let mut first_neg_line = None;
    let mut first_zero_line = None;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_token = tokens.next().expect("non-empty line has a token");
        let label = match label_token.parse::<f64>() {
            Ok(1.0) => RawLabel::Pos,
            Ok(-1.0) => {
                first_neg_line.get_or_insert(lineno);
                RawLabel::Neg
            }
            Ok(0.0) => {
                first_zero_line.get_or_insert(lineno);
                RawLabel::Zero
            }
            _ => return Err(Error::Label { line: lineno, label: label_token.to_string() }),
        };

        let mut row = Vec::new();
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected idx:value, found {token:?}"),
            })?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Parse { line: lineno, message: format!("bad feature index {idx:?}") })?;
            if idx == 0 {
                return Err(Error::Parse { line: lineno, message: "feature indices are 1-based".into() });
            }
            let val: f64 = val
                .parse()
                .map_err(|_| Error::Parse { line: lineno, message: format!("bad feature value {val:?}") })?;
            if !val.is_finite() {
                return Err(Error::Parse { line: lineno, message: format!("non-finite value at index {idx}") });
            }
            if row.iter().any(|&(i, _)| i == idx - 1) {
                return Err(Error::Parse { line: lineno, message: format!("index {idx} repeated") });
            }
            max_index = max_index.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        raw_labels.push(label);
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let (Some(zero), Some(neg)) = (first_zero_line, first_neg_line) {
        return Err(Error::Label { line: zero.max(neg), label: "mixed 0 and -1 labels".into() });
    }
    let labels_remapped = first_zero_line.is_some();
    let labels =
        raw_labels.into_iter().map(|l| if l == RawLabel::Pos { Label::Positive } else { Label::Negative }).collect();

    let d = max_index.max(d_hint.unwrap_or(0)).max(1);
    let mut features = vec![0.0; rows.len() * d];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features[i * d + j] = v;
        }
    }
    Ok(Loaded { data: Dataset::new(features, d, labels)?, labels_remapped })
}

/// Writes nonzero entries only. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_libsvm<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    for i in 0..data.n() {
        out.write_all(if data.label(i).is_positive() { b"+1" } else { b"-1" })?;
        for (j, v) in data.row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_libsvm(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    write_libsvm(data, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str, d_hint: Option<usize>) -> Result<Loaded> {
        parse_libsvm(text.as_bytes(), d_hint)
    }

    #[test]
    fn parses_sparse_line() {
        let loaded = parse("+1 1:0.5 3:2\n", None).unwrap();
        assert_eq!(loaded.data.d(), 3);
        assert_eq!(loaded.data.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(loaded.data.label(0), Label::Positive);
        assert!(!loaded.labels_remapped);
    }

    #[test]
    fn dimension_hint_pads() {
        let loaded = parse("-1 2:1\n1 1:3 # comment\n\n", Some(4)).unwrap();
        assert_eq!(loaded.data.d(), 4);
        assert_eq!(loaded.data.row(1), &[3.0, 0.0, 0.0, 0.0]);
        assert_eq!(loaded.data.labels(), &[Label::Negative, Label::Positive]);
    }

    #[test]
    fn zero_one_labels_are_mapped() {
        let loaded = parse("0 1:1\n1 1:2\n", None).unwrap();
        assert!(loaded.labels_remapped);
        assert_eq!(loaded.data.labels(), &[Label::Negative, Label::Positive]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse("", None), Err(Error::EmptyDataset)));
        assert!(matches!(parse("\n# only comment\n", None), Err(Error::EmptyDataset)));
        assert!(matches!(parse("+1 1:1\n+1 x:1\n", None), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("+1 1:1\n+1 0:1\n", None), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("+1 1:abc\n", None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("+1 1:1 1:2\n", None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("+1 2\n", None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("1 1:1\n2 1:1\n", None), Err(Error::Label { line: 2, .. })));
        assert!(matches!(parse("0 1:1\n-1 1:1\n", None), Err(Error::Label { .. })));
    }

    proptest! {
        #[test]
        fn write_then_read_is_exact(
            rows in prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), -1e6f64..1e6, -1e-8f64..1e-8], 4), 1..12),
            signs in prop::collection::vec(any::<bool>(), 12),
        ) {
            let labels: Vec<Label> = (0..rows.len()).map(|i| if signs[i] { Label::Positive } else { Label::Negative }).collect();
            let data = Dataset::from_rows(&rows, labels).unwrap();
            let mut buf = Vec::new();
            write_libsvm(&data, &mut buf).unwrap();
            let back = parse_libsvm(buf.as_slice(), Some(4)).unwrap();
            prop_assert_eq!(back.data, data);
        }
    }
}
