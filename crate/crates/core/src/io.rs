// SPDX-License-Identifier: MIT OR Apache-2.0

//! File formats.
//!
//! * Data: one value per line, optional `value` header. Positions are implicit `1..=N`.
//! * Labels: header `start,end,changes`, 1-based inclusive region endpoints.
//! * Segments: header `start,end,mean`.
//! * Corpus: a directory holding `<id>.data.csv` and `<id>.labels.csv` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use crate::cv::CorpusEntry;
use crate::data::DataSequence;
use crate::error::{Error, Result};
use crate::labels::{LabelSet, RawLabel};
use crate::solver::{Segment, Segmentation};

pub const DATA_SUFFIX: &str = ".data.csv";
pub const LABELS_SUFFIX: &str = ".labels.csv";

/// Round to `digits` significant digits and print the shortest representation.
pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.clamp(1, 17);
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().expect("formatted float parses");
    format!("{rounded}")
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parse a data file.
pub fn read_data(path: &Path) -> Result<DataSequence> {
    parse_data(&read_to_string(path)?, path)
}

pub fn parse_data(text: &str, path: &Path) -> Result<DataSequence> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let field = line.trim().trim_end_matches(',');
        if field.is_empty() {
            continue;
        }
        if values.is_empty() && i == 0 && field.eq_ignore_ascii_case("value") {
            continue;
        }
        let v: f64 = field
            .parse()
            .map_err(|_| parse_error(path, line_no, format!("not a number: {field:?}")))?;
        if !v.is_finite() {
            return Err(parse_error(path, line_no, format!("value is not finite: {field:?}")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(parse_error(path, 1, "no data values"));
    }
    DataSequence::new(values)
}

/// Parse and validate a labels file against a sequence of `n` points.
pub fn read_labels(path: &Path, n: usize) -> Result<LabelSet> {
    parse_labels(&read_to_string(path)?, path, n)
}

pub fn parse_labels(text: &str, path: &Path, n: usize) -> Result<LabelSet> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let expected = ["start", "end", "changes"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(parse_error(path, 1, "expected header start,end,changes"));
    }
    let mut raw = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<i64> {
            record[i]
                .parse()
                .map_err(|_| parse_error(path, line, format!("{}: not an integer: {:?}", expected[i], &record[i])))
        };
        raw.push(RawLabel {
            start: field(0)?,
            end: field(1)?,
            changes: field(2)?,
        });
        lines.push(line);
    }
    LabelSet::validate(raw, n).map_err(|e| match e {
        Error::InvalidLabel { index, reason } => parse_error(path, lines[index - 1], reason),
        other => other,
    })
}

pub fn labels_to_csv(labels: &LabelSet) -> String {
    let mut out = String::from("start,end,changes\n");
    for l in labels {
        out.push_str(&format!("{},{},{}\n", l.start, l.end, l.changes));
    }
    out
}

pub fn data_to_csv(seq: &DataSequence) -> String {
    let mut out = String::from("value\n");
    for v in seq.values() {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn segments_to_csv(fit: &Segmentation, digits: usize) -> String {
    let mut out = String::from("start,end,mean\n");
    for s in fit.segments() {
        out.push_str(&format!("{},{},{}\n", s.start, s.end, format_number(s.mean, digits)));
    }
    out
}

/// Parse a segments file into its changepoints (every segment end but the last).
pub fn read_segments(path: &Path, n: usize) -> Result<Vec<usize>> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut segments: Vec<(Segment, u64)> = Vec::new();
    for record in reader.deserialize::<Segment>() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = segments.len() as u64 + 2;
        segments.push((record, line));
    }
    let mut expected_start = 1;
    for (s, line) in &segments {
        if s.start != expected_start || s.end < s.start {
            return Err(parse_error(path, *line, format!("segment {}..{} is not contiguous", s.start, s.end)));
        }
        expected_start = s.end + 1;
    }
    if expected_start != n + 1 {
        return Err(parse_error(path, 1, format!("segments cover 1..{} but the data has {n} points", expected_start - 1)));
    }
    Ok(segments[..segments.len() - 1].iter().map(|(s, _)| s.end).collect())
}

fn corpus_ids(dir: &Path) -> Result<Vec<String>> {
    let mut ids: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok())
        .filter_map(|entry| {
            entry
                .file_name()
                .to_str()
                .and_then(|name| name.strip_suffix(DATA_SUFFIX))
                .map(str::to_owned)
        })
        .collect();
    ids.sort();
    Ok(ids)
}

/// Load every `<id>.data.csv` with its `<id>.labels.csv`; sequences sorted by id.
pub fn read_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    corpus_ids(dir)?
        .into_iter()
        .map(|id| {
            let data = read_data(&dir.join(format!("{id}{DATA_SUFFIX}")))?;
            let labels_path: PathBuf = dir.join(format!("{id}{LABELS_SUFFIX}"));
            let labels = if labels_path.exists() {
                read_labels(&labels_path, data.len())?
            } else {
                LabelSet::empty(data.len())
            };
            Ok(CorpusEntry { id, data, labels })
        })
        .collect()
}

pub fn write_corpus(dir: &Path, corpus: &[CorpusEntry]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for e in corpus {
        let data_path = dir.join(format!("{}{DATA_SUFFIX}", e.id));
        fs::write(&data_path, data_to_csv(&e.data)).map_err(|err| Error::io(&data_path, err))?;
        let labels_path = dir.join(format!("{}{LABELS_SUFFIX}", e.id));
        fs::write(&labels_path, labels_to_csv(&e.labels)).map_err(|err| Error::io(&labels_path, err))?;
    }
    Ok(())
}
