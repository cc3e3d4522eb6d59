//! Line-oriented readers and writers for the three input files.
//!
//! * dataset split: UTF-8, one sample per line, five tab-separated fields
//!   `sample_id  label  target  tweet  image_id`, every line `\n`-terminated;
//! * captions: JSON lines `{"image_id": …, "caption": …}`;
//! * scene graphs: JSON lines, a header `{"format": "seqcsg-scene-graph",
//!   "version": 1, "feature_dim": f}` followed by one record per image.
//!
//! Each `parse_*_line` function is shared by the fail-fast loaders here and
//! by the collecting validators in [`super::validate`].

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sample::{DatasetSplit, Label, Sample, SplitName};
use crate::error::{Error, Result};

pub const SCENE_GRAPH_FORMAT: &str = "seqcsg-scene-graph";
pub const SCENE_GRAPH_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub image_id: String,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageTriple {
    pub region_id: String,
    pub object: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraphRecord {
    pub image_id: String,
    #[serde(default)]
    pub object_object: Vec<ObjectTriple>,
    #[serde(default)]
    pub image_object: Vec<ImageTriple>,
    #[serde(default)]
    pub region_features: BTreeMap<String, Vec<f64>>,
}

impl SceneGraphRecord {
    pub fn empty(image_id: impl Into<String>) -> Self {
        Self {
            image_id: image_id.into(),
            object_object: Vec::new(),
            image_object: Vec::new(),
            region_features: BTreeMap::new(),
        }
    }

    /// Checks scores, region references and feature dimensionality.
    pub fn check(&self, feature_dim: usize) -> std::result::Result<(), String> {
        for t in &self.object_object {
            if !(0.0..=1.0).contains(&t.score) {
                return Err(format!(
                    "image {}: triple ({}, {}, {}) has score {} outside [0, 1]",
                    self.image_id, t.subject, t.predicate, t.object, t.score
                ));
            }
            if t.subject.trim().is_empty() || t.predicate.trim().is_empty() || t.object.trim().is_empty() {
                return Err(format!("image {}: triple with an empty element", self.image_id));
            }
        }
        for t in &self.image_object {
            if !(0.0..=1.0).contains(&t.score) {
                return Err(format!(
                    "image {}: region {} has score {} outside [0, 1]",
                    self.image_id, t.region_id, t.score
                ));
            }
            if t.object.trim().is_empty() {
                return Err(format!(
                    "image {}: region {} has an empty object",
                    self.image_id, t.region_id
                ));
            }
            if !self.region_features.contains_key(&t.region_id) {
                return Err(format!("image {}: unknown region_id {:?}", self.image_id, t.region_id));
            }
        }
        for (region, v) in &self.region_features {
            if v.len() != feature_dim {
                return Err(format!(
                    "image {}: region {region} has {} features, header declares {feature_dim}",
                    self.image_id,
                    v.len()
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(format!(
                    "image {}: region {region} has non-finite features",
                    self.image_id
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraphHeader {
    pub format: String,
    pub version: u32,
    pub feature_dim: usize,
}

/// All scene graphs of one feature file.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraphFile {
    pub feature_dim: usize,
    pub records: Vec<SceneGraphRecord>,
}

pub fn parse_dataset_line(line: &str) -> std::result::Result<Sample, LineError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(LineError::Malformed(format!(
            "expected 5 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let label: Label = fields[1].parse().map_err(LineError::UnknownLabel)?;
    let sample = Sample {
        sample_id: fields[0].to_string(),
        label,
        target: fields[2].to_string(),
        tweet: fields[3].to_string(),
        image_id: fields[4].to_string(),
    };
    if sample.sample_id.is_empty() || sample.image_id.is_empty() {
        return Err(LineError::Invalid("empty sample_id or image_id".into()));
    }
    sample.validate().map_err(|e| LineError::Invalid(e.to_string()))?;
    Ok(sample)
}

/// Why a single line was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum LineError {
    Malformed(String),
    UnknownLabel(String),
    Invalid(String),
}

impl std::fmt::Display for LineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineError::Malformed(m) | LineError::Invalid(m) => f.write_str(m),
            LineError::UnknownLabel(l) => write!(f, "unknown label {l:?}"),
        }
    }
}

/// Loads a dataset split, preserving file order.
pub fn load_split(path: impl AsRef<Path>, name: SplitName) -> Result<DatasetSplit> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_split(&text, name, path)
}

pub fn parse_split(text: &str, name: SplitName, path: &Path) -> Result<DatasetSplit> {
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        match parse_dataset_line(line) {
            Ok(s) => samples.push(s),
            Err(LineError::UnknownLabel(label)) => return Err(Error::UnknownLabel { line: line_no, label }),
            Err(LineError::Invalid(message)) => {
                return Err(Error::Validation(format!("{}:{line_no}: {message}", path.display())))
            }
            Err(LineError::Malformed(message)) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message,
                })
            }
        }
    }
    Ok(DatasetSplit::new(name, samples))
}

pub fn format_split(split: &DatasetSplit) -> String {
    let mut out = String::new();
    for s in &split.samples {
        out.push_str(&s.sample_id);
        out.push('\t');
        out.push_str(s.label.as_str());
        out.push('\t');
        out.push_str(&s.target);
        out.push('\t');
        out.push_str(&s.tweet);
        out.push('\t');
        out.push_str(&s.image_id);
        out.push('\n');
    }
    out
}

pub fn write_split(path: impl AsRef<Path>, split: &DatasetSplit) -> Result<()> {
    fs::write(path, format_split(split))?;
    Ok(())
}

pub fn parse_caption_line(line: &str) -> std::result::Result<CaptionRecord, String> {
    let rec: CaptionRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if rec.image_id.is_empty() {
        return Err("empty image_id".into());
    }
    if rec.caption.trim().is_empty() {
        return Err(format!("image {}: empty caption", rec.image_id));
    }
    Ok(rec)
}

pub fn load_captions(path: impl AsRef<Path>) -> Result<Vec<CaptionRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_caption_line(l).map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            })
        })
        .collect()
}

pub fn write_captions(path: impl AsRef<Path>, captions: &[CaptionRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for c in captions {
        serde_json::to_writer(&mut f, c)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn parse_scene_graph_header(line: &str) -> std::result::Result<SceneGraphHeader, String> {
    let header: SceneGraphHeader = serde_json::from_str(line).map_err(|e| format!("bad header: {e}"))?;
    if header.format != SCENE_GRAPH_FORMAT {
        return Err(format!("unexpected format tag {:?}", header.format));
    }
    if header.version != SCENE_GRAPH_VERSION {
        return Err(format!("unsupported version {}", header.version));
    }
    if header.feature_dim == 0 {
        return Err("feature_dim must be positive".into());
    }
    Ok(header)
}

pub fn parse_scene_graph_line(line: &str, feature_dim: usize) -> std::result::Result<SceneGraphRecord, String> {
    let rec: SceneGraphRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if rec.image_id.is_empty() {
        return Err("empty image_id".into());
    }
    rec.check(feature_dim)?;
    Ok(rec)
}

pub fn load_scene_graphs(path: impl AsRef<Path>) -> Result<SceneGraphFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, first)) = lines.next() else {
        return Err(parse_err(1, "missing header line".into()));
    };
    let header = parse_scene_graph_header(first).map_err(|m| parse_err(1, m))?;
    let records = lines
        .map(|(i, l)| parse_scene_graph_line(l, header.feature_dim).map_err(|m| parse_err(i + 1, m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SceneGraphFile {
        feature_dim: header.feature_dim,
        records,
    })
}

pub fn write_scene_graphs(path: impl AsRef<Path>, file: &SceneGraphFile) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    let header = SceneGraphHeader {
        format: SCENE_GRAPH_FORMAT.into(),
        version: SCENE_GRAPH_VERSION,
        feature_dim: file.feature_dim,
    };
    serde_json::to_writer(&mut f, &header)?;
    f.write_all(b"\n")?;
    for r in &file.records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

/// Converts the public benchmark TSV layout (header row, then
/// `index  label  image_file  tweet-with-$T$  target`, labels 0/1/2 for
/// negative/neutral/positive) into samples. The image file's extension is
/// dropped to form the image id.
pub fn import_benchmark_tsv(path: impl AsRef<Path>, name: SplitName) -> Result<DatasetSplit> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(parse_err(format!("expected 5 fields, found {}", fields.len())));
        }
        let label = match fields[1].trim() {
            "0" => Label::Negative,
            "1" => Label::Neutral,
            "2" => Label::Positive,
            other => {
                return Err(Error::UnknownLabel {
                    line: i + 1,
                    label: other.to_string(),
                })
            }
        };
        let image_id = fields[2]
            .trim()
            .rsplit_once('.')
            .map_or(fields[2].trim(), |(stem, _)| stem);
        let sample = Sample {
            sample_id: format!("{}-{}", name, fields[0].trim()),
            label,
            image_id: image_id.to_string(),
            tweet: fields[3].to_string(),
            target: fields[4].trim().to_string(),
        };
        sample.validate().map_err(|e| parse_err(e.to_string()))?;
        samples.push(sample);
    }
    Ok(DatasetSplit::new(name, samples))
}
