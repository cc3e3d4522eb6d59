//! Collecting validators: unlike the loaders they keep going after the
//! first problem and report every offending line.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::io::{parse_caption_line, parse_dataset_line, parse_scene_graph_header, parse_scene_graph_line};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{l}: {}", self.file.display(), self.message),
            None => write!(f, "{}: {}", self.file.display(), self.message),
        }
    }
}

fn read(path: &Path, findings: &mut Vec<Finding>) -> Option<String> {
    match fs::read_to_string(path) {
        Ok(t) => Some(t),
        Err(e) => {
            findings.push(Finding {
                file: path.to_path_buf(),
                line: None,
                message: format!("cannot read: {e}"),
            });
            None
        }
    }
}

pub fn validate_dataset_file(path: &Path) -> Vec<Finding> {
    let mut findings = Vec::new();
    let Some(text) = read(path, &mut findings) else {
        return findings;
    };
    if !text.is_empty() && !text.ends_with('\n') {
        findings.push(Finding {
            file: path.to_path_buf(),
            line: None,
            message: "last line is not newline-terminated".into(),
        });
    }
    let mut ids: HashMap<String, usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.ends_with('\r') {
            findings.push(Finding {
                file: path.to_path_buf(),
                line: Some(line_no),
                message: "carriage return in line ending".into(),
            });
        }
        match parse_dataset_line(line) {
            Ok(sample) => {
                if let Some(first) = ids.insert(sample.sample_id.clone(), line_no) {
                    findings.push(Finding {
                        file: path.to_path_buf(),
                        line: Some(line_no),
                        message: format!("duplicate sample_id {:?} (first on line {first})", sample.sample_id),
                    });
                }
            }
            Err(e) => findings.push(Finding {
                file: path.to_path_buf(),
                line: Some(line_no),
                message: e.to_string(),
            }),
        }
    }
    findings
}

pub fn validate_caption_file(path: &Path) -> Vec<Finding> {
    let mut findings = Vec::new();
    let Some(text) = read(path, &mut findings) else {
        return findings;
    };
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        match parse_caption_line(line) {
            Ok(rec) => {
                if let Some(first) = seen.insert(rec.image_id.clone(), line_no) {
                    findings.push(Finding {
                        file: path.to_path_buf(),
                        line: Some(line_no),
                        message: format!("duplicate image_id {:?} (first on line {first})", rec.image_id),
                    });
                }
            }
            Err(message) => findings.push(Finding {
                file: path.to_path_buf(),
                line: Some(line_no),
                message,
            }),
        }
    }
    findings
}

pub fn validate_scene_graph_file(path: &Path) -> Vec<Finding> {
    let mut findings = Vec::new();
    let Some(text) = read(path, &mut findings) else {
        return findings;
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((hi, header)) = lines.next() else {
        findings.push(Finding {
            file: path.to_path_buf(),
            line: Some(1),
            message: "missing header line".into(),
        });
        return findings;
    };
    let header = match parse_scene_graph_header(header) {
        Ok(h) => h,
        Err(message) => {
            findings.push(Finding {
                file: path.to_path_buf(),
                line: Some(hi + 1),
                message,
            });
            return findings;
        }
    };
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        match parse_scene_graph_line(line, header.feature_dim) {
            Ok(rec) => {
                if let Some(first) = seen.insert(rec.image_id.clone(), line_no) {
                    findings.push(Finding {
                        file: path.to_path_buf(),
                        line: Some(line_no),
                        message: format!("duplicate image_id {:?} (first on line {first})", rec.image_id),
                    });
                }
            }
            Err(message) => findings.push(Finding {
                file: path.to_path_buf(),
                line: Some(line_no),
                message,
            }),
        }
    }
    findings
}
