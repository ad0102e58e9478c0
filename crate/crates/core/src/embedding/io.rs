//! Text file formats for embeddings and trial lists.
//!
//! Embedding file: a `dim=D` header line, then one embedding per line as
//! `speaker_id<TAB>dataset<TAB>c1 c2 ... cD` in decimal text.
//!
//! Trial list: one trial per line as
//! `enroll_id<TAB>test_id<TAB>{target|nontarget}`.

use super::{EmbeddingError, EmbeddingSet, SpeakerEmbedding};
use std::fs;
use std::path::Path;

/// A trial before scoring: who is compared with whom, and the truth label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSpec {
    pub enroll_id: String,
    pub test_id: String,
    pub is_target: bool,
}

pub fn write_embeddings(set: &EmbeddingSet, path: &Path) -> Result<(), EmbeddingError> {
    let mut out = String::new();
    out.push_str(&format!("dim={}\n", set.dim()));
    for e in set.iter() {
        out.push_str(&e.speaker_id);
        out.push('\t');
        out.push_str(&e.dataset);
        out.push('\t');
        let mut first = true;
        for v in &e.vector {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingSet, EmbeddingError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(EmbeddingError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let dim: usize = header
        .strip_prefix("dim=")
        .and_then(|d| d.trim().parse().ok())
        .ok_or(EmbeddingError::Parse {
            line: 1,
            message: "expected header `dim=D`".into(),
        })?;
    let mut embeddings = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let speaker_id = fields.next().unwrap_or_default();
        let dataset = fields.next().ok_or(EmbeddingError::Parse {
            line: line_no,
            message: "missing dataset field".into(),
        })?;
        let values = fields.next().ok_or(EmbeddingError::Parse {
            line: line_no,
            message: "missing vector field".into(),
        })?;
        let vector: Vec<f64> = values
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>().map_err(|e| EmbeddingError::Parse {
                    line: line_no,
                    message: format!("bad component {v:?}: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if vector.len() != dim {
            return Err(EmbeddingError::Parse {
                line: line_no,
                message: format!("expected {dim} components, got {}", vector.len()),
            });
        }
        embeddings.push(SpeakerEmbedding::new(speaker_id, dataset, vector));
    }
    EmbeddingSet::new(embeddings)
}

pub fn write_trials(trials: &[TrialSpec], path: &Path) -> Result<(), EmbeddingError> {
    let mut out = String::new();
    for t in trials {
        let label = if t.is_target { "target" } else { "nontarget" };
        out.push_str(&format!("{}\t{}\t{}\n", t.enroll_id, t.test_id, label));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialSpec>, EmbeddingError> {
    let text = fs::read_to_string(path)?;
    let mut trials = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(EmbeddingError::Parse {
                line: line_no,
                message: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let is_target = match fields[2].trim() {
            "target" => true,
            "nontarget" => false,
            other => {
                return Err(EmbeddingError::Parse {
                    line: line_no,
                    message: format!("bad label {other:?} (want target|nontarget)"),
                })
            }
        };
        trials.push(TrialSpec {
            enroll_id: fields[0].to_string(),
            test_id: fields[1].to_string(),
            is_target,
        });
    }
    Ok(trials)
}
