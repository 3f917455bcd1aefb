//! Comment records, corpora and JSON Lines I/O.
//!
//! One record per line: `{"id": ..., "text": ..., "label"?: ..., "spans"?:
//! [[start, end], ...], "source"?: ...}`. Span indices are word indices over
//! whitespace-split text, end exclusive. Text is stored exactly as read; no
//! normalization happens at load time.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One social-media text record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comment {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Word-index spans over whitespace-split text, end exclusive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spans: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Comment {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Comment {
            id: id.into(),
            text: text.into(),
            label: None,
            spans: None,
            source: None,
        }
    }
}

/// An ordered, immutable-after-load collection of comments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub name: String,
    comments: Vec<Comment>,
}

impl Corpus {
    pub fn from_comments(name: impl Into<String>, comments: Vec<Comment>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, c) in comments.iter().enumerate() {
            if c.id.is_empty() {
                return Err(Error::EmptyId { line: i + 1 });
            }
            if !seen.insert(c.id.clone()) {
                return Err(Error::DuplicateId {
                    id: c.id.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(Corpus {
            name: name.into(),
            comments,
        })
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Comment> {
        self.comments.iter()
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Comment;
    type IntoIter = std::slice::Iter<'a, Comment>;
    fn into_iter(self) -> Self::IntoIter {
        self.comments.iter()
    }
}

/// Train/dev/test corpora; dev may be absent.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Corpus,
    pub dev: Option<Corpus>,
    pub test: Corpus,
}

impl DatasetSplit {
    /// Splits must be disjoint by id.
    pub fn new(train: Corpus, dev: Option<Corpus>, test: Corpus) -> Result<Self> {
        let mut seen = HashSet::new();
        for corpus in [Some(&train), dev.as_ref(), Some(&test)].into_iter().flatten() {
            for c in corpus.iter() {
                if !seen.insert(c.id.as_str()) {
                    return Err(Error::DuplicateId {
                        id: c.id.clone(),
                        line: 0,
                    });
                }
            }
        }
        Ok(DatasetSplit { train, dev, test })
    }
}

/// Read a JSON Lines corpus. Order is preserved; blank lines are skipped;
/// malformed lines and duplicate ids are errors naming the line.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_corpus(BufReader::new(file), name)
}

/// Read a JSON Lines corpus from any reader (used for stdin piping).
pub fn read_corpus(reader: impl BufRead, name: impl Into<String>) -> Result<Corpus> {
    let mut comments = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let comment: Comment = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedLine { line: lineno, source: e })?;
        if comment.id.is_empty() {
            return Err(Error::EmptyId { line: lineno });
        }
        if !seen.insert(comment.id.clone()) {
            return Err(Error::DuplicateId {
                id: comment.id.clone(),
                line: lineno,
            });
        }
        comments.push(comment);
    }
    Ok(Corpus {
        name: name.into(),
        comments,
    })
}

/// Write a corpus as JSON Lines, one record per input comment, same order.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(corpus, &mut file).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_corpus(corpus: &Corpus, w: &mut impl Write) -> std::io::Result<()> {
    for c in corpus.iter() {
        serde_json::to_writer(&mut *w, c)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
