//! Praat TextGrid parser, full ("long") text format only.
//!
//! Returns the first IntervalTier as a [`PhonemeAlignment`]; empty-text
//! intervals are retained since they encode silence. The short format and
//! PointTiers are rejected or skipped respectively.

use thiserror::Error;

use crate::model::{Interval, PhonemeAlignment};

#[derive(Debug, Error)]
pub enum TextGridError {
    #[error("textgrid syntax at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("textgrid contains no IntervalTier")]
    NoIntervalTier,
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> TextGridError {
        TextGridError::Syntax {
            line: self.pos.min(self.lines.len()),
            message: message.into(),
        }
    }

    fn peek(&mut self) -> Option<&'a str> {
        while let Some(line) = self.lines.get(self.pos) {
            if line.trim().is_empty() {
                self.pos += 1;
                continue;
            }
            return Some(line.trim());
        }
        None
    }

    fn next(&mut self) -> Option<&'a str> {
        let line = self.peek()?;
        self.pos += 1;
        Some(line)
    }

    /// Consumes a `key = value` line; the key must match.
    fn key_value(&mut self, key: &str) -> Result<&'a str, TextGridError> {
        let line = self
            .next()
            .ok_or_else(|| self.err(format!("expected '{key} = ...', found end of file")))?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| self.err(format!("expected '{key} = ...', found '{line}'")))?;
        if k.trim() != key {
            return Err(self.err(format!("expected field '{key}', found '{}'", k.trim())));
        }
        Ok(v.trim())
    }

    fn number(&mut self, key: &str) -> Result<f64, TextGridError> {
        let v = self.key_value(key)?;
        v.parse::<f64>()
            .map_err(|_| self.err(format!("field '{key}' is not a number: '{v}'")))
    }

    fn string(&mut self, key: &str) -> Result<String, TextGridError> {
        let v = self.key_value(key)?;
        Ok(unquote(v))
    }
}

fn unquote(v: &str) -> String {
    let v = v.trim();
    let inner = v
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(v);
    inner.replace("\"\"", "\"")
}

/// Parses the full (long) TextGrid text format.
pub fn parse_textgrid(document: &str) -> Result<PhonemeAlignment, TextGridError> {
    let document = document.strip_prefix('\u{feff}').unwrap_or(document);
    let mut lines = Lines::new(document);

    let file_type = lines.string("File type")?;
    if file_type != "ooTextFile" {
        return Err(lines.err(format!("unsupported file type '{file_type}'")));
    }
    let class = lines.string("Object class")?;
    if class != "TextGrid" {
        return Err(lines.err(format!("object class '{class}' is not 'TextGrid'")));
    }

    // the short format carries bare values here instead of 'xmin = ...'
    match lines.peek() {
        Some(l) if l.starts_with("xmin") => {}
        _ => {
            return Err(lines.err(
                "expected 'xmin = ...'; the short TextGrid format is not supported",
            ))
        }
    }
    lines.number("xmin")?;
    lines.number("xmax")?;

    match lines.next() {
        Some(l) if l.starts_with("tiers?") => {
            if !l.contains("<exists>") {
                return Err(TextGridError::NoIntervalTier);
            }
        }
        other => {
            return Err(lines.err(format!(
                "expected 'tiers? <exists>', found '{}'",
                other.unwrap_or("end of file")
            )))
        }
    }
    let size = lines.number("size")? as usize;

    match lines.peek() {
        Some(l) if l.starts_with("item") => {
            lines.next();
        }
        _ => return Err(lines.err("expected 'item []:'")),
    }

    for _ in 0..size {
        match lines.peek() {
            Some(l) if l.starts_with("item") => {
                lines.next();
            }
            Some(other) => return Err(lines.err(format!("expected 'item [n]:', found '{other}'"))),
            None => return Err(lines.err("expected 'item [n]:', found end of file")),
        }
        let class = lines.string("class")?;
        lines.string("name")?;
        lines.number("xmin")?;
        lines.number("xmax")?;

        if class == "IntervalTier" {
            let n = lines.key_value("intervals: size")?;
            let n: usize = n
                .parse()
                .map_err(|_| lines.err(format!("invalid interval count '{n}'")))?;
            let mut intervals = Vec::with_capacity(n);
            for _ in 0..n {
                match lines.next() {
                    Some(l) if l.starts_with("intervals") => {}
                    other => {
                        return Err(lines.err(format!(
                            "expected 'intervals [n]:', found '{}'",
                            other.unwrap_or("end of file")
                        )))
                    }
                }
                let xmin = lines.number("xmin")?;
                let xmax = lines.number("xmax")?;
                let text = lines.string("text")?;
                if !(xmin.is_finite() && xmax.is_finite()) || xmin >= xmax {
                    return Err(lines.err(format!(
                        "interval [{xmin}, {xmax}] must satisfy xmin < xmax"
                    )));
                }
                if let Some(prev) = intervals.last() {
                    let prev: &Interval = prev;
                    if xmin < prev.end_sec - 1e-9 {
                        return Err(lines.err(format!(
                            "interval starting at {xmin} overlaps or precedes the previous one"
                        )));
                    }
                }
                intervals.push(Interval::new(xmin, xmax, text));
            }
            return Ok(PhonemeAlignment { intervals });
        }

        // skip a non-interval tier (e.g. TextTier points)
        if class == "TextTier" {
            let n = lines.key_value("points: size")?;
            let n: usize = n
                .parse()
                .map_err(|_| lines.err(format!("invalid point count '{n}'")))?;
            for _ in 0..n {
                match lines.next() {
                    Some(l) if l.starts_with("points") => {}
                    _ => return Err(lines.err("expected 'points [n]:'")),
                }
                lines.number("number")?;
                lines.string("mark")?;
            }
        } else {
            return Err(lines.err(format!("unsupported tier class '{class}'")));
        }
    }

    Err(TextGridError::NoIntervalTier)
}
