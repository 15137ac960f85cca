//! Extended run-length patterns: `.` is 0, `A`..`X` are 1..24, `[n]` is any
//! larger state. Rows end with `$`, the pattern with `!`.

use std::fmt::Write as _;

use crate::engine::{Configuration, Coord, State, Window};
use crate::{Error, Result};

const WRAP: usize = 70;

/// A finite rectangular pattern, rows top to bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub width: usize,
    pub height: usize,
    pub rule: Option<String>,
    pub comments: Vec<String>,
    pub rows: Vec<Vec<State>>,
}

impl Pattern {
    pub fn new(rows: Vec<Vec<State>>, rule: Option<String>) -> Self {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let height = rows.len();
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.resize(width, 0);
                r
            })
            .collect();
        Pattern { width, height, rule, comments: Vec::new(), rows }
    }

    /// Pattern of a window; the window's top-left cell becomes the origin.
    pub fn from_config(c: &Configuration, w: &Window, rule: Option<String>) -> Self {
        let rows = if c.dim() == 1 { vec![c.word(w.lo.0, w.hi.0)] } else { c.rows(w) };
        Pattern::new(rows, rule)
    }

    /// Places the pattern with its top-left cell at `at` over a zero background.
    pub fn to_config(&self, dim: usize, at: Coord) -> Result<Configuration> {
        if dim == 1 {
            if self.height > 1 {
                return Err(Error::Unsupported("multi-row pattern in 1D".into()));
            }
            let word = self.rows.first().cloned().unwrap_or_default();
            return Ok(Configuration::from_word(&word, at.0));
        }
        Ok(Configuration::from_rows(&self.rows, at.0, at.1))
    }

    /// Window covered when the top-left cell sits at `at`.
    pub fn window(&self, at: Coord) -> Window {
        Window::new(
            Coord(at.0, at.1 - self.height as i64 + 1),
            Coord(at.0 + self.width as i64 - 1, at.1),
        )
    }
}

fn symbol(s: State, out: &mut String) {
    match s {
        0 => out.push('.'),
        1..=24 => out.push((b'A' + (s - 1) as u8) as char),
        _ => {
            let _ = write!(out, "[{s}]");
        }
    }
}

fn run(n: usize, sym: &str, tokens: &mut Vec<String>) {
    if n == 0 {
        return;
    }
    tokens.push(if n == 1 { sym.to_string() } else { format!("{n}{sym}") });
}

/// Minimal tokens: runs of equal states, trailing zeros dropped per row,
/// blank rows folded into `$` counts, trailing blank rows dropped.
fn tokens(rows: &[Vec<State>]) -> Vec<String> {
    let mut out = Vec::new();
    let mut pending_rows = 0usize;
    for row in rows {
        let end = row.iter().rposition(|&s| s != 0).map_or(0, |i| i + 1);
        if end == 0 {
            pending_rows += 1;
            continue;
        }
        if !out.is_empty() || pending_rows > 0 {
            let n = if out.is_empty() { pending_rows } else { pending_rows + 1 };
            run(n, "$", &mut out);
        }
        pending_rows = 0;
        let mut i = 0;
        while i < end {
            let j = (i..end).find(|&j| row[j] != row[i]).unwrap_or(end);
            let mut sym = String::new();
            symbol(row[i], &mut sym);
            run(j - i, &sym, &mut out);
            i = j;
        }
    }
    out.push("!".into());
    out
}

/// Body only, wrapped at 70 columns without splitting a run.
pub fn encode_body(rows: &[Vec<State>]) -> String {
    let mut out = String::new();
    let mut line = 0;
    for t in tokens(rows) {
        if line + t.len() > WRAP && line > 0 {
            out.push('\n');
            line = 0;
        }
        out.push_str(&t);
        line += t.len();
    }
    out
}

pub fn encode_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    for c in &p.comments {
        let _ = writeln!(out, "#{c}");
    }
    let _ = write!(out, "x = {}, y = {}", p.width, p.height);
    if let Some(r) = &p.rule {
        let _ = write!(out, ", rule = {r}");
    }
    out.push('\n');
    out.push_str(&encode_body(&p.rows));
    out.push('\n');
    out
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
}

impl Cursor<'_> {
    fn pos(&self, at: usize) -> (usize, usize) {
        let before = &self.text[..at];
        let line = before.matches('\n').count() + 1;
        let col = at - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        (line, col)
    }

    fn err(&self, at: usize, msg: impl Into<String>) -> Error {
        let (l, c) = self.pos(at);
        Error::parse(l, c, msg)
    }
}

fn header_field(h: &str, key: &str) -> Option<String> {
    h.split(',').find_map(|part| {
        let (k, v) = part.split_once('=')?;
        (k.trim() == key).then(|| v.trim().to_string())
    })
}

pub fn decode_pattern(text: &str) -> Result<Pattern> {
    let mut comments = Vec::new();
    let mut offset = 0;
    let mut header = None;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if let Some(c) = t.strip_prefix('#') {
            comments.push(c.trim_end().to_string());
        } else if t.starts_with("x") && header.is_none() && t.contains('=') {
            header = Some((t.to_string(), offset));
        } else if !t.is_empty() {
            break;
        }
        offset += line.len();
    }
    let (width, height, rule) = match &header {
        Some((h, at)) => {
            let num = |k: &str| -> Result<usize> {
                let v = header_field(h, k).ok_or_else(|| Error::parse(line_of(text, *at), 1, format!("missing {k}")))?;
                v.parse().map_err(|_| Error::parse(line_of(text, *at), 1, format!("bad {k} = {v}")))
            };
            (Some(num("x")?), Some(num("y")?), header_field(h, "rule"))
        }
        None => (None, None, None),
    };

    let body = &text[offset..];
    let mut cur = Cursor { chars: body.char_indices().peekable(), text };
    let mut rows: Vec<Vec<State>> = vec![Vec::new()];
    let mut count: Option<usize> = None;
    let mut done = false;
    while let Some((i, ch)) = cur.chars.next() {
        let at = offset + i;
        if let Some(d) = ch.to_digit(10) {
            count = Some(count.unwrap_or(0) * 10 + d as usize);
            continue;
        }
        if ch.is_ascii_whitespace() {
            continue;
        }
        let n = count.take().unwrap_or(1);
        let state = match ch {
            '!' => {
                done = true;
                break;
            }
            '$' => {
                for _ in 0..n {
                    rows.push(Vec::new());
                }
                continue;
            }
            '.' | 'b' => 0,
            'o' => 1,
            'A'..='X' => ch as State - 'A' as State + 1,
            '[' => {
                let mut v = String::new();
                loop {
                    match cur.chars.next() {
                        Some((_, ']')) => break,
                        Some((_, d)) if d.is_ascii_digit() => v.push(d),
                        _ => return Err(cur.err(at, "unterminated bracketed state")),
                    }
                }
                v.parse().map_err(|_| cur.err(at, "empty bracketed state"))?
            }
            _ => return Err(cur.err(at, format!("unexpected '{ch}'"))),
        };
        let row = rows.last_mut().expect("row");
        row.extend(std::iter::repeat_n(state, n));
    }
    if !done {
        return Err(cur.err(text.len(), "missing '!'"));
    }
    let w = rows.iter().map(Vec::len).max().unwrap_or(0);
    let width = width.unwrap_or(w);
    if w > width {
        return Err(Error::parse(line_of(text, offset), 1, format!("row of width {w} exceeds x = {width}")));
    }
    // An empty body has one empty row; it only counts if the header says so.
    let height = height.unwrap_or(if w == 0 { 0 } else { rows.len() });
    if rows.len() > height && rows[height..].iter().any(|r| !r.is_empty()) {
        return Err(Error::parse(line_of(text, offset), 1, format!("{} rows exceed y = {height}", rows.len())));
    }
    rows.resize(height, Vec::new());
    for r in &mut rows {
        r.resize(width, 0);
    }
    Ok(Pattern { width, height, rule, comments, rows })
}

fn line_of(text: &str, at: usize) -> usize {
    text[..at.min(text.len())].matches('\n').count() + 1
}
