//! Textual set specifications.
//!
//! ```text
//! explicit:1,2,4
//! interval:start=1,len=10
//! geo:g=3,len=10[,start=1]
//! subgroup:g=3
//! random:size=10,seed=42
//! cosets:g=3,pieces=3+1
//! ```

use std::fmt;

use sumprod_core::explorer::FamilySpec;

/// A parse failure at byte offset `pos` of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at position {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for SpecError {}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError { pos, message: message.into() })
}

fn number(text: &str, pos: usize) -> Result<u64, SpecError> {
    if text.is_empty() {
        return err(pos, "expected a decimal integer");
    }
    if let Some(i) = text.find(|c: char| !c.is_ascii_digit()) {
        return err(pos + i, format!("unexpected character {:?} in number", text[i..].chars().next().unwrap()));
    }
    text.parse().or_else(|_| err(pos, format!("number {text} does not fit in 64 bits")))
}

/// Comma-separated `key=value` pairs, checked against the allowed keys.
struct Params<'a> {
    entries: Vec<(&'a str, &'a str, usize)>,
    end: usize,
}

impl<'a> Params<'a> {
    fn parse(body: &'a str, offset: usize, allowed: &[&str]) -> Result<Self, SpecError> {
        let mut entries: Vec<(&str, &str, usize)> = Vec::new();
        let mut pos = offset;
        for item in body.split(',') {
            let Some(eq) = item.find('=') else {
                return err(pos, format!("expected key=value, found {item:?}"));
            };
            let (key, value) = (&item[..eq], &item[eq + 1..]);
            if !allowed.contains(&key) {
                return err(pos, format!("unknown key {key:?} (expected one of {})", allowed.join(", ")));
            }
            if entries.iter().any(|(k, _, _)| *k == key) {
                return err(pos, format!("duplicate key {key:?}"));
            }
            entries.push((key, value, pos + eq + 1));
            pos += item.len() + 1;
        }
        Ok(Params { entries, end: offset + body.len() })
    }

    fn raw(&self, key: &str) -> Option<(&'a str, usize)> {
        self.entries.iter().find(|(k, _, _)| *k == key).map(|&(_, v, p)| (v, p))
    }

    fn get(&self, key: &str) -> Result<u64, SpecError> {
        match self.raw(key) {
            Some((v, p)) => number(v, p),
            None => err(self.end, format!("missing key {key:?}")),
        }
    }

    fn get_or(&self, key: &str, default: u64) -> Result<u64, SpecError> {
        match self.raw(key) {
            Some((v, p)) => number(v, p),
            None => Ok(default),
        }
    }
}

pub fn parse(text: &str) -> Result<FamilySpec, SpecError> {
    let Some(colon) = text.find(':') else {
        return err(0, "expected kind:parameters (explicit, interval, geo, subgroup, random, cosets)");
    };
    let (kind, body) = (&text[..colon], &text[colon + 1..]);
    let off = colon + 1;
    match kind {
        "explicit" => {
            let mut residues = Vec::new();
            let mut pos = off;
            for item in body.split(',') {
                residues.push(number(item, pos)?);
                pos += item.len() + 1;
            }
            Ok(FamilySpec::Explicit { residues })
        }
        "interval" => {
            let p = Params::parse(body, off, &["start", "len"])?;
            Ok(FamilySpec::Interval { start: p.get("start")?, len: p.get("len")? })
        }
        "geo" => {
            let p = Params::parse(body, off, &["g", "len", "start"])?;
            Ok(FamilySpec::Geometric {
                generator: p.get("g")?,
                len: p.get("len")?,
                start: p.get_or("start", 1)?,
            })
        }
        "subgroup" => {
            let p = Params::parse(body, off, &["g"])?;
            Ok(FamilySpec::Subgroup { generator: p.get("g")? })
        }
        "random" => {
            let p = Params::parse(body, off, &["size", "seed"])?;
            Ok(FamilySpec::Random { size: p.get("size")?, seed: p.get("seed")? })
        }
        "cosets" => {
            let p = Params::parse(body, off, &["g", "pieces"])?;
            let (raw, pos) = p.raw("pieces").ok_or(SpecError {
                pos: p.end,
                message: "missing key \"pieces\"".into(),
            })?;
            let mut pieces = Vec::new();
            let mut at = pos;
            for item in raw.split('+') {
                pieces.push(number(item, at)? as usize);
                at += item.len() + 1;
            }
            Ok(FamilySpec::CosetUnion { generator: p.get("g")?, pieces })
        }
        other => err(0, format!("unknown set kind {other:?}")),
    }
}
