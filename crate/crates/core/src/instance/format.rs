//! Line-oriented text format.
//!
//! ```text
//! EDD 1
//! A 9 12 15 17 37
//! B 6 38 46
//! AB 1 3 6
//! ...
//! BA 3 17 29
//! ```
//!
//! `#` starts a comment; blank lines are ignored; tokens are separated by
//! spaces or tabs. Section indices are 1-based and each appears exactly once.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{EddInstance, ShapeError, MAX_LENGTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// 1-based; 0 when the problem is the document as a whole.
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            0 => write!(f, "{}", self.kind),
            n => write!(f, "line {n}: {}", self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `EDD 1` header")]
    MissingHeader,
    #[error("unsupported format version `{0}`")]
    UnsupportedVersion(String),
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("`{0}` is not a decimal integer")]
    InvalidNumber(String),
    #[error("length `{0}` is not positive")]
    NonPositive(String),
    #[error("`{0}` exceeds 2^63-1")]
    Overflow(String),
    #[error("second `{0}` line")]
    DuplicateLine(&'static str),
    #[error("`{0}` line has no values")]
    EmptyLine(&'static str),
    #[error("`{0}` line has no index")]
    MissingIndex(&'static str),
    #[error("{keyword} {index} appears more than once")]
    DuplicateIndex { keyword: &'static str, index: usize },
    #[error("{keyword} {index} is out of range 1..={max}")]
    IndexOutOfRange {
        keyword: &'static str,
        index: usize,
        max: usize,
    },
    #[error("no `{0}` line")]
    MissingSection(&'static str),
    #[error("{keyword} {index} is missing")]
    MissingSet { keyword: &'static str, index: usize },
    #[error(transparent)]
    Shape(ShapeError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn parse_length(line: usize, token: &str) -> Result<u64, ParseError> {
    let digits = token.strip_prefix('+').unwrap_or(token);
    if let Some(rest) = digits.strip_prefix('-') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err(line, ParseErrorKind::NonPositive(token.to_string())));
        }
    }
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(line, ParseErrorKind::InvalidNumber(token.to_string())));
    }
    match digits.parse::<u64>() {
        Ok(0) => Err(err(line, ParseErrorKind::NonPositive(token.to_string()))),
        Ok(v) if v <= MAX_LENGTH => Ok(v),
        _ => Err(err(line, ParseErrorKind::Overflow(token.to_string()))),
    }
}

fn parse_index(line: usize, token: &str) -> Result<usize, ParseError> {
    match token.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i),
        _ => Err(err(line, ParseErrorKind::InvalidNumber(token.to_string()))),
    }
}

struct Section {
    line: usize,
    index: usize,
    values: Vec<u64>,
}

/// Parses an EDD document. Only syntax is checked; see
/// [`validate_consistency`](super::validate_consistency) for the arithmetic.
pub fn parse_instance(text: &str) -> Result<EddInstance, ParseError> {
    let mut header_seen = false;
    let mut a: Option<(usize, Vec<u64>)> = None;
    let mut b: Option<(usize, Vec<u64>)> = None;
    let mut ab: Vec<Section> = Vec::new();
    let mut ba: Vec<Section> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split([' ', '\t']).filter(|t| !t.is_empty());
        let Some(keyword) = tokens.next() else {
            continue;
        };
        if !header_seen {
            if keyword != "EDD" {
                return Err(err(line, ParseErrorKind::MissingHeader));
            }
            let version: Vec<&str> = tokens.collect();
            if version != ["1"] {
                return Err(err(
                    line,
                    ParseErrorKind::UnsupportedVersion(version.join(" ")),
                ));
            }
            header_seen = true;
            continue;
        }
        match keyword {
            "A" | "B" => {
                let name = if keyword == "A" { "A" } else { "B" };
                let slot = if keyword == "A" { &mut a } else { &mut b };
                if slot.is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateLine(name)));
                }
                let values = tokens
                    .map(|t| parse_length(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.is_empty() {
                    return Err(err(line, ParseErrorKind::EmptyLine(name)));
                }
                *slot = Some((line, values));
            }
            "AB" | "BA" => {
                let name = if keyword == "AB" { "AB" } else { "BA" };
                let index = match tokens.next() {
                    Some(t) => parse_index(line, t)?,
                    None => return Err(err(line, ParseErrorKind::MissingIndex(name))),
                };
                let values = tokens
                    .map(|t| parse_length(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.is_empty() {
                    return Err(err(line, ParseErrorKind::EmptyLine(name)));
                }
                let list = if keyword == "AB" { &mut ab } else { &mut ba };
                list.push(Section {
                    line,
                    index,
                    values,
                });
            }
            other => return Err(err(line, ParseErrorKind::UnknownKeyword(other.to_string()))),
        }
    }

    if !header_seen {
        return Err(err(0, ParseErrorKind::MissingHeader));
    }
    let (_, a_lengths) = a.ok_or(err(0, ParseErrorKind::MissingSection("A")))?;
    let (_, b_lengths) = b.ok_or(err(0, ParseErrorKind::MissingSection("B")))?;
    let ab_sets = collect_sets("AB", ab, a_lengths.len())?;
    let ba_sets = collect_sets("BA", ba, b_lengths.len())?;

    EddInstance::new(a_lengths, b_lengths, ab_sets, ba_sets)
        .map_err(|e| err(0, ParseErrorKind::Shape(e)))
}

fn collect_sets(
    keyword: &'static str,
    sections: Vec<Section>,
    count: usize,
) -> Result<Vec<Vec<u64>>, ParseError> {
    let mut sets: Vec<Option<Vec<u64>>> = vec![None; count];
    for s in sections {
        if s.index > count {
            return Err(err(
                s.line,
                ParseErrorKind::IndexOutOfRange {
                    keyword,
                    index: s.index,
                    max: count,
                },
            ));
        }
        let slot = &mut sets[s.index - 1];
        if slot.is_some() {
            return Err(err(
                s.line,
                ParseErrorKind::DuplicateIndex {
                    keyword,
                    index: s.index,
                },
            ));
        }
        *slot = Some(s.values);
    }
    sets.into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or(err(
                0,
                ParseErrorKind::MissingSet {
                    keyword,
                    index: i + 1,
                },
            ))
        })
        .collect()
}

/// Canonical text form: fragment lines in index order, multiset elements
/// ascending.
pub fn serialize_instance(inst: &EddInstance) -> String {
    let mut out = String::from("EDD 1\n");
    write_values(&mut out, "A", &inst.a_lengths);
    write_values(&mut out, "B", &inst.b_lengths);
    for (prefix, sets) in [("AB", &inst.ab_sets), ("BA", &inst.ba_sets)] {
        for (i, set) in sets.iter().enumerate() {
            let mut sorted = set.clone();
            sorted.sort_unstable();
            write_values(&mut out, &format!("{prefix} {}", i + 1), &sorted);
        }
    }
    out
}

fn write_values(out: &mut String, prefix: &str, values: &[u64]) {
    out.push_str(prefix);
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{sample90, single};

    const SAMPLE90: &str = "\
# five A fragments, three B fragments
EDD 1
A 9 12 15 17 37
B 6 38 46
AB 1 3 6
AB 2 12
AB 3 15
AB 4 17
AB 5 8 29   # two pieces
BA 1 6
BA 2 3 8 12 15
BA 3\t17 29
";

    #[test]
    fn parses_sample90() {
        assert_eq!(parse_instance(SAMPLE90).unwrap(), sample90());
    }

    #[test]
    fn single_fragment() {
        let inst = parse_instance("EDD 1\nA 5\nB 5\nAB 1 5\nBA 1 5\n").unwrap();
        assert_eq!(inst, single());
        assert_eq!(serialize_instance(&inst).lines().count(), 5);
    }

    #[test]
    fn serialize_round_trips_sample90() {
        let text = serialize_instance(&sample90());
        assert!(text.starts_with("EDD 1\nA 9 12 15 17 37\nB 6 38 46\nAB 1 3 6\n"));
        assert_eq!(parse_instance(&text).unwrap(), sample90());
    }

    #[test]
    fn index_out_of_range() {
        let text = "EDD 1\nA 2 3\nB 5\nAB 1 2\nAB 3 3\nBA 1 2 3\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!(e.line, 5);
        assert_eq!(
            e.kind,
            ParseErrorKind::IndexOutOfRange {
                keyword: "AB",
                index: 3,
                max: 2
            }
        );
    }

    #[test]
    fn duplicate_index() {
        let text = "EDD 1\nA 5\nB 5\nAB 1 5\nAB 1 5\nBA 1 5\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!(e.line, 5);
        assert!(matches!(e.kind, ParseErrorKind::DuplicateIndex { .. }));
    }

    #[test]
    fn rejects_bad_lengths() {
        let zero = parse_instance("EDD 1\nA 0\nB 5\nAB 1 5\nBA 1 5\n").unwrap_err();
        assert_eq!(zero.kind, ParseErrorKind::NonPositive("0".into()));
        let neg = parse_instance("EDD 1\nA -4\nB 5\nAB 1 5\nBA 1 5\n").unwrap_err();
        assert_eq!(neg.kind, ParseErrorKind::NonPositive("-4".into()));
        let big =
            parse_instance("EDD 1\nA 9223372036854775808\nB 5\nAB 1 5\nBA 1 5\n").unwrap_err();
        assert!(matches!(big.kind, ParseErrorKind::Overflow(_)));
        let max = parse_instance(
            "EDD 1\nA 9223372036854775807\nB 9223372036854775807\n\
             AB 1 9223372036854775807\nBA 1 9223372036854775807\n",
        );
        assert!(max.is_ok());
        let junk = parse_instance("EDD 1\nA 5x\nB 5\nAB 1 5\nBA 1 5\n").unwrap_err();
        assert_eq!(junk.line, 2);
        assert!(matches!(junk.kind, ParseErrorKind::InvalidNumber(_)));
    }

    #[test]
    fn header_and_sections() {
        assert_eq!(
            parse_instance("A 5\n").unwrap_err().kind,
            ParseErrorKind::MissingHeader
        );
        assert_eq!(
            parse_instance("# nothing\n\n").unwrap_err().kind,
            ParseErrorKind::MissingHeader
        );
        assert!(matches!(
            parse_instance("EDD 2\n").unwrap_err().kind,
            ParseErrorKind::UnsupportedVersion(_)
        ));
        assert_eq!(
            parse_instance("EDD 1\nA 5\nAB 1 5\n").unwrap_err().kind,
            ParseErrorKind::MissingSection("B")
        );
        assert_eq!(
            parse_instance("EDD 1\nA 5\nB 5\nBA 1 5\n")
                .unwrap_err()
                .kind,
            ParseErrorKind::MissingSet {
                keyword: "AB",
                index: 1
            }
        );
        assert_eq!(
            parse_instance("EDD 1\nA 5\nA 5\n").unwrap_err().kind,
            ParseErrorKind::DuplicateLine("A")
        );
        assert!(matches!(
            parse_instance("EDD 1\nC 5\n").unwrap_err().kind,
            ParseErrorKind::UnknownKeyword(_)
        ));
    }
}
