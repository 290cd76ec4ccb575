//! The `.poset` text format.
//!
//! ```text
//! # comment
//! 4
//! 0 2
//! 1 2
//! 1 3
//! ```
//!
//! The first non-comment line is the element count `n`. Each following line
//! `u v` states `u > v` with 0-based indices. `#` starts a comment anywhere on
//! a line. Loading closes the relation and rejects cycles.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::poset::Poset;

pub fn parse_poset(text: &str) -> Result<Poset> {
    let mut n: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("expected a non-negative integer, found `{s}`"),
            })
        };
        match n {
            None => {
                if fields.len() != 1 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "first line must hold the element count".into(),
                    });
                }
                n = Some(parse(fields[0])?);
            }
            Some(size) => {
                if fields.len() != 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected `u v`, found {} fields", fields.len()),
                    });
                }
                let (u, v) = (parse(fields[0])?, parse(fields[1])?);
                for index in [u, v] {
                    if index >= size {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("index {index} out of range for {size} elements"),
                        });
                    }
                }
                pairs.push((u, v));
            }
        }
    }
    let n = n.ok_or(Error::Parse {
        line: last_line.max(1),
        msg: "missing element count".into(),
    })?;
    Poset::from_relations(n, &pairs)
}

/// Writes the alive part of `p` (renumbered) as its cover edges, with
/// optional leading comment lines.
pub fn write_poset(p: &Poset, comments: &[String]) -> String {
    let (q, _) = p.compact();
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{}", q.universe());
    let mut edges = q.transitive_reduction().edges;
    edges.sort_unstable();
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn load_poset(path: &Path) -> Result<Poset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_poset(&text)
}

pub fn save_poset(path: &Path, p: &Poset, comments: &[String]) -> Result<()> {
    fs::write(path, write_poset(p, comments)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_comments() {
        let p = parse_poset("# fig\n4\n0 2 # a > c\n\n1 2\n1 3\n").unwrap();
        assert_eq!(p.universe(), 4);
        assert_eq!(p.relations().len(), 3);
    }

    #[test]
    fn reports_line_numbers() {
        match parse_poset("3\n0 1\n1 x\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_poset("3\n0 1 2\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_poset("2\n0 5\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_poset("# nothing\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_poset("2\n0 1\n1 0\n"), Err(Error::Cycle(_))));
    }

    #[test]
    fn empty_relation_file() {
        let text = write_poset(&Poset::antichain(10), &[]);
        assert_eq!(text, "10\n");
    }

    proptest! {
        #[test]
        fn write_then_parse_preserves_closure(n in 1usize..30, prob in 0.0f64..=1.0, seed in any::<u64>()) {
            let p = Poset::random(n, prob, seed);
            let q = parse_poset(&write_poset(&p, &["generated".into()])).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
