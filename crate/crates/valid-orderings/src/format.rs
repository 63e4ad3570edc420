//! Text formats for groups, subsets and orderings.
//!
//! A group file starts with `group <kind> <param>`; a table group is followed by
//! `N` lines of `N` whitespace-separated 0-based indices. A subset is a `subset`
//! line followed by element tokens. Elements of `f2n` are binary strings with the
//! most significant bit first; everything else is decimal.

use crate::error::{Error, Result};
use crate::group::{named, Group, GroupKind};
use crate::subset::Subset;

pub fn parse_group(text: &str) -> Result<Group> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Input("empty group file".into()))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    if words.first() != Some(&"group") || words.len() != 3 {
        return Err(Error::Input(format!("bad group header `{header}`")));
    }
    let param: usize = words[2].parse().map_err(|_| Error::Input(format!("bad group parameter `{}`", words[2])))?;
    match words[1] {
        "f2n" => Group::boolean_cube(param),
        "cyclic" => Group::cyclic(param),
        "table" => {
            let mut rows = Vec::with_capacity(param);
            for _ in 0..param {
                let line = lines.next().ok_or_else(|| Error::Input("table ends early".into()))?;
                let row = line
                    .split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| Error::Input(format!("bad table entry `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            if lines.next().is_some() {
                return Err(Error::Input("trailing lines after table".into()));
            }
            Group::from_table(&rows)
        }
        other => Err(Error::Input(format!("unknown group kind `{other}`"))),
    }
}

pub fn format_group(g: &Group) -> String {
    match g.kind() {
        GroupKind::BooleanCube { n } => format!("group f2n {n}\n"),
        GroupKind::Cyclic { m } => format!("group cyclic {m}\n"),
        GroupKind::Table { .. } => {
            let mut out = format!("group table {}\n", g.order());
            for row in g.table_rows() {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
            out
        }
    }
}

/// Named small groups: `s3`..`s5`, `d<m>`, `q8`, and `z<a>x<b>x...` products as tables.
pub fn named_group(name: &str) -> Result<Group> {
    let lower = name.to_ascii_lowercase();
    if lower == "q8" {
        return named::quaternion();
    }
    if let Some(k) = lower.strip_prefix('s').and_then(|r| r.parse::<usize>().ok()) {
        return named::symmetric(k);
    }
    if let Some(m) = lower.strip_prefix('d').and_then(|r| r.parse::<usize>().ok()) {
        return named::dihedral(m);
    }
    if lower.starts_with('z') {
        let orders = lower
            .split('x')
            .map(|p| p.strip_prefix('z').and_then(|r| r.parse::<usize>().ok()))
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| Error::Input(format!("bad group name `{name}`")))?;
        return named::abelian(&orders);
    }
    Err(Error::Input(format!("unknown group name `{name}`")))
}

pub fn parse_element(g: &Group, token: &str) -> Result<usize> {
    let x = match g.cube_dim() {
        Some(n) => {
            if token.len() != n || !token.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::Input(format!("`{token}` is not a {n}-bit binary string")));
            }
            if n == 0 {
                0
            } else {
                usize::from_str_radix(token, 2).expect("checked binary")
            }
        }
        None => token.parse::<usize>().map_err(|_| Error::Input(format!("`{token}` is not an element index")))?,
    };
    g.check_element(x)?;
    Ok(x)
}

pub fn format_element(g: &Group, x: usize) -> String {
    match g.cube_dim() {
        Some(0) => String::new(),
        Some(n) => format!("{x:0n$b}"),
        None => x.to_string(),
    }
}

pub fn parse_elements<'a, I: IntoIterator<Item = &'a str>>(g: &Group, tokens: I) -> Result<Vec<usize>> {
    tokens.into_iter().map(|t| parse_element(g, t)).collect()
}

pub fn format_elements(g: &Group, xs: &[usize]) -> String {
    xs.iter().map(|&x| format_element(g, x)).collect::<Vec<_>>().join(" ")
}

/// Parses a subset: an optional `subset` keyword followed by element tokens.
pub fn parse_subset(g: &Group, text: &str) -> Result<Subset> {
    let mut tokens = text.split_whitespace().peekable();
    if tokens.peek() == Some(&"subset") {
        tokens.next();
    }
    let elems = parse_elements(g, tokens)?;
    let s = g.subset_of(elems.iter().copied())?;
    if s.len() != elems.len() {
        return Err(Error::Input("subset lists an element twice".into()));
    }
    Ok(s)
}

pub fn format_subset(g: &Group, s: &Subset) -> String {
    format!("subset {}\n", format_elements(g, &s.to_vec()))
}
