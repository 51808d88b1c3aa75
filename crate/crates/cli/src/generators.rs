//! Parsing of subgroup generator specifications.
//!
//! A specification lists generators separated by `;`. Each generator is a
//! product, written with `.` or `*`, of factors:
//!
//! * `s3`: the third simple reflection (1-based);
//! * `r(0,1,-1,0)`: the reflection in a root;
//! * `m(a,b,...)`: an integral isometry given by its matrix, row-major;
//! * `1`: the identity.
//!
//! The empty specification and `1` give the trivial group.

use dpbrauer::lattice::{DivisorClass, PicardLattice};
use dpbrauer::weyl::{reflection, IntegralIsometry};
use dpbrauer::{Error, Result};

fn parse_ints(body: &str) -> Result<Vec<i64>> {
    body.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("invalid integer '{}'", t.trim())))
        })
        .collect()
}

fn parse_factor(lattice: &PicardLattice, token: &str) -> Result<IntegralIsometry> {
    let r = lattice.rank();
    let t = token.trim();
    if t == "1" {
        return Ok(IntegralIsometry::identity(r));
    }
    if let Some(idx) = t.strip_prefix('s') {
        let simple = lattice.simple_reflections();
        let i: usize = idx
            .parse()
            .map_err(|_| Error::Parse(format!("invalid simple reflection '{t}'")))?;
        return simple
            .get(i.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| Error::Parse(format!("'{t}': there are {} simple reflections", simple.len())));
    }
    let bracketed = |prefix: &str| {
        t.strip_prefix(prefix)
            .and_then(|s| s.strip_prefix('('))
            .and_then(|s| s.strip_suffix(')'))
    };
    if let Some(body) = bracketed("r") {
        return reflection(lattice, &DivisorClass(parse_ints(body)?));
    }
    if let Some(body) = bracketed("m") {
        return IntegralIsometry::new(lattice, parse_ints(body)?);
    }
    Err(Error::Parse(format!("unrecognized generator factor '{t}'")))
}

pub fn parse_generators(lattice: &PicardLattice, spec: &str) -> Result<Vec<IntegralIsometry>> {
    let spec = spec.trim();
    if spec.is_empty() || spec == "1" {
        return Ok(Vec::new());
    }
    spec.split(';')
        .map(|word| {
            let mut factors = split_factors(word)?.into_iter();
            let first = parse_factor(lattice, factors.next().unwrap_or("1"))?;
            factors.try_fold(first, |acc, f| Ok(acc.compose(&parse_factor(lattice, f)?)))
        })
        .collect()
}

/// Splits on `.` and `*` outside parentheses.
fn split_factors(word: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in word.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '.' | '*' if depth == 0 => {
                out.push(&word[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in '{word}'")));
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in '{word}'")));
    }
    out.push(&word[start..]);
    if out.iter().any(|f| f.trim().is_empty()) {
        return Err(Error::Parse(format!("empty factor in '{word}'")));
    }
    Ok(out)
}
