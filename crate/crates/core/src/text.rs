//! Line-oriented text formats.
//!
//! Examples: one fact `R(v1,...,vk)` per line, an optional `#domain v ...`
//! line listing isolated values and a final `#answer v1 ... vk` line
//! (omitted for Boolean examples). Queries: `q(x1,...,xk) :- R(y,z), A(y)`,
//! optionally followed by `#exists z ...` for variables that occur in no
//! atom. Collections: a sequence of examples, each introduced by a
//! `#positive` or `#negative` line.
//!
//! Values match `[A-Za-z0-9_<>,]+` with balanced angle brackets and commas
//! only inside brackets, so pairs `<u,v>` render unambiguously.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Cq, Example, Fact, Instance, LabeledCollection, Rel, Schema, Value};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor {
            src,
            pos: 0,
            line,
            line_start: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.pos - self.line_start + 1, msg)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
            if c == '\n' {
                self.line += 1;
                self.line_start = self.pos;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err("expected a name"));
        }
        Ok(&self.src[start..self.pos])
    }

    /// A value; stops at a top-level `,`, `)` or whitespace.
    fn value(&mut self) -> Result<Value> {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(c) = self.peek() {
            match c {
                '<' => depth += 1,
                '>' => {
                    depth = depth
                        .checked_sub(1)
                        .ok_or_else(|| self.err("unbalanced `>` in value"))?
                }
                ',' if depth == 0 => break,
                ',' => {}
                c if c.is_ascii_alphanumeric() || c == '_' => {}
                _ => break,
            }
            self.pos += 1;
        }
        if depth != 0 {
            return Err(self.err("unbalanced `<` in value"));
        }
        if start == self.pos {
            return Err(self.err("expected a value"));
        }
        Ok(Value::new(&self.src[start..self.pos]))
    }

    /// `R(v1,...,vk)` with `k >= 1`.
    fn atom(&mut self) -> Result<Fact> {
        let rel = self.ident()?;
        self.expect("(")?;
        let mut args = vec![self.value()?];
        while self.eat(",") {
            args.push(self.value()?);
        }
        self.expect(")")?;
        Ok(Fact::new(Rel::new(rel), args))
    }

    fn values_to_end(&mut self) -> Result<Vec<Value>> {
        let mut out = Vec::new();
        while !self.at_end() {
            out.push(self.value()?);
        }
        Ok(out)
    }
}

fn check_value(v: &Value, line: usize) -> Result<()> {
    let mut c = Cursor::new(v.as_str(), line);
    let parsed = c.value()?;
    if parsed != *v || !c.at_end() {
        return Err(Error::parse(line, 1, format!("malformed value `{v}`")));
    }
    Ok(())
}

/// Parses an example; `first_line` is the line number of `src`'s first line.
fn parse_example_at(src: &str, first_line: usize) -> Result<Example> {
    let mut schema = Schema::new();
    let mut inst = Instance::default();
    let mut answers = None;
    for (i, raw) in src.lines().enumerate() {
        let line_no = first_line + i;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if answers.is_some() {
            return Err(Error::parse(line_no, 1, "content after `#answer` line"));
        }
        let mut c = Cursor::new(line, line_no);
        if c.eat("#answer") {
            answers = Some(c.values_to_end()?);
        } else if c.eat("#domain") {
            for v in c.values_to_end()? {
                inst.add_value(v);
            }
        } else {
            let fact = c.atom()?;
            if !c.at_end() {
                return Err(c.err("trailing input after fact"));
            }
            schema
                .declare(fact.relation.clone(), fact.args.len())
                .map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
            inst.insert(fact);
        }
    }
    Ok(Example::new(inst, answers.unwrap_or_default()))
}

pub fn parse_example(src: &str) -> Result<Example> {
    parse_example_at(src, 1)
}

/// Canonical rendering: facts in sorted order, then isolated values, then
/// the answer tuple.
pub fn format_example(e: &Example) -> String {
    let mut out = String::new();
    for f in e.facts() {
        writeln!(out, "{f}").unwrap();
    }
    let isolated = e.isolated_values();
    if !isolated.is_empty() {
        out.push_str("#domain");
        for v in &isolated {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    if !e.answers().is_empty() {
        out.push_str("#answer");
        for v in e.answers() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_cq(src: &str) -> Result<Cq> {
    let mut c = Cursor::new(src, 1);
    c.ident()?;
    c.expect("(")?;
    let mut head = Vec::new();
    if !c.eat(")") {
        head.push(c.value()?);
        while c.eat(",") {
            head.push(c.value()?);
        }
        c.expect(")")?;
    }
    c.expect(":-")?;
    let mut atoms = Vec::new();
    let mut schema = Schema::new();
    let mut extra = Vec::new();
    loop {
        if c.at_end() {
            break;
        }
        if c.eat("#exists") {
            extra = c.values_to_end()?;
            break;
        }
        if !atoms.is_empty() {
            c.expect(",")?;
        }
        let line = c.line;
        let atom = c.atom()?;
        schema
            .declare(atom.relation.clone(), atom.args.len())
            .map_err(|e| Error::parse(line, 1, e.to_string()))?;
        atoms.push(atom);
    }
    let mut q = Cq::new(head, atoms);
    q.extra_vars.extend(extra);
    Ok(q)
}

pub fn format_cq(q: &Cq) -> String {
    let head: Vec<&str> = q.head.iter().map(Value::as_str).collect();
    let mut out = format!("q({}) :-", head.join(","));
    for (i, a) in q.atoms.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        write!(out, "{a}").unwrap();
    }
    if !q.extra_vars.is_empty() {
        out.push_str(" #exists");
        for v in &q.extra_vars {
            write!(out, " {v}").unwrap();
        }
    }
    out
}

pub fn parse_collection(src: &str) -> Result<LabeledCollection> {
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    // (is_positive, first line, body)
    let mut current: Option<(bool, usize, String)> = None;
    let mut flush = |cur: Option<(bool, usize, String)>| -> Result<()> {
        if let Some((pos, first, body)) = cur {
            let e = parse_example_at(&body, first)?;
            if pos {
                positives.push(e);
            } else {
                negatives.push(e);
            }
        }
        Ok(())
    };
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        match raw.trim() {
            "#positive" => flush(current.replace((true, line_no + 1, String::new())))?,
            "#negative" => flush(current.replace((false, line_no + 1, String::new())))?,
            "" if current.is_none() => {}
            line => match current.as_mut() {
                Some((_, _, body)) => {
                    body.push_str(raw);
                    body.push('\n');
                }
                None => {
                    return Err(Error::parse(
                        line_no,
                        1,
                        format!("expected `#positive` or `#negative`, found `{line}`"),
                    ))
                }
            },
        }
    }
    flush(current)?;
    LabeledCollection::new(positives, negatives)
}

pub fn format_collection(c: &LabeledCollection) -> String {
    let mut out = String::new();
    for e in &c.positives {
        out.push_str("#positive\n");
        out.push_str(&format_example(e));
    }
    for e in &c.negatives {
        out.push_str("#negative\n");
        out.push_str(&format_example(e));
    }
    out
}

/// Validates that every value of an example is in the text value syntax.
pub fn check_values(e: &Example) -> Result<()> {
    e.domain().iter().try_for_each(|v| check_value(v, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Value;

    #[test]
    fn parse_simple_example() {
        let e = parse_example("R(a,b)\nA(b)\n#answer a").unwrap();
        assert_eq!(e.facts().len(), 2);
        assert_eq!(e.answers(), &[Value::new("a")]);
        assert_eq!(format_example(&e), "A(b)\nR(a,b)\n#answer a\n");
    }

    #[test]
    fn parse_cq_text() {
        let q = parse_cq("q(x0) :- R(x0,x1), A(x1)").unwrap();
        assert_eq!(q.head, vec![Value::new("x0")]);
        assert_eq!(q.size(), 2);
        assert_eq!(format_cq(&q), "q(x0) :- R(x0,x1), A(x1)");
        let spaced = parse_cq(" q ( x0 ) :-\n R ( x0 , x1 ) ,A(x1) ").unwrap();
        assert_eq!(spaced, q);
    }

    #[test]
    fn empty_body_and_boolean_queries() {
        let q = parse_cq("q(x) :-").unwrap();
        assert_eq!(q.size(), 0);
        assert_eq!(format_cq(&q), "q(x) :-");
        let b = parse_cq("q() :- R(x,y)").unwrap();
        assert_eq!(b.arity(), 0);
        assert_eq!(parse_cq(&format_cq(&b)).unwrap(), b);
    }

    #[test]
    fn malformed_arity_names_line() {
        let err = parse_example("R(a,b)\nR(a)\n#answer a").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_example("R(a,b\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, 6);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(parse_example("R(a<b,c)\n").is_err());
        assert!(parse_cq("q(x) : A(x)").is_err());
    }

    #[test]
    fn pair_values_parse() {
        let e = parse_example("R(<a,b>,<x0,R<y0,y1>>)\n#answer <a,b>").unwrap();
        let f = e.facts().iter().next().unwrap();
        assert_eq!(f.args[1].as_str(), "<x0,R<y0,y1>>");
        assert_eq!(parse_example(&format_example(&e)).unwrap(), e);
    }

    #[test]
    fn domain_line_and_boolean_example() {
        let e = parse_example("R(a,b)\n#domain z\n").unwrap();
        assert_eq!(e.arity(), 0);
        assert!(e.domain().contains(&Value::new("z")));
        assert_eq!(format_example(&e), "R(a,b)\n#domain z\n");
    }

    #[test]
    fn collection_roundtrip() {
        let src = "#positive\nR(a,b)\n#answer a\n#negative\nA(c)\n#answer c\n";
        let c = parse_collection(src).unwrap();
        assert_eq!(c.positives.len(), 1);
        assert_eq!(c.negatives.len(), 1);
        assert_eq!(format_collection(&c), src);
        let err = parse_collection("#positive\nR(a,b\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }
}
