//! The `@proof` method language: `induct <var>`, `induct rule: <name>`,
//! `simp`, `auto`, `clarsimp`, optionally parenthesized and comma-separated.

use std::fmt;

use thiserror::Error;

use crate::ir::Name;
use crate::surface::resolve::VarLookup;
use crate::surface::NameTable;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HintStep {
    Induct(Name),
    InductRule(String),
    Simp,
    Auto,
    Clarsimp,
}

impl fmt::Display for HintStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HintStep::Induct(v) => write!(f, "induct {v}"),
            HintStep::InductRule(r) => write!(f, "induct rule: {r}"),
            HintStep::Simp => write!(f, "simp"),
            HintStep::Auto => write!(f, "auto"),
            HintStep::Clarsimp => write!(f, "clarsimp"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofHint {
    pub steps: Vec<HintStep>,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("proof hint, offset {offset}: {message}")]
pub struct HintError {
    /// Byte offset inside the annotation text.
    pub offset: usize,
    pub message: String,
}

struct P<'a> {
    s: &'a str,
    pos: usize,
    fun: &'a Name,
    table: &'a NameTable,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, HintError> {
    Err(HintError {
        offset,
        message: message.into(),
    })
}

impl P<'_> {
    fn ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, t: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(t) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Option<(usize, &str)> {
        self.ws();
        let start = self.pos;
        let rest = &self.s[start..];
        let n = rest
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '.' || *c == '\''))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if n == 0 {
            return None;
        }
        self.pos += n;
        Some((start, &self.s[start..start + n]))
    }

    fn var(&mut self, at: usize, text: &str) -> Result<Name, HintError> {
        match self.table.lookup_var(self.fun, text) {
            VarLookup::Found(n) => Ok(n),
            VarLookup::Unresolved => err(at, format!("unresolved variable reference `{text}`")),
            VarLookup::Ambiguous(ns) => err(
                at,
                format!("ambiguous variable reference `{text}` ({} binders)", ns.len()),
            ),
        }
    }

    fn induct_target(&mut self) -> Result<HintStep, HintError> {
        self.ws();
        let at = self.pos;
        if self.eat("\"") {
            self.ws();
            let inner = self.pos;
            if !self.eat("<var") {
                return err(inner, "expected `<var name>` inside quotes");
            }
            let Some((wat, w)) = self.word() else {
                return err(self.pos, "expected a variable name");
            };
            let w = w.to_string();
            if !self.eat(">") {
                return err(self.pos, "expected `>`");
            }
            if !self.eat("\"") {
                return err(self.pos, "expected closing quote");
            }
            return self.var(wat, &w).map(HintStep::Induct);
        }
        let Some((wat, w)) = self.word() else {
            return err(at, "expected `rule:` or a variable after `induct`");
        };
        if w == "rule" {
            if !self.eat(":") {
                return err(self.pos, "expected `:` after `rule`");
            }
            return match self.word() {
                Some((_, r)) => Ok(HintStep::InductRule(r.to_string())),
                None => err(self.pos, "expected a rule name"),
            };
        }
        let w = w.to_string();
        self.var(wat, &w).map(HintStep::Induct)
    }

    fn step(&mut self) -> Result<HintStep, HintError> {
        self.ws();
        let at = self.pos;
        match self.word() {
            Some((_, "induct")) => self.induct_target(),
            Some((_, "simp")) => Ok(HintStep::Simp),
            Some((_, "auto")) => Ok(HintStep::Auto),
            Some((_, "clarsimp")) => Ok(HintStep::Clarsimp),
            Some((_, w)) => err(at, format!("unknown method `{w}`; expected induct, simp, auto or clarsimp")),
            None => err(at, "expected a proof method"),
        }
    }
}

/// Parses an annotation payload, resolving `<var x>` in the scope of `fun`.
pub fn parse_hint(raw: &str, fun: &Name, table: &NameTable) -> Result<ProofHint, HintError> {
    let mut p = P {
        s: raw,
        pos: 0,
        fun,
        table,
    };
    let mut steps = Vec::new();
    if p.eat("(") {
        loop {
            steps.push(p.step()?);
            if p.eat(",") {
                continue;
            }
            if p.eat(")") {
                break;
            }
            return err(p.pos, "expected `,` or `)`");
        }
    } else {
        steps.push(p.step()?);
    }
    p.ws();
    if p.pos != raw.len() {
        return err(p.pos, "trailing text after proof method");
    }
    Ok(ProofHint {
        steps,
        raw: raw.to_string(),
    })
}
