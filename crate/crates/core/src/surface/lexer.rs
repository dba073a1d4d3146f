use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use super::{SourceSpan, SurfaceError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Str(String),
    // keywords
    Sealed,
    Abstract,
    Class,
    Case,
    Object,
    Extends,
    Def,
    Val,
    If,
    Else,
    Match,
    True,
    False,
    Require,
    Ensuring,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Dot,
    Assign,
    Arrow,
    Plus,
    Minus,
    Star,
    EqEq,
    NotEq,
    Le,
    Lt,
    Ge,
    Gt,
    AndAnd,
    OrOr,
    Bang,
    At,
    Underscore,
    Implies,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Str(_) => "string literal",
            Tok::Sealed => "`sealed`",
            Tok::Abstract => "`abstract`",
            Tok::Class => "`class`",
            Tok::Case => "`case`",
            Tok::Object => "`object`",
            Tok::Extends => "`extends`",
            Tok::Def => "`def`",
            Tok::Val => "`val`",
            Tok::If => "`if`",
            Tok::Else => "`else`",
            Tok::Match => "`match`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Require => "`require`",
            Tok::Ensuring => "`ensuring`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Semi => "`;`",
            Tok::Dot => "`.`",
            Tok::Assign => "`=`",
            Tok::Arrow => "`=>`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Le => "`<=`",
            Tok::Lt => "`<`",
            Tok::Ge => "`>=`",
            Tok::Gt => "`>`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::At => "`@`",
            Tok::Underscore => "`_`",
            Tok::Implies => "`==>`",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "sealed" => Tok::Sealed,
        "abstract" => Tok::Abstract,
        "class" => Tok::Class,
        "case" => Tok::Case,
        "object" => Tok::Object,
        "extends" => Tok::Extends,
        "def" => Tok::Def,
        "val" => Tok::Val,
        "if" => Tok::If,
        "else" => Tok::Else,
        "match" => Tok::Match,
        "true" => Tok::True,
        "false" => Tok::False,
        "require" => Tok::Require,
        "ensuring" => Tok::Ensuring,
        "_" => Tok::Underscore,
        _ => return None,
    })
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: &'a Arc<str>,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn span(&self, line: u32, col: u32, len: usize) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            line,
            column: col,
            length: len.max(1) as u32,
        }
    }
}

/// Splits `source` into tokens. Comments (`//` and `/* */`) and whitespace
/// are skipped.
pub fn tokenize(file: &Arc<str>, source: &str) -> Result<Vec<Token>, SurfaceError> {
    let mut cur = Cursor {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, col, start) = (cur.line, cur.col, cur.pos);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if cur.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(SurfaceError::Lex {
                        span: cur.span(line, col, 2),
                        message: "unterminated block comment".into(),
                    });
                }
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            keyword(&s).unwrap_or(Tok::Ident(s))
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            // Scala-style `L` suffix is tolerated
            if cur.peek() == Some('L') {
                cur.bump();
            }
            Tok::Int(s.parse().expect("digits"))
        } else if c == '"' {
            Tok::Str(lex_string(&mut cur, line, col)?)
        } else {
            let two = [Some(c), cur.peek_at(1)];
            let three = cur.peek_at(2);
            let (tok, n) = match (two, three) {
                ([Some('='), Some('=')], Some('>')) => (Tok::Implies, 3),
                ([Some('='), Some('=')], _) => (Tok::EqEq, 2),
                ([Some('='), Some('>')], _) => (Tok::Arrow, 2),
                ([Some('!'), Some('=')], _) => (Tok::NotEq, 2),
                ([Some('<'), Some('=')], _) => (Tok::Le, 2),
                ([Some('>'), Some('=')], _) => (Tok::Ge, 2),
                ([Some('&'), Some('&')], _) => (Tok::AndAnd, 2),
                ([Some('|'), Some('|')], _) => (Tok::OrOr, 2),
                ([Some('='), _], _) => (Tok::Assign, 1),
                ([Some('<'), _], _) => (Tok::Lt, 1),
                ([Some('>'), _], _) => (Tok::Gt, 1),
                ([Some('!'), _], _) => (Tok::Bang, 1),
                ([Some('('), _], _) => (Tok::LParen, 1),
                ([Some(')'), _], _) => (Tok::RParen, 1),
                ([Some('['), _], _) => (Tok::LBracket, 1),
                ([Some(']'), _], _) => (Tok::RBracket, 1),
                ([Some('{'), _], _) => (Tok::LBrace, 1),
                ([Some('}'), _], _) => (Tok::RBrace, 1),
                ([Some(','), _], _) => (Tok::Comma, 1),
                ([Some(':'), _], _) => (Tok::Colon, 1),
                ([Some(';'), _], _) => (Tok::Semi, 1),
                ([Some('.'), _], _) => (Tok::Dot, 1),
                ([Some('+'), _], _) => (Tok::Plus, 1),
                ([Some('-'), _], _) => (Tok::Minus, 1),
                ([Some('*'), _], _) => (Tok::Star, 1),
                ([Some('@'), _], _) => (Tok::At, 1),
                _ => {
                    return Err(SurfaceError::Lex {
                        span: cur.span(line, col, 1),
                        message: format!("illegal character `{}`", c.escape_default()),
                    })
                }
            };
            for _ in 0..n {
                cur.bump();
            }
            tok
        };
        let len = cur.pos - start;
        out.push(Token {
            tok,
            span: cur.span(line, col, len),
        });
    }
    Ok(out)
}

fn lex_string(cur: &mut Cursor<'_>, line: u32, col: u32) -> Result<String, SurfaceError> {
    let unterminated = |cur: &Cursor<'_>| SurfaceError::Lex {
        span: cur.span(line, col, 1),
        message: "unterminated string literal".into(),
    };
    if cur.starts_with("\"\"\"") {
        for _ in 0..3 {
            cur.bump();
        }
        let mut s = String::new();
        loop {
            if cur.starts_with("\"\"\"") {
                for _ in 0..3 {
                    cur.bump();
                }
                return Ok(s);
            }
            match cur.bump() {
                Some(c) => s.push(c),
                None => return Err(unterminated(cur)),
            }
        }
    }
    cur.bump();
    let mut s = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err(unterminated(cur)),
            Some('"') => return Ok(s),
            Some('\\') => match cur.bump() {
                Some('n') => s.push('\n'),
                Some('t') => s.push('\t'),
                Some(c @ ('"' | '\\')) => s.push(c),
                _ => {
                    return Err(SurfaceError::Lex {
                        span: cur.span(cur.line, cur.col.saturating_sub(1).max(1), 1),
                        message: "invalid escape sequence".into(),
                    })
                }
            },
            Some(c) => s.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let file: Arc<str> = Arc::from("t.psc");
        tokenize(&file, s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
    }

    #[test]
    fn sealed_class_header() {
        let t = toks("sealed abstract class List[A]");
        assert_eq!(
            &t[..4],
            &[Tok::Sealed, Tok::Abstract, Tok::Class, Tok::Ident("List".into())]
        );
    }

    #[test]
    fn unbalanced_input_lexes() {
        let t = toks("def f(x");
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn operators_longest_match() {
        assert_eq!(
            toks("==> == => = <= >="),
            vec![Tok::Implies, Tok::EqEq, Tok::Arrow, Tok::Assign, Tok::Le, Tok::Ge]
        );
    }

    #[test]
    fn triple_quoted_string() {
        let t = toks(r#"@proof(method = """(induct "<var xs>", auto)""")"#);
        assert_eq!(t[5], Tok::Str(r#"(induct "<var xs>", auto)"#.into()));
    }

    #[test]
    fn illegal_character_has_span() {
        let file: Arc<str> = Arc::from("t.psc");
        let err = tokenize(&file, "def f\n  #").unwrap_err();
        match err {
            SurfaceError::Lex { span, .. } => {
                assert_eq!((span.line, span.column), (2, 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unterminated_string() {
        let file: Arc<str> = Arc::from("t.psc");
        assert!(tokenize(&file, "\"abc").is_err());
    }

    #[test]
    fn spans_cover_tokens() {
        let file: Arc<str> = Arc::from("t.psc");
        let t = tokenize(&file, "def size").unwrap();
        assert_eq!(t[1].span.column, 5);
        assert_eq!(t[1].span.length, 4);
    }
}
