use crate::ast::Span;
use crate::frontend::FrontendError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    True,
    False,
    Let,
    In,
    If,
    Then,
    Else,
    Observe,
    Random,
    For,
    Fun,
    /// `()`, possibly with whitespace inside.
    UnitLit,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    /// `.1` or `.2`
    Proj(u8),
    /// `.[`
    DotBracket,
    Arrow,
    Op(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Real(r) => format!("real {r:?}"),
            Tok::Proj(i) => format!("`.{i}`"),
            Tok::Op(o) => format!("`{o}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::True => "true",
            Tok::False => "false",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Observe => "observe",
            Tok::Random => "random",
            Tok::For => "for",
            Tok::Fun => "fun",
            Tok::UnitLit => "()",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::DotBracket => ".[",
            Tok::Arrow => "->",
            _ => "?",
        }
    }

    /// Whether the token can end an operand, which makes a following `.1` a projection.
    fn ends_operand(&self) -> bool {
        matches!(self, Tok::Ident(_) | Tok::RParen | Tok::RBracket | Tok::Proj(_) | Tok::UnitLit)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }.run()
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn peek(&self, k: usize) -> Option<u8> {
        self.src.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek(0) {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek(1) == Some(b'/') => {
                    while let Some(c) = self.peek(0) {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        let mut out: Vec<Token> = Vec::new();
        loop {
            self.skip_trivia();
            let start = Span { start: self.pos, end: self.pos, line: self.line, col: self.col };
            let Some(c) = self.peek(0) else {
                out.push(Token { tok: Tok::Eof, span: start });
                return Ok(out);
            };
            // `.1` directly after an operand is a projection; after whitespace it is a real.
            let prev_ends_operand = out.last().is_some_and(|t| t.tok.ends_operand() && t.span.end == self.pos);
            let tok = match c {
                b'(' => {
                    let mut k = 1;
                    while self.peek(k).is_some_and(|c| c == b' ' || c == b'\t') {
                        k += 1;
                    }
                    if self.peek(k) == Some(b')') {
                        for _ in 0..=k {
                            self.bump();
                        }
                        Tok::UnitLit
                    } else {
                        self.bump();
                        Tok::LParen
                    }
                }
                b')' => self.single(Tok::RParen),
                b'[' => self.single(Tok::LBracket),
                b']' => self.single(Tok::RBracket),
                b',' => self.single(Tok::Comma),
                b';' => self.single(Tok::Semi),
                b'.' => match self.peek(1) {
                    Some(b'[') => {
                        self.bump();
                        self.bump();
                        Tok::DotBracket
                    }
                    Some(d) if d.is_ascii_digit() && prev_ends_operand => {
                        self.bump();
                        self.bump();
                        match d {
                            b'1' => Tok::Proj(1),
                            b'2' => Tok::Proj(2),
                            _ => return Err(self.error(start, "projection index must be 1 or 2")),
                        }
                    }
                    Some(d) if d.is_ascii_digit() => self.number(start)?,
                    _ => return Err(self.error(start, "unexpected `.`")),
                },
                b'-' if self.peek(1) == Some(b'>') => {
                    self.bump();
                    self.bump();
                    Tok::Arrow
                }
                b'&' if self.peek(1) == Some(b'&') => self.double("&&"),
                b'|' if self.peek(1) == Some(b'|') => self.double("||"),
                b'=' if self.peek(1) == Some(b'=') => self.double("=="),
                b'=' => self.single(Tok::Op("=")),
                b'>' => self.single(Tok::Op(">")),
                b'<' => self.single(Tok::Op("<")),
                b'+' => self.single(Tok::Op("+")),
                b'-' => self.single(Tok::Op("-")),
                b'*' => self.single(Tok::Op("*")),
                b'%' => self.single(Tok::Op("%")),
                c if c.is_ascii_digit() => self.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => self.word(),
                other => {
                    let ch = std::str::from_utf8(&self.src[self.pos..])
                        .ok()
                        .and_then(|s| s.chars().next())
                        .unwrap_or(other as char);
                    return Err(self.error(start, &format!("unexpected character `{ch}`")));
                }
            };
            let span = Span { end: self.pos, ..start };
            out.push(Token { tok, span });
        }
    }

    fn single(&mut self, t: Tok) -> Tok {
        self.bump();
        t
    }

    fn double(&mut self, op: &'static str) -> Tok {
        self.bump();
        self.bump();
        Tok::Op(op)
    }

    fn word(&mut self) -> Tok {
        let start = self.pos;
        while self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'\'') {
            self.bump();
        }
        let w = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match w {
            "let" => Tok::Let,
            "in" => Tok::In,
            "if" => Tok::If,
            "then" => Tok::Then,
            "else" => Tok::Else,
            "true" => Tok::True,
            "false" => Tok::False,
            "observe" => Tok::Observe,
            "random" => Tok::Random,
            "for" => Tok::For,
            "fun" => Tok::Fun,
            _ => Tok::Ident(w.to_string()),
        }
    }

    fn number(&mut self, start: Span) -> Result<Tok, FrontendError> {
        let from = self.pos;
        let mut real = false;
        while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek(0) == Some(b'.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            real = true;
            self.bump();
            while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(0), Some(b'e' | b'E')) {
            let sign = matches!(self.peek(1), Some(b'+' | b'-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                real = true;
                for _ in 0..digit_at {
                    self.bump();
                }
                while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let text = std::str::from_utf8(&self.src[from..self.pos]).expect("ascii");
        if real {
            text.parse::<f64>()
                .map(Tok::Real)
                .map_err(|_| self.error(start, &format!("malformed real literal `{text}`")))
        } else {
            text.parse::<i64>()
                .map(Tok::Int)
                .map_err(|_| self.error(start, &format!("integer literal `{text}` out of range")))
        }
    }

    fn error(&self, span: Span, msg: &str) -> FrontendError {
        FrontendError::Lex { message: msg.to_string(), span: Span { end: self.pos.max(span.start + 1), ..span } }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn dot_digit_is_projection_after_operand_and_real_otherwise() {
        assert_eq!(toks("x.1"), vec![Tok::Ident("x".into()), Tok::Proj(1), Tok::Eof]);
        assert_eq!(toks("f .18"), vec![Tok::Ident("f".into()), Tok::Real(0.18), Tok::Eof]);
        assert_eq!(toks("(a).2"), vec![Tok::LParen, Tok::Ident("a".into()), Tok::RParen, Tok::Proj(2), Tok::Eof]);
    }

    #[test]
    fn numbers_and_operators() {
        assert_eq!(
            toks("1 + 2.5e-1 == 3 // comment"),
            vec![Tok::Int(1), Tok::Op("+"), Tok::Real(0.25), Tok::Op("=="), Tok::Int(3), Tok::Eof]
        );
        assert_eq!(toks("a->b"), vec![Tok::Ident("a".into()), Tok::Arrow, Tok::Ident("b".into()), Tok::Eof]);
    }

    #[test]
    fn unit_literal_allows_inner_space() {
        assert_eq!(toks("f ( )"), vec![Tok::Ident("f".into()), Tok::UnitLit, Tok::Eof]);
    }

    #[test]
    fn spans_track_lines() {
        let t = lex("let\n  x").unwrap();
        assert_eq!((t[1].span.line, t[1].span.col), (2, 3));
    }

    #[test]
    fn stray_character_is_reported() {
        let e = lex("x $ y").unwrap_err();
        assert!(e.to_string().contains("unexpected character `$`"), "{e}");
    }
}
