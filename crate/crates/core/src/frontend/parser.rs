//! Recursive-descent parser for the surface language.
//!
//! Precedence, loosest first: `;`, `||`, `&&`, comparisons, `+ -`, `* %`,
//! application and `observe`, postfix `.1 .2 .[e]`. `let`, `if` and `fun`
//! extend as far to the right as possible.

use crate::ast::{Side, Span};
use crate::frontend::lexer::{lex, Tok, Token};
use crate::frontend::surface::{Pat, SExpr, SKind, SurfaceOp};
use crate::frontend::FrontendError;
use crate::value::CanonValue;

pub fn parse(src: &str) -> Result<SExpr, FrontendError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<Token, FrontendError> {
        if self.peek() == t {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn unexpected(&self, expected: &[&str]) -> FrontendError {
        FrontendError::Parse {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
            span: self.span(),
        }
    }

    fn ident(&mut self) -> Result<(String, Span), FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.advance().span;
                Ok((s, sp))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    pub fn expr(&mut self) -> Result<SExpr, FrontendError> {
        let start = self.span();
        match self.peek() {
            Tok::Let => self.let_expr(),
            Tok::If => {
                self.advance();
                let c = self.expr()?;
                self.expect(&Tok::Then, "`then`")?;
                let m = self.expr()?;
                self.expect(&Tok::Else, "`else`")?;
                let n = self.expr()?;
                let sp = start.to(n.span);
                Ok(SExpr::new(SKind::If(Box::new(c), Box::new(m), Box::new(n)), sp))
            }
            _ => {
                let first = self.or_expr()?;
                if self.eat(&Tok::Semi) {
                    let rest = self.expr()?;
                    let sp = start.to(rest.span);
                    Ok(SExpr::new(SKind::Seq(Box::new(first), Box::new(rest)), sp))
                } else {
                    Ok(first)
                }
            }
        }
    }

    fn let_expr(&mut self) -> Result<SExpr, FrontendError> {
        let start = self.advance().span;
        // `let f p1 .. pn = body in rest`
        if let Tok::Ident(f) = self.peek().clone() {
            if self.starts_pattern(self.peek_at(1)) {
                self.advance();
                let mut params = Vec::new();
                while self.peek() != &Tok::Op("=") {
                    params.push(self.pattern()?);
                }
                self.advance();
                let body = self.expr()?;
                self.expect(&Tok::In, "`in`")?;
                let rest = self.expr()?;
                let sp = start.to(rest.span);
                return Ok(SExpr::new(SKind::FunDef { name: f, params, body: Box::new(body), rest: Box::new(rest) }, sp));
            }
        }
        let pat = self.pattern()?;
        if !matches!(self.peek(), Tok::Op("=")) {
            return Err(self.unexpected(&["`=`"]));
        }
        self.advance();
        // `let f = fun p1 .. pn -> body in rest`
        if let (Pat::Var(f), Tok::Fun) = (&pat, self.peek()) {
            let f = f.clone();
            self.advance();
            let mut params = Vec::new();
            while self.peek() != &Tok::Arrow {
                params.push(self.pattern()?);
            }
            if params.is_empty() {
                return Err(self.unexpected(&["parameter"]));
            }
            self.advance();
            let body = self.expr()?;
            self.expect(&Tok::In, "`in`")?;
            let rest = self.expr()?;
            let sp = start.to(rest.span);
            return Ok(SExpr::new(SKind::FunDef { name: f, params, body: Box::new(body), rest: Box::new(rest) }, sp));
        }
        let m = self.expr()?;
        self.expect(&Tok::In, "`in`")?;
        let n = self.expr()?;
        let sp = start.to(n.span);
        Ok(SExpr::new(SKind::Let(pat, Box::new(m), Box::new(n)), sp))
    }

    fn starts_pattern(&self, t: &Tok) -> bool {
        matches!(t, Tok::Ident(_) | Tok::UnitLit | Tok::LParen)
    }

    fn pattern(&mut self) -> Result<Pat, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(if x == "_" { Pat::Wild } else { Pat::Var(x) })
            }
            Tok::UnitLit => {
                self.advance();
                Ok(Pat::Unit)
            }
            Tok::LParen => {
                self.advance();
                let mut ps = vec![self.pattern()?];
                while self.eat(&Tok::Comma) {
                    ps.push(self.pattern()?);
                }
                self.expect(&Tok::RParen, "`)`")?;
                Ok(if ps.len() == 1 { ps.pop().expect("one pattern") } else { Pat::Tuple(ps) })
            }
            _ => Err(self.unexpected(&["pattern"])),
        }
    }

    fn binary(&mut self, ops: &[&str], next: fn(&mut Self) -> Result<SExpr, FrontendError>) -> Result<SExpr, FrontendError> {
        let mut lhs = next(self)?;
        while let Tok::Op(o) = self.peek() {
            if !ops.contains(o) {
                break;
            }
            let op = SurfaceOp::from_symbol(o).expect("known operator");
            self.advance();
            let rhs = next(self)?;
            let sp = lhs.span.to(rhs.span);
            lhs = SExpr::new(SKind::Op(op, Box::new(lhs), Box::new(rhs)), sp);
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<SExpr, FrontendError> {
        self.binary(&["||"], Self::and_expr)
    }

    fn and_expr(&mut self) -> Result<SExpr, FrontendError> {
        self.binary(&["&&"], Self::cmp_expr)
    }

    fn cmp_expr(&mut self) -> Result<SExpr, FrontendError> {
        let lhs = self.add_expr()?;
        if let Tok::Op(o @ ("=" | "==" | ">" | "<")) = self.peek() {
            let op = SurfaceOp::from_symbol(o).expect("comparison");
            self.advance();
            let rhs = self.add_expr()?;
            if let Tok::Op("=" | "==" | ">" | "<") = self.peek() {
                return Err(FrontendError::Parse {
                    expected: vec!["parenthesised comparison".into()],
                    found: self.peek().describe(),
                    span: self.span(),
                });
            }
            let sp = lhs.span.to(rhs.span);
            return Ok(SExpr::new(SKind::Op(op, Box::new(lhs), Box::new(rhs)), sp));
        }
        Ok(lhs)
    }

    fn add_expr(&mut self) -> Result<SExpr, FrontendError> {
        self.binary(&["+", "-"], Self::mul_expr)
    }

    fn mul_expr(&mut self) -> Result<SExpr, FrontendError> {
        self.binary(&["*", "%"], Self::app_expr)
    }

    fn starts_atom(t: &Tok) -> bool {
        matches!(
            t,
            Tok::Ident(_) | Tok::Int(_) | Tok::Real(_) | Tok::True | Tok::False | Tok::UnitLit | Tok::LParen | Tok::LBracket
        )
    }

    fn app_expr(&mut self) -> Result<SExpr, FrontendError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Observe => {
                self.advance();
                let arg = self.postfix()?;
                let sp = start.to(arg.span);
                Ok(SExpr::new(SKind::Observe(Box::new(arg)), sp))
            }
            Tok::Let | Tok::If => self.expr(),
            Tok::Ident(f) if Self::starts_atom(self.peek_at(1)) => {
                self.advance();
                let mut args = Vec::new();
                while Self::starts_atom(self.peek()) {
                    args.push(self.postfix()?);
                }
                let sp = start.to(self.prev_span());
                Ok(SExpr::new(SKind::Apply(f, args), sp))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<SExpr, FrontendError> {
        let mut e = self.atom()?;
        loop {
            match self.peek() {
                Tok::Proj(i) => {
                    let side = if *i == 1 { Side::Fst } else { Side::Snd };
                    let sp = e.span.to(self.advance().span);
                    e = SExpr::new(SKind::Proj(Box::new(e), side), sp);
                }
                Tok::DotBracket => {
                    self.advance();
                    let i = self.expr()?;
                    let close = self.expect(&Tok::RBracket, "`]`")?;
                    let sp = e.span.to(close.span);
                    e = SExpr::new(SKind::Index(Box::new(e), Box::new(i)), sp);
                }
                _ => return Ok(e),
            }
        }
    }

    fn atom(&mut self) -> Result<SExpr, FrontendError> {
        let start = self.span();
        let konst = |c| SKind::Const(c);
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(SExpr::new(SKind::Var(x), start))
            }
            Tok::Int(i) => {
                self.advance();
                Ok(SExpr::new(konst(CanonValue::Int(i)), start))
            }
            Tok::Real(r) => {
                self.advance();
                Ok(SExpr::new(konst(CanonValue::Real(r)), start))
            }
            Tok::True | Tok::False => {
                let b = self.advance().tok == Tok::True;
                Ok(SExpr::new(konst(CanonValue::Bool(b)), start))
            }
            Tok::UnitLit => {
                self.advance();
                Ok(SExpr::new(konst(CanonValue::Unit), start))
            }
            Tok::Op("-") => {
                self.advance();
                let sp = start.to(self.span());
                match self.peek().clone() {
                    Tok::Int(i) => {
                        self.advance();
                        Ok(SExpr::new(konst(CanonValue::Int(-i)), sp))
                    }
                    Tok::Real(r) => {
                        self.advance();
                        Ok(SExpr::new(konst(CanonValue::Real(-r)), sp))
                    }
                    _ => Err(self.unexpected(&["numeric literal after unary `-`"])),
                }
            }
            Tok::Random => {
                self.advance();
                let wrapped = self.eat(&Tok::LParen);
                let (d, _) = self.ident()?;
                self.expect(&Tok::LParen, "`(`")?;
                let mut args = Vec::new();
                if self.peek() != &Tok::RParen {
                    args.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                }
                let mut close = self.expect(&Tok::RParen, "`)`")?;
                if wrapped {
                    close = self.expect(&Tok::RParen, "`)`")?;
                }
                Ok(SExpr::new(SKind::Random(d, args), start.to(close.span)))
            }
            Tok::LParen => {
                self.advance();
                let first = self.expr()?;
                if self.eat(&Tok::Comma) {
                    let mut es = vec![first];
                    es.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        es.push(self.expr()?);
                    }
                    let close = self.expect(&Tok::RParen, "`)`")?;
                    Ok(SExpr::new(SKind::Tuple(es), start.to(close.span)))
                } else {
                    self.expect(&Tok::RParen, "`)` or `,`")?;
                    Ok(first)
                }
            }
            Tok::LBracket => {
                self.advance();
                if self.eat(&Tok::For) {
                    let pat = self.pattern()?;
                    self.expect(&Tok::In, "`in`")?;
                    let src = self.expr()?;
                    self.expect(&Tok::Arrow, "`->`")?;
                    let body = self.expr()?;
                    let close = self.expect(&Tok::RBracket, "`]`")?;
                    return Ok(SExpr::new(
                        SKind::Comprehension(pat, Box::new(src), Box::new(body)),
                        start.to(close.span),
                    ));
                }
                let mut es = vec![self.or_expr_or_block()?];
                while self.eat(&Tok::Semi) {
                    es.push(self.or_expr_or_block()?);
                }
                let close = self.expect(&Tok::RBracket, "`]` or `;`")?;
                Ok(SExpr::new(SKind::ArrayLit(es), start.to(close.span)))
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    // Array elements are separated by `;`, so sequencing is not available there.
    fn or_expr_or_block(&mut self) -> Result<SExpr, FrontendError> {
        match self.peek() {
            Tok::Let | Tok::If => self.expr(),
            _ => self.or_expr(),
        }
    }
}
