//! Recursive-descent parser from tokens to the syntax tree of a model file.

use crate::error::{JetError, Result};

use super::lexer::{tokenize, Pos, Tok, Token};
use super::model::FieldKind;

/// Integer index expression: literals, bound names and `n`, with `+` and `-`.
#[derive(Clone, Debug, PartialEq)]
pub enum Ix {
    Int(i64),
    Var(String, Pos),
    Add(Box<Ix>, Box<Ix>),
    Sub(Box<Ix>, Box<Ix>),
}

/// `name`, `name[t, ...; d, ...]` or `name_{t, ...; d, ...}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ref {
    pub name: String,
    pub pos: Pos,
    pub tensor: Vec<Ix>,
    pub dirs: Vec<Ix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeoFn {
    Christoffel,
    Ricci,
    Einstein,
    Curvature,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(i64),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>, Pos),
    Pow(Box<Node>, i32, Pos),
    Ref(Ref),
    /// `d(e, mu, ...)`
    D(Box<Node>, Vec<Ix>, Pos),
    /// `sum(i, lo, hi, e)`, `hi` exclusive.
    Sum(String, Ix, Ix, Box<Node>),
    /// `lie(F[..])` or `lie(F[..], V)`.
    Lie(Ref, Option<(String, Pos)>),
    /// `nabla(F[..], mu)`
    Nabla(Ref, Ix),
    Geo(GeoFn, Vec<Ix>, Pos),
}

/// `var in lo..hi`
#[derive(Clone, Debug, PartialEq)]
pub struct Range {
    pub var: String,
    pub lo: Ix,
    pub hi: Ix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assign {
    pub lhs: Ref,
    pub rhs: Node,
    pub ranges: Vec<Range>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PStmt {
    Eps(String, FieldKind, Pos),
    Delta(Assign),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub expr: Node,
    pub leading: Option<Ref>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GenItem {
    Xi(Assign),
    Zeta(Node),
    Lift(Assign),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Model(String),
    Dim(i64, Pos),
    Param(Vec<(String, Pos)>),
    Field(String, FieldKind, Pos),
    Lagrangian(Option<String>, Node, Pos),
    Parametrization(Vec<PStmt>),
    Constraint(bool, Vec<Equation>, Pos),
    Generator(String, Vec<GenItem>, Pos),
    Jmap(Vec<Assign>, Pos),
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

const STATEMENTS: &[&str] = &[
    "model",
    "dim",
    "param",
    "field",
    "lagrangian",
    "parametrization",
    "constraint",
    "generator",
    "jmap",
];

const PRIMARY: &[&str] = &["integer", "identifier", "`(`", "`\\frac`", "`-`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        Err(JetError::Syntax {
            line: self.pos().line,
            col: self.pos().col,
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, name: &str) -> Result<Pos> {
        let p = self.pos();
        if self.eat(&t) {
            Ok(p)
        } else {
            self.fail(&[name])
        }
    }

    fn skip_newlines(&mut self) {
        while self.eat(&Tok::Newline) {}
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        let p = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, p))
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof | Tok::RBrace => Ok(()),
            _ => self.fail(&["end of line"]),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.fail(&["integer"]),
        }
    }

    fn kind(&mut self) -> Result<FieldKind> {
        let p = self.pos();
        let (w, _) = self.ident().or_else(|_| self.fail(&kind_names()))?;
        FieldKind::from_keyword(&w).ok_or_else(|| JetError::Syntax {
            line: p.line,
            col: p.col,
            found: format!("identifier `{w}`"),
            expected: kind_names().iter().map(|s| s.to_string()).collect(),
        })
    }

    // index expressions

    fn ix_atom(&mut self) -> Result<Ix> {
        let p = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Ix::Int(v))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Ix::Var(s, p))
            }
            Tok::LParen => {
                self.bump();
                let e = self.ix()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.fail(&["integer", "index name", "`(`"]),
        }
    }

    fn ix(&mut self) -> Result<Ix> {
        let mut lhs = self.ix_atom()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Ix::Add(Box::new(lhs), Box::new(self.ix_atom()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Ix::Sub(Box::new(lhs), Box::new(self.ix_atom()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn ix_list(&mut self, stop: &[Tok]) -> Result<Vec<Ix>> {
        let mut out = Vec::new();
        if stop.contains(self.peek()) {
            return Ok(out);
        }
        out.push(self.ix()?);
        while self.eat(&Tok::Comma) {
            out.push(self.ix()?);
        }
        Ok(out)
    }

    /// Subscript after a name, if any.
    fn subscript(&mut self) -> Result<Option<(Vec<Ix>, Vec<Ix>)>> {
        let close = if self.eat(&Tok::LBracket) {
            (Tok::RBracket, "`]`")
        } else if self.peek() == &Tok::Underscore {
            self.bump();
            self.expect(Tok::LBrace, "`{`")?;
            (Tok::RBrace, "`}`")
        } else {
            return Ok(None);
        };
        let tensor = self.ix_list(&[Tok::Semi, close.0.clone()])?;
        let dirs = if self.eat(&Tok::Semi) {
            self.ix_list(std::slice::from_ref(&close.0))?
        } else {
            Vec::new()
        };
        if !self.eat(&close.0) {
            let alts: &[&str] = if tensor.is_empty() && dirs.is_empty() {
                &[close.1, "`;`", "index"]
            } else {
                &[close.1, "`,`", "`;`"]
            };
            return self.fail(alts);
        }
        Ok(Some((tensor, dirs)))
    }

    fn reference(&mut self) -> Result<Ref> {
        let (name, pos) = self.ident()?;
        let (tensor, dirs) = self.subscript()?.unwrap_or_default();
        Ok(Ref {
            name,
            pos,
            tensor,
            dirs,
        })
    }

    // expressions

    /// Newlines after a binary operator continue the expression.
    fn operand_break(&mut self) {
        self.skip_newlines();
    }

    pub fn expr(&mut self) -> Result<Node> {
        let p = self.pos();
        let mut lhs = if self.eat(&Tok::Minus) {
            Node::Neg(Box::new(self.term()?))
        } else {
            self.eat(&Tok::Plus);
            self.term()?
        };
        loop {
            let p2 = self.pos();
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            self.operand_break();
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs), p2);
        }
        let _ = p;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.power()?;
        loop {
            let p = self.pos();
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            self.operand_break();
            let rhs = self.power()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs), p);
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        let p = self.pos();
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let k = if self.eat(&Tok::LBrace) {
            let k = self.int()?;
            self.expect(Tok::RBrace, "`}`")?;
            k
        } else if self.eat(&Tok::LParen) {
            let k = self.int()?;
            self.expect(Tok::RParen, "`)`")?;
            k
        } else {
            self.int()?
        };
        let k = i32::try_from(k).map_err(|_| JetError::Syntax {
            line: p.line,
            col: p.col,
            found: format!("exponent {k}"),
            expected: vec!["small integer exponent".into()],
        })?;
        Ok(Node::Pow(Box::new(base), k, p))
    }

    fn primary(&mut self) -> Result<Node> {
        let p = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Node::Num(v))
            }
            Tok::LParen => {
                self.bump();
                self.skip_newlines();
                let e = self.expr()?;
                self.skip_newlines();
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Frac => {
                self.bump();
                self.expect(Tok::LBrace, "`{`")?;
                let a = self.expr()?;
                self.expect(Tok::RBrace, "`}`")?;
                self.expect(Tok::LBrace, "`{`")?;
                let b = self.expr()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Node::Bin(BinOp::Div, Box::new(a), Box::new(b), p))
            }
            Tok::Ident(name) => {
                if self.toks[self.i + 1].tok == Tok::LParen {
                    self.call(&name)
                } else {
                    Ok(Node::Ref(self.reference()?))
                }
            }
            _ => self.fail(PRIMARY),
        }
    }

    fn call(&mut self, name: &str) -> Result<Node> {
        let p = self.pos();
        let builtins = [
            "d",
            "sum",
            "lie",
            "nabla",
            "christoffel",
            "ricci",
            "einstein",
            "curvature",
        ];
        if !builtins.contains(&name) {
            return Err(JetError::Validation(format!(
                "{p}: unknown function `{name}`, expected one of {}",
                builtins.join(", ")
            )));
        }
        self.bump();
        self.expect(Tok::LParen, "`(`")?;
        let node = match name {
            "d" => {
                let e = self.expr()?;
                let mut dirs = Vec::new();
                while self.eat(&Tok::Comma) {
                    dirs.push(self.ix()?);
                }
                if dirs.is_empty() {
                    return self.fail(&["`,`"]);
                }
                Node::D(Box::new(e), dirs, p)
            }
            "sum" => {
                let (v, _) = self.ident()?;
                self.expect(Tok::Comma, "`,`")?;
                let lo = self.ix()?;
                self.expect(Tok::Comma, "`,`")?;
                let hi = self.ix()?;
                self.expect(Tok::Comma, "`,`")?;
                self.skip_newlines();
                let e = self.expr()?;
                self.skip_newlines();
                Node::Sum(v, lo, hi, Box::new(e))
            }
            "lie" => {
                let r = self.reference()?;
                let along = if self.eat(&Tok::Comma) {
                    Some(self.ident()?)
                } else {
                    None
                };
                Node::Lie(r, along)
            }
            "nabla" => {
                let r = self.reference()?;
                self.expect(Tok::Comma, "`,`")?;
                Node::Nabla(r, self.ix()?)
            }
            g => {
                let f = match g {
                    "christoffel" => GeoFn::Christoffel,
                    "ricci" => GeoFn::Ricci,
                    "einstein" => GeoFn::Einstein,
                    _ => GeoFn::Curvature,
                };
                Node::Geo(f, self.ix_list(&[Tok::RParen])?, p)
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(node)
    }

    // statements

    fn ranges(&mut self) -> Result<Vec<Range>> {
        let mut out = Vec::new();
        if !self.keyword("for") {
            return Ok(out);
        }
        loop {
            let (var, _) = self.ident()?;
            if !self.keyword("in") {
                return self.fail(&["`in`"]);
            }
            let lo = self.ix()?;
            self.expect(Tok::DotDot, "`..`")?;
            let hi = self.ix()?;
            out.push(Range { var, lo, hi });
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn assign(&mut self) -> Result<Assign> {
        let lhs = self.reference()?;
        self.expect(Tok::Eq, "`=`")?;
        let rhs = self.expr()?;
        let ranges = self.ranges()?;
        Ok(Assign { lhs, rhs, ranges })
    }

    /// `{` items separated by newlines `}`.
    fn block<T>(&mut self, mut item: impl FnMut(&mut Parser) -> Result<T>) -> Result<Vec<T>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            out.push(item(self)?);
            match self.peek() {
                Tok::Newline => {}
                Tok::RBrace => {}
                _ => return self.fail(&["end of line", "`}`"]),
            }
        }
    }

    fn statement(&mut self) -> Result<Stmt> {
        let p = self.pos();
        let (kw, _) = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return self.fail(STATEMENTS),
        };
        let s = match kw.as_str() {
            "model" => Stmt::Model(self.ident()?.0),
            "dim" => Stmt::Dim(self.int()?, p),
            "param" => {
                let mut v = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    v.push(self.ident()?);
                }
                Stmt::Param(v)
            }
            "field" => {
                let (name, np) = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                Stmt::Field(name, self.kind()?, np)
            }
            "lagrangian" => {
                let name = match self.peek() {
                    Tok::Ident(_) => Some(self.ident()?.0),
                    _ => None,
                };
                self.expect(Tok::LBrace, "`{`")?;
                self.skip_newlines();
                let e = self.expr()?;
                self.skip_newlines();
                self.expect(Tok::RBrace, "`}`")?;
                Stmt::Lagrangian(name, e, p)
            }
            "parametrization" => Stmt::Parametrization(self.block(|s| {
                let p = s.pos();
                if s.keyword("eps") {
                    let (name, _) = s.ident()?;
                    s.expect(Tok::Colon, "`:`")?;
                    Ok(PStmt::Eps(name, s.kind()?, p))
                } else if s.keyword("delta") {
                    Ok(PStmt::Delta(s.assign()?))
                } else {
                    s.fail(&["`eps`", "`delta`"])
                }
            })?),
            "constraint" => {
                let faithful = self.keyword("faithful");
                let eqs = self.block(|s| {
                    let p = s.pos();
                    let expr = s.expr()?;
                    s.expect(Tok::Eq, "`=`")?;
                    match s.peek() {
                        Tok::Int(0) => {
                            s.bump();
                        }
                        _ => return s.fail(&["`0`"]),
                    }
                    let leading = if s.eat(&Tok::Semi) {
                        if !s.keyword("leading") {
                            return s.fail(&["`leading`"]);
                        }
                        Some(s.reference()?)
                    } else {
                        None
                    };
                    Ok(Equation {
                        expr,
                        leading,
                        pos: p,
                    })
                })?;
                Stmt::Constraint(faithful, eqs, p)
            }
            "generator" => {
                let (name, _) = self.ident()?;
                let items = if self.peek() == &Tok::LBrace {
                    self.block(|s| {
                        if s.keyword("lift") {
                            return Ok(GenItem::Lift(s.assign()?));
                        }
                        if s.keyword("zeta") {
                            s.expect(Tok::Eq, "`=`")?;
                            return Ok(GenItem::Zeta(s.expr()?));
                        }
                        if matches!(s.peek(), Tok::Ident(w) if w == "xi") {
                            return Ok(GenItem::Xi(s.assign()?));
                        }
                        s.fail(&["`lift`", "`xi`", "`zeta`"])
                    })?
                } else {
                    Vec::new()
                };
                Stmt::Generator(name, items, p)
            }
            "jmap" => Stmt::Jmap(self.block(|s| s.assign())?, p),
            _ => {
                self.i -= 1;
                return self.fail(STATEMENTS);
            }
        };
        self.end_of_statement()?;
        Ok(s)
    }
}

fn kind_names() -> Vec<&'static str> {
    FieldKind::ALL.iter().map(|k| k.keyword()).collect()
}

/// Parses a model file into statements.
pub fn parse_statements(src: &str) -> Result<Vec<Stmt>> {
    let mut p = Parser {
        toks: tokenize(src)?,
        i: 0,
    };
    let mut out = Vec::new();
    loop {
        p.skip_newlines();
        if p.peek() == &Tok::Eof {
            return Ok(out);
        }
        out.push(p.statement()?);
    }
}

/// Parses a single expression, allowing line breaks anywhere between tokens.
pub fn parse_expression(src: &str) -> Result<Node> {
    let toks = tokenize(src)?
        .into_iter()
        .filter(|t| t.tok != Tok::Newline)
        .collect();
    let mut p = Parser { toks, i: 0 };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}
