//! Recursive-descent parser. Errors report the 1-based line and column of the
//! offending token together with the tokens that would have been accepted.

use twinbasic::{Error, Result, Scalar};

use super::{Arg, BinOp, CallName, Expr, Kind, Number, Slot};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(String),
    Decimal(String),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, column);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start.0,
                column: start.1,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
        } else if c.is_whitespace() {
            i += 1;
            column += 1;
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let is_decimal = j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit();
            if is_decimal {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let s: String = chars[i..j].iter().collect();
            push(&mut out, if is_decimal { Tok::Decimal(s) } else { Tok::Int(s) });
            column += j - i;
            i = j;
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            push(&mut out, Tok::Ident(chars[i..j].iter().collect()));
            column += j - i;
            i = j;
        } else if "()[],;+-*/^".contains(c) {
            push(&mut out, Tok::Sym(c));
            i += 1;
            column += 1;
        } else {
            return Err(Error::Parse {
                line,
                column,
                expected: vec!["number".into(), "name".into(), "operator".into()],
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

/// Parses one expression; the whole input must be consumed.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let expr = parser.expr()?;
    if parser.peek() != &Tok::End {
        return Err(parser.error(&["end of input"]));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const ATOM_START: &[&str] = &["number", "name", "(", "-"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> Error {
        let token = &self.tokens[self.pos];
        Error::Parse {
            line: token.line,
            column: token.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek() == &Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&c.to_string()]))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.is_sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let atom = self.atom()?;
        if !self.is_sym('^') {
            return Ok(atom);
        }
        self.bump();
        let negative = self.is_sym('-');
        if negative {
            self.bump();
        }
        let Tok::Int(digits) = self.peek().clone() else {
            return Err(self.error(if negative { &["integer"] } else { &["integer", "-"] }));
        };
        let exp: i64 = digits
            .parse()
            .map_err(|_| self.error(&["integer exponent below 2^63"]))?;
        self.bump();
        Ok(Expr::Pow(Box::new(atom), if negative { -exp } else { exp }))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if self.is_sym('/') {
                    if let Tok::Int(d) = self.peek_at(1).clone() {
                        self.bump();
                        if d.trim_start_matches('0').is_empty() {
                            return Err(self.error(&["nonzero denominator"]));
                        }
                        self.bump();
                        let value: Scalar = format!("{n}/{d}").parse()?;
                        return Ok(Expr::Number(Number::Exact(value)));
                    }
                }
                Ok(Expr::Number(Number::Exact(n.parse()?)))
            }
            Tok::Decimal(text) => {
                self.bump();
                Ok(Expr::Number(Number::Decimal(text)))
            }
            Tok::Ident(name) => {
                let opens = matches!(self.peek_at(1), Tok::Sym('(') | Tok::Sym('['));
                match CallName::from_text(&name) {
                    Some(call) if opens => {
                        self.bump();
                        self.call(call)
                    }
                    None if opens => Err(self.error(&["known function name"])),
                    _ => {
                        self.bump();
                        Ok(Expr::Var(name))
                    }
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            _ => Err(self.error(ATOM_START)),
        }
    }

    fn call(&mut self, name: CallName) -> Result<Expr> {
        let (open, close) = name.brackets();
        let open_c = open.chars().next().unwrap();
        let close_c = close.chars().next().unwrap();
        if !self.is_sym(open_c) {
            return Err(self.error(&[open]));
        }
        self.bump();
        let signature = name.signature();
        let mut slots: Vec<Slot> = Vec::new();
        loop {
            let i = slots.len();
            let mut slot = Slot::new();
            loop {
                let kind = signature
                    .get(i)
                    .and_then(|s| s.get(slot.len()))
                    .copied()
                    .unwrap_or(Kind::Expr);
                slot.push(self.arg(kind)?);
                let last = i + 1 >= signature.len();
                match self.peek() {
                    Tok::Sym(',') => {
                        self.bump();
                    }
                    Tok::Sym(';') if !last => {
                        self.bump();
                        break;
                    }
                    Tok::Sym(c) if *c == close_c && last => {
                        self.bump();
                        slots.push(slot);
                        check_arity(name, &slots)?;
                        return Ok(Expr::Call(name, slots));
                    }
                    _ => return Err(self.error(&[",", if last { close } else { ";" }])),
                }
            }
            slots.push(slot);
        }
    }

    fn arg(&mut self, kind: Kind) -> Result<Arg> {
        match kind {
            Kind::Expr => Ok(Arg::Expr(self.expr()?)),
            Kind::Doublet => self.doublet(),
            Kind::ExprList | Kind::DoubletList => {
                self.expect_sym('[')?;
                let mut items = Vec::new();
                if self.is_sym(']') {
                    self.bump();
                    return Ok(Arg::List(items));
                }
                loop {
                    items.push(if kind == Kind::DoubletList {
                        self.doublet()?
                    } else {
                        Arg::Expr(self.expr()?)
                    });
                    match self.peek() {
                        Tok::Sym(',') => {
                            self.bump();
                        }
                        Tok::Sym(']') => {
                            self.bump();
                            return Ok(Arg::List(items));
                        }
                        _ => return Err(self.error(&[",", "]"])),
                    }
                }
            }
        }
    }

    fn doublet(&mut self) -> Result<Arg> {
        self.expect_sym('(')?;
        let a = self.expr()?;
        self.expect_sym(',')?;
        let b = self.expr()?;
        self.expect_sym(')')?;
        Ok(Arg::Doublet(a, b))
    }
}

fn check_arity(name: CallName, slots: &[Slot]) -> Result<()> {
    for (i, (slot, kinds)) in slots.iter().zip(name.signature()).enumerate() {
        if slot.len() != kinds.len() {
            return Err(Error::Arity(format!(
                "{}: slot {} takes {} argument(s), got {}",
                name.text(),
                i + 1,
                kinds.len(),
                slot.len()
            )));
        }
    }
    if name == CallName::Psi {
        for (i, slot) in slots.iter().take(2).enumerate() {
            if !matches!(&slot[0], Arg::List(items) if items.len() == 1) {
                return Err(Error::Arity(format!("Psi: slot {} takes exactly one doublet", i + 1)));
            }
        }
    }
    Ok(())
}
