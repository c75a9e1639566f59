//! Hand-written lexer and precedence-climbing parser for the metric language.
//!
//! ```text
//! node := "diag(" names ";" signs ";" exprs ")"
//!       | "sym(" names ";" exprs ")"              upper triangle, row major
//!       | "product(" node ("," node)+ ")"
//!       | "warped(" node "," expr "," node ")"
//!       | "conformal(" expr "," node ")"          scale^2 * inner
//!       | "sphere(" int [";" sign] [";" names] ")"
//!       | "hyperbolic(" int [";" sign] [";" names] ")"
//!       | "flat(" int [";" signs] [";" names] ")"
//!       | "ppwave(H=" expr ")"
//!       | "catalog(" entry-name ")"
//! expr := sum;  sum := term (("+"|"-") term)*;  term := unary (("*"|"/") unary)*
//! unary := "-" unary | power;  power := atom ["^" unary]
//! atom := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```

use crate::dsl::expr::{BinOp, Expr, Func};
use crate::dsl::metric::MetricSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Punct(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (offset, ch) = bytes[i];
        let start = (line, col);
        if ch == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && bytes.get(i + 1).is_some_and(|b| b.1.is_ascii_digit())) {
            let mut j = i;
            let mut seen_exp = false;
            while j < bytes.len() {
                let c = bytes[j].1;
                let exp_sign = seen_exp && (c == '+' || c == '-') && matches!(bytes[j - 1].1, 'e' | 'E');
                if c.is_ascii_digit() || c == '.' || exp_sign {
                    j += 1;
                } else if (c == 'e' || c == 'E')
                    && !seen_exp
                    && bytes.get(j + 1).is_some_and(|b| {
                        b.1.is_ascii_digit()
                            || ((b.1 == '+' || b.1 == '-') && bytes.get(j + 2).is_some_and(|d| d.1.is_ascii_digit()))
                    })
                {
                    seen_exp = true;
                    j += 1;
                } else {
                    break;
                }
            }
            let end = bytes.get(j).map_or(src.len(), |b| b.0);
            let text = &src[offset..end];
            let value: f64 = text.parse().map_err(|_| Error::Parse {
                line: start.0,
                col: start.1,
                msg: format!("malformed number `{text}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: start.0,
                    col: start.1,
                    msg: format!("number `{text}` out of range"),
                });
            }
            out.push(Token {
                tok: Tok::Num(value),
                line: start.0,
                col: start.1,
                offset,
            });
            col += j - i;
            i = j;
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].1.is_alphanumeric() || bytes[j].1 == '_') {
                j += 1;
            }
            let end = bytes.get(j).map_or(src.len(), |b| b.0);
            out.push(Token {
                tok: Tok::Ident(src[offset..end].to_string()),
                line: start.0,
                col: start.1,
                offset,
            });
            col += j - i;
            i = j;
            continue;
        }
        if "()+-*/^,;=".contains(ch) {
            out.push(Token {
                tok: Tok::Punct(ch),
                line,
                col,
                offset,
            });
            col += 1;
            i += 1;
            continue;
        }
        return Err(Error::Parse {
            line,
            col,
            msg: format!("unexpected character `{ch}`"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        col,
        offset: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        Ok(Self {
            src,
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: tok.line,
            col: tok.col,
            msg: msg.into(),
        }
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected `{c}`, found {}", describe(&t.tok))))
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::End {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("unexpected trailing {}", describe(&t.tok))))
        }
    }

    fn ident(&mut self) -> Result<String> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Ident(s) => Ok(s),
            other => Err(self.error_at(&t, format!("expected a name, found {}", describe(&other)))),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.at_punct('+') {
                BinOp::Add
            } else if self.at_punct('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.at_punct('*') {
                BinOp::Mul
            } else if self.at_punct('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.at_punct('-') {
            self.next();
            // a minus sign directly in front of a literal is part of the literal
            if let Tok::Num(v) = self.peek().tok {
                if self.toks[self.pos + 1].tok != Tok::Punct('^') {
                    self.next();
                    return Ok(Expr::Num(-v));
                }
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.at_punct('^') {
            self.next();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Punct('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if !self.at_punct('(') {
                    return Ok(Expr::var(name));
                }
                let func = Func::from_name(&name).ok_or_else(|| Error::UnknownFunction {
                    name: name.clone(),
                    line: t.line,
                    col: t.col,
                })?;
                self.next();
                let mut args = vec![self.expr()?];
                while self.at_punct(',') {
                    self.next();
                    args.push(self.expr()?);
                }
                let close = self.peek().clone();
                self.expect(')')?;
                if args.len() != func.arity() {
                    return Err(self.error_at(
                        &close,
                        format!("{} takes {} argument(s), got {}", func.name(), func.arity(), args.len()),
                    ));
                }
                Ok(Expr::Call { func, args })
            }
            other => Err(self.error_at(&t, format!("expected an expression, found {}", describe(&other)))),
        }
    }

    // ---- metric nodes ----

    fn node(&mut self) -> Result<MetricSpec> {
        let head = self.peek().clone();
        let name = self.ident()?;
        self.expect('(')?;
        let spec = match name.as_str() {
            "diag" => {
                let coords = self.name_list()?;
                self.expect(';')?;
                let signs = self.sign_list()?;
                self.expect(';')?;
                let coeffs = self.expr_list()?;
                if signs.len() != coords.len() || coeffs.len() != coords.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "diag at line {}, column {} has {} coordinates, {} signs and {} coefficients",
                        head.line,
                        head.col,
                        coords.len(),
                        signs.len(),
                        coeffs.len()
                    )));
                }
                MetricSpec::Diag { coords, signs, coeffs }
            }
            "sym" => {
                let coords = self.name_list()?;
                self.expect(';')?;
                let entries = self.expr_list()?;
                let d = coords.len();
                if entries.len() != d * (d + 1) / 2 {
                    return Err(Error::DimensionMismatch(format!(
                        "sym at line {}, column {} needs {} upper-triangle entries for {} coordinates, got {}",
                        head.line,
                        head.col,
                        d * (d + 1) / 2,
                        d,
                        entries.len()
                    )));
                }
                MetricSpec::Sym { coords, entries }
            }
            "product" => {
                let mut acc = self.node()?;
                let mut count = 1;
                while self.at_punct(',') {
                    self.next();
                    let rhs = self.node()?;
                    acc = MetricSpec::Product(Box::new(acc), Box::new(rhs));
                    count += 1;
                }
                if count < 2 {
                    return Err(self.error_at(&head, "product needs at least two factors"));
                }
                acc
            }
            "warped" => {
                let base = self.node()?;
                self.expect(',')?;
                let warp = self.expr()?;
                self.expect(',')?;
                let fiber = self.node()?;
                MetricSpec::Warped {
                    base: Box::new(base),
                    warp,
                    fiber: Box::new(fiber),
                }
            }
            "conformal" => {
                let factor = self.expr()?;
                self.expect(',')?;
                let inner = self.node()?;
                MetricSpec::Conformal {
                    factor,
                    inner: Box::new(inner),
                }
            }
            "sphere" | "hyperbolic" => {
                let n = self.dimension()?;
                let mut sign = 1.0;
                let mut names = None;
                if self.at_punct(';') {
                    self.next();
                    if matches!(self.peek().tok, Tok::Ident(_)) {
                        names = Some(self.name_list()?);
                    } else {
                        sign = self.sign()?;
                        if self.at_punct(';') {
                            self.next();
                            names = Some(self.name_list()?);
                        }
                    }
                }
                check_names(&names, n, &head)?;
                if name == "sphere" {
                    MetricSpec::Sphere { n, sign, names }
                } else {
                    MetricSpec::Hyperbolic { n, sign, names }
                }
            }
            "flat" => {
                let n = self.dimension()?;
                let mut signs = None;
                let mut names = None;
                if self.at_punct(';') {
                    self.next();
                    if matches!(self.peek().tok, Tok::Ident(_)) {
                        names = Some(self.name_list()?);
                    } else {
                        let s = self.sign_list()?;
                        if s.len() != n {
                            return Err(Error::DimensionMismatch(format!(
                                "flat({n}) at line {}, column {} given {} signs",
                                head.line,
                                head.col,
                                s.len()
                            )));
                        }
                        signs = Some(s);
                        if self.at_punct(';') {
                            self.next();
                            names = Some(self.name_list()?);
                        }
                    }
                }
                check_names(&names, n, &head)?;
                MetricSpec::Flat { n, signs, names }
            }
            "ppwave" => {
                let key = self.peek().clone();
                if self.ident()? != "H" {
                    return Err(self.error_at(&key, "expected `H=` in ppwave"));
                }
                self.expect('=')?;
                let h = self.expr()?;
                MetricSpec::PpWave { h }
            }
            "catalog" => {
                // entry names may contain '-', so read the raw text
                let start = self.peek().offset;
                while !self.at_punct(')') && self.peek().tok != Tok::End {
                    self.next();
                }
                let end = self.peek().offset;
                let entry = self.src[start..end].trim().to_string();
                let inner = crate::catalog::metric_of(&entry)?;
                MetricSpec::Named {
                    name: entry,
                    inner: Box::new(inner),
                }
            }
            other => {
                return Err(Error::Parse {
                    line: head.line,
                    col: head.col,
                    msg: format!("unknown metric constructor `{other}`"),
                })
            }
        };
        self.expect(')')?;
        Ok(spec)
    }

    fn dimension(&mut self) -> Result<usize> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Num(v) if v >= 1.0 && v.fract() == 0.0 && v <= 64.0 => Ok(v as usize),
            other => Err(self.error_at(&t, format!("expected a dimension, found {}", describe(&other)))),
        }
    }

    fn name_list(&mut self) -> Result<Vec<String>> {
        let mut names = vec![self.ident()?];
        while self.at_punct(',') {
            self.next();
            names.push(self.ident()?);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::DuplicateCoordinate(n.clone()));
            }
        }
        Ok(names)
    }

    fn sign(&mut self) -> Result<f64> {
        let mut s = 1.0;
        if self.at_punct('+') {
            self.next();
        } else if self.at_punct('-') {
            self.next();
            s = -1.0;
        }
        let t = self.next();
        match t.tok.clone() {
            Tok::Num(1.0) => Ok(s),
            other => Err(self.error_at(&t, format!("expected a sign +1 or -1, found {}", describe(&other)))),
        }
    }

    fn sign_list(&mut self) -> Result<Vec<f64>> {
        let mut signs = vec![self.sign()?];
        while self.at_punct(',') {
            self.next();
            signs.push(self.sign()?);
        }
        Ok(signs)
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>> {
        let mut exprs = vec![self.expr()?];
        while self.at_punct(',') {
            self.next();
            exprs.push(self.expr()?);
        }
        Ok(exprs)
    }
}

fn check_names(names: &Option<Vec<String>>, n: usize, head: &Token) -> Result<()> {
    match names {
        Some(list) if list.len() != n => Err(Error::DimensionMismatch(format!(
            "constructor at line {}, column {} has dimension {n} but {} coordinate names",
            head.line,
            head.col,
            list.len()
        ))),
        _ => Ok(()),
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Punct(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

/// Parses a standalone scalar expression. Variables are left unresolved.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses a metric description and resolves every expression against the
/// chart of the node it belongs to.
pub fn parse_metric(text: &str) -> Result<MetricSpec> {
    let mut p = Parser::new(text)?;
    let mut spec = p.node()?;
    p.expect_end()?;
    spec.resolve()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), -4.0);
        let e = parse_expr("2^3^2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 512.0);
        let e = parse_expr("-2^2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), -4.0);
        let e = parse_expr("2*-3 + 12/4/3").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), -5.0);
        let e = parse_expr("2^-1").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 0.5);
        let e = parse_expr("1.5e-3 + 2E2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 200.0015);
    }

    #[test]
    fn error_positions() {
        match parse_expr("1 +\n  * 2") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match parse_expr("foo(x)") {
            Err(Error::UnknownFunction { name, line, col }) => {
                assert_eq!((name.as_str(), line, col), ("foo", 1, 1))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_expr("sin(x, y)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("(x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("x $ y"), Err(Error::Parse { col: 3, .. })));
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(
            parse_metric("diag(x,x;+1,+1;1,1)"),
            Err(Error::DuplicateCoordinate(n)) if n == "x"
        ));
        assert!(matches!(
            parse_metric("diag(x,y;+1;1,1)"),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(parse_metric("diag(x;+1;y)"), Err(Error::UnknownSymbol { .. })));
        assert!(matches!(parse_metric("blob(2)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_metric("sym(x,y;1,0)"), Err(Error::DimensionMismatch(_))));
        assert!(matches!(
            parse_metric("catalog(no-such-entry)"),
            Err(Error::UnknownCatalog(_))
        ));
    }

    #[test]
    fn sugar_forms() {
        let m = parse_metric("flat(3; -1,+1,+1; t,x,y)").unwrap();
        assert_eq!(m.coordinates(), vec!["t", "x", "y"]);
        let m = parse_metric("sphere(3; -1)").unwrap();
        assert_eq!(m.coordinates(), vec!["r", "p1", "p2"]);
        let m = parse_metric("hyperbolic(2; a,b)").unwrap();
        assert_eq!(m.coordinates(), vec!["a", "b"]);
        let m = parse_metric("ppwave(H=x^2-y^2)").unwrap();
        assert_eq!(m.coordinates(), vec!["u", "v", "x", "y"]);
    }
}
