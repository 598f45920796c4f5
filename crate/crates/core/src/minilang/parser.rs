//! Lexer and recursive-descent parser.
//!
//! ```text
//! program := stmt+
//! stmt    := "read" "(" ident ("," ident)* ")" [";"]
//!          | ident "=" expr [";"]
//!          | "if" "(" expr ")" block ["else" block]
//!          | "while" "(" expr ")" block
//!          | "print" "(" expr ")" [";"]
//!          | "return" expr [";"]
//! block   := "{" stmt* "}" | stmt
//! expr    := or ; or := and ("||" and)* ; and := cmp ("&&" cmp)*
//! cmp     := sum [("=="|"!="|"<"|"<="|">"|">=") sum]
//! sum     := term (("+"|"-") term)* ; term := unary (("*"|"/") unary)*
//! unary   := ("-"|"!") unary | int | "true" | "false" | ident | "(" expr ")"
//! ```
//!
//! `//` starts a comment. Statement ids `S1, S2, ...` follow source order.

use std::collections::HashSet;

use super::ast::{BinOp, Expr, Program, Statement, StmtKind, UnOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "&&", "||", "==", "!=", "<=", ">=", "<", ">", "=", "+", "-", "*", "/", "!", "(", ")", "{", "}",
    ",", ";",
];

const KEYWORDS: &[&str] = &[
    "read", "if", "else", "while", "print", "return", "true", "false",
];

fn lex(source: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        'outer: while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<i64>().map_err(|_| Error::Syntax {
                    line: line_no,
                    column: col,
                    message: format!("integer literal `{text}` out of range"),
                })?;
                out.push(Token {
                    tok: Tok::Int(value),
                    line: line_no,
                    col,
                });
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
                continue;
            }
            for sym in SYMBOLS {
                let n = sym.len();
                if i + n <= chars.len() && chars[i..i + n].iter().copied().eq(sym.chars()) {
                    out.push(Token {
                        tok: Tok::Sym(sym),
                        line: line_no,
                        col,
                    });
                    i += n;
                    continue 'outer;
                }
            }
            return Err(Error::Syntax {
                line: line_no,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ty {
    Int,
    Bool,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    statements: Vec<Statement>,
    defined: HashSet<String>,
}

pub fn parse(source: &str) -> Result<Program> {
    let tokens = lex(source)?;
    if tokens.is_empty() {
        return Err(Error::EmptyProgram);
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        statements: Vec::new(),
        defined: HashSet::new(),
    };
    let mut top_level = Vec::new();
    while p.peek().is_some() {
        top_level.push(p.statement(None)?);
    }
    Ok(Program {
        statements: p.statements,
        top_level,
    })
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.eof())?;
        self.pos += 1;
        Ok(t)
    }

    fn eof(&self) -> Error {
        let (line, column) = self
            .tokens
            .last()
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1));
        Error::Syntax {
            line,
            column,
            message: "unexpected end of input".into(),
        }
    }

    fn err_at(t: &Token, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: t.line,
            column: t.col,
            message: message.into(),
        }
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == sym)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.at_sym(sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<Token> {
        let t = self.next()?;
        match &t.tok {
            Tok::Sym(s) if *s == sym => Ok(t),
            _ => Err(Self::err_at(&t, format!("expected `{sym}`"))),
        }
    }

    fn ident(&mut self) -> Result<(String, Token)> {
        let t = self.next()?;
        match &t.tok {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => Ok((name.clone(), t)),
            _ => Err(Self::err_at(&t, "expected identifier")),
        }
    }

    fn alloc(&mut self, kind: StmtKind, parent: Option<usize>, line: usize) -> usize {
        let idx = self.statements.len();
        self.statements.push(Statement {
            id: format!("S{}", idx + 1),
            kind,
            parent,
            line,
        });
        idx
    }

    fn statement(&mut self, parent: Option<usize>) -> Result<usize> {
        let t = self.next()?;
        let line = t.line;
        let keyword = match &t.tok {
            Tok::Ident(name) => name.clone(),
            _ => return Err(Self::err_at(&t, "expected a statement")),
        };
        match keyword.as_str() {
            "read" => {
                self.expect_sym("(")?;
                let mut vars = vec![self.ident()?.0];
                while self.eat_sym(",") {
                    vars.push(self.ident()?.0);
                }
                self.expect_sym(")")?;
                self.eat_sym(";");
                self.defined.extend(vars.iter().cloned());
                Ok(self.alloc(StmtKind::Read(vars), parent, line))
            }
            "if" => {
                let cond = self.condition(line)?;
                let idx = self.alloc(
                    StmtKind::If {
                        cond,
                        then_branch: Vec::new(),
                        else_branch: Vec::new(),
                    },
                    parent,
                    line,
                );
                let then_b = self.block(idx)?;
                let else_b = if matches!(self.peek(), Some(Token { tok: Tok::Ident(k), .. }) if k == "else")
                {
                    self.pos += 1;
                    self.block(idx)?
                } else {
                    Vec::new()
                };
                if let StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } = &mut self.statements[idx].kind
                {
                    *then_branch = then_b;
                    *else_branch = else_b;
                }
                Ok(idx)
            }
            "while" => {
                let cond = self.condition(line)?;
                let idx = self.alloc(
                    StmtKind::While {
                        cond,
                        body: Vec::new(),
                    },
                    parent,
                    line,
                );
                let b = self.block(idx)?;
                if let StmtKind::While { body, .. } = &mut self.statements[idx].kind {
                    *body = b;
                }
                Ok(idx)
            }
            "print" => {
                self.expect_sym("(")?;
                let e = self.typed_expr(Ty::Int, line)?;
                self.expect_sym(")")?;
                self.eat_sym(";");
                Ok(self.alloc(StmtKind::Print(e), parent, line))
            }
            "return" => {
                let e = self.typed_expr(Ty::Int, line)?;
                self.eat_sym(";");
                Ok(self.alloc(StmtKind::Return(e), parent, line))
            }
            "else" => Err(Self::err_at(&t, "`else` without `if`")),
            k if KEYWORDS.contains(&k) => Err(Self::err_at(&t, format!("unexpected `{k}`"))),
            _ => {
                self.expect_sym("=")?;
                let value = self.typed_expr(Ty::Int, line)?;
                self.eat_sym(";");
                self.defined.insert(keyword.clone());
                Ok(self.alloc(
                    StmtKind::Assign {
                        target: keyword,
                        value,
                    },
                    parent,
                    line,
                ))
            }
        }
    }

    fn condition(&mut self, line: usize) -> Result<Expr> {
        self.expect_sym("(")?;
        let e = self.typed_expr(Ty::Bool, line)?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn block(&mut self, parent: usize) -> Result<Vec<usize>> {
        if self.eat_sym("{") {
            let mut body = Vec::new();
            while !self.at_sym("}") {
                if self.peek().is_none() {
                    return Err(self.eof());
                }
                body.push(self.statement(Some(parent))?);
            }
            self.expect_sym("}")?;
            Ok(body)
        } else {
            Ok(vec![self.statement(Some(parent))?])
        }
    }

    fn typed_expr(&mut self, want: Ty, line: usize) -> Result<Expr> {
        let (e, ty) = self.or()?;
        if ty != want {
            return Err(Error::Type {
                line,
                message: format!("expected {want:?} expression, found {ty:?}: `{e}`"),
            });
        }
        Ok(e)
    }

    fn binary_chain(
        &mut self,
        ops: &[(&'static str, BinOp)],
        operand: fn(&mut Self) -> Result<(Expr, Ty)>,
    ) -> Result<(Expr, Ty)> {
        let (mut lhs, mut lty) = operand(self)?;
        'outer: loop {
            for &(sym, op) in ops {
                if self.at_sym(sym) {
                    let t = self.next()?;
                    let (rhs, rty) = operand(self)?;
                    lty = check_binary(op, lty, rty, &t)?;
                    lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
                    continue 'outer;
                }
            }
            return Ok((lhs, lty));
        }
    }

    fn or(&mut self) -> Result<(Expr, Ty)> {
        self.binary_chain(&[("||", BinOp::Or)], Self::and)
    }

    fn and(&mut self) -> Result<(Expr, Ty)> {
        self.binary_chain(&[("&&", BinOp::And)], Self::comparison)
    }

    fn comparison(&mut self) -> Result<(Expr, Ty)> {
        const OPS: &[(&str, BinOp)] = &[
            ("==", BinOp::Eq),
            ("!=", BinOp::Ne),
            ("<=", BinOp::Le),
            (">=", BinOp::Ge),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ];
        let (lhs, lty) = self.sum()?;
        for &(sym, op) in OPS {
            if self.at_sym(sym) {
                let t = self.next()?;
                let (rhs, rty) = self.sum()?;
                let ty = check_binary(op, lty, rty, &t)?;
                return Ok((Expr::Binary(op, Box::new(lhs), Box::new(rhs)), ty));
            }
        }
        Ok((lhs, lty))
    }

    fn sum(&mut self) -> Result<(Expr, Ty)> {
        self.binary_chain(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::term)
    }

    fn term(&mut self) -> Result<(Expr, Ty)> {
        self.binary_chain(&[("*", BinOp::Mul), ("/", BinOp::Div)], Self::unary)
    }

    fn unary(&mut self) -> Result<(Expr, Ty)> {
        let t = self.next()?;
        match &t.tok {
            Tok::Sym("-") => {
                let (inner, ty) = self.unary()?;
                if ty != Ty::Int {
                    return Err(Self::err_at(&t, "unary `-` needs an integer operand"));
                }
                Ok(match inner {
                    Expr::Int(v) => (Expr::Int(v.wrapping_neg()), Ty::Int),
                    other => (Expr::Unary(UnOp::Neg, Box::new(other)), Ty::Int),
                })
            }
            Tok::Sym("!") => {
                let (inner, ty) = self.unary()?;
                if ty != Ty::Bool {
                    return Err(Self::err_at(&t, "`!` needs a boolean operand"));
                }
                Ok((Expr::Unary(UnOp::Not, Box::new(inner)), Ty::Bool))
            }
            Tok::Sym("(") => {
                let e = self.or()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Int(v) => Ok((Expr::Int(*v), Ty::Int)),
            Tok::Ident(name) if name == "true" => Ok((Expr::Bool(true), Ty::Bool)),
            Tok::Ident(name) if name == "false" => Ok((Expr::Bool(false), Ty::Bool)),
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                if !self.defined.contains(name) {
                    return Err(Error::UseBeforeDefinition {
                        name: name.clone(),
                        line: t.line,
                        column: t.col,
                    });
                }
                Ok((Expr::Var(name.clone()), Ty::Int))
            }
            _ => Err(Self::err_at(&t, "expected an expression")),
        }
    }
}

fn check_binary(op: BinOp, l: Ty, r: Ty, at: &Token) -> Result<Ty> {
    let ok = if op.is_logical() {
        l == Ty::Bool && r == Ty::Bool
    } else if matches!(op, BinOp::Eq | BinOp::Ne) {
        l == r
    } else {
        l == Ty::Int && r == Ty::Int
    };
    if !ok {
        return Err(Parser::err_at(
            at,
            format!("operator `{}` cannot combine {l:?} and {r:?}", op.symbol()),
        ));
    }
    Ok(if op.is_logical() || op.is_comparison() {
        Ty::Bool
    } else {
        Ty::Int
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::ast::StatementKind;

    #[test]
    fn empty_source_has_no_statements() {
        assert!(matches!(parse(""), Err(Error::EmptyProgram)));
        assert!(matches!(parse("  // nothing\n"), Err(Error::EmptyProgram)));
    }

    #[test]
    fn undefined_variable_is_rejected() {
        match parse("x = y") {
            Err(Error::UseBeforeDefinition { name, line, column }) => {
                assert_eq!((name.as_str(), line, column), ("y", 1, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("read(a);\nif (a > 0 { print(a); }") {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_errors() {
        assert!(matches!(
            parse("read(a); if (a) { print(a); }"),
            Err(Error::Type { .. })
        ));
        assert!(parse("read(a); x = a > 1;").is_err());
        assert!(parse("read(a); print(a > 1);").is_err());
    }

    #[test]
    fn ids_follow_source_order_with_nesting() {
        let p = parse(
            "read(n);\ni = 0;\nwhile (i < n) {\n  if (i == 2) { print(i); } else print(0);\n  i = i + 1;\n}\nreturn i;",
        )
        .unwrap();
        let kinds: Vec<_> = p.statements().iter().map(|s| s.kind.kind()).collect();
        assert_eq!(
            kinds,
            vec![
                StatementKind::Read,
                StatementKind::Assign,
                StatementKind::While,
                StatementKind::If,
                StatementKind::Print,
                StatementKind::Print,
                StatementKind::Assign,
                StatementKind::Return
            ]
        );
        assert_eq!(p.statements()[4].parent, Some(3));
        assert_eq!(p.statements()[6].parent, Some(2));
        assert_eq!(p.statements()[7].id, "S8");
        assert_eq!(p.top_level(), &[0, 1, 2, 7]);
    }

    #[test]
    fn render_then_parse_is_identity() {
        let src = "read(a, b);\nx = -3 * (a - b) - (a - (b - 1));\nif (!(a > b) || a == -1 && b != 0) { x = a / (b * 2); } else { while (x > 0) x = x - 1; }\nreturn x;";
        let p = parse(src).unwrap();
        let again = parse(&p.to_string()).unwrap();
        let k1: Vec<_> = p.statements().iter().map(|s| &s.kind).collect();
        let k2: Vec<_> = again.statements().iter().map(|s| &s.kind).collect();
        assert_eq!(k1, k2);
    }
}
