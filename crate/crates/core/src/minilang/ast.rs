use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Variables read by the expression, first occurrence order, no repeats.
    pub fn vars(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::Var(v) => {
                    if !out.contains(&v.as_str()) {
                        out.push(v);
                    }
                }
                Expr::Unary(_, inner) => walk(inner, out),
                Expr::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Expr::Int(_) | Expr::Bool(_) => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(..) => 6,
            _ => 7,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) if *v < 0 => write!(f, "({v})"),
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Unary(op, inner) => {
                let sym = match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                };
                if inner.precedence() < 6 {
                    write!(f, "{sym}({inner})")
                } else {
                    write!(f, "{sym}{inner}")
                }
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                // comparisons do not chain, so both sides need parens at equal precedence
                let l_paren = l.precedence() < p || (op.is_comparison() && l.precedence() == p);
                let r_paren = r.precedence() <= p;
                if l_paren {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if r_paren {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementKind {
    Read,
    Assign,
    If,
    While,
    Print,
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Read(Vec<String>),
    Assign {
        target: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Vec<usize>,
        else_branch: Vec<usize>,
    },
    While {
        cond: Expr,
        body: Vec<usize>,
    },
    Print(Expr),
    Return(Expr),
}

impl StmtKind {
    pub fn kind(&self) -> StatementKind {
        match self {
            StmtKind::Read(_) => StatementKind::Read,
            StmtKind::Assign { .. } => StatementKind::Assign,
            StmtKind::If { .. } => StatementKind::If,
            StmtKind::While { .. } => StatementKind::While,
            StmtKind::Print(_) => StatementKind::Print,
            StmtKind::Return(_) => StatementKind::Return,
        }
    }

    /// The expression evaluated when the statement executes, if any.
    pub fn expr(&self) -> Option<&Expr> {
        match self {
            StmtKind::Read(_) => None,
            StmtKind::Assign { value, .. } => Some(value),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            StmtKind::Print(e) | StmtKind::Return(e) => Some(e),
        }
    }

    pub fn expr_mut(&mut self) -> Option<&mut Expr> {
        match self {
            StmtKind::Read(_) => None,
            StmtKind::Assign { value, .. } => Some(value),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            StmtKind::Print(e) | StmtKind::Return(e) => Some(e),
        }
    }

    pub fn uses(&self) -> Vec<&str> {
        self.expr().map(Expr::vars).unwrap_or_default()
    }

    pub fn defs(&self) -> Vec<&str> {
        match self {
            StmtKind::Read(vars) => vars.iter().map(String::as_str).collect(),
            StmtKind::Assign { target, .. } => vec![target.as_str()],
            _ => Vec::new(),
        }
    }

    pub fn is_output(&self) -> bool {
        matches!(self, StmtKind::Print(_) | StmtKind::Return(_))
    }

    pub fn is_predicate(&self) -> bool {
        matches!(self, StmtKind::If { .. } | StmtKind::While { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub id: String,
    pub kind: StmtKind,
    /// Index of the governing `if`/`while`, if nested.
    pub parent: Option<usize>,
    pub line: usize,
}

impl Statement {
    /// One-line rendering of the statement head (no nested bodies).
    pub fn head(&self) -> String {
        match &self.kind {
            StmtKind::Read(vars) => format!("read({});", vars.join(", ")),
            StmtKind::Assign { target, value } => format!("{target} = {value};"),
            StmtKind::If { cond, .. } => format!("if ({cond})"),
            StmtKind::While { cond, .. } => format!("while ({cond})"),
            StmtKind::Print(e) => format!("print({e});"),
            StmtKind::Return(e) => format!("return {e};"),
        }
    }
}

/// A parsed program. Statements are stored flat in source (pre-)order;
/// compound statements refer to their bodies by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub(crate) statements: Vec<Statement>,
    pub(crate) top_level: Vec<usize>,
}

impl Program {
    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn top_level(&self) -> &[usize] {
        &self.top_level
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn entry(&self) -> &str {
        &self.statements[self.top_level[0]].id
    }

    pub fn ids(&self) -> Vec<String> {
        self.statements.iter().map(|s| s.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.statements.iter().position(|s| s.id == id)
    }

    pub fn has_output(&self) -> bool {
        self.statements.iter().any(|s| s.kind.is_output())
    }

    /// Replaces the expression of statement `idx` (mutation hook). The
    /// statement layout, and therefore every id, is unchanged.
    pub fn with_expr(&self, idx: usize, expr: Expr) -> Program {
        let mut p = self.clone();
        if let Some(e) = p.statements[idx].kind.expr_mut() {
            *e = expr;
        }
        p
    }

    fn write_block(
        &self,
        f: &mut fmt::Formatter<'_>,
        block: &[usize],
        depth: usize,
    ) -> fmt::Result {
        for &idx in block {
            let s = &self.statements[idx];
            let pad = "    ".repeat(depth);
            match &s.kind {
                StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    writeln!(f, "{pad}{} {{", s.head())?;
                    self.write_block(f, then_branch, depth + 1)?;
                    if else_branch.is_empty() {
                        writeln!(f, "{pad}}}")?;
                    } else {
                        writeln!(f, "{pad}}} else {{")?;
                        self.write_block(f, else_branch, depth + 1)?;
                        writeln!(f, "{pad}}}")?;
                    }
                }
                StmtKind::While { body, .. } => {
                    writeln!(f, "{pad}{} {{", s.head())?;
                    self.write_block(f, body, depth + 1)?;
                    writeln!(f, "{pad}}}")?;
                }
                _ => writeln!(f, "{pad}{}", s.head())?,
            }
        }
        Ok(())
    }
}

/// Canonical source rendering; parsing it yields the same statements.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_block(f, &self.top_level, 0)
    }
}
