//! Payoff expression language.
//!
//! Claims are written over the terminal price `S`, discrete fixings `S[i]`
//! (1-based) and the aggregates `AVG`, `MAXF`, `MINF` taken over all
//! fixings. Supported operators: `+ - * / ^` (with `^` binding tighter than
//! unary minus, which binds tighter than `*`/`/`), unary minus, and the
//! functions `max`, `min` (n-ary), `abs`, `exp`, `log`.
//!
//! Examples:
//!
//! ```text
//! max(S - 100, 0)                                vanilla call
//! max(AVG - 95, 0)                               arithmetic-average Asian call
//! max(S-90,0) - 2*max(S-100,0) + max(S-110,0)    butterfly
//! ```

use crate::error::{Error, Result};

/// Aggregate over all fixings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggKind {
    Avg,
    MaxF,
    MinF,
}

impl AggKind {
    pub fn name(&self) -> &'static str {
        match self {
            AggKind::Avg => "AVG",
            AggKind::MaxF => "MAXF",
            AggKind::MinF => "MINF",
        }
    }
}

/// Unary function applied to a subexpression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Abs,
    Exp,
    Log,
}

impl UnaryFn {
    fn name(&self) -> &'static str {
        match self {
            UnaryFn::Abs => "abs",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
        }
    }
}

/// Binary arithmetic operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression tree of a payoff.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Terminal price `S`.
    Terminal,
    /// Fixing reference `S[i]`, 1-based.
    Fixing(usize),
    /// Aggregate over all fixings.
    Agg(AggKind),
    Neg(Box<Expr>),
    Unary(UnaryFn, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
}

impl Expr {
    /// Canonical form: fully parenthesized, lowercase function names.
    pub fn canonical(&self) -> String {
        match self {
            Expr::Num(v) => format!("{v}"),
            Expr::Terminal => "S".to_string(),
            Expr::Fixing(i) => format!("S[{i}]"),
            Expr::Agg(kind) => kind.name().to_string(),
            Expr::Neg(inner) => format!("(-{})", inner.canonical()),
            Expr::Unary(f, inner) => format!("{}({})", f.name(), inner.canonical()),
            Expr::Bin(op, lhs, rhs) => {
                format!("({} {} {})", lhs.canonical(), op.symbol(), rhs.canonical())
            }
            Expr::Max(args) => format!("max({})", Self::join(args)),
            Expr::Min(args) => format!("min({})", Self::join(args)),
        }
    }

    fn join(args: &[Expr]) -> String {
        args.iter()
            .map(Expr::canonical)
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn max_fixing_index(&self) -> usize {
        match self {
            Expr::Fixing(i) => *i,
            Expr::Neg(e) | Expr::Unary(_, e) => e.max_fixing_index(),
            Expr::Bin(_, a, b) => a.max_fixing_index().max(b.max_fixing_index()),
            Expr::Max(args) | Expr::Min(args) => {
                args.iter().map(Expr::max_fixing_index).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    fn collect_aggregates(&self, out: &mut Vec<AggKind>) {
        match self {
            Expr::Agg(kind) => {
                if !out.contains(kind) {
                    out.push(*kind);
                }
            }
            Expr::Neg(e) | Expr::Unary(_, e) => e.collect_aggregates(out),
            Expr::Bin(_, a, b) => {
                a.collect_aggregates(out);
                b.collect_aggregates(out);
            }
            Expr::Max(args) | Expr::Min(args) => {
                for a in args {
                    a.collect_aggregates(out);
                }
            }
            _ => {}
        }
    }

    fn eval(&self, ctx: &EvalCtx) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Terminal => ctx.terminal,
            Expr::Fixing(i) => {
                let idx = *i;
                if idx == 0 || idx > ctx.fixings.len() {
                    return self.eval_err(format!(
                        "fixing index {idx} out of range (have {} fixings)",
                        ctx.fixings.len()
                    ));
                }
                ctx.fixings[idx - 1]
            }
            Expr::Agg(kind) => match ctx.aggregate_override {
                Some(v) => v,
                None => {
                    if ctx.fixings.is_empty() {
                        return self.eval_err("aggregate over empty fixing set".to_string());
                    }
                    match kind {
                        AggKind::Avg => ctx.fixings.iter().sum::<f64>() / ctx.fixings.len() as f64,
                        AggKind::MaxF => ctx.fixings.iter().cloned().fold(f64::MIN, f64::max),
                        AggKind::MinF => ctx.fixings.iter().cloned().fold(f64::MAX, f64::min),
                    }
                }
            },
            Expr::Neg(inner) => -inner.eval(ctx)?,
            Expr::Unary(f, inner) => {
                let x = inner.eval(ctx)?;
                match f {
                    UnaryFn::Abs => x.abs(),
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Log => {
                        if x <= 0.0 {
                            return self.eval_err(format!("log of non-positive value {x}"));
                        }
                        x.ln()
                    }
                }
            }
            Expr::Bin(op, lhs, rhs) => {
                let a = lhs.eval(ctx)?;
                let b = rhs.eval(ctx)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return self.eval_err("division by zero".to_string());
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() {
                            return self.eval_err(format!("{a} ^ {b} is undefined"));
                        }
                        v
                    }
                }
            }
            Expr::Max(args) => {
                let mut best = f64::MIN;
                for a in args {
                    best = best.max(a.eval(ctx)?);
                }
                best
            }
            Expr::Min(args) => {
                let mut best = f64::MAX;
                for a in args {
                    best = best.min(a.eval(ctx)?);
                }
                best
            }
        };
        Ok(v)
    }

    fn eval_err(&self, message: String) -> Result<f64> {
        Err(Error::Eval {
            node: self.canonical(),
            message,
        })
    }
}

struct EvalCtx<'a> {
    terminal: f64,
    fixings: &'a [f64],
    /// When set, every aggregate node evaluates to this value. Used by the
    /// path-dependent chain, where one summary statistic stands in for the
    /// fixing set.
    aggregate_override: Option<f64>,
}

/// A parsed payoff: expression tree plus the fixing arity it requires.
#[derive(Debug, Clone, PartialEq)]
pub struct Payoff {
    ast: Expr,
    /// Largest fixing index referenced via `S[i]` (0 when none).
    pub n_fixings: usize,
    /// Original source text.
    pub source_text: String,
}

impl Payoff {
    /// Parses `text` into a payoff. The fixing arity is the largest index
    /// referenced; aggregates take their length from the fixings supplied at
    /// evaluation time.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = Lexer::tokenize(text)?;
        let ast = Parser {
            tokens,
            cursor: 0,
            len: text.len(),
        }
        .parse()?;
        Ok(Payoff {
            n_fixings: ast.max_fixing_index(),
            ast,
            source_text: text.to_string(),
        })
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// Canonical printable form (fully parenthesized).
    pub fn canonical(&self) -> String {
        self.ast.canonical()
    }

    /// Distinct aggregate kinds appearing in the expression.
    pub fn aggregates(&self) -> Vec<AggKind> {
        let mut out = Vec::new();
        self.ast.collect_aggregates(&mut out);
        out
    }

    /// True when the payoff depends only on the terminal price.
    pub fn is_state_dependent(&self) -> bool {
        self.n_fixings == 0 && self.aggregates().is_empty()
    }

    /// Evaluates the payoff at a terminal price and fixing values.
    /// Aggregates are taken over the supplied fixings (the caller includes
    /// the terminal fixing when the schedule ends at maturity).
    pub fn eval(&self, terminal: f64, fixings: &[f64]) -> Result<f64> {
        if fixings.len() < self.n_fixings {
            return Err(Error::Eval {
                node: self.canonical(),
                message: format!(
                    "payoff requires {} fixings, got {}",
                    self.n_fixings,
                    fixings.len()
                ),
            });
        }
        self.ast.eval(&EvalCtx {
            terminal,
            fixings,
            aggregate_override: None,
        })
    }

    /// Evaluates with every aggregate node pinned to `aggregate`. Requires a
    /// payoff without individual fixing references.
    pub fn eval_with_aggregate(&self, terminal: f64, aggregate: f64) -> Result<f64> {
        if self.n_fixings > 0 {
            return Err(Error::Eval {
                node: self.canonical(),
                message: "aggregate evaluation requires a payoff without S[i] references"
                    .to_string(),
            });
        }
        self.ast.eval(&EvalCtx {
            terminal,
            fixings: &[],
            aggregate_override: Some(aggregate),
        })
    }

    /// Payoff of a portfolio holding both claims.
    pub fn sum(a: &Payoff, b: &Payoff) -> Payoff {
        let ast = Expr::Bin(BinOp::Add, Box::new(a.ast.clone()), Box::new(b.ast.clone()));
        Payoff {
            n_fixings: ast.max_fixing_index(),
            source_text: format!("({}) + ({})", a.source_text, b.source_text),
            ast,
        }
    }
}

/// Discrete monitoring dates: strictly increasing, in `(0, T]`, ending at
/// the maturity.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitoringSchedule {
    pub dates: Vec<f64>,
}

impl MonitoringSchedule {
    pub fn new(dates: Vec<f64>, maturity: f64) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::domain("monitoring schedule must be non-empty"));
        }
        if dates[0] <= 0.0 {
            return Err(Error::domain("monitoring dates must be strictly positive"));
        }
        for w in dates.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::domain(
                    "monitoring dates must be strictly increasing",
                ));
            }
        }
        if *dates.last().unwrap() != maturity {
            return Err(Error::domain(format!(
                "last monitoring date {} must equal maturity {maturity}",
                dates.last().unwrap()
            )));
        }
        Ok(Self { dates })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(Token, usize)>> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while let Some((tok, at)) = lx.next_token()? {
            out.push((tok, at));
        }
        Ok(out)
    }

    fn err(&self, at: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            position: at,
            message: message.into(),
        }
    }

    fn next_token(&mut self) -> Result<Option<(Token, usize)>> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let at = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'[' => Token::LBracket,
            b']' => Token::RBracket,
            b',' => Token::Comma,
            b'0'..=b'9' => return Ok(Some((self.lex_number()?, at))),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok(Some((Token::Ident(ident.to_string()), at)));
            }
            other => return Err(self.err(at, format!("unexpected character `{}`", other as char))),
        };
        self.pos += 1;
        Ok(Some((tok, at)))
    }

    fn lex_number(&mut self) -> Result<Token> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. `2e` followed by `xp`).
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Token::Num)
            .map_err(|_| self.err(start, format!("invalid number literal `{text}`")))
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
    len: usize,
}

impl Parser {
    fn parse(mut self) -> Result<Expr> {
        if self.tokens.is_empty() {
            return Err(Error::Parse {
                position: 0,
                message: "empty payoff expression".to_string(),
            });
        }
        let expr = self.parse_expr()?;
        if let Some((tok, at)) = self.peek_with_pos() {
            return Err(Error::Parse {
                position: at,
                message: format!("unexpected trailing token {tok:?}"),
            });
        }
        Ok(expr)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(t, _)| t)
    }

    fn peek_with_pos(&self) -> Option<(&Token, usize)> {
        self.tokens.get(self.cursor).map(|(t, p)| (t, *p))
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).map(|(t, _)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map(|(_, p)| *p)
            .unwrap_or(self.len)
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<()> {
        let at = self.here();
        match self.advance() {
            Some(ref t) if t == want => Ok(()),
            other => Err(Error::Parse {
                position: at,
                message: format!("expected {what}, got {other:?}"),
            }),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    /// `^` binds tighter than unary minus: `-S^2` is `-(S^2)`.
    fn parse_unary(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.advance();
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.advance();
            // Right-associative; the exponent may carry a unary minus.
            let exp = self.parse_unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let at = self.here();
        match self.advance() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(&Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => self.parse_ident(&name, at),
            other => Err(Error::Parse {
                position: at,
                message: format!("expected a number, identifier or `(`, got {other:?}"),
            }),
        }
    }

    fn parse_ident(&mut self, name: &str, at: usize) -> Result<Expr> {
        match name {
            "S" => {
                if let Some(Token::LBracket) = self.peek() {
                    self.advance();
                    let idx_at = self.here();
                    let idx = match self.advance() {
                        Some(Token::Num(v)) if v.fract() == 0.0 && v >= 1.0 => v as usize,
                        Some(Token::Num(v)) => {
                            return Err(Error::Parse {
                                position: idx_at,
                                message: format!(
                                    "fixing index must be a positive integer, got {v}"
                                ),
                            })
                        }
                        other => {
                            return Err(Error::Parse {
                                position: idx_at,
                                message: format!("expected fixing index, got {other:?}"),
                            })
                        }
                    };
                    self.expect(&Token::RBracket, "`]`")?;
                    Ok(Expr::Fixing(idx))
                } else {
                    Ok(Expr::Terminal)
                }
            }
            "AVG" => Ok(Expr::Agg(AggKind::Avg)),
            "MAXF" => Ok(Expr::Agg(AggKind::MaxF)),
            "MINF" => Ok(Expr::Agg(AggKind::MinF)),
            "max" | "min" => {
                let args = self.parse_args(name)?;
                if args.len() < 2 {
                    return Err(Error::Parse {
                        position: at,
                        message: format!("{name} expects at least 2 arguments"),
                    });
                }
                Ok(if name == "max" {
                    Expr::Max(args)
                } else {
                    Expr::Min(args)
                })
            }
            "abs" | "exp" | "log" => {
                let args = self.parse_args(name)?;
                if args.len() != 1 {
                    return Err(Error::Parse {
                        position: at,
                        message: format!("{name} expects exactly 1 argument"),
                    });
                }
                let f = match name {
                    "abs" => UnaryFn::Abs,
                    "exp" => UnaryFn::Exp,
                    _ => UnaryFn::Log,
                };
                Ok(Expr::Unary(f, Box::new(args.into_iter().next().unwrap())))
            }
            other => Err(Error::Parse {
                position: at,
                message: format!("unknown identifier `{other}`"),
            }),
        }
    }

    fn parse_args(&mut self, name: &str) -> Result<Vec<Expr>> {
        self.expect(&Token::LParen, &format!("`(` after `{name}`"))?;
        let mut args = vec![self.parse_expr()?];
        loop {
            match self.peek() {
                Some(Token::Comma) => {
                    self.advance();
                    args.push(self.parse_expr()?);
                }
                Some(Token::RParen) => {
                    self.advance();
                    return Ok(args);
                }
                _ => {
                    return Err(Error::Parse {
                        position: self.here(),
                        message: format!("expected `,` or `)` in `{name}(...)`"),
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Payoff {
        Payoff::parse(text).unwrap()
    }

    #[test]
    fn call_parses_to_documented_ast() {
        let p = parse("max(S - 100, 0)");
        assert_eq!(p.n_fixings, 0);
        assert_eq!(
            *p.ast(),
            Expr::Max(vec![
                Expr::Bin(
                    BinOp::Sub,
                    Box::new(Expr::Terminal),
                    Box::new(Expr::Num(100.0))
                ),
                Expr::Num(0.0)
            ])
        );
    }

    #[test]
    fn asian_call_parses_to_documented_ast() {
        let p = parse("max(AVG - 95, 0)");
        assert_eq!(p.n_fixings, 0);
        assert_eq!(p.aggregates(), vec![AggKind::Avg]);
        assert_eq!(
            *p.ast(),
            Expr::Max(vec![
                Expr::Bin(
                    BinOp::Sub,
                    Box::new(Expr::Agg(AggKind::Avg)),
                    Box::new(Expr::Num(95.0))
                ),
                Expr::Num(0.0)
            ])
        );
    }

    #[test]
    fn butterfly_parses_to_documented_ast() {
        let p = parse("max(S-90,0) - 2*max(S-100,0) + max(S-110,0)");
        // ((a - b) + c) with b = 2 * max(S-100, 0).
        let leg = |k: f64| {
            Expr::Max(vec![
                Expr::Bin(BinOp::Sub, Box::new(Expr::Terminal), Box::new(Expr::Num(k))),
                Expr::Num(0.0),
            ])
        };
        let expected = Expr::Bin(
            BinOp::Add,
            Box::new(Expr::Bin(
                BinOp::Sub,
                Box::new(leg(90.0)),
                Box::new(Expr::Bin(
                    BinOp::Mul,
                    Box::new(Expr::Num(2.0)),
                    Box::new(leg(100.0)),
                )),
            )),
            Box::new(leg(110.0)),
        );
        assert_eq!(*p.ast(), expected);
        // Spot check against a hand expansion.
        assert_eq!(p.eval(100.0, &[]).unwrap(), 10.0);
        assert_eq!(p.eval(95.0, &[]).unwrap(), 5.0);
        assert_eq!(p.eval(120.0, &[]).unwrap(), 0.0);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(parse("max(S - 100, 0)").eval(110.0, &[]).unwrap(), 10.0);
        let asian = parse("max(AVG - 95, 0)");
        assert_eq!(asian.eval(110.0, &[90.0, 100.0, 110.0]).unwrap(), 5.0);
    }

    #[test]
    fn fixing_references() {
        let p = parse("S[2] - S[1]");
        assert_eq!(p.n_fixings, 2);
        assert_eq!(p.eval(0.0, &[90.0, 120.0]).unwrap(), 30.0);
        assert!(p.eval(0.0, &[90.0]).is_err());
    }

    #[test]
    fn precedence_and_power() {
        // ^ > unary minus > * > +
        let p = parse("-S^2");
        assert_eq!(p.eval(3.0, &[]).unwrap(), -9.0);
        let p = parse("2*S+1");
        assert_eq!(p.eval(3.0, &[]).unwrap(), 7.0);
        let p = parse("2^S^2");
        // Right-associative: 2^(3^2) = 512.
        assert_eq!(p.eval(3.0, &[]).unwrap(), 512.0);
        let p = parse("2^-1");
        assert_eq!(p.eval(0.0, &[]).unwrap(), 0.5);
        let p = parse("(1+2)*S");
        assert_eq!(p.eval(2.0, &[]).unwrap(), 6.0);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match Payoff::parse("max(S - , 0)") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Payoff::parse("").is_err());
        match Payoff::parse("strike - S") {
            Err(Error::Parse { position, message }) => {
                assert_eq!(position, 0);
                assert!(message.contains("unknown identifier"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Payoff::parse("S[0]").is_err());
        assert!(Payoff::parse("S[-1]").is_err());
        assert!(Payoff::parse("S[1.5]").is_err());
        assert!(Payoff::parse("max(S)").is_err());
        assert!(Payoff::parse("abs(S, 1)").is_err());
        assert!(Payoff::parse("S $ 2").is_err());
    }

    #[test]
    fn eval_domain_errors_name_the_node() {
        match parse("log(S - 200)").eval(100.0, &[]) {
            Err(Error::Eval { node, .. }) => assert_eq!(node, "log((S - 200))"),
            other => panic!("expected eval error, got {other:?}"),
        }
        match parse("1 / (S - 100)").eval(100.0, &[]) {
            Err(Error::Eval { node, .. }) => assert_eq!(node, "(1 / (S - 100))"),
            other => panic!("expected eval error, got {other:?}"),
        }
    }

    #[test]
    fn aggregate_over_empty_fixings_is_an_error() {
        assert!(parse("AVG").eval(100.0, &[]).is_err());
    }

    #[test]
    fn eval_with_aggregate_pins_aggregate_nodes() {
        let asian = parse("max(AVG - 95, 0)");
        assert_eq!(asian.eval_with_aggregate(50.0, 100.0).unwrap(), 5.0);
        // S[i] payoffs are rejected.
        assert!(parse("S[1]").eval_with_aggregate(50.0, 100.0).is_err());
    }

    #[test]
    fn sum_combines_sources() {
        let a = parse("max(S - 100, 0)");
        let b = parse("max(100 - S, 0)");
        let s = Payoff::sum(&a, &b);
        assert_eq!(s.eval(108.0, &[]).unwrap(), 8.0);
        assert_eq!(s.eval(91.0, &[]).unwrap(), 9.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(MonitoringSchedule::new(vec![0.25, 0.5, 1.0], 1.0).is_ok());
        assert!(MonitoringSchedule::new(vec![], 1.0).is_err());
        assert!(MonitoringSchedule::new(vec![0.0, 1.0], 1.0).is_err());
        assert!(MonitoringSchedule::new(vec![0.5, 0.5, 1.0], 1.0).is_err());
        assert!(MonitoringSchedule::new(vec![0.5, 0.9], 1.0).is_err());
    }

    #[test]
    fn call_is_one_lipschitz_on_random_pairs() {
        let call = parse("max(S - 100, 0)");
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            1.0 + (state >> 11) as f64 / (1u64 << 53) as f64 * 250.0
        };
        for _ in 0..1000 {
            let (s1, s2) = (next(), next());
            let d = (call.eval(s1, &[]).unwrap() - call.eval(s2, &[]).unwrap()).abs();
            assert!(d <= (s1 - s2).abs() + 1e-12);
        }
    }

    // Random ASTs for the round-trip property. Numerals are positive finite
    // values so structural equality is meaningful (negative literals print
    // as unary minus).
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.001f64..1e6).prop_map(Expr::Num),
            Just(Expr::Terminal),
            (1usize..5).prop_map(Expr::Fixing),
            prop_oneof![
                Just(Expr::Agg(AggKind::Avg)),
                Just(Expr::Agg(AggKind::MaxF)),
                Just(Expr::Agg(AggKind::MinF))
            ],
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    inner.clone(),
                    prop_oneof![Just(UnaryFn::Abs), Just(UnaryFn::Exp), Just(UnaryFn::Log)]
                )
                    .prop_map(|(e, f)| Expr::Unary(f, Box::new(e))),
                (
                    inner.clone(),
                    inner.clone(),
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ]
                )
                    .prop_map(|(a, b, op)| Expr::Bin(op, Box::new(a), Box::new(b))),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Max),
                prop::collection::vec(inner, 2..4).prop_map(Expr::Min),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn canonical_print_round_trips(ast in arb_expr()) {
            let printed = ast.canonical();
            let reparsed = Payoff::parse(&printed).unwrap();
            prop_assert_eq!(reparsed.ast(), &ast, "source: {}", printed);

            // Structural equality implies eval equality; spot-check anyway on
            // a few positive inputs, treating domain errors as equal outcomes.
            let payoff = Payoff {
                n_fixings: ast.max_fixing_index(),
                ast: ast.clone(),
                source_text: printed.clone(),
            };
            for s in [1.0, 57.3, 142.0] {
                let fix = [s, s * 1.1, s * 0.9, s * 1.3, s * 0.7];
                let a = payoff.eval(s, &fix);
                let b = reparsed.eval(s, &fix);
                match (a, b) {
                    (Ok(x), Ok(y)) => prop_assert!(
                        (x == y) || (x - y).abs() <= 1e-12 * x.abs().max(1.0)
                    ),
                    (Err(_), Err(_)) => {}
                    other => prop_assert!(false, "mismatched eval outcomes: {:?}", other),
                }
            }
        }
    }
}
