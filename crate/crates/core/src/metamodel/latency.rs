//! Latency values: plain cycle counts or small arithmetic expressions that
//! are evaluated per access at simulation time.

use std::fmt;

/// A latency in clock cycles, either fixed or an expression over the
/// identifiers `imm0..immN`, `num_reads`, `num_writes` and `data_size` with
/// integer arithmetic (`+ - * /`), `min`, `max` and parentheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatencySpec {
    Cycles(u64),
    Expr(LatencyExpr),
}

impl LatencySpec {
    /// Parse either an integer or an expression string. Expressions are
    /// validated here so bad ones are rejected at graph build time.
    pub fn parse(text: &str) -> Result<LatencySpec, LatencyError> {
        let trimmed = text.trim();
        if let Ok(n) = trimmed.parse::<u64>() {
            return Ok(LatencySpec::Cycles(n));
        }
        LatencyExpr::parse(trimmed).map(LatencySpec::Expr)
    }

    pub fn fixed(cycles: u64) -> LatencySpec {
        LatencySpec::Cycles(cycles)
    }

    /// Evaluate against an access context. Fixed latencies ignore context.
    pub fn eval(&self, ctx: &EvalContext) -> Result<u64, LatencyError> {
        match self {
            LatencySpec::Cycles(n) => Ok(*n),
            LatencySpec::Expr(e) => {
                let v = e.eval(ctx)?;
                u64::try_from(v).map_err(|_| LatencyError::NegativeResult(v))
            }
        }
    }
}

impl fmt::Display for LatencySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatencySpec::Cycles(n) => write!(f, "{n}"),
            LatencySpec::Expr(e) => write!(f, "{}", e.source),
        }
    }
}

/// Values an expression may reference during evaluation.
#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    pub immediates: Vec<i64>,
    pub num_reads: i64,
    pub num_writes: i64,
    pub data_size: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatencyError {
    Syntax { pos: usize, message: String },
    UnknownIdentifier(String),
    ImmediateOutOfRange(usize),
    DivisionByZero,
    NegativeResult(i64),
}

impl fmt::Display for LatencyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatencyError::Syntax { pos, message } => {
                write!(f, "latency expression syntax error at byte {pos}: {message}")
            }
            LatencyError::UnknownIdentifier(id) => {
                write!(f, "unknown identifier `{id}` in latency expression")
            }
            LatencyError::ImmediateOutOfRange(k) => {
                write!(f, "latency expression references imm{k} but the instruction has fewer immediates")
            }
            LatencyError::DivisionByZero => write!(f, "division by zero in latency expression"),
            LatencyError::NegativeResult(v) => {
                write!(f, "latency expression evaluated to negative value {v}")
            }
        }
    }
}

impl std::error::Error for LatencyError {}

/// A parsed expression; keeps its source text for round-tripping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyExpr {
    source: String,
    root: Node,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Const(i64),
    Imm(usize),
    NumReads,
    NumWrites,
    DataSize,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
    Neg(Box<Node>),
}

impl LatencyExpr {
    pub fn parse(text: &str) -> Result<LatencyExpr, LatencyError> {
        let mut p = Parser {
            bytes: text.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(LatencyError::Syntax {
                pos: p.pos,
                message: "trailing input".into(),
            });
        }
        Ok(LatencyExpr {
            source: text.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, ctx: &EvalContext) -> Result<i64, LatencyError> {
        eval_node(&self.root, ctx)
    }
}

fn eval_node(n: &Node, ctx: &EvalContext) -> Result<i64, LatencyError> {
    Ok(match n {
        Node::Const(v) => *v,
        Node::Imm(k) => *ctx
            .immediates
            .get(*k)
            .ok_or(LatencyError::ImmediateOutOfRange(*k))?,
        Node::NumReads => ctx.num_reads,
        Node::NumWrites => ctx.num_writes,
        Node::DataSize => ctx.data_size,
        Node::Add(a, b) => eval_node(a, ctx)?.wrapping_add(eval_node(b, ctx)?),
        Node::Sub(a, b) => eval_node(a, ctx)?.wrapping_sub(eval_node(b, ctx)?),
        Node::Mul(a, b) => eval_node(a, ctx)?.wrapping_mul(eval_node(b, ctx)?),
        Node::Div(a, b) => {
            let d = eval_node(b, ctx)?;
            if d == 0 {
                return Err(LatencyError::DivisionByZero);
            }
            eval_node(a, ctx)?.wrapping_div(d)
        }
        Node::Min(a, b) => eval_node(a, ctx)?.min(eval_node(b, ctx)?),
        Node::Max(a, b) => eval_node(a, ctx)?.max(eval_node(b, ctx)?),
        Node::Neg(a) => -eval_node(a, ctx)?,
    })
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node, LatencyError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, LatencyError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, LatencyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.factor()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(LatencyError::Syntax {
                        pos: self.pos,
                        message: "expected `)`".into(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(LatencyError::Syntax {
                pos: self.pos,
                message: "expected number, identifier or `(`".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<Node, LatencyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<i64>()
            .map(Node::Const)
            .map_err(|_| LatencyError::Syntax {
                pos: start,
                message: "integer literal out of range".into(),
            })
    }

    fn identifier(&mut self) -> Result<Node, LatencyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match name {
            "num_reads" => Ok(Node::NumReads),
            "num_writes" => Ok(Node::NumWrites),
            "data_size" => Ok(Node::DataSize),
            "min" | "max" => {
                if self.peek() != Some(b'(') {
                    return Err(LatencyError::Syntax {
                        pos: self.pos,
                        message: format!("expected `(` after `{name}`"),
                    });
                }
                self.pos += 1;
                let a = self.expr()?;
                if self.peek() != Some(b',') {
                    return Err(LatencyError::Syntax {
                        pos: self.pos,
                        message: "expected `,`".into(),
                    });
                }
                self.pos += 1;
                let b = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(LatencyError::Syntax {
                        pos: self.pos,
                        message: "expected `)`".into(),
                    });
                }
                self.pos += 1;
                Ok(if name == "min" {
                    Node::Min(Box::new(a), Box::new(b))
                } else {
                    Node::Max(Box::new(a), Box::new(b))
                })
            }
            _ => {
                if let Some(idx) = name.strip_prefix("imm") {
                    if let Ok(k) = idx.parse::<usize>() {
                        return Ok(Node::Imm(k));
                    }
                }
                Err(LatencyError::UnknownIdentifier(name.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> EvalContext {
        EvalContext {
            immediates: vec![7, -3],
            num_reads: 2,
            num_writes: 1,
            data_size: 64,
        }
    }

    #[test]
    fn fixed_cycles() {
        let l = LatencySpec::parse("3").unwrap();
        assert_eq!(l, LatencySpec::Cycles(3));
        assert_eq!(l.eval(&EvalContext::default()).unwrap(), 3);
    }

    #[test]
    fn expression_arithmetic() {
        let l = LatencySpec::parse("2 + data_size / 32").unwrap();
        assert_eq!(l.eval(&ctx()).unwrap(), 4);
        let l = LatencySpec::parse("max(1, imm0 - 4) * num_reads").unwrap();
        assert_eq!(l.eval(&ctx()).unwrap(), 6);
        let l = LatencySpec::parse("min(num_writes, 5)").unwrap();
        assert_eq!(l.eval(&ctx()).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_syntax_and_unknowns() {
        assert!(matches!(
            LatencySpec::parse("2 +"),
            Err(LatencyError::Syntax { .. })
        ));
        assert!(matches!(
            LatencySpec::parse("foo + 1"),
            Err(LatencyError::UnknownIdentifier(_))
        ));
        assert!(matches!(
            LatencySpec::parse("min(1)"),
            Err(LatencyError::Syntax { .. })
        ));
    }

    #[test]
    fn negative_result_is_an_error() {
        let l = LatencySpec::parse("imm1").unwrap();
        assert!(matches!(l.eval(&ctx()), Err(LatencyError::NegativeResult(-3))));
        let l = LatencySpec::parse("1 / (num_writes - 1)").unwrap();
        assert!(matches!(l.eval(&ctx()), Err(LatencyError::DivisionByZero)));
    }

    #[test]
    fn missing_immediate_is_an_error() {
        let l = LatencySpec::parse("imm5").unwrap();
        assert!(matches!(
            l.eval(&ctx()),
            Err(LatencyError::ImmediateOutOfRange(5))
        ));
    }
}
