//! S-expression text form.
//!
//! ```text
//! expr     := "(" op expr+ ")" | terminal
//! op       := add | sub | mul | neg | sqrt | sin | cos
//! terminal := x<N> | integer in [-10, 10]
//! ```
//!
//! Any run of whitespace separates tokens on input; printing always emits the
//! canonical single-space form.

use std::fmt;

use thiserror::Error;

use super::{ExprTree, Node, Op, CONST_MAX, CONST_MIN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownOperator(String),
    UnknownSymbol(String),
    ConstantOutOfRange(String),
    Arity {
        op: Op,
        expected: usize,
        found: usize,
    },
    UnexpectedToken(String),
    UnexpectedEnd,
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownOperator(name) => write!(f, "unknown operator `{name}`"),
            ParseErrorKind::UnknownSymbol(sym) => write!(f, "unknown symbol `{sym}`"),
            ParseErrorKind::ConstantOutOfRange(c) => {
                write!(
                    f,
                    "constant out of range: {c} not in [{CONST_MIN}, {CONST_MAX}]"
                )
            }
            ParseErrorKind::Arity {
                op,
                expected,
                found,
            } => {
                write!(
                    f,
                    "operator `{op}` takes {expected} argument(s), got {found}"
                )
            }
            ParseErrorKind::UnexpectedToken(tok) => write!(f, "unexpected token `{tok}`"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::TrailingInput => f.write_str("trailing input after expression"),
        }
    }
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

impl fmt::Display for Token<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Open => f.write_str("("),
            Token::Close => f.write_str(")"),
            Token::Atom(a) => f.write_str(a),
        }
    }
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'(' {
            tokens.push((i, Token::Open));
            i += 1;
        } else if c == b')' {
            tokens.push((i, Token::Close));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && bytes[i] != b'('
                && bytes[i] != b')'
            {
                i += 1;
            }
            tokens.push((start, Token::Atom(&text[start..i])));
        }
    }
    tokens
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
    nodes: Vec<Node>,
}

impl<'a> Parser<'a> {
    fn err(&self, position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }

    fn next(&mut self) -> Result<(usize, Token<'a>), ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.err(self.end, ParseErrorKind::UnexpectedEnd))?;
        self.pos += 1;
        Ok(tok)
    }

    fn peek(&self) -> Option<(usize, Token<'a>)> {
        self.tokens.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<(), ParseError> {
        let (at, tok) = self.next()?;
        match tok {
            Token::Atom(atom) => {
                let node = terminal(atom).map_err(|kind| self.err(at, kind))?;
                self.nodes.push(node);
                Ok(())
            }
            Token::Close => Err(self.err(at, ParseErrorKind::UnexpectedToken(")".into()))),
            Token::Open => {
                let (op_at, op_tok) = self.next()?;
                let op = match op_tok {
                    Token::Atom(name) => Op::from_name(name).ok_or_else(|| {
                        self.err(op_at, ParseErrorKind::UnknownOperator(name.to_string()))
                    })?,
                    other => {
                        return Err(
                            self.err(op_at, ParseErrorKind::UnexpectedToken(other.to_string()))
                        )
                    }
                };
                self.nodes.push(Node::Op(op));
                let mut found = 0;
                loop {
                    match self.peek() {
                        None => return Err(self.err(self.end, ParseErrorKind::UnexpectedEnd)),
                        Some((_, Token::Close)) => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => {
                            self.expr()?;
                            found += 1;
                        }
                    }
                }
                if found != op.arity() {
                    return Err(self.err(
                        op_at,
                        ParseErrorKind::Arity {
                            op,
                            expected: op.arity(),
                            found,
                        },
                    ));
                }
                Ok(())
            }
        }
    }
}

fn terminal(atom: &str) -> Result<Node, ParseErrorKind> {
    if let Some(digits) = atom.strip_prefix('x') {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return digits
                .parse::<u16>()
                .map(Node::Var)
                .map_err(|_| ParseErrorKind::UnknownSymbol(atom.to_string()));
        }
        return Err(ParseErrorKind::UnknownSymbol(atom.to_string()));
    }
    let digits = atom.strip_prefix('-').unwrap_or(atom);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        return match atom.parse::<i64>() {
            Ok(v) if (CONST_MIN as i64..=CONST_MAX as i64).contains(&v) => Ok(Node::Const(v as i8)),
            _ => Err(ParseErrorKind::ConstantOutOfRange(atom.to_string())),
        };
    }
    if Op::from_name(atom).is_some() {
        return Err(ParseErrorKind::UnexpectedToken(atom.to_string()));
    }
    Err(ParseErrorKind::UnknownSymbol(atom.to_string()))
}

pub(super) fn parse(text: &str) -> Result<ExprTree, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(text),
        pos: 0,
        end: text.len(),
        nodes: Vec::new(),
    };
    parser.expr()?;
    if let Some((at, _)) = parser.peek() {
        return Err(parser.err(at, ParseErrorKind::TrailingInput));
    }
    Ok(ExprTree::from_nodes_unchecked(parser.nodes))
}

pub(super) fn write_canonical(nodes: &[Node], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // Stack of remaining-children counts for open operator nodes.
    let mut open: Vec<usize> = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        match *node {
            Node::Op(op) => {
                write!(f, "({op}")?;
                open.push(op.arity());
                continue;
            }
            Node::Var(v) => write!(f, "x{v}")?,
            Node::Const(c) => write!(f, "{c}")?,
        }
        while let Some(remaining) = open.last_mut() {
            *remaining -= 1;
            if *remaining > 0 {
                break;
            }
            open.pop();
            f.write_str(")")?;
        }
    }
    Ok(())
}
