//! Expression-tree genotype over the primitive set
//! `{add, sub, mul, neg, sqrt, sin, cos}` with variable and integer-constant
//! terminals.
//!
//! Trees are stored as a flat prefix-order node list. A subtree always
//! occupies a contiguous slice, which keeps crossover and mutation down to
//! a splice.

mod parse;
mod random;
mod variation;

pub use parse::{ParseError, ParseErrorKind};
pub use random::{random_tree, random_tree_with, InitMethod};
pub use variation::{subtree_crossover, subtree_mutation, MAX_HEIGHT, MUTATION_SUBTREE_HEIGHT};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Smallest integer constant a tree may hold.
pub const CONST_MIN: i8 = -10;
/// Largest integer constant a tree may hold.
pub const CONST_MAX: i8 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("constant out of range: {0} not in [-10, 10]")]
    ConstantOutOfRange(i64),
    #[error("operator `{op}` takes {expected} argument(s), got {found}")]
    Arity {
        op: Op,
        expected: usize,
        found: usize,
    },
    #[error("malformed node sequence")]
    Malformed,
    #[error("variable x{index} out of range for dimension {dimension}")]
    VariableOutOfRange { index: usize, dimension: usize },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Neg,
    Sqrt,
    Sin,
    Cos,
}

impl Op {
    pub const ALL: [Op; 7] = [
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Neg,
        Op::Sqrt,
        Op::Sin,
        Op::Cos,
    ];

    pub fn arity(self) -> usize {
        match self {
            Op::Add | Op::Sub | Op::Mul => 2,
            Op::Neg | Op::Sqrt | Op::Sin | Op::Cos => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Neg => "neg",
            Op::Sqrt => "sqrt",
            Op::Sin => "sin",
            Op::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.name() == name)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Op(Op),
    Var(u16),
    Const(i8),
}

impl Node {
    pub fn arity(self) -> usize {
        match self {
            Node::Op(op) => op.arity(),
            Node::Var(_) | Node::Const(_) => 0,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.arity() == 0
    }
}

/// Box-shaped search space `[lower, upper]^dimension`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
    pub dimension: usize,
}

impl Domain {
    pub fn new(lower: f64, upper: f64, dimension: usize) -> Result<Self, ExprError> {
        let domain = Domain {
            lower,
            upper,
            dimension,
        };
        domain.validate()?;
        Ok(domain)
    }

    pub fn validate(&self) -> Result<(), ExprError> {
        if !(self.lower.is_finite() && self.upper.is_finite()) || self.lower >= self.upper {
            return Err(ExprError::InvalidDomain(format!(
                "need finite lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if self.dimension == 0 {
            return Err(ExprError::InvalidDomain(
                "dimension must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The 2-D `[-5, 5]^2` box functions are evolved on.
    pub fn evolution_default() -> Self {
        Domain {
            lower: -5.0,
            upper: 5.0,
            dimension: 2,
        }
    }

    pub fn with_dimension(self, dimension: usize) -> Self {
        Domain { dimension, ..self }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }

    pub fn clamp_point(&self, point: &mut [f64]) {
        for x in point.iter_mut() {
            *x = self.clamp(*x);
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dimension && point.iter().all(|&x| x >= self.lower && x <= self.upper)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dimension)
            .map(|_| rng.random_range(self.lower..=self.upper))
            .collect()
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::evolution_default()
    }
}

/// An expression tree in prefix order. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExprTree {
    nodes: Vec<Node>,
}

impl ExprTree {
    /// Builds a tree from a prefix-order node list, checking arity and
    /// constant ranges.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self, ExprError> {
        let mut open = 1usize;
        for (i, node) in nodes.iter().enumerate() {
            if open == 0 {
                return Err(ExprError::Malformed);
            }
            if let Node::Const(c) = *node {
                if !(CONST_MIN..=CONST_MAX).contains(&c) {
                    return Err(ExprError::ConstantOutOfRange(c as i64));
                }
            }
            open = open - 1 + node.arity();
            if open == 0 && i + 1 != nodes.len() {
                return Err(ExprError::Malformed);
            }
        }
        if open != 0 {
            return Err(ExprError::Malformed);
        }
        Ok(ExprTree { nodes })
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Self {
        debug_assert!(ExprTree::from_nodes(nodes.clone()).is_ok());
        ExprTree { nodes }
    }

    pub fn var(index: usize) -> Self {
        ExprTree {
            nodes: vec![Node::Var(index as u16)],
        }
    }

    pub fn constant(value: i64) -> Result<Self, ExprError> {
        if !(CONST_MIN as i64..=CONST_MAX as i64).contains(&value) {
            return Err(ExprError::ConstantOutOfRange(value));
        }
        Ok(ExprTree {
            nodes: vec![Node::Const(value as i8)],
        })
    }

    pub fn apply(op: Op, children: Vec<ExprTree>) -> Result<Self, ExprError> {
        if children.len() != op.arity() {
            return Err(ExprError::Arity {
                op,
                expected: op.arity(),
                found: children.len(),
            });
        }
        let mut nodes = vec![Node::Op(op)];
        for child in children {
            nodes.extend(child.nodes);
        }
        Ok(ExprTree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes on the longest root-to-leaf path; a lone terminal has
    /// height 1.
    pub fn height(&self) -> usize {
        let mut stack: Vec<usize> = Vec::with_capacity(16);
        for node in self.nodes.iter().rev() {
            let h = match node.arity() {
                0 => 1,
                n => {
                    let mut tallest = 0;
                    for _ in 0..n {
                        tallest = tallest.max(stack.pop().expect("valid prefix tree"));
                    }
                    tallest + 1
                }
            };
            stack.push(h);
        }
        stack.pop().unwrap_or(0)
    }

    /// Exclusive end index of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        subtree_end(&self.nodes, start)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(i) => Some(*i as usize),
                _ => None,
            })
            .max()
    }

    pub fn check_dimension(&self, dimension: usize) -> Result<(), ExprError> {
        match self.max_var() {
            Some(index) if index >= dimension => {
                Err(ExprError::VariableOutOfRange { index, dimension })
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the tree at `point`. `sqrt` acts on the absolute value of its
    /// argument, so every operator is total; overflow may still yield
    /// non-finite values, which are returned as is.
    ///
    /// Panics if `point` is shorter than `max_var() + 1`.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        let mut pos = 0;
        eval_from(&self.nodes, &mut pos, point)
    }

    /// Returns a copy with the subtree at `at` replaced by `replacement`.
    pub(crate) fn replace_subtree(&self, at: usize, replacement: &[Node]) -> ExprTree {
        let end = self.subtree_end(at);
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - at) + replacement.len());
        nodes.extend_from_slice(&self.nodes[..at]);
        nodes.extend_from_slice(replacement);
        nodes.extend_from_slice(&self.nodes[end..]);
        ExprTree { nodes }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse(text)
    }
}

pub(crate) fn subtree_end(nodes: &[Node], start: usize) -> usize {
    let mut open = 1usize;
    let mut i = start;
    while open > 0 {
        open = open - 1 + nodes[i].arity();
        i += 1;
    }
    i
}

fn eval_from(nodes: &[Node], pos: &mut usize, x: &[f64]) -> f64 {
    let node = nodes[*pos];
    *pos += 1;
    match node {
        Node::Var(i) => x[i as usize],
        Node::Const(c) => c as f64,
        Node::Op(op) => match op {
            Op::Add => {
                let a = eval_from(nodes, pos, x);
                a + eval_from(nodes, pos, x)
            }
            Op::Sub => {
                let a = eval_from(nodes, pos, x);
                a - eval_from(nodes, pos, x)
            }
            Op::Mul => {
                let a = eval_from(nodes, pos, x);
                a * eval_from(nodes, pos, x)
            }
            Op::Neg => -eval_from(nodes, pos, x),
            Op::Sqrt => eval_from(nodes, pos, x).abs().sqrt(),
            Op::Sin => eval_from(nodes, pos, x).sin(),
            Op::Cos => eval_from(nodes, pos, x).cos(),
        },
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        parse::write_canonical(&self.nodes, f)
    }
}

impl FromStr for ExprTree {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse(s)
    }
}

impl Serialize for ExprTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExprTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
