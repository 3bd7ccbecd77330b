use rand::Rng;

use super::{ExprTree, Node, Op, CONST_MAX, CONST_MIN};

/// Tree-building method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    /// Every branch reaches the target height.
    Full,
    /// Terminals may appear at any depth; the target height is an upper bound.
    Grow,
}

/// Ramped half-and-half: the target height is drawn uniformly from
/// `[min_height, max_height]` and the method is `Full` or `Grow` with equal
/// probability. The result always has a height within the range.
pub fn random_tree<R: Rng + ?Sized>(
    rng: &mut R,
    dimension: usize,
    min_height: usize,
    max_height: usize,
) -> ExprTree {
    assert!(
        1 <= min_height && min_height <= max_height,
        "bad height range"
    );
    let height = rng.random_range(min_height..=max_height);
    let method = if rng.random_bool(0.5) {
        InitMethod::Full
    } else {
        InitMethod::Grow
    };
    random_tree_with(rng, dimension, method, min_height, height)
}

/// Builds a tree with the given method and height bounds. `Grow` trees
/// shorter than `min_height` are redrawn.
pub fn random_tree_with<R: Rng + ?Sized>(
    rng: &mut R,
    dimension: usize,
    method: InitMethod,
    min_height: usize,
    max_height: usize,
) -> ExprTree {
    assert!(dimension > 0, "dimension must be positive");
    assert!(
        1 <= min_height && min_height <= max_height,
        "bad height range"
    );
    loop {
        let mut nodes = Vec::new();
        build(rng, dimension, method, 1, max_height, &mut nodes);
        let tree = ExprTree::from_nodes_unchecked(nodes);
        if tree.height() >= min_height {
            return tree;
        }
    }
}

fn build<R: Rng + ?Sized>(
    rng: &mut R,
    dimension: usize,
    method: InitMethod,
    depth: usize,
    max_height: usize,
    out: &mut Vec<Node>,
) {
    let leaf = if depth >= max_height {
        true
    } else {
        match method {
            InitMethod::Full => false,
            InitMethod::Grow => {
                // Variables plus one constant slot compete with the operators.
                let terminals = (dimension + 1) as f64;
                rng.random_bool(terminals / (terminals + Op::ALL.len() as f64))
            }
        }
    };
    if leaf {
        out.push(random_terminal(rng, dimension));
        return;
    }
    let op = Op::ALL[rng.random_range(0..Op::ALL.len())];
    out.push(Node::Op(op));
    for _ in 0..op.arity() {
        build(rng, dimension, method, depth + 1, max_height, out);
    }
}

fn random_terminal<R: Rng + ?Sized>(rng: &mut R, dimension: usize) -> Node {
    let slot = rng.random_range(0..=dimension);
    if slot == dimension {
        Node::Const(rng.random_range(CONST_MIN..=CONST_MAX))
    } else {
        Node::Var(slot as u16)
    }
}
