use rand::Rng;

use super::random::{random_tree_with, InitMethod};
use super::ExprTree;

/// Height cap for any tree produced by variation.
pub const MAX_HEIGHT: usize = 10;
/// Height bound of the fresh subtree inserted by mutation.
pub const MUTATION_SUBTREE_HEIGHT: usize = 4;

/// Swaps a uniformly chosen subtree of `a` with one of `b`. A child taller
/// than [`MAX_HEIGHT`] is discarded and its parent passes through instead.
pub fn subtree_crossover<R: Rng + ?Sized>(
    rng: &mut R,
    a: &ExprTree,
    b: &ExprTree,
) -> (ExprTree, ExprTree) {
    let at_a = rng.random_range(0..a.len());
    let at_b = rng.random_range(0..b.len());
    let piece_a = &a.nodes()[at_a..a.subtree_end(at_a)];
    let piece_b = &b.nodes()[at_b..b.subtree_end(at_b)];

    let child_a = a.replace_subtree(at_a, piece_b);
    let child_b = b.replace_subtree(at_b, piece_a);
    (
        if child_a.height() > MAX_HEIGHT {
            a.clone()
        } else {
            child_a
        },
        if child_b.height() > MAX_HEIGHT {
            b.clone()
        } else {
            child_b
        },
    )
}

/// Replaces a uniformly chosen subtree with a fresh `Grow` tree of height at
/// most [`MUTATION_SUBTREE_HEIGHT`]. Returns the input unchanged if the
/// result would exceed [`MAX_HEIGHT`].
pub fn subtree_mutation<R: Rng + ?Sized>(
    rng: &mut R,
    tree: &ExprTree,
    dimension: usize,
) -> ExprTree {
    let at = rng.random_range(0..tree.len());
    let fresh = random_tree_with(rng, dimension, InitMethod::Grow, 1, MUTATION_SUBTREE_HEIGHT);
    let child = tree.replace_subtree(at, fresh.nodes());
    if child.height() > MAX_HEIGHT {
        tree.clone()
    } else {
        child
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{random_tree, Op};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A chain of `neg` nodes over `x0` with the given height.
    fn chain(height: usize) -> ExprTree {
        let mut tree = ExprTree::var(0);
        for _ in 1..height {
            tree = ExprTree::apply(Op::Neg, vec![tree]).unwrap();
        }
        tree
    }

    #[test]
    fn crossover_of_terminals_swaps_them() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = ExprTree::var(0);
        let b = ExprTree::constant(7).unwrap();
        let (ca, cb) = subtree_crossover(&mut rng, &a, &b);
        assert_eq!(ca, b);
        assert_eq!(cb, a);
    }

    #[test]
    fn crossover_preserves_node_multiset() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let a = random_tree(&mut rng, 2, 3, 6);
            let b = random_tree(&mut rng, 2, 3, 6);
            let (ca, cb) = subtree_crossover(&mut rng, &a, &b);
            // Heights here never exceed 10, so no parent pass-through.
            assert_eq!(ca.len() + cb.len(), a.len() + b.len());
        }
    }

    #[test]
    fn crossover_bloat_returns_parent() {
        // Two height-10 chains; swapping a deep node of `a` for the root of
        // `b` yields height up to 19, which must be rejected.
        let a = chain(10);
        let b = chain(10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut saw_reject = false;
        for _ in 0..200 {
            let (ca, cb) = subtree_crossover(&mut rng, &a, &b);
            assert!(ca.height() <= MAX_HEIGHT && cb.height() <= MAX_HEIGHT);
            // Chains are uniform, so any rejection shows up as an unchanged parent
            // while the other child has shrunk.
            if ca == a && cb.height() < 10 {
                saw_reject = true;
            }
        }
        assert!(saw_reject);
    }

    #[test]
    fn crossover_bloat_specific_case() {
        // a = (add <height-9 chain> x1): height 10. Swapping the x1 leaf for
        // b's root (height 10) gives height 11 on that branch -> rejected.
        let a = ExprTree::apply(Op::Add, vec![chain(9), ExprTree::var(1)]).unwrap();
        let b = chain(10);
        assert_eq!(a.height(), 10);
        let last = a.len() - 1;
        let child = a.replace_subtree(last, b.nodes());
        assert_eq!(child.height(), 11);
        // Find a seed that picks exactly (last leaf of a, root of b).
        for seed in 0..10_000u64 {
            let mut probe = ChaCha8Rng::seed_from_u64(seed);
            let ia = rand::Rng::random_range(&mut probe, 0..a.len());
            let ib = rand::Rng::random_range(&mut probe, 0..b.len());
            if ia == last && ib == 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (ca, cb) = subtree_crossover(&mut rng, &a, &b);
                assert_eq!(ca, a);
                assert_eq!(cb, ExprTree::var(1));
                return;
            }
        }
        panic!("no seed selected the intended crossover points");
    }

    #[test]
    fn crossover_is_deterministic() {
        let a: ExprTree = "(add (mul x0 x1) (sin 3))".parse().unwrap();
        let b: ExprTree = "(sub (cos x1) (sqrt (neg x0)))".parse().unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..50)
                .map(|_| subtree_crossover(&mut rng, &a, &b))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mutation_of_terminal_replaces_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let out = subtree_mutation(&mut rng, &ExprTree::var(0), 2);
            assert!(out.height() <= MUTATION_SUBTREE_HEIGHT);
        }
    }

    #[test]
    fn mutation_at_height_cap_reverts_when_too_tall() {
        let tree = chain(10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut reverted = 0;
        for _ in 0..500 {
            let out = subtree_mutation(&mut rng, &tree, 2);
            assert!(out.height() <= MAX_HEIGHT);
            if out == tree {
                reverted += 1;
            }
        }
        assert!(reverted > 0);
    }
}
