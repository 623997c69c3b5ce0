//! Planar rooted trees and the operators they compile to.
//!
//! A tree here always has an implicit root vertex with exactly one child; the
//! stored structure is the subtree above that edge. Leaves are real vertices.
//! Internal vertices carry an arity (number of children, at least 1) and each
//! one stands for an operation of that arity.
//!
//! Compiling a tree against a family of operations produces the multimap
//! obtained by grafting: the two-vertex tree is the identity and an internal
//! vertex applies its operation to the tensor product of its children, with
//! Koszul signs generated mechanically.
//!
//! A power of a coderivation expands over trees with a signed multiplicity:
//! each tree contributes once per admissible application order of its
//! vertices (children before parents), and swapping two disjoint odd
//! operations flips the sign. [`signed_order_count`] computes that weight, so
//! `sum over trees of weight * compiled operator` reproduces the length-one
//! output block of the corresponding coderivation power exactly.

use crate::graded::{compose_tensor, GradedError, GradedSpace, MultiMap};
use crate::exact::{int, Scalar};
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("no operation of arity {0} was supplied")]
    MissingArity(usize),
    #[error("operation of arity {arity} acts on the wrong space or has arity {found}")]
    OperationMismatch { arity: usize, found: usize },
    #[error(transparent)]
    Graded(#[from] GradedError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Node {
    Leaf,
    Internal(Vec<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlanarTree {
    top: Node,
}

impl PlanarTree {
    pub fn new(top: Node) -> Self {
        PlanarTree { top }
    }

    pub fn top(&self) -> &Node {
        &self.top
    }

    pub fn leaves(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf => 1,
                Node::Internal(cs) => cs.iter().map(go).sum(),
            }
        }
        go(&self.top)
    }

    pub fn internal_vertices(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf => 0,
                Node::Internal(cs) => 1 + cs.iter().map(go).sum::<usize>(),
            }
        }
        go(&self.top)
    }

    /// Vertex counts keyed by arity.
    pub fn arity_profile(&self) -> BTreeMap<usize, usize> {
        fn go(n: &Node, acc: &mut BTreeMap<usize, usize>) {
            if let Node::Internal(cs) = n {
                *acc.entry(cs.len()).or_insert(0) += 1;
                for c in cs {
                    go(c, acc);
                }
            }
        }
        let mut acc = BTreeMap::new();
        go(&self.top, &mut acc);
        acc
    }

    pub fn unary_count(&self) -> usize {
        self.arity_profile().get(&1).copied().unwrap_or(0)
    }

    pub fn binary_count(&self) -> usize {
        self.arity_profile().get(&2).copied().unwrap_or(0)
    }

    /// Degree of the compiled operator when every vertex operation has
    /// degree one on the shifted space: one per internal vertex.
    pub fn shifted_degree(&self) -> i64 {
        self.internal_vertices() as i64
    }

    /// Degree in the unshifted convention, where an arity-k operation has
    /// degree 2 - k: the sum of 2 - arity over internal vertices.
    pub fn unshifted_degree(&self) -> i64 {
        self.arity_profile()
            .iter()
            .map(|(k, count)| (2 - *k as i64) * *count as i64)
            .sum()
    }

    /// Canonical text form: `*` for a leaf, `u(...)` unary, `b(...)` binary,
    /// `v{k}(...)` for arity k >= 3.
    pub fn serialize(&self) -> String {
        fn go(n: &Node, out: &mut String) {
            match n {
                Node::Leaf => out.push('*'),
                Node::Internal(cs) => {
                    match cs.len() {
                        1 => out.push('u'),
                        2 => out.push('b'),
                        k => out.push_str(&format!("v{k}")),
                    }
                    out.push('(');
                    for (i, c) in cs.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        go(c, out);
                    }
                    out.push(')');
                }
            }
        }
        let mut s = String::new();
        go(&self.top, &mut s);
        s
    }
}

/// All trees with `leaves` leaves, `unary` unary and `binary` binary internal
/// vertices and no other arities. Nonempty only when `leaves = binary + 1`.
pub fn enumerate_ub(leaves: usize, unary: usize, binary: usize) -> Vec<PlanarTree> {
    fn go(l: usize, u: usize, b: usize) -> Vec<Node> {
        let mut out = Vec::new();
        if l == 1 && u == 0 && b == 0 {
            out.push(Node::Leaf);
        }
        if l == 0 {
            return out;
        }
        if u >= 1 {
            for s in go(l, u - 1, b) {
                out.push(Node::Internal(vec![s]));
            }
        }
        if b >= 1 {
            for l1 in 1..l {
                for u1 in 0..=u {
                    for b1 in 0..b {
                        for s1 in go(l1, u1, b1) {
                            for s2 in go(l - l1, u - u1, b - 1 - b1) {
                                out.push(Node::Internal(vec![s1.clone(), s2]));
                            }
                        }
                    }
                }
            }
        }
        out
    }
    go(leaves, unary, binary).into_iter().map(PlanarTree::new).collect()
}

/// All trees with `leaves` leaves and exactly `vertices` internal vertices of
/// any arity >= 1.
pub fn enumerate_arity(leaves: usize, vertices: usize) -> Vec<PlanarTree> {
    fn compositions(total: usize, parts: usize, min: usize) -> Vec<Vec<usize>> {
        if parts == 0 {
            return if total == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        if total < min {
            return out;
        }
        for first in min..=(total - min * (parts - 1)) {
            for mut rest in compositions(total - first, parts - 1, min) {
                let mut v = vec![first];
                v.append(&mut rest);
                out.push(v);
            }
        }
        out
    }
    fn go(l: usize, n: usize) -> Vec<Node> {
        if n == 0 {
            return if l == 1 { vec![Node::Leaf] } else { vec![] };
        }
        let mut out = Vec::new();
        for k in 1..=l {
            for leaf_split in compositions(l, k, 1) {
                for vert_split in compositions(n - 1, k, 0) {
                    let child_sets: Vec<Vec<Node>> = leaf_split
                        .iter()
                        .zip(&vert_split)
                        .map(|(&li, &ni)| go(li, ni))
                        .collect();
                    if child_sets.iter().any(|s| s.is_empty()) {
                        continue;
                    }
                    let mut stack: Vec<Vec<Node>> = vec![vec![]];
                    for set in &child_sets {
                        let mut next = Vec::new();
                        for prefix in &stack {
                            for choice in set {
                                let mut p = prefix.clone();
                                p.push(choice.clone());
                                next.push(p);
                            }
                        }
                        stack = next;
                    }
                    for children in stack {
                        out.push(Node::Internal(children));
                    }
                }
            }
        }
        out
    }
    go(leaves, vertices).into_iter().map(PlanarTree::new).collect()
}

/// Grafts the supplied operations along the tree. All operations must act on
/// the same space; the leaf count of the tree becomes the arity of the result.
pub fn compile_operator(
    tree: &PlanarTree,
    ops: &BTreeMap<usize, MultiMap>,
    space: &GradedSpace,
) -> Result<MultiMap, TreeError> {
    for (k, op) in ops {
        if op.arity() != *k || op.domain() != space || op.codomain() != space {
            return Err(TreeError::OperationMismatch {
                arity: *k,
                found: op.arity(),
            });
        }
    }
    fn go(
        node: &Node,
        ops: &BTreeMap<usize, MultiMap>,
        space: &GradedSpace,
    ) -> Result<MultiMap, TreeError> {
        match node {
            Node::Leaf => Ok(MultiMap::identity(space)),
            Node::Internal(children) => {
                let op = ops
                    .get(&children.len())
                    .ok_or(TreeError::MissingArity(children.len()))?;
                let compiled: Vec<MultiMap> = children
                    .iter()
                    .map(|c| go(c, ops, space))
                    .collect::<Result<_, _>>()?;
                let refs: Vec<&MultiMap> = compiled.iter().collect();
                Ok(compose_tensor(op, &refs)?)
            }
        }
    }
    go(&tree.top, ops, space)
}

/// Signed number of admissible application orders of the internal vertices
/// (children before parents), where an order placing a left vertex before a
/// disjoint right vertex costs a factor -1 per such pair. This is the
/// multiplicity with which the compiled operator occurs in the length-one
/// output block of the N-th coderivation power, assuming every operation is
/// odd.
pub fn signed_order_count(tree: &PlanarTree) -> Scalar {
    struct Info {
        parent: Option<usize>,
        lo: usize,
        hi: usize,
    }
    fn collect(node: &Node, parent: Option<usize>, leaf: &mut usize, out: &mut Vec<Info>) {
        match node {
            Node::Leaf => {
                *leaf += 1;
            }
            Node::Internal(children) => {
                let idx = out.len();
                out.push(Info {
                    parent,
                    lo: *leaf,
                    hi: 0,
                });
                for c in children {
                    collect(c, Some(idx), leaf, out);
                }
                out[idx].hi = *leaf;
            }
        }
    }
    let mut infos = Vec::new();
    let mut leaf = 0usize;
    collect(&tree.top, None, &mut leaf, &mut infos);
    let n = infos.len();
    if n == 0 {
        return int(1);
    }
    assert!(n <= 24, "tree too large for the order-count bitmask");
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut memo: HashMap<u32, Scalar> = HashMap::new();
    fn go(mask: u32, infos: &[Info], memo: &mut HashMap<u32, Scalar>) -> Scalar {
        if mask == 0 {
            return int(1);
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let mut total = Scalar::zero();
        for v in 0..infos.len() {
            if mask & (1 << v) == 0 {
                continue;
            }
            // v can be applied last iff its parent is not yet applied.
            if let Some(p) = infos[v].parent {
                if mask & (1 << p) != 0 {
                    continue;
                }
            }
            let rest = mask ^ (1 << v);
            let mut lefts = 0i64;
            for w in 0..infos.len() {
                if rest & (1 << w) != 0 && infos[w].hi <= infos[v].lo {
                    lefts += 1;
                }
            }
            let sub = go(rest, infos, memo);
            if lefts % 2 == 0 {
                total += sub;
            } else {
                total -= sub;
            }
        }
        memo.insert(mask, total.clone());
        total
    }
    go(full, &infos, &mut memo)
}

/// The weighted sum over all trees with the given leaf and vertex counts of
/// `signed_order_count(T) * compile_operator(T)`, skipping trees that use an
/// arity with no operation. Returns the zero map when nothing contributes.
pub fn signed_tree_expansion(
    leaves: usize,
    vertices: usize,
    ops: &BTreeMap<usize, MultiMap>,
    space: &GradedSpace,
    degree_per_op: i64,
) -> Result<MultiMap, TreeError> {
    let mut acc = MultiMap::zero(
        space.clone(),
        space.clone(),
        leaves,
        degree_per_op * vertices as i64,
    )
    .map_err(TreeError::Graded)?;
    for tree in enumerate_arity(leaves, vertices) {
        if tree.arity_profile().keys().any(|k| !ops.contains_key(k)) {
            continue;
        }
        let weight = signed_order_count(&tree);
        if weight.is_zero() {
            continue;
        }
        let compiled = compile_operator(&tree, ops, space)?;
        acc = acc.add(&compiled.scale(&weight)).map_err(TreeError::Graded)?;
    }
    Ok(acc)
}

/// Catalan number C_k; `C_{n-1}` counts rooted planar binary trees with n
/// leaves.
pub fn catalan(k: usize) -> u128 {
    let mut c = vec![0u128; k + 1];
    c[0] = 1;
    for i in 1..=k {
        for j in 0..i {
            c[i] += c[j] * c[i - 1 - j];
        }
    }
    c[k]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::GradedSpace;

    #[test]
    fn binary_tree_counts_are_catalan() {
        for n in 1..=8 {
            assert_eq!(
                enumerate_ub(n, 0, n - 1).len() as u128,
                catalan(n - 1),
                "n = {n}"
            );
        }
    }

    #[test]
    fn leaf_binary_mismatch_gives_nothing() {
        assert!(enumerate_ub(3, 1, 1).is_empty());
        assert!(enumerate_ub(2, 0, 0).is_empty());
        assert!(enumerate_ub(1, 0, 1).is_empty());
    }

    #[test]
    fn two_leaves_two_unary_one_binary_has_six_trees() {
        let trees = enumerate_ub(2, 2, 1);
        let forms: std::collections::BTreeSet<String> =
            trees.iter().map(|t| t.serialize()).collect();
        assert_eq!(trees.len(), 6);
        let expected: std::collections::BTreeSet<String> = [
            "u(u(b(*,*)))",
            "u(b(u(*),*))",
            "u(b(*,u(*)))",
            "b(u(u(*)),*)",
            "b(u(*),u(*))",
            "b(*,u(u(*)))",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(forms, expected);
    }

    #[test]
    fn arity_enumeration_counts() {
        assert_eq!(enumerate_arity(2, 2).len(), 3);
        assert_eq!(enumerate_arity(2, 3).len(), 6);
        assert_eq!(enumerate_arity(1, 4).len(), 1, "unary chain");
        // Consistency: restricting arbitrary-arity trees to arities <= 2
        // recovers the unary/binary enumeration.
        for l in 1..=4usize {
            for n in 1..=4usize {
                let restricted = enumerate_arity(l, n)
                    .into_iter()
                    .filter(|t| t.arity_profile().keys().all(|&k| k <= 2))
                    .count();
                let split: usize = (0..=n)
                    .map(|u| enumerate_ub(l, u, n - u).len())
                    .sum();
                assert_eq!(restricted, split, "l={l}, n={n}");
            }
        }
    }

    #[test]
    fn degrees_count_vertices() {
        let t = enumerate_ub(2, 2, 1)
            .into_iter()
            .find(|t| t.serialize() == "b(u(*),u(*))")
            .unwrap();
        assert_eq!(t.shifted_degree(), 3);
        assert_eq!(t.unshifted_degree(), 2);
        assert_eq!(t.leaves(), 2);
    }

    #[test]
    fn signed_order_counts() {
        let find = |trees: Vec<PlanarTree>, s: &str| {
            trees.into_iter().find(|t| t.serialize() == s).unwrap()
        };
        // Chains have a unique order.
        let left_comb = find(enumerate_ub(4, 0, 3), "b(b(b(*,*),*),*)");
        assert_eq!(signed_order_count(&left_comb), int(1));
        // Two disjoint odd vertices below a common parent cancel.
        let square = find(enumerate_ub(4, 0, 3), "b(b(*,*),b(*,*))");
        assert_eq!(signed_order_count(&square), int(0));
        let twin_unary = find(enumerate_ub(2, 2, 1), "b(u(*),u(*))");
        assert_eq!(signed_order_count(&twin_unary), int(0));
        // A chain of two on the left plus one vertex on the right: three
        // interleavings with signs +1 - 1 + 1.
        let mixed = PlanarTree::new(Node::Internal(vec![
            Node::Internal(vec![Node::Internal(vec![Node::Leaf, Node::Leaf])]),
            Node::Internal(vec![Node::Leaf]),
        ]));
        assert_eq!(signed_order_count(&mixed), int(1));
    }

    #[test]
    fn compile_two_vertex_tree_is_identity() {
        let v = GradedSpace::new(vec![("x", -1), ("y", 0)]).unwrap();
        let tree = PlanarTree::new(Node::Leaf);
        let ops = BTreeMap::new();
        let op = compile_operator(&tree, &ops, &v).unwrap();
        assert_eq!(op, MultiMap::identity(&v));
    }

    #[test]
    fn compile_reports_missing_arity() {
        let v = GradedSpace::new(vec![("x", -1)]).unwrap();
        let tree = PlanarTree::new(Node::Internal(vec![Node::Leaf, Node::Leaf]));
        let err = compile_operator(&tree, &BTreeMap::new(), &v).unwrap_err();
        assert_eq!(err, TreeError::MissingArity(2));
    }
}
