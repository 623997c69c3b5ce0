//! Dimension and superdimension tables for operads built from a unary
//! degree-1 generator and a binary degree-0 generator, computed by explicit
//! normal-form enumeration with a small rewriting engine, and by exact
//! relation rank at small arity. Includes generating-series comparison
//! against closed forms and block-dimension data for the tree-presented
//! depth-style operad.

use crate::exact::{int, Scalar, SparseMatrix};
use crate::graded::sign_pow;
use crate::trees::{catalan, enumerate_ub, signed_order_count, Node, PlanarTree};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OperadError {
    #[error("{what} is limited to {max}, got {got}")]
    TooLarge {
        what: &'static str,
        max: usize,
        got: usize,
    },
    #[error("{0}")]
    NotApplicable(String),
}

// ---------------------------------------------------------------------------
// Rewriting engine: terms over a unary d, a binary product, and labeled
// leaves. Rules: reassociate products to left combs, distribute d over
// products with the parity sign of the left factor, kill d-chains of length
// n_big sitting over a leaf.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Leaf(usize),
    D(Box<Term>),
    M(Box<Term>, Box<Term>),
}

impl Term {
    pub fn degree(&self) -> i64 {
        match self {
            Term::Leaf(_) => 0,
            Term::D(t) => 1 + t.degree(),
            Term::M(a, b) => a.degree() + b.degree(),
        }
    }

    fn d_chain_over_leaf(&self) -> Option<usize> {
        match self {
            Term::Leaf(_) => Some(0),
            Term::D(t) => t.d_chain_over_leaf().map(|k| k + 1),
            Term::M(_, _) => None,
        }
    }
}

pub type Poly = BTreeMap<Term, Scalar>;

fn poly_add(poly: &mut Poly, term: Term, coeff: Scalar) {
    if coeff.is_zero() {
        return;
    }
    match poly.entry(term) {
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += coeff;
            if o.get().is_zero() {
                o.remove();
            }
        }
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(coeff);
        }
    }
}

/// Paths into a term: 0 descends into a d or the left product factor,
/// 1 into the right product factor.
fn list_redexes(t: &Term, n_big: usize, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    match t {
        Term::Leaf(_) => {}
        Term::D(inner) => {
            let is_kill = t.d_chain_over_leaf().map(|k| k >= n_big).unwrap_or(false);
            let is_leibniz = matches!(**inner, Term::M(_, _));
            if is_kill || is_leibniz {
                out.push(path.clone());
            }
            path.push(0);
            list_redexes(inner, n_big, path, out);
            path.pop();
        }
        Term::M(a, b) => {
            if matches!(**b, Term::M(_, _)) {
                out.push(path.clone());
            }
            path.push(0);
            list_redexes(a, n_big, path, out);
            path.pop();
            path.push(1);
            list_redexes(b, n_big, path, out);
            path.pop();
        }
    }
}

pub fn redexes(t: &Term, n_big: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    list_redexes(t, n_big, &mut Vec::new(), &mut out);
    out
}

fn contract_here(t: &Term, n_big: usize) -> Vec<(Term, Scalar)> {
    match t {
        Term::D(inner) => {
            if t.d_chain_over_leaf().map(|k| k >= n_big).unwrap_or(false) {
                return Vec::new();
            }
            if let Term::M(a, b) = &**inner {
                return vec![
                    (
                        Term::M(Box::new(Term::D(a.clone())), b.clone()),
                        Scalar::one(),
                    ),
                    (
                        Term::M(a.clone(), Box::new(Term::D(b.clone()))),
                        sign_pow(a.degree()),
                    ),
                ];
            }
            panic!("not a redex");
        }
        Term::M(a, bc) => {
            if let Term::M(b, c) = &**bc {
                return vec![(
                    Term::M(Box::new(Term::M(a.clone(), b.clone())), c.clone()),
                    Scalar::one(),
                )];
            }
            panic!("not a redex");
        }
        Term::Leaf(_) => panic!("not a redex"),
    }
}

fn contract_at(t: &Term, path: &[u8], n_big: usize) -> Vec<(Term, Scalar)> {
    if path.is_empty() {
        return contract_here(t, n_big);
    }
    match t {
        Term::D(inner) => contract_at(inner, &path[1..], n_big)
            .into_iter()
            .map(|(s, c)| (Term::D(Box::new(s)), c))
            .collect(),
        Term::M(a, b) => {
            if path[0] == 0 {
                contract_at(a, &path[1..], n_big)
                    .into_iter()
                    .map(|(s, c)| (Term::M(Box::new(s), b.clone()), c))
                    .collect()
            } else {
                contract_at(b, &path[1..], n_big)
                    .into_iter()
                    .map(|(s, c)| (Term::M(a.clone(), Box::new(s)), c))
                    .collect()
            }
        }
        Term::Leaf(_) => unreachable!("path into a leaf"),
    }
}

/// Canonical basis word: labels in product order with the d-exponent carried
/// by each label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct NormalFormWord {
    pub labels: Vec<usize>,
    pub exponents: Vec<usize>,
}

impl NormalFormWord {
    pub fn degree(&self) -> i64 {
        self.exponents.iter().map(|&k| k as i64).sum()
    }

    pub fn to_term(&self) -> Term {
        let mut factors = self.labels.iter().zip(&self.exponents).map(|(&l, &k)| {
            let mut t = Term::Leaf(l);
            for _ in 0..k {
                t = Term::D(Box::new(t));
            }
            t
        });
        let first = factors.next().expect("words are nonempty");
        factors.fold(first, |acc, f| Term::M(Box::new(acc), Box::new(f)))
    }
}

/// Structural normalization: recursively rewrite to a combination of
/// canonical words. Agrees with exhaustive single-step rewriting in any
/// order; the randomized-order test exercises that.
pub fn normalize(t: &Term, n_big: usize) -> BTreeMap<NormalFormWord, Scalar> {
    let mut out = BTreeMap::new();
    match t {
        Term::Leaf(i) => {
            out.insert(
                NormalFormWord {
                    labels: vec![*i],
                    exponents: vec![0],
                },
                Scalar::one(),
            );
        }
        Term::M(a, b) => {
            let na = normalize(a, n_big);
            let nb = normalize(b, n_big);
            for (wa, ca) in &na {
                for (wb, cb) in &nb {
                    let mut labels = wa.labels.clone();
                    labels.extend_from_slice(&wb.labels);
                    let mut exponents = wa.exponents.clone();
                    exponents.extend_from_slice(&wb.exponents);
                    let coeff = ca * cb;
                    let cell = out
                        .entry(NormalFormWord { labels, exponents })
                        .or_insert_with(Scalar::zero);
                    *cell += coeff;
                }
            }
        }
        Term::D(inner) => {
            let ni = normalize(inner, n_big);
            for (w, c) in &ni {
                let mut prefix_degree = 0i64;
                for j in 0..w.labels.len() {
                    // Exponent stays below n_big or the word dies.
                    if w.exponents[j] + 1 < n_big {
                        let mut bumped = w.clone();
                        bumped.exponents[j] += 1;
                        let coeff = c * &sign_pow(prefix_degree);
                        let cell = out.entry(bumped).or_insert_with(Scalar::zero);
                        *cell += coeff;
                    }
                    prefix_degree += w.exponents[j] as i64;
                }
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Exhaustive rewriting, contracting redexes in the order chosen by `pick`.
/// Returns the fully reduced combination.
pub fn normalize_by_steps<F>(t: &Term, n_big: usize, mut pick: F) -> Poly
where
    F: FnMut(usize) -> usize,
{
    let mut poly: Poly = BTreeMap::new();
    poly_add(&mut poly, t.clone(), Scalar::one());
    loop {
        let mut candidates: Vec<(Term, Vec<u8>)> = Vec::new();
        for term in poly.keys() {
            for r in redexes(term, n_big) {
                candidates.push((term.clone(), r));
            }
        }
        if candidates.is_empty() {
            return poly;
        }
        let (term, path) = candidates.swap_remove(pick(candidates.len()) % candidates.len());
        let coeff = poly.remove(&term).expect("candidate came from the poly");
        for (s, c) in contract_at(&term, &path, n_big) {
            poly_add(&mut poly, s, &coeff * &c);
        }
    }
}

// ---------------------------------------------------------------------------
// Dimension tables.
// ---------------------------------------------------------------------------

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::with_capacity(factorial(n) as usize);
    let mut items: Vec<usize> = (0..n).collect();
    fn rec(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, out);
            items.swap(k, i);
        }
    }
    rec(&mut items, 0, &mut out);
    out.sort();
    out
}

fn exponent_vectors(n: usize, n_big: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n_big {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimRow {
    pub n: usize,
    pub dim: u64,
    pub superdim: i64,
}

/// Per-arity dimension and superdimension of the operad of associative
/// algebras with an order-n_big differential, counted as canonical words
/// (permutation, exponent vector). Every counted word is checked to be
/// irreducible for the rewriting engine.
pub fn ndga_dims(n_big: usize, n_max: usize) -> Result<Vec<DimRow>, OperadError> {
    if n_big == 0 {
        return Err(OperadError::NotApplicable(
            "the differential order must be at least 1".to_string(),
        ));
    }
    if n_max > 6 {
        return Err(OperadError::TooLarge {
            what: "arity",
            max: 6,
            got: n_max,
        });
    }
    if n_big > 16 {
        return Err(OperadError::TooLarge {
            what: "differential order",
            max: 16,
            got: n_big,
        });
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let exps = exponent_vectors(n, n_big);
        // Parity is independent of the permutation, so each exponent vector
        // contributes n! words of its own sign.
        let mut plus = 0u64;
        let mut minus = 0u64;
        for e in &exps {
            let deg: usize = e.iter().sum();
            if deg % 2 == 0 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
        let fact = factorial(n);
        let dim = fact * exps.len() as u64;
        let superdim = fact as i64 * (plus as i64 - minus as i64);
        if dim <= 20_000 {
            let mut seen = 0u64;
            for sigma in permutations(n) {
                for e in &exps {
                    let word = NormalFormWord {
                        labels: sigma.clone(),
                        exponents: e.clone(),
                    };
                    debug_assert!(
                        redexes(&word.to_term(), n_big).is_empty(),
                        "canonical words must be irreducible"
                    );
                    seen += 1;
                    let _ = word;
                }
            }
            assert_eq!(seen, dim);
        }
        rows.push(DimRow { n, dim, superdim });
    }
    Ok(rows)
}

/// Same counting for the Lie-bracket variant: anchored words with the first
/// label fixed, (n-1)! * n_big^n per arity.
pub fn ndgla_dims(n_big: usize, n_max: usize) -> Result<Vec<DimRow>, OperadError> {
    if n_big == 0 {
        return Err(OperadError::NotApplicable(
            "the differential order must be at least 1".to_string(),
        ));
    }
    if n_max > 6 {
        return Err(OperadError::TooLarge {
            what: "arity",
            max: 6,
            got: n_max,
        });
    }
    if n_big > 16 {
        return Err(OperadError::TooLarge {
            what: "differential order",
            max: 16,
            got: n_big,
        });
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let exps = exponent_vectors(n, n_big);
        let mut plus = 0u64;
        let mut minus = 0u64;
        for e in &exps {
            let deg: usize = e.iter().sum();
            if deg % 2 == 0 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
        let fact = factorial(n - 1);
        rows.push(DimRow {
            n,
            dim: fact * exps.len() as u64,
            superdim: fact as i64 * (plus as i64 - minus as i64),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Exact quotient dimensions at small arity.
// ---------------------------------------------------------------------------

fn labeled_tree_key(node: &Node, labels: &[usize], counter: &mut usize) -> String {
    match node {
        Node::Leaf => {
            let s = format!("x{}", labels[*counter]);
            *counter += 1;
            s
        }
        Node::Internal(children) => {
            let inner: Vec<String> = children
                .iter()
                .map(|c| labeled_tree_key(c, labels, counter))
                .collect();
            format!("({})", inner.join(","))
        }
    }
}

fn column_key(tree: &PlanarTree, labels: &[usize]) -> String {
    let mut counter = 0;
    labeled_tree_key(tree.top(), labels, &mut counter)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssRow {
    pub n: usize,
    pub free_dim: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation_rank: Option<usize>,
    pub dim: u64,
}

/// The weighted depth relation at arity n_big+1 instantiated on a labeling:
/// one row per bijection, columns indexed by (binary tree, labeling).
fn assn_relation_matrix(n_big: usize, signed: bool) -> (SparseMatrix, usize) {
    let arity = n_big + 1;
    let trees = enumerate_ub(arity, 0, arity - 1);
    let perms = permutations(arity);
    let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
    for t in &trees {
        for p in &perms {
            let key = column_key(t, p);
            let next = col_index.len();
            col_index.insert(key, next);
        }
    }
    let cols = col_index.len();
    let mut m = SparseMatrix::zero(perms.len(), cols);
    for (row, f) in perms.iter().enumerate() {
        for t in &trees {
            let w = if signed {
                signed_order_count(t)
            } else {
                int(1)
            };
            if w.is_zero() {
                continue;
            }
            let col = col_index[&column_key(t, f)];
            m.add_to(row, col, &w);
        }
    }
    (m, cols)
}

/// Dimensions of the binary-generated depth-n_big operad: free tree counts
/// below the relation arity, and free minus exact relation rank at arity
/// n_big + 1.
pub fn assn_dims(n_big: usize, n_max: usize) -> Result<Vec<AssRow>, OperadError> {
    if n_big < 2 || n_big > 4 {
        return Err(OperadError::TooLarge {
            what: "depth",
            max: 4,
            got: n_big,
        });
    }
    if n_max > n_big + 1 {
        return Err(OperadError::NotApplicable(format!(
            "no dimension data beyond arity {} for depth {}",
            n_big + 1,
            n_big
        )));
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let free_dim = factorial(n) * catalan(n - 1) as u64;
        if n <= n_big {
            rows.push(AssRow {
                n,
                free_dim,
                relation_rank: None,
                dim: free_dim,
            });
        } else {
            let (m, _) = assn_relation_matrix(n_big, true);
            let rank = m.rank();
            rows.push(AssRow {
                n,
                free_dim,
                relation_rank: Some(rank),
                dim: free_dim - rank as u64,
            });
        }
    }
    Ok(rows)
}

/// Rank of the arity-(n_big+1) relation span, for both the alternating
/// machine-generated weights and the plain all-ones sum, plus the rank of
/// the two spans joined. Equal individual ranks with a larger joint rank
/// means the two relation sets cut out different subspaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationSpanComparison {
    pub signed_rank: usize,
    pub plain_rank: usize,
    pub joint_rank: usize,
    pub spans_agree: bool,
}

pub fn assn_relation_spans(n_big: usize) -> Result<RelationSpanComparison, OperadError> {
    if n_big < 2 || n_big > 4 {
        return Err(OperadError::TooLarge {
            what: "depth",
            max: 4,
            got: n_big,
        });
    }
    let (signed, cols) = assn_relation_matrix(n_big, true);
    let (plain, cols2) = assn_relation_matrix(n_big, false);
    assert_eq!(cols, cols2);
    let mut joint = SparseMatrix::zero(signed.rows() + plain.rows(), cols);
    for (r, c, v) in signed.iter() {
        joint.add_to(r, c, v);
    }
    for (r, c, v) in plain.iter() {
        joint.add_to(signed.rows() + r, c, v);
    }
    let signed_rank = signed.rank();
    let plain_rank = plain.rank();
    let joint_rank = joint.rank();
    Ok(RelationSpanComparison {
        signed_rank,
        plain_rank,
        joint_rank,
        spans_agree: joint_rank == signed_rank && signed_rank == plain_rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimKind {
    Ndgla,
    AssN,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum KindDims {
    Ndgla(Vec<DimRow>),
    AssN(Vec<AssRow>),
}

pub fn ndgla_assn_dims(
    kind: DimKind,
    n_big: usize,
    n_max: usize,
) -> Result<KindDims, OperadError> {
    match kind {
        DimKind::Ndgla => Ok(KindDims::Ndgla(ndgla_dims(n_big, n_max)?)),
        DimKind::AssN => Ok(KindDims::AssN(assn_dims(n_big, n_max)?)),
    }
}

// ---------------------------------------------------------------------------
// Lie quotient cross-check: bracket trees with decorated leaves modulo
// graded antisymmetry and Jacobi instances at every node.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum BNode {
    Slot(usize),
    Br(Box<BNode>, Box<BNode>),
}

impl BNode {
    fn from_tree(node: &Node, counter: &mut usize) -> BNode {
        match node {
            Node::Leaf => {
                let s = BNode::Slot(*counter);
                *counter += 1;
                s
            }
            Node::Internal(children) => {
                assert_eq!(children.len(), 2, "bracket trees are binary");
                let left = BNode::from_tree(&children[0], counter);
                let right = BNode::from_tree(&children[1], counter);
                BNode::Br(Box::new(left), Box::new(right))
            }
        }
    }

    fn degree(&self, exps: &[usize]) -> i64 {
        match self {
            BNode::Slot(s) => exps[*s] as i64,
            BNode::Br(a, b) => a.degree(exps) + b.degree(exps),
        }
    }

    fn key(&self, labels: &[usize], exps: &[usize]) -> String {
        match self {
            BNode::Slot(s) => format!("x{}^{}", labels[*s], exps[*s]),
            BNode::Br(a, b) => format!("[{},{}]", a.key(labels, exps), b.key(labels, exps)),
        }
    }

    /// All internal positions, as paths of 0/1 descents.
    fn positions(&self, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if let BNode::Br(a, b) = self {
            out.push(path.clone());
            path.push(0);
            a.positions(path, out);
            path.pop();
            path.push(1);
            b.positions(path, out);
            path.pop();
        }
    }

    fn replace_at(&self, path: &[u8], make: &dyn Fn(&BNode) -> BNode) -> BNode {
        if path.is_empty() {
            return make(self);
        }
        match self {
            BNode::Br(a, b) => {
                if path[0] == 0 {
                    BNode::Br(Box::new(a.replace_at(&path[1..], make)), b.clone())
                } else {
                    BNode::Br(a.clone(), Box::new(b.replace_at(&path[1..], make)))
                }
            }
            BNode::Slot(_) => unreachable!("path into a slot"),
        }
    }

    fn subnode(&self, path: &[u8]) -> &BNode {
        if path.is_empty() {
            return self;
        }
        match self {
            BNode::Br(a, b) => {
                if path[0] == 0 {
                    a.subnode(&path[1..])
                } else {
                    b.subnode(&path[1..])
                }
            }
            BNode::Slot(_) => unreachable!("path into a slot"),
        }
    }
}

/// Quotient dimension of the arity-n component of the bracket operad with
/// leaf exponents below n_big, by exact rank of antisymmetry and Jacobi
/// relation instances.
pub fn ndgla_quotient_dim(n_big: usize, n: usize) -> Result<usize, OperadError> {
    if n > 3 || n_big > 2 {
        return Err(OperadError::TooLarge {
            what: "lie quotient cross-check size",
            max: 3,
            got: n.max(n_big),
        });
    }
    let shapes: Vec<BNode> = enumerate_ub(n, 0, n - 1)
        .iter()
        .map(|t| {
            let mut c = 0;
            BNode::from_tree(t.top(), &mut c)
        })
        .collect();
    let perms = permutations(n);
    let exps = exponent_vectors(n, n_big);

    let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
    for shape in &shapes {
        for sigma in &perms {
            for e in &exps {
                let key = shape.key(sigma, e);
                let next = col_index.len();
                col_index.insert(key, next);
            }
        }
    }
    let cols = col_index.len();

    let mut rows: Vec<Vec<(usize, Scalar)>> = Vec::new();
    for shape in &shapes {
        let mut positions = Vec::new();
        shape.positions(&mut Vec::new(), &mut positions);
        for sigma in &perms {
            for e in &exps {
                for pos in &positions {
                    // Antisymmetry: [A,B] + (-1)^(|A||B|) [B,A].
                    let node = shape.subnode(pos);
                    if let BNode::Br(a, b) = node {
                        let sign = sign_pow(a.degree(e) * b.degree(e));
                        let swapped = shape.replace_at(pos, &|n| {
                            if let BNode::Br(a, b) = n {
                                BNode::Br(b.clone(), a.clone())
                            } else {
                                unreachable!()
                            }
                        });
                        rows.push(vec![
                            (col_index[&shape.key(sigma, e)], Scalar::one()),
                            (col_index[&swapped.key(sigma, e)], sign),
                        ]);
                    }
                    // Jacobi: [P,[Q,R]] - [[P,Q],R] - (-1)^(|P||Q|) [Q,[P,R]].
                    if let BNode::Br(p, c) = shape.subnode(pos) {
                        if let BNode::Br(q, r) = &**c {
                            let sign = sign_pow(p.degree(e) * q.degree(e) + 1);
                            let left_assoc = shape.replace_at(pos, &|_| {
                                BNode::Br(
                                    Box::new(BNode::Br(p.clone(), q.clone())),
                                    r.clone(),
                                )
                            });
                            let inner_moved = shape.replace_at(pos, &|_| {
                                BNode::Br(
                                    q.clone(),
                                    Box::new(BNode::Br(p.clone(), r.clone())),
                                )
                            });
                            rows.push(vec![
                                (col_index[&shape.key(sigma, e)], Scalar::one()),
                                (col_index[&left_assoc.key(sigma, e)], -Scalar::one()),
                                (col_index[&inner_moved.key(sigma, e)], sign),
                            ]);
                        }
                    }
                }
            }
        }
    }
    let mut m = SparseMatrix::zero(rows.len(), cols);
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row {
            m.add_to(r, *c, v);
        }
    }
    Ok(cols - m.rank())
}

// ---------------------------------------------------------------------------
// Block data for the tree-presented operad of depth-style structures:
// components spanned by labeled unary-binary trees, graded by unary count,
// modulo the ideal generated by the arity-l tree sums with l - 1 + u = depth.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DgassBlock {
    pub u: usize,
    pub free_dim: u64,
    /// Quotient by the plain all-ones tree sums.
    pub dim_plain: u64,
    /// Quotient by the alternating machine-generated tree sums.
    pub dim_signed: u64,
}

fn plug_leaves(node: &Node, plugs: &[Node], counter: &mut usize) -> Node {
    match node {
        Node::Leaf => {
            let p = plugs[*counter].clone();
            *counter += 1;
            p
        }
        Node::Internal(children) => Node::Internal(
            children
                .iter()
                .map(|c| plug_leaves(c, plugs, counter))
                .collect(),
        ),
    }
}

/// Compositions of integers `total` into `parts` parts, each >= min.
fn compositions(total: usize, parts: usize, min: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    if total < parts * min {
        return out;
    }
    for first in min..=(total - (parts - 1) * min) {
        for mut rest in compositions(total - first, parts - 1, min) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

fn internal_vertex_count(node: &Node) -> usize {
    match node {
        Node::Leaf => 0,
        Node::Internal(children) => {
            1 + children.iter().map(internal_vertex_count).sum::<usize>()
        }
    }
}

/// For each leaf (left to right) the number of internal vertices that come
/// after it in the planar preorder walk.
fn internal_after_leaf(node: &Node) -> Vec<usize> {
    fn walk(node: &Node, events: &mut Vec<bool>, leaf_pos: &mut Vec<usize>) {
        match node {
            Node::Leaf => {
                leaf_pos.push(events.len());
                events.push(false);
            }
            Node::Internal(children) => {
                events.push(true);
                for c in children {
                    walk(c, events, leaf_pos);
                }
            }
        }
    }
    let mut events = Vec::new();
    let mut leaf_pos = Vec::new();
    walk(node, &mut events, &mut leaf_pos);
    leaf_pos
        .iter()
        .map(|&p| events[p + 1..].iter().filter(|&&b| b).count())
        .collect()
}

/// Graft `plugs` into the leaves of `gen`, then the result into leaf `q` of
/// `outer`. Both generating operations are odd, so composing in the planar
/// tree basis picks up the parity of moving each inserted block past the
/// vertices that follow its insertion point in preorder.
fn signed_graft(gen: &Node, plugs: &[Node], outer: &Node, q: usize) -> (Node, Scalar) {
    let after_gen = internal_after_leaf(gen);
    let mut exponent = 0usize;
    for (i, p) in plugs.iter().enumerate() {
        exponent += internal_vertex_count(p) * after_gen[i];
    }
    let mut c = 0;
    let filled = plug_leaves(gen, plugs, &mut c);
    let after_outer = internal_after_leaf(outer);
    exponent += internal_vertex_count(&filled) * after_outer[q];
    let outer_leaves = after_outer.len();
    let mut outer_plugs = vec![Node::Leaf; outer_leaves];
    outer_plugs[q] = filled;
    let mut c2 = 0;
    let whole = plug_leaves(outer, &outer_plugs, &mut c2);
    (whole, sign_pow(exponent as i64))
}

/// Per-unary-grade dimensions of the arity-n component for depth `n_big`,
/// for unary grades 0..=u_max. Exact data only; no closed form is assumed.
pub fn dgass_blocks(
    n_big: usize,
    n: usize,
    u_max: usize,
) -> Result<Vec<DgassBlock>, OperadError> {
    if !(2..=3).contains(&n_big) {
        return Err(OperadError::TooLarge {
            what: "depth",
            max: 3,
            got: n_big,
        });
    }
    if n > 3 {
        return Err(OperadError::TooLarge {
            what: "arity",
            max: 3,
            got: n,
        });
    }
    if u_max > 6 {
        return Err(OperadError::TooLarge {
            what: "unary grade",
            max: 6,
            got: u_max,
        });
    }
    let perms = permutations(n);
    let mut blocks = Vec::new();
    for u in 0..=u_max {
        let basis = enumerate_ub(n, u, n - 1);
        let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
        for t in &basis {
            for f in &perms {
                let key = column_key(t, f);
                let next = col_index.len();
                col_index.insert(key, next);
            }
        }
        let cols = col_index.len();
        let free_dim = cols as u64;

        let mut dims = [0u64; 2];
        for (variant, use_signs) in [(0usize, false), (1usize, true)] {
            let mut rows: BTreeSet<BTreeMap<usize, Scalar>> = BTreeSet::new();
            // One generator per relation arity l, with unary weight
            // u' = n_big + 1 - l; instances graft it into an outer context at
            // a leaf and plug trees into its inputs.
            for l in 1..=(n_big + 1).min(n) {
                let u_gen = n_big + 1 - l;
                let Some(u_avail) = u.checked_sub(u_gen) else {
                    continue;
                };
                let gen_trees = enumerate_ub(l, u_gen, l - 1);
                if gen_trees.is_empty() {
                    continue;
                }
                // Outer context: n_out leaves, one of which receives the
                // generator. Contexts whose other leaves carry trees are
                // covered because the context ranges over all unary-binary
                // shapes. Plug trees fill the generator's l inputs.
                for n_out in 1..=(n - l + 1) {
                    let spare = n - l - (n_out - 1);
                    // spare leaves are distributed into the l plugs.
                    for plug_leaf_counts in compositions(l + spare, l, 1) {
                        for u_out in 0..=u_avail {
                            let u_rest = u_avail - u_out;
                            let outer_trees = enumerate_ub(n_out, u_out, n_out - 1);
                            if outer_trees.is_empty() {
                                continue;
                            }
                            // Distribute remaining unary weight over plugs.
                            for plug_unary in compositions(u_rest, l, 0) {
                                let plug_sets: Vec<Vec<PlanarTree>> = plug_leaf_counts
                                    .iter()
                                    .zip(&plug_unary)
                                    .map(|(&lv, &uv)| enumerate_ub(lv, uv, lv - 1))
                                    .collect();
                                if plug_sets.iter().any(|s| s.is_empty()) {
                                    continue;
                                }
                                let mut plug_choice = vec![0usize; l];
                                loop {
                                    let plugs: Vec<Node> = plug_choice
                                        .iter()
                                        .zip(&plug_sets)
                                        .map(|(&i, s)| s[i].top().clone())
                                        .collect();
                                    for outer in &outer_trees {
                                        for q in 0..n_out {
                                            for f in &perms {
                                                let mut row: BTreeMap<usize, Scalar> =
                                                    BTreeMap::new();
                                                for g in &gen_trees {
                                                    let w = if use_signs {
                                                        signed_order_count(g)
                                                    } else {
                                                        int(1)
                                                    };
                                                    if w.is_zero() {
                                                        continue;
                                                    }
                                                    let (whole, sign) = signed_graft(
                                                        g.top(),
                                                        &plugs,
                                                        outer.top(),
                                                        q,
                                                    );
                                                    let key = column_key(
                                                        &PlanarTree::new(whole),
                                                        f,
                                                    );
                                                    let col = col_index[&key];
                                                    let cell = row
                                                        .entry(col)
                                                        .or_insert_with(Scalar::zero);
                                                    *cell += w * sign;
                                                    if cell.is_zero() {
                                                        row.remove(&col);
                                                    }
                                                }
                                                if !row.is_empty() {
                                                    rows.insert(row);
                                                }
                                            }
                                        }
                                    }
                                    // Odometer over plug choices.
                                    let mut i = l;
                                    let done = loop {
                                        if i == 0 {
                                            break true;
                                        }
                                        i -= 1;
                                        plug_choice[i] += 1;
                                        if plug_choice[i] < plug_sets[i].len() {
                                            break false;
                                        }
                                        plug_choice[i] = 0;
                                    };
                                    if done {
                                        break;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let mut m = SparseMatrix::zero(rows.len().max(1), cols.max(1));
            for (r, row) in rows.iter().enumerate() {
                for (c, v) in row {
                    m.add_to(r, *c, v);
                }
            }
            let rank = if cols == 0 { 0 } else { m.rank() };
            dims[variant] = free_dim - rank as u64;
        }
        blocks.push(DgassBlock {
            u,
            free_dim,
            dim_plain: dims[0],
            dim_signed: dims[1],
        });
    }
    Ok(blocks)
}

// ---------------------------------------------------------------------------
// Generating-series comparison.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    NdgaLinear,
    NdgaGraded,
    NdglaLinear,
    NdglaGraded,
}

impl SeriesKind {
    pub fn parse(s: &str) -> Option<SeriesKind> {
        match s {
            "ndga-linear" => Some(SeriesKind::NdgaLinear),
            "ndga-graded" => Some(SeriesKind::NdgaGraded),
            "ndgla-linear" => Some(SeriesKind::NdglaLinear),
            "ndgla-graded" => Some(SeriesKind::NdglaGraded),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    pub computed: String,
    pub closed_form: String,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesReport {
    pub kind: SeriesKind,
    pub n_big: usize,
    pub closed_form: String,
    pub rows: Vec<SeriesRow>,
    pub pass: bool,
}

fn scalar_pow(base: &Scalar, exp: usize) -> Scalar {
    let mut out = Scalar::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Exact comparison of coefficient-wise dims/n! (or superdims/n!) against
/// the closed-form series, to the requested order.
pub fn series_check(
    kind: SeriesKind,
    n_big: usize,
    order: usize,
) -> Result<SeriesReport, OperadError> {
    if order > 6 {
        return Err(OperadError::TooLarge {
            what: "series order",
            max: 6,
            got: order,
        });
    }
    let (label, closed): (String, Box<dyn Fn(usize) -> Scalar>) = match kind {
        SeriesKind::NdgaLinear => (
            format!("{n_big}x/(1-{n_big}x)"),
            Box::new(move |n| scalar_pow(&int(n_big as i64), n)),
        ),
        SeriesKind::NdglaLinear => (
            format!("ln(1/(1-{n_big}x))"),
            Box::new(move |n| scalar_pow(&int(n_big as i64), n) / int(n as i64)),
        ),
        SeriesKind::NdgaGraded => {
            if n_big % 2 == 0 {
                (
                    "x".to_string(),
                    Box::new(|n| if n == 1 { Scalar::one() } else { Scalar::zero() }),
                )
            } else {
                ("x/(1-x)".to_string(), Box::new(|_| Scalar::one()))
            }
        }
        SeriesKind::NdglaGraded => {
            if n_big % 2 == 0 {
                (
                    "x".to_string(),
                    Box::new(|n| if n == 1 { Scalar::one() } else { Scalar::zero() }),
                )
            } else {
                (
                    "ln(1/(1-x))".to_string(),
                    Box::new(|n| Scalar::one() / int(n as i64)),
                )
            }
        }
    };
    let dims = match kind {
        SeriesKind::NdgaLinear | SeriesKind::NdgaGraded => ndga_dims(n_big, order)?,
        SeriesKind::NdglaLinear | SeriesKind::NdglaGraded => ndgla_dims(n_big, order)?,
    };
    let graded = matches!(kind, SeriesKind::NdgaGraded | SeriesKind::NdglaGraded);
    let mut rows = Vec::new();
    let mut pass = true;
    for row in &dims {
        let numerator = if graded {
            int(row.superdim)
        } else {
            int(row.dim as i64)
        };
        let computed = numerator / int(factorial(row.n) as i64);
        let expected = closed(row.n);
        let agree = computed == expected;
        pass &= agree;
        rows.push(SeriesRow {
            n: row.n,
            computed: crate::exact::scalar_string(&computed),
            closed_form: crate::exact::scalar_string(&expected),
            agree,
        });
    }
    Ok(SeriesReport {
        kind,
        n_big,
        closed_form: label,
        rows,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dims_match_closed_forms_up_to_four() {
        for n_big in 1..=4 {
            let rows = ndga_dims(n_big, 4).unwrap();
            for row in &rows {
                let expected =
                    factorial(row.n) * (n_big as u64).pow(row.n as u32);
                assert_eq!(row.dim, expected, "N={n_big} n={}", row.n);
                let expected_sdim = if n_big % 2 == 0 {
                    0
                } else {
                    factorial(row.n) as i64
                };
                assert_eq!(row.superdim, expected_sdim, "N={n_big} n={}", row.n);
            }
            let lie = ndgla_dims(n_big, 4).unwrap();
            for row in &lie {
                let expected =
                    factorial(row.n - 1) * (n_big as u64).pow(row.n as u32);
                assert_eq!(row.dim, expected, "lie N={n_big} n={}", row.n);
            }
        }
    }

    #[test]
    fn spot_values() {
        let rows = ndga_dims(2, 2).unwrap();
        assert_eq!(rows[0].dim, 2); // x and dx
        let rows3 = ndga_dims(3, 2).unwrap();
        assert_eq!(rows3[1].dim, 18);
        assert_eq!(rows[1].superdim, 0);
        assert_eq!(rows3[1].superdim, 2);
        let lie = ndgla_dims(3, 2).unwrap();
        assert_eq!(lie[1].dim, 9);
    }

    #[test]
    fn odd_order_arity_one_superdim_is_one() {
        // 0! = 1 extends the factorial pattern down to a single input.
        for n_big in [1, 3, 5] {
            let lie = ndgla_dims(n_big, 1).unwrap();
            assert_eq!(lie[0].superdim, 1, "N={n_big}");
        }
        for n_big in [2, 4] {
            let lie = ndgla_dims(n_big, 1).unwrap();
            assert_eq!(lie[0].superdim, 0, "N={n_big}");
        }
    }

    #[test]
    fn lie_quotient_rank_agrees_with_the_count() {
        for (n_big, n) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            let by_rank = ndgla_quotient_dim(n_big, n).unwrap();
            let by_count = ndgla_dims(n_big, n).unwrap()[n - 1].dim as usize;
            assert_eq!(by_rank, by_count, "N={n_big} n={n}");
        }
    }

    #[test]
    fn depth_operad_dimensions() {
        let two = assn_dims(2, 3).unwrap();
        assert_eq!(
            two.iter().map(|r| r.dim).collect::<Vec<_>>(),
            vec![1, 2, 6]
        );
        assert_eq!(two[2].free_dim, 12);
        assert_eq!(two[2].relation_rank, Some(6));
        let three = assn_dims(3, 4).unwrap();
        assert_eq!(
            three.iter().map(|r| r.dim).collect::<Vec<_>>(),
            vec![1, 2, 12, 96]
        );
        assert_eq!(three[3].free_dim, 120);
        assert_eq!(three[3].relation_rank, Some(24));
    }

    #[test]
    fn relation_rank_is_independent_of_basis_order() {
        // Reversing the column order must not change the rank.
        let (m, cols) = assn_relation_matrix(3, true);
        let reversed_cols: Vec<usize> = (0..cols).rev().collect();
        let rows: Vec<usize> = (0..m.rows()).collect();
        let rev = m.block(&rows, &reversed_cols);
        assert_eq!(m.rank(), rev.rank());
    }

    #[test]
    fn signed_and_plain_relation_spans() {
        // Depth 2: the alternating and all-ones forms generate the same
        // space. Depth 3: same rank and same quotient dimension, but the
        // spans genuinely differ.
        let two = assn_relation_spans(2).unwrap();
        assert!(two.spans_agree);
        let three = assn_relation_spans(3).unwrap();
        assert_eq!(three.signed_rank, 24);
        assert_eq!(three.plain_rank, 24);
        assert!(!three.spans_agree);
        assert!(three.joint_rank > 24);
    }

    #[test]
    fn series_linear_match_to_order_six() {
        for n_big in 1..=4 {
            let a = series_check(SeriesKind::NdgaLinear, n_big, 6).unwrap();
            assert!(a.pass, "{a:?}");
            let l = series_check(SeriesKind::NdglaLinear, n_big, 6).unwrap();
            assert!(l.pass, "{l:?}");
        }
    }

    #[test]
    fn series_graded_odd_match_even_fail_at_arity_one() {
        for n_big in [1, 3] {
            assert!(series_check(SeriesKind::NdgaGraded, n_big, 5).unwrap().pass);
            assert!(series_check(SeriesKind::NdglaGraded, n_big, 5).unwrap().pass);
        }
        for n_big in [2, 4] {
            let r = series_check(SeriesKind::NdgaGraded, n_big, 5).unwrap();
            assert!(!r.pass);
            // Every actual coefficient vanishes; the closed form claims 1
            // at arity 1.
            assert!(!r.rows[0].agree);
            assert_eq!(r.rows[0].computed, "0");
            assert!(r.rows[1..].iter().all(|row| row.agree));
            let l = series_check(SeriesKind::NdglaGraded, n_big, 5).unwrap();
            assert!(!l.pass);
            assert!(!l.rows[0].agree);
        }
    }

    fn all_test_terms(n: usize, n_big: usize) -> Vec<Term> {
        // All binary skeletons on n leaves with d-chains of length <= n_big
        // at every node, total d count <= n_big + 1.
        fn skeletons(labels: &[usize]) -> Vec<Term> {
            if labels.len() == 1 {
                return vec![Term::Leaf(labels[0])];
            }
            let mut out = Vec::new();
            for split in 1..labels.len() {
                for l in skeletons(&labels[..split]) {
                    for r in skeletons(&labels[split..]) {
                        out.push(Term::M(Box::new(l.clone()), Box::new(r)));
                    }
                }
            }
            out
        }
        fn decorate(t: &Term, budget: usize, cap: usize) -> Vec<(Term, usize)> {
            // Returns decorated variants with the d count used.
            let children: Vec<(Term, usize)> = match t {
                Term::Leaf(i) => vec![(Term::Leaf(*i), 0)],
                Term::M(a, b) => {
                    let mut out = Vec::new();
                    for (da, ua) in decorate(a, budget, cap) {
                        for (db, ub) in decorate(b, budget - ua, cap) {
                            out.push((
                                Term::M(Box::new(da.clone()), Box::new(db)),
                                ua + ub,
                            ));
                        }
                    }
                    out
                }
                Term::D(_) => unreachable!("skeletons carry no d"),
            };
            let mut out = Vec::new();
            for (base, used) in children {
                let mut cur = base;
                for extra in 0..=cap.min(budget.saturating_sub(used)) {
                    if extra > 0 {
                        cur = Term::D(Box::new(cur.clone()));
                    }
                    out.push((cur.clone(), used + extra));
                }
            }
            out
        }
        let labels: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        for s in skeletons(&labels) {
            for (t, _) in decorate(&s, n_big + 1, n_big) {
                out.push(t);
            }
        }
        out
    }

    #[test]
    fn rewriting_is_confluent_at_desk_scale() {
        for n_big in 1..=3 {
            for n in 1..=3 {
                for term in all_test_terms(n, n_big) {
                    let reference: Poly = normalize(&term, n_big)
                        .into_iter()
                        .map(|(w, c)| (w.to_term(), c))
                        .collect();
                    for seed in 0..3u64 {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            seed ^ (n as u64) << 8 ^ (n_big as u64) << 16,
                        );
                        let random =
                            normalize_by_steps(&term, n_big, |k| rng.gen_range(0..k));
                        assert_eq!(
                            random, reference,
                            "term {term:?} with order {n_big}, seed {seed}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn normal_forms_are_irreducible_and_reachable() {
        let word = NormalFormWord {
            labels: vec![1, 0, 2],
            exponents: vec![1, 0, 2],
        };
        let t = word.to_term();
        assert!(redexes(&t, 3).is_empty());
        let n = normalize(&t, 3);
        assert_eq!(n.len(), 1);
        assert_eq!(n.get(&word), Some(&Scalar::one()));
        // Same term dies once the exponent cap tightens.
        let dead = normalize(&t, 2);
        assert!(dead.is_empty());
    }

    #[test]
    fn leibniz_sign_follows_left_degree() {
        // d(x dy) = dx dy + (-1)^1 ... the left factor of d(dx y) is odd.
        let t = Term::D(Box::new(Term::M(
            Box::new(Term::D(Box::new(Term::Leaf(0)))),
            Box::new(Term::Leaf(1)),
        )));
        let n = normalize(&t, 3);
        let w_dd = NormalFormWord {
            labels: vec![0, 1],
            exponents: vec![2, 0],
        };
        let w_dxdy = NormalFormWord {
            labels: vec![0, 1],
            exponents: vec![1, 1],
        };
        assert_eq!(n.get(&w_dd), Some(&Scalar::one()));
        assert_eq!(n.get(&w_dxdy), Some(&(-Scalar::one())));
    }

    #[test]
    fn depth_two_blocks_recover_the_squarefree_word_count() {
        // At depth 2 the tree quotient collapses to words with exponents
        // below 2, graded by total exponent.
        let blocks = dgass_blocks(2, 2, 3).unwrap();
        let dims: Vec<u64> = blocks.iter().map(|b| b.dim_signed).collect();
        assert_eq!(dims, vec![2, 4, 2, 0]);
        let plain: Vec<u64> = blocks.iter().map(|b| b.dim_plain).collect();
        assert_eq!(plain, dims, "both ideal variants coincide at depth 2");
        let arity1 = dgass_blocks(2, 1, 3).unwrap();
        assert_eq!(
            arity1.iter().map(|b| b.dim_signed).collect::<Vec<_>>(),
            vec![1, 1, 0, 0]
        );
    }

    #[test]
    fn depth_three_blocks_are_stable_data() {
        let blocks = dgass_blocks(3, 2, 4).unwrap();
        for b in &blocks {
            assert!(b.dim_plain <= b.free_dim);
            assert!(b.dim_signed <= b.free_dim);
        }
        // Grade 0 and 1 sit below every relation grade at depth 3, so they
        // stay free.
        assert_eq!(blocks[0].dim_signed, blocks[0].free_dim);
        assert_eq!(blocks[1].dim_signed, blocks[1].free_dim);
    }

    #[test]
    fn graft_signs_match_operator_composition() {
        use crate::graded::{compose_tensor, GradedSpace, MultiMap};
        use crate::trees::compile_operator;
        let space = GradedSpace::new(vec![("a", -1), ("b", 0)]).unwrap();
        let mut d = MultiMap::zero(space.clone(), space.clone(), 1, 1).unwrap();
        d.add_coefficient(&[0], 1, int(3)).unwrap();
        let mut m = MultiMap::zero(space.clone(), space.clone(), 2, 1).unwrap();
        m.add_coefficient(&[0, 0], 0, int(2)).unwrap();
        m.add_coefficient(&[0, 1], 1, int(5)).unwrap();
        m.add_coefficient(&[1, 0], 1, int(7)).unwrap();
        let mut ops = BTreeMap::new();
        ops.insert(1, d);
        ops.insert(2, m);

        let pool = |shapes: &[(usize, usize, usize)]| -> Vec<PlanarTree> {
            shapes
                .iter()
                .flat_map(|&(l, u, b)| enumerate_ub(l, u, b))
                .collect()
        };
        let gens = pool(&[(1, 1, 0), (1, 2, 0), (2, 0, 1), (2, 1, 1), (3, 0, 2)]);
        let plug_pool = pool(&[(1, 0, 0), (1, 1, 0), (2, 0, 1), (2, 1, 1)]);
        let outers = pool(&[(1, 0, 0), (1, 1, 0), (2, 0, 1), (2, 1, 1)]);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut negatives = 0usize;
        for _ in 0..160 {
            let gen = &gens[rng.gen_range(0..gens.len())];
            let plugs: Vec<Node> = (0..gen.leaves())
                .map(|_| plug_pool[rng.gen_range(0..plug_pool.len())].top().clone())
                .collect();
            let outer = &outers[rng.gen_range(0..outers.len())];
            let q = rng.gen_range(0..outer.leaves());

            let (whole, sign) = signed_graft(gen.top(), &plugs, outer.top(), q);
            let direct =
                compile_operator(&PlanarTree::new(whole), &ops, &space).unwrap();

            let gen_op = compile_operator(gen, &ops, &space).unwrap();
            let plug_ops: Vec<MultiMap> = plugs
                .iter()
                .map(|p| {
                    compile_operator(&PlanarTree::new(p.clone()), &ops, &space)
                        .unwrap()
                })
                .collect();
            let refs: Vec<&MultiMap> = plug_ops.iter().collect();
            let inner = compose_tensor(&gen_op, &refs).unwrap();
            let outer_op = compile_operator(outer, &ops, &space).unwrap();
            let id = MultiMap::identity(&space);
            let mut blocks: Vec<&MultiMap> = vec![&id; outer.leaves()];
            blocks[q] = &inner;
            let composed = compose_tensor(&outer_op, &blocks).unwrap();

            if sign == int(1) {
                assert_eq!(direct, composed);
            } else {
                negatives += 1;
                let sum = direct.add(&composed).unwrap();
                assert!(
                    sum.entries().next().is_none(),
                    "direct must be the negative of the composite"
                );
            }
        }
        assert!(negatives > 0, "the sample must exercise negative signs");
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(matches!(
            ndga_dims(2, 7),
            Err(OperadError::TooLarge { .. })
        ));
        assert!(matches!(
            assn_dims(2, 4),
            Err(OperadError::NotApplicable(_))
        ));
        assert!(matches!(
            series_check(SeriesKind::NdgaLinear, 2, 7),
            Err(OperadError::TooLarge { .. })
        ));
        assert!(matches!(
            dgass_blocks(5, 2, 2),
            Err(OperadError::TooLarge { .. })
        ));
    }

    #[test]
    fn random_products_normalize_consistently() {
        // A derivation-squared spot check: normalize d(d(x*y)) at order 2 and
        // confirm the cross terms cancel pairwise.
        let t = Term::D(Box::new(Term::D(Box::new(Term::M(
            Box::new(Term::Leaf(0)),
            Box::new(Term::Leaf(1)),
        )))));
        let n = normalize(&t, 2);
        assert!(n.is_empty(), "{n:?}");
        // At order 3 the square survives with the interleaved terms.
        let n3 = normalize(&t, 3);
        let dxdy = NormalFormWord {
            labels: vec![0, 1],
            exponents: vec![1, 1],
        };
        assert!(n3.get(&dxdy).is_none(), "odd-even cross terms cancel");
        let d2x = NormalFormWord {
            labels: vec![0, 1],
            exponents: vec![2, 0],
        };
        assert_eq!(n3.get(&d2x), Some(&Scalar::one()));
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let a = ndgla_assn_dims(DimKind::Ndgla, 2, 3).unwrap();
        assert_eq!(a, KindDims::Ndgla(ndgla_dims(2, 3).unwrap()));
        let b = ndgla_assn_dims(DimKind::AssN, 2, 3).unwrap();
        assert_eq!(b, KindDims::AssN(assn_dims(2, 3).unwrap()));
    }
}
