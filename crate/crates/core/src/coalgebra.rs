//! Truncated tensor coalgebra and coderivation lifts.
//!
//! The carrier is the span of words of length 1..=L in a basis of a graded
//! space. A family of multilinear operations, all of one degree, lifts to a
//! coderivation: each operation is applied in every window of a word, with
//! the mechanical sign picked up by moving the operation past the prefix.
//! Operations take at least one input, so lifts never lengthen words and the
//! truncation is stable under them.
//!
//! Two different vanishing notions are kept separate deliberately:
//! the full matrix power being zero (strict), and only the rows landing on
//! single letters being zero (corestriction). They agree for square-zero
//! coderivations and genuinely differ beyond that; see the chain example in
//! the tests where the third power corestricts to zero while the full matrix
//! only dies at the fifth power.

use crate::exact::{Scalar, SparseMatrix};
use crate::graded::{koszul_sign, GradedError, GradedSpace, MultiMap};
use num_traits::Zero;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoalgError {
    #[error("word length bound must be at least 1")]
    ZeroTruncation,
    #[error("component of arity {arity} exceeds the word length bound {max_len}")]
    ArityExceedsTruncation { arity: usize, max_len: usize },
    #[error("component of arity {arity} has degree {found}, expected {expected}")]
    ComponentDegree {
        arity: usize,
        found: i64,
        expected: i64,
    },
    #[error("component of arity {arity} does not act on the carrier space")]
    ComponentSpace { arity: usize },
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// Words of length 1..=max_len over the basis of a graded space, in
/// length-then-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedCoalgebra {
    space: GradedSpace,
    max_len: usize,
    words: Vec<Vec<usize>>,
    index: BTreeMap<Vec<usize>, usize>,
    offsets: Vec<usize>,
}

impl TruncatedCoalgebra {
    pub fn new(space: GradedSpace, max_len: usize) -> Result<Self, CoalgError> {
        if max_len == 0 {
            return Err(CoalgError::ZeroTruncation);
        }
        let dim = space.dim();
        let mut words = Vec::new();
        let mut offsets = vec![0usize; max_len + 2];
        for len in 1..=max_len {
            offsets[len] = words.len();
            let mut word = vec![0usize; len];
            if dim > 0 {
                loop {
                    words.push(word.clone());
                    let mut pos = len;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        word[pos] += 1;
                        if word[pos] < dim {
                            break;
                        }
                        word[pos] = 0;
                    }
                    if word.iter().all(|&c| c == 0) {
                        break;
                    }
                }
            }
        }
        offsets[max_len + 1] = words.len();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(TruncatedCoalgebra {
            space,
            max_len,
            words,
            index,
            offsets,
        })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i]
    }

    pub fn index_of(&self, word: &[usize]) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Index range of the words of a given length.
    pub fn block(&self, len: usize) -> std::ops::Range<usize> {
        if len == 0 || len > self.max_len {
            return 0..0;
        }
        self.offsets[len]..self.offsets[len + 1]
    }

    pub fn word_degree(&self, word: &[usize]) -> i64 {
        word.iter().map(|&i| self.space.degree(i)).sum()
    }

    pub fn word_name(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&i| self.space.name(i).to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// A witness that a matrix power fails to vanish: one nonzero entry, with the
/// words naming its column (input) and row (output).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerWitness {
    pub power: usize,
    pub input: String,
    pub output: String,
    pub coefficient: Scalar,
}

/// Dual-route verdict for one input length: does the single-letter output
/// block of a coderivation power vanish, and do the matrix-power and signed
/// tree-expansion computations of that block agree?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorestrictionIdentity {
    pub len: usize,
    pub matrix_route_zero: bool,
    pub tree_route_zero: bool,
    pub routes_agree: bool,
    pub witness: Option<String>,
}

/// Coderivation lift of a family of operations (keyed by arity, all of one
/// degree) on a truncated tensor coalgebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coderivation {
    coalg: TruncatedCoalgebra,
    degree: i64,
    components: BTreeMap<usize, MultiMap>,
    matrix: SparseMatrix,
}

impl Coderivation {
    pub fn new(
        coalg: TruncatedCoalgebra,
        degree: i64,
        components: BTreeMap<usize, MultiMap>,
    ) -> Result<Self, CoalgError> {
        for (&arity, comp) in &components {
            if arity > coalg.max_len() {
                return Err(CoalgError::ArityExceedsTruncation {
                    arity,
                    max_len: coalg.max_len(),
                });
            }
            if comp.arity() != arity
                || comp.domain() != coalg.space()
                || comp.codomain() != coalg.space()
            {
                return Err(CoalgError::ComponentSpace { arity });
            }
            if comp.degree() != degree {
                return Err(CoalgError::ComponentDegree {
                    arity,
                    found: comp.degree(),
                    expected: degree,
                });
            }
        }
        let n = coalg.dim();
        let mut matrix = SparseMatrix::zero(n, n);
        for (col, word) in coalg.words.iter().enumerate() {
            let len = word.len();
            for (&arity, comp) in &components {
                if arity > len {
                    continue;
                }
                for pos in 0..=(len - arity) {
                    let prefix_degrees: Vec<i64> = word[..pos]
                        .iter()
                        .map(|&i| coalg.space.degree(i))
                        .collect();
                    let sign = koszul_sign(degree, &prefix_degrees);
                    for (out_letter, coeff) in comp.evaluate(&word[pos..pos + arity]) {
                        let mut out_word = Vec::with_capacity(len - arity + 1);
                        out_word.extend_from_slice(&word[..pos]);
                        out_word.push(out_letter);
                        out_word.extend_from_slice(&word[pos + arity..]);
                        let row = coalg
                            .index_of(&out_word)
                            .expect("lift output word stays within the truncation");
                        matrix.add_to(row, col, &(sign.clone() * coeff));
                    }
                }
            }
        }
        Ok(Coderivation {
            coalg,
            degree,
            components,
            matrix,
        })
    }

    pub fn zero(coalg: TruncatedCoalgebra, degree: i64) -> Self {
        Coderivation::new(coalg, degree, BTreeMap::new()).expect("empty lift is valid")
    }

    pub fn coalgebra(&self) -> &TruncatedCoalgebra {
        &self.coalg
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<usize, MultiMap> {
        &self.components
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn power(&self, p: usize) -> SparseMatrix {
        self.matrix
            .pow(p)
            .expect("lift matrices are square")
    }

    /// Checks that the p-th matrix power vanishes identically; on failure
    /// returns one nonzero entry as a witness.
    pub fn strict_power_vanishes(&self, p: usize) -> Result<(), PowerWitness> {
        let m = self.power(p);
        let hit = m
            .iter()
            .next()
            .map(|(row, col, coeff)| (row, col, coeff.clone()));
        match hit {
            None => Ok(()),
            Some((row, col, coefficient)) => Err(PowerWitness {
                power: p,
                input: self.coalg.word_name(self.coalg.word(col)),
                output: self.coalg.word_name(self.coalg.word(row)),
                coefficient,
            }),
        }
    }

    /// Checks that the p-th power composed with the projection onto single
    /// letters vanishes; on failure returns a witness entry from the
    /// offending rows.
    pub fn corestriction_power_vanishes(&self, p: usize) -> Result<(), PowerWitness> {
        let m = self.power(p);
        let singles = self.coalg.block(1);
        let hit = m
            .iter()
            .find(|(row, _, _)| singles.contains(row))
            .map(|(row, col, coeff)| (row, col, coeff.clone()));
        match hit {
            None => Ok(()),
            Some((row, col, coefficient)) => Err(PowerWitness {
                power: p,
                input: self.coalg.word_name(self.coalg.word(col)),
                output: self.coalg.word_name(self.coalg.word(row)),
                coefficient,
            }),
        }
    }

    /// Smallest p in 1..=cap whose full matrix power vanishes.
    pub fn first_strict_vanishing_power(&self, cap: usize) -> Option<usize> {
        let mut m = SparseMatrix::identity(self.coalg.dim());
        for p in 1..=cap {
            m = m.mul(&self.matrix).expect("square");
            if m.is_zero() {
                return Some(p);
            }
        }
        None
    }

    /// Smallest p in 1..=cap whose power corestricts to zero on single
    /// letters.
    pub fn first_corestriction_vanishing_power(&self, cap: usize) -> Option<usize> {
        let singles = self.coalg.block(1);
        let mut m = SparseMatrix::identity(self.coalg.dim());
        for p in 1..=cap {
            m = m.mul(&self.matrix).expect("square");
            if m.iter().all(|(row, _, _)| !singles.contains(&row)) {
                return Some(p);
            }
        }
        None
    }

    /// The words-of-length-`from_len` to words-of-length-`to_len` block of
    /// the p-th matrix power.
    pub fn power_component(&self, p: usize, from_len: usize, to_len: usize) -> SparseMatrix {
        let m = self.power(p);
        let rows: Vec<usize> = self.coalg.block(to_len).collect();
        let cols: Vec<usize> = self.coalg.block(from_len).collect();
        m.block(&rows, &cols)
    }

    /// The arity-`len` operation read off from the p-th power: rows landing
    /// on single letters, columns ranging over words of length `len`.
    pub fn corestriction_component(&self, p: usize, len: usize) -> Result<MultiMap, CoalgError> {
        let m = self.power(p);
        let singles = self.coalg.block(1);
        let cols = self.coalg.block(len);
        let mut out = MultiMap::zero(
            self.coalg.space.clone(),
            self.coalg.space.clone(),
            len,
            self.degree * p as i64,
        )?;
        for (row, col, coeff) in m.iter() {
            if singles.contains(&row) && cols.contains(&col) {
                let word = self.coalg.word(col).to_vec();
                let letter = self.coalg.word(row)[0];
                out.add_coefficient(&word, letter, coeff.clone())?;
            }
        }
        Ok(out)
    }

    /// Evaluates, for each input length 1..=l_max, whether the single-letter
    /// output block of the p-th power vanishes, by two independent routes:
    /// the matrix power and the signed tree expansion. Both verdicts and
    /// their agreement are reported per length.
    pub fn corestriction_identities(
        &self,
        p: usize,
        l_max: usize,
    ) -> Result<Vec<CorestrictionIdentity>, CoalgError> {
        let mut out = Vec::new();
        for len in 1..=l_max.min(self.coalg.max_len()) {
            let from_matrix = self.corestriction_component(p, len)?;
            let from_trees = crate::trees::signed_tree_expansion(
                len,
                p,
                &self.components,
                self.coalg.space(),
                self.degree,
            )
            .map_err(|e| match e {
                crate::trees::TreeError::Graded(g) => CoalgError::Graded(g),
                _ => CoalgError::Graded(GradedError::SpaceMismatch("tree expansion")),
            })?;
            let witness = from_matrix.entries().next().map(|(inputs, outs)| {
                let (o, c) = outs.iter().next().expect("nonzero output map");
                format!(
                    "{} -> {} (coefficient {})",
                    self.coalg.word_name(inputs),
                    self.coalg.space().name(*o),
                    crate::exact::scalar_string(c)
                )
            });
            out.push(CorestrictionIdentity {
                len,
                matrix_route_zero: from_matrix.is_zero(),
                tree_route_zero: from_trees.is_zero(),
                routes_agree: from_matrix == from_trees,
                witness,
            });
        }
        Ok(out)
    }

    /// Verifies the coderivation property against the deconcatenation
    /// coproduct: splitting after applying equals applying to either side of
    /// a split, the right side weighted by the sign of moving the operation
    /// past the left factor.
    pub fn coproduct_compatible(&self) -> bool {
        let mut by_col: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
        for (row, col, coeff) in self.matrix.iter() {
            by_col.entry(col).or_default().push((row, coeff.clone()));
        }
        let pairs_of = |wi: usize| -> Vec<(usize, usize)> {
            let w = self.coalg.word(wi);
            (1..w.len())
                .map(|s| {
                    (
                        self.coalg.index_of(&w[..s]).unwrap(),
                        self.coalg.index_of(&w[s..]).unwrap(),
                    )
                })
                .collect()
        };
        for wi in 0..self.coalg.dim() {
            let mut lhs: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
            if let Some(outs) = by_col.get(&wi) {
                for (out, coeff) in outs {
                    for pair in pairs_of(*out) {
                        *lhs.entry(pair).or_insert_with(Scalar::zero) += coeff.clone();
                    }
                }
            }
            let mut rhs: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
            for (u, v) in pairs_of(wi) {
                if let Some(outs) = by_col.get(&u) {
                    for (ou, cu) in outs {
                        *rhs.entry((*ou, v)).or_insert_with(Scalar::zero) += cu.clone();
                    }
                }
                let left_deg = self.coalg.word_degree(self.coalg.word(u));
                let sign = koszul_sign(self.degree, &[left_deg]);
                if let Some(outs) = by_col.get(&v) {
                    for (ov, cv) in outs {
                        *rhs.entry((u, *ov)).or_insert_with(Scalar::zero) +=
                            sign.clone() * cv.clone();
                    }
                }
            }
            lhs.retain(|_, c| !c.is_zero());
            rhs.retain(|_, c| !c.is_zero());
            if lhs != rhs {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::trees::signed_tree_expansion;

    /// Shifted three-step chain: degrees -1, 0, 1, differential v0 -> v1 -> v2.
    fn chain3() -> (TruncatedCoalgebra, Coderivation) {
        let v = GradedSpace::new(vec![("v0", -1), ("v1", 0), ("v2", 1)]).unwrap();
        let mut d = MultiMap::zero(v.clone(), v.clone(), 1, 1).unwrap();
        d.add_coefficient(&[0], 1, int(1)).unwrap();
        d.add_coefficient(&[1], 2, int(1)).unwrap();
        let coalg = TruncatedCoalgebra::new(v, 2).unwrap();
        let der = Coderivation::new(coalg.clone(), 1, BTreeMap::from([(1, d)])).unwrap();
        (coalg, der)
    }

    /// Generic two-letter example with unary and binary components and
    /// distinct prime coefficients, to pin signs.
    fn generic() -> Coderivation {
        let v = GradedSpace::new(vec![("a", -1), ("b", 0)]).unwrap();
        let mut d = MultiMap::zero(v.clone(), v.clone(), 1, 1).unwrap();
        d.add_coefficient(&[0], 1, int(7)).unwrap();
        let mut m = MultiMap::zero(v.clone(), v.clone(), 2, 1).unwrap();
        m.add_coefficient(&[0, 0], 0, int(2)).unwrap();
        m.add_coefficient(&[0, 1], 1, int(3)).unwrap();
        m.add_coefficient(&[1, 0], 1, int(5)).unwrap();
        let coalg = TruncatedCoalgebra::new(v, 4).unwrap();
        Coderivation::new(coalg, 1, BTreeMap::from([(1, d), (2, m)])).unwrap()
    }

    #[test]
    fn word_order_is_length_lexicographic() {
        let v = GradedSpace::new(vec![("a", 0), ("b", 1)]).unwrap();
        let c = TruncatedCoalgebra::new(v, 2).unwrap();
        let words: Vec<Vec<usize>> = (0..c.dim()).map(|i| c.word(i).to_vec()).collect();
        assert_eq!(
            words,
            vec![
                vec![0],
                vec![1],
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![1, 1]
            ]
        );
        assert_eq!(c.block(1), 0..2);
        assert_eq!(c.block(2), 2..6);
        assert_eq!(c.word_name(&[1, 0]), "b|a");
    }

    #[test]
    fn lift_sign_uses_prefix_degrees() {
        let (coalg, der) = chain3();
        // D(v0|v0) = d(v0)|v0 + sign * v0|d(v0); the left letter has odd
        // shifted degree, so the second term carries a minus.
        let col = coalg.index_of(&[0, 0]).unwrap();
        let r10 = coalg.index_of(&[1, 0]).unwrap();
        let r01 = coalg.index_of(&[0, 1]).unwrap();
        assert_eq!(der.matrix().get(r10, col), int(1));
        assert_eq!(der.matrix().get(r01, col), int(-1));
        // Even prefix: D(v1|v0) keeps plus on the right action.
        let col = coalg.index_of(&[1, 0]).unwrap();
        let r11 = coalg.index_of(&[1, 1]).unwrap();
        let r20 = coalg.index_of(&[2, 0]).unwrap();
        assert_eq!(der.matrix().get(r20, col), int(1));
        assert_eq!(der.matrix().get(r11, col), int(1));
    }

    #[test]
    fn strict_and_corestriction_vanishing_differ() {
        let (_, der) = chain3();
        // The single-letter output dies at the third power ...
        assert!(der.corestriction_power_vanishes(3).is_ok());
        assert_eq!(der.first_corestriction_vanishing_power(10), Some(3));
        // ... but the full matrix still moves length-two words.
        let witness = der.strict_power_vanishes(3).unwrap_err();
        assert_eq!(witness.power, 3);
        assert_eq!(der.first_strict_vanishing_power(10), Some(5));
        assert!(der.strict_power_vanishes(4).is_err());
        assert!(der.strict_power_vanishes(5).is_ok());
    }

    #[test]
    fn corestriction_witness_names_words() {
        let (_, der) = chain3();
        let w = der.corestriction_power_vanishes(2).unwrap_err();
        assert_eq!(w.output, "v2");
        assert_eq!(w.input, "v0");
        assert_eq!(w.coefficient, int(1));
    }

    #[test]
    fn coderivation_is_coproduct_compatible() {
        let (_, chain) = chain3();
        assert!(chain.coproduct_compatible());
        assert!(generic().coproduct_compatible());
    }

    #[test]
    fn matrix_power_corestriction_matches_signed_tree_sum() {
        let der = generic();
        let space = der.coalgebra().space().clone();
        let ops = der.components().clone();
        for p in 1..=3usize {
            for len in 1..=4usize {
                let from_matrix = der.corestriction_component(p, len).unwrap();
                let from_trees =
                    signed_tree_expansion(len, p, &ops, &space, 1).unwrap();
                assert_eq!(
                    from_matrix, from_trees,
                    "power {p}, input length {len}"
                );
            }
        }
    }

    #[test]
    fn component_degree_must_be_uniform() {
        let v = GradedSpace::new(vec![("a", -1), ("b", 0)]).unwrap();
        let mut f = MultiMap::zero(v.clone(), v.clone(), 1, 0).unwrap();
        f.add_coefficient(&[0], 0, int(1)).unwrap();
        let coalg = TruncatedCoalgebra::new(v, 2).unwrap();
        let err = Coderivation::new(coalg, 1, BTreeMap::from([(1, f)])).unwrap_err();
        assert_eq!(
            err,
            CoalgError::ComponentDegree {
                arity: 1,
                found: 0,
                expected: 1
            }
        );
    }

    #[test]
    fn arity_above_truncation_rejected() {
        let v = GradedSpace::new(vec![("a", -1)]).unwrap();
        let m = MultiMap::zero(v.clone(), v.clone(), 3, 1).unwrap();
        let coalg = TruncatedCoalgebra::new(v, 2).unwrap();
        let err = Coderivation::new(coalg, 1, BTreeMap::from([(3, m)])).unwrap_err();
        assert_eq!(
            err,
            CoalgError::ArityExceedsTruncation {
                arity: 3,
                max_len: 2
            }
        );
    }
}
