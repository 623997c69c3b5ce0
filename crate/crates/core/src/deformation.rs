//! Ladder operators on truncated cochains, the degree-two cohomology of a
//! nilpotency order against a deformation order, a search for classes that
//! separate consecutive orders, and full deformation checks over a truncated
//! polynomial parameter.
//!
//! The k-th ladder operator sends a cochain f to the sum of the k composites
//! m^i f m^(k-1-i) of coderivation lifts; the k = 1 operator is the
//! commutator m f - f m. Everything is corestricted back to cochains, so the
//! operators become exact matrices between elementary-cochain bases.

use crate::coalgebra::{CoalgError, Coderivation, TruncatedCoalgebra};
use crate::exact::{subquotient_dim, ExactError, PolyMatrix, Scalar, SparseMatrix};
use crate::graded::{koszul_sign, GradedError, MultiMap};
use crate::maurer_cartan::{mc_residual, McError};
use crate::structures::{AlgebraPresentation, StructError};
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeformError {
    #[error("{what} is limited to {max}, got {got}")]
    TooLarge {
        what: &'static str,
        max: usize,
        got: usize,
    },
    #[error("need 2 <= depth <= power, got depth {depth} and power {power}")]
    BadRange { depth: usize, power: usize },
    #[error("source arity {arity} lies outside 1..={max_arity}")]
    ArityOutOfRange { arity: usize, max_arity: usize },
    #[error("the structure is not strictly nilpotent at order {order}: {witness}")]
    NotNilpotent { order: usize, witness: String },
    #[error("ladder composite with the commutator is nonzero at entry ({row},{col})")]
    TelescopingFailed { row: usize, col: usize },
    #[error("the commutator image leaves the two-cochain block at {name}")]
    ImageEscapes { name: String },
    #[error("a product operation is required")]
    MissingProduct,
    #[error("the cochain must act on the structure's space")]
    ForeignCochain,
    #[error(transparent)]
    Struct(#[from] StructError),
    #[error(transparent)]
    Coalg(#[from] CoalgError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Mc(#[from] McError),
}

/// Elementary cochains on the shifted space: one basis element per pair of
/// an input word of length 1..=max_arity and an output letter, ordered by
/// word index then output letter. The word index order is length first, then
/// lexicographic, so arities form contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CochainSpace {
    coalg: TruncatedCoalgebra,
    letters: usize,
}

impl CochainSpace {
    pub fn new(p: &AlgebraPresentation, max_arity: usize) -> Result<Self, DeformError> {
        let coalg = TruncatedCoalgebra::new(p.space().shift(1), max_arity)?;
        let letters = p.space().dim();
        Ok(CochainSpace { coalg, letters })
    }

    pub fn dim(&self) -> usize {
        self.coalg.dim() * self.letters
    }

    pub fn max_arity(&self) -> usize {
        self.coalg.max_len()
    }

    /// Index range of the arity-n block.
    pub fn arity_columns(&self, n: usize) -> std::ops::Range<usize> {
        let words = self.coalg.block(n);
        words.start * self.letters..words.end * self.letters
    }

    pub fn describe(&self, i: usize) -> (usize, &[usize], usize) {
        let word = self.coalg.word(i / self.letters);
        (word.len(), word, i % self.letters)
    }

    pub fn element_name(&self, i: usize) -> String {
        let (_, word, out) = self.describe(i);
        format!(
            "{} -> {}",
            self.coalg.word_name(word),
            self.coalg.space().name(out)
        )
    }

    /// The elementary map itself, on the shifted space, with its own degree.
    pub fn elementary(&self, i: usize) -> Result<MultiMap, DeformError> {
        let (arity, word, out) = self.describe(i);
        let space = self.coalg.space();
        let degree = space.degree(out) - self.coalg.word_degree(word);
        let mut map = MultiMap::zero(space.clone(), space.clone(), arity, degree)?;
        let word = word.to_vec();
        map.add_coefficient(&word, out, Scalar::from_integer(1.into()))?;
        Ok(map)
    }

    fn lift(&self, i: usize) -> Result<Coderivation, DeformError> {
        let map = self.elementary(i)?;
        let degree = map.degree();
        let arity = map.arity();
        let mut comps = BTreeMap::new();
        comps.insert(arity, map);
        Ok(Coderivation::new(self.coalg.clone(), degree, comps)?)
    }

    /// Coordinates of a single-degree map on the shifted space.
    pub fn coordinates(&self, f: &MultiMap) -> Result<Vec<Scalar>, DeformError> {
        if f.domain() != self.coalg.space() || f.codomain() != self.coalg.space() {
            return Err(DeformError::ForeignCochain);
        }
        let mut v = vec![Scalar::zero(); self.dim()];
        for (word, outs) in f.entries() {
            let wi = self
                .coalg
                .index_of(word)
                .ok_or(DeformError::ArityOutOfRange {
                    arity: word.len(),
                    max_arity: self.max_arity(),
                })?;
            for (out, c) in outs {
                v[wi * self.letters + out] = c.clone();
            }
        }
        Ok(v)
    }
}

fn nilpotency_witness(w: &crate::coalgebra::PowerWitness) -> String {
    format!("{} -> {} ({})", w.input, w.output, w.coefficient)
}

/// The ladder matrix from arity-`source_arity` cochains to the full cochain
/// space of arity at most `max_arity`. For k >= 2 the carrier lift must
/// vanish strictly at power k (this is what cancels the boundary terms when
/// the ladder meets the commutator), and that is verified first.
pub fn t_operator_at(
    p: &AlgebraPresentation,
    k: usize,
    source_arity: usize,
    max_arity: usize,
) -> Result<SparseMatrix, DeformError> {
    if max_arity > 8 {
        return Err(DeformError::TooLarge {
            what: "cochain arity bound",
            max: 8,
            got: max_arity,
        });
    }
    if source_arity < 1 || source_arity > max_arity {
        return Err(DeformError::ArityOutOfRange {
            arity: source_arity,
            max_arity,
        });
    }
    let cochains = CochainSpace::new(p, max_arity)?;
    let coder = p.coderivation(max_arity)?;
    if k >= 2 {
        if let Err(w) = coder.strict_power_vanishes(k) {
            return Err(DeformError::NotNilpotent {
                order: k,
                witness: nilpotency_witness(&w),
            });
        }
    }
    let m = coder.matrix();
    let mut powers = vec![SparseMatrix::identity(m.rows())];
    for i in 1..=k {
        let next = powers[i - 1].mul(m)?;
        powers.push(next);
    }
    let letters = cochains.letters;
    let cols = cochains.arity_columns(source_arity);
    let mut t = SparseMatrix::zero(cochains.dim(), cols.len());
    for (local, idx) in cols.enumerate() {
        let fm = cochains.lift(idx)?.matrix().clone();
        let total = if k == 1 {
            m.mul(&fm)?.sub(&fm.mul(m)?)?
        } else {
            let mut acc = SparseMatrix::zero(m.rows(), m.cols());
            for i in 0..k {
                acc = acc.add(&powers[i].mul(&fm)?.mul(&powers[k - 1 - i])?)?;
            }
            acc
        };
        for (row, col, v) in total.iter() {
            if row < letters {
                t.add_to(col * letters + row, local, &v);
            }
        }
    }
    Ok(t)
}

/// The ladder matrix with the target truncated exactly where the operator
/// can reach: arity source+1 for the commutator, source+k-1 otherwise.
pub fn t_operator(
    p: &AlgebraPresentation,
    k: usize,
    source_arity: usize,
) -> Result<SparseMatrix, DeformError> {
    let max_arity = if k == 1 {
        source_arity + 1
    } else {
        source_arity + k - 1
    };
    t_operator_at(p, k, source_arity, max_arity)
}

/// The composite of the k-th ladder operator with the commutator on
/// arity-`source_arity` cochains, formed at the operator level: for each
/// elementary cochain g the full matrix sum of m^i (mG - Gm) m^(k-1-i) is
/// assembled before corestricting, which is exactly how the two operators
/// compose. The sum collapses to m^k G - G m^k, so it vanishes whenever the
/// k-th power of the lift is strictly zero.
pub fn telescoping_product(
    p: &AlgebraPresentation,
    k: usize,
    source_arity: usize,
) -> Result<SparseMatrix, DeformError> {
    let s = source_arity;
    let max_arity = s + k + 1;
    let cochains = CochainSpace::new(p, max_arity)?;
    let coder = p.coderivation(max_arity)?;
    let m = coder.matrix();
    let mut powers = vec![SparseMatrix::identity(m.rows())];
    for i in 1..k.max(1) {
        let next = powers[i - 1].mul(m)?;
        powers.push(next);
    }
    let letters = cochains.letters;
    let cols = cochains.arity_columns(s);
    let mut t = SparseMatrix::zero(cochains.dim(), cols.len());
    for (local, idx) in cols.enumerate() {
        let g = cochains.lift(idx)?.matrix().clone();
        let commutator = m.mul(&g)?.sub(&g.mul(m)?)?;
        let mut acc = SparseMatrix::zero(m.rows(), m.cols());
        for i in 0..k {
            acc = acc.add(&powers[i].mul(&commutator)?.mul(&powers[k - 1 - i])?)?;
        }
        for (row, col, v) in acc.iter() {
            if row < letters {
                t.add_to(col * letters + row, local, v);
            }
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub depth: usize,
    pub power: usize,
    pub dim_kernel: usize,
    pub dim_image: usize,
    pub dim_h: usize,
}

/// Kernel of the power-th ladder on 2-cochains modulo the commutator image
/// of 1-cochains. The composite is verified to vanish as an exact matrix
/// product before any quotient is taken, and the commutator image must stay
/// inside the 2-cochain block for the quotient to make sense.
pub fn cohomology_hnm(
    p: &AlgebraPresentation,
    depth: usize,
    power: usize,
) -> Result<CohomologyReport, DeformError> {
    if depth < 2 || depth > power {
        return Err(DeformError::BadRange { depth, power });
    }
    if power > 6 {
        return Err(DeformError::TooLarge {
            what: "power",
            max: 6,
            got: power,
        });
    }
    let max_arity = power + 1;
    let coder = p.coderivation(max_arity)?;
    if let Err(w) = coder.strict_power_vanishes(depth) {
        return Err(DeformError::NotNilpotent {
            order: depth,
            witness: nilpotency_witness(&w),
        });
    }
    let composite = telescoping_product(p, power, 1)?;
    if let Some((row, col, _)) = composite.iter().next() {
        return Err(DeformError::TelescopingFailed { row, col });
    }
    let cochains = CochainSpace::new(p, max_arity)?;
    let t_m = t_operator_at(p, power, 2, max_arity)?;
    let t_1 = t_operator_at(p, 1, 1, max_arity)?;
    let two_block = cochains.arity_columns(2);
    for (row, _, _) in t_1.iter() {
        if !two_block.contains(&row) {
            return Err(DeformError::ImageEscapes {
                name: cochains.element_name(row),
            });
        }
    }
    let rows2: Vec<usize> = two_block.collect();
    let cols1: Vec<usize> = (0..t_1.cols()).collect();
    let b2 = t_1.block(&rows2, &cols1);
    let dim_h = match subquotient_dim(&t_m, &b2) {
        Err(ExactError::CompositionNotZero { row, col }) => {
            return Err(DeformError::TelescopingFailed { row, col })
        }
        other => other?,
    };
    Ok(CohomologyReport {
        depth,
        power,
        dim_kernel: t_m.cols() - t_m.rank(),
        dim_image: b2.rank(),
        dim_h,
    })
}

// ---------------------------------------------------------------------------
// Independent re-evaluation: lifts applied functionally to words with no
// matrix assembly, plus two direct product identities on basis tuples.
// ---------------------------------------------------------------------------

type WordTerms = BTreeMap<Vec<usize>, Scalar>;

fn lift_apply(
    coalg: &TruncatedCoalgebra,
    degree: i64,
    comps: &BTreeMap<usize, MultiMap>,
    terms: &WordTerms,
) -> WordTerms {
    let mut out: WordTerms = BTreeMap::new();
    for (word, c) in terms {
        for (&arity, comp) in comps {
            if arity > word.len() {
                continue;
            }
            for pos in 0..=(word.len() - arity) {
                let prefix: Vec<i64> = word[..pos]
                    .iter()
                    .map(|&i| coalg.space().degree(i))
                    .collect();
                let sign = koszul_sign(degree, &prefix);
                for (letter, coeff) in comp.evaluate(&word[pos..pos + arity]) {
                    let mut w = Vec::with_capacity(word.len() - arity + 1);
                    w.extend_from_slice(&word[..pos]);
                    w.push(letter);
                    w.extend_from_slice(&word[pos + arity..]);
                    let v = c * &sign * coeff;
                    if v.is_zero() {
                        continue;
                    }
                    let cell = out.entry(w).or_insert_with(Scalar::zero);
                    *cell += v;
                }
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// The k-th ladder applied to a suspended cochain, evaluated word by word
/// and collected on single-letter outputs. A second route that never builds
/// lift matrices.
pub fn ladder_value_by_words(
    p: &AlgebraPresentation,
    f: &MultiMap,
    k: usize,
    max_arity: usize,
) -> Result<BTreeMap<(Vec<usize>, usize), Scalar>, DeformError> {
    let coalg = TruncatedCoalgebra::new(p.space().shift(1), max_arity)?;
    if f.domain() != coalg.space() || f.codomain() != coalg.space() {
        return Err(DeformError::ForeignCochain);
    }
    let m_comps = p.suspended_ops()?;
    let mut f_comps = BTreeMap::new();
    f_comps.insert(f.arity(), f.clone());
    let f_degree = f.degree();
    let routes: Vec<(usize, usize, bool)> = if k == 1 {
        vec![(1, 0, false), (0, 1, true)]
    } else {
        (0..k).map(|i| (i, k - 1 - i, false)).collect()
    };
    let mut out = BTreeMap::new();
    for wi in 0..coalg.dim() {
        let word = coalg.word(wi).to_vec();
        let mut start: WordTerms = BTreeMap::new();
        start.insert(word.clone(), Scalar::from_integer(1.into()));
        let mut total: WordTerms = BTreeMap::new();
        for (left, right, negate) in &routes {
            let mut cur = start.clone();
            for _ in 0..*right {
                cur = lift_apply(&coalg, 1, &m_comps, &cur);
            }
            cur = lift_apply(&coalg, f_degree, &f_comps, &cur);
            for _ in 0..*left {
                cur = lift_apply(&coalg, 1, &m_comps, &cur);
            }
            for (w, c) in cur {
                let v = if *negate { -c } else { c };
                let cell = total.entry(w).or_insert_with(Scalar::zero);
                *cell += v;
            }
        }
        for (w, c) in total {
            if w.len() == 1 && !c.is_zero() {
                out.insert((word.clone(), w[0]), c);
            }
        }
    }
    Ok(out)
}

type Combo = BTreeMap<usize, Scalar>;

fn combo_single(i: usize) -> Combo {
    let mut c = Combo::new();
    c.insert(i, Scalar::from_integer(1.into()));
    c
}

fn combo_apply2(g: &MultiMap, x: &Combo, y: &Combo) -> Combo {
    let mut out = Combo::new();
    for (i, a) in x {
        for (j, b) in y {
            for (o, c) in g.evaluate(&[*i, *j]) {
                let v = a * b * &c;
                if v.is_zero() {
                    continue;
                }
                let cell = out.entry(o).or_insert_with(Scalar::zero);
                *cell += v;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn combo_accumulate(acc: &mut Combo, terms: Combo, negate: bool) {
    for (o, v) in terms {
        let cell = acc.entry(o).or_insert_with(Scalar::zero);
        if negate {
            *cell -= v;
        } else {
            *cell += v;
        }
    }
    acc.retain(|_, v| !v.is_zero());
}

/// Six-term check on all basis 4-tuples for a binary cochain over a plain
/// product: f(ab,c)d + a f(bc,d) + f(a,b) cd against ab f(c,d) + f(a,bc) d +
/// a f(b,cd). Returns the first violating tuple, if any.
pub fn six_term_identity(
    p: &AlgebraPresentation,
    f: &MultiMap,
) -> Result<Option<String>, DeformError> {
    let m = p.mult().ok_or(DeformError::MissingProduct)?;
    let d = p.space().dim();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let (sa, sb, sc, se) = (
                        combo_single(a),
                        combo_single(b),
                        combo_single(c),
                        combo_single(e),
                    );
                    let mut acc = Combo::new();
                    combo_accumulate(
                        &mut acc,
                        combo_apply2(m, &combo_apply2(f, &combo_apply2(m, &sa, &sb), &sc), &se),
                        false,
                    );
                    combo_accumulate(
                        &mut acc,
                        combo_apply2(m, &sa, &combo_apply2(f, &combo_apply2(m, &sb, &sc), &se)),
                        false,
                    );
                    combo_accumulate(
                        &mut acc,
                        combo_apply2(m, &combo_apply2(f, &sa, &sb), &combo_apply2(m, &sc, &se)),
                        false,
                    );
                    combo_accumulate(
                        &mut acc,
                        combo_apply2(m, &combo_apply2(m, &sa, &sb), &combo_apply2(f, &sc, &se)),
                        true,
                    );
                    combo_accumulate(
                        &mut acc,
                        combo_apply2(m, &combo_apply2(f, &sa, &combo_apply2(m, &sb, &sc)), &se),
                        true,
                    );
                    combo_accumulate(
                        &mut acc,
                        combo_apply2(m, &sa, &combo_apply2(f, &sb, &combo_apply2(m, &sc, &se))),
                        true,
                    );
                    if !acc.is_empty() {
                        let names = p.space();
                        return Ok(Some(format!(
                            "({},{},{},{})",
                            names.name(a),
                            names.name(b),
                            names.name(c),
                            names.name(e)
                        )));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Four-term cocycle check on all basis 3-tuples: f(a,b) c + f(ab,c) against
/// a f(b,c) + f(a,bc). Returns the first violating tuple, if any.
pub fn cocycle_identity(
    p: &AlgebraPresentation,
    f: &MultiMap,
) -> Result<Option<String>, DeformError> {
    let m = p.mult().ok_or(DeformError::MissingProduct)?;
    let d = p.space().dim();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let (sa, sb, sc) = (combo_single(a), combo_single(b), combo_single(c));
                let mut acc = Combo::new();
                combo_accumulate(
                    &mut acc,
                    combo_apply2(m, &combo_apply2(f, &sa, &sb), &sc),
                    false,
                );
                combo_accumulate(
                    &mut acc,
                    combo_apply2(f, &combo_apply2(m, &sa, &sb), &sc),
                    false,
                );
                combo_accumulate(
                    &mut acc,
                    combo_apply2(m, &sa, &combo_apply2(f, &sb, &sc)),
                    true,
                );
                combo_accumulate(
                    &mut acc,
                    combo_apply2(f, &sa, &combo_apply2(m, &sb, &sc)),
                    true,
                );
                if !acc.is_empty() {
                    let names = p.space();
                    return Ok(Some(format!(
                        "({},{},{})",
                        names.name(a),
                        names.name(b),
                        names.name(c)
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Classical alternating-sign differential built from the product alone, on
/// the arity-`source_arity` block, coded directly from its defining formula.
/// Index layout matches `CochainSpace`: word index times dimension plus
/// output letter, words in lexicographic order.
pub fn hochschild_matrix(
    p: &AlgebraPresentation,
    source_arity: usize,
) -> Result<SparseMatrix, DeformError> {
    let m = p.mult().ok_or(DeformError::MissingProduct)?;
    let d = p.space().dim();
    let n = source_arity;
    if n < 1 || n > 6 {
        return Err(DeformError::ArityOutOfRange {
            arity: n,
            max_arity: 6,
        });
    }
    let words = |len: usize| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * d);
            for w in &out {
                for i in 0..d {
                    let mut v = w.clone();
                    v.push(i);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    };
    let sources = words(n);
    let targets = words(n + 1);
    let mut h = SparseMatrix::zero(targets.len() * d, sources.len() * d);
    for (src_local, u) in sources.iter().enumerate() {
        for o in 0..d {
            let col = src_local * d + o;
            for (row_word, w) in targets.iter().enumerate() {
                // a0 f(a1..an)
                if &w[1..] == u.as_slice() {
                    for (out, c) in m.evaluate(&[w[0], o]) {
                        h.add_to(row_word * d + out, col, &c);
                    }
                }
                // (-1)^i f(.., a_{i-1} a_i, ..)
                for i in 1..=n {
                    for (mid, c) in m.evaluate(&[w[i - 1], w[i]]) {
                        let mut merged = Vec::with_capacity(n);
                        merged.extend_from_slice(&w[..i - 1]);
                        merged.push(mid);
                        merged.extend_from_slice(&w[i + 1..]);
                        if &merged == u {
                            let signed = if i % 2 == 1 { -c } else { c };
                            h.add_to(row_word * d + o, col, &signed);
                        }
                    }
                }
                // (-1)^{n+1} f(a0..a_{n-1}) a_n
                if &w[..n] == u.as_slice() {
                    for (out, c) in m.evaluate(&[o, w[n]]) {
                        let signed = if (n + 1) % 2 == 1 { -c } else { c };
                        h.add_to(row_word * d + out, col, &signed);
                    }
                }
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub coordinates: Vec<(String, String)>,
    pub upper_vanishes: bool,
    pub lower_nonzero: bool,
    pub six_term_violation: Option<String>,
    pub cocycle_violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProperSearchReport {
    pub depth: usize,
    pub power: usize,
    pub kernel_dim: usize,
    pub lower_kernel_dim: usize,
    pub image_dim: usize,
    pub certificate: Option<Certificate>,
}

/// Search the kernel of the power-th ladder on 2-cochains for a vector
/// outside the span of the (power-1)-th kernel and the commutator image.
/// A hit is re-verified through the word route, and, when the structure is a
/// plain product and the hit sits in one degree, through the two direct
/// product identities as well.
pub fn proper_search(
    p: &AlgebraPresentation,
    depth: usize,
    power: usize,
) -> Result<ProperSearchReport, DeformError> {
    if depth < 2 || power <= depth {
        return Err(DeformError::BadRange { depth, power });
    }
    if power > 5 {
        return Err(DeformError::TooLarge {
            what: "power",
            max: 5,
            got: power,
        });
    }
    let max_arity = power + 1;
    let cochains = CochainSpace::new(p, max_arity)?;
    let t_hi = t_operator_at(p, power, 2, max_arity)?;
    let t_lo = t_operator_at(p, power - 1, 2, max_arity)?;
    let t_1 = t_operator_at(p, 1, 1, max_arity)?;
    let two_range = cochains.arity_columns(2);
    for (row, _, _) in t_1.iter() {
        if !two_range.contains(&row) {
            return Err(DeformError::ImageEscapes {
                name: cochains.element_name(row),
            });
        }
    }
    let two_block: Vec<usize> = two_range.clone().collect();
    let cols1: Vec<usize> = (0..t_1.cols()).collect();
    let b2 = t_1.block(&two_block, &cols1);
    let ker_hi = t_hi.rank_kernel().kernel;
    let ker_lo = t_lo.rank_kernel().kernel;
    let span = SparseMatrix::from_columns(t_hi.cols(), &ker_lo).hstack(&b2)?;
    let mut certificate = None;
    for v in &ker_hi {
        if crate::exact::in_column_span(&span, v)? {
            continue;
        }
        let offset = two_range.start;
        let mut coordinates = Vec::new();
        let mut by_degree: BTreeMap<i64, MultiMap> = BTreeMap::new();
        for (local, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let idx = offset + local;
            coordinates.push((cochains.element_name(idx), crate::exact::scalar_string(c)));
            let elem = cochains.elementary(idx)?;
            let degree = elem.degree();
            let slot = match by_degree.entry(degree) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(MultiMap::zero(
                    cochains.coalg.space().clone(),
                    cochains.coalg.space().clone(),
                    2,
                    degree,
                )?),
            };
            let (_, word, out) = cochains.describe(idx);
            let word = word.to_vec();
            slot.add_coefficient(&word, out, c.clone())?;
        }
        let mut upper_vanishes = true;
        let mut lower_nonzero = false;
        for part in by_degree.values() {
            if !ladder_value_by_words(p, part, power, max_arity)?.is_empty() {
                upper_vanishes = false;
            }
            if !ladder_value_by_words(p, part, power - 1, max_arity)?.is_empty() {
                lower_nonzero = true;
            }
        }
        let single_plain = if by_degree.len() == 1 && p.diff().is_none() {
            let part = by_degree.values().next().expect("one degree").clone();
            Some(part.suspend(-1))
        } else {
            None
        };
        let (six_term_violation, cocycle_violation) = match &single_plain {
            Some(f_plain) if power == 3 => (
                six_term_identity(p, f_plain)?,
                cocycle_identity(p, f_plain)?,
            ),
            _ => (None, None),
        };
        certificate = Some(Certificate {
            coordinates,
            upper_vanishes,
            lower_nonzero,
            six_term_violation,
            cocycle_violation,
        });
        break;
    }
    Ok(ProperSearchReport {
        depth,
        power,
        kernel_dim: ker_hi.len(),
        lower_kernel_dim: ker_lo.len(),
        image_dim: b2.rank(),
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullCheckReport {
    pub depth: usize,
    pub power: usize,
    pub order: usize,
    pub flat: bool,
    pub linear_term_vanishes: bool,
    pub linear_matches_ladder: bool,
    pub quadratic_term_vanishes: Option<bool>,
    pub mc_flat_direct: Option<bool>,
    pub mc_identity_holds: Option<bool>,
}

/// Deform the carrier lift by h times the suspended cochain and raise to the
/// given power over truncated polynomials. The order-h coefficient must equal
/// the explicit ladder sum; at order 3 the flatness verdict is cross-checked
/// against the coefficient-system residual on the same matrices.
pub fn full_check(
    p: &AlgebraPresentation,
    f: &MultiMap,
    depth: usize,
    power: usize,
    order: usize,
) -> Result<FullCheckReport, DeformError> {
    if !(2..=3).contains(&order) {
        return Err(DeformError::TooLarge {
            what: "parameter order",
            max: 3,
            got: order,
        });
    }
    if depth < 2 || depth > power {
        return Err(DeformError::BadRange { depth, power });
    }
    if power > 6 {
        return Err(DeformError::TooLarge {
            what: "power",
            max: 6,
            got: power,
        });
    }
    if f.domain() != p.space() || f.codomain() != p.space() {
        return Err(DeformError::ForeignCochain);
    }
    let max_arity = (f.arity() + power - 1).max(power + 1);
    let coder = p.coderivation(max_arity)?;
    if let Err(w) = coder.strict_power_vanishes(depth) {
        return Err(DeformError::NotNilpotent {
            order: depth,
            witness: nilpotency_witness(&w),
        });
    }
    let f_hat = f.suspend(1);
    let mut comps = BTreeMap::new();
    comps.insert(f_hat.arity(), f_hat.clone());
    let coalg = TruncatedCoalgebra::new(p.space().shift(1), max_arity)?;
    let f_lift = Coderivation::new(coalg, f_hat.degree(), comps)?;
    let m = coder.matrix().clone();
    let fm = f_lift.matrix().clone();
    let mut x_coeffs = vec![m.clone(), fm.clone()];
    while x_coeffs.len() < order {
        x_coeffs.push(SparseMatrix::zero(m.rows(), m.cols()));
    }
    let x = PolyMatrix::from_coeffs(x_coeffs)?;
    let powered = x.pow(power)?;
    let mut m_powers = vec![SparseMatrix::identity(m.rows())];
    for i in 1..power {
        let next = m_powers[i - 1].mul(&m)?;
        m_powers.push(next);
    }
    let mut ladder = SparseMatrix::zero(m.rows(), m.cols());
    for i in 0..power {
        ladder = ladder.add(&m_powers[i].mul(&fm)?.mul(&m_powers[power - 1 - i])?)?;
    }
    let linear = powered.coeff(1);
    let report_order3 = if order == 3 {
        let pert = PolyMatrix::from_coeffs(vec![
            SparseMatrix::zero(m.rows(), m.cols()),
            fm.clone(),
            SparseMatrix::zero(m.rows(), m.cols()),
        ])?;
        let mc = mc_residual(&m, &pert, depth, power)?;
        (
            Some(powered.coeff(2).is_zero()),
            Some(mc.flat_direct),
            Some(mc.identity_holds),
        )
    } else {
        (None, None, None)
    };
    Ok(FullCheckReport {
        depth,
        power,
        order,
        flat: powered.is_zero(),
        linear_term_vanishes: linear.is_zero(),
        linear_matches_ladder: *linear == ladder,
        quadratic_term_vanishes: report_order3.0,
        mc_flat_direct: report_order3.1,
        mc_identity_holds: report_order3.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::graded::GradedSpace;

    fn unital_one_dim() -> AlgebraPresentation {
        let space = GradedSpace::new(vec![("u", 0)]).unwrap();
        let mut m = MultiMap::zero(space.clone(), space.clone(), 2, 0).unwrap();
        m.add_coefficient(&[0, 0], 0, int(1)).unwrap();
        AlgebraPresentation::nassociative(space, m, 2).unwrap()
    }

    fn dual_numbers() -> AlgebraPresentation {
        let space = GradedSpace::new(vec![("e", 0), ("x", 0)]).unwrap();
        let mut m = MultiMap::zero(space.clone(), space.clone(), 2, 0).unwrap();
        m.add_coefficient(&[0, 0], 0, int(1)).unwrap();
        m.add_coefficient(&[0, 1], 1, int(1)).unwrap();
        m.add_coefficient(&[1, 0], 1, int(1)).unwrap();
        AlgebraPresentation::nassociative(space, m, 2).unwrap()
    }

    fn truncated_cubic() -> AlgebraPresentation {
        let space = GradedSpace::new(vec![("u", 0), ("x", 0), ("y", 0)]).unwrap();
        let mut m = MultiMap::zero(space.clone(), space.clone(), 2, 0).unwrap();
        for i in 0..3 {
            m.add_coefficient(&[0, i], i, int(1)).unwrap();
            if i > 0 {
                m.add_coefficient(&[i, 0], i, int(1)).unwrap();
            }
        }
        m.add_coefficient(&[1, 1], 2, int(1)).unwrap();
        AlgebraPresentation::nassociative(space, m, 2).unwrap()
    }

    fn zero_mult() -> AlgebraPresentation {
        let space = GradedSpace::new(vec![("a", 0), ("b", 0)]).unwrap();
        let m = MultiMap::zero(space.clone(), space.clone(), 2, 0).unwrap();
        AlgebraPresentation::nassociative(space, m, 2).unwrap()
    }

    fn graded_line() -> AlgebraPresentation {
        let space = GradedSpace::new(vec![("a", 0), ("b", 1)]).unwrap();
        let mut m = MultiMap::zero(space.clone(), space.clone(), 2, 0).unwrap();
        m.add_coefficient(&[0, 0], 0, int(1)).unwrap();
        m.add_coefficient(&[0, 1], 1, int(1)).unwrap();
        m.add_coefficient(&[1, 0], 1, int(1)).unwrap();
        AlgebraPresentation::nassociative(space, m, 2).unwrap()
    }

    fn binary_cochain(
        p: &AlgebraPresentation,
        entries: &[(usize, usize, usize, i64)],
    ) -> MultiMap {
        let space = p.space().clone();
        let mut f = MultiMap::zero(space.clone(), space, 2, 0).unwrap();
        for &(a, b, o, c) in entries {
            f.add_coefficient(&[a, b], o, int(c)).unwrap();
        }
        f
    }

    #[test]
    fn cochain_blocks_count_words_times_letters() {
        let p = dual_numbers();
        let c = CochainSpace::new(&p, 3).unwrap();
        assert_eq!(c.dim(), (2 + 4 + 8) * 2);
        assert_eq!(c.arity_columns(1), 0..4);
        assert_eq!(c.arity_columns(2), 4..12);
    }

    #[test]
    fn zero_product_gives_zero_ladders() {
        let p = zero_mult();
        for k in 1..=4 {
            let t = t_operator(&p, k, 2).unwrap();
            assert!(t.iter().next().is_none(), "ladder {k} must vanish");
        }
    }

    #[test]
    fn one_dim_unital_third_ladder_vanishes() {
        let p = unital_one_dim();
        let t3 = t_operator(&p, 3, 2).unwrap();
        assert!(t3.iter().next().is_none());
        // the commutator itself is nonzero on 1-cochains, so the vanishing
        // above is not an artifact of everything being zero
        let t1 = t_operator(&p, 1, 1).unwrap();
        assert!(t1.iter().next().is_some());
    }

    // The comparison target is the ungraded alternating-sign formula, so it
    // only applies to fixtures concentrated in degree zero.
    #[test]
    fn ladders_match_the_classical_differential_up_to_one_sign() {
        for p in [dual_numbers(), truncated_cubic()] {
            for (k, arity) in [(1usize, 1usize), (2, 2)] {
                let cochains = CochainSpace::new(&p, arity + 1).unwrap();
                let t = t_operator(&p, k, arity).unwrap();
                let rows: Vec<usize> = cochains.arity_columns(arity + 1).collect();
                let cols: Vec<usize> = (0..t.cols()).collect();
                let top = t.block(&rows, &cols);
                let h = hochschild_matrix(&p, arity).unwrap();
                let matches_plus = top == h;
                let matches_minus = top == h.scale(&int(-1));
                assert!(
                    matches_plus || matches_minus,
                    "ladder {k} on arity {arity} is not the classical differential"
                );
            }
        }
    }

    #[test]
    fn ladder_kernel_on_two_cochains_matches_the_cocycle_kernel() {
        let p = dual_numbers();
        let t2 = t_operator(&p, 2, 2).unwrap();
        let h = hochschild_matrix(&p, 2).unwrap();
        assert_eq!(t2.cols(), h.cols());
        assert_eq!(t2.cols() - t2.rank(), h.cols() - h.rank());
        let good = binary_cochain(&p, &[(1, 1, 0, 1)]);
        assert!(cocycle_identity(&p, &good).unwrap().is_none());
        let bad = binary_cochain(&p, &[(1, 0, 0, 1)]);
        assert!(cocycle_identity(&p, &bad).unwrap().is_some());
    }

    #[test]
    fn telescoping_vanishes_from_the_nilpotency_order_onward() {
        for p in [
            unital_one_dim(),
            dual_numbers(),
            truncated_cubic(),
            graded_line(),
        ] {
            for k in 2..=4 {
                for s in 1..=2 {
                    let prod = telescoping_product(&p, k, s).unwrap();
                    assert!(
                        prod.iter().next().is_none(),
                        "composite must vanish at k={k}, s={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_grows_with_the_ladder_index() {
        for p in [dual_numbers(), truncated_cubic()] {
            for m_low in 2..=3usize {
                let max_arity = m_low + 2;
                let t_low = t_operator_at(&p, m_low, 2, max_arity).unwrap();
                let t_high = t_operator_at(&p, m_low + 1, 2, max_arity).unwrap();
                for v in t_low.rank_kernel().kernel {
                    let col = SparseMatrix::from_columns(t_high.cols(), &[v]);
                    assert!(t_high.mul(&col).unwrap().iter().next().is_none());
                }
            }
        }
    }

    #[test]
    fn word_route_agrees_with_the_matrix_route() {
        let p = truncated_cubic();
        let max_arity = 4;
        let cochains = CochainSpace::new(&p, max_arity).unwrap();
        let t3 = t_operator_at(&p, 3, 2, max_arity).unwrap();
        let offset = cochains.arity_columns(2).start;
        for local in [0usize, 7, 13, 20] {
            let idx = offset + local;
            let elem = cochains.elementary(idx).unwrap();
            let words = ladder_value_by_words(&p, &elem, 3, max_arity).unwrap();
            let mut from_matrix = BTreeMap::new();
            for (row, col, v) in t3.iter() {
                if col == local {
                    let (_, w, o) = cochains.describe(row);
                    from_matrix.insert((w.to_vec(), o), v.clone());
                }
            }
            assert_eq!(words, from_matrix);
        }
    }

    #[test]
    fn one_dim_unital_cohomology_vanishes_at_two_three() {
        let report = cohomology_hnm(&unital_one_dim(), 2, 3).unwrap();
        assert_eq!(report.dim_kernel, 1);
        assert_eq!(report.dim_image, 1);
        assert_eq!(report.dim_h, 0);
    }

    #[test]
    fn zero_product_cohomology_is_the_whole_block() {
        let report = cohomology_hnm(&zero_mult(), 2, 2).unwrap();
        assert_eq!(report.dim_h, 8);
        assert_eq!(report.dim_image, 0);
    }

    #[test]
    fn full_check_accepts_a_cocycle_and_rejects_a_non_cocycle() {
        let p = dual_numbers();
        let good = binary_cochain(&p, &[(1, 1, 0, 1)]);
        let report = full_check(&p, &good, 2, 2, 2).unwrap();
        assert!(report.flat);
        assert!(report.linear_term_vanishes);
        assert!(report.linear_matches_ladder);
        let bad = binary_cochain(&p, &[(1, 0, 0, 1)]);
        let report = full_check(&p, &bad, 2, 2, 2).unwrap();
        assert!(!report.flat);
        assert!(!report.linear_term_vanishes);
        assert!(
            report.linear_matches_ladder,
            "residual must be the ladder value"
        );
    }

    #[test]
    fn full_check_order_three_cross_checks_the_coefficient_system() {
        let p = dual_numbers();
        let good = binary_cochain(&p, &[(1, 1, 0, 1)]);
        let report = full_check(&p, &good, 2, 2, 3).unwrap();
        assert_eq!(report.mc_flat_direct, Some(report.flat));
        assert_eq!(report.mc_identity_holds, Some(true));
        assert!(report.linear_term_vanishes);
    }

    #[test]
    fn proper_search_returns_nothing_on_the_unital_point() {
        let report = proper_search(&unital_one_dim(), 2, 3).unwrap();
        assert!(report.certificate.is_none());
        assert_eq!(report.kernel_dim, 1);
    }

    #[test]
    fn proper_search_certificates_verify_independently() {
        for p in [dual_numbers(), truncated_cubic(), graded_line()] {
            let report = proper_search(&p, 2, 3).unwrap();
            if let Some(cert) = report.certificate {
                assert!(cert.upper_vanishes);
                assert!(cert.lower_nonzero);
                assert!(!cert.coordinates.is_empty());
            }
        }
    }

    #[test]
    fn ladder_rejects_a_structure_whose_lift_does_not_square_to_zero() {
        let space = GradedSpace::new(vec![("a", 0), ("b", 0)]).unwrap();
        let mut m = MultiMap::zero(space.clone(), space.clone(), 2, 0).unwrap();
        m.add_coefficient(&[0, 0], 1, int(1)).unwrap();
        m.add_coefficient(&[1, 0], 0, int(1)).unwrap();
        let p = AlgebraPresentation::nassociative(space, m, 2).unwrap();
        let err = t_operator(&p, 2, 2).unwrap_err();
        assert!(matches!(err, DeformError::NotNilpotent { order: 2, .. }));
        let err = cohomology_hnm(&p, 2, 3).unwrap_err();
        assert!(matches!(err, DeformError::NotNilpotent { order: 2, .. }));
    }

    #[test]
    fn reports_serialize_with_stable_fields() {
        let report = cohomology_hnm(&unital_one_dim(), 2, 3).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["dim_h"], 0);
        let search = proper_search(&unital_one_dim(), 2, 3).unwrap();
        let json = serde_json::to_value(&search).unwrap();
        assert!(json["certificate"].is_null());
    }
}
