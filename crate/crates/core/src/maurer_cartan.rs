//! Coefficient system for flatness of perturbed codifferentials.
//!
//! A perturbation of a degree-one codifferential is controlled by integer
//! coefficients c(s, power) indexed by compositions s: weighted counts of
//! lattice paths that either prepend a zero, stand still, or increment one
//! entry. The assembled equation groups the surviving terms by the power of
//! the base codifferential they multiply. Two independent consumers live
//! here as well: a two-letter word oracle that expands the perturbed power
//! directly, and a residual check on truncated-polynomial matrices.

use crate::exact::{ExactError, PolyMatrix, Scalar, SparseMatrix};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum McError {
    #[error("{what} is limited to {max}, got {got}")]
    TooLarge {
        what: &'static str,
        max: usize,
        got: usize,
    },
    #[error("need 1 <= depth <= power, got depth {depth} and power {power}")]
    BadRange { depth: usize, power: usize },
    #[error("the perturbation must vanish in its constant coefficient")]
    NotAugmented,
    #[error("the base operator must be nilpotent of order {depth}")]
    BaseNotNilpotent { depth: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A finite sequence of nonnegative integers; the empty sequence is allowed.
pub type Composition = Vec<usize>;

fn level(s: &[usize]) -> usize {
    s.iter().sum::<usize>() + s.len()
}

fn sign_of(exponent: usize) -> Scalar {
    if exponent % 2 == 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

/// The weighted path counts at a fixed power, plus their assembly into the
/// flatness equation for a fixed depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McSystem {
    pub depth: usize,
    pub power: usize,
    /// c(s, power) for every composition with level(s) <= power that some
    /// path reaches with a nonzero net weight.
    table: BTreeMap<Composition, Scalar>,
    /// Terms of the coefficient of each base power k = power - level(s),
    /// restricted to compositions with every entry below the depth.
    assembled: BTreeMap<usize, Vec<(Composition, Scalar)>>,
}

impl McSystem {
    /// The path weight of `s`, or None when `s` is out of range entirely.
    pub fn coefficient(&self, s: &[usize]) -> Option<Scalar> {
        if level(s) > self.power {
            return None;
        }
        Some(self.table.get(s).cloned().unwrap_or_else(Scalar::zero))
    }

    /// Nonzero terms multiplying the k-th power of the base codifferential.
    pub fn assembled(&self, k: usize) -> &[(Composition, Scalar)] {
        self.assembled.get(&k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn report(&self) -> McReport {
        McReport {
            depth: self.depth,
            power: self.power,
            coefficients: self
                .table
                .iter()
                .map(|(s, v)| CoefficientEntry {
                    s: s.clone(),
                    value: crate::exact::scalar_string(v),
                })
                .collect(),
            equation: self
                .assembled
                .iter()
                .map(|(k, terms)| AssembledPower {
                    k: *k,
                    terms: terms
                        .iter()
                        .map(|(s, v)| CoefficientEntry {
                            s: s.clone(),
                            value: crate::exact::scalar_string(v),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientEntry {
    pub s: Vec<usize>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssembledPower {
    pub k: usize,
    pub terms: Vec<CoefficientEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct McReport {
    pub depth: usize,
    pub power: usize,
    pub coefficients: Vec<CoefficientEntry>,
    pub equation: Vec<AssembledPower>,
}

/// Computes every path weight c(s, power) by a forward sweep: a path takes
/// `power` steps from the empty composition, each step prepending a zero
/// (weight 1), standing still (parity of level), or incrementing entry i
/// (parity of the prefix sum plus i - 1). The three moves never decrease the
/// level, so states above the power are pruned exactly.
pub fn mc_coefficients(depth: usize, power: usize) -> Result<McSystem, McError> {
    if depth < 1 || depth > power {
        return Err(McError::BadRange { depth, power });
    }
    if power > 8 {
        return Err(McError::TooLarge {
            what: "power",
            max: 8,
            got: power,
        });
    }
    let mut layer: BTreeMap<Composition, Scalar> = BTreeMap::new();
    layer.insert(Vec::new(), Scalar::one());
    for _ in 0..power {
        let mut next: BTreeMap<Composition, Scalar> = BTreeMap::new();
        let mut push = |t: Composition, v: Scalar| {
            if v.is_zero() || level(&t) > power {
                return;
            }
            let cell = next.entry(t).or_insert_with(Scalar::zero);
            *cell += v;
        };
        for (s, w) in &layer {
            let mut prepended = vec![0];
            prepended.extend_from_slice(s);
            push(prepended, w.clone());
            push(s.clone(), w * sign_of(level(s)));
            let mut prefix = 0usize;
            for i in 0..s.len() {
                let mut bumped = s.clone();
                bumped[i] += 1;
                push(bumped, w * sign_of(prefix + i));
                prefix += s[i];
            }
        }
        next.retain(|_, v| !v.is_zero());
        layer = next;
    }
    let mut assembled: BTreeMap<usize, Vec<(Composition, Scalar)>> = BTreeMap::new();
    for (s, v) in &layer {
        if s.iter().any(|&si| si >= depth) {
            continue;
        }
        let k = power - level(s);
        assembled
            .entry(k)
            .or_default()
            .push((s.clone(), v.clone()));
    }
    Ok(McSystem {
        depth,
        power,
        table: layer,
        assembled,
    })
}

// ---------------------------------------------------------------------------
// Word oracle: the free span of words in two odd letters, the base letter x
// and the perturbation letter y, modulo words containing `depth` consecutive
// x letters. The perturbed power expands directly on one side; the assembled
// equation expands through iterated bracket derivatives on the other.
// ---------------------------------------------------------------------------

const X: u8 = 0;
const Y: u8 = 1;

type Word = Vec<u8>;

/// Finitely supported scalar combination of surviving words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordPolynomial {
    terms: BTreeMap<Word, Scalar>,
}

fn has_dead_run(word: &[u8], depth: usize) -> bool {
    let mut run = 0usize;
    for &l in word {
        if l == X {
            run += 1;
            if run >= depth {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

impl WordPolynomial {
    pub fn zero() -> WordPolynomial {
        WordPolynomial::default()
    }

    /// The bare perturbation letter; the seed for iterated bracket
    /// derivatives.
    pub fn perturbation(depth: usize) -> WordPolynomial {
        WordPolynomial::single(vec![Y], depth)
    }

    fn single(word: Word, depth: usize) -> WordPolynomial {
        let mut p = WordPolynomial::zero();
        p.add_term(word, Scalar::one(), depth);
        p
    }

    fn add_term(&mut self, word: Word, coeff: Scalar, depth: usize) {
        if coeff.is_zero() || has_dead_run(&word, depth) {
            return;
        }
        match self.terms.entry(word) {
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &WordPolynomial, depth: usize) -> WordPolynomial {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone(), depth);
        }
        out
    }

    pub fn scaled(&self, factor: &Scalar) -> WordPolynomial {
        if factor.is_zero() {
            return WordPolynomial::zero();
        }
        WordPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c * factor))
                .collect(),
        }
    }

    pub fn mul(&self, other: &WordPolynomial, depth: usize) -> WordPolynomial {
        let mut out = WordPolynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                out.add_term(w, ca * cb, depth);
            }
        }
        out
    }

    pub fn sub(&self, other: &WordPolynomial, depth: usize) -> WordPolynomial {
        self.add(&other.scaled(&-Scalar::one()), depth)
    }

    /// The bracket derivative x.P -, for each word, the parity of its length
    /// times P.x. Both letters count as odd.
    pub fn bracket_derivative(&self, depth: usize) -> WordPolynomial {
        let mut out = WordPolynomial::zero();
        for (w, c) in &self.terms {
            let mut left = vec![X];
            left.extend_from_slice(w);
            out.add_term(left, c.clone(), depth);
            let mut right = w.clone();
            right.push(X);
            out.add_term(right, -(c * sign_of(w.len())), depth);
        }
        out
    }

    pub fn rendered_terms(&self) -> Vec<(String, String)> {
        self.terms
            .iter()
            .map(|(w, c)| {
                let word: String = w
                    .iter()
                    .map(|&l| if l == X { 'x' } else { 'y' })
                    .collect();
                (word, crate::exact::scalar_string(c))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NcOracleReport {
    pub depth: usize,
    pub power: usize,
    pub agree: bool,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    /// Terms of lhs - rhs, empty exactly when the sides agree.
    pub difference: Vec<(String, String)>,
}

/// Expands the perturbed power two ways in the word algebra and compares:
/// directly as (x + y)^power, and through the assembled coefficients as
/// sum_k c_k x^k with the perturbation clusters written as iterated bracket
/// derivatives of y.
pub fn nc_oracle(depth: usize, power: usize) -> Result<NcOracleReport, McError> {
    if depth > 4 {
        return Err(McError::TooLarge {
            what: "depth",
            max: 4,
            got: depth,
        });
    }
    if power > 6 {
        return Err(McError::TooLarge {
            what: "power",
            max: 6,
            got: power,
        });
    }
    let system = mc_coefficients(depth, power)?;

    let base = {
        let mut p = WordPolynomial::single(vec![X], depth);
        p.add_term(vec![Y], Scalar::one(), depth);
        p
    };
    let mut lhs = WordPolynomial::single(Vec::new(), depth);
    for _ in 0..power {
        lhs = lhs.mul(&base, depth);
    }

    // y^(a) by iterated bracket derivative; entries of assembled terms stay
    // below the depth, so a < depth suffices.
    let mut derivatives = vec![WordPolynomial::single(vec![Y], depth)];
    for a in 1..depth {
        derivatives.push(derivatives[a - 1].bracket_derivative(depth));
    }

    let mut rhs = WordPolynomial::zero();
    for k in 0..power {
        let mut x_power = Vec::new();
        for _ in 0..k {
            x_power.push(X);
        }
        let x_tail = WordPolynomial::single(x_power, depth);
        for (s, coeff) in system.assembled(k) {
            let mut cluster = WordPolynomial::single(Vec::new(), depth);
            for &si in s {
                cluster = cluster.mul(&derivatives[si], depth);
            }
            rhs = rhs.add(&cluster.mul(&x_tail, depth).scaled(coeff), depth);
        }
    }

    let difference = lhs.sub(&rhs, depth);
    Ok(NcOracleReport {
        depth,
        power,
        agree: difference.is_zero(),
        lhs_terms: lhs.term_count(),
        rhs_terms: rhs.term_count(),
        difference: difference.rendered_terms(),
    })
}

// ---------------------------------------------------------------------------
// Residual check on truncated-polynomial matrices: with a strictly nilpotent
// base and a perturbation divisible by the formal parameter, the perturbed
// power must equal the assembled equation evaluated on matrices, so the two
// flatness verdicts always coincide.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct McResidualReport {
    pub depth: usize,
    pub power: usize,
    pub order: usize,
    /// Whether the direct expansion equals the assembled equation.
    pub identity_holds: bool,
    /// Whether the perturbed power vanishes.
    pub flat_direct: bool,
    /// Whether the assembled equation vanishes.
    pub flat_equation: bool,
}

pub fn mc_residual(
    base: &SparseMatrix,
    perturbation: &PolyMatrix,
    depth: usize,
    power: usize,
) -> Result<McResidualReport, McError> {
    if depth < 1 || depth > power {
        return Err(McError::BadRange { depth, power });
    }
    if power > 6 {
        return Err(McError::TooLarge {
            what: "power",
            max: 6,
            got: power,
        });
    }
    let order = perturbation.order();
    if order > 3 {
        return Err(McError::TooLarge {
            what: "truncation order",
            max: 3,
            got: order,
        });
    }
    if !perturbation.coeff(0).is_zero() {
        return Err(McError::NotAugmented);
    }
    if !base.pow(depth)?.is_zero() {
        return Err(McError::BaseNotNilpotent { depth });
    }
    let system = mc_coefficients(depth, power)?;
    let base_poly = PolyMatrix::constant(base.clone(), order);

    let lhs = base_poly.add(perturbation)?.pow(power)?;

    // Iterated bracket derivatives of the perturbation: the perturbation is
    // odd and each derivative flips parity.
    let mut derivatives = vec![perturbation.clone()];
    for a in 1..depth {
        let prev = &derivatives[a - 1];
        let left = base_poly.mul(prev)?;
        let right = prev.mul(&base_poly)?;
        // d(f) = x f - (-1)^{deg f} f x with deg f = a (the previous parity
        // is a - 1 + 1 = a).
        let next = if a % 2 == 1 {
            left.add(&right)?
        } else {
            left.sub(&right)?
        };
        derivatives.push(next);
    }

    let n = base.rows();
    let mut rhs = PolyMatrix::zero(n, n, order);
    for k in 0..power {
        let tail = PolyMatrix::constant(base.pow(k)?, order);
        for (s, coeff) in system.assembled(k) {
            let mut cluster = PolyMatrix::constant(SparseMatrix::identity(n), order);
            for &si in s {
                cluster = cluster.mul(&derivatives[si])?;
            }
            let term = cluster.mul(&tail)?;
            let scaled = PolyMatrix::from_coeffs(
                (0..order).map(|i| term.coeff(i).scale(coeff)).collect(),
            )?;
            rhs = rhs.add(&scaled)?;
        }
    }

    Ok(McResidualReport {
        depth,
        power,
        order,
        identity_holds: lhs == rhs,
        flat_direct: lhs.is_zero(),
        flat_equation: rhs.is_zero(),
    })
}
