//! Exact rational scalars and sparse matrices.
//!
//! Scalars are arbitrary-precision rationals kept in lowest terms with a
//! positive denominator. Matrices are sparse maps from (row, column) to a
//! nonzero scalar; elimination is plain exact Gaussian elimination with a
//! deterministic pivot rule (sparsest eligible row, then lowest row index),
//! so ranks and kernel bases are reproducible across runs and platforms.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Scalar = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("zero denominator in rational {0}/0")]
    ZeroDenominator(String),
    #[error("malformed rational literal `{0}`")]
    BadLiteral(String),
    #[error("shape mismatch: {left} vs {right} for {op}")]
    ShapeMismatch {
        left: String,
        right: String,
        op: &'static str,
    },
    #[error("matrix power requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("subquotient requires A*B = 0, but the product has a nonzero entry at ({row},{col})")]
    CompositionNotZero { row: usize, col: usize },
}

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Result<Scalar, ExactError> {
    if q == 0 {
        return Err(ExactError::ZeroDenominator(p.to_string()));
    }
    Ok(Scalar::new(BigInt::from(p), BigInt::from(q)))
}

/// Parses `"p"`, `"p/q"` or `"-p/q"` with arbitrary-precision parts.
pub fn parse_scalar(text: &str) -> Result<Scalar, ExactError> {
    let s = text.trim();
    let mut parts = s.splitn(2, '/');
    let num = parts.next().unwrap_or("");
    let p: BigInt = num
        .parse()
        .map_err(|_| ExactError::BadLiteral(text.to_string()))?;
    match parts.next() {
        None => Ok(Scalar::from_integer(p)),
        Some(den) => {
            let q: BigInt = den
                .parse()
                .map_err(|_| ExactError::BadLiteral(text.to_string()))?;
            if q.is_zero() {
                return Err(ExactError::ZeroDenominator(p.to_string()));
            }
            Ok(Scalar::new(p, q))
        }
    }
}

/// Renders a scalar as `p` or `p/q`, the inverse of [`parse_scalar`].
pub fn scalar_string(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Sparse matrix over the rationals. Absent entries are zero; stored entries
/// are never zero.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseMatrix({}x{}, nnz={})", self.rows, self.cols, self.entries.len())?;
        if self.entries.len() <= 32 {
            for ((r, c), v) in &self.entries {
                write!(f, "\n  ({r},{c}) = {}", scalar_string(v))?;
            }
        }
        Ok(())
    }
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMatrix::zero(n, n);
        for i in 0..n {
            m.entries.insert((i, i), Scalar::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> Scalar {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, row: usize, col: usize, value: Scalar) {
        assert!(row < self.rows && col < self.cols, "index out of range");
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn add_to(&mut self, row: usize, col: usize, value: &Scalar) {
        if value.is_zero() {
            return;
        }
        assert!(row < self.rows && col < self.cols, "index out of range");
        let cell = self.entries.entry((row, col)).or_insert_with(Scalar::zero);
        *cell += value;
        if cell.is_zero() {
            self.entries.remove(&(row, col));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    /// First nonzero entry in column order (column, then row), if any.
    pub fn first_nonzero_by_col(&self) -> Option<(usize, usize)> {
        self.entries
            .keys()
            .map(|&(r, c)| (c, r))
            .min()
            .map(|(c, r)| (r, c))
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix, ExactError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(ExactError::ShapeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
                op: "add",
            });
        }
        let mut out = self.clone();
        for ((r, c), v) in &other.entries {
            out.add_to(*r, *c, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SparseMatrix) -> Result<SparseMatrix, ExactError> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, factor: &Scalar) -> SparseMatrix {
        if factor.is_zero() {
            return SparseMatrix::zero(self.rows, self.cols);
        }
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= factor;
        }
        out
    }

    pub fn mul(&self, other: &SparseMatrix) -> Result<SparseMatrix, ExactError> {
        if self.cols != other.rows {
            return Err(ExactError::ShapeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
                op: "mul",
            });
        }
        // Group the left factor by column so each right entry is visited once.
        let mut by_col: BTreeMap<usize, Vec<(usize, &Scalar)>> = BTreeMap::new();
        for ((r, c), v) in &self.entries {
            by_col.entry(*c).or_default().push((*r, v));
        }
        let mut out = SparseMatrix::zero(self.rows, other.cols);
        for ((k, c), bv) in &other.entries {
            if let Some(lefts) = by_col.get(k) {
                for (r, av) in lefts {
                    out.add_to(*r, *c, &(*av * bv).clone());
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Result<SparseMatrix, ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = SparseMatrix::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Extracts the sub-block with the given row and column index sets,
    /// reindexed consecutively in the given order.
    pub fn block(&self, row_idx: &[usize], col_idx: &[usize]) -> SparseMatrix {
        let rmap: BTreeMap<usize, usize> = row_idx.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let cmap: BTreeMap<usize, usize> = col_idx.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut out = SparseMatrix::zero(row_idx.len(), col_idx.len());
        for ((r, c), v) in &self.entries {
            if let (Some(&rr), Some(&cc)) = (rmap.get(r), cmap.get(c)) {
                out.entries.insert((rr, cc), v.clone());
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &SparseMatrix) -> Result<SparseMatrix, ExactError> {
        if self.rows != other.rows {
            return Err(ExactError::ShapeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
                op: "hstack",
            });
        }
        let mut out = SparseMatrix::zero(self.rows, self.cols + other.cols);
        for ((r, c), v) in &self.entries {
            out.entries.insert((*r, *c), v.clone());
        }
        for ((r, c), v) in &other.entries {
            out.entries.insert((*r, c + self.cols), v.clone());
        }
        Ok(out)
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Scalar>]) -> SparseMatrix {
        let mut out = SparseMatrix::zero(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (r, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    out.entries.insert((r, c), v.clone());
                }
            }
        }
        out
    }

    pub fn apply(&self, vector: &[Scalar]) -> Result<Vec<Scalar>, ExactError> {
        if vector.len() != self.cols {
            return Err(ExactError::ShapeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}", vector.len()),
                op: "apply",
            });
        }
        let mut out = vec![Scalar::zero(); self.rows];
        for ((r, c), v) in &self.entries {
            if !vector[*c].is_zero() {
                out[*r] += v * &vector[*c];
            }
        }
        Ok(out)
    }

    /// Exact rank and a basis of the right kernel.
    ///
    /// Pivot rule: columns are scanned left to right; among eligible rows the
    /// sparsest wins, ties broken by lowest row index. Tests pin the output,
    /// so the rule must not change silently.
    pub fn rank_kernel(&self) -> RankKernel {
        let mut work: Vec<BTreeMap<usize, Scalar>> = vec![BTreeMap::new(); self.rows];
        for ((r, c), v) in &self.entries {
            work[*r].insert(*c, v.clone());
        }
        let mut pivot_of_col: BTreeMap<usize, usize> = BTreeMap::new();
        let mut used_rows = vec![false; self.rows];
        for col in 0..self.cols {
            let mut best: Option<(usize, usize)> = None; // (nnz, row)
            for (r, row) in work.iter().enumerate() {
                if used_rows[r] || !row.contains_key(&col) {
                    continue;
                }
                let key = (row.len(), r);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
            let Some((_, prow)) = best else { continue };
            used_rows[prow] = true;
            pivot_of_col.insert(col, prow);
            let pval = work[prow].get(&col).cloned().expect("pivot entry");
            let inv = Scalar::one() / pval;
            let scaled: BTreeMap<usize, Scalar> =
                work[prow].iter().map(|(c, v)| (*c, v * &inv)).collect();
            work[prow] = scaled;
            let pivot_row = work[prow].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r == prow {
                    continue;
                }
                let Some(factor) = row.get(&col).cloned() else {
                    continue;
                };
                for (c, v) in &pivot_row {
                    let delta = &factor * v;
                    let cell = row.entry(*c).or_insert_with(Scalar::zero);
                    *cell -= delta;
                    if cell.is_zero() {
                        row.remove(c);
                    }
                }
            }
        }
        let rank = pivot_of_col.len();
        let mut kernel = Vec::new();
        for free_col in (0..self.cols).filter(|c| !pivot_of_col.contains_key(c)) {
            let mut v = vec![Scalar::zero(); self.cols];
            v[free_col] = Scalar::one();
            for (&pc, &pr) in &pivot_of_col {
                if let Some(entry) = work[pr].get(&free_col) {
                    v[pc] = -entry.clone();
                }
            }
            kernel.push(v);
        }
        RankKernel { rank, kernel }
    }

    pub fn rank(&self) -> usize {
        self.rank_kernel().rank
    }
}

#[derive(Debug, Clone)]
pub struct RankKernel {
    pub rank: usize,
    /// Column vectors spanning the right kernel; length `cols` each.
    pub kernel: Vec<Vec<Scalar>>,
}

/// Dimension of `ker(a) / im(b)`, checking `a * b = 0` first.
pub fn subquotient_dim(a: &SparseMatrix, b: &SparseMatrix) -> Result<usize, ExactError> {
    let prod = a.mul(b)?;
    if let Some((row, col)) = prod.first_nonzero_by_col() {
        return Err(ExactError::CompositionNotZero { row, col });
    }
    let ker = a.cols() - a.rank();
    let im = b.rank();
    Ok(ker - im)
}

/// Whether `v` lies in the column span of `basis`.
pub fn in_column_span(basis: &SparseMatrix, v: &[Scalar]) -> Result<bool, ExactError> {
    let vcol = SparseMatrix::from_columns(basis.rows(), &[v.to_vec()]);
    let joined = basis.hstack(&vcol)?;
    Ok(joined.rank() == basis.rank())
}

/// Matrix with entries in k[h]/(h^order): a list of coefficient matrices for
/// 1, h, ..., h^(order-1), all of one shape. Products truncate at the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    coeffs: Vec<SparseMatrix>,
}

impl PolyMatrix {
    pub fn zero(rows: usize, cols: usize, order: usize) -> PolyMatrix {
        assert!(order >= 1, "truncation order must be at least 1");
        PolyMatrix {
            coeffs: vec![SparseMatrix::zero(rows, cols); order],
        }
    }

    /// Embeds an ordinary matrix as the degree-zero coefficient.
    pub fn constant(m: SparseMatrix, order: usize) -> PolyMatrix {
        let mut out = PolyMatrix::zero(m.rows(), m.cols(), order);
        out.coeffs[0] = m;
        out
    }

    pub fn from_coeffs(coeffs: Vec<SparseMatrix>) -> Result<PolyMatrix, ExactError> {
        let first = match coeffs.first() {
            Some(f) => (f.rows(), f.cols()),
            None => {
                return Err(ExactError::ShapeMismatch {
                    left: "empty coefficient list".to_string(),
                    right: "order >= 1".to_string(),
                    op: "poly",
                })
            }
        };
        for c in &coeffs {
            if (c.rows(), c.cols()) != first {
                return Err(ExactError::ShapeMismatch {
                    left: format!("{}x{}", first.0, first.1),
                    right: format!("{}x{}", c.rows(), c.cols()),
                    op: "poly",
                });
            }
        }
        Ok(PolyMatrix { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn rows(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.coeffs[0].cols()
    }

    pub fn coeff(&self, k: usize) -> &SparseMatrix {
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, m: SparseMatrix) -> Result<(), ExactError> {
        if (m.rows(), m.cols()) != (self.rows(), self.cols()) {
            return Err(ExactError::ShapeMismatch {
                left: format!("{}x{}", self.rows(), self.cols()),
                right: format!("{}x{}", m.rows(), m.cols()),
                op: "poly set",
            });
        }
        self.coeffs[k] = m;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(SparseMatrix::is_zero)
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<PolyMatrix, ExactError> {
        self.zip(other, SparseMatrix::add)
    }

    pub fn sub(&self, other: &PolyMatrix) -> Result<PolyMatrix, ExactError> {
        self.zip(other, SparseMatrix::sub)
    }

    fn zip(
        &self,
        other: &PolyMatrix,
        f: impl Fn(&SparseMatrix, &SparseMatrix) -> Result<SparseMatrix, ExactError>,
    ) -> Result<PolyMatrix, ExactError> {
        if self.order() != other.order() {
            return Err(ExactError::ShapeMismatch {
                left: format!("order {}", self.order()),
                right: format!("order {}", other.order()),
                op: "poly add",
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_, _>>()?;
        Ok(PolyMatrix { coeffs })
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, ExactError> {
        if self.order() != other.order() {
            return Err(ExactError::ShapeMismatch {
                left: format!("order {}", self.order()),
                right: format!("order {}", other.order()),
                op: "poly mul",
            });
        }
        let mut coeffs = Vec::with_capacity(self.order());
        for k in 0..self.order() {
            let mut acc = SparseMatrix::zero(self.rows(), other.cols());
            for i in 0..=k {
                acc = acc.add(&self.coeffs[i].mul(&other.coeffs[k - i])?)?;
            }
            coeffs.push(acc);
        }
        Ok(PolyMatrix { coeffs })
    }

    pub fn pow(&self, e: usize) -> Result<PolyMatrix, ExactError> {
        if self.rows() != self.cols() {
            return Err(ExactError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        let mut out = PolyMatrix::constant(
            SparseMatrix::identity(self.rows()),
            self.order(),
        );
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: usize, cols: usize, data: &[(usize, usize, i64)]) -> SparseMatrix {
        let mut out = SparseMatrix::zero(rows, cols);
        for &(r, c, v) in data {
            out.set(r, c, int(v));
        }
        out
    }

    #[test]
    fn parse_and_render_round_trip() {
        for text in ["0", "5", "-7", "2/3", "-9/4"] {
            let x = parse_scalar(text).unwrap();
            assert_eq!(scalar_string(&x), text);
        }
        assert_eq!(parse_scalar(" 4/6").unwrap(), ratio(2, 3).unwrap());
        assert!(matches!(parse_scalar("1/0"), Err(ExactError::ZeroDenominator(_))));
        assert!(matches!(parse_scalar("x"), Err(ExactError::BadLiteral(_))));
        assert!(ratio(3, 0).is_err());
    }

    #[test]
    fn reduced_form_is_maintained() {
        let x = parse_scalar("4/6").unwrap();
        assert_eq!(x.numer(), &num_bigint::BigInt::from(2));
        assert_eq!(x.denom(), &num_bigint::BigInt::from(3));
        let y = parse_scalar("1/-2").unwrap();
        assert!(y.denom() > &num_bigint::BigInt::from(0), "denominator stays positive");
    }

    #[test]
    fn rank_kernel_on_singular_2x2() {
        // [[1,2],[2,4]]: rank 1, kernel spanned by (-2, 1).
        let a = m(2, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4)]);
        let rk = a.rank_kernel();
        assert_eq!(rk.rank, 1);
        assert_eq!(rk.kernel.len(), 1);
        assert_eq!(rk.kernel[0], vec![int(-2), int(1)]);
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let a = SparseMatrix::zero(3, 4);
        let rk = a.rank_kernel();
        assert_eq!(rk.rank, 0);
        assert_eq!(rk.kernel.len(), 4);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = SparseMatrix::zero(2, 3);
        let b = SparseMatrix::zero(2, 3);
        assert!(a.mul(&b).is_err());
        assert!(a.add(&SparseMatrix::zero(3, 2)).is_err());
        assert!(a.pow(2).is_err());
    }

    #[test]
    fn subquotient_requires_chain_condition() {
        // a = [[0,1],[0,0]], b = a: a*b = 0, ker a = 1-dim, im b = 1-dim.
        let a = m(2, 2, &[(0, 1, 1)]);
        assert_eq!(subquotient_dim(&a, &a).unwrap(), 0);
        let id = SparseMatrix::identity(2);
        assert!(matches!(
            subquotient_dim(&id, &id),
            Err(ExactError::CompositionNotZero { .. })
        ));
    }

    #[test]
    fn truncated_polynomial_products_drop_high_coefficients() {
        // (I + hA)(I - hA) = I - h^2 A^2, which truncates to I at order 2.
        let a = m(2, 2, &[(0, 1, 3), (1, 0, 2)]);
        let id = SparseMatrix::identity(2);
        let plus = PolyMatrix::from_coeffs(vec![id.clone(), a.clone()]).unwrap();
        let minus = PolyMatrix::from_coeffs(vec![id.clone(), a.scale(&int(-1))]).unwrap();
        let prod = plus.mul(&minus).unwrap();
        assert_eq!(prod, PolyMatrix::constant(id.clone(), 2));
        // At order 3 the h^2 coefficient is -A^2.
        let plus3 = PolyMatrix::from_coeffs(vec![id.clone(), a.clone(), SparseMatrix::zero(2, 2)]).unwrap();
        let minus3 = PolyMatrix::from_coeffs(vec![id, a.scale(&int(-1)), SparseMatrix::zero(2, 2)]).unwrap();
        let prod3 = plus3.mul(&minus3).unwrap();
        assert!(prod3.coeff(1).is_zero());
        assert_eq!(*prod3.coeff(2), a.mul(&a).unwrap().scale(&int(-1)));
    }

    #[test]
    fn polynomial_powers_expand_binomially() {
        // (hN)^2 = h^2 N^2 and vanishes at order 2.
        let n = m(2, 2, &[(0, 1, 1)]);
        let hn = PolyMatrix::from_coeffs(vec![SparseMatrix::zero(2, 2), n]).unwrap();
        assert!(hn.pow(2).unwrap().is_zero());
        let mixed = PolyMatrix::from_coeffs(vec![
            SparseMatrix::identity(2),
            m(2, 2, &[(0, 0, 1), (1, 1, 1)]),
        ])
        .unwrap();
        // (I + hI)^3 has h coefficient 3I at order 2.
        let cubed = mixed.pow(3).unwrap();
        assert_eq!(*cubed.coeff(0), SparseMatrix::identity(2));
        assert_eq!(*cubed.coeff(1), SparseMatrix::identity(2).scale(&int(3)));
    }

    #[test]
    fn deterministic_pivoting_gives_stable_kernel() {
        let a = m(3, 3, &[(0, 0, 1), (0, 1, 1), (0, 2, 1), (1, 0, 2), (1, 1, 2), (1, 2, 2), (2, 0, 3), (2, 1, 3), (2, 2, 3)]);
        let k1 = a.rank_kernel();
        let k2 = a.rank_kernel();
        assert_eq!(k1.kernel, k2.kernel);
        assert_eq!(k1.rank, 1);
        assert_eq!(k1.kernel.len(), 2);
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_exact_solutions(
            entries in proptest::collection::vec((0usize..5, 0usize..5, -6i64..=6, 1i64..=4), 0..14)
        ) {
            let mut a = SparseMatrix::zero(5, 5);
            for (r, c, p, q) in entries {
                a.add_to(r, c, &ratio(p, q).unwrap());
            }
            let rk = a.rank_kernel();
            prop_assert_eq!(rk.rank + rk.kernel.len(), 5);
            for v in &rk.kernel {
                let image = a.apply(v).unwrap();
                prop_assert!(image.iter().all(|x| x.is_zero()));
            }
            // Kernel vectors are independent: each has a leading 1 in its own
            // free column, so stack them and check the rank.
            if !rk.kernel.is_empty() {
                let kmat = SparseMatrix::from_columns(5, &rk.kernel);
                prop_assert_eq!(kmat.rank(), rk.kernel.len());
            }
        }

        #[test]
        fn product_is_associative(
            e1 in proptest::collection::vec((0usize..3, 0usize..3, -4i64..=4), 0..6),
            e2 in proptest::collection::vec((0usize..3, 0usize..3, -4i64..=4), 0..6),
            e3 in proptest::collection::vec((0usize..3, 0usize..3, -4i64..=4), 0..6),
        ) {
            let build = |es: &[(usize, usize, i64)]| {
                let mut a = SparseMatrix::zero(3, 3);
                for &(r, c, v) in es { a.add_to(r, c, &int(v)); }
                a
            };
            let (a, b, c) = (build(&e1), build(&e2), build(&e3));
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
