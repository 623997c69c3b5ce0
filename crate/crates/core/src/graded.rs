//! Graded vector spaces with named bases and degree-homogeneous multimaps.
//!
//! Sign discipline: every sign in this crate is produced by [`koszul_sign`]
//! from degree bookkeeping. No formula-specific sign is ever entered by hand;
//! suspension, tensor composition and insertion all reduce to "operator of
//! degree p moves past elements of total degree q, costing (-1)^(p*q)".
//!
//! Shift convention: the element of degree d in `V` sits in degree `d - k`
//! inside `V[k]`, so a degree-0 element of `V` is odd in `V[1]`.

use crate::exact::{scalar_string, Scalar};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GradedError {
    #[error("duplicate basis name `{0}`")]
    DuplicateName(String),
    #[error("unknown basis name `{0}`")]
    UnknownName(String),
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(
        "inhomogeneous coefficient: inputs {inputs:?} of total degree {input_degree} map to `{output}` of degree {output_degree}, but the map has degree {map_degree}"
    )]
    DegreeInhomogeneous {
        inputs: Vec<String>,
        input_degree: i64,
        output: String,
        output_degree: i64,
        map_degree: i64,
    },
    #[error("spaces do not match for {0}")]
    SpaceMismatch(&'static str),
}

/// Finite graded vector space with a named, ordered basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSpace {
    names: Vec<String>,
    degrees: Vec<i64>,
    index: BTreeMap<String, usize>,
}

impl GradedSpace {
    pub fn new<S: Into<String>>(basis: Vec<(S, i64)>) -> Result<Self, GradedError> {
        let mut names = Vec::with_capacity(basis.len());
        let mut degrees = Vec::with_capacity(basis.len());
        let mut index = BTreeMap::new();
        for (name, degree) in basis {
            let name = name.into();
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(GradedError::DuplicateName(name));
            }
            names.push(name);
            degrees.push(degree);
        }
        Ok(GradedSpace { names, degrees, index })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize, GradedError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GradedError::UnknownName(name.to_string()))
    }

    /// Alternating sum of dimensions: even basis elements count +1, odd -1.
    pub fn superdimension(&self) -> i64 {
        self.degrees
            .iter()
            .map(|d| if d.rem_euclid(2) == 0 { 1 } else { -1 })
            .sum()
    }

    /// The shifted space `V[k]`: same names, every degree lowered by `k`.
    pub fn shift(&self, k: i64) -> GradedSpace {
        GradedSpace {
            names: self.names.clone(),
            degrees: self.degrees.iter().map(|d| d - k).collect(),
            index: self.index.clone(),
        }
    }
}

/// `(-1)^(degree_moving * sum(degrees_moved_past))`.
pub fn koszul_sign(degree_moving: i64, degrees_moved_past: &[i64]) -> Scalar {
    let total: i64 = degrees_moved_past.iter().sum();
    sign_pow(degree_moving * total)
}

/// `(-1)^exponent` as an exact scalar.
pub fn sign_pow(exponent: i64) -> Scalar {
    if exponent.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

/// Degree-homogeneous linear map `V^(tensor arity) -> W`, stored as structure
/// constants on basis tuples. Homogeneity is enforced at insertion time.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiMap {
    domain: GradedSpace,
    codomain: GradedSpace,
    arity: usize,
    degree: i64,
    entries: BTreeMap<Vec<usize>, BTreeMap<usize, Scalar>>,
}

impl fmt::Debug for MultiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MultiMap(arity {}, degree {})", self.arity, self.degree)?;
        for (inputs, outs) in &self.entries {
            let in_names: Vec<&str> = inputs.iter().map(|&i| self.domain.name(i)).collect();
            let terms: Vec<String> = outs
                .iter()
                .map(|(o, c)| format!("{}*{}", scalar_string(c), self.codomain.name(*o)))
                .collect();
            writeln!(f, "  ({}) -> {}", in_names.join(","), terms.join(" + "))?;
        }
        Ok(())
    }
}

impl MultiMap {
    pub fn zero(
        domain: GradedSpace,
        codomain: GradedSpace,
        arity: usize,
        degree: i64,
    ) -> Result<Self, GradedError> {
        if arity == 0 {
            return Err(GradedError::ZeroArity);
        }
        Ok(MultiMap {
            domain,
            codomain,
            arity,
            degree,
            entries: BTreeMap::new(),
        })
    }

    /// Arity-1 identity map.
    pub fn identity(space: &GradedSpace) -> Self {
        let mut entries = BTreeMap::new();
        for i in 0..space.dim() {
            entries.insert(vec![i], BTreeMap::from([(i, Scalar::one())]));
        }
        MultiMap {
            domain: space.clone(),
            codomain: space.clone(),
            arity: 1,
            degree: 0,
            entries,
        }
    }

    pub fn domain(&self) -> &GradedSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &GradedSpace {
        &self.codomain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &BTreeMap<usize, Scalar>)> {
        self.entries.iter()
    }

    fn input_degree(&self, inputs: &[usize]) -> i64 {
        inputs.iter().map(|&i| self.domain.degree(i)).sum()
    }

    pub fn add_coefficient(
        &mut self,
        inputs: &[usize],
        output: usize,
        coeff: Scalar,
    ) -> Result<(), GradedError> {
        if inputs.len() != self.arity {
            return Err(GradedError::ArityMismatch {
                expected: self.arity,
                got: inputs.len(),
            });
        }
        if coeff.is_zero() {
            return Ok(());
        }
        let expected = self.input_degree(inputs) + self.degree;
        let actual = self.codomain.degree(output);
        if expected != actual {
            return Err(GradedError::DegreeInhomogeneous {
                inputs: inputs.iter().map(|&i| self.domain.name(i).to_string()).collect(),
                input_degree: self.input_degree(inputs),
                output: self.codomain.name(output).to_string(),
                output_degree: actual,
                map_degree: self.degree,
            });
        }
        let slot = self.entries.entry(inputs.to_vec()).or_default();
        let cell = slot.entry(output).or_insert_with(Scalar::zero);
        *cell += coeff;
        if cell.is_zero() {
            slot.remove(&output);
        }
        if slot.is_empty() {
            self.entries.remove(inputs);
        }
        Ok(())
    }

    pub fn set_by_names(
        &mut self,
        inputs: &[&str],
        output: &str,
        coeff: Scalar,
    ) -> Result<(), GradedError> {
        let idx: Vec<usize> = inputs
            .iter()
            .map(|n| self.domain.index_of(n))
            .collect::<Result<_, _>>()?;
        let out = self.codomain.index_of(output)?;
        self.add_coefficient(&idx, out, coeff)
    }

    pub fn evaluate(&self, inputs: &[usize]) -> Vec<(usize, Scalar)> {
        self.entries
            .get(inputs)
            .map(|m| m.iter().map(|(o, c)| (*o, c.clone())).collect())
            .unwrap_or_default()
    }

    pub fn add(&self, other: &MultiMap) -> Result<MultiMap, GradedError> {
        if self.domain != other.domain
            || self.codomain != other.codomain
            || self.arity != other.arity
            || self.degree != other.degree
        {
            return Err(GradedError::SpaceMismatch("add"));
        }
        let mut out = self.clone();
        for (inputs, outs) in &other.entries {
            for (o, c) in outs {
                out.add_coefficient(inputs, *o, c.clone())?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiMap) -> Result<MultiMap, GradedError> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, factor: &Scalar) -> MultiMap {
        if factor.is_zero() {
            return MultiMap {
                domain: self.domain.clone(),
                codomain: self.codomain.clone(),
                arity: self.arity,
                degree: self.degree,
                entries: BTreeMap::new(),
            };
        }
        let mut out = self.clone();
        for outs in out.entries.values_mut() {
            for c in outs.values_mut() {
                *c *= factor;
            }
        }
        out
    }

    /// Matrix of an arity-1 map on the basis (rows = codomain).
    pub fn arity1_matrix(&self) -> crate::exact::SparseMatrix {
        assert_eq!(self.arity, 1, "arity1_matrix needs an arity-1 map");
        let mut m = crate::exact::SparseMatrix::zero(self.codomain.dim(), self.domain.dim());
        for (inputs, outs) in &self.entries {
            for (o, c) in outs {
                m.add_to(*o, inputs[0], c);
            }
        }
        m
    }

    /// Transport along the suspension `V -> V[1]`: an arity-k map of degree d
    /// becomes an arity-k map of degree d + k - 1 on the shifted space. The
    /// sign is the Koszul cost of moving each desuspension past the inputs to
    /// its left; applying the transform twice restores the original
    /// coefficients, so the same routine also undoes a suspension when handed
    /// a map already living on the shifted space (with `direction = -1`).
    pub fn suspend(&self, direction: i64) -> MultiMap {
        let new_domain = self.domain.shift(direction);
        let new_codomain = self.codomain.shift(direction);
        let arity = self.arity;
        let new_degree = self.degree + direction * (arity as i64 - 1);
        let mut entries = BTreeMap::new();
        for (inputs, outs) in &self.entries {
            // Degrees as seen on the shifted side of the transport.
            let shifted: Vec<i64> = inputs
                .iter()
                .map(|&i| {
                    if direction > 0 {
                        self.domain.degree(i) - direction
                    } else {
                        self.domain.degree(i)
                    }
                })
                .collect();
            let mut exponent = 0i64;
            for (pos, d) in shifted.iter().enumerate() {
                exponent += (arity as i64 - 1 - pos as i64) * d;
            }
            let sign = sign_pow(exponent);
            let outs_signed: BTreeMap<usize, Scalar> =
                outs.iter().map(|(o, c)| (*o, c * &sign)).collect();
            entries.insert(inputs.clone(), outs_signed);
        }
        MultiMap {
            domain: new_domain,
            codomain: new_codomain,
            arity,
            degree: new_degree,
            entries,
        }
    }
}

/// `outer` applied to the tensor product of `inners`, with Koszul signs from
/// each inner map moving past the inputs consumed by the blocks to its left.
/// All inners must share one domain space; their codomain must be the outer
/// domain.
pub fn compose_tensor(outer: &MultiMap, inners: &[&MultiMap]) -> Result<MultiMap, GradedError> {
    if inners.len() != outer.arity {
        return Err(GradedError::ArityMismatch {
            expected: outer.arity,
            got: inners.len(),
        });
    }
    let base = inners[0].domain.clone();
    for inner in inners {
        if inner.domain != base {
            return Err(GradedError::SpaceMismatch("compose_tensor inner domains"));
        }
        if inner.codomain != outer.domain {
            return Err(GradedError::SpaceMismatch("compose_tensor inner codomain"));
        }
    }
    let arity: usize = inners.iter().map(|i| i.arity).sum();
    let degree: i64 = outer.degree + inners.iter().map(|i| i.degree).sum::<i64>();
    let mut out = MultiMap::zero(base.clone(), outer.codomain.clone(), arity, degree)?;

    // Walk the product of the inner entry lists.
    fn rec(
        out: &mut MultiMap,
        outer: &MultiMap,
        inners: &[&MultiMap],
        j: usize,
        inputs: &mut Vec<usize>,
        mids: &mut Vec<usize>,
        coeff: Scalar,
    ) -> Result<(), GradedError> {
        if j == inners.len() {
            for (mid_out, c_out) in outer.entries.get(mids).into_iter().flatten() {
                out.add_coefficient(inputs, *mid_out, &coeff * c_out)?;
            }
            return Ok(());
        }
        let prefix_degrees: Vec<i64> = inputs.iter().map(|&i| out.domain.degree(i)).collect();
        let sign = koszul_sign(inners[j].degree, &prefix_degrees);
        for (block, outs) in &inners[j].entries {
            let len_before = inputs.len();
            inputs.extend_from_slice(block);
            for (o, c) in outs {
                mids.push(*o);
                rec(out, outer, inners, j + 1, inputs, mids, &coeff * c * &sign)?;
                mids.pop();
            }
            inputs.truncate(len_before);
        }
        Ok(())
    }

    let mut inputs = Vec::new();
    let mut mids = Vec::new();
    rec(&mut out, outer, inners, 0, &mut inputs, &mut mids, Scalar::one())?;
    Ok(out)
}

/// `outer` with `inner` inserted at 1-based `position` and identities elsewhere.
pub fn compose_at(
    outer: &MultiMap,
    inner: &MultiMap,
    position: usize,
) -> Result<MultiMap, GradedError> {
    if position == 0 || position > outer.arity {
        return Err(GradedError::ArityMismatch {
            expected: outer.arity,
            got: position,
        });
    }
    let id = MultiMap::identity(inner.domain());
    let inners: Vec<&MultiMap> = (1..=outer.arity)
        .map(|p| if p == position { inner } else { &id })
        .collect();
    compose_tensor(outer, &inners)
}
