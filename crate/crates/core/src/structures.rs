//! Validators and constructors for the algebraic structures the workbench
//! handles: complexes with a higher-order nilpotent differential, their
//! algebra and Lie variants, depth-indexed associative structures, families
//! of higher operations with a nilpotent lifted coderivation, endomorphism
//! algebras, cohomology of nilpotent operators, tensor products and
//! morphisms.
//!
//! Validation reports carry per-axiom verdicts with basis-tuple witnesses;
//! every failing check names inputs on which the defect re-evaluates to a
//! nonzero value. Where the nilpotency of a lifted coderivation is involved,
//! the strict (full matrix) and corestriction (single-letter output) verdicts
//! are always reported separately; they agree for square-zero lifts and
//! genuinely differ beyond that.

use crate::coalgebra::{CoalgError, Coderivation, CorestrictionIdentity, TruncatedCoalgebra};
use crate::exact::{scalar_string, subquotient_dim, ExactError, Scalar, SparseMatrix};
use crate::graded::{compose_tensor, sign_pow, GradedError, GradedSpace, MultiMap};
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructError {
    #[error("structure is missing its {0} component")]
    MissingComponent(&'static str),
    #[error("component {component} must have arity {arity} and degree {degree}")]
    WrongSignature {
        component: String,
        arity: usize,
        degree: i64,
    },
    #[error("component {0} does not act on the presentation's space")]
    WrongSpace(String),
    #[error("input is not strictly nilpotent at order {order}: {detail}")]
    NotStrictlyNilpotent { order: usize, detail: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Coalg(#[from] CoalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    NComplex,
    Ndga,
    Ndgla,
    NAssociative,
    DepthN,
    AinfN,
    Ncgc,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::NComplex => "ncomplex",
            Kind::Ndga => "ndga",
            Kind::Ndgla => "ndgla",
            Kind::NAssociative => "nassociative",
            Kind::DepthN => "depthN",
            Kind::AinfN => "ainfN",
            Kind::Ncgc => "ncgc",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        match s {
            "ncomplex" => Some(Kind::NComplex),
            "ndga" => Some(Kind::Ndga),
            "ndgla" => Some(Kind::Ndgla),
            "nassociative" => Some(Kind::NAssociative),
            "depthN" => Some(Kind::DepthN),
            "ainfN" => Some(Kind::AinfN),
            "ncgc" => Some(Kind::Ncgc),
            _ => None,
        }
    }
}

/// Structure data in the unshifted convention: differential of degree 1,
/// binary operations of degree 0, and the arity-k family of degree 2 - k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraPresentation {
    space: GradedSpace,
    kind: Kind,
    n: usize,
    diff: Option<MultiMap>,
    mult: Option<MultiMap>,
    bracket: Option<MultiMap>,
    higher: BTreeMap<usize, MultiMap>,
}

impl AlgebraPresentation {
    pub fn new(
        space: GradedSpace,
        kind: Kind,
        n: usize,
        diff: Option<MultiMap>,
        mult: Option<MultiMap>,
        bracket: Option<MultiMap>,
        higher: BTreeMap<usize, MultiMap>,
    ) -> Result<Self, StructError> {
        let check = |m: &MultiMap, name: &str, arity: usize, degree: i64| {
            if m.domain() != &space || m.codomain() != &space {
                return Err(StructError::WrongSpace(name.to_string()));
            }
            if m.arity() != arity || m.degree() != degree {
                return Err(StructError::WrongSignature {
                    component: name.to_string(),
                    arity,
                    degree,
                });
            }
            Ok(())
        };
        if let Some(d) = &diff {
            check(d, "differential", 1, 1)?;
        }
        if let Some(m) = &mult {
            check(m, "multiplication", 2, 0)?;
        }
        if let Some(b) = &bracket {
            check(b, "bracket", 2, 0)?;
        }
        for (&k, mk) in &higher {
            if k == 0 {
                return Err(StructError::Invalid(
                    "operations start at arity 1".to_string(),
                ));
            }
            check(mk, &format!("m{k}"), k, 2 - k as i64)?;
        }
        Ok(AlgebraPresentation {
            space,
            kind,
            n,
            diff,
            mult,
            bracket,
            higher,
        })
    }

    pub fn complex(space: GradedSpace, d: MultiMap, n: usize) -> Result<Self, StructError> {
        Self::new(space, Kind::NComplex, n, Some(d), None, None, BTreeMap::new())
    }

    pub fn dga(
        space: GradedSpace,
        d: MultiMap,
        m: MultiMap,
        n: usize,
    ) -> Result<Self, StructError> {
        Self::new(space, Kind::Ndga, n, Some(d), Some(m), None, BTreeMap::new())
    }

    pub fn dgla(
        space: GradedSpace,
        d: MultiMap,
        bracket: MultiMap,
        n: usize,
    ) -> Result<Self, StructError> {
        Self::new(
            space,
            Kind::Ndgla,
            n,
            Some(d),
            None,
            Some(bracket),
            BTreeMap::new(),
        )
    }

    pub fn nassociative(space: GradedSpace, m: MultiMap, n: usize) -> Result<Self, StructError> {
        Self::new(
            space,
            Kind::NAssociative,
            n,
            None,
            Some(m),
            None,
            BTreeMap::new(),
        )
    }

    pub fn ainf(
        space: GradedSpace,
        higher: BTreeMap<usize, MultiMap>,
        n: usize,
    ) -> Result<Self, StructError> {
        Self::new(space, Kind::AinfN, n, None, None, None, higher)
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn declared_n(&self) -> usize {
        self.n
    }

    pub fn diff(&self) -> Option<&MultiMap> {
        self.diff.as_ref()
    }

    pub fn mult(&self) -> Option<&MultiMap> {
        self.mult.as_ref()
    }

    pub fn bracket(&self) -> Option<&MultiMap> {
        self.bracket.as_ref()
    }

    pub fn higher(&self) -> &BTreeMap<usize, MultiMap> {
        &self.higher
    }

    /// All operations transported to the shifted space, where each has
    /// degree 1: the differential as the arity-1 entry, the multiplication
    /// as the arity-2 entry, and the arity-k family as the rest.
    pub fn suspended_ops(&self) -> Result<BTreeMap<usize, MultiMap>, StructError> {
        let mut ops: BTreeMap<usize, MultiMap> = BTreeMap::new();
        for (k, m) in &self.higher {
            ops.insert(*k, m.suspend(1));
        }
        if let Some(d) = &self.diff {
            if ops.contains_key(&1) {
                return Err(StructError::Invalid(
                    "both a differential and an arity-1 operation are present".to_string(),
                ));
            }
            ops.insert(1, d.suspend(1));
        }
        if let Some(m) = &self.mult {
            if ops.contains_key(&2) {
                return Err(StructError::Invalid(
                    "both a multiplication and an arity-2 operation are present".to_string(),
                ));
            }
            ops.insert(2, m.suspend(1));
        }
        Ok(ops)
    }

    /// Coderivation lift of the suspended operations on words of length up
    /// to `max_len`.
    pub fn coderivation(&self, max_len: usize) -> Result<Coderivation, StructError> {
        let ops = self.suspended_ops()?;
        let coalg = TruncatedCoalgebra::new(self.space.shift(1), max_len)?;
        Ok(Coderivation::new(coalg, 1, ops)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckWitness {
    pub inputs: Vec<String>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<CheckWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub kind: &'static str,
    pub n: usize,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corestriction: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proper: Option<bool>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    fn new(kind: &'static str, n: usize) -> Self {
        ValidationReport {
            kind,
            n,
            checks: Vec::new(),
            strict: None,
            corestriction: None,
            proper: None,
            notes: Vec::new(),
        }
    }

    pub fn valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push_zero_map_check(&mut self, name: &str, defect: &MultiMap) {
        let witness = defect.entries().next().map(|(inputs, outs)| {
            let (o, c) = outs.iter().next().expect("nonzero entries are pruned");
            CheckWitness {
                inputs: inputs
                    .iter()
                    .map(|&i| defect.domain().name(i).to_string())
                    .collect(),
                value: format!(
                    "{} with coefficient {}",
                    defect.codomain().name(*o),
                    scalar_string(c)
                ),
            }
        });
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: witness.is_none(),
            witness,
        });
    }

    fn push_verdict(&mut self, name: &str, passed: bool, witness: Option<CheckWitness>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            witness,
        });
    }
}

fn matrix_power_check(
    report: &mut ValidationReport,
    name: &str,
    m: &SparseMatrix,
    power: usize,
    space: &GradedSpace,
) -> bool {
    let p = m.pow(power).expect("operator matrices are square");
    let hit = p
        .iter()
        .next()
        .map(|(r, c, v)| (r, c, v.clone()));
    match hit {
        None => {
            report.push_verdict(name, true, None);
            true
        }
        Some((row, col, value)) => {
            report.push_verdict(
                name,
                false,
                Some(CheckWitness {
                    inputs: vec![space.name(col).to_string()],
                    value: format!("{} with coefficient {}", space.name(row), scalar_string(&value)),
                }),
            );
            false
        }
    }
}

/// Complex with an order-`n` nilpotent degree-1 operator: checks d^n = 0 and
/// reports properness as d^(n-1) != 0.
pub fn validate_ncomplex(p: &AlgebraPresentation, n: usize) -> Result<ValidationReport, StructError> {
    let d = p.diff().ok_or(StructError::MissingComponent("differential"))?;
    let mut report = ValidationReport::new("ncomplex", n);
    let dm = d.arity1_matrix();
    matrix_power_check(&mut report, &format!("d^{n} = 0"), &dm, n, p.space());
    report.proper = Some(if n >= 1 {
        !dm.pow(n - 1)?.is_zero()
    } else {
        false
    });
    Ok(report)
}

/// Differential graded algebra with an order-`n` differential: associativity
/// on all basis triples, the signed product rule on all pairs, d^n = 0, and
/// properness d^(n-1) != 0.
pub fn validate_ndga(p: &AlgebraPresentation, n: usize) -> Result<ValidationReport, StructError> {
    let d = p.diff().ok_or(StructError::MissingComponent("differential"))?;
    let m = p.mult().ok_or(StructError::MissingComponent("multiplication"))?;
    let mut report = ValidationReport::new("ndga", n);
    let id = MultiMap::identity(p.space());
    let assoc = compose_tensor(m, &[m, &id])?.sub(&compose_tensor(m, &[&id, m])?)?;
    report.push_zero_map_check("associativity", &assoc);
    let leibniz = compose_tensor(d, &[m])?
        .sub(&compose_tensor(m, &[d, &id])?)?
        .sub(&compose_tensor(m, &[&id, d])?)?;
    report.push_zero_map_check("product rule for d", &leibniz);
    let dm = d.arity1_matrix();
    matrix_power_check(&mut report, &format!("d^{n} = 0"), &dm, n, p.space());
    report.proper = Some(n >= 1 && !dm.pow(n - 1)?.is_zero());
    Ok(report)
}

fn apply2(
    m: &MultiMap,
    u: &BTreeMap<usize, Scalar>,
    v: &BTreeMap<usize, Scalar>,
) -> BTreeMap<usize, Scalar> {
    let mut out: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (i, a) in u {
        for (j, b) in v {
            for (o, k) in m.evaluate(&[*i, *j]) {
                let cell = out.entry(o).or_insert_with(Scalar::zero);
                *cell += &(a * b) * &k;
                if cell.is_zero() {
                    out.remove(&o);
                }
            }
        }
    }
    out
}

fn scale_vec(v: &BTreeMap<usize, Scalar>, s: &Scalar) -> BTreeMap<usize, Scalar> {
    if s.is_zero() {
        return BTreeMap::new();
    }
    v.iter().map(|(i, c)| (*i, c * s)).collect()
}

fn add_vec(
    mut u: BTreeMap<usize, Scalar>,
    v: &BTreeMap<usize, Scalar>,
) -> BTreeMap<usize, Scalar> {
    for (i, c) in v {
        let cell = u.entry(*i).or_insert_with(Scalar::zero);
        *cell += c;
        if cell.is_zero() {
            u.remove(i);
        }
    }
    u
}

fn basis_vec(i: usize) -> BTreeMap<usize, Scalar> {
    BTreeMap::from([(i, crate::exact::int(1))])
}

fn vec_witness(space: &GradedSpace, v: &BTreeMap<usize, Scalar>) -> String {
    let (i, c) = v.iter().next().expect("nonzero vector");
    format!("{} with coefficient {}", space.name(*i), scalar_string(c))
}

/// Lie algebra with an order-`n` differential: graded antisymmetry, graded
/// Jacobi, the signed product rule for d over the bracket, and d^n = 0.
pub fn validate_ndgla(p: &AlgebraPresentation, n: usize) -> Result<ValidationReport, StructError> {
    let d = p.diff().ok_or(StructError::MissingComponent("differential"))?;
    let b = p.bracket().ok_or(StructError::MissingComponent("bracket"))?;
    let space = p.space();
    let dim = space.dim();
    let mut report = ValidationReport::new("ndgla", n);

    let mut anti_witness = None;
    'anti: for i in 0..dim {
        for j in 0..dim {
            let sign = sign_pow(space.degree(i) * space.degree(j));
            let defect = add_vec(
                apply2(b, &basis_vec(i), &basis_vec(j)),
                &scale_vec(&apply2(b, &basis_vec(j), &basis_vec(i)), &sign),
            );
            if !defect.is_empty() {
                anti_witness = Some(CheckWitness {
                    inputs: vec![space.name(i).to_string(), space.name(j).to_string()],
                    value: vec_witness(space, &defect),
                });
                break 'anti;
            }
        }
    }
    report.push_verdict("graded antisymmetry", anti_witness.is_none(), anti_witness);

    let mut jacobi_witness = None;
    'jac: for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let lhs = apply2(b, &basis_vec(i), &apply2(b, &basis_vec(j), &basis_vec(k)));
                let first = apply2(b, &apply2(b, &basis_vec(i), &basis_vec(j)), &basis_vec(k));
                let sign = sign_pow(space.degree(i) * space.degree(j));
                let second = scale_vec(
                    &apply2(b, &basis_vec(j), &apply2(b, &basis_vec(i), &basis_vec(k))),
                    &sign,
                );
                let minus_one = sign_pow(1);
                let defect = add_vec(
                    add_vec(lhs, &scale_vec(&first, &minus_one)),
                    &scale_vec(&second, &minus_one),
                );
                if !defect.is_empty() {
                    jacobi_witness = Some(CheckWitness {
                        inputs: vec![
                            space.name(i).to_string(),
                            space.name(j).to_string(),
                            space.name(k).to_string(),
                        ],
                        value: vec_witness(space, &defect),
                    });
                    break 'jac;
                }
            }
        }
    }
    report.push_verdict("graded Jacobi identity", jacobi_witness.is_none(), jacobi_witness);

    let id = MultiMap::identity(space);
    let leibniz = compose_tensor(d, &[b])?
        .sub(&compose_tensor(b, &[d, &id])?)?
        .sub(&compose_tensor(b, &[&id, d])?)?;
    report.push_zero_map_check("product rule for d over the bracket", &leibniz);

    let dm = d.arity1_matrix();
    matrix_power_check(&mut report, &format!("d^{n} = 0"), &dm, n, space);
    report.proper = Some(n >= 1 && !dm.pow(n - 1)?.is_zero());
    Ok(report)
}

/// The bracket [a,b] = ab - (-1)^(deg a * deg b) ba of an associative graded
/// algebra, packaged with the same differential.
pub fn commutator_dgla(p: &AlgebraPresentation) -> Result<AlgebraPresentation, StructError> {
    let m = p.mult().ok_or(StructError::MissingComponent("multiplication"))?;
    let d = p.diff().ok_or(StructError::MissingComponent("differential"))?;
    let space = p.space().clone();
    let mut bracket = MultiMap::zero(space.clone(), space.clone(), 2, 0)?;
    for i in 0..space.dim() {
        for j in 0..space.dim() {
            for (o, c) in m.evaluate(&[i, j]) {
                bracket.add_coefficient(&[i, j], o, c)?;
            }
            let sign = sign_pow(space.degree(i) * space.degree(j) + 1);
            for (o, c) in m.evaluate(&[j, i]) {
                bracket.add_coefficient(&[i, j], o, c * &sign)?;
            }
        }
    }
    AlgebraPresentation::dgla(space, d.clone(), bracket, p.declared_n())
}

fn corestriction_checks(
    report: &mut ValidationReport,
    identities: &[CorestrictionIdentity],
) -> bool {
    let mut all = true;
    for ident in identities {
        let ok = ident.matrix_route_zero && ident.routes_agree;
        all &= ok;
        report.push_verdict(
            &format!("corestriction identity at input length {}", ident.len),
            ident.matrix_route_zero,
            ident.witness.as_ref().map(|w| CheckWitness {
                inputs: vec![],
                value: w.clone(),
            }),
        );
        report.push_verdict(
            &format!("matrix and tree routes agree at input length {}", ident.len),
            ident.routes_agree,
            None,
        );
    }
    all
}

/// Binary operation of degree 0 whose lifted coderivation has a vanishing
/// n-th corestriction: the depth-n associativity law. Strict nilpotency of
/// the same lift is reported alongside; properness is failure of the
/// (n-1)-st corestriction.
pub fn validate_nassociative(
    p: &AlgebraPresentation,
    n: usize,
) -> Result<ValidationReport, StructError> {
    let m = p.mult().ok_or(StructError::MissingComponent("multiplication"))?;
    let mut report = ValidationReport::new("nassociative", n);
    let shifted = p.space().shift(1);
    let coalg = TruncatedCoalgebra::new(shifted, n + 2)?;
    let coder = Coderivation::new(coalg, 1, BTreeMap::from([(2, m.suspend(1))]))?;

    let identities = coder.corestriction_identities(n, n + 1)?;
    let cores_ok = corestriction_checks(&mut report, &identities);
    report.corestriction = Some(cores_ok);

    let strict = coder.strict_power_vanishes(n);
    report.push_verdict(
        &format!("strict nilpotency at order {n} (word length <= {})", n + 2),
        strict.is_ok(),
        strict.err().map(|w| CheckWitness {
            inputs: vec![w.input],
            value: format!("{} with coefficient {}", w.output, scalar_string(&w.coefficient)),
        }),
    );
    report.strict = Some(report.checks.last().map(|c| c.passed).unwrap_or(false));

    report.proper = Some(n >= 2 && coder.corestriction_power_vanishes(n - 1).is_err());
    report.notes.push(format!(
        "verified on tensor words of length <= {}",
        n + 2
    ));
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AinfMode {
    Full,
    TwoTruncated,
}

/// Family of higher operations whose lifted coderivation is n-nilpotent.
/// Reports the strict and corestriction verdicts separately, the agreement
/// of the matrix-power and tree-expansion routes, compatibility with the
/// deconcatenation coproduct, and properness at order n-1.
pub fn validate_ainfn(
    p: &AlgebraPresentation,
    n: usize,
    max_len: usize,
    mode: AinfMode,
) -> Result<ValidationReport, StructError> {
    let ops = p.suspended_ops()?;
    if ops.is_empty() {
        return Err(StructError::MissingComponent("operations"));
    }
    let max_len = match mode {
        AinfMode::Full => max_len,
        AinfMode::TwoTruncated => 2,
    };
    let mut report = ValidationReport::new("ainfN", n);
    let coalg = TruncatedCoalgebra::new(p.space().shift(1), max_len)?;
    let coder = Coderivation::new(coalg, 1, ops)?;

    report.push_verdict(
        "lift is compatible with the deconcatenation coproduct",
        coder.coproduct_compatible(),
        None,
    );

    let identities = coder.corestriction_identities(n, max_len)?;
    let cores_ok = corestriction_checks(&mut report, &identities);
    report.corestriction = Some(cores_ok);

    let strict = coder.strict_power_vanishes(n);
    report.push_verdict(
        &format!("strict nilpotency at order {n} (word length <= {max_len})"),
        strict.is_ok(),
        strict.err().map(|w| CheckWitness {
            inputs: vec![w.input],
            value: format!("{} with coefficient {}", w.output, scalar_string(&w.coefficient)),
        }),
    );
    report.strict = Some(report.checks.last().map(|c| c.passed).unwrap_or(false));

    report.proper = Some(n >= 2 && coder.corestriction_power_vanishes(n - 1).is_err());
    report
        .notes
        .push(format!("verified on tensor words of length <= {max_len}"));
    if mode == AinfMode::TwoTruncated {
        report
            .notes
            .push("two-truncated mode: carrier capped at word length 2".to_string());
    }
    Ok(report)
}

/// The sum over all ways of inserting one operation into another,
/// Sigma ops[r+1+t] o (1^r (x) ops[s] (x) 1^t), at the given total arity.
/// For a square-zero lift this is the defect whose vanishing is the classical
/// higher-associativity relation at that arity.
pub fn insertion_relation_sum(
    ops: &BTreeMap<usize, MultiMap>,
    space: &GradedSpace,
    arity: usize,
) -> Result<MultiMap, GradedError> {
    let id = MultiMap::identity(space);
    let mut acc = MultiMap::zero(space.clone(), space.clone(), arity, 2)?;
    for s in 1..=arity {
        let Some(inner) = ops.get(&s) else { continue };
        for r in 0..=(arity - s) {
            let t = arity - s - r;
            let Some(outer) = ops.get(&(r + 1 + t)) else {
                continue;
            };
            let mut blocks: Vec<&MultiMap> = Vec::with_capacity(r + 1 + t);
            for _ in 0..r {
                blocks.push(&id);
            }
            blocks.push(inner);
            for _ in 0..t {
                blocks.push(&id);
            }
            acc = acc.add(&compose_tensor(outer, &blocks)?)?;
        }
    }
    Ok(acc)
}

/// Endomorphism algebra of a complex whose operator is nilpotent of order n:
/// composition product and the graded-commutator differential
/// D(f) = d o f - (-1)^(deg f) f o d. The result is a differential graded
/// algebra whose differential is nilpotent of order 2n-1.
pub fn end_dga(p: &AlgebraPresentation, n: usize) -> Result<AlgebraPresentation, StructError> {
    let d = p.diff().ok_or(StructError::MissingComponent("differential"))?;
    let dm = d.arity1_matrix();
    if !dm.pow(n)?.is_zero() {
        return Err(StructError::NotStrictlyNilpotent {
            order: n,
            detail: "the input operator power is nonzero".to_string(),
        });
    }
    let (end_space, diff) = end_differential(p.space(), d, true)?;
    let mult = end_composition(p.space(), &end_space)?;
    AlgebraPresentation::dga(end_space, diff, mult, 2 * n - 1)
}

/// The endomorphism space of a graded space: basis elements `a<-b` sending
/// basis vector b to basis vector a, graded by deg a - deg b.
pub fn end_space(space: &GradedSpace) -> Result<GradedSpace, StructError> {
    let dim = space.dim();
    let mut basis = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            basis.push((
                format!("{}<-{}", space.name(i), space.name(j)),
                space.degree(i) - space.degree(j),
            ));
        }
    }
    Ok(GradedSpace::new(basis)?)
}

fn end_index(space: &GradedSpace, out: usize, inp: usize) -> usize {
    out * space.dim() + inp
}

/// Differential on the endomorphism space: graded commutator with the
/// operator when `graded` is set, plain commutator otherwise. Both are
/// degree-1 maps; only the sign on the right composition differs.
pub fn end_differential(
    space: &GradedSpace,
    d: &MultiMap,
    graded: bool,
) -> Result<(GradedSpace, MultiMap), StructError> {
    let es = end_space(space)?;
    let dm = d.arity1_matrix();
    let dim = space.dim();
    let mut out = MultiMap::zero(es.clone(), es.clone(), 1, 1)?;
    for i in 0..dim {
        for j in 0..dim {
            let f = end_index(space, i, j);
            // d o E_ij = sum_a d_ai E_aj
            for a in 0..dim {
                let c = dm.get(a, i);
                if !c.is_zero() {
                    out.add_coefficient(&[f], end_index(space, a, j), c)?;
                }
            }
            // E_ij o d = sum_b d_jb E_ib, weighted by -(-1)^(deg E_ij) in the
            // graded convention and by -1 in the plain one.
            let sign = if graded {
                sign_pow(space.degree(i) - space.degree(j) + 1)
            } else {
                sign_pow(1)
            };
            for b in 0..dim {
                let c = dm.get(j, b);
                if !c.is_zero() {
                    out.add_coefficient(&[f], end_index(space, i, b), c * &sign)?;
                }
            }
        }
    }
    Ok((es, out))
}

fn end_composition(space: &GradedSpace, es: &GradedSpace) -> Result<MultiMap, StructError> {
    let dim = space.dim();
    let mut m = MultiMap::zero(es.clone(), es.clone(), 2, 0)?;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                // E_ij o E_jk = E_ik
                m.add_coefficient(
                    &[end_index(space, i, j), end_index(space, j, k)],
                    end_index(space, i, k),
                    crate::exact::int(1),
                )?;
            }
        }
    }
    Ok(m)
}

/// Dimensions of ker d^p / im d^(n-p) for p = 1..n-1.
pub fn kapranov_cohomology(
    p: &AlgebraPresentation,
    n: usize,
) -> Result<Vec<(usize, usize)>, StructError> {
    let d = p.diff().ok_or(StructError::MissingComponent("differential"))?;
    let dm = d.arity1_matrix();
    let mut dims = Vec::new();
    for deg in 1..n {
        let a = dm.pow(deg)?;
        let b = dm.pow(n - deg)?;
        dims.push((deg, subquotient_dim(&a, &b)?));
    }
    Ok(dims)
}

/// A graded space together with a degree-homogeneous square operator matrix;
/// the common shape of complexes and lifted coderivations, and the carrier
/// of the tensor-product construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarrierOperator {
    pub space: GradedSpace,
    pub matrix: SparseMatrix,
    pub degree: i64,
}

impl CarrierOperator {
    pub fn from_complex(p: &AlgebraPresentation) -> Result<Self, StructError> {
        let d = p.diff().ok_or(StructError::MissingComponent("differential"))?;
        Ok(CarrierOperator {
            space: p.space().clone(),
            matrix: d.arity1_matrix(),
            degree: 1,
        })
    }

    pub fn from_coderivation(c: &Coderivation) -> Self {
        let coalg = c.coalgebra();
        let basis: Vec<(String, i64)> = (0..coalg.dim())
            .map(|i| {
                let w = coalg.word(i);
                (coalg.word_name(w), coalg.word_degree(w))
            })
            .collect();
        CarrierOperator {
            space: GradedSpace::new(basis).expect("word names are unique"),
            matrix: c.matrix().clone(),
            degree: c.degree(),
        }
    }

    /// Smallest power in 1..=cap at which the operator vanishes.
    pub fn first_vanishing_power(&self, cap: usize) -> Option<usize> {
        let mut m = SparseMatrix::identity(self.matrix.rows());
        for p in 1..=cap {
            m = m.mul(&self.matrix).expect("square");
            if m.is_zero() {
                return Some(p);
            }
        }
        None
    }
}

/// The operator a (x) 1 + 1 (x) b on the tensor product of the carriers,
/// with the right factor acting past the left one at the Koszul cost. Both
/// operators must have the same degree.
pub fn tensor_operator(
    a: &CarrierOperator,
    b: &CarrierOperator,
) -> Result<CarrierOperator, StructError> {
    if a.degree != b.degree {
        return Err(StructError::Invalid(format!(
            "tensor factors have different operator degrees {} and {}",
            a.degree, b.degree
        )));
    }
    let da = a.space.dim();
    let db = b.space.dim();
    let mut basis = Vec::with_capacity(da * db);
    for i in 0..da {
        for j in 0..db {
            basis.push((
                format!("{}&{}", a.space.name(i), b.space.name(j)),
                a.space.degree(i) + b.space.degree(j),
            ));
        }
    }
    let space = GradedSpace::new(basis)?;
    let idx = |i: usize, j: usize| i * db + j;
    let mut matrix = SparseMatrix::zero(da * db, da * db);
    for (r, c, v) in a.matrix.iter() {
        for j in 0..db {
            matrix.add_to(idx(r, j), idx(c, j), v);
        }
    }
    for (r, c, v) in b.matrix.iter() {
        for i in 0..da {
            let sign = sign_pow(b.degree * a.space.degree(i));
            matrix.add_to(idx(i, r), idx(i, c), &(v * &sign));
        }
    }
    Ok(CarrierOperator {
        space,
        matrix,
        degree: a.degree,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TensorReport {
    pub bound: usize,
    pub nilpotent_at_bound: bool,
    pub proper_at_previous: bool,
    pub first_vanishing_power: Option<usize>,
}

/// Tensor of two strictly nilpotent structures: the combined operator must
/// vanish at order n + m - 1. Inputs failing strict nilpotency are rejected,
/// since only genuine operator nilpotency supports the cancellation.
pub fn tensor_product_structure(
    a: &Coderivation,
    n: usize,
    b: &Coderivation,
    m: usize,
) -> Result<(CarrierOperator, TensorReport), StructError> {
    if let Err(w) = a.strict_power_vanishes(n) {
        return Err(StructError::NotStrictlyNilpotent {
            order: n,
            detail: format!("left factor moves {} to {}", w.input, w.output),
        });
    }
    if let Err(w) = b.strict_power_vanishes(m) {
        return Err(StructError::NotStrictlyNilpotent {
            order: m,
            detail: format!("right factor moves {} to {}", w.input, w.output),
        });
    }
    let t = tensor_operator(
        &CarrierOperator::from_coderivation(a),
        &CarrierOperator::from_coderivation(b),
    )?;
    let bound = n + m - 1;
    let nilpotent_at_bound = t.matrix.pow(bound)?.is_zero();
    let proper_at_previous = bound >= 1 && !t.matrix.pow(bound - 1)?.is_zero();
    let first = t.first_vanishing_power(bound + 1);
    let report = TensorReport {
        bound,
        nilpotent_at_bound,
        proper_at_previous,
        first_vanishing_power: first,
    };
    Ok((t, report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorphismReport {
    pub commutes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Lift of degree-0 components f_k to a map of word carriers (splitting each
/// word into consecutive blocks and applying one component per block) and
/// the check that it intertwines the two coderivations.
pub fn morphism_check(
    components: &BTreeMap<usize, MultiMap>,
    a: &Coderivation,
    b: &Coderivation,
) -> Result<MorphismReport, StructError> {
    for (k, f) in components {
        if f.arity() != *k
            || f.degree() != 0
            || f.domain() != a.coalgebra().space()
            || f.codomain() != b.coalgebra().space()
        {
            return Err(StructError::WrongSignature {
                component: format!("f{k}"),
                arity: *k,
                degree: 0,
            });
        }
    }
    let ca = a.coalgebra();
    let cb = b.coalgebra();
    let mut f_matrix = SparseMatrix::zero(cb.dim(), ca.dim());
    for col in 0..ca.dim() {
        let word = ca.word(col).to_vec();
        // Partial results: (consumed prefix length, output word, coefficient).
        let mut frontier: Vec<(usize, Vec<usize>, Scalar)> =
            vec![(0, Vec::new(), crate::exact::int(1))];
        while let Some((used, out_word, coeff)) = frontier.pop() {
            if used == word.len() {
                if out_word.len() <= cb.max_len() {
                    if let Some(row) = cb.index_of(&out_word) {
                        f_matrix.add_to(row, col, &coeff);
                    }
                }
                continue;
            }
            for (k, f) in components {
                if used + k > word.len() {
                    continue;
                }
                for (o, c) in f.evaluate(&word[used..used + k]) {
                    let mut next = out_word.clone();
                    next.push(o);
                    frontier.push((used + k, next, &coeff * &c));
                }
            }
        }
    }
    let lhs = f_matrix.mul(a.matrix())?;
    let rhs = b.matrix().mul(&f_matrix)?;
    let defect = lhs.sub(&rhs)?;
    let witness = defect
        .iter()
        .next()
        .map(|(r, c, v)| {
            format!(
                "on {}: difference hits {} with coefficient {}",
                ca.word_name(ca.word(c)),
                cb.word_name(cb.word(r)),
                scalar_string(v)
            )
        });
    Ok(MorphismReport {
        commutes: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuasiIsoReport {
    pub is_chain_map: bool,
    pub per_degree: Vec<QuasiIsoDegree>,
    pub quasi_iso: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuasiIsoDegree {
    pub p: usize,
    pub dim_source: usize,
    pub dim_target: usize,
    pub isomorphism: bool,
}

/// Whether the arity-1 component of a morphism induces an isomorphism on
/// every cohomology ker d^p / im d^(n-p) of the two order-n complexes.
pub fn quasi_iso_check(
    f1: &MultiMap,
    pa: &AlgebraPresentation,
    pb: &AlgebraPresentation,
    n: usize,
) -> Result<QuasiIsoReport, StructError> {
    let da = pa
        .diff()
        .ok_or(StructError::MissingComponent("differential"))?
        .arity1_matrix();
    let db = pb
        .diff()
        .ok_or(StructError::MissingComponent("differential"))?
        .arity1_matrix();
    let fm = f1.arity1_matrix();
    let is_chain_map = fm.mul(&da)? == db.mul(&fm)?;
    let mut per_degree = Vec::new();
    let mut quasi_iso = is_chain_map;
    for p in 1..n {
        let ap = da.pow(p)?;
        let bp = db.pow(p)?;
        let ia = da.pow(n - p)?;
        let ib = db.pow(n - p)?;
        let dim_source = subquotient_dim(&ap, &ia)?;
        let dim_target = subquotient_dim(&bp, &ib)?;
        let ka = ap.rank_kernel();
        let kb = bp.rank_kernel();
        // The induced map is onto iff the images of source kernel vectors,
        // together with im d^(n-p), span ker d^p of the target.
        let mut mapped: Vec<Vec<Scalar>> = Vec::new();
        for v in &ka.kernel {
            mapped.push(fm.apply(v)?);
        }
        let mapped_m = SparseMatrix::from_columns(fm.rows(), &mapped);
        let span = mapped_m.hstack(&ib)?;
        let onto = span.rank() == kb.kernel.len();
        let isomorphism = dim_source == dim_target && onto;
        quasi_iso &= isomorphism;
        per_degree.push(QuasiIsoDegree {
            p,
            dim_source,
            dim_target,
            isomorphism,
        });
    }
    Ok(QuasiIsoReport {
        is_chain_map,
        per_degree,
        quasi_iso,
    })
}
