//! JSON documents presenting an algebra by structure constants.
//!
//! A document fixes the scalar field (only `"rational"` is accepted), lists a
//! graded basis, gives each operation as a block of structure constants with
//! exact rational coefficients written as strings ("3", "-1/2"), and declares
//! the kind of structure the data claims to be together with its depth.
//! Arity-k operations for k >= 3 live under `operations.mk`, keyed by the
//! arity; arities 1 and 2 always use the named blocks `m1`, `m2`, `bracket`.
//!
//! Loading enforces three things beyond shape: every name mentioned by an
//! entry must be a declared basis vector, every coefficient must parse as an
//! exact rational, and the document must survive a serialize/parse round
//! trip unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ndepth_core::exact::parse_scalar;
use ndepth_core::graded::{GradedSpace, MultiMap};
use ndepth_core::structures::{AinfMode, AlgebraPresentation, Kind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    /// Scalar field tag; only exact rationals are supported.
    pub field: String,
    pub space: Vec<BasisEntry>,
    #[serde(default)]
    pub operations: Operations,
    pub declared: Declared,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Options>,
    /// Optional deformation direction: one multilinear map, every entry of a
    /// common arity and a common degree. Consumed by `deform --full`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cochain: Option<Vec<OpEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub name: String,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operations {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m1: Vec<OpEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m2: Vec<OpEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bracket: Vec<OpEntry>,
    /// Higher operation blocks keyed by arity, "3" and up.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub mk: BTreeMap<String, Vec<OpEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpEntry {
    pub inputs: Vec<String>,
    pub output: String,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Declared {
    pub kind: String,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Word-length cap for coderivation carriers; defaults to N + 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// "full" (default) or "two-truncated".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl InputDocument {
    pub fn load(path: &Path) -> Result<InputDocument> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let doc: InputDocument = serde_json::from_str(&text)
            .with_context(|| format!("{}: not a valid input document", path.display()))?;
        doc.validate()?;
        doc.round_trip_guard()?;
        Ok(doc)
    }

    fn validate(&self) -> Result<()> {
        if self.field != "rational" {
            bail!("field: only \"rational\" is supported, got {:?}", self.field);
        }
        if self.space.is_empty() {
            bail!("space: at least one basis vector is required");
        }
        if self.declared.n == 0 {
            bail!("declared.N: the depth must be at least 1");
        }
        if Kind::parse(&self.declared.kind).is_none() {
            bail!(
                "declared.kind: unknown kind {:?} (expected one of ncomplex, ndga, ndgla, nassociative, depthN, ainfN, ncgc)",
                self.declared.kind
            );
        }
        if let Some(opts) = &self.options {
            if let Some(mode) = &opts.mode {
                if mode != "full" && mode != "two-truncated" {
                    bail!("options.mode: expected \"full\" or \"two-truncated\", got {mode:?}");
                }
            }
            if opts.truncation == Some(0) {
                bail!("options.truncation: the word-length cap must be at least 1");
            }
        }
        Ok(())
    }

    /// The invariant every document must satisfy: parsing its own
    /// serialization gives the document back.
    fn round_trip_guard(&self) -> Result<()> {
        let text = serde_json::to_string(self).context("cannot serialize the document")?;
        let again: InputDocument =
            serde_json::from_str(&text).context("serialized document does not re-parse")?;
        if &again != self {
            bail!("document does not survive a serialize/parse round trip");
        }
        Ok(())
    }

    pub fn kind(&self) -> Kind {
        Kind::parse(&self.declared.kind).expect("checked during load")
    }

    pub fn declared_n(&self) -> usize {
        self.declared.n
    }

    pub fn space(&self) -> Result<GradedSpace> {
        let basis: Vec<(String, i64)> = self
            .space
            .iter()
            .map(|b| (b.name.clone(), b.degree))
            .collect();
        GradedSpace::new(basis).map_err(|e| anyhow!("space: {e}"))
    }

    pub fn truncation(&self) -> Option<usize> {
        self.options.as_ref().and_then(|o| o.truncation)
    }

    pub fn ainf_mode(&self) -> AinfMode {
        match self.options.as_ref().and_then(|o| o.mode.as_deref()) {
            Some("two-truncated") => AinfMode::TwoTruncated,
            _ => AinfMode::Full,
        }
    }

    /// Assemble the presentation. Slots the declared kind requires are
    /// materialized as zero maps when their block is absent, so a
    /// legitimately zero operation stays checkable.
    pub fn presentation(&self) -> Result<AlgebraPresentation> {
        let space = self.space()?;
        let kind = self.kind();
        let ops = &self.operations;
        let slot = |required: bool,
                    entries: &[OpEntry],
                    arity: usize,
                    degree: i64,
                    label: &str|
         -> Result<Option<MultiMap>> {
            if entries.is_empty() && !required {
                return Ok(None);
            }
            Ok(Some(build_block(&space, entries, arity, degree, label)?))
        };
        let (want_d, want_m, want_b) = match kind {
            Kind::NComplex => (true, false, false),
            Kind::Ndga | Kind::Ncgc => (true, true, false),
            Kind::Ndgla => (true, false, true),
            Kind::NAssociative => (false, true, false),
            Kind::DepthN | Kind::AinfN => (false, false, false),
        };
        let diff = slot(want_d, &ops.m1, 1, 1, "operations.m1")?;
        let mult = slot(want_m, &ops.m2, 2, 0, "operations.m2")?;
        let bracket = slot(want_b, &ops.bracket, 2, 0, "operations.bracket")?;
        let mut higher = BTreeMap::new();
        for (key, entries) in &ops.mk {
            let k: usize = key
                .parse()
                .map_err(|_| anyhow!("operations.mk: key {key:?} is not an arity"))?;
            if k <= 2 {
                bail!("operations.mk.{key}: arities 1 and 2 belong in m1/m2");
            }
            let label = format!("operations.mk.{key}");
            higher.insert(k, build_block(&space, entries, k, 2 - k as i64, &label)?);
        }
        AlgebraPresentation::new(space, kind, self.declared.n, diff, mult, bracket, higher)
            .map_err(|e| anyhow!("{e}"))
    }

    /// The optional deformation direction. Arity is read off the first
    /// entry; the degree is inferred from it and homogeneity of the rest is
    /// enforced by the map construction.
    pub fn cochain_map(&self) -> Result<Option<MultiMap>> {
        let Some(entries) = &self.cochain else {
            return Ok(None);
        };
        if entries.is_empty() {
            bail!("cochain: the block must contain at least one entry");
        }
        let space = self.space()?;
        let arity = entries[0].inputs.len();
        if arity == 0 {
            bail!("cochain[0]: at least one input is required");
        }
        let mut degree = 0;
        for name in &entries[0].inputs {
            let i = space
                .index_of(name)
                .map_err(|_| anyhow!("cochain[0]: unknown basis name {name:?}"))?;
            degree -= space.degree(i);
        }
        let out = space
            .index_of(&entries[0].output)
            .map_err(|_| anyhow!("cochain[0]: unknown basis name {:?}", entries[0].output))?;
        degree += space.degree(out);
        Ok(Some(build_block(&space, entries, arity, degree, "cochain")?))
    }
}

fn build_block(
    space: &GradedSpace,
    entries: &[OpEntry],
    arity: usize,
    degree: i64,
    label: &str,
) -> Result<MultiMap> {
    let mut m = MultiMap::zero(space.clone(), space.clone(), arity, degree)
        .map_err(|e| anyhow!("{label}: {e}"))?;
    for (i, entry) in entries.iter().enumerate() {
        let at = format!("{label}[{i}]");
        if entry.inputs.len() != arity {
            bail!(
                "{at}: expected {arity} input(s), got {}",
                entry.inputs.len()
            );
        }
        let mut idx = Vec::with_capacity(arity);
        for name in &entry.inputs {
            idx.push(
                space
                    .index_of(name)
                    .map_err(|_| anyhow!("{at}: unknown basis name {name:?}"))?,
            );
        }
        let out = space
            .index_of(&entry.output)
            .map_err(|_| anyhow!("{at}: unknown basis name {:?}", entry.output))?;
        let c = parse_scalar(&entry.coefficient)
            .map_err(|e| anyhow!("{at}: bad coefficient {:?}: {e}", entry.coefficient))?;
        m.add_coefficient(&idx, out, c)
            .map_err(|e| anyhow!("{at}: {e}"))?;
    }
    Ok(m)
}
