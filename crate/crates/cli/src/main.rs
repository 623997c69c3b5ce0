//! Command-line front end. Every subcommand reads exact data, runs one of
//! the library computations, prints a verdict or a table, and exits with:
//!
//! - 0 when the run passed (or the command only reports data),
//! - 1 when the run was well posed but the verdict is negative,
//! - 2 when the input (file or arguments) is unusable.
//!
//! `--json` switches the output to a single JSON document with a stable
//! `schema_version` field; field order is alphabetical and deterministic.

mod audit;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand};
use ndepth_core::deformation::{self, DeformError};
use ndepth_core::graded::MultiMap;
use ndepth_core::maurer_cartan::{mc_coefficients, nc_oracle};
use ndepth_core::operads::{
    assn_dims, assn_relation_spans, dgass_blocks, ndga_dims, ndgla_dims, series_check, SeriesKind,
};
use ndepth_core::structures::{
    self, AlgebraPresentation, CarrierOperator, CheckResult, CheckWitness, Kind, StructError,
    ValidationReport,
};
use ndepth_core::trees::{enumerate_arity, enumerate_ub, PlanarTree};
use serde_json::{json, Value};

use input::InputDocument;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "ndepth",
    version,
    about = "Exact-arithmetic checks for depth-N algebraic structures"
)]
struct Cli {
    /// Emit one machine-readable JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a presentation against the laws of its declared kind.
    Check {
        file: PathBuf,
        /// Gate the exit code on strict operator nilpotency.
        #[arg(long, conflicts_with = "corestriction")]
        strict: bool,
        /// Gate the exit code on the corestriction identities.
        #[arg(long)]
        corestriction: bool,
        /// Print both verdicts and gate on the declared kind's law (default).
        #[arg(long, conflicts_with_all = ["strict", "corestriction"])]
        both: bool,
    },
    /// Subquotient cohomology ker d^p / im d^(N-p) of an N-complex.
    Cohomology {
        file: PathBuf,
        /// Treat the input as a bare complex (required).
        #[arg(long)]
        complex: bool,
    },
    /// Deformation ladders: cohomology dimensions, kernel search, order-p checks.
    Deform {
        file: PathBuf,
        /// Depth of the structure (strict nilpotency order of the lift).
        #[arg(short = 'N')]
        depth: usize,
        /// Ladder index used for the classification.
        #[arg(short = 'M')]
        power: usize,
        /// Look for a kernel vector that is new at this ladder index.
        #[arg(long, conflicts_with = "full")]
        search_proper: bool,
        /// Deform by the document's cochain and check flatness to this order.
        #[arg(long, value_name = "P")]
        full: Option<usize>,
    },
    /// Coefficients of the depth-N flatness equation at a given power.
    Mc {
        #[arg(short = 'N')]
        depth: usize,
        #[arg(short = 'M')]
        power: usize,
        /// Cross-check the assembled equation against a direct word expansion.
        #[arg(long)]
        oracle: bool,
    },
    /// Enumerate planar rooted trees by leaves and vertex profile.
    Trees {
        #[arg(long)]
        leaves: usize,
        #[arg(long, requires = "binary", conflicts_with = "vertices")]
        unary: Option<usize>,
        #[arg(long, requires = "unary", conflicts_with = "vertices")]
        binary: Option<usize>,
        /// Total internal vertex count, any arities.
        #[arg(long)]
        vertices: Option<usize>,
    },
    /// Dimension tables of operadic components (ndga, ndgla, ass, dgass, spans).
    Operad {
        kind: String,
        #[arg(short = 'N')]
        depth: usize,
        /// Largest arity to tabulate.
        #[arg(long, default_value_t = 4)]
        max: usize,
    },
    /// Compare a generating series with its closed form.
    Series {
        /// ndga-linear, ndga-graded, ndgla-linear or ndgla-graded.
        kind: String,
        #[arg(short = 'N')]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        order: usize,
    },
    /// Endomorphism dga of an N-complex; its differential must collapse at 2N-1.
    Endalg {
        file: PathBuf,
        #[arg(short = 'N')]
        depth: usize,
    },
    /// Run every cross-check probe and write the findings file.
    Audit {
        #[arg(long, default_value = "findings.md")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Check {
            file,
            strict,
            corestriction,
            both: _,
        } => cmd_check(cli.json, file, *strict, *corestriction),
        Command::Cohomology { file, complex } => cmd_cohomology(cli.json, file, *complex),
        Command::Deform {
            file,
            depth,
            power,
            search_proper,
            full,
        } => cmd_deform(cli.json, file, *depth, *power, *search_proper, *full),
        Command::Mc {
            depth,
            power,
            oracle,
        } => cmd_mc(cli.json, *depth, *power, *oracle),
        Command::Trees {
            leaves,
            unary,
            binary,
            vertices,
        } => cmd_trees(cli.json, *leaves, *unary, *binary, *vertices),
        Command::Operad { kind, depth, max } => cmd_operad(cli.json, kind, *depth, *max),
        Command::Series { kind, depth, order } => cmd_series(cli.json, kind, *depth, *order),
        Command::Endalg { file, depth } => cmd_endalg(cli.json, file, *depth),
        Command::Audit { out } => cmd_audit(cli.json, out),
    }
}

/// Print the outcome in the requested format and pass the verdict through.
/// Writes ignore a closed stdout: the exit code already carries the verdict.
fn finish(json_mode: bool, command: &str, pass: bool, human: Vec<String>, report: Value) -> bool {
    let text = if json_mode {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "pass": pass,
            "report": report,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    } else {
        let mut s = human.join("\n");
        s.push('\n');
        s
    };
    use std::io::Write as _;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    pass
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

fn cmd_check(json_mode: bool, file: &PathBuf, strict: bool, corestriction: bool) -> Result<bool> {
    let doc = InputDocument::load(file)?;
    let p = doc.presentation()?;
    let n = doc.declared_n();
    let trunc = doc.truncation().unwrap_or(n + 2);
    let mut report = match p.kind() {
        Kind::NComplex => structures::validate_ncomplex(&p, n),
        Kind::Ndga => structures::validate_ndga(&p, n),
        Kind::Ndgla => structures::validate_ndgla(&p, n),
        Kind::NAssociative => structures::validate_nassociative(&p, n),
        Kind::DepthN | Kind::AinfN => structures::validate_ainfn(&p, n, trunc, doc.ainf_mode()),
        Kind::Ncgc => structures::validate_ndga(&p, n),
    }
    .map_err(|e| anyhow!("{e}"))?;
    if p.kind() == Kind::Ncgc {
        report.checks.push(graded_commutativity(&p)?);
    }

    let (gate, pass) = if strict {
        ("strict", report.strict.unwrap_or_else(|| report.valid()))
    } else if corestriction {
        (
            "corestriction",
            report.corestriction.unwrap_or_else(|| report.valid()),
        )
    } else {
        (
            "declared law",
            report
                .corestriction
                .or(report.strict)
                .unwrap_or_else(|| report.valid()),
        )
    };

    let mut human = vec![format!(
        "kind {}, declared N = {}, basis dimension {}",
        report.kind,
        report.n,
        p.space().dim()
    )];
    append_checks(&mut human, &report);
    human.push(format!("verdict ({gate}): {}", verdict_word(pass)));

    let value = json!({
        "gate": gate,
        "validation": serde_json::to_value(&report)?,
    });
    Ok(finish(json_mode, "check", pass, human, value))
}

fn append_checks(human: &mut Vec<String>, report: &ValidationReport) {
    for c in &report.checks {
        let mut line = format!("  {} {}", verdict_word(c.passed), c.name);
        if let Some(w) = &c.witness {
            line.push_str(&format!("  [{} -> {}]", w.inputs.join(", "), w.value));
        }
        human.push(line);
    }
    if let Some(s) = report.strict {
        human.push(format!("strict: {}", verdict_word(s)));
    }
    if let Some(c) = report.corestriction {
        human.push(format!("corestriction: {}", verdict_word(c)));
    }
    if let Some(pr) = report.proper {
        human.push(format!("proper: {}", if pr { "yes" } else { "no" }));
    }
    for note in &report.notes {
        human.push(format!("note: {note}"));
    }
}

/// m(a,b) = (-1)^(|a||b|) m(b,a) on every basis pair.
fn graded_commutativity(p: &AlgebraPresentation) -> Result<CheckResult> {
    let m = p
        .mult()
        .ok_or_else(|| anyhow!("ncgc input is missing operations.m2"))?;
    let space = p.space();
    let mut witness = None;
    'outer: for i in 0..space.dim() {
        for j in 0..space.dim() {
            let lhs: std::collections::BTreeMap<usize, _> =
                m.evaluate(&[i, j]).into_iter().collect();
            let sign = ndepth_core::graded::sign_pow(space.degree(i) * space.degree(j));
            let rhs: std::collections::BTreeMap<usize, _> = m
                .evaluate(&[j, i])
                .into_iter()
                .map(|(o, c)| (o, c * &sign))
                .collect();
            if lhs != rhs {
                witness = Some(CheckWitness {
                    inputs: vec![space.name(i).to_string(), space.name(j).to_string()],
                    value: "the two products differ".to_string(),
                });
                break 'outer;
            }
        }
    }
    Ok(CheckResult {
        name: "graded commutativity".to_string(),
        passed: witness.is_none(),
        witness,
    })
}

// ---------------------------------------------------------------------------
// cohomology
// ---------------------------------------------------------------------------

fn cmd_cohomology(json_mode: bool, file: &PathBuf, complex: bool) -> Result<bool> {
    if !complex {
        bail!("cohomology requires --complex");
    }
    let doc = InputDocument::load(file)?;
    let p = doc.presentation()?;
    let n = doc.declared_n();
    let dims = structures::kapranov_cohomology(&p, n).map_err(|e| anyhow!("{e}"))?;
    let mut human = vec![format!("subquotient cohomology at depth {n}")];
    for (deg, dim) in &dims {
        human.push(format!("  H_{deg} = {dim}"));
    }
    let rows: Vec<Value> = dims.iter().map(|(p, d)| json!({"p": p, "dim": d})).collect();
    Ok(finish(
        json_mode,
        "cohomology",
        true,
        human,
        json!({ "depth": n, "dims": rows }),
    ))
}

// ---------------------------------------------------------------------------
// deform
// ---------------------------------------------------------------------------

/// A failed nilpotency precondition or a non-vanishing telescoping composite
/// is a verdict about the data, not a malformed invocation.
fn deform_verdict(e: &DeformError) -> Option<String> {
    match e {
        DeformError::NotNilpotent { .. } | DeformError::TelescopingFailed { .. } => {
            Some(format!("{e}"))
        }
        _ => None,
    }
}

fn cmd_deform(
    json_mode: bool,
    file: &PathBuf,
    depth: usize,
    power: usize,
    search_proper: bool,
    full: Option<usize>,
) -> Result<bool> {
    let doc = InputDocument::load(file)?;
    let p = doc.presentation()?;

    if let Some(order) = full {
        let f = doc
            .cochain_map()?
            .ok_or_else(|| anyhow!("deform --full needs a \"cochain\" block in the document"))?;
        return cmd_deform_full(json_mode, &p, &f, depth, power, order);
    }
    if search_proper {
        return cmd_deform_search(json_mode, &p, depth, power);
    }

    match deformation::cohomology_hnm(&p, depth, power) {
        Ok(r) => {
            let human = vec![
                format!("ladder cohomology at depth {depth}, index {power}"),
                format!("  kernel dimension: {}", r.dim_kernel),
                format!("  image dimension:  {}", r.dim_image),
                format!("  H^2 dimension:    {}", r.dim_h),
            ];
            let value = serde_json::to_value(&r)?;
            Ok(finish(json_mode, "deform", true, human, value))
        }
        Err(e) => match deform_verdict(&e) {
            Some(msg) => Ok(finish(
                json_mode,
                "deform",
                false,
                vec![format!("FAIL {msg}")],
                json!({ "failure": msg }),
            )),
            None => Err(anyhow!("{e}")),
        },
    }
}

fn cmd_deform_search(
    json_mode: bool,
    p: &AlgebraPresentation,
    depth: usize,
    power: usize,
) -> Result<bool> {
    match deformation::proper_search(p, depth, power) {
        Ok(r) => {
            let mut human = vec![
                format!("kernel search at depth {depth}, index {power}"),
                format!("  kernel dimension at index {power}: {}", r.kernel_dim),
                format!(
                    "  kernel dimension at index {}: {}",
                    power - 1,
                    r.lower_kernel_dim
                ),
                format!("  commutator image dimension: {}", r.image_dim),
            ];
            match &r.certificate {
                Some(c) => {
                    human.push("  new kernel vector found:".to_string());
                    for (name, coeff) in &c.coordinates {
                        human.push(format!("    {coeff} * ({name})"));
                    }
                    human.push(format!(
                        "  re-verified by words: upper vanishes {}, lower nonzero {}",
                        c.upper_vanishes, c.lower_nonzero
                    ));
                }
                None => human.push("  no kernel vector is new at this index".to_string()),
            }
            let value = serde_json::to_value(&r)?;
            Ok(finish(json_mode, "deform", true, human, value))
        }
        Err(e) => match deform_verdict(&e) {
            Some(msg) => Ok(finish(
                json_mode,
                "deform",
                false,
                vec![format!("FAIL {msg}")],
                json!({ "failure": msg }),
            )),
            None => Err(anyhow!("{e}")),
        },
    }
}

fn cmd_deform_full(
    json_mode: bool,
    p: &AlgebraPresentation,
    f: &MultiMap,
    depth: usize,
    power: usize,
    order: usize,
) -> Result<bool> {
    match deformation::full_check(p, f, depth, power, order) {
        Ok(r) => {
            let pass = r.flat && r.linear_matches_ladder;
            let mut human = vec![
                format!(
                    "order-{order} deformation at depth {depth}, index {power}: {}",
                    verdict_word(pass)
                ),
                format!("  perturbed power vanishes: {}", r.flat),
                format!("  linear term vanishes: {}", r.linear_term_vanishes),
                format!(
                    "  linear term equals the ladder value: {}",
                    r.linear_matches_ladder
                ),
            ];
            if let Some(q) = r.quadratic_term_vanishes {
                human.push(format!("  quadratic term vanishes: {q}"));
            }
            if let (Some(fd), Some(ih)) = (r.mc_flat_direct, r.mc_identity_holds) {
                human.push(format!(
                    "  coefficient-system cross-check: flat {fd}, identity {ih}"
                ));
            }
            let value = serde_json::to_value(&r)?;
            Ok(finish(json_mode, "deform", pass, human, value))
        }
        Err(e) => match deform_verdict(&e) {
            Some(msg) => Ok(finish(
                json_mode,
                "deform",
                false,
                vec![format!("FAIL {msg}")],
                json!({ "failure": msg }),
            )),
            None => Err(anyhow!("{e}")),
        },
    }
}

// ---------------------------------------------------------------------------
// mc
// ---------------------------------------------------------------------------

fn fmt_comp(s: &[usize]) -> String {
    let inner: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(","))
}

fn cmd_mc(json_mode: bool, depth: usize, power: usize, oracle: bool) -> Result<bool> {
    let system = mc_coefficients(depth, power).map_err(|e| anyhow!("{e}"))?;
    let report = system.report();
    let mut human = Vec::new();
    for c in &report.coefficients {
        human.push(format!("c({}, {power}) = {}", fmt_comp(&c.s), c.value));
    }
    human.push("assembled equation:".to_string());
    for p in &report.equation {
        let terms: Vec<String> = p
            .terms
            .iter()
            .map(|t| format!("{} * e^{}", t.value, fmt_comp(&t.s)))
            .collect();
        human.push(format!("  power {}: {}", p.k, terms.join(" + ")));
    }
    let mut value = json!({ "coefficients": serde_json::to_value(&report)? });
    let mut pass = true;
    if oracle {
        let o = nc_oracle(depth, power).map_err(|e| anyhow!("{e}"))?;
        pass = o.agree;
        human.push(format!(
            "oracle verdict: {}",
            if o.agree { "EQUAL" } else { "DIFFERENT" }
        ));
        if !o.agree {
            for (word, coeff) in o.difference.iter().take(8) {
                human.push(format!("  difference term: {coeff} * {word}"));
            }
        }
        value["oracle"] = serde_json::to_value(&o)?;
    }
    Ok(finish(json_mode, "mc", pass, human, value))
}

// ---------------------------------------------------------------------------
// trees
// ---------------------------------------------------------------------------

fn cmd_trees(
    json_mode: bool,
    leaves: usize,
    unary: Option<usize>,
    binary: Option<usize>,
    vertices: Option<usize>,
) -> Result<bool> {
    let trees: Vec<PlanarTree> = match (unary, binary, vertices) {
        (Some(u), Some(b), None) => enumerate_ub(leaves, u, b),
        (None, None, Some(v)) => enumerate_arity(leaves, v),
        _ => bail!("trees needs either --unary with --binary, or --vertices"),
    };
    let serialized: Vec<String> = trees.iter().map(|t| t.serialize()).collect();
    let mut human = vec![format!("{} tree(s)", trees.len())];
    human.extend(serialized.iter().cloned());
    Ok(finish(
        json_mode,
        "trees",
        true,
        human,
        json!({ "count": serialized.len(), "trees": serialized }),
    ))
}

// ---------------------------------------------------------------------------
// operad
// ---------------------------------------------------------------------------

fn cmd_operad(json_mode: bool, kind: &str, depth: usize, max: usize) -> Result<bool> {
    let (human, value) = match kind {
        "ndga" => {
            let rows = ndga_dims(depth, max).map_err(|e| anyhow!("{e}"))?;
            let mut lines = vec![format!("free unary-binary components at depth {depth}")];
            for r in &rows {
                lines.push(format!(
                    "  n = {}: dim {}, superdim {}",
                    r.n, r.dim, r.superdim
                ));
            }
            (lines, serde_json::to_value(&rows)?)
        }
        "ndgla" => {
            let rows = ndgla_dims(depth, max).map_err(|e| anyhow!("{e}"))?;
            let mut lines = vec![format!("free Lie-type components at depth {depth}")];
            for r in &rows {
                lines.push(format!(
                    "  n = {}: dim {}, superdim {}",
                    r.n, r.dim, r.superdim
                ));
            }
            (lines, serde_json::to_value(&rows)?)
        }
        "ass" => {
            let rows = assn_dims(depth, max).map_err(|e| anyhow!("{e}"))?;
            let mut lines = vec![format!("associative quotient components at depth {depth}")];
            for r in &rows {
                let rank = r
                    .relation_rank
                    .map(|k| k.to_string())
                    .unwrap_or_else(|| "-".to_string());
                lines.push(format!(
                    "  n = {}: free dim {}, relation rank {}, dim {}",
                    r.n, r.free_dim, rank, r.dim
                ));
            }
            (lines, serde_json::to_value(&rows)?)
        }
        "dgass" => {
            let rows = dgass_blocks(depth, max, 2 * depth).map_err(|e| anyhow!("{e}"))?;
            let mut lines = vec![format!(
                "differential-weight blocks at depth {depth}, arity {max}"
            )];
            for r in &rows {
                lines.push(format!(
                    "  u = {}: free dim {}, plain dim {}, signed dim {}",
                    r.u, r.free_dim, r.dim_plain, r.dim_signed
                ));
            }
            (lines, serde_json::to_value(&rows)?)
        }
        "spans" => {
            let cmp = assn_relation_spans(depth).map_err(|e| anyhow!("{e}"))?;
            let lines = vec![
                format!("relation spans at depth {depth}"),
                format!("  signed rank {}", cmp.signed_rank),
                format!("  plain rank {}", cmp.plain_rank),
                format!("  joint rank {}", cmp.joint_rank),
                format!("  spans agree: {}", cmp.spans_agree),
            ];
            (lines, serde_json::to_value(&cmp)?)
        }
        other => bail!("unknown operad kind {other:?} (expected ndga, ndgla, ass, dgass or spans)"),
    };
    Ok(finish(json_mode, "operad", true, human, value))
}

// ---------------------------------------------------------------------------
// series
// ---------------------------------------------------------------------------

fn cmd_series(json_mode: bool, kind: &str, depth: usize, order: usize) -> Result<bool> {
    let k = SeriesKind::parse(kind)
        .ok_or_else(|| anyhow!("unknown series kind {kind:?} (expected ndga-linear, ndga-graded, ndgla-linear or ndgla-graded)"))?;
    let report = series_check(k, depth, order).map_err(|e| anyhow!("{e}"))?;
    let mut human = vec![format!(
        "series {kind} at depth {depth}, closed form {}",
        report.closed_form
    )];
    for row in &report.rows {
        human.push(format!(
            "  order {}: computed {}, closed form {}, {}",
            row.n,
            row.computed,
            row.closed_form,
            if row.agree { "agree" } else { "differ" }
        ));
    }
    human.push(format!("verdict: {}", verdict_word(report.pass)));
    let pass = report.pass;
    let value = serde_json::to_value(&report)?;
    Ok(finish(json_mode, "series", pass, human, value))
}

// ---------------------------------------------------------------------------
// endalg
// ---------------------------------------------------------------------------

fn cmd_endalg(json_mode: bool, file: &PathBuf, depth: usize) -> Result<bool> {
    let doc = InputDocument::load(file)?;
    let p = doc.presentation()?;
    let end = match structures::end_dga(&p, depth) {
        Ok(end) => end,
        Err(StructError::NotStrictlyNilpotent { order, detail }) => {
            let msg = format!("input operator is not nilpotent at order {order}: {detail}");
            return Ok(finish(
                json_mode,
                "endalg",
                false,
                vec![format!("FAIL {msg}")],
                json!({ "failure": msg }),
            ));
        }
        Err(e) => return Err(anyhow!("{e}")),
    };
    let bound = 2 * depth - 1;
    let op = CarrierOperator::from_complex(&end).map_err(|e| anyhow!("{e}"))?;
    let first = op.first_vanishing_power(bound);
    let pass = first.is_some();
    let mut human = vec![
        format!(
            "endomorphism dga: input dimension {}, end dimension {}",
            p.space().dim(),
            end.space().dim()
        ),
        format!("depth bound 2N-1 = {bound}"),
    ];
    match first {
        Some(k) => human.push(format!("differential power vanishes first at {k}: PASS")),
        None => human.push(format!(
            "differential power does not vanish by {bound}: FAIL"
        )),
    }
    let value = json!({
        "input_dim": p.space().dim(),
        "end_dim": end.space().dim(),
        "bound": bound,
        "first_vanishing_power": first,
    });
    Ok(finish(json_mode, "endalg", pass, human, value))
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

fn cmd_audit(json_mode: bool, out: &PathBuf) -> Result<bool> {
    let text = audit::run()?;
    std::fs::write(out, &text)
        .map_err(|e| anyhow!("cannot write {}: {e}", out.display()))?;
    let sections: Vec<String> = text
        .lines()
        .filter(|l| l.starts_with("## "))
        .map(|l| l[3..].to_string())
        .collect();
    let mut human = vec![format!("findings written to {}", out.display())];
    for s in &sections {
        human.push(format!("  - {s}"));
    }
    Ok(finish(
        json_mode,
        "audit",
        true,
        human,
        json!({ "out": out.display().to_string(), "sections": sections }),
    ))
}
