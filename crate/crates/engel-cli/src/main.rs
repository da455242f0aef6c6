//! Command-line front end for the exact coframe toolkit: family
//! certification, residue reports, derived relations, realification, Lie
//! algebra classification, exactness obstructions, lattice search, and
//! chart checking.
//!
//! # Design Notes
//!
//! - Every subcommand assembles a [`Report`] of named checks; exit code 0
//!   means every check passed, 1 means at least one failed, and 2 means a
//!   usage or internal error (including malformed inputs).
//! - `--json` prints the report as JSON. Identical inputs produce
//!   byte-identical reports: map keys are ordered, and the elapsed-time
//!   field is omitted from JSON (it is shown only in the human output).
//! - Rational flags are exact strings `P/Q`; no floating-point input is
//!   accepted anywhere except `--precision`, which counts bits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{ErrorKind, Write as _};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use engel::classify::{check_derived_relations, d2_residues, verify_family};
use engel::compactness::{
    cubic_discriminant, lattice_search, standard_obstructions, verify_certificate,
    ObstructionReport,
};
use engel::coords::{chart_spec_from_json, verify_chart_spec, BindingSpec, ChartSpec};
use engel::exterior::{mask_name, Generator};
use engel::liealg::{identify, realify, RealLieAlgebra, REAL_COFRAME_NAMES};
use engel::models::{Binding, CoframeModel, FamilyId, FamilyName};
use engel::scalar::{GaussianRational, Scalar};
use engel::{Error, Result};

#[derive(Parser)]
#[command(
    name = "engel",
    version,
    about = "Exact verification and classification for the complex Engel \
             structure equations",
    propagate_version = true
)]
struct Cli {
    /// Print the report as deterministic JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Print nothing; the exit code carries the verdict.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify that a family satisfies d² = 0 (symbolically or at a point).
    VerifyFamily(VerifyFamilyArgs),
    /// Report the sixteen d² residues of a model file.
    Residues(ResiduesArgs),
    /// Check the derived coefficient relations on a family's constants.
    Relations(RelationsArgs),
    /// Split a bound model into a real coframe and its Lie algebra.
    Realify(RealifyArgs),
    /// Identify the real Lie algebra of a bound model.
    ClassifyLie(ClassifyLieArgs),
    /// Compute Stokes exactness obstructions from 3-form witnesses.
    Obstruction(ObstructionArgs),
    /// Search an (m, n) window for verifiable dilation certificates.
    LatticeSearch(LatticeSearchArgs),
    /// Check a chart file against its family's structure equations.
    CoordsCheck(CoordsCheckArgs),
}

/// Shared parameter-binding flags.
#[derive(Args, Clone)]
struct BindingArgs {
    /// Keep the family parameters symbolic.
    #[arg(long, conflicts_with_all = ["a", "t"])]
    symbolic: bool,

    /// Exact rational value P/Q for the parameter a.
    #[arg(long, value_name = "P/Q", conflicts_with = "t", allow_hyphen_values = true)]
    a: Option<String>,

    /// Exact rational value P/Q for the parameter b.
    #[arg(long, value_name = "P/Q", allow_hyphen_values = true)]
    b: Option<String>,

    /// Exact rational circle parameter P/Q (sixth family only).
    #[arg(long, value_name = "P/Q", allow_hyphen_values = true)]
    t: Option<String>,
}

#[derive(Args)]
struct VerifyFamilyArgs {
    /// Family name, C1 through C6.
    #[arg(long, value_name = "CASE")]
    case: String,

    #[command(flatten)]
    binding: BindingArgs,
}

#[derive(Args)]
struct ResiduesArgs {
    /// Path to a model JSON file (symbol table plus six constants).
    #[arg(long, value_name = "FILE")]
    model_file: String,
}

#[derive(Args)]
struct RelationsArgs {
    /// Family name, C1 through C6.
    #[arg(long, value_name = "CASE")]
    case: String,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BasisChoice {
    /// The coframe change used by the family's displayed bracket table
    /// (identity where none is displayed).
    Paper,
    /// Realify the model's own coframe directly.
    Identity,
}

#[derive(Args)]
struct RealifyArgs {
    /// Family name, C1 through C6.
    #[arg(long, value_name = "CASE")]
    case: String,

    #[command(flatten)]
    binding: BindingArgs,

    /// Coframe basis to realify in.
    #[arg(long, value_enum, default_value = "identity")]
    basis: BasisChoice,
}

#[derive(Args)]
struct ClassifyLieArgs {
    /// Family name, C1 through C6.
    #[arg(long, value_name = "CASE")]
    case: String,

    #[command(flatten)]
    binding: BindingArgs,
}

#[derive(Args)]
struct ObstructionArgs {
    /// Family name, C1 through C6.
    #[arg(long, value_name = "CASE")]
    case: String,

    /// Witness 3-form as a generator triple, e.g. `w1^w2^w2bar`
    /// (default: the family's standard witnesses).
    #[arg(long, value_name = "NAME")]
    witness: Option<String>,

    #[command(flatten)]
    binding: BindingArgs,
}

#[derive(Args)]
struct LatticeSearchArgs {
    /// Single m value (shorthand for an m window of width one).
    #[arg(long, value_name = "INT", conflicts_with_all = ["m_min", "m_max"], allow_hyphen_values = true)]
    m: Option<i64>,

    /// Lower end of the m window.
    #[arg(long, value_name = "INT", requires = "m_max", allow_hyphen_values = true)]
    m_min: Option<i64>,

    /// Upper end of the m window.
    #[arg(long, value_name = "INT", requires = "m_min", allow_hyphen_values = true)]
    m_max: Option<i64>,

    /// Single n value (shorthand for an n window of width one).
    #[arg(long, value_name = "INT", conflicts_with_all = ["n_min", "n_max"], allow_hyphen_values = true)]
    n: Option<i64>,

    /// Lower end of the n window.
    #[arg(long, value_name = "INT", requires = "n_max", allow_hyphen_values = true)]
    n_min: Option<i64>,

    /// Upper end of the n window.
    #[arg(long, value_name = "INT", requires = "n_min", allow_hyphen_values = true)]
    n_max: Option<i64>,

    /// Off-diagonal entry k of the dilation matrix.
    #[arg(long, value_name = "INT", default_value_t = 0, allow_hyphen_values = true)]
    k: i64,

    /// Working precision in bits for the floating certificate fields.
    #[arg(long, value_name = "BITS", default_value_t = 128)]
    precision: usize,
}

#[derive(Args)]
struct CoordsCheckArgs {
    /// Path to a chart JSON file.
    #[arg(long, value_name = "FILE")]
    chart: String,

    /// Family name the chart must target (cross-checked against the file).
    #[arg(long, value_name = "CASE")]
    case: Option<String>,

    /// Override the file's binding with the symbolic one.
    #[arg(long, conflicts_with_all = ["a", "b"])]
    symbolic: bool,

    /// Override the file's binding: exact rational P/Q for a.
    #[arg(long, value_name = "P/Q", requires = "b", allow_hyphen_values = true)]
    a: Option<String>,

    /// Override the file's binding: exact rational P/Q for b.
    #[arg(long, value_name = "P/Q", requires = "a", allow_hyphen_values = true)]
    b: Option<String>,
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Serialize)]
struct CheckResult {
    name: String,
    status: Status,
    payload: Value,
}

impl CheckResult {
    fn new(name: impl Into<String>, pass: bool, payload: Value) -> CheckResult {
        CheckResult {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            payload,
        }
    }
}

#[derive(Serialize)]
struct Report {
    version: &'static str,
    command: &'static str,
    inputs: BTreeMap<String, String>,
    results: Vec<CheckResult>,
    /// Wall-clock milliseconds; omitted from JSON so identical inputs
    /// produce byte-identical reports.
    #[serde(skip)]
    elapsed_ms: u128,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("engel: {e}");
            return ExitCode::from(2);
        }
    };
    report.elapsed_ms = start.elapsed().as_millis();

    if !cli.quiet {
        let text = if cli.json {
            match serde_json::to_string_pretty(&report) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("engel: report serialization failed: {e}");
                    return ExitCode::from(2);
                }
            }
        } else {
            render_human(&report)
        };
        // A closed pipe downstream (e.g. `| head`) is not an error.
        let mut out = std::io::stdout().lock();
        if let Err(e) = writeln!(out, "{text}") {
            if e.kind() != ErrorKind::BrokenPipe {
                eprintln!("engel: {e}");
                return ExitCode::from(2);
            }
        }
    }

    if report.results.iter().any(|r| r.status == Status::Error) {
        ExitCode::from(2)
    } else if report.results.iter().any(|r| r.status == Status::Fail) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn render_human(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", report.command);
    for (k, v) in &report.inputs {
        let _ = writeln!(out, "  input {k} = {v}");
    }
    for r in &report.results {
        let tag = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        let _ = writeln!(out, "{tag} {}", r.name);
        if r.status != Status::Pass || payload_is_small(&r.payload) {
            let pretty =
                serde_json::to_string_pretty(&r.payload).unwrap_or_else(|_| "{}".to_string());
            for line in pretty.lines() {
                let _ = writeln!(out, "    {line}");
            }
        }
    }
    let _ = write!(out, "elapsed: {} ms", report.elapsed_ms);
    out
}

fn payload_is_small(v: &Value) -> bool {
    serde_json::to_string(v).map(|s| s.len() <= 600).unwrap_or(false)
}

fn run(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::VerifyFamily(args) => cmd_verify_family(args),
        Command::Residues(args) => cmd_residues(args),
        Command::Relations(args) => cmd_relations(args),
        Command::Realify(args) => cmd_realify(args),
        Command::ClassifyLie(args) => cmd_classify_lie(args),
        Command::Obstruction(args) => cmd_obstruction(args),
        Command::LatticeSearch(args) => cmd_lattice_search(args),
        Command::CoordsCheck(args) => cmd_coords_check(args),
    }
}

// ---------------------------------------------------------------------------
// Shared parsing helpers

fn parse_rational(flag: &str, s: &str) -> Result<BigRational> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|e| Error::Usage(format!("--{flag} expects an exact rational P/Q: {e}")))
}

fn family(case: &str) -> Result<FamilyName> {
    FamilyName::from_name(case)
}

/// Resolve the binding flags into a family id; `default_symbolic` lets
/// commands whose natural reading is symbolic (obstruction) omit the flag.
fn bound_family_id(
    case: &str,
    b: &BindingArgs,
    default_symbolic: bool,
) -> Result<FamilyId> {
    let name = family(case)?;
    if b.symbolic {
        return Ok(FamilyId::symbolic(name));
    }
    if let Some(t) = &b.t {
        let Some(bb) = &b.b else {
            return Err(Error::Usage(
                "--t needs --b as well (the sixth family has parameters t \
                 and b)"
                    .into(),
            ));
        };
        return FamilyId::new(
            name,
            Binding::Circle {
                t: parse_rational("t", t)?,
                b: parse_rational("b", bb)?,
            },
        );
    }
    match (&b.a, &b.b) {
        (Some(a), Some(bb)) => FamilyId::new(
            name,
            Binding::Rational {
                a: parse_rational("a", a)?,
                b: parse_rational("b", bb)?,
            },
        ),
        (None, None) if default_symbolic => Ok(FamilyId::symbolic(name)),
        _ => Err(Error::Usage(
            "specify --symbolic, or --a P/Q --b P/Q, or --t P/Q --b P/Q \
             (sixth family)"
                .into(),
        )),
    }
}

fn echo_binding(inputs: &mut BTreeMap<String, String>, b: &BindingArgs) {
    if b.symbolic {
        inputs.insert("symbolic".into(), "true".into());
    }
    if let Some(a) = &b.a {
        inputs.insert("a".into(), a.clone());
    }
    if let Some(bb) = &b.b {
        inputs.insert("b".into(), bb.clone());
    }
    if let Some(t) = &b.t {
        inputs.insert("t".into(), t.clone());
    }
}

fn binding_description(id: &FamilyId) -> String {
    match &id.binding {
        Binding::Symbolic => "symbolic".to_string(),
        Binding::Rational { a, b } => format!("a = {a}, b = {b}"),
        Binding::Circle { t, b } => format!("t = {t}, b = {b}"),
    }
}

// ---------------------------------------------------------------------------
// verify-family

fn cmd_verify_family(args: &VerifyFamilyArgs) -> Result<Report> {
    let id = bound_family_id(&args.case, &args.binding, false)?;
    let ok = verify_family(&id)?;
    let sys = d2_residues(&id.model()?);
    let entries: Vec<Value> = sys
        .entries()
        .iter()
        .filter(|e| !e.residue.is_zero())
        .map(|e| {
            json!({
                "generator": e.generator.name(),
                "monomial": mask_name(e.monomial),
                "residue": e.residue.to_string(),
            })
        })
        .collect();
    let mut inputs = BTreeMap::new();
    inputs.insert("case".into(), args.case.clone());
    echo_binding(&mut inputs, &args.binding);
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "verify-family",
        inputs,
        results: vec![CheckResult::new(
            "d2_residues_vanish",
            ok,
            json!({
                "family": id.name.name(),
                "binding": binding_description(&id),
                "nonzero_residues": entries,
            }),
        )],
        elapsed_ms: 0,
    })
}

// ---------------------------------------------------------------------------
// residues

fn cmd_residues(args: &ResiduesArgs) -> Result<Report> {
    let text = std::fs::read_to_string(&args.model_file)?;
    let (_table, constants) = engel::models::model_from_json(&text)?;
    let model = CoframeModel::from_constants(&constants);
    let sys = d2_residues(&model);
    let entries: Vec<Value> = sys
        .entries()
        .iter()
        .map(|e| {
            json!({
                "generator": e.generator.name(),
                "monomial": mask_name(e.monomial),
                "residue": e.residue.to_string(),
                "zero": e.residue.is_zero(),
            })
        })
        .collect();
    let mut inputs = BTreeMap::new();
    inputs.insert("model-file".into(), args.model_file.clone());
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "residues",
        inputs,
        results: vec![CheckResult::new(
            "d2_residues_vanish",
            sys.all_zero(),
            json!({
                "nonzero_count": sys.nonzero_count(),
                "entries": entries,
            }),
        )],
        elapsed_ms: 0,
    })
}

// ---------------------------------------------------------------------------
// relations

fn cmd_relations(args: &RelationsArgs) -> Result<Report> {
    let name = family(&args.case)?;
    let k = FamilyId::symbolic(name).constants()?;
    let rel = check_derived_relations(&k);
    let constants = json!({
        "p1": k.p1.to_string(),
        "p2": k.p2.to_string(),
        "q1": k.q1.to_string(),
        "q2": k.q2.to_string(),
        "r1": k.r1.to_string(),
        "r2": k.r2.to_string(),
    });
    let mut inputs = BTreeMap::new();
    inputs.insert("case".into(), args.case.clone());
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "relations",
        inputs,
        results: vec![
            CheckResult::new(
                "r2_equals_p1_q2_plus_p2_minus_q2",
                rel.r2_relation,
                constants.clone(),
            ),
            CheckResult::new("q1_pure_imaginary", rel.q1_imaginary, constants.clone()),
            CheckResult::new(
                "im_p2_matches_q0_times_re_p1_relation",
                rel.p2_imaginary_part,
                constants,
            ),
        ],
        elapsed_ms: 0,
    })
}

// ---------------------------------------------------------------------------
// realify / classify-lie

/// The coframe change behind the family's displayed bracket table, as a
/// function of the bound parameters. Families without a displayed change
/// realify in their own coframe.
fn paper_basis(id: &FamilyId) -> Result<Option<[[Scalar; 2]; 2]>> {
    let model = id.model()?;
    let table = model.table();
    let half = GaussianRational::from_ratio(1, 2);
    let c = |g: GaussianRational| Scalar::constant(table, g);
    let zero = || Scalar::zero(table);
    let one = || Scalar::constant(table, GaussianRational::one());
    let (a, b) = match &id.binding {
        Binding::Rational { a, b } => (a.clone(), b.clone()),
        _ => return Ok(None),
    };
    Ok(match id.name {
        // θ₁ = −ω₁, θ₂ = ω₁ − ½ω₂.
        FamilyName::C1 => Some([
            [c(GaussianRational::one().neg()), zero()],
            [one(), c(half.neg())],
        ]),
        // θ₁ = ω₁, θ₂ = ω₂ + ω₁/(−½ + 3ia).
        FamilyName::C2 => {
            let denom = GaussianRational::new(
                -BigRational::new(1.into(), 2.into()),
                a * BigRational::from_integer(3.into()),
            );
            Some([[one(), zero()], [c(denom.inv()), one()]])
        }
        // θ₁ = ω₁ + (−½ + ib)ω₂, θ₂ = ω₁.
        FamilyName::C3 => Some([
            [one(), c(GaussianRational::new(-BigRational::new(1.into(), 2.into()), b))],
            [one(), zero()],
        ]),
        _ => None,
    })
}

fn bracket_strings(l: &RealLieAlgebra) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let v = l.bracket_basis(i, j);
            if v.iter().all(Zero::is_zero) {
                continue;
            }
            let mut rhs = String::new();
            for (k, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !rhs.is_empty() {
                    rhs.push_str(" + ");
                }
                if c.is_one() {
                    let _ = write!(rhs, "e{}", k + 1);
                } else {
                    let _ = write!(rhs, "({})*e{}", c, k + 1);
                }
            }
            out.push(format!("[e{}, e{}] = {}", i + 1, j + 1, rhs));
        }
    }
    out
}

fn realified(id: &FamilyId, basis: BasisChoice) -> Result<(Value, RealLieAlgebra)> {
    let model = id.model()?;
    let pre = match basis {
        BasisChoice::Identity => None,
        BasisChoice::Paper => paper_basis(id)?,
    };
    let (coframe, l) = realify(&model, pre.as_ref())?;
    let d_thetas: Vec<Value> = (0..4)
        .map(|k| {
            json!({
                "form": REAL_COFRAME_NAMES[k],
                "d": coframe.d_theta(k).to_string(),
            })
        })
        .collect();
    let payload = json!({
        "basis": match basis {
            BasisChoice::Identity => "identity",
            BasisChoice::Paper => {
                if pre.is_some() { "paper" } else { "paper (no displayed change; identity used)" }
            }
        },
        "d_theta": d_thetas,
        "brackets": bracket_strings(&l),
    });
    Ok((payload, l))
}

fn cmd_realify(args: &RealifyArgs) -> Result<Report> {
    let id = bound_family_id(&args.case, &args.binding, false)?;
    let (payload, l) = realified(&id, args.basis)?;
    let jacobi = l.jacobi_is_satisfied();
    let mut inputs = BTreeMap::new();
    inputs.insert("case".into(), args.case.clone());
    inputs.insert(
        "basis".into(),
        match args.basis {
            BasisChoice::Paper => "paper".into(),
            BasisChoice::Identity => "identity".into(),
        },
    );
    echo_binding(&mut inputs, &args.binding);
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "realify",
        inputs,
        results: vec![
            CheckResult::new("real_coframe", true, payload),
            CheckResult::new(
                "jacobi_identity",
                jacobi,
                json!({ "unimodular": l.is_unimodular() }),
            ),
        ],
        elapsed_ms: 0,
    })
}

fn cmd_classify_lie(args: &ClassifyLieArgs) -> Result<Report> {
    let id = bound_family_id(&args.case, &args.binding, false)?;
    let (_, l) = realified(&id, BasisChoice::Identity)?;
    let jacobi = l.jacobi_is_satisfied();
    let mut results = vec![CheckResult::new(
        "jacobi_identity",
        jacobi,
        json!({}),
    )];
    if jacobi {
        let fp = l.invariants()?;
        let class = identify(&l)?;
        results.push(CheckResult::new(
            "identified",
            true,
            json!({
                "class": class.name(),
                "has_cocompact_lattice": class.has_cocompact_lattice(),
                "fingerprint": {
                    "derived_series_dims": fp.derived_series_dims,
                    "dim_center": fp.dim_center,
                    "radical_dim": fp.radical_dim,
                    "nilradical_dim": fp.nilradical_dim,
                    "killing_rank": fp.killing_rank,
                    "killing_signature": [fp.killing_signature.0, fp.killing_signature.1],
                    "unimodular": fp.unimodular,
                },
            }),
        ));
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("case".into(), args.case.clone());
    echo_binding(&mut inputs, &args.binding);
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "classify-lie",
        inputs,
        results,
        elapsed_ms: 0,
    })
}

// ---------------------------------------------------------------------------
// obstruction

fn parse_witness(src: &str) -> Result<[Generator; 3]> {
    let parts: Vec<&str> = src.split('^').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Usage(format!(
            "--witness expects three generators joined by `^`, e.g. \
             w1^w2^w2bar; got `{src}`"
        )));
    }
    let gens = [
        Generator::from_name(parts[0])?,
        Generator::from_name(parts[1])?,
        Generator::from_name(parts[2])?,
    ];
    if gens[0] == gens[1] || gens[0] == gens[2] || gens[1] == gens[2] {
        return Err(Error::Usage(
            "witness generators must be distinct (a repeated factor wedges \
             to zero)"
                .into(),
        ));
    }
    Ok(gens)
}

fn obstruction_result(model: &CoframeModel, report: &ObstructionReport) -> CheckResult {
    let verified = report.verify(model);
    let monomial = report
        .witness
        .terms()
        .find(|(_, c)| !c.is_zero())
        .map(|(mask, _)| mask_name(mask))
        .unwrap_or_else(|| "zero".to_string());
    CheckResult::new(
        format!("stokes_factor_{monomial}"),
        verified,
        json!({
            "witness": report.witness.to_string(),
            "factor": report.factor.to_string(),
            "vanishing_locus": report.vanishing_locus_note,
        }),
    )
}

fn cmd_obstruction(args: &ObstructionArgs) -> Result<Report> {
    let id = bound_family_id(&args.case, &args.binding, true)?;
    let model = id.model()?;
    let mut results = Vec::new();
    if let Some(w) = &args.witness {
        let gens = parse_witness(w)?;
        let report = ObstructionReport::new(&model, &gens, "user-supplied witness")?;
        results.push(obstruction_result(&model, &report));
    } else {
        let reports = standard_obstructions(id.name, &model)?;
        if reports.is_empty() {
            results.push(CheckResult::new(
                "no_standard_exactness_witness",
                true,
                json!({
                    "note": "every invariant 3-form of this family is \
                             closed; there is no Stokes obstruction",
                }),
            ));
        }
        for report in &reports {
            results.push(obstruction_result(&model, report));
        }
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("case".into(), args.case.clone());
    if let Some(w) = &args.witness {
        inputs.insert("witness".into(), w.clone());
    }
    echo_binding(&mut inputs, &args.binding);
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "obstruction",
        inputs,
        results,
        elapsed_ms: 0,
    })
}

// ---------------------------------------------------------------------------
// lattice-search

fn window(
    single: Option<i64>,
    lo: Option<i64>,
    hi: Option<i64>,
    flag: &str,
) -> Result<(i64, i64)> {
    match (single, lo, hi) {
        (Some(v), None, None) => Ok((v, v)),
        (None, Some(l), Some(h)) if l <= h => Ok((l, h)),
        (None, Some(_), Some(_)) => Err(Error::Usage(format!(
            "--{flag}-min exceeds --{flag}-max"
        ))),
        _ => Err(Error::Usage(format!(
            "specify --{flag} VALUE or both --{flag}-min and --{flag}-max"
        ))),
    }
}

fn cmd_lattice_search(args: &LatticeSearchArgs) -> Result<Report> {
    let (m_lo, m_hi) = window(args.m, args.m_min, args.m_max, "m")?;
    let (n_lo, n_hi) = window(args.n, args.n_min, args.n_max, "n")?;
    let certs = lattice_search(m_lo..=m_hi, n_lo..=n_hi, args.k, args.precision)?;
    let all_verify = certs.iter().all(verify_certificate);

    // Explain skipped pairs when the window is small enough to enumerate.
    let pairs = (m_hi - m_lo + 1).saturating_mul(n_hi - n_lo + 1);
    let mut rejected = Vec::new();
    if pairs <= 64 {
        for m in m_lo..=m_hi {
            for n in n_lo..=n_hi {
                if certs.iter().any(|c| c.m == m && c.n == n) {
                    continue;
                }
                let reason = if m == n {
                    "x = 1 is a root, so the eigenvalue pair has |lambda| = 1"
                } else {
                    "non-negative discriminant: no complex eigenvalue pair"
                };
                debug_assert!(m == n || !cubic_discriminant(m, n).is_negative());
                rejected.push(json!({ "m": m, "n": n, "reason": reason }));
            }
        }
    }

    let mut inputs = BTreeMap::new();
    inputs.insert("m".into(), format!("{m_lo}..={m_hi}"));
    inputs.insert("n".into(), format!("{n_lo}..={n_hi}"));
    inputs.insert("k".into(), args.k.to_string());
    inputs.insert("precision".into(), args.precision.to_string());
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "lattice-search",
        inputs,
        results: vec![CheckResult::new(
            "certificates_verify",
            all_verify,
            json!({
                "count": certs.len(),
                "certificates": certs,
                "rejected": rejected,
            }),
        )],
        elapsed_ms: 0,
    })
}

// ---------------------------------------------------------------------------
// coords-check

fn cmd_coords_check(args: &CoordsCheckArgs) -> Result<Report> {
    let text = std::fs::read_to_string(&args.chart)?;
    let mut spec: ChartSpec = chart_spec_from_json(&text)?;
    if let Some(case) = &args.case {
        let requested = family(case)?;
        let declared = family(&spec.family)?;
        if requested != declared {
            return Err(Error::Usage(format!(
                "chart file targets {} but --case asked for {}",
                declared.name(),
                requested.name()
            )));
        }
    }
    if args.symbolic {
        spec.binding = BindingSpec::Symbolic;
    } else if let (Some(a), Some(b)) = (&args.a, &args.b) {
        parse_rational("a", a)?;
        parse_rational("b", b)?;
        spec.binding = BindingSpec::Rational {
            a: a.clone(),
            b: b.clone(),
        };
    }
    let reports = verify_chart_spec(&spec)?;
    let results = reports
        .iter()
        .map(|r| {
            CheckResult::new(
                format!("structure_equation_{}", r.equation),
                r.is_zero(),
                json!({
                    "components": r
                        .components
                        .iter()
                        .map(|c| {
                            json!({
                                "pair": c.pair,
                                "residue": c.residue,
                                "verdict": c.verdict,
                            })
                        })
                        .collect::<Vec<_>>(),
                }),
            )
        })
        .collect();
    let mut inputs = BTreeMap::new();
    inputs.insert("chart".into(), args.chart.clone());
    if let Some(case) = &args.case {
        inputs.insert("case".into(), case.clone());
    }
    if args.symbolic {
        inputs.insert("symbolic".into(), "true".into());
    }
    if let Some(a) = &args.a {
        inputs.insert("a".into(), a.clone());
    }
    if let Some(b) = &args.b {
        inputs.insert("b".into(), b.clone());
    }
    Ok(Report {
        version: env!("CARGO_PKG_VERSION"),
        command: "coords-check",
        inputs,
        results,
        elapsed_ms: 0,
    })
}
