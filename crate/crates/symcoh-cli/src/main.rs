//! Command-line front end for the symcoh library.
//!
//! Every subcommand accepts `--json`; exit code 0 means success, 1 means a
//! usage or domain error, and 2 flags a mathematically undecided outcome so
//! scripts can tell it apart from failure. Output is deterministic: equal
//! invocations produce byte-identical output.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use symcoh::f4inv::{
    genus_compare_qx, good_reduction_witness, invariants_from_albert, invariants_from_torus,
    split_and_isotropy_q, unramified_at, AlbertData, F4Invariants, TorusData,
};
use symcoh::poly::{parse_poly, parse_rational, RatFun};
use symcoh::qform::{
    diagonalize_q, diagonalize_qx, equivalent_q, invariants_qp, parse_form, pfister_hyperbolic_q,
    pfister_q, spin_good_reduction, springer_residues_scaled, Scaling,
};
use symcoh::rootsys::{
    build_root_system, fundamental_group, intermediate_lattice_basis, parse_type, weyl_order,
    RootSystem, TypeLabel,
};
use symcoh::symcalc::{
    class_equal_qx_places, class_is_trivial, class_is_trivial_qx, find_quaternion_rep,
    parse_place, quat_iso, quat_product_class, square_class_from_str, tame_residue, FieldDesc,
    Place, QuatAlg, SquareClass, SymbolSum, Trilean,
};
use symcoh::weylcoh::{
    h1_enumeration_oracle, h1_formula, h1_presentation_oracle, lattice_from_spec, LatticeSpec,
    WeylCohError, DEFAULT_ENUMERATION_BOUND,
};

#[derive(Parser)]
#[command(
    name = "symcoh",
    about = "Weyl-group cohomology, mod-2 symbol calculus, and cohomological invariants",
    version
)]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized recipes (h1-oracle --random).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// H1 of the Weyl group on a lattice between Q(Phi) and P(Phi).
    H1 {
        /// Irreducible type, e.g. A3, F4.
        #[arg(long = "type")]
        ty: String,
        /// Lattice: "root", "weight", or "gen:[[..],..]" (weight coordinates).
        #[arg(long, default_value = "weight")]
        lattice: String,
    },
    /// Table of H1 on root and weight lattices for all types up to a rank.
    H1Table {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
    /// Cross-check the H1 formula against independent oracles.
    H1Oracle {
        /// Irreducible type, e.g. A3, F4.
        #[arg(long = "type", conflicts_with = "random")]
        ty: Option<String>,
        /// Lattice: "root", "weight", or "gen:[[..],..]".
        #[arg(long, default_value = "root")]
        lattice: String,
        /// Weyl-order bound for the enumeration oracle.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BOUND)]
        bound: u64,
        /// Check this many random (type, lattice) pairs of rank <= 4 instead.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Quaternion algebras over Q: ramification, Brauer products, isomorphism.
    Quat {
        #[command(subcommand)]
        action: QuatCmd,
    },
    /// Tame residue of a symbol sum at a place, with a triviality verdict.
    SymbolResidue {
        /// Terms separated by ';', entries by ',': "x,-1,-1;2,3,5".
        #[arg(allow_hyphen_values = true)]
        symbol: String,
        /// Place: "p=7" over Q, "p(x)=x" or "p(x)=x^2+1" over Q(x).
        #[arg(long)]
        at: String,
    },
    /// Decide equality of two symbol classes (over Q(x) via residues plus
    /// specialization; over Q by the sign rule).
    SymbolEqual {
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
        /// Field: Q or Qx (default: inferred from the entries).
        #[arg(long)]
        field: Option<String>,
    },
    /// Quadratic-form arithmetic: diagonalization, invariants, equivalence,
    /// Springer residues, Pfister forms.
    #[command(name = "qform")]
    QForm {
        #[command(subcommand)]
        action: QFormCmd,
    },
    /// Good reduction of the spin group of a diagonal form at a place.
    SpinGoodred {
        /// Diagonal entries, comma-separated: "1,1,1,2,x".
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        /// Place: "p=7" over Q, "p(x)=x" over Q(x).
        #[arg(long)]
        at: String,
    },
    /// The f3/f5 invariants of F4 groups within the g3 = 0 stratum.
    F4 {
        #[command(subcommand)]
        action: F4Cmd,
    },
    /// Compare two invariant pairs over Q(x) through residue profiles and
    /// specialization.
    GenusCompare {
        /// First pair: "albert:a,b,c,d,e" or "torus:a;c1,c2,c3,c4".
        #[arg(long, allow_hyphen_values = true)]
        inv1: String,
        /// Second pair, same grammar.
        #[arg(long, allow_hyphen_values = true)]
        inv2: String,
    },
}

#[derive(Subcommand)]
enum QuatCmd {
    /// Ramification places of the quaternion algebra (a, b).
    Ram {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Brauer product of (a1, b1) and (a2, b2): ramification and a
    /// representing pair.
    Product {
        #[arg(allow_hyphen_values = true)]
        a1: String,
        #[arg(allow_hyphen_values = true)]
        b1: String,
        #[arg(allow_hyphen_values = true)]
        a2: String,
        #[arg(allow_hyphen_values = true)]
        b2: String,
    },
    /// Whether (a1, b1) and (a2, b2) are isomorphic over Q.
    Iso {
        #[arg(allow_hyphen_values = true)]
        a1: String,
        #[arg(allow_hyphen_values = true)]
        b1: String,
        #[arg(allow_hyphen_values = true)]
        a2: String,
        #[arg(allow_hyphen_values = true)]
        b2: String,
    },
    /// A pair (a, b) with the prescribed ramification, e.g. "3,7" or "2,inf".
    Find {
        places: String,
    },
}

#[derive(Subcommand)]
enum QFormCmd {
    /// Diagonalize a symmetric Gram matrix (JSON rows; entries are integers,
    /// "n/d" rationals, or polynomials in x).
    Diag {
        #[arg(long, allow_hyphen_values = true)]
        gram: String,
    },
    /// Local invariants (dim, disc, Hasse, signature) of a form over Q.
    Invariants {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        /// Place: "p=7", "p=2", or "inf".
        #[arg(long)]
        at: String,
    },
    /// Equivalence of two forms over Q (Hasse-Minkowski).
    Equal {
        #[arg(long, allow_hyphen_values = true)]
        form1: String,
        #[arg(long, allow_hyphen_values = true)]
        form2: String,
    },
    /// Springer residue forms at a place, optionally after scaling by the
    /// uniformizer.
    Residues {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        #[arg(long)]
        at: String,
        /// Scale the form by pi before taking residues.
        #[arg(long)]
        scale_pi: bool,
    },
    /// The Pfister form <<a1,...,an>> over Q; for n = 3 also whether it is
    /// hyperbolic.
    Pfister {
        #[arg(long, allow_hyphen_values = true)]
        slots: String,
    },
}

#[derive(Args)]
struct F4Input {
    /// Albert slots "a,b,c,d,e".
    #[arg(long, allow_hyphen_values = true, conflicts_with = "torus")]
    albert: Option<String>,
    /// Torus data "a;c1,c2,c3,c4".
    #[arg(long, allow_hyphen_values = true)]
    torus: Option<String>,
    /// Field: Q or Qx (default: inferred from the slots).
    #[arg(long)]
    field: Option<String>,
}

#[derive(Subcommand)]
enum F4Cmd {
    /// The invariants f3 and f5 with triviality verdicts.
    Invariants {
        #[command(flatten)]
        input: F4Input,
    },
    /// Whether f3 and f5 are unramified at a place.
    Unramified {
        #[command(flatten)]
        input: F4Input,
        #[arg(long)]
        at: String,
    },
    /// Good-reduction witness for torus data at a place.
    Goodred {
        /// Torus data "a;c1,c2,c3,c4".
        #[arg(long, allow_hyphen_values = true)]
        torus: String,
        #[arg(long)]
        at: String,
    },
    /// Splitness and isotropy over Q.
    Split {
        #[command(flatten)]
        input: F4Input,
    },
}

struct Outcome {
    text: String,
    json: Value,
    undecided: bool,
}

impl Outcome {
    fn decided(text: String, json: Value) -> Self {
        Outcome { text, json, undecided: false }
    }
}

fn main() -> ExitCode {
    // A lone "--" only separates positionals from flags; drop it so the
    // trailing --json in invocations like `quat ram -- -1 21 --json` still
    // parses as a flag.
    let argv: Vec<OsString> = std::env::args_os().filter(|a| a != "--").collect();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.json);
            } else {
                println!("{}", out.text);
            }
            if out.undecided {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::H1 { ty, lattice } => cmd_h1(ty, lattice),
        Cmd::H1Table { max_rank } => cmd_h1_table(*max_rank),
        Cmd::H1Oracle { ty, lattice, bound, random } => {
            cmd_h1_oracle(ty.as_deref(), lattice, *bound, *random, cli.seed)
        }
        Cmd::Quat { action } => cmd_quat(action),
        Cmd::SymbolResidue { symbol, at } => cmd_symbol_residue(symbol, at),
        Cmd::SymbolEqual { first, second, field } => {
            cmd_symbol_equal(first, second, field.as_deref())
        }
        Cmd::QForm { action } => cmd_qform(action),
        Cmd::SpinGoodred { form, at } => cmd_spin_goodred(form, at),
        Cmd::F4 { action } => cmd_f4(action),
        Cmd::GenusCompare { inv1, inv2 } => cmd_genus_compare(inv1, inv2),
    }
}

// ---------------------------------------------------------------------------
// Input grammars
// ---------------------------------------------------------------------------

fn parse_field(s: &str) -> Result<FieldDesc> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("q") {
        return Ok(FieldDesc::RatQ);
    }
    if t.eq_ignore_ascii_case("qx") || t.eq_ignore_ascii_case("q(x)") {
        return Ok(FieldDesc::RatFunQ);
    }
    if let Some(p) = t.strip_prefix(['F', 'f']) {
        if let Ok(p) = p.parse::<u64>() {
            return Ok(FieldDesc::finite_prime(p)?);
        }
    }
    if let Some(body) = t.strip_prefix("Q[x]/(").and_then(|b| b.strip_suffix(')')) {
        return Ok(FieldDesc::number_field(&parse_poly(body)?)?);
    }
    bail!("unrecognized field {s:?} (expected Q, Qx, F<p>, or Q[x]/(m))")
}

fn infer_field(spec: Option<&str>, sample: &str) -> Result<FieldDesc> {
    match spec {
        Some(s) => parse_field(s),
        None => Ok(if sample.contains(['x', 'X']) {
            FieldDesc::RatFunQ
        } else {
            FieldDesc::RatQ
        }),
    }
}

/// Symbol sums: terms separated by ';', entries within a term by ','.
fn parse_symbol(field: &FieldDesc, s: &str) -> Result<SymbolSum> {
    let mut terms: Vec<Vec<SquareClass>> = Vec::new();
    for term in s.split(';') {
        let term = term.trim();
        if term.is_empty() {
            continue;
        }
        let entries = term
            .split(',')
            .map(|e| square_class_from_str(field, e.trim()))
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("in term {term:?}"))?;
        terms.push(entries);
    }
    if terms.is_empty() {
        bail!("empty symbol sum; give at least one term like \"x,-1,-1\"");
    }
    let degree = terms[0].len();
    if terms.iter().any(|t| t.len() != degree) {
        bail!("all terms must have the same number of entries");
    }
    Ok(SymbolSum::from_terms(field.clone(), degree, terms))
}

fn parse_rat(s: &str) -> Result<BigRational> {
    Ok(parse_rational(s.trim())?)
}

fn parse_place_list(s: &str) -> Result<BTreeSet<Place>> {
    let mut out = BTreeSet::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let place = if part.eq_ignore_ascii_case("inf") {
            Place::Infinity
        } else {
            parse_place(&format!("p={part}"))?
        };
        out.insert(place);
    }
    Ok(out)
}

/// "albert:a,b,c,d,e" or "torus:a;c1,c2,c3,c4" into an invariant pair.
fn parse_invariants(field: &FieldDesc, s: &str) -> Result<F4Invariants> {
    let t = s.trim();
    if let Some(body) = t.strip_prefix("albert:") {
        let data = parse_albert(field, body)?;
        return Ok(invariants_from_albert(&data));
    }
    if let Some(body) = t.strip_prefix("torus:") {
        let data = parse_torus(field, body)?;
        return Ok(invariants_from_torus(&data));
    }
    bail!("expected \"albert:a,b,c,d,e\" or \"torus:a;c1,c2,c3,c4\", got {s:?}")
}

fn parse_albert(field: &FieldDesc, body: &str) -> Result<AlbertData> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    let [a, b, c, d, e] = parts[..] else {
        bail!("Albert data needs five slots \"a,b,c,d,e\", got {body:?}");
    };
    Ok(AlbertData::parse(field, [a, b, c, d, e])?)
}

fn parse_torus(field: &FieldDesc, body: &str) -> Result<TorusData> {
    let Some((a, cs)) = body.split_once(';') else {
        bail!("torus data needs the shape \"a;c1,c2,c3,c4\", got {body:?}");
    };
    let parts: Vec<&str> = cs.split(',').map(str::trim).collect();
    let [c1, c2, c3, c4] = parts[..] else {
        bail!("torus data needs four constants after ';', got {cs:?}");
    };
    Ok(TorusData::parse(field, a.trim(), [c1, c2, c3, c4])?)
}

fn f4_input(input: &F4Input) -> Result<F4Invariants> {
    match (&input.albert, &input.torus) {
        (Some(a), None) => {
            let field = infer_field(input.field.as_deref(), a)?;
            Ok(invariants_from_albert(&parse_albert(&field, a)?))
        }
        (None, Some(t)) => {
            let field = infer_field(input.field.as_deref(), t)?;
            Ok(invariants_from_torus(&parse_torus(&field, t)?))
        }
        _ => bail!("give exactly one of --albert or --torus"),
    }
}

/// Field of the residue computation, forced by the kind of place.
fn field_of_place(place: &Place) -> Result<FieldDesc> {
    match place {
        Place::Finite(_) => Ok(FieldDesc::RatQ),
        Place::Irreducible(_) => Ok(FieldDesc::RatFunQ),
        Place::Infinity => bail!("residues live at finite places, not at inf"),
    }
}

// ---------------------------------------------------------------------------
// Rendering helpers
// ---------------------------------------------------------------------------

fn place_json(p: &Place) -> Value {
    match p {
        Place::Finite(q) => json!(q),
        Place::Infinity => json!("inf"),
        Place::Irreducible(pi) => json!(pi.to_string()),
    }
}

fn places_json(ps: &BTreeSet<Place>) -> Value {
    Value::Array(ps.iter().map(place_json).collect())
}

fn places_text(ps: &BTreeSet<Place>) -> String {
    let inner: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", inner.join(", "))
}

fn group_json(g: &symcoh::rootsys::FinAbGroup) -> Value {
    json!(g.invariant_factors())
}

fn int_json(n: &BigInt) -> Result<Value> {
    let v = i128::try_from(n).map_err(|_| anyhow!("value exceeds i128"))?;
    Ok(json!(v))
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_h1(ty: &str, lattice: &str) -> Result<Outcome> {
    let rs = parse_type(ty)?;
    let spec: LatticeSpec = lattice.parse()?;
    let m = lattice_from_spec(&rs, &spec)?;
    let g = h1_formula(&m);
    Ok(Outcome::decided(
        format!("H1(W({}), {}) = {}", rs.label(), spec, g),
        serde_json::to_value(&g)?,
    ))
}

fn all_types_rank_le(max: usize) -> Vec<RootSystem> {
    let mut out = Vec::new();
    for n in 1..=max {
        out.push(build_root_system(TypeLabel::A, n).unwrap());
    }
    for n in 2..=max {
        out.push(build_root_system(TypeLabel::B, n).unwrap());
        out.push(build_root_system(TypeLabel::C, n).unwrap());
    }
    for n in 4..=max {
        out.push(build_root_system(TypeLabel::D, n).unwrap());
    }
    if max >= 6 {
        for n in 6..=max.min(8) {
            out.push(build_root_system(TypeLabel::E, n).unwrap());
        }
    }
    if max >= 4 {
        out.push(build_root_system(TypeLabel::F, 4).unwrap());
    }
    if max >= 2 {
        out.push(build_root_system(TypeLabel::G, 2).unwrap());
    }
    out
}

fn cmd_h1_table(max_rank: usize) -> Result<Outcome> {
    if max_rank < 1 {
        bail!("--max-rank must be at least 1");
    }
    if max_rank > 12 {
        bail!("--max-rank capped at 12 to keep the table exact and fast");
    }
    let mut text = format!("{:<6} {:<12} {:<12} {}", "type", "P/Q", "H1(root)", "H1(weight)");
    let mut rows = Vec::new();
    for r in all_types_rank_le(max_rank) {
        let root = h1_formula(&lattice_from_spec(&r, &LatticeSpec::Root)?);
        let weight = h1_formula(&lattice_from_spec(&r, &LatticeSpec::Weight)?);
        let fg = fundamental_group(&r);
        text.push_str(&format!(
            "\n{:<6} {:<12} {:<12} {}",
            r.label(),
            fg.to_string(),
            root.to_string(),
            weight
        ));
        rows.push(json!({
            "type": r.label(),
            "fundamental_group": group_json(&fg),
            "h1_root": group_json(&root),
            "h1_weight": group_json(&weight),
        }));
    }
    Ok(Outcome::decided(text, json!({"max_rank": max_rank, "rows": rows})))
}

fn cmd_h1_oracle(
    ty: Option<&str>,
    lattice: &str,
    bound: u64,
    random: Option<usize>,
    seed: u64,
) -> Result<Outcome> {
    if let Some(count) = random {
        return h1_oracle_random(count, bound, seed);
    }
    let ty = ty.ok_or_else(|| anyhow!("give --type, or --random N for sampled checks"))?;
    let rs = parse_type(ty)?;
    let spec: LatticeSpec = lattice.parse()?;
    let m = lattice_from_spec(&rs, &spec)?;
    let formula = h1_formula(&m);
    let presentation = h1_presentation_oracle(&m);
    let enumeration = match h1_enumeration_oracle(&m, bound) {
        Ok(g) => Some(g),
        Err(WeylCohError::GroupTooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let agree = presentation == formula && enumeration.as_ref().map_or(true, |g| *g == formula);
    let mut text = format!("formula: {formula}\npresentation: {presentation}");
    match &enumeration {
        Some(g) => text.push_str(&format!("\nenumeration: {g}")),
        None => text.push_str(&format!(
            "\nenumeration: skipped (|W| = {} above bound {bound})",
            weyl_order(&rs)
        )),
    }
    text.push_str(&format!("\nagree: {agree}"));
    Ok(Outcome::decided(
        text,
        json!({
            "type": rs.label(),
            "lattice": spec.to_string(),
            "formula": group_json(&formula),
            "presentation": group_json(&presentation),
            "enumeration": enumeration.as_ref().map(group_json),
            "agree": agree,
        }),
    ))
}

fn h1_oracle_random(count: usize, bound: u64, seed: u64) -> Result<Outcome> {
    if count == 0 || count > 10_000 {
        bail!("--random takes a count between 1 and 10000");
    }
    let pool = all_types_rank_le(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches: Vec<String> = Vec::new();
    for _ in 0..count {
        let r = &pool[rng.gen_range(0..pool.len())];
        let mut specs = vec![LatticeSpec::Root, LatticeSpec::Weight];
        if let Some(b) = intermediate_lattice_basis(r) {
            specs.push(LatticeSpec::Generators(b));
        }
        let spec = specs[rng.gen_range(0..specs.len())].clone();
        let m = lattice_from_spec(r, &spec)?;
        let formula = h1_formula(&m);
        if h1_presentation_oracle(&m) != formula {
            mismatches.push(format!("presentation at {} {}", r.label(), spec));
        }
        if weyl_order(r) <= bound && h1_enumeration_oracle(&m, bound)? != formula {
            mismatches.push(format!("enumeration at {} {}", r.label(), spec));
        }
    }
    let agree = mismatches.is_empty();
    let text = if agree {
        format!("checked {count} random (type, lattice) pairs with seed {seed}: all oracles agree")
    } else {
        format!(
            "checked {count} random (type, lattice) pairs with seed {seed}: DISAGREEMENTS\n{}",
            mismatches.join("\n")
        )
    };
    Ok(Outcome::decided(
        text,
        json!({"cases": count, "seed": seed, "agree": agree, "mismatches": mismatches}),
    ))
}

fn cmd_quat(action: &QuatCmd) -> Result<Outcome> {
    match action {
        QuatCmd::Ram { a, b } => {
            let d = QuatAlg::new(&parse_rat(a)?, &parse_rat(b)?)?;
            Ok(Outcome::decided(
                places_text(d.ram()),
                json!({"places": places_json(d.ram())}),
            ))
        }
        QuatCmd::Product { a1, b1, a2, b2 } => {
            let d1 = QuatAlg::new(&parse_rat(a1)?, &parse_rat(b1)?)?;
            let d2 = QuatAlg::new(&parse_rat(a2)?, &parse_rat(b2)?)?;
            let prod = quat_product_class(&d1, &d2);
            let (a, b) = find_quaternion_rep(&prod)?;
            Ok(Outcome::decided(
                format!("places: {}\nrepresentative: ({a}, {b})", places_text(&prod)),
                json!({
                    "places": places_json(&prod),
                    "a": int_json(&a)?,
                    "b": int_json(&b)?,
                }),
            ))
        }
        QuatCmd::Iso { a1, b1, a2, b2 } => {
            let d1 = QuatAlg::new(&parse_rat(a1)?, &parse_rat(b1)?)?;
            let d2 = QuatAlg::new(&parse_rat(a2)?, &parse_rat(b2)?)?;
            let iso = quat_iso(&d1, &d2);
            Ok(Outcome::decided(
                format!("isomorphic: {iso}"),
                json!({"isomorphic": iso}),
            ))
        }
        QuatCmd::Find { places } => {
            let set = parse_place_list(places)?;
            let (a, b) = find_quaternion_rep(&set)?;
            Ok(Outcome::decided(
                format!("(a, b) = ({a}, {b})"),
                json!({"a": int_json(&a)?, "b": int_json(&b)?}),
            ))
        }
    }
}

fn cmd_symbol_residue(symbol: &str, at: &str) -> Result<Outcome> {
    let place = parse_place(at)?;
    let field = field_of_place(&place)?;
    let sum = parse_symbol(&field, symbol)?;
    let residue = tame_residue(&place, &sum)?;
    let verdict = class_is_trivial(&residue);
    Ok(Outcome {
        text: format!("residue: {residue}\ntrivial: {verdict}"),
        json: json!({"residue": residue.to_json(), "trivial": verdict.to_string()}),
        undecided: verdict == Trilean::Undecided,
    })
}

fn cmd_symbol_equal(first: &str, second: &str, field: Option<&str>) -> Result<Outcome> {
    let sample = format!("{first} {second}");
    let field = infer_field(field, &sample)?;
    let s1 = parse_symbol(&field, first)?;
    let s2 = parse_symbol(&field, second)?;
    match field {
        FieldDesc::RatFunQ => {
            let (verdict, undecided_places) = class_equal_qx_places(&s1, &s2)?;
            let mut text = format!("equal: {verdict}");
            if !undecided_places.is_empty() {
                let names: Vec<String> =
                    undecided_places.iter().map(|p| p.to_string()).collect();
                text.push_str(&format!("\nundecided at: {}", names.join(", ")));
            }
            Ok(Outcome {
                text,
                json: json!({
                    "equal": verdict.to_string(),
                    "undecided_at": undecided_places
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>(),
                }),
                undecided: verdict == Trilean::Undecided,
            })
        }
        _ => {
            if s1.degree() != s2.degree() {
                bail!("cannot compare sums of degree {} and {}", s1.degree(), s2.degree());
            }
            let verdict = class_is_trivial(&s1.add(&s2));
            Ok(Outcome {
                text: format!("equal: {verdict}"),
                json: json!({"equal": verdict.to_string(), "undecided_at": []}),
                undecided: verdict == Trilean::Undecided,
            })
        }
    }
}

fn parse_gram_q(rows: &[Vec<Value>]) -> Result<Vec<Vec<BigRational>>> {
    rows.iter()
        .map(|row| row.iter().map(cell_to_rational).collect())
        .collect()
}

fn cell_to_string(cell: &Value) -> Result<String> {
    match cell {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        other => bail!("matrix entries must be numbers or strings, got {other}"),
    }
}

fn cell_to_rational(cell: &Value) -> Result<BigRational> {
    let s = cell_to_string(cell)?;
    if s.contains('.') {
        bail!("entry {s:?} is not exact; use integers or \"n/d\" fractions");
    }
    parse_rat(&s)
}

fn cell_to_ratfun(cell: &Value) -> Result<RatFun> {
    let s = cell_to_string(cell)?;
    match s.split_once('/') {
        Some((num, den)) => Ok(RatFun::new(parse_poly(num.trim())?, parse_poly(den.trim())?)),
        None => Ok(RatFun::from_poly(parse_poly(s.trim())?)),
    }
}

fn cmd_qform(action: &QFormCmd) -> Result<Outcome> {
    match action {
        QFormCmd::Diag { gram } => {
            let rows: Vec<Vec<Value>> =
                serde_json::from_str(gram).context("expected JSON rows like [[0,1],[1,0]]")?;
            let over_qx = rows
                .iter()
                .flatten()
                .any(|c| matches!(c, Value::String(s) if s.contains(['x', 'X'])));
            let form = if over_qx {
                let cells: Vec<Vec<RatFun>> = rows
                    .iter()
                    .map(|row| row.iter().map(cell_to_ratfun).collect())
                    .collect::<Result<_>>()?;
                diagonalize_qx(&cells)?.0
            } else {
                diagonalize_q(&parse_gram_q(&rows)?)?.0
            };
            Ok(Outcome::decided(
                format!(
                    "diagonal: {}\nclasses: {}",
                    form.raw_strings().join(", "),
                    form.class_strings().join(", ")
                ),
                form.to_json(),
            ))
        }
        QFormCmd::Invariants { form, at } => {
            let q = parse_form(&FieldDesc::RatQ, form)?;
            let place = parse_place(at)?;
            let inv = invariants_qp(&q, &place)?;
            let mut text = format!("dim: {}\ndisc: {}\nhasse: {}", inv.dim, inv.disc, inv.hasse);
            if let Some((pos, neg)) = inv.signature {
                text.push_str(&format!("\nsignature: ({pos}, {neg})"));
            }
            Ok(Outcome::decided(text, inv.to_json()))
        }
        QFormCmd::Equal { form1, form2 } => {
            let q1 = parse_form(&FieldDesc::RatQ, form1)?;
            let q2 = parse_form(&FieldDesc::RatQ, form2)?;
            let eq = equivalent_q(&q1, &q2)?;
            Ok(Outcome::decided(
                format!("equivalent: {eq}"),
                json!({"equivalent": eq}),
            ))
        }
        QFormCmd::Residues { form, at, scale_pi } => {
            let place = parse_place(at)?;
            let field = field_of_place(&place)?;
            let q = parse_form(&field, form)?;
            let scaling = if *scale_pi { Scaling::Pi } else { Scaling::One };
            let res = springer_residues_scaled(&q, &place, scaling)?;
            Ok(Outcome::decided(
                format!(
                    "first: <{}>\nsecond: <{}>\nscaling: {}",
                    res.first.raw_strings().join(", "),
                    res.second.raw_strings().join(", "),
                    res.scaling
                ),
                res.to_json(),
            ))
        }
        QFormCmd::Pfister { slots } => {
            let values: Vec<BigRational> =
                slots.split(',').map(parse_rat).collect::<Result<_>>()?;
            let form = pfister_q(&values)?;
            let hyperbolic = if values.len() == 3 {
                Some(pfister_hyperbolic_q(&values[0], &values[1], &values[2])?)
            } else {
                None
            };
            let mut text = format!("form: <{}>", form.raw_strings().join(", "));
            if let Some(h) = hyperbolic {
                text.push_str(&format!("\nhyperbolic: {h}"));
            }
            Ok(Outcome::decided(
                text,
                json!({"form": form.to_json(), "hyperbolic": hyperbolic}),
            ))
        }
    }
}

fn cmd_spin_goodred(form: &str, at: &str) -> Result<Outcome> {
    let place = parse_place(at)?;
    let field = field_of_place(&place)?;
    let q = parse_form(&field, form)?;
    let gr = spin_good_reduction(&q, &place)?;
    let mut text = format!("good_reduction: {}", gr.good);
    if let Some(w) = gr.witness {
        text.push_str(&format!("\nwitness: {w}"));
    }
    Ok(Outcome::decided(text, gr.to_json()))
}

fn cmd_f4(action: &F4Cmd) -> Result<Outcome> {
    match action {
        F4Cmd::Invariants { input } => {
            let inv = f4_input(input)?;
            let verdict = |s: &SymbolSum| -> Result<Trilean> {
                match s.field() {
                    FieldDesc::RatFunQ => Ok(class_is_trivial_qx(s)?.0),
                    _ => Ok(class_is_trivial(s)),
                }
            };
            let t3 = verdict(inv.f3())?;
            let t5 = verdict(inv.f5())?;
            Ok(Outcome {
                text: format!(
                    "f3 = {}\nf5 = {}\nf3 trivial: {t3}\nf5 trivial: {t5}",
                    inv.f3(),
                    inv.f5()
                ),
                json: json!({
                    "f3": inv.f3().to_json(),
                    "f5": inv.f5().to_json(),
                    "f3_trivial": t3.to_string(),
                    "f5_trivial": t5.to_string(),
                }),
                undecided: t3 == Trilean::Undecided || t5 == Trilean::Undecided,
            })
        }
        F4Cmd::Unramified { input, at } => {
            let inv = f4_input(input)?;
            let place = parse_place(at)?;
            let rep = unramified_at(&inv, &place)?;
            Ok(Outcome {
                text: format!("f3: {}\nf5: {}", rep.f3, rep.f5),
                json: rep.to_json(),
                undecided: rep.f3 == Trilean::Undecided || rep.f5 == Trilean::Undecided,
            })
        }
        F4Cmd::Goodred { torus, at } => {
            let field = infer_field(None, torus)?;
            let data = parse_torus(&field, torus)?;
            let place = parse_place(at)?;
            let w = good_reduction_witness(&data, &place)?;
            let text = match (&w.reason, &w.reduced) {
                (None, Some(red)) => format!(
                    "good: true\nreduced: a = {}; c = {}",
                    red.a,
                    red.c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
                ),
                (Some(reason), _) => format!("good: false\nreason: {reason}"),
                _ => "good: true".to_string(),
            };
            Ok(Outcome::decided(text, w.to_json()))
        }
        F4Cmd::Split { input } => {
            let inv = f4_input(input)?;
            let si = split_and_isotropy_q(&inv)?;
            Ok(Outcome::decided(
                format!("split: {}\nisotropic: {}", si.split, si.isotropic),
                si.to_json(),
            ))
        }
    }
}

fn cmd_genus_compare(inv1: &str, inv2: &str) -> Result<Outcome> {
    let field = FieldDesc::RatFunQ;
    let i1 = parse_invariants(&field, inv1)?;
    let i2 = parse_invariants(&field, inv2)?;
    let cmp = genus_compare_qx(&i1, &i2)?;
    Ok(Outcome {
        text: cmp.to_string(),
        json: cmp.to_json(),
        undecided: cmp.f3 == Trilean::Undecided || cmp.f5 == Trilean::Undecided,
    })
}
