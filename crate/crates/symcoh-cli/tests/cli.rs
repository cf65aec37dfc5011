//! End-to-end tests of the symcoh binary: fixed input/output pairs, JSON
//! schemas, exit codes, and byte determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcoh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    serde_json::from_slice(&out.stdout).expect("valid JSON output")
}

fn exit_code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn h1_weight_lattice_examples() {
    assert_eq!(stdout(&["h1", "--type", "F4", "--lattice", "weight", "--json"]), "{\"invariant_factors\":[]}\n");
    assert_eq!(stdout(&["h1", "--type", "C3", "--lattice", "weight", "--json"]), "{\"invariant_factors\":[2]}\n");
    assert_eq!(stdout(&["h1", "--type", "A3", "--lattice", "root", "--json"]), "{\"invariant_factors\":[4]}\n");
    assert_eq!(stdout(&["h1", "--type", "G2", "--lattice", "root"]), "H1(W(G2), root) = 0\n");
}

#[test]
fn h1_table_is_deterministic_and_complete() {
    let a = stdout(&["h1-table", "--max-rank", "8"]);
    let b = stdout(&["h1-table", "--max-rank", "8"]);
    assert_eq!(a, b, "byte-identical reruns");
    assert_eq!(a.lines().count(), 1 + 8 + 7 + 7 + 5 + 3 + 1 + 1, "header plus one row per type");
    for needle in ["A8", "E8", "F4", "G2", "D5"] {
        assert!(a.contains(needle), "table lists {needle}");
    }

    let v = json(&["h1-table", "--max-rank", "8", "--json"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 32);
    for row in rows {
        let ty = row["type"].as_str().unwrap();
        let weight = row["h1_weight"].as_array().unwrap();
        let expect_two = ty == "A1" || ty == "B2" || ty.starts_with('C');
        assert_eq!(!weight.is_empty(), expect_two, "H1(weight) for {ty}");
        assert_eq!(row["h1_root"], row["fundamental_group"], "H1(root) = P/Q for {ty}");
    }
}

#[test]
fn h1_oracle_agrees_end_to_end() {
    for (ty, lattice) in [("A3", "root"), ("B3", "weight"), ("G2", "root"), ("C4", "weight")] {
        let v = json(&["h1-oracle", "--type", ty, "--lattice", lattice, "--json"]);
        assert_eq!(v["agree"], true, "{ty} {lattice}");
        let direct = json(&["h1", "--type", ty, "--lattice", lattice, "--json"]);
        assert_eq!(v["formula"], direct["invariant_factors"], "{ty} {lattice}");
    }
    let v = json(&["h1-oracle", "--random", "12", "--seed", "9", "--json"]);
    assert_eq!(v["agree"], true);
    assert_eq!(v["cases"], 12);
}

#[test]
fn quat_examples() {
    assert_eq!(stdout(&["quat", "ram", "--", "-1", "21", "--json"]), "{\"places\":[3,7]}\n");
    assert_eq!(stdout(&["quat", "ram", "--", "-1", "3"]), "{2, 3}\n");
    assert_eq!(stdout(&["quat", "ram", "--", "-1", "-1", "--json"]), "{\"places\":[2,\"inf\"]}\n");
    assert_eq!(stdout(&["quat", "ram", "1", "7", "--json"]), "{\"places\":[]}\n");

    let v = json(&["quat", "product", "--", "-1", "3", "-1", "7", "--json"]);
    assert_eq!(v["places"], serde_json::json!([3, 7]));
    let (a, b) = (v["a"].as_i64().unwrap(), v["b"].as_i64().unwrap());
    let w = json(&["quat", "ram", &a.to_string(), &b.to_string(), "--json"]);
    assert_eq!(w["places"], serde_json::json!([3, 7]), "representative has the product ramification");

    assert_eq!(stdout(&["quat", "iso", "--", "-1", "3", "3", "-1"]), "isomorphic: true\n");
    assert_eq!(stdout(&["quat", "iso", "--", "-1", "3", "-1", "7"]), "isomorphic: false\n");

    let v = json(&["quat", "find", "2,inf", "--json"]);
    assert_eq!(v, serde_json::json!({"a": -1, "b": -1}));
}

#[test]
fn symbol_residue_and_equality() {
    let out = stdout(&["symbol-residue", "x,-1,-1", "--at", "p(x)=x"]);
    assert!(out.contains("trivial: false"), "{out}");
    let v = json(&["symbol-residue", "x,2,-1", "--at", "p(x)=x", "--json"]);
    assert_eq!(v["trivial"], "true");
    assert_eq!(v["residue"]["terms"].as_array().unwrap().len(), 0);

    assert_eq!(stdout(&["symbol-equal", "x,-1,-1", "x,-2,-1"]), "equal: true\n");
    assert_eq!(exit_code(&["symbol-equal", "x,-1,-1", "1,1,1"]), 0);
    let v = json(&["symbol-equal", "x,-1,-1", "1,1,1", "--json"]);
    assert_eq!(v["equal"], "false");

    // Residues into a degree-2 number field leave the verdict undecided.
    assert_eq!(exit_code(&["symbol-equal", "x^2+1,3,5", "2,3,5"]), 2);
    let v = json(&["symbol-equal", "x^2+1,3,5", "2,3,5", "--json"]);
    assert_eq!(v["equal"], "undecided");
    assert_eq!(v["undecided_at"], serde_json::json!(["x^2 + 1"]));

    // Over Q the sign rule always decides: the all-negative symbols agree
    // with each other and differ from the trivial class.
    assert_eq!(stdout(&["symbol-equal", "-1,-1,-1", "-1,-2,-1"]), "equal: true\n");
    assert_eq!(stdout(&["symbol-equal", "-1,-1,-1", "2,3,5"]), "equal: false\n");
    assert_eq!(stdout(&["symbol-equal", "2,-1,-1", "3,5,7"]), "equal: true\n");
}

#[test]
fn qform_subcommands() {
    let out = stdout(&["qform", "diag", "--gram", "[[0,1],[1,0]]"]);
    assert_eq!(out, "diagonal: 2, -1/2\nclasses: 2, -2\n");

    let v = json(&["qform", "diag", "--gram", "[[\"x\",1],[1,\"x\"]]", "--json"]);
    assert_eq!(v["classes"], serde_json::json!(["(x)", "(x - 1) * (x) * (x + 1)"]));

    let v = json(&["qform", "invariants", "--form", "2,3", "--at", "p=2", "--json"]);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["hasse"], -1);
    let v = json(&["qform", "invariants", "--form", "1,1,-1", "--at", "inf", "--json"]);
    assert_eq!(v["signature"], serde_json::json!([2, 1]));

    assert_eq!(stdout(&["qform", "equal", "--form1", "1,1", "--form2", "2,2"]), "equivalent: true\n");
    assert_eq!(stdout(&["qform", "equal", "--form1", "2,3", "--form2", "1,6"]), "equivalent: false\n");

    let out = stdout(&["qform", "residues", "--form", "1,1,1,2,x", "--at", "p(x)=x"]);
    assert_eq!(out, "first: <1, 1, 1, 2>\nsecond: <1>\nscaling: 1\n");
    let out = stdout(&["qform", "residues", "--form", "1,1,1,2,x", "--at", "p(x)=x", "--scale-pi"]);
    assert!(out.contains("scaling: pi"), "{out}");

    let v = json(&["qform", "pfister", "--slots", "7,11,-13", "--json"]);
    assert_eq!(v["hyperbolic"], true);
    assert_eq!(v["form"]["dim"], 8);
    let v = json(&["qform", "pfister", "--slots", "-1,-1,-1", "--json"]);
    assert_eq!(v["hyperbolic"], false);
}

#[test]
fn spin_goodred_examples() {
    assert_eq!(stdout(&["spin-goodred", "--form", "1,1,1,2,x", "--at", "p(x)=x"]), "good_reduction: false\n");
    assert_eq!(
        stdout(&["spin-goodred", "--form", "1,1,1,2,3", "--at", "p(x)=x", "--json"]),
        "{\"good_reduction\":true,\"witness\":\"1\"}\n"
    );
    assert_eq!(
        stdout(&["spin-goodred", "--form", "x,3*x,2*x", "--at", "p(x)=x"]),
        "good_reduction: true\nwitness: pi\n"
    );
    assert_eq!(stdout(&["spin-goodred", "--form", "x,x,2", "--at", "p(x)=x"]), "good_reduction: false\n");
    assert_eq!(stdout(&["spin-goodred", "--form", "1,5,7", "--at", "p=5"]), "good_reduction: false\n");
    assert_eq!(exit_code(&["spin-goodred", "--form", "1,1", "--at", "p=2"]), 1);
}

#[test]
fn f4_subcommands() {
    let v = json(&["f4", "invariants", "--albert", "x,-1,-1,1,1", "--json"]);
    assert_eq!(v["f3_trivial"], "false");
    assert_eq!(v["f5_trivial"], "true");

    let v = json(&["f4", "invariants", "--torus", "-1;-1,-1,-1,-1", "--json"]);
    assert_eq!(v["f3_trivial"], "false");
    assert_eq!(v["f5_trivial"], "false");

    let v = json(&["f4", "unramified", "--albert", "x,-1,-1,1,1", "--at", "p(x)=x", "--json"]);
    assert_eq!(v, serde_json::json!({"f3": "false", "f5": "true"}));

    let v = json(&["f4", "goodred", "--torus", "5;2,3,7,11", "--at", "p=13", "--json"]);
    assert_eq!(v["good"], true);
    assert_eq!(v["reduced"]["a"], "2");
    assert_eq!(v["reduced"]["c"], serde_json::json!(["2", "1", "2", "2"]));
    let v = json(&["f4", "goodred", "--torus", "5;2,13,7,11", "--at", "p=13", "--json"]);
    assert_eq!(v["good"], false);
    assert!(v["reason"].as_str().unwrap().contains("c2"));

    assert_eq!(
        stdout(&["f4", "split", "--albert", "-1,-1,-1,2,-1"]),
        "split: false\nisotropic: true\n"
    );
    assert_eq!(
        stdout(&["f4", "split", "--albert", "1,3,5,7,11"]),
        "split: true\nisotropic: true\n"
    );
}

#[test]
fn genus_compare_verdicts_and_exit_codes() {
    let v = json(&["genus-compare", "--inv1", "albert:x,-1,-1,1,1", "--inv2", "torus:x;-2,-1,1,1", "--json"]);
    assert_eq!(v["equal"], true);
    assert_eq!(v["stratum"], "g3 = 0");

    let args = ["genus-compare", "--inv1", "albert:x,-1,-1,1,1", "--inv2", "albert:1,1,1,1,1"];
    assert_eq!(exit_code(&args), 0);
    let v = json(&[&args[..], &["--json"]].concat());
    assert_eq!(v["equal"], false);
    assert_eq!(v["f3_equal"], "false");

    let args = ["genus-compare", "--inv1", "albert:x^2+1,3,5,1,1", "--inv2", "albert:2,3,5,1,1"];
    assert_eq!(exit_code(&args), 2, "undecided comparisons exit 2");
    let v = json(&[&args[..], &["--json"]].concat());
    assert_eq!(v["f3_equal"], "undecided");
    assert_eq!(v["undecided_at"], serde_json::json!(["x^2 + 1"]));
}

#[test]
fn error_handling_and_determinism() {
    let out = run(&["h1", "--type", "Z9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(out.stdout.is_empty());

    let out = run(&["h1", "--bogus"]);
    assert_eq!(out.status.code(), Some(1), "unknown flags are rejected");

    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["symbol-residue", "2,3", "--at", "p=2"]);
    assert_eq!(out.status.code(), Some(1), "char-2 residues are a domain error");

    for args in [
        &["quat", "product", "--", "-3", "5", "7", "-2", "--json"][..],
        &["genus-compare", "--inv1", "albert:x,-1,-1,1,1", "--inv2", "albert:x,-2,-1,1,1", "--json"][..],
        &["qform", "pfister", "--slots", "3,5,7", "--json"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "reruns are byte-identical: {args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}
