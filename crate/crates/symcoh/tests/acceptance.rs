//! End-to-end acceptance suite. Each test covers one release criterion and
//! prints a single pass/fail line (visible with `--nocapture`); a failing
//! criterion also fails the test the usual way.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symcoh::f4inv::{
    genus_compare_qx, good_reduction_witness, invariants_from_albert, invariants_from_torus,
    unramified_at, AlbertData, TorusData,
};
use symcoh::mat::cokernel_invariants;
use symcoh::poly::parse_poly;
use symcoh::qform::{
    equivalent_q, hyperbolic_q, parse_form, parse_form_auto, pfister_hyperbolic_q, pfister_q,
    spin_good_reduction, springer_residues,
};
use symcoh::rootsys::{build_root_system, weyl_order, FinAbGroup, RootSystem, TypeLabel};
use symcoh::symcalc::{
    class_is_trivial, quat_iso, quat_product_class, quat_ram_set, ramification_profile_qx,
    find_quaternion_rep, specialize, specialization_point, square_class_from_str,
    square_class_q, tame_residue, FieldDesc, Place, QuatAlg, SquareClass, SymbolSum, Trilean,
};
use symcoh::weylcoh::{
    h1_enumeration_oracle, h1_formula, h1_presentation_oracle, lattice_from_spec, LatticeSpec,
    DEFAULT_ENUMERATION_BOUND,
};
use symcoh::rootsys::intermediate_lattice_basis;

fn check(id: u32, desc: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("criterion {id:02} PASS: {desc}"),
        Err(e) => {
            println!("criterion {id:02} FAIL: {desc}");
            resume_unwind(e);
        }
    }
}

/// All irreducible types of rank <= 8.
fn all_types_rank_le_8() -> Vec<RootSystem> {
    let mut out = Vec::new();
    for n in 1..=8 {
        out.push(build_root_system(TypeLabel::A, n).unwrap());
    }
    for n in 2..=8 {
        out.push(build_root_system(TypeLabel::B, n).unwrap());
        out.push(build_root_system(TypeLabel::C, n).unwrap());
    }
    for n in 4..=8 {
        out.push(build_root_system(TypeLabel::D, n).unwrap());
    }
    for n in 6..=8 {
        out.push(build_root_system(TypeLabel::E, n).unwrap());
    }
    out.push(build_root_system(TypeLabel::F, 4).unwrap());
    out.push(build_root_system(TypeLabel::G, 2).unwrap());
    out
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn qx_class(s: &str) -> SquareClass {
    square_class_from_str(&FieldDesc::RatFunQ, s).unwrap()
}

#[test]
fn criterion_01_weight_lattice_table() {
    check(1, "H1 on the weight lattice, all rank <= 8 types, under 1 s", || {
        let started = Instant::now();
        for r in all_types_rank_le_8() {
            let m = lattice_from_spec(&r, &LatticeSpec::Weight).unwrap();
            let got = h1_formula(&m);
            let expect: &[u64] = match (r.type_label(), r.rank()) {
                (TypeLabel::A, 1) => &[2],
                (TypeLabel::C, _) => &[2],
                (TypeLabel::B, 2) => &[2],
                _ => &[],
            };
            assert_eq!(got.invariant_factors(), expect, "type {}", r.label());
        }
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1 s");
    });
}

#[test]
fn criterion_02_root_lattice_cokernel() {
    check(2, "H1 on the root lattice equals coker(Cartan); A_(n-1) gives Z/n", || {
        for r in all_types_rank_le_8() {
            let m = lattice_from_spec(&r, &LatticeSpec::Root).unwrap();
            let (torsion, free) = cokernel_invariants(r.cartan());
            assert_eq!(free, 0, "Cartan matrix of {} is nonsingular", r.label());
            let expect = FinAbGroup::from_factors(
                torsion.iter().map(|d| u64::try_from(d).unwrap()).collect(),
            );
            assert_eq!(h1_formula(&m), expect, "type {}", r.label());
        }
        for n in 2..=9u64 {
            let r = build_root_system(TypeLabel::A, (n - 1) as usize).unwrap();
            let m = lattice_from_spec(&r, &LatticeSpec::Root).unwrap();
            assert_eq!(h1_formula(&m).invariant_factors(), &[n], "A{}", n - 1);
        }
    });
}

#[test]
fn criterion_03_oracle_equivalence() {
    check(3, "presentation and enumeration oracles match the formula, under 10 s", || {
        let started = Instant::now();
        for r in all_types_rank_le_8().into_iter().filter(|r| r.rank() <= 4) {
            let mut specs = vec![LatticeSpec::Root, LatticeSpec::Weight];
            if let Some(b) = intermediate_lattice_basis(&r) {
                specs.push(LatticeSpec::Generators(b));
            }
            for spec in specs {
                let m = lattice_from_spec(&r, &spec).unwrap();
                let reference = h1_formula(&m);
                assert_eq!(
                    h1_presentation_oracle(&m),
                    reference,
                    "presentation oracle at {} {}",
                    r.label(),
                    spec
                );
                if weyl_order(&r) <= DEFAULT_ENUMERATION_BOUND {
                    assert_eq!(
                        h1_enumeration_oracle(&m, DEFAULT_ENUMERATION_BOUND).unwrap(),
                        reference,
                        "enumeration oracle at {} {}",
                        r.label(),
                        spec
                    );
                }
            }
        }
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10 s");
    });
}

#[test]
fn criterion_04_brauer_product_ramification() {
    check(4, "ram(-1,3) = {2,3}, ram(-1,7) = {2,7}, product class is (-1,21)", || {
        let places = |ps: &[u64]| -> BTreeSet<Place> {
            ps.iter().map(|&p| Place::Finite(p)).collect()
        };
        assert_eq!(quat_ram_set(&rat(-1), &rat(3)).unwrap(), places(&[2, 3]));
        assert_eq!(quat_ram_set(&rat(-1), &rat(7)).unwrap(), places(&[2, 7]));

        let d1 = QuatAlg::from_ints(-1, 3).unwrap();
        let d2 = QuatAlg::from_ints(-1, 7).unwrap();
        let d3 = QuatAlg::from_ints(-1, 21).unwrap();
        assert_eq!(quat_product_class(&d1, &d2), places(&[3, 7]));
        assert_eq!(d3.ram(), &places(&[3, 7]));

        let (a, b) = find_quaternion_rep(&quat_product_class(&d1, &d2)).unwrap();
        let rep = QuatAlg::new(
            &BigRational::from_integer(a),
            &BigRational::from_integer(b),
        )
        .unwrap();
        assert!(quat_iso(&rep, &d3), "product class realized by a quaternion algebra");
        assert!(!quat_iso(&d1, &d2));
    });
}

#[test]
fn criterion_05_hilbert_reciprocity() {
    check(5, "|ram(a,b)| is even for 200 random pairs with |a|, |b| <= 10^4", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut nonsplit = 0usize;
        for _ in 0..200 {
            let mut draw = || loop {
                let v = rng.gen_range(-10_000i64..=10_000);
                if v != 0 {
                    break v;
                }
            };
            let (a, b) = (draw(), draw());
            let d = QuatAlg::from_ints(a, b).unwrap();
            assert!(d.ram().len() % 2 == 0, "odd ramification set for ({a}, {b})");
            if !d.is_split() {
                nonsplit += 1;
            }
        }
        assert!(nonsplit > 50, "sample should contain plenty of ramified algebras");
    });
}

#[test]
fn criterion_06_springer_residue_good_reduction() {
    check(6, "form <1,1,1,2,x> ramifies at (x); unit-entry forms reduce well", || {
        let place = Place::Irreducible(parse_poly("x").unwrap());
        let q = parse_form_auto("1,1,1,2,x").unwrap();
        let res = springer_residues(&q, &place).unwrap();
        assert_eq!(res.first.dim(), 4);
        assert_eq!(res.second.dim(), 1);
        let gr = spin_good_reduction(&q, &place).unwrap();
        assert!(!gr.good);
        assert!(gr.witness.is_none());

        for units in ["1,1,1,2,3", "x+1,x-2,3", "1,1,1,1,1"] {
            let q = parse_form(&FieldDesc::RatFunQ, units).unwrap();
            let gr = spin_good_reduction(&q, &place).unwrap();
            assert!(gr.good, "form <{units}> has unit entries at (x)");
            assert!(gr.witness.is_some());
        }
    });
}

#[test]
fn criterion_07_faddeev_residue_suite() {
    check(7, "tame residues: unit symbols vanish, (x)(a)(b) residues to (a)(b), constants descend", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let place_x = Place::Irreducible(parse_poly("x").unwrap());
        for _ in 0..100 {
            let mut draw = || loop {
                let v = rng.gen_range(-50i64..=50);
                if v != 0 {
                    break v;
                }
            };

            // Symbols whose entries are units at (x) have vanishing residue
            // there; entries mix constants and linear polynomials.
            let c = draw();
            let (t1, t2) = (draw(), draw());
            let unit_sym = SymbolSum::symbol(vec![
                qx_class(&format!("x - {t1}").replace("- -", "+ ")),
                qx_class(&c.to_string()),
                qx_class(&format!("x - {t2}").replace("- -", "+ ")),
            ]);
            let r = tame_residue(&place_x, &unit_sym).unwrap();
            assert!(r.is_zero(), "unit symbol residue at (x): {unit_sym}");

            // The residue of (x) u (a) u (b) at (x) is (a) u (b) over the
            // residue field Q.
            let (a, b) = (draw(), draw());
            let sym = SymbolSum::symbol(vec![
                qx_class("x"),
                qx_class(&a.to_string()),
                qx_class(&b.to_string()),
            ]);
            let r = tame_residue(&place_x, &sym).unwrap();
            let expect = SymbolSum::from_terms(
                FieldDesc::RatQ,
                2,
                vec![vec![
                    square_class_q(&rat(a)).unwrap(),
                    square_class_q(&rat(b)).unwrap(),
                ]],
            );
            assert_eq!(r, expect, "residue of (x)({a})({b})");

            // Constant symbols are everywhere unramified and specialize to
            // themselves.
            let (u, v, w) = (draw(), draw(), draw());
            let csym = SymbolSum::symbol(vec![
                qx_class(&u.to_string()),
                qx_class(&v.to_string()),
                qx_class(&w.to_string()),
            ]);
            let profile = ramification_profile_qx(&csym).unwrap();
            assert!(profile.is_empty(), "constant symbol ({u})({v})({w}) ramifies");
            let x0 = specialization_point(&csym);
            let spec = specialize(&csym, &x0).unwrap();
            let expect = SymbolSum::from_terms(
                FieldDesc::RatQ,
                3,
                vec![vec![
                    square_class_q(&rat(u)).unwrap(),
                    square_class_q(&rat(v)).unwrap(),
                    square_class_q(&rat(w)).unwrap(),
                ]],
            );
            assert_eq!(spec, expect, "specialization of ({u})({v})({w})");
        }
    });
}

#[test]
fn criterion_08_torus_unramifiedness() {
    check(8, "unit-slot tori are unramified; good reduction implies unramified", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let primes = [3u64, 5, 7, 11, 13];
        for _ in 0..100 {
            let p = primes[rng.gen_range(0..primes.len())];
            let mut slot = || loop {
                let v = rng.gen_range(-60i64..=60);
                if v != 0 && v % (p as i64) != 0 {
                    break v.to_string();
                }
            };
            let (a, c1, c2, c3, c4) = (slot(), slot(), slot(), slot(), slot());
            let t = TorusData::parse(&FieldDesc::RatQ, &a, [&c1, &c2, &c3, &c4]).unwrap();
            let rep = unramified_at(&invariants_from_torus(&t), &Place::Finite(p)).unwrap();
            assert_eq!(rep.f3, Trilean::True, "({a}; {c1},{c2},{c3},{c4}) at {p}");
            assert_eq!(rep.f5, Trilean::True, "({a}; {c1},{c2},{c3},{c4}) at {p}");
        }
        let mut goods = 0usize;
        for _ in 0..120 {
            let p = primes[rng.gen_range(0..primes.len())];
            let mut slot = || loop {
                let v = rng.gen_range(-30i64..=30);
                if v != 0 {
                    break v.to_string();
                }
            };
            let (a, c1, c2, c3, c4) = (slot(), slot(), slot(), slot(), slot());
            let t = TorusData::parse(&FieldDesc::RatQ, &a, [&c1, &c2, &c3, &c4]).unwrap();
            let witness = good_reduction_witness(&t, &Place::Finite(p)).unwrap();
            if witness.good {
                goods += 1;
                let rep =
                    unramified_at(&invariants_from_torus(&t), &Place::Finite(p)).unwrap();
                assert_eq!(rep.f3, Trilean::True);
                assert_eq!(rep.f5, Trilean::True);
            }
        }
        assert!(goods > 20, "sample should contain plenty of good-reduction cases");
    });
}

#[test]
fn criterion_09_sign_rule_vs_form_invariants() {
    check(9, "degree-3 sign rule agrees with form equivalence on the 512-triple grid", || {
        let m1 = square_class_q(&rat(-1)).unwrap();
        let neg = SymbolSum::symbol(vec![m1.clone(), m1.clone(), m1.clone()]);
        assert_eq!(class_is_trivial(&neg), Trilean::False);
        let two = square_class_q(&rat(2)).unwrap();
        let split = SymbolSum::symbol(vec![two, m1.clone(), m1]);
        assert_eq!(class_is_trivial(&split), Trilean::True);

        let values: Vec<i64> = vec![1, -1, 2, -2, 3, -3, 5, -5];
        let hyp = hyperbolic_q(4);
        let mut cases = 0usize;
        for &a in &values {
            for &b in &values {
                for &c in &values {
                    let by_signs = pfister_hyperbolic_q(&rat(a), &rat(b), &rat(c)).unwrap();
                    let form = pfister_q(&[rat(a), rat(b), rat(c)]).unwrap();
                    let by_forms = equivalent_q(&form, &hyp).unwrap();
                    assert_eq!(
                        by_signs, by_forms,
                        "routes disagree on <<{a}, {b}, {c}>>"
                    );
                    cases += 1;
                }
            }
        }
        assert_eq!(cases, 512);
    });
}

#[test]
fn criterion_10_genus_comparison_fixtures() {
    check(10, "genus comparison: twisted pair equal, zero class distinguished", || {
        let albert = |slots: [&str; 5]| {
            invariants_from_albert(&AlbertData::parse(&FieldDesc::RatFunQ, slots).unwrap())
        };
        let inv1 = albert(["x", "-1", "-1", "1", "1"]);
        let inv2 = albert(["x", "-2", "-1", "1", "1"]);
        let zero = albert(["1", "1", "1", "1", "1"]);

        let r = genus_compare_qx(&inv1, &inv2).unwrap();
        assert!(r.equal, "residue profiles and specialization identify the pair");
        assert!(r.undecided_at.is_empty());

        let r = genus_compare_qx(&inv1, &zero).unwrap();
        assert!(!r.equal);
        assert_eq!(r.f3, Trilean::False);

        let r = genus_compare_qx(&inv1, &inv1).unwrap();
        assert!(r.equal);
        let r = genus_compare_qx(&zero, &zero).unwrap();
        assert!(r.equal);
    });
}
