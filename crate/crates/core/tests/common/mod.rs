//! Generators and oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use unexpand::solver::{Database, Solver};
use unexpand::syntax::{read_query, write_term, OperatorTable, VarStyle, WriteOptions};
use unexpand::term::{is_variant, rename_with, unify, Substitution, Var};
use unexpand::{Program, Registry, Term, VarGen};

pub const EX0: &str = include_str!("../../programs/ex0.pl");
pub const GREETING: &str = include_str!("../../programs/greeting.pl");
pub const FAMILY: &str = include_str!("../../programs/family.pl");
pub const ARITH: &str = include_str!("../../programs/arith.pl");

pub fn load(src: &str, module: &str) -> Program {
    unexpand::load_program(src, module, &Registry::standard()).unwrap()
}

pub fn var(id: usize) -> Term {
    Term::Var(Var::new(id, Some(&format!("V{id}"))))
}

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0usize..6).prop_map(var),
        prop::sample::select(vec!["a", "b", "foo", "[]", "{}", "hello world", "It's", "+", "-", "=", "!", ";", "é"])
            .prop_map(Term::atom),
        (-40i64..40).prop_map(Term::int),
    ]
}

/// Terms over a small vocabulary with operators, lists and quoted atoms.
pub fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (
                prop::sample::select(vec!["f", "g", "+", "-", "*", "=", ",", "is", "<", ":-", "a b"]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(f, x, y)| Term::compound(f, vec![x, y])),
            (prop::sample::select(vec!["f", "-", "\\+", "{}", "h"]), inner.clone())
                .prop_map(|(f, x)| Term::compound(f, vec![x])),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(x, y, z)| Term::compound("k", vec![x, y, z])),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Term::list),
            (prop::collection::vec(inner.clone(), 1..3), (0usize..6).prop_map(var))
                .prop_map(|(xs, t)| Term::list_with_tail(xs, t)),
        ]
    })
}

/// Pairs biased towards unifiable ones: half are instances of each other.
pub fn term_pair() -> impl Strategy<Value = (Term, Term)> {
    prop_oneof![
        (term(), term()),
        (term(), prop::collection::hash_map(0usize..6, term(), 0..3)).prop_map(|(a, m)| {
            let b = a.substitute(&m);
            (a, b)
        }),
        (term(), prop::collection::hash_map(0usize..6, term(), 0..3)).prop_map(|(a, m)| {
            let b = a.substitute(&m);
            (b, a)
        }),
    ]
}

/// Renders a term with variables numbered by first occurrence, so that
/// variants print identically.
pub fn canonical(t: &Term) -> String {
    let renamed = rename_with(t, &mut VarGen::new(), &mut HashMap::new());
    let opts = WriteOptions {
        vars: VarStyle::Fresh,
        ..WriteOptions::default()
    };
    write_term(&renamed, &unexpand::syntax::default_ops(), &opts)
}

/// All answers to `goal` as sorted canonical texts, or the error message.
pub fn answers(db: &Database, program: &Program, goal: &str) -> Result<Vec<String>, String> {
    let q = program.parse_query(goal).map_err(|e| e.to_string())?;
    let names: BTreeMap<usize, String> = q.names.clone();
    let mut out = Vec::new();
    for r in Solver::new(db, q.goal.clone(), &names, None) {
        let s = r.map_err(|e| e.to_string())?;
        let tuple = Term::compound("s", s.bindings.into_iter().map(|(_, v)| v).collect());
        out.push(canonical(&tuple));
    }
    out.sort();
    Ok(out)
}

fn small_int() -> impl Strategy<Value = String> {
    (-5i64..60).prop_map(|n| n.to_string())
}

fn arg_or_var(values: Vec<&'static str>) -> impl Strategy<Value = String> {
    prop_oneof![
        1 => Just("A".to_string()),
        3 => prop::sample::select(values).prop_map(str::to_string),
    ]
}

pub fn ex0_query() -> impl Strategy<Value = String> {
    prop_oneof![
        (prop::sample::select(vec!["f", "k", "l", "m"]), small_int()).prop_map(|(p, n)| format!("{p}({n}, R)")),
        (small_int(), small_int()).prop_map(|(n, r)| format!("f({n}, {r})")),
        (small_int()).prop_map(|n| format!("m({n}, X), l(X, Y), k(Y, Z)")),
    ]
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["hello", "world", "prolog", "bye"]), 0..4)
        .prop_map(|ws| format!("[{}]", ws.join(", ")))
}

pub fn greeting_query() -> impl Strategy<Value = String> {
    prop_oneof![
        words().prop_map(|l| format!("phrase(greeting, {l})")),
        words().prop_map(|l| format!("phrase(name, {l}, R)")),
        words().prop_map(|l| format!("greeting({l}, R)")),
        Just("phrase(greeting, L)".to_string()),
        words().prop_map(|l| format!("name(L, {l})")),
    ]
}

pub fn family_query() -> impl Strategy<Value = String> {
    let people = vec!["tom", "bob", "liz", "ann", "pat", "jim", "sue"];
    (
        prop::sample::select(vec!["parent", "grandparent", "ancestor"]),
        arg_or_var(people.clone()),
        arg_or_var(people).prop_map(|s| if s == "A" { "B".to_string() } else { s }),
    )
        .prop_map(|(p, x, y)| format!("{p}({x}, {y})"))
}

pub fn arith_query() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::collection::vec(prop::sample::select(vec!["a", "b", "X"]), 0..5)
            .prop_map(|xs| format!("len([{}], N)", xs.join(", "))),
        (small_int(), small_int()).prop_map(|(a, b)| format!("max({a}, {b}, M)")),
        (0i64..6, 0i64..8).prop_map(|(a, b)| format!("count({a}, {b})")),
        (0i64..4).prop_map(|n| format!("count(X, {n})")),
    ]
}

/// Every shipped program with a query generator for it.
pub fn corpus() -> Vec<(&'static str, &'static str, BoxedStrategy<String>)> {
    vec![
        ("ex0", EX0, ex0_query().boxed()),
        ("greeting", GREETING, greeting_query().boxed()),
        ("family", FAMILY, family_query().boxed()),
        ("arith", ARITH, arith_query().boxed()),
    ]
}

pub fn mgu_symmetry(a: &Term, b: &Term) -> Result<(), TestCaseError> {
    let s = Substitution::new();
    let ab = unify(a, b, &s, true);
    let ba = unify(b, a, &s, true);
    prop_assert_eq!(ab.is_some(), ba.is_some());
    if let (Some(x), Some(y)) = (ab, ba) {
        prop_assert!(is_variant(&x.apply(a), &y.apply(a)));
        prop_assert!(is_variant(&x.apply(b), &y.apply(b)));
    }
    Ok(())
}

pub fn apply_idempotence(a: &Term, b: &Term) -> Result<(), TestCaseError> {
    if let Some(s) = unify(a, b, &Substitution::new(), true) {
        let ta = s.apply(a);
        prop_assert_eq!(&ta, &s.apply(b));
        prop_assert_eq!(s.apply(&ta), ta);
    }
    Ok(())
}

/// With the occurs check no variable is bound to a term containing it, and
/// every unifier found is also found without the check.
pub fn occurs_check_soundness(a: &Term, b: &Term) -> Result<(), TestCaseError> {
    if let Some(s) = unify(a, b, &Substitution::new(), true) {
        for (id, t) in s.bindings() {
            prop_assert!(!s.apply(t).vars().iter().any(|v| v.id == id));
        }
        let plain = unify(a, b, &Substitution::new(), false);
        prop_assert!(plain.is_some());
        prop_assert!(is_variant(&plain.unwrap().apply(a), &s.apply(a)));
    }
    Ok(())
}

pub fn roundtrip(t: &Term, ops: &OperatorTable) -> Result<Term, String> {
    let opts = WriteOptions {
        vars: VarStyle::Names,
        quoted: true,
        ..WriteOptions::default()
    };
    let text = write_term(t, ops, &opts);
    read_query(&text, ops, &mut VarGen::new())
        .map(|s| s.term)
        .map_err(|e| format!("{text}: {e}"))
}

pub fn read_write_identity(t: &Term) -> Result<(), TestCaseError> {
    let back = roundtrip(t, &unexpand::syntax::default_ops());
    prop_assert!(back.is_ok(), "{:?}", back);
    prop_assert!(is_variant(&back.unwrap(), t));
    Ok(())
}

/// Answers over the annotated and the stripped database coincide.
pub fn transparent(program: &Program, stripped: &Database, goal: &str) -> Result<(), TestCaseError> {
    let a = answers(&program.db, program, goal).map_err(|_| "error");
    let b = answers(stripped, program, goal).map_err(|_| "error");
    prop_assert_eq!(a, b, "{}", goal);
    Ok(())
}
