//! Deterministic generators for randomized test corpora.
//!
//! Kept in the library (hidden from docs) so that unit tests, integration
//! tests and the acceptance suite share one source of reproducible inputs.
#![doc(hidden)]

use std::collections::BTreeMap;

use crate::syntax::{Atom, Clause, Goal, Program, Signature, Term};
use crate::theory::{Arrow, Component, Iface, PlTerm};

/// Small xorshift generator; deterministic across platforms.
#[derive(Debug, Clone)]
pub struct Rng(pub u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, num: u32, den: u32) -> bool {
        (self.next_u64() % den as u64) < num as u64
    }
}

/// A random placeholder term over `dom` placeholders and a fixed signature
/// of `a/0, b/0, f/1, g/2`.
pub fn random_plterm(rng: &mut Rng, dom: usize, depth: usize) -> PlTerm {
    if depth == 0 || rng.chance(2, 5) {
        if dom > 0 && rng.chance(1, 2) {
            return PlTerm::Hole(1 + rng.below(dom));
        }
        return if rng.chance(1, 2) { PlTerm::constant("a") } else { PlTerm::constant("b") };
    }
    if rng.chance(1, 2) {
        PlTerm::App("f".into(), vec![random_plterm(rng, dom, depth - 1)])
    } else {
        PlTerm::App(
            "g".into(),
            vec![random_plterm(rng, dom, depth - 1), random_plterm(rng, dom, depth - 1)],
        )
    }
}

/// A random term-sorted arrow with bounded width and depth.
pub fn random_arrow(rng: &mut Rng, dom: usize, cod: usize, depth: usize) -> Arrow {
    Arrow {
        dom: Iface::terms(dom),
        cod: Iface::terms(cod),
        comps: (0..cod).map(|_| Component::T(random_plterm(rng, dom, depth))).collect(),
    }
}

/// The signature used by [`random_plterm`].
pub fn generator_signature() -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    m.insert("a".to_string(), 0);
    m.insert("b".to_string(), 0);
    m.insert("f".to_string(), 1);
    m.insert("g".to_string(), 2);
    m
}

/// Abstract random subtrees of `target`'s components into fresh
/// placeholders: the result is an arrow `w` with `m;w = target` for some
/// `m`, so any cospan pairing `target`'s source with `w` is solvable.
pub fn random_anti_instance(rng: &mut Rng, target: &Arrow) -> Arrow {
    let mut next = 0usize;
    let mut hole_map: BTreeMap<usize, usize> = BTreeMap::new();
    let comps = target
        .comps
        .iter()
        .map(|c| match c {
            Component::T(t) => Component::T(abstract_term(rng, t, &mut next, &mut hole_map)),
            Component::P(_) => c.clone(),
        })
        .collect();
    Arrow { dom: Iface::terms(next), cod: target.cod.clone(), comps }
}

fn abstract_term(
    rng: &mut Rng,
    t: &PlTerm,
    next: &mut usize,
    hole_map: &mut BTreeMap<usize, usize>,
) -> PlTerm {
    match t {
        PlTerm::Hole(i) => {
            let slot = hole_map.entry(*i).or_insert_with(|| {
                *next += 1;
                *next
            });
            PlTerm::Hole(*slot)
        }
        PlTerm::App(f, args) => {
            if rng.chance(1, 4) {
                *next += 1;
                return PlTerm::Hole(*next);
            }
            PlTerm::App(
                f.clone(),
                args.iter().map(|a| abstract_term(rng, a, next, hole_map)).collect(),
            )
        }
    }
}

/// A random named term for program generation.
fn random_term(rng: &mut Rng, vars: &[String], depth: usize) -> Term {
    if depth == 0 || rng.chance(2, 5) {
        if !vars.is_empty() && rng.chance(3, 5) {
            return Term::Var(vars[rng.below(vars.len())].clone());
        }
        return if rng.chance(1, 2) { Term::constant("a") } else { Term::constant("b") };
    }
    if rng.chance(2, 3) {
        Term::App("f".into(), vec![random_term(rng, vars, depth - 1)])
    } else {
        Term::App(
            "g".into(),
            vec![random_term(rng, vars, depth - 1), random_term(rng, vars, depth - 1)],
        )
    }
}

fn random_atom(rng: &mut Rng, preds: &[(String, usize)], vars: &[String], depth: usize) -> Atom {
    let (p, n) = preds[rng.below(preds.len())].clone();
    Atom { pred: p, args: (0..n).map(|_| random_term(rng, vars, depth)).collect() }
}

/// A random small program: at most `max_clauses` clauses, bodies of at most
/// two atoms, terms of bounded depth. Signature: `a/0, b/0, f/1, g/2` and
/// predicates `p/1, q/1, r/2`.
pub fn random_program(rng: &mut Rng, max_clauses: usize) -> Program {
    let preds: Vec<(String, usize)> =
        vec![("p".into(), 1), ("q".into(), 1), ("r".into(), 2)];
    let mut clauses = Vec::new();
    let n_clauses = 1 + rng.below(max_clauses);
    for i in 0..n_clauses {
        let vars: Vec<String> = (0..=rng.below(3)).map(|k| format!("X{k}")).collect();
        let (hp, hn) = preds[rng.below(preds.len())].clone();
        let head = Atom {
            pred: hp,
            args: (0..hn)
                .map(|_| {
                    if rng.chance(1, 2) {
                        Term::Var(vars[rng.below(vars.len())].clone())
                    } else {
                        random_term(rng, &vars, 1)
                    }
                })
                .collect(),
        };
        // keep some facts around so refutations are reachable
        let body_len = if i == 0 { 0 } else { rng.below(3) };
        let body = Goal {
            atoms: (0..body_len).map(|_| random_atom(rng, &preds, &vars, 1)).collect(),
        };
        clauses.push(Clause { id: format!("c{}", i + 1), head, body });
    }
    let mut signature = Signature::default();
    for (f, n) in generator_signature() {
        signature.functions.insert(f, n);
    }
    for (p, n) in preds {
        signature.predicates.insert(p, n);
    }
    Program { clauses, signature }
}

/// A random goal of one or two atoms over the generator signature.
pub fn random_goal(rng: &mut Rng, program: &Program) -> Goal {
    let preds: Vec<(String, usize)> = program
        .signature
        .predicates
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let vars: Vec<String> = (0..=rng.below(2)).map(|k| format!("Y{k}")).collect();
    let n = 1 + rng.below(2);
    Goal { atoms: (0..n).map(|_| random_atom(rng, &preds, &vars, 1)).collect() }
}
