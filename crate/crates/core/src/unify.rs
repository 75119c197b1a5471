//! Unification three ways: the classical equation-set algorithm on named
//! terms, and its categorical forms — equalizers and pullbacks of
//! term-sorted arrows — plus a brute-force universal-property checker.
//!
//! The arrow-level constructions here are the independent oracle used to
//! cross-validate the tile-based pullback synthesis; they must not share
//! code with it beyond the plain arrow operations.

use std::collections::BTreeMap;

use crate::syntax::{Atom, Term};
use crate::theory::{
    compose, Arrow, Component, Iface, PlTerm, Substitution,
};

/// A pair to be solved; atoms unfold to argument equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EqSide {
    Term(Term),
    Atom(Atom),
}

pub type EquationSet = Vec<(EqSide, EqSide)>;

pub fn term_eq(l: Term, r: Term) -> (EqSide, EqSide) {
    (EqSide::Term(l), EqSide::Term(r))
}

/// Most general unifier of an equation set, or `None` on functor clash,
/// predicate clash, or occurs-check failure.
///
/// The solver runs the standard step schedule — delete trivial equations,
/// bind variable equations substituting through the rest, decompose
/// applications — leftmost equation first, so the result is deterministic.
/// The returned substitution is idempotent; its domain order lists the
/// variables of the left-hand sides first.
pub fn mgu(eqs: &EquationSet) -> Option<Substitution> {
    let mut work: Vec<(Term, Term)> = Vec::new();
    for (l, r) in eqs {
        match (l, r) {
            (EqSide::Term(a), EqSide::Term(b)) => work.push((a.clone(), b.clone())),
            (EqSide::Atom(a), EqSide::Atom(b)) => {
                if a.pred != b.pred || a.args.len() != b.args.len() {
                    return None;
                }
                for (x, y) in a.args.iter().zip(b.args.iter()) {
                    work.push((x.clone(), y.clone()));
                }
            }
            _ => return None,
        }
    }
    // Report bindings for left-side variables first.
    let mut report_order: Vec<String> = Vec::new();
    for (l, _) in &work {
        l.vars_into(&mut report_order);
    }
    for (_, r) in &work {
        r.vars_into(&mut report_order);
    }

    let mut solved: Vec<(String, Term)> = Vec::new();
    let mut queue: std::collections::VecDeque<(Term, Term)> = work.into();
    let mut fuel: u64 = 10_000_000;
    while let Some((l, r)) = queue.pop_front() {
        fuel = fuel.checked_sub(1)?;
        let l = apply_solved(&solved, &l);
        let r = apply_solved(&solved, &r);
        match (l, r) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.contains_var(&x) {
                    return None; // occurs check
                }
                for (_, img) in solved.iter_mut() {
                    *img = subst_one(img, &x, &t);
                }
                solved.push((x, t));
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                for (a, b) in xs.into_iter().zip(ys).rev() {
                    queue.push_front((a, b));
                }
            }
        }
    }
    let map: BTreeMap<String, Term> = solved.into_iter().collect();
    let mut out = Substitution::empty();
    for v in report_order {
        if let Some(t) = map.get(&v) {
            if !out.map.contains_key(&v) {
                out.bind(&v, t.clone());
            }
        }
    }
    Some(out)
}

fn apply_solved(solved: &[(String, Term)], t: &Term) -> Term {
    match t {
        Term::Var(v) => solved
            .iter()
            .find(|(x, _)| x == v)
            .map(|(_, img)| img.clone())
            .unwrap_or_else(|| t.clone()),
        Term::App(op, args) => {
            Term::App(op.clone(), args.iter().map(|a| apply_solved(solved, a)).collect())
        }
    }
}

fn subst_one(t: &Term, x: &str, img: &Term) -> Term {
    match t {
        Term::Var(v) if v == x => img.clone(),
        Term::Var(_) => t.clone(),
        Term::App(op, args) => {
            Term::App(op.clone(), args.iter().map(|a| subst_one(a, x, img)).collect())
        }
    }
}

/// Unify a goal atom against a (renamed) clause head.
pub fn unify_atoms(a: &Atom, h: &Atom) -> Option<Substitution> {
    mgu(&vec![(EqSide::Atom(a.clone()), EqSide::Atom(h.clone()))])
}

// ---------------------------------------------------------------------------
// Equalizers and pullbacks of term-sorted arrows

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackResult {
    pub apex: Iface,
    pub proj_left: Arrow,
    pub proj_right: Arrow,
}

/// The equalizer of two parallel term-sorted arrows: the most general arrow
/// `e` with `e;s1 = e;s2`, or `None` when the components do not unify.
pub fn equalizer(s1: &Arrow, s2: &Arrow) -> Option<Arrow> {
    assert_eq!(s1.dom, s2.dom, "equalizer needs parallel arrows");
    assert_eq!(s1.cod, s2.cod, "equalizer needs parallel arrows");
    assert!(s1.all_t() && s2.all_t());
    let names: Vec<String> = (1..=s1.dom.len()).map(|i| format!("v{i}")).collect();
    let eqs: EquationSet = s1
        .comps
        .iter()
        .zip(s2.comps.iter())
        .map(|(a, b)| term_eq(comp_term(a, &names), comp_term(b, &names)))
        .collect();
    let sigma = mgu(&eqs)?;
    let images: Vec<Term> =
        names.iter().map(|v| sigma.apply_term(&Term::Var(v.clone()))).collect();
    Some(tuple_to_arrow(&images))
}

/// Pullback of a cospan of term-sorted arrows, computed by unifying against
/// disjointly named placeholder supplies and splitting the unifier into the
/// two projections. Apex placeholders are numbered by first use in the left
/// projection (then the right).
pub fn pullback_oracle(s_left: &Arrow, s_right: &Arrow) -> Option<PullbackResult> {
    assert_eq!(s_left.cod, s_right.cod, "pullback needs a cospan");
    assert!(s_left.all_t() && s_right.all_t());
    let xs: Vec<String> = (1..=s_left.dom.len()).map(|i| format!("l{i}")).collect();
    let ys: Vec<String> = (1..=s_right.dom.len()).map(|i| format!("r{i}")).collect();
    let eqs: EquationSet = s_left
        .comps
        .iter()
        .zip(s_right.comps.iter())
        .map(|(a, b)| term_eq(comp_term(a, &xs), comp_term(b, &ys)))
        .collect();
    let sigma = mgu(&eqs)?;
    let left_images: Vec<Term> = xs.iter().map(|v| sigma.apply_term(&Term::Var(v.clone()))).collect();
    let right_images: Vec<Term> =
        ys.iter().map(|v| sigma.apply_term(&Term::Var(v.clone()))).collect();
    let mut apex_vars: Vec<String> = Vec::new();
    for t in left_images.iter().chain(right_images.iter()) {
        t.vars_into(&mut apex_vars);
    }
    let proj_left = tuple_with_apex(&left_images, &apex_vars);
    let proj_right = tuple_with_apex(&right_images, &apex_vars);
    Some(PullbackResult { apex: Iface::terms(apex_vars.len()), proj_left, proj_right })
}

fn comp_term(c: &Component, names: &[String]) -> Term {
    match c {
        Component::T(t) => crate::theory::plterm_to_term(t, names),
        Component::P(_) => panic!("term-sorted arrow expected"),
    }
}

fn tuple_to_arrow(images: &[Term]) -> Arrow {
    let mut apex_vars = Vec::new();
    for t in images {
        t.vars_into(&mut apex_vars);
    }
    tuple_with_apex(images, &apex_vars)
}

fn tuple_with_apex(images: &[Term], apex_vars: &[String]) -> Arrow {
    let index: BTreeMap<&str, usize> =
        apex_vars.iter().enumerate().map(|(i, v)| (v.as_str(), i + 1)).collect();
    Arrow {
        dom: Iface::terms(apex_vars.len()),
        cod: Iface::terms(images.len()),
        comps: images.iter().map(|t| Component::T(named_to_pl(t, &index))).collect(),
    }
}

fn named_to_pl(t: &Term, index: &BTreeMap<&str, usize>) -> PlTerm {
    match t {
        Term::Var(v) => PlTerm::Hole(index[v.as_str()]),
        Term::App(op, args) => {
            PlTerm::App(op.clone(), args.iter().map(|a| named_to_pl(a, index)).collect())
        }
    }
}

/// Brute-force check of the pullback universal property at a term-depth
/// bound: every cone over the cospan, built from terms of bounded depth over
/// the symbols occurring in the inputs with at most `|apex|` placeholders,
/// must factor uniquely through the projections.
pub fn verify_universal(
    p: &PullbackResult,
    s_left: &Arrow,
    s_right: &Arrow,
    depth: usize,
) -> bool {
    assert!(depth >= 1);
    // The square must commute.
    let via_left = match compose(&p.proj_left, s_left) {
        Ok(a) => a,
        Err(_) => return false,
    };
    let via_right = match compose(&p.proj_right, s_right) {
        Ok(a) => a,
        Err(_) => return false,
    };
    if via_left != via_right {
        return false;
    }
    let mut syms: BTreeMap<String, usize> = BTreeMap::new();
    for a in [s_left, s_right, &p.proj_left, &p.proj_right] {
        collect_arrow_syms(a, &mut syms);
    }
    let nvars = p.apex.len();
    let universe = enumerate_terms(&syms, nvars, depth);
    let k = s_left.dom.len() + s_right.dom.len();
    let mut cone = vec![0usize; k];
    loop {
        let q0: Vec<PlTerm> = cone[..s_left.dom.len()].iter().map(|&i| universe[i].clone()).collect();
        let q1: Vec<PlTerm> = cone[s_left.dom.len()..].iter().map(|&i| universe[i].clone()).collect();
        let q0 = Arrow {
            dom: Iface::terms(nvars),
            cod: s_left.dom.clone(),
            comps: q0.into_iter().map(Component::T).collect(),
        };
        let q1 = Arrow {
            dom: Iface::terms(nvars),
            cod: s_right.dom.clone(),
            comps: q1.into_iter().map(Component::T).collect(),
        };
        let commutes = compose(&q0, s_left).unwrap() == compose(&q1, s_right).unwrap();
        if commutes && !factors_uniquely(p, &q0, &q1) {
            return false;
        }
        // next cone
        let mut i = 0;
        loop {
            if i == k {
                return true;
            }
            cone[i] += 1;
            if cone[i] < universe.len() {
                break;
            }
            cone[i] = 0;
            i += 1;
        }
    }
}

/// Solve `q;proj_left = q0`, `q;proj_right = q1` by syntactic matching; the
/// mediator is unique iff every apex placeholder is forced.
fn factors_uniquely(p: &PullbackResult, q0: &Arrow, q1: &Arrow) -> bool {
    let napex = p.apex.len();
    let mut assign: Vec<Option<PlTerm>> = vec![None; napex];
    let pairs = p
        .proj_left
        .comps
        .iter()
        .zip(q0.comps.iter())
        .chain(p.proj_right.comps.iter().zip(q1.comps.iter()));
    for (pat, tgt) in pairs {
        let (Component::T(pat), Component::T(tgt)) = (pat, tgt) else {
            return false;
        };
        if !match_pl(pat, tgt, &mut assign) {
            return false;
        }
    }
    assign.iter().all(Option::is_some)
}

fn match_pl(pat: &PlTerm, tgt: &PlTerm, assign: &mut Vec<Option<PlTerm>>) -> bool {
    match pat {
        PlTerm::Hole(i) => match &assign[*i - 1] {
            Some(t) => t == tgt,
            None => {
                assign[*i - 1] = Some(tgt.clone());
                true
            }
        },
        PlTerm::App(f, args) => match tgt {
            PlTerm::App(g, targs) if f == g && args.len() == targs.len() => {
                args.iter().zip(targs.iter()).all(|(a, b)| match_pl(a, b, assign))
            }
            _ => false,
        },
    }
}

fn collect_arrow_syms(a: &Arrow, out: &mut BTreeMap<String, usize>) {
    fn walk(t: &PlTerm, out: &mut BTreeMap<String, usize>) {
        if let PlTerm::App(f, args) = t {
            out.insert(f.clone(), args.len());
            for a in args {
                walk(a, out);
            }
        }
    }
    for c in &a.comps {
        if let Component::T(t) = c {
            walk(t, out);
        }
    }
}

/// All placeholder terms of depth at most `depth` over `syms` and `nvars`
/// placeholders.
pub fn enumerate_terms(syms: &BTreeMap<String, usize>, nvars: usize, depth: usize) -> Vec<PlTerm> {
    let mut by_depth: Vec<Vec<PlTerm>> = vec![(1..=nvars).map(PlTerm::Hole).collect()];
    for (f, &n) in syms {
        if n == 0 {
            by_depth[0].push(PlTerm::constant(f));
        }
    }
    for _ in 1..depth {
        let prev: Vec<PlTerm> = by_depth.iter().flatten().cloned().collect();
        let mut next = Vec::new();
        for (f, &n) in syms {
            if n == 0 {
                continue;
            }
            let mut idx = vec![0usize; n];
            if prev.is_empty() {
                continue;
            }
            loop {
                let args: Vec<PlTerm> = idx.iter().map(|&i| prev[i].clone()).collect();
                let t = PlTerm::App(f.clone(), args);
                if !by_depth.iter().flatten().any(|u| *u == t) {
                    next.push(t);
                }
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < prev.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        if next.is_empty() {
            break;
        }
        by_depth.push(next);
    }
    by_depth.into_iter().flatten().collect()
}


#[cfg(test)]
mod agreement_tests {
    use super::*;
    use crate::gen::{random_anti_instance, random_arrow, Rng};
    use crate::theory::{identity, tensor, Iface};

    /// Extend a cospan to a parallel pair over the disjoint union of the
    /// two placeholder supplies.
    fn parallel_pair(s_left: &Arrow, s_right: &Arrow) -> (Arrow, Arrow) {
        let left = {
            let mut a = s_left.clone();
            a.dom = Iface::terms(s_left.dom.len() + s_right.dom.len());
            a
        };
        let right = {
            let shifted = tensor(&identity(&s_left.dom), s_right);
            Arrow {
                dom: shifted.dom.clone(),
                cod: s_right.cod.clone(),
                comps: shifted.comps[s_left.dom.len()..].to_vec(),
            }
        };
        (left, right)
    }

    #[test]
    fn equalizer_and_pullback_agree_on_random_solvable_instances() {
        let mut rng = Rng::new(0xa9ee);
        let mut solved = 0;
        while solved < 200 {
            let z = 1 + rng.below(3);
            let dn = rng.below(3);
            let s_left = random_arrow(&mut rng, dn, z, 2);
            let du = rng.below(3);
            let mediator = random_arrow(&mut rng, du, dn, 2);
            let base = crate::theory::compose(&mediator, &s_left).unwrap();
            let s_right = random_anti_instance(&mut rng, &base);
            let Some(pb) = pullback_oracle(&s_left, &s_right) else { continue };
            solved += 1;
            // merging the projections equalizes the extended pair
            let (ext_left, ext_right) = parallel_pair(&s_left, &s_right);
            let merged = Arrow {
                dom: pb.apex.clone(),
                cod: Iface::terms(s_left.dom.len() + s_right.dom.len()),
                comps: pb
                    .proj_left
                    .comps
                    .iter()
                    .chain(pb.proj_right.comps.iter())
                    .cloned()
                    .collect(),
            };
            assert_eq!(
                compose(&merged, &ext_left).unwrap(),
                compose(&merged, &ext_right).unwrap(),
                "merged projections do not equalize"
            );
            // splitting the equalizer reproduces the projections up to an
            // invertible renaming of the apex
            let e = equalizer(&ext_left, &ext_right).expect("equalizer exists");
            let renaming =
                crate::tiles::factor_through(&merged, &e).expect("projections factor");
            assert!(renaming.as_permutation().is_some(), "apex renaming is invertible");
        }
    }
}
