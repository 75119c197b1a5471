//! Semantics recovered from refutation tiles — the least Herbrand model,
//! correct and computed answers, resolvents — and the goal equivalences
//! induced by traces, bounded bisimulation, and the three instantiation
//! closures.
//!
//! Everything here is an explicitly bounded approximation of an infinitary
//! definition; a verdict at a bound that could still flip reports itself as
//! inconclusive rather than guessing.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{
    canonical_answer, config_atoms, goal_config, herbrand_base, herbrand_terms, program_tiles,
    sld_refute, tile_refute, tile_step, Answer, AnswerSet, ResolutionMode,
};
use crate::syntax::{variables_of, Atom, Goal, Program, Term};
use crate::theory::{Arrow, Component, PlTerm, Substitution};
use crate::unify::enumerate_terms;

/// An enumeration of ground atoms up to a generation depth. It is a plain
/// listing, not a fixpoint object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HerbrandSet {
    pub atoms: BTreeSet<Atom>,
    pub depth: usize,
}

/// Outcome of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    /// A concrete separating witness, printable in goal syntax.
    Separated(String),
    /// The bound was hit before the comparison could be decided.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivReport {
    pub relation: String,
    pub verdict: Verdict,
    pub bounds: String,
}

impl EquivReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Equivalent => 0,
            Verdict::Separated(_) => 3,
            Verdict::Inconclusive => 1,
        }
    }
}

impl std::fmt::Display for EquivReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.verdict {
            Verdict::Equivalent => write!(f, "{}: equivalent ({})", self.relation, self.bounds),
            Verdict::Separated(w) => {
                write!(f, "{}: separated: {} ({})", self.relation, w, self.bounds)
            }
            Verdict::Inconclusive => {
                write!(f, "{}: inconclusive at bound ({})", self.relation, self.bounds)
            }
        }
    }
}

/// Ground atoms of bounded depth admitting a refutation tile: the bounded
/// cut of the least Herbrand model.
pub fn op1_least_herbrand(p: &Program, term_depth: usize, bound: usize) -> HerbrandSet {
    let mut atoms = BTreeSet::new();
    for atom in herbrand_base(&p.signature, term_depth) {
        let (_, set) = tile_refute(&Goal::single(atom.clone()), p, bound);
        if !set.answers.is_empty() {
            atoms.insert(atom);
        }
    }
    HerbrandSet { atoms, depth: term_depth }
}

/// Possibly non-ground atoms of bounded depth refutable without
/// instantiating their own variables: the bounded correct answers.
pub fn op2_correct_answers(p: &Program, term_depth: usize, bound: usize) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    for atom in bounded_atoms(p, term_depth) {
        let goal = Goal::single(atom.clone());
        let vars = variables_of(&goal);
        let (_, set) = tile_refute(&goal, p, bound);
        let identity_answer = canonical_answer(
            &{
                let mut s = Substitution::empty();
                for v in &vars {
                    s.bind(v, Term::Var(v.clone()));
                }
                s
            },
            &vars,
        );
        if set.answers.contains(&identity_answer) {
            out.insert(atom);
        }
    }
    out
}

/// All atoms (canonical variables `x1..`) over the signature with argument
/// depth at most `depth`.
pub fn bounded_atoms(p: &Program, depth: usize) -> Vec<Atom> {
    let mut out = Vec::new();
    for (pred, &n) in &p.signature.predicates {
        let names: Vec<String> = (1..=n.max(1)).map(|i| format!("x{i}")).collect();
        let universe = enumerate_terms(&p.signature.functions, n, depth);
        if n == 0 {
            out.push(Atom { pred: pred.clone(), args: vec![] });
            continue;
        }
        let mut pick = vec![0usize; n];
        let mut seen = BTreeSet::new();
        loop {
            let args: Vec<Term> = pick
                .iter()
                .map(|&i| crate::theory::plterm_to_term(&universe[i], &names))
                .collect();
            let atom = Atom { pred: pred.clone(), args };
            let canon = canonical_atom(&atom);
            if seen.insert(canon.clone()) {
                out.push(canon);
            }
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                pick[i] += 1;
                if pick[i] < universe.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    out
}

fn canonical_atom(a: &Atom) -> Atom {
    let goal = Goal::single(a.clone());
    let vars = variables_of(&goal);
    let mut rename = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        rename.insert(v.clone(), format!("x{}", i + 1));
    }
    fn walk(t: &Term, rename: &BTreeMap<String, String>) -> Term {
        match t {
            Term::Var(v) => Term::Var(rename[v].clone()),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|x| walk(x, rename)).collect())
            }
        }
    }
    Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| walk(t, &rename)).collect() }
}

/// Computed answers of the bare predicate: the instantiated heads of its
/// refutation tiles.
pub fn op3_computed_answers(
    p: &Program,
    pred: &str,
    bound: usize,
) -> Result<BTreeSet<Atom>, String> {
    let &arity =
        p.signature.predicates.get(pred).ok_or_else(|| format!("unknown predicate `{pred}`"))?;
    let goal = most_general_goal(pred, arity);
    let (_, set) = tile_refute(&goal, p, bound);
    Ok(set
        .answers
        .iter()
        .map(|Answer(bindings)| Atom {
            pred: pred.to_string(),
            args: bindings.iter().map(|(_, t)| t.clone()).collect(),
        })
        .map(|a| canonical_atom(&a))
        .collect())
}

fn most_general_goal(pred: &str, arity: usize) -> Goal {
    Goal::single(Atom {
        pred: pred.to_string(),
        args: (1..=arity).map(|i| Term::var(&format!("X{i}"))).collect(),
    })
}

/// Resolvent pairs of the bare predicate: every entailed tile from it, not
/// only refutations, read as an instantiated head and a residual goal.
pub fn op4_resolvents(
    p: &Program,
    pred: &str,
    bound: usize,
) -> Result<BTreeSet<(Atom, Goal)>, String> {
    let &arity =
        p.signature.predicates.get(pred).ok_or_else(|| format!("unknown predicate `{pred}`"))?;
    let goal = most_general_goal(pred, arity);
    let sys = program_tiles(p);
    let cfg = goal_config(&goal);
    let mut out = BTreeSet::new();
    // breadth-first over cumulative (effect, configuration) pairs
    let mut frontier: Vec<(Arrow, Arrow)> = vec![(crate::theory::identity(&cfg.dom), cfg.clone())];
    for _ in 0..=bound {
        let mut next = Vec::new();
        for (eff, current) in &frontier {
            out.insert(resolvent_pair(pred, eff, current));
            for step in tile_step(current, p, &sys, false) {
                let total = crate::theory::compose(&step.tile.effect, eff).unwrap();
                next.push((total, step.tile.final_.clone()));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(out)
}

fn resolvent_pair(pred: &str, eff: &Arrow, cfg: &Arrow) -> (Atom, Goal) {
    let names: Vec<String> = (1..=eff.dom.len()).map(|i| format!("x{i}")).collect();
    let head = Atom {
        pred: pred.to_string(),
        args: eff
            .comps
            .iter()
            .map(|c| {
                let Component::T(t) = c else { unreachable!() };
                crate::theory::plterm_to_term(t, &names)
            })
            .collect(),
    };
    let residual = Goal {
        atoms: config_atoms(cfg)
            .into_iter()
            .map(|(q, args)| Atom {
                pred: q,
                args: args.iter().map(|t| crate::theory::plterm_to_term(t, &names)).collect(),
            })
            .collect(),
    };
    canonical_resolvent(&head, &residual)
}

fn canonical_resolvent(head: &Atom, residual: &Goal) -> (Atom, Goal) {
    // rename variables by first occurrence across the pair
    let mut order = Vec::new();
    head.vars_into(&mut order);
    for a in &residual.atoms {
        a.vars_into(&mut order);
    }
    let mut rename = BTreeMap::new();
    for (i, v) in order.iter().enumerate() {
        rename.insert(v.clone(), format!("x{}", i + 1));
    }
    fn walk(t: &Term, rename: &BTreeMap<String, String>) -> Term {
        match t {
            Term::Var(v) => Term::Var(rename[v].clone()),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|x| walk(x, rename)).collect())
            }
        }
    }
    (
        Atom {
            pred: head.pred.clone(),
            args: head.args.iter().map(|t| walk(t, &rename)).collect(),
        },
        Goal {
            atoms: residual
                .atoms
                .iter()
                .map(|a| Atom {
                    pred: a.pred.clone(),
                    args: a.args.iter().map(|t| walk(t, &rename)).collect(),
                })
                .collect(),
        },
    )
}

// ---------------------------------------------------------------------------
// Goal equivalences

/// Same refutation-effect sets at the bound.
pub fn trace_equiv(g1: &Goal, g2: &Goal, p: &Program, bound: usize) -> EquivReport {
    let (_, s1) = tile_refute(g1, p, bound);
    let (_, s2) = tile_refute(g2, p, bound);
    let relation = "trace".to_string();
    let bounds = format!("derivation bound {bound}");
    compare_answer_sets(&s1, &s2, relation, bounds)
}

fn compare_answer_sets(
    s1: &AnswerSet,
    s2: &AnswerSet,
    relation: String,
    bounds: String,
) -> EquivReport {
    // Goals are compared up to the naming of their variables: project each
    // answer onto its binding values, in goal-variable order.
    let values = |a: &Answer| -> Vec<Term> { a.0.iter().map(|(_, t)| t.clone()).collect() };
    let m1: BTreeMap<Vec<Term>, &Answer> = s1.answers.iter().map(|a| (values(a), a)).collect();
    let m2: BTreeMap<Vec<Term>, &Answer> = s2.answers.iter().map(|a| (values(a), a)).collect();
    let d12: Vec<&&Answer> = m1.iter().filter(|(k, _)| !m2.contains_key(*k)).map(|(_, v)| v).collect();
    let d21: Vec<&&Answer> = m2.iter().filter(|(k, _)| !m1.contains_key(*k)).map(|(_, v)| v).collect();
    // A missing answer separates definitively only when the side lacking it
    // is complete (answer sets grow monotonically with the bound).
    let verdict = if d12.is_empty() && d21.is_empty() {
        if s1.truncated || s2.truncated {
            Verdict::Inconclusive
        } else {
            Verdict::Equivalent
        }
    } else if let (Some(w), false) = (d12.first(), s2.truncated) {
        Verdict::Separated(format!("[{w}]"))
    } else if let (Some(w), false) = (d21.first(), s1.truncated) {
        Verdict::Separated(format!("[{w}]"))
    } else {
        Verdict::Inconclusive
    };
    EquivReport { relation, verdict, bounds }
}

/// Bounded step bisimulation on configurations, labels being the canonical
/// step effects, computed by partition refinement on the state space
/// reachable within `k` steps.
pub fn bisim_equiv(g1: &Goal, g2: &Goal, p: &Program, k: usize) -> EquivReport {
    const STATE_LIMIT: usize = 4000;
    let sys = program_tiles(p);
    let relation = format!("bisim-{k}");
    let bounds = format!("k = {k}");
    if k == 0 {
        return EquivReport { relation, verdict: Verdict::Equivalent, bounds };
    }
    // collect states reachable within k steps from both configurations
    let c1 = canon_config(&goal_config(g1));
    let c2 = canon_config(&goal_config(g2));
    let mut states: Vec<Arrow> = Vec::new();
    let mut index: BTreeMap<Arrow, usize> = BTreeMap::new();
    let mut edges: Vec<Vec<(String, usize)>> = Vec::new();
    let mut frontier = vec![c1.clone(), c2.clone()];
    for s in &frontier {
        index.insert(s.clone(), states.len());
        states.push(s.clone());
        edges.push(Vec::new());
    }
    for _ in 0..k {
        let mut next_frontier = Vec::new();
        for cfg in frontier.drain(..) {
            let from = index[&cfg];
            if !edges[from].is_empty() {
                continue;
            }
            for step in tile_step(&cfg, p, &sys, false) {
                if states.len() > STATE_LIMIT {
                    return EquivReport { relation, verdict: Verdict::Inconclusive, bounds };
                }
                let label = canon_effect(&step.tile.effect).to_string();
                let target = canon_config(&step.tile.final_);
                let to = *index.entry(target.clone()).or_insert_with(|| {
                    states.push(target.clone());
                    edges.push(Vec::new());
                    next_frontier.push(target.clone());
                    states.len() - 1
                });
                edges[from].push((label, to));
            }
        }
        frontier = next_frontier;
    }
    // k rounds of partition refinement
    let mut class: Vec<usize> = states.iter().map(|_| 0).collect();
    for _ in 0..k {
        let mut signatures: BTreeMap<(usize, BTreeSet<(String, usize)>), usize> = BTreeMap::new();
        let mut next: Vec<usize> = Vec::with_capacity(states.len());
        for (i, _) in states.iter().enumerate() {
            let sig: BTreeSet<(String, usize)> =
                edges[i].iter().map(|(l, t)| (l.clone(), class[*t])).collect();
            let key = (class[i], sig);
            let fresh = signatures.len();
            let id = *signatures.entry(key).or_insert(fresh);
            next.push(id);
        }
        if next == class {
            break;
        }
        class = next;
    }
    let verdict = if class[index[&c1]] == class[index[&c2]] {
        Verdict::Equivalent
    } else {
        // exhibit a distinguishing label
        let l1: BTreeSet<&String> = edges[index[&c1]].iter().map(|(l, _)| l).collect();
        let l2: BTreeSet<&String> = edges[index[&c2]].iter().map(|(l, _)| l).collect();
        let w = l1
            .symmetric_difference(&l2)
            .next()
            .map(|s| s.to_string())
            .unwrap_or_else(|| "differs below the first step".to_string());
        Verdict::Separated(w)
    };
    EquivReport { relation, verdict, bounds }
}

/// Canonical form of a configuration: drop unused placeholders and renumber
/// by first use.
fn canon_config(cfg: &Arrow) -> Arrow {
    let atoms = config_atoms(cfg);
    let mut order: Vec<usize> = Vec::new();
    for (_, args) in &atoms {
        for t in args {
            let mut holes = Vec::new();
            t.holes_into(&mut holes);
            for h in holes {
                if !order.contains(&h) {
                    order.push(h);
                }
            }
        }
    }
    let map: BTreeMap<usize, usize> =
        order.iter().enumerate().map(|(i, &h)| (h, i + 1)).collect();
    fn walk(t: &PlTerm, map: &BTreeMap<usize, usize>) -> PlTerm {
        match t {
            PlTerm::Hole(i) => PlTerm::Hole(map[i]),
            PlTerm::App(f, args) => {
                PlTerm::App(f.clone(), args.iter().map(|a| walk(a, map)).collect())
            }
        }
    }
    let goal = Goal {
        atoms: atoms
            .iter()
            .map(|(pr, args)| Atom {
                pred: pr.clone(),
                args: args
                    .iter()
                    .map(|t| crate::theory::plterm_to_term(&walk(t, &map), &names_for(order.len())))
                    .collect(),
            })
            .collect(),
    };
    goal_config(&goal)
}

fn names_for(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Canonical printable form of an effect arrow (apex renumbered by first
/// use).
fn canon_effect(eff: &Arrow) -> String {
    let mut order: Vec<usize> = Vec::new();
    for c in &eff.comps {
        let Component::T(t) = c else { continue };
        let mut holes = Vec::new();
        t.holes_into(&mut holes);
        for h in holes {
            if !order.contains(&h) {
                order.push(h);
            }
        }
    }
    let map: BTreeMap<usize, usize> =
        order.iter().enumerate().map(|(i, &h)| (h, i + 1)).collect();
    let mut parts = Vec::new();
    for c in &eff.comps {
        let Component::T(t) = c else { continue };
        fn walk(t: &PlTerm, map: &BTreeMap<usize, usize>) -> PlTerm {
            match t {
                PlTerm::Hole(i) => PlTerm::Hole(map[i]),
                PlTerm::App(f, args) => {
                    PlTerm::App(f.clone(), args.iter().map(|a| walk(a, map)).collect())
                }
            }
        }
        parts.push(walk(t, &map).to_string());
    }
    format!("<{}>", parts.join(","))
}

/// Which instantiation closure a comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureRelation {
    /// Ground instantiation: same refutability of every ground instance.
    GroundInstances,
    /// Any-instance rule: same bounded instance-closed answer sets.
    AnyInstance,
    /// The computed-answer equivalence (same as trace equivalence).
    ComputedAnswers,
}

/// Compare two goals under one of the three instantiation closures.
pub fn closure_equiv(
    g1: &Goal,
    g2: &Goal,
    p: &Program,
    relation: ClosureRelation,
    term_depth: usize,
    bound: usize,
) -> EquivReport {
    match relation {
        ClosureRelation::ComputedAnswers => {
            let mut r = trace_equiv(g1, g2, p, bound);
            r.relation = "~3".into();
            r
        }
        ClosureRelation::GroundInstances => {
            let bounds = format!("term depth {term_depth}, derivation bound {bound}");
            let mut vars = variables_of(g1);
            for v in variables_of(g2) {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            let universe = herbrand_terms(&p.signature, term_depth);
            let mut truncated = false;
            let mut pick = vec![0usize; vars.len()];
            loop {
                let mut sigma = Substitution::empty();
                for (i, v) in vars.iter().enumerate() {
                    sigma.bind(v, universe[pick[i]].clone());
                }
                let i1 = sigma.apply_goal(g1);
                let i2 = sigma.apply_goal(g2);
                let s1 = sld_refute(&i1, p, ResolutionMode::Mgu, bound, 0);
                let s2 = sld_refute(&i2, p, ResolutionMode::Mgu, bound, 0);
                truncated |= s1.truncated || s2.truncated;
                if s1.answers.is_empty() != s2.answers.is_empty() {
                    let refutable = if s1.answers.is_empty() { s2.truncated } else { s1.truncated };
                    if !refutable {
                        return EquivReport {
                            relation: "~1".into(),
                            verdict: Verdict::Separated(format!("[{sigma}]")),
                            bounds,
                        };
                    }
                    truncated = true;
                }
                let mut i = 0;
                loop {
                    if i == vars.len() || vars.is_empty() {
                        let verdict =
                            if truncated { Verdict::Inconclusive } else { Verdict::Equivalent };
                        return EquivReport { relation: "~1".into(), verdict, bounds };
                    }
                    pick[i] += 1;
                    if pick[i] < universe.len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
            }
        }
        ClosureRelation::AnyInstance => {
            let bounds = format!("instance depth {term_depth}, derivation bound {bound}");
            let s1 = sld_refute(g1, p, ResolutionMode::AnyInstance, bound, term_depth);
            let s2 = sld_refute(g2, p, ResolutionMode::AnyInstance, bound, term_depth);
            compare_answer_sets(&s1, &s2, "~2".into(), bounds)
        }
    }
}

/// For a pair already trace-equivalent at the bound, probe the congruence
/// properties: conjunction with a context goal and instantiation.
///
/// The substitution and the context goal address variables by name, so the
/// probe is meaningful when the two goals share their variable profile
/// (rename one side positionally first if they do not).
pub fn congruence_probe(
    g1: &Goal,
    g2: &Goal,
    p: &Program,
    ctx: &Goal,
    sigma: &Substitution,
    bound: usize,
) -> Result<(), String> {
    let base = trace_equiv(g1, g2, p, bound);
    if !matches!(base.verdict, Verdict::Equivalent) {
        return Err(format!("precondition failed: {base}"));
    }
    let conj = trace_equiv(&g1.conj(ctx), &g2.conj(ctx), p, bound);
    if matches!(conj.verdict, Verdict::Separated(_)) {
        return Err(format!("conjunction broke the equivalence: {conj}"));
    }
    let inst = trace_equiv(&sigma.apply_goal(g1), &sigma.apply_goal(g2), p, bound);
    if matches!(inst.verdict, Verdict::Separated(_)) {
        return Err(format!("instantiation broke the equivalence: {inst}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_goal, parse_program};

    const WORKED_EXAMPLE: &str = "p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(b).";
    const WORKED_EXAMPLE_PRIME: &str = "p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(a).";
    const SEPARATION_PROGRAM: &str = "p(X). p(a). q(X).";
    const SUM_PROGRAM: &str = "sum(0,X1,X1).\nsum(s(X1),X2,s(X3)) :- sum(X1,X2,X3).";

    fn atoms_of(s: &BTreeSet<Atom>) -> Vec<String> {
        s.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn op1_on_the_worked_examples() {
        let p = parse_program(WORKED_EXAMPLE).unwrap();
        let h = op1_least_herbrand(&p, 2, 6);
        assert_eq!(atoms_of(&h.atoms), vec!["q(b)", "r(a,a)"]);
        let p = parse_program(WORKED_EXAMPLE_PRIME).unwrap();
        let h = op1_least_herbrand(&p, 2, 6);
        assert_eq!(atoms_of(&h.atoms), vec!["p(f(a),a)", "q(a)", "r(a,a)"]);
        let empty = parse_program("").unwrap();
        assert!(op1_least_herbrand(&empty, 2, 4).atoms.is_empty());
    }

    #[test]
    fn op2_examples() {
        let p = parse_program("q(X).").unwrap();
        let o2 = op2_correct_answers(&p, 1, 3);
        assert!(o2.iter().any(|a| a.to_string() == "q(x1)"));

        let p = parse_program(WORKED_EXAMPLE_PRIME).unwrap();
        let o2 = op2_correct_answers(&p, 2, 6);
        assert!(o2.iter().any(|a| a.to_string() == "p(f(a),a)"));
        assert!(!o2.iter().any(|a| a.to_string() == "p(f(x1),x2)"));

        let p = parse_program(SEPARATION_PROGRAM).unwrap();
        let o2 = op2_correct_answers(&p, 1, 3);
        assert!(o2.iter().any(|a| a.to_string() == "p(a)"));
    }

    #[test]
    fn op3_separation_example() {
        let p = parse_program(SEPARATION_PROGRAM).unwrap();
        let o3p = op3_computed_answers(&p, "p", 3).unwrap();
        assert_eq!(atoms_of(&o3p), vec!["p(x1)", "p(a)"]);
        let o3q = op3_computed_answers(&p, "q", 3).unwrap();
        assert_eq!(atoms_of(&o3q), vec!["q(x1)"]);
        let p = parse_program(WORKED_EXAMPLE_PRIME).unwrap();
        let o3 = op3_computed_answers(&p, "p", 6).unwrap();
        assert_eq!(atoms_of(&o3), vec!["p(f(a),a)"]);
        assert!(op3_computed_answers(&p, "nosuch", 3).is_err());
    }

    #[test]
    fn op4_resolvents_examples() {
        let p = parse_program(WORKED_EXAMPLE).unwrap();
        let o4 = op4_resolvents(&p, "p", 1).unwrap();
        let printed: BTreeSet<String> =
            o4.iter().map(|(a, g)| format!("{a} / {g}")).collect();
        assert!(printed.contains("p(x1,x2) / p(x1,x2)"));
        assert!(printed.contains("p(f(x1),x2) / q(x1), r(x1,x2)"));
        let o4q = op4_resolvents(&p, "q", 1).unwrap();
        let printed: BTreeSet<String> =
            o4q.iter().map(|(a, g)| format!("{a} / {g}")).collect();
        assert!(printed.contains("q(x1) / q(x1)"));
        assert!(printed.contains("q(b) / true"));
        // bound zero: only the identity resolvent
        let o40 = op4_resolvents(&p, "p", 0).unwrap();
        assert_eq!(o40.len(), 1);
    }

    #[test]
    fn trace_equiv_separates_the_closure_example() {
        let p = parse_program(SEPARATION_PROGRAM).unwrap();
        let px = parse_goal("?- p(X).").unwrap();
        let qx = parse_goal("?- q(X).").unwrap();
        let r = trace_equiv(&px, &qx, &p, 4);
        match r.verdict {
            Verdict::Separated(w) => assert!(w.contains("a"), "witness {w}"),
            v => panic!("expected separation, got {v:?}"),
        }
        // a goal is trace-equivalent to itself
        let r = trace_equiv(&px, &px, &p, 4);
        assert_eq!(r.verdict, Verdict::Equivalent);
        // alpha-renamed goals are equivalent
        let qy = parse_goal("?- q(Y).").unwrap();
        let r = trace_equiv(&qx, &qy, &p, 4);
        assert_eq!(r.verdict, Verdict::Equivalent);
    }

    #[test]
    fn ground_closure_equates_the_example() {
        let p = parse_program(SEPARATION_PROGRAM).unwrap();
        let px = parse_goal("?- p(X).").unwrap();
        let qx = parse_goal("?- q(X).").unwrap();
        let r = closure_equiv(&px, &qx, &p, ClosureRelation::GroundInstances, 2, 4);
        assert_eq!(r.verdict, Verdict::Equivalent, "{r}");
        let r3 = closure_equiv(&px, &qx, &p, ClosureRelation::ComputedAnswers, 2, 4);
        assert!(matches!(r3.verdict, Verdict::Separated(_)));
        // reflexivity for every relation
        for rel in [
            ClosureRelation::GroundInstances,
            ClosureRelation::AnyInstance,
            ClosureRelation::ComputedAnswers,
        ] {
            let r = closure_equiv(&px, &px, &p, rel, 1, 3);
            assert!(
                matches!(r.verdict, Verdict::Equivalent),
                "reflexivity under {rel:?}: {r}"
            );
        }
    }

    #[test]
    fn any_instance_closure_separates_too() {
        // p admits the extra instantiating refutation, so the bounded
        // any-instance answer sets also differ on the identity answer side
        let p = parse_program(SEPARATION_PROGRAM).unwrap();
        let px = parse_goal("?- p(X).").unwrap();
        let qx = parse_goal("?- q(X).").unwrap();
        let r = closure_equiv(&px, &qx, &p, ClosureRelation::AnyInstance, 1, 3);
        // both sides instance-close the identity answer to the same set
        assert_eq!(r.verdict, Verdict::Equivalent, "{r}");
    }

    #[test]
    fn bisim_bounds() {
        let p = parse_program(SEPARATION_PROGRAM).unwrap();
        let px = parse_goal("?- p(X).").unwrap();
        let qx = parse_goal("?- q(X).").unwrap();
        let r0 = bisim_equiv(&px, &qx, &p, 0);
        assert_eq!(r0.verdict, Verdict::Equivalent);
        let r1 = bisim_equiv(&px, &qx, &p, 1);
        assert!(matches!(r1.verdict, Verdict::Separated(_)), "{r1}");
        // duplicating a clause adds no new behaviour
        let p2 = parse_program("p(X). p(a). q(X). q(X).").unwrap();
        for k in 0..=4 {
            let r = bisim_equiv(&qx, &parse_goal("?- q(Z).").unwrap(), &p2, k);
            assert_eq!(r.verdict, Verdict::Equivalent);
        }
    }

    #[test]
    fn bisim_refines_with_k() {
        // states distinguishable only after two steps
        let p = parse_program("p(X) :- r(X). q(X) :- s(X). r(a). s(b).").unwrap();
        let pg = parse_goal("?- p(X).").unwrap();
        let qg = parse_goal("?- q(X).").unwrap();
        let r1 = bisim_equiv(&pg, &qg, &p, 1);
        assert_eq!(r1.verdict, Verdict::Equivalent, "{r1}");
        let r2 = bisim_equiv(&pg, &qg, &p, 2);
        assert!(matches!(r2.verdict, Verdict::Separated(_)), "{r2}");
    }

    #[test]
    fn congruence_probe_passes_on_equivalent_pairs() {
        let p = parse_program(SEPARATION_PROGRAM).unwrap();
        let pa = parse_goal("?- p(a).").unwrap();
        let ctx = parse_goal("?- q(Y).").unwrap();
        let sigma = Substitution::empty();
        congruence_probe(&pa, &pa, &p, &ctx, &sigma, 4).unwrap();
        // precondition failure is reported
        let px = parse_goal("?- p(X).").unwrap();
        let qx = parse_goal("?- q(X).").unwrap();
        assert!(congruence_probe(&px, &qx, &p, &ctx, &sigma, 4).is_err());
    }

    #[test]
    fn op_inclusion_chain_on_sum() {
        let p = parse_program(SUM_PROGRAM).unwrap();
        let o1 = op1_least_herbrand(&p, 3, 6);
        // spot checks from the bounded model
        for want in ["sum(0,0,0)", "sum(0,s(0),s(0))", "sum(s(0),0,s(0))"] {
            assert!(o1.atoms.iter().any(|a| a.to_string() == want), "missing {want}");
        }
        assert!(!o1.atoms.iter().any(|a| a.to_string() == "sum(s(0),s(0),s(0))"));
        // ground members of op2 lie in op1
        let o2 = op2_correct_answers(&p, 2, 6);
        for a in o2.iter().filter(|a| a.is_ground()) {
            assert!(o1.atoms.contains(a) || a.args.iter().any(|t| t.depth() > 3));
        }
        // op3 restricted to ground coincides with op1 members of that
        // predicate at matching depth
        let o3 = op3_computed_answers(&p, "sum", 6).unwrap();
        for a in o3.iter().filter(|a| a.is_ground()) {
            if a.args.iter().all(|t| t.depth() <= 3) {
                assert!(o1.atoms.contains(a), "op3 ground answer {a} missing from op1");
            }
        }
    }
}



#[cfg(test)]
mod verdict_tests {
    use super::*;
    use crate::syntax::{parse_goal, parse_program};

    #[test]
    fn separation_through_the_complete_side_is_definitive() {
        // p's answers are complete; q diverges but already produced an
        // answer p can never match
        let p = parse_program("p(b). q(c). q(X) :- q(X).").unwrap();
        let g1 = parse_goal("?- p(X).").unwrap();
        let g2 = parse_goal("?- q(X).").unwrap();
        let r = trace_equiv(&g1, &g2, &p, 4);
        assert!(matches!(&r.verdict, Verdict::Separated(w) if w.contains('c')), "{r}");
    }

    #[test]
    fn missing_answers_on_a_truncated_side_stay_inconclusive() {
        let p = parse_program("p(b). q(X) :- q(X).").unwrap();
        let g1 = parse_goal("?- p(X).").unwrap();
        let g2 = parse_goal("?- q(X).").unwrap();
        let r = trace_equiv(&g1, &g2, &p, 4);
        assert_eq!(r.verdict, Verdict::Inconclusive, "{r}");
    }
}
