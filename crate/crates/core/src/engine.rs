//! Resolution proper: classical SLD (small and big step), the translation
//! of programs into tile systems, tile-based refutation, and the harness
//! that cross-validates the two engines.

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{
    rename_clause, variables_of, Atom, Clause, FreshSource, Goal, Program, Signature, Term,
};
use crate::theory::{
    identity, plterm_to_term, tensor, Arrow, Component, Iface, PItem, PlTerm, Sort, Substitution,
};
use crate::tiles::{
    basic_tiles, eval_proof, factor_through, hcomp, hid, lift_r, synthesize_pullback, vcomp, vid,
    ProofTerm, Tile, TileSystem,
};
use crate::unify::{enumerate_terms, unify_atoms};

/// Which instantiation discipline the resolution rule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionMode {
    /// Only ground instances of clauses, applied to ground goals.
    Ground,
    /// Any instance of the clause (bounded enumeration).
    AnyInstance,
    /// The standard rule: most general unifier with a renamed head.
    Mgu,
}

/// One SLD derivation: the visited goals with the clause and unifier used
/// at each step.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
    pub final_goal: Goal,
    /// Composition of the step substitutions restricted to the initial
    /// goal's variables.
    pub answer: Substitution,
}

#[derive(Debug, Clone)]
pub struct DerivationStep {
    pub goal: Goal,
    pub clause: String,
    pub unifier: Substitution,
    pub resolvent: Goal,
}

/// An answer substitution in canonical form: bindings in goal-variable
/// order, residual free variables renamed `_F1, _F2, ...` by first
/// occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Answer(pub Vec<(String, Term)>);

impl std::fmt::Display for Answer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (v, t) in &self.0 {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{v} = {t}")?;
        }
        if first {
            write!(f, "true")?;
        }
        Ok(())
    }
}

/// The set of computed answers a search found, with a truncation flag: when
/// `truncated` is set, branches were still open at the bound and the set is
/// a lower approximation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnswerSet {
    pub answers: BTreeSet<Answer>,
    pub truncated: bool,
}

impl AnswerSet {
    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

/// Canonicalize a substitution on the given goal variables.
pub fn canonical_answer(s: &Substitution, goal_vars: &[String]) -> Answer {
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    let mut next = 0usize;
    let mut out = Vec::with_capacity(goal_vars.len());
    for v in goal_vars {
        let img = s.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone()));
        out.push((v.clone(), canon_term(&img, &mut rename, &mut next)));
    }
    Answer(out)
}

fn canon_term(t: &Term, rename: &mut BTreeMap<String, String>, next: &mut usize) -> Term {
    match t {
        Term::Var(v) => {
            let name = rename.entry(v.clone()).or_insert_with(|| {
                *next += 1;
                format!("_F{next}")
            });
            Term::Var(name.clone())
        }
        Term::App(f, args) => {
            Term::App(f.clone(), args.iter().map(|a| canon_term(a, rename, next)).collect())
        }
    }
}

// ---------------------------------------------------------------------------
// Classical SLD

/// All one-step resolvents of the leftmost atom under the given mode.
pub fn sld_step(
    g: &Goal,
    p: &Program,
    mode: ResolutionMode,
    fresh: &mut FreshSource,
    instance_depth: usize,
) -> Vec<(Goal, Substitution, String)> {
    let Some(selected) = g.atoms.first() else {
        return Vec::new();
    };
    let rest: Vec<Atom> = g.atoms[1..].to_vec();
    let mut out = Vec::new();
    for clause in &p.clauses {
        if clause.head.pred != selected.pred || clause.head.args.len() != selected.args.len() {
            continue;
        }
        match mode {
            ResolutionMode::Mgu => {
                let renamed = rename_clause(clause, fresh);
                if let Some(sigma) = unify_atoms(selected, &renamed.head) {
                    let mut atoms: Vec<Atom> =
                        renamed.body.atoms.iter().map(|a| sigma.apply_atom(a)).collect();
                    atoms.extend(rest.iter().map(|a| sigma.apply_atom(a)));
                    out.push((Goal { atoms }, sigma, clause.id.clone()));
                }
            }
            ResolutionMode::Ground => {
                if !selected.is_ground() {
                    continue;
                }
                for sigma in ground_clause_matches(clause, selected, &p.signature, instance_depth)
                {
                    let mut atoms: Vec<Atom> =
                        clause.body.atoms.iter().map(|a| sigma.apply_atom(a)).collect();
                    atoms.extend(rest.iter().cloned());
                    out.push((Goal { atoms }, Substitution::empty(), clause.id.clone()));
                }
            }
            ResolutionMode::AnyInstance => {
                let renamed = rename_clause(clause, fresh);
                if let Some(sigma) = unify_atoms(selected, &renamed.head) {
                    let base_atoms: Vec<Atom> = renamed
                        .body
                        .atoms
                        .iter()
                        .chain(rest.iter())
                        .map(|a| sigma.apply_atom(a))
                        .collect();
                    let mut vars = Vec::new();
                    for v in &sigma.order {
                        sigma.map[v].vars_into(&mut vars);
                    }
                    for a in &base_atoms {
                        a.vars_into(&mut vars);
                    }
                    for delta in bounded_instances(&vars, &p.signature, instance_depth) {
                        let atoms = base_atoms.iter().map(|a| delta.apply_atom(a)).collect();
                        out.push((Goal { atoms }, sigma.then(&delta), clause.id.clone()));
                    }
                }
            }
        }
    }
    out
}

/// Ground instantiations of a clause whose head equals the (ground) atom,
/// with body-only variables enumerated over the Herbrand universe.
fn ground_clause_matches(
    clause: &Clause,
    atom: &Atom,
    sig: &Signature,
    depth: usize,
) -> Vec<Substitution> {
    let mut assign: BTreeMap<String, Term> = BTreeMap::new();
    if !clause
        .head
        .args
        .iter()
        .zip(atom.args.iter())
        .all(|(pat, t)| match_term(pat, t, &mut assign))
    {
        return Vec::new();
    }
    let vars = clause.variables();
    let unbound: Vec<String> = vars.into_iter().filter(|v| !assign.contains_key(v)).collect();
    let universe = herbrand_terms(sig, depth);
    if !unbound.is_empty() && universe.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut pick = vec![0usize; unbound.len()];
    loop {
        let mut s = Substitution::empty();
        for (v, t) in &assign {
            s.bind(v, t.clone());
        }
        for (i, v) in unbound.iter().enumerate() {
            s.bind(v, universe[pick[i]].clone());
        }
        out.push(s);
        let mut i = 0;
        loop {
            if i == unbound.len() {
                return out;
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

fn match_term(pat: &Term, tgt: &Term, assign: &mut BTreeMap<String, Term>) -> bool {
    match pat {
        Term::Var(v) => match assign.get(v) {
            Some(t) => t == tgt,
            None => {
                assign.insert(v.clone(), tgt.clone());
                true
            }
        },
        Term::App(f, args) => match tgt {
            Term::App(g, targs) if f == g && args.len() == targs.len() => {
                args.iter().zip(targs.iter()).all(|(a, b)| match_term(a, b, assign))
            }
            _ => false,
        },
    }
}

/// All ground terms over the signature up to the depth bound.
pub fn herbrand_terms(sig: &Signature, depth: usize) -> Vec<Term> {
    enumerate_terms(&sig.functions, 0, depth)
        .into_iter()
        .map(|t| plterm_to_term(&t, &[]))
        .collect()
}

/// All ground atoms over the signature with argument depth at most `depth`.
pub fn herbrand_base(sig: &Signature, depth: usize) -> Vec<Atom> {
    let universe = herbrand_terms(sig, depth);
    let mut out = Vec::new();
    for (p, &n) in &sig.predicates {
        if n == 0 {
            out.push(Atom { pred: p.clone(), args: vec![] });
            continue;
        }
        if universe.is_empty() {
            continue;
        }
        let mut pick = vec![0usize; n];
        loop {
            out.push(Atom {
                pred: p.clone(),
                args: pick.iter().map(|&i| universe[i].clone()).collect(),
            });
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

/// Substitutions mapping each variable either to itself or to a ground term
/// of bounded depth (the bounded stand-in for "any instance").
fn bounded_instances(vars: &[String], sig: &Signature, depth: usize) -> Vec<Substitution> {
    let mut unique: Vec<String> = Vec::new();
    for v in vars {
        if !unique.contains(v) {
            unique.push(v.clone());
        }
    }
    let mut choices: Vec<Option<Term>> =
        herbrand_terms(sig, depth).into_iter().map(Some).collect();
    choices.insert(0, None);
    let mut out = Vec::new();
    let mut pick = vec![0usize; unique.len()];
    loop {
        let mut s = Substitution::empty();
        for (i, v) in unique.iter().enumerate() {
            if let Some(t) = &choices[pick[i]] {
                s.bind(v, t.clone());
            }
        }
        out.push(s);
        let mut i = 0;
        loop {
            if i == unique.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < choices.len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// All computed answer substitutions reachable within the step bound,
/// restricted to the goal's variables and canonically renamed.
pub fn sld_refute(
    g: &Goal,
    p: &Program,
    mode: ResolutionMode,
    bound: usize,
    instance_depth: usize,
) -> AnswerSet {
    let goal_vars = variables_of(g);
    let mut set = AnswerSet::default();
    let mut fresh = FreshSource::new();
    let mut accum = Substitution::empty();
    for v in &goal_vars {
        accum.bind(v, Term::Var(v.clone()));
    }
    search(g, p, mode, bound, instance_depth, &accum, &goal_vars, &mut fresh, &mut set);
    set
}

#[allow(clippy::too_many_arguments)]
fn search(
    g: &Goal,
    p: &Program,
    mode: ResolutionMode,
    remaining: usize,
    instance_depth: usize,
    accum: &Substitution,
    goal_vars: &[String],
    fresh: &mut FreshSource,
    set: &mut AnswerSet,
) {
    if g.is_empty() {
        set.answers.insert(canonical_answer(accum, goal_vars));
        return;
    }
    if remaining == 0 {
        if !sld_step(g, p, mode, fresh, instance_depth).is_empty() {
            set.truncated = true;
        }
        return;
    }
    for (resolvent, sigma, _) in sld_step(g, p, mode, fresh, instance_depth) {
        let next = accum.then(&sigma);
        search(&resolvent, p, mode, remaining - 1, instance_depth, &next, goal_vars, fresh, set);
    }
}

/// Successful derivations with step records, for trace output.
pub fn sld_derivations(g: &Goal, p: &Program, bound: usize) -> Vec<Derivation> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        g: &Goal,
        p: &Program,
        remaining: usize,
        steps: &mut Vec<DerivationStep>,
        accum: &Substitution,
        goal_vars: &[String],
        fresh: &mut FreshSource,
        out: &mut Vec<Derivation>,
    ) {
        if g.is_empty() {
            out.push(Derivation {
                steps: steps.clone(),
                final_goal: g.clone(),
                answer: accum.restrict(goal_vars),
            });
            return;
        }
        if remaining == 0 {
            return;
        }
        for (resolvent, sigma, clause) in sld_step(g, p, ResolutionMode::Mgu, fresh, 0) {
            steps.push(DerivationStep {
                goal: g.clone(),
                clause,
                unifier: sigma.clone(),
                resolvent: resolvent.clone(),
            });
            let next = accum.then(&sigma);
            go(&resolvent, p, remaining - 1, steps, &next, goal_vars, fresh, out);
            steps.pop();
        }
    }
    let goal_vars = variables_of(g);
    let mut out = Vec::new();
    let mut fresh = FreshSource::new();
    let mut accum = Substitution::empty();
    for v in &goal_vars {
        accum.bind(v, Term::Var(v.clone()));
    }
    go(g, p, bound, &mut Vec::new(), &accum, &goal_vars, &mut fresh, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Programs as tile systems

/// The bare predicate arrow `p : t^k -> p`.
pub fn pred_arrow(pred: &str, k: usize) -> Arrow {
    Arrow {
        dom: Iface::terms(k),
        cod: Iface(vec![Sort::P]),
        comps: vec![Component::P(vec![PItem::Atom(
            pred.to_string(),
            (1..=k).map(PlTerm::Hole).collect(),
        )])],
    }
}

/// Translate a clause into its basic tile: the bare head predicate rewrites
/// to the body, the head's argument tuple moving to the effect.
pub fn clause_tile(c: &Clause, _sig: &Signature) -> Tile {
    let vars = c.variables();
    let n = vars.len();
    let k = c.head.args.len();
    let index: BTreeMap<&str, usize> =
        vars.iter().enumerate().map(|(i, v)| (v.as_str(), i + 1)).collect();
    let effect = Arrow {
        dom: Iface::terms(n),
        cod: Iface::terms(k),
        comps: c.head.args.iter().map(|t| Component::T(term_to_pl(t, &index))).collect(),
    };
    let final_ = Arrow {
        dom: Iface::terms(n),
        cod: Iface(vec![Sort::P]),
        comps: vec![Component::P(
            c.body
                .atoms
                .iter()
                .map(|a| {
                    PItem::Atom(
                        a.pred.clone(),
                        a.args.iter().map(|t| term_to_pl(t, &index)).collect(),
                    )
                })
                .collect(),
        )],
    };
    let initial = pred_arrow(&c.head.pred, k);
    let trigger = identity(&Iface(vec![Sort::P]));
    Tile::new(initial, trigger, effect, final_)
}

fn term_to_pl(t: &Term, index: &BTreeMap<&str, usize>) -> PlTerm {
    match t {
        Term::Var(v) => PlTerm::Hole(index[v.as_str()]),
        Term::App(f, args) => {
            PlTerm::App(f.clone(), args.iter().map(|a| term_to_pl(a, index)).collect())
        }
    }
}

pub fn tile_name(clause_id: &str) -> String {
    format!("T({clause_id})")
}

/// The tile system of a program: one tile per clause plus the pullback
/// basis of its signature.
pub fn program_tiles(p: &Program) -> TileSystem {
    let mut sys = basic_tiles(&p.signature);
    for c in &p.clauses {
        sys.insert(&tile_name(&c.id), clause_tile(c, &p.signature));
    }
    sys
}

/// A goal as a configuration: the arrow `t^k -> p` listing the goal's atoms
/// over its variables in first-occurrence order.
pub fn goal_config(g: &Goal) -> Arrow {
    let vars = variables_of(g);
    let index: BTreeMap<&str, usize> =
        vars.iter().enumerate().map(|(i, v)| (v.as_str(), i + 1)).collect();
    Arrow {
        dom: Iface::terms(vars.len()),
        cod: Iface(vec![Sort::P]),
        comps: vec![Component::P(
            g.atoms
                .iter()
                .map(|a| {
                    PItem::Atom(
                        a.pred.clone(),
                        a.args.iter().map(|t| term_to_pl(t, &index)).collect(),
                    )
                })
                .collect(),
        )],
    }
}

/// The atoms of a configuration (predicate and argument terms).
pub fn config_atoms(cfg: &Arrow) -> Vec<(String, Vec<PlTerm>)> {
    let Component::P(items) = &cfg.comps[0] else { panic!("not a goal configuration") };
    items
        .iter()
        .map(|it| match it {
            PItem::Atom(p, args) => (p.clone(), args.clone()),
            PItem::Hole(_) => panic!("open configuration"),
        })
        .collect()
}

/// Read a configuration back as a goal, naming placeholders `x1..xk`.
pub fn config_to_goal(cfg: &Arrow) -> Goal {
    let names: Vec<String> = (1..=cfg.dom.len()).map(|i| format!("x{i}")).collect();
    Goal {
        atoms: config_atoms(cfg)
            .into_iter()
            .map(|(p, args)| Atom {
                pred: p,
                args: args.iter().map(|t| plterm_to_term(t, &names)).collect(),
            })
            .collect(),
    }
}

/// One coordinated rewriting step of a configuration.
#[derive(Debug, Clone)]
pub struct TileStep {
    pub tile: Tile,
    pub proof: ProofTerm,
    pub clause: String,
    pub position: usize,
}

/// All coordinated steps at the leftmost atom (or at every position).
///
/// A step applies a clause tile at one atom and coordinates the clause's
/// pattern with the atom's current instantiation by synthesizing the
/// pullback square; the instantiation propagates to the sibling atoms
/// through the square's projections.
pub fn tile_step(
    cfg: &Arrow,
    p: &Program,
    sys: &TileSystem,
    every_position: bool,
) -> Vec<TileStep> {
    let atoms = config_atoms(cfg);
    if atoms.is_empty() {
        return Vec::new();
    }
    let positions: Vec<usize> =
        if every_position { (0..atoms.len()).collect() } else { vec![0] };
    let mut out = Vec::new();
    for i in positions {
        for clause in &p.clauses {
            if clause.head.pred != atoms[i].0 || clause.head.args.len() != atoms[i].1.len() {
                continue;
            }
            if let Some(step) = coordinate_step(cfg, &atoms, i, clause, sys) {
                out.push(step);
            }
        }
    }
    out
}

fn coordinate_step(
    cfg: &Arrow,
    atoms: &[(String, Vec<PlTerm>)],
    i: usize,
    clause: &Clause,
    sys: &TileSystem,
) -> Option<TileStep> {
    let k = cfg.dom.len();
    // the structural part of the configuration: all argument tuples
    let all_args: Vec<PlTerm> = atoms.iter().flat_map(|(_, args)| args.iter().cloned()).collect();
    let theta = Arrow {
        dom: Iface::terms(k),
        cod: Iface::terms(all_args.len()),
        comps: all_args.into_iter().map(Component::T).collect(),
    };
    let before: usize = atoms[..i].iter().map(|(_, a)| a.len()).sum();
    let after: usize = atoms[i + 1..].iter().map(|(_, a)| a.len()).sum();
    let ct = sys.get(&tile_name(&clause.id)).expect("clause tile in system").clone();
    let west = tensor(
        &tensor(&identity(&Iface::terms(before)), &ct.effect),
        &identity(&Iface::terms(after)),
    );
    let (coord, coord_proof) = synthesize_pullback(&theta, &west)?;
    // the skeleton row: identity tiles on sibling atoms, the clause tile at
    // position i, re-joined by the flattening of conjunction
    let mut skel: Option<(Tile, ProofTerm)> = None;
    for (pos, (pred, args)) in atoms.iter().enumerate() {
        let piece: (Tile, ProofTerm) = if pos == i {
            (ct.clone(), ProofTerm::Basic(tile_name(&clause.id)))
        } else {
            let sk = pred_arrow(pred, args.len());
            (vid(&sk), ProofTerm::VId(sk))
        };
        skel = Some(match skel {
            None => piece,
            Some((t0, p0)) => (
                crate::tiles::par(&t0, &piece.0),
                ProofTerm::Par(Box::new(p0), Box::new(piece.1)),
            ),
        });
    }
    let (skel_tile, skel_proof) = skel.expect("at least one atom");
    let conj = conj_arrow(atoms.len());
    let wrapped = hcomp(&vid(&conj), &skel_tile).expect("conjunction wrap");
    let wrapped_proof = ProofTerm::HComp(Box::new(ProofTerm::VId(conj)), Box::new(skel_proof));
    let step_tile = hcomp(&wrapped, &coord).expect("skeleton meets coordination");
    let step_proof = ProofTerm::HComp(Box::new(wrapped_proof), Box::new(coord_proof));
    debug_assert_eq!(&step_tile.initial, cfg);
    debug_assert!(step_tile.trigger.is_identity());
    Some(TileStep { tile: step_tile, proof: step_proof, clause: clause.id.clone(), position: i })
}

/// The flattening arrow `p^j -> p`.
pub fn conj_arrow(j: usize) -> Arrow {
    Arrow {
        dom: Iface::preds(j),
        cod: Iface(vec![Sort::P]),
        comps: vec![Component::P((1..=j).map(PItem::Hole).collect())],
    }
}

/// A refutation found by the tile engine: the computed answer together with
/// the refutation tile and its proof term.
#[derive(Debug, Clone)]
pub struct TileRefutation {
    pub answer: Answer,
    pub tile: Tile,
    pub proof: ProofTerm,
}

/// All refutation tiles for a goal within the clause-application bound:
/// entailed tiles from the goal configuration, with identity trigger, whose
/// final configuration is the empty goal over discharged placeholders. The
/// effect border, read back over the goal's variables, is the computed
/// answer.
pub fn tile_refute(g: &Goal, p: &Program, bound: usize) -> (Vec<TileRefutation>, AnswerSet) {
    let sys = program_tiles(p);
    let goal_vars = variables_of(g);
    let cfg = goal_config(g);
    let start = vid(&cfg);
    let mut refutations = Vec::new();
    let mut set = AnswerSet::default();
    explore(&start, &ProofTerm::VId(cfg), p, &sys, bound, &goal_vars, &mut refutations, &mut set);
    for r in &refutations {
        set.answers.insert(r.answer.clone());
    }
    (refutations, set)
}

#[allow(clippy::too_many_arguments)]
fn explore(
    acc: &Tile,
    acc_proof: &ProofTerm,
    p: &Program,
    sys: &TileSystem,
    remaining: usize,
    goal_vars: &[String],
    refutations: &mut Vec<TileRefutation>,
    set: &mut AnswerSet,
) {
    let cfg = acc.final_.clone();
    if config_atoms(&cfg).is_empty() {
        refutations.push(TileRefutation {
            answer: effect_answer(&acc.effect, goal_vars),
            tile: acc.clone(),
            proof: acc_proof.clone(),
        });
        return;
    }
    if remaining == 0 {
        if !tile_step(&cfg, p, sys, false).is_empty() {
            set.truncated = true;
        }
        return;
    }
    for step in tile_step(&cfg, p, sys, false) {
        let next = vcomp(acc, &step.tile).expect("step composes");
        let next_proof = ProofTerm::VComp(Box::new(acc_proof.clone()), Box::new(step.proof));
        explore(&next, &next_proof, p, sys, remaining - 1, goal_vars, refutations, set);
    }
}

/// Read a refutation effect `t^u -> t^k` as a canonical answer on the goal
/// variables.
pub fn effect_answer(effect: &Arrow, goal_vars: &[String]) -> Answer {
    let residuals: Vec<String> = (1..=effect.dom.len()).map(|i| format!("_R{i}")).collect();
    let mut s = Substitution::empty();
    for (v, c) in goal_vars.iter().zip(effect.comps.iter()) {
        let Component::T(t) = c else { panic!("term effect expected") };
        s.bind(v, plterm_to_term(t, &residuals));
    }
    canonical_answer(&s, goal_vars)
}

// ---------------------------------------------------------------------------
// Head decompositions

/// One interactive decomposition of a clause head: an instantiated head
/// atom together with the observation that recovers the full head,
/// witnessed by an entailed tile.
#[derive(Debug, Clone)]
pub struct HeadDecomposition {
    pub head: Atom,
    pub observation: Arrow,
    pub witness: Tile,
    pub proof: ProofTerm,
}

/// All factorizations `head = observation ; pattern` of a clause head with
/// a discharger-free pattern, each witnessed by composing the pattern's
/// self-matching square, the observation's identity, and the clause tile.
pub fn head_decompositions(c: &Clause, sig: &Signature) -> Vec<HeadDecomposition> {
    let tile = clause_tile(c, sig);
    let head_tuple = tile.effect.clone();
    let mut seen: BTreeSet<Arrow> = BTreeSet::new();
    let mut out = Vec::new();
    for pattern in anti_instances(&head_tuple) {
        if !seen.insert(pattern.clone()) {
            continue;
        }
        let Some(observation) = factor_through(&head_tuple, &pattern) else { continue };
        let Ok((lifted, lifted_proof)) = lift_r(&pattern) else { continue };
        let column = vcomp(&lifted, &hid(&observation)).expect("lift column");
        let column_proof = ProofTerm::VComp(
            Box::new(lifted_proof),
            Box::new(ProofTerm::HId(observation.clone())),
        );
        let witness = hcomp(&tile, &column).expect("witness tile");
        let proof = ProofTerm::HComp(
            Box::new(ProofTerm::Basic(tile_name(&c.id))),
            Box::new(column_proof),
        );
        let names: Vec<String> = (1..=pattern.dom.len()).map(|i| format!("x{i}")).collect();
        let head = Atom {
            pred: c.head.pred.clone(),
            args: pattern
                .comps
                .iter()
                .map(|comp| {
                    let Component::T(t) = comp else { unreachable!() };
                    plterm_to_term(t, &names)
                })
                .collect(),
        };
        out.push(HeadDecomposition { head, observation, witness, proof });
    }
    out
}

/// All canonical anti-instances of a term tuple: every way of cutting
/// subtrees and grouping equal cut values under shared placeholders,
/// placeholders numbered by first use.
fn anti_instances(tuple: &Arrow) -> Vec<Arrow> {
    #[derive(Clone)]
    enum Shape {
        Slot(PlTerm),
        Keep(String, Vec<Shape>),
    }
    fn shapes(t: &PlTerm) -> Vec<Shape> {
        let mut out = vec![Shape::Slot(t.clone())];
        if let PlTerm::App(f, args) = t {
            let arg_shapes: Vec<Vec<Shape>> = args.iter().map(shapes).collect();
            let mut picks: Vec<Vec<Shape>> = vec![Vec::new()];
            for choices in &arg_shapes {
                let mut next = Vec::new();
                for partial in &picks {
                    for choice in choices {
                        let mut row = partial.clone();
                        row.push(choice.clone());
                        next.push(row);
                    }
                }
                picks = next;
            }
            for row in picks {
                out.push(Shape::Keep(f.clone(), row));
            }
        }
        out
    }
    fn slots(shape: &Shape, out: &mut Vec<PlTerm>) {
        match shape {
            Shape::Slot(v) => out.push(v.clone()),
            Shape::Keep(_, args) => args.iter().for_each(|a| slots(a, out)),
        }
    }
    fn rebuild(shape: &Shape, assignment: &[usize], next: &mut usize) -> PlTerm {
        match shape {
            Shape::Slot(_) => {
                let i = *next;
                *next += 1;
                PlTerm::Hole(assignment[i])
            }
            Shape::Keep(f, args) => {
                PlTerm::App(f.clone(), args.iter().map(|a| rebuild(a, assignment, next)).collect())
            }
        }
    }
    let per_comp: Vec<Vec<Shape>> = tuple
        .comps
        .iter()
        .map(|c| {
            let Component::T(t) = c else { unreachable!() };
            shapes(t)
        })
        .collect();
    let mut combos: Vec<Vec<Shape>> = vec![Vec::new()];
    for choices in &per_comp {
        let mut next = Vec::new();
        for partial in &combos {
            for choice in choices {
                let mut row = partial.clone();
                row.push(choice.clone());
                next.push(row);
            }
        }
        combos = next;
    }
    let mut out = Vec::new();
    for combo in combos {
        let mut slot_values = Vec::new();
        for s in &combo {
            slots(s, &mut slot_values);
        }
        for assignment in grouped_assignments(&slot_values) {
            let width = assignment.iter().copied().max().unwrap_or(0);
            let mut cursor = 0usize;
            let comps: Vec<Component> = combo
                .iter()
                .map(|s| Component::T(rebuild(s, &assignment, &mut cursor)))
                .collect();
            out.push(Arrow { dom: Iface::terms(width), cod: tuple.cod.clone(), comps });
        }
    }
    out
}

/// All ways of assigning placeholder numbers to slots such that grouped
/// slots carry equal values; numbering is by first occurrence.
fn grouped_assignments(values: &[PlTerm]) -> Vec<Vec<usize>> {
    fn go(
        values: &[PlTerm],
        i: usize,
        assign: &mut Vec<usize>,
        used: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == values.len() {
            out.push(assign.clone());
            return;
        }
        for b in 1..=used {
            if let Some(j) = assign.iter().position(|&x| x == b) {
                if values[j] == values[i] {
                    assign.push(b);
                    go(values, i + 1, assign, used, out);
                    assign.pop();
                }
            }
        }
        assign.push(used + 1);
        go(values, i + 1, assign, used + 1, out);
        assign.pop();
    }
    let mut out = Vec::new();
    go(values, 0, &mut Vec::new(), 0, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Correspondence harness

#[derive(Debug, Clone)]
pub struct CorrespondenceReport {
    pub passed: bool,
    pub sld: AnswerSet,
    pub tile: AnswerSet,
    pub only_sld: Vec<Answer>,
    pub only_tile: Vec<Answer>,
}

/// Run both engines at the same bound and compare the canonical answer
/// sets.
pub fn correspondence_check(p: &Program, g: &Goal, bound: usize) -> CorrespondenceReport {
    let sld = sld_refute(g, p, ResolutionMode::Mgu, bound, 0);
    let (_, tile) = tile_refute(g, p, bound);
    let only_sld: Vec<Answer> = sld.answers.difference(&tile.answers).cloned().collect();
    let only_tile: Vec<Answer> = tile.answers.difference(&sld.answers).cloned().collect();
    CorrespondenceReport {
        passed: only_sld.is_empty() && only_tile.is_empty(),
        sld,
        tile,
        only_sld,
        only_tile,
    }
}

/// A refutation tile must end in the empty goal with an identity trigger,
/// and its proof must evaluate back to its borders.
pub fn refutation_is_well_formed(r: &TileRefutation, sys: &TileSystem) -> bool {
    let empty_final = config_atoms(&r.tile.final_).is_empty();
    let id_trigger = r.tile.trigger.is_identity();
    let eval_ok = eval_proof(&r.proof, sys).map(|t| t == r.tile).unwrap_or(false);
    empty_final && id_trigger && eval_ok
}






#[cfg(test)]
mod threading_tests {
    fn is_send_sync<T: Send + Sync>() {}

    #[test]
    fn values_cross_threads() {
        is_send_sync::<crate::syntax::Program>();
        is_send_sync::<crate::theory::Arrow>();
        is_send_sync::<crate::theory::Substitution>();
        is_send_sync::<crate::tiles::Tile>();
        is_send_sync::<crate::tiles::TileSystem>();
        is_send_sync::<crate::tiles::ProofTerm>();
        is_send_sync::<super::AnswerSet>();
        is_send_sync::<crate::causality::CausalForest>();
    }
}
