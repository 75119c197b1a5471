//! The causal variant of the tile engine: observations on the trigger side
//! are labelled by clause names instead of being identities, so a
//! refutation's trigger is an ordered forest recording which clause was
//! applied to which subgoal occurrence and what it caused. Every
//! linearization of the forest replays to the same computed answer.
//!
//! Causal configurations keep one predicate position per atom (conjunction
//! is not collapsed), and the clause-labelled observations live in their
//! own little category of trees, separate from the term-sorted arrows.

use std::collections::BTreeMap;
use std::fmt;

use crate::engine::{canonical_answer, effect_answer, pred_arrow, Answer};
use crate::syntax::{rename_clause, variables_of, Atom, Clause, FreshSource, Goal, Program};
use crate::theory::{compose, identity, tensor, Arrow, Component, Iface, PItem, PlTerm};
use crate::tiles::synthesize_pullback;
use crate::unify::unify_atoms;

/// A vertical arrow of the causal observation category: `trees.len()` trees
/// over `holes` predicate-sorted holes, nodes labelled by clause names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalObs {
    pub holes: usize,
    pub trees: Vec<ObsTree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObsTree {
    Hole(usize),
    Clause(String, Vec<ObsTree>),
}

impl CausalObs {
    pub fn identity(n: usize) -> CausalObs {
        CausalObs { holes: n, trees: (1..=n).map(ObsTree::Hole).collect() }
    }

    /// Diagrammatic composition: `self` first, then `outer`, substituting
    /// `self`'s trees for `outer`'s holes.
    pub fn then(&self, outer: &CausalObs) -> CausalObs {
        assert_eq!(self.trees.len(), outer.holes, "causal observation mismatch");
        fn subst(t: &ObsTree, inner: &[ObsTree]) -> ObsTree {
            match t {
                ObsTree::Hole(i) => inner[*i - 1].clone(),
                ObsTree::Clause(c, kids) => {
                    ObsTree::Clause(c.clone(), kids.iter().map(|k| subst(k, inner)).collect())
                }
            }
        }
        CausalObs {
            holes: self.holes,
            trees: outer.trees.iter().map(|t| subst(t, &self.trees)).collect(),
        }
    }

    pub fn tensor(&self, other: &CausalObs) -> CausalObs {
        fn shift(t: &ObsTree, by: usize) -> ObsTree {
            match t {
                ObsTree::Hole(i) => ObsTree::Hole(i + by),
                ObsTree::Clause(c, kids) => {
                    ObsTree::Clause(c.clone(), kids.iter().map(|k| shift(k, by)).collect())
                }
            }
        }
        let mut trees = self.trees.clone();
        trees.extend(other.trees.iter().map(|t| shift(t, self.holes)));
        CausalObs { holes: self.holes + other.holes, trees }
    }
}

impl fmt::Display for ObsTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsTree::Hole(i) => write!(f, "P{i}"),
            ObsTree::Clause(c, kids) => {
                write!(f, "{c}")?;
                if !kids.is_empty() {
                    write!(f, "(")?;
                    for (i, k) in kids.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{k}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// A tile of the causal system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalTile {
    pub initial: Arrow,
    pub trigger: CausalObs,
    pub effect: Arrow,
    pub final_: Arrow,
}

/// The clause-labelled ordered forest read off a causal refutation's
/// trigger; a node's children are the subgoals its clause application
/// introduced, in body order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalForest {
    pub roots: Vec<ForestNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestNode {
    pub clause: String,
    pub children: Vec<ForestNode>,
}

impl CausalForest {
    pub fn node_count(&self) -> usize {
        fn count(n: &ForestNode) -> usize {
            1 + n.children.iter().map(count).sum::<usize>()
        }
        self.roots.iter().map(count).sum()
    }

    /// Indented rendering, one clause per line.
    pub fn render(&self) -> String {
        fn go(n: &ForestNode, depth: usize, out: &mut String) {
            out.push_str(&format!("{}{}\n", "  ".repeat(depth), n.clause));
            for c in &n.children {
                go(c, depth + 1, out);
            }
        }
        let mut s = String::new();
        for r in &self.roots {
            go(r, 0, &mut s);
        }
        s
    }

    fn node_at(&self, path: &[usize]) -> Option<&ForestNode> {
        let mut node = self.roots.get(*path.first()?)?;
        for &i in &path[1..] {
            node = node.children.get(i)?;
        }
        Some(node)
    }
}

/// One step of a schedule: the forest node (addressed by its path — root
/// index, then child indices) and the clause it applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub path: Vec<usize>,
    pub clause: String,
}

/// A total order on forest nodes extending the descendant order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule(pub Vec<ScheduleEntry>);

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for e in &self.0 {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            let dotted: Vec<String> = e.path.iter().map(|i| i.to_string()).collect();
            write!(f, "{}:{}", dotted.join("."), e.clause)?;
        }
        Ok(())
    }
}

/// The causal tile of a clause: like the plain clause tile, but the trigger
/// is the clause-name operator and the body atoms stay separate positions.
pub fn causal_tile(c: &Clause) -> CausalTile {
    let vars = c.variables();
    let n = vars.len();
    let index: BTreeMap<&str, usize> =
        vars.iter().enumerate().map(|(i, v)| (v.as_str(), i + 1)).collect();
    let effect = Arrow {
        dom: Iface::terms(n),
        cod: Iface::terms(c.head.args.len()),
        comps: c.head.args.iter().map(|t| Component::T(term_to_pl(t, &index))).collect(),
    };
    let final_ = Arrow {
        dom: Iface::terms(n),
        cod: Iface::preds(c.body.atoms.len()),
        comps: c
            .body
            .atoms
            .iter()
            .map(|a| {
                Component::P(vec![PItem::Atom(
                    a.pred.clone(),
                    a.args.iter().map(|t| term_to_pl(t, &index)).collect(),
                )])
            })
            .collect(),
    };
    CausalTile {
        initial: pred_arrow(&c.head.pred, c.head.args.len()),
        trigger: clause_obs(c),
        effect,
        final_,
    }
}

fn clause_obs(c: &Clause) -> CausalObs {
    CausalObs {
        holes: c.body.atoms.len(),
        trees: vec![ObsTree::Clause(
            c.id.clone(),
            (1..=c.body.atoms.len()).map(ObsTree::Hole).collect(),
        )],
    }
}

fn term_to_pl(t: &crate::syntax::Term, index: &BTreeMap<&str, usize>) -> PlTerm {
    match t {
        crate::syntax::Term::Var(v) => PlTerm::Hole(index[v.as_str()]),
        crate::syntax::Term::App(f, args) => {
            PlTerm::App(f.clone(), args.iter().map(|a| term_to_pl(a, index)).collect())
        }
    }
}

/// A goal as a causal configuration: one predicate position per atom.
pub fn causal_config(g: &Goal) -> Arrow {
    let vars = variables_of(g);
    let index: BTreeMap<&str, usize> =
        vars.iter().enumerate().map(|(i, v)| (v.as_str(), i + 1)).collect();
    Arrow {
        dom: Iface::terms(vars.len()),
        cod: Iface::preds(g.atoms.len()),
        comps: g
            .atoms
            .iter()
            .map(|a| {
                Component::P(vec![PItem::Atom(
                    a.pred.clone(),
                    a.args.iter().map(|t| term_to_pl(t, &index)).collect(),
                )])
            })
            .collect(),
    }
}

fn causal_atoms(cfg: &Arrow) -> Vec<(String, Vec<PlTerm>)> {
    cfg.comps
        .iter()
        .map(|c| match c {
            Component::P(items) => match items.as_slice() {
                [PItem::Atom(p, args)] => (p.clone(), args.clone()),
                _ => panic!("causal configuration positions hold single atoms"),
            },
            Component::T(_) => panic!("causal configuration expected"),
        })
        .collect()
}

/// One causal step at an atom position: the same pullback coordination as
/// the plain engine, but the trigger records the clause operator and the
/// body atoms stay as separate positions.
pub fn causal_step(cfg: &Arrow, p: &Program, position: usize) -> Vec<(CausalTile, String)> {
    let atoms = causal_atoms(cfg);
    let mut out = Vec::new();
    let (pred, args) = &atoms[position];
    for clause in &p.clauses {
        if &clause.head.pred != pred || clause.head.args.len() != args.len() {
            continue;
        }
        let ct = causal_tile(clause);
        let k = cfg.dom.len();
        let all_args: Vec<PlTerm> = atoms.iter().flat_map(|(_, a)| a.iter().cloned()).collect();
        let theta = Arrow {
            dom: Iface::terms(k),
            cod: Iface::terms(all_args.len()),
            comps: all_args.into_iter().map(Component::T).collect(),
        };
        let before: usize = atoms[..position].iter().map(|(_, a)| a.len()).sum();
        let after: usize = atoms[position + 1..].iter().map(|(_, a)| a.len()).sum();
        let west = tensor(
            &tensor(&identity(&Iface::terms(before)), &ct.effect),
            &identity(&Iface::terms(after)),
        );
        let Some((coord, _)) = synthesize_pullback(&theta, &west) else { continue };
        let south = coord.final_;
        let apex = south.dom.len();
        let n_c = ct.effect.dom.len();
        let term_at = |idx: usize| -> PlTerm {
            match &south.comps[idx] {
                Component::T(t) => t.clone(),
                Component::P(_) => unreachable!(),
            }
        };
        let mut comps: Vec<Component> = Vec::new();
        let mut offset = 0usize;
        for (i2, (q, qargs)) in atoms.iter().enumerate() {
            if i2 == position {
                let mid = Arrow {
                    dom: Iface::terms(apex),
                    cod: Iface::terms(n_c),
                    comps: south.comps[offset..offset + n_c].to_vec(),
                };
                let inst = compose(&mid, &ct.final_).unwrap();
                comps.extend(inst.comps);
                offset += n_c;
            } else {
                comps.push(Component::P(vec![PItem::Atom(
                    q.clone(),
                    (0..qargs.len()).map(|j| term_at(offset + j)).collect(),
                )]));
                offset += qargs.len();
            }
        }
        let final_ = Arrow {
            dom: Iface::terms(apex),
            cod: Iface::preds(atoms.len() - 1 + clause.body.atoms.len()),
            comps,
        };
        let trigger = CausalObs::identity(position)
            .tensor(&clause_obs(clause))
            .tensor(&CausalObs::identity(atoms.len() - position - 1));
        out.push((
            CausalTile { initial: cfg.clone(), trigger, effect: coord.effect, final_ },
            clause.id.clone(),
        ));
    }
    out
}

/// All causal refutations within the clause-application bound: the answer,
/// the dependency forest, and the refutation tile.
pub fn causal_refute(
    g: &Goal,
    p: &Program,
    bound: usize,
) -> Vec<(Answer, CausalForest, CausalTile)> {
    let goal_vars = variables_of(g);
    let cfg = causal_config(g);
    let start = CausalTile {
        initial: cfg.clone(),
        trigger: CausalObs::identity(g.atoms.len()),
        effect: identity(&cfg.dom),
        final_: cfg,
    };
    let mut out = Vec::new();
    explore(&start, p, bound, &goal_vars, &mut out);
    out
}

fn explore(
    acc: &CausalTile,
    p: &Program,
    remaining: usize,
    goal_vars: &[String],
    out: &mut Vec<(Answer, CausalForest, CausalTile)>,
) {
    let cfg = acc.final_.clone();
    if cfg.cod.is_empty() {
        let forest = forest_of(&acc.trigger);
        out.push((effect_answer(&acc.effect, goal_vars), forest, acc.clone()));
        return;
    }
    if remaining == 0 {
        return;
    }
    // Leftmost selection suffices for the refutation set; the forest records
    // the concurrency structure independently of the exploration order.
    for (step, _) in causal_step(&cfg, p, 0) {
        let next = CausalTile {
            initial: acc.initial.clone(),
            trigger: step.trigger.then(&acc.trigger),
            effect: compose(&step.effect, &acc.effect).unwrap(),
            final_: step.final_.clone(),
        };
        explore(&next, p, remaining - 1, goal_vars, out);
    }
}

/// Read the closed trigger of a refutation tile as an ordered forest.
pub fn forest_of(obs: &CausalObs) -> CausalForest {
    assert_eq!(obs.holes, 0, "refutation triggers are closed");
    fn node(t: &ObsTree) -> ForestNode {
        match t {
            ObsTree::Hole(_) => unreachable!("closed tree"),
            ObsTree::Clause(c, kids) => {
                ForestNode { clause: c.clone(), children: kids.iter().map(node).collect() }
            }
        }
    }
    CausalForest { roots: obs.trees.iter().map(node).collect() }
}

/// Up to `limit` distinct linearizations of the forest's descendant order;
/// the boolean reports whether the enumeration was exhaustive.
pub fn linearizations(f: &CausalForest, limit: usize) -> (Vec<Schedule>, bool) {
    assert!(limit >= 1);
    #[derive(Clone)]
    struct Item {
        path: Vec<usize>,
        node: ForestNode,
    }
    fn go(
        available: Vec<Item>,
        acc: &mut Vec<ScheduleEntry>,
        out: &mut Vec<Schedule>,
        limit: usize,
        exhaustive: &mut bool,
    ) {
        if available.is_empty() {
            out.push(Schedule(acc.clone()));
            return;
        }
        for (i, item) in available.iter().enumerate() {
            if out.len() >= limit {
                *exhaustive = false;
                return;
            }
            let mut next = available.clone();
            next.remove(i);
            for (ci, child) in item.node.children.iter().enumerate() {
                let mut path = item.path.clone();
                path.push(ci);
                next.push(Item { path, node: child.clone() });
            }
            acc.push(ScheduleEntry { path: item.path.clone(), clause: item.node.clause.clone() });
            go(next, acc, out, limit, exhaustive);
            acc.pop();
        }
    }
    let available: Vec<Item> = f
        .roots
        .iter()
        .enumerate()
        .map(|(i, n)| Item { path: vec![i], node: n.clone() })
        .collect();
    let mut out = Vec::new();
    let mut exhaustive = true;
    go(available, &mut Vec::new(), &mut out, limit, &mut exhaustive);
    if !exhaustive {
        out.truncate(limit);
    }
    (out, exhaustive)
}

/// Replay a schedule with ordinary resolution, applying exactly the
/// scheduled clause at the scheduled subgoal occurrence, and return the
/// computed answer.
pub fn replay(s: &Schedule, g: &Goal, p: &Program) -> Result<Answer, String> {
    let goal_vars = variables_of(g);
    let mut pending: Vec<(Vec<usize>, Atom)> =
        g.atoms.iter().enumerate().map(|(i, a)| (vec![i], a.clone())).collect();
    let mut fresh = FreshSource::new();
    let mut accum = crate::theory::Substitution::empty();
    for v in &goal_vars {
        accum.bind(v, crate::syntax::Term::Var(v.clone()));
    }
    for entry in &s.0 {
        let idx = pending
            .iter()
            .position(|(q, _)| q == &entry.path)
            .ok_or_else(|| format!("schedule names a missing occurrence {:?}", entry.path))?;
        let (_, atom) = pending.remove(idx);
        let clause = p
            .clause(&entry.clause)
            .ok_or_else(|| format!("unknown clause `{}`", entry.clause))?;
        let renamed = rename_clause(clause, &mut fresh);
        let sigma = unify_atoms(&atom, &renamed.head)
            .ok_or_else(|| format!("schedule step {:?} does not unify", entry.path))?;
        for (_, a) in pending.iter_mut() {
            *a = sigma.apply_atom(a);
        }
        for (ci, b) in renamed.body.atoms.iter().enumerate() {
            let mut child = entry.path.clone();
            child.push(ci);
            pending.push((child, sigma.apply_atom(b)));
        }
        accum = accum.then(&sigma);
    }
    if !pending.is_empty() {
        return Err("schedule did not exhaust the refutation".to_string());
    }
    Ok(canonical_answer(&accum, &goal_vars))
}

/// Check a schedule against the forest it claims to linearize: it must list
/// exactly the forest's nodes, parents before children.
pub fn schedule_extends(s: &Schedule, f: &CausalForest) -> bool {
    if s.0.len() != f.node_count() {
        return false;
    }
    let mut seen: Vec<&[usize]> = Vec::new();
    for e in &s.0 {
        match f.node_at(&e.path) {
            Some(node) if node.clause == e.clause => {}
            _ => return false,
        }
        if e.path.len() > 1 {
            let parent = &e.path[..e.path.len() - 1];
            if !seen.contains(&parent) {
                return false;
            }
        }
        seen.push(&e.path);
    }
    true
}
