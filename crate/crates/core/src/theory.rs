//! Arrows of the free algebraic theory over a two-sorted signature.
//!
//! An arrow from interface `m` to interface `n` is an `n`-tuple of
//! components over `|m|` canonical placeholders `x1..x|m|`. Composition is
//! simultaneous substitution, tensor is juxtaposition with index shifting.
//! Because arrows are stored as tuples (a normal form), the usual
//! axiomatization of such categories — associativity, functoriality of
//! tensor, coherence and naturality of symmetries, duplicators and
//! dischargers — holds definitionally; the tests assert it on random
//! arrows to guard the implementation.
//!
//! Term-sorted components are placeholder terms. Predicate-sorted
//! components are flat sequences of atoms and predicate holes, which builds
//! associativity and unit of conjunction into the representation.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    T,
    P,
}

/// An interface: a string of sorts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Iface(pub Vec<Sort>);

impl Iface {
    pub fn empty() -> Iface {
        Iface(vec![])
    }

    /// `t^n`
    pub fn terms(n: usize) -> Iface {
        Iface(vec![Sort::T; n])
    }

    /// `p^n`
    pub fn preds(n: usize) -> Iface {
        Iface(vec![Sort::P; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Iface) -> Iface {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Iface(v)
    }

    pub fn all_t(&self) -> bool {
        self.0.iter().all(|s| *s == Sort::T)
    }
}

impl fmt::Display for Iface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for s in &self.0 {
            write!(f, "{}", if *s == Sort::T { 't' } else { 'p' })?;
        }
        Ok(())
    }
}

/// A term over canonical placeholders `x1..xm` (1-based indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlTerm {
    Hole(usize),
    App(String, Vec<PlTerm>),
}

impl PlTerm {
    pub fn constant(name: &str) -> PlTerm {
        PlTerm::App(name.to_string(), vec![])
    }

    fn shift(&self, by: usize) -> PlTerm {
        match self {
            PlTerm::Hole(i) => PlTerm::Hole(i + by),
            PlTerm::App(op, args) => {
                PlTerm::App(op.clone(), args.iter().map(|a| a.shift(by)).collect())
            }
        }
    }

    fn subst(&self, comps: &[Component]) -> PlTerm {
        match self {
            PlTerm::Hole(i) => match &comps[*i - 1] {
                Component::T(t) => t.clone(),
                Component::P(_) => panic!("term hole bound to predicate component"),
            },
            PlTerm::App(op, args) => {
                PlTerm::App(op.clone(), args.iter().map(|a| a.subst(comps)).collect())
            }
        }
    }

    pub fn holes_into(&self, out: &mut Vec<usize>) {
        match self {
            PlTerm::Hole(i) => out.push(*i),
            PlTerm::App(_, args) => {
                for a in args {
                    a.holes_into(out);
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            PlTerm::Hole(_) => 1,
            PlTerm::App(_, args) => 1 + args.iter().map(PlTerm::size).sum::<usize>(),
        }
    }

    pub fn contains_hole(&self, i: usize) -> bool {
        match self {
            PlTerm::Hole(j) => *j == i,
            PlTerm::App(_, args) => args.iter().any(|a| a.contains_hole(i)),
        }
    }
}

impl fmt::Display for PlTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlTerm::Hole(i) => write!(f, "x{i}"),
            PlTerm::App(op, args) => {
                write!(f, "{op}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// One conjunct of a predicate-sorted component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PItem {
    /// Reference to a p-sorted placeholder.
    Hole(usize),
    /// An atom over t-sorted placeholders.
    Atom(String, Vec<PlTerm>),
}

/// A component of an arrow: one entry per codomain position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    T(PlTerm),
    /// A flat conjunction; the empty sequence is the empty goal.
    P(Vec<PItem>),
}

impl Component {
    fn shift(&self, by: usize) -> Component {
        match self {
            Component::T(t) => Component::T(t.shift(by)),
            Component::P(items) => Component::P(
                items
                    .iter()
                    .map(|it| match it {
                        PItem::Hole(i) => PItem::Hole(i + by),
                        PItem::Atom(p, args) => {
                            PItem::Atom(p.clone(), args.iter().map(|a| a.shift(by)).collect())
                        }
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArrowError {
    #[error("interface mismatch: {left} vs {right}")]
    InterfaceMismatch { left: String, right: String },
    #[error("arrow is not term-sorted")]
    NotTermSorted,
    #[error("substitution error: {0}")]
    Substitution(String),
    #[error("arrow contains a discharged placeholder")]
    Discharger,
}

/// An arrow: `comps[i]` is the component for codomain position `i+1`; every
/// placeholder index refers to a domain position of matching sort.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub dom: Iface,
    pub cod: Iface,
    pub comps: Vec<Component>,
}

impl Arrow {
    pub fn check(&self) -> bool {
        if self.comps.len() != self.cod.len() {
            return false;
        }
        for (c, s) in self.comps.iter().zip(self.cod.0.iter()) {
            match (c, s) {
                (Component::T(t), Sort::T) => {
                    let mut holes = Vec::new();
                    t.holes_into(&mut holes);
                    if holes
                        .iter()
                        .any(|&i| i == 0 || i > self.dom.len() || self.dom.0[i - 1] != Sort::T)
                    {
                        return false;
                    }
                }
                (Component::P(items), Sort::P) => {
                    for it in items {
                        match it {
                            PItem::Hole(i) => {
                                if *i == 0 || *i > self.dom.len() || self.dom.0[*i - 1] != Sort::P {
                                    return false;
                                }
                            }
                            PItem::Atom(_, args) => {
                                let mut holes = Vec::new();
                                for a in args {
                                    a.holes_into(&mut holes);
                                }
                                if holes.iter().any(|&i| {
                                    i == 0 || i > self.dom.len() || self.dom.0[i - 1] != Sort::T
                                }) {
                                    return false;
                                }
                            }
                        }
                    }
                }
                _ => return false,
            }
        }
        true
    }

    pub fn all_t(&self) -> bool {
        self.dom.all_t() && self.cod.all_t()
    }

    /// The term component at codomain position `i` (1-based); panics on
    /// p-sorted positions.
    pub fn term_at(&self, i: usize) -> &PlTerm {
        match &self.comps[i - 1] {
            Component::T(t) => t,
            Component::P(_) => panic!("term_at on predicate component"),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod
            && self.comps.iter().enumerate().all(|(i, c)| match c {
                Component::T(PlTerm::Hole(j)) => *j == i + 1,
                Component::P(items) => items.len() == 1 && items[0] == PItem::Hole(i + 1),
                _ => false,
            })
    }

    /// Some permutation of domain positions, as an image map
    /// `cod position i -> dom position`, when this arrow is one.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        if self.dom.len() != self.cod.len() {
            return None;
        }
        let mut seen = vec![false; self.dom.len()];
        let mut img = Vec::with_capacity(self.comps.len());
        for c in &self.comps {
            let j = match c {
                Component::T(PlTerm::Hole(j)) => *j,
                Component::P(items) => match items.as_slice() {
                    [PItem::Hole(j)] => *j,
                    _ => return None,
                },
                _ => return None,
            };
            if seen[j - 1] {
                return None;
            }
            seen[j - 1] = true;
            img.push(j);
        }
        Some(img)
    }

    /// Count of occurrences of each domain placeholder over all components.
    pub fn hole_uses(&self) -> Vec<usize> {
        let mut uses = vec![0usize; self.dom.len()];
        let mut holes = Vec::new();
        for c in &self.comps {
            match c {
                Component::T(t) => t.holes_into(&mut holes),
                Component::P(items) => {
                    for it in items {
                        match it {
                            PItem::Hole(i) => holes.push(*i),
                            PItem::Atom(_, args) => {
                                for a in args {
                                    a.holes_into(&mut holes);
                                }
                            }
                        }
                    }
                }
            }
        }
        for h in holes {
            uses[h - 1] += 1;
        }
        uses
    }

    pub fn uses_discharger(&self) -> bool {
        self.hole_uses().contains(&0)
    }

    pub fn total_size(&self) -> usize {
        self.comps
            .iter()
            .map(|c| match c {
                Component::T(t) => t.size(),
                Component::P(items) => items.len() + 1,
            })
            .sum()
    }
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", display_arrow(self))
    }
}

/// Identity arrow on an interface.
pub fn identity(i: &Iface) -> Arrow {
    let comps = i
        .0
        .iter()
        .enumerate()
        .map(|(k, s)| match s {
            Sort::T => Component::T(PlTerm::Hole(k + 1)),
            Sort::P => Component::P(vec![PItem::Hole(k + 1)]),
        })
        .collect();
    Arrow { dom: i.clone(), cod: i.clone(), comps }
}

/// Sequential composition: `compose(a, b)` applies `a` first, then `b`; each
/// placeholder `xj` in `b` is replaced by `a`'s component `j`.
pub fn compose(a: &Arrow, b: &Arrow) -> Result<Arrow, ArrowError> {
    if a.cod != b.dom {
        return Err(ArrowError::InterfaceMismatch {
            left: a.cod.to_string(),
            right: b.dom.to_string(),
        });
    }
    let comps = b
        .comps
        .iter()
        .map(|c| match c {
            Component::T(t) => Component::T(t.subst(&a.comps)),
            Component::P(items) => {
                let mut out = Vec::new();
                for it in items {
                    match it {
                        PItem::Hole(i) => match &a.comps[*i - 1] {
                            Component::P(inner) => out.extend(inner.iter().cloned()),
                            Component::T(_) => {
                                panic!("predicate hole bound to term component")
                            }
                        },
                        PItem::Atom(p, args) => out.push(PItem::Atom(
                            p.clone(),
                            args.iter().map(|t| t.subst(&a.comps)).collect(),
                        )),
                    }
                }
                Component::P(out)
            }
        })
        .collect();
    Ok(Arrow { dom: a.dom.clone(), cod: b.cod.clone(), comps })
}

/// Parallel composition; `b`'s placeholder indices are shifted past `a`'s
/// domain.
pub fn tensor(a: &Arrow, b: &Arrow) -> Arrow {
    let shift = a.dom.len();
    let mut comps = a.comps.clone();
    comps.extend(b.comps.iter().map(|c| c.shift(shift)));
    Arrow { dom: a.dom.concat(&b.dom), cod: a.cod.concat(&b.cod), comps }
}

/// The permutation swapping a block of `n` past a block of `m`.
pub fn symmetry(n: &Iface, m: &Iface) -> Arrow {
    let dom = n.concat(m);
    let cod = m.concat(n);
    let mut comps = Vec::with_capacity(dom.len());
    for k in 0..m.len() {
        comps.push(hole_component(&m.0[k], n.len() + k + 1));
    }
    for k in 0..n.len() {
        comps.push(hole_component(&n.0[k], k + 1));
    }
    Arrow { dom, cod, comps }
}

/// `n -> n ++ n`, sharing every placeholder twice.
pub fn duplicator(n: &Iface) -> Arrow {
    let mut comps = Vec::with_capacity(2 * n.len());
    for round in 0..2 {
        let _ = round;
        for (k, s) in n.0.iter().enumerate() {
            comps.push(hole_component(s, k + 1));
        }
    }
    Arrow { dom: n.clone(), cod: n.concat(n), comps }
}

/// `n -> e`, the empty tuple.
pub fn discharger(n: &Iface) -> Arrow {
    Arrow { dom: n.clone(), cod: Iface::empty(), comps: vec![] }
}

fn hole_component(s: &Sort, i: usize) -> Component {
    match s {
        Sort::T => Component::T(PlTerm::Hole(i)),
        Sort::P => Component::P(vec![PItem::Hole(i)]),
    }
}

/// The basic arrow of an `n`-ary function symbol: `t^n -> t`.
pub fn op_arrow(f: &str, n: usize) -> Arrow {
    Arrow {
        dom: Iface::terms(n),
        cod: Iface::terms(1),
        comps: vec![Component::T(PlTerm::App(
            f.to_string(),
            (1..=n).map(PlTerm::Hole).collect(),
        ))],
    }
}

/// A permutation arrow on `t^n` from its image map (`images[i]` = the domain
/// position read at codomain position `i+1`).
pub fn perm_arrow(images: &[usize]) -> Arrow {
    let n = images.len();
    Arrow {
        dom: Iface::terms(n),
        cod: Iface::terms(n),
        comps: images.iter().map(|&j| Component::T(PlTerm::Hole(j))).collect(),
    }
}

/// The inverse of a permutation arrow.
pub fn invert_perm(a: &Arrow) -> Option<Arrow> {
    let img = a.as_permutation()?;
    let mut inv = vec![0usize; img.len()];
    for (i, &j) in img.iter().enumerate() {
        inv[j - 1] = i + 1;
    }
    let comps = inv
        .iter()
        .zip(a.dom.0.iter())
        .map(|(&j, s)| hole_component(s, j))
        .collect();
    Some(Arrow { dom: a.cod.clone(), cod: a.dom.clone(), comps })
}

// ---------------------------------------------------------------------------
// Named substitutions and the arrow correspondence

/// A substitution over named variables, with an explicit domain order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub order: Vec<String>,
    pub map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn empty() -> Substitution {
        Substitution { order: vec![], map: BTreeMap::new() }
    }

    pub fn bind(&mut self, v: &str, t: Term) {
        if !self.map.contains_key(v) {
            self.order.push(v.to_string());
        }
        self.map.insert(v.to_string(), t);
    }

    pub fn get(&self, v: &str) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(op, args) => {
                Term::App(op.clone(), args.iter().map(|a| self.apply_term(a)).collect())
            }
        }
    }

    pub fn apply_atom(&self, a: &crate::syntax::Atom) -> crate::syntax::Atom {
        crate::syntax::Atom {
            pred: a.pred.clone(),
            args: a.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    pub fn apply_goal(&self, g: &crate::syntax::Goal) -> crate::syntax::Goal {
        crate::syntax::Goal { atoms: g.atoms.iter().map(|a| self.apply_atom(a)).collect() }
    }

    /// `self` after `other`: apply `other` to every image of `self`, keeping
    /// `self`'s domain (bindings of `other` on variables outside the domain
    /// are appended).
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::empty();
        for v in &self.order {
            out.bind(v, other.apply_term(&self.map[v]));
        }
        for v in &other.order {
            if !out.map.contains_key(v) {
                out.bind(v, other.map[v].clone());
            }
        }
        out
    }

    /// Restrict to the given variables, binding each (identity where unbound).
    pub fn restrict(&self, vars: &[String]) -> Substitution {
        let mut out = Substitution::empty();
        for v in vars {
            out.bind(v, self.map.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())));
        }
        out
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.order {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}/{}", self.map[v], v)?;
        }
        if first {
            write!(f, "e")?;
        }
        Ok(())
    }
}

/// Translate a named substitution to an arrow. `var_order_out` names the
/// codomain positions, `var_order_in` the domain positions.
pub fn substitution_to_arrow(
    s: &Substitution,
    var_order_in: &[String],
    var_order_out: &[String],
) -> Result<Arrow, ArrowError> {
    let index: BTreeMap<&str, usize> =
        var_order_in.iter().enumerate().map(|(i, v)| (v.as_str(), i + 1)).collect();
    let mut comps = Vec::with_capacity(var_order_out.len());
    for v in var_order_out {
        let img = s
            .get(v)
            .ok_or_else(|| ArrowError::Substitution(format!("unbound variable `{v}`")))?;
        comps.push(Component::T(term_to_plterm(img, &index)?));
    }
    Ok(Arrow {
        dom: Iface::terms(var_order_in.len()),
        cod: Iface::terms(var_order_out.len()),
        comps,
    })
}

fn term_to_plterm(t: &Term, index: &BTreeMap<&str, usize>) -> Result<PlTerm, ArrowError> {
    match t {
        Term::Var(v) => index
            .get(v.as_str())
            .map(|&i| PlTerm::Hole(i))
            .ok_or_else(|| ArrowError::Substitution(format!("variable `{v}` not in domain order"))),
        Term::App(op, args) => Ok(PlTerm::App(
            op.clone(),
            args.iter()
                .map(|a| term_to_plterm(a, index))
                .collect::<Result<Vec<_>, _>>()?,
        )),
    }
}

/// Inverse of [`substitution_to_arrow`] on term-sorted arrows.
pub fn arrow_to_substitution(
    a: &Arrow,
    names_in: &[String],
    names_out: &[String],
) -> Result<Substitution, ArrowError> {
    if !a.all_t() {
        return Err(ArrowError::NotTermSorted);
    }
    if names_in.len() != a.dom.len() || names_out.len() != a.cod.len() {
        return Err(ArrowError::Substitution("name sequence length mismatch".into()));
    }
    let mut s = Substitution::empty();
    for (v, c) in names_out.iter().zip(a.comps.iter()) {
        let t = match c {
            Component::T(t) => plterm_to_term(t, names_in),
            Component::P(_) => return Err(ArrowError::NotTermSorted),
        };
        s.bind(v, t);
    }
    Ok(s)
}

pub fn plterm_to_term(t: &PlTerm, names: &[String]) -> Term {
    match t {
        PlTerm::Hole(i) => Term::Var(names[i - 1].clone()),
        PlTerm::App(op, args) => {
            Term::App(op.clone(), args.iter().map(|a| plterm_to_term(a, names)).collect())
        }
    }
}

// ---------------------------------------------------------------------------
// Slice decomposition

/// One layer of a decomposition: `id_{t^left} (x) body (x) id_{t^right}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub left: usize,
    pub body: SliceBody,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SliceBody {
    /// A function symbol `f : t^n -> t`.
    Op(String, usize),
    /// The elementary swap `t t -> t t`.
    Swap,
    /// The elementary duplicator `t -> t t`.
    Dup,
    /// The elementary discharger `t -> e`.
    Drop,
}

impl Slice {
    pub fn arrow(&self) -> Arrow {
        let body = match &self.body {
            SliceBody::Op(f, n) => op_arrow(f, *n),
            SliceBody::Swap => symmetry(&Iface::terms(1), &Iface::terms(1)),
            SliceBody::Dup => duplicator(&Iface::terms(1)),
            SliceBody::Drop => discharger(&Iface::terms(1)),
        };
        let l = identity(&Iface::terms(self.left));
        let r = identity(&Iface::terms(self.right));
        tensor(&tensor(&l, &body), &r)
    }

    /// Codomain position of the body's first output (1-based); the swap and
    /// dup bodies cover this position and the next.
    pub fn at(&self) -> usize {
        self.left + 1
    }
}

/// Decompose a term-sorted arrow into elementary slices whose in-order
/// composition (first slice applied first) rebuilds it exactly.
///
/// Dischargers come first, then duplicators, then one `Op` slice per
/// function node peeled outside-in, and finally a permutation realized as
/// adjacent swaps. Total on term-sorted arrows.
pub fn decompose_slices(a: &Arrow) -> Result<Vec<Slice>, ArrowError> {
    if !a.all_t() {
        return Err(ArrowError::NotTermSorted);
    }
    let mut slices: Vec<Slice> = Vec::new();
    // Peel root applications from the codomain side; emitted outermost-first,
    // reversed at the end.
    let mut outer: Vec<Slice> = Vec::new();
    let mut cur = a.clone();
    'peel: loop {
        for q in 1..=cur.cod.len() {
            if let PlTerm::App(f, args) = cur.term_at(q).clone() {
                outer.push(Slice { left: q - 1, body: SliceBody::Op(f.clone(), args.len()), right: cur.cod.len() - q });
                let mut comps = cur.comps[..q - 1].to_vec();
                comps.extend(args.into_iter().map(Component::T));
                comps.extend_from_slice(&cur.comps[q..]);
                let cod = Iface::terms(comps.len());
                cur = Arrow { dom: cur.dom.clone(), cod, comps };
                continue 'peel;
            }
        }
        break;
    }
    // `cur` is now a tuple of bare placeholders. Emit dischargers for unused
    // placeholders (highest index first keeps earlier indices stable).
    let mut uses = cur.hole_uses();
    for j in (1..=uses.len()).rev() {
        if uses[j - 1] == 0 {
            slices.push(Slice { left: j - 1, body: SliceBody::Drop, right: uses.len() - j });
            cur = drop_dom_var(&cur, j);
            uses.remove(j - 1);
        }
    }
    // Duplicate placeholders used more than once. After each dup the second
    // copy (fresh index j+1) serves the last remaining use.
    loop {
        let uses = cur.hole_uses();
        let Some(j) = uses.iter().position(|&u| u > 1).map(|i| i + 1) else {
            break;
        };
        slices.push(Slice { left: j - 1, body: SliceBody::Dup, right: cur.dom.len() - j });
        // Domain grows by one at position j+1; reroute the last use of j.
        let mut shifted = shift_dom_from(&cur, j + 1);
        let mut last = None;
        for (ci, c) in shifted.comps.iter().enumerate() {
            if let Component::T(t) = c {
                if t.contains_hole(j) {
                    last = Some(ci);
                }
            }
        }
        let ci = last.expect("hole use disappeared");
        if let Component::T(t) = shifted.comps[ci].clone() {
            shifted.comps[ci] = Component::T(replace_last_hole(&t, j, j + 1).0);
        }
        cur = shifted;
    }
    // `cur` is a permutation; realize it by adjacent swaps (bubble sort).
    let img = cur.as_permutation().expect("residue must be a permutation");
    let mut perm: Vec<usize> = img; // perm[i] = dom position at cod slot i+1
    let n = perm.len();
    let mut swaps: Vec<Slice> = Vec::new();
    // Sort perm to identity by adjacent transpositions on the *domain* side.
    // A swap slice at position k exchanges dom slots k, k+1 before the rest.
    loop {
        let mut done = true;
        for i in 0..n.saturating_sub(1) {
            if perm[i] > perm[i + 1] {
                perm.swap(i, i + 1);
                done = false;
            }
        }
        if done {
            break;
        }
    }
    // Replay: repeatedly find an out-of-place adjacent pair in the current
    // permutation and emit the swap that fixes it.
    let mut img = cur.as_permutation().unwrap();
    loop {
        let mut emitted = false;
        for i in 0..n.saturating_sub(1) {
            if img[i] > img[i + 1] {
                // cod slots i+1, i+2 read dom slots img[i] > img[i+1]; swap the
                // cod slots via a Swap slice applied after the rest.
                img.swap(i, i + 1);
                swaps.push(Slice { left: i, body: SliceBody::Swap, right: n - i - 2 });
                emitted = true;
            }
        }
        if !emitted {
            break;
        }
    }
    // Swaps were derived cod-side outermost-last: reverse them onto the tail.
    swaps.reverse();
    slices.extend(swaps);
    slices.extend(outer.into_iter().rev());
    debug_assert_eq!(&compose_slices(&a.dom, &slices).unwrap(), a);
    Ok(slices)
}

/// Rebuild an arrow from its slices (identity on `dom` when empty).
pub fn compose_slices(dom: &Iface, slices: &[Slice]) -> Result<Arrow, ArrowError> {
    let mut acc = identity(dom);
    for s in slices {
        acc = compose(&acc, &s.arrow())?;
    }
    Ok(acc)
}

fn drop_dom_var(a: &Arrow, j: usize) -> Arrow {
    let remap = |t: &PlTerm| remap_holes(t, &|i| if i > j { i - 1 } else { i });
    let mut dom = a.dom.0.clone();
    dom.remove(j - 1);
    Arrow {
        dom: Iface(dom),
        cod: a.cod.clone(),
        comps: a
            .comps
            .iter()
            .map(|c| match c {
                Component::T(t) => Component::T(remap(t)),
                Component::P(_) => unreachable!("all-t arrow"),
            })
            .collect(),
    }
}

fn shift_dom_from(a: &Arrow, from: usize) -> Arrow {
    let remap = |t: &PlTerm| remap_holes(t, &|i| if i >= from { i + 1 } else { i });
    let mut dom = a.dom.0.clone();
    dom.insert(from - 1, Sort::T);
    Arrow {
        dom: Iface(dom),
        cod: a.cod.clone(),
        comps: a
            .comps
            .iter()
            .map(|c| match c {
                Component::T(t) => Component::T(remap(t)),
                Component::P(_) => unreachable!("all-t arrow"),
            })
            .collect(),
    }
}

fn remap_holes(t: &PlTerm, f: &impl Fn(usize) -> usize) -> PlTerm {
    match t {
        PlTerm::Hole(i) => PlTerm::Hole(f(*i)),
        PlTerm::App(op, args) => {
            PlTerm::App(op.clone(), args.iter().map(|a| remap_holes(a, f)).collect())
        }
    }
}

/// Replace the last (rightmost) occurrence of hole `from` by `to`; second
/// result reports whether a replacement happened.
fn replace_last_hole(t: &PlTerm, from: usize, to: usize) -> (PlTerm, bool) {
    match t {
        PlTerm::Hole(i) if *i == from => (PlTerm::Hole(to), true),
        PlTerm::Hole(i) => (PlTerm::Hole(*i), false),
        PlTerm::App(op, args) => {
            let mut done = false;
            let mut out = Vec::with_capacity(args.len());
            for a in args.iter().rev() {
                if done {
                    out.push(a.clone());
                } else {
                    let (na, hit) = replace_last_hole(a, from, to);
                    done = hit;
                    out.push(na);
                }
            }
            out.reverse();
            (PlTerm::App(op.clone(), out), done)
        }
    }
}

// ---------------------------------------------------------------------------
// Display

/// Render an arrow; structural arrows print by name with interface
/// subscripts, anything else as `<comps> : dom -> cod`.
pub fn display_arrow(a: &Arrow) -> String {
    if a.is_identity() {
        return format!("id_{}", a.dom);
    }
    if a.all_t() {
        let n = a.dom.len();
        if *a == symmetry(&Iface::terms(n / 2), &Iface::terms(n - n / 2)) && n >= 2 {
            return format!("gamma_{},{}", Iface::terms(n / 2), Iface::terms(n - n / 2));
        }
        if *a == duplicator(&Iface::terms(n)) && n >= 1 {
            return format!("nabla_{}", a.dom);
        }
        if a.cod.is_empty() && n >= 1 {
            return format!("bang_{}", a.dom);
        }
    }
    let mut s = String::from("<");
    for (i, c) in a.comps.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        match c {
            Component::T(t) => s.push_str(&t.to_string()),
            Component::P(items) => {
                if items.is_empty() {
                    s.push_str("true");
                }
                for (k, it) in items.iter().enumerate() {
                    if k > 0 {
                        s.push_str(" & ");
                    }
                    match it {
                        PItem::Hole(i) => s.push_str(&format!("P{i}")),
                        PItem::Atom(p, args) => {
                            s.push_str(&PlTerm::App(p.clone(), args.clone()).to_string())
                        }
                    }
                }
            }
        }
    }
    s.push_str(&format!("> : {} -> {}", a.dom, a.cod));
    s
}


/// Run the axiom suite on randomly generated arrows: every law of the
/// ambient category — associativity and identities of composition,
/// functoriality and monoid laws of the tensor, coherence and naturality of
/// symmetries, duplicators and dischargers — asserted as value equality.
/// Returns the number of failures (zero, unless the representation is
/// broken).
pub fn law_suite(seed: u64, rounds: usize) -> usize {
    use crate::gen::{random_arrow, Rng};
    let mut rng = Rng::new(seed);
    let mut failures = 0usize;
    let mut check = |ok: bool| {
        if !ok {
            failures += 1;
        }
    };
    for _ in 0..rounds {
        let n = rng.below(4);
        let m = rng.below(4);
        let k = rng.below(4);
        let a = random_arrow(&mut rng, n, m, 3);
        let b = random_arrow(&mut rng, m, k, 3);
        let w1 = rng.below(4);
        let w2 = rng.below(4);
        let w3 = rng.below(4);
        let c = random_arrow(&mut rng, k, w1, 3);
        let d = random_arrow(&mut rng, w2, w3, 3);

        // category laws
        let ab = compose(&a, &b).unwrap();
        let bc = compose(&b, &c).unwrap();
        check(compose(&ab, &c).unwrap() == compose(&a, &bc).unwrap());
        check(compose(&identity(&a.dom), &a).unwrap() == a);
        check(compose(&a, &identity(&a.cod)).unwrap() == a);

        // tensor functoriality and monoid laws
        let e = identity(&Iface::empty());
        check(tensor(&a, &e) == a);
        check(tensor(&e, &a) == a);
        check(tensor(&a, &tensor(&c, &d)) == tensor(&tensor(&a, &c), &d));
        let a2 = duplicator(&a.cod);
        let d2 = discharger(&d.cod);
        check(
            tensor(&compose(&a, &a2).unwrap(), &compose(&d, &d2).unwrap())
                == compose(&tensor(&a, &d), &tensor(&a2, &d2)).unwrap(),
        );
        check(identity(&a.dom.concat(&d.dom)) == tensor(&identity(&a.dom), &identity(&d.dom)));

        // symmetry coherence and involution
        let (tn, tm, tk) = (Iface::terms(n), Iface::terms(m), Iface::terms(k));
        check(
            symmetry(&tn, &tm.concat(&tk))
                == compose(
                    &tensor(&symmetry(&tn, &tm), &identity(&tk)),
                    &tensor(&identity(&tm), &symmetry(&tn, &tk)),
                )
                .unwrap(),
        );
        check(symmetry(&tn, &Iface::empty()) == identity(&tn));
        check(compose(&symmetry(&tn, &tm), &symmetry(&tm, &tn)).unwrap() == identity(&tn.concat(&tm)));

        // duplicator coherence
        check(
            duplicator(&tn.concat(&tm))
                == compose(
                    &tensor(&duplicator(&tn), &duplicator(&tm)),
                    &tensor(&tensor(&identity(&tn), &symmetry(&tn, &tm)), &identity(&tm)),
                )
                .unwrap(),
        );
        check(duplicator(&Iface::empty()) == identity(&Iface::empty()));
        check(
            compose(&duplicator(&tn), &tensor(&identity(&tn), &duplicator(&tn))).unwrap()
                == compose(&duplicator(&tn), &tensor(&duplicator(&tn), &identity(&tn))).unwrap(),
        );
        check(compose(&duplicator(&tn), &symmetry(&tn, &tn)).unwrap() == duplicator(&tn));

        // discharger coherence
        check(discharger(&tn.concat(&tm)) == tensor(&discharger(&tn), &discharger(&tm)));
        check(discharger(&Iface::empty()) == identity(&Iface::empty()));
        check(
            compose(&duplicator(&tn), &tensor(&identity(&tn), &discharger(&tn))).unwrap()
                == identity(&tn),
        );

        // naturality
        check(
            compose(&tensor(&a, &d), &symmetry(&a.cod, &d.cod)).unwrap()
                == compose(&symmetry(&a.dom, &d.dom), &tensor(&d, &a)).unwrap(),
        );
        check(
            compose(&a, &duplicator(&a.cod)).unwrap()
                == compose(&duplicator(&a.dom), &tensor(&a, &a)).unwrap(),
        );
        check(compose(&a, &discharger(&a.cod)).unwrap() == discharger(&a.dom));

        // slice decomposition round trip
        if let Ok(slices) = decompose_slices(&a) {
            check(compose_slices(&a.dom, &slices).unwrap() == a);
        }
    }
    failures
}
