//! Named-variable syntax of pure logic programs: terms, atoms, goals,
//! clauses, programs, and the Prolog-like concrete syntax.
//!
//! The accepted language is deliberately small: lowercase functors and
//! predicates, uppercase (or `_`-leading) variables, clauses terminated by
//! `.`, `%` line comments. No operators, arithmetic, negation, cut or list
//! sugar.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A first-order term: a variable or a function application.
///
/// Constants are zero-ary applications.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::App(name.to_string(), vec![])
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Longest root-to-leaf path, counting every symbol node. A constant has
    /// depth 1, `s(0)` depth 2, a bare variable depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|w| w == v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => {
                for a in args {
                    a.vars_into(out);
                }
            }
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(op, args) => {
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

/// An atomic formula `p(t1,...,tn)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom { pred: pred.to_string(), args }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars_into(&self, out: &mut Vec<String>) {
        for a in &self.args {
            a.vars_into(out);
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Term::App(self.pred.clone(), self.args.clone()))
    }
}

/// A conjunctive goal. The empty sequence is the empty goal, printed `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Goal {
    pub atoms: Vec<Atom>,
}

impl Goal {
    pub fn empty() -> Goal {
        Goal { atoms: vec![] }
    }

    pub fn single(a: Atom) -> Goal {
        Goal { atoms: vec![a] }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Conjunction, flattening on the right.
    pub fn conj(&self, other: &Goal) -> Goal {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Goal { atoms }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A definite Horn clause `head :- body` with a program-unique name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub id: String,
    pub head: Atom,
    pub body: Goal,
}

impl Clause {
    /// Variables of the clause in first-occurrence order, head first.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.head.vars_into(&mut out);
        for a in &self.body.atoms {
            a.vars_into(&mut out);
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            write!(f, "{}.", self.head)
        } else {
            write!(f, "{} :- {}.", self.head, self.body)
        }
    }
}

/// Function and predicate symbols with their arities. The two namespaces are
/// disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    pub functions: BTreeMap<String, usize>,
    pub predicates: BTreeMap<String, usize>,
}

impl Signature {
    fn note_term(&mut self, t: &Term) -> Result<(), ParseError> {
        if let Term::App(op, args) = t {
            self.note_function(op, args.len())?;
            for a in args {
                self.note_term(a)?;
            }
        }
        Ok(())
    }

    fn note_function(&mut self, name: &str, arity: usize) -> Result<(), ParseError> {
        if self.predicates.contains_key(name) {
            return Err(ParseError::NameCollision { name: name.to_string() });
        }
        match self.functions.get(name) {
            Some(&a) if a != arity => Err(ParseError::ArityClash {
                name: name.to_string(),
                first: a,
                second: arity,
            }),
            _ => {
                self.functions.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    fn note_atom(&mut self, at: &Atom) -> Result<(), ParseError> {
        if self.functions.contains_key(&at.pred) {
            return Err(ParseError::NameCollision { name: at.pred.clone() });
        }
        match self.predicates.get(&at.pred) {
            Some(&a) if a != at.args.len() => Err(ParseError::ArityClash {
                name: at.pred.clone(),
                first: a,
                second: at.args.len(),
            }),
            _ => {
                self.predicates.insert(at.pred.clone(), at.args.len());
                for t in &at.args {
                    self.note_term(t)?;
                }
                Ok(())
            }
        }
    }
}

/// A finite collection of clauses together with the signature inferred from
/// their symbol occurrences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub signature: Signature,
}

impl Program {
    pub fn clause(&self, id: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Counter handing out `_G<n>` names. The parser rejects this namespace in
/// user input, so names from here are fresh against any parsed program.
#[derive(Debug, Default)]
pub struct FreshSource {
    next: u64,
}

impl FreshSource {
    pub fn new() -> FreshSource {
        FreshSource { next: 0 }
    }

    pub fn starting_at(n: u64) -> FreshSource {
        FreshSource { next: n }
    }

    pub fn fresh(&mut self) -> String {
        let n = self.next;
        self.next += 1;
        format!("_G{n}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("symbol `{name}` used with arities {first} and {second}")]
    ArityClash { name: String, first: usize, second: usize },
    #[error("`{name}` used both as function and predicate symbol")]
    NameCollision { name: String },
    #[error("variable namespace `_G` is reserved for generated names: `{name}`")]
    ReservedVariable { name: String },
}

// ---------------------------------------------------------------------------
// Parsing

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Scanner<'a> {
        Scanner { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(c) = self.bump() {
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                self.bump();
            }
            _ => return self.err("expected identifier"),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
            let lit = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
            return Ok(Term::App(lit, vec![]));
        }
        let name = self.ident()?;
        let first = name.as_bytes()[0];
        if first.is_ascii_uppercase() || first == b'_' {
            if name.starts_with("_G") && name[2..].chars().all(|c| c.is_ascii_digit()) && name.len() > 2 {
                return Err(ParseError::ReservedVariable { name });
            }
            return Ok(Term::Var(name));
        }
        let mut args = Vec::new();
        self.skip_ws();
        if self.eat(b'(') {
            loop {
                args.push(self.term()?);
                self.skip_ws();
                if self.eat(b',') {
                    continue;
                }
                self.expect(b')')?;
                break;
            }
        }
        Ok(Term::App(name, args))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let t = self.term()?;
        match t {
            Term::App(pred, args) => Ok(Atom { pred, args }),
            Term::Var(v) => self.err(format!("expected an atom, found variable `{v}`")),
        }
    }

    fn atom_sequence(&mut self) -> Result<Vec<Atom>, ParseError> {
        let mut atoms = vec![self.atom()?];
        loop {
            self.skip_ws();
            if self.eat(b',') {
                atoms.push(self.atom()?);
            } else {
                break;
            }
        }
        Ok(atoms)
    }
}

/// Parse a program, one clause per `.`, inferring the signature.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut sc = Scanner::new(text);
    let mut clauses = Vec::new();
    let mut signature = Signature::default();
    loop {
        sc.skip_ws();
        if sc.peek().is_none() {
            break;
        }
        let head = sc.atom()?;
        sc.skip_ws();
        let body = if sc.eat(b':') {
            sc.expect(b'-')?;
            let atoms = sc.atom_sequence()?;
            sc.skip_ws();
            Goal { atoms }
        } else {
            Goal::empty()
        };
        sc.expect(b'.')?;
        let id = format!("c{}", clauses.len() + 1);
        signature.note_atom(&head)?;
        for a in &body.atoms {
            signature.note_atom(a)?;
        }
        clauses.push(Clause { id, head, body });
    }
    Ok(Program { clauses, signature })
}

/// Parse a goal of the form `?- a1, ..., ak.`; `?- .` and `?- true.` denote
/// the empty goal. The leading `?-` may be omitted.
pub fn parse_goal(text: &str) -> Result<Goal, ParseError> {
    let mut sc = Scanner::new(text);
    sc.skip_ws();
    if sc.eat(b'?') {
        sc.expect(b'-')?;
    }
    sc.skip_ws();
    if sc.eat(b'.') {
        return Ok(Goal::empty());
    }
    let atoms = sc.atom_sequence()?;
    sc.skip_ws();
    sc.expect(b'.')?;
    sc.skip_ws();
    if sc.peek().is_some() {
        return sc.err("trailing input after goal");
    }
    if atoms.len() == 1 && atoms[0].pred == "true" && atoms[0].args.is_empty() {
        return Ok(Goal::empty());
    }
    Ok(Goal { atoms })
}

/// Parse a goal and check its predicates and functions against a signature.
pub fn parse_goal_checked(text: &str, sig: &Signature) -> Result<Goal, ParseError> {
    let goal = parse_goal(text)?;
    let mut probe = sig.clone();
    for a in &goal.atoms {
        probe.note_atom(a)?;
    }
    for a in &goal.atoms {
        if !sig.predicates.contains_key(&a.pred) {
            return Err(ParseError::Syntax {
                line: 1,
                col: 1,
                msg: format!("unknown predicate `{}`", a.pred),
            });
        }
    }
    Ok(goal)
}

/// Free variables of a goal in left-to-right first-occurrence order.
pub fn variables_of(g: &Goal) -> Vec<String> {
    let mut out = Vec::new();
    for a in &g.atoms {
        a.vars_into(&mut out);
    }
    out
}

/// Rename all clause variables injectively with fresh names, preserving the
/// sharing pattern.
pub fn rename_clause(c: &Clause, fresh: &mut FreshSource) -> Clause {
    let vars = c.variables();
    let map: BTreeMap<String, String> = vars.into_iter().map(|v| (v, fresh.fresh())).collect();
    let ren_term = |t: &Term| rename_term(t, &map);
    Clause {
        id: c.id.clone(),
        head: Atom {
            pred: c.head.pred.clone(),
            args: c.head.args.iter().map(ren_term).collect(),
        },
        body: Goal {
            atoms: c
                .body
                .atoms
                .iter()
                .map(|a| Atom { pred: a.pred.clone(), args: a.args.iter().map(ren_term).collect() })
                .collect(),
        },
    }
}

fn rename_term(t: &Term, map: &BTreeMap<String, String>) -> Term {
    match t {
        Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        Term::App(op, args) => {
            Term::App(op.clone(), args.iter().map(|a| rename_term(a, map)).collect())
        }
    }
}

/// The signature actually occurring in a program.
pub fn signature_of(p: &Program) -> Signature {
    p.signature.clone()
}
